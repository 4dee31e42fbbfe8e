import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from costwise.core import Belief, LikelihoodVector
from costwise.ensemble import build_panel
from costwise.errors import InconsistentModel
from costwise.hiring import binary_problem, default_problem
from costwise.voi import InfoSource, should_gather, voi_approx, voi_exact


def beliefs_of(n):
    return (
        st.lists(st.floats(0.01, 1.0), min_size=n, max_size=n)
        .map(lambda xs: np.asarray(xs) / np.sum(xs))
        .map(Belief)
    )


def source(rho=0.7, cost=150.0, outcome_model=None):
    return InfoSource(name="screen", cost=cost, rho=rho, outcome_model=outcome_model)


def revealing_model(k):
    # outcome j fires iff state j: p(z|s) is the identity
    return {f"z{j}": tuple(1.0 if i == j else 0.0 for i in range(k)) for j in range(k)}


def uninformative_model(k, outcomes=3):
    return {f"z{j}": tuple(1.0 / outcomes for _ in range(k)) for j in range(outcomes)}


class TestVoiApprox:
    def test_degenerate_belief_is_zero(self):
        problem = binary_problem()
        assert voi_approx(Belief(np.asarray([1.0, 0.0])), problem, source()) == 0.0

    def test_hand_evaluated_expected_costs(self):
        # belief [0.5, 0.5]: best action now is interview at 1250; perfect info
        # costs 0; VOI = 0.7 * 1250 = 875
        problem = binary_problem()
        value = voi_approx(Belief(np.asarray([0.5, 0.5])), problem, source(rho=0.7))
        assert value == pytest.approx(875.0)

    def test_zero_rho_is_zero(self):
        problem = binary_problem()
        assert voi_approx(Belief(np.asarray([0.4, 0.6])), problem, source(rho=0.0)) == 0.0

    @given(beliefs_of(2), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    @settings(max_examples=200)
    def test_monotone_in_rho(self, belief, rho1, rho2):
        problem = binary_problem()
        lo, hi = sorted([rho1, rho2])
        assert voi_approx(belief, problem, source(rho=lo)) <= voi_approx(
            belief, problem, source(rho=hi)
        ) + 1e-12

    @given(beliefs_of(4))
    @settings(max_examples=200)
    def test_nonnegative(self, belief):
        problem = default_problem()
        assert voi_approx(belief, problem, source()) >= -1e-12

    def test_minimizes_over_terminal_actions_only(self):
        # the cheap non-terminal screen row must not be counted as an action
        problem = default_problem()
        belief = Belief(np.asarray([0.25, 0.25, 0.25, 0.25]))
        value = voi_approx(belief, problem, source(rho=1.0))
        reject = float(problem.cost[0] @ belief.probs)
        interview = float(problem.cost[2] @ belief.probs)
        perfect = float(
            (np.minimum(problem.cost[0], problem.cost[2]) * belief.probs).sum()
        )
        assert value == pytest.approx(min(reject, interview) - perfect)


class TestVoiExact:
    def test_uninformative_source_is_zero(self):
        problem = binary_problem()
        src = source(outcome_model=uninformative_model(2))
        value = voi_exact(Belief(np.asarray([0.7, 0.3])), problem, src)
        assert value == pytest.approx(0.0, abs=1e-12)

    def test_perfectly_revealing_equals_rho_one_approx(self):
        problem = binary_problem()
        src = source(rho=1.0, outcome_model=revealing_model(2))
        belief = Belief(np.asarray([0.7, 0.3]))
        assert voi_exact(belief, problem, src) == pytest.approx(
            voi_approx(belief, problem, src), abs=1e-9
        )

    def test_frozen_enumeration_example(self):
        # independent enumeration (see oracle derivation): belief [0.9, 0.1],
        # p(hi|s)=[0.1, 0.8] gives current 2250, expected-after 1025
        problem = binary_problem()
        src = source(outcome_model={"hi": (0.1, 0.8), "lo": (0.9, 0.2)})
        value = voi_exact(Belief(np.asarray([0.9, 0.1])), problem, src)
        assert value == pytest.approx(1225.0, abs=1e-9)

    def test_explicit_likelihood_map_matches_default(self):
        problem = binary_problem()
        model = {"hi": (0.1, 0.8), "lo": (0.9, 0.2)}
        src = source(outcome_model=model)
        belief = Belief(np.asarray([0.9, 0.1]))
        lik_map = {z: LikelihoodVector(np.asarray(v)) for z, v in model.items()}
        assert voi_exact(belief, problem, src, lik_map) == pytest.approx(
            voi_exact(belief, problem, src)
        )

    def test_inconsistent_rows_rejected(self):
        with pytest.raises(InconsistentModel):
            source(outcome_model={"hi": (0.5, 0.8), "lo": (0.4, 0.2)})

    def test_missing_model_rejected(self):
        problem = binary_problem()
        with pytest.raises(InconsistentModel):
            voi_exact(Belief(np.asarray([0.5, 0.5])), problem, source())

    @given(beliefs_of(4))
    @settings(max_examples=100)
    def test_nonnegative_on_random_beliefs(self, belief):
        problem = default_problem()
        model = {
            "low": (0.90, 0.30, 0.10, 0.05),
            "mid": (0.05, 0.50, 0.30, 0.00),
            "high": (0.05, 0.20, 0.60, 0.95),
        }
        value = voi_exact(belief, problem, source(outcome_model=model))
        assert value >= -1e-9

    def test_rank_correlation_with_approx(self):
        problem = default_problem()
        model = {
            "low": (0.90, 0.30, 0.10, 0.05),
            "mid": (0.05, 0.50, 0.30, 0.00),
            "high": (0.05, 0.20, 0.60, 0.95),
        }
        src = source(outcome_model=model)
        rng = np.random.default_rng(11)
        approx, exact = [], []
        for _ in range(200):
            b = Belief(rng.dirichlet(np.ones(4)))
            approx.append(voi_approx(b, problem, src))
            exact.append(voi_exact(b, problem, src))
        corr = stats.spearmanr(approx, exact).statistic
        assert corr > 0.3


class TestShouldGather:
    def low_disagreement_panel(self):
        return build_panel([[0.5, 0.5], [0.5, 0.5], [0.51, 0.51]])

    def high_disagreement_panel(self):
        return build_panel([[0.1, 0.9], [0.8, 0.2], [0.5, 0.5]])

    def test_low_disagreement_stops_regardless_of_voi(self):
        problem = binary_problem()
        belief = Belief(np.asarray([0.5, 0.5]))  # VOI 875 >> cost
        decision = should_gather(
            self.low_disagreement_panel(), belief, problem, source(), tau_d=0.15
        )
        assert not decision.gather
        assert decision.voi_exceeds_cost
        assert not decision.disagreement_exceeded

    def test_gathers_when_both_legs_pass(self):
        problem = binary_problem()
        belief = Belief(np.asarray([0.5, 0.5]))
        decision = should_gather(
            self.high_disagreement_panel(), belief, problem, source(cost=150.0), tau_d=0.15
        )
        assert decision.gather
        assert decision.voi == pytest.approx(875.0)

    def test_stops_when_voi_below_cost(self):
        problem = binary_problem()
        belief = Belief(np.asarray([0.5, 0.5]))
        decision = should_gather(
            self.high_disagreement_panel(), belief, problem, source(cost=1000.0), tau_d=0.15
        )
        assert not decision.gather
        assert decision.disagreement_exceeded
        assert not decision.voi_exceeds_cost

    def test_records_both_legs(self):
        problem = binary_problem()
        belief = Belief(np.asarray([0.9, 0.1]))
        decision = should_gather(
            self.high_disagreement_panel(), belief, problem, source(), tau_d=0.15
        )
        assert decision.max_disagreement is not None
        assert decision.source_cost == 150.0
