"""Robust aggregation of per-provider likelihood estimates and disagreement stats.

The aggregate is the per-state sample median, which tolerates up to
floor((M-1)/2) arbitrarily corrupted providers. Disagreement is the
coefficient of variation (sample standard deviation over guarded mean),
a scale-free spread measure comparable across states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LikelihoodVector, _frozen_array
from .errors import EmptyPanel, InsufficientProviders, RaggedMatrix

CV_MEAN_GUARD = 1e-8


@dataclass(frozen=True, eq=False)
class LikelihoodPanel:
    """Per-provider normalized estimates plus their aggregate and spread.

    ``per_provider`` is indexed (provider, state). ``disagreement`` is None for
    single-provider panels, where a sample standard deviation is undefined;
    gate policies that need it must supply at least two providers.
    """

    per_provider: np.ndarray
    aggregated: LikelihoodVector
    disagreement: np.ndarray | None
    max_disagreement: float | None
    providers: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "per_provider", _frozen_array(self.per_provider))
        if self.disagreement is not None:
            object.__setattr__(self, "disagreement", _frozen_array(self.disagreement))


def aggregate_median(estimates) -> LikelihoodVector:
    """Per-state sample median of an (providers x states) estimate matrix.

    Even provider counts use the midpoint of the two central order statistics.
    """
    matrix = _as_matrix(estimates)
    return LikelihoodVector(np.median(matrix, axis=0))


def disagreement_cv(estimates) -> float:
    """Coefficient of variation of one state's column of provider estimates.

    Uses the sample (M-1 denominator) standard deviation; the mean is guarded
    below at 1e-8 so an all-zero column yields 0 rather than dividing by zero.
    """
    column = np.asarray(estimates, dtype=float).reshape(-1)
    if len(column) < 2:
        raise InsufficientProviders("disagreement needs at least 2 providers")
    sd = float(column.std(ddof=1))
    mean = max(float(column.mean()), CV_MEAN_GUARD)
    return sd / mean


def build_panel(estimates, providers: tuple[str, ...] = ()) -> LikelihoodPanel:
    """Bundle a rectangular estimate matrix into a panel with aggregate and CVs."""
    matrix = _as_matrix(estimates)
    aggregated = LikelihoodVector(np.median(matrix, axis=0))
    if matrix.shape[0] >= 2:
        sd = matrix.std(axis=0, ddof=1)
        means = np.maximum(matrix.mean(axis=0), CV_MEAN_GUARD)
        cvs = sd / means
        max_cv = float(cvs.max())
    else:
        cvs = None
        max_cv = None
    return LikelihoodPanel(
        per_provider=matrix,
        aggregated=aggregated,
        disagreement=cvs,
        max_disagreement=max_cv,
        providers=tuple(providers),
    )


def _as_matrix(estimates) -> np.ndarray:
    rows = list(estimates)
    if not rows:
        raise EmptyPanel("no provider estimates")
    lengths = {len(np.atleast_1d(r)) for r in rows}
    if len(lengths) != 1:
        raise RaggedMatrix(f"provider rows have differing lengths: {sorted(lengths)}")
    matrix = np.asarray(rows, dtype=float)
    if matrix.ndim != 2 or matrix.shape[1] == 0:
        raise EmptyPanel("estimates must form a non-empty (providers x states) matrix")
    if (matrix < 0).any() or (matrix > 1).any():
        raise ValueError("estimates must lie in [0, 1]")
    return matrix
