"""Synthetic candidate population: states, features, demographics, templated
resume text, and latent phone-screen performances. Fully seeded; candidate i is
generated from a stream derived from (master seed, i), so generation order and
parallelism cannot change the corpus.

The decision pipeline consumes candidates only through the observation
constructors at the bottom of this module; ground-truth state otherwise stays
inside generation and evaluation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .core import DecisionProblem
from .elicitation import Observation

GENDERS = ("male", "female", "non-binary")
GENDER_PROBS = (0.512, 0.438, 0.050)
ETHNICITIES = ("White", "Black", "Hispanic", "Asian")
ETHNICITY_PROBS = (0.382, 0.168, 0.215, 0.235)

UNIVERSITY_TIERS = ("elite", "top50", "average", "below_average")
TIER_PROBS = {
    0: (0.05, 0.10, 0.30, 0.55),
    1: (0.10, 0.25, 0.45, 0.20),
    2: (0.20, 0.50, 0.25, 0.05),
    3: (0.80, 0.15, 0.05, 0.00),
}
DEGREES = ("BS", "MS", "PhD")
DEGREE_PROBS = {
    0: (0.75, 0.20, 0.05),
    1: (0.65, 0.30, 0.05),
    2: (0.50, 0.40, 0.10),
    3: (0.30, 0.30, 0.40),
}
# Beta(alpha, beta) rescaled into [lo, hi]
GPA_PARAMS = {
    0: (2.0, 5.0, 2.0, 3.5),
    1: (3.0, 3.0, 2.5, 3.8),
    2: (5.0, 2.0, 3.0, 4.0),
    3: (8.0, 1.0, 3.5, 4.0),
}
# Truncated normal (mu, sigma, lo, hi)
YEARS_PARAMS = {
    0: (0.5, 0.3, 0.0, 2.0),
    1: (2.0, 1.0, 1.0, 5.0),
    2: (4.0, 1.5, 2.0, 8.0),
    3: (7.0, 2.0, 5.0, 15.0),
}
COMPANY_TYPES = ("faang", "tier2", "startup", "unknown")
COMPANY_PROBS = {
    0: (0.05, 0.15, 0.30, 0.50),
    1: (0.10, 0.30, 0.40, 0.20),
    2: (0.25, 0.45, 0.25, 0.05),
    3: (0.60, 0.30, 0.10, 0.00),
}
PROJECT_LAMBDA = {0: 1.0, 1: 2.0, 2: 4.0, 3: 6.0}
COMPLEXITIES = ("advanced", "intermediate", "basic")
COMPLEXITY_PROBS = {
    0: (0.10, 0.30, 0.60),
    1: (0.20, 0.50, 0.30),
    2: (0.40, 0.45, 0.15),
    3: (0.70, 0.25, 0.05),
}
PROJECT_DOMAINS = ("web", "mobile", "ml", "systems", "other")
STACK_LAMBDA = {0: 3.0, 1: 6.0, 2: 10.0, 3: 15.0}

# Phone-screen performance: 10 * Beta(alpha_s, beta_s)
SCREEN_BETAS = {0: (2.0, 8.0), 1: (5.0, 5.0), 2: (7.0, 3.0), 3: (9.0, 1.0)}
# Typical screen score per level; used to place an observed performance on the
# quality axis and to pick its nearest level.
SCREEN_ANCHORS = (2.0, 5.0, 7.0, 9.0)

# Affine calibration mapping the raw feature composite onto the 0..K-1 quality
# axis so that per-state signal means land near their state ordinals.
SIGNAL_SLOPE = 1.46
SIGNAL_INTERCEPT = -0.94
# How the resume reads is not a pure function of the underlying record: the
# same credentials can be presented convincingly or poorly. This per-candidate
# offset (seeded at generation) moves the signal scorers perceive without
# touching the features themselves, so some resumes genuinely mislead. Most
# candidates present close to their record; a minority inflate or undersell
# dramatically, which is what makes resume-only decisions risky.
PRESENTATION_SD = 0.35
PRESENTATION_OUTLIER_SHARE = 0.18
PRESENTATION_OUTLIER_SD = 1.40

RESUME_WORD_MIN = 300
RESUME_WORD_MAX = 500

_UNIVERSITIES = {
    "elite": ("Stanford University", "MIT", "Carnegie Mellon University", "UC Berkeley"),
    "top50": ("University of Washington", "UT Austin", "Purdue University", "University of Wisconsin"),
    "average": ("San Jose State University", "University of Dayton", "Kent State University", "Cal State Fullerton"),
    "below_average": ("Lakeview College", "Tri-County State University", "Plainfield University", "Eastgate College"),
}
_COMPANIES = {
    "faang": ("Google", "Meta", "Amazon", "Apple", "Microsoft", "Netflix"),
    "tier2": ("Stripe", "Airbnb", "Uber", "Salesforce", "Adobe", "Shopify"),
    "startup": ("Nexa Labs", "Brightpath", "Quantive", "Parallel Works", "Hearthware", "Lumenly"),
    "unknown": ("Regional Data Services", "Midwest Software Solutions", "Apex Consulting Group", "BlueRiver IT", "Corelink Systems"),
}
_TECHNOLOGIES = (
    "Python", "Java", "C++", "Go", "Rust", "TypeScript", "JavaScript", "SQL",
    "React", "Node.js", "Django", "Flask", "Spring", "PostgreSQL", "MySQL",
    "MongoDB", "Redis", "Kafka", "Docker", "Kubernetes", "AWS", "GCP", "Azure",
    "Terraform", "gRPC", "GraphQL", "Spark", "Airflow", "PyTorch", "TensorFlow",
    "Elasticsearch", "RabbitMQ",
)
_PROJECT_NOUNS = (
    "inventory tracker", "log analytics pipeline", "recommendation engine",
    "chat platform", "billing reconciler", "deployment dashboard",
    "image tagging service", "task scheduler", "API gateway", "metrics collector",
    "fraud screening tool", "document search index",
)


def _load_names() -> dict:
    with resources.files("costwise.data").joinpath("names.json").open() as fh:
        return json.load(fh)


_NAMES = _load_names()


@dataclass(frozen=True)
class Candidate:
    id: str
    true_state: str
    features: Mapping
    gender: str
    ethnicity: str
    name: str
    resume_text: str
    screen_performance: float
    signal_level: float

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "true_state": self.true_state,
            "features": dict(self.features),
            "gender": self.gender,
            "ethnicity": self.ethnicity,
            "name": self.name,
            "resume_text": self.resume_text,
            "screen_performance": self.screen_performance,
            "signal_level": self.signal_level,
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "Candidate":
        return cls(**record)


def sample_screen_performance(state_index: int, rng: np.random.Generator) -> float:
    """Latent phone-screen score in [0, 10]: 10 x Beta(alpha_s, beta_s)."""
    alpha, beta = SCREEN_BETAS[state_index]
    return float(10.0 * rng.beta(alpha, beta))


def _truncated_normal(mu, sigma, lo, hi, rng: np.random.Generator) -> float:
    # rejection from the parent normal; bounds here are loose enough that this
    # terminates quickly
    for _ in range(1000):
        x = rng.normal(mu, sigma)
        if lo <= x <= hi:
            return float(x)
    return float(min(hi, max(lo, mu)))


def _categorical(options, probs, rng: np.random.Generator):
    return options[int(rng.choice(len(options), p=np.asarray(probs) / np.sum(probs)))]


def _raw_signal(features: Mapping) -> float:
    tier_level = {"elite": 3.0, "top50": 2.0, "average": 1.0, "below_average": 0.0}[
        features["university_tier"]
    ]
    degree_level = {"BS": 0.6, "MS": 1.8, "PhD": 3.0}[features["degree"]]
    gpa_level = (features["gpa"] - 2.0) / 2.0 * 3.0
    years_level = 3.0 * min(features["years"], 8.0) / 8.0
    company_levels = {"faang": 3.0, "tier2": 2.0, "startup": 1.0, "unknown": 0.3}
    prestige_level = max(
        (company_levels[kind] for _, kind in features["companies"]), default=0.0
    )
    projects_level = 3.0 * min(features["project_count"], 6) / 6.0
    complexity_level = {"advanced": 3.0, "intermediate": 1.5, "basic": 0.5}[
        features["project_complexity"]
    ]
    stack_level = 3.0 * min(features["stack_size"] - 2, 15) / 15.0
    return (
        0.16 * tier_level
        + 0.09 * degree_level
        + 0.13 * gpa_level
        + 0.20 * years_level
        + 0.13 * prestige_level
        + 0.10 * projects_level
        + 0.10 * complexity_level
        + 0.09 * stack_level
    )


def signal_level(features: Mapping, n_states: int = 4, presentation: float = 0.0) -> float:
    """Perceived position on the quality axis: calibrated feature composite
    plus the candidate's presentation offset, clipped to [0, K-1]."""
    raw = _raw_signal(features)
    level = SIGNAL_INTERCEPT + SIGNAL_SLOPE * raw + presentation
    return float(min(n_states - 1.0, max(0.0, level)))


def _sample_candidate(index: int, problem: DecisionProblem, seed: int) -> Candidate:
    rng = np.random.default_rng(np.random.SeedSequence((abs(int(seed)), int(index))))
    s = int(rng.choice(len(problem.states), p=problem.prior))

    tier = _categorical(UNIVERSITY_TIERS, TIER_PROBS[s], rng)
    degree = _categorical(DEGREES, DEGREE_PROBS[s], rng)
    a, b, lo, hi = GPA_PARAMS[s]
    gpa = round(lo + (hi - lo) * float(rng.beta(a, b)), 2)
    mu, sigma, ylo, yhi = YEARS_PARAMS[s]
    years = round(_truncated_normal(mu, sigma, ylo, yhi, rng), 1)

    n_jobs = max(1, min(3, int(round(years / 2.5)))) if years >= 0.5 else 1
    companies = []
    for _ in range(n_jobs):
        kind = _categorical(COMPANY_TYPES, COMPANY_PROBS[s], rng)
        name = _COMPANIES[kind][int(rng.integers(len(_COMPANIES[kind])))]
        companies.append((name, kind))

    project_count = int(rng.poisson(PROJECT_LAMBDA[s]))
    complexity = _categorical(COMPLEXITIES, COMPLEXITY_PROBS[s], rng)
    domains = [
        PROJECT_DOMAINS[int(rng.integers(len(PROJECT_DOMAINS)))]
        for _ in range(min(project_count, 6))
    ]
    stack_size = int(rng.poisson(STACK_LAMBDA[s])) + 2
    stack = list(
        rng.choice(len(_TECHNOLOGIES), size=min(stack_size, len(_TECHNOLOGIES)), replace=False)
    )
    stack = [_TECHNOLOGIES[i] for i in stack]

    gender = _categorical(GENDERS, GENDER_PROBS, rng)
    ethnicity = _categorical(ETHNICITIES, ETHNICITY_PROBS, rng)
    first_pool = _NAMES["first"][ethnicity][gender]
    last_pool = _NAMES["last"][ethnicity]
    name = (
        f"{first_pool[int(rng.integers(len(first_pool)))]} "
        f"{last_pool[int(rng.integers(len(last_pool)))]}"
    )

    features = {
        "university_tier": tier,
        "university": _UNIVERSITIES[tier][int(rng.integers(len(_UNIVERSITIES[tier])))],
        "degree": degree,
        "gpa": gpa,
        "years": years,
        "companies": companies,
        "project_count": project_count,
        "project_complexity": complexity,
        "project_domains": domains,
        "stack": stack,
        "stack_size": stack_size,
    }
    cand_id = f"cand-{index:06d}"
    spread = (
        PRESENTATION_OUTLIER_SD
        if rng.random() < PRESENTATION_OUTLIER_SHARE
        else PRESENTATION_SD
    )
    presentation = float(rng.normal(0.0, spread))
    level = signal_level(features, len(problem.states), presentation)
    resume = render_resume(features, name)
    screen = sample_screen_performance(s, rng)
    return Candidate(
        id=cand_id,
        true_state=problem.states[s],
        features=features,
        gender=gender,
        ethnicity=ethnicity,
        name=name,
        resume_text=resume,
        screen_performance=screen,
        signal_level=level,
    )


def sample_population(n: int, problem: DecisionProblem, seed: int) -> list[Candidate]:
    """Draw n candidates i.i.d.: state from the prior, features from the
    state-conditional tables, demographics independent of state."""
    if n < 1:
        raise ValueError("population size must be >= 1")
    return [_sample_candidate(i, problem, seed) for i in range(n)]


_FILLER_SENTENCES = (
    "Comfortable working across the stack and picking up unfamiliar codebases quickly.",
    "Enjoys pairing with teammates and writing documentation that others can actually use.",
    "Has presented work at internal engineering reviews and incorporated feedback into designs.",
    "Interested in reliability engineering and keeping production incidents rare and boring.",
    "Values readable code, small pull requests, and tests that run fast.",
    "Familiar with agile ceremonies and comfortable scoping work into deliverable slices.",
    "Keeps up with the ecosystem through reading release notes and trying tools on side projects.",
    "Prefers measuring before optimizing and deleting code when it no longer earns its keep.",
    "Has mentored interns on debugging workflows and code review etiquette.",
    "Writes postmortems that focus on systems rather than blame.",
    "Comfortable discussing tradeoffs with product managers and adjusting plans as requirements shift.",
    "Tracks work in small milestones and communicates slips early.",
    "Curious about distributed systems and the failure modes that only show up under load.",
    "Happiest when a profiler and a flame graph are involved.",
    "Treats on-call as a design feedback loop rather than a chore.",
    "Believes most outages trace back to a deploy, a config change, or a certificate.",
)

_SUMMARY_STYLES = (
    "Software engineer with {years} years of experience building {domain} systems. "
    "Focused on shipping dependable features and improving the tooling around them.",
    "Engineer ({years} yrs) who has worked on {domain} products end to end, from design "
    "discussions through deployment and monitoring.",
    "Hands-on developer with {years} years in industry, mostly around {domain} work; "
    "known for steady delivery and clear written communication.",
)

_DOMAIN_LABELS = {
    "web": "web",
    "mobile": "mobile",
    "ml": "machine learning",
    "systems": "backend",
    "other": "internal tooling",
}


def render_resume(features: Mapping, name: str) -> str:
    """Deterministic plain-text resume with EDUCATION / EXPERIENCE / PROJECTS /
    SKILLS sections, padded into the 300-500 word band."""
    # style variants key off the feature record, not the name, so renaming a
    # candidate changes only the name tokens
    style_key = f"{features['university']}|{features['gpa']}|{features['years']}"
    style = _stable_index(style_key, len(_SUMMARY_STYLES))
    domain = _DOMAIN_LABELS[features["project_domains"][0]] if features["project_domains"] else "backend"
    years_str = f"{features['years']:.0f}" if features["years"] >= 1 else "under a year of"
    lines = [name, ""]
    lines.append(_SUMMARY_STYLES[style].format(years=years_str, domain=domain))
    lines.append("")
    lines.append("EDUCATION")
    lines.append(
        f"{features['degree']} in Computer Science, {features['university']}. "
        f"GPA {features['gpa']:.2f}. Coursework included data structures, operating "
        "systems, databases, and a capstone project delivered to an external sponsor."
    )
    lines.append("")
    lines.append("EXPERIENCE")
    n_jobs = len(features["companies"])
    span = max(features["years"], 0.5) / n_jobs
    for j, (company, kind) in enumerate(features["companies"]):
        title = _title_for(features["years"], j)
        lines.append(
            f"{title}, {company} ({span:.1f} yrs). "
            + _JOB_BLURBS[_stable_index(style_key + company + str(j), len(_JOB_BLURBS))].format(
                kind={"faang": "a large consumer platform", "tier2": "an established product company",
                      "startup": "an early-stage startup", "unknown": "a regional services firm"}[kind]
            )
        )
    lines.append("")
    lines.append("PROJECTS")
    count = min(features["project_count"], 6)
    if count == 0:
        lines.append("No substantial independent projects listed.")
    for k in range(count):
        noun = _PROJECT_NOUNS[_stable_index(style_key + str(k), len(_PROJECT_NOUNS))]
        complexity = features["project_complexity"]
        lines.append(
            f"Built a {noun} ({features['project_domains'][k] if k < len(features['project_domains']) else 'other'}); "
            + {
                "advanced": "handled real traffic, required careful capacity planning, and shipped with load tests and dashboards.",
                "intermediate": "a multi-component build with persistence, background jobs, and a small test suite.",
                "basic": "a weekend-scale build following a tutorial structure with some custom additions.",
            }[complexity]
        )
    lines.append("")
    lines.append("SKILLS")
    lines.append(", ".join(features["stack"]) + ".")
    text = "\n".join(lines)
    words = len(text.split())
    filler_start = _stable_index(style_key, len(_FILLER_SENTENCES))
    extra = []
    i = 0
    while words + _word_count_of(extra) < RESUME_WORD_MIN and i < len(_FILLER_SENTENCES) * 2:
        extra.append(_FILLER_SENTENCES[(filler_start + i) % len(_FILLER_SENTENCES)])
        i += 1
    if extra:
        text = text + "\n\nPROFILE NOTES\n" + " ".join(extra)
    return text


_JOB_BLURBS = (
    "Worked on {kind}, owning feature delivery from design through rollout and handling the follow-up bug queue.",
    "Joined {kind} to build internal services; wrote integration tests, dashboards, and the occasional migration script.",
    "At {kind}, maintained APIs used by partner teams and reduced request latency through caching and query tuning.",
    "Contributed to {kind} on a small team, rotating through on-call and leading two quarterly releases.",
)


def _title_for(years: float, job_index: int) -> str:
    if years >= 7 and job_index == 0:
        return "Staff Software Engineer"
    if years >= 4 and job_index <= 1:
        return "Senior Software Engineer"
    if years >= 2:
        return "Software Engineer"
    return "Junior Software Engineer"


def _word_count_of(sentences) -> int:
    return sum(len(s.split()) for s in sentences)


def _stable_index(key: str, modulus: int) -> int:
    total = 0
    for ch in key:
        total = (total * 31 + ord(ch)) % 1000003
    return total % modulus


# ---------------------------------------------------------------------------
# Observation rendering (the only bridge from latent candidate state into the
# decision pipeline; providers consume these, the orchestrator does not look
# inside `features`).
# ---------------------------------------------------------------------------


def resume_observation(candidate: Candidate, problem: DecisionProblem) -> Observation:
    features = dict(candidate.features)
    features.update(
        gender=candidate.gender,
        ethnicity=candidate.ethnicity,
        signal_level=candidate.signal_level,
        target_state=candidate.true_state,
    )
    return Observation(
        kind="resume",
        text=candidate.resume_text,
        candidate_id=candidate.id,
        features=features,
    )


def screen_state_densities(performance: float) -> tuple[float, ...]:
    """Density of an observed screen score under each state's performance law.

    This is the evidence a competent reader can extract from screen notes:
    how consistent the performance is with each quality level. Scores are
    clamped slightly inside (0, 10) so edge draws keep finite densities.
    """
    x = min(0.995, max(0.005, performance / 10.0))
    densities = []
    for s in sorted(SCREEN_BETAS):
        a, b = SCREEN_BETAS[s]
        coeff = math.gamma(a + b) / (math.gamma(a) * math.gamma(b))
        densities.append(coeff * x ** (a - 1) * (1.0 - x) ** (b - 1))
    return tuple(densities)


def screen_level(performance: float) -> float:
    """Place a 0-10 screen score on the quality axis via the per-level anchors."""
    anchors = SCREEN_ANCHORS
    if performance <= anchors[0]:
        return 0.0
    if performance >= anchors[-1]:
        return float(len(anchors) - 1)
    for i in range(len(anchors) - 1):
        lo, hi = anchors[i], anchors[i + 1]
        if performance <= hi:
            return i + (performance - lo) / (hi - lo)
    return float(len(anchors) - 1)


def screen_observation(candidate: Candidate, problem: DecisionProblem) -> Observation:
    perf = candidate.screen_performance
    level = screen_level(perf)
    target_state = problem.states[int(round(level))]
    features = {
        "performance": perf,
        "signal_level": level,
        "gender": candidate.gender,
        "ethnicity": candidate.ethnicity,
        "target_state": target_state,
        "state_densities": screen_state_densities(perf),
    }
    return Observation(
        kind="phone_screen",
        text=render_screen_notes(candidate.name, perf),
        candidate_id=candidate.id,
        features=features,
    )


def render_screen_notes(name: str, performance: float) -> str:
    if performance >= 8.5:
        body = (
            "Walked through a recent project with clear architectural reasoning and anticipated "
            "follow-up questions. Solved the coding exercise quickly with a clean approach and "
            "discussed complexity unprompted. Communication was crisp; asked sharp questions "
            "about the team. Recommendation: advance."
        )
    elif performance >= 6.5:
        body = (
            "Explained past work competently with reasonable technical depth. Completed the "
            "coding exercise with minor hints and explained the tradeoffs involved. Clear "
            "communicator, genuine interest in the role. Recommendation: advance."
        )
    elif performance >= 4.5:
        body = (
            "Described prior projects at a surface level; depth was hard to establish. Partial "
            "progress on the coding exercise, needed prompting on edge cases. Communication "
            "acceptable but answers wandered. Recommendation: uncertain."
        )
    elif performance >= 2.5:
        body = (
            "Struggled to explain technical decisions in past work. The coding exercise stalled "
            "early despite hints. Some inconsistencies with the resume surfaced when probed. "
            "Recommendation: do not advance."
        )
    else:
        body = (
            "Could not describe own listed projects in any technical detail and did not attempt "
            "a working solution to the coding exercise. Multiple red flags versus the resume. "
            "Recommendation: reject."
        )
    return f"Phone screen notes for {name}: {body}"


# ---------------------------------------------------------------------------
# Corpus files
# ---------------------------------------------------------------------------


def write_corpus(path, candidates: Iterable[Candidate]) -> None:
    path = Path(path)
    with path.open("w") as fh:
        for cand in candidates:
            fh.write(json.dumps(cand.to_record(), sort_keys=True) + "\n")


def read_corpus(path) -> list[Candidate]:
    path = Path(path)
    candidates = []
    with path.open() as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            record["features"] = _restore_features(record["features"])
            candidates.append(Candidate.from_record(record))
    return candidates


def _restore_features(features: dict) -> dict:
    features["companies"] = [tuple(pair) for pair in features.get("companies", [])]
    return features
