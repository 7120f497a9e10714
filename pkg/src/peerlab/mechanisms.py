"""Payment engines.

Exact expected payments for the pay-mutual-information rule, empirical
mechanisms over report matrices (f-mutual-information, Bregman, the binary
correlation mechanism and its agreement variant), the shifted peer prediction
method for a known prior, and signal-plus-prediction scoring (idealized and
finite-n).

Reference-agent handling defaults to ``all-pairs-average`` (the exact
expectation over a uniformly random reference agent, which keeps theorem
checks deterministic); ``seeded-random-reference`` reproduces the literal
single-reference payment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .agents import (
    PairwisePrior,
    ReportMatrix,
    Scenario,
    Strategy,
    WorldModelPrior,
    empirical_pair_joint,
    report_joint,
    reported_world_states,
    world_tensor,
)
from .errors import (
    DimensionMismatch,
    LogOfZero,
    NonBinaryAlphabet,
    ZeroFrequency,
)
from .measures import (
    ConvexGenerator,
    Measure,
    ScoringRule,
    conditional_mi,
    log_score_accuracy_gain,
    mutual_information,
)
from .probability import Distribution, JointDistribution, RngSeed, rng_from_seed

ALL_PAIRS = "all-pairs-average"
SEEDED_RANDOM = "seeded-random-reference"


def _reference_sets(n: int, pairing: str, seed: RngSeed | None):
    """Per agent, the reference agents to average over."""
    if pairing == ALL_PAIRS:
        return [[j for j in range(n) if j != i] for i in range(n)]
    if pairing == SEEDED_RANDOM:
        if seed is None:
            raise DimensionMismatch("seeded-random-reference pairing needs a seed")
        rng = rng_from_seed(seed, 17)
        out = []
        for i in range(n):
            others = [j for j in range(n) if j != i]
            out.append([others[int(rng.integers(len(others)))]])
        return out
    raise DimensionMismatch(f"unknown pairing {pairing!r}")


@dataclass(frozen=True)
class PaymentReport:
    """Per-agent payments with an optional score decomposition.

    When effort costs are present, ``utilities = payments - effort_costs``
    with ``effort_costs[i] = full_effort_prob_i * cost_i``.
    """

    mechanism: str
    mode: str  # "exact" | "empirical"
    payments: np.ndarray
    information_scores: np.ndarray | None = None
    prediction_scores: np.ndarray | None = None
    effort_costs: np.ndarray | None = None
    utilities: np.ndarray | None = None
    measure: str | None = None
    seed: RngSeed | None = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pay = np.asarray(self.payments, dtype=np.float64)
        pay.setflags(write=False)
        object.__setattr__(self, "payments", pay)
        for name in ("information_scores", "prediction_scores", "effort_costs", "utilities"):
            val = getattr(self, name)
            if val is not None:
                arr = np.asarray(val, dtype=np.float64)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)
        if self.utilities is not None and self.effort_costs is not None:
            if not np.allclose(self.utilities, self.payments - self.effort_costs, atol=1e-12):
                raise DimensionMismatch("utilities must equal payments - effort costs")

    @property
    def n_agents(self) -> int:
        return self.payments.shape[0]


def agent_welfare(report: PaymentReport) -> float:
    """Sum of per-agent payments."""
    return float(report.payments.sum())


# ---------------------------------------------------------------------------
# Exact pay-mutual-information payments
# ---------------------------------------------------------------------------


def mip_expected_payments(scenario: Scenario, measure: Measure) -> PaymentReport:
    """Exact expected payments when each agent is paid the mutual information
    between her report and a uniformly random peer's report.

    payment_i = (1 / (n-1)) * sum_{j != i} MI(report_i ; report_j).
    """
    n = scenario.n_agents
    payments = np.zeros(n)
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            joint = report_joint(
                scenario.prior,
                i,
                j,
                scenario.strategies[i],
                scenario.strategies[j],
                scenario.effort(i),
                scenario.effort(j),
            )
            payments[i] += mutual_information(joint, measure)
        payments[i] /= n - 1
    effort_costs = utilities = None
    if scenario.efforts is not None:
        effort_costs = np.array(
            [e.full_effort_prob * e.cost for e in scenario.efforts], dtype=np.float64
        )
        utilities = payments - effort_costs
    return PaymentReport(
        mechanism="mip",
        mode="exact",
        payments=payments,
        effort_costs=effort_costs,
        utilities=utilities,
        measure=_measure_name(measure),
    )


def _measure_name(measure: Measure) -> str:
    return measure.value


# ---------------------------------------------------------------------------
# Empirical mutual-information mechanisms
# ---------------------------------------------------------------------------


def fmi_mechanism_payments(
    reports: ReportMatrix,
    f: ConvexGenerator,
    pairing: str = ALL_PAIRS,
    seed: RngSeed | None = None,
) -> PaymentReport:
    """Pay each agent the f-mutual information of her empirical pair joint
    with the reference agent's reports."""
    return _empirical_mi_payments(reports, f, pairing, seed, mechanism="fmi")


def bmi_mechanism_payments(
    reports: ReportMatrix,
    rule: ScoringRule,
    pairing: str = ALL_PAIRS,
    seed: RngSeed | None = None,
) -> PaymentReport:
    """As :func:`fmi_mechanism_payments` with the Bregman measure."""
    return _empirical_mi_payments(reports, rule, pairing, seed, mechanism="bmi")


def _empirical_mi_payments(reports, measure, pairing, seed, mechanism) -> PaymentReport:
    n = reports.n_agents
    refs = _reference_sets(n, pairing, seed)
    payments = np.zeros(n)
    for i in range(n):
        vals = [
            mutual_information(empirical_pair_joint(reports, i, j), measure) for j in refs[i]
        ]
        payments[i] = float(np.mean(vals))
    return PaymentReport(
        mechanism=mechanism,
        mode="empirical",
        payments=payments,
        measure=_measure_name(measure),
        seed=seed,
        metadata={"pairing": pairing, "T": reports.n_questions},
    )


# ---------------------------------------------------------------------------
# Binary correlation mechanism and its agreement variant
# ---------------------------------------------------------------------------


def _draw_disjoint_subsets(rng, own: np.ndarray, peer: np.ndarray, k: int, d: int):
    """A from own \\ {k}, then B from peer \\ ({k} u A), both of size d."""
    pool_a = own[own != k]
    if pool_a.size < d:
        return None
    a = rng.choice(pool_a, size=d, replace=False)
    exclude = set(a.tolist()) | {int(k)}
    pool_b = np.array([q for q in peer.tolist() if q not in exclude], dtype=np.intp)
    if pool_b.size < d:
        return None
    b = rng.choice(pool_b, size=d, replace=False)
    return a, b


def md_payments(
    reports: ReportMatrix,
    d: int,
    seed: RngSeed,
    pairing: str = ALL_PAIRS,
) -> PaymentReport:
    """Binary correlation payments: per reward question, agreement on the
    question minus the agreement rate of the agents' average answers over
    disjoint comparison subsets of size d (reward 0 when no such subsets
    exist).  Subsets are sampled uniformly without replacement per seed.
    """
    if reports.alphabet_size != 2:
        raise NonBinaryAlphabet("this mechanism is binary-only")
    n = reports.n_agents
    refs = _reference_sets(n, pairing, seed)
    rng = rng_from_seed(seed, 1)
    payments = np.zeros(n)
    for i in range(n):
        per_ref = []
        for j in refs[i]:
            own = reports.answered(i)
            peer = reports.answered(j)
            shared = np.intersect1d(own, peer)
            rewards = []
            for k in shared:
                pick = _draw_disjoint_subsets(rng, own, peer, int(k), d)
                if pick is None:
                    rewards.append(0.0)
                    continue
                a, b = pick
                si = float(reports.entries[i, k])
                sj = float(reports.entries[j, k])
                abar = float(reports.entries[i, a].mean())
                bbar = float(reports.entries[j, b].mean())
                agree = si * sj + (1.0 - si) * (1.0 - sj)
                base = abar * bbar + (1.0 - abar) * (1.0 - bbar)
                rewards.append(agree - base)
            per_ref.append(float(np.mean(rewards)) if rewards else 0.0)
        payments[i] = float(np.mean(per_ref))
    return PaymentReport(
        mechanism="md",
        mode="empirical",
        payments=payments,
        seed=seed,
        metadata={"d": d, "pairing": pairing, "T": reports.n_questions},
    )


def ca_payments(
    reports: ReportMatrix,
    d: int,
    seed: RngSeed,
    pairing: str = ALL_PAIRS,
) -> PaymentReport:
    """Agreement-indicator payments for any finite alphabet: per reward
    question, 1(reports agree on the question) minus 1(reports agree on a
    random question pair drawn from the two comparison subsets)."""
    n = reports.n_agents
    refs = _reference_sets(n, pairing, seed)
    rng = rng_from_seed(seed, 2)
    payments = np.zeros(n)
    for i in range(n):
        per_ref = []
        for j in refs[i]:
            own = reports.answered(i)
            peer = reports.answered(j)
            shared = np.intersect1d(own, peer)
            rewards = []
            for k in shared:
                pick = _draw_disjoint_subsets(rng, own, peer, int(k), d)
                if pick is None:
                    rewards.append(0.0)
                    continue
                a, b = pick
                la = int(a[int(rng.integers(a.size))])
                lb = int(b[int(rng.integers(b.size))])
                agree = float(reports.entries[i, k] == reports.entries[j, k])
                base = float(reports.entries[i, la] == reports.entries[j, lb])
                rewards.append(agree - base)
            per_ref.append(float(np.mean(rewards)) if rewards else 0.0)
        payments[i] = float(np.mean(per_ref))
    return PaymentReport(
        mechanism="ca",
        mode="empirical",
        payments=payments,
        seed=seed,
        metadata={"d": d, "pairing": pairing, "T": reports.n_questions},
    )


def md_expected_reward(prior_pair: JointDistribution) -> float:
    """Expected per-question reward of the binary correlation mechanism under
    the given report-pair joint: sum_s (Pr[s, s] - Pr_i[s] Pr_j[s])."""
    table = prior_pair._require_pairwise("md_expected_reward")
    if table.shape != (2, 2):
        raise NonBinaryAlphabet("expected a 2x2 joint")
    return ca_expected_reward(prior_pair)


def ca_expected_reward(pair: JointDistribution) -> float:
    """Expected per-question agreement reward on any alphabet:
    sum_s (Pr[s, s] - Pr_i[s] Pr_j[s])."""
    table = pair._require_pairwise("ca_expected_reward")
    mi = table.sum(axis=1)
    mj = table.sum(axis=0)
    return float(np.trace(table) - np.dot(mi, mj))


# ---------------------------------------------------------------------------
# Shifted peer prediction (known prior)
# ---------------------------------------------------------------------------


def _prediction_tables(known_prior: PairwisePrior):
    """The mechanism's prior prediction q and per-signal posteriors q_sigma."""
    table = known_prior.joint.table
    q = Distribution(table.sum(axis=0))
    posteriors = []
    for sigma in range(table.shape[0]):
        row_mass = float(table[sigma].sum())
        if row_mass <= 0.0:
            posteriors.append(None)
        else:
            posteriors.append(Distribution(table[sigma] / row_mass))
    return q, posteriors


def sppm_payments(
    signals: Sequence[int],
    known_prior: PairwisePrior,
    rule: ScoringRule,
    pairing: str = ALL_PAIRS,
    seed: RngSeed | None = None,
) -> PaymentReport:
    """Realized shifted-peer-prediction payments: the accuracy of the posterior
    derived from agent i's report, minus that of the prior, both scored
    against the reference agent's report."""
    sig = np.asarray(signals, dtype=np.intp)
    n = sig.shape[0]
    q, posteriors = _prediction_tables(known_prior)
    refs = _reference_sets(n, pairing, seed)
    payments = np.zeros(n)
    for i in range(n):
        vals = []
        for j in refs[i]:
            post = posteriors[sig[i]]
            if post is None:
                raise LogOfZero(f"prior assigns zero mass to reported signal {sig[i]}")
            vals.append(rule.score(int(sig[j]), post) - rule.score(int(sig[j]), q))
        payments[i] = float(np.mean(vals))
    return PaymentReport(
        mechanism="sppm",
        mode="empirical",
        payments=payments,
        measure=rule.value,
        seed=seed,
        metadata={"pairing": pairing},
    )


def sppm_expected_payments(
    scenario: Scenario, known_prior: PairwisePrior, rule: ScoringRule
) -> PaymentReport:
    """Exact expected shifted-peer-prediction payments under a scenario.

    The mechanism's prediction tables are fixed by ``known_prior``; under
    truth-telling on the same prior each payment equals the Bregman mutual
    information of the prior pair joint.
    """
    q, posteriors = _prediction_tables(known_prior)
    n = scenario.n_agents
    payments = np.zeros(n)
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            rj = report_joint(
                scenario.prior,
                i,
                j,
                scenario.strategies[i],
                scenario.strategies[j],
                scenario.effort(i),
                scenario.effort(j),
            ).table
            val = 0.0
            for a in range(rj.shape[0]):
                mass_a = float(rj[a].sum())
                if mass_a <= 0.0:
                    continue
                if posteriors[a] is None:
                    raise LogOfZero(f"prior assigns zero mass to reported signal {a}")
                for b in range(rj.shape[1]):
                    if rj[a, b] <= 0.0:
                        continue
                    val += rj[a, b] * (rule.score(b, posteriors[a]) - rule.score(b, q))
            payments[i] += val
        payments[i] /= n - 1
    return PaymentReport(
        mechanism="sppm", mode="exact", payments=payments, measure=rule.value
    )


# ---------------------------------------------------------------------------
# Signal-plus-prediction scoring
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BtsReportProfile:
    """Per-agent reported signal and reported prediction of peers' reports."""

    signals: np.ndarray
    predictions: tuple[Distribution, ...]

    def __post_init__(self):
        sig = np.asarray(self.signals, dtype=np.intp)
        preds = tuple(self.predictions)
        if sig.ndim != 1 or sig.shape[0] != len(preds):
            raise DimensionMismatch("one prediction per reported signal")
        sizes = {p.size for p in preds}
        if len(sizes) != 1:
            raise DimensionMismatch("predictions must share one alphabet")
        m = sizes.pop()
        if sig.size and (sig.min() < 0 or sig.max() >= m):
            raise DimensionMismatch("signal outside the prediction alphabet")
        sig.setflags(write=False)
        object.__setattr__(self, "signals", sig)
        object.__setattr__(self, "predictions", preds)

    @property
    def n_agents(self) -> int:
        return self.signals.shape[0]

    @property
    def alphabet_size(self) -> int:
        return self.predictions[0].size


def _peer_frequency(
    counts: np.ndarray, signals: np.ndarray, exclude: int, sigma: int, smoothing: float
) -> float:
    m = counts.shape[0]
    count = float(counts[sigma]) - float(signals[exclude] == sigma)
    n_others = signals.shape[0] - 1
    return (count + smoothing) / (n_others + smoothing * m)


def bts_payments(
    profile: BtsReportProfile,
    alpha: float,
    pairing: str = ALL_PAIRS,
    seed: RngSeed | None = None,
    smoothing: float = 0.0,
) -> PaymentReport:
    """Finite-n signal-plus-prediction payments: prediction score plus alpha
    times information score.

    The information score is the log-ratio of the realized peer frequency of
    the agent's reported signal to the reference agent's predicted
    probability of it; the prediction score is the log accuracy of the
    agent's prediction on the reference agent's report, baselined by that
    report's realized peer frequency.  Realized frequencies always exclude
    the agent whose report is being scored.

    Zero realized frequencies raise :class:`ZeroFrequency` unless an additive
    ``smoothing`` pseudo-count is supplied (a documented deviation from the
    infinite-population model this scoring idealizes).
    """
    n = profile.n_agents
    if n < 3:
        raise DimensionMismatch("signal-plus-prediction scoring needs n >= 3")
    m = profile.alphabet_size
    sig = profile.signals
    counts = np.bincount(sig, minlength=m).astype(np.float64)
    refs = _reference_sets(n, pairing, seed)
    info = np.zeros(n)
    pred = np.zeros(n)
    for i in range(n):
        vals_info, vals_pred = [], []
        fr_own = _peer_frequency(counts, sig, i, int(sig[i]), smoothing)
        if fr_own <= 0.0:
            raise ZeroFrequency(
                f"agent {i}'s reported signal {int(sig[i])} has zero peer frequency"
            )
        for j in refs[i]:
            pj = profile.predictions[j][int(sig[i])]
            if pj <= 0.0:
                raise LogOfZero(f"agent {j} predicted zero mass on signal {int(sig[i])}")
            vals_info.append(math.log(fr_own) - math.log(pj))
            fr_ref = _peer_frequency(counts, sig, j, int(sig[j]), smoothing)
            if fr_ref <= 0.0:
                raise ZeroFrequency(
                    f"agent {j}'s reported signal {int(sig[j])} has zero peer frequency"
                )
            pi = profile.predictions[i][int(sig[j])]
            if pi <= 0.0:
                raise LogOfZero(f"agent {i} predicted zero mass on signal {int(sig[j])}")
            vals_pred.append(math.log(pi) - math.log(fr_ref))
        info[i] = float(np.mean(vals_info))
        pred[i] = float(np.mean(vals_pred))
    return PaymentReport(
        mechanism="bts",
        mode="empirical",
        payments=pred + alpha * info,
        information_scores=info,
        prediction_scores=pred,
        seed=seed,
        metadata={
            "alpha": alpha,
            "alpha_warning": alpha <= 1.0,
            "pairing": pairing,
            "smoothing": smoothing,
        },
    )


def optimal_predictions(
    world: WorldModelPrior, strategies: Sequence[Strategy] | None = None
) -> tuple[Distribution, ...]:
    """Per private signal, the posterior report distribution of a random peer.

    Entry sigma is Pr[peer report | own signal = sigma]: the state posterior
    from the true signal model, pushed through the per-state report
    distributions of the strategy profile (truthful when None).  These are
    the prediction reports a score-maximizing agent submits.
    """
    reported = reported_world_states(world, strategies)
    true_states = np.stack([s.weights for s in world.states])
    reported_states = np.stack([s.weights for s in reported])
    pw = world.state_probs.weights
    out = []
    for sigma in range(world.alphabet_size):
        post_w = pw * true_states[:, sigma]
        total = float(post_w.sum())
        if total <= 0.0:
            raise ZeroFrequency(f"signal {sigma} has zero prior probability")
        out.append(Distribution((post_w / total) @ reported_states))
    return tuple(out)


@dataclass(frozen=True)
class IdealizedBtsScores:
    """Population-limit expected average scores for a strategy profile."""

    information_score: float
    prediction_score: float


def bts_idealized_scores(
    world: WorldModelPrior,
    strategies: Sequence[Strategy] | None = None,
    measure: Measure | str = "shannon",
) -> IdealizedBtsScores:
    """Expected average information and prediction scores in the population
    limit, where realized report frequencies equal the per-state report
    distributions.

    The information score is the conditional mutual information (under the
    chosen measure) between the reported-state variable and a random agent's
    report, given a reference agent's private signal; the prediction score is
    the negated log-score accuracy gain computed by direct enumeration, an
    independent route that must agree with the Shannon information score up
    to sign.
    """
    tensor = world_tensor(world, strategies)
    if isinstance(measure, str):
        if measure != "shannon":
            raise DimensionMismatch(f"unknown measure {measure!r}")
        info = conditional_mi(tensor, ConvexGenerator.KL)
    else:
        info = conditional_mi(tensor, measure)
    prediction = -log_score_accuracy_gain(tensor)
    return IdealizedBtsScores(information_score=info, prediction_score=prediction)


# ---------------------------------------------------------------------------
# Report serialization
# ---------------------------------------------------------------------------

_CSV_COLUMNS = ("agent", "payment", "information_score", "prediction_score", "effort_cost", "utility")


def payment_report_csv(report: PaymentReport) -> str:
    """One row per agent; absent decomposition columns are left empty."""
    lines = [",".join(_CSV_COLUMNS)]
    for i in range(report.n_agents):
        row = [str(i), repr(float(report.payments[i]))]
        for arr in (
            report.information_scores,
            report.prediction_scores,
            report.effort_costs,
            report.utilities,
        ):
            row.append("" if arr is None else repr(float(arr[i])))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def payment_report_dict(report: PaymentReport) -> dict:
    def listify(arr):
        return None if arr is None else [float(v) for v in arr]

    return {
        "mechanism": report.mechanism,
        "mode": report.mode,
        "measure": report.measure,
        "seed": report.seed,
        "payments": listify(report.payments),
        "information_scores": listify(report.information_scores),
        "prediction_scores": listify(report.prediction_scores),
        "effort_costs": listify(report.effort_costs),
        "utilities": listify(report.utilities),
        "metadata": report.metadata,
    }
