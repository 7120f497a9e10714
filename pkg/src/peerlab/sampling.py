"""Random-instance generators for the verification suites and sweeps.

All samplers take an explicit ``numpy.random.Generator`` so suites stay
deterministic per seed.  Dense objects are mixed with a uniform component
(``floor_frac``) so every cell keeps macroscopic mass; this keeps strict
data-processing margins well away from the strictness tolerance without ever
filtering instances on outcomes.
"""

from __future__ import annotations

import numpy as np

from .agents import (
    FullJointPrior,
    PairwisePrior,
    Strategy,
    WorldModelPrior,
    _random_strategy_rng,
)
from .measures import ConvexGenerator, ScoringRule, is_fine_grained
from .probability import Distribution, JointDistribution, TransitionMatrix

STRATEGY_KIND_RATIOS = {"dense": 0.4, "sparse": 0.2, "permutation": 0.2, "constant": 0.2}


def random_distribution(rng, m: int, floor_frac: float = 0.1) -> Distribution:
    w = rng.dirichlet(np.ones(m))
    w = (1.0 - floor_frac) * w + floor_frac / m
    return Distribution(w)


def random_joint(rng, mx: int, my: int, floor_frac: float = 0.1) -> JointDistribution:
    t = rng.dirichlet(np.ones(mx * my)).reshape(mx, my)
    t = (1.0 - floor_frac) * t + floor_frac / (mx * my)
    return JointDistribution(t)


def random_conditional_tensor(
    rng, mz: int, mx: int, my: int, floor_frac: float = 0.1
) -> JointDistribution:
    t = rng.dirichlet(np.ones(mz * mx * my)).reshape(mz, mx, my)
    t = (1.0 - floor_frac) * t + floor_frac / t.size
    return JointDistribution(t)


def random_ci_tensor(rng, mz: int, mx: int, my: int) -> JointDistribution:
    """Tensor with X independent of Y given Z."""
    pz = random_distribution(rng, mz).weights
    t = np.zeros((mz, mx, my))
    for z in range(mz):
        px = random_distribution(rng, mx).weights
        py = random_distribution(rng, my).weights
        t[z] = pz[z] * np.outer(px, py)
    return JointDistribution(t)


def random_strategy_kind(rng) -> str:
    kinds = list(STRATEGY_KIND_RATIOS)
    probs = np.array([STRATEGY_KIND_RATIOS[k] for k in kinds])
    return kinds[int(rng.choice(len(kinds), p=probs))]


def random_mixed_strategy(rng, m: int, kind: str | None = None) -> Strategy:
    return _random_strategy_rng(rng, m, kind or random_strategy_kind(rng))


def random_channel(rng, m_in: int, m_out: int | None = None, kind: str | None = None,
                   floor_frac: float = 0.1) -> TransitionMatrix:
    """Row-stochastic channel of a sampled kind; dense rows carry a uniform floor."""
    m_out = m_out or m_in
    kind = kind or random_strategy_kind(rng)
    if kind == "permutation" and m_in != m_out:
        kind = "sparse"
    if kind == "dense":
        rows = rng.dirichlet(np.ones(m_out), size=m_in)
        rows = (1.0 - floor_frac) * rows + floor_frac / m_out
    elif kind == "constant":
        rows = np.tile(random_distribution(rng, m_out).weights, (m_in, 1))
    elif kind == "permutation":
        rows = np.zeros((m_in, m_out))
        rows[np.arange(m_in), rng.permutation(m_in)] = 1.0
    elif kind == "sparse":
        rows = np.zeros((m_in, m_out))
        for r in range(m_in):
            support = rng.choice(m_out, size=int(rng.integers(1, min(m_out, 2) + 1)),
                                 replace=False)
            rows[r, support] = rng.dirichlet(np.ones(support.size))
    else:
        raise ValueError(f"unknown channel kind {kind!r}")
    return TransitionMatrix(rows)


def random_generator_choice(rng, strictly_convex_only: bool = False) -> ConvexGenerator:
    pool = [g for g in ConvexGenerator if g.strictly_convex or not strictly_convex_only]
    return pool[int(rng.integers(len(pool)))]


def random_rule_choice(rng) -> ScoringRule:
    return list(ScoringRule)[int(rng.integers(len(ScoringRule)))]


def random_fine_grained_joint(rng, m: int, tol: float = 1e-9, max_tries: int = 200) -> JointDistribution:
    """Rejection-sample a joint whose likelihood ratios separate all cells.

    Dense asymmetric joints are almost surely fine-grained; symmetric tables
    never are (mirror cells tie), so no symmetrization is applied.
    """
    for _ in range(max_tries):
        j = random_joint(rng, m, m)
        if is_fine_grained(j, tol):
            return j
    raise RuntimeError("failed to sample a fine-grained joint")


def random_positively_correlated_binary_joint(rng) -> JointDistribution:
    """Binary pair joint from a latent ground truth: each agent matches the
    truth with probability >= 1/2, independently given the truth."""
    t = float(rng.uniform(0.05, 0.95))
    acc_i = float(rng.uniform(0.5, 0.95))
    acc_j = float(rng.uniform(0.5, 0.95))
    table = np.zeros((2, 2))
    for truth, pg in ((1, t), (0, 1.0 - t)):
        pi = np.array([1.0 - acc_i, acc_i]) if truth == 1 else np.array([acc_i, 1.0 - acc_i])
        pj = np.array([1.0 - acc_j, acc_j]) if truth == 1 else np.array([acc_j, 1.0 - acc_j])
        table += pg * np.outer(pi, pj)
    return JointDistribution(table)


def random_world_model(rng, n_states: int, m: int) -> WorldModelPrior:
    return WorldModelPrior(
        random_distribution(rng, n_states),
        tuple(random_distribution(rng, m) for _ in range(n_states)),
    )


def random_full_joint_prior(rng, n: int, m: int) -> FullJointPrior:
    t = rng.dirichlet(np.ones(m**n)).reshape((m,) * n)
    t = 0.9 * t + 0.1 / t.size
    return FullJointPrior(t)


def random_pairwise_symmetric_prior(rng, m: int) -> PairwisePrior:
    j = random_joint(rng, m, m)
    table = 0.5 * (j.table + j.table.T)
    return PairwisePrior(JointDistribution(table), symmetric=True)
