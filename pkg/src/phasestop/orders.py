"""Stochastic-order predicates, model assumption checkers, and random generators.

All predicates use a small absolute slack (default 1e-12): inputs are O(1)
probabilities and the comparisons involve products of two entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    ConstrainedSocial,
    CostSpec,
    DetectionModel,
    QuickestClassicalDelay,
    QuickestPredictiveDelay,
    RiskSensitive,
    Scheduling,
    SocialStopping,
    TransientDetection,
    as_belief,
)

ORDER_TOL = 1e-12


def mlr_geq(pi1, pi2, tol: float = ORDER_TOL) -> bool:
    """Monotone-likelihood-ratio dominance: ``pi1 >= pi2`` in the MLR order."""
    a = np.asarray(pi1, dtype=float)
    b = np.asarray(pi2, dtype=float)
    if a.shape != b.shape:
        raise ValueError("beliefs must have the same dimension")
    # pi1(i) pi2(j) <= pi2(i) pi1(j) for all i < j
    lhs = np.outer(a, b)
    rhs = np.outer(b, a)
    iu = np.triu_indices(a.size, k=1)
    return bool(np.all(lhs[iu] <= rhs[iu] + tol))


def fosd_geq(pi1, pi2, tol: float = ORDER_TOL) -> bool:
    """First-order stochastic dominance: every tail sum of pi1 dominates pi2's."""
    a = np.asarray(pi1, dtype=float)
    b = np.asarray(pi2, dtype=float)
    if a.shape != b.shape:
        raise ValueError("beliefs must have the same dimension")
    ta = np.cumsum(a[::-1])[::-1]
    tb = np.cumsum(b[::-1])[::-1]
    return bool(np.all(ta >= tb - tol))


def is_tp2(mat, tol: float = ORDER_TOL) -> bool:
    """True when every 2x2 minor (adjacent or not) of the matrix is >= -tol."""
    m = np.asarray(mat, dtype=float)
    if np.any(m < -tol):
        raise ValueError("matrix must be non-negative")
    rows, cols = m.shape
    for r1 in range(rows - 1):
        for r2 in range(r1 + 1, rows):
            # vectorized over all column pairs for this row pair
            prod = np.outer(m[r1], m[r2])
            iu = np.triu_indices(cols, k=1)
            if np.any(prod.T[iu] - prod[iu] > tol):
                return False
    return True


def matrix_order_geq(p1, p2, tol: float = ORDER_TOL) -> bool:
    """Transition-matrix dominance: P1 >= P2 when
    ``P1[i,j] * P2[m,l] <= P2[i,j] * P1[m,l]`` for every l > j and all i, m.
    """
    a = np.asarray(p1, dtype=float)
    b = np.asarray(p2, dtype=float)
    if a.shape != b.shape:
        raise ValueError("matrices must have the same shape")
    n = a.shape[1]
    for j in range(n - 1):
        for l in range(j + 1, n):
            # outer over (i, m)
            if np.any(np.outer(a[:, j], b[:, l]) > np.outer(b[:, j], a[:, l]) + tol):
                return False
    return True


def epsilon_dominated(pi, eps) -> np.ndarray:
    """Shift mass down one state at a time: ``pi + sum_j eps_j (e_j - e_{j+1})``.

    Each ``eps_j`` must lie in ``[0, min(1 - pi(j), pi(j+1))]``; the result is
    a valid belief dominated by ``pi`` in first-order stochastic dominance.
    """
    p = as_belief(pi)
    e = np.asarray(eps, dtype=float)
    if e.shape != (p.size - 1,):
        raise ValueError("need one epsilon per adjacent state pair")
    hi = np.minimum(1.0 - p[:-1], p[1:])
    if np.any(e < -ORDER_TOL) or np.any(e > hi + ORDER_TOL):
        raise ValueError("epsilon outside the admissible box")
    out = p.copy()
    out[:-1] += e
    out[1:] -= e
    return out


def line_point(vertex: int, base, eps: float) -> np.ndarray:
    """Point ``(1-eps)*base + eps*e_vertex`` on the line from ``base`` to a vertex.

    ``base`` must lie on the face opposite the (1-based) vertex.
    """
    b = as_belief(base)
    if not 1 <= vertex <= b.size:
        raise ValueError("vertex out of range")
    if abs(b[vertex - 1]) > ORDER_TOL:
        raise ValueError("base point must have zero mass on the vertex state")
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    out = (1.0 - eps) * b
    out[vertex - 1] += eps
    return out


# ---------------------------------------------------------------------------
# Assumption checking


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    passed: bool
    slack: float
    detail: str = ""


@dataclass(frozen=True)
class AssumptionReport:
    checks: tuple[AssumptionCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed_names(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> AssumptionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        return [
            f"{c.name:<12} {'pass' if c.passed else 'FAIL':<4} slack={c.slack:+.6g}"
            + (f"  ({c.detail})" if c.detail else "")
            for c in self.checks
        ]


def _ineq(name: str, slack: float, detail: str = "", tol: float = 1e-12) -> AssumptionCheck:
    """A check of the form ``expression >= 0`` with recorded slack."""
    return AssumptionCheck(name, slack >= -tol, float(slack), detail)


def _tp2_check(name: str, mat: np.ndarray, detail: str) -> AssumptionCheck:
    m = np.asarray(mat, dtype=float)
    rows, cols = m.shape
    worst = np.inf
    for r1 in range(rows - 1):
        for r2 in range(r1 + 1, rows):
            prod = np.outer(m[r1], m[r2])
            iu = np.triu_indices(cols, k=1)
            minors = prod[iu] - prod.T[iu]
            if minors.size:
                worst = min(worst, float(minors.min()))
    if not np.isfinite(worst):
        worst = 0.0
    return _ineq(name, worst, detail)


def check_assumptions(model: DetectionModel, spec: CostSpec) -> AssumptionReport:
    """Numerically evaluate the structural assumptions for the cost family.

    Every inequality is reported with its slack (negative slack = violated).
    """
    checks: list[AssumptionCheck] = []
    p = model.transition
    b = model.discrete_obs().matrix

    if isinstance(spec, QuickestPredictiveDelay):
        checks.append(
            _ineq(
                "A1-Ex1",
                spec.d - spec.rho * (spec.alpha + spec.beta),
                "d >= rho*(alpha+beta)",
            )
        )
        checks.append(_tp2_check("A2", b, "observation matrix TP2"))
        checks.append(_tp2_check("A3", p, "transition matrix TP2"))
        checks.append(
            _ineq(
                "S-Ex1",
                (spec.d - spec.rho * (spec.alpha + spec.beta)) * (1.0 - p[1, 0])
                - (spec.alpha - spec.beta),
                "(d-rho*(alpha+beta))*(1-P21) >= alpha-beta",
            )
        )
    elif isinstance(spec, QuickestClassicalDelay):
        f = spec.false_alarm
        pf = p @ f  # pf[i] = f' P' e_i
        x = model.n_states
        ratio = spec.rho * (spec.alpha + spec.beta) / spec.beta if spec.beta > 0 else np.inf
        worst_i = min(
            (
                spec.false_alarm[i] - max(1.0, ratio * pf[i] + (spec.alpha - spec.d) / spec.beta)
                for i in range(1, x)
            ),
            default=0.0,
        )
        checks.append(_ineq("AS-Ex1(i)", worst_i, "f_i >= max(1, rho*(a+b)/b f'P'e_i + (a-d)/b)"))
        worst_ii = 0.0
        for i in range(1, x - 2):
            for j in range(i, x):
                worst_ii = min(
                    worst_ii, f[j] - f[i] - spec.rho * (pf[j] - pf[i])
                )
        checks.append(_ineq("AS-Ex1(ii)", worst_ii, "f_j - f_i >= rho f'P'(e_j - e_i)"))
        worst_iii = min(
            (
                f[x - 1] - f[i] - ratio * (pf[x - 1] - pf[i])
                for i in range(1, x - 1)
            ),
            default=0.0,
        )
        checks.append(_ineq("AS-Ex1(iii)", worst_iii, "f_X - f_i >= rho*(a+b)/b f'P'(e_X - e_i)"))
        checks.append(_tp2_check("A2", b, "observation matrix TP2"))
        checks.append(_tp2_check("A3", p, "transition matrix TP2"))
    elif isinstance(spec, TransientDetection):
        checks.append(_tp2_check("A2", b, "observation matrix TP2"))
        if model.n_states == 3:
            d2 = spec.delays[1]
            bound = (d2 + spec.beta - spec.rho * spec.beta * p[2, 2]) / (
                1.0 + spec.rho * p[2, 2]
            )
            checks.append(
                _ineq("S-Ex2", bound - spec.alpha, "alpha <= (d2+b-rho*b*P33)/(1+rho*P33)")
            )
        if spec.false_alarm is not None:
            f = spec.false_alarm
            d = spec.delays
            checks.append(_ineq("PH-f", f[1] - 1.0, "first transient false alarm >= 1"))
            vec = d + spec.beta * ((spec.rho * p - np.eye(model.n_states)) @ f)
            slack = float(np.min(vec[:-1] - vec[1:]))
            checks.append(_ineq("PH-dd", slack, "(d + beta*(rho*P - I) f) has decreasing entries"))
    elif isinstance(spec, RiskSensitive):
        r1, r2 = spec.scalings(p)
        entries = r2 * (p @ r1) - r1
        checks.append(
            _ineq("A1-Ex3", float(np.min(entries[:-1] - entries[1:])), "continue cost decreasing per state")
        )
        checks.append(_tp2_check("A2", b, "observation matrix TP2"))
        checks.append(_tp2_check("A3", p, "transition matrix TP2"))
    elif isinstance(spec, SocialStopping):
        c = spec.local_costs
        checks.append(_ineq("costdom-1", c[0, 1] - c[0, 0], "c(e1,1) < c(e1,2)", tol=-1e-12))
        checks.append(_ineq("costdom-2", c[1, 0] - c[1, 1], "c(e2,2) < c(e2,1)", tol=-1e-12))
        checks.append(_ineq("d-rho-beta", spec.d - spec.rho * spec.beta, "d >= rho*beta"))
        checks.append(_tp2_check("A2", b, "observation matrix TP2"))
        checks.append(
            _ineq("B-symmetric", -float(np.abs(b - b.T).max()), "observation matrix symmetric")
        )
    elif isinstance(spec, ConstrainedSocial):
        c = spec.local_costs
        checks.append(
            _ineq("A1-Ex5", float(np.min(c[:-1, :] - c[1:, :])), "local costs decreasing per state")
        )
        checks.append(_tp2_check("A2", b, "observation matrix TP2"))
        x, n_actions = c.shape
        avg = np.einsum("iy,iy->i", c[:, :b.shape[1]], b) if n_actions == b.shape[1] else None
        if avg is None:
            raise ValueError("constrained-social family requires one local action per symbol")
        worst_i = min(
            c[x - 1, a] - c[i, a] - (1.0 - spec.rho) * (avg[x - 1] - avg[i])
            for a in range(n_actions)
            for i in range(x)
        )
        checks.append(_ineq("S-Ex5(i)", float(worst_i), "submodularity toward the last state"))
        worst_ii = min(
            (1.0 - spec.rho) * (avg[0] - avg[i]) - (c[0, a] - c[i, a])
            for a in range(n_actions)
            for i in range(x)
        )
        checks.append(_ineq("S-Ex5(ii)", float(worst_ii), "submodularity toward the first state"))
    elif isinstance(spec, Scheduling):
        checks.append(_tp2_check("A2-hi", spec.obs_hi.matrix, "mode-2 observation matrix TP2"))
        checks.append(_tp2_check("A3", p, "transition matrix TP2"))
        if spec.confusion is not None:
            degraded = spec.obs_hi.matrix @ spec.confusion
            gap = -float(np.abs(degraded - b).max())
            checks.append(_ineq("blackwell", gap, "mode-1 matrix equals mode-2 times confusion"))
    else:
        raise ValueError(f"unsupported cost family: {type(spec).__name__}")
    return AssumptionReport(tuple(checks))


# ---------------------------------------------------------------------------
# Random generators for property tests


def random_mlr_pair(
    n_states: int, rng: np.random.Generator, strength: float = 2.0
) -> tuple[np.ndarray, np.ndarray]:
    """A pair ``(hi, lo)`` with ``hi >= lo`` in the MLR order.

    ``hi`` is ``lo`` reweighted by an increasing likelihood-ratio vector.
    """
    lo = rng.dirichlet(np.ones(n_states))
    ratio = np.cumsum(rng.exponential(strength, size=n_states))
    hi = lo * ratio
    hi /= hi.sum()
    return hi, lo


def random_tp2_stochastic(
    rows: int, cols: int, rng: np.random.Generator, max_tries: int = 200
) -> np.ndarray:
    """Random row-stochastic TP2 matrix.

    Draws positive matrices, sorts rows by mean symbol index, and
    rejection-samples on the TP2 test; falls back to rows of discretized
    Gaussians with increasing means (always TP2) if rejection stalls.
    """
    idx = np.arange(cols)
    for _ in range(max_tries):
        m = rng.dirichlet(np.ones(cols), size=rows)
        keys = m @ idx
        m = m[np.argsort(keys)]
        if is_tp2(m):
            return m
    centers = np.sort(rng.uniform(0, cols - 1, size=rows))
    scale = rng.uniform(0.5, 1.5) * cols / 4.0
    m = np.exp(-0.5 * ((idx[None, :] - centers[:, None]) / scale) ** 2)
    m /= m.sum(axis=1, keepdims=True)
    return m


def random_absorbing_tp2(
    n_states: int, rng: np.random.Generator, max_tries: int = 200
) -> np.ndarray:
    """Random TP2 transition matrix with an absorbing first state and
    transient remainder (positive absorption mass from every state)."""
    for _ in range(max_tries):
        p = np.zeros((n_states, n_states))
        p[0, 0] = 1.0
        rest = random_tp2_stochastic(n_states - 1, n_states, rng)
        p[1:] = rest
        if np.all(p[1:, 0] > 1e-6) and is_tp2(p):
            return p
    raise RuntimeError("failed to generate an absorbing TP2 matrix")


def random_ordered_matrix_pair(
    n_states: int, rng: np.random.Generator, max_tries: int = 500
) -> tuple[np.ndarray, np.ndarray]:
    """Random pair ``(P1, P2)`` with ``P1 >= P2`` in the transition order.

    Mixes two constructions: identical-row (iid) matrices built from an
    MLR-ordered pair of distributions, and an exponential tilt of a common
    base matrix.
    """
    if rng.random() < 0.5:
        hi, lo = random_mlr_pair(n_states, rng)
        p1 = np.tile(hi, (n_states, 1))
        p2 = np.tile(lo, (n_states, 1))
        return p1, p2
    for _ in range(max_tries):
        base = rng.dirichlet(np.ones(n_states), size=n_states)
        t = rng.uniform(2.0, 12.0)
        tilt = t ** np.arange(n_states)
        p1 = base * tilt
        p1 /= p1.sum(axis=1, keepdims=True)
        if matrix_order_geq(p1, base):
            return p1, base
    hi, lo = random_mlr_pair(n_states, rng)
    return np.tile(hi, (n_states, 1)), np.tile(lo, (n_states, 1))
