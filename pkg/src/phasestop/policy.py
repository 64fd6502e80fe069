"""Linear threshold policies on the simplex and the SPSA policy-gradient search.

A threshold policy stops exactly when the linear score
``pi(2) + theta(1) pi(3) + ... + theta(X-2) pi(X) - theta(X-1)`` is negative.
The constraint set ``theta(X-2) >= 1``, ``0 <= theta(i) <= theta(X-2)``,
``theta(X-1) > 0`` characterizes the policies whose score is monotone along
every line anchored at the extreme vertices, i.e. the policies consistent
with a threshold switching curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CostSpec, DetectionModel
from .sim import simulate_batch

STOP, CONTINUE = 1, 2


@dataclass(frozen=True)
class LinearThresholdPolicy:
    theta: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.theta, dtype=float)
        object.__setattr__(self, "theta", t)
        if t.ndim != 1 or t.size < 1:
            raise ValueError("theta must be a vector with at least one entry")

    @property
    def n_states(self) -> int:
        return self.theta.size + 1

    def coefficients(self) -> tuple[np.ndarray, float]:
        """Belief-space coefficient vector and intercept of the score."""
        c = np.zeros(self.n_states)
        c[1] = 1.0
        c[2:] = self.theta[: self.n_states - 2]
        return c, float(self.theta[-1])

    def score(self, pi) -> float:
        c, t = self.coefficients()
        return float(np.asarray(pi, dtype=float) @ c - t)

    def decide(self, pi) -> int:
        """1 (stop) when the score is strictly negative, else 2 (continue)."""
        return STOP if self.score(pi) < 0.0 else CONTINUE

    def batch_decide(self, pts: np.ndarray) -> np.ndarray:
        c, t = self.coefficients()
        return np.where(np.asarray(pts, dtype=float) @ c - t < 0.0, STOP, CONTINUE)


def theta_is_mlr_increasing(theta) -> bool:
    """Feasibility of the threshold coefficients: monotone score along the
    vertex-anchored lines plus a stopping region containing the first vertex."""
    t = np.asarray(theta, dtype=float)
    if t[-1] <= 0.0:
        return False
    if t.size >= 2:
        if t[-2] < 1.0:
            return False
        head = t[:-2]
        if np.any(head < 0.0) or np.any(head > t[-2]):
            return False
    return True


def phi_to_theta(phi) -> np.ndarray:
    """Unconstrained-to-constrained reparametrization.

    The squared/sine map guarantees the feasibility constraints for any phi
    (up to the degenerate last entry when ``phi[-1] = 0``).
    """
    p = np.asarray(phi, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise ValueError("phi must be a vector with at least one entry")
    theta = np.empty_like(p)
    theta[-1] = p[-1] ** 2
    if p.size >= 2:
        theta[-2] = 1.0 + p[-2] ** 2
        if p.size >= 3:
            theta[:-2] = (1.0 + p[-2] ** 2) * np.sin(p[:-2]) ** 2
    return theta


def line_monotonicity_violations(
    theta,
    rng: np.random.Generator | None = None,
    n_lines: int = 0,
    include_vertex_lines: bool = True,
    tol: float = 1e-12,
) -> list[str]:
    """Witnesses that the threshold score fails to be monotone on some
    vertex-anchored line, or that the first vertex is not in the stop set.

    Feasible coefficients produce no witnesses; every infeasible vector
    produces at least one when the vertex-anchored lines are included.
    """
    t = np.asarray(theta, dtype=float)
    pol = LinearThresholdPolicy(t)
    x = pol.n_states
    c, intercept = pol.coefficients()
    out: list[str] = []
    if intercept <= tol:
        out.append("first vertex not in the stopping set (intercept <= 0)")

    bases_hi: list[np.ndarray] = []
    bases_lo: list[np.ndarray] = []
    if include_vertex_lines:
        for j in range(x - 1):
            e = np.zeros(x)
            e[j] = 1.0
            bases_hi.append(e)
        for j in range(1, x):
            e = np.zeros(x)
            e[j] = 1.0
            bases_lo.append(e)
    if rng is not None and n_lines > 0:
        for _ in range(n_lines):
            w = rng.dirichlet(np.ones(x - 1))
            base = np.insert(w, x - 1, 0.0)
            bases_hi.append(base)
            base = np.insert(rng.dirichlet(np.ones(x - 1)), 0, 0.0)
            bases_lo.append(base)

    # toward the last vertex the score must be non-decreasing
    for base in bases_hi:
        slope = c[x - 1] - float(base @ c)
        if slope < -tol:
            out.append(f"score decreases toward e_{x} on the line from {base}")
    # toward the first vertex the score must be non-increasing
    for base in bases_lo:
        slope = c[0] - float(base @ c)
        if slope > tol:
            out.append(f"score increases toward e_1 on the line from {base}")
    return out


# ---------------------------------------------------------------------------
# Simulated policy cost


def sample_cost(
    policy,
    model: DetectionModel,
    spec: CostSpec,
    priors: np.ndarray,
    rng: np.random.Generator,
    transformed: bool = True,
    max_steps: int | None = None,
) -> float:
    """Average discounted sample-path cost of a policy over the given priors,
    one simulated trajectory per prior."""
    res = simulate_batch(
        model, spec, policy, priors, rng, max_steps=max_steps, transformed=transformed
    )
    return float(res.costs.mean())


# ---------------------------------------------------------------------------
# SPSA


@dataclass(frozen=True)
class SpsaParams:
    """Gain schedule: step ``eps/(n+1+s)^zeta``, perturbation ``delta/(n+1)^gamma``."""

    step: float = 0.1
    stability: float = 10.0
    step_decay: float = 0.602
    perturb: float = 0.05
    perturb_decay: float = 0.602

    def __post_init__(self):
        if not 0.5 <= self.perturb_decay <= 1.0:
            raise ValueError("perturbation decay must lie in [0.5, 1]")
        if not 0.5 < self.step_decay <= 1.0:
            raise ValueError("step decay must lie in (0.5, 1]")
        if self.step <= 0 or self.stability <= 0 or self.perturb <= 0:
            raise ValueError("step, stability, and perturbation scales must be positive")


@dataclass
class SpsaResult:
    phi_trace: np.ndarray  # (iterations+1, dim)
    theta_trace: np.ndarray
    costs: np.ndarray  # per-iteration two-sided average batch cost
    final_phi: np.ndarray
    final_theta: np.ndarray

    @property
    def policy(self) -> LinearThresholdPolicy:
        return LinearThresholdPolicy(self.final_theta)


def spsa_optimize(
    model: DetectionModel,
    spec: CostSpec,
    init_phi,
    iterations: int,
    params: SpsaParams,
    priors: np.ndarray | None,
    rng: np.random.Generator,
    cost_fn=None,
    max_steps: int | None = None,
) -> SpsaResult:
    """Two-point simultaneous-perturbation gradient descent on the
    unconstrained parametrization.

    Each iteration evaluates the batch cost at ``phi +/- delta_n d_n`` with
    common random numbers, forms the random-direction gradient estimate, and
    takes a decaying step.  ``cost_fn(phi, rng)`` may replace the simulated
    policy cost (used for synthetic objectives and tests).
    """
    phi = np.asarray(init_phi, dtype=float).copy()
    if cost_fn is None:
        if priors is None:
            raise ValueError("priors required when optimizing the simulated cost")

        def cost_fn(p, r):
            pol = LinearThresholdPolicy(phi_to_theta(p))
            return sample_cost(pol, model, spec, priors, r, max_steps=max_steps)

    dim = phi.size
    phi_trace = [phi.copy()]
    costs = []
    for n in range(iterations):
        delta_n = params.perturb / (n + 1.0) ** params.perturb_decay
        direction = rng.integers(0, 2, size=dim) * 2 - 1
        seed = int(rng.integers(0, 2**63 - 1))
        j_plus = cost_fn(phi + delta_n * direction, np.random.default_rng(seed))
        j_minus = cost_fn(phi - delta_n * direction, np.random.default_rng(seed))
        if not (np.isfinite(j_plus) and np.isfinite(j_minus)):
            raise RuntimeError(
                f"non-finite batch cost at iteration {n}: phi={phi}, "
                f"J+={j_plus}, J-={j_minus}"
            )
        grad = (j_plus - j_minus) / (2.0 * delta_n) * direction
        step_n = params.step / (n + 2.0 + params.stability) ** params.step_decay
        phi = phi - step_n * grad
        phi_trace.append(phi.copy())
        costs.append(0.5 * (j_plus + j_minus))
    phi_arr = np.array(phi_trace)
    theta_arr = np.array([phi_to_theta(p) for p in phi_trace])
    return SpsaResult(
        phi_trace=phi_arr,
        theta_trace=theta_arr,
        costs=np.array(costs),
        final_phi=phi,
        final_theta=phi_to_theta(phi),
    )


def optimize_with_restarts(
    model: DetectionModel,
    spec: CostSpec,
    iterations: int,
    params: SpsaParams,
    priors: np.ndarray,
    rng: np.random.Generator,
    restarts: int = 5,
    init_scale: float = 1.0,
    eval_seed: int | None = None,
    eval_priors: np.ndarray | None = None,
    max_steps: int | None = None,
) -> tuple[SpsaResult, float]:
    """Run SPSA from several random initial points and keep the cheapest
    final policy, scored on a shared evaluation seed."""
    dim = model.n_states - 1
    eval_priors = priors if eval_priors is None else eval_priors
    eval_seed = int(rng.integers(0, 2**63 - 1)) if eval_seed is None else eval_seed
    best: tuple[SpsaResult, float] | None = None
    for _ in range(max(1, restarts)):
        init = rng.normal(0.0, init_scale, size=dim)
        res = spsa_optimize(
            model, spec, init, iterations, params, priors, rng, max_steps=max_steps
        )
        score = sample_cost(
            res.policy,
            model,
            spec,
            eval_priors,
            np.random.default_rng(eval_seed),
            max_steps=max_steps,
        )
        if best is None or score < best[1]:
            best = (res, score)
    assert best is not None
    return best
