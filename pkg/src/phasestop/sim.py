"""Trajectory simulation and Monte Carlo cost evaluation.

Timing convention: the chain starts at ``x_0`` drawn from the initial belief;
at each step ``k >= 1`` the chain moves, a symbol is observed, the belief is
updated, and the decision is applied to the updated belief.  ``tau`` is the
first step whose decision is stop, ``tau0`` the first step in the absorbing
state.  Costs therefore start accruing at the first post-observation belief.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dp import STOP, stage_cost_vectors
from .filters import SocialContext, hmm_update, social_local_action, social_update
from .model import DEFAULT_BINS, CostSpec, DetectionModel, as_belief

DETECTION_MAX_STEPS = 10_000
SOCIAL_MAX_STEPS = 1_000


@dataclass
class Trajectory:
    states: np.ndarray  # x_0 .. x_K (1-based state labels)
    observations: np.ndarray  # y_1 .. y_K (symbol indices)
    beliefs: np.ndarray  # pi_0 .. pi_K
    actions: np.ndarray  # u_1 .. u_K (1 stop / 2 continue)
    tau: int | None  # stop step, None when censored
    tau0: int | None  # first step in the absorbing state, None if not reached
    local_actions: np.ndarray | None = None  # social broadcasts a_1 .. a_K

    @property
    def censored(self) -> bool:
        return self.tau is None


def _policy_fn(policy):
    return policy.decide if hasattr(policy, "decide") else policy


def _draw(rng: np.random.Generator, pmf: np.ndarray) -> int:
    return int(np.searchsorted(np.cumsum(pmf), rng.random(), side="right"))


def sample_trajectory(
    model: DetectionModel,
    policy,
    max_steps: int = DETECTION_MAX_STEPS,
    rng: np.random.Generator | None = None,
    bins: int = DEFAULT_BINS,
) -> Trajectory:
    """Simulate one chain/observation/belief/decision path until stop."""
    rng = rng if rng is not None else np.random.default_rng()
    decide = _policy_fn(policy)
    b = model.discrete_obs(bins).matrix
    p = model.transition
    pi = as_belief(model.initial)
    x = _draw(rng, pi)
    states = [x + 1]
    beliefs = [pi]
    observations: list[int] = []
    actions: list[int] = []
    tau = None
    tau0 = 0 if x == 0 else None
    for k in range(1, max_steps + 1):
        x = _draw(rng, p[x])
        if tau0 is None and x == 0:
            tau0 = k
        y = _draw(rng, b[x])
        pi = hmm_update(pi, y, model).next_belief
        u = int(decide(pi))
        states.append(x + 1)
        observations.append(y)
        beliefs.append(pi)
        actions.append(u)
        if u == STOP:
            tau = k
            break
    return Trajectory(
        states=np.array(states),
        observations=np.array(observations),
        beliefs=np.array(beliefs),
        actions=np.array(actions),
        tau=tau,
        tau0=tau0,
    )


def social_trajectory(
    ctx: SocialContext,
    model: DetectionModel,
    policy,
    true_state: int,
    max_steps: int = SOCIAL_MAX_STEPS,
    rng: np.random.Generator | None = None,
) -> Trajectory:
    """Simulate agents broadcasting myopic actions while a global stopping
    policy watches the public belief.

    The underlying state is fixed (identity dynamics); the global decision at
    round ``k`` is applied to the public belief before agent ``k`` acts.
    """
    rng = rng if rng is not None else np.random.default_rng()
    decide = _policy_fn(policy)
    b = ctx.obs.matrix
    pi = as_belief(model.initial)
    beliefs = [pi]
    observations: list[int] = []
    actions: list[int] = []
    local: list[int] = []
    tau = None
    for k in range(1, max_steps + 1):
        u = int(decide(pi))
        actions.append(u)
        if u == STOP:
            tau = k
            break
        y = _draw(rng, b[true_state - 1])
        a = social_local_action(pi, y, ctx)
        pi = social_update(pi, a, ctx).next_belief
        observations.append(y)
        local.append(a)
        beliefs.append(pi)
    n = len(beliefs)
    return Trajectory(
        states=np.full(n, true_state),
        observations=np.array(observations),
        beliefs=np.array(beliefs),
        actions=np.array(actions),
        tau=tau,
        tau0=0 if true_state == 1 else None,
        local_actions=np.array(local),
    )


# ---------------------------------------------------------------------------
# Vectorized batches


@dataclass
class BatchResult:
    costs: np.ndarray  # per-trajectory accumulated cost
    tau: np.ndarray  # stop step per trajectory (= max step when censored)
    tau0: np.ndarray  # first absorbing step, -1 when not reached
    censored: np.ndarray  # boolean


def _draw_rows(rng: np.random.Generator, pmf_rows: np.ndarray) -> np.ndarray:
    cum = np.cumsum(pmf_rows, axis=1)
    u = rng.random(pmf_rows.shape[0])
    return (u[:, None] > cum).sum(axis=1)


def _stage_cost_bound(spec: CostSpec, model: DetectionModel, bins: int) -> float:
    eye = np.eye(model.n_states)
    c1, c2 = stage_cost_vectors(spec, model, eye, bins=bins)
    bound = float(np.max(np.abs(np.concatenate([c1, c2]))))
    return bound + getattr(spec, "alpha", 0.0) + 1e-12


def simulate_batch(
    model: DetectionModel,
    spec: CostSpec,
    policy,
    priors: np.ndarray,
    rng: np.random.Generator,
    max_steps: int | None = None,
    transformed: bool = True,
    truncation_tol: float = 1e-8,
    bins: int = DEFAULT_BINS,
) -> BatchResult:
    """Simulate one trajectory per prior row, accumulating discounted stage costs.

    With ``transformed=False`` the raw expected costs are accumulated.
    Censored trajectories contribute their truncated cost and are flagged.
    """
    from .model import ConstrainedSocial, RiskSensitive, Scheduling, SocialStopping

    if isinstance(spec, (ConstrainedSocial, RiskSensitive, Scheduling, SocialStopping)):
        raise ValueError(
            "batch cost simulation supports the additive-cost families driven "
            "by the plain Bayesian filter"
        )
    priors = np.atleast_2d(np.asarray(priors, dtype=float))
    n = priors.shape[0]
    b = model.discrete_obs(bins).matrix
    p = model.transition
    rho = getattr(spec, "rho", 1.0)
    if max_steps is None:
        if rho >= 1.0:
            max_steps = 500
        else:
            bound = _stage_cost_bound(spec, model, bins)
            max_steps = int(np.ceil(np.log(truncation_tol / max(bound, 1e-12)) / np.log(rho)))
            max_steps = max(1, min(max_steps, DETECTION_MAX_STEPS))
    decide_batch = policy.batch_decide if hasattr(policy, "batch_decide") else None
    decide_one = _policy_fn(policy)

    states = _draw_rows(rng, priors)
    beliefs = priors.copy()
    costs = np.zeros(n)
    tau = np.full(n, max_steps, dtype=int)
    tau0 = np.where(states == 0, 0, -1)
    active = np.ones(n, dtype=bool)
    disc = 1.0
    for k in range(1, max_steps + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        states[idx] = _draw_rows(rng, p[states[idx]])
        hit = idx[(tau0[idx] < 0) & (states[idx] == 0)]
        tau0[hit] = k
        ys = _draw_rows(rng, b[states[idx]])
        pred = beliefs[idx] @ p
        unnorm = pred * b[:, ys].T
        sigma = unnorm.sum(axis=1)
        beliefs[idx] = unnorm / sigma[:, None]
        if decide_batch is not None:
            acts = np.asarray(decide_batch(beliefs[idx]))
        else:
            acts = np.array([decide_one(beliefs[i]) for i in idx])
        c_stop, c_cont = stage_cost_vectors(
            spec, model, beliefs[idx], original=not transformed, bins=bins
        )
        stop_mask = acts == STOP
        costs[idx[stop_mask]] += disc * c_stop[stop_mask]
        costs[idx[~stop_mask]] += disc * c_cont[~stop_mask]
        tau[idx[stop_mask]] = k
        active[idx[stop_mask]] = False
        disc *= rho
    censored = active.copy()
    return BatchResult(costs=costs, tau=tau, tau0=tau0, censored=censored)


def sample_change_times(
    model: DetectionModel,
    n: int,
    rng: np.random.Generator,
    max_steps: int = DETECTION_MAX_STEPS,
) -> np.ndarray:
    """First-hit times of the absorbing state for ``n`` independent chains
    (-1 when not absorbed within ``max_steps``)."""
    pi0 = as_belief(model.initial)
    p = model.transition
    states = _draw_rows(rng, np.tile(pi0, (n, 1)))
    times = np.where(states == 0, 0, -1)
    active = states != 0
    for k in range(1, max_steps + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        states[idx] = _draw_rows(rng, p[states[idx]])
        hit = idx[states[idx] == 0]
        times[hit] = k
        active[hit] = False
    return times


# ---------------------------------------------------------------------------
# Criterion decomposition


@dataclass
class DetectionSummary:
    mean_delay: float
    false_alarm_rate: float
    criterion: float
    stderr: float
    n: int
    n_censored: int


def decompose_from_times(tau, tau0, d: float, beta: float, censored=None) -> DetectionSummary:
    """Empirical delay / false-alarm decomposition of the detection criterion.

    ``tau0 < 0`` encodes "change not reached"; the delay term is
    ``(tau - tau0)^+`` and a false alarm is a stop strictly before the change.
    """
    tau = np.asarray(tau, dtype=float)
    t0 = np.asarray(tau0, dtype=float)
    if tau.size == 0:
        raise ValueError("no trajectories")
    no_change = t0 < 0
    delay = np.where(no_change, 0.0, np.maximum(tau - t0, 0.0))
    false_alarm = np.where(no_change, 1.0, (tau < t0).astype(float))
    per_traj = d * delay + beta * false_alarm
    n = tau.size
    stderr = float(per_traj.std(ddof=1) / np.sqrt(n)) if n > 1 else float("inf")
    n_censored = int(np.asarray(censored).sum()) if censored is not None else 0
    return DetectionSummary(
        mean_delay=float(delay.mean()),
        false_alarm_rate=float(false_alarm.mean()),
        criterion=float(per_traj.mean()),
        stderr=stderr,
        n=n,
        n_censored=n_censored,
    )


def shiryayev_decompose(trajectories, d: float, beta: float) -> DetectionSummary:
    """Decompose recorded trajectories into the delay and false-alarm terms."""
    if not trajectories:
        raise ValueError("no trajectories")
    tau = np.array([t.tau if t.tau is not None else len(t.actions) for t in trajectories])
    tau0 = np.array([t.tau0 if t.tau0 is not None else -1 for t in trajectories])
    censored = np.array([t.censored for t in trajectories])
    return decompose_from_times(tau, tau0, d, beta, censored)


def trajectory_csv(traj: Trajectory) -> str:
    """CSV rows (step, state, observation, belief components, action)."""
    x = traj.beliefs.shape[1]
    head = "step,state,observation," + ",".join(f"belief{k}" for k in range(x)) + ",action"
    lines = [head]
    for k in range(len(traj.beliefs)):
        obs = str(int(traj.observations[k - 1])) if 1 <= k <= len(traj.observations) else ""
        act = str(int(traj.actions[k - 1])) if 1 <= k <= len(traj.actions) else ""
        state = int(traj.states[k]) if k < len(traj.states) else int(traj.states[-1])
        belief = ",".join(f"{v:.17g}" for v in traj.beliefs[k])
        lines.append(f"{k},{state},{obs},{belief},{act}")
    return "\n".join(lines) + "\n"
