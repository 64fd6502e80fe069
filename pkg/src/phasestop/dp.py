"""Grid dynamic programming on the belief simplex.

Builds a barycentric grid, evaluates the per-family stage costs in the
transformed coordinates (stop cost and continue cost after subtracting the
linear stopping offset), and runs value iteration with off-grid successor
beliefs projected to the nearest grid point.  Structural analysis helpers
check connectedness, convexity, and single-crossing of the policy along
vertex-anchored lines.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .model import (
    DEFAULT_BINS,
    ConstrainedSocial,
    CostSpec,
    DetectionModel,
    DiscreteObs,
    QuickestClassicalDelay,
    QuickestPredictiveDelay,
    RiskSensitive,
    Scheduling,
    SocialStopping,
    TransientDetection,
)

STOP, CONTINUE = 1, 2


# ---------------------------------------------------------------------------
# Simplex grid


@dataclass
class SimplexGrid:
    """Barycentric grid: all integer compositions of ``m`` into ``X`` parts."""

    m: int
    coords: np.ndarray  # (N, X) integer barycentric coordinates
    points: np.ndarray  # (N, X) belief vectors
    neighbors: tuple  # per-point arrays of indices at barycentric L1 distance 2

    _index: dict = field(repr=False, default_factory=dict)

    @property
    def n_states(self) -> int:
        return self.coords.shape[1]

    @property
    def n_points(self) -> int:
        return self.coords.shape[0]

    def index_of(self, coords) -> int:
        return self._index[tuple(int(c) for c in coords)]

    def nearest(self, pts) -> np.ndarray:
        """Indices of the grid points nearest (Euclidean) to each row of ``pts``.

        Distance ties resolve to the lexicographically smallest barycentric
        coordinates (the grid is stored in lexicographic order).
        """
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.n_states == 2:
            idx = np.ceil(pts[:, 0] * self.m - 0.5).astype(int)
            return np.clip(idx, 0, self.m)
        g = self.points
        g2 = (g * g).sum(axis=1)
        out = np.empty(pts.shape[0], dtype=int)
        step = 8192
        for lo in range(0, pts.shape[0], step):
            chunk = pts[lo : lo + step]
            d2 = g2[None, :] - 2.0 * chunk @ g.T
            out[lo : lo + step] = np.argmin(d2, axis=1)
        return out


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head, *rest)


def build_grid(n_states: int, m: int) -> SimplexGrid:
    """Grid of all beliefs with coordinates k/m, in lexicographic order."""
    if m < 1:
        raise ValueError("resolution m must be >= 1")
    coords = np.array(list(_compositions(m, n_states)), dtype=int)
    points = coords / float(m)
    # force exact unit sums (the divisions can lose a ulp in the row total)
    for row in points:
        for _ in range(12):
            resid = 1.0 - row.sum()
            if resid == 0.0:
                break
            best_j, best_err = -1, abs(resid)
            for j in np.argsort(row):
                if row[j] + resid < 0.0:
                    continue
                old = row[j]
                row[j] = old + resid
                err = abs(1.0 - row.sum())
                if err == 0.0:
                    break
                row[j] = old
                if err < best_err:
                    best_j, best_err = j, err
            else:
                if best_j < 0:
                    break
                row[best_j] += resid
    index = {tuple(int(v) for v in c): i for i, c in enumerate(coords)}
    nbr: list[list[int]] = [[] for _ in range(len(coords))]
    for i, c in enumerate(coords):
        for a in range(n_states):
            if c[a] == 0:
                continue
            for b in range(n_states):
                if a == b:
                    continue
                key = list(c)
                key[a] -= 1
                key[b] += 1
                j = index.get(tuple(key))
                if j is not None:
                    nbr[i].append(j)
    neighbors = tuple(np.array(sorted(v), dtype=int) for v in nbr)
    return SimplexGrid(m=m, coords=coords, points=points, neighbors=neighbors, _index=index)


# ---------------------------------------------------------------------------
# Stage costs


def _welfare_term(costs: np.ndarray, b: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Expected myopic local cost: sum over symbols of min_a c_a' (B_y o pi)."""
    total = np.zeros(pts.shape[0])
    for y in range(b.shape[1]):
        scores = pts @ (b[:, y : y + 1] * costs)  # (N, A)
        total += scores.min(axis=1)
    return total


def stage_cost_vectors(
    spec: CostSpec,
    model: DetectionModel,
    pts: np.ndarray,
    original: bool = False,
    bins: int = DEFAULT_BINS,
) -> tuple[np.ndarray, np.ndarray]:
    """Stage costs (stop, continue) for each belief row of ``pts``.

    By default the transformed coordinates are returned (the linear stopping
    offset subtracted, the continue cost compensated); ``original=True``
    gives the raw expected costs.  For the scheduling family the two entries
    are the mode-1 and mode-2 costs, and for the risk-sensitive family the
    original continue cost is zero (the delay enters the belief recursion).
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    p = model.transition
    p1 = pts[:, 0]
    if isinstance(spec, QuickestPredictiveDelay):
        fpi = 1.0 - p1
        fppi = 1.0 - pts @ p[:, 0]
        var = p1 - p1 * p1
        c1_bar = spec.alpha * var + spec.beta * fpi
        c2_bar = spec.d * (pts @ p[:, 0]) + spec.op_cost
    elif isinstance(spec, QuickestClassicalDelay):
        f = spec.false_alarm
        fpi = pts @ f
        fppi = pts @ (p @ f)
        var = p1 - p1 * p1
        c1_bar = spec.alpha * var + spec.beta * fpi
        c2_bar = spec.d * p1
    elif isinstance(spec, TransientDetection):
        f = spec.false_alarm_vector(model.n_states)
        if spec.alpha > 0 and spec.false_alarm is not None:
            raise ValueError("variance penalty requires the default start-state false alarm")
        fpi = pts @ f
        fppi = pts @ (p @ f)
        var = fpi - fpi * fpi
        c1_bar = spec.alpha * var + spec.beta * fpi
        c2_bar = pts @ spec.delays
    elif isinstance(spec, RiskSensitive):
        r1, r2 = spec.scalings(p)
        c2 = pts @ (r2 * (p @ r1) - r1)
        if original:
            return pts @ r1, np.zeros(pts.shape[0])
        return np.zeros(pts.shape[0]), c2
    elif isinstance(spec, SocialStopping):
        c1_bar = spec.beta * (1.0 - p1)
        c2_bar = spec.d * p1
        if spec.include_welfare:
            c2_bar = c2_bar + _welfare_term(spec.local_costs, model.discrete_obs(bins).matrix, pts)
        if original:
            return c1_bar, c2_bar
        return np.zeros(pts.shape[0]), c2_bar - (1.0 - spec.rho) * c1_bar
    elif isinstance(spec, ConstrainedSocial):
        b = model.discrete_obs(bins).matrix
        c = spec.local_costs
        herd = (pts @ c).min(axis=1) / (1.0 - spec.rho)
        reveal = pts @ (b * c).sum(axis=1)
        c1_bar = spec.beta * (1.0 - p1) + herd
        c2_bar = reveal + spec.d * p1
        if original:
            return c1_bar, c2_bar
        return herd, reveal + (spec.d + (1.0 - spec.rho) * spec.beta) * p1 - (1.0 - spec.rho) * spec.beta
    elif isinstance(spec, Scheduling):
        q = pts @ p
        gg = spec.g * spec.g
        var = q @ gg - (q @ spec.g) ** 2
        cost1 = spec.alpha1 * var + q @ spec.c1
        cost2 = spec.alpha2 * var + q @ spec.c2
        return cost1, cost2
    else:
        raise ValueError(f"unsupported cost family: {type(spec).__name__}")
    # shared linear-offset transformation for the detection families
    if original:
        return c1_bar, c2_bar
    ab = spec.alpha + spec.beta
    c1 = c1_bar - ab * fpi
    c2 = c2_bar - ab * fpi + spec.rho * ab * fppi
    return c1, c2


def stage_costs(
    spec: CostSpec,
    model: DetectionModel,
    pi,
    original: bool = False,
    bins: int = DEFAULT_BINS,
) -> tuple[float, float]:
    """Stage costs (stop, continue) at one belief; see :func:`stage_cost_vectors`."""
    c1, c2 = stage_cost_vectors(spec, model, np.atleast_2d(pi), original=original, bins=bins)
    return float(c1[0]), float(c2[0])


def value_offset(spec: CostSpec, model: DetectionModel, pts: np.ndarray) -> np.ndarray:
    """Linear offset such that original values = transformed values + offset."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if isinstance(spec, QuickestPredictiveDelay):
        return (spec.alpha + spec.beta) * (1.0 - pts[:, 0])
    if isinstance(spec, QuickestClassicalDelay):
        return (spec.alpha + spec.beta) * (pts @ spec.false_alarm)
    if isinstance(spec, TransientDetection):
        f = spec.false_alarm_vector(model.n_states)
        return (spec.alpha + spec.beta) * (pts @ f)
    if isinstance(spec, RiskSensitive):
        r1, _ = spec.scalings(model.transition)
        return pts @ r1
    if isinstance(spec, (SocialStopping, ConstrainedSocial)):
        return spec.beta * (1.0 - pts[:, 0])
    if isinstance(spec, Scheduling):
        return np.zeros(pts.shape[0])
    raise ValueError(f"unsupported cost family: {type(spec).__name__}")


# ---------------------------------------------------------------------------
# Successor structure


def _project(grid: SimplexGrid, beliefs: np.ndarray, interpolate: bool):
    """Map successor beliefs to grid indices and weights.

    Returns ``(idx, w)`` of shape (K, S): S = 1 for nearest-point projection,
    S = 2 for linear interpolation (supported on 2-state grids).
    """
    if not interpolate:
        idx = grid.nearest(beliefs)
        return idx[:, None], np.ones((beliefs.shape[0], 1))
    if grid.n_states != 2:
        raise NotImplementedError("interpolation is only supported on 2-state grids")
    pos = np.clip(beliefs[:, 0] * grid.m, 0.0, float(grid.m))
    lo = np.floor(pos).astype(int)
    lo = np.minimum(lo, grid.m - 1)
    frac = pos - lo
    idx = np.stack([lo, lo + 1], axis=1)
    w = np.stack([1.0 - frac, frac], axis=1)
    return idx, w


def _hmm_branches(model, grid, bins, interpolate, scale=None):
    """Successor indices/weights per observation symbol for the HMM filter."""
    b = model.discrete_obs(bins).matrix
    pts = grid.points if scale is None else grid.points * scale[None, :]
    pred = pts @ model.transition
    idx_parts, w_parts = [], []
    for y in range(b.shape[1]):
        unnorm = pred * b[:, y][None, :]
        sigma = unnorm.sum(axis=1)
        safe = np.where(sigma > 0.0, sigma, 1.0)
        nxt = unnorm / safe[:, None]
        nxt[sigma <= 0.0] = grid.points[0]
        idx, w = _project(grid, nxt, interpolate)
        idx_parts.append(idx)
        w_parts.append(w * sigma[:, None])
    return np.concatenate(idx_parts, axis=1), np.concatenate(w_parts, axis=1)


def _static_obs_branches(model, grid, bins, interpolate):
    """HMM branches with identity dynamics (social families)."""
    frozen = model.with_transition(np.eye(model.n_states))
    return _hmm_branches(frozen, grid, bins, interpolate)


def _social_branches(spec, model, grid, bins, interpolate):
    """Successor indices/weights per broadcast action under social learning."""
    b = model.discrete_obs(bins).matrix
    c = spec.local_costs
    pts = grid.points
    n, x = pts.shape
    n_actions = c.shape[1]
    chosen = np.empty((n, b.shape[1]), dtype=int)
    for y in range(b.shape[1]):
        scores = pts @ (b[:, y : y + 1] * c)  # (N, A)
        chosen[:, y] = np.argmin(scores, axis=1)
    idx_parts, w_parts = [], []
    for a in range(n_actions):
        lik = np.zeros((n, x))
        for y in range(b.shape[1]):
            mask = chosen[:, y] == a
            lik[mask] += b[:, y][None, :]
        unnorm = lik * pts
        sigma = unnorm.sum(axis=1)
        safe = np.where(sigma > 0.0, sigma, 1.0)
        nxt = unnorm / safe[:, None]
        nxt[sigma <= 0.0] = pts[0]
        idx, w = _project(grid, nxt, interpolate)
        idx_parts.append(idx)
        w_parts.append(w * sigma[:, None])
    return np.concatenate(idx_parts, axis=1), np.concatenate(w_parts, axis=1)


# ---------------------------------------------------------------------------
# Value iteration


@dataclass
class GridSolution:
    """Value function and policy on a grid, with convergence metadata."""

    values: np.ndarray  # transformed coordinates
    values_original: np.ndarray
    policy: np.ndarray  # 1 = stop / mode 1, 2 = continue / mode 2
    sweeps: int
    sup_delta: float
    delta_history: np.ndarray


MAX_SWEEPS = 10_000
DEFAULT_TOL = 1e-8
DEFAULT_HORIZON_UNDISCOUNTED = 200


def value_iterate(
    model: DetectionModel,
    spec: CostSpec,
    grid: SimplexGrid,
    horizon: int | None = None,
    tol: float | None = None,
    bins: int = DEFAULT_BINS,
    interpolate: bool = False,
) -> GridSolution:
    """Fixed-point iteration of the Bellman recursion on the grid.

    Undiscounted runs (rho = 1, and the risk-sensitive family) default to a
    fixed horizon; discounted runs stop when the sup-norm change drops below
    ``tol`` (default 1e-8) or after 10_000 sweeps.
    """
    if grid.n_states != model.n_states:
        raise ValueError("grid dimension does not match the model")
    undiscounted = isinstance(spec, RiskSensitive) or getattr(spec, "rho", 1.0) >= 1.0
    if horizon is None and tol is None:
        if undiscounted:
            horizon = DEFAULT_HORIZON_UNDISCOUNTED
        else:
            tol = DEFAULT_TOL
    pts = grid.points
    offset = value_offset(spec, model, pts)

    if isinstance(spec, Scheduling):
        c1, c2 = stage_cost_vectors(spec, model, pts, bins=bins)
        lo_model = model
        hi_model = DetectionModel(model.transition, model.initial, spec.obs_hi)
        idx1, w1 = _hmm_branches(lo_model, grid, bins, interpolate)
        idx2, w2 = _hmm_branches(hi_model, grid, bins, interpolate)
        v = -offset
        deltas = []
        sweeps = 0
        while True:
            q1 = c1 + spec.rho * (w1 * v[idx1]).sum(axis=1)
            q2 = c2 + spec.rho * (w2 * v[idx2]).sum(axis=1)
            v_new = np.minimum(q1, q2)
            delta = float(np.max(np.abs(v_new - v)))
            deltas.append(delta)
            v = v_new
            sweeps += 1
            if horizon is not None and sweeps >= horizon:
                break
            if tol is not None and (delta < tol or sweeps >= MAX_SWEEPS):
                break
        # greedy policy extracted from the final value table
        q1 = c1 + spec.rho * (w1 * v[idx1]).sum(axis=1)
        q2 = c2 + spec.rho * (w2 * v[idx2]).sum(axis=1)
        policy = np.where(q1 <= q2, STOP, CONTINUE)
        return GridSolution(v, v + offset, policy, sweeps, deltas[-1], np.array(deltas))

    # stopping families
    c1, c2 = stage_cost_vectors(spec, model, pts, bins=bins)
    init = -offset
    if isinstance(spec, RiskSensitive):
        _, r2 = spec.scalings(model.transition)
        idx, w = _hmm_branches(model, grid, bins, interpolate, scale=r2)
        disc = 1.0
        # multiplicative recursion: the zero-horizon value is the forced stop
        # factor, which is exactly the offset
        init = np.zeros(grid.n_points)
    elif isinstance(spec, SocialStopping):
        idx, w = _social_branches(spec, model, grid, bins, interpolate)
        disc = spec.rho
    elif isinstance(spec, ConstrainedSocial):
        idx, w = _static_obs_branches(model, grid, bins, interpolate)
        disc = spec.rho
    else:
        idx, w = _hmm_branches(model, grid, bins, interpolate)
        disc = spec.rho

    v = init
    deltas = []
    sweeps = 0
    while True:
        q2 = c2 + disc * (w * v[idx]).sum(axis=1)
        v_new = np.minimum(c1, q2)
        delta = float(np.max(np.abs(v_new - v)))
        deltas.append(delta)
        v = v_new
        sweeps += 1
        if horizon is not None and sweeps >= horizon:
            break
        if tol is not None and (delta < tol or sweeps >= MAX_SWEEPS):
            break
    # greedy policy extracted from the final value table (stop wins ties)
    q2 = c2 + disc * (w * v[idx]).sum(axis=1)
    policy = np.where(c1 <= q2, STOP, CONTINUE)
    return GridSolution(v, v + offset, policy, sweeps, deltas[-1], np.array(deltas))


def expected_value_after_update(
    model: DetectionModel,
    spec: CostSpec,
    sol: GridSolution,
    grid: SimplexGrid,
    pi0,
    original: bool = True,
    bins: int = DEFAULT_BINS,
) -> float:
    """Expected grid value of the belief after one filter step from ``pi0``.

    This is the quantity estimated by a simulated cost that starts charging
    at the first post-observation belief.
    """
    if isinstance(spec, (RiskSensitive, Scheduling)):
        raise ValueError("defined for the additive-cost detection and social families")
    pi0 = np.asarray(pi0, dtype=float)
    if isinstance(spec, (SocialStopping, ConstrainedSocial)):
        vals = sol.values_original if original else sol.values
        return float(vals[grid.nearest(pi0[None, :])[0]])
    b = model.discrete_obs(bins).matrix
    pred = model.transition.T @ pi0
    vals = sol.values_original if original else sol.values
    total = 0.0
    for y in range(b.shape[1]):
        unnorm = b[:, y] * pred
        sigma = float(unnorm.sum())
        if sigma <= 0.0:
            continue
        total += sigma * float(vals[grid.nearest((unnorm / sigma)[None, :])[0]])
    return total


# ---------------------------------------------------------------------------
# Region structure


@dataclass
class RegionReport:
    stop_indices: np.ndarray
    continue_indices: np.ndarray
    stop_components: list
    continue_components: list

    @property
    def component_ids(self) -> np.ndarray:
        n = (
            max((max(c) for c in self.stop_components + self.continue_components), default=-1)
            + 1
        )
        ids = np.full(n, -1, dtype=int)
        for k, comp in enumerate(self.stop_components + self.continue_components):
            for i in comp:
                ids[i] = k
        return ids


def _components(indices: np.ndarray, neighbors) -> list[list[int]]:
    unseen = set(int(i) for i in indices)
    comps = []
    while unseen:
        start = min(unseen)
        unseen.remove(start)
        stack = [start]
        comp = [start]
        while stack:
            u = stack.pop()
            for vtx in neighbors[u]:
                vtx = int(vtx)
                if vtx in unseen:
                    unseen.remove(vtx)
                    stack.append(vtx)
                    comp.append(vtx)
        comps.append(sorted(comp))
    return comps


def extract_regions(sol: GridSolution, grid: SimplexGrid) -> RegionReport:
    """Stop/continue sets and their grid-connected components."""
    stop = np.nonzero(sol.policy == STOP)[0]
    cont = np.nonzero(sol.policy == CONTINUE)[0]
    return RegionReport(
        stop_indices=stop,
        continue_indices=cont,
        stop_components=_components(stop, grid.neighbors),
        continue_components=_components(cont, grid.neighbors),
    )


def convexity_check(region, grid: SimplexGrid, tie_tol: float = 1e-9) -> list[tuple[int, int]]:
    """Pairs of region points whose midpoint projects outside the region.

    Midpoints of lattice points routinely sit exactly between several grid
    points; a pair only counts as violating when no minimum-distance grid
    point (ties resolved within ``tie_tol`` on the squared distance) belongs
    to the region.
    """
    region = np.asarray(sorted(int(i) for i in region), dtype=int)
    if region.size < 2:
        return []
    member = np.zeros(grid.n_points, dtype=bool)
    member[region] = True
    ii, jj = np.triu_indices(region.size, k=1)
    mids = 0.5 * (grid.points[region[ii]] + grid.points[region[jj]])
    g = grid.points
    g2 = (g * g).sum(axis=1)
    bad_pairs: list[tuple[int, int]] = []
    step = 4096
    for lo in range(0, mids.shape[0], step):
        chunk = mids[lo : lo + step]
        d2 = g2[None, :] - 2.0 * chunk @ g.T  # squared distance minus constant
        dmin = d2.min(axis=1, keepdims=True)
        ok = (member[None, :] & (d2 <= dmin + tie_tol)).any(axis=1)
        for k in np.nonzero(~ok)[0]:
            bad_pairs.append((int(region[ii[lo + k]]), int(region[jj[lo + k]])))
    return bad_pairs


def vertex_chains(grid: SimplexGrid, vertex: int) -> list[np.ndarray]:
    """Maximal grid-aligned lines toward the (1-based) vertex.

    Points are grouped by the projective class of their remaining
    coordinates; each chain is ordered by increasing mass on the vertex and
    ends at the vertex itself.
    """
    axis = vertex - 1
    if not 0 <= axis < grid.n_states:
        raise ValueError("vertex out of range")
    vertex_idx = None
    classes: dict[tuple, list[tuple[int, int]]] = {}
    for i, c in enumerate(grid.coords):
        rest = np.delete(c, axis)
        g = int(np.gcd.reduce(rest))
        if g == 0:
            vertex_idx = i
            continue
        key = tuple(int(v) for v in rest // g)
        classes.setdefault(key, []).append((int(c[axis]), i))
    chains = []
    for key, items in sorted(classes.items()):
        items.sort()
        chain = [i for _, i in items]
        chain.append(vertex_idx)
        chains.append(np.array(chain, dtype=int))
    return chains


def line_crossing_check(sol: GridSolution, grid: SimplexGrid, vertex: int) -> int:
    """Maximum number of policy switches along grid-aligned lines to a vertex."""
    worst = 0
    for chain in vertex_chains(grid, vertex):
        seq = sol.policy[chain]
        worst = max(worst, int(np.sum(seq[1:] != seq[:-1])))
    return worst


@dataclass(frozen=True)
class GridPolicy:
    """Policy lookup by nearest grid point, usable as a simulation policy."""

    grid: SimplexGrid
    actions: np.ndarray

    def decide(self, pi) -> int:
        return int(self.actions[self.grid.nearest(np.atleast_2d(pi))[0]])

    def batch_decide(self, pts: np.ndarray) -> np.ndarray:
        return self.actions[self.grid.nearest(pts)]


# ---------------------------------------------------------------------------
# Scheduling helpers


def myopic_policy(spec: Scheduling, model: DetectionModel, pi) -> int:
    """Mode 2 exactly when its expected stage cost is strictly cheaper."""
    if not isinstance(spec, Scheduling):
        raise ValueError("myopic policy is defined for the scheduling family")
    c1, c2 = stage_costs(spec, model, pi)
    return CONTINUE if c2 < c1 else STOP


def blackwell_degrade(obs_hi, confusion) -> DiscreteObs:
    """Degrade an observation matrix through a stochastic confusion matrix."""
    b2 = obs_hi.matrix if isinstance(obs_hi, DiscreteObs) else np.asarray(obs_hi, dtype=float)
    q = np.asarray(confusion, dtype=float)
    if np.any(q < 0) or np.any(np.abs(q.sum(axis=1) - 1.0) > 1e-12):
        raise ValueError("confusion matrix must be row-stochastic")
    prod = b2 @ q
    rows = prod.sum(axis=1)
    if np.any(np.abs(rows - 1.0) > 1e-12):
        raise ValueError("degraded matrix rows must sum to 1")
    return DiscreteObs(prod / rows[:, None])


# ---------------------------------------------------------------------------
# Parametrized sweeps


@dataclass
class SweepResult:
    labels: list
    solutions: list
    premise_ordered: list  # consecutive transition-order verdicts
    pointwise_min_slack: list  # min over grid of V[k+1] - V[k]
    comparable: bool

    @property
    def monotone(self) -> bool:
        return all(s >= -1e-6 for s in self.pointwise_min_slack)


def value_monotonicity_sweep(
    models: list[DetectionModel],
    spec: CostSpec,
    grid: SimplexGrid,
    horizon: int | None = None,
    tol: float | None = None,
    labels: list | None = None,
    bins: int = DEFAULT_BINS,
) -> SweepResult:
    """Solve per model (given in dominance-descending order) and verify that
    the optimal expected cost increases pointwise down the family."""
    from .orders import matrix_order_geq

    labels = labels if labels is not None else list(range(len(models)))
    sols = [value_iterate(m, spec, grid, horizon=horizon, tol=tol, bins=bins) for m in models]
    ordered = [
        matrix_order_geq(models[k].transition, models[k + 1].transition)
        for k in range(len(models) - 1)
    ]
    slacks = [
        float(np.min(sols[k + 1].values_original - sols[k].values_original))
        for k in range(len(models) - 1)
    ]
    return SweepResult(
        labels=list(labels),
        solutions=sols,
        premise_ordered=ordered,
        pointwise_min_slack=slacks,
        comparable=all(ordered),
    )


# ---------------------------------------------------------------------------
# Export


def solution_csv(sol: GridSolution, grid: SimplexGrid, regions: RegionReport | None = None) -> str:
    """One row per grid point: barycentric coordinates, value, policy, component id."""
    if regions is None:
        regions = extract_regions(sol, grid)
    ids = regions.component_ids
    buf = io.StringIO()
    head = ",".join(f"c{k}" for k in range(grid.n_states))
    buf.write(f"{head},value,policy,component\n")
    for i in range(grid.n_points):
        coords = ",".join(str(int(v)) for v in grid.coords[i])
        buf.write(f"{coords},{sol.values[i]:.17g},{int(sol.policy[i])},{int(ids[i])}\n")
    return buf.getvalue()
