"""Fiducial sampling for survival curves under right censoring.

The data-generating equation ties each observation to a latent uniform.
Conditioning on the observed times and censoring indicators constrains
which assignments of uniform order statistics to observations remain
possible: an observed failure must receive the smallest order statistic
not yet spoken for, while a censored observation may correspond to any
remaining one. Scanning the sorted sample and resolving each censored
observation uniformly at random therefore samples assignments from the
correct conditional distribution, and each assignment yields an envelope
of survival functions consistent with the data.

Every draw is summarized three ways: a lower step envelope, an upper
step envelope (which moves only at failure times), and a continuous
representative that is piecewise linear in log survival, corrected so it
satisfies every censored-observation constraint.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .curves import EvaluationWindow, LogLinearCurve, StepCurve
from .dataset import SortedDataset
from .errors import NoFailures

__all__ = [
    "RngStream",
    "FiducialDraw",
    "FiducialEnsemble",
    "sample_permutation",
    "sample_ensemble",
    "draw_bounds",
    "log_linear_curve",
    "beta_product_draw",
    "beta_product_batch",
]


@dataclass(frozen=True)
class RngStream:
    """Deterministic random stream keyed by (seed, stream)."""

    seed: int
    stream: int = 0

    def sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence((self.seed, self.stream))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.sequence()))


def _coerce_rng(seed):
    """Return (generator, entropy_tuple_or_None) for any seed-like input."""
    if isinstance(seed, np.random.Generator):
        return seed, None
    if isinstance(seed, RngStream):
        return seed.generator(), (seed.seed, seed.stream)
    if isinstance(seed, np.random.SeedSequence):
        ent = seed.entropy if isinstance(seed.entropy, (tuple, list)) else (seed.entropy,)
        return np.random.Generator(np.random.PCG64(seed)), (tuple(ent), tuple(seed.spawn_key))
    stream = RngStream(int(seed))
    return stream.generator(), (stream.seed, stream.stream)


def _draw_batch(status: np.ndarray, m: int, rng: np.random.Generator):
    """Run the sequential assignment algorithm for m draws at once.

    Returns per-draw sorted uniforms, the permutation (order-statistic
    index attached to each observation), the assigned uniform values, and
    the lower/upper cdf envelopes on the n+1 inter-observation intervals.

    Each draw consumes one row of a single (m, 2n) uniform block: the
    first n entries become the sorted order statistics, the last n drive
    the censored-observation choices. Row j therefore depends only on the
    stream position, which makes individual draws pure functions of
    (seed, draw index, n).
    """
    n = status.size
    block = rng.random((m, 2 * n))
    u = np.sort(block[:, :n], axis=1)
    picks = block[:, n:]

    rem = np.broadcast_to(np.arange(n, dtype=np.intp), (m, n)).copy()
    rows = np.arange(m)
    perm = np.empty((m, n), dtype=np.intp)
    assigned = np.empty((m, n))
    lower = np.zeros((m, n + 1))
    upper = np.ones((m, n + 1))

    for i in range(n):
        # smallest order statistic still unassigned caps the cdf here
        upper[:, i] = u[rows, rem[:, i]]
        if status[i] == 1:
            idx = rem[:, i].copy()
            lower[:, i + 1] = u[rows, idx]
        else:
            k = n - i
            p = i + (picks[:, i] * k).astype(np.intp)
            idx = rem[rows, p]
            lower[:, i + 1] = lower[:, i]
            if i + 1 < n:
                # close the gap left at position p, keeping the tail sorted
                cols = np.arange(i + 1, n)
                src = cols[None, :] - (cols[None, :] <= p[:, None])
                rem[:, i + 1 :] = rem[rows[:, None], src]
        perm[:, i] = idx
        assigned[:, i] = u[rows, idx]
    return u, perm, assigned, lower, upper


@dataclass(frozen=True)
class _InterpStructure:
    """Per-dataset geometry for building interpolation curves."""

    anchor_times: np.ndarray  # 0 followed by the distinct observation times
    fail_cols: np.ndarray  # anchor columns that are failure knots
    fail_anchor_obs: np.ndarray  # observation index pinning each failure anchor
    cens_obs: np.ndarray  # censored observations grouped by distinct time
    cens_group_starts: np.ndarray  # reduceat starts into cens_obs
    cens_cols: np.ndarray  # anchor column of each censored-only knot
    segment_blocks: list  # (left_col, right_col, lo, hi) per failure segment
    trailing_lo: int  # start of trailing censored knots in cens_cols
    prev_fail_col: int  # anchor column before the last failure (0 = origin)


def _interp_structure(sd: SortedDataset) -> _InterpStructure:
    times, status = sd.times, sd.status
    if sd.n_failures == 0:
        raise NoFailures("no uncensored observations: no continuous representative")
    if times[0] <= 0.0:
        raise ValueError("observation times must be positive to anchor a continuous curve")
    knot_times, knot_of_obs = np.unique(times, return_inverse=True)
    G = knot_times.size
    fail_knot = np.zeros(G, dtype=bool)
    fail_knot[knot_of_obs[status == 1]] = True

    # last failure observation at each failure knot pins the anchor
    anchor_obs = np.full(G, -1, dtype=np.intp)
    f_obs = np.flatnonzero(status == 1)
    anchor_obs[knot_of_obs[f_obs]] = f_obs
    fail_ids = np.flatnonzero(fail_knot)

    # censored observations at censored-only knots carry constraints;
    # those tied with a failure time are satisfied at the anchor itself
    cens_obs = np.flatnonzero((status == 0) & ~fail_knot[knot_of_obs])
    cens_knots = knot_of_obs[cens_obs]
    if cens_obs.size:
        new_group = np.r_[True, cens_knots[1:] != cens_knots[:-1]]
        starts = np.flatnonzero(new_group)
        cens_ids = cens_knots[starts]
    else:
        starts = np.empty(0, dtype=np.intp)
        cens_ids = np.empty(0, dtype=np.intp)

    blocks = []
    left_col = 0
    for k, fid in enumerate(fail_ids):
        lo, hi = np.searchsorted(cens_ids, [fail_ids[k - 1] if k else -1, fid])
        blocks.append((left_col, int(fid) + 1, int(lo), int(hi)))
        left_col = int(fid) + 1
    trailing_lo = int(np.searchsorted(cens_ids, fail_ids[-1]))
    prev_fail_col = int(fail_ids[-2]) + 1 if fail_ids.size >= 2 else 0

    return _InterpStructure(
        anchor_times=np.concatenate(([0.0], knot_times)),
        fail_cols=fail_ids + 1,
        fail_anchor_obs=anchor_obs[fail_ids],
        cens_obs=cens_obs,
        cens_group_starts=starts,
        cens_cols=cens_ids + 1,
        segment_blocks=blocks,
        trailing_lo=trailing_lo,
        prev_fail_col=prev_fail_col,
    )


def _build_interp(structure: _InterpStructure, assigned: np.ndarray):
    """Vectorized construction of the log-linear representatives.

    Returns (anchor_times, log_values (m, A), tail_slopes (m,)). Censored
    constraints are enforced by raising the chord to the running maximum
    (taken from the right within each inter-failure segment) of the
    constraint levels log(1 - removed uniform), which keeps the curve
    nonincreasing, through the failure anchors, and inside the envelope.
    """
    st = structure
    at = st.anchor_times
    m = assigned.shape[0]
    ell = np.log1p(-assigned)
    L = np.zeros((m, at.size))
    L[:, st.fail_cols] = ell[:, st.fail_anchor_obs]

    if st.cens_obs.size:
        ell_c = np.maximum.reduceat(ell[:, st.cens_obs], st.cens_group_starts, axis=1)
    else:
        ell_c = np.empty((m, 0))

    for left_col, right_col, lo, hi in st.segment_blocks:
        if lo == hi:
            continue
        cols = st.cens_cols[lo:hi]
        ta, tb = at[left_col], at[right_col]
        La, Lb = L[:, left_col], L[:, right_col]
        frac = (at[cols] - ta) / (tb - ta)
        chord = La[:, None] * (1.0 - frac) + Lb[:, None] * frac
        ceff = np.maximum.accumulate(ell_c[:, lo:hi][:, ::-1], axis=1)[:, ::-1]
        L[:, cols] = np.maximum(chord, ceff)

    last_col = st.fail_cols[-1]
    T = at[last_col]
    LF = L[:, last_col]
    slope = (LF - L[:, st.prev_fail_col]) / (T - at[st.prev_fail_col])
    if st.trailing_lo < st.cens_cols.size:
        cols = st.cens_cols[st.trailing_lo :]
        gaps = at[cols] - T
        cons = ell_c[:, st.trailing_lo :]
        slope = np.maximum(slope, ((cons - LF[:, None]) / gaps).max(axis=1))
        slope = np.minimum(slope, 0.0)
        L[:, cols] = LF[:, None] + slope[:, None] * gaps
    else:
        slope = np.minimum(slope, 0.0)
    return at, L, slope


def _interp_log_eval(anchor_times, L, tail_slopes, ts):
    """Evaluate the batched log-linear curves at times ts -> (m, T)."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    A = anchor_times.size
    idx = np.searchsorted(anchor_times, ts, side="right") - 1
    idx = np.clip(idx, 0, A - 1)
    nxt = np.minimum(idx + 1, A - 1)
    t0, t1 = anchor_times[idx], anchor_times[nxt]
    inside = idx < A - 1
    w = np.where(inside, (ts - t0) / np.where(t1 > t0, t1 - t0, 1.0), 0.0)
    out = L[:, idx] * (1.0 - w)[None, :] + L[:, nxt] * w[None, :]
    beyond = ~inside
    if beyond.any():
        out[:, beyond] = L[:, -1][:, None] + tail_slopes[:, None] * (ts[beyond] - anchor_times[-1])
    return out


def _collapse_last(ts, vs):
    """Keep the last value at each distinct time (tied events collapse)."""
    if ts.size == 0:
        return ts, vs
    keep = np.append(ts[1:] != ts[:-1], True)
    return ts[keep], vs[keep]


@dataclass(frozen=True)
class FiducialDraw:
    """One assignment of uniform order statistics to the observations."""

    data: SortedDataset
    uniforms: np.ndarray
    permutation: np.ndarray
    assigned: np.ndarray
    lower_env: np.ndarray
    upper_env: np.ndarray


def sample_permutation(sorted_dataset: SortedDataset, rng: np.random.Generator) -> FiducialDraw:
    """Draw one fiducial assignment for the dataset.

    Implements the sequential scan: sort n fresh uniforms, walk the
    observations from smallest to largest, give each failure the smallest
    remaining order statistic, and discard a uniformly random remaining
    one at each censored observation. The running envelopes record, on
    each inter-observation interval, the tightest cdf bounds implied by
    the assignment so far.
    """
    u, perm, assigned, lower, upper = _draw_batch(sorted_dataset.status, 1, rng)
    return FiducialDraw(
        data=sorted_dataset,
        uniforms=u[0],
        permutation=perm[0],
        assigned=assigned[0],
        lower_env=lower[0],
        upper_env=upper[0],
    )


def draw_bounds(draw: FiducialDraw) -> tuple[StepCurve, StepCurve]:
    """Survival envelope (lower, upper) of one draw as step curves.

    The upper curve steps down only at failure times. The lower curve
    already sits at 1 minus the smallest order statistic from time 0 on
    (the cdf may rise that far before the first observation), then steps
    down through the observations and reaches 0 at the largest one.
    """
    times = draw.data.times
    lo_env, up_env = draw.lower_env, draw.upper_env

    chg = np.flatnonzero(lo_env[1:] != lo_env[:-1])
    k_up, v_up = _collapse_last(times[chg], 1.0 - lo_env[chg + 1])
    upper = StepCurve(k_up, v_up)

    chg = np.flatnonzero(up_env[1:] != up_env[:-1])
    k_lo = np.concatenate(([0.0], times[chg]))
    v_lo = np.concatenate(([1.0 - up_env[0]], 1.0 - up_env[chg + 1]))
    lower = StepCurve(*_collapse_last(k_lo, v_lo))
    return lower, upper


def log_linear_curve(draw: FiducialDraw) -> LogLinearCurve:
    """Continuous representative of one draw (piecewise linear log survival)."""
    structure = _interp_structure(draw.data)
    at, L, slope = _build_interp(structure, draw.assigned[None, :])
    return LogLinearCurve(anchor_times=at, log_values=L[0], tail_slope=float(slope[0]))


@dataclass(frozen=True)
class FiducialEnsemble:
    """Aligned fiducial draws for one dataset.

    Draw j is summarized by a lower/upper step envelope pair and, when
    the data contain at least one failure, a continuous log-linear
    representative. The batched arrays expose vectorized evaluation for
    the inference procedures; the per-draw accessors materialize curve
    objects on demand.
    """

    data: SortedDataset
    m: int
    seed_entropy: tuple | None
    permutations: np.ndarray
    assigned: np.ndarray
    lower_env: np.ndarray
    upper_env: np.ndarray
    interp_times: np.ndarray | None = field(repr=False, default=None)
    interp_log: np.ndarray | None = field(repr=False, default=None)
    tail_slopes: np.ndarray | None = field(repr=False, default=None)

    @property
    def has_interpolation(self) -> bool:
        return self.interp_log is not None

    def _require_interp(self):
        if not self.has_interpolation:
            raise NoFailures("ensemble has no continuous representatives (all observations censored)")

    def eval_upper(self, ts) -> np.ndarray:
        """Upper envelope values S_U(t) for all draws, shape (m, len(ts))."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        k = np.searchsorted(self.data.times, ts, side="right")
        return 1.0 - self.lower_env[:, k]

    def eval_lower(self, ts) -> np.ndarray:
        """Lower envelope values S_L(t) for all draws, shape (m, len(ts))."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        k = np.searchsorted(self.data.times, ts, side="right")
        return 1.0 - self.upper_env[:, k]

    def eval_interp(self, ts) -> np.ndarray:
        """Continuous representative values S_I(t), shape (m, len(ts))."""
        self._require_interp()
        return np.exp(_interp_log_eval(self.interp_times, self.interp_log, self.tail_slopes, ts))

    def draw(self, j: int) -> FiducialDraw:
        return FiducialDraw(
            data=self.data,
            uniforms=np.sort(self.assigned[j]),
            permutation=self.permutations[j],
            assigned=self.assigned[j],
            lower_env=self.lower_env[j],
            upper_env=self.upper_env[j],
        )

    def lower_curve(self, j: int) -> StepCurve:
        return draw_bounds(self.draw(j))[0]

    def upper_curve(self, j: int) -> StepCurve:
        return draw_bounds(self.draw(j))[1]

    def interp_curve(self, j: int) -> LogLinearCurve:
        self._require_interp()
        return LogLinearCurve(
            anchor_times=self.interp_times,
            log_values=self.interp_log[j],
            tail_slope=float(self.tail_slopes[j]),
        )

    def window(self, tau=None) -> EvaluationWindow:
        return EvaluationWindow.for_dataset(self.data, tau)

    def validate(self, atol: float = 1e-9) -> None:
        """Assert the envelope sandwich at every observation time."""
        ts = np.unique(self.data.times)
        lo, up = self.eval_lower(ts), self.eval_upper(ts)
        if np.any(lo > up + atol):
            raise AssertionError("lower envelope exceeds upper envelope")
        if self.has_interpolation:
            mid = self.eval_interp(ts)
            if np.any(lo > mid + atol) or np.any(mid > up + atol):
                raise AssertionError("continuous representative leaves the envelope")

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(self.data.fingerprint().encode())
        h.update(repr((self.m, self.seed_entropy)).encode())
        return h.hexdigest()


def sample_ensemble(sorted_dataset: SortedDataset, m: int, seed, *, validate: bool = True) -> FiducialEnsemble:
    """Draw m aligned fiducial curve triples for the dataset.

    ``seed`` may be an int, an :class:`RngStream`, a SeedSequence, or a
    Generator. Results are a pure function of (dataset, seed, m); the
    continuous representatives are skipped when the data hold no failure,
    in which case only the envelopes are available.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    rng, entropy = _coerce_rng(seed)
    u, perm, assigned, lower, upper = _draw_batch(sorted_dataset.status, int(m), rng)

    interp_times = interp_log = tails = None
    if sorted_dataset.n_failures > 0:
        structure = _interp_structure(sorted_dataset)
        interp_times, interp_log, tails = _build_interp(structure, assigned)

    ensemble = FiducialEnsemble(
        data=sorted_dataset,
        m=int(m),
        seed_entropy=entropy,
        permutations=perm,
        assigned=assigned,
        lower_env=lower,
        upper_env=upper,
        interp_times=interp_times,
        interp_log=interp_log,
        tail_slopes=tails,
    )
    if validate:
        ensemble.validate()
    return ensemble


def beta_product_batch(sorted_dataset: SortedDataset, m: int, rng: np.random.Generator):
    """Upper-envelope draws via independent beta factors at event times.

    At each distinct failure time with k at risk and d tied failures the
    survival multiplies by successive factors (1 - B_r) with
    B_r ~ Beta(1, k - r), r = 0..d-1; for untied data this is a single
    Beta(1, k) factor per event time. Returns (event_times, values) with
    one row of survival values per draw.
    """
    s, K, d = sorted_dataset.event_times, sorted_dataset.risk_counts, sorted_dataset.event_counts
    if s.size == 0:
        raise NoFailures("no failure times")
    factors = np.ones((int(m), s.size))
    for j in range(s.size):
        for r in range(int(d[j])):
            factors[:, j] *= 1.0 - rng.beta(1.0, float(K[j] - r), size=int(m))
    return s, np.cumprod(factors, axis=1)


def beta_product_draw(sorted_dataset: SortedDataset, rng: np.random.Generator) -> StepCurve:
    """One upper-envelope draw via the independent beta-product route."""
    s, vals = beta_product_batch(sorted_dataset, 1, rng)
    return StepCurve(knots=s, values=vals[0])
