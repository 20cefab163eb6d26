"""Ball-averaging operators and the oscillation inequality checkers.

The three pointwise operators on a scalar field u at an interior point x
with radius ball B_x:

    mean:      measure-weighted average of u over B_x
    midrange:  (max + min) / 2 of u over B_x
    alpha mean: alpha * midrange + (1 - alpha) * mean

Fixed points of the alpha-mean operator are the (generalized)
p-harmonious fields.  The check_* functions verify the quantitative
oscillation inequalities that drive the regularity certificates; each
returns a CheckRecord carrying both sides, the slack, and the discreteness
allowance used (a theorem that is exact in the continuum can fail on a
grid by at most a cell or two, and the records make that allowance
explicit).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import radius as radius_mod
from .errors import SpaceFormatError
from .radius import Modulus, least_concave_majorant

try:
    import warnings

    import numba

    # environment noise from the threading-layer probe
    warnings.filterwarnings("ignore", message="The TBB threading layer requires")

    @numba.njit(parallel=True, cache=True)
    def _sweep_kernel(indices, starts, counts, weights, wsums, centers,
                      values, alpha, out):  # pragma: no cover - compiled
        for s in numba.prange(len(starts)):
            st = starts[s]
            c = counts[s]
            cv = values[centers[s]]
            acc = 0.0
            mx = values[indices[st]]
            mn = mx
            for k in range(st, st + c):
                v = values[indices[k]]
                acc += weights[k] * (v - cv)
                if v > mx:
                    mx = v
                if v < mn:
                    mn = v
            m = cv + acc / wsums[s]
            if alpha == 0.0:
                out[s] = m
            elif alpha == 1.0:
                out[s] = 0.5 * (mx + mn)
            else:
                out[s] = m + alpha * (0.5 * (mx + mn) - m)

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

USE_COMPILED_SWEEP = _HAVE_NUMBA


def set_thread_count(threads):
    """Pin the sweep kernel's thread pool; numeric output never changes
    (each ball reduces sequentially in a fixed order)."""
    if _HAVE_NUMBA and threads and threads > 0:
        numba.set_num_threads(min(int(threads), numba.config.NUMBA_NUM_THREADS))


@dataclass
class ScalarField:
    """Real value per point, interior/boundary split inherited from the space."""

    space: object
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if len(v) != len(self.space):
            raise SpaceFormatError("field length does not match space")
        if not np.all(np.isfinite(v)):
            raise SpaceFormatError("field contains non-finite values")
        self.values = v

    def sup_norm(self):
        return float(np.abs(self.values).max())

    def copy(self):
        return ScalarField(self.space, self.values.copy())


def field_values(u):
    """Accept a ScalarField or a bare array."""
    return np.asarray(getattr(u, "values", u), dtype=float)


@dataclass
class GapPair:
    """One-sided sup-inf distances between two radius balls."""

    sup_inf_xy: float   # max over B_x of dist(.., B_y)
    sup_inf_yx: float   # max over B_y of dist(.., B_x)


@dataclass
class CheckRecord:
    """One verified inequality: lhs <= rhs with slack = rhs - lhs."""

    name: str
    lhs: float
    rhs: float
    passed: bool
    branch: str = ""
    slack_allowance: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def slack(self):
        return self.rhs - self.lhs

    def to_dict(self):
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
                "slack": self.slack, "pass": self.passed, "branch": self.branch,
                "slack_allowance": self.slack_allowance, "details": self.details}


# -- ball tables -------------------------------------------------------------
#
# Everything numeric goes through the same segment reductions (sequential
# within each ball, fixed ascending member order), so single-point
# evaluation, full sweeps, and residuals agree bit for bit and are
# independent of any parallel execution plan.


class BallTable:
    """CSR-style membership of the radius balls of the given centers.

    Euclidean spaces use a KD-tree to collect candidate members inside a
    hair-slack radius, then re-filter with the canonical distance formula
    so membership ties are decided exactly as space.ball decides them.
    """

    def __init__(self, space, rho, centers=None):
        if centers is None:
            centers = space.interior_indices
        self.space = space
        self.centers = np.asarray(centers, dtype=int)
        if space.metric == "euclidean" and len(self.centers):
            chunks, counts = self._build_euclidean(space, rho)
        else:
            chunks, counts = self._build_scan(space, rho)
        self.indices = np.concatenate(chunks) if chunks else np.array([], dtype=int)
        counts = np.asarray(counts, dtype=np.intp)
        self.starts = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.intp)
        self.counts = counts
        self.weights = space.weights[self.indices]
        self.weight_sums = np.add.reduceat(self.weights, self.starts) \
            if len(self.indices) else np.array([])
        # maps each member slot back to its segment (for centered means)
        self.segment_of = np.repeat(np.arange(len(self.centers)), self.counts)

    def _build_euclidean(self, space, rho):
        coords = space.coords
        tree = space.kdtree()
        radii = rho.values[self.centers]
        cands = tree.query_ball_point(coords[self.centers],
                                      radii * (1.0 + 1e-9), return_sorted=True)
        chunks, counts = [], []
        for x, r, cand in zip(self.centers, radii, cands):
            cand = np.asarray(cand, dtype=np.intp)
            diff = coords[cand] - coords[x]
            inside = np.sqrt((diff * diff).sum(axis=1)) <= r
            members = cand[inside]
            chunks.append(members)
            counts.append(len(members))
        return chunks, counts

    def _build_scan(self, space, rho):
        chunks, counts = [], []
        for blk, dmat in space._distance_block(self.centers):
            inside = dmat <= rho.values[blk][:, None]
            rows, cols = np.nonzero(inside)
            chunks.append(cols)
            counts.extend(np.bincount(rows, minlength=len(blk)).tolist())
        return chunks, counts

    def means(self, values, gathered=None):
        # centered form: constants are exact fixed points and symmetric
        # dyadic balls average linear data without rounding
        if gathered is None:
            gathered = values[self.indices]
        center_vals = values[self.centers]
        deltas = gathered - center_vals[self.segment_of]
        return center_vals + np.add.reduceat(self.weights * deltas,
                                             self.starts) / self.weight_sums

    def midranges(self, values, gathered=None):
        if gathered is None:
            gathered = values[self.indices]
        return 0.5 * (np.maximum.reduceat(gathered, self.starts)
                      + np.minimum.reduceat(gathered, self.starts))

    def alpha_means(self, values, alpha):
        if USE_COMPILED_SWEEP and len(self.indices):
            out = np.empty(len(self.centers))
            _sweep_kernel(self.indices, self.starts, self.counts,
                          self.weights, self.weight_sums, self.centers,
                          np.ascontiguousarray(values, dtype=float),
                          float(alpha), out)
            return out
        gathered = values[self.indices]
        m = self.means(values, gathered)
        if alpha == 0.0:
            return m
        s = self.midranges(values, gathered)
        if alpha == 1.0:
            return s
        return m + alpha * (s - m)


def _single_ball_table(space, rho, x):
    return BallTable(space, rho, centers=[x])


def mean_value(space, rho, u, x):
    """Measure-weighted average of u over the radius ball of x."""
    table = _single_ball_table(space, rho, x)
    return float(table.alpha_means(field_values(u), 0.0)[0])


def midrange_value(space, rho, u, x):
    """(max + min)/2 of u over the radius ball of x."""
    table = _single_ball_table(space, rho, x)
    return float(table.alpha_means(field_values(u), 1.0)[0])


def alpha_mean_value(space, rho, u, x, alpha):
    """alpha * midrange + (1 - alpha) * mean at x; any real alpha."""
    table = _single_ball_table(space, rho, x)
    return float(table.alpha_means(field_values(u), alpha)[0])


def apply_alpha_mean(space, rho, u, alpha, table=None):
    """One synchronous sweep: interior replaced by the alpha-mean values,
    boundary copied unchanged."""
    v = field_values(u)
    if table is None:
        table = BallTable(space, rho)
    out = v.copy()
    out[table.centers] = table.alpha_means(v, alpha)
    return out


# -- symmetric differences -----------------------------------------------------


def ball_symdiff_ratio(space, rho, x, y):
    """mu(B_x symdiff B_y) / max(mu(B_x), mu(B_y)); lies in [0, 2]."""
    bx = space.ball(x, rho[x])
    by = space.ball(y, rho[y])
    mx, my = space.measure(bx.members), space.measure(by.members)
    inter = np.intersect1d(bx.members, by.members, assume_unique=True)
    mu_sym = mx + my - 2.0 * space.measure(inter)
    return mu_sym / max(mx, my)


def check_mean_stability(space, u, ball1, ball2, rho=None, n_iterates=5,
                         tol=1e-12):
    """Mean-difference stability over two balls.

    Verifies |mean_B1 u - mean_B2 u| <= 2 ||u||_inf mu(B1 sym B2) /
    max(mu(B1), mu(B2)).  This is an exact-arithmetic theorem, so a failure
    beyond the floating-point tolerance signals an implementation bug.
    When a radius field is supplied, the iterated form (the same bound for
    n-fold mean sweeps, with the ORIGINAL sup norm, over the radius balls
    of the two centers) is verified for n = 1..n_iterates.
    """
    v = field_values(u)
    norm = float(np.abs(v).max())

    def mean_over(members):
        w = space.weights[members]
        zero = np.array([0])
        return float(np.add.reduceat(w * v[members], zero)[0]
                     / np.add.reduceat(w, zero)[0])

    def ratio(b1, b2):
        m1, m2 = space.measure(b1.members), space.measure(b2.members)
        inter = np.intersect1d(b1.members, b2.members, assume_unique=True)
        return (m1 + m2 - 2.0 * space.measure(inter)) / max(m1, m2)

    lhs = abs(mean_over(ball1.members) - mean_over(ball2.members))
    rhs = 2.0 * norm * ratio(ball1, ball2)
    passed = lhs <= rhs + tol
    details = {}
    if rho is not None:
        x, y = ball1.center, ball2.center
        bx = space.ball(x, rho[x])
        by = space.ball(y, rho[y])
        rhs_iter = 2.0 * norm * ratio(bx, by)
        table = BallTable(space, rho)
        w = v.copy()
        iter_records = []
        for n in range(1, n_iterates + 1):
            w = apply_alpha_mean(space, rho, w, 0.0, table)
            lhs_n = abs(w[x] - w[y])
            ok = lhs_n <= rhs_iter + tol
            passed = passed and ok
            iter_records.append({"n": n, "lhs": lhs_n, "rhs": rhs_iter, "pass": ok})
        details["iterates"] = iter_records
    return CheckRecord("mean_stability", lhs, rhs, passed, details=details)


def check_symdiff_bounds(space, rho, x, y, lipschitz_L, annular_constant,
                         delta, rho_K, doubling_constant=None, normalized=None,
                         slack=None):
    """Symmetric-difference ratio against the two theoretical branches.

    Lipschitz branch:   ratio <= 4 L D_delta ((d + slack) / rho_K)^delta
    continuity branch:  ratio <= 2^delta D_mu^2 D_delta (normalized(d + slack) / rho_K)^delta

    slack defaults to two grid cells: the continuum annulus argument picks
    up at most one extra cell per side on a lattice.  The record carries
    which branches hold; the Lipschitz branch is the primary verdict.
    """
    if rho_K <= 0:
        raise SpaceFormatError(f"rho_K must be positive, got {rho_K}")
    if slack is None:
        slack = 2.0 * space.resolution()
    d = space.distance(x, y)
    lhs = ball_symdiff_ratio(space, rho, x, y)
    d_eff = d + slack
    rhs_lip = 4.0 * lipschitz_L * annular_constant * (d_eff / rho_K) ** delta
    lip_ok = lhs <= rhs_lip
    details = {"distance": d, "lipschitz_pass": lip_ok, "rhs_lipschitz": rhs_lip}
    cont_ok = None
    if doubling_constant is not None:
        if normalized is None:
            normalized = Modulus.capped_linear(lipschitz_L, space.diameter())
        c_cont = 2.0 ** delta * doubling_constant ** 2 * annular_constant
        rhs_cont = c_cont * (normalized(min(d_eff, normalized.domain_end)) / rho_K) ** delta
        cont_ok = lhs <= rhs_cont
        details.update({"continuity_pass": cont_ok, "rhs_continuity": rhs_cont})
    passed = lip_ok if cont_ok is None else (lip_ok or cont_ok)
    branch = "lipschitz" if lip_ok else ("continuity" if cont_ok else "none")
    return CheckRecord("symdiff_bounds", lhs, rhs_lip, passed, branch=branch,
                       slack_allowance=slack, details=details)


def hausdorff_gaps(space, rho, x, y, normalized=None, slack=None):
    """One-sided sup-inf gaps between the radius balls of x and y.

    g_xy = max over s in B_x of min over t in B_y of d(s,t), and the
    transpose.  On a geodesic-like space the symmetrized claim
    (g_xy + g_yx)/2 <= normalized(d(x,y)) + slack must hold; the two printed
    one-sided bounds max(d + rho difference, 0) are evaluated in both
    orientations and recorded, but only the symmetrized claim decides the
    verdict (the one-sided pairing is orientation-ambiguous when the radii
    differ a lot).  slack defaults to two grid cells, the price of
    discrete non-geodesicity.
    """
    if slack is None:
        slack = 2.0 * space.resolution()
    bx = space.ball(x, rho[x])
    by = space.ball(y, rho[y])
    if space.metric == "euclidean":
        diff = space.coords[bx.members][:, None, :] - space.coords[by.members][None, :, :]
        sub = np.sqrt((diff * diff).sum(axis=2))
    else:
        sub = np.vstack([space.distances_from(i)[by.members] for i in bx.members])
    g_xy = float(sub.min(axis=1).max())
    g_yx = float(sub.min(axis=0).max())
    gaps = GapPair(sup_inf_xy=g_xy, sup_inf_yx=g_yx)
    if not space.geodesic_like:
        rec = CheckRecord("midrange_gap", 0.0, 0.0, True, branch="skipped",
                          details={"note": "space not flagged geodesic-like"})
        return gaps, rec
    if normalized is None:
        L = rho.lipschitz_L or radius_mod.fit_lipschitz(space, rho)
        normalized = Modulus.capped_linear(L, space.diameter())
    d = space.distance(x, y)
    lhs = 0.5 * (g_xy + g_yx)
    rhs = float(normalized(min(d, normalized.domain_end))) + slack
    one_sided_printed = {
        # as printed: the yx gap against rho(x) - rho(y)
        "yx_vs_plus": g_yx <= max(d + rho[x] - rho[y], 0.0) + slack,
        "xy_vs_minus": g_xy <= max(d + rho[y] - rho[x], 0.0) + slack,
    }
    one_sided_transposed = {
        "xy_vs_plus": g_xy <= max(d + rho[x] - rho[y], 0.0) + slack,
        "yx_vs_minus": g_yx <= max(d + rho[y] - rho[x], 0.0) + slack,
    }
    rec = CheckRecord("midrange_gap", lhs, rhs, lhs <= rhs,
                      branch="symmetrized", slack_allowance=slack,
                      details={"printed_orientation": one_sided_printed,
                               "transposed_orientation": one_sided_transposed,
                               "distance": d})
    return gaps, rec


def oscillation_modulus(space, u, members, seed=0, max_pairs=200_000):
    """Least concave majorant of the oscillation scatter of u over the set."""
    members = np.asarray(members, dtype=int)
    v = field_values(u)
    n = len(members)
    if n < 2:
        return Modulus.from_breakpoints([0.0, max(space.diameter(), 1.0)],
                                        [0.0, 0.0], space.diameter())
    if n * (n - 1) // 2 <= max_pairs:
        ii, jj = np.triu_indices(n, k=1)
        ii, jj = members[ii], members[jj]
    else:
        rng = np.random.default_rng(seed)
        ii = members[rng.integers(0, n, size=max_pairs)]
        jj = members[rng.integers(0, n, size=max_pairs)]
    if space.metric == "euclidean":
        d = np.sqrt(((space.coords[ii] - space.coords[jj]) ** 2).sum(axis=1))
    else:
        d = np.array([space.distance(a, b) for a, b in zip(ii, jj)])
    gaps = np.abs(v[ii] - v[jj])
    return least_concave_majorant(d, gaps, space.diameter())


def check_alpha_mean_modulus(space, rho, u, alpha, members, mean_modulus,
                             normalized=None, slack=None, probe_ts=None):
    """One-sweep oscillation transfer on a compact set.

    With omega_swept the empirical modulus of the swept field on the set,
    omega_u the empirical modulus of u on the ball hull of the set, and nm
    the normalized radius modulus, verifies

        omega_swept(t) <= |alpha| * omega_u(nm(t) + slack)
                          + (1 - alpha) * ||u||_inf * mean_modulus(t + slack)

    at sampled pair distances t.  Requires |alpha| <= 1 (out-of-hypothesis
    notice otherwise); slack defaults to two grid cells.
    """
    if abs(alpha) > 1:
        return CheckRecord("alpha_mean_modulus", 0.0, 0.0, False,
                           branch="out-of-hypothesis",
                           details={"note": f"|alpha| = {abs(alpha)} > 1"})
    if slack is None:
        slack = 2.0 * space.resolution()
    members = np.asarray(members, dtype=int)
    v = field_values(u)
    norm = float(np.abs(v).max())
    if normalized is None:
        L = rho.lipschitz_L or radius_mod.fit_lipschitz(space, rho)
        normalized = Modulus.capped_linear(L, space.diameter())
    swept = apply_alpha_mean(space, rho, v, alpha,
                             BallTable(space, rho, centers=members))
    omega_lhs = oscillation_modulus(space, swept, members)
    hull_members = radius_mod.hull(space, rho, members)
    omega_u = oscillation_modulus(space, v, hull_members)
    diam = space.diameter()
    if probe_ts is None:
        probe_ts = np.unique(omega_lhs.ts[omega_lhs.ts > 0])
    worst = None
    passed = True
    for t in np.atleast_1d(probe_ts):
        lhs = float(omega_lhs(t))
        arg = min(float(normalized(min(t, diam))) + slack, omega_u.domain_end)
        rhs = abs(alpha) * float(omega_u(arg)) \
            + (1.0 - alpha) * norm * float(mean_modulus(min(t + slack, diam)))
        ok = lhs <= rhs
        passed = passed and ok
        if worst is None or (rhs - lhs) < (worst[1] - worst[0]):
            worst = (lhs, rhs, float(t))
    lhs_w, rhs_w, t_w = worst if worst else (0.0, 0.0, 0.0)
    return CheckRecord("alpha_mean_modulus", lhs_w, rhs_w, passed,
                       branch="sampled-distances", slack_allowance=slack,
                       details={"worst_t": t_w, "alpha": alpha,
                                "n_probes": int(np.atleast_1d(probe_ts).size)})


# -- field files ---------------------------------------------------------------


def read_field_csv(space, path):
    """Field file: header id,value; ids must match the space."""
    values = np.full(len(space), np.nan)
    id_to_index = {int(pid): k for k, pid in enumerate(space.ids)}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["id", "value"]:
            raise SpaceFormatError(f"{path}: expected header 'id,value'")
        for row in reader:
            if not row:
                continue
            try:
                idx = id_to_index[int(row[0])]
            except (KeyError, ValueError) as exc:
                raise SpaceFormatError(f"{path}: unknown or invalid id in row {row!r}") from exc
            values[idx] = float(row[1])
    if np.any(np.isnan(values)):
        raise SpaceFormatError(f"{path}: missing value for some points")
    return values


def write_field_csv(space, values, path):
    values = field_values(values)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "value"])
        for pid, v in zip(space.ids, values):
            writer.writerow([int(pid), repr(float(v))])
