"""Admissible radius fields and the moduli-of-continuity algebra.

An admissible radius field assigns every interior point a positive radius
bounded by its boundary distance, and vanishes exactly on the boundary.
Moduli of continuity are concave nondecreasing functions with omega(0)=0;
the normalized modulus (identity when omega is sub-identity, otherwise
omega rescaled so the diameter is a fixed point) dominates both t and
omega(t) and is the object that gets iterated.  The exhaustion K_m and the
ball hull tie radius decay near the boundary to the nesting of compacts.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SpaceFormatError

_PAIR_SAMPLE_THRESHOLD = 5_000
_PAIR_SAMPLE_COUNT = 1_000_000


class Modulus:
    """Concave nondecreasing function on [0, domain_end] with value 0 at 0.

    Stored either as piecewise-linear breakpoints or as an exact closed
    form ("linear": min(slope*t, cap); "power": min(coeff*t**gamma, cap)).
    The closed forms evaluate without interpolation so that iterated
    compositions of a Lipschitz modulus are exact in floating point.
    Beyond the last breakpoint the function continues flat.
    """

    __slots__ = ("kind", "ts", "ys", "slope", "coeff", "gamma", "cap", "domain_end")

    def __init__(self, *, kind, domain_end, ts=None, ys=None,
                 slope=None, coeff=None, gamma=None, cap=None):
        self.kind = kind
        self.domain_end = float(domain_end)
        self.ts = None if ts is None else np.asarray(ts, dtype=float)
        self.ys = None if ys is None else np.asarray(ys, dtype=float)
        self.slope = slope
        self.coeff = coeff
        self.gamma = gamma
        self.cap = math.inf if cap is None else float(cap)
        self._validate()

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_breakpoints(cls, ts, ys, domain_end=None):
        ts = np.asarray(ts, dtype=float)
        if domain_end is None:
            domain_end = ts[-1]
        return cls(kind="pwl", domain_end=domain_end, ts=ts, ys=ys)

    @classmethod
    def linear(cls, slope, domain_end, cap=None):
        """t -> min(slope * t, cap); uncapped when cap is None."""
        return cls(kind="linear", domain_end=domain_end, slope=float(slope), cap=cap)

    @classmethod
    def capped_linear(cls, slope, domain_end):
        """The Lipschitz radius modulus t -> min(slope * t, domain_end)."""
        return cls(kind="linear", domain_end=domain_end, slope=float(slope),
                   cap=domain_end)

    @classmethod
    def identity(cls, domain_end):
        return cls.capped_linear(1.0, domain_end)

    @classmethod
    def power(cls, coeff, gamma, domain_end, cap=None):
        """t -> min(coeff * t**gamma, cap), 0 < gamma <= 1."""
        if not 0.0 < gamma <= 1.0:
            raise SpaceFormatError(f"power modulus exponent must be in (0,1], got {gamma}")
        return cls(kind="power", domain_end=domain_end, coeff=float(coeff),
                   gamma=float(gamma), cap=cap)

    # -- validation -----------------------------------------------------------

    def _validate(self):
        if self.domain_end < 0:
            raise SpaceFormatError("modulus domain must be nonnegative")
        if self.kind == "pwl":
            ts, ys = self.ts, self.ys
            if ts is None or ys is None or len(ts) != len(ys) or len(ts) < 2:
                raise SpaceFormatError("piecewise modulus needs matching breakpoints")
            if ts[0] != 0.0 or ys[0] != 0.0:
                raise SpaceFormatError("modulus must start at (0, 0)")
            if np.any(np.diff(ts) <= 0):
                raise SpaceFormatError("breakpoint abscissae must increase")
            if np.any(np.diff(ys) < -1e-12 * max(1.0, abs(ys).max())):
                raise SpaceFormatError("modulus must be nondecreasing")
            slopes = np.diff(ys) / np.diff(ts)
            if np.any(np.diff(slopes) > 1e-9 * max(1.0, abs(slopes).max())):
                raise SpaceFormatError("modulus must be concave")
        elif self.kind == "linear":
            if self.slope is None or self.slope < 0:
                raise SpaceFormatError("linear modulus needs a nonnegative slope")
        elif self.kind == "power":
            if self.coeff is None or self.coeff < 0:
                raise SpaceFormatError("power modulus needs a nonnegative coefficient")
        else:
            raise SpaceFormatError(f"unknown modulus kind {self.kind!r}")

    # -- evaluation -----------------------------------------------------------

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0):
            raise SpaceFormatError("modulus argument must be nonnegative")
        if self.kind == "linear":
            out = np.minimum(self.slope * t_arr, self.cap)
        elif self.kind == "power":
            out = np.minimum(self.coeff * np.power(t_arr, self.gamma), self.cap)
        else:
            out = np.interp(t_arr, self.ts, self.ys)
        return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out

    def value_at_end(self):
        return self(self.domain_end)

    def is_sub_identity(self):
        """True when omega(t) <= t on the whole domain."""
        if self.domain_end == 0:
            return True
        if self.kind == "linear":
            return self.slope <= 1.0
        if self.kind == "power":
            if self.coeff == 0.0:
                return True
            if self.gamma == 1.0:
                return self.coeff <= 1.0
            # coeff * t^gamma > t near 0 for any coeff > 0 when gamma < 1
            return False
        return bool(np.all(self.ys <= self.ts))

    def capped(self, cap):
        """Pointwise min with the given cap; stays concave nondecreasing."""
        if self.kind == "pwl":
            ys = np.minimum(self.ys, cap)
            ts = self.ts
            # insert the crossing point so the cap is hit exactly
            over = np.flatnonzero(self.ys > cap)
            if over.size and over[0] > 0:
                k = over[0]
                t_cross = ts[k - 1] + (cap - ys[k - 1]) * (ts[k] - ts[k - 1]) / (self.ys[k] - ys[k - 1])
                ts = np.concatenate([ts[:k], [t_cross], ts[k:]])
                ys = np.concatenate([ys[:k], [cap], ys[k:]])
            return Modulus.from_breakpoints(ts, ys, self.domain_end)
        kw = dict(kind=self.kind, domain_end=self.domain_end,
                  slope=self.slope, coeff=self.coeff, gamma=self.gamma,
                  cap=min(self.cap, cap))
        return Modulus(**kw)

    def breakpoint_list(self, points=33):
        """Breakpoints for serialization (closed forms are densified)."""
        if self.kind == "pwl":
            return list(zip(self.ts.tolist(), self.ys.tolist()))
        ts = np.linspace(0.0, self.domain_end, points)
        return list(zip(ts.tolist(), np.asarray(self(ts)).tolist()))

    def to_json(self):
        return json.dumps({"breakpoints": self.breakpoint_list(), "kind": self.kind})

    @classmethod
    def from_json(cls, text):
        """Rebuild from a breakpoint-array JSON (closed forms come back as
        their piecewise-linear densification)."""
        doc = json.loads(text)
        ts, ys = zip(*doc["breakpoints"])
        return cls.from_breakpoints(ts, ys)


def least_concave_majorant(ds, gaps, domain_end):
    """Least concave nondecreasing majorant of the scatter {(d_i, gap_i)}.

    Upper convex hull of the points together with the origin; a decreasing
    hull tail is flattened at the running maximum so the result is a valid
    modulus of continuity.
    """
    ds = np.asarray(ds, dtype=float)
    gaps = np.asarray(gaps, dtype=float)
    keep = ds > 0
    ds, gaps = ds[keep], np.maximum(gaps[keep], 0.0)
    if ds.size == 0:
        return Modulus.from_breakpoints([0.0, max(domain_end, 1.0)], [0.0, 0.0],
                                        domain_end)
    order = np.argsort(ds)
    ds, gaps = ds[order], gaps[order]
    # collapse duplicate abscissae to their max ordinate
    uniq_d, inverse = np.unique(ds, return_inverse=True)
    uniq_g = np.zeros_like(uniq_d)
    np.maximum.at(uniq_g, inverse, gaps)

    hull = [(0.0, 0.0)]
    for p in zip(uniq_d, uniq_g):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point when it lies below the chord (upper hull)
            if (x2 - x1) * (p[1] - y1) >= (p[0] - x1) * (y2 - y1):
                hull.pop()
            else:
                break
        hull.append(p)
    # flatten any decreasing tail at the peak value
    ts, ys = [hull[0][0]], [hull[0][1]]
    for x, y in hull[1:]:
        if y < ys[-1]:
            break
        ts.append(x)
        ys.append(y)
    if ts[-1] < domain_end:
        ts.append(domain_end)
        ys.append(ys[-1])
    if len(ts) == 1:
        ts.append(max(domain_end, 1.0))
        ys.append(ys[-1])
    return Modulus.from_breakpoints(ts, ys, domain_end)


def normalize_modulus(omega, diam):
    """The normalized radius modulus: identity if omega is sub-identity,
    otherwise omega rescaled so that the diameter is a fixed point.  The
    result dominates max(t, omega(t)) and equals diam at diam.  Requires
    omega(diam) <= diam (cap upstream with Modulus.capped)."""
    end = omega.value_at_end() if omega.domain_end == diam else omega(min(diam, omega.domain_end))
    if end > diam * (1 + 1e-12):
        raise SpaceFormatError(
            f"modulus value {end} at the diameter exceeds the diameter {diam}; cap it first")
    if omega.is_sub_identity():
        return Modulus.identity(diam)
    if end <= 0:
        return Modulus.identity(diam)
    factor = diam / end
    if omega.kind == "linear":
        return Modulus.linear(factor * omega.slope, diam,
                              cap=None if omega.cap is math.inf else factor * omega.cap)
    if omega.kind == "power":
        return Modulus.power(factor * omega.coeff, omega.gamma, diam,
                             cap=None if omega.cap is math.inf else factor * omega.cap)
    ts = omega.ts
    ys = factor * omega.ys
    if ts[-1] < diam:
        ts = np.concatenate([ts, [diam]])
        ys = np.concatenate([ys, [ys[-1]]])
    if ts[-1] == diam:
        ys[-1] = diam  # exact fixed point at the diameter
    return Modulus.from_breakpoints(ts, np.minimum(ys, diam), diam)


def iterate_modulus(normalized, n, t, diam=None):
    """n-fold composition of the normalized modulus; n = 0 returns t."""
    if diam is None:
        diam = normalized.domain_end
    if not 0 <= t <= diam * (1 + 1e-12):
        raise SpaceFormatError(f"argument {t} outside [0, {diam}]")
    if n < 0:
        raise SpaceFormatError("iteration count must be nonnegative")
    s = float(t)
    for _ in range(int(n)):
        s = float(normalized(min(s, diam)))
    return s


# -- radius fields ---------------------------------------------------------------


class RadiusField:
    """Per-point radius values with fitted regularity metadata.

    Values are immutable after construction; Lipschitz/Holder fits are
    attached once and then the object is safe to share.
    """

    def __init__(self, values):
        v = np.array(values, dtype=float)
        v.flags.writeable = False
        self.values = v
        self.lipschitz_L = None       # clamped to >= 1 for the theory
        self.raw_lipschitz = None     # the actual fitted slope
        self.holder_fits = {}         # gamma -> coefficient

    def __getitem__(self, i):
        return float(self.values[i])

    def __len__(self):
        return len(self.values)

    @classmethod
    def scaled_boundary_distance(cls, space, factor, power=1.0):
        """rho(x) = factor * dist(x, boundary)**power; admissible for
        0 < factor <= 1 and power >= 1 on bounded domains with ell <= 1."""
        d = space.boundary_distances()
        return cls(factor * d ** power if power != 1.0 else factor * d)


@dataclass
class AdmissibilityReport:
    ok: bool
    nonpositive_interior: list = field(default_factory=list)
    exceeds_boundary_distance: list = field(default_factory=list)
    nonzero_on_boundary: list = field(default_factory=list)

    def to_dict(self):
        return {
            "ok": self.ok,
            "nonpositive_interior": self.nonpositive_interior,
            "exceeds_boundary_distance": self.exceeds_boundary_distance,
            "nonzero_on_boundary": self.nonzero_on_boundary,
        }


def validate_admissible(space, rho):
    """Check 0 < rho <= dist(.,boundary) on the interior and rho = 0 on the
    boundary; the report lists every violating point."""
    v = rho.values
    if len(v) != len(space):
        raise SpaceFormatError("radius field length does not match space")
    d = space.boundary_distances()
    interior = space.interior_indices
    bdry = space.boundary_indices
    nonpos = [int(i) for i in interior[v[interior] <= 0]]
    exceeds = [int(i) for i in interior[v[interior] > d[interior]]]
    nonzero = [int(i) for i in bdry[v[bdry] != 0]]
    ok = not (nonpos or exceeds or nonzero) and len(interior) > 0
    return AdmissibilityReport(ok, nonpos, exceeds, nonzero)


def _pair_sample(space, seed, n_pairs=_PAIR_SAMPLE_COUNT):
    rng = np.random.default_rng(seed)
    n = len(space)
    i = rng.integers(0, n, size=n_pairs)
    j = rng.integers(0, n, size=n_pairs)
    keep = i != j
    return i[keep], j[keep]


def _max_gap_ratio(space, values, gamma=1.0, seed=0):
    """max |values(x)-values(y)| / d(x,y)^gamma, exact below the pair
    threshold and seeded-sampled above it."""
    n = len(space)
    best = 0.0
    if n <= _PAIR_SAMPLE_THRESHOLD:
        for blk, dmat in space._distance_block(np.arange(n)):
            dv = np.abs(values[blk][:, None] - values[None, :])
            mask = dmat > 0
            if gamma != 1.0:
                with np.errstate(divide="ignore"):
                    ratios = dv[mask] / dmat[mask] ** gamma
            else:
                ratios = dv[mask] / dmat[mask]
            zero_d = (dmat == 0) & (dv > 0) & (blk[:, None] != np.arange(n)[None, :])
            if np.any(zero_d):
                raise SpaceFormatError("distinct points at distance zero with differing values")
            if ratios.size:
                best = max(best, float(ratios.max()))
        return best
    i, j = _pair_sample(space, seed)
    for lo in range(0, len(i), 65536):
        ii, jj = i[lo:lo + 65536], j[lo:lo + 65536]
        d = np.array([space.distance(a, b) for a, b in zip(ii, jj)]) \
            if space.metric == "graph" else \
            np.sqrt(((space.coords[ii] - space.coords[jj]) ** 2).sum(axis=1)) \
            if space.metric == "euclidean" else space._matrix[ii, jj]
        dv = np.abs(values[ii] - values[jj])
        mask = d > 0
        best = max(best, float((dv[mask] / d[mask] ** gamma).max(initial=0.0)))
    return best


def fit_lipschitz(space, rho, seed=0):
    """Fit the Lipschitz constant of the radius field and clamp it at 1
    (the regularity theory assumes L >= 1).  Stores both the raw and the
    clamped value on the field; returns the clamped one."""
    raw = _max_gap_ratio(space, rho.values, 1.0, seed)
    rho.raw_lipschitz = raw
    rho.lipschitz_L = max(1.0, raw)
    return rho.lipschitz_L


def fit_holder(space, rho, gamma, seed=0):
    """Fit the gamma-Holder coefficient of the radius field."""
    coeff = _max_gap_ratio(space, rho.values, gamma, seed)
    rho.holder_fits[float(gamma)] = coeff
    return coeff


def fit_radius_modulus(space, rho, seed=0, max_pairs=200_000):
    """Concave majorant of the |rho(x)-rho(y)| vs d(x,y) scatter, capped at
    the diameter so it can be normalized."""
    n = len(space)
    diam = space.diameter()
    rng = np.random.default_rng(seed)
    if n * (n - 1) // 2 <= max_pairs:
        ii, jj = np.triu_indices(n, k=1)
    else:
        ii = rng.integers(0, n, size=max_pairs)
        jj = rng.integers(0, n, size=max_pairs)
    if space.metric == "euclidean":
        d = np.sqrt(((space.coords[ii] - space.coords[jj]) ** 2).sum(axis=1))
    else:
        d = np.array([space.distance(a, b) for a, b in zip(ii, jj)])
    gaps = np.abs(rho.values[ii] - rho.values[jj])
    omega = least_concave_majorant(d, gaps, diam)
    return omega.capped(diam)


# -- parameter gates ---------------------------------------------------------------


def equicontinuity_conditions(alpha, epsilon, beta):
    """The iterate-equicontinuity conditions (the L = 1 parameter gate):
    |alpha| < 1, 0 < epsilon < 1 - |alpha|,
    1 <= beta < log(1/|alpha|) / log(1/(1-epsilon))."""
    a = abs(alpha)
    conds = {"alpha_below_one": a < 1.0,
             "epsilon_window": 0.0 < epsilon < 1.0 - a}
    if a == 0.0:
        beta_max = math.inf
    elif 0.0 < epsilon < 1.0:
        beta_max = math.log(1.0 / a) / math.log(1.0 / (1.0 - epsilon))
    else:
        beta_max = 0.0
    conds["beta_window"] = 1.0 <= beta < beta_max
    return conds, beta_max


@dataclass
class ParameterGate:
    """Verdict of the full parameter gate for the closed-form Holder bound."""

    alpha: float
    L: float
    epsilon: float
    beta: float
    lam: float
    ell_omega: float
    delta: float
    conditions: dict
    failed_conditions: list
    passed: bool
    beta_max: float
    series_ratio: float
    equicontinuity_passed: bool

    def to_dict(self):
        return {
            "alpha": self.alpha, "L": self.L, "epsilon": self.epsilon,
            "beta": self.beta, "lambda": self.lam, "ell_omega": self.ell_omega,
            "delta": self.delta,
            "conditions": self.conditions,
            "failed_conditions": self.failed_conditions,
            "pass": self.passed,
            "beta_max": self.beta_max,
            "series_ratio": self.series_ratio,
            "equicontinuity_pass": self.equicontinuity_passed,
        }


def validate_parameters(alpha, L, epsilon, beta, lam, ell_omega, delta=1.0):
    """Evaluate every condition of the main regularity gate.

    |alpha| < 1/L; 0 < epsilon < 1 - L|alpha|;
    1 <= beta < log(1/(L|alpha|)) / log(1/(1-epsilon))  (vacuous at alpha=0);
    0 < lambda <= ell^(1-beta) * epsilon.
    The L = 1 variant (iterate equicontinuity) is recorded as a separate
    flag, and the geometric series ratio L^delta |alpha| (1-eps)^(-beta
    delta) is reported for the root test.
    """
    a = abs(alpha)
    conds = {"alpha_below_inverse_lipschitz": L > 0 and a < 1.0 / L,
             "epsilon_window": 0.0 < epsilon < 1.0 - L * a}
    if a == 0.0:
        beta_max = math.inf
    elif L * a < 1.0 and 0.0 < epsilon < 1.0:
        beta_max = math.log(1.0 / (L * a)) / math.log(1.0 / (1.0 - epsilon))
    else:
        beta_max = 0.0
    conds["beta_window"] = 1.0 <= beta < beta_max
    lam_cap = ell_omega ** (1.0 - beta) * epsilon if ell_omega > 0 else math.inf
    conds["lambda_window"] = 0.0 < lam <= lam_cap
    if 0.0 < epsilon < 1.0:
        ratio = (L ** delta) * a * (1.0 - epsilon) ** (-beta * delta)
    else:
        ratio = math.inf
    eq_conds, _ = equicontinuity_conditions(alpha, epsilon, beta)
    failed = [k for k, v in conds.items() if not v]
    return ParameterGate(
        alpha=alpha, L=L, epsilon=epsilon, beta=beta, lam=lam,
        ell_omega=ell_omega, delta=delta,
        conditions=conds, failed_conditions=failed, passed=not failed,
        beta_max=beta_max, series_ratio=ratio,
        equicontinuity_passed=all(eq_conds.values()),
    )


@dataclass
class RadiusBoundsReport:
    """Pointwise check of lambda*dist^beta <= rho <= epsilon*dist."""

    lambda_window_ok: bool
    lower_violations: list
    upper_violations: list
    lam: float
    beta: float
    epsilon: float
    lambda_cap: float

    @property
    def ok(self):
        return self.lambda_window_ok and not self.lower_violations \
            and not self.upper_violations

    def to_dict(self):
        return {
            "ok": self.ok,
            "lambda_window_ok": self.lambda_window_ok,
            "lambda_cap": self.lambda_cap,
            "lower_violations": self.lower_violations,
            "upper_violations": self.upper_violations,
            "lambda": self.lam, "beta": self.beta, "epsilon": self.epsilon,
        }


def check_radius_bounds(space, rho, lam, beta, epsilon):
    """Verify the two-sided radius restriction per interior point.

    A lambda outside its admissibility window (0, ell^(1-beta)*epsilon] is
    recorded as a gate failure but the pointwise check still runs."""
    d = space.boundary_distances()
    interior = space.interior_indices
    v = rho.values
    lam_cap = space.ell() ** (1.0 - beta) * epsilon
    window_ok = 0.0 < lam <= lam_cap
    lower = lam * d[interior] ** beta
    upper = epsilon * d[interior]
    low_bad = [int(i) for i in interior[v[interior] < lower]]
    up_bad = [int(i) for i in interior[v[interior] > upper]]
    return RadiusBoundsReport(window_ok, low_bad, up_bad, lam, beta, epsilon,
                              lam_cap)


# -- exhaustion and hulls --------------------------------------------------------


def exhaustion(space, epsilon, m):
    """K_m: interior points at boundary distance >= (1-epsilon)^m.  Nested
    and increasing in m; may be empty for small m (that is reported by the
    caller, not an error)."""
    if not 0.0 < epsilon < 1.0:
        raise SpaceFormatError(f"epsilon must be in (0,1), got {epsilon}")
    if m < 1:
        raise SpaceFormatError(f"exhaustion index must be >= 1, got {m}")
    d = space.boundary_distances()
    cut = (1.0 - epsilon) ** m
    mask = (d >= cut) & ~space.boundary_mask
    return np.flatnonzero(mask)


def hull(space, rho, members):
    """Union of the radius balls over the given point set."""
    members = np.asarray(members, dtype=int)
    if members.size == 0:
        return np.array([], dtype=int)
    out = np.zeros(len(space), dtype=bool)
    for blk, dmat in space._distance_block(members):
        out |= (dmat <= rho.values[blk][:, None]).any(axis=0)
    return np.flatnonzero(out)


# -- file format -----------------------------------------------------------------


def read_radius_csv(space, path):
    """Radius file: header id,rho; ids must match the space."""
    values = np.full(len(space), np.nan)
    id_to_index = {int(pid): k for k, pid in enumerate(space.ids)}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["id", "rho"]:
            raise SpaceFormatError(f"{path}: expected header 'id,rho'")
        for row in reader:
            if not row:
                continue
            try:
                idx = id_to_index[int(row[0])]
            except (KeyError, ValueError) as exc:
                raise SpaceFormatError(f"{path}: unknown or invalid id in row {row!r}") from exc
            values[idx] = float(row[1])
    if np.any(np.isnan(values)):
        raise SpaceFormatError(f"{path}: missing radius for some points")
    return RadiusField(values)


def write_radius_csv(space, rho, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "rho"])
        for pid, v in zip(space.ids, rho.values):
            writer.writerow([int(pid), repr(float(v))])
