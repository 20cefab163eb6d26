"""Small-radius expansions of the averaging operators on Euclidean lattices.

For a C^2 function f the ball mean exceeds f(x) by rho^2 * lap(f)/(2(n+2))
to leading order, and the ball midrange by rho^2 * lap_inf(f)/(2 |grad f|^2)
whenever the gradient does not vanish; the alpha-blend of the two
quotients reproduces the p-laplacian combination under
alpha = (p-2)/(p+n), vanishing exactly at p-harmonic points.  The
expansion_* functions measure those quotients on uniform lattices with
radii snapped to whole lattice steps (so the discrete sup/inf hit the
continuum extremal points for axis-extremal functions) and Richardson-
extrapolate the radius sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SpaceFormatError

GRID_FINENESS = 16  # required: lattice step <= smallest radius / 16


@dataclass
class SmoothTestFunction:
    """Closed-form value/gradient/hessian evaluators on R^n."""

    name: str
    dim: int
    value: object      # (m, n) -> (m,)
    gradient: object   # (n,) -> (n,)
    hessian: object    # (n,) -> (n, n)

    def laplacian(self, x):
        return float(np.trace(self.hessian(np.asarray(x, dtype=float))))

    def infinity_laplacian(self, x):
        """Sum over i,j of f_i f_j f_ij (the un-normalized form)."""
        x = np.asarray(x, dtype=float)
        g = self.gradient(x)
        return float(g @ self.hessian(x) @ g)

    def p_laplacian_core(self, x, p):
        """lap f + (p-2) lap_inf f / |grad f|^2 (the |grad|^(p-2) factor
        stripped); zero exactly at p-harmonic points with grad != 0."""
        g = self.gradient(np.asarray(x, dtype=float))
        g2 = float(g @ g)
        if g2 == 0.0:
            raise SpaceFormatError("p-laplacian core needs a nonvanishing gradient")
        return self.laplacian(x) + (p - 2.0) * self.infinity_laplacian(x) / g2

    def self_check(self, x, step=1e-4, rtol=1e-6):
        """Finite-difference consistency of gradient and hessian."""
        x = np.asarray(x, dtype=float)
        n = self.dim
        g = np.asarray(self.gradient(x), dtype=float)
        h = np.asarray(self.hessian(x), dtype=float)
        scale = max(1.0, float(np.abs(g).max()), float(np.abs(h).max()))
        for i in range(n):
            e = np.zeros(n)
            e[i] = step
            fd = (self.value((x + e)[None, :])[0] - self.value((x - e)[None, :])[0]) / (2 * step)
            if abs(fd - g[i]) > rtol * scale:
                raise SpaceFormatError(
                    f"{self.name}: gradient[{i}] inconsistent with finite differences")
            gp = np.asarray(self.gradient(x + e), dtype=float)
            gm = np.asarray(self.gradient(x - e), dtype=float)
            fd_row = (gp - gm) / (2 * step)
            if np.abs(fd_row - h[i]).max() > rtol * scale:
                raise SpaceFormatError(
                    f"{self.name}: hessian row {i} inconsistent with finite differences")
        return True


def _sq_norm(n):
    return SmoothTestFunction(
        name="sq_norm", dim=n,
        value=lambda X: (np.asarray(X, dtype=float) ** 2).sum(axis=1),
        gradient=lambda x: 2.0 * np.asarray(x, dtype=float),
        hessian=lambda x: 2.0 * np.eye(n),
    )


def _linear(n):
    return SmoothTestFunction(
        name="linear", dim=n,
        value=lambda X: np.asarray(X, dtype=float)[:, 0],
        gradient=lambda x: np.eye(n)[0],
        hessian=lambda x: np.zeros((n, n)),
    )


def _saddle(n):
    if n != 2:
        raise SpaceFormatError("the saddle test function is two-dimensional")

    def hess(x):
        return np.array([[2.0, 0.0], [0.0, -2.0]])

    return SmoothTestFunction(
        name="saddle", dim=2,
        value=lambda X: np.asarray(X, dtype=float)[:, 0] ** 2
        - np.asarray(X, dtype=float)[:, 1] ** 2,
        gradient=lambda x: np.array([2.0 * x[0], -2.0 * x[1]]),
        hessian=hess,
    )


def _cubic_harmonic(n):
    if n != 2:
        raise SpaceFormatError("the cubic harmonic test function is two-dimensional")
    return SmoothTestFunction(
        name="cubic_harmonic", dim=2,
        value=lambda X: np.asarray(X, dtype=float)[:, 0] ** 3
        - 3.0 * np.asarray(X, dtype=float)[:, 0] * np.asarray(X, dtype=float)[:, 1] ** 2,
        gradient=lambda x: np.array([3.0 * x[0] ** 2 - 3.0 * x[1] ** 2,
                                     -6.0 * x[0] * x[1]]),
        hessian=lambda x: np.array([[6.0 * x[0], -6.0 * x[1]],
                                    [-6.0 * x[1], -6.0 * x[0]]]),
    )


CATALOG = {
    "sq_norm": _sq_norm,
    "linear": _linear,
    "saddle": _saddle,
    "cubic_harmonic": _cubic_harmonic,
}


def test_function(name, n):
    try:
        return CATALOG[name](n)
    except KeyError as exc:
        raise SpaceFormatError(
            f"unknown test function {name!r}; catalog: {sorted(CATALOG)}") from exc


def alpha_from_p(p, n):
    """The blend weight matching the p-laplacian: (p-2)/(p+n); p=2 -> 0
    (plain mean / usual laplacian), p=infinity -> 1 (midrange only)."""
    if p == math.inf:
        return 1.0
    if not p > 1:
        raise SpaceFormatError(f"p must be > 1 or infinity, got {p}")
    return (p - 2.0) / (p + n)


@dataclass
class ExpansionResult:
    mode: str
    radii: list
    quotients: list
    extrapolated: float
    predicted: float
    relative_error: float
    h: float
    floor_estimate: float
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "mode": self.mode, "radii": self.radii, "quotients": self.quotients,
            "extrapolated": self.extrapolated, "predicted": self.predicted,
            "relative_error": self.relative_error, "h": self.h,
            "floor_estimate": self.floor_estimate, "details": self.details,
        }


def richardson_limit(step_ratio, values):
    """Repeated Richardson elimination; values ordered coarse to fine."""
    level = list(values)
    n = len(level)
    if n == 1:
        return level[0]
    for m in range(1, n):
        mult = step_ratio ** m
        level = [(mult * level[i + 1] - level[i]) / (mult - 1.0)
                 for i in range(len(level) - 1)]
    return level[0]


def _prepare(f, x, radii, h, h_divisor):
    x = np.asarray(x, dtype=float)
    if x.shape != (f.dim,):
        raise SpaceFormatError(f"point has dimension {x.shape}, function needs {f.dim}")
    radii = sorted((float(r) for r in radii), reverse=True)
    if len(radii) < 2 or radii[-1] <= 0:
        raise SpaceFormatError("need at least two positive radii")
    if h is None:
        h = radii[-1] / h_divisor
    if h > radii[-1] / GRID_FINENESS * (1 + 1e-12):
        raise SpaceFormatError(
            f"lattice step {h} too coarse: need h <= min radius / {GRID_FINENESS}")
    # snap radii down to whole lattice steps (keeps discrete extrema exact)
    snapped = [math.floor(r / h + 1e-9) * h for r in radii]
    f.self_check(x)
    return x, snapped, h


def _lattice_ball(x, rho, h, dim):
    k_max = int(math.floor(rho / h + 1e-9))
    axes = [np.arange(-k_max, k_max + 1)] * dim
    mesh = np.meshgrid(*axes, indexing="ij")
    K = np.stack([m.ravel() for m in mesh], axis=1)
    inside = (K * K).sum(axis=1) <= k_max * k_max + 1e-9
    return x[None, :] + h * K[inside]


def _quotients(f, x, radii, h, kind):
    fx = f.value(x[None, :])[0]
    out = []
    for rho in radii:
        pts = _lattice_ball(x, rho, h, f.dim)
        vals = f.value(pts)
        if kind == "mean":
            q = (vals.mean() - fx) / rho ** 2
        else:
            q = (0.5 * (vals.max() + vals.min()) - fx) / rho ** 2
        out.append(float(q))
    return out


def _extrapolate(radii, quotients):
    # radii arrive descending: values run coarse (largest rho) to fine
    ratios = [radii[i] / radii[i + 1] for i in range(len(radii) - 1)]
    ratio = ratios[0]
    if any(abs(r - ratio) > 1e-9 * ratio for r in ratios):
        raise SpaceFormatError("radii must form a geometric progression")
    # remainder is even in rho, so eliminate powers of rho^2
    return richardson_limit(ratio ** 2, list(quotients))


def expansion_mean(f, x, radii, h=None, h_divisor=GRID_FINENESS):
    """Mean-expansion quotients and their limit vs lap(f)/(2(n+2))."""
    x, radii, h = _prepare(f, x, radii, h, h_divisor)
    quotients = _quotients(f, x, radii, h, "mean")
    extrap = _extrapolate(radii, quotients)
    predicted = f.laplacian(x) / (2.0 * (f.dim + 2.0))
    rel = _relative_error(extrap, predicted)
    return ExpansionResult("mean", radii, quotients, extrap, predicted, rel, h,
                           floor_estimate=h / min(radii))


def expansion_midrange(f, x, radii, h=None, h_divisor=GRID_FINENESS):
    """Midrange-expansion quotients vs lap_inf(f)/(2 |grad f|^2).

    Refuses points with vanishing gradient (the prediction needs
    |grad f| > 0)."""
    x, radii, h = _prepare(f, x, radii, h, h_divisor)
    g = np.asarray(f.gradient(x), dtype=float)
    g2 = float(g @ g)
    if g2 <= 1e-16:
        raise SpaceFormatError(
            "midrange expansion needs a nonvanishing gradient at the point")
    quotients = _quotients(f, x, radii, h, "midrange")
    extrap = _extrapolate(radii, quotients)
    predicted = f.infinity_laplacian(x) / (2.0 * g2)
    rel = _relative_error(extrap, predicted)
    return ExpansionResult("midrange", radii, quotients, extrap, predicted, rel,
                           h, floor_estimate=h / min(radii) ** 2)


def expansion_p(f, x, p, n, radii, h=None, h_divisor=GRID_FINENESS):
    """Blend-expansion quotients for the p-laplacian combination.

    The per-radius quotient is exactly the alpha-affine combination of the
    mean and midrange quotients (computed from the same lattice balls);
    the predicted limit vanishes exactly at p-harmonic points.
    """
    alpha = alpha_from_p(p, n)
    x, radii, h = _prepare(f, x, radii, h, h_divisor)
    g = np.asarray(f.gradient(x), dtype=float)
    g2 = float(g @ g)
    if g2 <= 1e-16:
        raise SpaceFormatError(
            "blend expansion needs a nonvanishing gradient at the point")
    q_mean = _quotients(f, x, radii, h, "mean")
    q_mid = _quotients(f, x, radii, h, "midrange")
    quotients = [alpha * qm + (1.0 - alpha) * qa
                 for qm, qa in zip(q_mid, q_mean)]
    extrap = _extrapolate(radii, quotients)
    predicted = alpha * f.infinity_laplacian(x) / (2.0 * g2) \
        + (1.0 - alpha) * f.laplacian(x) / (2.0 * (f.dim + 2.0))
    rel = _relative_error(extrap, predicted)
    return ExpansionResult("p", radii, quotients, extrap, predicted, rel, h,
                           floor_estimate=h / min(radii) ** 2,
                           details={"p": p, "alpha": alpha,
                                    "mean_quotients": q_mean,
                                    "midrange_quotients": q_mid})


def _relative_error(measured, predicted):
    if predicted == 0.0:
        return abs(measured)
    return abs(measured - predicted) / abs(predicted)
