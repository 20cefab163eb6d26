"""Fixed-point iteration for the alpha-mean value property.

Synchronous (double-buffered) sweeps of the alpha-mean operator with the
boundary values held fixed; the residual is the sup-norm defect of the
fixed-point equation on the interior.  Convergence here is empirical: the
iteration stops when the residual falls under the tolerance or the sweep
budget runs out, and a non-converged outcome is reported, not raised.

Note on boundary coupling: with an admissible radius bounded by
epsilon * dist (epsilon < 1), interior balls never reach the boundary, so
boundary data influences the limit only through the initial field (the
near-boundary points whose ball is a singleton stay frozen and act as the
effective Dirichlet layer).  Constants on the interior are always exact
fixed points; richer fixed points come from richer initial guesses.

The module also carries the iterate-oscillation machinery: the n-sweep
oscillation bound, the finite-j root-test margin, and the equicontinuity
parameter gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import operators as ops
from . import radius as radius_mod
from .errors import AdmissibilityError, SpaceFormatError
from .operators import BallTable, ScalarField, field_values


@dataclass
class SolveConfig:
    alpha: float = 0.0
    tolerance: float = 1e-8
    max_iterations: int = 100_000
    record_every: int = 0          # iterate-modulus snapshot cadence; 0 = off
    snapshot_m: tuple = (1, 2)     # exhaustion indices to snapshot
    epsilon: float = 0.5           # exhaustion parameter for snapshots
    initial: object = None         # full-length array; default = boundary mean

    def __post_init__(self):
        if self.tolerance <= 0:
            raise SpaceFormatError("tolerance must be positive")
        if self.max_iterations < 1:
            raise SpaceFormatError("max_iterations must be >= 1")


@dataclass
class SolveReport:
    field: ScalarField
    iterations_used: int
    residual_history: list
    converged: bool
    final_residual: float
    modulus_snapshots: list = None

    def to_dict(self):
        return {
            "iterations_used": self.iterations_used,
            "residual_history": self.residual_history,
            "converged": self.converged,
            "final_residual": self.final_residual,
            "modulus_snapshots": [
                {"iteration": it, "m": m, "breakpoints": mod.breakpoint_list()}
                for it, m, mod in (self.modulus_snapshots or [])
            ],
        }


def _normalize_boundary(space, boundary_data):
    b = space.boundary_indices
    if len(b) == 0:
        raise SpaceFormatError("space has an empty boundary")
    if isinstance(boundary_data, dict):
        try:
            vals = np.array([boundary_data[int(i)] for i in b], dtype=float)
        except KeyError as exc:
            raise SpaceFormatError(f"boundary data missing point {exc}") from exc
    else:
        arr = np.asarray(boundary_data, dtype=float)
        if arr.shape == (len(space),):
            vals = arr[b]
        elif arr.shape == (len(b),):
            vals = arr
        else:
            raise SpaceFormatError(
                f"boundary data length {arr.shape} matches neither the boundary "
                f"({len(b)}) nor the space ({len(space)})")
    if not np.all(np.isfinite(vals)):
        raise SpaceFormatError("boundary data contains non-finite values")
    return b, vals


def solve_dirichlet(space, rho, alpha, boundary_data, config=None):
    """Iterate the alpha-mean operator to a fixed point with fixed boundary.

    Refuses non-admissible radius fields.  The returned field is the last
    iterate whose residual was measured, so the reported final residual is
    exactly what an independent residual() recomputation gives.
    Deterministic: synchronous sweeps, fixed reduction order.
    """
    if config is None:
        config = SolveConfig(alpha=alpha)
    report = radius_mod.validate_admissible(space, rho)
    if not report.ok:
        raise AdmissibilityError(
            f"radius field is not admissible: {report.to_dict()}")
    b, bvals = _normalize_boundary(space, boundary_data)
    interior = space.interior_indices
    if len(interior) == 0:
        raise SpaceFormatError("space has no interior points")

    u = np.empty(len(space))
    if config.initial is not None:
        init = field_values(config.initial)
        if init.shape != u.shape:
            raise SpaceFormatError("initial guess length does not match space")
        if not np.all(np.isfinite(init)):
            raise SpaceFormatError("initial guess contains non-finite values")
        u[:] = init
    else:
        u[:] = bvals.mean()
    u[b] = bvals

    table = BallTable(space, rho)
    exhaustions = {}
    if config.record_every > 0:
        exhaustions = {m: radius_mod.exhaustion(space, config.epsilon, m)
                       for m in config.snapshot_m}

    history = []
    snapshots = []
    converged = False
    iterations = 0
    while True:
        swept = table.alpha_means(u, alpha)
        residual_now = float(np.abs(swept - u[interior]).max())
        history.append(residual_now)
        if config.record_every > 0 and iterations % config.record_every == 0:
            for m, members in exhaustions.items():
                snapshots.append(
                    (iterations, m, ops.oscillation_modulus(space, u, members)))
        if residual_now <= config.tolerance:
            converged = True
            break
        if iterations >= config.max_iterations:
            break
        u[interior] = swept
        iterations += 1
    return SolveReport(
        field=ScalarField(space, u),
        iterations_used=iterations,
        residual_history=history,
        converged=converged,
        final_residual=residual_now,
        modulus_snapshots=snapshots,
    )


def residual(space, rho, u, alpha, table=None):
    """Sup-norm defect of the fixed-point equation on the interior."""
    v = field_values(u)
    if table is None:
        table = BallTable(space, rho)
    swept = table.alpha_means(v, alpha)
    return float(np.abs(swept - v[table.centers]).max())


# -- iterate oscillation machinery ---------------------------------------------


def iterate_modulus_bound(m, n, t, *, alpha, norm_u, u_modulus, family, normalized):
    """Oscillation bound for the n-fold sweep on the m-th exhaustion set.

    With s_j the j-fold self-composition of the normalized radius modulus
    applied to t, the bound is

        |alpha|^n * u_modulus(s_n)
          + (1 - alpha) * norm_u * sum over j < n of
                |alpha|^j * family.at(m + j)(s_j).

    u_modulus must be a modulus for the unswept field on the (m+n)-th
    exhaustion set; family provides the mean-sweep modulus at each
    exhaustion index.
    """
    if abs(alpha) > 1:
        raise SpaceFormatError("iterate bound requires |alpha| <= 1")
    if n < 0:
        raise SpaceFormatError("sweep count must be nonnegative")
    diam = normalized.domain_end
    a = abs(alpha)
    total = 0.0
    s = float(t)
    for j in range(int(n)):
        w_j = family.at(m + j)
        total += (a ** j) * float(w_j(min(s, diam)))
        s = float(normalized(min(s, diam)))
    head = (a ** n) * float(u_modulus(min(s, u_modulus.domain_end)))
    return head + (1.0 - alpha) * norm_u * total


def root_test_margin(alpha, family, j_max=40):
    """Finite-j surrogate for the root-test margin.

    |alpha| * max over j in [j_max/2, j_max] of W_j(diam)^(1/j): a
    stabilized tail statistic standing in for the limsup.  The gate passes
    when the margin is < 1.
    """
    if j_max < 4:
        raise SpaceFormatError("root test needs j_max >= 4")
    a = abs(alpha)
    if a == 0.0:
        return 0.0
    diam = family.diam
    best = 0.0
    for j in range(max(2, math.ceil(j_max / 2)), j_max + 1):
        w_end = float(family.at(j)(diam))
        if w_end > 0:
            best = max(best, w_end ** (1.0 / j))
    return a * best


@dataclass
class GateVerdict:
    passed: bool
    conditions: dict
    analytic_margin: float
    beta_max: float

    def to_dict(self):
        return {"pass": self.passed, "conditions": self.conditions,
                "analytic_margin": self.analytic_margin,
                "beta_max": self.beta_max}


def equicontinuity_gate(alpha, epsilon, beta, delta=1.0):
    """Parameter gate for equicontinuity of the sweep iterates.

    pass iff |alpha| < 1, 0 < epsilon < 1 - |alpha|, and
    1 <= beta < log(1/|alpha|) / log(1/(1-epsilon)) (vacuous at alpha=0).
    The verdict also reports the analytic root-test margin
    |alpha| (1-epsilon)^(-delta beta); the gate conditions imply margin < 1
    for every delta in (0,1], and at delta = 1 they are equivalent to it.
    """
    conds, beta_max = radius_mod.equicontinuity_conditions(alpha, epsilon, beta)
    if 0.0 < epsilon < 1.0:
        margin = abs(alpha) * (1.0 - epsilon) ** (-delta * beta)
    else:
        margin = math.inf
    return GateVerdict(all(conds.values()), conds, margin, beta_max)
