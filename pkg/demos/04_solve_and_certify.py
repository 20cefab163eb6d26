"""Solve the fixed-point Dirichlet problem and certify its regularity.

With an admissible radius bounded by epsilon * dist, interior balls never
touch the boundary, so the boundary data reaches the fixed point through
the initial field: the near-boundary points whose ball is a singleton
freeze at their initial values and act as the effective Dirichlet layer.
Starting from the boundary-function extension therefore produces a
genuinely nonconstant p-harmonious field, which the certificate machinery
then bounds.
"""

import numpy as np

from pharmonious import (RadiusField, SolveConfig, certify, empirical_holder,
                         exhaustion, residual, solve_dirichlet, square_grid)

alpha, eps, beta, lam, m = 0.3, 0.5, 1.0, 0.4, 2

for n in (65, 129):
    sp = square_grid(n)
    rho = RadiusField.scaled_boundary_distance(sp, 0.4)
    g = sp.coords[:, 0] ** 2 - sp.coords[:, 1] ** 2

    report = solve_dirichlet(
        sp, rho, alpha, g[sp.boundary_indices],
        SolveConfig(alpha=alpha, tolerance=1e-8, initial=g))
    u = report.field
    print(f"\n{n}x{n} grid, boundary x^2 - y^2, alpha = {alpha}:")
    print(f"  converged in {report.iterations_used} sweeps, residual "
          f"{report.final_residual:.2e}")
    print(f"  residual recomputed independently: "
          f"{residual(sp, rho, u, alpha):.2e}")

    cert = certify(sp, rho, u, alpha, m, epsilon=eps, beta=beta, lam=lam,
                   residual_tolerance=1e-7)
    print(f"  gate pass: {cert.gate.passed}  (series ratio "
          f"{cert.gate.series_ratio:.3f})")
    print(f"  certified Holder bound on K_{m}:  {cert.theoretical_constant:.1f}")
    print(f"  measured Lipschitz seminorm:    {cert.empirical_constant:.4f} "
          f"({cert.empirical_mode} scan)")
    print(f"  certificate: {'PASS' if cert.passed else 'FAIL'}; constants "
          f"C = {cert.constants['C']}, source {cert.constants['source']}")

# the certified bound is a worst-case constant; the slack against the
# measured seminorm is what the theory pays for covering every fixed point
sp = square_grid(65)
rho = RadiusField.scaled_boundary_distance(sp, 0.4)
g = sp.coords[:, 0] ** 2 - sp.coords[:, 1] ** 2
rep = solve_dirichlet(sp, rho, alpha, g[sp.boundary_indices],
                      SolveConfig(alpha=alpha, tolerance=1e-8, initial=g))
print("\nmeasured seminorm by exhaustion depth (65x65 field):")
for mm in (1, 2, 3, 4):
    members = exhaustion(sp, eps, mm)
    emp = empirical_holder(sp, rep.field, members, 1.0)
    print(f"  K_{mm} ({len(members):5d} points): {emp.value:.4f}")
