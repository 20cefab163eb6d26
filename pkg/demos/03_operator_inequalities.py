"""The quantitative operator inequalities, checked on real grids.

Every bound that feeds the regularity certificate is checkable: the
two-ball mean stability estimate, the two branch bounds on the symmetric
difference ratio, the sup-inf gaps behind the midrange estimate, and the
one-sweep oscillation transfer.  Each checker returns a record with both
sides and the discreteness slack it granted.
"""

import numpy as np

from pharmonious import (Modulus, RadiusField, TheoreticalModulus,
                         ball_symdiff_ratio, check_alpha_mean_modulus,
                         check_mean_stability, check_symdiff_bounds,
                         exhaustion, fit_lipschitz, hausdorff_gaps,
                         interval_grid, mean_value, midrange_value,
                         alpha_mean_value)

sp = interval_grid(257)
rho = RadiusField.scaled_boundary_distance(sp, 0.3)
fit_lipschitz(sp, rho)
rng = np.random.default_rng(0)

# -- pointwise operators -------------------------------------------------------

u = sp.coords[:, 0] ** 2
x = 128  # the point 0.5
print(f"u = t^2 at x = 0.5 with rho(x) = {rho[x]:.3f}:")
print(f"  ball mean      {mean_value(sp, rho, u, x):.6f}")
print(f"  ball midrange  {midrange_value(sp, rho, u, x):.6f}")
print(f"  alpha blend    {alpha_mean_value(sp, rho, u, x, 1 / 3):.6f}"
      "  (alpha = 1/3)")

# -- two-ball mean stability -----------------------------------------------------

worst = None
for _ in range(500):
    b1 = sp.ball(int(rng.integers(257)), float(rng.uniform(0, 0.6)))
    b2 = sp.ball(int(rng.integers(257)), float(rng.uniform(0, 0.6)))
    w = rng.uniform(-1, 1, size=len(sp))
    rec = check_mean_stability(sp, w, b1, b2)
    assert rec.passed
    if worst is None or rec.slack < worst.slack:
        worst = rec
print(f"\nmean stability over 500 random ball pairs: all pass, "
      f"tightest slack {worst.slack:.4f}")

# -- symmetric-difference branches -------------------------------------------------

k2 = exhaustion(sp, 0.5, 2)
rho_k = float(rho.values[k2].min())
x, y = int(k2[10]), int(k2[40])
rec = check_symdiff_bounds(sp, rho, x, y, rho.lipschitz_L, 1.0, 1.0, rho_k, 2.0)
print(f"\nsymmetric difference ratio at d = {rec.details['distance']:.4f}: "
      f"{rec.lhs:.4f}")
print(f"  Lipschitz branch bound  {rec.details['rhs_lipschitz']:.4f} "
      f"({'holds' if rec.details['lipschitz_pass'] else 'fails'})")
print(f"  continuity branch bound {rec.details['rhs_continuity']:.4f} "
      f"({'holds' if rec.details['continuity_pass'] else 'fails'})")

# -- sup-inf gaps (the midrange estimate) -------------------------------------------

gaps, rec = hausdorff_gaps(sp, rho, int(k2[5]), int(k2[25]))
print(f"\nsup-inf gaps between two radius balls: {gaps.sup_inf_xy:.4f} / "
      f"{gaps.sup_inf_yx:.4f}")
print(f"  symmetrized claim: {rec.lhs:.4f} <= {rec.rhs:.4f} "
      f"({'holds' if rec.passed else 'fails'}, slack allowance "
      f"{rec.slack_allowance:.4f})")
print(f"  one-sided bounds as printed:    {rec.details['printed_orientation']}")
print(f"  one-sided bounds transposed:    {rec.details['transposed_orientation']}")

# -- one-sweep oscillation transfer ---------------------------------------------------

w_mod = TheoreticalModulus("annular_continuous", C=8.0, rho_K=rho_k, delta=1.0,
                           normalized=Modulus.identity(sp.diameter()))
rec = check_alpha_mean_modulus(sp, rho, u, 0.3, k2, w_mod)
print(f"\none-sweep oscillation transfer on K_2 (alpha = 0.3): "
      f"{'holds' if rec.passed else 'fails'} at {rec.details['n_probes']} "
      f"sampled distances, worst margin {rec.slack:.4f}")
