"""Small-radius expansions: the mean, the midrange, and the p-blend.

For smooth functions the ball-mean excess over the center value scales
like rho^2 times the laplacian (over 2(n+2)), the midrange excess like the
normalized infinity-laplacian, and the alpha-blend with
alpha = (p-2)/(p+n) reproduces the p-laplacian combination: it vanishes
exactly where the function is p-harmonic.
"""

import numpy as np

from pharmonious import (alpha_from_p, expansion_mean, expansion_midrange,
                         expansion_p, test_function)

radii = [0.4, 0.2, 0.1, 0.05]
x = np.array([1.0, 0.0])
f = test_function("sq_norm", 2)

print("p -> alpha map in the plane:",
      {p: round(alpha_from_p(p, 2), 4) for p in (2, 3, 4, 10, np.inf)})

mean = expansion_mean(f, x, radii, h=0.05 / 32)
mid = expansion_midrange(f, x, radii, h=0.05 / 32)
print(f"\n|x|^2 at (1, 0):")
print(f"  mean quotients     {[round(q, 5) for q in mean.quotients]}")
print(f"  -> extrapolated {mean.extrapolated:.5f}, predicted {mean.predicted}")
print(f"  midrange quotients {[round(q, 5) for q in mid.quotients]}")
print(f"  -> extrapolated {mid.extrapolated:.5f}, predicted {mid.predicted}")

for p in (2.0, 4.0, 10.0):
    res = expansion_p(f, x, p, 2, radii, h=0.05 / 32)
    print(f"  p = {p:4.1f}: blend limit {res.extrapolated:.5f}, predicted "
          f"{res.predicted:.5f} (alpha = {res.details['alpha']:.3f})")

# linear functions are p-harmonic for every p: the blend limit vanishes
lin = test_function("linear", 2)
res = expansion_p(lin, np.array([0.3, -0.2]), 7.0, 2, radii)
print(f"\nlinear function, p = 7: blend quotients all "
      f"{max(abs(q) for q in res.quotients):.1e} (p-harmonic)")

# a saddle is harmonic (p = 2) but not infinity-harmonic; its gradient at
# (1, 0.5) is off-axis, so the lattice sup/inf miss the continuum extremal
# direction by up to the reported discretization floor
saddle = test_function("saddle", 2)
m = expansion_mean(saddle, np.array([1.0, 0.5]), radii)
s = expansion_midrange(saddle, np.array([1.0, 0.5]), radii)
print(f"saddle at (1, 0.5): mean limit {m.extrapolated:.2e} (harmonic), "
      f"midrange limit {s.extrapolated:.4f} vs predicted {s.predicted:.4f} "
      f"(floor {s.floor_estimate:.2f})")
