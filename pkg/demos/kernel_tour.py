"""A short tour of the kernels: two routes for p_t on S^7, three for h_t on CP^3,
the long-time limit, and the Green function seen as a time transform.

Run:  python3 demos/kernel_tour.py
"""
import math

import numpy as np

from hopfheat import green_sphere, green_transform, h_t_integral, h_t_intertwined, h_t_spectral
from hopfheat import p_t_integral, p_t_spectral, sphere_volume

n = 1

# The spectral series and the SL(2) integral are independent formulas for the same kernel.
print("p_t on S^7, spectral vs integral")
for t, r, eta in [(0.5, 0.4, 1.0), (0.1, 0.7, 2.4), (1.0, 0.0, 0.0)]:
    a = p_t_spectral(n, t, r, eta)
    b = p_t_integral(n, t, r, eta)
    print(f"  t={t:<4} r={r:<4} eta={eta:<4} {a.value:.15e} {b.value:.15e}  "
          f"rel diff {abs(a.value - b.value) / b.value:.1e}  bits {a.diagnostics['bits']}/{b.diagnostics['bits']}")

# At t = 0.1 the sums cancel heavily; the auto policy escalates to MPFR where needed.
R, E = np.meshgrid([0.0, 0.7], [0.5, math.pi], indexing="ij")
res = p_t_spectral(n, 0.1, R, E)
print("\nbits used per grid point at t = 0.1:\n", res.diagnostics["bits"])

# Long time: the kernel flattens to 1/vol.
print(f"\np_10(0.3, 2.0) = {p_t_spectral(n, 10.0, 0.3, 2.0).value:.15f},  1/vol = {1 / sphere_volume(n):.15f}")

# h_t on CP^3 from its own series, from averaging p_t over the circle fiber, and from
# the nested double integral.
t, r, phi = 0.5, 0.4, 0.6
print("\nh_t on CP^3 at (t, r, phi) = (0.5, 0.4, 0.6)")
for name, fn in [("spectral", h_t_spectral), ("intertwined", h_t_intertwined), ("integral", h_t_integral)]:
    print(f"  {name:<12} {fn(n, t, r, phi).value:.15e}")

# Green function of the conformal sub-Laplacian against int_0^inf p_t e^{-8t} dt.
print("\nGreen function: closed form vs time transform")
for r, eta in [(0.5, 1.0), (1.0, 0.5)]:
    g = green_sphere(n, r, eta)
    tr = green_transform(n, r, eta)
    print(f"  r={r} eta={eta}: {g:.12e} {tr.value:.12e} (est. err {tr.error_estimate:.1e})")
