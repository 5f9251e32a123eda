"""Finite-difference check of the radial heat equation.

Start from the exact kernel at t = 0.5, step forward with Crank-Nicolson to
t = 0.6 using the kernel on the outer ring as boundary data, and compare
with the exact kernel at t = 0.6. Then confirm a few eigenvalues of the
radial operators.

Run:  python3 demos/pde_check.py
"""
import numpy as np

from hopfheat import p_t_spectral
from hopfheat.pde import eigen_check, evolve, make_grid

n = 1
grid = make_grid(0.2, 1.2, 51, 0.3, 2.6, 116, "sphere", lambda R, F: p_t_spectral(n, 0.5, R, F).value)
out = evolve(n, grid, 0.5, 1e-3, 100)
R, F = np.meshgrid(grid.r_nodes, grid.fiber_nodes, indexing="ij")
exact = p_t_spectral(n, 0.6, R, F).value
win = grid.window(0.4, 1.0, 0.6, 2.2)
dev = np.abs(out.values - exact)[win].max() / np.abs(exact[win]).max()
print(f"max relative deviation on the interior window after 100 steps: {dev:.2e}")

for which in ("sphere", "cp"):
    for k, m in [(1, 0), (0, 2), (2, 1)]:
        est, lam = eigen_check(n, k, m, which)
        print(f"{which:<6} (k={k}, m={m}) eigenvalue {lam:8.1f}  estimate {est:.10f}")
