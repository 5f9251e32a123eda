"""Finite-difference oracle for the cylindric heat equations.

Both radial operators share the horizontal part
    d_rr + ((4n-1) cot r - 3 tan r) d_r
and differ in the fiber part multiplied by tan^2 r:
    sphere: d_ee + 2 cot(eta) d_e       (eta in (0, pi))
    cp:     d_pp + 2 cot(2 phi) d_p     (phi in (0, pi/2))
Time stepping is Crank-Nicolson on the interior nodes with Dirichlet data
on the outer ring, taken from the closed-form kernel at each step.
"""
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .core import as_n
from .cp_kernel import h_t_spectral
from .errors import DomainError, GridTooCoarse, LinearSolveFailure
from .orthopoly import chebyshev_u_all, jacobi_p_all
from .sphere_kernel import p_t_spectral

MAX_SPACING = 0.05
_FIBER_RANGE = {"sphere": np.pi, "cp": np.pi / 2}


@dataclass(frozen=True)
class RadialGrid:
    r_nodes: np.ndarray
    fiber_nodes: np.ndarray
    values: np.ndarray
    which: str = "sphere"

    def __post_init__(self):
        if self.which not in _FIBER_RANGE:
            raise DomainError("which must be 'sphere' or 'cp'")
        r, f = np.asarray(self.r_nodes, float), np.asarray(self.fiber_nodes, float)
        for x, hi, name in ((r, np.pi / 2, "r"), (f, _FIBER_RANGE[self.which], "fiber")):
            if x.ndim != 1 or x.size < 3:
                raise DomainError(f"{name} axis needs at least 3 nodes")
            d = np.diff(x)
            if np.any(d <= 0) or not np.allclose(d, d[0], rtol=1e-9, atol=0):
                raise DomainError(f"{name} nodes must be increasing and uniformly spaced")
            if x[0] <= 0 or x[-1] >= hi:
                raise DomainError(f"{name} nodes must be strictly interior to (0, {hi:.6g})")
        if np.shape(self.values) != (r.size, f.size):
            raise DomainError("values must have shape (len(r_nodes), len(fiber_nodes))")

    @property
    def hr(self):
        return float(self.r_nodes[1] - self.r_nodes[0])

    @property
    def hf(self):
        return float(self.fiber_nodes[1] - self.fiber_nodes[0])

    def with_values(self, values):
        return replace(self, values=np.asarray(values, float))

    def window(self, r_lo, r_hi, f_lo, f_hi):
        """Boolean mask of nodes inside a closed sub-window."""
        R, F = np.meshgrid(self.r_nodes, self.fiber_nodes, indexing="ij")
        return (R >= r_lo - 1e-12) & (R <= r_hi + 1e-12) & (F >= f_lo - 1e-12) & (F <= f_hi + 1e-12)


def make_grid(r_lo, r_hi, n_r, f_lo, f_hi, n_f, which="sphere", fill=None):
    """Uniform grid; ``fill(R, F)`` (meshgrid arrays) supplies the values."""
    r = np.linspace(r_lo, r_hi, n_r)
    f = np.linspace(f_lo, f_hi, n_f)
    R, F = np.meshgrid(r, f, indexing="ij")
    vals = np.zeros_like(R) if fill is None else np.asarray(fill(R, F), float)
    return RadialGrid(r, f, vals, which)


def _coeffs(n, grid):
    r, f = grid.r_nodes, grid.fiber_nodes
    br = (4 * n - 1) / np.tan(r) - 3 * np.tan(r)
    bf = 2 / np.tan(f) if grid.which == "sphere" else 2 / np.tan(2 * f)
    return br, np.tan(r) ** 2, bf


def _d1(v, h, axis):
    return np.gradient(v, h, axis=axis, edge_order=2)


def _d2(v, h, axis):
    v = np.moveaxis(v, axis, 0)
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / h ** 2
    if v.shape[0] >= 4:
        out[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / h ** 2
        out[-1] = (2 * v[-1] - 5 * v[-2] + 4 * v[-3] - v[-4]) / h ** 2
    else:
        out[0], out[-1] = out[1], out[-2]
    return np.moveaxis(out, 0, axis)


def apply_operator(params, grid, which=None):
    """Radial sub-Laplacian applied to grid.values by finite differences.

    Central second-order stencils inside, one-sided second-order at the
    edges. Returns a grid carrying the result.
    """
    n = as_n(params)
    if which is not None and which != grid.which:
        grid = replace(grid, which=which)
    if max(grid.hr, grid.hf) > MAX_SPACING:
        raise GridTooCoarse(f"grid spacing {max(grid.hr, grid.hf):.3g} exceeds {MAX_SPACING}")
    v = np.asarray(grid.values, float)
    br, tan2, bf = _coeffs(n, grid)
    Lv = (_d2(v, grid.hr, 0) + br[:, None] * _d1(v, grid.hr, 0)
          + tan2[:, None] * (_d2(v, grid.hf, 1) + bf[None, :] * _d1(v, grid.hf, 1)))
    return grid.with_values(Lv)


def _interior_system(n, grid):
    """Sparse operator on interior nodes plus the map from boundary values."""
    nr, nf = grid.values.shape
    hr, hf = grid.hr, grid.hf
    br, tan2, bf = _coeffs(n, grid)
    idx = -np.ones((nr, nf), dtype=int)
    ii, jj = np.meshgrid(np.arange(1, nr - 1), np.arange(1, nf - 1), indexing="ij")
    idx[1:-1, 1:-1] = np.arange(ii.size).reshape(ii.shape)
    rows, cols, vals = [], [], []
    brow, bcol, bval = [], [], []
    i, j = ii.ravel(), jj.ravel()
    me = idx[i, j]
    stencil = [
        (-1, 0, 1 / hr ** 2 - br[i] / (2 * hr)),
        (1, 0, 1 / hr ** 2 + br[i] / (2 * hr)),
        (0, -1, tan2[i] * (1 / hf ** 2 - bf[j] / (2 * hf))),
        (0, 1, tan2[i] * (1 / hf ** 2 + bf[j] / (2 * hf))),
        (0, 0, -2 / hr ** 2 - 2 * tan2[i] / hf ** 2),
    ]
    for di, dj, c in stencil:
        ni, nj = i + di, j + dj
        tgt = idx[ni, nj]
        inside = tgt >= 0
        rows.append(me[inside]); cols.append(tgt[inside]); vals.append(c[inside])
        brow.append(me[~inside]); bcol.append(ni[~inside] * nf + nj[~inside]); bval.append(c[~inside])
    N = ii.size
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
    B = sp.csr_matrix((np.concatenate(bval), (np.concatenate(brow), np.concatenate(bcol))),
                      shape=(N, nr * nf))
    return A, B


def _kernel_boundary(n, grid):
    R, F = np.meshgrid(grid.r_nodes, grid.fiber_nodes, indexing="ij")
    ring = np.zeros(R.shape, bool)
    ring[0, :] = ring[-1, :] = ring[:, 0] = ring[:, -1] = True
    fn = p_t_spectral if grid.which == "sphere" else h_t_spectral

    def values(t):
        out = np.zeros(R.shape)
        out[ring] = fn(n, t, R[ring], F[ring]).value
        return out

    return values


def evolve(params, grid, t0, dt, steps, which=None, boundary="kernel"):
    """Crank-Nicolson evolution of grid.values from t0 to t0 + steps*dt.

    ``boundary`` supplies the Dirichlet ring: "kernel" uses the closed-form
    kernel at each time level, "frozen" keeps the initial ring values, or
    pass a callable t -> full-grid array (only the ring is read).
    """
    n = as_n(params)
    if which is not None and which != grid.which:
        grid = replace(grid, which=which)
    if not dt > 0 or steps < 0:
        raise DomainError("need dt > 0 and steps >= 0")
    if max(grid.hr, grid.hf) > MAX_SPACING:
        raise GridTooCoarse(f"grid spacing {max(grid.hr, grid.hf):.3g} exceeds {MAX_SPACING}")
    if boundary == "kernel":
        bfun = _kernel_boundary(n, grid)
    elif boundary == "frozen":
        frozen = np.asarray(grid.values, float).copy()
        bfun = lambda t: frozen
    elif callable(boundary):
        bfun = boundary
    else:
        raise DomainError("boundary must be 'kernel', 'frozen' or a callable")
    A, B = _interior_system(n, grid)
    I = sp.identity(A.shape[0], format="csc")
    try:
        lu = splu((I - 0.5 * dt * A).tocsc())
    except RuntimeError as exc:
        raise LinearSolveFailure(str(exc)) from exc
    M = (I + 0.5 * dt * A).tocsr()
    v = np.asarray(grid.values, float).copy()
    u = v[1:-1, 1:-1].ravel()
    g_old = bfun(t0).ravel()
    for s in range(steps):
        t_new = t0 + (s + 1) * dt
        g_new = bfun(t_new).ravel()
        u = lu.solve(M @ u + 0.5 * dt * (B @ (g_old + g_new)))
        if not np.all(np.isfinite(u)):
            raise LinearSolveFailure(f"non-finite values at step {s + 1}")
        g_old = g_new
    out = g_old.reshape(v.shape).copy()
    out[1:-1, 1:-1] = u.reshape(v.shape[0] - 2, v.shape[1] - 2)
    return grid.with_values(out)


def eigenfunction(params, k, m, which="sphere"):
    """(f(R, F), eigenvalue) of the (k, m) mode of the chosen radial operator."""
    n = as_n(params)
    if which == "sphere":
        def f(R, F):
            return (chebyshev_u_all(m, np.cos(F))[-1] * np.cos(R) ** m
                    * jacobi_p_all(k, 2.0 * n - 1, m + 1.0, np.cos(2 * R))[-1])
        return f, -4.0 * (k * (k + 2 * n + m + 1) + n * m)
    if which == "cp":
        def f(R, F):
            return (jacobi_p_all(m, 0.0, 0.0, np.cos(2 * F))[-1] * np.cos(R) ** (2 * m)
                    * jacobi_p_all(k, 2.0 * n - 1, 2 * m + 1.0, np.cos(2 * R))[-1])
        return f, -(4.0 * k * (k + 2 * n + 2 * m + 1) + 8.0 * n * m)
    raise DomainError("which must be 'sphere' or 'cp'")


def _rayleigh(params, f, which, h):
    fhi = 2.6 if which == "sphere" else 1.3
    g = make_grid(0.3, 1.2, int(round(0.9 / h)) + 1, 0.4, fhi, int(round((fhi - 0.4) / h)) + 1, which, f)
    Lf = apply_operator(params, g).values[2:-2, 2:-2]
    fv = g.values[2:-2, 2:-2]
    return float(np.sum(Lf * fv) / np.sum(fv * fv))


def eigen_check(params, k, m, which="sphere", h=0.01):
    """(estimated, exact) eigenvalue of the (k, m) mode.

    The estimate is the least-squares ratio of L f to f over an interior
    window, Richardson-extrapolated from spacings h and h/2 (O(h^4)).
    """
    f, lam = eigenfunction(params, k, m, which)
    a = _rayleigh(params, f, which, h)
    b = _rayleigh(params, f, which, h / 2)
    return (4 * b - a) / 3, lam
