"""Semiclassical Fourier transform, exact Weyl pairings, Husimi densities and
the anti-Wick (coherent-state smoothed) pairing.

Conventions:
    F_h phi(p)  = int exp(-i<x,p>/h) phi(x) dx
    F_h^{-1}    = (2 pi h)^{-d} int exp(+i<x,p>/h) ... dp
    Op^W(a) psi(x) = (2 pi h)^{-d} int exp(i<x-y,p>/h) a((x+y)/2, p) psi(y) dy dp

The anti-Wick pairing smooths the Weyl symbol with the coherent-state window
(position variance h/8, momentum variance 2h per axis) and differs from the
exact Weyl pairing by O(h) for Schwartz symbols.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedError
from .grids import Grid
from .states import SemiclassicalState
from .symbols import PhaseSpaceSymbol, as_symbol

# coherent window: |win(u)|^2 = exp(-4u^2/h)  ->  sigma_x^2 = h/8
# spectral window: |win^(p)|^2 = exp(-p^2/(4h)) -> sigma_p^2 = 2h
_SIG_X = lambda hbar: np.sqrt(hbar / 8.0)
_SIG_P = lambda hbar: np.sqrt(2.0 * hbar)


def _index_phases(grid: Grid):
    """Per-axis (-1)^k for the half-box shift of the transform."""
    out = []
    for n in grid.npts:
        k = np.rint(np.fft.fftfreq(n) * n).astype(int)
        out.append(((-1.0) ** k).astype(complex))
    return out


def _apply_axis_vectors(field, vecs, op=np.multiply):
    out = field
    for ax, v in enumerate(vecs):
        shape = [1] * field.ndim
        shape[ax] = -1
        out = op(out, v.reshape(shape))
    return out


def sc_fourier(psi: SemiclassicalState) -> np.ndarray:
    """F_h psi sampled on grid.momentum_axes(h), FFT ordering."""
    g = psi.grid
    ft = np.fft.fftn(psi.amplitude) * g.cell_volume
    return _apply_axis_vectors(ft, _index_phases(g))


def sc_ifourier(field: np.ndarray, grid: Grid, hbar: float) -> np.ndarray:
    phases = _index_phases(grid)
    tmp = _apply_axis_vectors(np.asarray(field, complex), [1.0 / v for v in phases])
    return np.fft.ifftn(tmp) * (grid.size / grid.volume)


def momentum_multiplier_pair(g_of_p, psi: SemiclassicalState) -> float:
    """(2 pi h)^{-d} int g(p) |F_h psi|^2 dp  -- spectral oracle for a = a(p)."""
    grid = psi.grid
    ft = sc_fourier(psi)
    pm = grid.momentum_mesh(psi.hbar)
    dp = (2 * np.pi * psi.hbar) ** grid.dim / grid.volume  # lattice cell volume
    vals = g_of_p(pm)
    return float(np.real(np.sum(vals * np.abs(ft) ** 2) * dp / (2 * np.pi * psi.hbar) ** grid.dim))


# ---------------------------------------------------------------------------
# exact Weyl pairing (dim <= 2)


def _weyl_pair_complex(a: PhaseSpaceSymbol, psi: SemiclassicalState) -> complex:
    g = psi.grid
    if g.dim > 2:
        raise UnsupportedError("exact Weyl pairing is O(N^{2d}); use antiwick_pair at d=3")
    if a.separable_terms is None:
        raise DomainError("weyl_pair_exact needs separable_terms on the symbol")
    h = psi.hbar
    field = psi.amplitude
    pax = g.momentum_axes(h)

    total = 0.0 + 0.0j
    if g.dim == 1:
        x = g.axes[0]
        N = g.npts[0]
        mid = 0.5 * (x[:, None] + x[None, :])  # (m, n) midpoint
        rel = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
        pref = g.cell_volume ** 2 / g.volume
        for f, gp in a.separable_terms:
            G = np.fft.ifft(gp((pax[0],))) * N  # G[r] = sum_k g(p_k) e^{2 pi i r k/N}
            total += pref * np.einsum("m,n,mn->", np.conj(field), field,
                                      f((mid,)) * G[rel])
        return complex(total)

    # d = 2: loop over the first-axis row index m0 to bound memory
    x0, x1 = g.axes
    n0, n1 = g.npts
    G_cache = []
    pm = np.meshgrid(*pax, indexing="ij")
    for f, gp in a.separable_terms:
        Gfull = np.fft.ifft2(gp(tuple(pm))) * (n0 * n1)  # G[r0,r1] = sum_k g e^{2pi i r.k/N}
        G_cache.append((f, Gfull))
    pref = g.cell_volume ** 2 / g.volume
    rel1 = (np.arange(n1)[:, None] - np.arange(n1)[None, :]) % n1
    mid1 = 0.5 * (x1[:, None] + x1[None, :])
    for m0 in range(n0):
        r0 = (m0 - np.arange(n0)) % n0
        mid0 = 0.5 * (x0[m0] + x0)  # (n,)
        for f, Gfull in G_cache:
            fv = f((mid0[:, None, None], mid1[None, :, :]))  # (n, i, j)
            K = fv * Gfull[r0[:, None, None], rel1[None, :, :]]
            total += pref * np.einsum("i,nij,nj->", np.conj(field[m0]), K, field)
    return complex(total)


def weyl_pair_exact(a: PhaseSpaceSymbol, psi: SemiclassicalState) -> float:
    """<Op^W(a) psi, psi> by direct lattice quadrature of the midpoint kernel.

    Real within 1e-9 for real symbols (self-adjointness); the real part is
    returned."""
    return float(np.real(_weyl_pair_complex(a, psi)))


# ---------------------------------------------------------------------------
# coherent-state tiles / Husimi / anti-Wick


@dataclass
class PhaseSpaceTiles:
    """Per-axis tile centers for coherent-state sampling."""

    x_axes: tuple[np.ndarray, ...]
    p_axes: tuple[np.ndarray, ...]

    @property
    def dim(self):
        return len(self.x_axes)

    def cell(self) -> float:
        dx = np.prod([ax[1] - ax[0] for ax in self.x_axes])
        dp = np.prod([ax[1] - ax[0] for ax in self.p_axes])
        return float(dx * dp)


def default_tiles(psi: SemiclassicalState, x_step_frac=0.75, p_step_frac=0.75,
                  pad_sigmas=4.0, support_tol=1e-12) -> PhaseSpaceTiles:
    """Tile lattice covering the state's position and spectral support, padded
    by `pad_sigmas` coherent window widths."""
    g = psi.grid
    h = psi.hbar
    sx, sp = _SIG_X(h), _SIG_P(h)
    dens = np.abs(psi.amplitude) ** 2
    ft = np.abs(sc_fourier(psi)) ** 2
    x_axes, p_axes = [], []
    for ax in range(g.dim):
        marg = dens.sum(axis=tuple(i for i in range(g.dim) if i != ax))
        nz = np.nonzero(marg > support_tol * marg.max())[0]
        lo = g.axes[ax][nz[0]] - pad_sigmas * sx
        hi = g.axes[ax][nz[-1]] + pad_sigmas * sx
        n = max(8, int(np.ceil((hi - lo) / (x_step_frac * sx))) + 1)
        x_axes.append(np.linspace(lo, hi, n))
        pmarg = ft.sum(axis=tuple(i for i in range(g.dim) if i != ax))
        pax = np.fft.fftshift(g.momentum_axes(h)[ax])
        pmarg = np.fft.fftshift(pmarg)
        nz = np.nonzero(pmarg > support_tol * pmarg.max())[0]
        lo = pax[nz[0]] - pad_sigmas * sp
        hi = pax[nz[-1]] + pad_sigmas * sp
        n = max(8, int(np.ceil((hi - lo) / (p_step_frac * sp))) + 1)
        p_axes.append(np.linspace(lo, hi, n))
    return PhaseSpaceTiles(tuple(x_axes), tuple(p_axes))


def _axis_overlap_matrix(grid: Grid, hbar: float, ax: int,
                         xt: np.ndarray, pt: np.ndarray) -> np.ndarray:
    """1D coherent overlaps: A[(ix,ip), j] = dy * conj(coh_{x,p})(y_j)."""
    y = grid.axes[ax]
    dy = grid.spacing[ax]
    c1 = 2 ** 0.5 * (np.pi * hbar) ** (-0.25)
    u = y[None, :] - xt[:, None]  # (nx, N)
    env = c1 * np.exp(-2.0 * u ** 2 / hbar) * dy
    osc = np.exp(-1j * np.einsum("p,xj->pxj", pt, u) / hbar)  # (np, nx, N)
    A = osc * env[None, :, :]
    return A.reshape(len(pt) * len(xt), len(y))  # row index = ip*nx + ix


def husimi(psi: SemiclassicalState, tiles: PhaseSpaceTiles | None = None):
    """H_psi(x,p) = (2 pi h)^{-d} |<coh_{x,p}, psi>|^2 on a tile lattice.

    Returns (tiles, H) with H indexed [x1,..,xd,p1,..,pd].  Nonnegative by
    construction; integrates to ||psi||^2. Practical for d <= 2."""
    g = psi.grid
    if g.dim > 2:
        raise UnsupportedError("dense Husimi grids are d<=2; use antiwick_pair at d=3")
    tiles = tiles or default_tiles(psi)
    h = psi.hbar
    V = psi.amplitude
    for ax in range(g.dim):
        A = _axis_overlap_matrix(g, h, ax, tiles.x_axes[ax], tiles.p_axes[ax])
        V = np.tensordot(A, V, axes=([1], [0]))
        V = np.moveaxis(V, 0, g.dim - 1)  # processed axes go to the back
    # V now indexed [(p1 x1), .., (pd xd)]; split and reorder to [x.., p..]
    shp = []
    for ax in range(g.dim):
        shp.extend([len(tiles.p_axes[ax]), len(tiles.x_axes[ax])])
    V = V.reshape(shp)
    perm = [2 * a + 1 for a in range(g.dim)] + [2 * a for a in range(g.dim)]
    V = np.transpose(V, perm)
    H = np.abs(V) ** 2 / (2 * np.pi * h) ** g.dim
    return tiles, H


def husimi_mass(tiles: PhaseSpaceTiles, H: np.ndarray) -> float:
    return float(H.sum() * tiles.cell())


def antiwick_pair(a: PhaseSpaceSymbol | object, psi: SemiclassicalState,
                  tiles: PhaseSpaceTiles | None = None) -> float:
    """int a(x,p) H_psi(x,p) dx dp.

    With per-axis factorable symbols this contracts one small matrix per axis
    and runs at any d; otherwise it evaluates the dense Husimi grid (d <= 2).
    """
    a = as_symbol(a, psi.dim)
    g = psi.grid
    h = psi.hbar
    tiles = tiles or default_tiles(psi)

    if a.axis_factors is not None:
        total = 0.0
        for term in a.axis_factors:
            phi = psi.amplitude
            for ax, (f, gp) in enumerate(term):
                xt, pt = tiles.x_axes[ax], tiles.p_axes[ax]
                A = _axis_overlap_matrix(g, h, ax, xt, pt)
                dxdp = (xt[1] - xt[0]) * (pt[1] - pt[0]) / (2 * np.pi * h)
                w = (gp(pt)[:, None] * f(xt)[None, :]).reshape(-1) * dxdp
                B = (A.conj().T * w) @ A  # N x N, absorbs this axis' tile sum
                phi = np.tensordot(B, phi, axes=([1], [0]))
                phi = np.moveaxis(phi, 0, g.dim - 1)
            total += float(np.real(np.vdot(psi.amplitude, phi)))
        return total
    tiles2, H = husimi(psi, tiles)
    xm = np.meshgrid(*tiles2.x_axes, indexing="ij", sparse=True)
    pm = np.meshgrid(*tiles2.p_axes, indexing="ij", sparse=True)
    dim = g.dim
    xs = tuple(v.reshape(v.shape + (1,) * dim) for v in xm)
    ps = tuple(v.reshape((1,) * dim + v.shape) for v in pm)
    vals = a(xs, ps)
    return float(np.sum(vals * H) * tiles2.cell())
