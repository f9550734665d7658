"""Semiclassical state families, their limiting phase-space measures, and
profile utilities (mollification, semiclassical Sobolev seminorms).

The four named families on a d-torus grid:

    lagrangian_momentum   w(x) exp(i<x,p0>/hbar)
    lagrangian_position   hbar^{-d/2} w((x-x0)/hbar)
    wkb                   w(x) exp(i S(x)/hbar)
    coherent              N exp(i<x-x0, p0>/hbar) exp(-2|x-x0|^2/hbar)

The coherent-state Gaussian width is the non-standard one above (variance
hbar/8 in position); N = 2^{d/2} (pi*hbar)^{-d/4} normalises it to unit
L^2 mass, which the limit-measure bookkeeping requires.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, ResolutionError, UnsupportedError
from .grids import Grid

FAMILIES = ("lagrangian_momentum", "lagrangian_position", "wkb", "coherent", "custom")


# ---------------------------------------------------------------------------
# profiles


@dataclass
class ProfileFunction:
    """Amplitude profile w: gridded samples plus (optionally) the analytic rule
    that generated them, so it can be re-sampled at other scales."""

    grid: Grid
    values: np.ndarray
    analytic: Optional[Callable[..., np.ndarray]] = None  # analytic(x0, x1, ...) -> values
    tag: str = "custom"  # gaussian | bump | custom
    smoothness_class: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.npts:
            raise DomainError("profile values do not match the grid shape")

    @property
    def dim(self) -> int:
        return self.grid.dim

    def l2_norm(self) -> float:
        return self.grid.l2_norm(self.values)

    def __call__(self, *coords: np.ndarray) -> np.ndarray:
        if self.analytic is None:
            raise UnsupportedError("profile has no analytic rule to evaluate off-grid")
        return self.analytic(*coords)


def gaussian_profile(grid: Grid, center=None, width=1.0) -> ProfileFunction:
    """w(x) = exp(-|x-c|^2 / (2 width^2)), anisotropic widths allowed."""
    dim = grid.dim
    c = np.zeros(dim) if center is None else np.broadcast_to(np.asarray(center, float), (dim,))
    w = np.broadcast_to(np.asarray(width, float), (dim,))

    def rule(*coords):
        u = sum(((coords[a] - c[a]) / w[a]) ** 2 for a in range(dim))
        return np.exp(-0.5 * u).astype(complex)

    vals = rule(*grid.mesh())
    return ProfileFunction(grid, vals, analytic=rule, tag="gaussian", smoothness_class=99)


@lru_cache(maxsize=8)
def _bump_norm_const(dim: int) -> float:
    # \int_{|x|<1} exp(-1/(1-|x|^2)) dx via radial quadrature
    from scipy.integrate import quad

    surf = {1: 2.0, 2: 2 * np.pi, 3: 4 * np.pi}[dim]
    val, _ = quad(lambda r: np.exp(-1.0 / (1 - r * r)) * r ** (dim - 1), 0, 1)
    return surf * val


def bump_profile(grid: Grid, center=None, radius=1.0, normalized=False) -> ProfileFunction:
    """Standard compactly supported bump exp(-1/(1-|u|^2)) on |u| < 1.

    With normalized=True it integrates to one (a mollifier kernel)."""
    dim = grid.dim
    c = np.zeros(dim) if center is None else np.broadcast_to(np.asarray(center, float), (dim,))
    r0 = float(radius)
    amp = 1.0 / (_bump_norm_const(dim) * r0**dim) if normalized else 1.0

    def rule(*coords):
        u2 = sum(((coords[a] - c[a]) / r0) ** 2 for a in range(dim))
        out = np.zeros(np.broadcast_shapes(*(np.shape(x) for x in coords)), dtype=complex)
        inside = u2 < 1.0
        out[inside] = amp * np.exp(-1.0 / (1.0 - u2[inside]))
        return out

    vals = rule(*grid.mesh())
    return ProfileFunction(grid, vals, analytic=rule, tag="bump", smoothness_class=99)


def grid_profile(grid: Grid, values: np.ndarray, smoothness_class: int = 0) -> ProfileFunction:
    return ProfileFunction(grid, values, analytic=None, tag="custom",
                           smoothness_class=smoothness_class)


def mollify_profile(w: ProfileFunction, eps: float) -> ProfileFunction:
    """Convolve w with the rescaled standard bump, psi_eps = eps^{-d} psi(./eps).

    Spectral (periodic) convolution; the sampled kernel is renormalised to unit
    discrete mass so the map is an L^2 contraction for every eps."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    g = w.grid
    if eps < max(g.spacing):
        raise ResolutionError(
            f"mollifier width {eps} below grid spacing {max(g.spacing)}")
    kern = bump_profile(g, center=None, radius=eps, normalized=True).values.real
    kern = kern / (kern.sum() * g.cell_volume)  # discrete unit mass
    # bump_profile centers the kernel at x=0 (index n/2 per axis); roll to index 0
    shift = tuple(-int(np.searchsorted(ax, 0.0)) for ax in g.axes)
    kf = np.fft.fftn(np.roll(kern, shift, axis=tuple(range(g.dim))))
    out = np.fft.ifftn(np.fft.fftn(w.values) * kf) * g.cell_volume
    return ProfileFunction(g, out, analytic=None, tag=w.tag,
                           smoothness_class=max(w.smoothness_class, 99))


# ---------------------------------------------------------------------------
# states


@dataclass
class SemiclassicalState:
    hbar: float
    grid: Grid
    amplitude: np.ndarray
    family: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.hbar <= 0:
            raise DomainError("hbar must be positive")
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")
        self.amplitude = np.asarray(self.amplitude, dtype=complex)
        if self.amplitude.shape != self.grid.npts:
            raise DomainError("amplitude does not match the grid shape")

    @property
    def dim(self) -> int:
        return self.grid.dim

    def l2_norm(self) -> float:
        return self.grid.l2_norm(self.amplitude)

    def boundary_mass(self, cells: int = 2) -> float:
        return self.grid.boundary_mass(self.amplitude, cells)


def _check_resolution(grid: Grid, hbar: float, p_scale: float):
    # the phase exp(i p x / hbar) must be sampled at >= 4 points per 2*pi*hbar/p
    limit = hbar / (4.0 * max(p_scale, 1e-30))
    if max(grid.spacing) > limit:
        raise ResolutionError(
            f"grid spacing {max(grid.spacing):.4g} exceeds hbar/(4 p_scale) = {limit:.4g}")


def make_state(family: str, profile: Optional[ProfileFunction], params: dict,
               hbar: float, grid: Grid, p_scale: Optional[float] = None) -> SemiclassicalState:
    """Sample one of the named families on `grid`.

    params: x0/p0 vectors for the translated families; for wkb a callable
    phase `S` and its exact gradient `grad_S` (no numerical differentiation).
    `p_scale` overrides the resolution estimate |p0| + 1.
    """
    if family not in FAMILIES:
        raise DomainError(f"unknown family {family!r}")
    dim = grid.dim
    x = grid.mesh()
    p0 = np.broadcast_to(np.asarray(params.get("p0", np.zeros(dim)), float), (dim,))
    x0 = np.broadcast_to(np.asarray(params.get("x0", np.zeros(dim)), float), (dim,))

    if p_scale is None:
        p_scale = float(np.linalg.norm(p0)) + 1.0
        if family == "wkb":
            gS = params["grad_S"](*x)
            p_scale = float(max(np.max(np.abs(np.asarray(g))) for g in gS)) + 1.0
    _check_resolution(grid, hbar, p_scale)

    if family == "lagrangian_momentum":
        phase = sum(x[a] * p0[a] for a in range(dim)) / hbar
        amp = profile.values * np.exp(1j * phase)
    elif family == "lagrangian_position":
        if profile.analytic is None:
            raise UnsupportedError("lagrangian_position needs an analytic profile "
                                   "(it is resampled at scale hbar)")
        scaled = tuple((x[a] - x0[a]) / hbar for a in range(dim))
        amp = hbar ** (-dim / 2) * profile.analytic(*scaled)
    elif family == "wkb":
        S = params["S"](*x)
        amp = profile.values * np.exp(1j * S / hbar)
    elif family == "coherent":
        # printed width exp(-2|x-x0|^2/hbar); prefactor fixed to give unit mass
        norm = 2 ** (dim / 2) * (np.pi * hbar) ** (-dim / 4)
        u2 = sum((x[a] - x0[a]) ** 2 for a in range(dim))
        phase = sum((x[a] - x0[a]) * p0[a] for a in range(dim)) / hbar
        amp = norm * np.exp(1j * phase - 2.0 * u2 / hbar)
    elif family == "custom":
        amp = np.asarray(params["amplitude"], complex)
    st = SemiclassicalState(hbar=hbar, grid=grid, amplitude=np.ascontiguousarray(
        np.broadcast_to(amp, grid.npts)), family=family,
        params={"x0": tuple(x0), "p0": tuple(p0)})
    return st


# ---------------------------------------------------------------------------
# Wigner measures

MEASURE_KINDS = ("density_times_momentum_delta", "position_delta_times_density",
                 "wkb_graph", "point_mass", "grid_density")


@dataclass
class WignerMeasure:
    """Limiting phase-space measure of a semiclassical family.

    kind/payload:
      point_mass                      {x0, p0, mass}
      density_times_momentum_delta    {grid, density, p0}          |w(x)|^2 dx x delta_{p0}
      position_delta_times_density    {x0, p_grid, density}        delta_{x0} x density(p) dp
      wkb_graph                       {grid, density, grad_S}      |w(x)|^2 dx on p = grad S(x)
      grid_density                    {x_grid, p_grid, density}    plain phase-space density
    """

    kind: str
    payload: dict

    def __post_init__(self):
        if self.kind not in MEASURE_KINDS:
            raise DomainError(f"unknown measure kind {self.kind!r}")
        for key in ("density",):
            if key in self.payload:
                d = np.asarray(self.payload[key])
                if np.any(d < -1e-12):
                    raise DomainError("measure density must be nonnegative")

    def mass(self) -> float:
        k, pl = self.kind, self.payload
        if k == "point_mass":
            return float(pl.get("mass", 1.0))
        if k in ("density_times_momentum_delta", "wkb_graph"):
            g: Grid = pl["grid"]
            return float(np.sum(pl["density"]) * g.cell_volume)
        if k == "position_delta_times_density":
            dp = float(np.prod([ax[1] - ax[0] for ax in pl["p_axes"]]))
            return float(np.sum(pl["density"]) * dp)
        g: Grid = pl["x_grid"]
        dp = float(np.prod([ax[1] - ax[0] for ax in pl["p_axes"]]))
        return float(np.sum(pl["density"]) * g.cell_volume * dp)


def limiting_measure(family: str, profile: Optional[ProfileFunction],
                     params: dict) -> WignerMeasure:
    """The measure in the family table; custom families must supply their own."""
    if family == "custom":
        raise UnsupportedError("custom family: supply a grid_density measure yourself")
    dim = profile.dim if profile is not None else len(np.atleast_1d(params.get("x0", [0.0])))
    p0 = tuple(np.broadcast_to(np.asarray(params.get("p0", np.zeros(dim)), float), (dim,)))
    x0 = tuple(np.broadcast_to(np.asarray(params.get("x0", np.zeros(dim)), float), (dim,)))

    if family == "coherent":
        return WignerMeasure("point_mass", {"x0": x0, "p0": p0, "mass": 1.0})
    if family == "lagrangian_momentum":
        return WignerMeasure("density_times_momentum_delta",
                             {"grid": profile.grid,
                              "density": np.abs(profile.values) ** 2, "p0": p0})
    if family == "wkb":
        return WignerMeasure("wkb_graph",
                             {"grid": profile.grid,
                              "density": np.abs(profile.values) ** 2,
                              "grad_S": params["grad_S"]})
    if family == "lagrangian_position":
        # momentum density (2 pi)^{-d} |w^(p)|^2 on the unit-scale spectral lattice;
        # the 2 pi power makes the mass equal ||w||^2
        g = profile.grid
        what = np.fft.fftn(profile.values) * g.cell_volume
        phases = [np.exp(1j * (2 * np.pi * np.fft.fftfreq(n, d=L / n)) * (L / 2))
                  for L, n in zip(g.box, g.npts)]
        for a, ph in enumerate(phases):
            shape = [1] * g.dim
            shape[a] = -1
            what = what * ph.reshape(shape)
        p_axes = tuple(np.fft.fftshift(2 * np.pi * np.fft.fftfreq(n, d=L / n))
                       for L, n in zip(g.box, g.npts))
        dens = np.fft.fftshift(np.abs(what) ** 2) / (2 * np.pi) ** g.dim
        return WignerMeasure("position_delta_times_density",
                             {"x0": x0, "p_axes": p_axes, "density": dens})
    raise DomainError(f"unknown family {family!r}")


def integrate_symbol(mu: WignerMeasure, a: Callable, with_error: bool = False):
    """Pair a phase-space symbol a(x, p) with the measure: \\int a d mu.

    The symbol is called as a(x_tuple, p_tuple) with broadcastable arrays.
    with_error=True returns (value, coarse-grid error estimate)."""
    k, pl = mu.kind, mu.payload

    def _done(v_full, v_coarse):
        if with_error:
            return v_full, abs(v_full - v_coarse)
        return v_full

    if k == "point_mass":
        v = float(a(pl["x0"], pl["p0"])) * pl.get("mass", 1.0)
        return _done(v, v)

    if k in ("density_times_momentum_delta", "wkb_graph"):
        g: Grid = pl["grid"]
        x = g.mesh()
        if k == "density_times_momentum_delta":
            vals = a(x, tuple(pl["p0"][i] for i in range(g.dim)))
        else:
            gradS = pl["grad_S"](*x)
            vals = a(x, tuple(np.broadcast_to(gi, g.npts) for gi in gradS))
        w = pl["density"] * np.broadcast_to(vals, g.npts)
        full = float(np.sum(w) * g.cell_volume)
        coarse = float(np.sum(w[(slice(None, None, 2),) * g.dim]) * g.cell_volume * 2 ** g.dim)
        return _done(full, coarse)

    if k == "position_delta_times_density":
        axes = pl["p_axes"]
        dim = len(axes)
        pm = np.meshgrid(*axes, indexing="ij", sparse=True)
        vals = a(tuple(pl["x0"][i] for i in range(dim)), pm)
        dp = float(np.prod([ax[1] - ax[0] for ax in axes]))
        w = pl["density"] * np.broadcast_to(vals, pl["density"].shape)
        full = float(np.sum(w) * dp)
        coarse = float(np.sum(w[(slice(None, None, 2),) * dim]) * dp * 2 ** dim)
        return _done(full, coarse)

    # grid_density
    g: Grid = pl["x_grid"]
    axes = pl["p_axes"]
    xm = g.mesh()
    pm = np.meshgrid(*axes, indexing="ij", sparse=True)
    dim = g.dim
    xs = tuple(xm[i].reshape(xm[i].shape + (1,) * dim) for i in range(dim))
    ps = tuple(pm[i].reshape((1,) * dim + pm[i].shape) for i in range(dim))
    vals = a(xs, ps)
    dp = float(np.prod([ax[1] - ax[0] for ax in axes]))
    w = pl["density"] * np.broadcast_to(vals, pl["density"].shape)
    full = float(np.sum(w) * g.cell_volume * dp)
    coarse = float(np.sum(w[(slice(None, None, 2),) * (2 * dim)]) * g.cell_volume * dp * 4 ** dim)
    return _done(full, coarse)


# ---------------------------------------------------------------------------
# semiclassical Sobolev seminorms


def _multi_indices(dim: int, order: int):
    if dim == 1:
        for k in range(order + 1):
            yield (k,)
    elif dim == 2:
        for i in range(order + 1):
            for j in range(order + 1 - i):
                yield (i, j)
    else:
        for i in range(order + 1):
            for j in range(order + 1 - i):
                for k in range(order + 1 - i - j):
                    yield (i, j, k)


def sobolev_seminorm(psi: SemiclassicalState, n: int,
                     aliasing_threshold: float = 1e-8) -> float:
    """max over |alpha| <= n of || (-i hbar d/dx)^alpha psi ||_{L^2}, spectrally.

    Warns if the outer octave of the spectrum carries more than
    `aliasing_threshold` of the total mass (derivatives then alias)."""
    if n < 0:
        raise DomainError("n must be >= 0")
    g = psi.grid
    ft = np.fft.fftn(psi.amplitude)
    power = np.abs(ft) ** 2
    total = power.sum()
    if total > 0:
        outer = np.zeros(g.npts, dtype=bool)
        for ax, npt in enumerate(g.npts):
            k = np.abs(np.fft.fftfreq(npt) * npt)
            hi_axis = k > npt // 2 * 0.75
            sl = [np.newaxis] * g.dim
            sl[ax] = slice(None)
            outer |= hi_axis[tuple(sl)]
        hi = power[outer].sum() if outer.any() else 0.0
        if hi / total > aliasing_threshold:
            warnings.warn("high-frequency mass %.2e exceeds threshold; "
                          "seminorm may alias" % (hi / total), RuntimeWarning)
    pax = g.momentum_axes(psi.hbar)
    cell_p = g.cell_volume / g.size  # |FFT|^2 normalisation: ||f||^2 = dv/N * sum|ft|^2
    best = 0.0
    for alpha in _multi_indices(g.dim, n):
        mult = np.ones((), dtype=float)
        w = power
        for ax, k in enumerate(alpha):
            if k:
                shape = [1] * g.dim
                shape[ax] = -1
                w = w * (pax[ax] ** (2 * k)).reshape(shape)
        val = np.sqrt(np.sum(w) * cell_p)
        best = max(best, float(val))
    return best
