"""Born-series T-matrix for a single Gaussian scatterer, its regularised
kernels Psi_m^gamma, the on-shell gamma -> 0 extrapolation, and the collision
kernel / total cross section derived from it.

The order-m kernel (momentum representation, incoming q at energy |q|^2/2) is

    Psi_1^g(p, q) = (2 pi)^{-d} V^(p - q)

    Psi_m^g(p, q) = (2 pi)^{-dm} int V^(p - eta_{m-1}) ...
                      prod_{i=1}^{m-1} V^(eta_i - eta_{i-1}) /
                                       (g/2 - i(|eta_i|^2 - |q|^2)/2) d eta

and the series reads  T^g(p, q) = -i sum_{n>=1} (i lam)^n Psi_n^g(p, q).

For the Gaussian site V(u) = exp(-|u|^2/2), V^(xi) = (2 pi)^{d/2}
exp(-|xi|^2/2), the nested momentum integral collapses exactly (complex
Gaussian integration) to an (m-1)-dimensional integral over the time
variables of the underlying resolvent representation:

    Psi_m^g(p, q) = (2 pi)^{-d/2} e^{-(|p|^2+|q|^2)/2}
        int_{R_+^{m-1}} e^{-(g + i|q|^2) T/2} det(M(t))^{-d/2}
            exp( (a |q|^2 + b |p|^2 + 2 c <p,q>) / 2 ) dt,

    M(t) = L - i diag(t),  L = tridiag(-1, 2, -1),  T = sum t_i,
    a = (M^{-1})_{11},  b = (M^{-1})_{m-1,m-1},  c = (M^{-1})_{1,m-1}.

The contour t -> e^{-i theta} t (0 < theta < pi/2) is admissible -- the
integrand is analytic and decaying in that sector and the eigenvalues of M
never cross the negative real axis -- and turns the oscillatory tail into
exponential decay at rate ~ |q|^2 sin(theta), which is what makes small-gamma
evaluation cheap.  Checked in tests against direct momentum-space quadrature.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from numpy.polynomial.hermite_e import hermeval
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline

from .errors import (AccuracyError, DivergenceWarning, DomainError,
                     ExtrapolationError)

SPHERE_AREA = {1: 2.0, 2: 2 * np.pi, 3: 4 * np.pi}


# ---------------------------------------------------------------------------
# single-site data


@dataclass(frozen=True)
class SingleSiteSpectrum:
    """Fourier data of the (radial, Schwartz) single-site potential.

    Only the Gaussian site is implemented; `v_hat` takes |xi| and is even by
    radiality."""

    dim: int
    kind: str = "gaussian"

    def v_hat(self, xi_norm):
        if self.kind != "gaussian":
            raise DomainError(f"unsupported single-site kind {self.kind!r}")
        return (2 * np.pi) ** (self.dim / 2) * np.exp(-np.asarray(xi_norm) ** 2 / 2.0)

    def norm_1_inf(self, n: int) -> float:
        """The weighted norm max over L^1/L^inf of <xi>^n d^eps V^, |eps| <= n."""
        return _vhat_weighted_norm(self.dim, n)


def _multi_indices(dim: int, order: int):
    if dim == 1:
        return [(k,) for k in range(order + 1)]
    out = []
    if dim == 2:
        for i in range(order + 1):
            for j in range(order + 1 - i):
                out.append((i, j))
        return out
    for i in range(order + 1):
        for j in range(order + 1 - i):
            for k in range(order + 1 - i - j):
                out.append((i, j, k))
    return out


@lru_cache(maxsize=16)
def _vhat_weighted_norm(dim: int, n: int) -> float:
    # d^k e^{-u^2/2} = (-1)^k He_k(u) e^{-u^2/2}; scan a grid wide enough for
    # the <xi>^n weight against the Gaussian decay
    pts = {1: 4001, 2: 201, 3: 101}[dim]
    half = 9.0
    ax = np.linspace(-half, half, pts)
    cell = (ax[1] - ax[0]) ** dim
    grids = np.meshgrid(*([ax] * dim), indexing="ij", sparse=True)
    w2 = sum(g ** 2 for g in grids)
    weight = (1.0 + w2) ** (n / 2.0)
    gauss1d = np.exp(-ax ** 2 / 2.0)
    herm = {}
    for k in range(n + 1):
        coeffs = np.zeros(k + 1)
        coeffs[k] = 1.0
        herm[k] = hermeval(ax, coeffs) * gauss1d
    best_l1 = best_sup = 0.0
    for eps in _multi_indices(dim, n):
        f = np.ones(1)
        for a, k in enumerate(eps):
            shape = [1] * dim
            shape[a] = -1
            f = f * np.abs(herm[k]).reshape(shape)
        f = weight * f
        best_l1 = max(best_l1, float(f.sum() * cell))
        best_sup = max(best_sup, float(f.max()))
    return (2 * np.pi) ** (dim / 2) * max(best_l1, best_sup)


# ---------------------------------------------------------------------------
# Psi_m^gamma via the time representation


def _tridiag_L(size: int) -> np.ndarray:
    L = 2.0 * np.eye(size)
    for i in range(size - 1):
        L[i, i + 1] = L[i + 1, i] = -1.0
    return L


def _gl_nodes_01(n: int):
    x, w = leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _psi_time_integrand(site: SingleSiteSpectrum, m: int, p, q, gamma: float,
                        t_nodes: np.ndarray) -> np.ndarray:
    """Integrand over stacked time vectors t_nodes of shape (..., m-1)."""
    d = site.dim
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    size = m - 1
    L = _tridiag_L(size)
    M = L - 1j * t_nodes[..., None] * np.eye(size)
    # eigenvalues stay off the negative real axis (see module docstring)
    lam = np.linalg.eigvals(M)
    detpow = np.exp(-(d / 2.0) * np.sum(np.log(lam), axis=-1))
    Minv = np.linalg.inv(M)
    a = Minv[..., 0, 0]
    b = Minv[..., size - 1, size - 1]
    c = Minv[..., 0, size - 1]
    q2 = float(q @ q)
    p2 = float(p @ p)
    pq = float(p @ q)
    T = np.sum(t_nodes, axis=-1)
    expo = (-(gamma + 1j * q2) * T / 2.0
            + 0.5 * (a * q2 + b * p2 + 2.0 * c * pq)
            - 0.5 * (p2 + q2))
    return (2 * np.pi) ** (-d / 2.0) * detpow * np.exp(expo)


def _psi_time_quad(site, m, p, q, gamma, n_nodes, theta):
    """Tensor Gauss-Legendre over R_+^{m-1} on the rotated ray t = e^{-i theta} tau,
    tau = u/(1-u)."""
    size = m - 1
    u, w = _gl_nodes_01(n_nodes)
    tau = u / (1.0 - u)
    jac = w / (1.0 - u) ** 2
    rot = np.exp(-1j * theta)
    grids = np.meshgrid(*([tau] * size), indexing="ij")
    t_nodes = np.stack([g.ravel() for g in grids], axis=-1) * rot
    jacs = np.meshgrid(*([jac] * size), indexing="ij")
    wts = np.ones(t_nodes.shape[0])
    for jg in jacs:
        wts = wts * jg.ravel()
    vals = _psi_time_integrand(site, m, p, q, gamma, t_nodes)
    return complex(np.sum(vals * wts) * rot ** size)


# per-order tensor-quadrature defaults: nodes per time axis and target rtol
# (higher orders enter the series at higher powers of lambda, so their
# tolerance can be looser without moving the sum)
_PSI_NODES = {2: 96, 3: 40, 4: 20, 5: 12, 6: 8}
_PSI_RTOL = {2: 1e-7, 3: 1e-6, 4: 1e-4, 5: 1e-3, 6: 1e-3}


def psi_m_gamma(site: SingleSiteSpectrum, m: int, p, q, gamma: float,
                n_nodes: int | None = None, theta: float = 0.5,
                rtol: float | None = None, max_refine: int = 3,
                m_max: int = 6) -> complex:
    """Psi_m^gamma(p, q, infinity; V) for the Gaussian site.

    Refines the node count until two successive evaluations agree to rtol;
    raises AccuracyError if they never do."""
    if gamma < 0:
        raise DomainError("gamma must be >= 0 (0 only via extrapolation)")
    if m < 1:
        raise DomainError("m >= 1")
    if m > m_max:
        raise DomainError(f"m={m} above configured maximum {m_max}")
    d = site.dim
    p = np.atleast_1d(np.asarray(p, float))
    q = np.atleast_1d(np.asarray(q, float))
    if p.shape != (d,) or q.shape != (d,):
        raise DomainError("p, q must be d-vectors")
    if m == 1:
        return complex((2 * np.pi) ** (-d) * site.v_hat(np.linalg.norm(p - q)))
    n_nodes = n_nodes or _PSI_NODES[m]
    rtol = rtol or _PSI_RTOL[m]
    val = _psi_time_quad(site, m, p, q, gamma, n_nodes, theta)
    for _ in range(max_refine):
        n_nodes = int(np.ceil(n_nodes * 1.6))
        ref = _psi_time_quad(site, m, p, q, gamma, n_nodes, theta)
        if abs(ref - val) <= rtol * max(abs(ref), 1e-300):
            return ref
        val = ref
    raise AccuracyError(
        f"Psi_{m}^({gamma}) quadrature did not converge to rtol={rtol}")


def psi_2_momentum_oracle(site: SingleSiteSpectrum, p, q, gamma: float,
                          n_r: int = 160, n_mu: int = 80, n_phi: int = 48) -> complex:
    """Direct nested momentum quadrature of Psi_2^gamma (independent of the
    time representation; d = 1 or 3)."""
    d = site.dim
    p = np.atleast_1d(np.asarray(p, float))
    q = np.atleast_1d(np.asarray(q, float))
    qn = np.linalg.norm(q)

    def denom(eta2):
        return gamma / 2.0 - 0.5j * (eta2 - qn ** 2)

    if d == 1:
        from scipy.integrate import quad

        def f(eta, part):
            z = site.v_hat(abs(p[0] - eta)) * site.v_hat(abs(eta - q[0])) / denom(eta ** 2)
            return z.real if part == 0 else z.imag

        pieces = [-qn - 8, -qn - 0.5, -qn + 0.5, qn - 0.5, qn + 0.5, qn + 8]
        pieces = sorted(set(pieces))
        re = sum(quad(f, a, b, args=(0,), limit=200)[0] for a, b in zip(pieces, pieces[1:]))
        im = sum(quad(f, a, b, args=(1,), limit=200)[0] for a, b in zip(pieces, pieces[1:]))
        return (2 * np.pi) ** (-2 * d) * complex(re, im)

    if d != 3:
        raise DomainError("momentum oracle implemented for d in {1, 3}")
    # radial panels concentrated at the shell r = |q|
    w = max(0.25, 2 * gamma / max(qn, 0.5))
    edges = [0.0]
    if qn - w > 0:
        edges.append(qn - w)
    edges += [qn + w, qn + 9.0]
    xs, ws = leggauss(n_r)
    r_nodes, r_wts = [], []
    for a, b in zip(edges, edges[1:]):
        r_nodes.append(0.5 * (b - a) * xs + 0.5 * (a + b))
        r_wts.append(0.5 * (b - a) * ws)
    r = np.concatenate(r_nodes)
    wr = np.concatenate(r_wts)
    mu, wmu = leggauss(n_mu)
    phi = (np.arange(n_phi) + 0.5) * 2 * np.pi / n_phi
    wphi = 2 * np.pi / n_phi
    # q along z; p in the x-z plane
    pn = np.linalg.norm(p)
    if pn > 0 and qn > 0:
        cos_chi = float(p @ q) / (pn * qn)
    else:
        cos_chi = 1.0
    sin_chi = np.sqrt(max(0.0, 1 - cos_chi ** 2))
    R, MU, PHI = np.meshgrid(r, mu, phi, indexing="ij")
    eta_q = R * MU  # <eta, q^>
    eta_p = R * (cos_chi * MU + sin_chi * np.sqrt(1 - MU ** 2) * np.cos(PHI))
    d_eq = np.sqrt(np.maximum(R ** 2 + qn ** 2 - 2 * qn * eta_q, 0.0))
    d_ep = np.sqrt(np.maximum(R ** 2 + pn ** 2 - 2 * pn * eta_p, 0.0))
    integ = site.v_hat(d_ep) * site.v_hat(d_eq) / denom(R ** 2)
    wt = (wr[:, None, None] * wmu[None, :, None] * wphi) * R ** 2
    return (2 * np.pi) ** (-2 * d) * complex(np.sum(integ * wt))


# ---------------------------------------------------------------------------
# Born series and extrapolation


@dataclass
class BornTerms:
    value: complex
    terms: list
    last_term: float
    margin: float  # max tail term ratio; < 0.8 is the series regime


def tmatrix_born_terms(site: SingleSiteSpectrum, lam: float, p, q, gamma: float,
                       order: int, **quad_kw) -> BornTerms:
    terms = []
    for n in range(1, order + 1):
        psi = psi_m_gamma(site, n, p, q, gamma, **quad_kw)
        terms.append(-1j * (1j * lam) ** n * psi)
    mags = [abs(t) for t in terms]
    # the 1 -> 2 ratio is excluded: at large momentum transfer the first term
    # decays much faster in angle than the rest of the series, so that ratio
    # says nothing about the tail that actually controls convergence
    ratios = [mags[i + 1] / mags[i] for i in range(1, len(mags) - 1) if mags[i] > 0]
    if not ratios and len(mags) >= 2 and mags[0] > 0:
        ratios = [mags[1] / mags[0]]
    margin = max(ratios) if ratios else 0.0
    if margin >= 0.8:
        warnings.warn(f"Born margin {margin:.3f} >= 0.8: series regime violated",
                      DivergenceWarning)
    return BornTerms(value=sum(terms), terms=terms, last_term=mags[-1], margin=margin)


def tmatrix_born(site: SingleSiteSpectrum, lam: float, p, q, gamma: float,
                 order: int, **quad_kw) -> complex:
    """T^gamma(p,q) truncated at the given Born order."""
    return tmatrix_born_terms(site, lam, p, q, gamma, order, **quad_kw).value


def richardson_zero(xs: Sequence[float], vals: Sequence[complex]):
    """Neville polynomial extrapolation of vals(x) to x = 0.

    Returns (limit, error_estimate); xs must be strictly decreasing."""
    xs = list(map(float, xs))
    if len(xs) < 2:
        return complex(vals[0]), float("nan")
    if any(b >= a for a, b in zip(xs, xs[1:])):
        raise ExtrapolationError("extrapolation trace must be strictly decreasing")
    T = [list(map(complex, vals))]
    for j in range(1, len(xs)):
        prev = T[-1]
        row = []
        for i in range(len(xs) - j):
            num = xs[i + j] * prev[i] - xs[i] * prev[i + 1]
            row.append(num / (xs[i + j] - xs[i]))
        T.append(row)
    limit = T[-1][0]
    prev_diag = T[-2][0] if len(T) >= 2 else limit
    return limit, abs(limit - prev_diag)


def onshell_extrapolate(site: SingleSiteSpectrum, lam: float, speed: float,
                        cos_angle: float, gamma_seq: Sequence[float], order: int,
                        **quad_kw):
    """gamma -> 0 limit of the on-shell Born T-matrix at |p| = |q| = speed.

    Returns (T_hat, error_estimate)."""
    if len(gamma_seq) < 3:
        raise ExtrapolationError("need at least 3 gamma values")
    p, q = onshell_pair(site.dim, speed, cos_angle)
    vals = [tmatrix_born(site, lam, p, q, g, order, **quad_kw) for g in gamma_seq]
    return richardson_zero(gamma_seq, vals)


def onshell_pair(dim: int, speed: float, cos_angle: float):
    """Representative on-shell pair (p, q) with <p,q> = speed^2 cos_angle."""
    u = float(np.clip(cos_angle, -1.0, 1.0))
    if dim == 1:
        return np.array([np.sign(u) * speed if u != 0 else speed]), np.array([speed])
    s = np.sqrt(1 - u ** 2)
    if dim == 2:
        return speed * np.array([s, u]), speed * np.array([0.0, 1.0])
    return speed * np.array([s, 0.0, u]), speed * np.array([0.0, 0.0, 1.0])


# ---------------------------------------------------------------------------
# on-shell tables / collision kernel


@dataclass
class OnShellTable:
    dim: int
    lam: float
    speeds: np.ndarray
    angles: np.ndarray  # cos(theta), ascending
    values: np.ndarray  # complex, (n_speed, n_angle)
    errors: np.ndarray
    gamma_trace: tuple
    born_order: int

    def interpolator(self, speed: float) -> CubicSpline:
        i = int(np.searchsorted(self.speeds, speed))
        if not np.any(np.isclose(self.speeds, speed, rtol=1e-12)):
            raise DomainError(f"speed {speed} not tabulated; speeds={self.speeds}")
        i = int(np.argmin(np.abs(self.speeds - speed)))
        if self.dim == 1:
            raise DomainError("d=1 tables are two-point; no interpolation")
        return CubicSpline(self.angles, self.values[i])


def build_onshell_table(site: SingleSiteSpectrum, lam: float,
                        speeds: Sequence[float], gamma_seq: Sequence[float],
                        order: int, n_angles: int = 33, **quad_kw) -> OnShellTable:
    if site.dim == 1:
        angles = np.array([-1.0, 1.0])
    else:
        angles = np.linspace(-1.0, 1.0, n_angles)
    speeds = np.asarray(sorted(speeds), float)
    vals = np.empty((len(speeds), len(angles)), complex)
    errs = np.empty_like(vals, dtype=float)
    for i, s in enumerate(speeds):
        for j, u in enumerate(angles):
            vals[i, j], errs[i, j] = onshell_extrapolate(
                site, lam, s, u, gamma_seq, order, **quad_kw)
    return OnShellTable(dim=site.dim, lam=lam, speeds=speeds, angles=angles,
                        values=vals, errors=errs, gamma_trace=tuple(gamma_seq),
                        born_order=order)


@dataclass
class CollisionKernelData:
    """Collision data on the energy shells of an OnShellTable.

    sigma_angular(speed, u): the density (2 pi)^{d+1} rho |T^(su, s e_z)|^2
    against the measure s^{d-2} dsigma(omega) on the shell; its shell
    integral is sigma_tot(speed)."""

    table: OnShellTable
    rho: float
    _splines: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self):
        return self.table.dim

    def _spline(self, speed: float):
        key = float(speed)
        if key not in self._splines:
            i = np.argmin(np.abs(self.table.speeds - speed))
            if not np.isclose(self.table.speeds[i], speed, rtol=1e-9, atol=1e-12):
                raise DomainError(f"speed {speed} outside table {self.table.speeds}")
            tvals = self.table.values[i]
            dens = (2 * np.pi) ** (self.dim + 1) * self.rho * np.abs(tvals) ** 2
            if self.dim == 1:
                self._splines[key] = dict(zip(self.table.angles, dens))
            else:
                self._splines[key] = CubicSpline(self.table.angles, dens)
        return self._splines[key]

    def sigma_angular(self, speed: float, u):
        sp = self._spline(speed)
        if self.dim == 1:
            uu = np.atleast_1d(np.asarray(u, float))
            out = np.array([sp[1.0] if v >= 0 else sp[-1.0] for v in np.sign(uu)])
            return out if np.ndim(u) else float(out[0])
        return np.maximum(sp(np.clip(u, -1.0, 1.0)), 0.0)

    def sigma(self, p, q, shell_rtol: float = 1e-8):
        """Sigma(p, q) angular density; p and q must share a tabulated speed."""
        p = np.asarray(p, float)
        q = np.asarray(q, float)
        sp, sq = np.linalg.norm(p), np.linalg.norm(q)
        if abs(sp - sq) > shell_rtol * max(sq, 1e-30):
            raise DomainError("sigma is defined on the energy shell |p| = |q|")
        u = float(p @ q / (sp * sq)) if sp > 0 else 1.0
        return float(self.sigma_angular(sq, u))

    def sigma_tot(self, speed: float, n_quad: int = 96) -> float:
        d = self.dim
        if d == 1:
            sp = self._spline(speed)
            return float((sp[1.0] + sp[-1.0]) / speed)
        if d == 2:
            th, w = leggauss(n_quad)
            th = np.pi * (th + 1) / 2
            vals = self.sigma_angular(speed, np.cos(th))
            return float(2 * np.sum(vals * w) * np.pi / 2)
        u, w = leggauss(n_quad)
        return float(speed * 2 * np.pi * np.sum(self.sigma_angular(speed, u) * w))

    def mean_free_time(self, speed: float) -> float:
        st = self.sigma_tot(speed)
        return float("inf") if st == 0 else 1.0 / st


def collision_kernel(rho: float, table: OnShellTable) -> CollisionKernelData:
    if rho < 0:
        raise DomainError("rho must be >= 0")
    return CollisionKernelData(table=table, rho=rho)


def first_born_sigma_tot(lam: float, rho: float, speed: float, dim: int = 3) -> float:
    """Closed-form total rate from the first Born term, Gaussian site, d=3:
    (2 pi)^2 rho lam^2 (1 - exp(-4 s^2)) / (2 s)."""
    if dim != 3:
        raise DomainError("closed form recorded for d=3 only")
    return (2 * np.pi) ** 2 * rho * lam ** 2 * (1 - np.exp(-4 * speed ** 2)) / (2 * speed)


# ---------------------------------------------------------------------------
# optical theorem


@dataclass
class OpticalReport:
    speed: float
    lhs_order2: float  # Im T^(2)(q,q), gamma-extrapolated
    rhs_order2: float  # pi * shell integral of |T^(1)|^2
    residual_order2_rel: float
    lhs_full: float
    rhs_full: float
    residual_full_rel: float
    per_gamma_residuals: list


def _shell_integral_first_born(site: SingleSiteSpectrum, lam: float, speed: float,
                               n_quad: int = 256) -> float:
    """pi int delta(p^2/2 - q^2/2) |T^(1)(p,q)|^2 dp by direct quadrature."""
    d = site.dim
    if d == 1:
        vals = [abs(lam * (2 * np.pi) ** (-d) * site.v_hat(speed * np.sqrt(2 - 2 * u))) ** 2
                for u in (-1.0, 1.0)]
        return float(np.pi * sum(vals) / speed)
    u, w = leggauss(n_quad)
    chord = speed * np.sqrt(np.maximum(2 - 2 * u, 0.0))
    t1 = lam * (2 * np.pi) ** (-d) * site.v_hat(chord)
    if d == 2:
        # int over S^1: dsigma = dtheta; use u = cos(theta) twice the half circle
        th = np.pi * (u + 1) / 2
        chord = speed * np.sqrt(2 - 2 * np.cos(th))
        t1 = lam * (2 * np.pi) ** (-d) * site.v_hat(chord)
        return float(np.pi * 2 * np.sum(np.abs(t1) ** 2 * w) * np.pi / 2)
    return float(np.pi * speed * 2 * np.pi * np.sum(np.abs(t1) ** 2 * w))


def optical_residual(site: SingleSiteSpectrum, lam: float, speed: float,
                     gamma_seq: Sequence[float], order: int = 2,
                     n_shell: int = 64, **quad_kw) -> OpticalReport:
    """Optical-theorem residuals at |q| = speed.

    The order-matched identity Im T^(2)(q,q) = pi * shell |T^(1)|^2 is exact
    in the gamma -> 0 limit; both sides are computed by independent
    quadratures.  The full residual uses the order-`order` series on both
    sides."""
    if order < 2:
        raise DomainError("optical residual needs order >= 2")
    d = site.dim
    q = np.zeros(d)
    q[-1] = speed
    lam2_psi2 = []
    for g in gamma_seq:
        psi2 = psi_m_gamma(site, 2, q, q, g, **quad_kw)
        lam2_psi2.append(1j * lam ** 2 * psi2)  # the order-2 term -i(i lam)^2 Psi_2
    per_gamma = []
    rhs2 = _shell_integral_first_born(site, lam, speed)
    for g, t2 in zip(gamma_seq, lam2_psi2):
        per_gamma.append(abs(t2.imag - rhs2))
    t2_lim, _ = richardson_zero(gamma_seq, lam2_psi2)
    lhs2 = t2_lim.imag
    res2 = abs(lhs2 - rhs2) / max(abs(lhs2), 1e-300)

    # full residual at the requested order
    diag, _ = onshell_extrapolate(site, lam, speed, 1.0, gamma_seq, order, **quad_kw)
    lhs_full = diag.imag
    if d == 1:
        angles = np.array([-1.0, 1.0])
        wts = np.ones(2)
        pref = np.pi / speed
    else:
        u, w = leggauss(n_shell)
        angles, wts = u, w
        pref = np.pi * speed * 2 * np.pi if d == 3 else np.pi  # d=2 handled below
    tv = np.array([onshell_extrapolate(site, lam, speed, float(a), gamma_seq,
                                       order, **quad_kw)[0] for a in angles])
    if d == 2:
        th = np.pi * (angles + 1) / 2
        rhs_full = float(np.pi * 2 * np.sum(np.abs(tv) ** 2 * wts) * np.pi / 2)
    else:
        rhs_full = float(pref * np.sum(np.abs(tv) ** 2 * wts))
    res_full = abs(lhs_full - rhs_full) / max(abs(lhs_full), 1e-300)
    return OpticalReport(speed=speed, lhs_order2=lhs2, rhs_order2=rhs2,
                         residual_order2_rel=res2, lhs_full=lhs_full,
                         rhs_full=rhs_full, residual_full_rel=res_full,
                         per_gamma_residuals=per_gamma)


def born_margin(site: SingleSiteSpectrum, lam: float, speeds=(0.5, 1.0, 2.0),
                cos_angles=(-1.0, 0.0, 1.0), gamma: float = 0.05,
                order: int = 4, **quad_kw) -> float:
    """Empirical Born-convergence margin: the largest consecutive term ratio
    of the series over sampled on-shell pairs (the computable stand-in for
    the unavailable smallness constant of the coupling assumption)."""
    worst = 0.0
    for s in speeds:
        for uu in cos_angles:
            p, q = onshell_pair(site.dim, s, uu)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DivergenceWarning)
                bt = tmatrix_born_terms(site, lam, p, q, gamma, order, **quad_kw)
            worst = max(worst, bt.margin)
    return worst
