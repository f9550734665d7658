"""Phase-space symbols a(x, p) and the standard Gaussian test observables.

Calling convention everywhere in the package: the evaluator receives two
d-tuples of broadcastable arrays, a((x1,..,xd), (p1,..,pd)) -> array.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError


@dataclass
class PhaseSpaceSymbol:
    """Observable a(x,p).

    separable_terms: optional [(f_j, g_j)] with a = sum_j f_j(x) g_j(p)
        (each f_j/g_j takes a d-tuple of arrays) -- required by the exact
        Weyl pairing.
    axis_factors: optional [[(f_a, g_a) for axis a]] with
        a = sum_j prod_a f_{ja}(x_a) g_{ja}(p_a) -- enables the fast
        anti-Wick path at d=3.
    schwartz: decay flag; quadratures assume rapid decay when set.
    """

    evaluator: Callable
    dim: int
    separable_terms: Optional[Sequence] = None
    axis_factors: Optional[Sequence] = None
    schwartz: bool = True
    meta: dict = field(default_factory=dict)

    def __call__(self, x, p):
        return self.evaluator(x, p)

    def check_separable(self, rng=None, n=64, tol=1e-10) -> float:
        """Max |evaluator - sum separable_terms| over random sample points."""
        if self.separable_terms is None:
            raise DomainError("symbol has no separable_terms")
        rng = np.random.default_rng(0) if rng is None else rng
        x = tuple(rng.uniform(-2, 2, n) for _ in range(self.dim))
        p = tuple(rng.uniform(-2, 2, n) for _ in range(self.dim))
        direct = self.evaluator(x, p)
        s = sum(f(x) * g(p) for f, g in self.separable_terms)
        err = float(np.max(np.abs(direct - s)))
        if err > tol:
            raise DomainError(f"separable_terms mismatch {err:.2e} > {tol:g}")
        return err


def gaussian_symbol(dim: int, x_center=0.0, p_center=0.0,
                    x_width=1.0, p_width=1.0) -> PhaseSpaceSymbol:
    """a(x,p) = exp(-|x-xc|^2/2sx^2) exp(-|p-pc|^2/2sp^2), per-axis widths allowed."""
    xc = np.broadcast_to(np.asarray(x_center, float), (dim,)).copy()
    pc = np.broadcast_to(np.asarray(p_center, float), (dim,)).copy()
    sx = np.broadcast_to(np.asarray(x_width, float), (dim,)).copy()
    sp = np.broadcast_to(np.asarray(p_width, float), (dim,)).copy()

    def fx(x):
        return np.exp(-0.5 * sum(((x[a] - xc[a]) / sx[a]) ** 2 for a in range(dim)))

    def gp(p):
        return np.exp(-0.5 * sum(((p[a] - pc[a]) / sp[a]) ** 2 for a in range(dim)))

    def ev(x, p):
        return fx(x) * gp(p)

    def axis_pair(a):
        def f(u, a=a):
            return np.exp(-0.5 * ((u - xc[a]) / sx[a]) ** 2)

        def g(v, a=a):
            return np.exp(-0.5 * ((v - pc[a]) / sp[a]) ** 2)

        return (f, g)

    return PhaseSpaceSymbol(
        evaluator=ev, dim=dim, separable_terms=[(fx, gp)],
        axis_factors=[[axis_pair(a) for a in range(dim)]], schwartz=True,
        meta={"kind": "gaussian", "x_center": tuple(xc), "p_center": tuple(pc),
              "x_width": tuple(sx), "p_width": tuple(sp)})


def momentum_symbol(dim: int, g: Callable) -> PhaseSpaceSymbol:
    """a(x,p) = g(p) only (not Schwartz in x; fine for spectral pairings)."""

    def ev(x, p):
        return g(p)

    def one(x):
        return np.ones(np.broadcast_shapes(*(np.shape(xi) for xi in x)))

    return PhaseSpaceSymbol(evaluator=ev, dim=dim, separable_terms=[(one, g)],
                            schwartz=False, meta={"kind": "momentum"})


def constant_symbol(dim: int, value: float = 1.0) -> PhaseSpaceSymbol:
    def ev(x, p):
        shape = np.broadcast_shapes(*(np.shape(u) for u in (*x, *p)))
        return np.full(shape, value)

    def f(x):
        return np.full(np.broadcast_shapes(*(np.shape(u) for u in x)), value)

    def g(p):
        return np.ones(np.broadcast_shapes(*(np.shape(u) for u in p)))

    def axis_pair(a):
        fa = (lambda u: np.full(np.shape(u), value)) if a == 0 else (lambda u: np.ones(np.shape(u)))
        return (fa, lambda v: np.ones(np.shape(v)))

    return PhaseSpaceSymbol(evaluator=ev, dim=dim, separable_terms=[(f, g)],
                            axis_factors=[[axis_pair(a) for a in range(dim)]],
                            schwartz=False, meta={"kind": "constant", "value": value})


def as_symbol(a, dim: int) -> PhaseSpaceSymbol:
    if isinstance(a, PhaseSpaceSymbol):
        return a
    return PhaseSpaceSymbol(evaluator=a, dim=dim)
