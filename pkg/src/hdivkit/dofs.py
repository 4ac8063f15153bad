"""Degree-of-freedom functionals for the reference element spaces.

Three kinds of moments:

    edge_moment      int_F (w . n) q(t) dt     q in P_k of the edge parameter
    interior_moment  int_K w_c q               vector tests (q,0) / (0,q)
    div_moment       int_K (div w) q           ABF only, q = x^i y^{k+1} or
                                               x^{k+1} y^j with i, j <= k

Ordering is deterministic: edges left, right, bottom, top with test
degree ascending, then interior moments (component 0 before 1, tests in
lexicographic (i, j) order), then divergence moments.  Edge and interior
tests are shifted-Legendre (same spans as the defining monomial test
spaces, far better conditioning); divergence tests are the exact
monomials, which the commuting property needs verbatim.

All quadrature in this module runs in extended precision: the DOF
matrices reach condition 1e6 at k = 4 and the projection property at
1e-12 leaves no budget for double-rounded right-hand sides.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import legendre
from .elements import ElementFamily, ElementSpace, _as_family, _validate_degree, space_dimension
from .poly import Polynomial2D, VectorPoly2D
from .quadrature import NONPOLY_POINTS, gauss_legendre_01, n_for_degree, tensor_rule

EDGE_ORDER = ("left", "right", "bottom", "top")

# outward normals: left (-1,0), right (1,0), bottom (0,-1), top (0,1)
_EDGE_SIGN = {"left": -1, "right": 1, "bottom": -1, "top": 1}
_EDGE_COMPONENT = {"left": 0, "right": 0, "bottom": 1, "top": 1}


@dataclass(frozen=True, eq=False)
class DofFunctional:
    kind: str
    test: Polynomial2D
    edge: Optional[str] = None
    normal_sign: int = 0
    component: Optional[int] = None
    # stable-evaluation hint: ("t", n) edge Legendre, ("xy", i, j) product
    leg: Optional[tuple] = None

    def describe(self) -> str:
        if self.kind == "edge_moment":
            return f"edge_moment({self.edge}, deg {self.leg[1]})"
        if self.kind == "interior_moment":
            return f"interior_moment(comp {self.component})"
        return "div_moment"


@dataclass(frozen=True, eq=False)
class DofSet:
    family: ElementFamily
    k: int
    functionals: Tuple[DofFunctional, ...]
    div_moments_replaced: bool = False

    @property
    def count(self) -> int:
        return len(self.functionals)

    def count_by_kind(self) -> dict:
        out = {"edge_moment": 0, "interior_moment": 0, "div_moment": 0}
        for f in self.functionals:
            out[f.kind] += 1
        return out


def build_dofs(family, k: int, replace_div_moments: bool = False) -> DofSet:
    """The family's DOF list; count always equals the space dimension.

    replace_div_moments swaps the ABF divergence moments for plain
    component moments against L_k(x) L_j(y) / L_i(x) L_k(y).  The swap
    keeps the set unisolvent but severs the divergence coupling, so the
    commuting property must fail: it exists as a negative control.
    """
    family = _as_family(family)
    _validate_degree(family, k)
    fns = []
    for edge in EDGE_ORDER:
        for deg in range(k + 1):
            fns.append(
                DofFunctional(
                    kind="edge_moment",
                    test=legendre.as_poly(deg, "x"),
                    edge=edge,
                    normal_sign=_EDGE_SIGN[edge],
                    leg=("t", deg),
                )
            )
    if family is ElementFamily.BDM:
        for comp in (0, 1):
            for i in range(k - 1):
                for j in range(k - 1 - i):
                    fns.append(_interior(comp, i, j))
    else:
        for i in range(k):
            for j in range(k + 1):
                fns.append(_interior(0, i, j))
        for i in range(k + 1):
            for j in range(k):
                fns.append(_interior(1, i, j))
    if family is ElementFamily.ABF:
        if replace_div_moments:
            for j in range(k + 1):
                fns.append(_interior(0, k, j))
            for i in range(k + 1):
                fns.append(_interior(1, i, k))
        else:
            for i in range(k + 1):
                fns.append(
                    DofFunctional(kind="div_moment", test=Polynomial2D.monomial(i, k + 1))
                )
            for j in range(k + 1):
                fns.append(
                    DofFunctional(kind="div_moment", test=Polynomial2D.monomial(k + 1, j))
                )
    dofset = DofSet(family, int(k), tuple(fns), div_moments_replaced=replace_div_moments)
    assert dofset.count == space_dimension(family, k)
    return dofset


def _interior(comp: int, i: int, j: int) -> DofFunctional:
    return DofFunctional(
        kind="interior_moment",
        test=legendre.product_poly(i, j),
        component=comp,
        leg=("xy", i, j),
    )


def _component_degrees(field):
    if isinstance(field, VectorPoly2D):
        return (field.u.dx, field.u.dy), (field.v.dx, field.v.dy)
    return None


def _edge_nodes(edge: str, n: int):
    r = gauss_legendre_01(n)
    t = r.nodes_ld
    w = r.weights_ld
    zero = np.zeros_like(t)
    one = np.ones_like(t)
    if edge == "left":
        return zero, t, t, w
    if edge == "right":
        return one, t, t, w
    if edge == "bottom":
        return t, zero, t, w
    if edge == "top":
        return t, one, t, w
    raise ValueError(f"unknown edge {edge!r}")


def _test_values_1d(fn: DofFunctional, t):
    if fn.leg is not None and fn.leg[0] == "t":
        return legendre.values(fn.leg[1], t)[fn.leg[1]]
    return fn.test.eval(t, np.zeros_like(t))


def _test_values_2d(fn: DofFunctional, x, y):
    if fn.leg is not None and fn.leg[0] == "xy":
        i, j = fn.leg[1], fn.leg[2]
        return legendre.values(i, x)[i] * legendre.values(j, y)[j]
    return fn.test.eval(x, y)


def apply_dof_ld(fn: DofFunctional, field) -> np.longdouble:
    """One functional applied to a field, in extended precision."""
    degs = _component_degrees(field)
    if fn.kind == "edge_moment":
        comp = _EDGE_COMPONENT[fn.edge]
        tdeg = fn.test.dx
        if degs is None:
            n = NONPOLY_POINTS
        else:
            along = degs[comp][1] if comp == 0 else degs[comp][0]
            n = n_for_degree(along + tdeg)
        x, y, t, w = _edge_nodes(fn.edge, n)
        U, V = field.uv(x, y)
        vals = U if comp == 0 else V
        return np.longdouble(fn.normal_sign) * np.sum(w * vals * _test_values_1d(fn, t))
    if fn.kind == "interior_moment":
        if degs is None:
            nx = ny = NONPOLY_POINTS
        else:
            dx, dy = degs[fn.component]
            nx = n_for_degree(dx + fn.test.dx)
            ny = n_for_degree(dy + fn.test.dy)
        rule = tensor_rule(nx, ny)
        U, V = field.uv(rule.xs_ld, rule.ys_ld)
        vals = U if fn.component == 0 else V
        return np.sum(rule.ws_ld * vals * _test_values_2d(fn, rule.xs_ld, rule.ys_ld))
    if fn.kind == "div_moment":
        if degs is None:
            nx = ny = NONPOLY_POINTS
        else:
            (dx0, dy0), (dx1, dy1) = degs
            nx = n_for_degree(max(dx0 - 1, dx1, 0) + fn.test.dx)
            ny = n_for_degree(max(dy0, dy1 - 1, 0) + fn.test.dy)
        rule = tensor_rule(nx, ny)
        vals = field.div_values(rule.xs_ld, rule.ys_ld)
        return np.sum(rule.ws_ld * vals * _test_values_2d(fn, rule.xs_ld, rule.ys_ld))
    raise ValueError(f"unknown DOF kind {fn.kind!r}")


def apply_dof(fn: DofFunctional, field) -> float:
    return float(apply_dof_ld(fn, field))


def dof_vector_ld(dofset: DofSet, field) -> np.ndarray:
    return np.array([apply_dof_ld(fn, field) for fn in dofset.functionals], dtype=np.longdouble)


def dof_vector(dofset: DofSet, field) -> np.ndarray:
    return dof_vector_ld(dofset, field).astype(float)


def dof_matrix_ld(dofset: DofSet, space: ElementSpace) -> np.ndarray:
    """M[a, b] = functional a applied to basis member b, extended precision.

    Specialized assembly: basis members are single Legendre products (or
    the two BDM curls), so each functional row is filled from recurrence
    values without going through generic field evaluation.
    """
    dim = space.dim
    (dx0, dy0), (dx1, dy1) = space.comp_degrees
    maxdeg = space._maxdeg
    M = np.zeros((dim, dim), dtype=np.longdouble)
    for a, fn in enumerate(dofset.functionals):
        if fn.kind == "edge_moment":
            comp = _EDGE_COMPONENT[fn.edge]
            along = (dy0 if comp == 0 else dx1) + fn.test.dx
            x, y, t, w = _edge_nodes(fn.edge, n_for_degree(along))
            wt = np.longdouble(fn.normal_sign) * w * _test_values_1d(fn, t)
            Lx = legendre.values(maxdeg, x)
            Ly = legendre.values(maxdeg, y)
            for b, lab in enumerate(space.labels):
                if lab[0] == "x" and comp == 0:
                    M[a, b] = np.sum(wt * Lx[lab[1]] * Ly[lab[2]])
                elif lab[0] == "y" and comp == 1:
                    M[a, b] = np.sum(wt * Lx[lab[1]] * Ly[lab[2]])
                elif lab[0] == "curl":
                    wfield = space._curl_fields[lab[1] - 1]
                    p = wfield.u if comp == 0 else wfield.v
                    M[a, b] = np.sum(wt * p.eval(x, y))
        elif fn.kind == "interior_moment":
            dx, dy = (dx0, dy0) if fn.component == 0 else (dx1, dy1)
            rule = tensor_rule(n_for_degree(dx + fn.test.dx), n_for_degree(dy + fn.test.dy))
            xs, ys = rule.xs_ld, rule.ys_ld
            wt = rule.ws_ld * _test_values_2d(fn, xs, ys)
            Lx = legendre.values(maxdeg, xs)
            Ly = legendre.values(maxdeg, ys)
            for b, lab in enumerate(space.labels):
                if lab[0] == ("x" if fn.component == 0 else "y"):
                    M[a, b] = np.sum(wt * Lx[lab[1]] * Ly[lab[2]])
                elif lab[0] == "curl":
                    wfield = space._curl_fields[lab[1] - 1]
                    p = wfield.u if fn.component == 0 else wfield.v
                    M[a, b] = np.sum(wt * p.eval(xs, ys))
        else:
            nx = n_for_degree(max(dx0 - 1, dx1, 0) + fn.test.dx)
            ny = n_for_degree(max(dy0, dy1 - 1, 0) + fn.test.dy)
            rule = tensor_rule(nx, ny)
            xs, ys = rule.xs_ld, rule.ys_ld
            wt = rule.ws_ld * _test_values_2d(fn, xs, ys)
            Lx = legendre.values(maxdeg, xs)
            Ly = legendre.values(maxdeg, ys)
            dLx = legendre.deriv_values(maxdeg, xs)
            dLy = legendre.deriv_values(maxdeg, ys)
            for b, lab in enumerate(space.labels):
                if lab[0] == "x":
                    M[a, b] = np.sum(wt * dLx[lab[1]] * Ly[lab[2]])
                elif lab[0] == "y":
                    M[a, b] = np.sum(wt * Lx[lab[1]] * dLy[lab[2]])
                # curls are divergence-free: the entry stays exactly 0
    return M
