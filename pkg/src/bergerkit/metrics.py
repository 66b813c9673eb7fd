"""Coordinate metrics: Einstein verification and numerical holonomy.

Charts hold closed-form metric entries (sympy expressions); Christoffel
symbols and curvature come from symbolic first and second derivatives of the
metric, evaluated in floating point at sample points (the matrix inversions
happen numerically, never symbolically).  The curvature convention matches
the exact side of the toolkit: Ric(X, Y) = tr(Z -> R(Z, X) Y), so the unit
sphere has Ricci equal to its metric.

Holonomy is estimated Ambrose-Singer style: curvature endomorphisms at
spread sample points are parallel-transported to the base point, stacked,
and rank-estimated through the singular value spectrum with the gap shown.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import sympy as sp

from .liealg import MatrixLieAlgebra

Expr = sp.Expr

_ALLOWED_FUNCTIONS = {
    "sin": sp.sin, "cos": sp.cos, "tan": sp.tan, "exp": sp.exp,
    "log": sp.log, "sqrt": sp.sqrt, "sinh": sp.sinh, "cosh": sp.cosh,
    "tanh": sp.tanh, "pi": sp.pi,
}


def parse_expr(text: str, coords: Sequence[sp.Symbol]) -> Expr:
    """Parse a closed-form expression over the chart coordinates."""
    loc = dict(_ALLOWED_FUNCTIONS)
    loc.update({str(c): c for c in coords})
    return sp.sympify(text, locals=loc)


class MetricChart:
    """A coordinate pseudo-Riemannian metric on an open box.

    ``g`` is a symmetric sympy matrix over the coordinate symbols; ``domain``
    maps coordinate names to open intervals where the metric stays
    invertible with constant signature.
    """

    def __init__(self, name: str, coords: Sequence[sp.Symbol], g: sp.Matrix,
                 domain: dict):
        self.name = name
        self.coords = tuple(coords)
        self.dim = len(self.coords)
        if g.shape != (self.dim, self.dim):
            raise ValueError("metric shape does not match coordinate count")
        if sp.simplify(g - g.T) != sp.zeros(self.dim, self.dim):
            raise ValueError("metric matrix must be symmetric")
        self.g = sp.Matrix(g)
        self.domain = {str(k): (float(v[0]), float(v[1])) for k, v in domain.items()}
        for c in self.coords:
            if str(c) not in self.domain:
                raise ValueError(f"domain missing coordinate {c}")
        self._fn_g = None
        self._fn_dg = None
        self._fn_d2g = None

    # -- evaluation ------------------------------------------------------

    def _lambdify(self):
        if self._fn_g is not None:
            return
        n = self.dim
        cs = self.coords
        g_list = [[self.g[i, j] for j in range(n)] for i in range(n)]
        dg = [[[sp.diff(self.g[i, j], cs[e]) for j in range(n)] for i in range(n)]
              for e in range(n)]
        d2g = [[[[sp.diff(dg[e][i][j], cs[f]) for j in range(n)] for i in range(n)]
                for f in range(n)] for e in range(n)]
        self._fn_g = sp.lambdify(cs, g_list, modules="numpy")
        self._fn_dg = sp.lambdify(cs, dg, modules="numpy")
        self._fn_d2g = sp.lambdify(cs, d2g, modules="numpy")

    def metric_at(self, point: Sequence[float]) -> np.ndarray:
        self._lambdify()
        out = np.array(self._fn_g(*point), dtype=float)
        if abs(np.linalg.det(out)) < 1e-14:
            raise ValueError(f"metric is singular at {list(point)}")
        return out

    def dmetric_at(self, point: Sequence[float]) -> np.ndarray:
        self._lambdify()
        return np.array(self._fn_dg(*point), dtype=float)

    def d2metric_at(self, point: Sequence[float]) -> np.ndarray:
        self._lambdify()
        return np.array(self._fn_d2g(*point), dtype=float)

    def signature_at(self, point: Sequence[float]) -> tuple:
        ev = np.linalg.eigvalsh(self.metric_at(point))
        return int(np.sum(ev > 0)), int(np.sum(ev < 0))

    def center(self) -> np.ndarray:
        return np.array([(self.domain[str(c)][0] + self.domain[str(c)][1]) / 2
                         for c in self.coords])

    def contains(self, point: Sequence[float]) -> bool:
        return all(self.domain[str(c)][0] <= p <= self.domain[str(c)][1]
                   for c, p in zip(self.coords, point))

    def sample_points(self, count: int, seed: int = 0, margin: float = 0.05) -> np.ndarray:
        rng = np.random.default_rng(seed)
        los = np.array([self.domain[str(c)][0] for c in self.coords])
        his = np.array([self.domain[str(c)][1] for c in self.coords])
        span = his - los
        return los + span * (margin + (1 - 2 * margin) * rng.random((count, self.dim)))

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "coordinates": [str(c) for c in self.coords],
            "metric": [[sp.srepr(self.g[i, j]) if False else str(self.g[i, j])
                        for j in range(self.dim)] for i in range(self.dim)],
            "domain": {str(c): list(self.domain[str(c)]) for c in self.coords},
        }

    @classmethod
    def from_json(cls, data: dict) -> "MetricChart":
        coords = [sp.Symbol(c, real=True) for c in data["coordinates"]]
        g = sp.Matrix([[parse_expr(entry, coords) for entry in row]
                       for row in data["metric"]])
        return cls(data.get("name", "chart"), coords, g, data["domain"])

    def __repr__(self) -> str:
        return f"MetricChart('{self.name}', dim={self.dim})"


def chart_from_json_str(text: str) -> MetricChart:
    return MetricChart.from_json(json.loads(text))


# ---------------------------------------------------------------------------
# Levi-Civita machinery (numeric from symbolic derivatives)
# ---------------------------------------------------------------------------

def christoffel(chart: MetricChart, point: Sequence[float]) -> np.ndarray:
    """Gamma[c][a][b] at the point (symmetric in a, b)."""
    G = chart.metric_at(point)
    dG = chart.dmetric_at(point)
    ginv = np.linalg.inv(G)
    # T[d][a][b] = d_a g_db + d_b g_da - d_d g_ab
    T = np.einsum('adb->dab', dG) + np.einsum('bda->dab', dG) - dG
    return 0.5 * np.einsum('cd,dab->cab', ginv, T)


def curvature_at(chart: MetricChart, point: Sequence[float]) -> np.ndarray:
    """Riem[d][c][a][b]: the d-component of R(e_a, e_b) e_c."""
    G = chart.metric_at(point)
    dG = chart.dmetric_at(point)
    d2G = chart.d2metric_at(point)
    ginv = np.linalg.inv(G)
    T = np.einsum('adb->dab', dG) + np.einsum('bda->dab', dG) - dG
    Gamma = 0.5 * np.einsum('cd,dab->cab', ginv, T)
    dginv = -np.einsum('cm,emn,nd->ecd', ginv, dG, ginv)
    dT = (np.einsum('eadb->edab', d2G) + np.einsum('ebda->edab', d2G)
          - np.einsum('edab->edab', d2G))
    dGamma = 0.5 * (np.einsum('ecd,dab->ecab', dginv, T)
                    + np.einsum('cd,edab->ecab', ginv, dT))
    r1 = np.einsum('adbc->dcab', dGamma)
    r2 = np.einsum('bdac->dcab', dGamma)
    p1 = np.einsum('dae,ebc->dcab', Gamma, Gamma)
    p2 = np.einsum('dbe,eac->dcab', Gamma, Gamma)
    return r1 - r2 + p1 - p2


def ricci_at(chart: MetricChart, point: Sequence[float]) -> np.ndarray:
    """Ric[a][b] = tr(Z -> R(Z, e_a) e_b); unit-sphere normalization (n-1) g."""
    riem = curvature_at(chart, point)
    return np.einsum('dbda->ab', riem)


def bianchi_residual_at(chart: MetricChart, point: Sequence[float]) -> float:
    riem = curvature_at(chart, point)
    cyc = riem + np.einsum('dabc->dcab', riem) + np.einsum('dbca->dcab', riem)
    # cyc[d][c][a][b] = R(a,b)c + R(c,a)b + R(b,c)a components
    return float(np.max(np.abs(cyc)))


def finite_difference_curvature(chart: MetricChart, point: Sequence[float],
                                step: float = 1e-3) -> np.ndarray:
    """4th-order central-difference cross-check of :func:`curvature_at`.

    Differentiates the numerically evaluated Christoffel symbols, so it is
    independent of the symbolic second derivatives.
    """
    n = chart.dim
    point = np.asarray(point, dtype=float)
    Gamma = christoffel(chart, point)
    dGamma = np.zeros((n, n, n, n))
    for e in range(n):
        h = np.zeros(n)
        h[e] = step
        gp2 = christoffel(chart, point + 2 * h)
        gp1 = christoffel(chart, point + h)
        gm1 = christoffel(chart, point - h)
        gm2 = christoffel(chart, point - 2 * h)
        dGamma[e] = (-gp2 + 8 * gp1 - 8 * gm1 + gm2) / (12 * step)
    r1 = np.einsum('adbc->dcab', dGamma)
    r2 = np.einsum('bdac->dcab', dGamma)
    p1 = np.einsum('dae,ebc->dcab', Gamma, Gamma)
    p2 = np.einsum('dbe,eac->dcab', Gamma, Gamma)
    return r1 - r2 + p1 - p2


# ---------------------------------------------------------------------------
# Einstein and Laplace checks
# ---------------------------------------------------------------------------

def einstein_check(chart: MetricChart, lam: float,
                   samples: Optional[Sequence[Sequence[float]]] = None,
                   tol: float = 1e-8, n_samples: int = 20, seed: int = 0) -> dict:
    """Max-norm residual of Ric - lam * g over the samples."""
    if samples is None:
        samples = chart.sample_points(n_samples, seed=seed)
    worst = 0.0
    worst_point = None
    sig0 = None
    for pt in samples:
        if not chart.contains(pt):
            raise ValueError(f"sample point {list(pt)} is outside the domain")
        sig = chart.signature_at(pt)
        if sig0 is None:
            sig0 = sig
        elif sig != sig0:
            raise ValueError("metric signature is not constant on the samples")
        res = float(np.max(np.abs(ricci_at(chart, pt) - lam * chart.metric_at(pt))))
        if res > worst:
            worst, worst_point = res, [float(x) for x in pt]
    return {
        "chart": chart.name,
        "lambda": lam,
        "points": len(list(samples)),
        "max_residual": worst,
        "tolerance": tol,
        "passed": worst <= tol,
        "worst_point": worst_point,
        "signature": list(sig0) if sig0 else None,
    }


def laplace_beltrami_at(chart: MetricChart, H: Expr, point: Sequence[float]) -> float:
    """Laplace-Beltrami of H at the point: g^{ab} (H_{,ab} - Gamma^c_ab H_{,c})."""
    cs = chart.coords
    dH = [sp.diff(H, c) for c in cs]
    d2H = [[sp.diff(dH[a], cs[b]) for b in range(chart.dim)] for a in range(chart.dim)]
    dh_val = np.array(sp.lambdify(cs, dH, modules="numpy")(*point), dtype=float)
    d2h_val = np.array(sp.lambdify(cs, d2H, modules="numpy")(*point), dtype=float)
    ginv = np.linalg.inv(chart.metric_at(point))
    Gamma = christoffel(chart, point)
    hess = d2h_val - np.einsum('cab,c->ab', Gamma, dh_val)
    return float(np.einsum('ab,ab->', ginv, hess))


def laplace_check(h_chart: MetricChart, H: Expr,
                  samples: Optional[Sequence[Sequence[float]]] = None,
                  tol: float = 1e-8, n_samples: int = 20, seed: int = 0) -> dict:
    """Checks that H is harmonic for the chart's Laplace-Beltrami operator."""
    H = sp.sympify(H)
    extra = H.free_symbols - set(h_chart.coords)
    if extra:
        raise ValueError(f"H depends on non-chart symbols: {extra}")
    if samples is None:
        samples = h_chart.sample_points(n_samples, seed=seed)
    worst = 0.0
    worst_point = None
    for pt in samples:
        val = abs(laplace_beltrami_at(h_chart, H, pt))
        if val > worst:
            worst, worst_point = val, [float(x) for x in pt]
    return {
        "chart": h_chart.name,
        "points": len(list(samples)),
        "max_residual": worst,
        "tolerance": tol,
        "passed": worst <= tol,
        "worst_point": worst_point,
    }


# ---------------------------------------------------------------------------
# chart constructions
# ---------------------------------------------------------------------------

def _fresh(name: str) -> sp.Symbol:
    return sp.Symbol(name, real=True)


def build_example1(h_chart: MetricChart, H0, lam: float,
                   vu_box: tuple = (-0.4, 0.4), tol: float = 1e-8,
                   seed: int = 0, skip_checks: bool = False) -> MetricChart:
    """The isotropic-line extension 2 dv du + h + (lam v^2 + H0) du^2.

    Requires (and re-verifies) that h is Einstein with the same constant and
    that H0 is harmonic for h.
    """
    H0 = sp.sympify(H0)
    if not skip_checks:
        rep = einstein_check(h_chart, lam, tol=tol, seed=seed)
        if not rep["passed"]:
            raise ValueError(f"base chart is not Einstein(lam={lam}): "
                             f"residual {rep['max_residual']:.3g}")
        rep = laplace_check(h_chart, H0, tol=tol, seed=seed)
        if not rep["passed"]:
            raise ValueError(f"H0 is not harmonic: residual {rep['max_residual']:.3g}")
    v, u = _fresh("v"), _fresh("u")
    coords = (v,) + h_chart.coords + (u,)
    n = len(coords)
    g = sp.zeros(n, n)
    g[0, n - 1] = g[n - 1, 0] = 1
    for i in range(h_chart.dim):
        for j in range(h_chart.dim):
            g[1 + i, 1 + j] = h_chart.g[i, j]
    g[n - 1, n - 1] = lam * v ** 2 + H0
    domain = {"v": vu_box, "u": vu_box}
    domain.update(h_chart.domain)
    return MetricChart(f"example1[{h_chart.name}]", coords, g, domain)


def build_index2_metric(family: int, h_chart: MetricChart, lam: float,
                        H1, H2, H12=0, f_chart: Optional[MetricChart] = None,
                        vu_box: tuple = (-0.4, 0.4), tol: float = 1e-8,
                        seed: int = 0, skip_checks: bool = False) -> MetricChart:
    """The index-2 example charts.

    Families 4 and 5: 2dv1du1 + 2dv2du2 + h + (lam v1^2 + H1) du1^2
    + (lam v2^2 + mu v1^2 + H2) du2^2 with mu = 0 resp. 1.  Families 2 and
    3 take the u-u block from an Einstein chart ``f_chart`` on
    (v1, v2, u1, u2) and add the H-terms.  All H's must be harmonic for h
    and all ingredient charts Einstein with the shared constant.
    """
    if family not in (2, 3, 4, 5):
        raise ValueError("family must be one of 2, 3, 4, 5")
    H1, H2, H12 = sp.sympify(H1), sp.sympify(H2), sp.sympify(H12)
    if not skip_checks:
        rep = einstein_check(h_chart, lam, tol=tol, seed=seed)
        if not rep["passed"]:
            raise ValueError(f"base chart is not Einstein(lam={lam})")
        for tag, H in (("H1", H1), ("H2", H2), ("H12", H12)):
            if H == 0:
                continue
            rep = laplace_check(h_chart, H, tol=tol, seed=seed)
            if not rep["passed"]:
                raise ValueError(f"{tag} is not harmonic: residual {rep['max_residual']:.3g}")
    v1, v2, u1, u2 = (_fresh(s) for s in ("v1", "v2", "u1", "u2"))
    coords = (v1, v2) + h_chart.coords + (u1, u2)
    n = len(coords)
    iu1, iu2 = n - 2, n - 1
    g = sp.zeros(n, n)
    g[0, iu1] = g[iu1, 0] = 1
    g[1, iu2] = g[iu2, 1] = 1
    for i in range(h_chart.dim):
        for j in range(h_chart.dim):
            g[2 + i, 2 + j] = h_chart.g[i, j]
    if family in (4, 5):
        mu = 0 if family == 4 else 1
        g[iu1, iu1] = lam * v1 ** 2 + H1
        g[iu2, iu2] = lam * v2 ** 2 + mu * v1 ** 2 + H2
    else:
        if f_chart is None:
            raise ValueError("families 2 and 3 need the Einstein block chart")
        if f_chart.dim != 4:
            raise ValueError("the Einstein block chart must have coordinates (v1,v2,u1,u2)")
        if not skip_checks:
            rep = einstein_check(f_chart, lam, tol=tol, seed=seed)
            if not rep["passed"]:
                raise ValueError(f"block chart is not Einstein(lam={lam})")
        sub = dict(zip(f_chart.coords, (v1, v2, u1, u2)))
        F = f_chart.g.subs(sub, simultaneous=True)
        expect = sp.zeros(4, 4)
        expect[0, 2] = expect[2, 0] = 1
        expect[1, 3] = expect[3, 1] = 1
        for (i, j) in ((0, 0), (0, 1), (1, 0), (1, 1), (0, 3), (1, 2), (2, 1), (3, 0)):
            if sp.simplify(F[i, j] - expect[i, j]) != 0:
                raise ValueError("block chart is not in the 2dv du + F(du)^2 form")
        g[iu1, iu1] = F[2, 2] + H1
        g[iu1, iu2] = g[iu2, iu1] = F[2, 3] + H12
        g[iu2, iu2] = F[3, 3] + H2
    domain = {"v1": vu_box, "v2": vu_box, "u1": vu_box, "u2": vu_box}
    domain.update(h_chart.domain)
    return MetricChart(f"index2-family{family}[{h_chart.name}]", coords, g, domain)


@dataclass
class ConclusionIngredients:
    """Ingredient charts and correction functions for the block construction.

    ``f_charts[i]`` lives on (v-coords, u-coords) of block i in the split
    2 dv du + F(v) du du form; ``h_charts[alpha]`` are the orthogonal
    factors.  Correction entries are expression matrices: ``f_corrections``
    [(i, j)] adds F(v_i) du_j du_j terms, ``n_corrections[(i, alpha)]`` adds
    N(x_alpha) du_i du_i terms, and ``c_corrections[(i, j)]`` adds
    C(u_i, u_j) du_i du_j terms.  The construction only assembles and
    verifies; it never derives the correction functions.  Experimental.
    """
    f_charts: Sequence[MetricChart]
    h_charts: Sequence[MetricChart]
    lam: float
    f_corrections: dict = field(default_factory=dict)
    n_corrections: dict = field(default_factory=dict)
    c_corrections: dict = field(default_factory=dict)


def build_conclusion_metric(v_dims: Sequence[int], ing: ConclusionIngredients,
                            vu_box: tuple = (-0.4, 0.4), tol: float = 1e-8,
                            seed: int = 0, skip_checks: bool = False) -> MetricChart:
    """Block product of the ingredient metrics plus the correction terms.

    Experimental: the construction mirrors the conjectured recipe; the
    Einstein property of the result is verified numerically by the caller,
    never assumed.
    """
    k = len(v_dims)
    if len(ing.f_charts) != k:
        raise ValueError("one split-block chart per isotropic block required")
    if not skip_checks:
        for ch in list(ing.f_charts) + list(ing.h_charts):
            rep = einstein_check(ch, ing.lam, tol=tol, seed=seed)
            if not rep["passed"]:
                raise ValueError(f"ingredient {ch.name} is not Einstein(lam={ing.lam})")
    v_syms = [[_fresh(f"v{i+1}_{a+1}") for a in range(m)] for i, m in enumerate(v_dims)]
    u_syms = [[_fresh(f"u{i+1}_{a+1}") for a in range(m)] for i, m in enumerate(v_dims)]
    x_syms = [[_fresh(f"x{al+1}_{a+1}") for a in range(ch.dim)]
              for al, ch in enumerate(ing.h_charts)]
    coords = [s for block in v_syms for s in block]
    for block in x_syms:
        coords.extend(block)
    for block in u_syms:
        coords.extend(block)
    index = {s: i for i, s in enumerate(coords)}
    n = len(coords)
    g = sp.zeros(n, n)
    domain: dict = {}
    for i, m in enumerate(v_dims):
        ch = ing.f_charts[i]
        if ch.dim != 2 * m:
            raise ValueError(f"split-block chart {i} has the wrong dimension")
        sub = dict(zip(ch.coords, v_syms[i] + u_syms[i]))
        F = ch.g.subs(sub, simultaneous=True)
        for a in range(m):
            for b in range(m):
                va, ub = index[v_syms[i][a]], index[u_syms[i][b]]
                if sp.simplify(F[a, m + b] - (1 if a == b else 0)) != 0:
                    raise ValueError(f"split-block chart {i} is not in Walker form")
                g[va, ub] = g[ub, va] = 1 if a == b else 0
                ua = index[u_syms[i][a]]
                g[ua, ub] = F[m + a, m + b]
        for s in v_syms[i] + u_syms[i]:
            domain[str(s)] = vu_box
    for al, ch in enumerate(ing.h_charts):
        sub = dict(zip(ch.coords, x_syms[al]))
        H = ch.g.subs(sub, simultaneous=True)
        for a in range(ch.dim):
            for b in range(ch.dim):
                g[index[x_syms[al][a]], index[x_syms[al][b]]] = H[a, b]
        for s, c in zip(x_syms[al], ch.coords):
            domain[str(s)] = ch.domain[str(c)]
    for (i, j), mat in ing.f_corrections.items():
        mat = sp.Matrix(mat)
        src = dict(zip([sp.Symbol(f"v{i+1}_{a+1}", real=True)
                        for a in range(v_dims[i])], v_syms[i]))
        for a in range(v_dims[j]):
            for b in range(v_dims[j]):
                ua, ub = index[u_syms[j][a]], index[u_syms[j][b]]
                g[ua, ub] = g[ua, ub] + sp.sympify(mat[a, b]).subs(src)
    for (i, al), mat in ing.n_corrections.items():
        mat = sp.Matrix(mat)
        src = dict(zip([sp.Symbol(f"x{al+1}_{a+1}", real=True)
                        for a in range(ing.h_charts[al].dim)], x_syms[al]))
        for a in range(v_dims[i]):
            for b in range(v_dims[i]):
                ua, ub = index[u_syms[i][a]], index[u_syms[i][b]]
                g[ua, ub] = g[ua, ub] + sp.sympify(mat[a, b]).subs(src)
    for (i, j), mat in ing.c_corrections.items():
        mat = sp.Matrix(mat)
        src = {}
        for a in range(v_dims[i]):
            src[sp.Symbol(f"u{i+1}_{a+1}", real=True)] = u_syms[i][a]
        for b in range(v_dims[j]):
            src[sp.Symbol(f"u{j+1}_{b+1}", real=True)] = u_syms[j][b]
        for a in range(v_dims[i]):
            for b in range(v_dims[j]):
                ua, ub = index[u_syms[i][a]], index[u_syms[j][b]]
                term = sp.sympify(mat[a, b]).subs(src)
                g[ua, ub] = g[ua, ub] + term
                g[ub, ua] = g[ua, ub]
    return MetricChart("block-construction", coords, g, domain)


# ---------------------------------------------------------------------------
# parallel transport
# ---------------------------------------------------------------------------

@dataclass
class Path:
    """Piecewise-smooth curve t in [0, 1] -> chart coordinates."""
    fn: Callable
    dfn: Optional[Callable] = None

    def point(self, t: float) -> np.ndarray:
        return np.asarray(self.fn(t), dtype=float)

    def velocity(self, t: float) -> np.ndarray:
        if self.dfn is not None:
            return np.asarray(self.dfn(t), dtype=float)
        h = 1e-4
        ts = [min(max(t + k * h, 0.0), 1.0) for k in (-2, -1, 1, 2)]
        # fall back to one-sided stencils near the ends
        if t - 2 * h < 0 or t + 2 * h > 1:
            h2 = 1e-6
            a = self.point(min(t + h2, 1.0))
            b = self.point(max(t - h2, 0.0))
            return (a - b) / (min(t + h2, 1.0) - max(t - h2, 0.0))
        p = [self.point(x) for x in ts]
        return (-p[3] + 8 * p[2] - 8 * p[1] + p[0]) / (12 * h)

    @classmethod
    def segment(cls, start: Sequence[float], end: Sequence[float]) -> "Path":
        start = np.asarray(start, dtype=float)
        end = np.asarray(end, dtype=float)
        return cls(lambda t: start + t * (end - start), lambda t: end - start)

    @classmethod
    def polyline(cls, points: Sequence[Sequence[float]]) -> "Path":
        pts = [np.asarray(p, dtype=float) for p in points]
        k = len(pts) - 1
        if k < 1:
            raise ValueError("polyline needs at least two points")

        def fn(t):
            s = min(max(t, 0.0), 1.0) * k
            i = min(int(s), k - 1)
            return pts[i] + (s - i) * (pts[i + 1] - pts[i])

        def dfn(t):
            s = min(max(t, 0.0), 1.0) * k
            i = min(int(s), k - 1)
            return k * (pts[i + 1] - pts[i])

        return cls(fn, dfn)


def parallel_transport(chart: MetricChart, path: Path, frame: np.ndarray,
                       tol: float = 1e-10, max_refinements: int = 12,
                       initial_steps: int = 64) -> np.ndarray:
    """Transport a frame along the path by the Levi-Civita connection.

    Classic RK4 on the linear system F' = -Gamma(gamma'(t)) F, with step
    halving until the transported frame reproduces the initial Gram matrix
    to ``tol``; raises RuntimeError if the budget is exhausted.
    """
    frame = np.asarray(frame, dtype=float)
    g_start = chart.metric_at(path.point(0.0))
    gram0 = frame.T @ g_start @ frame
    g_end = chart.metric_at(path.point(1.0))

    def rhs(t, F):
        pt = path.point(t)
        vel = path.velocity(t)
        Gamma = christoffel(chart, pt)
        A = np.einsum('abc,b->ac', Gamma, vel)
        return -A @ F

    steps = initial_steps
    for _ in range(max_refinements + 1):
        F = frame.copy()
        h = 1.0 / steps
        for i in range(steps):
            t = i * h
            k1 = rhs(t, F)
            k2 = rhs(t + h / 2, F + h / 2 * k1)
            k3 = rhs(t + h / 2, F + h / 2 * k2)
            k4 = rhs(t + h, F + h * k3)
            F = F + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        drift = float(np.max(np.abs(F.T @ g_end @ F - gram0)))
        if drift <= tol:
            return F
        steps *= 2
    raise RuntimeError(
        f"parallel transport did not reach Gram drift {tol} within {steps // 2} steps "
        f"(drift {drift:.3e})")


# ---------------------------------------------------------------------------
# holonomy estimation
# ---------------------------------------------------------------------------

@dataclass
class HolonomyConfig:
    n_points: int = 8
    radius: float = 0.25
    seed: int = 0
    sv_rel_threshold: float = 1e-7
    transport_tol: float = 1e-10
    frame: Optional[np.ndarray] = None
    candidate: Optional[MatrixLieAlgebra] = None


@dataclass
class HolonomyEstimate:
    base: np.ndarray
    frame: np.ndarray
    elements: list
    singular_values: np.ndarray
    dimension: int
    spectral_gap: float
    skew_residual: float
    candidate_residuals: Optional[list] = None

    def to_json(self) -> dict:
        out = {
            "base": [float(x) for x in self.base],
            "dimension": self.dimension,
            "spectral_gap": self.spectral_gap,
            "skew_residual": self.skew_residual,
            "singular_values": [float(s) for s in self.singular_values],
            "n_elements": len(self.elements),
        }
        if self.candidate_residuals is not None:
            out["candidate_max_residual"] = max(self.candidate_residuals, default=0.0)
        return out


def _thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("BERGERKIT_THREADS", "1")))
    except ValueError:
        return 1


def holonomy_estimate(chart: MetricChart, base: Optional[Sequence[float]] = None,
                      config: Optional[HolonomyConfig] = None) -> HolonomyEstimate:
    """Ambrose-Singer span estimate at the base point.

    Curvature endomorphisms on all coordinate 2-planes at the base and at
    ``n_points`` nearby sample points are conjugated to the base along
    straight coordinate segments and stacked; the dimension is the number of
    singular values above ``sv_rel_threshold`` times the largest, and the
    gap across that cut is reported so borderline cases stay visible.
    """
    config = config or HolonomyConfig()
    base = chart.center() if base is None else np.asarray(base, dtype=float)
    if not chart.contains(base):
        raise ValueError("base point is outside the domain")
    n = chart.dim
    rng = np.random.default_rng(config.seed)
    los = np.array([chart.domain[str(c)][0] for c in chart.coords])
    his = np.array([chart.domain[str(c)][1] for c in chart.coords])
    pts = [base]
    for _ in range(config.n_points):
        direction = rng.uniform(-1.0, 1.0, size=n)
        pt = base + config.radius * direction
        pts.append(np.clip(pt, los + 0.02 * (his - los), his - 0.02 * (his - los)))

    g_base = chart.metric_at(base)
    frame = np.eye(n) if config.frame is None else np.asarray(config.frame, dtype=float)
    frame_inv = np.linalg.inv(frame)
    g_frame = frame.T @ g_base @ frame

    def collect(idx_pt):
        idx, pt = idx_pt
        riem = curvature_at(chart, pt)
        if idx == 0:
            P = np.eye(n)
        else:
            P = parallel_transport(chart, Path.segment(pt, base), np.eye(n),
                                   tol=config.transport_tol)
        Pinv = np.linalg.inv(P)
        out = []
        for a in range(n):
            for b in range(a + 1, n):
                M = riem[:, :, a, b]
                out.append(frame_inv @ (P @ M @ Pinv) @ frame)
        return out

    workers = _thread_cap()
    items = list(enumerate(pts))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(collect, items))
    else:
        chunks = [collect(it) for it in items]
    elements = [m for chunk in chunks for m in chunk]

    norms = [float(np.linalg.norm(m)) for m in elements]
    max_norm = max(norms, default=0.0)
    skew_res = 0.0
    kept = []
    for m, nr in zip(elements, norms):
        skew_res = max(skew_res, float(np.max(np.abs(m.T @ g_frame + g_frame @ m)))
                       / max(1.0, nr))
        if max_norm > 0 and nr > 1e-12 * max_norm:
            kept.append(m / nr)
    if not kept:
        return HolonomyEstimate(base, frame, [], np.array([]), 0, float("inf"),
                                skew_res, None)
    stack = np.array([m.flatten() for m in kept])
    svals = np.linalg.svd(stack, compute_uv=False)
    cutoff = config.sv_rel_threshold * svals[0]
    dimension = int(np.sum(svals > cutoff))
    if dimension < len(svals) and svals[dimension] > 0:
        gap = float(svals[dimension - 1] / svals[dimension])
    else:
        gap = float("inf")
    residuals = None
    if config.candidate is not None:
        cand = config.candidate
        if cand.ambient_dim != n:
            raise ValueError("candidate algebra has the wrong ambient dimension")
        B = np.array([[float(v) for v in b.flatten()] for b in cand.basis], dtype=float)
        residuals = []
        for m in kept:
            vec = m.flatten()
            sol, res, *_ = np.linalg.lstsq(B.T, vec, rcond=None)
            approx = B.T @ sol
            residuals.append(float(np.linalg.norm(vec - approx)))
    return HolonomyEstimate(base, frame, kept, svals, dimension, gap, skew_res,
                            residuals)


def walker_frame(chart: MetricChart, base: Sequence[float], m: int) -> np.ndarray:
    """Frame columns (p_1..p_m, e_1..e_n, q_1..q_m) adapted to a Walker chart.

    The chart layout must be (v^1..v^m, x^1..x^n, u^1..u^m) with the middle
    block orthogonal to the v/u pairs, which is how the bundled examples are
    assembled.  The returned frame's Gram matrix is the canonical Witt form
    (positive middle block).
    """
    base = np.asarray(base, dtype=float)
    G = chart.metric_at(base)
    n_total = chart.dim
    n_mid = n_total - 2 * m
    mid = slice(m, m + n_mid)
    h_block = G[mid, mid]
    L = np.linalg.cholesky(h_block)
    frame = np.zeros((n_total, n_total))
    for i in range(m):
        frame[i, i] = 1.0                       # p_i = d/dv_i
    frame[mid, m:m + n_mid] = np.linalg.inv(L).T
    H = G[m + n_mid:, m + n_mid:]
    for i in range(m):
        col = np.zeros(n_total)
        col[m + n_mid + i] = 1.0                # q_i = d/du_i - H_ij/2 d/dv_j
        for j in range(m):
            col[j] = -0.5 * H[i, j]
        frame[:, m + n_mid + i] = col
    return frame
