"""Pointwise frame calculus.

A manifold is presented by a moving frame: named coordinates, an invertible
matrix of expressions with E_i = sum_a F[i][a] d/dx^a, and metric components
g_ij = g(E_i, E_j) in that frame.  A PointContext materialises every derived
table (structure coefficients, frame derivatives of the metric, inverses) at
one sample point together with exact coordinate gradients, so covariant
derivative tables never rely on numeric differencing.

Index conventions used throughout the package:

    F[i][a]      E_i = sum_a F[i][a] d/dx^a
    Finv[a][i]   d/dx^a = sum_i Finv[a][i] E_i
    g[i][j]      g(E_i, E_j)
    c[i][j][k]   [E_i, E_j] = sum_k c[i][j][k] E_k
    G[i][j][k]   nabla_{E_i} E_j = sum_k G[i][j][k] E_k
    P[k][j]      P(E_j) = sum_k P[k][j] E_k   (operator tables)
    v[k]         V = sum_k v[k] E_k
    w[j]         w(E_j), and W[i][j] = W(E_i, E_j) for 2-forms

The trailing axis of a gradient array is always the coordinate axis.
"""

from __future__ import annotations

import string

import numpy as np

from . import expr as ex


class GeometryError(ValueError):
    """Invalid geometric input: singular frame, bad metric, shape mismatch."""


# ---------------------------------------------------------------------------
# jets


class Jet:
    """A numeric table plus its coordinate gradient (and optionally the
    second gradient, for tables that get frame-differentiated twice)."""

    __slots__ = ("val", "grad", "grad2")

    def __init__(self, val, grad, grad2=None):
        self.val = np.asarray(val, float)
        self.grad = np.asarray(grad, float)
        self.grad2 = None if grad2 is None else np.asarray(grad2, float)

    def __add__(self, other: "Jet") -> "Jet":
        return Jet(self.val + other.val, self.grad + other.grad)

    def __sub__(self, other: "Jet") -> "Jet":
        return Jet(self.val - other.val, self.grad - other.grad)

    def __neg__(self) -> "Jet":
        return Jet(-self.val, -self.grad)

    def __mul__(self, s: float) -> "Jet":
        return Jet(self.val * s, self.grad * s)

    __rmul__ = __mul__

    def t(self, *axes: int) -> "Jet":
        """Transpose of the value axes; gradient axes stay trailing."""
        n = self.val.ndim
        g2 = None
        if self.grad2 is not None:
            g2 = self.grad2.transpose(axes + (n, n + 1))
        return Jet(self.val.transpose(axes), self.grad.transpose(axes + (n,)), g2)


def jet_einsum(spec: str, *ops) -> Jet:
    """Einstein summation over jets with product-rule gradient propagation.

    Operands may be Jet or plain ndarray (treated as constant).  The result
    gradient gets a fresh trailing subscript appended to each Jet operand in
    turn.
    """
    ins, out = spec.split("->")
    subs = ins.split(",")
    vals = [op.val if isinstance(op, Jet) else np.asarray(op, float) for op in ops]
    res_val = np.einsum(spec, *vals)
    gch = next(ch for ch in string.ascii_letters if ch not in spec)
    grad = None
    for p, op in enumerate(ops):
        if not isinstance(op, Jet):
            continue
        parts = list(subs)
        parts[p] = subs[p] + gch
        spec_p = ",".join(parts) + "->" + out + gch
        args = [op.grad if q == p else vals[q] for q, op in enumerate(ops)]
        term = np.einsum(spec_p, *args)
        grad = term if grad is None else grad + term
    if grad is None:
        raise ValueError("jet_einsum needs at least one Jet operand")
    return Jet(res_val, grad)


def jet_matinv(m: Jet, what: str = "matrix") -> Jet:
    """Inverse of a square matrix jet; d(M^-1) = -M^-1 dM M^-1."""
    det = np.linalg.det(m.val)
    if abs(det) < 1e-12:
        raise GeometryError(f"{what} is singular (det = {det:.3e})")
    inv = np.linalg.inv(m.val)
    grad = -np.einsum("ab,bcg,cd->adg", inv, m.grad, inv)
    return Jet(inv, grad)


# ---------------------------------------------------------------------------
# expression tables


def as_expr(cell, coords: tuple[str, ...]) -> ex.Expr:
    if isinstance(cell, ex.Expr):
        return cell
    if isinstance(cell, str):
        return ex.parse(cell, coords)
    if isinstance(cell, (int, float)):
        return ex.Num(float(cell))
    raise GeometryError(f"cannot interpret {cell!r} as an expression")


class ExprTable:
    """Array of expressions with first and second derivative trees built once.

    Evaluation at a point yields a Jet carrying the exact coordinate gradient
    and second gradient of every entry.
    """

    def __init__(self, cells, coords: tuple[str, ...], shape: tuple[int, ...] | None = None):
        self.coords = tuple(coords)
        arr = np.array(_normalize(cells, self.coords), dtype=object)
        if shape is not None and arr.shape != shape:
            raise GeometryError(f"expected table of shape {shape}, got {arr.shape}")
        self.exprs = arr
        m = len(self.coords)
        self.d1 = np.empty(arr.shape + (m,), dtype=object)
        self.d2 = np.empty(arr.shape + (m, m), dtype=object)
        for idx, e in np.ndenumerate(arr):
            for b, cb in enumerate(self.coords):
                de = ex.diff(e, cb)
                self.d1[idx + (b,)] = de
                for c, cc in enumerate(self.coords):
                    self.d2[idx + (b, c)] = ex.diff(de, cc)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.exprs.shape

    def jet2(self, env: dict[str, float]) -> Jet:
        return Jet(
            _eval_obj(self.exprs, env),
            _eval_obj(self.d1, env),
            _eval_obj(self.d2, env),
        )


def _normalize(cells, coords):
    if isinstance(cells, np.ndarray):
        cells = cells.tolist()
    if isinstance(cells, (list, tuple)):
        return [_normalize(c, coords) for c in cells]
    return as_expr(cells, coords)


def _eval_obj(arr: np.ndarray, env: dict[str, float]) -> np.ndarray:
    out = np.empty(arr.shape)
    for idx, e in np.ndenumerate(arr):
        out[idx] = ex.eval_expr(e, env)
    return out


# ---------------------------------------------------------------------------
# manifolds and point contexts


class Manifold:
    """Coordinates, a frame presentation, and metric components in the frame."""

    def __init__(self, coords, frame, metric):
        self.coords = tuple(coords)
        self.dim = len(self.coords)
        if self.dim == 0:
            raise GeometryError("need at least one coordinate")
        n = self.dim
        self.frame = ExprTable(frame, self.coords, shape=(n, n))
        self.metric = ExprTable(metric, self.coords, shape=(n, n))

    def context(self, point) -> "PointContext":
        return PointContext(self, point)

    def contexts(self, points) -> list["PointContext"]:
        return [PointContext(self, p) for p in points]


class PointContext:
    """All frame tables materialised at one sample point."""

    def __init__(self, manifold: Manifold, point):
        self.manifold = manifold
        self.dim = manifold.dim
        self.x = np.asarray(point, float)
        if self.x.shape != (self.dim,):
            raise GeometryError(f"point must have {self.dim} components")
        self.env = dict(zip(manifold.coords, self.x.tolist()))

        self.F = manifold.frame.jet2(self.env)
        self.Finv = jet_matinv(self.F, what=f"frame at {_fmt_point(self.x)}")
        self.g = manifold.metric.jet2(self.env)
        asym = np.max(np.abs(self.g.val - self.g.val.T))
        if asym > 1e-12 * (1.0 + np.max(np.abs(self.g.val))):
            raise GeometryError(f"metric is not symmetric at {_fmt_point(self.x)}")
        self.ginv = jet_matinv(self.g, what=f"metric at {_fmt_point(self.x)}")

        # structure coefficients from the frame's coordinate expansion
        EF = self.E_jet(self.F)  # EF[i][j][a] = E_i(F[j][a])
        w = EF - EF.t(1, 0, 2)
        self.c = jet_einsum("ija,ak->ijk", w, self.Finv)

        self.Eg = self.E_jet(self.g)  # Eg[k][i][j] = E_k(g_ij)
        self._tables: dict[int, tuple[object, tuple]] = {}
        self._jets: dict[int, tuple[ExprTable, Jet]] = {}

    # frame derivative: values only
    def E(self, jet: Jet) -> np.ndarray:
        """E(T)[i, ...] = E_i applied entrywise: F[i][a] dT[..., a]."""
        return np.einsum("ia,...a->i...", self.F.val, jet.grad)

    # frame derivative with gradient; needs the operand's second gradient
    def E_jet(self, jet: Jet) -> Jet:
        if jet.grad2 is None:
            raise ValueError("E_jet needs a jet with a second gradient")
        val = np.einsum("ia,...a->i...", self.F.val, jet.grad)
        grad = np.einsum("iac,...a->i...c", self.F.grad, jet.grad) + np.einsum(
            "ia,...ac->i...c", self.F.val, jet.grad2
        )
        return Jet(val, grad)

    def table_jet(self, table: ExprTable) -> Jet:
        """Evaluate an ExprTable here, cached per table instance."""
        key = id(table)
        hit = self._jets.get(key)
        if hit is None:
            hit = (table, table.jet2(self.env))
            self._jets[key] = hit
        return hit[1]

    def connection_table(self, conn) -> tuple[np.ndarray, np.ndarray]:
        """(G, dG) for a connection, cached per connection instance."""
        key = id(conn)
        hit = self._tables.get(key)
        if hit is None:
            hit = (conn, conn.table(self))
            self._tables[key] = hit
        return hit[1]


def _fmt_point(x: np.ndarray) -> str:
    return "(" + ", ".join(f"{v:.4g}" for v in x) + ")"


# ---------------------------------------------------------------------------
# vector fields and brackets


def frame_field(ctx: PointContext, j: int) -> Jet:
    v = np.zeros(ctx.dim)
    v[j] = 1.0
    return Jet(v, np.zeros((ctx.dim, ctx.dim)))


def const_field(ctx: PointContext, comps) -> Jet:
    return Jet(np.asarray(comps, float), np.zeros((ctx.dim, ctx.dim)))


def operator_column(P: Jet, j: int) -> Jet:
    """The vector field P(E_j) as a jet."""
    return Jet(P.val[:, j], P.grad[:, j, :])


def bracket(ctx: PointContext, V: Jet, W: Jet) -> np.ndarray:
    """Frame components of [V, W] for materialised vector fields."""
    Ev = ctx.E(V)  # Ev[i][k] = E_i(v^k)
    Ew = ctx.E(W)
    return (
        np.einsum("i,j,ijk->k", V.val, W.val, ctx.c.val)
        + np.einsum("i,ik->k", V.val, Ew)
        - np.einsum("j,jk->k", W.val, Ev)
    )


def brackets_with_frame(ctx: PointContext, V: Jet) -> np.ndarray:
    """B[j][k] = frame components of [V, E_j]."""
    Ev = ctx.E(V)
    return np.einsum("i,ijk->jk", V.val, ctx.c.val) - Ev.T


# ---------------------------------------------------------------------------
# Lie derivatives along a materialised field


def lie_metric(ctx: PointContext, V: Jet) -> np.ndarray:
    """(L_V g)(E_i, E_j) = V(g_ij) - g([V,E_i],E_j) - g(E_i,[V,E_j])."""
    B = brackets_with_frame(ctx, V)
    vg = np.einsum("k,kij->ij", V.val, ctx.Eg.val)
    t = np.einsum("ik,kj->ij", B, ctx.g.val)
    return vg - t - t.T


def lie_covector(ctx: PointContext, V: Jet, w: Jet) -> np.ndarray:
    """(L_V w)(E_j) = V(w(E_j)) - w([V, E_j])."""
    B = brackets_with_frame(ctx, V)
    return np.einsum("k,kj->j", V.val, ctx.E(w)) - np.einsum("jm,m->j", B, w.val)


def lie_operator(ctx: PointContext, V: Jet, P: Jet) -> np.ndarray:
    """(L_V P)(E_j) = [V, P E_j] - P([V, E_j]), returned as an operator table."""
    B = brackets_with_frame(ctx, V)
    out = np.empty((ctx.dim, ctx.dim))
    for j in range(ctx.dim):
        out[:, j] = bracket(ctx, V, operator_column(P, j)) - P.val @ B[j]
    return out


# ---------------------------------------------------------------------------
# exterior calculus (normalised convention: d carries a 1/(p+1) prefactor)


def ext_d1(ctx: PointContext, w: Jet) -> np.ndarray:
    """dw[i][j] for a 1-form jet: (1/2)(E_i w_j - E_j w_i - c[i][j][m] w_m)."""
    Ew = ctx.E(w)
    return 0.5 * (Ew - Ew.T - np.einsum("ijm,m->ij", ctx.c.val, w.val))


def ext_d1_jet(ctx: PointContext, w: Jet) -> Jet:
    """Like ext_d1 but propagating gradients; needs w.grad2."""
    Ew = ctx.E_jet(w)
    return 0.5 * (Ew - Ew.t(1, 0) - jet_einsum("ijm,m->ij", ctx.c, w))


def ext_d2(ctx: PointContext, W: Jet) -> np.ndarray:
    """dW[i][j][k] for a 2-form jet, with the 1/3 normalisation."""
    EW = ctx.E(W)  # EW[i][j][k] = E_i(W_jk)
    cv, Wv = ctx.c.val, W.val
    out = (
        EW
        - EW.transpose(1, 0, 2)
        + EW.transpose(1, 2, 0)
        - np.einsum("ijm,mk->ijk", cv, Wv)
        + np.einsum("ikm,mj->ijk", cv, Wv)
        - np.einsum("jkm,mi->ijk", cv, Wv)
    )
    return out / 3.0


def wedge_1_2(w: np.ndarray, W: np.ndarray) -> np.ndarray:
    """(w ^ W)[i][j][k] = (1/3)(w_i W_jk + w_j W_ki + w_k W_ij)."""
    t = np.einsum("i,jk->ijk", w, W)
    return (t + t.transpose(1, 2, 0) + t.transpose(2, 0, 1)) / 3.0


# ---------------------------------------------------------------------------
# sampling


def sample_points(dim: int, box, n_points: int, seed: int) -> np.ndarray:
    """Deterministic uniform sample of n_points in the box (list of (lo, hi))."""
    box = list(box)
    if len(box) != dim:
        raise GeometryError(f"box must give {dim} coordinate ranges")
    lo = np.array([b[0] for b in box], float)
    hi = np.array([b[1] for b in box], float)
    if np.any(hi <= lo):
        raise GeometryError("box ranges must satisfy lo < hi")
    rng = np.random.default_rng(seed)
    return rng.uniform(lo, hi, size=(n_points, dim))
