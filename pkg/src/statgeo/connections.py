"""Affine connections in frame presentation and the dualistic-pair checks.

A connection is any object producing a table G[i][j][k] with
nabla_{E_i} E_j = G[i][j][k] E_k at a point context, together with the exact
coordinate gradient of that table.  Conjugation is taken with respect to the
context metric:

    E_i g(E_j, E_k) = g(nabla_{E_i} E_j, E_k) + g(E_j, nabla*_{E_i} E_k)

so the conjugate table is Gs[i][j][l] = (Eg[i][j][k] - G[i][k][m] g[m][j]) ginv[k][l].
"""

from __future__ import annotations

import numpy as np

from . import registry as reg
from .expr import Expr
from .frame import ExprTable, GeometryError, Jet, Manifold, PointContext, jet_einsum


class AffineConnection:
    def table(self, ctx: PointContext) -> tuple[np.ndarray, np.ndarray]:
        """(G, dG) at ctx; dG carries the coordinate gradient of G."""
        raise NotImplementedError

    def jet(self, ctx: PointContext) -> Jet:
        G, dG = ctx.connection_table(self)
        return Jet(G, dG)


class ExprConnection(AffineConnection):
    """Connection given by explicit coefficient expressions."""

    def __init__(self, cells, coords):
        self._table = ExprTable(cells, coords)
        s = self._table.shape
        if len(s) != 3 or len(set(s)) != 1:
            raise GeometryError(f"connection table must be cubical, got shape {s}")

    @property
    def exprs(self):
        return self._table.exprs

    def table(self, ctx):
        j = ctx.table_jet(self._table)
        return j.val, j.grad


class LeviCivita(AffineConnection):
    """Metric connection of the context metric, via the Koszul formula."""

    def table(self, ctx):
        Eg, c, g = ctx.Eg, ctx.c, ctx.g
        low = 0.5 * (
            Eg
            + Eg.t(1, 0, 2)
            - Eg.t(1, 2, 0)
            + jet_einsum("ijm,ml->ijl", c, g)
            - jet_einsum("ilm,mj->ijl", c, g)
            - jet_einsum("jlm,mi->ijl", c, g)
        )
        G = jet_einsum("ijl,lk->ijk", low, ctx.ginv)
        return G.val, G.grad


class Conjugate(AffineConnection):
    def __init__(self, base: AffineConnection):
        self.base = base

    def table(self, ctx):
        Gb = self.base.jet(ctx)
        low = ctx.Eg - jet_einsum("ikm,mj->ijk", Gb, ctx.g)
        G = jet_einsum("ijk,kl->ijl", low, ctx.ginv)
        return G.val, G.grad


class SymmetricCubic:
    """A totally symmetric cubic array C[i][j][k] = g(K_{E_i} E_j, E_k),
    raised against the context metric to the difference tensor K."""

    def __init__(self, C):
        C = np.asarray(C, float)
        if C.ndim != 3 or len(set(C.shape)) != 1:
            raise GeometryError(f"cubic array must have shape (n,n,n), got {C.shape}")
        for perm in [(0, 2, 1), (1, 0, 2), (2, 1, 0)]:
            if not np.allclose(C, C.transpose(perm), atol=1e-12):
                raise GeometryError("cubic array must be totally symmetric")
        self.C = C

    def table(self, ctx):
        K = np.einsum("ijl,lk->ijk", self.C, ctx.ginv.val)
        dK = np.einsum("ijl,lkg->ijkg", self.C, ctx.ginv.grad)
        return K, dK

    def jet(self, ctx) -> Jet:
        return Jet(*self.table(ctx))


class ShiftedConnection(AffineConnection):
    """base + sign * K for a difference tensor K."""

    def __init__(self, base: AffineConnection, cubic: SymmetricCubic, sign: float):
        self.base = base
        self.cubic = cubic
        self.sign = float(sign)

    def table(self, ctx):
        Gb, dGb = ctx.connection_table(self.base)
        K, dK = self.cubic.table(ctx)
        return Gb + self.sign * K, dGb + self.sign * dK


class MeanConnection(AffineConnection):
    """Arithmetic mean of two connections; for a dualistic torsion-free pair
    this is the metric connection."""

    def __init__(self, a: AffineConnection, b: AffineConnection):
        self.a = a
        self.b = b

    def table(self, ctx):
        Ga, dGa = ctx.connection_table(self.a)
        Gb, dGb = ctx.connection_table(self.b)
        return 0.5 * (Ga + Gb), 0.5 * (dGa + dGb)


class ProductConnection(AffineConnection):
    """Connection on a line-times-base product in the frame (d/dt, base frame).

    The d/dt direction self-couples through sign * lam(t) d/dt, mixed slots
    vanish, and the base block is the given base connection evaluated at the
    base point.
    """

    def __init__(self, base_manifold: Manifold, base_conn: AffineConnection,
                 lam: Expr, sign: float):
        self.base_manifold = base_manifold
        self.base_conn = base_conn
        self.lam = ExprTable(lam, ("t",))
        self.sign = float(sign)

    def table(self, ctx):
        n = ctx.dim
        nb = self.base_manifold.dim
        if n != nb + 1:
            raise GeometryError("product connection used on a non-product context")
        bctx = _base_context(ctx, self.base_manifold)
        Gb, dGb = bctx.connection_table(self.base_conn)
        lam = self.lam.jet2({"t": ctx.x[0]})
        G = np.zeros((n, n, n))
        dG = np.zeros((n, n, n, n))
        G[0, 0, 0] = self.sign * float(lam.val)
        dG[0, 0, 0, 0] = self.sign * float(lam.grad[0])
        G[1:, 1:, 1:] = Gb
        dG[1:, 1:, 1:, 1:] = dGb
        return G, dG


def _base_context(ctx: PointContext, base: Manifold) -> PointContext:
    # cached on the product context so both halves of a pair share it
    cache = ctx.__dict__.setdefault("_base_ctxs", {})
    key = id(base)
    if key not in cache:
        cache[key] = base.context(ctx.x[1:])
    return cache[key]


# ---------------------------------------------------------------------------
# constructions


def levi_civita() -> LeviCivita:
    return LeviCivita()


def conjugate(conn: AffineConnection) -> Conjugate:
    return Conjugate(conn)


def difference_jet(ctx: PointContext, a: AffineConnection, b: AffineConnection) -> Jet:
    """K = a - b as a (1,2) tensor jet."""
    Ga, dGa = ctx.connection_table(a)
    Gb, dGb = ctx.connection_table(b)
    return Jet(Ga - Gb, dGa - dGb)


def lower(ctx: PointContext, T: np.ndarray) -> np.ndarray:
    """C[i][j][k] = g(T_{E_i} E_j, E_k)."""
    return np.einsum("ijm,mk->ijk", T, ctx.g.val)


def torsion(ctx: PointContext, conn: AffineConnection) -> np.ndarray:
    G = conn.jet(ctx).val
    return G - G.transpose(1, 0, 2) - ctx.c.val


def random_statistical(manifold: Manifold, seed: int, scale: float = 0.5):
    """A seeded statistical pair (nabla, nabla_star) = (LC + K, LC - K) from a
    totally symmetric cubic with entries uniform in [-scale, scale]."""
    n = manifold.dim
    rng = np.random.default_rng(seed)
    C = np.zeros((n, n, n))
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                v = rng.uniform(-scale, scale)
                for p in ((i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)):
                    C[p] = v
    cubic = SymmetricCubic(C)
    lc = LeviCivita()
    return ShiftedConnection(lc, cubic, +1.0), ShiftedConnection(lc, cubic, -1.0)


def dualistic_residual(ctx: PointContext, nabla: AffineConnection,
                       nabla_star: AffineConnection) -> float:
    """Residual of E_i g_jk = g(nabla_{E_i}E_j, E_k) + g(E_j, nabla*_{E_i}E_k)."""
    G = nabla.jet(ctx).val
    Gs = nabla_star.jet(ctx).val
    rhs = np.einsum("ijm,mk->ijk", G, ctx.g.val) + np.einsum(
        "ikm,jm->ijk", Gs, ctx.g.val
    )
    return reg.rel_residual(ctx.Eg.val, rhs)


def check_dualistic(manifold: Manifold, nabla: AffineConnection,
                    nabla_star: AffineConnection, points) -> float:
    """Worst dualistic residual over the given sample points."""
    return max(dualistic_residual(manifold.context(p), nabla, nabla_star)
               for p in points)


# ---------------------------------------------------------------------------
# registered checks


def _k_jet(fix, ctx) -> Jet:
    return difference_jet(ctx, fix.nabla, fix.lc)


def _chk_stat1(fix, ctx):
    return dualistic_residual(ctx, fix.nabla, fix.nabla_star)


def _chk_torsion_nabla(fix, ctx):
    return reg.abs_max(torsion(ctx, fix.nabla))


def _chk_torsion_nabla_star(fix, ctx):
    return reg.abs_max(torsion(ctx, fix.nabla_star))


def _chk_torsion_lc(fix, ctx):
    return reg.abs_max(torsion(ctx, fix.lc))


def _chk_lc_metric(fix, ctx):
    G0 = fix.lc.jet(ctx).val
    nabla_g = (
        ctx.Eg.val
        - np.einsum("ijm,mk->ijk", G0, ctx.g.val)
        - np.einsum("ikm,jm->ijk", G0, ctx.g.val)
    )
    return reg.abs_max(nabla_g)


def _chk_mean(fix, ctx):
    G = fix.nabla.jet(ctx).val
    Gs = fix.nabla_star.jet(ctx).val
    G0 = fix.lc.jet(ctx).val
    return reg.rel_residual(0.5 * (G + Gs), G0)


def _chk_k_symm(fix, ctx):
    K = _k_jet(fix, ctx).val
    return reg.rel_residual(K, K.transpose(1, 0, 2))


def _chk_k_selfadj(fix, ctx):
    C = lower(ctx, _k_jet(fix, ctx).val)
    return reg.rel_residual(C, C.transpose(0, 2, 1))


def _chk_k_conj(fix, ctx):
    # K also measures how far nabla* sits below the metric connection
    K = _k_jet(fix, ctx).val
    G0 = fix.lc.jet(ctx).val
    Gs = fix.nabla_star.jet(ctx).val
    return reg.rel_residual(K, G0 - Gs)


def _chk_k5(fix, ctx):
    G = fix.nabla.jet(ctx).val
    G0 = fix.lc.jet(ctx).val
    K = _k_jet(fix, ctx).val
    return reg.rel_residual(lower(ctx, G), lower(ctx, K) + lower(ctx, G0))


def _chk_conj_invol(fix, ctx):
    back = Conjugate(Conjugate(fix.nabla))
    return reg.rel_residual(back.jet(ctx).val, fix.nabla.jet(ctx).val)


for _name, _fn in [
    ("DUAL-STAT1", _chk_stat1),
    ("DUAL-TORSION-NABLA", _chk_torsion_nabla),
    ("DUAL-TORSION-NABLA-STAR", _chk_torsion_nabla_star),
    ("DUAL-TORSION-LC", _chk_torsion_lc),
    ("DUAL-LC-METRIC", _chk_lc_metric),
    ("DUAL-MEAN", _chk_mean),
    ("DUAL-K-SYMM", _chk_k_symm),
    ("DUAL-K-SELFADJ", _chk_k_selfadj),
    ("DUAL-K-CONJ", _chk_k_conj),
    ("DUAL-K5", _chk_k5),
    ("DUAL-CONJ-INVOL", _chk_conj_invol),
]:
    reg.register(reg.CheckDef(name=_name, suite="dual", run=_fn, needs=("dual",)))
