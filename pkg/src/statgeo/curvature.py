"""Curvature tensors of frame connections, Ricci traces, the h-operator
family, and the Reeb-curvature identity suite.

R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_{[X,Y]} Z throughout;
K_xi acts on operators as a derivation, (K_xi phi) = K_xi phi - phi K_xi,
matching the covariant-derivative checks elsewhere in the package.
"""

from __future__ import annotations

import numpy as np

from . import registry as reg
from .connections import AffineConnection, MeanConnection, difference_jet
from .cosymplectic import a_tensors, gate_almost_cosymplectic
from .frame import GeometryError, Jet, lie_operator
from .structures import (
    almost_cosymplectic_residual,
    nabla_operator,
    nabla_vector,
)


def riemann(ctx, conn: AffineConnection) -> np.ndarray:
    """R[i][j][k][l]: component l of R(E_i, E_j)E_k."""
    Gj = conn.jet(ctx)
    G = Gj.val
    EG = ctx.E(Gj)
    return (
        EG
        - EG.transpose(1, 0, 2, 3)
        + np.einsum("jkm,iml->ijkl", G, G)
        - np.einsum("ikm,jml->ijkl", G, G)
        - np.einsum("ijm,mkl->ijkl", ctx.c.val, G)
    )


def ricci(ctx, conn: AffineConnection) -> np.ndarray:
    """S[j][k] = trace of Z -> R(Z, E_j)E_k, formed in a g-orthonormal frame
    obtained by triangular orthonormalization, then cross-checked against the
    plain frame contraction."""
    R = riemann(ctx, conn)
    try:
        b = np.linalg.inv(np.linalg.cholesky(ctx.g.val))
    except np.linalg.LinAlgError:
        raise GeometryError("metric is not positive definite; cannot orthonormalize") from None
    S = np.einsum("ui,ijkl,lm,um->jk", b, R, ctx.g.val, b)
    tie = np.einsum("ijki->jk", R)
    if reg.abs_max(S - tie) > 1e-12 * (1.0 + reg.abs_max(S)):
        raise GeometryError("ricci trace disagrees between orthonormal and frame contraction")
    return S


# ---------------------------------------------------------------------------
# operator-valued covariant derivatives with their cross-check


def nabla_vector_jet(ctx, conn: AffineConnection, v: Jet) -> Jet:
    """(nabla v)[i][k] together with its coordinate gradient; v must carry a
    second gradient."""
    G, dG = ctx.connection_table(conn)
    Ev = ctx.E_jet(v)
    val = Ev.val + np.einsum("j,ijk->ik", v.val, G)
    grad = (
        Ev.grad
        + np.einsum("ja,ijk->ika", v.grad, G)
        + np.einsum("j,ijka->ika", v.val, dG)
    )
    return Jet(val, grad)


def a_jet(ctx, conn: AffineConnection, xi: Jet) -> Jet:
    """Shape operator A = -nabla xi as an operator jet (value and gradient)."""
    nv = nabla_vector_jet(ctx, conn, xi)
    return Jet(-nv.val.T, -nv.grad.transpose(1, 0, 2))


def nabla_operator_columns(ctx, conn: AffineConnection, P: Jet) -> np.ndarray:
    """(nabla_{E_i} P)E_j assembled column by column: differentiate the vector
    field P E_j and subtract P(nabla_{E_i} E_j)."""
    G = conn.jet(ctx).val
    out = np.empty((ctx.dim, ctx.dim, ctx.dim))
    for j in range(ctx.dim):
        col = Jet(P.val[:, j], P.grad[:, j, :])
        out[:, :, j] = nabla_vector(ctx, conn, col)
    return out - np.einsum("ijm,km->ikj", G, P.val)


def nabla_a(ctx, conn: AffineConnection, A: Jet) -> np.ndarray:
    """Covariant derivative of an operator jet, graded against the independent
    column assembly before being returned."""
    one = nabla_operator(ctx, conn, A)
    two = nabla_operator_columns(ctx, conn, A)
    if reg.abs_max(one - two) > 1e-9 * (1.0 + reg.abs_max(one)):
        raise GeometryError("operator derivative implementations disagree")
    return one


def h_tensors(fix, ctx) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(h0, h, h*) with h0 = (1/2) L_xi phi, h = (1/2)(A phi - phi A),
    h* = (1/2)(A* phi - phi A*)."""
    ct = fix.contact
    P = ct.phi(ctx)
    h0 = 0.5 * lie_operator(ctx, ct.xi(ctx), P)
    A, As, _ = a_tensors(fix, ctx)
    h = 0.5 * (A @ P.val - P.val @ A)
    hs = 0.5 * (As @ P.val - P.val @ As)
    return h0, h, hs


def _k_xi_op(fix, ctx) -> np.ndarray:
    xiv = fix.contact.xi(ctx).val
    K = difference_jet(ctx, fix.nabla, fix.lc).val
    return np.einsum("i,ijk->jk", xiv, K).T


def _k_xi_phi(fix, ctx) -> np.ndarray:
    """K_xi acting on phi as a derivation."""
    P = fix.contact.phi(ctx).val
    Kx = _k_xi_op(fix, ctx)
    return Kx @ P - P @ Kx


def _mean(fix) -> MeanConnection:
    return MeanConnection(fix.nabla, fix.nabla_star)


def _reeb_op(ctx, R: np.ndarray, xiv: np.ndarray) -> np.ndarray:
    """Operator X -> R(X, xi)xi."""
    return np.einsum("ijkl,j,k->li", R, xiv, xiv)


# ---------------------------------------------------------------------------
# checks


def _chk_antisym(fix, ctx):
    r = 0.0
    for conn in (fix.nabla, fix.nabla_star, _mean(fix)):
        R = riemann(ctx, conn)
        r = max(r, reg.abs_max(R + R.transpose(1, 0, 2, 3)))
    return r


def _reeb_comm(fix, ctx, conn_diff, conn_a):
    """(nabla_Y A)X - (nabla_X A)Y for X=E_i, Y=E_j, as [i][j][l]."""
    xi = fix.contact.xi(ctx)
    NA = nabla_a(ctx, conn_diff, a_jet(ctx, conn_a, xi))
    return np.einsum("jli->ijl", NA) - np.einsum("ilj->ijl", NA)


def _chk_r0(fix, ctx):
    xiv = fix.contact.xi(ctx).val
    lhs = np.einsum("ijkl,k->ijl", riemann(ctx, fix.nabla), xiv)
    return reg.rel_residual(lhs, _reeb_comm(fix, ctx, fix.nabla, fix.nabla))


def _chk_r00(fix, ctx):
    xiv = fix.contact.xi(ctx).val
    lhs = np.einsum("ijkl,k->ijl", riemann(ctx, fix.nabla_star), xiv)
    return reg.rel_residual(lhs, _reeb_comm(fix, ctx, fix.nabla_star, fix.nabla_star))


def _chk_r03(fix, ctx):
    _, h, hs = h_tensors(fix, ctx)
    g = ctx.g.val
    r = 0.0
    for op in (h, hs):
        L = np.einsum("mi,mj->ij", op, g)
        r = max(r, reg.rel_residual(L, L.T))
    return r


def _chk_r04(fix, ctx):
    h0, h, hs = h_tensors(fix, ctx)
    kp = _k_xi_phi(fix, ctx)
    return max(
        reg.rel_residual(h0, h + 0.5 * kp), reg.rel_residual(h0, hs - 0.5 * kp)
    )


def _chk_r05(fix, ctx):
    _, h, hs = h_tensors(fix, ctx)
    return reg.rel_residual(hs - h, _k_xi_phi(fix, ctx))


def _chk_r06(fix, ctx):
    h0, h, hs = h_tensors(fix, ctx)
    return reg.rel_residual(h + hs, 2.0 * h0)


def _xi_derivative_of_phi(fix, ctx, conn) -> np.ndarray:
    P = fix.contact.phi(ctx)
    xiv = fix.contact.xi(ctx).val
    return np.einsum("i,ikj->kj", xiv, nabla_operator(ctx, conn, P))


def _chk_klm(fix, ctx):
    P = fix.contact.phi(ctx).val
    A, As, _ = a_tensors(fix, ctx)
    kp = _k_xi_phi(fix, ctx)
    dn = _xi_derivative_of_phi(fix, ctx, fix.nabla)
    ds = _xi_derivative_of_phi(fix, ctx, fix.nabla_star)
    return max(
        reg.rel_residual(dn, kp),
        reg.rel_residual(ds, -kp),
        reg.rel_residual(dn, P @ A + As @ P),
        reg.rel_residual(ds, P @ As + A @ P),
    )


def _klm_note(fix, ctxs):
    mags = {"K_xi phi": 0.0, "A phi + phi A*": 0.0, "A* phi + phi A": 0.0,
            "nabla_xi phi": 0.0, "nabla*_xi phi": 0.0}
    for ctx in ctxs:
        P = fix.contact.phi(ctx).val
        A, As, _ = a_tensors(fix, ctx)
        mags["K_xi phi"] = max(mags["K_xi phi"], reg.abs_max(_k_xi_phi(fix, ctx)))
        mags["A phi + phi A*"] = max(mags["A phi + phi A*"], reg.abs_max(A @ P + P @ As))
        mags["A* phi + phi A"] = max(mags["A* phi + phi A"], reg.abs_max(As @ P + P @ A))
        mags["nabla_xi phi"] = max(
            mags["nabla_xi phi"], reg.abs_max(_xi_derivative_of_phi(fix, ctx, fix.nabla))
        )
        mags["nabla*_xi phi"] = max(
            mags["nabla*_xi phi"], reg.abs_max(_xi_derivative_of_phi(fix, ctx, fix.nabla_star))
        )
    body = ", ".join(f"|{k}| = {v:.3e}" for k, v in mags.items())
    return f"co-vanishing family: {body}"


def _chk_b3(fix, ctx):
    xi = fix.contact.xi(ctx)
    xiv = xi.val
    mean = _mean(fix)
    lhs = 4.0 * np.einsum("ijkl,k->ijl", riemann(ctx, mean), xiv)
    rhs = (
        np.einsum("ijkl,k->ijl", riemann(ctx, fix.nabla), xiv)
        + np.einsum("ijkl,k->ijl", riemann(ctx, fix.nabla_star), xiv)
        + _reeb_comm(fix, ctx, fix.nabla_star, fix.nabla)
        + _reeb_comm(fix, ctx, fix.nabla, fix.nabla_star)
    )
    return reg.rel_residual(lhs, rhs)


def _chk_b4(fix, ctx):
    P = fix.contact.phi(ctx).val
    xiv = fix.contact.xi(ctx).val
    _, _, A0 = a_tensors(fix, ctx)
    Rop = _reeb_op(ctx, riemann(ctx, fix.lc), xiv)
    return reg.rel_residual(Rop - P @ Rop @ P, -2.0 * (A0 @ A0))


def _rzz_sides(fix, ctx):
    P = fix.contact.phi(ctx).val
    xiv = fix.contact.xi(ctx).val
    A, As, _ = a_tensors(fix, ctx)
    Rn = _reeb_op(ctx, riemann(ctx, fix.nabla), xiv)
    Rs = _reeb_op(ctx, riemann(ctx, fix.nabla_star), xiv)
    lhs = Rn - P @ Rn @ P + Rs - P @ Rs @ P
    return lhs, -2.0 * (A @ A + As @ As)


def _chk_rzz(fix, ctx):
    lhs, rhs = _rzz_sides(fix, ctx)
    return reg.rel_residual(lhs, rhs)


def _chk_szz(fix, ctx):
    xiv = fix.contact.xi(ctx).val
    A, As, _ = a_tensors(fix, ctx)
    s = np.einsum("jk,j,k->", ricci(ctx, fix.nabla), xiv, xiv)
    ss = np.einsum("jk,j,k->", ricci(ctx, fix.nabla_star), xiv, xiv)
    return reg.rel_residual(s + ss, -np.trace(A @ A + As @ As))


def gate_reeb_hypotheses(fix, ctxs, tol):
    """Class residual plus the stated hypotheses K_xi phi = 0 and A xi = 0."""
    r = almost_cosymplectic_residual(fix, ctxs)
    for ctx in ctxs:
        A, _, _ = a_tensors(fix, ctx)
        xiv = fix.contact.xi(ctx).val
        r = max(r, reg.abs_max(_k_xi_phi(fix, ctx)), reg.abs_max(A @ xiv))
    if r <= tol:
        return True, r, None
    return False, r, "hypotheses K_xi phi = 0 and A xi = 0 are not satisfied"


for _name, _fn in [
    ("CURV-ANTISYM", _chk_antisym),
    ("CURV-R0", _chk_r0),
    ("CURV-R00", _chk_r00),
    ("CURV-R05", _chk_r05),
    ("CURV-b3", _chk_b3),
]:
    _needs = ("dual",) if _name == "CURV-ANTISYM" else ("contact", "dual")
    reg.register(
        reg.CheckDef(name=_name, suite="curvature", run=_fn, needs=_needs)
    )

# R03/R04/R06 lean on the Lie-derivative operator h0, whose agreement with
# the shape-operator forms needs nabla0_xi phi = 0; that holds exactly on the
# almost cosymplectic class.
for _name, _fn in [
    ("CURV-R03", _chk_r03),
    ("CURV-R04", _chk_r04),
    ("CURV-R06", _chk_r06),
]:
    reg.register(
        reg.CheckDef(
            name=_name, suite="curvature", run=_fn,
            needs=("contact", "dual"), unconditional=False,
            gate=gate_almost_cosymplectic,
        )
    )
reg.register(
    reg.CheckDef(
        name="CURV-KLM", suite="curvature", run=_chk_klm,
        needs=("contact", "dual"), unconditional=False,
        gate=gate_almost_cosymplectic, annotate=_klm_note,
    )
)
reg.register(
    reg.CheckDef(
        name="CURV-b4", suite="curvature", run=_chk_b4,
        needs=("contact",), unconditional=False,
        gate=gate_almost_cosymplectic,
    )
)
for _name, _fn in [("CURV-RZZ", _chk_rzz), ("CURV-SZZ", _chk_szz)]:
    reg.register(
        reg.CheckDef(
            name=_name, suite="curvature", run=_fn,
            needs=("contact", "dual"), unconditional=False,
            gate=gate_reeb_hypotheses, report_when_gated=True,
        )
    )
