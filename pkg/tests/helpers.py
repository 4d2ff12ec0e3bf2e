"""Shared test utilities: seeded random expressions and finite differences."""

from __future__ import annotations

import random

from statgeo import expr as ex


def random_expr(rng: random.Random, coords: tuple[str, ...], depth: int) -> ex.Expr:
    """Random expression tree, tame enough to evaluate on [-1.5, 1.5]^n.

    Denominators and log arguments are squared and shifted away from zero so
    derivatives stay finite on the sampling box.
    """
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.6:
            return ex.Var(rng.choice(coords))
        return ex.Num(round(rng.uniform(-3.0, 3.0), 3))
    op = rng.choice(["add", "sub", "mul", "div", "neg", "pow", "call"])
    a = random_expr(rng, coords, depth - 1)
    if op == "add":
        return ex.add(a, random_expr(rng, coords, depth - 1))
    if op == "sub":
        return ex.sub(a, random_expr(rng, coords, depth - 1))
    if op == "mul":
        return ex.mul(a, random_expr(rng, coords, depth - 1))
    if op == "div":
        b = random_expr(rng, coords, depth - 1)
        denom = ex.add(ex.mul(b, b), ex.Num(round(rng.uniform(0.5, 2.0), 3)))
        return ex.div(a, denom)
    if op == "neg":
        return ex.neg(a)
    if op == "pow":
        return ex.pow_(a, float(rng.randint(2, 3)))
    fn = rng.choice(["exp", "log", "sin", "cos", "sinh", "cosh"])
    if fn == "log":
        return ex.call("log", ex.add(ex.mul(a, a), ex.Num(round(rng.uniform(0.5, 2.0), 3))))
    if fn in ("exp", "sinh", "cosh"):
        a = ex.mul(ex.Num(0.3), a)
    return ex.call(fn, a)


def random_point(rng: random.Random, coords: tuple[str, ...]) -> dict[str, float]:
    return {c: rng.uniform(-1.5, 1.5) for c in coords}


def fd_partial(e: ex.Expr, env: dict[str, float], var: str, h: float = 1e-5) -> float:
    """Central finite-difference approximation of d(e)/d(var) at env."""
    hi = dict(env)
    lo = dict(env)
    step = h * (1.0 + abs(env[var]))
    hi[var] = env[var] + step
    lo[var] = env[var] - step
    return (ex.eval_expr(e, hi) - ex.eval_expr(e, lo)) / (2.0 * step)
