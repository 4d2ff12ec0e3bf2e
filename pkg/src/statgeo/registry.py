"""Named residual checks with gating, statuses, and aggregation.

A check evaluates a tensor identity on a fixture over a batch of point
contexts and reports the worst relative residual.  Checks whose identity only
holds under extra hypotheses carry a gate; when the gate fails the check
reports `hypothesis-unmet` (or `skipped`) instead of running, together with
the measured hypothesis residual.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

PASS = "pass"
FAIL = "fail"
HYPOTHESIS_UNMET = "hypothesis-unmet"
SKIPPED = "skipped"


def rel_residual(lhs, rhs) -> float:
    """max over entries of |L - R| / (1 + |L| + |R|)."""
    L = np.asarray(lhs, float)
    R = np.asarray(rhs, float)
    r = np.abs(L - R) / (1.0 + np.abs(L) + np.abs(R))
    return float(np.max(r)) if r.size else 0.0


def abs_max(a) -> float:
    a = np.asarray(a, float)
    return float(np.max(np.abs(a))) if a.size else 0.0


@dataclass
class CheckDef:
    """One named identity.

    run: fn(fix, ctx) -> float, the residual at one point.
    gate: fn(fix, ctxs, tol) -> (ok, hypothesis_residual, note); when ok is
        False the check is not graded.
    report_when_gated: still evaluate `run` behind a failed gate and report
        the measured residual in the notes (for characterisations that are
        informative even when their hypothesis is not declared).
    annotate: a fixed string, or fn(fix, ctxs) -> str, attached to the notes
        of every graded result.
    """

    name: str
    suite: str
    run: Callable
    needs: tuple = ()
    unconditional: bool = True
    gate: Callable | None = None
    gate_fail_status: str = HYPOTHESIS_UNMET
    report_when_gated: bool = False
    annotate: Callable | str | None = None


@dataclass
class CheckResult:
    name: str
    suite: str
    status: str
    max_residual: float | None
    hypothesis_residual: float | None
    points_evaluated: int
    notes: str | None = None

    def as_dict(self) -> dict:
        d = {
            "name": self.name,
            "suite": self.suite,
            "status": self.status,
            "max_residual": self.max_residual,
            "points_evaluated": self.points_evaluated,
        }
        if self.hypothesis_residual is not None:
            d["hypothesis_residual"] = self.hypothesis_residual
        if self.notes:
            d["notes"] = self.notes
        return d


REGISTRY: list[CheckDef] = []


def register(chk: CheckDef) -> CheckDef:
    if any(c.name == chk.name for c in REGISTRY):
        raise ValueError(f"duplicate check name {chk.name!r}")
    REGISTRY.append(chk)
    return chk


def run_check(chk: CheckDef, fix, ctxs, tol: float) -> CheckResult:
    missing = [n for n in chk.needs if not fix.has(n)]
    if missing:
        return CheckResult(
            chk.name, chk.suite, SKIPPED, None, None, 0,
            notes=f"fixture lacks {', '.join(missing)} structure",
        )
    note = None
    hres = None
    if chk.gate is not None:
        ok, hres, note = chk.gate(fix, ctxs, tol)
        if not ok:
            if chk.report_when_gated:
                mx = max(chk.run(fix, ctx) for ctx in ctxs)
                extra = f"residual if graded: {mx:.6e}"
                note = f"{note}; {extra}" if note else extra
            return CheckResult(
                chk.name, chk.suite, chk.gate_fail_status, None, hres,
                len(ctxs), notes=note,
            )
    mx = max(chk.run(fix, ctx) for ctx in ctxs)
    status = PASS if mx <= tol else FAIL
    if chk.annotate is not None:
        extra = chk.annotate if isinstance(chk.annotate, str) else chk.annotate(fix, ctxs)
        note = f"{note}; {extra}" if note else extra
    return CheckResult(chk.name, chk.suite, status, mx, hres, len(ctxs), notes=note)


def run_all(fix, ctxs, tol: float, names: set[str] | None = None) -> list[CheckResult]:
    defs = sorted(REGISTRY, key=lambda c: c.name)
    if names is not None:
        defs = [c for c in defs if c.name in names]
    return [run_check(c, fix, ctxs, tol) for c in defs]


def unconditional_names() -> list[str]:
    return sorted(c.name for c in REGISTRY if c.unconditional and c.gate is None)
