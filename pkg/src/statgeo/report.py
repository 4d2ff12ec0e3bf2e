"""Report assembly: run the registered checks on a fixture and emit a
deterministic JSON document (checks sorted by name, no timestamps)."""

from __future__ import annotations

import json

from . import registry as reg
from .structures import classify


def classification_summary(cls) -> str:
    parts = []
    if cls:
        ct = cls.get("contact")
        if ct:
            f = ct["flags"]
            if f["cosymplectic"]:
                parts.append("cosymplectic")
            elif f["kenmotsu"]:
                parts.append("Kenmotsu")
            elif f["sasakian"]:
                parts.append("Sasakian")
            elif f["almost_cosymplectic"]:
                parts.append("almost cosymplectic, non-normal")
            elif f["almost_kenmotsu"]:
                parts.append("almost Kenmotsu")
            elif f["contact_metric"]:
                parts.append("contact metric")
            else:
                parts.append("almost contact metric, outside the catalogued classes")
        her = cls.get("hermitian")
        if her:
            f = her["flags"]
            if f["kaehler"]:
                parts.append("Kaehler")
            elif f["almost_kaehler"]:
                parts.append("almost Kaehler")
            else:
                parts.append("almost Hermitian, outside the catalogued classes")
    return "; ".join(parts) or "no compatible structure declared"


def build_report(fix, n_points: int, seed: int, tol: float, box=None) -> dict:
    ctxs = fix.sample_contexts(n_points, seed, box=box)
    results = reg.run_all(fix, ctxs, tol)
    counts = {"pass": 0, "fail": 0, "hypothesis_unmet": 0, "skipped": 0}
    for r in results:
        counts[r.status.replace("-", "_")] += 1
    rep = {
        "fixture": fix.name,
        "dim": fix.manifold.dim,
        "sampling": {
            "points": n_points,
            "seed": seed,
            "box": [[lo, hi] for lo, hi in (box if box is not None else fix.box)],
            "tolerance": tol,
        },
    }
    cls = classify(fix, ctxs, tol)
    if cls is not None:
        rep["classification"] = cls
        rep["classification_summary"] = classification_summary(cls)
    rep["checks"] = [r.as_dict() for r in results]
    notes = []
    if fix.has("contact") and fix.has("dual"):
        notes.append(
            "Reeb curvature chain is graded at its endpoint identities; "
            "intermediate rearrangements are not separately checked"
        )
    rep["notes"] = notes
    rep["summary"] = counts
    return rep


def render_json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def exit_code(report: dict) -> int:
    return 1 if report["summary"]["fail"] else 0
