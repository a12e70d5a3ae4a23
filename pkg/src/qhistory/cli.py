"""Command-line front end.

    qhistory run <file|preset> [--order forward|reversed] [--json OUT] [--samples N --seed S]
    qhistory compare <a> <b> [--tol X] [--json OUT]
    qhistory presets

Exit codes: 0 success, 1 compare found a difference, 2 invalid input,
3 a numeric invariant was violated.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import chisquare

from .measurement import sample_histories
from .scenario_file import PRESET_FIGURES, ScenarioFileError, load, preset_document, preset_names
from .scenarios import PROB_TOL, ComparisonReport, Scenario, ScenarioError, oracle, run_and_compare
from .tensor_core import fidelity_up_to_phase

EXIT_OK, EXIT_DIFF, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3
CHI2_ALPHA = 1e-3


def _key_json(key: tuple) -> list:
    return [[name, int(k)] for name, k in key]


def _num(x):
    return None if x is None else float(x)


@dataclass
class Report:
    """Plain-data run report; ``to_json``/``from_json`` round-trip exactly."""

    metadata: dict
    rows: list
    verdict: dict

    def to_dict(self, include_runtime: bool = True) -> dict:
        meta = dict(self.metadata)
        if not include_runtime:
            meta.pop("runtime_s", None)
        return {"metadata": meta, "rows": self.rows, "verdict": self.verdict}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> Report:
        doc = json.loads(text)
        return cls(doc["metadata"], doc["rows"], doc["verdict"])


def build_report(sc: Scenario, samples: int = 0, seed: int = 0) -> Report:
    start = time.perf_counter()
    cmp: ComparisonReport = run_and_compare(sc)
    rows = [
        {
            "outcome": _key_json(r.key),
            "predicted_prob": _num(r.predicted_prob),
            "oracle_prob": _num(r.oracle_prob),
            "fidelity": _num(r.fidelity),
            "corrected_fidelity": _num(r.corrected_fidelity),
            "reversed_prob": _num(r.reversed_prob),
            "order_fidelity": _num(r.order_fidelity),
        }
        for r in cmp.rows
    ]
    verdict = {
        "order_dependent": cmp.order_dependent,
        "agrees": cmp.agrees,
        "bob_defined": cmp.bob_defined,
        "total_prob": float(sum(r.oracle_prob for r in cmp.rows)),
        "max_prob_delta": _num(cmp.max_prob_delta),
        "min_fidelity": _num(cmp.min_fidelity),
        "min_corrected_fidelity": _num(cmp.min_corrected_fidelity),
        "max_order_prob_delta": _num(cmp.max_order_prob_delta),
        "min_order_fidelity": _num(cmp.min_order_fidelity),
        "reference_order_fidelity": _num(cmp.reference_order_fidelity),
        "commutator_norms": cmp.commutators,
        "witnesses": cmp.witnesses,
    }
    if samples > 0:
        verdict["sampling"] = _sampling_block(sc, rows, samples, seed)
    metadata = {
        "scenario": sc.name,
        "d": sc.d,
        "order": [m.name for m in sc.measurement_order],
        "samples": samples,
        "seed": seed,
        "runtime_s": time.perf_counter() - start,
    }
    return Report(metadata, rows, verdict)


def _sampling_block(sc: Scenario, rows: list, samples: int, seed: int) -> dict:
    records = sample_histories(sc.initial_state(), sc.measurement_order, samples, seed)
    counts: dict = {}
    for rec in records:
        counts[rec.key] = counts.get(rec.key, 0) + 1
    keys = [tuple((n, k) for n, k in r["outcome"]) for r in rows]
    expected = np.array([r["oracle_prob"] for r in rows])
    observed = np.array([counts.get(k, 0) for k in keys], dtype=float)
    for r, k in zip(rows, keys):
        r["sampled_freq"] = counts.get(k, 0) / samples
    live = expected > 1e-12
    impossible = int(observed[~live].sum())
    e = expected[live] * samples
    e *= observed[live].sum() / e.sum()
    if live.sum() > 1:
        stat, p = chisquare(observed[live], e)
    else:
        stat, p = 0.0, 1.0
    return {
        "samples": samples,
        "seed": seed,
        "chi2": float(stat),
        "p_value": float(p),
        "passes": bool(p >= CHI2_ALPHA and impossible == 0),
        "impossible_draws": impossible,
    }


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return repr(x)
    return str(x)


def render_report(rep: Report) -> str:
    m, v = rep.metadata, rep.verdict
    lines = [f"scenario {m['scenario']}  d={m['d']}  order={' -> '.join(m['order']) or '(none)'}"]
    cols = ["outcome", "predicted_prob", "oracle_prob", "fidelity", "corrected_fidelity", "order_fidelity"]
    if rep.rows and "sampled_freq" in rep.rows[0]:
        cols.append("sampled_freq")
    table = [cols]
    for r in rep.rows:
        outcome = " ".join(f"{n}={k}" for n, k in r["outcome"]) or "(none)"
        table.append([outcome] + [_fmt(r[c]) for c in cols[1:]])
    widths = [max(len(row[i]) for row in table) for i in range(len(cols))]
    for row in table:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    lines.append("verdict:")
    for k, val in v.items():
        if isinstance(val, dict):
            for kk, vv in val.items():
                lines.append(f"  {k}[{kk}] = {_fmt(vv)}")
        else:
            lines.append(f"  {k} = {_fmt(val)}")
    lines.append(f"seed={m['seed']} samples={m['samples']} runtime_s={m['runtime_s']:.3f}")
    return "\n".join(lines)


def _numeric_breach(rep: Report) -> str | None:
    v = rep.verdict
    if abs(v["total_prob"] - 1.0) > PROB_TOL:
        return f"probabilities sum to {v['total_prob']!r}"
    if not v["agrees"]:
        return "calculus and state-vector oracle disagree"
    if "sampling" in v and v["sampling"]["impossible_draws"]:
        return "sampler drew a zero-probability branch"
    return None


def cmd_run(args) -> int:
    try:
        sc, opts = load(args.scenario)
    except (ScenarioFileError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.order == "reversed":
        sc = sc.with_order(sc.measurement_order[::-1])
    samples = args.samples if args.samples is not None else opts["samples"]
    seed = args.seed if args.seed is not None else opts["seed"]
    rep = build_report(sc, samples, seed)
    print(render_report(rep))
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(rep.to_json())
    breach = _numeric_breach(rep)
    if breach:
        print(f"numeric invariant violated: {breach}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def compare_scenarios(a: Scenario, b: Scenario) -> dict:
    """Entrywise probability deltas and Bob-state fidelities, keyed by outcome."""
    if a.d != b.d:
        raise ScenarioError(f"dimensions differ ({a.d} vs {b.d})")
    if tuple(a.bob_labels) != tuple(b.bob_labels):
        raise ScenarioError("scenarios deliver to different factors")
    oa, ob = oracle(a), oracle(b)
    if set(oa) != set(ob):
        raise ScenarioError("scenarios have different outcome keys")
    rows = []
    for key in oa:
        x, y = oa[key], ob[key]
        fid = None
        if x.state is not None and y.state is not None:
            fid = fidelity_up_to_phase(x.state, y.state)
        rows.append({
            "outcome": _key_json(key),
            "prob_a": x.prob,
            "prob_b": y.prob,
            "delta": abs(x.prob - y.prob),
            "fidelity": fid,
        })
    fids = [r["fidelity"] for r in rows if r["fidelity"] is not None]
    return {
        "a": a.name,
        "b": b.name,
        "rows": rows,
        "max_delta": max(r["delta"] for r in rows),
        "min_fidelity": min(fids) if fids else None,
    }


def cmd_compare(args) -> int:
    try:
        a, _ = load(args.a)
        b, _ = load(args.b)
        diff = compare_scenarios(a, b)
    except (ScenarioFileError, ScenarioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    lines = [f"compare {diff['a']} vs {diff['b']}"]
    for r in diff["rows"]:
        outcome = " ".join(f"{n}={k}" for n, k in r["outcome"])
        lines.append(f"  {outcome}  prob_a={_fmt(r['prob_a'])}  prob_b={_fmt(r['prob_b'])}"
                     f"  delta={_fmt(r['delta'])}  fidelity={_fmt(r['fidelity'])}")
    lines.append(f"max_delta = {_fmt(diff['max_delta'])}")
    lines.append(f"min_fidelity = {_fmt(diff['min_fidelity'])}")
    same = diff["max_delta"] <= args.tol and (
        diff["min_fidelity"] is None or diff["min_fidelity"] >= 1.0 - args.tol
    )
    lines.append("within tolerance" if same else "DIFFERENT")
    print("\n".join(lines))
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(diff, fh, indent=2)
    return EXIT_OK if same else EXIT_DIFF


def cmd_presets(args) -> int:
    for name in preset_names():
        doc = preset_document(name)
        print(f"{name:<24} Fig. {PRESET_FIGURES[name]}  {doc.get('description', '')}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qhistory", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file or preset")
    run.add_argument("scenario")
    run.add_argument("--order", choices=("forward", "reversed"), default="forward")
    run.add_argument("--json", metavar="OUT")
    run.add_argument("--samples", type=int)
    run.add_argument("--seed", type=int)
    run.set_defaults(func=cmd_run)

    cmp = sub.add_parser("compare", help="compare two scenarios branch by branch")
    cmp.add_argument("a")
    cmp.add_argument("b")
    cmp.add_argument("--tol", type=float, default=1e-9)
    cmp.add_argument("--json", metavar="OUT")
    cmp.set_defaults(func=cmd_compare)

    pre = sub.add_parser("presets", help="list bundled scenarios")
    pre.set_defaults(func=cmd_presets)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
