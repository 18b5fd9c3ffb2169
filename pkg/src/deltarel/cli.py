"""Command-line front end.

Subcommands::

    deltarel explain   --tree T (--instance ROW | --dataset CSV) --delta D [...]
    deltarel enumerate --tree T --instance ROW --delta D [--limit N] [--duals]
    deltarel verify    --tree T [--instance ROW | --dataset CSV] | --random N
    deltarel paths     --tree T [--instance ROW]

Exit codes: 0 success, 2 bad arguments, 3 tree/dataset parse or validation
failure, 4 infeasible seed set, 5 engine/oracle disagreement.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from . import oracle
from .enumeration import DualitySession, enumerate_min_duals, enumerate_min_idrs, verify_duality
from .explain import BudgetExhaustedError, Explanation, InfeasibleSeedError, explain_instance
from .measure import MEASURES, MeasureEngine, as_instance, path_measure
from .model import DecisionTree, TreeError, as_rational, coerce_values, load_tree
from .verify import DEFAULT_DELTAS, check_instance

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_INFEASIBLE = 4
EXIT_DISAGREE = 5

CLASS_COLUMN = "class"


class InputError(Exception):
    """Unreadable or invalid tree/dataset input (exit 3)."""


def fmt_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def rational_json(q: Fraction) -> dict[str, str]:
    return {"exact": fmt_rational(q), "decimal": f"{float(q):.6g}"}


def rational_from_json(d: dict[str, str]) -> Fraction:
    return Fraction(d["exact"])


@dataclass
class Record:
    instance_id: int
    values: list
    label: Any
    subset: list[int]
    epsilon: Fraction
    precision: Fraction
    time_s: float
    declared: Any = None
    trace: list[dict] | None = None

    @property
    def size(self) -> int:
        return len(self.subset)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "instance_id": self.instance_id,
            "values": self.values,
            "class": self.label,
            "subset": self.subset,
            "size": self.size,
            "epsilon": rational_json(self.epsilon),
            "precision": rational_json(self.precision),
            "time_s": self.time_s,
        }
        if self.declared is not None:
            d["declared_class"] = self.declared
            d["agrees"] = str(self.declared) == str(self.label)
        if self.trace is not None:
            d["trace"] = self.trace
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Record":
        return cls(d["instance_id"], d["values"], d["class"], d["subset"],
                   rational_from_json(d["epsilon"]), rational_from_json(d["precision"]),
                   d["time_s"], d.get("declared_class"), d.get("trace"))


@dataclass
class RunReport:
    config: dict[str, Any]
    records: list[Record] = field(default_factory=list)

    def aggregates(self) -> dict[str, Any]:
        if not self.records:
            return {"count": 0}
        sizes = [r.size for r in self.records]
        times = [r.time_s for r in self.records]
        precs = [r.precision for r in self.records]
        out = {
            "count": len(self.records),
            "size_mean": statistics.fmean(sizes),
            "size_max": max(sizes),
            "size_std": statistics.pstdev(sizes),
            "time_mean": statistics.fmean(times),
            "time_max": max(times),
            "precision_mean": rational_json(sum(precs, Fraction(0)) / len(precs)),
            "precision_min": rational_json(min(precs)),
        }
        declared = [r for r in self.records if r.declared is not None]
        if declared:
            agree = sum(str(r.declared) == str(r.label) for r in declared)
            out["declared_agreement"] = agree / len(declared)
        return out

    def to_dict(self) -> dict[str, Any]:
        return {"config": self.config, "records": [r.to_dict() for r in self.records],
                "aggregates": self.aggregates()}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunReport":
        return cls(d["config"], [Record.from_dict(r) for r in d["records"]])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["instance_id", "class", "size", "subset", "epsilon", "epsilon_decimal",
                    "precision", "precision_decimal", "time_s"])
        for r in self.records:
            w.writerow([r.instance_id, r.label, r.size, " ".join(map(str, r.subset)),
                        fmt_rational(r.epsilon), f"{float(r.epsilon):.6g}",
                        fmt_rational(r.precision), f"{float(r.precision):.6g}", f"{r.time_s:.6f}"])
        return buf.getvalue()


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of feature ids, got {text!r}")


def _order(text: str):
    if text in ("asc", "greedy"):
        return text
    return _int_list(text)


def _delta(text: str) -> Fraction:
    try:
        d = as_rational(text)
    except (ValueError, TypeError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")
    if not 0 <= d <= 1:
        raise argparse.ArgumentTypeError(f"delta must lie in [0, 1], got {text}")
    return d


def _csv_row(text: str) -> list[str]:
    return next(csv.reader([text]))


def _load_tree(path: str) -> DecisionTree:
    try:
        return load_tree(path)
    except OSError as exc:
        raise InputError(f"cannot read tree {path}: {exc.strerror}")
    except TreeError as exc:
        raise InputError(str(exc))


def _instance_values(tree: DecisionTree, row: Sequence[str]) -> tuple:
    try:
        return coerce_values(tree, row)
    except ValueError as exc:
        raise InputError(f"bad instance: {exc}")


def read_dataset(tree: DecisionTree, path: str, unique: bool = False) -> list[tuple[int, tuple, Any]]:
    """Rows of a CSV dataset as ``(row id, values, declared class or None)``.

    The header must name every feature of the tree; an optional ``class``
    column carries a declared label used only for agreement reporting.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read dataset {path}: {exc.strerror}")
    except csv.Error as exc:
        raise InputError(f"malformed CSV in {path}: {exc}")
    if not rows:
        raise InputError(f"dataset {path} is empty")
    header = [h.strip() for h in rows[0]]
    names = [f.name for f in tree.features]
    unknown = [h for h in header if h not in names and h != CLASS_COLUMN]
    missing = [n for n in names if n not in header]
    if unknown or missing:
        raise InputError(f"dataset header mismatch: unknown columns {unknown}, missing features {missing}")
    cols = [header.index(n) for n in names]
    class_col = header.index(CLASS_COLUMN) if CLASS_COLUMN in header else None
    out = []
    seen = set()
    for rid, row in enumerate(rows[1:], start=1):
        if not row:
            continue
        if len(row) != len(header):
            raise InputError(f"dataset row {rid} has {len(row)} fields, header has {len(header)}")
        try:
            values = coerce_values(tree, [row[c] for c in cols])
        except ValueError as exc:
            raise InputError(f"dataset row {rid}: {exc}")
        if unique:
            if values in seen:
                continue
            seen.add(values)
        out.append((rid, values, None if class_col is None else row[class_col]))
    return out


def _trace_json(expl: Explanation) -> list[dict]:
    return [{"feature": s.feature, "epsilon": rational_json(s.epsilon), "decision": "keep" if s.kept else "drop"}
            for s in expl.trace]


def _explain_one(tree: DecisionTree, args, values: tuple) -> tuple[Explanation, float]:
    kwargs: dict[str, Any] = {}
    if args.algorithm == "idrs":
        kwargs = {"order": args.order, "seed": args.seed_set, "measure": args.measure}
    elif args.budget is not None:
        kwargs = {"budget": args.budget}
    start = time.perf_counter()
    expl = explain_instance(tree, values, args.delta, args.algorithm, **kwargs)
    return expl, time.perf_counter() - start


def cmd_explain(args) -> int:
    tree = _load_tree(args.tree)
    if args.instance is not None:
        rows = [(1, _instance_values(tree, _csv_row(args.instance)), None)]
    else:
        rows = read_dataset(tree, args.dataset, unique=args.unique)
    config = {
        "tree": args.tree,
        "delta": fmt_rational(args.delta),
        "algorithm": args.algorithm,
        "order": args.order,
        "seed_set": args.seed_set,
        "measure": args.measure,
        "unique": args.unique,
    }
    report = RunReport(config)
    try:
        if args.jobs > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(lambda r: _explain_one(tree, args, r[1]), rows))
        else:
            results = [_explain_one(tree, args, r[1]) for r in rows]
    except InfeasibleSeedError as exc:
        _diagnostic("infeasible-seed", str(exc))
        return EXIT_INFEASIBLE
    except BudgetExhaustedError as exc:
        _diagnostic("budget-exhausted", str(exc))
        return EXIT_INFEASIBLE
    except ValueError as exc:
        _diagnostic("bad-arguments", str(exc))
        return EXIT_USAGE
    for (rid, values, declared), (expl, elapsed) in zip(rows, results):
        report.records.append(Record(
            instance_id=rid,
            values=list(values),
            label=as_instance(tree, values).label,
            subset=expl.features,
            epsilon=expl.epsilon,
            precision=expl.precision,
            time_s=elapsed,
            declared=declared,
            trace=_trace_json(expl) if args.algorithm == "idrs" else None,
        ))
    text = report.to_csv() if args.format == "csv" else json.dumps(report.to_dict(), indent=2) + "\n"
    _emit(text, args.output)
    return EXIT_OK


def cmd_enumerate(args) -> int:
    tree = _load_tree(args.tree)
    values = _instance_values(tree, _csv_row(args.instance))
    out: dict[str, Any] = {"config": {"tree": args.tree, "instance": list(values),
                                      "delta": fmt_rational(args.delta), "limit": args.limit,
                                      "measure": args.measure}}
    if args.limit is None:
        session = DualitySession(tree, values, args.delta, measure=args.measure).run()
        cmin = [session.engine.subset(s) for s in session.cmin]
        dmin = [session.engine.subset(t) for t in session.dmin]
        c_trunc = d_trunc = False
    else:
        cres = enumerate_min_idrs(tree, values, args.delta, limit=args.limit, measure=args.measure)
        cmin, c_trunc = cres.sets(), cres.truncated
        dmin, d_trunc = [], False
        if args.duals:
            dres = enumerate_min_duals(tree, values, args.delta, limit=args.limit, measure=args.measure)
            dmin, d_trunc = dres.sets(), dres.truncated
    engine = MeasureEngine(tree, values, measure=args.measure)
    out["c_min"] = [{"subset": sorted(s), "epsilon": rational_json(engine.epsilon(s)),
                     "precision": rational_json(engine.precision(s))} for s in cmin]
    out["c_truncated"] = c_trunc
    if args.duals:
        out["d_min"] = [{"subset": sorted(t)} for t in dmin]
        out["d_truncated"] = d_trunc
        if c_trunc or d_trunc:
            out["duality"] = {"ok": None, "reason": "skipped: a family was truncated"}
        else:
            v = verify_duality(cmin, dmin)
            out["duality"] = {"ok": v.ok, "counterexample": None if v.counterexample is None
                              else sorted(v.counterexample), "reason": v.reason}
    _emit(json.dumps(out, indent=2) + "\n", args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    rng = random.Random(args.seed)
    deltas = [args.delta] if args.delta is not None else list(DEFAULT_DELTAS)
    cases: list[tuple[str, DecisionTree, list[tuple]]] = []
    if args.random:
        for k in range(args.random):
            m = rng.randint(2, args.features)
            sizes = [rng.choice((2, 2, 3)) if m <= 8 else 2 for _ in range(m)]
            t = oracle.random_tree(m, sizes, weighted=bool(k % 2), seed=args.seed * 100003 + k)
            cases.append((f"random#{k}", t, [oracle.random_point(t, rng) for _ in range(args.samples)]))
    if args.tree:
        tree = _load_tree(args.tree)
        if args.instance is not None:
            points = [_instance_values(tree, _csv_row(args.instance))]
        elif args.dataset is not None:
            points = [v for _, v, _ in read_dataset(tree, args.dataset, unique=True)]
        else:
            points = [oracle.random_point(tree, rng) for _ in range(args.samples)]
        cases.append((args.tree, tree, points))
    if not cases:
        _diagnostic("bad-arguments", "nothing to verify: give --tree or --random")
        return EXIT_USAGE
    checked = 0
    for name, tree, points in cases:
        for values in points:
            try:
                bad = check_instance(tree, values, deltas=deltas, rng=rng)
            except oracle.OracleCapExceeded as exc:
                _diagnostic("oracle-cap", f"{name}: {exc}")
                return EXIT_INPUT
            checked += 1
            if bad:
                worst = min(bad, key=lambda d: (len(d.subset) if d.subset is not None else 0))
                print(f"DISAGREE {name}: {worst}")
                return EXIT_DISAGREE
    print(f"ok: {checked} instance(s) across {len(cases)} tree(s) agree with the brute-force oracle")
    return EXIT_OK


def cmd_paths(args) -> int:
    tree = _load_tree(args.tree)
    label = None
    if args.instance is not None:
        label = as_instance(tree, _instance_values(tree, _csv_row(args.instance))).label
    rows = []
    counts = {"P": 0, "Q": 0, "R": 0}
    for p in tree.paths:
        kind = "R" if label is None else ("P" if p.label == label else "Q")
        counts[kind] += 1
        prob = path_measure(p, tree.features)
        rows.append({"path": f"{kind}_{counts[kind]}", "nodes": list(p.nodes), "class": p.label,
                     "probability": rational_json(prob)})
    total = sum((path_measure(p, tree.features) for p in tree.paths), Fraction(0))
    if args.format == "json":
        text = json.dumps({"paths": rows, "sum": rational_json(total)}, indent=2) + "\n"
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["path", "nodes", "class", "probability", "decimal"])
        for r in rows:
            w.writerow([r["path"], " ".join(r["nodes"]), r["class"], r["probability"]["exact"],
                        r["probability"]["decimal"]])
        w.writerow(["sum", "", "", fmt_rational(total), f"{float(total):.6g}"])
        text = buf.getvalue()
    else:
        lines = [f"{'path':<6} {'class':<6} {'probability':<14} {'decimal':<10} nodes"]
        for r in rows:
            lines.append(f"{r['path']:<6} {str(r['class']):<6} {r['probability']['exact']:<14} "
                         f"{r['probability']['decimal']:<10} {'-'.join(r['nodes'])}")
        lines.append(f"{'sum':<6} {'':<6} {fmt_rational(total):<14} {float(total):<10.6g}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.output)
    return EXIT_OK


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _diagnostic(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": {"kind": kind, "message": message}}) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deltarel", description="Exact probabilistic explanations for decision trees.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explain", help="explain one instance or a dataset")
    p.add_argument("--tree", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--instance", help="one CSV row of feature values")
    src.add_argument("--dataset", help="CSV file with a header row of feature names")
    p.add_argument("--delta", required=True, type=_delta)
    p.add_argument("--algorithm", choices=("idrs", "mincard"), default="idrs")
    p.add_argument("--order", type=_order, default="asc", help="asc, greedy, or a list such as 1,2,3")
    p.add_argument("--seed-set", type=_int_list)
    p.add_argument("--measure", choices=MEASURES, default="joint")
    p.add_argument("--budget", type=int, help="largest size tried by mincard")
    p.add_argument("--unique", action="store_true", help="drop repeated dataset rows")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("enumerate", help="all minimal relevant sets (and duals)")
    p.add_argument("--tree", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--delta", required=True, type=_delta)
    p.add_argument("--limit", type=int)
    p.add_argument("--duals", action="store_true")
    p.add_argument("--measure", choices=MEASURES, default="joint")
    p.add_argument("--output")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("verify", help="check the engine against the brute-force oracle")
    p.add_argument("--tree")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--instance")
    src.add_argument("--dataset")
    p.add_argument("--delta", type=_delta)
    p.add_argument("--random", type=int, default=0, help="also check this many seeded random trees")
    p.add_argument("--features", type=int, default=8, help="max features of random trees")
    p.add_argument("--samples", type=int, default=3, help="random instances per tree")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("paths", help="list root-to-leaf paths with exact probabilities")
    p.add_argument("--tree", required=True)
    p.add_argument("--instance", help="label paths P (same class) / Q (other classes)")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--output")
    p.set_defaults(func=cmd_paths)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1 or (getattr(args, "limit", None) or 1) < 1:
        parser.error("--jobs and --limit must be positive")
    try:
        return args.func(args)
    except InputError as exc:
        _diagnostic("input", str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
