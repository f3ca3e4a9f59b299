"""Command line front end.

Every subcommand prints one JSON document to stdout (bulk data goes to files)
and includes a run manifest.  Exit codes: 0 success, 1 a checked agreement
failed, 2 usage or domain error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .dyadic import DyadicValue
from .errors import GraphSpaceError
from .expectations import (DEFAULT_DEPTH, change_of_variables, mc_expect,
                           statistic_from_registry, transfer_function)
from .graphs import Cylinder, Graph
from .harmonic import (FiniteSupportMeasure, bochner_synthesize, gram_check, inverse_wht,
                       read_table, wht, write_table, WalshSpectrum)
from .measures import (ProbabilityAssignment, atom_mass_profile, ball_measure_haar,
                       cylinder_measure, sample)
from .metrics import MultWeightSequence, WeightSequence, as_number


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int | None = None
    versions: dict = field(default_factory=lambda: {
        "graphspace": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
        "python": platform.python_version()})
    outputs: list = field(default_factory=list)

    def add_output(self, path: Path) -> None:
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        self.outputs.append({"path": str(path), "sha256": digest})

    def to_json(self) -> dict:
        return {"command": self.command, "parameters": self.parameters, "seed": self.seed,
                "versions": self.versions, "outputs": self.outputs}


def exact_json(x) -> dict | float:
    """Exact rationals as {"exact": "num/den", "decimal": float}; floats unchanged."""
    if isinstance(x, (Fraction, int)) and not isinstance(x, bool):
        x = Fraction(x)
        return {"exact": f"{x.numerator}/{x.denominator}", "decimal": float(x)}
    return float(x)


def _int_list(text: str | None) -> list[int]:
    if not text:
        return []
    return [int(t) for t in text.replace(" ", "").split(",") if t]


def _assignment(args) -> ProbabilityAssignment:
    if getattr(args, "table", None):
        entries = tuple(as_number(t) for t in args.table.split(","))
        return ProbabilityAssignment(entries, as_number(args.p) if args.p is not None else Fraction(1, 2))
    if args.p is None:
        raise UsageError("one of --p or --table is required")
    return ProbabilityAssignment.constant(as_number(args.p))


def _params(args, *skip) -> dict:
    return {k: v for k, v in vars(args).items()
            if k not in ("func", "command", "manifest") + skip and v is not None}


def _finish(report: dict, manifest: RunManifest, args) -> dict:
    report["manifest"] = manifest.to_json()
    if getattr(args, "manifest", None):
        Path(args.manifest).write_text(json.dumps(manifest.to_json(), indent=2, sort_keys=True))
    return report


# -- subcommands -------------------------------------------------------------------

def cmd_sample(args) -> tuple[dict, int]:
    p = _assignment(args)
    batch = sample(p, args.depth, args.seed, args.count)
    out = Path(args.out)
    out.write_bytes(batch.to_bytes())
    manifest = RunManifest("sample", _params(args), args.seed)
    manifest.add_output(out)
    report = {"depth": batch.depth, "count": batch.count, "seed": batch.seed,
              "probability": p.to_json(), "path": str(out),
              "bit_frequency": float(batch.bits.mean()) if batch.bits.size else 0.0}
    if args.json_out:
        jpath = Path(args.json_out)
        jpath.write_text(json.dumps(batch.to_json()))
        manifest.add_output(jpath)
    return _finish(report, manifest, args), 0


def _stat_params(args) -> dict:
    params: dict = {"k": args.k}
    if args.phi:
        if args.stat == "normx":
            params["mphi"] = MultWeightSequence(WeightSequence.parse(args.phi))
        else:
            params["phi"] = WeightSequence.parse(args.phi)
    if args.f:
        params["f"] = transfer_function(args.f)
    return params


def cmd_expect(args) -> tuple[dict, int]:
    p = _assignment(args)
    try:
        spec = statistic_from_registry(args.stat, **_stat_params(args))
    except KeyError as exc:
        raise UsageError(str(exc)) from exc
    report: dict = {"statistic": args.stat, "parameters": spec.params,
                    "probability": p.to_json()}
    code = 0
    closed = None
    if args.mode in ("closed", "both"):
        closed = spec.closed_form(p)
        report["closed_form"] = exact_json(closed)
    if args.mode in ("mc", "both"):
        est = mc_expect(spec.statistic, p, args.depth, args.seed, args.count)
        report["mc"] = est.to_json()
    if closed is not None and args.mode == "both":
        agree = est.agrees(float(closed), args.sigmas)
        report["agree_4sigma"] = agree
        code = 0 if agree else 1
    return _finish(report, RunManifest("expect", _params(args), args.seed), args), code


def cmd_transfer(args) -> tuple[dict, int]:
    try:
        f = transfer_function(args.f)
    except KeyError as exc:
        raise UsageError(str(exc)) from exc
    manifest = RunManifest("transfer", _params(args), args.seed)
    if args.exact:
        if f.steps is None:
            raise UsageError(f"{f.name} has no exact path (needs dyadic breakpoints)")
        from .expectations import exact_step_expectation
        g = exact_step_expectation(f.steps)
        i = sum((v * (b - a) for a, b, v in f.steps), Fraction(0))
        report = {"function": f.name, "graph_side": exact_json(g),
                  "interval_side": exact_json(i), "difference": exact_json(abs(g - i)),
                  "exact": True}
        return _finish(report, manifest, args), 0 if g == i else 1
    res = change_of_variables(f, args.depth, args.seed, args.count)
    report = {"function": f.name, "graph_side": res.graph_side.mean,
              "std_error": res.graph_side.std_error, "interval_side": res.interval_side,
              "difference": res.difference, "nonfinite_hits": res.nonfinite_hits,
              "agree_4sigma": res.agrees(args.sigmas), "mc": res.graph_side.to_json()}
    if res.exact_graph_side is not None:
        report["exact_graph_side"] = exact_json(res.exact_graph_side)
        report["exact_interval_side"] = exact_json(res.exact_interval_side)
    return _finish(report, manifest, args), 0 if res.agrees(args.sigmas) else 1


def cmd_measure(args) -> tuple[dict, int]:
    manifest = RunManifest(f"measure {args.query}", _params(args, "query"))
    if args.query == "cylinder":
        cyl = Cylinder.of(_int_list(args.forbidden), _int_list(args.required))
        m = cylinder_measure(cyl, _assignment(args))
        report = {"cylinder": cyl.to_json(), "measure": exact_json(m)}
    elif args.query == "ball":
        radius = DyadicValue.parse(args.radius)
        center = Graph.from_json(json.loads(args.center)) if args.center else Graph.finite()
        m = ball_measure_haar(center, radius, args.kind)
        report = {"center": center.to_json(), "radius": radius.to_json(), "kind": args.kind,
                  "measure": exact_json(m)}
    else:
        prof = atom_mass_profile(_assignment(args), args.depth)
        report = {"depth": args.depth, "pi": [exact_json(v) for v in prof.pi],
                  "pi_last": exact_json(prof.pi[-1]),
                  "g_p_prefix": "".join(map(str, prof.g_p_prefix))}
    return _finish(report, manifest, args), 0


def cmd_wht(args) -> tuple[dict, int]:
    data = Path(args.inp).read_bytes()
    table = read_table(data)
    if args.depth is not None and table.size != 1 << args.depth:
        raise UsageError(f"input has {table.size} values, expected 2^{args.depth}")
    if args.inverse:
        result = inverse_wht(WalshSpectrum(table.size.bit_length() - 1, table))
    else:
        result = wht(table).coeffs
    out = Path(args.out)
    out.write_bytes(write_table(result))
    manifest = RunManifest("wht", _params(args))
    manifest.add_output(out)
    nonzero = [int(i) for i in np.flatnonzero(np.abs(result) > 1e-12)[:64]]
    report = {"depth": table.size.bit_length() - 1, "inverse": args.inverse, "path": str(out),
              "nonzero_indices": nonzero, "energy": float(np.sum(result * result))}
    return _finish(report, manifest, args), 0


def cmd_pdcheck(args) -> tuple[dict, int]:
    mu = FiniteSupportMeasure.from_json(json.loads(Path(args.measure).read_text()))
    graphs = [Graph.from_json(g) for g in json.loads(Path(args.graphs).read_text())]
    f = bochner_synthesize(mu)
    rep = gram_check(f, graphs, args.tol)
    report = rep.to_json()
    report["f_zero"] = exact_json(f(Graph.finite()))
    return _finish(report, RunManifest("pd-check", _params(args)), args), 0 if rep.psd else 1


# -- parser -----------------------------------------------------------------------

def _add_probability(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p", help="edge probability (e.g. 0.5 or 1/2); default after --table")
    p.add_argument("--table", help="comma-separated per-edge probabilities for edges 1..m")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphspace",
        description="Exact measures, expectations and Walsh analysis on labelled graph space.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="draw seeded truncations from a product measure")
    _add_probability(s)
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", default="sample.bin")
    s.add_argument("--json-out", dest="json_out")
    s.set_defaults(func=cmd_sample)

    e = sub.add_parser("expect", help="closed-form and Monte Carlo expectations")
    e.add_argument("--stat", required=True,
                   choices=["psi_k", "norm1", "norm1_sq", "norminf", "normx", "heart2"])
    e.add_argument("--k", type=int, default=1)
    _add_probability(e)
    e.add_argument("--phi", help="weight sequence, e.g. geometric:2 or table:0.5,0.3:2:0.01")
    e.add_argument("--f", help="function of the dyadic norm for --stat heart2")
    e.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    e.add_argument("--count", type=int, default=200_000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--sigmas", type=float, default=4.0)
    e.add_argument("--mode", choices=["closed", "mc", "both"], default="both")
    e.set_defaults(func=cmd_expect)

    t = sub.add_parser("transfer", help="graph-side vs interval-side integrals")
    t.add_argument("--f", required=True,
                   help="identity | square | poly:c0:c1:... | indicator:a:b | neg-floor-log2")
    t.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    t.add_argument("--count", type=int, default=200_000)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--sigmas", type=float, default=4.0)
    t.add_argument("--exact", action="store_true", help="exact cylinder path only")
    t.set_defaults(func=cmd_transfer)

    m = sub.add_parser("measure", help="exact cylinder, ball and atom-profile queries")
    m.add_argument("query", choices=["cylinder", "ball", "atoms"])
    m.add_argument("--forbidden")
    m.add_argument("--required")
    _add_probability(m)
    m.add_argument("--radius", help="binary expansion such as 0.011")
    m.add_argument("--center", help='graph JSON, e.g. {"kind":"finite","support":[1]}')
    m.add_argument("--kind", choices=["open", "closed"], default="open")
    m.add_argument("--depth", type=int, default=10)
    m.set_defaults(func=cmd_measure)

    w = sub.add_parser("wht", help="Walsh-Hadamard transform of a table file")
    w.add_argument("--depth", type=int)
    w.add_argument("--in", dest="inp", required=True)
    w.add_argument("--out", default="spectrum.bin")
    w.add_argument("--inverse", action="store_true")
    w.set_defaults(func=cmd_wht)

    d = sub.add_parser("pd-check", help="Gram-matrix check of a synthesized positive definite function")
    d.add_argument("--measure", required=True)
    d.add_argument("--graphs", required=True)
    d.add_argument("--tol", type=float, default=1e-9)
    d.set_defaults(func=cmd_pdcheck)

    for p in (s, e, t, m, w, d):
        p.add_argument("--manifest", help="also write the run manifest to this path")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, code = args.func(args)
    except (UsageError, GraphSpaceError, ValueError, KeyError, OSError) as exc:
        kind = type(exc).__name__
        print(json.dumps({"error": kind, "message": str(exc)}), file=sys.stderr)
        return 2
    print(json.dumps(report, indent=2, sort_keys=True))
    return code


if __name__ == "__main__":
    sys.exit(main())
