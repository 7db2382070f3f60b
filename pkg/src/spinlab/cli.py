"""Command-line front end: ``spinlab {scaling,gate,smooth,geometry}``.

Every run writes its data files plus one ``manifest.json`` into ``--out-dir``.
Data files are deterministic; timing lives only in the manifest.

Exit codes: 0 success, 2 criterion not met, 3 CNOT synthesis did not
converge, 4 no revival window, 64 usage error, 65 malformed graph input.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ContractError, NoRevivalWindowError
from .evolution import IntegratorConfig

log = logging.getLogger("spinlab")

EXIT_OK = 0
EXIT_CRITERION = 2
EXIT_NO_CONVERGENCE = 3
EXIT_NO_WINDOW = 4
EXIT_USAGE = 64
EXIT_DATA = 65

SLOPE_WINDOW = (0.85, 1.15)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _write(out_dir: Path, name: str, text: str, outputs: list[str]) -> None:
    path = out_dir / name
    path.write_text(text, encoding="utf-8")
    outputs.append(name)


def _dump(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------


def cmd_scaling(args, out_dir: Path, outputs: list[str]) -> int:
    from .ising_limit import DetuningPattern, scaling_sweep

    if len(args.deltas) < 3:
        raise UsageError("--deltas needs at least three values")
    if any(d <= 0 for d in args.deltas):
        raise UsageError("--deltas values must be positive")
    pattern = DetuningPattern(args.pattern.upper())
    # flags give Delta in units of J; the sweep works in delta = J / Delta
    small = [1.0 / d for d in args.deltas]
    try:
        report = scaling_sweep(pattern, small, args.t, args.n_sites, args.alpha, topology=args.topology)
    except ContractError as exc:
        raise UsageError(str(exc)) from None
    _write(out_dir, "scaling.csv", report.to_csv(), outputs)
    lo, hi = SLOPE_WINDOW
    ok = lo <= report.fitted_slope <= hi
    print(f"slope {report.fitted_slope:.6f} ({'within' if ok else 'outside'} [{lo}, {hi}])")
    return EXIT_OK if ok else EXIT_CRITERION


def cmd_gate(args, out_dir: Path, outputs: list[str]) -> int:
    from .gate_synth import makhlin, synthesize_cnot
    from .triplet_gate import primitive_gate_numeric

    uses = args.synthesize_cnot_uses
    if uses is not None and not 1 <= uses <= 4:
        raise UsageError("--synthesize-cnot-uses must be in 1..4")
    gate = primitive_gate_numeric(args.j_xy, args.alpha * args.j_xy, frame=args.frame, zero_state=args.zero_state)
    inv = makhlin(gate.matrix)
    doc = json.loads(gate.to_json())
    doc["alpha"] = args.alpha
    doc["makhlin"] = {"g1": [inv.g1.real, inv.g1.imag], "g2": inv.g2}
    _write(out_dir, "gate.json", _dump(doc), outputs)
    print(f"t_R = {gate.meta['t_R']:.12g}")
    if uses is None:
        return EXIT_OK
    res = synthesize_cnot(gate.matrix, uses, seed=args.seed, restarts=args.restarts, method=args.optimizer)
    _write(out_dir, "circuit.json", _dump(json.loads(res.to_json())), outputs)
    print(f"CNOT distance {res.distance:.3e} with {res.circuit.uses} uses ({'converged' if res.converged else 'not converged'})")
    return EXIT_OK if res.converged else EXIT_NO_CONVERGENCE


def cmd_smooth(args, out_dir: Path, outputs: list[str]) -> int:
    from .svg import line_plot_svg
    from .switching import TripletSystem, barrier_trace, search_flat_duration

    config = IntegratorConfig(dt=args.dt)
    try:
        res = search_flat_duration(
            args.profile,
            t_delta=args.t_delta,
            alpha=args.alpha,
            passive_detuning=args.passive_detuning,
            config=config,
            threshold=args.threshold,
        )
    except NoRevivalWindowError as exc:
        print(f"no revival window: {exc}", file=sys.stderr)
        return EXIT_NO_WINDOW
    _write(out_dir, "trace.csv", res.trace_csv(), outputs)
    _write(out_dir, "result.json", _dump(json.loads(res.to_json())), outputs)

    system = TripletSystem(1.0, args.alpha)
    prof = res.profile
    times, sz = barrier_trace(system, prof, IntegratorConfig(dt=res.dt), samples=args.samples)
    labels = [f"|{b}>" for b in ("00", "01", "10", "11")]
    svg = line_plot_svg(
        [
            {"x": times, "series": [prof.value(times)], "labels": ["b(t)"], "title": f"{args.profile} profile", "ylabel": "barrier Zeeman"},
            {"x": times, "series": list(sz.T), "labels": labels, "title": "barrier polarisation", "ylabel": "<sigma_z>"},
        ]
    )
    _write(out_dir, "profile.svg", svg, outputs)
    print(f"flat duration {res.optimal_flat_duration:.10g}, revival error {res.revival_error:.3e}, entangling {res.entangling}")
    return EXIT_OK if res.revived else EXIT_CRITERION


def cmd_geometry(args, out_dir: Path, outputs: list[str]) -> int:
    from .geometry import LATTICES, SpinGraph, candidates_csv, commensurate_search, r_q

    lo, hi = args.detuning_range
    if args.commensurate_k is not None and (hi < lo or args.step <= 0):
        raise UsageError("--detuning-range must be increasing and --step positive")
    if args.lattice == "custom-json":
        if not args.graph_file:
            raise UsageError("--lattice custom-json needs --graph-file")
        try:
            text = Path(args.graph_file).read_text(encoding="utf-8")
        except OSError as exc:
            print(f"cannot read graph file: {exc}", file=sys.stderr)
            return EXIT_DATA
        try:
            graph = SpinGraph.from_json(text)
            r_q(graph)
        except ContractError as exc:
            print(f"malformed graph: {exc}", file=sys.stderr)
            return EXIT_DATA
    else:
        graph = LATTICES[args.lattice]()
    ratio = r_q(graph)
    doc = graph.to_dict()
    doc["r_q"] = str(ratio)
    _write(out_dir, "graph.json", _dump(doc), outputs)
    _write(out_dir, "r_q.txt", f"{ratio}\n", outputs)
    print(f"r_q = {ratio}")
    if args.commensurate_k is not None:
        n = int(round((hi - lo) / args.step))
        grid = np.round(lo + args.step * np.arange(n + 1), 10)
        try:
            cands = commensurate_search(args.commensurate_k, 1.0, args.alpha, grid, args.tolerance)
        except ContractError as exc:
            raise UsageError(str(exc)) from None
        _write(out_dir, "candidates.csv", candidates_csv(cands), outputs)
        print(f"{len(cands)} commensurate candidate(s)")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spinlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"spinlab {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out-dir", default=".", help="directory for data files and manifest")
        sp.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("scaling", help="Ising-limit residual versus detuning")
    common(s)
    s.add_argument("--n-sites", type=int, default=6)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--deltas", type=_float_list, default=[50.0, 100.0, 200.0, 400.0], help="base detunings Delta/J, comma separated")
    s.add_argument("--pattern", choices=["abab", "abcabc"], default="abab")
    s.add_argument("--topology", choices=["ring", "open"], default="ring")
    s.set_defaults(func=cmd_scaling)

    g = sub.add_parser("gate", help="primitive triplet gate and CNOT synthesis")
    common(g)
    g.add_argument("--alpha", type=float, default=0.0)
    g.add_argument("--j-xy", type=float, default=1.0)
    g.add_argument("--frame", choices=["raw", "passive"], default="passive")
    g.add_argument("--zero-state", choices=["up", "down"], default="up")
    g.add_argument("--synthesize-cnot-uses", type=int, default=None)
    g.add_argument("--restarts", type=int, default=64)
    g.add_argument("--optimizer", choices=["simplex", "least_squares"], default="simplex")
    g.set_defaults(func=cmd_gate)

    m = sub.add_parser("smooth", help="flat-duration search for a switching profile")
    common(m)
    m.add_argument("--profile", choices=["abrupt", "cos2", "sin4"], default="cos2")
    m.add_argument("--t-delta", type=float, default=1.25)
    m.add_argument("--alpha", type=float, default=0.7)
    m.add_argument("--passive-detuning", type=float, default=100.0)
    m.add_argument("--dt", type=float, default=1e-3)
    m.add_argument("--threshold", type=float, default=1e-6)
    m.add_argument("--samples", type=int, default=400)
    m.set_defaults(func=cmd_smooth)

    y = sub.add_parser("geometry", help="array layouts and commensurate revivals")
    common(y)
    y.add_argument("--lattice", choices=["chain", "hex", "hex-complement", "custom-json"], default="chain")
    y.add_argument("--graph-file")
    y.add_argument("--commensurate-k", type=int, choices=[2, 3, 4])
    y.add_argument("--detuning-range", type=_float_list, default=[-10.0, 10.0])
    y.add_argument("--step", type=float, default=0.01)
    y.add_argument("--alpha", type=float, default=1.0)
    y.add_argument("--tolerance", type=float, default=1e-6)
    y.set_defaults(func=cmd_geometry)
    return p


def _params(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func", "verbose")}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "detuning_range", None) is not None and len(args.detuning_range) != 2:
        parser.error("--detuning-range takes two comma-separated values")

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: list[str] = []
    start = time.perf_counter()
    stamp = datetime.now(timezone.utc).isoformat()
    try:
        code = args.func(args, out_dir, outputs)
    except UsageError as exc:
        parser.error(str(exc))
    manifest = {
        "command": args.command,
        "params": _params(args),
        "seed": args.seed,
        "version": __version__,
        "outputs": outputs,
        "exit_code": code,
        "timestamp": stamp,
        "duration_s": time.perf_counter() - start,
    }
    (out_dir / "manifest.json").write_text(_dump(manifest), encoding="utf-8")
    return code


if __name__ == "__main__":
    sys.exit(main())
