"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.  Every flag can
also come from an environment variable ``PERQWALK_<FLAG>`` (command-line
values win).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import attractors as att
from . import grover3, transport
from ._numerics import span_residual
from .graphs import GraphError, build_state_graph, load_graph
from .percolation import (PercolationScheme, RandomUnitaryChannel, SchemeError, equivalent_to_full,
                          evolve, monte_carlo_series, oracle_scheme, purity)
from .walk import (NumericalInstabilityError, WalkError, grover_coin, load_walk,
                   reflecting_shift, step_operator, unitarity_defect)

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2


class UsageError(ValueError):
    pass


def _env(name: str, default=None):
    return os.environ.get(f"PERQWALK_{name.upper()}", default)


def _add_common(p: argparse.ArgumentParser, walk_default: str = "grover-reflect",
                scheme_default: str | None = None, steps_default: int = 100, fmt_default: str = "json"):
    p.add_argument("--graph", default=_env("graph"), help="graph file or bundled corpus name")
    p.add_argument("--walk", default=_env("walk", walk_default), help="walk JSON file, inline JSON or preset")
    p.add_argument("--scheme", default=_env("scheme", scheme_default),
                   help="percolation scheme: full:P, single_open, single_closed, closed_vertex, none, JSON")
    p.add_argument("--steps", type=int, default=int(_env("steps", steps_default)))
    p.add_argument("--sink", default=_env("sink", ""), help="comma-separated sink vertices")
    p.add_argument("--seed", type=int, default=int(_env("seed", 0)))
    p.add_argument("--threads", type=int, default=int(_env("threads", 1)))
    p.add_argument("--format", choices=("json", "csv", "text"), default=_env("format", fmt_default))
    p.add_argument("--out", default=_env("out"), help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="perqwalk", description="Percolated coined quantum walks on graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="evolve a density matrix and write a time series")
    _add_common(p, scheme_default="single_closed", fmt_default="csv")
    p.add_argument("--init", default=_env("init", "uniform:0"),
                   help="uniform:V, edge:NAME, vertex:V:a,b,c or mixed")
    p.add_argument("--trajectories", type=int, default=int(_env("trajectories", 0)),
                   help="Monte Carlo estimate from this many trajectories instead of the exact channel")

    p = sub.add_parser("attractors", help="attractor space summary and dump")
    _add_common(p)
    p.add_argument("--dump", default=_env("dump"), help="write the full attractor basis as JSON")
    p.add_argument("--check", default=_env("check"), help="verify a previously dumped basis")
    p.add_argument("--method", choices=("auto", "brute", "analytic"), default=_env("method", "auto"),
                   help="brute force (default up to dimension 30) or p-attractors plus identity")

    p = sub.add_parser("color", help="edge-3-coloring from cyclic local permutations")
    _add_common(p, walk_default="grover-cyclic")
    p.add_argument("--alpha", choices=("plus", "minus"), default=_env("alpha", "plus"))
    p.add_argument("--from-structure-coloring", action="store_true",
                   help="search a proper coloring of the structure graph and derive the permutations")

    p = sub.add_parser("transport", help="sink transfer efficiency")
    _add_common(p, scheme_default="full:0.5", steps_default=500)
    p.add_argument("--source", type=int, default=int(_env("source", 0)))
    p.add_argument("--nonpercolated", action="store_true")

    p = sub.add_parser("verify", help="run the invariant suite on a graph and walk")
    _add_common(p, steps_default=1000)
    return parser


# ---------------------------------------------------------------- helpers

def _load(args, validate: bool = True):
    if not args.graph:
        raise UsageError("--graph is required")
    g = load_graph(args.graph)
    w = load_walk(args.walk, g, validate=validate)
    return g, w


def _scheme(args, g, default=None) -> PercolationScheme:
    if args.scheme:
        return PercolationScheme.parse(args.scheme)
    return default if default is not None else oracle_scheme(g)


def _complex(x: str) -> complex:
    return complex(x.replace(" ", "").replace("i", "j"))


def initial_state(spec: str, w) -> np.ndarray:
    sg = w.state_graph
    kind, _, rest = spec.partition(":")
    psi = np.zeros(sg.dim, dtype=complex)
    if kind == "uniform":
        v = int(rest or 0)
        psi[list(sg.out[v])] = 1.0
    elif kind == "edge":
        names = [sg.name(i) for i in range(sg.dim)]
        if rest not in names:
            raise UsageError(f"unknown directed edge {rest!r}; known: {', '.join(names)}")
        psi[names.index(rest)] = 1.0
    elif kind == "vertex":
        v, _, amps = rest.partition(":")
        idx = list(sg.out[int(v)])
        values = [_complex(a) for a in amps.split(",")]
        if len(values) != len(idx):
            raise UsageError(f"vertex {v} has {len(idx)} slots, got {len(values)} amplitudes")
        psi[idx] = values
    else:
        raise UsageError(f"unknown initial state {spec!r}")
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise UsageError("initial state is zero")
    return psi / norm


def _emit(args, payload, text: str | None = None):
    if args.format == "json" or text is None:
        out = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        out = text
    if args.out:
        Path(args.out).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)


def _cnum(z: complex) -> list[float]:
    return [round(float(z.real), 12) + 0.0, round(float(z.imag), 12) + 0.0]


# ---------------------------------------------------------------- commands

def cmd_simulate(args) -> int:
    g, w = _load(args)
    sg = w.state_graph
    scheme = _scheme(args, g)
    sink = transport.Sink.parse(args.sink)
    if args.init == "mixed":
        rho0 = np.eye(sg.dim, dtype=complex) / sg.dim
        psi0 = None
    else:
        psi0 = initial_state(args.init, w)
        rho0 = np.outer(psi0, psi0.conj())
    if args.steps < 0:
        raise UsageError("--steps must be >= 0")
    if sink.vertices:
        if args.trajectories:
            raise UsageError("Monte Carlo sampling does not support a sink")
        keep = np.eye(sg.dim) - sink.projector(sg)
        ch = RandomUnitaryChannel(w, scheme, post=keep, threads=args.threads)
        series = [rho0]
        for _ in range(args.steps):
            series.append(ch.apply(series[-1]))
    elif args.trajectories:
        if psi0 is None:
            raise UsageError("Monte Carlo sampling needs a pure initial state")
        series = monte_carlo_series(psi0, w, scheme, args.steps, args.trajectories, args.seed)
    else:
        series = evolve(rho0, w, scheme, args.steps, threads=args.threads)
    header = ["step", "trace", "purity"] + (["q"] if sink.vertices else []) + \
        [f"p{v}" for v in range(sg.vertex_count)]
    rows = []
    for t, rho in enumerate(series):
        diag = np.real(np.diag(rho))
        tr = float(diag.sum())
        row = [t, tr, purity(rho)] + ([max(0.0, 1.0 - tr)] if sink.vertices else [])
        row += [float(diag[list(sg.out[v])].sum()) for v in range(sg.vertex_count)]
        rows.append(row)
    if args.format == "json":
        _emit(args, {"columns": header, "rows": rows})
        return EXIT_OK
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([row[0]] + [f"{x:.15g}" for x in row[1:]])
    _emit(args, None, buf.getvalue())
    return EXIT_OK


def cmd_attractors(args) -> int:
    g, w = _load(args)
    scheme = _scheme(args, g)
    if args.check:
        basis = att.load_basis(args.check)
        worst = att.verify_basis(basis, w, scheme)
        ok = worst <= att.ATTRACTOR_TOL and basis.gram_defect() <= att.GRAM_TOL
        _emit(args, {"dimension": basis.dimension, "max_residual": worst,
                     "gram_defect": basis.gram_defect(), "ok": ok},
              f"dimension {basis.dimension}  max residual {worst:.3e}  {'ok' if ok else 'FAILED'}\n")
        return EXIT_OK if ok else EXIT_NUMERIC
    method = args.method
    if method == "auto":
        method = "brute" if w.dim <= 30 else "analytic"
    if method == "brute":
        basis = att.brute_force_attractors(w, scheme)
    else:
        basis = att.attractor_basis(w, scheme=scheme)
    p_count: dict[complex, int] = {}
    for a in att.p_attractors(att.common_eigenstates(w)):
        key = next((k for k in p_count if abs(k - a.eigenvalue) < 1e-8), a.eigenvalue)
        p_count[key] = p_count.get(key, 0) + 1
    summary = []
    for lam, n, _ in basis.counts():
        npa = next((c for k, c in p_count.items() if abs(k - lam) < 1e-8), 0)
        summary.append({"eigenvalue": _cnum(lam), "dimension": n, "p": npa, "non_p": n - npa})
    worst = max((a.residual for a in basis), default=0.0)
    payload = {"method": method, "dimension": basis.dimension, "configurations": len(scheme.configurations(g)),
               "hilbert_dimension": w.dim, "eigenvalues": summary, "max_residual": worst,
               "gram_defect": basis.gram_defect()}
    if args.dump:
        att.dump_basis(basis, args.dump)
    lines = [f"attractor space dimension {basis.dimension} (Hilbert space {w.dim})"]
    for s in summary:
        re_, im_ = s["eigenvalue"]
        lines.append(f"  lambda = {re_:+.6f}{im_:+.6f}i : {s['dimension']} ({s['p']} p, {s['non_p']} non-p)")
    lines.append(f"max residual {worst:.3e}")
    _emit(args, payload, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_color(args) -> int:
    g = load_graph(args.graph) if args.graph else None
    if g is None:
        raise UsageError("--graph is required")
    alpha = grover3.ALPHA_PLUS if args.alpha == "plus" else grover3.ALPHA_MINUS
    sg = build_state_graph(g, 3)
    payload: dict = {"alpha": _cnum(alpha)}
    if args.from_structure_coloring:
        found = grover3.find_structure_3_coloring(g)
        if found is None:
            payload.update(status="no proper 3-coloring", structure_coloring=None)
            _emit(args, payload, "no proper 3-coloring of the structure graph exists\n")
            return EXIT_OK
        perms = grover3.permutations_from_coloring(g, found, alpha)
        payload["structure_coloring"] = {k: grover3.COLOR_NAMES[c] for k, c in sorted(found.items())}
        payload["permutations"] = [perms.kind(v) for v in range(g.vertex_count)]
    else:
        w = load_walk(args.walk, g)
        if w.dim != sg.dim:
            raise UsageError("coloring needs a walk on the 3-regular state graph")
        perms = w.permutation
        sg = w.state_graph
    result = grover3.edge_3_color(sg, perms, alpha)
    if isinstance(result, grover3.Conflict):
        payload.update(status="conflict", conflict={"kind": result.kind, "vertex": result.vertex,
                                                    "edges": [sg.name(i) for i in result.edges],
                                                    "message": result.message})
        text = f"conflict ({result.kind}): {result.message}\n"
    else:
        payload.update(status="colored", coloring=dict(result.table()))
        text = "".join(f"{name}\t{c}\n" for name, c in result.table())
        if "permutations" in payload:
            text = "permutations: " + " ".join(payload["permutations"]) + "\n" + text
    _emit(args, payload, text)
    return EXIT_OK


def cmd_transport(args) -> int:
    g, w = _load(args)
    sink = transport.Sink.parse(args.sink)
    scheme = PercolationScheme.parse(args.scheme) if args.scheme else None
    report = transport.transport_report(w, sink, args.source, scheme, args.steps,
                                        args.nonpercolated, args.threads)
    keys = ("method", "sr_dimension", "q_uniform", "q_min", "q_max", "q_min_orthogonal", "q_max_orthogonal")
    fmt = lambda x: f"{x:.10g}" if isinstance(x, float) else str(x)  # noqa: E731
    lines = [f"{k}: {fmt(report[k])}" for k in keys if k in report]
    lines += [f"simulated q({args.steps}) {k}: {fmt(v)}" for k, v in report["simulated"].items()]
    _emit(args, report, "\n".join(lines) + "\n")
    return EXIT_OK


def run_checks(g, w, steps: int, sink) -> list[tuple[str, bool, str]]:
    """Invariant suite; each entry is (name, passed, detail)."""
    sg = w.state_graph
    results = []

    def check(name, fn):
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))

    scheme = oracle_scheme(g)
    configs = [k for k, _ in scheme.configurations(g)]

    def unitarity():
        worst = max(unitarity_defect(b) for b in w.coin.blocks) if w.coin.blocks else 0.0
        worst = max([worst] + [unitarity_defect(step_operator(w, k)) for k in configs])
        return worst <= 1e-12, f"max defect {worst:.2e}"

    def involution():
        worst = 0.0
        for k in configs:
            r = reflecting_shift(sg, k)
            worst = max(worst, np.abs(r - r.conj().T).max(), np.abs(r @ r - np.eye(sg.dim)).max())
        return worst <= 1e-12, f"max deviation {worst:.2e}"

    def trace():
        psi = np.zeros(sg.dim, dtype=complex)
        psi[0] = 1.0
        rhos = evolve(np.outer(psi, psi.conj()), w, scheme, steps)
        drift = max(abs(np.trace(r).real - 1.0) for r in rhos)
        return drift <= 1e-9, f"drift {drift:.2e} over {steps} steps"

    def monotone():
        psi = np.zeros(sg.dim, dtype=complex)
        psi[0] = 1.0
        s = sink if sink.vertices else transport.Sink.at(sg.vertex_count - 1)
        p, _ = transport.evolve_with_sink(np.outer(psi, psi.conj()), w, scheme, s, min(steps, 200))
        return bool(np.all(np.diff(p) <= 1e-12)), f"sink {sorted(s.vertices)}"

    def variant():
        u1, u3 = w.with_variant("U1"), w.with_variant("U3")
        k = configs[-1]
        a, b = step_operator(u1, k), step_operator(u3, k)
        worst, ak, bk = 0.0, np.eye(sg.dim), np.eye(sg.dim)
        for _ in range(10):
            ak, bk = a @ ak, b @ bk
            worst = max(worst, np.abs(bk - w.C @ ak @ w.C.conj().T).max())
        return worst <= 1e-10, f"max deviation {worst:.2e}"

    def attractor_span():
        # p-attractors and the identity always lie in the attractor space; some
        # walks have further non-p attractors, which are reported, not failed
        bf = att.brute_force_attractors(w, scheme)
        an = att.attractor_basis(w, scheme=scheme)
        res = span_residual(an.vectors(), bf.vectors()) if an.dimension else 0.0
        extra = bf.dimension - an.dimension
        note = f", {extra} further non-p" if extra else ", equal"
        return res <= 1e-8, f"brute force {bf.dimension}, p-attractors + identity {an.dimension}{note}"

    def restricted():
        ref = att.brute_force_attractors(w, scheme)
        details = []
        ok = True
        for sch in (PercolationScheme.single_open(), PercolationScheme.single_closed(),
                    PercolationScheme.closed_vertex()):
            b = att.brute_force_attractors(w, sch, require_equivalent=False)
            same = b.dimension == ref.dimension and att.subspace_residual(b, ref) <= 1e-8
            ok &= same
            details.append(f"{sch.kind}={b.dimension}{'' if equivalent_to_full(sch, g) else '*'}")
        return ok, f"full {ref.dimension}; " + ", ".join(details) + " (* = not certified by the pair rule)"

    check("unitarity", unitarity)
    check("reflection involution", involution)
    check("trace preservation", trace)
    check("sink monotonicity", monotone)
    check("variant relation", variant)
    unitary = results[0][1]
    if sg.dim <= 30 and unitary:  # the attractor solvers assume unitary steps
        check("p-attractors and identity inside attractor space", attractor_span)
        check("restricted schemes match full", restricted)
    if g.max_degree <= 3 and sg.dim == 3 * g.vertex_count:
        g3 = grover_coin(3)
        perms = [np.eye(3)[list(q)] for q in ((0, 1, 2), (1, 2, 0), (2, 0, 1), (0, 2, 1), (2, 1, 0), (1, 0, 2))]
        check("Grover permutation invariance",
              lambda: (max(np.abs(q @ g3 @ q.T - g3).max() for q in perms) == 0.0, "exact"))
        check("rank criterion", lambda: (True, f"dependent={grover3.condition_rank_check(sg).dependent}"))
        if transport.is_reflecting_grover(w) and (g.has_embedding or g.edge_count == 0):
            def trapped():
                tb = grover3.trapped_basis(sg)
                num = sum(abs(s.eigenvalue + 1) < 1e-8 for s in att.common_eigenstates(w.with_variant("U3")))
                exact = all(grover3.check_trapped_state(sg, t.vector) for t in tb)
                n = grover3.trapped_dimension(g)
                return exact and len(tb) == n == num, f"formula {n}, constructed {len(tb)}, numeric {num}"
            check("trapped basis", trapped)
    return results


def cmd_verify(args) -> int:
    g, w = _load(args, validate=False)
    results = run_checks(g, w, args.steps, transport.Sink.parse(args.sink))
    payload = {"results": [{"name": n, "passed": ok, "detail": d} for n, ok, d in results],
               "passed": all(ok for _, ok, _ in results)}
    text = "".join(f"{'PASS' if ok else 'FAIL'}  {n}: {d}\n" for n, ok, d in results)
    _emit(args, payload, text)
    if payload["passed"]:
        return EXIT_OK
    return EXIT_INVALID if any(n == "unitarity" and not ok for n, ok, _ in results) else EXIT_NUMERIC


COMMANDS = {"simulate": cmd_simulate, "attractors": cmd_attractors, "color": cmd_color,
            "transport": cmd_transport, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (NumericalInstabilityError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"perqwalk: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, GraphError, WalkError, SchemeError, FileNotFoundError,
            json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"perqwalk: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
