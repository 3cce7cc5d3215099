"""Command-line front end: every verification in the package as a subcommand.

Outputs are JSON objects or CSV tables; errors are machine-readable JSON on
stderr with distinct exit codes (see errors module).  Runs are deterministic
for a fixed seed: identical invocations produce byte-identical output.  Set
ICAND_WORKERS to parallelize the concavity grid (row order is independent of
the worker count).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .buzzers import (
    BuzzersProtocol,
    closed_form_uniform,
    cost_under,
    information_cost,
)
from .concavity import CanonicalMeasure, concavity_report
from .discretize import build, exact_ic
from .errors import IcandError, InvalidDistributionError, MalformedInputError
from .measures import InputDistribution, binary_entropy
from .optimize import SupportPattern, maximize_external, maximize_internal
from .signals import Signal, sample_terminal_posteriors, simulate_signal


def _read_measure(path: str) -> InputDistribution:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise MalformedInputError(f"cannot read measure file {path}: {exc}") from exc
    return InputDistribution.from_json(text)


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _floats(spec: str) -> list[float]:
    try:
        return [float(s) for s in spec.split(",") if s.strip()]
    except ValueError as exc:
        raise MalformedInputError(f"bad numeric list {spec!r}") from exc


def _ints(spec: str) -> list[int]:
    try:
        return [int(s) for s in spec.split(",") if s.strip()]
    except ValueError as exc:
        raise MalformedInputError(f"bad integer list {spec!r}") from exc


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_ic(args) -> int:
    mu = _read_measure(args.measure)
    report = information_cost(mu, rtol=args.rtol, atol=args.atol)
    _emit(_dump(report.to_json_obj()), args.output)
    return 0


def _cmd_uniform(args) -> int:
    rows = []
    for k in _ints(args.k):
        ext_cf, int_cf = closed_form_uniform(k)
        report = information_cost(InputDistribution.uniform_basis(k))
        rows.append(
            {
                "k": k,
                "external_closed_form": ext_cf,
                "internal_closed_form": int_cf,
                "external_quadrature": report.external_bits,
                "internal_quadrature": report.internal_bits,
                "external_abs_diff": abs(report.external_bits - ext_cf),
                "internal_abs_diff": abs(report.internal_bits - int_cf),
            }
        )
    if args.format == "csv":
        header = ",".join(rows[0])
        lines = [header] + [",".join(repr(r[c]) for c in rows[0]) for r in rows]
        _emit("\n".join(lines) + "\n", args.output)
    else:
        _emit(_dump(rows), args.output)
    return 0


def _grid_cell(task) -> dict:
    k, s, beta, eps, with_outside = task
    try:
        report = concavity_report(CanonicalMeasure(k=k, s=s, beta=beta), eps,
                                  with_outside=with_outside)
    except InvalidDistributionError as exc:
        return {"k": k, "s": s, "beta": beta, "eps": eps, "feasible": 0,
                "skip_reason": str(exc)}
    out = {"k": k, "s": s, "beta": beta, "eps": eps, "feasible": 1,
           "skip_reason": ""}
    out.update(
        ext_deficit=report.ext_deficit,
        int_deficit=report.int_deficit,
        taylor_ext=report.taylor_ext,
        taylor_int=report.taylor_int,
        residual_ext=report.residual_ext,
        residual_int=report.residual_int,
    )
    if report.outside is not None:
        out.update(
            left_ok=int(report.outside.left_ok),
            right_ok=int(report.outside.right_ok),
            eps2_ok="" if report.outside.eps2_ok is None else int(report.outside.eps2_ok),
        )
    return out


_GRID_COLUMNS = [
    "k", "s", "beta", "eps", "feasible", "ext_deficit", "int_deficit",
    "taylor_ext", "taylor_int", "residual_ext", "residual_int",
    "left_ok", "right_ok", "eps2_ok", "skip_reason",
]


def _cmd_verify_concavity(args) -> int:
    senders = _ints(args.s) if args.s else None
    tasks = []
    for k in _ints(args.k):
        for s in senders if senders is not None else range(1, k + 1):
            if s > k:
                continue
            for beta in _floats(args.beta):
                for eps in _floats(args.eps):
                    tasks.append((k, s, beta, eps, args.outside))
    workers = int(os.environ.get("ICAND_WORKERS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_grid_cell, tasks))
    else:
        rows = [_grid_cell(t) for t in tasks]

    if args.format == "json":
        _emit(_dump(rows), args.output)
    else:
        lines = [",".join(_GRID_COLUMNS)]
        for r in rows:
            lines.append(
                ",".join(
                    "" if c not in r else
                    (repr(r[c]) if isinstance(r[c], float) else str(r[c]))
                    for c in _GRID_COLUMNS
                )
            )
        _emit("\n".join(lines) + "\n", args.output)
    return 0


def _cmd_simulate_signal(args) -> int:
    mu = _read_measure(args.measure)
    if args.reveal is not None:
        sig = Signal(sender=args.reveal, p0_given_0=1.0, p0_given_1=0.0)
    elif args.sender is not None:
        if args.p0_given_0 is None or args.p0_given_1 is None:
            raise MalformedInputError(
                "--sender needs --p0-given-0 and --p0-given-1 (or use --reveal)"
            )
        sig = Signal(
            sender=args.sender,
            p0_given_0=args.p0_given_0,
            p0_given_1=args.p0_given_1,
        )
    else:
        raise MalformedInputError("specify the signal via --reveal or --sender")

    rng = np.random.default_rng(args.seed)
    sample = sample_terminal_posteriors(
        mu, sig, args.eps, rng, args.traces,
        snap_tol=args.snap_tol, max_steps=args.max_steps,
    )
    result = {
        "signal": sig.to_json_obj(),
        "eps": args.eps,
        "n_traces": sample.n_traces,
        "count0": sample.count0,
        "count1": sample.count1,
        "prob0_exact": sample.prob0_exact,
        "tv_distance": sample.tv_distance(),
        "max_weakness": sample.max_weakness,
        "max_steps_observed": sample.max_steps_observed,
        "mean_steps": sample.mean_steps,
    }
    if args.export_traces:
        rng2 = np.random.default_rng(args.seed + 1)
        result["traces"] = [
            simulate_signal(
                mu, sig, args.eps, rng2,
                snap_tol=max(args.snap_tol, 1e-3), max_steps=args.max_steps,
            ).to_json_obj()
            for _ in range(args.export_traces)
        ]
    _emit(_dump(result), args.output)
    return 0


def _cmd_discretize(args) -> int:
    mu = _read_measure(args.measure)
    reference = information_cost(mu)
    rows = []
    for delta in _floats(args.delta):
        report = exact_ic(build(mu, delta, args.horizon))
        rows.append(
            {
                "delta": delta,
                "horizon": args.horizon,
                "external_bits": report.external_bits,
                "internal_bits": report.internal_bits,
                "external_gap": abs(report.external_bits - reference.external_bits),
                "internal_gap": abs(report.internal_bits - reference.internal_bits),
            }
        )
    if args.format == "json":
        _emit(_dump({"reference": reference.to_json_obj(), "rows": rows}), args.output)
    else:
        cols = list(rows[0])
        lines = [",".join(cols)]
        lines += [",".join(repr(r[c]) for c in cols) for r in rows]
        _emit("\n".join(lines) + "\n", args.output)
    return 0


def _cmd_maximize(args) -> int:
    pattern = SupportPattern.parse(args.k, args.zero or "")
    runner = maximize_internal if args.objective == "internal" else maximize_external
    result = runner(
        pattern, args.budget, grid_step=args.grid_step, coord_tol=args.tol
    )
    _emit(_dump(result.to_json_obj()), args.output)
    if args.trace_csv:
        lines = ["evaluations,best_value_bits"]
        lines += [f"{n},{v!r}" for n, v in result.trace]
        with open(args.trace_csv, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    return 0


def _random_measure(rng, k: int) -> InputDistribution:
    from .measures import canonical_labels

    labels = canonical_labels(k)
    w = rng.dirichlet(np.ones(len(labels)))
    return InputDistribution(k, dict(zip(labels, w)))


def _cmd_continuity_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    k_values = _ints(args.k)
    rows = []
    violations = 0
    for j in range(args.pairs):
        k = int(k_values[j % len(k_values)])
        mu = _random_measure(rng, k)
        other = _random_measure(rng, k)
        width = mu.statistical_distance(other)
        w = min(1.0, args.delta_max * float(rng.uniform(0.2, 1.0)) / max(width, 1e-12))
        nu = InputDistribution(
            k,
            dict(
                zip(mu.labels, (1.0 - w) * mu.vector + w * other.vector)
            ),
        )
        delta = mu.statistical_distance(nu)
        protocol = BuzzersProtocol.from_measure(mu)
        cost_mu = cost_under(protocol, mu)
        cost_nu = cost_under(protocol, nu)
        bound = 2.0 * k * delta + 2.0 * binary_entropy(min(2.0 * delta, 1.0))
        gap_int = abs(cost_mu.internal_bits - cost_nu.internal_bits)
        gap_ext = abs(cost_mu.external_bits - cost_nu.external_bits)
        ok = gap_int <= bound
        violations += 0 if ok else 1
        rows.append(
            {
                "pair": j,
                "k": k,
                "delta": delta,
                "bound": bound,
                "internal_gap": gap_int,
                "external_gap": gap_ext,
                "ok": int(ok),
            }
        )

    # error-tolerance mixture bound, two-party: blending the protocol with a
    # full input exchange at rate d raises the cost by at most d log2|inputs|
    mixture_rows = []
    mixture_violations = 0
    for j in range(args.mixtures):
        mu = _random_measure(rng, 2)
        report = information_cost(mu)
        reveal_int = sum(mu.entropy_given_player(i) for i in (1, 2))
        reveal_ext = mu.entropy()
        for d in (0.1, 0.5, 1.0):
            mix_int = (1.0 - d) * report.internal_bits + d * reveal_int
            mix_ext = (1.0 - d) * report.external_bits + d * reveal_ext
            ok = (
                mix_int - report.internal_bits <= 2.0 * d + 1e-12
                and mix_ext - report.external_bits <= 2.0 * d + 1e-12
            )
            mixture_violations += 0 if ok else 1
            mixture_rows.append(
                {
                    "measure": j,
                    "mix_rate": d,
                    "internal_increase": mix_int - report.internal_bits,
                    "external_increase": mix_ext - report.external_bits,
                    "bound": 2.0 * d,
                    "ok": int(ok),
                }
            )

    summary = {
        "pairs": args.pairs,
        "violations": violations,
        "mixture_rows": len(mixture_rows),
        "mixture_violations": mixture_violations,
    }
    if args.format == "json":
        _emit(
            _dump({"summary": summary, "pairs": rows, "mixtures": mixture_rows}),
            args.output,
        )
    else:
        cols = list(rows[0])
        lines = [",".join(cols)]
        lines += [",".join(repr(r[c]) for c in cols) for r in rows]
        lines.append("")
        mcols = list(mixture_rows[0]) if mixture_rows else []
        if mcols:
            lines.append(",".join(mcols))
            lines += [",".join(repr(r[c]) for c in mcols) for r in mixture_rows]
        lines.append(f"# violations={violations} mixture_violations={mixture_violations}")
        _emit("\n".join(lines) + "\n", args.output)
    return 0 if violations == 0 and mixture_violations == 0 else 4


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="icand",
        description="Information complexity of multiparty AND under the "
        "buzzers protocol.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ic", help="internal/external cost of a measure")
    p.add_argument("--measure", required=True, help="measure JSON file")
    p.add_argument("--rtol", type=float, default=1e-10)
    p.add_argument("--atol", type=float, default=1e-12)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_ic)

    p = sub.add_parser("uniform", help="uniform basis measure: closed forms vs quadrature")
    p.add_argument("--k", default="2,3,4,5,8", help="comma-separated player counts")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output")
    p.set_defaults(func=_cmd_uniform)

    p = sub.add_parser("verify-concavity", help="window-deficit grid vs cubic laws")
    p.add_argument("--k", default="2,3,4,5")
    p.add_argument("--s", default="", help="senders (default: all 1..k)")
    p.add_argument("--beta", default="0.02,0.05,0.1,0.2")
    p.add_argument("--eps", default="1e-2,5e-3,2.5e-3")
    p.add_argument("--outside", action="store_true", help="include outside-window checks")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output")
    p.set_defaults(func=_cmd_verify_concavity)

    p = sub.add_parser("simulate-signal", help="weak-signal simulation walk")
    p.add_argument("--measure", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--traces", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reveal", type=int, help="fully revealing signal of this sender")
    p.add_argument("--sender", type=int)
    p.add_argument("--p0-given-0", type=float, dest="p0_given_0")
    p.add_argument("--p0-given-1", type=float, dest="p0_given_1")
    p.add_argument("--snap-tol", type=float, default=1e-6, dest="snap_tol")
    p.add_argument("--max-steps", type=int, default=10**6, dest="max_steps")
    p.add_argument("--export-traces", type=int, default=0, dest="export_traces")
    p.add_argument("--output")
    p.set_defaults(func=_cmd_simulate_signal)

    p = sub.add_parser("discretize", help="finite-round approximation sweep")
    p.add_argument("--measure", required=True)
    p.add_argument("--delta", required=True, help="comma-separated slot lengths")
    p.add_argument("--horizon", type=float, default=25.0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output")
    p.set_defaults(func=_cmd_discretize)

    p = sub.add_parser("maximize", help="maximize cost over a support face")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--zero", default="", help="comma-separated zeroed labels, e.g. 11")
    p.add_argument("--objective", choices=("internal", "external"), default="internal")
    p.add_argument("--budget", type=int, default=4000)
    p.add_argument("--grid-step", type=float, default=0.02, dest="grid_step")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--trace-csv", dest="trace_csv")
    p.add_argument("--output")
    p.set_defaults(func=_cmd_maximize)

    p = sub.add_parser("continuity-check", help="measure-continuity and mixture bounds")
    p.add_argument("--pairs", type=int, default=100)
    p.add_argument("--mixtures", type=int, default=10)
    p.add_argument("--k", default="2,3")
    p.add_argument("--delta-max", type=float, default=0.1, dest="delta_max")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--output")
    p.set_defaults(func=_cmd_continuity_check)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IcandError as exc:
        sys.stderr.write(
            _dump(
                {
                    "error": {
                        "type": type(exc).__name__,
                        "message": str(exc),
                        "exit_code": exc.exit_code,
                    }
                }
            )
            + "\n"
        )
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
