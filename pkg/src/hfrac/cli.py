"""Command-line front end.

Exit codes: 0 success, 1 identity failure, 2 usage or parse error,
3 numerical or domain error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

from hfrac import compose
from hfrac.compose import Orders, VerificationReport
from hfrac.errors import DSLError, HFracError
from hfrac.fracops import HKernelOp, TestFunction
from hfrac.opdsl import Registry, evaluate, parse, pretty, simplify

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    """Bad command line or configuration (exit code 2)."""


@dataclass
class RunConfig:
    ops: dict[str, HKernelOp]
    functions: dict[str, TestFunction]
    grid: list[float] = field(default_factory=lambda: [0.5, 1.0, 1.5])
    tol: float = 1e-4
    identities: dict[str, dict] = field(default_factory=dict)

    def registry(self) -> Registry:
        return Registry(dict(self.ops), dict(self.functions))


def default_config_text() -> str:
    return resources.files("hfrac").joinpath("data/default_config.json").read_text()


def load_config(path: str | None) -> RunConfig:
    try:
        text = default_config_text() if path is None else Path(path).read_text()
        doc = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    try:
        ops = {name: HKernelOp.from_json(spec) for name, spec in doc.get("ops", {}).items()}
        functions = {}
        for i, spec in enumerate(doc.get("functions", [])):
            f = TestFunction.from_json(spec)
            functions[spec.get("name") or f"f{i}"] = f
    except (HFracError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid config: {exc}") from exc
    cfg = RunConfig(ops, functions)
    cfg.grid = [float(x) for x in doc.get("grid", cfg.grid)]
    cfg.tol = float(doc.get("tol", cfg.tol))
    cfg.identities = dict(doc.get("identities", {}))
    if not cfg.tol > 0:
        raise UsageError("tol must be positive")
    for name, op in ops.items():
        if not all(x > op.a for x in cfg.grid):
            raise UsageError(f"grid points must lie to the right of op {name!r} base point")
    for name, spec in cfg.identities.items():
        for op in _as_list(spec.get("op", [])):
            if op not in ops:
                raise UsageError(f"identity {name!r} references unknown op {op!r}")
    return cfg


def _as_list(v) -> list:
    return list(v) if isinstance(v, (list, tuple)) else [v]


# ----------------------------------------------------------------- eval


def format_value(z: complex) -> str:
    z = complex(z)
    text = f"{z.real:.12f}"
    if abs(z.imag) > 1e-12 * max(1.0, abs(z.real)):
        text += f"{z.imag:+.12f}i"
    return text


def cmd_eval(args) -> int:
    cfg = load_config(args.config)
    reg = cfg.registry()
    try:
        chain = parse(args.expr, reg)
    except DSLError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        value = evaluate(chain, args.x, reg)
    except HFracError as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(format_value(value))
    return EXIT_OK


# ------------------------------------------------------------- simplify


def cmd_simplify(args) -> int:
    cfg = load_config(args.config)
    reg = cfg.registry()
    try:
        chain = parse(args.expr, reg)
        out, trace = simplify(chain, reg)
    except DSLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HFracError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(pretty(out))
    if args.trace:
        from hfrac.opdsl import RULES

        for step in trace.steps:
            print(f"  {step.rule}: {RULES[step.rule][1]}")
            print(f"    {pretty(step.before)}  =>  {pretty(step.after)}")
        for note in trace.notes:
            print(f"  note: {note}")
    for name in sorted(set(reg.ops) - set(cfg.ops)):
        op = reg.ops[name]
        beta = complex(op.beta)
        beta_text = f"{beta.real:g}" if beta.imag == 0 else f"{beta:g}"
        print(f"  {name}: orders {op.h.orders}, beta {beta_text}")
    return EXIT_OK


# --------------------------------------------------------------- verify


def identity_runs(name: str, cfg: RunConfig):
    """Yield ``(label, op, orders)`` for every parameter combination of ``name``."""
    spec = cfg.identities.get(name, {})
    ops = _as_list(spec.get("op", next(iter(cfg.ops), None)))
    mus = _as_list(spec.get("mu", 0.5))
    nus = _as_list(spec.get("nu", 0.5))
    gammas = _as_list(spec.get("gamma", 0.5))
    uses_nu = name == "thm4"
    uses_gamma = name in ("thm1", "thm2")
    for op_name, mu, nu, gamma in itertools.product(
        ops, mus, nus if uses_nu else nus[:1], gammas if uses_gamma else gammas[:1]
    ):
        tags = [] if name == "hilfer-reductions" else [str(op_name)]
        tags.append(f"mu={mu:g}")
        if uses_nu:
            tags.append(f"nu={nu:g}")
        if uses_gamma:
            tags.append(f"gamma={gamma:g}")
        op = cfg.ops.get(op_name) if op_name is not None else None
        yield f"{name}[{';'.join(tags)}]", op, Orders(float(mu), float(nu), float(gamma))


def run_verify(names: Sequence[str], cfg: RunConfig, tol: float) -> list[VerificationReport]:
    reports = []
    for name in names:
        for label, op, orders in identity_runs(name, cfg):
            for fname, f in cfg.functions.items():
                rep = compose.verify_identity(name, op, orders, f, cfg.grid, tol, label=fname)
                # keep the parameter tags in the identity column
                rows = tuple(
                    compose.VerificationRow(
                        r.identity.replace(name, label, 1), r.x, r.lhs, r.rhs
                    )
                    for r in rep.rows
                )
                reports.append(VerificationReport(f"{label}/{fname}", rows, tol))
    return reports


def cmd_verify(args) -> int:
    known = compose.IDENTITIES + compose.GAMMA0_CHECKS
    if args.identity == "all":
        names = list(compose.IDENTITIES)
    elif args.identity in known:
        names = [args.identity]
    else:
        print(f"unknown identity {args.identity!r}; choose from all, {', '.join(known)}",
              file=sys.stderr)
        return EXIT_USAGE
    cfg = load_config(args.config)
    tol = cfg.tol if args.tol is None else args.tol
    if not tol > 0:
        raise UsageError("--tol must be positive")
    try:
        reports = run_verify(names, cfg, tol)
    except HFracError as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        text = (
            compose.reports_to_json(reports)
            if args.out.endswith(".json")
            else compose.reports_to_csv(reports)
        )
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(compose.reports_to_csv(reports))
    failed = [r for r in reports if not r.passed]
    for r in reports:
        status = "pass" if r.passed else "FAIL"
        print(f"{status} {r.identity} max_rel_err={r.max_rel_err:.3e}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


# ----------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hfrac", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="evaluate an operator expression at a point")
    e.add_argument("--expr", required=True)
    e.add_argument("--x", required=True, type=float)
    e.add_argument("--config")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify", help="run identity verification sweeps")
    v.add_argument("--identity", required=True)
    v.add_argument("--config")
    v.add_argument("--out")
    v.add_argument("--tol", type=float)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simplify", help="normalise an expression with the composition rules")
    s.add_argument("--expr", required=True)
    s.add_argument("--trace", action="store_true")
    s.add_argument("--config")
    s.set_defaults(func=cmd_simplify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
