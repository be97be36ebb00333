"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 validation or verification failure,
3 resource abort.  Internal degrees are algebraic (weight i for a_i); JSON
output also carries the topological degree 2n.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .chart import adams_chart
from .cobar import CobarComplex, ext_table
from .hopf import BUILTIN_NAMES, PresentationError, builtin, load_presentation
from .linalg import AbelianGroupPresentation, Limits, ResourceLimitExceeded

EXIT_OK, EXIT_USAGE, EXIT_FAILED, EXIT_RESOURCE = 0, 1, 2, 3
FORMATS = ("json", "svg", "text")
NONNEGATIVE = ("s_min", "s_max", "p_max", "q_max", "verify_n_max")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    algebroid: str | None = None
    config: str | None = None
    bounds: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "json"
    limits: Limits = field(default_factory=Limits)

    def __post_init__(self):
        bad = {
            k: v
            for k, v in self.bounds.items()
            if isinstance(v, int) and v < (0 if k in NONNEGATIVE else 1)
        }
        if bad:
            raise UsageError(f"bounds must be positive: {bad}")
        if self.format not in FORMATS:
            raise UsageError(f"format must be one of {', '.join(FORMATS)}")
        if self.limits.max_slice_dim < 1 or self.limits.max_dense_entries < 1:
            raise UsageError("resource limits must be positive")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _limits(args) -> Limits:
    env = Limits.from_env()
    return Limits(
        max_slice_dim=args.max_slice_dim if args.max_slice_dim is not None else env.max_slice_dim,
        max_dense_entries=args.max_dense_entries if args.max_dense_entries is not None else env.max_dense_entries,
    )


def _ext_text(table) -> str:
    lines = [f"Ext over {table.complex.H.name}; rows s, columns n (topological degree 2n)"]
    header = "s\\n " + " ".join(f"{n:>10}" for n in range(table.n_max + 1))
    lines.append(header)
    for s in range(table.s_min, table.s_max + 1):
        cells = []
        for n in range(table.n_max + 1):
            g = table[(s, n)]
            cells.append(f"{'.' if g.is_trivial() else str(g):>10}")
        lines.append(f"{s:>3} " + " ".join(cells))
    for nc in table.named.values():
        lines.append(f"{nc.name}: (s,n)=({nc.s},{nc.n})")
    return "\n".join(lines) + "\n"


def _ext_svg(table) -> str:
    groups = {(s, 2 * n - s): g for (s, n), g in table.entries.items()}
    labels: dict = {}
    for nc in table.named.values():
        labels.setdefault((nc.s, 2 * nc.n - nc.s), []).append(nc.name)
    return adams_chart(groups, labels=labels, title=f"Ext over {table.complex.H.name}")


def cmd_ext(cfg: RunConfig) -> int:
    H = load_presentation(cfg.config) if cfg.config else builtin(cfg.algebroid or "de-rham-sigma")
    C = CobarComplex(H, None, cfg.limits)
    table = ext_table(
        H,
        s_max=cfg.bounds["s_max"],
        n_max=cfg.bounds["n_max"],
        inverted=cfg.bounds.get("invert", ()),
        complex=C,
    )
    if cfg.format == "text":
        _emit(_ext_text(table), cfg.output)
    elif cfg.format == "svg":
        _emit(_ext_svg(table), cfg.output)
    else:
        _emit(table.dumps() + "\n", cfg.output)
    return EXIT_OK


def verify_report(n_max: int, config: str | None = None) -> dict:
    """Consolidated verification; ``passed`` covers every hard check."""
    from .quasimodular import h0_presentation_check, verify_identities
    from .sseq import assemble_e2, d_a4_squared

    sections = {}
    hopf_checks = []
    for name in BUILTIN_NAMES:
        hopf_checks += [dict(c.to_json(), algebroid=name) for c in builtin(name).checks()]
    sections["algebroids"] = {"passed": all(c["passed"] for c in hopf_checks), "checks": hopf_checks}
    if config:
        try:
            H = load_presentation(config)
            sections["config"] = {"passed": True, "name": H.name, "failed_invariants": []}
        except PresentationError as exc:
            sections["config"] = {
                "passed": False,
                "failed_invariants": [f.to_json() for f in exc.failures],
            }
    ident = verify_identities()
    sections["identities"] = ident.to_json()
    sections["h0"] = h0_presentation_check(n_max).to_json()
    passed = all(sec["passed"] for sec in sections.values())

    d = d_a4_squared()
    e2 = assemble_e2(5, 2, presentation="stated", strict=False)
    discrepancies = {
        "identity_variants": list(ident.notes),
        "d_a4_squared": d.to_json(),
        "e2_presentation": [c.to_json() for c in e2.checks if not c.passed],
    }
    return {"passed": passed, "n_max": n_max, "sections": sections, "discrepancies": discrepancies}


def cmd_verify(cfg: RunConfig) -> int:
    report = verify_report(cfg.bounds["n_max"], cfg.config)
    _emit(_dumps(report), cfg.output)
    if not report["passed"]:
        failing = []
        for name, sec in report["sections"].items():
            if not sec["passed"]:
                items = sec.get("checks") or sec.get("rows") or sec.get("failed_invariants") or []
                for c in items:
                    if not c.get("passed", False):
                        what = c.get("invariant") or c.get("identity") or f"weight {c.get('weight')}"
                        failing.append(f"{name}: {what}" + (f"[{c['subject']}]" if c.get("subject") else ""))
        print("verification failed: " + "; ".join(failing), file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def _d3_arrows(e3) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    return [(tuple(a.source), tuple(a.target)) for a in e3.arrows]


def cmd_anss(cfg: RunConfig) -> int:
    from .sseq import apply_d3_and_collapse, assemble_e2

    stem_max = cfg.bounds["stem_max"]
    # stem = 2n - s with 0 <= s <= n, so stems <= stem_max need n <= stem_max
    n_max = s_max = stem_max
    vn = cfg.bounds.get("verify_n_max") or 0
    e2 = assemble_e2(
        n_max, s_max, presentation=cfg.bounds.get("presentation", "corrected"),
        verify_s_max=min(cfg.bounds.get("verify_s_max") or 4, s_max), verify_n_max=vn,
        limits=cfg.limits, strict=False,
    )
    e2 = type(e2)(
        e2.kind, e2.r, e2.grading, {k: g for k, g in e2.groups.items() if k[1] <= stem_max},
        e2.named, checks=e2.checks, meta=e2.meta,
    )
    report = apply_d3_and_collapse(e2, stem_max)
    out = Path(cfg.output or ".")
    out.mkdir(parents=True, exist_ok=True)
    (out / "e2.json").write_text(e2.dumps() + "\n")
    (out / "e4.json").write_text(report.e4.dumps() + "\n")
    (out / "homotopy.json").write_text(_dumps({"passed": report.passed, **report.to_json()["homotopy"]}))
    labels: dict = {}
    for name, spot in e2.named.items():
        labels.setdefault(tuple(spot), []).append(name)
    (out / "chart.svg").write_text(
        adams_chart(e2.groups, _d3_arrows(report.e3), labels, f"E2 with d3 ({e2.meta['presentation']})", x_max=stem_max)
    )
    (out / "chart_e4.svg").write_text(
        adams_chart(report.e4.groups, (), {k: [n] for n, k in report.e4.named.items()}, "E4 = E-infinity", x_max=stem_max)
    )
    ok = report.passed and e2.passed
    summary = {
        "passed": ok,
        "presentation": e2.meta["presentation"],
        "stem_max": stem_max,
        "files": sorted(p.name for p in out.iterdir() if p.suffix in (".json", ".svg")),
        "failed_checks": [c.to_json() for c in list(e2.checks) + list(report.checks) if not c.passed],
    }
    sys.stdout.write(_dumps(summary))
    return EXIT_OK if ok else EXIT_FAILED


def cmd_qexp(cfg: RunConfig) -> int:
    from .quasimodular import b2_q_expansion

    _emit(json.dumps(b2_q_expansion(cfg.bounds["N"]).to_json()) + "\n", cfg.output)
    return EXIT_OK


def cmd_bockstein(cfg: RunConfig) -> int:
    from .sseq import bockstein_e1, run_bockstein

    b = cfg.bounds
    e1 = bockstein_e1(b["p_max"], b["q_max"], b["n_max"], cfg.limits)
    run = run_bockstein(e1, b["r_max"])
    if cfg.format == "svg":
        groups, labels = {}, {}
        last = run.pages[-1]
        for (p, q, n), g in last.groups.items():
            key = (p, 2 * n - p)
            groups[key] = groups.get(key, AbelianGroupPresentation()) + g
            if not g.is_trivial():
                labels.setdefault(key, []).append(f"q={q}: {g}")
        _emit(adams_chart(groups, (), labels, f"Bockstein E{last.r} (hover for q)"), cfg.output)
    else:
        _emit(_dumps(run.to_json()), cfg.output)
    return EXIT_OK if run.passed else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tqmf", description="Ext, descent and q-expansion computations for Weierstrass curves")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def limits(p):
        p.add_argument("--max-slice-dim", type=int, default=None, help="abort above this cobar slice dimension")
        p.add_argument("--max-dense-entries", type=int, default=None, help="abort above this dense matrix size")

    p = sub.add_parser("ext", help="Ext table of a Hopf algebroid")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--algebroid", choices=BUILTIN_NAMES + ("gamma", "sigma"), default=None)
    src.add_argument("--config", help="JSON presentation file")
    p.add_argument("--s-max", type=int, default=2)
    p.add_argument("--n-max", type=int, default=6, help="algebraic internal degree bound")
    p.add_argument("--s-min", type=int, default=0)
    p.add_argument("--invert", type=int, action="append", default=[], help="prime to invert (repeatable)")
    p.add_argument("--output", "-o")
    p.add_argument("--format", choices=FORMATS, default="json")
    limits(p)

    p = sub.add_parser("verify", help="check identities, H0 and algebroid axioms")
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--config", help="also validate this JSON presentation file")
    p.add_argument("--output", "-o")
    limits(p)

    p = sub.add_parser("anss", help="descent spectral sequence: E2, d3, E4, homotopy, chart")
    p.add_argument("--stem-max", type=int, default=30)
    p.add_argument("--presentation", choices=("corrected", "stated"), default="corrected")
    p.add_argument("--verify-n-max", type=int, default=6, help="cross-check E2 against cobar up to this n (0 skips)")
    p.add_argument("--verify-s-max", type=int, default=4)
    p.add_argument("--output", "-o", help="output directory")
    limits(p)

    p = sub.add_parser("qexp", help="q-expansion of b2")
    p.add_argument("--N", "-N", type=int, default=10, dest="N")
    p.add_argument("--output", "-o")

    p = sub.add_parser("bockstein", help="filtration spectral sequence on a box")
    p.add_argument("--p-max", type=int, default=2)
    p.add_argument("--q-max", type=int, default=2)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--r-max", type=int, default=2)
    p.add_argument("--output", "-o")
    p.add_argument("--format", choices=("json", "svg"), default="json")
    limits(p)
    return parser


def _config(args) -> RunConfig:
    c = args.command
    bounds: dict = {}
    if c == "ext":
        bounds = {"s_max": args.s_max, "n_max": args.n_max, "s_min": args.s_min, "invert": tuple(args.invert)}
        if any(p < 2 for p in args.invert):
            raise UsageError("--invert takes primes")
        if args.s_min > args.s_max:
            raise UsageError("--s-min exceeds --s-max")
    elif c == "verify":
        bounds = {"n_max": args.n_max}
    elif c == "anss":
        bounds = {"stem_max": args.stem_max, "presentation": args.presentation, "verify_s_max": args.verify_s_max}
        bounds["verify_n_max"] = args.verify_n_max
    elif c == "qexp":
        bounds = {"N": args.N}
    elif c == "bockstein":
        bounds = {"p_max": args.p_max, "q_max": args.q_max, "n_max": args.n_max, "r_max": args.r_max}
    return RunConfig(
        command=c,
        algebroid=getattr(args, "algebroid", None),
        config=getattr(args, "config", None),
        bounds=bounds,
        output=getattr(args, "output", None),
        format=getattr(args, "format", "json"),
        limits=_limits(args) if hasattr(args, "max_slice_dim") else Limits.from_env(),
    )


COMMANDS = {"ext": cmd_ext, "verify": cmd_verify, "anss": cmd_anss, "qexp": cmd_qexp, "bockstein": cmd_bockstein}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = _config(args)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"tqmf: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitExceeded as exc:
        print(f"tqmf: resource limit exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except PresentationError as exc:
        print(f"tqmf: invalid presentation: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"tqmf: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())


def run() -> None:
    sys.exit(main())
