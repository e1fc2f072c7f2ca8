"""``kmslab`` command-line interface.

Exit codes: 0 success (or a state exists), 2 usage or input error,
3 no state exists, 4 undetermined, 5 an internal cross-check failed.
"""

from __future__ import annotations

import argparse
import csv
import decimal
import json
import math
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .cover import build_cover, verify_extension
from .errors import KmsLabError
from .growth import extremal_birkhoff, growth_rates, mean_cycle, edge_weights
from .kms import kms_report, prepare
from .oracle import OracleBudget, brute_cover, brute_cycles, brute_preimages, brute_rho
from .presentations import EpPoint, Potential, essentialize, load_potential, load_presentation, random_point
from .cover import base_preimage_count
from .ruelle import spectral_radius, transfer_matrix

EXIT_OK, EXIT_USAGE, EXIT_NOT_EXISTS, EXIT_UNDETERMINED, EXIT_CHECK = 0, 2, 3, 4, 5
VERDICT_EXIT = {"exists": EXIT_OK, "not-exists": EXIT_NOT_EXISTS, "undetermined": EXIT_UNDETERMINED}


@dataclass(frozen=True)
class RunConfig:
    command: str
    presentation: Path
    potential: Path | None = None
    root_tol: float = 1e-8
    eigen_tol: float = 1e-8
    bracket_slack: float = 1e-9
    horizon: int = 12
    bracket: tuple[float, float] | None = None
    fmt: str = "json"
    seed: int = 0

    def __post_init__(self):
        if min(self.root_tol, self.eigen_tol, self.bracket_slack) <= 0:
            raise ValueError("tolerances must be positive")
        if self.bracket is not None and not self.bracket[0] < self.bracket[1]:
            raise ValueError("bracket needs a < b")
        if self.horizon < 2:
            raise ValueError("horizon must be at least 2")


# ---------------------------------------------------------------------------
# Output helpers


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, Fraction) and Fraction(float(obj)) != obj:
        # Exact rationals that floats cannot hold go out as 30-digit decimal strings.
        with decimal.localcontext() as ctx:
            ctx.prec = 30
            return str(decimal.Decimal(obj.numerator) / decimal.Decimal(obj.denominator))
    if isinstance(obj, (np.floating, float, Fraction)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    return obj


def _emit_json(doc, out) -> None:
    out.write(json.dumps(_clean(doc), indent=2, sort_keys=False) + "\n")


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def _emit_csv(header: Sequence[str], rows, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in r])


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b, got {text!r}") from None
    if not a < b:
        raise argparse.ArgumentTypeError("bracket needs a < b")
    return a, b


def _grid(text: str) -> np.ndarray:
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b:n, got {text!r}") from None
    if n < 2 or not a < b:
        raise argparse.ArgumentTypeError("grid needs a < b and n >= 2")
    return np.linspace(a, b, n)


def _potential(path: Path | None) -> Potential:
    return load_potential(path) if path else Potential.constant(1)


# ---------------------------------------------------------------------------
# Commands


def cmd_cover(args, out) -> int:
    g = essentialize(load_presentation(args.presentation))
    H = build_cover(g)
    doc = H.to_dict()
    doc["canonical_exact"] = H.canonical_exact
    code = EXIT_OK
    if args.verify:
        rng = random.Random(args.seed)
        sample = sorted({random_point(g, rng) for _ in range(args.verify)})
        rep = verify_extension(g, H, sample)
        doc["verification"] = {
            "passed": rep.passed,
            "points": [str(x) for x in sample],
            "failures": [f"{c.name} [{c.subject}] {c.detail}" for c in rep.failures()],
        }
        code = EXIT_OK if rep.passed else EXIT_CHECK
    _emit_json(doc, out)
    return code


def cmd_invariants(args, out) -> int:
    g = load_presentation(args.presentation)
    F = load_potential(args.potential) if args.potential else None
    P = prepare(g, F if F is not None else Potential.constant(0))
    rates = growth_rates(P.H, args.horizon)
    A_lm, B_lm = extremal_birkhoff(P.H)
    doc = {
        "h_m": rates.h_m,
        "g_min": rates.g_min,
        "g_max": rates.g_max,
        "A_F": None,
        "B_F": None,
        "A_log_m": A_lm.value,
        "brackets": {k: list(v) for k, v in rates.brackets.items()},
        "horizon": rates.horizon,
        "cover_size": P.H.size,
    }
    if F is not None:
        graph = P.g if P.F.kind == "label" else P.H
        A, B = extremal_birkhoff(graph, P.F)
        doc["A_F"], doc["B_F"] = A.value, B.value
        doc["A_F_exact"], doc["B_F_exact"] = A.exact, B.exact
        doc["A_F_cycle"], doc["B_F_cycle"] = list(A.cycle), list(B.cycle)
    _emit_json(doc, out)
    return EXIT_OK


def _curve_rows(H, F, betas):
    for b in betas:
        sp = spectral_radius(transfer_matrix(H, F, float(b)))
        yield float(b), sp.rho, sp.cw_lower, sp.cw_upper


def cmd_spectrum(args, out) -> int:
    P = prepare(load_presentation(args.presentation), _potential(args.potential))
    if args.grid is not None:
        _emit_csv(("beta", "rho", "cw_lower", "cw_upper"), _curve_rows(P.H, P.F, args.grid), out)
        return EXIT_OK
    if args.beta is None:
        raise argparse.ArgumentTypeError("spectrum needs --beta or --grid")
    sp = spectral_radius(transfer_matrix(P.H, P.F, args.beta))
    doc = {"beta": args.beta, **sp.to_dict()}
    if args.format == "csv":
        _emit_csv(("beta", "rho", "cw_lower", "cw_upper"), [(args.beta, sp.rho, sp.cw_lower, sp.cw_upper)], out)
    else:
        _emit_json(doc, out)
    return EXIT_OK


def cmd_curve(args, out) -> int:
    P = prepare(load_presentation(args.presentation), _potential(args.potential))
    _emit_csv(("beta", "rho", "cw_lower", "cw_upper"), _curve_rows(P.H, P.F, args.grid), out)
    return EXIT_OK


def cmd_kms(args, out) -> int:
    rep = kms_report(
        load_presentation(args.presentation),
        _potential(args.potential),
        bracket=args.bracket,
        tol=args.tol,
        horizon=args.horizon,
    )
    _emit_json(rep.to_dict(), out)
    if not rep.checks_ok:
        return EXIT_CHECK
    return VERDICT_EXIT[rep.verdict]


def cmd_oracle(args, out) -> int:
    g = essentialize(load_presentation(args.presentation))
    budget = OracleBudget(max_count=args.budget, max_length=max(args.n, args.length))
    if args.what == "preimages":
        x = EpPoint.parse(args.point, g)
        count, words = brute_preimages(g, x, args.n, budget, words=True)
        main = base_preimage_count(g, x, args.n)
        _emit_json({"point": str(x), "n": args.n, "count": count, "main_count": main,
                    "words": [g.format_word(w) for w in words]}, out)
        return EXIT_OK if count == main else EXIT_CHECK
    if args.what == "cover":
        B = brute_cover(g, args.length, budget)
        H = build_cover(g)
        canon = {S for S, c in zip(H.hvertices, H.canonical) if c}
        agree = set(B.hvertices) == canon
        _emit_json({**B.to_dict(), "matches_main_canonical": agree}, out)
        return EXIT_OK if agree else EXIT_CHECK
    F = _potential(args.potential)
    P = prepare(g, F)
    if args.what == "rho":
        beta = args.beta if args.beta is not None else 0.0
        lo, hi = brute_rho(g if F.kind == "label" else P.H, F, beta, args.n, budget)
        rho = spectral_radius(transfer_matrix(P.H, P.F, beta)).rho
        ok = lo * (1 - 1e-9) <= rho <= hi * (1 + 1e-9)
        _emit_json({"beta": beta, "n": args.n, "lower": lo, "upper": hi, "main_rho": rho, "contains": ok}, out)
        return EXIT_OK if ok else EXIT_CHECK
    # cycles
    graph = P.g if P.F.kind == "label" else P.H
    n, edges = edge_weights(graph, P.F)
    cycles = brute_cycles(n, edges, OracleBudget(max_graph=max(7, n), max_count=args.budget))
    means = [float(m) for _, m in cycles]
    A, B = mean_cycle(n, edges, "min"), mean_cycle(n, edges, "max")
    ok = abs(min(means) - A.value) <= 1e-12 and abs(max(means) - B.value) <= 1e-12
    _emit_json({"cycles": [{"edges": list(c), "mean": m} for c, m in cycles],
                "min_mean": min(means), "max_mean": max(means), "main_A": A.value, "main_B": B.value,
                "agree": ok}, out)
    return EXIT_OK if ok else EXIT_CHECK


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kmslab", description="KMS inverse temperatures of one-sided sofic shifts.")
    p.add_argument("--version", action="version", version=f"kmslab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, potential=True):
        sp.add_argument("presentation", type=Path, help="presentation JSON")
        if potential:
            sp.add_argument("--potential", type=Path, help="potential JSON (default: F = 1)")
        sp.add_argument("--horizon", type=int, default=12, help="horizon for growth brackets")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = sub.add_parser("cover", help="build the predecessor-set cover")
    common(sp, potential=False)
    sp.add_argument("--verify", type=int, default=0, metavar="K", help="cross-check on K random points")
    sp.set_defaults(func=cmd_cover)

    sp = sub.add_parser("invariants", help="growth rates and extremal averages")
    common(sp)
    sp.set_defaults(func=cmd_invariants)

    sp = sub.add_parser("spectrum", help="spectral radius of the transfer matrix")
    common(sp)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--grid", type=_grid, help="a:b:n, emits CSV rows")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("curve", help="CSV of rho(beta) on a grid")
    common(sp)
    sp.add_argument("--grid", type=_grid, required=True, help="a:b:n")
    sp.set_defaults(func=cmd_curve)

    sp = sub.add_parser("kms", help="admissible beta, roots and verdict")
    common(sp)
    sp.add_argument("--bracket", type=_pair, help="a:b search bracket")
    sp.add_argument("--tol", type=float, default=1e-8, help="root tolerance on |rho - 1|")
    sp.set_defaults(func=cmd_kms)

    sp = sub.add_parser("oracle", help="brute-force cross-checks")
    sp.add_argument("what", choices=("preimages", "cover", "rho", "cycles"))
    common(sp)
    sp.add_argument("--point", default="(0)", help="EpPoint literal u(v)")
    sp.add_argument("--n", type=int, default=8, help="word length / iteration count")
    sp.add_argument("--length", type=int, default=8, help="max |u|+|v| for the cover oracle")
    sp.add_argument("--beta", type=float)
    sp.add_argument("--budget", type=int, default=5_000_000)
    sp.set_defaults(func=cmd_oracle)
    return p


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    tol = getattr(args, "tol", 1e-8)
    try:
        RunConfig(args.command, args.presentation, getattr(args, "potential", None), root_tol=tol,
                  horizon=args.horizon, bracket=getattr(args, "bracket", None), fmt=args.format, seed=args.seed)
        return args.func(args, out)
    except (KmsLabError, ValueError, argparse.ArgumentTypeError, OSError) as exc:
        print(f"kmslab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
