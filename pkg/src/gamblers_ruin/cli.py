"""Command-line front end.

    gamblers-ruin --spec poisson.json --wealth 3,10,50,100,200,500
    gamblers-ruin --spec walk.json --wealth 1..20 --format csv
    gamblers-ruin --spec walk.json --wealth 5 --mode verify --format json
    gamblers-ruin --spec poisson.json --roots

Exit status: 0 success, 1 an oracle disagreed (verify mode), 2 invalid
input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .errors import NumericalError, ValidationError
from .oracles import cross_check
from .payoff import DEFAULT_TAIL_TOL, build_distribution, load_spec
from .rootfinder import RESIDUAL_TOL, find_disk_roots
from .ruin import ruin_probability

__all__ = ["RunConfig", "run", "report_roots", "parse_wealth", "main"]

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ORACLE, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3


@dataclass
class RunConfig:
    spec: str
    wealth: list[int] = field(default_factory=list)
    mode: str = "formula"
    fmt: str = "table"
    tail_tol: float = DEFAULT_TAIL_TOL
    residual_tol: float = RESIDUAL_TOL
    mc_paths: int = 100_000
    seed: int = 0
    dp_eps: float = 1e-10
    roots: bool = False
    out: str | None = None

    def validate(self):
        if not self.wealth and not self.roots:
            raise ValidationError("no initial wealth given")
        if any(m < 0 for m in self.wealth):
            raise ValidationError("initial wealth must be nonnegative")
        if self.mode not in ("formula", "verify"):
            raise ValidationError(f"unknown mode {self.mode!r}")
        if self.fmt not in ("table", "csv", "json"):
            raise ValidationError(f"unknown format {self.fmt!r}")
        if self.mc_paths < 1:
            raise ValidationError("--mc-paths must be at least 1")
        if not self.dp_eps > 0:
            raise ValidationError("--dp-eps must be positive")


def parse_wealth(text: str) -> list[int]:
    """``"3,10,50"`` or ``"1..20"`` (inclusive), or a mix: ``"1..3,10"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                a, b = part.split("..")
                lo, hi = int(a), int(b)
                if hi < lo:
                    raise ValidationError(f"empty wealth range {part!r}")
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise ValidationError(f"cannot parse wealth {part!r}") from None
    if not out:
        raise ValidationError("no initial wealth given")
    return out


def _f(x):
    return None if x is None else float(x)


def _compute(cfg: RunConfig):
    family = load_spec(cfg.spec)
    d = build_distribution(family, tail_tol=cfg.tail_tol)
    roots = None
    if d.favorable and (cfg.roots or any(m >= d.nu for m in cfg.wealth)):
        roots = find_disk_roots(d, residual_tol=cfg.residual_tol)
    rows = []
    for M in cfg.wealth:
        res = ruin_probability(d, M, roots=roots)
        row = {
            "M": M,
            "p_ruin": float(res.p_ruin),
            "method": res.method,
            "q_coeffs": None if res.q_coeffs is None else [float(q) for q in res.q_coeffs],
            "max_root_abs": _f(roots.max_abs) if roots is not None else None,
        }
        if cfg.mode == "verify":
            rep = cross_check(d, M, roots=roots, dp_eps=cfg.dp_eps, mc_paths=cfg.mc_paths, seed=cfg.seed)
            row["oracle"] = _plain(rep.as_dict())
        rows.append(row)
    return family, d, roots, rows


def _plain(obj):
    """Strip numpy scalar types so json output is stable."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def _roots_dict(roots):
    if roots is None:
        return None
    return {
        "z_star": float(roots.z_star),
        "degree": roots.degree,
        "roots": [[float(r.real), float(r.imag)] for r in roots.roots],
        "residuals": [float(r) for r in roots.residuals],
        "residual_floors": [float(r) for r in roots.residual_floors],
        "cluster_flags": [bool(f) for f in roots.cluster_flags],
    }


def report_roots(roots, out=None) -> str:
    """Human-readable listing of the in-disk roots."""
    buf = io.StringIO()
    buf.write(f"z* = {roots.z_star:.6f}   (truncation degree {roots.degree})\n")
    buf.write(f"{'j':>3}  {'Re eta':>10}  {'Im eta':>10}  {'|eta|':>8}  {'residual':>9}  cluster\n")
    for j, (r, res, flag) in enumerate(zip(roots.roots, roots.residuals, roots.cluster_flags), 1):
        buf.write(
            f"{j:>3}  {r.real:>10.6f}  {r.imag:>10.6f}  {abs(r):>8.6f}  {res:>9.1e}  {'yes' if flag else 'no'}\n"
        )
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


def _render(cfg, family, d, roots, rows) -> str:
    verify = cfg.mode == "verify"
    if cfg.fmt == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "spec": {"type": family.kind, **_plain(dict(family.params))},
            "distribution": {
                "nu": d.nu,
                "mean": float(d.mean),
                "degree": d.degree,
                "tail_mass_bound": float(d.tail_mass_bound),
            },
            "mode": cfg.mode,
            "roots": _roots_dict(roots),
            "results": rows,
        }
        if verify:
            doc["ok"] = all(r["oracle"]["ok"] for r in rows)
        return json.dumps(doc, indent=2) + "\n"

    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = ["M", "p_ruin", "method", "max_root_abs"]
        if verify:
            head += ["dp_lower", "dp_bound_gap", "mc_estimate", "mc_ci_halfwidth", "mc_censored_fraction",
                     "finite_w", "verify_ok"]
        w.writerow(head)
        for r in rows:
            line = [r["M"], repr(r["p_ruin"]), r["method"], "" if r["max_root_abs"] is None else repr(r["max_root_abs"])]
            if verify:
                o = r["oracle"]
                fw = o.get("finite_w")
                line += [
                    repr(o["dp"]["lower"]), repr(o["dp"]["bound_gap"]),
                    repr(o["mc"]["estimate"]), repr(o["mc"]["ci_halfwidth"]), repr(o["mc"]["censored_fraction"]),
                    repr(list(fw.values())[-1]) if fw else "",
                    o["ok"],
                ]
            w.writerow(line)
        return buf.getvalue()

    buf = io.StringIO()
    buf.write(f"{d!r}\n")
    if cfg.roots and roots is not None:
        report_roots(roots, buf)
    if rows:
        buf.write(f"\n{'M':>8}  {'P_ruin':>10}  {'method':<14}  Q coefficients\n")
        for r in rows:
            q = "-" if r["q_coeffs"] is None else " ".join(f"{x:.6f}" for x in r["q_coeffs"])
            buf.write(f"{r['M']:>8}  {r['p_ruin']:>10.6f}  {r['method']:<14}  {q}\n")
            if verify:
                o = r["oracle"]
                parts = [f"dp {o['dp']['lower']:.6f} (+{o['dp']['bound_gap']:.1e})",
                         f"mc {o['mc']['estimate']:.6f} +/- {o['mc']['ci_halfwidth']:.1e}"]
                if o.get("finite_w"):
                    parts.append(f"finite-W {list(o['finite_w'].values())[-1]:.6f}")
                bad = [k for k, v in o["verdicts"].items() if not v]
                parts.append("ok" if not bad else "FAILED: " + ", ".join(bad))
                buf.write(f"{'':>8}  " + "; ".join(parts) + "\n")
    return buf.getvalue()


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute a configuration; returns ``(exit_status, report_text)``."""
    try:
        cfg.validate()
        family, d, roots, rows = _compute(cfg)
    except (ValidationError, OSError) as exc:
        return EXIT_INVALID, f"error: {exc}\n"
    except NumericalError as exc:
        return EXIT_NUMERICAL, f"numerical failure ({type(exc).__name__}): {exc}\n"
    text = _render(cfg, family, d, roots, rows)
    status = EXIT_OK
    if cfg.mode == "verify" and not all(r["oracle"]["ok"] for r in rows):
        status = EXIT_ORACLE
    return status, text


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gamblers-ruin",
        description="Exact ruin probabilities for integer-valued payoffs against an infinitely rich adversary.",
    )
    p.add_argument("--spec", required=True, help="distribution spec file (json)")
    p.add_argument("--wealth", type=parse_wealth, default=[], help="initial wealth list '3,10' or range 'A..B'")
    p.add_argument("--mode", choices=["formula", "verify"], default="formula")
    p.add_argument("--format", dest="fmt", choices=["table", "csv", "json"], default="table")
    p.add_argument("--mc-paths", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dp-eps", type=float, default=1e-10)
    p.add_argument("--tail-tol", type=float, default=DEFAULT_TAIL_TOL)
    p.add_argument("--residual-tol", type=float, default=RESIDUAL_TOL)
    p.add_argument("--roots", action="store_true", help="list the roots of p(z)=1 in the unit disk")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = RunConfig(
        spec=args.spec, wealth=args.wealth, mode=args.mode, fmt=args.fmt, tail_tol=args.tail_tol,
        residual_tol=args.residual_tol, mc_paths=args.mc_paths, seed=args.seed, dp_eps=args.dp_eps,
        roots=args.roots, out=args.out,
    )
    status, text = run(cfg)
    if status in (EXIT_INVALID, EXIT_NUMERICAL):
        sys.stderr.write(text)
        return status
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
