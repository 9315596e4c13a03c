"""Command-line entry point.

Exit codes: 0 ok / consistent, 2 input error, 3 contradiction confirmed,
4 numerical anomaly.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import __version__
from .algebra import InoueMatrix, cappell_shaneson, char_poly, eigen_data, lattice_basis, parse_matrix, validate_matrix
from .analysis import (
    P_ZERO,
    IntegratorConfig,
    TwistParameter,
    fd_oracle,
    matching_determinant,
    p_zero_membership,
    p_zero_result,
)
from .bessel import bessel_i, bessel_k, wronskian_residual
from .errors import InoueError
from .lattice import mode_coefficients, orbit_segment
from .report import canonical_json, plot_data, to_csv, to_json
from .spectral import ANOMALY, CONSISTENT, CONTRADICTION, annulus_scan, delta_grid

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONTRADICTION = 3
EXIT_ANOMALY = 4

CONFIG_ENV = "INOUE_SPECTRUM_CONFIG"
LIST_OPTIONS = ("--range", "--seed", "--mode", "--matrix")


@dataclass
class Config:
    matrix: str | None = None
    matrix_file: str | None = None
    cs: int | None = None
    seed_bound: int = 3
    delta_points: int = 51
    tol_rel: float = 1e-10
    tol_abs: float = 1e-12
    flag_threshold: float = 1e-3
    rate: float = 40.0
    oracle_samples: int = 5
    workers: int = 1
    out: str | None = None
    format: str = "json"
    plot_data: str | None = None

    def validate(self) -> None:
        if self.delta_points < 2:
            raise ValueError("delta_points must be >= 2")
        if self.seed_bound < 1:
            raise ValueError("seed_bound must be >= 1")
        if min(self.tol_rel, self.tol_abs, self.flag_threshold, self.rate) <= 0:
            raise ValueError("tolerances must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.format not in ("json", "csv"):
            raise ValueError("format must be json or csv")

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(rtol=self.tol_rel, atol=self.tol_abs, rate=self.rate, flag_threshold=self.flag_threshold)

    def numerics(self) -> dict:
        """Every knob that can change numbers; output paths and worker count excluded."""
        d = asdict(self)
        for k in ("out", "plot_data", "workers", "format"):
            d.pop(k)
        return d


def resolve_config(args: argparse.Namespace) -> Config:
    """Defaults < config file (``--config`` or $INOUE_SPECTRUM_CONFIG) < flags."""
    cfg = Config()
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV)
    if path:
        data = json.loads(Path(path).read_text())
        known = {f.name for f in fields(Config)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for k, v in data.items():
            setattr(cfg, k, v)
    for f in fields(Config):
        v = getattr(args, f.name, None)
        if v is not None:
            setattr(cfg, f.name, v)
    if sum(x is not None for x in (cfg.matrix, cfg.matrix_file, cfg.cs)) > 1:
        # an explicit flag overrides a config-file source
        flag_src = [n for n in ("matrix", "matrix_file", "cs") if getattr(args, n, None) is not None]
        for n in ("matrix", "matrix_file", "cs"):
            if flag_src and n not in flag_src:
                setattr(cfg, n, None)
    cfg.validate()
    return cfg


def load_matrix(cfg: Config) -> InoueMatrix:
    if cfg.cs is not None:
        return cappell_shaneson(int(cfg.cs))
    if cfg.matrix is not None:
        return parse_matrix(cfg.matrix)
    if cfg.matrix_file is not None:
        return validate_matrix(json.loads(Path(cfg.matrix_file).read_text()))
    raise ValueError("no matrix source: use --cs, --matrix or --matrix-file")


def _triple(text: str) -> tuple[int, int, int]:
    parts = [int(x) for x in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected three integers, got {text!r}")
    return tuple(parts)  # type: ignore[return-value]


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _error(exc: Exception) -> int:
    code = exc.code if isinstance(exc, InoueError) else type(exc).__name__
    sys.stdout.write(json.dumps({"error": code, "message": str(exc)}, sort_keys=True) + "\n")
    return EXIT_INPUT


def cmd_analyze(cfg: Config) -> int:
    M = load_matrix(cfg)
    E = eigen_data(M)
    B = lattice_basis(E)
    c2, c1 = char_poly(M)
    payload = {
        **E.summary(),
        "char_poly": {"c2": c2, "c1": c1},
        "a": E.a.tolist(),
        "b": [{"re": x.real, "im": x.imag} for x in E.b],
        **B.to_dict(),
    }
    _emit(canonical_json(payload), cfg.out)
    return EXIT_OK


def cmd_spectrum(cfg: Config) -> int:
    M = load_matrix(cfg)
    E = eigen_data(M)
    B = lattice_basis(E)
    report = annulus_scan(
        E, B, M,
        seed_bound=cfg.seed_bound,
        deltas=delta_grid(cfg.delta_points),
        cfg=cfg.integrator(),
        workers=cfg.workers,
        oracle_samples=cfg.oracle_samples,
    )
    text = to_json(report, cfg.numerics()) if cfg.format == "json" else to_csv(report)
    _emit(text, cfg.out)
    if cfg.plot_data:
        Path(cfg.plot_data).write_text(plot_data(report))
    return {CONSISTENT: EXIT_OK, CONTRADICTION: EXIT_CONTRADICTION, ANOMALY: EXIT_ANOMALY}[report.verdict]


def cmd_orbit(cfg: Config, seed: str, span: str) -> int:
    M = load_matrix(cfg)
    B = lattice_basis(eigen_data(M))
    lo, hi = (int(x) for x in span.split(","))
    seg = orbit_segment(M, _triple(seed), lo, hi)
    lines = []
    for n, mode in seg.items():
        c = mode_coefficients(B, mode)
        lines.append(json.dumps({"n": n, "mode": list(mode), "P": c.P, "Q": {"re": c.Q.real, "im": c.Q.imag}}))
    _emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_OK


def cmd_mode(cfg: Config, mode: str, delta: float, oracle: bool = False) -> int:
    M = load_matrix(cfg)
    E = eigen_data(M)
    B = lattice_basis(E)
    c = mode_coefficients(B, _triple(mode))
    if c.mode == (0, 0, 0):
        raise ValueError("the zero mode is the finite orbit; see the spectrum report")
    if abs(c.P) <= P_ZERO:
        res = p_zero_result(c, delta)
    else:
        res = matching_determinant(c, TwistParameter.from_delta(delta, E.alpha), cfg.integrator())
    payload = res.to_dict()
    payload["P"] = c.P
    payload["Q"] = {"re": c.Q.real, "im": c.Q.imag}
    if oracle:
        payload["oracle"] = fd_oracle(c, cfg.rate)
    _emit(json.dumps(payload, sort_keys=True) + "\n", cfg.out)
    return EXIT_OK


BESSEL_POINTS = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 15.0, 20.0, 30.0)
PZERO_CASES = [(q, d) for q in (0.5, 1.0, 5.0) for d in (-0.25, 0.0, 0.25)]


def cmd_bessel_check(cfg: Config) -> int:
    ok = True
    lines = []
    for x in BESSEL_POINTS:
        for order in (0, 1):
            r = wronskian_residual(order, x)
            good = r <= 1e-10
            ok &= good
            lines.append(json.dumps({
                "check": "wronskian", "order": order, "x": x,
                "I": bessel_i(order, x), "K": bessel_k(order, x),
                "relative_residual": r, "pass": good,
            }))
    for q, d in PZERO_CASES:
        v = p_zero_membership(q, d)
        good = not v.solution_found
        ok &= good
        lines.append(json.dumps({"check": "p_zero_membership", "q": q, "delta": d, "verdict": v.kind, "pass": good}))
    _emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_OK if ok else EXIT_ANOMALY


def _add_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cs", type=int, help="Cappell-Shaneson index m (A_m), -2 <= m <= 3")
    p.add_argument("--matrix", help="nine integers row-major '0,1,0,...' or a JSON array of arrays")
    p.add_argument("--matrix-file", dest="matrix_file", help="JSON file holding the matrix")
    p.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    p.add_argument("--out", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inoue-spectrum", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="eigen-data and lattice basis as JSON")
    _add_source(p)

    p = sub.add_parser("spectrum", help="annulus scan report")
    _add_source(p)
    p.add_argument("--seed-bound", dest="seed_bound", type=int)
    p.add_argument("--delta-points", dest="delta_points", type=int)
    p.add_argument("--tol-rel", dest="tol_rel", type=float)
    p.add_argument("--tol-abs", dest="tol_abs", type=float)
    p.add_argument("--flag-threshold", dest="flag_threshold", type=float)
    p.add_argument("--rate", type=float, help="endpoint suppression rate for truncation times")
    p.add_argument("--oracle-samples", dest="oracle_samples", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--plot-data", dest="plot_data", help="gnuplot grid of |det| over (orbit index, delta)")

    p = sub.add_parser("orbit", help="orbit segment as JSON lines")
    _add_source(p)
    p.add_argument("--seed", required=True)
    p.add_argument("--range", dest="span", default="0,0")

    p = sub.add_parser("mode", help="matching determinant for one mode")
    _add_source(p)
    p.add_argument("--mode", dest="mode_triple", required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--tol-rel", dest="tol_rel", type=float)
    p.add_argument("--tol-abs", dest="tol_abs", type=float)
    p.add_argument("--flag-threshold", dest="flag_threshold", type=float)
    p.add_argument("--oracle", action="store_true", help="also run the finite-difference oracle")

    p = sub.add_parser("bessel-check", help="Bessel identity suite")
    p.add_argument("--out")
    return parser


def _glue_list_options(argv: list[str]) -> list[str]:
    """Let '--range -2,2' through argparse, which would read '-2,2' as an option."""
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in LIST_OPTIONS and i + 1 < len(argv):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_glue_list_options(argv))
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        cfg = resolve_config(args)
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "spectrum":
            return cmd_spectrum(cfg)
        if args.command == "orbit":
            return cmd_orbit(cfg, args.seed, args.span)
        if args.command == "mode":
            return cmd_mode(cfg, args.mode_triple, args.delta, args.oracle)
        if args.command == "bessel-check":
            return cmd_bessel_check(cfg)
    except (InoueError, ValueError, OSError, json.JSONDecodeError) as exc:
        return _error(exc)
    parser.error(f"unknown command {args.command}")
    return EXIT_INPUT
