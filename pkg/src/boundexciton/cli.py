"""Command-line front end.

    boundexciton COMMAND [--config FILE] [--out-dir DIR] [--threads N]
                 [--seed-basis TABLE] [--emit-gnuplot]

The config is a TOML document. Every command writes run.csv and run.json
(atomically) into the output directory; --emit-gnuplot adds plot.gp.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import tomli

from . import gaussians, geigen, onedim, potentials, quadrature, specialfun, spectra, threebody

COMMANDS = ("two-body", "ke", "sweep", "critical", "fit", "flatwell", "harmonic", "special-table", "oracle-check")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


class ConfigError(ValueError):
    pass


NUMERICAL_ERRORS = (
    quadrature.QuadratureError,
    spectra.BracketError,
    geigen.DegenerateBasisError,
    ArithmeticError,
    np.linalg.LinAlgError,
)

# allowed keys and defaults per section
_SECTIONS = {
    "solver": {"drop_tol": geigen.DEFAULT_DROP_TOL, "margin": threebody.DEFAULT_MARGIN},
    "radial": {"n": 40, "lo": 1e-5, "hi": 50.0},
    "sweep": {"kappa": None, "kappa_min": 0.05, "kappa_max": 1.2, "n": 47, "lambda": "equal_kappa"},
    "critical": {"order": 1, "bracket": None},
    "fit": {"window": [0.10, 0.25], "n": 7},
    "flatwell": {"kappa": [1.1, 2.0, 5.0], "w0": [2000.0]},
    "harmonic": {"v0": 0.125, "kappa": [1e4, 1e6, 1e8]},
    "special": {"x": None, "x_min": 0.01, "x_max": 30.0, "n": 300},
    "oracle": {"pairs": 20, "seed": 12345},
}
_BASIS_KEYS = {"n_alpha", "n_beta", "n_gamma", "lo", "hi", "d", "zero_channels", "total"}
_DEFAULT_BRACKETS = {1: [0.95, 1.2], 2: [0.7, 0.9]}


@dataclass
class RunConfig:
    command: str
    potential: dict = field(default_factory=lambda: {"kind": "keldysh", "r0": 20.0})
    basis: gaussians.BasisSpec = field(default_factory=gaussians.BasisSpec)
    sections: dict = field(default_factory=dict)

    def get(self, section: str, key: str):
        return self.sections[section][key]

    def make_potential(self):
        return potentials.from_config(self.potential)

    def to_dict(self) -> dict:
        b = asdict(self.basis)
        b["zero_channels"] = list(b["zero_channels"])
        return {"command": self.command, "potential": dict(self.potential), "basis": b, **self.sections}


def _check_number(name, value, positive=True):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{name}: expected a finite number, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{name}: must be positive, got {value!r}")
    return float(value)


def parse_config(text: str, command: str | None = None) -> RunConfig:
    """Parse and validate a TOML config; unknown keys are rejected."""
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"parse error: {exc}") from exc
    doc_cmd = doc.pop("command", None)
    if command is None:
        command = doc_cmd
    elif doc_cmd is not None and doc_cmd != command:
        raise ConfigError(f"command: config says {doc_cmd!r} but {command!r} was requested")
    if command not in COMMANDS:
        raise ConfigError(f"command: unknown command {command!r}; expected one of {', '.join(COMMANDS)}")

    pot = {"kind": "keldysh", "r0": 20.0}
    if "potential" in doc:
        pot = dict(doc.pop("potential"))
        pot.setdefault("kind", "keldysh")
        if pot["kind"] == "keldysh":
            pot.setdefault("r0", 20.0)
    try:
        potentials.from_config(pot)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"potential: {exc}") from exc

    braw = dict(doc.pop("basis", {}))
    extra = set(braw) - _BASIS_KEYS
    if extra:
        raise ConfigError(f"basis.{sorted(extra)[0]}: unknown key")
    if "zero_channels" in braw:
        braw["zero_channels"] = tuple(braw["zero_channels"])
    try:
        basis = gaussians.BasisSpec(**braw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"basis: {exc}") from exc

    sections = {}
    for name, defaults in _SECTIONS.items():
        given = dict(doc.pop(name, {}))
        extra = set(given) - set(defaults)
        if extra:
            raise ConfigError(f"{name}.{sorted(extra)[0]}: unknown key")
        sections[name] = {**defaults, **given}
    if doc:
        raise ConfigError(f"{sorted(doc)[0]}: unknown key")
    _validate(sections)
    return RunConfig(command, pot, basis, sections)


def _validate(s: dict) -> None:
    _check_number("solver.drop_tol", s["solver"]["drop_tol"])
    _check_number("solver.margin", s["solver"]["margin"], positive=False)
    for k in ("lo", "hi"):
        _check_number(f"radial.{k}", s["radial"][k])
    sw = s["sweep"]
    if sw["kappa"] is not None:
        if not sw["kappa"]:
            raise ConfigError("sweep.kappa: empty grid")
        for v in sw["kappa"]:
            _check_number("sweep.kappa", v)
    lam = sw["lambda"]
    if lam != "equal_kappa":
        _check_number("sweep.lambda", lam)
    if s["critical"]["order"] not in (1, 2, 3, 4):
        raise ConfigError("critical.order: must be a small positive integer")
    w = s["fit"]["window"]
    if len(w) != 2 or not 0 < w[0] < w[1]:
        raise ConfigError("fit.window: expected [lo, hi] with 0 < lo < hi")
    for v in s["flatwell"]["kappa"]:
        _check_number("flatwell.kappa", v)
    for v in s["flatwell"]["w0"]:
        _check_number("flatwell.w0", v)
    _check_number("harmonic.v0", s["harmonic"]["v0"])
    for v in s["harmonic"]["kappa"]:
        if _check_number("harmonic.kappa", v) < 1:
            raise ConfigError("harmonic.kappa: values must be >= 1")


# --- output -----------------------------------------------------------------


def fmt(v) -> str:
    """Shortest round-trip decimal; empty for missing values."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


@dataclass
class RunResult:
    header: list[str]
    rows: list[list]
    summary: dict
    plot: str | None = None

    def record(self, config: RunConfig) -> dict:
        return _jsonable(
            {
                "command": config.command,
                "config": config.to_dict(),
                "summary": self.summary,
                "columns": self.header,
                "rows": self.rows,
            }
        )


# --- commands ---------------------------------------------------------------


def _radial(cfg: RunConfig, V):
    r = cfg.sections["radial"]
    return spectra.RadialBasisSpec(int(r["n"]), float(r["lo"]), float(r["hi"])).exponents(V.scale)


def _basis(cfg: RunConfig, seed_basis):
    if seed_basis is not None:
        return seed_basis
    return gaussians.build_basis(cfg.basis)


def _cmd_two_body(cfg, basis_override, threads):
    V = cfg.make_potential()
    d = cfg.basis.d
    ex = _radial(cfg, V)
    l0 = spectra.lambda0(V, d, ex)
    return RunResult(["m", "g", "d", "n_radial", "energy"], [[2.0, 1.0, d, ex.size, l0]], {"lambda0": l0})


def _cmd_ke(cfg, basis_override, threads):
    V = cfg.make_potential()
    d = cfg.basis.d
    ex = _radial(cfg, V)
    ke = spectra.find_ke(V, d, ex)
    l0 = spectra.lambda0(V, d, ex)
    return RunResult(["k_e", "lambda0"], [[ke, l0]], {"k_e": ke, "lambda0": l0})


def _sweep_grid(cfg):
    s = cfg.sections["sweep"]
    if s["kappa"] is not None:
        return [float(k) for k in s["kappa"]]
    return [float(k) for k in np.linspace(s["kappa_min"], s["kappa_max"], int(s["n"]))]


def _sweep_rows(records):
    n = max((r.n_discrete for r in records), default=0)
    header = ["kappa", "lambda0", "lambda1", "lambda", "branch", "n_discrete"]
    header += [f"E{i + 1}" for i in range(n)] + ["gap"]
    rows = []
    for r in records:
        es = list(r.discrete) + [None] * (n - r.n_discrete)
        rows.append([r.kappa, r.lambda0, r.lambda1, r.lambda_, r.branch, r.n_discrete, *es, r.gap])
    return header, rows


def _cmd_sweep(cfg, seed_basis, threads):
    V = cfg.make_potential()
    basis = _basis(cfg, seed_basis)
    lam = cfg.get("sweep", "lambda")
    recs = threebody.sweep_kappa(
        _sweep_grid(cfg),
        V,
        basis,
        lam,
        cfg.get("solver", "margin"),
        cfg.get("solver", "drop_tol"),
        threads,
        _radial(cfg, V),
    )
    header, rows = _sweep_rows(recs)
    errors = [r.kappa for r in recs if r.error]
    summary = {
        "basis_size": len(basis),
        "max_discrete": max(r.n_discrete for r in recs),
        "failed_rows": errors,
        "absence_note": "a variational count of 0 means no eigenvalue was found, not a proof of absence",
    }
    return RunResult(header, rows, summary, plot=_gnuplot_sweep(header))


def _cmd_critical(cfg, seed_basis, threads):
    V = cfg.make_potential()
    basis = _basis(cfg, seed_basis)
    order = int(cfg.get("critical", "order"))
    bracket = cfg.get("critical", "bracket") or _DEFAULT_BRACKETS.get(order, [0.5, 1.5])
    kc = threebody.find_kappa_c(
        V, basis, order, tuple(bracket), threebody.KAPPA_C_TOL,
        cfg.get("solver", "margin"), cfg.get("solver", "drop_tol"), _radial(cfg, V),
    )
    return RunResult(["order", "kappa_c", "bracket_lo", "bracket_hi"], [[order, kc, *bracket]],
                     {"order": order, "kappa_c": kc, "basis_size": len(basis)})


def _cmd_fit(cfg, seed_basis, threads):
    V = cfg.make_potential()
    basis = _basis(cfg, seed_basis)
    lo, hi = cfg.get("fit", "window")
    grid = np.linspace(lo, hi, int(cfg.get("fit", "n")))
    recs = threebody.sweep_kappa(grid, V, basis, "equal_kappa", cfg.get("solver", "margin"),
                                 cfg.get("solver", "drop_tol"), threads, _radial(cfg, V))
    fit = threebody.fit_small_kappa(recs, (lo, hi))
    rows = [[r.kappa, r.gap, math.log(r.gap)] for r in recs]
    return RunResult(["kappa", "gap", "log_gap"], rows,
                     {"A": fit.A, "a": fit.a, "r_squared": fit.r_squared, "window": list(fit.window)},
                     plot=_gnuplot_fit(fit))


def _cmd_flatwell(cfg, seed_basis, threads):
    rows = []
    s = cfg.sections["flatwell"]
    for w0 in s["w0"]:
        for k in s["kappa"]:
            g = onedim.flat_well_ground(k, w0)
            if k > 1:
                c = onedim.qw_certificate(k, w0)
                q, cb, ok = c.q_value, c.closed_bound, c.certified
            else:
                q, cb, ok = None, onedim.closed_bound(w0), False
            rows.append([k, w0, g.e, g.beta, g.C, q, cb, ok])
    return RunResult(["kappa", "w0", "e_w", "beta", "C", "q_value", "closed_bound", "certified"], rows,
                     {"certified": [r[7] for r in rows]})


def _cmd_harmonic(cfg, seed_basis, threads):
    s = cfg.sections["harmonic"]
    v = potentials.SmoothBumpPotential(s["v0"])
    rows = []
    for k in s["kappa"]:
        h = onedim.harmonic_limit(v, k, 2)
        rows.append([k, h.omega, h.shifted[0], h.shifted[1], h.shifted[0] / h.omega, h.shifted[1] / h.omega])
    return RunResult(["kappa", "omega", "E1_shifted", "E2_shifted", "E1_over_omega", "E2_over_omega"], rows,
                     {"omega": rows[0][1]})


def _cmd_special(cfg, seed_basis, threads):
    s = cfg.sections["special"]
    x = np.asarray(s["x"], dtype=float) if s["x"] is not None else np.linspace(s["x_min"], s["x_max"], int(s["n"]))
    try:
        h0 = specialfun.struve_h0(x)
        y0 = specialfun.bessel_y0(x)
        diff = specialfun.struve_minus_y0(x)
    except specialfun.DomainError as exc:
        raise ConfigError(f"special.x: {exc}") from exc
    rows = [[a, b, c, e] for a, b, c, e in zip(x, h0, y0, diff)]
    return RunResult(["x", "H0", "Y0", "H0_minus_Y0"], rows,
                     {"n": int(x.size), "difference_decreasing": bool(np.all(np.diff(diff) < 0))})


def _cmd_oracle(cfg, seed_basis, threads):
    from . import oracles

    s = cfg.sections["oracle"]
    results = oracles.run_all(int(s["pairs"]), int(s["seed"]))
    rows = [[r.name, r.max_error, r.tolerance, r.passed] for r in results]
    return RunResult(["check", "max_error", "tolerance", "passed"], rows,
                     {"all_passed": all(r.passed for r in results)})


_DISPATCH = {
    "two-body": _cmd_two_body,
    "ke": _cmd_ke,
    "sweep": _cmd_sweep,
    "critical": _cmd_critical,
    "fit": _cmd_fit,
    "flatwell": _cmd_flatwell,
    "harmonic": _cmd_harmonic,
    "special-table": _cmd_special,
    "oracle-check": _cmd_oracle,
}


def _gnuplot_sweep(header) -> str:
    n = sum(1 for h in header if h.startswith("E"))
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 'kappa'",
        "set ylabel 'energy'",
        "set style fill pattern 4 border",
        "plot 'run.csv' using 1:4:(0) with filledcurves lc rgb 'gray' title 'continuum', \\",
    ]
    curves = [f"     'run.csv' using 1:{7 + i} with linespoints title 'E{i + 1}'" for i in range(n)]
    lines.append(", \\\n".join(curves) if curves else "     'run.csv' using 1:4 with lines title 'Lambda'")
    return "\n".join(lines) + "\n"


def _gnuplot_fit(fit) -> str:
    return "\n".join(
        [
            "set datafile separator ','",
            "set xlabel 'kappa^-2'",
            "set ylabel 'ln gap'",
            f"f(u) = {fit.A!r} * exp(-{fit.a!r} * u)",
            "set logscale y",
            "plot 'run.csv' using (1/$1**2):2 skip 1 with points title 'gap', f(x) title 'fit'",
        ]
    ) + "\n"


def run(config: RunConfig, out_dir=".", threads: int = 1, seed_basis=None, emit_gnuplot: bool = False,
        stream=None) -> int:
    """Execute a validated config and write artifacts; returns the exit code."""
    stream = sys.stdout if stream is None else stream
    out = Path(out_dir)
    try:
        if config.command in ("sweep", "critical", "fit"):
            b = seed_basis or gaussians.build_basis(config.basis)
            print(
                f"basis: {len(b)} functions ({config.basis.n_alpha}x{config.basis.n_beta}x{config.basis.n_gamma}"
                f" on [{config.basis.lo!r}, {config.basis.hi!r}], d={b.d})",
                file=stream,
            )
        result = _DISPATCH[config.command](config, seed_basis, threads)
    except ConfigError as exc:
        print(f"error category=config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"error category=numerical: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error category=numerical: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    try:
        _atomic_write(out / "run.csv", csv_text(result.header, result.rows))
        _atomic_write(out / "run.json", json.dumps(result.record(config), indent=2, sort_keys=True) + "\n")
        if emit_gnuplot and result.plot:
            _atomic_write(out / "plot.gp", result.plot)
    except OSError as exc:
        print(f"error category=io: {exc}", file=sys.stderr)
        return EXIT_IO
    for k, v in result.summary.items():
        print(f"{k}: {fmt(v) if not isinstance(v, list) else v}", file=stream)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="boundexciton", description="Three-body bound states with Keldysh interactions.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path, help="TOML configuration file")
    p.add_argument("--out-dir", type=Path, default=Path("."), help="directory for run.csv / run.json")
    p.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    p.add_argument("--seed-basis", type=Path, help="exponent table replacing the generated basis")
    p.add_argument("--emit-gnuplot", action="store_true", help="also write plot.gp")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text() if args.config else ""
    except OSError as exc:
        print(f"error category=io: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text, args.command)
        if args.threads < 1:
            raise ConfigError("--threads: must be at least 1")
        seed = None
        if args.seed_basis:
            try:
                seed = gaussians.BasisSet.load(args.seed_basis)
            except OSError as exc:
                print(f"error category=io: {exc}", file=sys.stderr)
                return EXIT_IO
            except ValueError as exc:
                raise ConfigError(f"--seed-basis: {exc}") from exc
    except ConfigError as exc:
        print(f"error category=config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg, args.out_dir, args.threads, seed, args.emit_gnuplot)


if __name__ == "__main__":
    sys.exit(main())
