"""Command-line front end.

    n2s run <config> [--out PATH] [--format csv|json]
    n2s verify [--config PATH] [--tolerance-scale X] [--out PATH]
    n2s --version

Configs are plain ``key = value`` files (``#`` starts a comment). Keys are
matched ignoring case, ``_`` and ``-``, so ``record_every`` and
``recordEvery`` are the same key. Command-line flags win over the file.

Exit status: 0 success, 1 verification failure, 2 bad usage or config
(including an unknown scenario), 3 output not writable.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

from . import __version__
from .dynamics import Potential
from .errors import N2SError
from .grid import Grid1D
from .schrodinger import build_hamiltonian, eigensolve, gaussian_packet, propagate
from .verify import SuiteConfig, default_grid_n, run_all

SCENARIOS = ("free-packet", "harmonic-coherent", "quartic-packet", "spectra", "derivation-suite")
PROPAGATION_COLUMNS = ("t", "norm", "x_exp", "p_exp", "gradU_exp", "E_exp")
SPECTRA_COLUMNS = ("n", "energy", "analytic", "abs_err")
REPORT_COLUMNS = ("name", "residual", "tolerance", "passed")

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class ConfigError(Exception):
    pass


class UnknownScenario(ConfigError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    x_min: float = -10.0
    x_max: float = 10.0
    n: int = 2000
    dt: float = 1e-3
    steps: int = 1000
    record_every: int = 10
    potential: str = "free"
    stiffness: float = 1.0
    coefficient: float = 0.25
    x0: float = 0.0
    sigma: float = 1.0
    k0: float = 0.0
    alpha: float = 1.0
    mass: float = 1.0
    count: int = 10
    tolerance_scale: float = 1.0
    output_path: str = "-"
    format: str = "csv"

    @property
    def hbar(self) -> float:
        return 1.0 / self.alpha

    def make_potential(self) -> Potential:
        if self.potential == "free":
            return Potential.free()
        if self.potential == "harmonic":
            return Potential.harmonic(self.stiffness)
        if self.potential == "quartic":
            return Potential.quartic(self.coefficient)
        if self.potential == "linear":
            return Potential.linear(self.coefficient)
        raise ConfigError(f"unknown potential {self.potential!r}")

    def make_grid(self) -> Grid1D:
        return Grid1D(self.x_min, self.x_max, self.n)


def scenario_defaults(scenario: str) -> dict:
    n = default_grid_n()
    if scenario == "free-packet":
        return dict(x_min=-20.0, x_max=20.0, n=2 * n + 1, steps=2000, record_every=100, k0=1.0)
    if scenario == "harmonic-coherent":
        return dict(potential="harmonic", x0=1.0, sigma=1.0 / math.sqrt(2.0), n=n, steps=6000, record_every=100)
    if scenario == "quartic-packet":
        return dict(potential="quartic", x0=1.0, sigma=1.0 / math.sqrt(2.0), n=n, steps=6000, record_every=100)
    if scenario == "spectra":
        return dict(potential="harmonic", n=n, count=10)
    if scenario == "derivation-suite":
        return dict(n=n)
    raise UnknownScenario(
        f"unknown scenario {scenario!r}; valid scenarios: {', '.join(SCENARIOS)}"
    )


def _norm_key(key: str) -> str:
    return key.strip().lower().replace("_", "").replace("-", "")


_FIELDS = {f.name: f for f in fields(ScenarioConfig)}
_KEYMAP = {_norm_key(name): name for name in _FIELDS}
_KEYMAP.update({"output": "output_path", "out": "output_path", "gridn": "n", "xmin": "x_min", "xmax": "x_max"})


def parse_config_text(text: str) -> dict:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        name = _KEYMAP.get(_norm_key(key))
        if name is None:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        raw[name] = value
    return raw


def _coerce(name: str, value):
    kind = _FIELDS[name].type
    try:
        if kind == "int":
            as_float = float(value)
            if not as_float.is_integer():
                raise ValueError
            return int(as_float)
        if kind == "float":
            return float(value)
    except ValueError:
        raise ConfigError(f"{name}: cannot read {value!r} as {kind}") from None
    return str(value)


def build_config(raw: dict, overrides: dict | None = None) -> ScenarioConfig:
    merged = dict(raw)
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    scenario = merged.get("scenario")
    if scenario is None:
        raise ConfigError("config must set `scenario`")
    values = scenario_defaults(scenario)
    values.update({k: _coerce(k, v) for k, v in merged.items() if k != "scenario"})
    cfg = ScenarioConfig(scenario=scenario, **values)
    validate(cfg)
    return cfg


def validate(cfg: ScenarioConfig) -> None:
    for name in ("dt", "sigma", "alpha", "mass", "tolerance_scale"):
        value = getattr(cfg, name)
        if not math.isfinite(value) or value < 0 or (value == 0 and name != "tolerance_scale"):
            raise ConfigError(f"{name} must be positive, got {value}")
    if cfg.steps < 0:
        raise ConfigError("steps must be non-negative")
    if cfg.record_every < 1:
        raise ConfigError("record_every must be at least 1")
    if cfg.n < 3:
        raise ConfigError("n must be at least 3")
    if cfg.count < 1:
        raise ConfigError("count must be at least 1")
    if not cfg.x_max > cfg.x_min:
        raise ConfigError("x_max must exceed x_min")
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg.format!r}")
    if cfg.potential not in ("free", "harmonic", "quartic", "linear"):
        raise ConfigError(f"unknown potential {cfg.potential!r}")


# -- serialization ------------------------------------------------------------

def fmt_number(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _json_scalar(x) -> str:
    if isinstance(x, str):
        return '"' + x.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float) and not math.isfinite(x):
        # JSON has no inf/nan; NaN marks "no value", +/-inf saturates
        return "null" if math.isnan(x) else fmt_number(math.copysign(sys.float_info.max, x))
    return fmt_number(x)


def to_csv(columns, rows) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt_number(v) for v in row))
    return "\n".join(lines) + "\n"


def to_json(columns, rows) -> str:
    objs = []
    for row in rows:
        body = ", ".join(f'"{c}": {_json_scalar(v)}' for c, v in zip(columns, row))
        objs.append("  {" + body + "}")
    return "[\n" + ",\n".join(objs) + "\n]\n" if objs else "[]\n"


def render(columns, rows, fmt: str) -> str:
    return to_csv(columns, rows) if fmt == "csv" else to_json(columns, rows)


def write_output(text: str, path: str) -> None:
    if path in ("-", ""):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# -- scenarios ---------------------------------------------------------------

def propagation_rows(cfg: ScenarioConfig):
    grid = cfg.make_grid()
    H = build_hamiltonian(grid, cfg.make_potential(), cfg.mass, cfg.hbar)
    psi = gaussian_packet(grid, cfg.x0, cfg.sigma, cfg.k0)
    tr = propagate(psi, H, cfg.dt, cfg.steps, cfg.record_every)
    return list(zip(tr.times, tr.norms, tr.x_exp, tr.p_exp, tr.gradU_exp, tr.energy_exp))


def spectra_rows(cfg: ScenarioConfig):
    grid = cfg.make_grid()
    pot = cfg.make_potential()
    pairs = eigensolve(build_hamiltonian(grid, pot, cfg.mass, cfg.hbar), cfg.count)
    rows = []
    for i, pair in enumerate(pairs):
        if pot.kind == "harmonic":
            level = i
            exact = (i + 0.5) * cfg.hbar * math.sqrt(cfg.stiffness / cfg.mass)
        elif pot.kind == "free":
            level = i + 1
            exact = (level * math.pi * cfg.hbar / grid.length) ** 2 / (2.0 * cfg.mass)
        else:
            level, exact = i, math.nan
        rows.append((level, pair.energy, exact, abs(pair.energy - exact)))
    return rows


def suite_rows(cfg: ScenarioConfig):
    results = run_all(SuiteConfig(grid_n=cfg.n, dt=cfg.dt, tolerance_scale=cfg.tolerance_scale))
    return [(r.name, r.residual, r.tolerance, r.passed) for r in results]


def run_scenario(cfg: ScenarioConfig) -> int:
    if cfg.scenario == "spectra":
        columns, rows = SPECTRA_COLUMNS, spectra_rows(cfg)
    elif cfg.scenario == "derivation-suite":
        columns, rows = REPORT_COLUMNS, suite_rows(cfg)
    else:
        columns, rows = PROPAGATION_COLUMNS, propagation_rows(cfg)
    write_output(render(columns, rows, cfg.format), cfg.output_path)
    if cfg.scenario == "derivation-suite" and not all(r[3] for r in rows):
        return EXIT_FAILED
    return EXIT_OK


def run_verification(
    config_path: str | None = None, tolerance_scale: float | None = None, out: str = "-"
) -> int:
    raw = {}
    if config_path:
        try:
            raw = parse_config_text(Path(config_path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from None
    suite = SuiteConfig()
    if "n" in raw:
        suite = replace(suite, grid_n=_coerce("n", raw["n"]))
    if "dt" in raw:
        suite = replace(suite, dt=_coerce("dt", raw["dt"]))
    if "tolerance_scale" in raw:
        suite = replace(suite, tolerance_scale=_coerce("tolerance_scale", raw["tolerance_scale"]))
    if tolerance_scale is not None:
        suite = replace(suite, tolerance_scale=tolerance_scale)
    if suite.tolerance_scale < 0 or not math.isfinite(suite.tolerance_scale):
        raise ConfigError("tolerance scale must be a finite non-negative number")
    results = run_all(suite)
    rows = [(r.name, r.residual, r.tolerance, r.passed) for r in results]
    write_output(to_json(REPORT_COLUMNS, rows), out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


# -- entry point ---------------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="n2s", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write its trace")
    run.add_argument("config", help="key = value scenario file")
    run.add_argument("--out", help="output path ('-' for stdout)")
    run.add_argument("--format", choices=("csv", "json"))

    ver = sub.add_parser("verify", help="run the verification suite and print a JSON report")
    ver.add_argument("--config", help="optional key = value file (n, dt, tolerance_scale)")
    ver.add_argument("--tolerance-scale", type=float, help="multiply every tolerance")
    ver.add_argument("--out", default="-", help="report path ('-' for stdout)")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        if args.command == "run":
            try:
                text = Path(args.config).read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc}") from None
            cfg = build_config(
                parse_config_text(text), {"output_path": args.out, "format": args.format}
            )
            return run_scenario(cfg)
        return run_verification(args.config, args.tolerance_scale, args.out)
    except UnknownScenario as exc:
        print(f"n2s: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, N2SError, ValueError) as exc:
        print(f"n2s: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"n2s: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
