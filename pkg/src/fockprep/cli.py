"""Command-line front end.

Subcommands: spectrum, counting, sweep, figure {fig2|fig3|fig4|fig5}.
Scenario files are JSON (strict: unknown keys are rejected), results are
CSV files with a '#'-prefixed metadata header plus JSON summaries.  Output
is deterministic: repeated runs write identical bytes.

Exit codes: 0 success, 1 numerical failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, experiments, solver
from .exceptions import ConfigError, FockprepError, NumericsError
from .occupations import density_profile
from .solver import DEFAULT_POLICY, GridPolicy
from .traps import TrapShape, TrapSpec, dimensionless_depth, energy_unit, family_member

U_CONVENTION = "U = 4*V*L^2 (square well, bathtub); U = V*L^2 (inverted Gaussian)"
FLOAT_FMT = "%.12g"


# ---------------------------------------------------------------------------
# configuration parsing


@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: str
    data: dict
    policy: GridPolicy
    fock_epsilon: float
    verbose: bool = False
    threads: int = 1

    def to_json(self) -> str:
        return json.dumps(self.data, sort_keys=True)


def _require_keys(obj: dict, path: str, required: set, optional: set = frozenset()):
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object")
    unknown = set(obj) - required - optional
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"{path}: missing required keys {sorted(missing)}")


def _positive(obj: dict, path: str, key: str, allow_zero=False) -> float:
    value = obj[key]
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{path}.{key}: expected a number, got {value!r}")
    if value < 0 or (value == 0 and not allow_zero):
        raise ConfigError(f"{path}.{key}: must be positive, got {value}")
    return float(value)


def _parse_trap(obj, path: str) -> TrapSpec:
    try:
        return TrapSpec.from_dict(obj)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_occupation(obj: dict, path: str, half_width: float) -> experiments.OccupationSpec:
    _require_keys(obj, path, {"type", "N_i"}, {"temperature", "mu_over_kT"})
    kind = obj["type"]
    if kind not in ("ground", "thermal"):
        raise ConfigError(f"{path}.type: must be 'ground' or 'thermal', got {kind!r}")
    n = _positive(obj, path, "N_i")
    temperature = None
    mu_over_kT = None
    if "temperature" in obj:
        # configured in units of E_i = pi^2 / L_i^2
        temperature = _positive(obj, path, "temperature") * energy_unit(half_width)
    if "mu_over_kT" in obj:
        mu_over_kT = _positive(obj, path, "mu_over_kT")
    try:
        return experiments.OccupationSpec(kind, n, temperature, mu_over_kT)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_final(obj: dict, path: str, initial: TrapSpec) -> TrapSpec:
    if isinstance(obj, dict) and "width_ratio" in obj:
        _require_keys(obj, path, {"width_ratio", "U"}, {"sigma_tilde", "shape"})
        ratio = _positive(obj, path, "width_ratio")
        u = _positive(obj, path, "U")
        st = obj.get("sigma_tilde", initial.sigma_tilde)
        shape = initial.shape
        if "shape" in obj:
            try:
                shape = TrapShape(obj["shape"])
            except ValueError as exc:
                raise ConfigError(f"{path}.shape: {exc}") from exc
        try:
            return family_member(u, float(st), ratio * initial.half_width, shape)
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return _parse_trap(obj, path)


def _parse_policy(obj: dict | None, path: str, grid_points: int | None) -> GridPolicy:
    margin = DEFAULT_POLICY.margin_decay_lengths
    min_points = DEFAULT_POLICY.min_points
    if obj is not None:
        _require_keys(obj, path, set(), {"n_points", "margin_factor"})
        if "n_points" in obj:
            n = obj["n_points"]
            if not isinstance(n, int) or isinstance(n, bool) or n < 3:
                raise ConfigError(f"{path}.n_points: expected an integer >= 3, got {n!r}")
            min_points = n
        if "margin_factor" in obj:
            margin = _positive(obj, path, "margin_factor")
    if grid_points is not None:
        if grid_points < 3:
            raise ConfigError(f"--grid-points: expected >= 3, got {grid_points}")
        min_points = grid_points
    return GridPolicy(margin, min_points)


def parse_config(text: str, command: str, grid_points: int | None = None) -> RunConfig:
    """Parse and validate a scenario file for the given subcommand."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError("top level: expected a JSON object")
    if "command" in data and data["command"] != command:
        raise ConfigError(
            f"command: config says {data['command']!r} but the subcommand is {command!r}")

    top_optional = {"command", "grid", "tolerances"}
    if command == "spectrum":
        _require_keys(data, "top level", {"trap"}, top_optional | {"eigenfunctions"})
        _parse_trap(data["trap"], "trap")
        if "eigenfunctions" in data and not isinstance(data["eigenfunctions"], bool):
            raise ConfigError("eigenfunctions: expected true or false")
    elif command in ("counting", "sweep"):
        required = {"initial", "final", "occupation"}
        optional = top_optional | ({"sweep"} if command == "sweep" else set())
        _require_keys(data, "top level", required, optional)
        initial = _parse_trap(data["initial"], "initial")
        _parse_final(data["final"], "final", initial)
        _parse_occupation(data["occupation"], "occupation", initial.half_width)
        if command == "sweep":
            sweep = data.get("sweep", {"parameter": "width_ratio", "values": None})
            _require_keys(sweep, "sweep", {"parameter", "values"})
            if sweep["parameter"] not in ("width_ratio", "mu_over_kT"):
                raise ConfigError(
                    f"sweep.parameter: must be 'width_ratio' or 'mu_over_kT', "
                    f"got {sweep['parameter']!r}")
            values = sweep["values"]
            if (not isinstance(values, list) or not values
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                               and v > 0 for v in values)):
                raise ConfigError("sweep.values: expected a non-empty list of positive numbers")
    else:
        raise ConfigError(f"unknown command {command!r}")

    tolerances = data.get("tolerances")
    fock_epsilon = experiments.FOCK_EPSILON
    if tolerances is not None:
        _require_keys(tolerances, "tolerances", set(), {"fock_epsilon"})
        if "fock_epsilon" in tolerances:
            fock_epsilon = _positive(tolerances, "tolerances", "fock_epsilon")
    policy = _parse_policy(data.get("grid"), "grid", grid_points)
    return RunConfig(command, data, policy, fock_epsilon)


# ---------------------------------------------------------------------------
# deterministic writers


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return FLOAT_FMT % value
    return str(value)


def _write_csv(path: Path, header_meta: dict, columns: list[str], rows) -> None:
    lines = [f"# {key}: {value}" for key, value in header_meta.items()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2, default=float) + "\n")


def _base_meta(config: RunConfig | None, grid=None) -> dict:
    meta = {"tool": f"fockprep {__version__}", "u_convention": U_CONVENTION}
    if config is not None:
        meta["config"] = config.to_json()
    if grid is not None:
        meta["grid"] = (f"x in [{FLOAT_FMT % grid.x_min}, {FLOAT_FMT % grid.x_max}], "
                        f"n_points={grid.n_points}")
    return meta


# ---------------------------------------------------------------------------
# subcommand drivers


def _cmd_spectrum(config: RunConfig, out: Path) -> int:
    spec = TrapSpec.from_dict(config.data["trap"])
    grid = solver.auto_grid(spec, config.policy)
    spectrum = solver.solve_trap(spec, grid, config.policy)
    meta = _base_meta(config, grid)
    meta["capacity"] = spectrum.capacity
    meta["dimensionless_depth"] = _fmt(dimensionless_depth(spec))
    meta["near_threshold"] = "[" + ", ".join(_fmt(e) for e in spectrum.near_threshold) + "]"
    parities = spectrum.parities() if spectrum.capacity else np.empty(0)
    _write_csv(out / "spectrum_levels.csv", meta, ["n", "energy", "parity"],
               [(n + 1, e, int(p)) for n, (e, p) in
                enumerate(zip(spectrum.energies, parities))])
    if config.data.get("eigenfunctions", False):
        cols = ["x"] + [f"phi_{n + 1}" for n in range(spectrum.capacity)]
        rows = np.column_stack([grid.points(), spectrum.eigenfunctions])
        _write_csv(out / "spectrum_eigenfunctions.csv", meta, cols, rows)
    return 0


def _scenario_from_config(config: RunConfig) -> experiments.ReductionScenario:
    initial = TrapSpec.from_dict(config.data["initial"])
    final = _parse_final(config.data["final"], "final", initial)
    occ = _parse_occupation(config.data["occupation"], "occupation", initial.half_width)
    return experiments.ReductionScenario(initial, final, occ)


def _cmd_counting(config: RunConfig, out: Path) -> int:
    scenario = _scenario_from_config(config)
    result = experiments.run_scenario(scenario, config.policy, config.fock_epsilon)
    meta = _base_meta(config, result.grid)
    meta["capacity_initial"] = result.initial_spectrum.capacity
    meta["capacity_final"] = result.final_spectrum.capacity
    _write_csv(out / "counting_distribution.csv", meta, ["n", "p_n"],
               list(enumerate(result.statistics.probabilities)))
    _write_csv(out / "counting_occupation.csv", meta, ["n", "energy", "weight"],
               [(n + 1, e, w) for n, (e, w) in
                enumerate(zip(result.initial_spectrum.energies, result.occupation.weights))])
    density = density_profile(result.initial_spectrum, result.occupation)
    _write_csv(out / "counting_density.csv", meta, ["x", "rho"], density)
    _write_json(out / "counting_summary.json", {
        "mean": result.mean,
        "variance": result.variance,
        "kappa3": result.statistics.kappa3,
        "min_eigenvalue": result.min_eigenvalue,
        "fock_satisfied": result.fock_satisfied,
        "p_full": result.p_full,
        "capacity_initial": result.initial_spectrum.capacity,
        "capacity_final": result.final_spectrum.capacity,
        "chemical_potential": result.occupation.chemical_potential,
        "temperature": result.occupation.temperature,
    })
    return 0


def _sweep_rows(result: experiments.SweepResult):
    return [(r.value, r.mean, r.variance, r.min_eigenvalue, r.p_full)
            for r in result.rows]


SWEEP_COLUMNS = ["value", "mean", "variance", "min_eigenvalue", "p_full"]


def _cmd_sweep(config: RunConfig, out: Path) -> int:
    scenario = _scenario_from_config(config)
    sweep_cfg = config.data["sweep"]
    values = [float(v) for v in sweep_cfg["values"]]
    if sweep_cfg["parameter"] == "width_ratio":
        result = experiments.sweep_width_ratio(
            scenario, values, config.policy, config.fock_epsilon, threads=config.threads)
    else:
        result = experiments.temperature_sweep(
            scenario, values, policy=config.policy, threads=config.threads)
    meta = _base_meta(config)
    meta["parameter"] = result.parameter
    meta["capacity_initial"] = result.metadata.get("capacity_initial", "")
    _write_csv(out / f"sweep_{result.parameter}.csv", meta, SWEEP_COLUMNS,
               _sweep_rows(result))
    return 0


def _cmd_figure(tag: str, out: Path, policy: GridPolicy, threads: int,
                verbose: bool) -> int:
    meta = _base_meta(None)
    if tag == "fig2":
        panels = experiments.fock_distribution_panels(policy)
        summary = {}
        for label, res in sorted(panels.items()):
            m = dict(meta)
            m["panel"] = label
            m["width_ratio"] = _fmt(experiments.PANEL_RATIOS[label])
            _write_csv(out / f"figure_fig2_{label}.csv", m, ["n", "p_n"],
                       list(enumerate(res.statistics.probabilities)))
            summary[label] = {"mean": res.mean, "variance": res.variance,
                              "p_full": res.p_full,
                              "min_eigenvalue": res.min_eigenvalue,
                              "fock_satisfied": res.fock_satisfied}
        _write_json(out / "figure_fig2_summary.json", summary)
    elif tag == "fig3":
        rows = experiments.smoothness_capacity_table(policy)
        _write_csv(out / "figure_fig3_capacity.csv", meta,
                   ["sigma_over_L", "capacity", "top_gap"], rows)
    elif tag == "fig4":
        sweeps = experiments.robustness_sweeps(policy, threads=threads)
        summary = {}
        for label, result in sorted(sweeps.items()):
            m = dict(meta)
            m["family"] = label
            m["U_initial"] = _fmt(
                dimensionless_depth(TrapSpec.from_dict(result.metadata["initial"])))
            _write_csv(out / f"figure_fig4_{label}.csv", m, SWEEP_COLUMNS,
                       _sweep_rows(result))
            plateau = max(r.mean for r in result.rows)
            summary[label] = {
                "plateau_mean": plateau,
                "U_final_family": result.metadata["final_family"]["U"],
                "capacity_initial": result.metadata["capacity_initial"],
                "capacity_final": result.metadata["capacity_final"],
            }
        _write_json(out / "figure_fig4_summary.json", summary)
    elif tag == "fig5":
        data = experiments.temperature_degradation(policy, threads=threads)
        ladder = data["ladder"]
        rows = [(r.value, d["temperature"], r.mean, r.variance, r.p_full)
                for r, d in zip(ladder.rows, ladder.metadata["details"])]
        _write_csv(out / "figure_fig5_ladder.csv", meta,
                   ["mu_over_kT", "temperature", "plateau_mean", "variance", "p_full"],
                   rows)
        for d in ladder.metadata["details"]:
            m = dict(meta)
            m["mu_over_kT"] = _fmt(d["mu_over_kT"])
            m["temperature"] = _fmt(d["temperature"])
            _write_csv(out / f"figure_fig5_sweep_mu{d['mu_over_kT']:g}.csv", m,
                       SWEEP_COLUMNS, _sweep_rows(d["sweep"]))
        _write_csv(out / "figure_fig5_recovery.csv", meta, SWEEP_COLUMNS,
                   _sweep_rows(data["recovery_sweep"]))
        _write_json(out / "figure_fig5_summary.json", {
            "temperature_at_mu_over_kT_5": data["temperature_at_5"],
            "plateau_means": {str(r.value): r.mean for r in ladder.rows},
            "recovery_plateau_mean": data["recovery_plateau_mean"],
        })
    else:
        raise ConfigError(f"unknown figure {tag!r}; choose fig2, fig3, fig4 or fig5")
    if verbose:
        print(f"figure {tag} written to {out}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fockprep",
        description="Bound-state spectra and atom-counting statistics of "
                    "sudden 1D trap reductions")
    parser.add_argument("--version", action="version", version=f"fockprep {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config):
        p.add_argument("--config", type=Path, required=needs_config,
                       help="scenario file (JSON)")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--grid-points", type=int, default=None,
                       help="minimum number of grid points")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for sweep points")
        p.add_argument("--verbose", action="store_true")

    common(sub.add_parser("spectrum", help="bound spectrum of one trap"), True)
    common(sub.add_parser("counting", help="counting statistics of one scenario"), True)
    common(sub.add_parser("sweep", help="parameter sweep of a scenario"), True)
    fig = sub.add_parser("figure", help="canned figure scenario suites")
    fig.add_argument("tag", choices=["fig2", "fig3", "fig4", "fig5"])
    common(fig, False)
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = args.out
        out.mkdir(parents=True, exist_ok=True)
        if args.threads < 1:
            raise ConfigError(f"--threads: expected >= 1, got {args.threads}")
        if args.command == "figure":
            policy = _parse_policy(None, "grid", args.grid_points)
            return _cmd_figure(args.tag, out, policy, args.threads, args.verbose)
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        config = parse_config(text, args.command, args.grid_points)
        config = dataclasses.replace(config, verbose=args.verbose, threads=args.threads)
        driver = {"spectrum": _cmd_spectrum, "counting": _cmd_counting,
                  "sweep": _cmd_sweep}[args.command]
        code = driver(config, out)
        if args.verbose and code == 0:
            print(f"{args.command} outputs written to {out}", file=sys.stderr)
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericsError, FockprepError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
