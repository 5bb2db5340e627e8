"""Seeded Monte Carlo orchestration and report emission.

Runs ensembles of channel realizations through the analytic path
(inversion, noise-enhancement spectral SNR, folded MMSE integral) and the
time-domain simulator, and emits per-run comparison rows plus ensemble
statistics. Every numeric output is a pure function of (config,
master_seed); realizations are independent jobs, so worker count never
changes the results.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from . import __version__ as _version
from .analytic import (
    NoiseModel,
    TxSpec,
    noise_for_target_snr,
    output_snr_pair,
)
from .channel import (
    ChannelSpectrum,
    ModalChannelSpec,
    ModeCoupling,
    build_grid,
    build_mmf_channel,
    identity_channel,
    invert_channel,
    load_channel,
)
from .errors import ConfigError, IllConditionedError, AlignmentFailedError
from .profiles import get_profile
from .seeding import derive_seed
from .simulator import EqualizerConfig, SimConfig, simulate_link
from .spectral import PulseShape

REPORT_COLUMNS = (
    "run_id",
    "seed",
    "snr_model_x_db",
    "snr_model_y_db",
    "snr_sim_x_db",
    "snr_sim_y_db",
    "delta_x_db",
    "delta_y_db",
    "snr_model_min_db",
    "snr_model_max_db",
    "snr_sim_min_db",
    "snr_sim_max_db",
    "ber_sim_x",
    "ber_sim_y",
    "converged",
    "wall_time_model_s",
    "wall_time_sim_s",
    "error",
)

PLOT_COLUMNS = (
    "run_id",
    "snr_min_model_db",
    "snr_max_model_db",
    "snr_min_sim_db",
    "snr_max_sim_db",
    "delta_min_db",
    "delta_max_db",
)


@dataclass(frozen=True)
class ChannelSource:
    kind: str  # "identity" | "modal" | "profile" | "file"
    modal_spec: ModalChannelSpec | None = None
    profile: str | None = None
    path: str | None = None

    def resolve_spec(self) -> ModalChannelSpec | None:
        if self.kind == "modal":
            return self.modal_spec
        if self.kind == "profile":
            return get_profile(self.profile)
        return None


@dataclass(frozen=True)
class ExperimentConfig:
    baud_rate_hz: float = 25e9
    samples_per_symbol: int = 2
    modulation_order: int = 16
    roll_off: float = 0.2
    tx_power_x: float = 1.0
    tx_power_y: float = 1.0
    channel: ChannelSource = field(default_factory=lambda: ChannelSource("identity"))
    target_snr_db: float | None = 18.0
    n0_x_w_per_hz: float | None = None
    n0_y_w_per_hz: float | None = None
    n_realizations: int = 30
    master_seed: int = 1234
    n_symbols: int = 65536
    equalizer: EqualizerConfig = field(default_factory=EqualizerConfig)
    analytic_grid_points: int = 4096
    cond_limit: float = 1e8
    unbias: bool = True

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ConfigError("n_realizations must be >= 1")
        if (self.target_snr_db is None) == (self.n0_x_w_per_hz is None):
            raise ConfigError("specify exactly one of target_snr_db or n0_x_w_per_hz")
        n_samples = self.n_symbols * self.samples_per_symbol
        if n_samples & (n_samples - 1):
            raise ConfigError(
                f"n_symbols * samples_per_symbol must be a power of two, got {n_samples}"
            )
        if self.analytic_grid_points & (self.analytic_grid_points - 1):
            raise ConfigError("analytic_grid_points must be a power of two")

    def tx_spec(self) -> TxSpec:
        return TxSpec(
            baud_rate=self.baud_rate_hz,
            pulse=PulseShape(self.roll_off),
            sigma_a2_x=self.tx_power_x,
            sigma_a2_y=self.tx_power_y,
            m_qam=self.modulation_order,
        )

    def noise_model(self) -> NoiseModel:
        if self.target_snr_db is not None:
            return noise_for_target_snr(self.tx_spec(), self.target_snr_db)
        n0y = self.n0_y_w_per_hz
        return NoiseModel(x=self.n0_x_w_per_hz, y=n0y)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["channel"] = _channel_to_dict(self.channel)
        return d


def _channel_to_dict(src: ChannelSource) -> dict:
    out = {"kind": src.kind}
    if src.kind == "modal":
        out["label"] = src.modal_spec.label
        out["mmf_length_m"] = src.modal_spec.mmf_length_m
        out["modes"] = [
            {
                "rho_in": [m.rho_in.real, m.rho_in.imag],
                "rho_out": [m.rho_out.real, m.rho_out.imag],
                "delay_s": m.delay_s,
            }
            for m in src.modal_spec.modes
        ]
    elif src.kind == "profile":
        out["name"] = src.profile
    elif src.kind == "file":
        out["path"] = src.path
    return out


def _complex_from_cfg(v, where: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise ConfigError(f"{where}: expected a number or [re, im] pair, got {v!r}")


def _channel_from_dict(d: dict) -> ChannelSource:
    kind = d.get("kind")
    if kind == "identity":
        return ChannelSource("identity")
    if kind == "profile":
        name = d.get("name")
        if not name:
            raise ConfigError("channel.profile requires a 'name'")
        get_profile(name)  # validate early
        return ChannelSource("profile", profile=name)
    if kind == "file":
        path = d.get("path")
        if not path:
            raise ConfigError("channel.file requires a 'path'")
        return ChannelSource("file", path=path)
    if kind == "modal":
        modes_cfg = d.get("modes")
        if not modes_cfg:
            raise ConfigError("channel.modal requires a non-empty 'modes' list")
        modes = tuple(
            ModeCoupling(
                rho_in=_complex_from_cfg(m.get("rho_in"), f"modes[{i}].rho_in"),
                rho_out=_complex_from_cfg(m.get("rho_out"), f"modes[{i}].rho_out"),
                delay_s=float(m.get("delay_s", 0.0)),
            )
            for i, m in enumerate(modes_cfg)
        )
        try:
            spec = ModalChannelSpec(
                modes=modes,
                mmf_length_m=float(d.get("mmf_length_m", 0.0)),
                label=str(d.get("label", "")),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return ChannelSource("modal", modal_spec=spec)
    raise ConfigError(f"unknown channel kind {kind!r}")


_TOP_LEVEL_KEYS = {
    "baud_rate_hz", "samples_per_symbol", "modulation_order", "roll_off",
    "tx_power_x", "tx_power_y", "channel", "noise", "n_realizations",
    "master_seed", "n_symbols", "equalizer", "analytic_grid_points",
    "cond_limit", "unbias",
}


def config_from_dict(d: dict) -> ExperimentConfig:
    unknown = set(d) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    for key in ("baud_rate_hz", "roll_off", "tx_power_x", "tx_power_y", "cond_limit"):
        if key in d:
            kwargs[key] = float(d[key])
    for key in ("samples_per_symbol", "modulation_order", "n_realizations",
                "master_seed", "n_symbols", "analytic_grid_points"):
        if key in d:
            kwargs[key] = int(d[key])
    if "unbias" in d:
        kwargs["unbias"] = bool(d["unbias"])
    if "channel" in d:
        kwargs["channel"] = _channel_from_dict(d["channel"])
    if "noise" in d:
        noise = d["noise"]
        if "target_snr_db" in noise:
            kwargs["target_snr_db"] = float(noise["target_snr_db"])
        elif "n0_x_w_per_hz" in noise:
            kwargs["target_snr_db"] = None
            kwargs["n0_x_w_per_hz"] = float(noise["n0_x_w_per_hz"])
            if "n0_y_w_per_hz" in noise:
                kwargs["n0_y_w_per_hz"] = float(noise["n0_y_w_per_hz"])
        else:
            raise ConfigError("noise requires target_snr_db or n0_x_w_per_hz")
    if "equalizer" in d:
        try:
            kwargs["equalizer"] = EqualizerConfig(**d["equalizer"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid equalizer settings: {exc}") from exc
    try:
        return ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return config_from_dict(data)


@dataclass(frozen=True)
class RunReport:
    run_id: int
    seed: int
    snr_model_x_db: float | None = None
    snr_model_y_db: float | None = None
    snr_sim_x_db: float | None = None
    snr_sim_y_db: float | None = None
    delta_x_db: float | None = None
    delta_y_db: float | None = None
    snr_model_min_db: float | None = None
    snr_model_max_db: float | None = None
    snr_sim_min_db: float | None = None
    snr_sim_max_db: float | None = None
    ber_sim_x: float | None = None
    ber_sim_y: float | None = None
    converged: bool | None = None
    wall_time_model_s: float | None = None
    wall_time_sim_s: float | None = None
    error: str = ""


def _channel_on_grid(cfg: ExperimentConfig, grid, run_id: int) -> ChannelSpectrum:
    src = cfg.channel
    if src.kind == "identity":
        return identity_channel(grid)
    if src.kind == "file":
        return load_channel(src.path, grid)
    spec = src.resolve_spec()
    seed = derive_seed("channel", cfg.master_seed, run_id)
    return build_mmf_channel(spec, grid, seed)


def run_single(cfg: ExperimentConfig, run_id: int, mode: str = "compare") -> RunReport:
    """One realization: analytic path and/or simulation path, never raising."""
    tx = cfg.tx_spec()
    noise = cfg.noise_model()
    seed = derive_seed("run", cfg.master_seed, run_id)
    notes = []

    model_x_db = model_y_db = None
    wall_model = None
    if mode in ("compare", "estimate"):
        try:
            t0 = time.perf_counter()
            grid = build_grid(cfg.baud_rate_hz, cfg.samples_per_symbol, cfg.analytic_grid_points)
            h = _channel_on_grid(cfg, grid, run_id)
            k = invert_channel(h, cfg.cond_limit, band_edge_hz=tx.band_edge_hz())
            pair = output_snr_pair(tx, k, noise, unbias=cfg.unbias)
            wall_model = time.perf_counter() - t0
            model_x_db, model_y_db = pair.snr_x_db, pair.snr_y_db
        except IllConditionedError as exc:
            notes.append(f"IllConditioned({exc.frequencies.size} bins)")

    sim_x_db = sim_y_db = ber_x = ber_y = None
    converged = None
    wall_sim = None
    if mode in ("compare", "simulate"):
        try:
            t0 = time.perf_counter()
            sim_grid = build_grid(
                cfg.baud_rate_hz, cfg.samples_per_symbol,
                cfg.n_symbols * cfg.samples_per_symbol,
            )
            h_sim = _channel_on_grid(cfg, sim_grid, run_id)
            sim_cfg = SimConfig(
                tx=tx,
                n_symbols=cfg.n_symbols,
                samples_per_symbol=cfg.samples_per_symbol,
                equalizer=cfg.equalizer,
                noise=noise,
                seed=derive_seed("sim", cfg.master_seed, run_id),
            )
            result = simulate_link(sim_cfg, h_sim)
            wall_sim = time.perf_counter() - t0
            sim_x_db = result.snr_evm.snr_x_db
            sim_y_db = result.snr_evm.snr_y_db
            converged = result.converged
            if not result.converged:
                notes.append("NotConverged")
            # Zero counted errors reports the resolvable upper bound, not 0.
            ber_x = max(result.ber_x, 1.0 / result.bits_counted[0])
            ber_y = max(result.ber_y, 1.0 / result.bits_counted[1])
        except AlignmentFailedError:
            notes.append("AlignmentFailed")

    delta_x = delta_y = None
    model_min = model_max = sim_min = sim_max = None
    if model_x_db is not None:
        model_min = min(model_x_db, model_y_db)
        model_max = max(model_x_db, model_y_db)
    if sim_x_db is not None:
        sim_min = min(sim_x_db, sim_y_db)
        sim_max = max(sim_x_db, sim_y_db)
    if model_x_db is not None and sim_x_db is not None:
        delta_x = model_x_db - sim_x_db
        delta_y = model_y_db - sim_y_db

    return RunReport(
        run_id=run_id,
        seed=seed,
        snr_model_x_db=model_x_db,
        snr_model_y_db=model_y_db,
        snr_sim_x_db=sim_x_db,
        snr_sim_y_db=sim_y_db,
        delta_x_db=delta_x,
        delta_y_db=delta_y,
        snr_model_min_db=model_min,
        snr_model_max_db=model_max,
        snr_sim_min_db=sim_min,
        snr_sim_max_db=sim_max,
        ber_sim_x=ber_x,
        ber_sim_y=ber_y,
        converged=converged,
        wall_time_model_s=wall_model,
        wall_time_sim_s=wall_sim,
        error=";".join(notes),
    )


def _run_single_star(args):
    return run_single(*args)


def run_comparison(
    cfg: ExperimentConfig, mode: str = "compare", workers: int = 1
) -> tuple[list[RunReport], dict]:
    """Run the full seeded ensemble and compute the summary statistics."""
    if mode not in ("compare", "estimate", "simulate"):
        raise ValueError(f"unknown mode {mode!r}")
    jobs = [(cfg, i, mode) for i in range(cfg.n_realizations)]
    if workers <= 1:
        reports = [run_single(*j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_run_single_star, jobs))
    reports.sort(key=lambda r: r.run_id)
    return reports, summarize(reports)


def summarize(reports: list[RunReport]) -> dict:
    """Ensemble statistics over the run reports."""
    model_vals = [
        v for r in reports if r.snr_model_x_db is not None
        for v in (r.snr_model_x_db, r.snr_model_y_db)
    ]
    sim_vals = [
        v for r in reports if r.snr_sim_x_db is not None
        for v in (r.snr_sim_x_db, r.snr_sim_y_db)
    ]
    paired = [
        r for r in reports
        if r.delta_x_db is not None and r.converged
    ]
    deltas = [max(abs(r.delta_x_db), abs(r.delta_y_db)) for r in paired]
    conservative = [
        r.snr_model_x_db <= r.snr_sim_x_db + 0.05
        and r.snr_model_y_db <= r.snr_sim_y_db + 0.05
        for r in paired
    ]
    walls_model = [r.wall_time_model_s for r in reports if r.wall_time_model_s is not None]
    walls_sim = [r.wall_time_sim_s for r in reports if r.wall_time_sim_s is not None]

    def _stats(vals):
        if not vals:
            return None, None, None
        return min(vals), max(vals), max(vals) - min(vals)

    model_min, model_max, model_spread = _stats(model_vals)
    sim_min, sim_max, sim_spread = _stats(sim_vals)
    mean_model = sum(walls_model) / len(walls_model) if walls_model else None
    mean_sim = sum(walls_sim) / len(walls_sim) if walls_sim else None

    return {
        "n_runs": len(reports),
        "n_converged": sum(1 for r in reports if r.converged),
        "n_errors": sum(1 for r in reports if r.error),
        "snr_model_min_db": model_min,
        "snr_model_max_db": model_max,
        "model_spread_db": model_spread,
        "snr_sim_min_db": sim_min,
        "snr_sim_max_db": sim_max,
        "sim_spread_db": sim_spread,
        "max_abs_delta_db": max(deltas) if deltas else None,
        "share_within_0p2_db": (
            sum(1 for d in deltas if d < 0.2) / len(deltas) if deltas else None
        ),
        "conservative_rate": (
            sum(conservative) / len(conservative) if conservative else None
        ),
        "mean_wall_time_model_s": mean_model,
        "mean_wall_time_sim_s": mean_sim,
        "speed_ratio_sim_over_model": (
            mean_sim / mean_model if mean_model and mean_sim else None
        ),
    }


def _format_cell(value, no_timestamp: bool, column: str) -> str:
    if no_timestamp and column.startswith("wall_time"):
        return ""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_table(path, columns, rows, cfg_meta: dict, no_timestamp: bool) -> None:
    lines = [f"# cohsnr v{_version}"]
    if not no_timestamp:
        lines.append(f"# generated: {time.strftime('%Y-%m-%dT%H:%M:%S%z')}")
    lines.append("# config: " + json.dumps(cfg_meta, sort_keys=True, separators=(",", ":")))
    lines.append(",".join(columns))
    lines.extend(rows)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_csv(
    reports: list[RunReport], path, cfg: ExperimentConfig, no_timestamp: bool = False
) -> None:
    """Per-run report CSV with the full resolved config embedded as metadata."""
    if not reports:
        raise ValueError("no reports to emit")
    rows = [
        ",".join(
            _format_cell(getattr(r, col), no_timestamp, col) for col in REPORT_COLUMNS
        )
        for r in reports
    ]
    _write_table(path, REPORT_COLUMNS, rows, cfg.to_dict(), no_timestamp)


def emit_plot_data(
    reports: list[RunReport], path, cfg: ExperimentConfig, no_timestamp: bool = False
) -> None:
    """Per-run min/max SNR series and their differences, for external plotting."""
    if not reports:
        raise ValueError("no reports to emit")
    rows = []
    for r in reports:
        delta_min = (
            r.snr_model_min_db - r.snr_sim_min_db
            if r.snr_model_min_db is not None and r.snr_sim_min_db is not None
            else None
        )
        delta_max = (
            r.snr_model_max_db - r.snr_sim_max_db
            if r.snr_model_max_db is not None and r.snr_sim_max_db is not None
            else None
        )
        cells = (
            r.run_id, r.snr_model_min_db, r.snr_model_max_db,
            r.snr_sim_min_db, r.snr_sim_max_db, delta_min, delta_max,
        )
        rows.append(
            ",".join(_format_cell(v, no_timestamp, c) for v, c in zip(cells, PLOT_COLUMNS))
        )
    _write_table(path, PLOT_COLUMNS, rows, cfg.to_dict(), no_timestamp)
