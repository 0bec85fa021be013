"""Gate reports: everything needed to audit or re-evaluate a learned gate.

A report echoes the config, embeds the per-channel bitstreams, and records
the metrics twice: at the configured simulation depth and with two extra
levels per qubit, so truncation artifacts show up in the file itself.
Floats are written with repr and parse back to the identical float64.
"""

from __future__ import annotations

from configparser import ConfigParser
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import ExperimentConfig, build_system
from .metrics import FidelityBreakdown, gate_breakdown
from .propagate import PulseSchedule, evolve_full, precompute
from .search import SearchResult, evaluate_fitness

__all__ = ["GateReport", "evaluate_gate", "write_report", "read_report"]


@dataclass(frozen=True)
class GateReport:
    command: str  # "learn" | "evaluate"
    engine_version: str
    seed: int
    metric: str
    target_name: str
    num_cycles: int
    time_ns: float
    clock_ps: float
    n_levels: int
    n_sim_levels: int
    fitness: float
    error: float
    f1: float
    f2: float
    leakage: float
    norm_loss: float
    z_angles: tuple[float, ...]
    f1_wide: float
    f2_wide: float
    leakage_wide: float
    iterations: int
    wall_time_s: float
    terminated_by: str
    bitstreams: dict[str, str]  # channel key -> '0'/'1' row
    config_echo: dict = field(compare=False)


def evaluate_gate(
    cfg: ExperimentConfig,
    schedule: PulseSchedule,
    command: str = "evaluate",
    search: SearchResult | None = None,
    seed: int | None = None,
) -> GateReport:
    """Compute the full report for one schedule under one config.

    The learning-space numbers (fitness, f1, f2, norm_loss) come from the
    same canonical path the search scores with; leakage and the *_wide row
    come from unprojected evolutions at n_sim and n_sim + 2 levels.
    """
    system = build_system(cfg)
    target = cfg.target()
    cycles = precompute(system)
    breakdown = evaluate_fitness(cycles, schedule, target, cfg.ga.metric)
    leak = gate_breakdown(evolve_full(cycles, schedule), system, target).leakage

    wide_system = build_system(cfg, n_sim_levels=cfg.n_sim_levels + 2)
    wide_cycles = precompute(wide_system)
    wide = gate_breakdown(evolve_full(wide_cycles, schedule), wide_system, target)

    fitness = breakdown.value(cfg.ga.metric)
    bitstreams = dict(zip(cfg.channel_keys(), schedule.bitstrings()))
    return GateReport(
        command=command,
        engine_version=__version__,
        seed=cfg.ga.seed if seed is None else seed,
        metric=cfg.ga.metric,
        target_name=cfg.target_name,
        num_cycles=schedule.num_cycles,
        time_ns=cfg.time_ns,
        clock_ps=cfg.clock_ps,
        n_levels=cfg.n_levels,
        n_sim_levels=cfg.n_sim_levels,
        fitness=fitness,
        error=1.0 - fitness,
        f1=breakdown.f1,
        f2=breakdown.f2,
        leakage=float(leak),
        norm_loss=breakdown.norm_loss,
        z_angles=breakdown.z_angles,
        f1_wide=wide.f1,
        f2_wide=wide.f2,
        leakage_wide=float(wide.leakage),
        iterations=search.iterations_used if search else 0,
        wall_time_s=search.wall_time_s if search else 0.0,
        terminated_by=search.terminated_by if search else "evaluate_only",
        bitstreams=bitstreams,
        config_echo=cfg.echo,
    )


_FLOAT_FIELDS = (
    "fitness",
    "error",
    "f1",
    "f2",
    "leakage",
    "norm_loss",
    "f1_wide",
    "f2_wide",
    "leakage_wide",
    "wall_time_s",
    "time_ns",
    "clock_ps",
)
_INT_FIELDS = ("seed", "num_cycles", "n_levels", "n_sim_levels", "iterations")
_STR_FIELDS = ("command", "engine_version", "metric", "target_name", "terminated_by")


def write_report(path, report: GateReport) -> None:
    cp = ConfigParser()
    run = {}
    for name in _STR_FIELDS:
        run[name] = getattr(report, name)
    for name in _INT_FIELDS:
        run[name] = str(getattr(report, name))
    for name in _FLOAT_FIELDS:
        run[name] = repr(float(getattr(report, name)))
    run["z_angles"] = ",".join(repr(float(a)) for a in report.z_angles)
    cp["run"] = run
    cp["config"] = {
        f"{section}.{key}": value
        for section, items in report.config_echo.items()
        for key, value in items.items()
    }
    # ':' is a configparser delimiter, so channel keys are stored with '_'
    cp["bitstreams"] = {
        key.replace(":", "_"): row for key, row in report.bitstreams.items()
    }
    with open(path, "w", encoding="ascii") as fh:
        cp.write(fh)


def read_report(path) -> GateReport:
    cp = ConfigParser()
    with open(path, "r", encoding="ascii") as fh:
        cp.read_file(fh)
    run = cp["run"]
    kwargs: dict = {}
    for name in _STR_FIELDS:
        kwargs[name] = run[name]
    for name in _INT_FIELDS:
        kwargs[name] = int(run[name])
    for name in _FLOAT_FIELDS:
        kwargs[name] = float(run[name])
    angles = run["z_angles"]
    kwargs["z_angles"] = (
        tuple(float(a) for a in angles.split(",")) if angles else ()
    )
    echo: dict = {}
    for flat_key, value in cp["config"].items():
        section, key = flat_key.split(".", 1)
        echo.setdefault(section, {})[key] = value
    kwargs["config_echo"] = echo
    kwargs["bitstreams"] = {
        key.replace("_", ":"): row for key, row in cp["bitstreams"].items()
    }
    return GateReport(**kwargs)
