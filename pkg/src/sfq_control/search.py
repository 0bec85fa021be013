"""Genetic search over binary pulse schedules.

Rank-weighted parent selection without replacement, single-point crossover
with one cut shared across channels, independent per-bit mutation, and
children replacing the current worst individuals only when strictly better.
One Generator seeded once drives every random draw, so a seed fixes the whole
run bit for bit; checkpoints capture the generator state and population and
resume exactly.
"""

from __future__ import annotations

import json
import time
from configparser import ConfigParser
from dataclasses import dataclass, replace

import numpy as np

from .metrics import FidelityBreakdown, _f1_batch, _f2_batch, projected_breakdown
from .propagate import CycleUnitarySet, PulseSchedule, evolve_projected, precompute
from .system import CoupledSystem, GateTarget

__all__ = [
    "GaConfig",
    "Individual",
    "SearchResult",
    "run_ga",
    "evaluate_fitness",
    "crossover",
    "write_checkpoint",
    "read_checkpoint",
]

METRICS = ("f1", "f2")


@dataclass(frozen=True)
class GaConfig:
    """Search knobs; defaults are the full-size settings.

    elitism_count is accepted for completeness but has no effect: replacing
    only the worst with strictly better children already preserves the top
    of the population every generation.
    """

    population_size: int = 70
    selection_size: int = 60
    mutation_probability: float = 0.001
    max_iterations: int = 200_000
    target_fidelity: float = 0.999
    elitism_count: int = 2
    metric: str = "f2"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if not 2 <= self.selection_size <= self.population_size:
            raise ValueError("selection_size must be in [2, population_size]")
        if self.selection_size % 2:
            raise ValueError("selection_size must be even (parents are paired)")
        if not 0.0 <= self.mutation_probability <= 1.0:
            raise ValueError("mutation_probability must be in [0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not 0.0 < self.target_fidelity <= 1.0:
            raise ValueError("target_fidelity must be in (0, 1]")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        if self.elitism_count < 0:
            raise ValueError("elitism_count must be non-negative")


@dataclass(frozen=True)
class Individual:
    bits: np.ndarray  # (num_channels, num_cycles) uint8
    fitness: float

    def schedule(self) -> PulseSchedule:
        return PulseSchedule(self.bits)


@dataclass(frozen=True)
class SearchResult:
    best: Individual
    breakdown: FidelityBreakdown
    iterations_used: int
    wall_time_s: float
    terminated_by: str  # "target_reached" | "max_iterations"
    history: np.ndarray  # best fitness after each executed iteration
    n_evaluations: int

    @property
    def error(self) -> float:
        return 1.0 - self.best.fitness


def evaluate_fitness(
    cycles: CycleUnitarySet,
    schedule: PulseSchedule,
    target: GateTarget,
    metric: str = "f2",
) -> FidelityBreakdown:
    """Canonical scalar fitness path: projected evolution, then metrics.

    A zero-length schedule evolves to the identity, so against an identity
    target it scores f1 = f2 = 1.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    result = evolve_projected(cycles, schedule)
    return projected_breakdown(result.matrix, result.norm_loss, cycles.system, target)


def crossover(
    parent_a: np.ndarray, parent_b: np.ndarray, cut: int
) -> tuple[np.ndarray, np.ndarray]:
    """Single-point crossover, same cut position on every channel."""
    if parent_a.shape != parent_b.shape:
        raise ValueError("parents must have identical shape")
    if not 0 <= cut <= parent_a.shape[1]:
        raise ValueError("cut must lie in [0, num_cycles]")
    child_a = np.concatenate([parent_a[:, :cut], parent_b[:, cut:]], axis=1)
    child_b = np.concatenate([parent_b[:, :cut], parent_a[:, cut:]], axis=1)
    return child_a, child_b


# -- batched fitness -----------------------------------------------------------

class _FitnessEngine:
    """Evolves only the computational columns of every candidate at once.

    Identical math to evolve_projected (the projector sandwich telescopes to
    a product of learning-block matrices); the final reported numbers always
    come from the canonical scalar path.
    """

    def __init__(
        self,
        system: CoupledSystem,
        target: GateTarget,
        num_cycles: int,
        metric: str,
    ) -> None:
        self.system = system
        self.target = target
        self.metric = metric
        self.num_cycles = num_cycles
        self.cycles = precompute(system)
        self.comp = system.comp_indices
        self.dim_learn = system.dim_learn
        self.d = system.dim_comp
        total_time = num_cycles * system.clock_period
        self.frame = np.exp(
            1j * system.bare_energies[system.learn_indices] * total_time
        )
        nch = len(system.channels)
        self.nch = nch
        self.mask_weights = (1 << np.arange(max(nch, 1), dtype=np.int64))
        self.z_only = nch > 0 and all(c.axis == "z" for c in system.channels)
        if self.z_only:
            self.free_learn = np.ascontiguousarray(self.cycles.combos_learn[0])
            self.kick_diags = self._z_kick_diags()
        else:
            self.combos = [
                np.ascontiguousarray(m) for m in self.cycles.combos_learn
            ]
        self.cache: dict[bytes, float] = {}
        self.cache_cap = 100_000
        self.n_evaluations = 0

    def _z_kick_diags(self) -> np.ndarray:
        """Per-mask diagonal kick factors on the learning subspace."""
        sys_ = self.system
        nl, q = sys_.n_levels, sys_.num_qubits
        if q == 1:
            level_of = [np.arange(nl)]
        else:
            level_of = [
                np.repeat(np.arange(nl), nl),  # qubit 0 level per learn index
                np.tile(np.arange(nl), nl),  # qubit 1 level per learn index
            ]
        per_channel = []
        for ch in sys_.channels:
            per_channel.append(np.exp(-1j * ch.tip_angle * level_of[ch.qubit]))
        diags = np.ones((1 << self.nch, self.dim_learn), dtype=complex)
        for mask in range(1, 1 << self.nch):
            d = np.ones(self.dim_learn, dtype=complex)
            for i in range(self.nch):
                if mask >> i & 1:
                    d = d * per_channel[i]
            diags[mask] = d
        return diags

    def _masks(self, bits: np.ndarray) -> np.ndarray:
        # bits: (B, nch, N) -> (B, N)
        return (bits.astype(np.int64) * self.mask_weights[None, : self.nch, None]).sum(
            axis=1
        )

    def evolve_columns(self, bits: np.ndarray) -> np.ndarray:
        """Computational columns of the projected evolution; (B, dL, d)."""
        b = bits.shape[0]
        masks = self._masks(bits)
        if self.z_only:
            # Flat child-major layout (dL, B*d): one gemm per cycle.
            m = np.zeros((self.dim_learn, b * self.d), dtype=complex)
            cols = np.arange(b * self.d)
            m[self.comp[cols % self.d], cols] = 1.0
            col_child = np.repeat(np.arange(b), self.d)
            masks_exp = masks[col_child, :]  # (B*d, N)
            free = self.free_learn
            diags_t = np.ascontiguousarray(self.kick_diags.T)  # (dL, n_masks)
            for t in range(self.num_cycles):
                kd = diags_t[:, masks_exp[:, t]]  # (dL, B*d)
                m = free @ (kd * m)
            m = m * self.frame[:, None]
            return m.reshape(self.dim_learn, b, self.d).transpose(1, 0, 2).copy()
        m = np.zeros((b, self.dim_learn, self.d), dtype=complex)
        m[:, self.comp, np.arange(self.d)] = 1.0
        for t in range(self.num_cycles):
            mt = masks[:, t]
            for mask in np.unique(mt):
                sel = mt == mask
                m[sel] = self.combos[mask] @ m[sel]
        return m * self.frame[None, :, None]

    def _fitness_batch(self, bits: np.ndarray) -> np.ndarray:
        a = self.evolve_columns(bits)[:, self.comp, :]
        if self.metric == "f1":
            return _f1_batch(a, self.target.matrix)
        return _f2_batch(a, self.target.matrix)

    def fitness(self, bits: np.ndarray) -> np.ndarray:
        """Batch fitness with a de-duplication cache keyed by raw bits."""
        b = bits.shape[0]
        out = np.empty(b)
        todo = []
        keys = []
        for i in range(b):
            key = bits[i].tobytes()
            keys.append(key)
            hit = self.cache.get(key)
            if hit is None:
                todo.append(i)
            else:
                out[i] = hit
        if todo:
            fresh = self._fitness_batch(bits[todo])
            self.n_evaluations += len(todo)
            if len(self.cache) + len(todo) > self.cache_cap:
                self.cache.clear()
            for i, f in zip(todo, fresh):
                out[i] = f
                self.cache[keys[i]] = float(f)
        return out


# -- checkpointing -------------------------------------------------------------

_CHECKPOINT_VERSION = 1


def _fingerprint(system: CoupledSystem, target: GateTarget, num_cycles: int) -> str:
    import hashlib

    h = hashlib.sha256()
    h.update(system.h_static.tobytes())
    h.update(np.asarray(system.bare_energies).tobytes())
    h.update(target.matrix.tobytes())
    for c in system.channels:
        h.update(f"{c.qubit}:{c.axis}:{c.tip_angle!r}".encode())
    h.update(f"{system.n_levels}:{system.n_sim_levels}:{num_cycles}".encode())
    h.update(f"{system.clock_period!r}".encode())
    return h.hexdigest()


def write_checkpoint(
    path,
    *,
    fingerprint: str,
    iteration: int,
    rng: np.random.Generator,
    population: np.ndarray,
    fitness: np.ndarray,
    config: GaConfig,
) -> None:
    """Persist the full search state as structured text."""
    cp = ConfigParser()
    cp["meta"] = {
        "version": str(_CHECKPOINT_VERSION),
        "fingerprint": fingerprint,
        "iteration": str(iteration),
        "population_size": str(population.shape[0]),
        "num_channels": str(population.shape[1]),
        "num_cycles": str(population.shape[2]),
    }
    cp["ga"] = {
        "population_size": str(config.population_size),
        "selection_size": str(config.selection_size),
        "mutation_probability": repr(config.mutation_probability),
        "max_iterations": str(config.max_iterations),
        "target_fidelity": repr(config.target_fidelity),
        "elitism_count": str(config.elitism_count),
        "metric": config.metric,
        "seed": str(config.seed),
    }
    cp["rng"] = {"state": json.dumps(rng.bit_generator.state)}
    pop = {}
    for i in range(population.shape[0]):
        pop[f"fitness_{i}"] = float(fitness[i]).hex()
        for c in range(population.shape[1]):
            row = population[i, c]
            pop[f"bits_{i}_{c}"] = "".join("1" if x else "0" for x in row)
    cp["population"] = pop
    with open(path, "w", encoding="ascii") as fh:
        cp.write(fh)


def read_checkpoint(path) -> dict:
    cp = ConfigParser()
    with open(path, "r", encoding="ascii") as fh:
        cp.read_file(fh)
    meta = cp["meta"]
    if int(meta["version"]) != _CHECKPOINT_VERSION:
        raise ValueError("unsupported checkpoint version")
    p = int(meta["population_size"])
    nch = int(meta["num_channels"])
    n = int(meta["num_cycles"])
    population = np.zeros((p, nch, n), dtype=np.uint8)
    fitness = np.zeros(p)
    sect = cp["population"]
    for i in range(p):
        fitness[i] = float.fromhex(sect[f"fitness_{i}"])
        for c in range(nch):
            row = sect[f"bits_{i}_{c}"]
            if len(row) != n:
                raise ValueError("checkpoint bit row length mismatch")
            population[i, c] = np.frombuffer(row.encode(), dtype=np.uint8) - ord("0")
    ga = cp["ga"]
    config = GaConfig(
        population_size=int(ga["population_size"]),
        selection_size=int(ga["selection_size"]),
        mutation_probability=float(ga["mutation_probability"]),
        max_iterations=int(ga["max_iterations"]),
        target_fidelity=float(ga["target_fidelity"]),
        elitism_count=int(ga["elitism_count"]),
        metric=ga["metric"],
        seed=int(ga["seed"]),
    )
    return {
        "fingerprint": meta["fingerprint"],
        "iteration": int(meta["iteration"]),
        "rng_state": json.loads(cp["rng"]["state"]),
        "population": population,
        "fitness": fitness,
        "config": config,
    }


# -- the search ----------------------------------------------------------------

def run_ga(
    system: CoupledSystem,
    target: GateTarget,
    num_cycles: int,
    config: GaConfig,
    checkpoint_path=None,
    checkpoint_every: int = 0,
    resume_from=None,
) -> SearchResult:
    """Search for a schedule realizing the target gate.

    Deterministic for a fixed config seed; pass resume_from to continue a
    checkpointed run bit for bit.
    """
    if num_cycles < 1:
        raise ValueError("num_cycles must be positive")
    if target.num_qubits != system.num_qubits:
        raise ValueError("target size does not match the system")
    if not system.channels:
        raise ValueError("search needs at least one control channel")

    engine = _FitnessEngine(system, target, num_cycles, config.metric)
    fingerprint = _fingerprint(system, target, num_cycles)
    nch = len(system.channels)
    p, s = config.population_size, config.selection_size
    rng = np.random.default_rng(config.seed)
    start_iter = 0

    if resume_from is not None:
        state = read_checkpoint(resume_from)
        if state["fingerprint"] != fingerprint:
            raise ValueError("checkpoint was written for a different problem")
        # The iteration budget may be extended on resume; everything that
        # feeds the random stream or the scoring must match exactly.
        if replace(state["config"], max_iterations=config.max_iterations) != config:
            raise ValueError("checkpoint was written with different GA settings")
        population = state["population"]
        fitness = state["fitness"]
        rng.bit_generator.state = state["rng_state"]
        start_iter = state["iteration"]
    else:
        population = rng.integers(0, 2, size=(p, nch, num_cycles), dtype=np.uint8)
        fitness = engine.fitness(population)

    t0 = time.perf_counter()
    history: list[float] = []
    rank_weights = np.arange(p, 0, -1, dtype=float)  # best gets p, worst gets 1

    def canonical(best_idx: int) -> FidelityBreakdown:
        return evaluate_fitness(
            engine.cycles,
            PulseSchedule(population[best_idx]),
            target,
            config.metric,
        )

    terminated_by = "max_iterations"
    iteration = start_iter
    best_idx = int(np.argmax(fitness))
    breakdown = None
    if fitness[best_idx] >= config.target_fidelity:
        breakdown = canonical(best_idx)
        if breakdown.value(config.metric) >= config.target_fidelity:
            terminated_by = "target_reached"

    while terminated_by != "target_reached" and iteration < config.max_iterations:
        iteration += 1
        order_desc = np.argsort(-fitness, kind="stable")
        weights = np.empty(p)
        weights[order_desc] = rank_weights
        parents = rng.choice(p, size=s, replace=False, p=weights / weights.sum())

        children = np.empty((s, nch, num_cycles), dtype=np.uint8)
        for k in range(0, s, 2):
            cut = int(rng.integers(0, num_cycles + 1))
            a, b = crossover(population[parents[k]], population[parents[k + 1]], cut)
            children[k], children[k + 1] = a, b
        flips = rng.random(size=children.shape) < config.mutation_probability
        children ^= flips.astype(np.uint8)

        child_fit = engine.fitness(children)
        kid_order = np.argsort(-child_fit, kind="stable")
        worst_order = np.argsort(fitness, kind="stable")
        w = 0
        for k in kid_order:
            if child_fit[k] <= fitness[worst_order[w]]:
                break
            population[worst_order[w]] = children[k]
            fitness[worst_order[w]] = child_fit[k]
            w += 1
            if w >= p:
                break

        best_idx = int(np.argmax(fitness))
        history.append(float(fitness[best_idx]))
        if fitness[best_idx] >= config.target_fidelity:
            breakdown = canonical(best_idx)
            if breakdown.value(config.metric) >= config.target_fidelity:
                terminated_by = "target_reached"

        if (
            checkpoint_path is not None
            and checkpoint_every > 0
            and iteration % checkpoint_every == 0
        ):
            write_checkpoint(
                checkpoint_path,
                fingerprint=fingerprint,
                iteration=iteration,
                rng=rng,
                population=population,
                fitness=fitness,
                config=config,
            )

    if breakdown is None or terminated_by != "target_reached":
        breakdown = canonical(best_idx)
    if checkpoint_path is not None:
        write_checkpoint(
            checkpoint_path,
            fingerprint=fingerprint,
            iteration=iteration,
            rng=rng,
            population=population,
            fitness=fitness,
            config=config,
        )
    wall = time.perf_counter() - t0
    best = Individual(
        bits=population[best_idx].copy(),
        fitness=breakdown.value(config.metric),
    )
    return SearchResult(
        best=best,
        breakdown=breakdown,
        iterations_used=iteration,
        wall_time_s=wall,
        terminated_by=terminated_by,
        history=np.asarray(history),
        n_evaluations=engine.n_evaluations,
    )
