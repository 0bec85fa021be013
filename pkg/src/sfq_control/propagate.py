"""Time evolution under SFQ pulse trains.

The working model treats each pulse as a delta kick at the start of its clock
cycle: one cycle is ``free @ kick(mask)`` where ``mask`` says which channels
fired.  All 2^n_channels cycle unitaries are precomputed once, so evolving a
schedule is a chain of matrix products.  Results are reported in the rest
frame of the uncoupled qubits, with the frame rotation applied once at the
final time.

``reference_integrate`` is the independent check on the delta-kick model: it
integrates the Schrodinger equation with finite-width Gaussian pulses using a
commutator-free fourth-order Magnus scheme and verifies its own convergence
by substep doubling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .system import CoupledSystem, kick_generator

__all__ = [
    "PulseSchedule",
    "CycleUnitarySet",
    "EvolutionResult",
    "ConvergenceError",
    "BitstreamFormatError",
    "precompute",
    "evolve_projected",
    "evolve_full",
    "reference_integrate",
    "write_bitstreams",
    "read_bitstreams",
]


class ConvergenceError(RuntimeError):
    """Reference integration did not converge under substep doubling."""


class BitstreamFormatError(ValueError):
    """Malformed bitstream exchange file."""


# -- schedules ----------------------------------------------------------------

@dataclass(frozen=True)
class PulseSchedule:
    """Binary pulse train: bits[c, t] == 1 fires channel c in cycle t."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        b = np.ascontiguousarray(np.asarray(self.bits), dtype=np.uint8)
        if b.ndim != 2:
            raise ValueError("bits must be a (num_channels, num_cycles) array")
        if b.size and not np.all((b == 0) | (b == 1)):
            raise ValueError("bits must be 0 or 1")
        object.__setattr__(self, "bits", b)

    @property
    def num_channels(self) -> int:
        return int(self.bits.shape[0])

    @property
    def num_cycles(self) -> int:
        return int(self.bits.shape[1])

    @classmethod
    def zeros(cls, num_channels: int, num_cycles: int) -> "PulseSchedule":
        return cls(np.zeros((num_channels, num_cycles), dtype=np.uint8))

    @classmethod
    def random(
        cls, rng: np.random.Generator, num_channels: int, num_cycles: int
    ) -> "PulseSchedule":
        return cls(rng.integers(0, 2, size=(num_channels, num_cycles), dtype=np.uint8))

    @classmethod
    def from_bitstrings(cls, rows: list[str]) -> "PulseSchedule":
        if not rows:
            raise ValueError("need at least one channel row")
        if len({len(r) for r in rows}) != 1:
            raise ValueError("all channels must have the same number of cycles")
        bits = np.array([[int(ch) for ch in row] for row in rows], dtype=np.uint8)
        return cls(bits)

    def bitstrings(self) -> list[str]:
        return ["".join("1" if b else "0" for b in row) for row in self.bits]

    def masks(self) -> np.ndarray:
        """Per-cycle channel mask (bit c set when channel c fires)."""
        if self.num_channels == 0:
            return np.zeros(self.num_cycles, dtype=np.int64)
        weights = (1 << np.arange(self.num_channels, dtype=np.int64))[:, None]
        return (self.bits.astype(np.int64) * weights).sum(axis=0)


# -- precomputed cycle unitaries ----------------------------------------------

@dataclass
class CycleUnitarySet:
    """Every one-cycle unitary the delta-kick model can produce.

    combos[mask] = free @ kick(mask); kick(mask) applies all fired channels
    at the cycle start (generators summed before exponentiation, so
    simultaneous bits on one qubit are legal even when they don't commute).
    """

    system: CoupledSystem
    free: np.ndarray
    combos: dict[int, np.ndarray]
    projector_learn: np.ndarray
    combos_learn: np.ndarray = field(repr=False)  # (2^nch, dim_learn, dim_learn)

    @property
    def num_masks(self) -> int:
        return len(self.combos)


def _expm_herm(h: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """exp(-1j * scale * h) for Hermitian h via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * scale * w)) @ v.conj().T


def precompute(system: CoupledSystem) -> CycleUnitarySet:
    dt = system.clock_period
    free = _expm_herm(system.h_static, dt)
    gens = [kick_generator(system, c) for c in system.channels]
    nch = len(gens)
    combos: dict[int, np.ndarray] = {}
    for mask in range(1 << nch):
        if mask == 0:
            combos[0] = free
            continue
        gen = sum(gens[i] for i in range(nch) if mask >> i & 1)
        combos[mask] = free @ _expm_herm(gen)
    learn = system.learn_indices
    combos_learn = np.stack(
        [combos[m][np.ix_(learn, learn)] for m in range(1 << nch)]
    )
    return CycleUnitarySet(
        system=system,
        free=free,
        combos=combos,
        projector_learn=system.projector_learn(),
        combos_learn=combos_learn,
    )


# -- evolution ----------------------------------------------------------------

@dataclass(frozen=True)
class EvolutionResult:
    """Learning-space evolution operator and the population it shed.

    matrix: rest-frame evolution truncated to the learning subspace; not
        unitary once population crossed the truncation boundary.
    norm_loss: 1 - ||matrix||_F^2 / dim_learn, the average population lost
        from the learning subspace.
    """

    matrix: np.ndarray
    norm_loss: float


def _check_schedule(system: CoupledSystem, schedule: PulseSchedule) -> None:
    if schedule.num_channels != len(system.channels):
        raise ValueError(
            f"schedule has {schedule.num_channels} channels, "
            f"system has {len(system.channels)}"
        )


def _frame_phases(system: CoupledSystem, total_time: float) -> np.ndarray:
    """Rest-frame rotation exp(+i E_bare T) as a phase vector."""
    return np.exp(1j * system.bare_energies * total_time)


def evolve_projected(
    cycles: CycleUnitarySet, schedule: PulseSchedule
) -> EvolutionResult:
    """Evolve with the learning projector applied every cycle.

    Projecting each cycle and truncating commute (the projector sandwich
    telescopes), so this is a product of learning-block cycle matrices.
    """
    system = cycles.system
    _check_schedule(system, schedule)
    d = system.dim_learn
    m = np.eye(d, dtype=complex)
    combos = cycles.combos_learn
    for mask in schedule.masks():
        m = combos[mask] @ m
    total_time = schedule.num_cycles * system.clock_period
    phases = _frame_phases(system, total_time)[system.learn_indices]
    m = phases[:, None] * m
    norm_loss = 1.0 - float(np.sum(np.abs(m) ** 2)) / d
    return EvolutionResult(matrix=m, norm_loss=norm_loss)


def evolve_full(
    cycles: CycleUnitarySet, schedule: PulseSchedule, rest_frame: bool = True
) -> np.ndarray:
    """Unprojected evolution on the full simulation space (unitary)."""
    system = cycles.system
    _check_schedule(system, schedule)
    u = np.eye(system.dim_sim, dtype=complex)
    combos = [cycles.combos[m] for m in range(cycles.num_masks)]
    for mask in schedule.masks():
        u = combos[mask] @ u
    if rest_frame:
        total_time = schedule.num_cycles * system.clock_period
        u = _frame_phases(system, total_time)[:, None] * u
    return u


# -- continuous-pulse reference -----------------------------------------------

# Gauss-Legendre nodes/weights of the two-exponential commutator-free scheme.
_CF4_NODE = np.sqrt(3.0) / 6.0
_CF4_W1 = 0.25 + np.sqrt(3.0) / 6.0
_CF4_W2 = 0.25 - np.sqrt(3.0) / 6.0
_PULSE_CUTOFF_SIGMAS = 8.0


def reference_integrate(
    system: CoupledSystem,
    schedule: PulseSchedule,
    pulse_width: float = 0.25e-12,
    substeps_per_cycle: int = 64,
    check_convergence: bool = True,
    convergence_tol: float = 1e-6,
) -> np.ndarray:
    """Integrate the same schedule with finite-width Gaussian pulses.

    Each fired bit becomes a unit-area Gaussian of width ``pulse_width``
    centered at its cycle start (the cycle-0 pulse is shifted five widths in
    so its support stays inside the run).  The propagator is built with a
    commutator-free fourth-order Magnus scheme; substeps away from any pulse
    reuse the static propagator.  The whole integration is repeated at double
    resolution and the two results must agree to ``convergence_tol``
    (max-abs), else ConvergenceError.

    Returns the rest-frame unitary at the final time, like evolve_full.
    """
    _check_schedule(system, schedule)
    if substeps_per_cycle < 8:
        raise ValueError("substeps_per_cycle must be at least 8")
    if pulse_width <= 0 or pulse_width > 0.25 * system.clock_period:
        raise ValueError("pulse_width must be positive and well under a cycle")

    coarse = _cf4_run(system, schedule, pulse_width, substeps_per_cycle)
    fine = _cf4_run(system, schedule, pulse_width, 2 * substeps_per_cycle)
    diff = float(np.max(np.abs(fine - coarse))) if coarse.size else 0.0
    if check_convergence and diff > convergence_tol:
        raise ConvergenceError(
            f"substep doubling moved the propagator by {diff:.3e} "
            f"(> {convergence_tol:.1e}); raise substeps_per_cycle"
        )
    total_time = schedule.num_cycles * system.clock_period
    return _frame_phases(system, total_time)[:, None] * fine


def _pulse_centers(
    system: CoupledSystem, schedule: PulseSchedule, pulse_width: float
) -> list[np.ndarray]:
    """Sorted Gaussian center times per channel."""
    dt = system.clock_period
    centers = []
    for row in schedule.bits:
        t = np.flatnonzero(row).astype(float) * dt
        if t.size and t[0] == 0.0:
            t[0] = 5.0 * pulse_width
        centers.append(t)
    return centers


def _cf4_run(
    system: CoupledSystem,
    schedule: PulseSchedule,
    pulse_width: float,
    substeps_per_cycle: int,
) -> np.ndarray:
    dt = system.clock_period
    n_steps = schedule.num_cycles * substeps_per_cycle
    h_sub = dt / substeps_per_cycle
    dim = system.dim_sim
    u = np.eye(dim, dtype=complex)
    if n_steps == 0:
        return u

    gens = [kick_generator(system, c) for c in system.channels]
    centers = _pulse_centers(system, schedule, pulse_width)
    window = _PULSE_CUTOFF_SIGMAS * pulse_width

    active = np.zeros(n_steps, dtype=bool)
    for t in centers:
        lo = np.floor((t - window) / h_sub).astype(int)
        hi = np.ceil((t + window) / h_sub).astype(int)
        for a, b in zip(lo, hi):
            active[max(a, 0) : min(b, n_steps)] = True

    w_static, v_static = np.linalg.eigh(system.h_static)

    def free_prop(duration: float) -> np.ndarray:
        return (v_static * np.exp(-1j * w_static * duration)) @ v_static.conj().T

    norm = 1.0 / (pulse_width * np.sqrt(2.0 * np.pi))

    def hamiltonian(t: float) -> np.ndarray:
        h = system.h_static
        for gen, cts in zip(gens, centers):
            if cts.size == 0:
                continue
            i0 = np.searchsorted(cts, t - window)
            i1 = np.searchsorted(cts, t + window)
            if i1 > i0:
                x = t - cts[i0:i1]
                amp = float(np.sum(np.exp(-0.5 * (x / pulse_width) ** 2))) * norm
                h = h + amp * gen
        return h

    s = 0
    while s < n_steps:
        if not active[s]:
            e = s + 1
            while e < n_steps and not active[e]:
                e += 1
            u = free_prop((e - s) * h_sub) @ u
            s = e
            continue
        t0 = s * h_sub
        h1 = hamiltonian(t0 + (0.5 - _CF4_NODE) * h_sub)
        h2 = hamiltonian(t0 + (0.5 + _CF4_NODE) * h_sub)
        first = _CF4_W1 * h1 + _CF4_W2 * h2  # earlier-node heavy, applied first
        second = _CF4_W2 * h1 + _CF4_W1 * h2
        u = _expm_herm(second, h_sub) @ (_expm_herm(first, h_sub) @ u)
        s += 1
    return u


# -- bitstream exchange files --------------------------------------------------

def write_bitstreams(
    path, schedule: PulseSchedule, channel_keys: list[str], clock_ps: float
) -> None:
    """Write the one-file-per-gate exchange format.

    One header + one bit row per channel:
        # channel=<qubit>:<axis> cycles=<N> clock_ps=<float>
        010110...
    """
    if len(channel_keys) != schedule.num_channels:
        raise ValueError("one channel key per schedule row required")
    lines = []
    for key, row in zip(channel_keys, schedule.bitstrings()):
        lines.append(
            f"# channel={key} cycles={schedule.num_cycles} clock_ps={clock_ps!r}"
        )
        lines.append(row)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_bitstreams(path) -> tuple[PulseSchedule, list[str], float]:
    """Parse the exchange format back; returns (schedule, keys, clock_ps)."""
    with open(path, "r", encoding="ascii") as fh:
        raw = [ln.rstrip("\n") for ln in fh if ln.strip()]
    keys: list[str] = []
    rows: list[str] = []
    clocks: set[float] = set()
    i = 0
    while i < len(raw):
        header = raw[i]
        if not header.startswith("# "):
            raise BitstreamFormatError(f"expected channel header, got {header!r}")
        fields = dict(
            part.split("=", 1) for part in header[2:].split() if "=" in part
        )
        try:
            key = fields["channel"]
            cycles = int(fields["cycles"])
            clocks.add(float(fields["clock_ps"]))
        except (KeyError, ValueError) as exc:
            raise BitstreamFormatError(f"bad header {header!r}: {exc}") from exc
        if i + 1 >= len(raw):
            raise BitstreamFormatError(f"missing bit row for channel {key}")
        row = raw[i + 1].strip()
        if set(row) - {"0", "1"}:
            raise BitstreamFormatError(f"non-binary characters in channel {key}")
        if len(row) != cycles:
            raise BitstreamFormatError(
                f"channel {key}: header says {cycles} cycles, row has {len(row)}"
            )
        keys.append(key)
        rows.append(row)
        i += 2
    if not keys:
        raise BitstreamFormatError("no channels in file")
    if len(set(keys)) != len(keys):
        raise BitstreamFormatError("duplicate channel keys")
    if len(clocks) != 1:
        raise BitstreamFormatError("inconsistent clock_ps across channels")
    return PulseSchedule.from_bitstrings(rows), keys, clocks.pop()
