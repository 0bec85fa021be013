"""Composite system assembly: static Hamiltonian, kick generators, targets.

Models one or two qubits, each truncated to ``n_sim_levels``, with an
excitation-conserving exchange coupling between nearest charge ladders.  Gate
search happens on the ``n_levels`` sub-ladder of each qubit; the extra
simulation levels exist to expose leakage honestly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qubits import QubitLevels

__all__ = [
    "ControlChannel",
    "CoupledSystem",
    "GateTarget",
    "assemble",
    "x_kick_unitary",
    "z_kick_unitary",
    "kick_generator",
    "target_library",
]

AXES = ("x", "z")


@dataclass(frozen=True)
class ControlChannel:
    """One SFQ drive line: a pulse axis on one qubit with a fixed tip angle.

    axis 'x' kicks through the charge operator (Bloch rotation by tip_angle
    per pulse on the qubit subspace); axis 'z' advances level k by phase
    k*tip_angle per pulse.
    """

    qubit: int
    axis: str
    tip_angle: float

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if self.qubit < 0:
            raise ValueError("qubit index must be non-negative")
        if not np.isfinite(self.tip_angle) or self.tip_angle == 0.0:
            raise ValueError("tip_angle must be finite and non-zero")

    @property
    def key(self) -> str:
        return f"{self.qubit}:{self.axis}"


@dataclass(frozen=True)
class GateTarget:
    """Ideal gate on the computational (two-level) subspace."""

    name: str
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("target must be a square matrix")
        q = int(round(np.log2(m.shape[0])))
        if 2**q != m.shape[0] or q not in (1, 2):
            raise ValueError("target dimension must be 2 or 4")
        if not np.allclose(m @ m.conj().T, np.eye(m.shape[0]), atol=1e-12):
            raise ValueError(f"target {self.name!r} is not unitary")
        object.__setattr__(self, "matrix", m)

    @property
    def num_qubits(self) -> int:
        return 1 if self.matrix.shape[0] == 2 else 2


@dataclass(frozen=True)
class CoupledSystem:
    """One or two multi-level qubits plus drive lines on a common clock.

    Fields
    ------
    qubits: per-qubit level structures, each holding >= n_sim_levels levels.
    n_levels: ladder depth the search is allowed to learn on (>= 2).
    n_sim_levels: ladder depth actually simulated (>= n_levels).
    j_coupling: exchange strength (rad/s); the |01>-|10> matrix element is
        exactly j_coupling.  Must be 0.0 for a single qubit.
    channels: drive lines, unique per (qubit, axis).
    clock_period: SFQ clock period in seconds (one bit per channel per tick).
    """

    qubits: tuple[QubitLevels, ...]
    n_levels: int
    n_sim_levels: int
    j_coupling: float
    channels: tuple[ControlChannel, ...]
    clock_period: float

    # Derived, filled in __post_init__.
    h_static: np.ndarray = field(init=False, repr=False, compare=False)
    bare_energies: np.ndarray = field(init=False, repr=False, compare=False)
    learn_indices: np.ndarray = field(init=False, repr=False, compare=False)
    comp_indices: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not 1 <= len(self.qubits) <= 2:
            raise ValueError("system supports one or two qubits")
        if not 2 <= self.n_levels <= self.n_sim_levels:
            raise ValueError("need 2 <= n_levels <= n_sim_levels")
        for q in self.qubits:
            if q.n_levels < self.n_sim_levels:
                raise ValueError("qubit levels shorter than n_sim_levels")
        if len(self.qubits) == 1 and self.j_coupling != 0.0:
            raise ValueError("single-qubit system cannot be coupled")
        if self.clock_period <= 0:
            raise ValueError("clock_period must be positive")
        keys = [c.key for c in self.channels]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate control channel")
        for c in self.channels:
            if c.qubit >= len(self.qubits):
                raise ValueError(f"channel on absent qubit {c.qubit}")

        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "h_static", self._build_static())
        object.__setattr__(self, "bare_energies", self._build_bare())
        learn, comp = self._index_maps()
        object.__setattr__(self, "learn_indices", learn)
        object.__setattr__(self, "comp_indices", comp)

    # -- dimensions -------------------------------------------------------
    @property
    def num_qubits(self) -> int:
        return len(self.qubits)

    @property
    def dim_sim(self) -> int:
        return self.n_sim_levels**self.num_qubits

    @property
    def dim_learn(self) -> int:
        return self.n_levels**self.num_qubits

    @property
    def dim_comp(self) -> int:
        return 2**self.num_qubits

    # -- construction helpers ---------------------------------------------
    def _energies(self, q: int) -> np.ndarray:
        return self.qubits[q].energies[: self.n_sim_levels]

    def _charge(self, q: int) -> np.ndarray:
        return self.qubits[q].charge[: self.n_sim_levels - 1]

    def _lowering_unit(self, q: int) -> np.ndarray:
        """Lowering ladder with the 0-1 element normalized to 1."""
        c = self._charge(q)
        return np.diag(c / c[0], 1)

    def charge_operator(self, q: int) -> np.ndarray:
        """Single-qubit charge matrix N (tridiagonal, c[0] = 1/2)."""
        return np.diag(self._charge(q), 1) + np.diag(self._charge(q), -1)

    def _embed(self, op: np.ndarray, q: int) -> np.ndarray:
        if self.num_qubits == 1:
            return op
        eye = np.eye(self.n_sim_levels)
        return np.kron(op, eye) if q == 0 else np.kron(eye, op)

    def _build_static(self) -> np.ndarray:
        h = np.zeros((self.dim_sim, self.dim_sim))
        for q in range(self.num_qubits):
            h += self._embed(np.diag(self._energies(q)), q)
        if self.num_qubits == 2 and self.j_coupling != 0.0:
            low0 = self._lowering_unit(0)
            low1 = self._lowering_unit(1)
            h += self.j_coupling * (np.kron(low0, low1.T) + np.kron(low0.T, low1))
        return h

    def _build_bare(self) -> np.ndarray:
        """Uncoupled level energies per composite index (rest-frame rates)."""
        if self.num_qubits == 1:
            return self._energies(0).copy()
        e0, e1 = self._energies(0), self._energies(1)
        return (e0[:, None] + e1[None, :]).ravel()

    def _index_maps(self) -> tuple[np.ndarray, np.ndarray]:
        ns, nl = self.n_sim_levels, self.n_levels
        if self.num_qubits == 1:
            learn = np.arange(nl)
        else:
            learn = np.array([i * ns + k for i in range(nl) for k in range(nl)])
        # Computational block, indexed within the learning subspace ordering.
        if self.num_qubits == 1:
            comp = np.array([0, 1])
        else:
            comp = np.array([0, 1, nl, nl + 1])
        return learn, comp

    def projector_learn(self) -> np.ndarray:
        """Diagonal 0/1 projector onto the learning subspace (full space)."""
        p = np.zeros((self.dim_sim, self.dim_sim))
        p[self.learn_indices, self.learn_indices] = 1.0
        return p

    def channel_index(self, qubit: int, axis: str) -> int:
        for i, c in enumerate(self.channels):
            if c.qubit == qubit and c.axis == axis:
                return i
        raise KeyError(f"no channel {qubit}:{axis}")


def assemble(
    qubits: Sequence[QubitLevels],
    n_levels: int,
    n_sim_levels: int,
    j_coupling: float = 0.0,
    channels: Sequence[ControlChannel] = (),
    clock_period: float = 8e-12,
) -> CoupledSystem:
    """Build a CoupledSystem; thin validated constructor."""
    return CoupledSystem(
        qubits=tuple(qubits),
        n_levels=n_levels,
        n_sim_levels=n_sim_levels,
        j_coupling=j_coupling,
        channels=tuple(channels),
        clock_period=clock_period,
    )


# -- kicks ------------------------------------------------------------------

def kick_generator(system: CoupledSystem, channel: ControlChannel) -> np.ndarray:
    """Hermitian generator of one pulse on one channel, full composite space.

    x: tip_angle * N_q (charge ladder, c[0] = 1/2), so a single pulse rotates
       the qubit subspace by tip_angle about x.
    z: tip_angle * diag(0, 1, ..., n_sim-1) on that qubit.
    """
    if channel.axis == "x":
        op = system.charge_operator(channel.qubit)
    else:
        op = np.diag(np.arange(system.n_sim_levels, dtype=float))
    return channel.tip_angle * system._embed(op, channel.qubit)


def _kick_unitary(system: CoupledSystem, qubit: int, axis: str) -> np.ndarray:
    idx = system.channel_index(qubit, axis)
    gen = kick_generator(system, system.channels[idx])
    w, v = np.linalg.eigh(gen)
    return (v * np.exp(-1j * w)) @ v.conj().T


def x_kick_unitary(system: CoupledSystem, qubit: int) -> np.ndarray:
    """Unitary of a single x pulse: exp(-i tip N_q); Bloch rotation by
    tip_angle on the qubit's two-level subspace."""
    return _kick_unitary(system, qubit, "x")


def z_kick_unitary(system: CoupledSystem, qubit: int) -> np.ndarray:
    """Unitary of a single z pulse: level k acquires phase exp(-i k tip)."""
    return _kick_unitary(system, qubit, "z")


# -- gate targets -------------------------------------------------------------

def target_library() -> dict[str, GateTarget]:
    """Named computational-subspace gates accepted in configs."""
    s2 = 1.0 / np.sqrt(2.0)
    one = {
        "I": np.eye(2),
        "X": np.array([[0, 1], [1, 0]]),
        "Y": np.array([[0, -1j], [1j, 0]]),
        "Z": np.diag([1, -1]),
        "H": s2 * np.array([[1, 1], [1, -1]]),
        "RX90": s2 * np.array([[1, -1j], [-1j, 1]]),
        "RY90": s2 * np.array([[1, -1], [1, 1]]),
    }
    two = {
        "II": np.eye(4),
        "CZ": np.diag([1, 1, 1, -1]),
        "CNOT": np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]
        ),
        "ISWAP": np.array(
            [[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]]
        ),
        "SWAP": np.array(
            [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]
        ),
    }
    lib = {}
    for name, m in {**one, **two}.items():
        lib[name] = GateTarget(name=name, matrix=np.asarray(m, dtype=complex))
    return lib


def lookup_target(name: str) -> GateTarget:
    lib = target_library()
    key = name.strip().upper()
    if key not in lib:
        known = ", ".join(sorted(lib))
        raise KeyError(f"unknown gate target {name!r}; known: {known}")
    return lib[key]
