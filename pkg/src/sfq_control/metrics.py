"""Gate quality metrics on the computational block.

All metrics start from the evolution operator truncated to the learning
subspace (rest frame).  F1 is the standard average gate fidelity of the
computational block against the target; F2 relaxes it by maximizing over a
virtual Z rotation per qubit applied after the gate, which hardware gets for
free.  Leakage is population escaping the computational block under the full
(unprojected) evolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .system import CoupledSystem, GateTarget

__all__ = [
    "MetricInput",
    "FidelityBreakdown",
    "avg_fidelity_f1",
    "rz_fidelity_f2",
    "avg_leakage",
    "agreement_f1",
    "gate_breakdown",
    "projected_breakdown",
]


@dataclass(frozen=True)
class MetricInput:
    """Evolution operator truncated to the learning space, plus its target."""

    u: np.ndarray
    target: GateTarget
    num_qubits: int
    n_levels: int

    def __post_init__(self) -> None:
        u = np.asarray(self.u, dtype=complex)
        d = self.n_levels**self.num_qubits
        if u.shape != (d, d):
            raise ValueError(
                f"u must be {d}x{d} for {self.num_qubits} qubit(s) at "
                f"n_levels={self.n_levels}, got {u.shape}"
            )
        if self.target.num_qubits != self.num_qubits:
            raise ValueError("target qubit count does not match")
        object.__setattr__(self, "u", u)

    def comp_block(self) -> np.ndarray:
        idx = _comp_indices(self.num_qubits, self.n_levels)
        return self.u[np.ix_(idx, idx)]


def _comp_indices(num_qubits: int, n_levels: int) -> np.ndarray:
    if num_qubits == 1:
        return np.array([0, 1])
    return np.array([0, 1, n_levels, n_levels + 1])


def _f1_from_block(a: np.ndarray, target: np.ndarray) -> float:
    d = a.shape[0]
    gamma = float(np.sum(np.abs(a) ** 2))
    tr = np.sum(np.conj(target) * a)
    return float((gamma + abs(tr) ** 2) / (d * (d + 1)))


def avg_fidelity_f1(mi: MetricInput) -> float:
    """Average gate fidelity of the computational block vs the target.

    (||A||_F^2 + |tr(T^dag A)|^2) / (d^2 + d); insensitive to global phase,
    equals 1 iff A == e^{i phi} T.
    """
    return _f1_from_block(mi.comp_block(), mi.target.matrix)


def rz_fidelity_f2(mi: MetricInput) -> tuple[float, tuple[float, ...]]:
    """F1 maximized over a trailing virtual Z per qubit.

    Returns (f2, z_angles); applying diag phases exp(i k . angles) after the
    gate reproduces f2 as a plain F1.  The inner phase is eliminated in
    closed form (sup over a unit phase of |a + b y| is |a| + |b|); the outer
    one is maximized on a coarse grid refined by golden-section steps.
    """
    a = mi.comp_block()[None, :, :]
    f2, angles = _f2_batch(a, mi.target.matrix, return_angles=True)
    return float(f2[0]), tuple(float(x) for x in angles[0])


def _row_overlaps(a: np.ndarray, target: np.ndarray) -> np.ndarray:
    """w[b, k] = sum_m conj(T[k, m]) A[b, k, m]; tr(T^dag D A) = sum d_k w_k."""
    return np.einsum("km,bkm->bk", np.conj(target), a)


def _f1_batch(a: np.ndarray, target: np.ndarray) -> np.ndarray:
    d = target.shape[0]
    gamma = np.sum(np.abs(a) ** 2, axis=(1, 2))
    tr = _row_overlaps(a, target).sum(axis=1)
    return (gamma + np.abs(tr) ** 2) / (d * (d + 1))


def _f2_batch(
    a: np.ndarray, target: np.ndarray, return_angles: bool = False
):
    """Batched F2 over blocks a (B, d, d); d in (2, 4).

    For one qubit the supremum is closed-form.  For two, with
    D = diag(1, y, x, xy), tr(T^dag D A) = (w0 + w1 y) + x (w2 + w3 y);
    the sup over |x| = 1 is g(y) = |w0 + w1 y| + |w2 + w3 y|, maximized
    over y = e^{i theta} numerically.
    """
    d = target.shape[0]
    gamma = np.sum(np.abs(a) ** 2, axis=(1, 2))
    w = _row_overlaps(a, target)
    if d == 2:
        g = np.abs(w[:, 0]) + np.abs(w[:, 1])
        f2 = (gamma + g**2) / (d * (d + 1))
        if not return_angles:
            return f2
        theta = np.angle(w[:, 0]) - np.angle(w[:, 1])
        return f2, np.stack([theta], axis=1)

    def g_of(theta: np.ndarray) -> np.ndarray:
        # theta: (B, K) angles of y per batch element
        y = np.exp(1j * theta)
        return np.abs(w[:, 0, None] + w[:, 1, None] * y) + np.abs(
            w[:, 2, None] + w[:, 3, None] * y
        )

    grid = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    vals = g_of(np.broadcast_to(grid, (a.shape[0], grid.size)))
    j = np.argmax(vals, axis=1)
    step = grid[1] - grid[0]
    lo = grid[j] - step
    hi = grid[j] + step
    theta1 = _golden_max(g_of, lo, hi)
    g = g_of(theta1[:, None])[:, 0]
    f2 = (gamma + g**2) / (d * (d + 1))
    if not return_angles:
        return f2
    y = np.exp(1j * theta1)
    theta0 = np.angle(w[:, 0] + w[:, 1] * y) - np.angle(w[:, 2] + w[:, 3] * y)
    return f2, np.stack([theta0, theta1], axis=1)


def _golden_max(f, lo: np.ndarray, hi: np.ndarray, iters: int = 48) -> np.ndarray:
    """Vectorized golden-section maximization on per-element brackets."""
    gr = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo.astype(float).copy(), hi.astype(float).copy()
    for _ in range(iters):
        span = b - a
        c = b - gr * span
        d = a + gr * span
        both = np.stack([c, d], axis=1)
        fc_fd = f(both)
        take_right = fc_fd[:, 0] < fc_fd[:, 1]
        a = np.where(take_right, c, a)
        b = np.where(take_right, b, d)
    return 0.5 * (a + b)


def avg_leakage(u_full: np.ndarray, num_qubits: int, n_sim_levels: int) -> float:
    """Average population leaving the computational block.

    1 - tr(P U P U^dag P) / 2^q for the diagonal projector P onto the
    computational indices of the full simulation space; u_full must be the
    unprojected evolution.
    """
    d = 2**num_qubits
    dim = n_sim_levels**num_qubits
    if u_full.shape != (dim, dim):
        raise ValueError(
            f"u_full must be {dim}x{dim} for n_sim_levels={n_sim_levels}"
        )
    idx = _comp_indices(num_qubits, n_sim_levels)
    block = u_full[np.ix_(idx, idx)]
    return 1.0 - float(np.sum(np.abs(block) ** 2)) / d


def agreement_f1(a_block: np.ndarray, b_block: np.ndarray) -> float:
    """F1-style agreement between two evolutions on a common block.

    Uses P = A^dag B: (||P||_F^2 + |tr P|^2) / (d^2 + d), which is 1 iff the
    blocks are equal and unitary; tolerant of a shared global phase.
    """
    if a_block.shape != b_block.shape or a_block.shape[0] != a_block.shape[1]:
        raise ValueError("blocks must be square and congruent")
    p = a_block.conj().T @ b_block
    d = p.shape[0]
    return float(
        (np.sum(np.abs(p) ** 2) + abs(np.trace(p)) ** 2) / (d * (d + 1))
    )


@dataclass(frozen=True)
class FidelityBreakdown:
    """Everything a run reports about one evolution.

    leakage is None when only the learning-space evolution was computed.
    The chain f1 <= f2 <= 1 - leakage holds when all three come from one
    full-space evolution; cross-truncation comparisons (the whole point of
    re-simulating with more levels) break it by design, so it is not
    enforced here.
    """

    f1: float
    f2: float
    norm_loss: float
    z_angles: tuple[float, ...]
    leakage: float | None = None

    def value(self, metric: str) -> float:
        if metric == "f1":
            return self.f1
        if metric == "f2":
            return self.f2
        raise ValueError(f"unknown metric {metric!r}")


def gate_breakdown(
    u_full: np.ndarray, system: CoupledSystem, target: GateTarget
) -> FidelityBreakdown:
    """All metrics from one full-space evolution (consistent truncations)."""
    learn = system.learn_indices
    m = u_full[np.ix_(learn, learn)]
    mi = MetricInput(
        u=m, target=target, num_qubits=system.num_qubits, n_levels=system.n_levels
    )
    f1 = avg_fidelity_f1(mi)
    f2, angles = rz_fidelity_f2(mi)
    leak = avg_leakage(u_full, system.num_qubits, system.n_sim_levels)
    norm_loss = 1.0 - float(np.sum(np.abs(m) ** 2)) / system.dim_learn
    return FidelityBreakdown(
        f1=f1, f2=f2, norm_loss=norm_loss, z_angles=angles, leakage=leak
    )


def projected_breakdown(
    matrix: np.ndarray, norm_loss: float, system: CoupledSystem, target: GateTarget
) -> FidelityBreakdown:
    """Metrics of a learning-space (projected) evolution; no leakage."""
    mi = MetricInput(
        u=matrix, target=target, num_qubits=system.num_qubits,
        n_levels=system.n_levels,
    )
    f1 = avg_fidelity_f1(mi)
    f2, angles = rz_fidelity_f2(mi)
    return FidelityBreakdown(
        f1=f1, f2=f2, norm_loss=norm_loss, z_angles=angles, leakage=None
    )
