"""Information measures on edge states and reconstructed channels.

All entropies and capacities use log base 2, so qubit quantities live on a
[-2, 2] scale and bit quantities on [0, 1].
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from edgemem.model import LOGICAL_PERM
from edgemem.paulis import MINUS, MINUS_I, PLUS, PLUS_I, UP, DOWN
from edgemem.tomography import ChannelMatrix, EdgeState, channel_to_choi

logger = logging.getLogger(__name__)


def _as_matrix(state) -> np.ndarray:
    if isinstance(state, EdgeState):
        return state.matrix
    return np.asarray(state, dtype=np.complex128)


def trace_distance(rho, sigma, herm_tol: float = 1e-8) -> float:
    """(1/2)||rho - sigma||_1 via the eigenvalues of the difference."""
    a = _as_matrix(rho)
    b = _as_matrix(sigma)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("trace_distance needs two square matrices of equal size")
    for m in (a, b):
        if np.max(np.abs(m - m.conj().T)) > herm_tol:
            raise ValueError("trace_distance requires Hermitian inputs")
    diff = a - b
    diff = (diff + diff.conj().T) / 2.0
    # Orient the difference so swapping the arguments feeds the eigensolver
    # the identical matrix; this makes symmetry exact to the last bit.
    for z in diff.reshape(-1):
        if z.real != 0.0 or z.imag != 0.0:
            if (z.real, z.imag) < (0.0, 0.0):
                diff = -diff
            break
    else:
        return 0.0
    return float(np.sum(np.abs(np.linalg.eigvalsh(diff))) / 2.0)


def distinguish_probability(d: float) -> float:
    """Best single-shot success probability for equiprobable states at
    trace distance d: p = 1/2 + d/2."""
    if not -1e-12 <= d <= 1.0 + 1e-12:
        raise ValueError(f"trace distance {d} outside [0, 1]")
    return 0.5 + 0.5 * min(max(d, 0.0), 1.0)


_AXIS_STATES = {
    "X": (PLUS, MINUS),
    "Y": (PLUS_I, MINUS_I),
    "Z": (UP, DOWN),
}


@dataclass(frozen=True)
class DirectedEncoding:
    """Two orthogonal logical states, both eigenvectors of the axis product
    operator sigma_L^axis (x) sigma_R^axis."""

    axis: str
    pair: tuple[np.ndarray, np.ndarray]

    def __post_init__(self) -> None:
        if self.axis not in _AXIS_STATES:
            raise ValueError("axis must be 'X', 'Y' or 'Z'")
        psi, phi = (np.asarray(s, dtype=np.complex128) for s in self.pair)
        if psi.shape != (4,) or phi.shape != (4,):
            raise ValueError("encoding states must be logical 4-vectors")
        if abs(np.vdot(psi, phi)) > 1e-12:
            raise ValueError("encoding states must be orthogonal")
        from edgemem.tomography import LOGICAL_PAULI
        axis_index = "0xyz".index(self.axis.lower())
        op = LOGICAL_PAULI[axis_index, axis_index]
        for state in (psi, phi):
            image = op @ state
            eig = np.vdot(state, image)
            if np.linalg.norm(image - eig * state) > 1e-12:
                raise ValueError(
                    f"state is not an eigenvector of the {self.axis}-axis "
                    "product operator")
        psi.setflags(write=False)
        phi.setflags(write=False)
        object.__setattr__(self, "pair", (psi, phi))

    def densities(self) -> tuple[np.ndarray, np.ndarray]:
        psi, phi = self.pair
        return np.outer(psi, psi.conj()), np.outer(phi, phi.conj())


def directed_encodings(style: str = "both-edges") -> tuple[DirectedEncoding, ...]:
    """The three axis encodings used for the directed distinguishability.

    "both-edges": pair = (|a+>|a+>, |a->|a->); "left-edge": only the left
    logical qubit is flipped between the pair members.
    """
    if style not in ("both-edges", "left-edge"):
        raise ValueError(f"unknown encoding pair style {style!r}")
    out = []
    for axis, (up_state, down_state) in _AXIS_STATES.items():
        first = LOGICAL_PERM @ np.kron(up_state, up_state)
        if style == "both-edges":
            second = LOGICAL_PERM @ np.kron(down_state, down_state)
        else:
            second = LOGICAL_PERM @ np.kron(down_state, up_state)
        out.append(DirectedEncoding(axis, (first, second)))
    return tuple(out)


def directed_integrity(channel: ChannelMatrix, encoding: DirectedEncoding) -> float:
    """Output distinguishability of the encoding pair under the channel."""
    rho, sigma = encoding.densities()
    return directed_integrity_from_outputs(channel.apply(rho), channel.apply(sigma))


def directed_integrity_from_outputs(rho_out, sigma_out) -> float:
    """Trace distance between the two channel outputs of an encoding pair.

    Both outputs must come from the same channel (same realization, time and
    bulk preparation); that provenance cannot be checked from the matrices
    alone and is the caller's responsibility.
    """
    return trace_distance(rho_out, sigma_out)


def classical_capacity_lower(p: float) -> float:
    """Binary-symmetric-channel capacity at success probability p, in bits:
    1 + p log2 p + (1-p) log2(1-p)."""
    if not 0.5 - 1e-12 <= p <= 1.0 + 1e-12:
        raise ValueError(f"success probability {p} outside [1/2, 1]")
    p = min(max(p, 0.5), 1.0)
    q = 1.0 - p
    h = 0.0
    for w in (p, q):
        if w > 0.0:
            h -= w * np.log2(w)
    return float(1.0 - h)


def von_neumann_entropy(rho, clamp_tol: float = 1e-7) -> float:
    """Entropy -sum lambda log2 lambda in bits, with 0 log 0 = 0.

    Eigenvalues in [-clamp_tol, 0) are treated as reconstruction noise and
    clamped to zero (logged); anything more negative raises.
    """
    m = _as_matrix(rho)
    eigs = np.linalg.eigvalsh((m + m.conj().T) / 2.0)
    if eigs[0] < -clamp_tol:
        raise ValueError(
            f"eigenvalue {eigs[0]:.3e} below the noise floor -{clamp_tol}")
    if eigs[0] < 0.0:
        logger.debug("clamping negative eigenvalues down to %.3e", eigs[0])
        eigs = np.clip(eigs, 0.0, None)
    positive = eigs[eigs > 0.0]
    return float(-np.sum(positive * np.log2(positive)))


def coherent_information(m: ChannelMatrix) -> float:
    """S(E(I/4)) - S(Choi state); with the maximally mixed input this lower
    bounds the single-use quantum capacity of the channel."""
    output = m.apply(np.eye(4, dtype=np.complex128) / 4.0)
    choi = channel_to_choi(m)
    return von_neumann_entropy(output) - von_neumann_entropy(choi.matrix)


@dataclass(frozen=True)
class RecoveryStats:
    """Survival statistic of a per-realization quantity against a threshold.

    ``fraction[k]`` is the share of realizations whose trace stayed strictly
    above the threshold at every sampled time up to and including
    ``times[k]``; once a trace dips below, its realization stays excluded.
    """

    quantity_name: str
    threshold: float
    times: np.ndarray
    fraction: np.ndarray
    n_total: int
    first_crossing: np.ndarray

    def final_fraction(self) -> float:
        return float(self.fraction[-1])


def recovery_fraction(traces: np.ndarray, threshold: float, t_grid: np.ndarray,
                      quantity_name: str = "") -> RecoveryStats:
    """Fraction of realizations with A(t') > threshold for all t' <= t.

    ``traces`` has one row per realization on the common grid ``t_grid``.
    The inequality is strict; values equal to the threshold count as lost.
    """
    traces = np.asarray(traces, dtype=np.float64)
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if traces.ndim != 2 or traces.shape[1] != t_grid.size:
        raise ValueError("traces must be (n_realizations, n_times) on t_grid")
    running_min = np.minimum.accumulate(traces, axis=1)
    surviving = running_min > threshold
    fraction = surviving.mean(axis=0)
    crossed = traces <= threshold
    first = np.where(crossed.any(axis=1),
                     t_grid[np.argmax(crossed, axis=1)], np.inf)
    return RecoveryStats(
        quantity_name=quantity_name,
        threshold=float(threshold),
        times=t_grid,
        fraction=fraction,
        n_total=traces.shape[0],
        first_crossing=first,
    )
