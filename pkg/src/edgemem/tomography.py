"""Edge-state reconstruction and channel assembly on the two logical qubits.

The reduced state of the two edge qubits is recovered from the sixteen
expectation values of the boundary-operator products,

    rho = (1/4) sum_{i,j in {0,x,y,z}} <O_L^i O_R^j>  sigma_L^i (x) sigma_R^j,

expressed in the logical basis (uu, dd, ud, du).  Feeding sixteen
well-chosen initial states through the dynamics yields the channel's action
on every operator-basis element |m><n|: diagonal elements directly, the
off-diagonal ones through

    E(|m><n|) = E(|+><+|) + i E(|-><-|) - (1+i)/2 (E(|m><m|) + E(|n><n|)),

with |+> = (|m>+|n>)/sqrt2 and |-> = (|m>+i|n>)/sqrt2.  Channels are stored
as 16x16 matrices acting on row-major-vectorized logical operators, with a
Choi-state conversion for complete-positivity certificates.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from edgemem.evolution import IntegratorConfig, SamplingSchedule, evolve_and_sample
from edgemem.model import (
    LOGICAL_BASIS_LABELS,
    LOGICAL_PERM,
    BulkSpec,
    LogicalPrep,
    edge_operators,
    prepare_state,
)
from edgemem.paulis import StateVector, WeightedPauliSum

logger = logging.getLogger(__name__)

_SIGMA = (
    np.eye(2, dtype=np.complex128),
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)

#: LOGICAL_PAULI[i][j] = sigma_L^i (x) sigma_R^j in the logical basis (the
#: same (i, j) indexing as AXIS_LABELS: identity, x, y, z).
LOGICAL_PAULI = np.empty((4, 4, 4, 4), dtype=np.complex128)
for _i in range(4):
    for _j in range(4):
        LOGICAL_PAULI[_i, _j] = LOGICAL_PERM @ np.kron(_SIGMA[_i], _SIGMA[_j]) @ LOGICAL_PERM.T
LOGICAL_PAULI.setflags(write=False)

#: Unordered logical-basis index pairs in the fixed preparation order.
INPUT_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def _vec(matrix: np.ndarray) -> np.ndarray:
    """Row-major vectorization of a 4x4 operator."""
    return np.asarray(matrix, dtype=np.complex128).reshape(16)


def _unvec(vector: np.ndarray) -> np.ndarray:
    return np.asarray(vector, dtype=np.complex128).reshape(4, 4)


@dataclass(frozen=True)
class EdgeState:
    """4x4 density matrix on the logical basis (uu, dd, ud, du)."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=np.complex128)
        if m.shape != (4, 4):
            raise ValueError("EdgeState needs a 4x4 matrix")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def trace(self) -> float:
        return float(self.matrix.trace().real)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2)[0])

    def validate(self, herm_tol: float = 1e-10, trace_tol: float = 1e-8,
                 eig_floor: float = -1e-7) -> None:
        if self.hermiticity_error() > herm_tol:
            raise ValueError(f"hermiticity error {self.hermiticity_error():.3e}")
        if abs(self.trace() - 1.0) > trace_tol:
            raise ValueError(f"trace {self.trace()} deviates from 1")
        if self.min_eigenvalue() < eig_floor:
            raise ValueError(f"eigenvalue {self.min_eigenvalue():.3e} below floor")

    def expectation_table(self) -> np.ndarray:
        """Inverse of the reconstruction: the 4x4 table of <O_L^i O_R^j>."""
        table = np.empty((4, 4))
        for i in range(4):
            for j in range(4):
                table[i, j] = float(np.trace(self.matrix @ LOGICAL_PAULI[i, j]).real)
        return table


@dataclass(frozen=True)
class ChannelMatrix:
    """16x16 matrix form of the edge channel on row-major-vectorized operators."""

    matrix: np.ndarray
    t: float

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=np.complex128)
        if m.shape != (16, 16):
            raise ValueError("ChannelMatrix needs a 16x16 matrix")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return _unvec(self.matrix @ _vec(rho))


@dataclass(frozen=True)
class ChoiState:
    """Choi state of a channel: (E (x) id) applied to the maximally
    entangled state on two copies of the edge space, trace-normalized."""

    matrix: np.ndarray
    raw_trace: float

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=np.complex128)
        if m.shape != (16, 16):
            raise ValueError("ChoiState needs a 16x16 matrix")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2)[0])


# ---------------------------------------------------------------------------
# state reconstruction

def reconstruct_edge_state(expectations: np.ndarray,
                           identity_tol: float = 1e-6) -> EdgeState:
    """Rebuild the edge density matrix from the 4x4 expectation table.

    ``expectations[i, j]`` holds <O_L^i O_R^j> with the axis order
    (identity, x, y, z).  The (0, 0) entry is the state normalization and
    must sit at 1 within ``identity_tol``.  The result is symmetrized; the
    size of the anti-Hermitian correction is logged for diagnostics.
    """
    table = np.asarray(expectations, dtype=np.float64)
    if table.shape != (4, 4):
        raise ValueError("expected a 4x4 expectation table")
    if abs(table[0, 0] - 1.0) > identity_tol:
        raise ValueError(
            f"identity expectation {table[0, 0]} deviates from 1 beyond "
            f"{identity_tol}; the underlying state is not normalized")
    rho = np.tensordot(table, LOGICAL_PAULI, axes=([0, 1], [0, 1])) / 4.0
    correction = float(np.linalg.norm(rho - rho.conj().T))
    if correction > 0.0:
        logger.debug("hermiticity correction norm %.3e", correction)
    rho = (rho + rho.conj().T) / 2.0
    return EdgeState(rho)


# ---------------------------------------------------------------------------
# tomographic input set

def input_preparations(bulk_spec: BulkSpec = "all-up") -> tuple[LogicalPrep, ...]:
    """The sixteen preparations probing the full operator basis.

    Order: the four logical basis states, then for each index pair m < n the
    two superpositions (|m>+|n>)/sqrt2 and (|m>+i|n>)/sqrt2.  The pair
    superpositions may be entangled between the two edges but stay product
    between edge and bulk, which is all the reduced dynamics requires.
    """
    preps: list[LogicalPrep] = []
    eye = np.eye(4, dtype=np.complex128)
    for m in range(4):
        preps.append(LogicalPrep(eye[m], bulk_spec,
                                 label=f"basis:{LOGICAL_BASIS_LABELS[m]}"))
    for m, n in INPUT_PAIRS:
        plus = (eye[m] + eye[n]) / np.sqrt(2.0)
        minus = (eye[m] + 1j * eye[n]) / np.sqrt(2.0)
        pair = f"{LOGICAL_BASIS_LABELS[m]},{LOGICAL_BASIS_LABELS[n]}"
        preps.append(LogicalPrep(plus, bulk_spec, label=f"plus:{pair}"))
        preps.append(LogicalPrep(minus, bulk_spec, label=f"imag:{pair}"))
    return tuple(preps)


@dataclass(frozen=True)
class InputSetResult:
    """Reconstructed edge states for every preparation and sample time."""

    times: np.ndarray
    edge_states: np.ndarray          # (n_inputs, n_times, 4, 4)
    preparations: tuple[LogicalPrep, ...]

    def states_at(self, time_index: int) -> np.ndarray:
        return self.edge_states[:, time_index]


def run_input_set(
    h: WeightedPauliSum,
    bulk_spec: BulkSpec,
    schedule: SamplingSchedule,
    cfg: IntegratorConfig = IntegratorConfig(),
    preparations: Sequence[LogicalPrep] | None = None,
) -> InputSetResult:
    """Evolve every tomographic input and reconstruct the edge state per time.

    All inputs share the Hamiltonian (one disorder realization) and the bulk
    preparation; only the logical edge state varies.
    """
    n = h.n_sites
    if preparations is None:
        preparations = input_preparations(bulk_spec)
    ops = edge_operators(n)
    observables = ops.correlation_observables()
    obs_list = [(label, p) for label, _, p in observables]
    index_of = {label: ij for label, ij, _ in observables}

    all_states = []
    times = None
    for prep in preparations:
        v0 = prepare_state(prep, n)
        series = evolve_and_sample(h, v0, schedule, obs_list, cfg)
        if times is None:
            times = series.times
        n_times = series.times.size
        table = np.zeros((n_times, 4, 4))
        table[:, 0, 0] = series.norms ** 2
        for label, (i, j) in index_of.items():
            table[:, i, j] = series.values[label]
        states = np.empty((n_times, 4, 4), dtype=np.complex128)
        for k in range(n_times):
            states[k] = reconstruct_edge_state(table[k]).matrix
        all_states.append(states)

    return InputSetResult(
        times=times,
        edge_states=np.stack(all_states, axis=0),
        preparations=tuple(preparations),
    )


# ---------------------------------------------------------------------------
# channel assembly

def assemble_channel(edge_states_at_t: Sequence[np.ndarray | EdgeState],
                     t: float = 0.0) -> ChannelMatrix:
    """Build the 16x16 matrix form from the sixteen reconstructed outputs.

    ``edge_states_at_t`` must follow the :func:`input_preparations` order and
    belong to a common time.  Remaining operator-basis images come from
    Hermiticity preservation, E(|n><m|) = E(|m><n|)^dagger.
    """
    states = [s.matrix if isinstance(s, EdgeState) else np.asarray(s)
              for s in edge_states_at_t]
    if len(states) != 16:
        raise ValueError(f"expected 16 edge states, got {len(states)}")

    image: dict[tuple[int, int], np.ndarray] = {}
    for m in range(4):
        image[(m, m)] = states[m]
    for pair_idx, (m, n) in enumerate(INPUT_PAIRS):
        plus = states[4 + 2 * pair_idx]
        minus = states[5 + 2 * pair_idx]
        e_mn = plus + 1j * minus - (0.5 + 0.5j) * (image[(m, m)] + image[(n, n)])
        image[(m, n)] = e_mn
        image[(n, m)] = e_mn.conj().T

    matrix = np.empty((16, 16), dtype=np.complex128)
    for m in range(4):
        for n in range(4):
            matrix[:, 4 * m + n] = _vec(image[(m, n)])
    return ChannelMatrix(matrix, t)


def channel_to_choi(m: ChannelMatrix) -> ChoiState:
    """Choi state of the channel, trace-normalized to one.

    With the maximally entangled input (1/2) sum_k |k>|k> the Choi matrix is
    C[(a,k),(b,l)] = (1/4) M[(a,b),(k,l)], a reshuffle of the matrix form.
    """
    four = m.matrix.reshape(4, 4, 4, 4)          # indices (a, b, k, l)
    choi = four.transpose(0, 2, 1, 3).reshape(16, 16) / 4.0
    raw_trace = float(choi.trace().real)
    if raw_trace <= 0:
        raise ValueError(f"Choi trace {raw_trace} is not positive")
    return ChoiState(choi / raw_trace, raw_trace)


@dataclass(frozen=True)
class CptpReport:
    trace_preservation_error: float
    choi_hermiticity_error: float
    choi_min_eigenvalue: float
    tol: float

    @property
    def passed(self) -> bool:
        return (self.trace_preservation_error <= self.tol
                and self.choi_hermiticity_error <= self.tol
                and self.choi_min_eigenvalue >= -self.tol)


def validate_cptp(m: ChannelMatrix, tol: float = 1e-6) -> CptpReport:
    """Certify trace preservation and complete positivity of a channel."""
    # Trace preservation: tr E(|m><n|) must equal delta_{mn} for every basis
    # element, i.e. the trace row of the matrix form must equal vec(identity).
    trace_row = m.matrix.reshape(4, 4, 16)[np.arange(4), np.arange(4)].sum(axis=0)
    expected = _vec(np.eye(4))
    tp_error = float(np.max(np.abs(trace_row - expected)))
    four = m.matrix.reshape(4, 4, 4, 4)
    choi_raw = four.transpose(0, 2, 1, 3).reshape(16, 16) / 4.0
    herm_error = float(np.max(np.abs(choi_raw - choi_raw.conj().T)))
    min_eig = float(np.linalg.eigvalsh((choi_raw + choi_raw.conj().T) / 2)[0])
    return CptpReport(tp_error, herm_error, min_eig, tol)


# ---------------------------------------------------------------------------
# independent reduced-state oracle

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
_CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(np.complex128)
#: Two-qubit disentangler: conjugating by it maps the boundary-operator
#: algebra of an edge pair onto single-site Paulis of the outer site
#: (X1 -> X1, Z1 X2 -> Z1, Y1 X2 -> Y1; mirrored on the right edge).  It is
#: symmetric under qubit exchange, so the same matrix serves both edges.
DISENTANGLER = np.kron(_HADAMARD, _HADAMARD) @ _CZ @ np.kron(_HADAMARD, _HADAMARD)
DISENTANGLER.setflags(write=False)


def reduced_edge_state_oracle(v: StateVector) -> np.ndarray:
    """Edge density matrix via disentangling gates and a partial trace.

    Applies :data:`DISENTANGLER` to sites (1, 2) and (N-1, N), then traces
    out sites 2..N-1.  This realizes the bulk/edge factorization explicitly
    and is a path entirely independent of the expectation-value
    reconstruction; used to cross-check tomography.  Returns the 4x4 matrix
    in the logical basis.
    """
    n = v.n_sites
    if n < 4:
        raise ValueError("oracle needs n_sites >= 4")
    dim_mid = 2 ** (n - 4)
    amps = v.amplitudes.reshape(4, dim_mid * 4)
    amps = DISENTANGLER @ amps                      # sites (1, 2)
    amps = amps.reshape(4 * dim_mid, 4) @ DISENTANGLER.T   # sites (N-1, N)
    # Keep sites 1 and N, trace the rest.
    psi = amps.reshape(2, 2 ** (n - 2), 2).transpose(0, 2, 1).reshape(4, -1)
    rho_tensor = psi @ psi.conj().T
    return LOGICAL_PERM @ rho_tensor @ LOGICAL_PERM.T
