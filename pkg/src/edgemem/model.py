"""Disordered cluster-chain model with Ising perturbation and edge encodings.

The Hamiltonian is

    H = - sum_{j=2}^{N-1} (1 + h_j) X_{j-1} Z_j X_{j+1}  -  J sum_{j=1}^{N-1} Z_j Z_{j+1}

with the h_j drawn i.i.d. uniform on [-delta/2, +delta/2].  At J = 0 the six
boundary operators

    X_1, Y_1 X_2, Z_1 X_2      (left)
    X_N, X_{N-1} Y_N, X_{N-1} Z_N   (right)

commute exactly with H and form two independent qubit Pauli algebras.  The
logical encoding realized here places the logical qubits on sites 1 and N
with sites 2 and N-1 fixed to |+>, which is the unique product-state section
on which those operators act as single-qubit Paulis.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from edgemem.paulis import (
    PLUS,
    UP,
    PauliString,
    StateVector,
    WeightedPauliSum,
)

#: Two-qubit logical basis ordering used by every 4x4 object in the package:
#: (left, right) in the order up-up, down-down, up-down, down-up.
LOGICAL_BASIS_LABELS = ("uu", "dd", "ud", "du")

#: logical basis index -> standard tensor index (left qubit is the MSB).
LOGICAL_TO_TENSOR = (0, 3, 1, 2)

#: Permutation matrix taking standard-tensor coordinates to logical-basis
#: coordinates: v_logical = LOGICAL_PERM @ v_tensor.
LOGICAL_PERM = np.zeros((4, 4))
for _a, _s in enumerate(LOGICAL_TO_TENSOR):
    LOGICAL_PERM[_a, _s] = 1.0
LOGICAL_PERM.setflags(write=False)

BulkSpec = Union[str, Sequence[np.ndarray]]


def _hash_seed(master_seed: int, realization_index: int) -> int:
    """Stable 64-bit seed derived from (master_seed, realization_index)."""
    payload = f"edgemem-disorder:{master_seed}:{realization_index}".encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


@dataclass(frozen=True)
class ModelParams:
    """Chain length, Ising coupling J, disorder width delta, ensemble seed."""

    n_sites: int
    J: float
    delta: float
    master_seed: int

    def __post_init__(self) -> None:
        if self.n_sites < 5:
            raise ValueError("n_sites must be >= 5 (two edge pairs plus bulk)")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")


@dataclass(frozen=True)
class DisorderRealization:
    """One draw of the cluster-term couplings h_j, j = 2..N-1."""

    h: np.ndarray
    realization_index: int
    derived_seed: int

    def __post_init__(self) -> None:
        h = np.array(self.h, dtype=np.float64)
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def n_sites(self) -> int:
        return self.h.size + 2

    def to_dict(self) -> dict:
        return {
            "realization_index": self.realization_index,
            "derived_seed": self.derived_seed,
            "h": [float(x) for x in self.h],
        }


def sample_disorder(params: ModelParams, realization_index: int) -> DisorderRealization:
    """Draw h_j ~ U[-delta/2, +delta/2] for j = 2..N-1, reproducibly.

    The draw order is fixed (j ascending) and the generator is PCG64 seeded
    with a stable hash of (master_seed, realization_index), so identical
    inputs reproduce identical values bit for bit on any machine.
    """
    seed = _hash_seed(params.master_seed, realization_index)
    rng = np.random.Generator(np.random.PCG64(seed))
    half = params.delta / 2.0
    h = rng.uniform(-half, half, size=params.n_sites - 2)
    return DisorderRealization(h=h, realization_index=realization_index,
                               derived_seed=seed)


def chain_hamiltonian(n_sites: int, h: Sequence[float], J: float) -> WeightedPauliSum:
    """Three-site cluster terms plus nearest-neighbour ZZ coupling.

    ``h`` lists the cluster-coupling offsets for j = 2..N-1 in order; the
    term coefficients are -(1 + h_j) and -J respectively.
    """
    if n_sites < 3:
        raise ValueError("chain_hamiltonian needs n_sites >= 3")
    if len(h) != n_sites - 2:
        raise ValueError(
            f"got {len(h)} cluster couplings, expected {n_sites - 2} "
            f"for n_sites={n_sites}")
    terms: list[tuple[float, PauliString]] = []
    for j in range(2, n_sites):
        coeff = -(1.0 + float(h[j - 2]))
        terms.append((coeff,
                      PauliString.from_sites(n_sites, x=(j - 1, j + 1), z=(j,))))
    for j in range(1, n_sites):
        terms.append((-float(J), PauliString.from_sites(n_sites, z=(j, j + 1))))
    return WeightedPauliSum(tuple(terms))


def build_hamiltonian(params: ModelParams, dis: DisorderRealization) -> WeightedPauliSum:
    """Assemble the full chain Hamiltonian for one disorder realization."""
    if dis.h.size != params.n_sites - 2:
        raise ValueError(
            f"disorder has {dis.h.size} couplings, expected "
            f"{params.n_sites - 2} for n_sites={params.n_sites}")
    return chain_hamiltonian(params.n_sites, dis.h, params.J)


# ---------------------------------------------------------------------------
# edge operators

#: Observable labels in the fixed reporting order: six singles, then the nine
#: left-right products with the left letter varying slowest.
EDGE_SINGLE_LABELS = ("X_L", "Y_L", "Z_L", "X_R", "Y_R", "Z_R")
EDGE_PRODUCT_LABELS = tuple(
    f"{a}_L{b}_R" for a in "XYZ" for b in "XYZ")
EDGE_OBSERVABLE_LABELS = EDGE_SINGLE_LABELS + EDGE_PRODUCT_LABELS

#: Index labels for the 4x4 correlation table (identity plus three axes).
AXIS_LABELS = ("0", "x", "y", "z")


@dataclass(frozen=True)
class EdgeOperatorSet:
    """The six boundary operators forming two commuting qubit algebras."""

    left_x: PauliString
    left_y: PauliString
    left_z: PauliString
    right_x: PauliString
    right_y: PauliString
    right_z: PauliString

    def triple(self, side: str) -> tuple[PauliString, PauliString, PauliString]:
        if side == "L":
            return (self.left_x, self.left_y, self.left_z)
        if side == "R":
            return (self.right_x, self.right_y, self.right_z)
        raise ValueError("side must be 'L' or 'R'")

    def all_six(self) -> dict[str, PauliString]:
        return {
            "X_L": self.left_x, "Y_L": self.left_y, "Z_L": self.left_z,
            "X_R": self.right_x, "Y_R": self.right_y, "Z_R": self.right_z,
        }

    def correlation_observables(self) -> list[tuple[str, tuple[int, int], PauliString]]:
        """The 15 products O_L^i O_R^j, (i,j) != (0,0), in reporting order.

        Returns (label, (i, j), operator) with i, j indexing AXIS_LABELS.
        """
        lefts = {1: self.left_x, 2: self.left_y, 3: self.left_z}
        rights = {1: self.right_x, 2: self.right_y, 3: self.right_z}
        out: list[tuple[str, tuple[int, int], PauliString]] = []
        for i, label in zip((1, 2, 3), ("X_L", "Y_L", "Z_L")):
            out.append((label, (i, 0), lefts[i]))
        for j, label in zip((1, 2, 3), ("X_R", "Y_R", "Z_R")):
            out.append((label, (0, j), rights[j]))
        for i, a in zip((1, 2, 3), "XYZ"):
            for j, b in zip((1, 2, 3), "XYZ"):
                out.append((f"{a}_L{b}_R", (i, j), lefts[i] @ rights[j]))
        return out


def edge_operators(n_sites: int) -> EdgeOperatorSet:
    """Boundary operator set for a chain of n_sites >= 4 sites."""
    if n_sites < 4:
        raise ValueError("edge operators need n_sites >= 4")
    n = n_sites
    return EdgeOperatorSet(
        left_x=PauliString.from_sites(n, x=(1,)),
        left_y=PauliString.from_sites(n, y=(1,), x=(2,)),
        left_z=PauliString.from_sites(n, z=(1,), x=(2,)),
        right_x=PauliString.from_sites(n, x=(n,)),
        right_y=PauliString.from_sites(n, x=(n - 1,), y=(n,)),
        right_z=PauliString.from_sites(n, x=(n - 1,), z=(n,)),
    )


# ---------------------------------------------------------------------------
# symmetry / commutation validators

@dataclass(frozen=True)
class CommutatorEntry:
    operator: str
    anticommuting_terms: int
    norm_bound: float

    @property
    def is_zero(self) -> bool:
        return self.anticommuting_terms == 0 and self.norm_bound == 0.0


@dataclass(frozen=True)
class CommutationReport:
    entries: tuple[CommutatorEntry, ...]

    @property
    def all_zero(self) -> bool:
        return all(e.is_zero for e in self.entries)


def check_edge_commutation(h: WeightedPauliSum, ops: EdgeOperatorSet) -> CommutationReport:
    """Per-operator bound on ||[H, O]|| computed term by term on Pauli words.

    Commutators of Pauli words either vanish or equal twice the product, so
    the bound is the coefficient 1-norm of the merged anticommuting products;
    it is exactly zero iff every term commutes or the products cancel.
    """
    entries = []
    for name, op in ops.all_six().items():
        merged: dict[tuple[int, int], complex] = {}
        count = 0
        for coeff, p in h.terms:
            if coeff == 0.0 or p.commutes_with(op):
                continue
            count += 1
            prod = p @ op
            key = (prod.x_mask, prod.z_mask)
            merged[key] = merged.get(key, 0.0) + 2.0 * coeff * prod.phase
        bound = float(sum(abs(v) for v in merged.values()))
        entries.append(CommutatorEntry(name, count, bound))
    return CommutationReport(tuple(entries))


@dataclass(frozen=True)
class TimeReversalReport:
    """Outcome of the antiunitary-symmetry screen ``T = (prod_i Z_i) K``.

    A sum of real-coefficient Pauli words commutes with T when every term is
    real in the computational basis (even Y count) and commutes with the
    global Z product (even X weight).  Both are checked term by term; the
    combination is sufficient for [H, T] = 0.
    """

    real_violations: tuple[str, ...]
    z_parity_violations: tuple[str, ...]

    @property
    def is_real(self) -> bool:
        return not self.real_violations

    @property
    def commutes_with_z_product(self) -> bool:
        return not self.z_parity_violations

    @property
    def passes(self) -> bool:
        return self.is_real and self.commutes_with_z_product


def check_time_reversal(h: WeightedPauliSum) -> TimeReversalReport:
    real_bad = []
    parity_bad = []
    for _, p in h.terms:
        if p.y_count() % 2 != 0:
            real_bad.append(repr(p))
        if int(p.x_mask).bit_count() % 2 != 0:
            parity_bad.append(repr(p))
    return TimeReversalReport(tuple(real_bad), tuple(parity_bad))


# ---------------------------------------------------------------------------
# logical preparations

@dataclass(frozen=True)
class LogicalPrep:
    """A two-edge logical state plus a bulk product specification.

    ``edge_state`` holds four amplitudes in the logical basis
    (uu, dd, ud, du).  Product preparations across the two edges come from
    :meth:`from_qubits`; arbitrary (possibly edge-entangled) logical states
    can be given directly.
    """

    edge_state: np.ndarray
    bulk_spec: BulkSpec = "all-up"
    label: str = ""

    def __post_init__(self) -> None:
        amps = np.array(self.edge_state, dtype=np.complex128)
        if amps.shape != (4,):
            raise ValueError("edge_state must be a 4-vector")
        if abs(np.linalg.norm(amps) - 1.0) > 1e-9:
            raise ValueError("edge_state must be normalized")
        amps.setflags(write=False)
        object.__setattr__(self, "edge_state", amps)

    @classmethod
    def from_qubits(cls, left: np.ndarray, right: np.ndarray,
                    bulk_spec: BulkSpec = "all-up", label: str = "") -> "LogicalPrep":
        left = np.asarray(left, dtype=np.complex128)
        right = np.asarray(right, dtype=np.complex128)
        for q in (left, right):
            if q.shape != (2,):
                raise ValueError("qubit states must be 2-vectors")
            if abs(np.linalg.norm(q) - 1.0) > 1e-9:
                raise ValueError("qubit states must be normalized")
        tensor = np.kron(left, right)
        return cls(LOGICAL_PERM @ tensor, bulk_spec, label)

    def tensor_state(self) -> np.ndarray:
        """Amplitudes in standard tensor order (left qubit = MSB)."""
        return LOGICAL_PERM.T @ self.edge_state

    def logical_density(self) -> np.ndarray:
        """4x4 density matrix of the edge state in the logical basis."""
        return np.outer(self.edge_state, self.edge_state.conj())


def bulk_state(bulk_spec: BulkSpec, n_bulk: int) -> np.ndarray:
    """Product state of the n_bulk interior sites (sites 3..N-2)."""
    if isinstance(bulk_spec, str):
        if bulk_spec == "all-up":
            sites = [UP] * n_bulk
        elif bulk_spec == "all-plus":
            sites = [PLUS] * n_bulk
        else:
            raise ValueError(f"unknown bulk_spec {bulk_spec!r}")
    else:
        sites = [np.asarray(s, dtype=np.complex128) for s in bulk_spec]
        if len(sites) != n_bulk:
            raise ValueError(
                f"bulk_spec lists {len(sites)} site states, expected {n_bulk}")
        for s in sites:
            if s.shape != (2,):
                raise ValueError("bulk site states must be 2-vectors")
            if abs(np.linalg.norm(s) - 1.0) > 1e-9:
                raise ValueError("bulk site states must be normalized")
    amps = np.array([1.0], dtype=np.complex128)
    for s in sites:
        amps = np.kron(amps, s)
    return amps


def prepare_state(prep: LogicalPrep, n_sites: int) -> StateVector:
    """Embed a logical preparation into the full chain.

    Sites 1 and N carry the logical amplitudes, sites 2 and N-1 are fixed to
    |+> (the encoding section), and sites 3..N-2 follow prep.bulk_spec.
    """
    if n_sites < 5:
        raise ValueError("prepare_state needs n_sites >= 5")
    middle = np.kron(np.kron(PLUS, bulk_state(prep.bulk_spec, n_sites - 4)), PLUS)
    psi = prep.tensor_state().reshape(2, 1, 2)
    full = (psi * middle.reshape(1, -1, 1)).reshape(-1)
    return StateVector(n_sites, full)
