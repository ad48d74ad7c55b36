"""Matrix-free Pauli algebra and state-vector primitives for qubit chains.

Conventions (frozen; every file format and oracle in this package depends on
them):

- Sites are numbered 1..n.  A basis state is an n-bit integer with site 1 as
  the most significant bit; bit value 0 means spin up, so ``Z|up> = +|up>``.
- A Pauli word is stored as ``phase * X^x_mask * Z^z_mask`` where the masks
  share the bit layout of the basis index (site j lives at bit ``n - j``) and
  the phase is a fourth root of unity.
- ``Y = i * X * Z`` with the ``i`` absorbed into the stored phase, so a site
  with both mask bits set and a phase factor of ``i`` is a standard Y.

Everything here is immutable after construction; operations are pure
functions with no shared mutable state.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

#: The four allowed phases, as exact complex doubles.
PHASES = (1 + 0j, 1j, -1 + 0j, -1j)

# Single-qubit states used throughout (spin up = |0>).
UP = np.array([1.0, 0.0], dtype=np.complex128)
DOWN = np.array([0.0, 1.0], dtype=np.complex128)
PLUS = np.array([1.0, 1.0], dtype=np.complex128) / np.sqrt(2.0)
MINUS = np.array([1.0, -1.0], dtype=np.complex128) / np.sqrt(2.0)
PLUS_I = np.array([1.0, 1.0j], dtype=np.complex128) / np.sqrt(2.0)
MINUS_I = np.array([1.0, -1.0j], dtype=np.complex128) / np.sqrt(2.0)

_PAULI_2x2 = {
    (0, 0): np.eye(2, dtype=np.complex128),
    (1, 0): np.array([[0, 1], [1, 0]], dtype=np.complex128),      # X
    (0, 1): np.array([[1, 0], [0, -1]], dtype=np.complex128),     # Z
    (1, 1): np.array([[0, -1], [1, 0]], dtype=np.complex128),     # X @ Z
}


def _canonical_phase(phase: complex) -> complex:
    for p in PHASES:
        if abs(phase - p) < 1e-12:
            return p
    raise ValueError(f"phase must be a fourth root of unity, got {phase!r}")


@dataclass(frozen=True)
class PauliString:
    """An n-site Pauli word ``phase * X^x_mask * Z^z_mask``.

    Masks use the basis-index bit layout: site j is bit ``n_sites - j``, so
    site 1 is the most significant bit.  Use :meth:`from_sites` /
    :meth:`x_sites` etc. to stay in site-number land.
    """

    n_sites: int
    x_mask: int
    z_mask: int
    phase: complex = 1 + 0j

    def __post_init__(self) -> None:
        if self.n_sites < 1:
            raise ValueError("n_sites must be >= 1")
        if self.n_sites > 62:
            raise ValueError("bitmask representation supports at most 62 sites")
        limit = 1 << self.n_sites
        if not (0 <= self.x_mask < limit and 0 <= self.z_mask < limit):
            raise ValueError("masks must fit within n_sites bits")
        object.__setattr__(self, "phase", _canonical_phase(self.phase))

    # -- constructors -------------------------------------------------------

    @classmethod
    def identity(cls, n_sites: int) -> "PauliString":
        return cls(n_sites, 0, 0)

    @classmethod
    def from_sites(
        cls,
        n_sites: int,
        x: Iterable[int] = (),
        y: Iterable[int] = (),
        z: Iterable[int] = (),
        phase: complex = 1 + 0j,
    ) -> "PauliString":
        """Build from site lists; each Y site contributes a factor of ``i``."""
        x_mask = z_mask = 0
        for j in tuple(x):
            x_mask |= cls._site_bit(n_sites, j)
        for j in tuple(z):
            z_mask |= cls._site_bit(n_sites, j)
        if x_mask & z_mask:
            # X and Z lists overlapping is almost always a caller bug.
            overlap = [j for j in range(1, n_sites + 1)
                       if x_mask & z_mask & cls._site_bit(n_sites, j)]
            raise ValueError(f"sites {overlap} listed in both x and z; use y=")
        ph = _canonical_phase(phase)
        for j in tuple(y):
            bit = cls._site_bit(n_sites, j)
            if (x_mask | z_mask) & bit:
                raise ValueError(f"site {j} assigned more than one letter")
            x_mask |= bit
            z_mask |= bit
            ph *= 1j
        return cls(n_sites, x_mask, z_mask, ph)

    @classmethod
    def x(cls, n_sites: int, site: int) -> "PauliString":
        return cls.from_sites(n_sites, x=(site,))

    @classmethod
    def y(cls, n_sites: int, site: int) -> "PauliString":
        return cls.from_sites(n_sites, y=(site,))

    @classmethod
    def z(cls, n_sites: int, site: int) -> "PauliString":
        return cls.from_sites(n_sites, z=(site,))

    # -- site bookkeeping ---------------------------------------------------

    @staticmethod
    def _site_bit(n_sites: int, site: int) -> int:
        if not 1 <= site <= n_sites:
            raise ValueError(f"site {site} out of range 1..{n_sites}")
        return 1 << (n_sites - site)

    def acts_x_at(self, site: int) -> bool:
        return bool(self.x_mask & self._site_bit(self.n_sites, site))

    def acts_z_at(self, site: int) -> bool:
        return bool(self.z_mask & self._site_bit(self.n_sites, site))

    def x_sites(self) -> tuple[int, ...]:
        return tuple(j for j in range(1, self.n_sites + 1) if self.acts_x_at(j))

    def z_sites(self) -> tuple[int, ...]:
        return tuple(j for j in range(1, self.n_sites + 1) if self.acts_z_at(j))

    def y_count(self) -> int:
        """Number of sites carrying both an X and a Z factor."""
        return int(self.x_mask & self.z_mask).bit_count()

    @property
    def weight(self) -> int:
        return int(self.x_mask | self.z_mask).bit_count()

    # -- algebra ------------------------------------------------------------

    def is_hermitian(self) -> bool:
        # P† = conj(phase) * (-1)^{#Y} * X^x Z^z, so Hermiticity ties the
        # phase parity to the Y-count parity.
        real_phase = self.phase.imag == 0.0
        return real_phase == (self.y_count() % 2 == 0)

    def adjoint(self) -> "PauliString":
        sign = -1.0 if self.y_count() % 2 else 1.0
        return PauliString(self.n_sites, self.x_mask, self.z_mask,
                           np.conj(self.phase) * sign)

    def compose(self, other: "PauliString") -> "PauliString":
        """Operator product ``self @ other`` (self applied after other)."""
        if self.n_sites != other.n_sites:
            raise ValueError("site-count mismatch")
        # Moving other's X block through self's Z block costs one sign per
        # overlapping site.
        sign = -1.0 if int(self.z_mask & other.x_mask).bit_count() % 2 else 1.0
        return PauliString(
            self.n_sites,
            self.x_mask ^ other.x_mask,
            self.z_mask ^ other.z_mask,
            self.phase * other.phase * sign,
        )

    def __matmul__(self, other: "PauliString") -> "PauliString":
        return self.compose(other)

    def commutes_with(self, other: "PauliString") -> bool:
        if self.n_sites != other.n_sites:
            raise ValueError("site-count mismatch")
        s = int(self.x_mask & other.z_mask).bit_count() \
            + int(self.z_mask & other.x_mask).bit_count()
        return s % 2 == 0

    def to_dense(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix (site 1 is the leftmost kron factor)."""
        out = np.array([[self.phase]], dtype=np.complex128)
        for site in range(1, self.n_sites + 1):
            bit = self._site_bit(self.n_sites, site)
            key = (1 if self.x_mask & bit else 0, 1 if self.z_mask & bit else 0)
            out = np.kron(out, _PAULI_2x2[key])
        return out

    def __repr__(self) -> str:
        letters = []
        for j in range(1, self.n_sites + 1):
            xb, zb = self.acts_x_at(j), self.acts_z_at(j)
            if xb and zb:
                letters.append(f"Y{j}")
            elif xb:
                letters.append(f"X{j}")
            elif zb:
                letters.append(f"Z{j}")
        residual = self.phase * (-1j) ** self.y_count()
        prefix = {1 + 0j: "+", 1j: "+i", -1 + 0j: "-", -1j: "-i"}[
            _canonical_phase(residual)]
        body = " ".join(letters) if letters else "I"
        return f"{prefix}{body}"


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over the computational basis of an n-site chain."""

    n_sites: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2 ** self.n_sites,):
            raise ValueError(
                f"expected {2 ** self.n_sites} amplitudes, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def computational(cls, n_sites: int, bits: int) -> "StateVector":
        amps = np.zeros(2 ** n_sites, dtype=np.complex128)
        amps[bits] = 1.0
        return cls(n_sites, amps)

    @classmethod
    def product(cls, site_states: Sequence[np.ndarray]) -> "StateVector":
        """Product state from per-site 2-vectors, site 1 first."""
        amps = np.array([1.0], dtype=np.complex128)
        for s in site_states:
            s = np.asarray(s, dtype=np.complex128)
            if s.shape != (2,):
                raise ValueError("each site state must be a 2-vector")
            amps = np.kron(amps, s)
        return cls(len(site_states), amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def require_normalized(self, tol: float = 1e-8) -> None:
        nrm = self.norm()
        if abs(nrm - 1.0) > tol:
            raise ValueError(f"state norm {nrm} deviates from 1 by more than {tol}")


# ---------------------------------------------------------------------------
# vectorized applications

_INDEX_CACHE: dict[int, np.ndarray] = {}


def _indices(dim: int) -> np.ndarray:
    idx = _INDEX_CACHE.get(dim)
    if idx is None:
        idx = np.arange(dim, dtype=np.int64)
        idx.setflags(write=False)
        _INDEX_CACHE[dim] = idx
    return idx


def _pauli_arrays(p: PauliString, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """(source indices, per-output weights) so that out = w * amps[src]."""
    idx = _indices(dim)
    src = idx ^ p.x_mask
    # Z acts before X, so the sign is evaluated at the source index.
    signs = 1.0 - 2.0 * (np.bitwise_count(src & p.z_mask) & 1)
    if p.phase.imag == 0.0:
        weights = p.phase.real * signs
    else:
        weights = p.phase * signs.astype(np.complex128)
    return src, weights


def apply_pauli(p: PauliString, v: StateVector) -> StateVector:
    """Return ``P|v>`` without materializing any matrix."""
    if p.n_sites != v.n_sites:
        raise ValueError("site-count mismatch between operator and state")
    src, weights = _pauli_arrays(p, v.amplitudes.size)
    return StateVector(v.n_sites, weights * v.amplitudes.take(src))


def _apply_pauli_amps(p: PauliString, amps: np.ndarray) -> np.ndarray:
    src, weights = _pauli_arrays(p, amps.size)
    return weights * amps.take(src)


@dataclass(frozen=True)
class WeightedPauliSum:
    """Hermitian operator ``sum_k c_k P_k`` with real coefficients.

    Construction canonicalizes every term (sign folded into the coefficient,
    phase reduced to +1 or +i) and merges terms acting with identical masks.
    """

    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self) -> None:
        merged: dict[tuple[int, int], float] = {}
        canon: dict[tuple[int, int], PauliString] = {}
        n_sites = None
        for coeff, p in self.terms:
            if n_sites is None:
                n_sites = p.n_sites
            elif p.n_sites != n_sites:
                raise ValueError("all terms must share n_sites")
            if not p.is_hermitian():
                raise ValueError(f"non-Hermitian term {p!r}")
            coeff = float(coeff)
            if not np.isfinite(coeff):
                raise ValueError("coefficients must be finite reals")
            canonical_phase = 1j if p.y_count() % 2 else 1 + 0j
            sign = (p.phase / canonical_phase).real
            key = (p.x_mask, p.z_mask)
            merged[key] = merged.get(key, 0.0) + sign * coeff
            canon.setdefault(
                key, PauliString(p.n_sites, p.x_mask, p.z_mask, canonical_phase))
        object.__setattr__(
            self, "terms",
            tuple((merged[key], canon[key]) for key in merged))

    @property
    def n_sites(self) -> int:
        if not self.terms:
            raise ValueError("empty sum has no site count")
        return self.terms[0][1].n_sites

    def __len__(self) -> int:
        return len(self.terms)

    def to_dense(self) -> np.ndarray:
        dim = 2 ** self.n_sites
        out = np.zeros((dim, dim), dtype=np.complex128)
        for coeff, p in self.terms:
            out += coeff * p.to_dense()
        return out

    def compile(self) -> "CompiledSum":
        return CompiledSum(self)


class CompiledSum:
    """Precomputed gather/weight arrays for fast repeated ``H @ v``.

    Diagonal terms (no X factor) are folded into a single diagonal vector;
    each off-diagonal term keeps its source-index permutation and a signed
    weight vector.  Instances hold only read-only precomputed arrays, so a
    single instance is safe to share across threads.
    """

    def __init__(self, h: WeightedPauliSum):
        self.n_sites = h.n_sites
        dim = 2 ** self.n_sites
        self.dim = dim
        idx = _indices(dim)
        diag = np.zeros(dim, dtype=np.float64)
        offdiag: list[tuple[np.ndarray, np.ndarray]] = []
        complex_weights = False
        for coeff, p in h.terms:
            if p.x_mask == 0:
                signs = 1.0 - 2.0 * (np.bitwise_count(idx & p.z_mask) & 1)
                diag += coeff * p.phase.real * signs
            else:
                src, weights = _pauli_arrays(p, dim)
                weights = coeff * weights
                complex_weights |= np.iscomplexobj(weights)
                offdiag.append((src, weights))
        self._diag = diag
        self._offdiag = tuple(offdiag)
        self._complex = complex_weights
        self._fast = None

    def matvec(self, amps: np.ndarray) -> np.ndarray:
        out = self._diag * amps
        for src, weights in self._offdiag:
            gathered = amps.take(src)
            gathered *= weights
            out += gathered
        return out

    def fast_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray] | None:
        """Stacked (diag, sources, weights) for compiled kernels.

        Only available when every term weight is real (no odd-Y words);
        returns None otherwise, in which case callers fall back to
        :meth:`matvec`.
        """
        if self._complex:
            return None
        if self._fast is None:
            if self._offdiag:
                srcs = np.stack([src for src, _ in self._offdiag])
                weights = np.stack([w for _, w in self._offdiag])
            else:
                srcs = np.empty((0, self.dim), dtype=np.int64)
                weights = np.empty((0, self.dim))
            for arr in (srcs, weights):
                arr.setflags(write=False)
            self._fast = (self._diag, srcs, weights)
        return self._fast


def apply_sum(h: WeightedPauliSum, v: StateVector) -> np.ndarray:
    """Return the (generally unnormalized) amplitudes of ``H|v>``."""
    if h.n_sites != v.n_sites:
        raise ValueError("site-count mismatch between operator and state")
    return h.compile().matvec(v.amplitudes)


def expectation(p: PauliString, v: StateVector, imag_tol: float = 1e-9) -> float:
    """``<v|P|v>`` for a Hermitian Pauli word and a normalized state."""
    if p.n_sites != v.n_sites:
        raise ValueError("site-count mismatch between operator and state")
    if not p.is_hermitian():
        raise ValueError(f"expectation requires a Hermitian word, got {p!r}")
    value = np.vdot(v.amplitudes, _apply_pauli_amps(p, v.amplitudes))
    if abs(value.imag) > imag_tol:
        raise ValueError(f"imaginary residue {value.imag:.3e} exceeds {imag_tol}")
    if value.imag != 0.0:
        logger.debug("expectation imaginary residue %.3e", value.imag)
    return float(value.real)


def inner(u: StateVector, v: StateVector) -> complex:
    """``<u|v>``."""
    if u.n_sites != v.n_sites:
        raise ValueError("site-count mismatch between states")
    return complex(np.vdot(u.amplitudes, v.amplitudes))
