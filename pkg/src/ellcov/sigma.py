"""Rank-K sigma basis of sl(K): sigma_AB = H^A F^B and its trace-dual.

For K = 2 the basis reproduces the Pauli dictionary

    sigma_10 = s1,   sigma_11 = i s2,   sigma_01 = s3

with ``s2 = [[0, i], [-i, 0]]``.  That sign for s2 is the one for which
H F = i s2 and the commutators of the K = 2 component equations come out as
written; note it is minus the textbook Pauli Y.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Mapping

import numpy as np

from .errors import InvalidIndex, NotTraceless

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, 1j], [-1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class SigmaIndex:
    """Index pair (A, B), reduced mod K at construction; (0, 0) is rejected."""

    A: int
    B: int
    K: int

    def __init__(self, A: int, B: int, K: int):
        a, b = A % K, B % K
        if a == 0 and b == 0:
            raise InvalidIndex(f"sigma index ({A}, {B}) is (0, 0) mod {K}")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "B", b)
        object.__setattr__(self, "K", K)

    def __neg__(self) -> "SigmaIndex":
        return SigmaIndex(-self.A, -self.B, self.K)

    def __iter__(self):
        yield self.A
        yield self.B


class SigmaAlgebra:
    """Clock/shift basis of sl(K) with its dual under the trace pairing."""

    def __init__(self, K: int):
        if K < 2:
            raise ValueError("K must be at least 2")
        self.K = K
        self.epsilon = cmath.exp(2j * math.pi / K)
        self.F = np.diag([self.epsilon ** j for j in range(K)])
        self.H = np.roll(np.eye(K, dtype=complex), 1, axis=1)
        self.indices: tuple[tuple[int, int], ...] = tuple(
            (A, B) for A in range(K) for B in range(K) if (A, B) != (0, 0))
        self._sigma = np.array([self._power(A, B) for A, B in self.indices])
        self._dual = np.array([self.eps_pow(-A * B) / K * self._power(-A, -B)
                               for A, B in self.indices])
        self._pos = {idx: n for n, idx in enumerate(self.indices)}
        self._neg = np.array([self._pos[(-A % K, -B % K)] for A, B in self.indices])

    def __repr__(self):
        return f"SigmaAlgebra(K={self.K})"

    def __eq__(self, other):
        return isinstance(other, SigmaAlgebra) and other.K == self.K

    def __hash__(self):
        return hash(("SigmaAlgebra", self.K))

    def eps_pow(self, n: int) -> complex:
        """epsilon**n with the exponent reduced mod K (exact for n = 0)."""
        n %= self.K
        return 1.0 + 0j if n == 0 else self.epsilon ** n

    def _power(self, A: int, B: int) -> np.ndarray:
        K = self.K
        return (np.linalg.matrix_power(self.H, A % K)
                @ np.linalg.matrix_power(self.F, B % K))

    def _index(self, idx) -> tuple[int, int]:
        if isinstance(idx, SigmaIndex):
            if idx.K != self.K:
                raise InvalidIndex(f"index built for K={idx.K}, algebra has K={self.K}")
            return idx.A, idx.B
        A, B = idx
        return SigmaIndex(A, B, self.K).A, SigmaIndex(A, B, self.K).B

    def position(self, idx) -> int:
        return self._pos[self._index(idx)]

    @property
    def sigma_stack(self) -> np.ndarray:
        """All basis matrices, shape (K^2 - 1, K, K), ordered as ``indices``."""
        return self._sigma

    @property
    def dual_stack(self) -> np.ndarray:
        return self._dual

    @property
    def negation(self) -> np.ndarray:
        """Permutation taking the position of (A, B) to that of (-A, -B)."""
        return self._neg

    def sigma(self, idx) -> np.ndarray:
        return self._sigma[self.position(idx)].copy()

    def sigma_dual(self, idx) -> np.ndarray:
        """(epsilon^{-AB} / K) sigma_{-A,-B}, so that tr(sigma_AB sigma^CD) = delta."""
        return self._dual[self.position(idx)].copy()

    def expand(self, M: np.ndarray, rtol: float = 1e-10) -> "SlkCoefficients":
        M = np.asarray(M, dtype=complex)
        if M.shape != (self.K, self.K):
            raise ValueError(f"expected a {self.K}x{self.K} matrix, got {M.shape}")
        # the largest entry sets the scale; a 2-norm would underflow for tiny matrices
        scale = self.K * float(np.max(np.abs(M)))
        if abs(np.trace(M)) > rtol * scale:
            raise NotTraceless(f"trace {np.trace(M)} exceeds {rtol} * K max|M_ij| = {rtol * scale}")
        coeffs = np.einsum("nij,ji->n", self._dual, M)
        return SlkCoefficients(self.K, coeffs)

    def reconstruct(self, c) -> np.ndarray:
        values = _values(c, self)
        return np.einsum("n,nij->ij", values, self._sigma)

    def coefficients(self, table: Mapping[tuple[int, int], complex]) -> "SlkCoefficients":
        """Build coefficients from a sparse ``{(A, B): value}`` mapping."""
        values = np.zeros(len(self.indices), dtype=complex)
        for idx, v in table.items():
            values[self.position(idx)] = v
        return SlkCoefficients(self.K, values)

    def zeros(self) -> "SlkCoefficients":
        return SlkCoefficients(self.K, np.zeros(len(self.indices), dtype=complex))


@lru_cache(maxsize=None)
def sigma_algebra(K: int) -> SigmaAlgebra:
    """Shared immutable algebra instance for rank ``K``."""
    return SigmaAlgebra(K)


@dataclass(frozen=True)
class SlkCoefficients:
    """Coefficients c_AB of an sl(K) matrix sum c_AB sigma_AB.

    ``values`` is ordered like ``SigmaAlgebra.indices``.
    """

    K: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=complex).reshape(-1)
        if v.shape != (self.K * self.K - 1,):
            raise ValueError(f"need {self.K * self.K - 1} coefficients, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __getitem__(self, idx) -> complex:
        return complex(self.values[sigma_algebra(self.K).position(idx)])

    def items(self) -> Iterator[tuple[tuple[int, int], complex]]:
        for idx, v in zip(sigma_algebra(self.K).indices, self.values):
            yield idx, complex(v)

    def as_dict(self) -> dict[tuple[int, int], complex]:
        return dict(self.items())

    def matrix(self) -> np.ndarray:
        return sigma_algebra(self.K).reconstruct(self)

    def __add__(self, other):
        return SlkCoefficients(self.K, self.values + _values(other, sigma_algebra(self.K)))

    def __sub__(self, other):
        return SlkCoefficients(self.K, self.values - _values(other, sigma_algebra(self.K)))

    def __mul__(self, c):
        return SlkCoefficients(self.K, self.values * complex(c))

    __rmul__ = __mul__

    def __neg__(self):
        return SlkCoefficients(self.K, -self.values)

    def __eq__(self, other):
        return (isinstance(other, SlkCoefficients) and other.K == self.K
                and np.array_equal(other.values, self.values))

    def __hash__(self):
        return hash((self.K, self.values.tobytes()))


def _values(c, alg: SigmaAlgebra) -> np.ndarray:
    if isinstance(c, SlkCoefficients):
        if c.K != alg.K:
            raise ValueError(f"coefficients for K={c.K} used with K={alg.K}")
        return c.values
    if isinstance(c, Mapping):
        return alg.coefficients(c).values
    v = np.asarray(c, dtype=complex)
    if v.shape != (len(alg.indices),):
        raise ValueError(f"need {len(alg.indices)} coefficients, got shape {v.shape}")
    return v


def sigma(alg: SigmaAlgebra, idx) -> np.ndarray:
    return alg.sigma(idx)


def sigma_dual(alg: SigmaAlgebra, idx) -> np.ndarray:
    return alg.sigma_dual(idx)


def expand(alg: SigmaAlgebra, M) -> SlkCoefficients:
    """Coefficients c_AB = tr(sigma^AB M) of a traceless matrix."""
    return alg.expand(M)


def reconstruct(alg: SigmaAlgebra, c) -> np.ndarray:
    """Inverse of :func:`expand`: sum_AB c_AB sigma_AB."""
    return alg.reconstruct(c)


def pauli_to_coefficients(J1, J2, J3) -> SlkCoefficients:
    """K = 2 coefficients of J1 s1 + J2 s2 + J3 s3: (J^10, J^11, J^01) = (J1, -i J2, J3)."""
    return sigma_algebra(2).coefficients({(1, 0): J1, (1, 1): -1j * J2, (0, 1): J3})


def coefficients_to_pauli(c: SlkCoefficients) -> tuple[complex, complex, complex]:
    """Inverse of :func:`pauli_to_coefficients`: J2 = i J^11."""
    if c.K != 2:
        raise ValueError("Pauli components exist only for K = 2")
    return c[(1, 0)], 1j * c[(1, 1)], c[(0, 1)]
