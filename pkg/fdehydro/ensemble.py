"""Canonical ensembles of the zero-range process on an open box {1..ell}.

States of a box are ordered with the first coordinate descending, then the
second, and so on; for ell=2, k=1 that is (1, 0), (0, 1).
"""

import logging
import math
from collections.abc import Iterator
from fractions import Fraction

import numpy as np
import pandas as pd
import scipy.linalg
from typeguard import typechecked

from .const import (
    ENUMERATION_CAP,
    EIGENVALUE_ZERO_TOL,
    GENERATOR_CAP,
    RATIONAL_CAP,
)
from .exceptions import DegenerateBoxError, DomainError, TooLargeError

LOG = logging.getLogger(__name__)


def box_size(ell: int, k: int) -> int:
    """Return |Sigma_{k,ell}| = C(k+ell-1, ell-1)."""
    return math.comb(k + ell - 1, ell - 1)


def _compositions(ell: int, k: int) -> Iterator[tuple[int, ...]]:
    if ell == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in _compositions(ell - 1, k - first):
            yield (first, *rest)


class CanonicalBox:
    """Enumerated configurations of k particles on ell sites."""

    __slots__ = ("_ell", "_k", "_states", "_index")

    @typechecked
    def __init__(self, ell: int, k: int, cap: int = ENUMERATION_CAP) -> None:
        """Enumerate the box.

        Raises:
            DomainError: if ell < 1 or k < 0
            TooLargeError: if the box has more than cap states
        """
        if ell < 1:
            raise DomainError(f"box size ({ell}) must be at least 1")
        if k < 0:
            raise DomainError(f"particle number ({k}) must be >= 0")
        size = box_size(ell, k)
        if size > cap:
            raise TooLargeError(size, cap)
        self._ell = ell
        self._k = k
        states = np.array(list(_compositions(ell, k)), dtype=np.int64)
        states.flags.writeable = False
        self._states = states
        self._index = {tuple(int(v) for v in row): i for i, row in enumerate(states)}

    @property
    def ell(self) -> int:
        """Return the number of sites."""
        return self._ell

    @property
    def k(self) -> int:
        """Return the particle number."""
        return self._k

    @property
    def states(self) -> np.ndarray:
        """Return the states, one per row."""
        return self._states

    @property
    def size(self) -> int:
        """Return the number of states."""
        return int(self._states.shape[0])

    def index(self, state: tuple[int, ...]) -> int:
        """Return the ordinal of a state."""
        return self._index[state]

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return f"CanonicalBox(ell={self._ell}, k={self._k}, size={self.size})"


@typechecked
def enumerate_canonical(ell: int, k: int, cap: int = ENUMERATION_CAP) -> CanonicalBox:
    """Return the box Sigma_{k,ell}.

    Raises:
        TooLargeError: if C(k+ell-1, ell-1) exceeds cap
    """
    return CanonicalBox(ell, k, cap)


@typechecked
def canonical_expectation_closed_form(ell: int, k: int) -> Fraction:
    """Return k / (ell - 1 + k), the canonical mean of g(eta(1))."""
    if ell < 1 or k < 0:
        raise DomainError(f"invalid box ell={ell}, k={k}")
    if k == 0:
        return Fraction(0)
    return Fraction(k, ell - 1 + k)


@typechecked
def canonical_expectation_g(
    ell: int, k: int, cap: int = ENUMERATION_CAP
) -> Fraction | float:
    """Return E[g(eta(1))] under the uniform law on Sigma_{k,ell} by enumeration.

    The result is an exact Fraction when the box has at most RATIONAL_CAP
    states, a float otherwise.

    Raises:
        TooLargeError: if the box exceeds cap
    """
    box = CanonicalBox(ell, k, cap)
    occupied = int(np.count_nonzero(box.states[:, 0]))
    if box.size <= RATIONAL_CAP:
        return Fraction(occupied, box.size)
    return occupied / box.size


@typechecked
def build_generator(box: CanonicalBox, cap: int = GENERATOR_CAP) -> np.ndarray:
    """Return the dense generator of the boxed dynamics.

    Entry (i, j) is the rate from state i to state j: a particle leaves an
    occupied site x for a neighbor x +/- 1 inside the box at rate 1.

    Raises:
        TooLargeError: if the box has more than cap states
    """
    if box.size > cap:
        raise TooLargeError(box.size, cap)
    matrix = np.zeros((box.size, box.size), dtype=np.float64)
    for i, row in enumerate(box.states):
        state = [int(v) for v in row]
        for x in range(box.ell):
            if state[x] == 0:
                continue
            for y in (x - 1, x + 1):
                if not 0 <= y < box.ell:
                    continue
                state[x] -= 1
                state[y] += 1
                matrix[i, box.index(tuple(state))] += 1.0
                state[x] += 1
                state[y] -= 1
    matrix[np.diag_indices(box.size)] = -matrix.sum(axis=1)
    return matrix


def _spectrum(box: CanonicalBox) -> np.ndarray:
    return scipy.linalg.eigh(-build_generator(box), eigvals_only=True)


@typechecked
def spectral_gap(box: CanonicalBox) -> float:
    """Return the smallest positive eigenvalue of -L.

    Raises:
        DegenerateBoxError: if the box has fewer than two states
        TooLargeError: if the generator is too large to build
    """
    if box.size < 2:
        raise DegenerateBoxError(box.ell, box.k)
    eigenvalues = _spectrum(box)
    positive = eigenvalues[eigenvalues > EIGENVALUE_ZERO_TOL]
    return float(positive.min())


@typechecked
def kernel_dimension(box: CanonicalBox) -> int:
    """Return the number of zero eigenvalues of L, 1 for an irreducible box."""
    eigenvalues = _spectrum(box)
    return int(np.count_nonzero(np.abs(eigenvalues) <= EIGENVALUE_ZERO_TOL))


@typechecked
def gap_table(max_sum: int, cap: int = GENERATOR_CAP) -> pd.DataFrame:
    """Return gaps of every box with ell >= 2, k >= 1 and ell + k <= max_sum.

    Columns: ell, k, size, gap, scaled_gap = gap (ell+k)^2.

    Raises:
        TooLargeError: if any box in the table has more than cap states
    """
    rows = []
    for total in range(3, max_sum + 1):
        for ell in range(2, total):
            k = total - ell
            size = box_size(ell, k)
            if size > cap:
                LOG.warning("box ell=%d k=%d exceeds the cap of %d states", ell, k, cap)
                raise TooLargeError(size, cap)
            gap = spectral_gap(CanonicalBox(ell, k))
            rows.append(
                {
                    "ell": ell,
                    "k": k,
                    "size": size,
                    "gap": gap,
                    "scaled_gap": gap * total**2,
                }
            )
    return pd.DataFrame(rows, columns=["ell", "k", "size", "gap", "scaled_gap"])


@typechecked
def kappa0_estimate(max_sum: int, cap: int = GENERATOR_CAP) -> float:
    """Return max over the gap table of 1 / (gap (ell+k)^2).

    Raises:
        DomainError: if max_sum < 3
        TooLargeError: if a box in the table exceeds cap
    """
    if max_sum < 3:
        raise DomainError(f"max_sum ({max_sum}) must be at least 3")
    table = gap_table(max_sum, cap)
    return float((1.0 / table["scaled_gap"]).max())
