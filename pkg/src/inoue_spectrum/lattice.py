"""Action of the monodromy on Fourier modes and the per-mode coefficients P, Q."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .algebra import InoueMatrix, LatticeBasis, eigen_data, lattice_basis
from .errors import IntegerOverflow

INT64_MAX = 2**63 - 1
TWO_PI = 2.0 * math.pi


class Mode(NamedTuple):
    k: int
    l: int
    m: int

    def is_zero(self) -> bool:
        return self.k == 0 and self.l == 0 and self.m == 0


@dataclass(frozen=True)
class ModeCoeff:
    mode: Mode
    P: float
    Q: complex


@dataclass(frozen=True)
class OrbitSegment:
    seed: Mode
    n_lo: int
    n_hi: int
    modes: tuple[Mode, ...]

    def items(self):
        return zip(range(self.n_lo, self.n_hi + 1), self.modes)


def _matvec(entries, v: Sequence[int]) -> Mode:
    out = []
    for row in entries:
        x = row[0] * v[0] + row[1] * v[1] + row[2] * v[2]
        if abs(x) > INT64_MAX:
            raise IntegerOverflow(f"mode coordinate {x} exceeds the 64-bit range")
        out.append(x)
    return Mode(*out)


def apply_monodromy(M: InoueMatrix, mode: Sequence[int]) -> Mode:
    return _matvec(M.entries, mode)


def apply_inverse(M: InoueMatrix, mode: Sequence[int]) -> Mode:
    return _matvec(M.inverse_entries(), mode)


def mode_coefficients(B: LatticeBasis, mode: Sequence[int]) -> ModeCoeff:
    """(P, Re Q, Im Q) = 2 pi Yinv (k, l, m)."""
    mode = Mode(*(int(x) for x in mode))
    x = TWO_PI * (B.Yinv @ np.array(mode, dtype=float))
    return ModeCoeff(mode=mode, P=float(x[0]), Q=complex(x[1], x[2]))


def coefficient_arrays(B: LatticeBasis, modes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized P and Q for an (n, 3) integer array of modes."""
    x = TWO_PI * (np.asarray(modes, dtype=float) @ B.Yinv.T)
    return x[:, 0], x[:, 1] + 1j * x[:, 2]


def orbit_segment(M: InoueMatrix, seed: Sequence[int], n_lo: int, n_hi: int) -> OrbitSegment:
    if n_lo > n_hi:
        raise ValueError("n_lo must not exceed n_hi")
    seed = Mode(*(int(x) for x in seed))
    inv = M.inverse_entries()
    start = seed
    if n_lo > 0:
        for _ in range(n_lo):
            start = _matvec(M.entries, start)
    else:
        for _ in range(-n_lo):
            start = _matvec(inv, start)
    modes = [start]
    for _ in range(n_hi - n_lo):
        modes.append(_matvec(M.entries, modes[-1]))
    return OrbitSegment(seed=seed, n_lo=n_lo, n_hi=n_hi, modes=tuple(modes))


def box_modes(bound: int) -> list[Mode]:
    """Nonzero modes with sup-norm <= bound, in lexicographic order."""
    r = range(-bound, bound + 1)
    return [Mode(*v) for v in itertools.product(r, r, r) if any(v)]


def _in_box(v: Sequence[int], bound: int) -> bool:
    return abs(v[0]) <= bound and abs(v[1]) <= bound and abs(v[2]) <= bound


def orbit_in_box(M: InoueMatrix, seed: Sequence[int], bound: int, B: LatticeBasis | None = None) -> list[tuple[int, Mode]]:
    """All (n, M^n seed) lying in the box.

    Iteration stops once |P_n| (forward) or |Q_n| (backward) exceeds the
    largest value attainable inside the box: both grow monotonically along
    the orbit, so the orbit cannot re-enter.
    """
    seed = Mode(*seed)
    if seed.is_zero():
        return [(0, seed)]
    if B is None:
        B = lattice_basis(eigen_data(M))
    p_max = TWO_PI * bound * float(np.sum(np.abs(B.Yinv[0]))) * (1 + 1e-9)
    q_max = TWO_PI * bound * float(np.hypot(np.sum(np.abs(B.Yinv[1])), np.sum(np.abs(B.Yinv[2])))) * (1 + 1e-9)
    found = []
    inv = M.inverse_entries()
    for step, direction in ((M.entries, 1), (inv, -1)):
        v, n = seed, 0
        while True:
            if _in_box(v, bound) and (direction == 1 or n != 0):
                found.append((n, v))
            c = mode_coefficients(B, v)
            if direction == 1 and abs(c.P) > p_max:
                break
            if direction == -1 and abs(c.Q) > q_max:
                break
            v = _matvec(step, v)
            n += direction
    found.sort()
    return found


def orbit_representatives(M: InoueMatrix, bound: int, B: LatticeBasis | None = None) -> list[Mode]:
    """One seed per orbit meeting the box: the lexicographically smallest member."""
    if bound < 1:
        raise ValueError("bound must be >= 1")
    if B is None:
        B = lattice_basis(eigen_data(M))
    seen: set[Mode] = set()
    reps = []
    for mode in box_modes(bound):
        if mode in seen:
            continue
        members = [v for _, v in orbit_in_box(M, mode, bound, B)]
        seen.update(members)
        reps.append(min(members))
    return reps
