"""Defining matrix of the surface, its eigen-data and the lattice basis.

The matrix ``M`` is a 3x3 integer matrix of determinant one whose
characteristic polynomial has a single real root ``alpha > 1`` and a pair
of non-real roots ``beta, conj(beta)``.  Everything downstream (mode
coefficients, spectral points) is derived from the objects built here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NotUnimodular, RootFindingFailure, SingularBasis, WrongEigenvaluePattern

ROOT_RESIDUAL = 1e-14

Entries = tuple[tuple[int, int, int], tuple[int, int, int], tuple[int, int, int]]


def _det3(m: Sequence[Sequence[int]]) -> int:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


@dataclass(frozen=True)
class InoueMatrix:
    entries: Entries
    det: int

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    def inverse_entries(self) -> Entries:
        """Exact integer inverse (the adjugate, since det = 1)."""
        m = self.entries
        cof = [[0] * 3 for _ in range(3)]
        for i in range(3):
            for j in range(3):
                rows = [r for r in range(3) if r != i]
                cols = [c for c in range(3) if c != j]
                minor = m[rows[0]][cols[0]] * m[rows[1]][cols[1]] - m[rows[0]][cols[1]] * m[rows[1]][cols[0]]
                cof[i][j] = (-1) ** (i + j) * minor
        return tuple(tuple(cof[j][i] for j in range(3)) for i in range(3))  # type: ignore[return-value]

    def flat(self) -> list[int]:
        return [x for row in self.entries for x in row]


def validate_matrix(entries: Sequence[Sequence[int]]) -> InoueMatrix:
    """Check unimodularity and the eigenvalue pattern with exact integer arithmetic.

    One real root and a non-real pair is equivalent to a negative cubic
    discriminant; given that, ``alpha > 1`` is equivalent to ``p(1) < 0``.
    """
    rows = [list(r) for r in entries]
    if len(rows) != 3 or any(len(r) != 3 for r in rows):
        raise ValueError("matrix must be 3x3")
    for r in rows:
        for x in r:
            if isinstance(x, bool) or int(x) != x:
                raise ValueError(f"matrix entries must be integers, got {x!r}")
    ints: Entries = tuple(tuple(int(x) for x in r) for r in rows)  # type: ignore[assignment]
    det = _det3(ints)
    if det != 1:
        raise NotUnimodular(f"det M = {det}, expected 1")
    c2, c1 = _trace_and_minors(ints)
    # p(x) = x^3 + b x^2 + c x + d with b = -c2, c = c1, d = -1
    b, c, d = -c2, c1, -1
    disc = 18 * b * c * d - 4 * b**3 * d + b**2 * c**2 - 4 * c**3 - 27 * d**2
    if disc >= 0:
        raise WrongEigenvaluePattern(
            f"characteristic polynomial x^3 - {c2}x^2 + {c1}x - 1 has three real roots (discriminant {disc})"
        )
    if _poly_int(c2, c1, 1) >= 0:
        raise WrongEigenvaluePattern("the real eigenvalue is not greater than 1")
    return InoueMatrix(entries=ints, det=det)


def cappell_shaneson(m: int) -> InoueMatrix:
    """The family A_m; valid exactly for -2 <= m <= 3."""
    return validate_matrix([[0, 1, 0], [0, 1, 1], [1, 0, m + 1]])


def parse_matrix(text: str) -> InoueMatrix:
    """Parse nine comma-separated integers (row-major) or a JSON array of arrays."""
    text = text.strip()
    if text.startswith("["):
        import json

        rows = json.loads(text)
        return validate_matrix(rows)
    values = [int(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]
    if len(values) != 9:
        raise ValueError(f"expected 9 integers, got {len(values)}")
    return validate_matrix([values[0:3], values[3:6], values[6:9]])


def _trace_and_minors(m: Entries) -> tuple[int, int]:
    c2 = m[0][0] + m[1][1] + m[2][2]
    c1 = (
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
        + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2] - m[1][2] * m[2][1]
    )
    return c2, c1


def _poly_int(c2: int, c1: int, x: int) -> int:
    return x**3 - c2 * x**2 + c1 * x - 1


def char_poly(M: InoueMatrix) -> tuple[int, int]:
    """Coefficients (c2, c1) of the monic cubic x^3 - c2 x^2 + c1 x - 1."""
    return _trace_and_minors(M.entries)


def poly_eval(c2: int, c1: int, x):
    return ((x - c2) * x + c1) * x - 1


@dataclass(frozen=True, eq=False)
class EigenData:
    matrix: InoueMatrix
    alpha: float
    beta: complex
    a: np.ndarray
    b: np.ndarray
    log_alpha: float
    residual_alpha: float = 0.0
    residual_beta: float = 0.0

    def summary(self) -> dict:
        return {
            "matrix": [list(r) for r in self.matrix.entries],
            "alpha": self.alpha,
            "beta": {"re": self.beta.real, "im": self.beta.imag},
            "log_alpha": self.log_alpha,
        }


def _real_root(c2: int, c1: int) -> float:
    lo, hi = 1.0, 2.0 + abs(c2) + abs(c1)
    if not (poly_eval(c2, c1, lo) < 0 < poly_eval(c2, c1, hi)):
        raise RootFindingFailure("no sign change on the bracketing interval")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if poly_eval(c2, c1, mid) < 0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    best, best_res = x, abs(poly_eval(c2, c1, x))
    for _ in range(20):
        dp = (3 * x - 2 * c2) * x + c1
        x = x - poly_eval(c2, c1, x) / dp
        res = abs(poly_eval(c2, c1, x))
        if res < best_res:
            best, best_res = x, res
        if res == 0.0:
            break
    return best


def _null_vector(M: np.ndarray, lam: complex) -> np.ndarray:
    """Kernel of M - lam I: the cross product of two rows carries the 2x2
    minors; the largest minor fixes the pivot and that coordinate is set to 1."""
    R = M.astype(complex) - lam * np.eye(3)
    best = None
    best_mag = -1.0
    for i, j in ((0, 1), (0, 2), (1, 2)):
        cr = np.cross(R[i], R[j])
        k = int(np.argmax(np.abs(cr)))
        if abs(cr[k]) > best_mag:
            best_mag = abs(cr[k])
            best = cr / cr[k]
    if best_mag <= 0.0:
        raise RootFindingFailure("eigenvalue has a kernel of dimension > 1")
    return best


def eigen_data(M: InoueMatrix) -> EigenData:
    c2, c1 = char_poly(M)
    alpha = _real_root(c2, c1)
    scale = alpha**3 + abs(c2) * alpha**2 + abs(c1) * alpha + 1.0
    res_a = abs(poly_eval(c2, c1, alpha))
    if res_a > ROOT_RESIDUAL * scale:
        raise RootFindingFailure(f"residual {res_a:.3e} at alpha = {alpha!r}")
    re = 0.5 * (c2 - alpha)
    im2 = 1.0 / alpha - re * re
    if im2 <= 0.0:
        raise RootFindingFailure("deflated quadratic has real roots")
    beta = complex(re, math.sqrt(im2))
    res_b = abs(poly_eval(c2, c1, beta))
    arr = M.as_array().astype(float)
    a = _null_vector(arr, alpha).real.copy()
    b = _null_vector(arr, beta)
    return EigenData(
        matrix=M, alpha=alpha, beta=beta, a=a, b=b, log_alpha=math.log(alpha),
        residual_alpha=res_a, residual_beta=res_b,
    )


@dataclass(frozen=True, eq=False)
class LatticeBasis:
    """Rows of ``Y`` are xi, eta, zeta; columns of ``Yinv`` are the dual basis."""

    eigen: EigenData
    Y: np.ndarray
    Yinv: np.ndarray
    A: np.ndarray
    b_scale: complex = 1.0
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "Y": self.Y.tolist(),
            "Yinv": self.Yinv.tolist(),
            "A": self.A.tolist(),
            "residuals": dict(self.diagnostics),
        }


def expansion_matrix(alpha: float, beta: complex) -> np.ndarray:
    return np.array(
        [[alpha, 0.0, 0.0], [0.0, beta.real, -beta.imag], [0.0, beta.imag, beta.real]]
    )


def lattice_basis(E: EigenData, b_scale: complex = 1.0) -> LatticeBasis:
    """Assemble Y from the eigenvectors and rescale ``a`` so that det Y = 1.

    ``b_scale`` multiplies the complex eigenvector first; the default keeps
    the pivot-one normalization from :func:`eigen_data`.
    """
    b = E.b * complex(b_scale)
    Y0 = np.column_stack([E.a, b.real, b.imag])
    d0 = float(np.linalg.det(Y0))
    if d0 == 0.0 or not math.isfinite(d0):
        raise SingularBasis("eigenvector basis is degenerate")
    Y = np.column_stack([E.a / d0, b.real, b.imag])
    Yinv = np.linalg.inv(Y)
    A = expansion_matrix(E.alpha, E.beta)
    Mf = E.matrix.as_array().astype(float)
    diagnostics = {
        "det_Y_minus_1": float(np.linalg.det(Y) - 1.0),
        "intertwining": float(np.max(np.abs(Mf @ Y - Y @ A.T))),
        "inverse": float(np.max(np.abs(Y @ Yinv - np.eye(3)))),
        "poly_alpha": E.residual_alpha,
        "poly_beta": E.residual_beta,
    }
    return LatticeBasis(eigen=E, Y=Y, Yinv=Yinv, A=A, b_scale=complex(b_scale), diagnostics=diagnostics)
