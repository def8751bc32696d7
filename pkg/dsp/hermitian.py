"""
Per-frequency Hermitian matrix estimation, diagonal flooring and stable solves
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

logger = logging.getLogger(__name__)

# Guard on sum_t |M(t,f)|^2 in masked_psd
DENOMINATOR_FLOOR = 1e-10


class SingularMatrixError(np.linalg.LinAlgError):
    """Hermitian factorization failed even after flooring"""


@dataclass(frozen=True)
class NarrowbandMatrixSet:
    """
    One complex M x M matrix per frequency bin, stored as (F, M, M)

    degenerate flags bins whose estimate fell back to the floored identity.
    """
    values: np.ndarray
    degenerate: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.ndim != 3 or values.shape[1] != values.shape[2]:
            raise ValueError(f"values must be (bins, dim, dim), got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("matrix set contains non-finite values")
        degenerate = self.degenerate
        if degenerate is None:
            degenerate = np.zeros(values.shape[0], dtype=bool)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'degenerate', np.asarray(degenerate, dtype=bool))

    @property
    def num_bins(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def scaled(self, factor: float) -> 'NarrowbandMatrixSet':
        return NarrowbandMatrixSet(self.values * factor, self.degenerate.copy())


def _hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))


def masked_covariance(observations: np.ndarray, mask: np.ndarray) -> NarrowbandMatrixSet:
    """
    Mask-weighted covariance of (stacked) observation vectors

    Phi(f) = sum_t |M(t,f)|^2 y(t,f) y(t,f)^H / sum_t |M(t,f)|^2

    Args:
        observations: (M, T, F) complex observation vectors
        mask: (T, F) complex mask

    Returns:
        NarrowbandMatrixSet of shape (F, M, M); bins with an all-zero mask are
        DENOMINATOR_FLOOR * I and flagged degenerate
    """
    observations = np.asarray(observations)
    mask = np.asarray(mask)
    if observations.ndim != 3:
        raise ValueError(f"observations must be (dim, frames, bins), got {observations.shape}")
    if mask.shape != observations.shape[1:]:
        raise ValueError(f"mask shape {mask.shape} does not match frames x bins {observations.shape[1:]}")

    weight = np.abs(mask) ** 2
    numerator = np.einsum('mtf,ntf->fmn', observations * weight, np.conj(observations))
    denominator = weight.sum(axis=0)

    degenerate = denominator < DENOMINATOR_FLOOR
    phi = _hermitize(numerator) / np.maximum(denominator, DENOMINATOR_FLOOR)[:, None, None]
    if np.any(degenerate):
        dim = observations.shape[0]
        phi[degenerate] = DENOMINATOR_FLOOR * np.eye(dim)
        logger.debug(f"masked covariance: {int(degenerate.sum())} bin(s) with all-zero mask")
    return NarrowbandMatrixSet(phi, degenerate)


def masked_psd(spec, mask) -> NarrowbandMatrixSet:
    """Mask-based spatial PSD matrix of a Spectrogram (ComplexMask or (T, F) array)"""
    values = getattr(mask, 'values', mask)
    if np.shape(values) != spec.values.shape[1:]:
        raise ValueError(
            f"mask dims {np.shape(values)} do not match spectrogram frames x bins {spec.values.shape[1:]}"
        )
    return masked_covariance(spec.values, values)


def power_weighted_covariance(observations: np.ndarray, lam: np.ndarray) -> NarrowbandMatrixSet:
    """Unnormalised sum_t y y^H / lambda(t,f); lam must already be floored"""
    observations = np.asarray(observations)
    lam = np.asarray(lam, dtype=np.float64)
    if lam.shape != observations.shape[1:]:
        raise ValueError(f"lambda shape {lam.shape} does not match frames x bins {observations.shape[1:]}")
    if np.any(lam <= 0):
        raise ValueError("lambda must be strictly positive")
    phi = np.einsum('mtf,ntf->fmn', observations / lam, np.conj(observations))
    return NarrowbandMatrixSet(_hermitize(phi))


def floor_matrix(m: np.ndarray, eps: float) -> np.ndarray:
    """
    Diagonal loading relative to the trace: m + eps * tr(m) * I

    Works on a single (M, M) matrix or a stack (..., M, M).
    """
    if eps < 0:
        raise ValueError(f"eps must be non-negative, got {eps}")
    m = np.asarray(m, dtype=np.complex128)
    if not np.all(np.isfinite(m)):
        raise ValueError("cannot floor a matrix with non-finite entries")
    if eps == 0:
        return m.copy()
    trace = np.trace(m, axis1=-2, axis2=-1).real
    eye = np.eye(m.shape[-1])
    return m + (eps * trace)[..., None, None] * eye


def _solve_small(m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    if m.shape[0] == 1:
        if m[0, 0] == 0:
            raise SingularMatrixError("1x1 matrix is zero")
        return rhs / m[0, 0]
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    det = a * d - b * c
    if det == 0 or not np.isfinite(det):
        raise SingularMatrixError("2x2 matrix is singular")
    inverse = np.array([[d, -b], [-c, a]]) / det
    return inverse @ rhs


def solve_hermitian(m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """
    Solve m X = rhs for Hermitian m

    Cholesky first; indefinite or semi-definite inputs fall back to the
    pivoted Bunch-Kaufman factorization. Explicit inverses only for M <= 2.

    Raises:
        SingularMatrixError: both factorizations fail
    """
    m = _hermitize(np.asarray(m, dtype=np.complex128))
    rhs = np.asarray(rhs, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    if rhs.shape[0] != m.shape[0]:
        raise ValueError(f"rhs has {rhs.shape[0]} rows, matrix has {m.shape[0]}")
    if not np.all(np.isfinite(m)):
        raise SingularMatrixError("matrix has non-finite entries")

    if m.shape[0] <= 2:
        return _solve_small(m, rhs)

    try:
        factor = scipy.linalg.cho_factor(m, lower=True, check_finite=False)
        solution = scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    except np.linalg.LinAlgError:
        try:
            solution = scipy.linalg.solve(m, rhs, assume_a='her', check_finite=False)
        except np.linalg.LinAlgError as e:
            raise SingularMatrixError(f"Hermitian factorization failed: {e}") from e

    if not np.all(np.isfinite(solution)):
        raise SingularMatrixError("solve produced non-finite values")
    return solution


def solve_hermitian_batch(mats: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Per-frequency solve for stacks (F, M, M) and (F, M, K)"""
    if mats.shape[0] != rhs.shape[0]:
        raise ValueError(f"{mats.shape[0]} matrices but {rhs.shape[0]} right-hand sides")
    return np.stack([solve_hermitian(mats[f], rhs[f]) for f in range(mats.shape[0])])
