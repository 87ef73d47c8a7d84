"""Dense matrix kernels shared by the whole package.

Matrices are plain numpy arrays in float64 (real field) or complex128
(complex field).  All routines here are pure functions; the generalized
eigensolver delegates to LAPACK's QZ-type driver (via ``scipy.linalg.eig``)
and post-processes its output into unit-normalized homogeneous eigenpairs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "FieldKind",
    "EigenTriple",
    "SingularPencilSuspected",
    "field_of",
    "qr_positive",
    "rank_with_tol",
    "nullspace_basis",
    "generalized_eigen",
    "RESIDUAL_FACTOR",
]

#: Backend residual constant: eigenpairs returned by :func:`generalized_eigen`
#: satisfy ``||(beta*A - alpha*B) x|| <= RESIDUAL_FACTOR * n * eps * (||A||_F + ||B||_F)``
#: (and the analogous left residual) on regular pencils.
RESIDUAL_FACTOR = 100.0

_EPS = np.finfo(np.float64).eps


class FieldKind(enum.Enum):
    """Scalar field of a matrix, with the degrees-of-freedom count ``phi``
    (1 for real entries, 2 for complex ones) used by the distribution laws."""

    REAL = "real"
    COMPLEX = "complex"

    @property
    def phi(self) -> int:
        return 1 if self is FieldKind.REAL else 2

    @property
    def dtype(self):
        return np.float64 if self is FieldKind.REAL else np.complex128

    @classmethod
    def parse(cls, name) -> "FieldKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValueError(f"unknown field {name!r}; expected 'real' or 'complex'") from None


def field_of(m: np.ndarray) -> FieldKind:
    return FieldKind.COMPLEX if np.iscomplexobj(m) else FieldKind.REAL


class SingularPencilSuspected(Exception):
    """The QZ backend failed or produced too many invalid eigenpairs,
    which typically means the input pencil is singular or nearly so."""


@dataclass
class EigenTriple:
    """One generalized eigenpair in homogeneous form.

    ``(alpha, beta)`` lies on the complex unit sphere (|alpha|^2+|beta|^2=1);
    the eigenvalue is ``alpha/beta``, infinite when ``beta == 0``.  ``right``
    and ``left`` are unit 2-norm eigenvectors from the same factorization.
    """

    alpha: complex
    beta: complex
    right: np.ndarray
    left: np.ndarray

    @property
    def value(self) -> complex:
        return self.alpha / self.beta if self.beta != 0 else complex(np.inf)

    @property
    def is_finite(self) -> bool:
        return self.beta != 0


def _check_finite(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m)
    if m.dtype.kind not in "fc":
        m = m.astype(np.complex128 if m.dtype.kind == "c" else np.float64)
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def qr_positive(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reduced QR factorization with the diagonal of R real and >= 0.

    Requires rows >= cols.  Rank-deficient input is fine (zero diagonal
    entries are kept as-is).  This is the canonical factorization that maps
    Gaussian matrices to Haar-uniform Stiefel matrices.
    """
    m = _check_finite(m)
    if m.ndim != 2 or m.shape[0] < m.shape[1]:
        raise ValueError(f"qr_positive expects rows >= cols, got shape {m.shape}")
    q, r = np.linalg.qr(m)
    d = np.diagonal(r).copy()
    phase = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1.0), 1.0)
    q = q * phase.conj()
    r = phase.conj()[:, None] * r
    # scrub roundoff: the diagonal is |d| exactly
    r[np.diag_indices(min(r.shape))] = np.abs(d)
    return q, r


def rank_with_tol(m: np.ndarray, tol: float = 0.0) -> int:
    """Number of singular values strictly greater than ``tol``.

    ``tol = 0`` selects the conventional default
    ``max(rows, cols) * eps * sigma_max``.
    """
    m = _check_finite(m)
    if tol < 0:
        raise ValueError("tol must be >= 0")
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if tol == 0.0:
        tol = max(m.shape) * _EPS * (s[0] if s.size else 0.0)
    return int(np.count_nonzero(s > tol))


def nullspace_basis(m: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Orthonormal basis of the (right) nullspace of ``m`` at tolerance ``tol``.

    Returns a ``cols x (cols - rank)`` matrix; full-rank input gives an
    empty ``cols x 0`` basis.
    """
    m = _check_finite(m)
    if tol < 0:
        raise ValueError("tol must be >= 0")
    rows, cols = m.shape
    u, s, vh = np.linalg.svd(m)
    if tol == 0.0:
        tol = max(rows, cols) * _EPS * (s[0] if s.size else 0.0)
    rank = int(np.count_nonzero(s > tol))
    return vh[rank:].conj().T


def generalized_eigen(a: np.ndarray, b: np.ndarray) -> list[EigenTriple]:
    """All eigenpairs of the regular pencil ``a - lambda b`` via the QZ driver.

    Left and right eigenvectors come from one LAPACK ``ggev`` call, so they
    are consistently paired per eigenvalue.  Raises
    :class:`SingularPencilSuspected` when the backend signals a failure,
    returns indeterminate ``(alpha, beta) ~ (0, 0)`` pairs, or more than
    ``n/2`` eigenpairs violate the documented residual bound.
    """
    a = _check_finite(a, "A")
    b = _check_finite(b, "B")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("A must be square")
    if a.shape != b.shape:
        raise ValueError("A and B must have equal shape")
    if np.iscomplexobj(a) != np.iscomplexobj(b):
        a = a.astype(np.complex128)
        b = b.astype(np.complex128)
    n = a.shape[0]

    try:
        (alpha, beta), vl, vr = scipy.linalg.eig(
            a, b, left=True, right=True, homogeneous_eigvals=True
        )
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise SingularPencilSuspected(f"QZ backend failed: {exc}") from exc

    scale = np.hypot(np.linalg.norm(a, "fro"), np.linalg.norm(b, "fro"))
    pair_norm = np.hypot(np.abs(alpha), np.abs(beta))
    indeterminate = pair_norm <= n * _EPS * scale
    if np.any(indeterminate):
        raise SingularPencilSuspected(
            f"{int(indeterminate.sum())} indeterminate eigenvalue(s) (alpha ~ beta ~ 0); "
            "the pencil is singular or near-singular"
        )

    alpha = alpha / pair_norm
    beta = beta / pair_norm
    vr = vr / np.linalg.norm(vr, axis=0)
    vl = vl / np.linalg.norm(vl, axis=0)

    res_tol = RESIDUAL_FACTOR * n * _EPS * (np.linalg.norm(a, "fro") + np.linalg.norm(b, "fro"))
    bad = 0
    triples = []
    for i in range(n):
        x = vr[:, i]
        y = vl[:, i]
        op = beta[i] * a - alpha[i] * b
        if np.linalg.norm(op @ x) > res_tol or np.linalg.norm(y.conj() @ op) > res_tol:
            bad += 1
        triples.append(EigenTriple(complex(alpha[i]), complex(beta[i]), x, y))
    if bad > n // 2:
        raise SingularPencilSuspected(
            f"{bad}/{n} eigenpairs violate the residual tolerance {res_tol:.3e}"
        )
    return triples
