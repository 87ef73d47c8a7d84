"""Exact reference quantities for eigenvalue sensitivity.

For a simple finite eigenvalue ``lam`` of a singular pencil of normal rank
``n - k``, the kernel of ``A - lam*B`` has dimension k+1 and splits into a
k-dimensional part inside the minimal reducing subspace plus one
distinguished eigenvector direction.  The matrix ``Y* B X`` built from any
orthonormal kernel bases X (right) and Y (left) then has rank one, its only
nonzero singular value being ``|y* B x|`` for the distinguished pair
``x, y``.  That identity drives everything here: it yields

* ``gamma_exact``      -- the reciprocal condition number
                          ``|y* B x| (1+|lam|^2)^(-1/2)``,
* ``eig_witness``      -- the split bases themselves (recovered from the
                          singular vectors, no staircase machinery needed),
* ``directional_sensitivity`` -- the first-order eigenvalue movement for a
                          unit perturbation direction (E, F),
* ``weak_cond_estimate`` -- a Monte Carlo estimate of the delta-weak
                          condition number with its theoretical bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matcore import FieldKind, nullspace_basis
from .pencil import Pencil
from .randstat import RngState, as_generator, gaussian_matrix

__all__ = [
    "EigenvalueTruth",
    "SensitivityResult",
    "WeakCondEstimate",
    "NotSimpleOrWrongRank",
    "DegenerateProjection",
    "eig_witness",
    "gamma_exact",
    "alpha_closed_form",
    "directional_sensitivity",
    "weak_cond_estimate",
]


class NotSimpleOrWrongRank(Exception):
    """The kernel dimension at ``lam`` is not k+1: the eigenvalue is not a
    simple eigenvalue of a pencil with the assumed normal rank."""


class DegenerateProjection(Exception):
    """The projected k x k system is numerically singular (a probability-zero
    event for generic random projections)."""


@dataclass
class EigenvalueTruth:
    """Orthonormal kernel data for one simple finite eigenvalue.

    ``[right_inner, right_vec]`` spans ker(A - lam B) with ``right_inner``
    (n x k) spanning the intersection with the minimal reducing subspace and
    ``right_vec`` the distinguished unit eigenvector; dito on the left for
    the adjoint kernel.  ``gamma`` is ``|y* B x| (1+|lam|^2)^(-1/2)``.
    """

    value: complex
    right_inner: np.ndarray
    right_vec: np.ndarray
    left_inner: np.ndarray
    left_vec: np.ndarray
    gamma: float

    @property
    def k(self) -> int:
        return self.right_inner.shape[1]

    @property
    def n(self) -> int:
        return self.right_vec.shape[0]

    @property
    def right_basis(self) -> np.ndarray:
        return np.column_stack([self.right_inner, self.right_vec])

    @property
    def left_basis(self) -> np.ndarray:
        return np.column_stack([self.left_inner, self.left_vec])


def _kernel_pair(p: Pencil, lam: complex, k: int | None, tol: float):
    m = p.shifted(lam)
    x = nullspace_basis(m, tol)
    y = nullspace_basis(m.conj().T, tol)
    if k is None:
        k = x.shape[1] - 1
    if x.shape[1] != k + 1 or y.shape[1] != k + 1 or k < 0:
        raise NotSimpleOrWrongRank(
            f"kernel dimensions ({x.shape[1]} right, {y.shape[1]} left) do not match k+1={k + 1} "
            f"at lambda={lam}"
        )
    return x, y, k


def eig_witness(p: Pencil, lam: complex, k: int | None = None, tol: float = 0.0) -> EigenvalueTruth:
    """Numerically recover the split kernel bases and gamma at ``lam``.

    The singular vectors of the rank-one matrix ``Y* B X`` identify the
    distinguished eigenvector pair inside arbitrary orthonormal kernel bases;
    the orthogonal complements within the kernels give the inner parts.
    """
    x, y, k = _kernel_pair(p, lam, k, tol)
    g = y.conj().T @ p.b @ x
    u, s, vh = np.linalg.svd(g)
    if s[0] == 0.0:
        raise NotSimpleOrWrongRank(f"y* B x vanishes at lambda={lam}; eigenvalue not simple")
    gamma = s[0] / math.sqrt(1.0 + abs(lam) ** 2)
    right_vec = x @ vh[0].conj()
    right_inner = x @ vh[1:].conj().T
    left_vec = y @ u[:, 0]
    left_inner = y @ u[:, 1:]
    return EigenvalueTruth(complex(lam), right_inner, right_vec, left_inner, left_vec, gamma)


def gamma_exact(p: Pencil, lam: complex, k: int | None = None, tol: float = 0.0) -> float:
    """Reciprocal absolute condition number ``|y* B x| (1+|lam|^2)^(-1/2)``
    of the simple finite eigenvalue ``lam``, computed as
    ``sigma_max(Y* B X) (1+|lam|^2)^(-1/2)`` over orthonormal kernel bases."""
    x, y, _ = _kernel_pair(p, lam, k, tol)
    s = np.linalg.svd(y.conj().T @ p.b @ x, compute_uv=False)
    return float(s[0] / math.sqrt(1.0 + abs(lam) ** 2))


def alpha_closed_form(v: np.ndarray, inner: np.ndarray, vec: np.ndarray) -> float:
    """Coefficient modulus |alpha| of the distinguished eigenvector component
    that a rank-k projection constraint ``V* x_i = 0`` forces:

        |alpha| = 1 / sqrt(1 + ||(V* X1)^(-1) V* x||^2)

    where X1 = ``inner`` and x = ``vec``.  Raises
    :class:`DegenerateProjection` when ``V* X1`` is singular.
    """
    v = np.asarray(v)
    inner = np.asarray(inner)
    vec = np.asarray(vec).reshape(-1)
    k = inner.shape[1]
    if k == 0:
        return 1.0
    g = v.conj().T @ inner
    s = np.linalg.svd(g, compute_uv=False)
    scale = np.linalg.norm(v, 2) * np.linalg.norm(inner, 2)
    if s[-1] <= 1e-12 * max(scale, 1e-300):
        raise DegenerateProjection(
            f"V* X1 numerically singular (sigma_min={s[-1]:.3e}, scale={scale:.3e})"
        )
    rhs = v.conj().T @ vec
    w = np.linalg.solve(g, rhs)
    return 1.0 / math.sqrt(1.0 + float(np.vdot(w, w).real))


@dataclass
class SensitivityResult:
    """Directional sensitivity value with its determinant diagnostics.

    ``degenerate`` is set exactly when the denominator determinant falls
    below ``1e-14 * (1+|lam|)^k``, the scale a unit direction can reach.
    """

    sigma: float
    numer_det: complex
    denom_det: complex
    degenerate: bool


def _resolve_truth(source, lam) -> EigenvalueTruth:
    if isinstance(source, EigenvalueTruth):
        return source
    witness_for = getattr(source, "witness_for", None)
    if witness_for is None:
        raise TypeError("expected an EigenvalueTruth or an object with witness_for()")
    return witness_for(lam)


def directional_sensitivity(source, lam: complex, e: np.ndarray, f: np.ndarray) -> SensitivityResult:
    """First-order movement of ``lam`` per unit perturbation along (E, F):

        sigma = | det(Y* (E - lam F) X) / (y* B x * det(Y1* (E - lam F) X1)) |

    For k = 0 (a regular pencil) the empty denominator determinant is 1 and
    sigma reduces to ``|y* (E - lam F) x| / |y* B x|``.  ``source`` is either
    an :class:`EigenvalueTruth` or a ground-truth object with
    ``witness_for(lam)``; the pencil's B enters through the stored gamma.
    """
    truth = _resolve_truth(source, lam)
    lam = complex(lam if lam is not None else truth.value)
    e = np.asarray(e)
    f = np.asarray(f)
    n = truth.n
    if e.shape != (n, n) or f.shape != (n, n):
        raise ValueError(f"direction matrices must be {n} x {n}")
    w = e - lam * f
    x_full = truth.right_basis
    y_full = truth.left_basis
    numer = complex(np.linalg.det(y_full.conj().T @ w @ x_full))
    k = truth.k
    if k == 0:
        denom_det = complex(1.0)
    else:
        denom_det = complex(np.linalg.det(truth.left_inner.conj().T @ w @ truth.right_inner))
    ybx = truth.gamma * math.sqrt(1.0 + abs(lam) ** 2)
    degenerate = abs(denom_det) <= 1e-14 * (1.0 + abs(lam)) ** k
    sigma = math.inf if denom_det == 0 else abs(numer) / (ybx * abs(denom_det))
    return SensitivityResult(sigma, numer, denom_det, degenerate)


@dataclass
class WeakCondEstimate:
    """Empirical (1-delta)-quantile of the directional sensitivity over
    uniform sphere directions, with the theoretical bracket

        1/sqrt(2 delta n^2) * 1/gamma  <=  kappa_w  <=  sqrt(k)/sqrt(2 delta n^2) * 1/gamma.

    ``quantile_lo``/``quantile_hi`` bracket the quantile by +-3 standard
    errors via the binomial order-statistic argument; ``degenerate_trials``
    counts directions with a numerically vanishing denominator.
    """

    delta: float
    trials: int
    quantile_value: float
    lower_bound: float
    upper_bound: float
    quantile_lo: float
    quantile_hi: float
    degenerate_trials: int


def weak_cond_estimate(
    source,
    lam: complex,
    delta: float,
    trials: int,
    rng,
    field: FieldKind = FieldKind.COMPLEX,
    chunk: int = 20000,
) -> WeakCondEstimate:
    """Monte Carlo estimate of the delta-weak condition number at ``lam``.

    Directions (E, F) are drawn uniformly from the unit sphere (complex by
    default; ``field=REAL`` is the experimental real-direction mode, for
    which no bracket guarantees are asserted).  Requires
    ``delta <= k/(2 n^2)`` for k >= 1 and ``trials >= 10/delta``.
    """
    truth = _resolve_truth(source, lam)
    lam = complex(lam if lam is not None else truth.value)
    n, k = truth.n, truth.k
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must lie in (0, 1)")
    if k >= 1 and delta > k / (2.0 * n**2) + 1e-15:
        raise ValueError(f"delta={delta} exceeds k/(2 n^2)={k / (2 * n**2)}")
    if trials < 10.0 / delta:
        raise ValueError(f"need at least 10/delta = {10.0 / delta:.0f} trials")

    gen = as_generator(rng if rng is not None else RngState(0))
    y_full_h = truth.left_basis.conj().T
    x_full = truth.right_basis
    y1_h = truth.left_inner.conj().T
    x1 = truth.right_inner
    ybx = truth.gamma * math.sqrt(1.0 + abs(lam) ** 2)
    deg_scale = 1e-14 * (1.0 + abs(lam)) ** k

    sigmas = np.empty(trials)
    degenerate = 0
    done = 0
    while done < trials:
        c = min(chunk, trials - done)
        e = gaussian_matrix(c * n, n, field, gen).reshape(c, n, n)
        f = gaussian_matrix(c * n, n, field, gen).reshape(c, n, n)
        norms = np.sqrt(
            np.sum(np.abs(e) ** 2, axis=(1, 2)) + np.sum(np.abs(f) ** 2, axis=(1, 2))
        )
        w = (e - lam * f) / norms[:, None, None]
        numer = np.abs(np.linalg.det(y_full_h @ w @ x_full))
        if k == 0:
            denom = np.ones(c)
        else:
            denom = np.abs(np.linalg.det(y1_h @ w @ x1))
        degenerate += int(np.count_nonzero(denom <= deg_scale))
        with np.errstate(divide="ignore"):
            sigmas[done : done + c] = numer / (ybx * denom)
        done += c

    sigmas.sort()
    idx = min(trials - 1, max(0, math.ceil((1.0 - delta) * trials) - 1))
    spread = 3.0 * math.sqrt(trials * delta * (1.0 - delta))
    lo = sigmas[max(0, idx - int(math.ceil(spread)))]
    hi = sigmas[min(trials - 1, idx + int(math.ceil(spread)))]

    inv_gamma = 1.0 / truth.gamma
    if k >= 1:
        lower = inv_gamma / math.sqrt(2.0 * delta * n**2)
        upper = math.sqrt(k) * lower
    else:
        # regular pencil: the weak condition number increases to 1/gamma
        lower, upper = 0.0, inv_gamma
    return WeakCondEstimate(
        delta, trials, float(sigmas[idx]), lower, upper, float(lo), float(hi), degenerate
    )
