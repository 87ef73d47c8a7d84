"""Seeded randomness and the distribution laws behind the extraction ratio.

The random draws (Gaussian matrices, Haar-uniform Stiefel matrices, sphere
directions) are keyed by a counter-based Philox state so that Monte Carlo
runs reproduce bit-identically regardless of platform or thread schedule.

The distribution half implements the laws of the eigenvector coefficient
moduli |alpha|, |beta| produced by rank-k random projections, and of their
product |alpha|*|beta|:

* one factor:  |alpha|^2 ~ Beta(phi/2, phi*k/2), i.e. |alpha| follows
  Kumaraswamy(2, k) over C (phi = 2) and a generalized-beta law over R
  (phi = 1);
* the product: closed-form densities for small k (complex k = 1..4,
  real k = 2, 4, 6), an adaptive-quadrature fallback otherwise;
* expected values via log-gamma, plus upper/lower left-tail bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import betainc, gammaln

from .matcore import FieldKind, qr_positive

__all__ = [
    "RngState",
    "as_generator",
    "gaussian_matrix",
    "stiefel_uniform",
    "sphere_direction",
    "pdf_factor",
    "cdf_factor",
    "pdf_product",
    "cdf_product",
    "expected_factor",
    "expected_product",
    "tail_bound",
    "TailBound",
    "DistributionModel",
    "sample_factor",
    "sample_product",
    "ks_statistic",
    "ks_two_sample",
    "ks_critical",
]

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class RngState:
    """Value-type RNG state: a (seed, stream) pair keying a Philox generator.

    Identical states reproduce identical draws on any platform.  ``split``
    derives independent child streams, so parallel trials can each own one
    state without any coordination.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = ((self.stream & _MASK64) << 64) | (self.seed & _MASK64)
        return np.random.Generator(np.random.Philox(key=key))

    def split(self, index: int) -> "RngState":
        child = _splitmix64(((self.stream & _MASK64) * 0x9E3779B97F4A7C15 + index + 1) & _MASK64)
        return RngState(self.seed, child)


def as_generator(rng) -> np.random.Generator:
    """Accept an RngState, a Generator, or an int seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngState):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return RngState(int(rng)).generator()
    raise TypeError(f"cannot interpret {type(rng).__name__} as a random generator")


# ---------------------------------------------------------------------------
# random draws


def gaussian_matrix(rows: int, cols: int, field: FieldKind, rng) -> np.ndarray:
    """Standard Gaussian matrix: N(0,1) entries over R; over C the real and
    imaginary parts are independent N(0, 1/2), so E|z|^2 = 1."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    gen = as_generator(rng)
    field = FieldKind.parse(field)
    if field is FieldKind.REAL:
        return gen.standard_normal((rows, cols))
    z = gen.standard_normal((rows, cols, 2))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def stiefel_uniform(n: int, k: int, field: FieldKind, rng) -> np.ndarray:
    """Haar-uniform n x k matrix with orthonormal columns, realized as the Q
    factor of a Gaussian matrix under the positive-diagonal QR convention."""
    if not (n >= k >= 1):
        raise ValueError("need n >= k >= 1")
    q, _ = qr_positive(gaussian_matrix(n, k, field, rng))
    return q


def sphere_direction(n: int, rng, field: FieldKind = FieldKind.COMPLEX) -> tuple[np.ndarray, np.ndarray]:
    """A perturbation direction (E, F): an n x n matrix pair drawn uniformly
    from the unit sphere ``||E||_F^2 + ||F||_F^2 = 1``.

    Complex by default; ``field=REAL`` gives the experimental real-direction
    mode (uniform on the sphere in R^(2n^2)).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = as_generator(rng)
    e = gaussian_matrix(n, n, field, gen)
    f = gaussian_matrix(n, n, field, gen)
    norm = np.sqrt(np.linalg.norm(e, "fro") ** 2 + np.linalg.norm(f, "fro") ** 2)
    return e / norm, f / norm


# ---------------------------------------------------------------------------
# single-factor law


def _validate_k(k: int) -> int:
    if int(k) != k or k < 1:
        raise ValueError("k must be an integer >= 1")
    return int(k)


def pdf_factor(x, k: int, field: FieldKind):
    """Density of one coefficient modulus |alpha| on [0, 1].

    Complex field: ``2 k x (1-x^2)^(k-1)`` (Kumaraswamy(2, k)).
    Real field:    ``2 / B(1/2, k/2) * (1-x^2)^(k/2-1)``.
    """
    k = _validate_k(k)
    field = FieldKind.parse(field)
    x = np.asarray(x, dtype=np.float64)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("x must lie in [0, 1]")
    with np.errstate(divide="ignore"):
        if field is FieldKind.COMPLEX:
            out = 2.0 * k * x * (1.0 - x * x) ** (k - 1)
        else:
            const = 2.0 * math.exp(gammaln((k + 1) / 2.0) - gammaln(0.5) - gammaln(k / 2.0))
            out = const * (1.0 - x * x) ** (k / 2.0 - 1.0)
    return out if out.ndim else float(out)


def cdf_factor(x, k: int, field: FieldKind):
    """Distribution function of |alpha|: P(|alpha| <= x)."""
    k = _validate_k(k)
    field = FieldKind.parse(field)
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
    if field is FieldKind.COMPLEX:
        out = 1.0 - (1.0 - x * x) ** k
    else:
        out = betainc(0.5, k / 2.0, x * x)
    return out if out.ndim else float(out)


def expected_factor(k: int, field: FieldKind) -> float:
    """E|alpha| via log-gamma (stable up to large k)."""
    k = _validate_k(k)
    field = FieldKind.parse(field)
    if field is FieldKind.COMPLEX:
        return math.exp(0.5 * math.log(math.pi) - math.log(2.0) + gammaln(k + 1.0) - gammaln(k + 1.5))
    return math.exp(gammaln((k + 1) / 2.0) - 0.5 * math.log(math.pi) - gammaln((k + 2) / 2.0))


def expected_product(k: int, field: FieldKind) -> float:
    """E[|alpha||beta|] = (E|alpha|)^2 by independence of the two factors."""
    return expected_factor(k, field) ** 2


def sample_factor(k: int, field: FieldKind, size: int, rng) -> np.ndarray:
    """Direct sampler for |alpha|: sqrt of a Beta(phi/2, phi*k/2) variate."""
    k = _validate_k(k)
    phi = FieldKind.parse(field).phi
    gen = as_generator(rng)
    return np.sqrt(gen.beta(phi / 2.0, phi * k / 2.0, size=size))


def sample_product(k: int, field: FieldKind, size: int, rng) -> np.ndarray:
    """Direct sampler for the product |alpha||beta| (two independent factors).

    This is the pencil-free oracle used to benchmark the tail bounds.
    """
    gen = as_generator(rng)
    return sample_factor(k, field, size, gen) * sample_factor(k, field, size, gen)


# ---------------------------------------------------------------------------
# product law: closed forms for small k, quadrature fallback otherwise
#
# Closed-form densities have the shape
#   complex: f(x) = x * (p(x^2) + q(x^2) * ln x)
#   real:    f(x) =      p(x^2) + q(x^2) * ln x
# with polynomial coefficient vectors in ascending powers of u = x^2.

_PRODUCT_COEFFS_COMPLEX = {
    1: ([0.0], [-4.0]),
    2: ([-16.0, 16.0], [-16.0, -16.0]),
    3: ([-54.0, 0.0, 54.0], [-36.0, -144.0, -36.0]),
    4: (
        [-352.0 / 3.0, -288.0, 288.0, 352.0 / 3.0],
        [-64.0, -576.0, -576.0, -64.0],
    ),
}

_PRODUCT_COEFFS_REAL = {
    2: ([0.0], [-1.0]),
    4: ([-2.25, 2.25], [-2.25, -2.25]),
    6: ([-675.0 / 128.0, 0.0, 675.0 / 128.0], [-225.0 / 64.0, -900.0 / 64.0, -225.0 / 64.0]),
}


def has_closed_form(k: int, field: FieldKind) -> bool:
    field = FieldKind.parse(field)
    table = _PRODUCT_COEFFS_COMPLEX if field is FieldKind.COMPLEX else _PRODUCT_COEFFS_REAL
    return k in table


def _closed_pdf(x: np.ndarray, k: int, field: FieldKind) -> np.ndarray:
    table = _PRODUCT_COEFFS_COMPLEX if field is FieldKind.COMPLEX else _PRODUCT_COEFFS_REAL
    p, q = table[k]
    u = x * x
    pv = np.polynomial.polynomial.polyval(u, p)
    qv = np.polynomial.polynomial.polyval(u, q)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.log(x)
        out = pv + qv * lg
        if field is FieldKind.COMPLEX:
            out = x * (pv + qv * lg)
    # limits at x = 0: the complex density vanishes, the real one diverges
    if field is FieldKind.COMPLEX:
        out = np.where(x == 0.0, 0.0, out)
    else:
        out = np.where(x == 0.0, np.inf, out)
    return out


def _closed_cdf(x: np.ndarray, k: int, field: FieldKind) -> np.ndarray:
    # termwise antiderivatives of x^e and x^e ln x, e = 2j+1 (complex), 2j (real)
    table = _PRODUCT_COEFFS_COMPLEX if field is FieldKind.COMPLEX else _PRODUCT_COEFFS_REAL
    p, q = table[k]
    out = np.zeros_like(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.where(x > 0, np.log(np.where(x > 0, x, 1.0)), 0.0)
        for j, (cj, dj) in enumerate(zip(p, q)):
            e1 = 2 * j + 2 if field is FieldKind.COMPLEX else 2 * j + 1
            t = x**e1
            out += cj * t / e1 + dj * t * (lg / e1 - 1.0 / e1**2)
    return np.clip(out, 0.0, 1.0)


def _quad_pdf_one(t: float, k: int, field: FieldKind) -> float:
    # f(t) = int_t^1 f1(u) f1(t/u) du/u, computed after u = t^s which turns
    # it into -ln t * int_0^1 f1(t^s) f1(t^(1-s)) ds and tames the endpoint
    # behavior from the logarithmic singularity at x -> 0.
    if t >= 1.0:
        return 0.0
    if t <= 0.0:
        return 0.0 if field is FieldKind.COMPLEX else math.inf

    def integrand(s):
        return pdf_factor(t**s, k, field) * pdf_factor(t ** (1.0 - s), k, field)

    val, _ = integrate.quad(integrand, 0.0, 1.0, limit=200)
    return -math.log(t) * val


def _quad_cdf_one(t: float, k: int, field: FieldKind) -> float:
    # P(XY <= t) = F1(t) + int_t^1 f1(u) F1(t/u) du
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0

    def integrand(u):
        return pdf_factor(u, k, field) * cdf_factor(t / u, k, field)

    val, _ = integrate.quad(integrand, t, 1.0, limit=200)
    return min(1.0, cdf_factor(t, k, field) + val)


def pdf_product(x, k: int, field: FieldKind):
    """Density of |alpha||beta| on (0, 1].

    Uses the printed polynomial closed forms where they exist (complex
    k = 1..4, real k = 2, 4, 6) and the convolution quadrature otherwise.
    ``x = 0`` returns the limiting value (0 over C, inf over R).
    """
    k = _validate_k(k)
    field = FieldKind.parse(field)
    x = np.asarray(x, dtype=np.float64)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("x must lie in [0, 1]")
    if has_closed_form(k, field):
        out = _closed_pdf(x, k, field)
    else:
        out = np.vectorize(lambda t: _quad_pdf_one(float(t), k, field))(x)
    out = np.asarray(out, dtype=np.float64)
    return out if out.ndim else float(out)


def cdf_product(x, k: int, field: FieldKind):
    """Distribution function of |alpha||beta|."""
    k = _validate_k(k)
    field = FieldKind.parse(field)
    x = np.asarray(x, dtype=np.float64)
    if has_closed_form(k, field):
        out = _closed_cdf(np.clip(x, 0.0, 1.0), k, field)
    else:
        out = np.vectorize(lambda t: _quad_cdf_one(float(t), k, field))(np.clip(x, 0.0, 1.0))
    out = np.asarray(out, dtype=np.float64)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class DistributionModel:
    """pdf/cdf/mean evaluators for one factor law or the product law."""

    k: int
    field: FieldKind
    kind: str = "product"  # "factor" or "product"

    def __post_init__(self):
        _validate_k(self.k)
        object.__setattr__(self, "field", FieldKind.parse(self.field))
        if self.kind not in ("factor", "product"):
            raise ValueError("kind must be 'factor' or 'product'")

    def pdf(self, x):
        fn = pdf_factor if self.kind == "factor" else pdf_product
        return fn(x, self.k, self.field)

    def cdf(self, x):
        fn = cdf_factor if self.kind == "factor" else cdf_product
        return fn(x, self.k, self.field)

    def mean(self) -> float:
        fn = expected_factor if self.kind == "factor" else expected_product
        return fn(self.k, self.field)


# ---------------------------------------------------------------------------
# left-tail bounds for the product law


_BOUND_KINDS = ("simple_upper", "refined_upper", "lower")


def tail_bound(t, k: int, field: FieldKind, kind: str):
    """Bound on the left-tail probability P(|alpha||beta| < t).

    ============== ========= =====================================________
    kind            field     formula
    ============== ========= ==============================================
    simple_upper    complex   2 k t
    simple_upper    real      sqrt(8 k t / pi)
    refined_upper   complex   k^2 t^2 (1 - 2 ln t)
    refined_upper   real      (2k/pi) t (2 sqrt(pi) - 1 + t - ln t)
    lower           real      sqrt(8 (k-1) / pi) t        (needs k >= 2)
    ============== ========= ==============================================

    The real refined upper bound is the full non-asymptotic expression, valid
    for every t in (0, 1], not only the small-t headline term.
    """
    k = _validate_k(k)
    field = FieldKind.parse(field)
    if kind not in _BOUND_KINDS:
        raise ValueError(f"unknown bound kind {kind!r}")
    t = np.asarray(t, dtype=np.float64)
    if np.any((t <= 0) | (t > 1)):
        raise ValueError("t must lie in (0, 1]")
    if kind == "simple_upper":
        out = 2.0 * k * t if field is FieldKind.COMPLEX else np.sqrt(8.0 * k * t / np.pi)
    elif kind == "refined_upper":
        if field is FieldKind.COMPLEX:
            out = k**2 * t**2 * (1.0 - 2.0 * np.log(t))
        else:
            out = (2.0 * k / np.pi) * t * (2.0 * np.sqrt(np.pi) - 1.0 + t - np.log(t))
    else:
        if field is not FieldKind.REAL:
            raise ValueError("the lower bound exists only for the real field")
        if k < 2:
            raise ValueError("the lower bound requires k >= 2")
        out = np.sqrt(8.0 * (k - 1) / np.pi) * t
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class TailBound:
    """A callable left-tail bound of a given kind."""

    k: int
    field: FieldKind
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "field", FieldKind.parse(self.field))
        tail_bound(0.5, self.k, self.field, self.kind)  # validates the combination

    def __call__(self, t):
        return tail_bound(t, self.k, self.field, self.kind)


# ---------------------------------------------------------------------------
# goodness of fit


def ks_statistic(samples, cdf) -> float:
    """One-sample Kolmogorov-Smirnov statistic sup |F_emp - F_model|.

    ``samples`` must be sorted ascending (rejected otherwise); ``cdf`` is a
    vectorized model distribution function.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("need a 1-d sample of size >= 2")
    if np.any(np.diff(x) < 0):
        raise ValueError("samples must be sorted ascending")
    m = x.size
    f = np.asarray(cdf(x), dtype=np.float64)
    grid = np.arange(1, m + 1) / m
    d_plus = np.max(grid - f)
    d_minus = np.max(f - (grid - 1.0 / m))
    return float(max(d_plus, d_minus))


def ks_two_sample(a, b) -> float:
    """Two-sample KS statistic between empirical samples ``a`` and ``b``."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_critical(m: int, n: int | None = None) -> float:
    """Asymptotic 1%-level KS critical value: 1.63/sqrt(m), or the two-sample
    analogue 1.63*sqrt((m+n)/(m*n))."""
    if n is None:
        return 1.63 / math.sqrt(m)
    return 1.63 * math.sqrt((m + n) / (m * n))
