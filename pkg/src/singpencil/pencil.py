"""The Pencil value, 1-norm scaling, and randomized normal-rank estimation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .matcore import FieldKind, field_of, rank_with_tol
from .randstat import RngState, as_generator

__all__ = ["Pencil", "NormalRankInfo", "ZeroMatrix", "scale_one_norm", "normal_rank"]


class ZeroMatrix(Exception):
    """Scaling requires both matrices of the pencil to be nonzero."""


def one_norm(m: np.ndarray) -> float:
    """Induced 1-norm: maximum absolute column sum."""
    return float(np.abs(m).sum(axis=0).max()) if m.size else 0.0


@dataclass
class Pencil:
    """A square matrix pencil ``a - lambda*b`` over a fixed scalar field.

    ``scale_a``/``scale_b`` cache the accumulated 1-norm scaling factors, so
    eigenvalues of the stored (possibly scaled) matrices can always be mapped
    back to the frame the pencil was originally built in:
    ``lambda_original = lambda_stored * scale_a / scale_b``.
    """

    a: np.ndarray
    b: np.ndarray
    scale_a: float = 1.0
    scale_b: float = 1.0
    scaled: bool = field(default=False)

    def __post_init__(self):
        a = np.asarray(self.a)
        b = np.asarray(self.b)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"A must be square, got shape {a.shape}")
        if b.shape != a.shape:
            raise ValueError(f"A and B must have equal shape, got {a.shape} vs {b.shape}")
        if np.iscomplexobj(a) or np.iscomplexobj(b):
            a = a.astype(np.complex128)
            b = b.astype(np.complex128)
        else:
            a = a.astype(np.float64)
            b = b.astype(np.float64)
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("pencil matrices must have finite entries")
        self.a = a
        self.b = b

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def field(self) -> FieldKind:
        return field_of(self.a)

    def shifted(self, zeta: complex) -> np.ndarray:
        """The matrix ``a - zeta*b``."""
        return self.a - zeta * self.b


@dataclass
class NormalRankInfo:
    """Normal rank estimate together with the evidence it was computed from.

    The per-sample ranks are kept so that disagreement between sample points
    (a sample accidentally hitting an eigenvalue) stays observable.
    """

    nrank: int
    k: int
    sample_points: list[complex]
    per_point_rank: list[int]


def scale_one_norm(p: Pencil) -> Pencil:
    """Scale both matrices to unit 1-norm, recording the factors.

    Idempotent: an already scaled pencil is returned unchanged.
    """
    na, nb = one_norm(p.a), one_norm(p.b)
    if na == 0.0 or nb == 0.0:
        raise ZeroMatrix("cannot scale a pencil with a zero A or B matrix")
    if na == 1.0 and nb == 1.0:
        return p if p.scaled else replace(p, scaled=True)
    return Pencil(p.a / na, p.b / nb, p.scale_a * na, p.scale_b * nb, scaled=True)


def normal_rank(p: Pencil, samples: int = 3, tol: float = 0.0, rng=None) -> NormalRankInfo:
    """Estimate ``nrank(A, B) = max_zeta rank(A - zeta*B)`` by random sampling.

    The sample points are complex even for real pencils and drawn uniformly
    (by area) from the annulus ``0.5 <= |zeta| <= 2``, which keeps
    ``A - zeta*B`` well scaled once the pencil has unit 1-norms.  The maximum
    over samples is reported: a random point can only under-estimate the rank,
    never over-estimate it.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    gen = as_generator(rng if rng is not None else RngState(0))
    radii = np.sqrt(gen.uniform(0.25, 4.0, size=samples))
    angles = gen.uniform(0.0, 2.0 * np.pi, size=samples)
    points = radii * np.exp(1j * angles)
    ranks = [rank_with_tol(p.shifted(z), tol) for z in points]
    nrank = max(ranks)
    return NormalRankInfo(nrank, p.n - nrank, [complex(z) for z in points], ranks)
