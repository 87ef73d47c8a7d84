"""Construction of singular test pencils with exact ground truth.

Pencils are declared as a list of canonical blocks (Jordan blocks for finite
eigenvalues, nilpotent blocks for infinite ones, and right/left singular
blocks ``L_m`` of size m x (m+1) / their transposes), assembled block
diagonally, and optionally disguised by an equivalence transformation.  The
ground truth carries the transforms, the minimal reducing subspace bases,
and per-eigenvalue kernel data (so the reciprocal condition number gamma is
known exactly), all updated consistently under disguises.

Three fixed pencils from the literature are shipped with their known data:
``hmp8x8`` (8 x 8, normal rank 6), ``delta25`` (a 25 x 25 operator
determinant pencil of a two-parameter problem, normal rank 21), and
``blockdiag10`` (10 x 10, normal rank 6).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .matcore import FieldKind, qr_positive
from .oracle import EigenvalueTruth, eig_witness
from .pencil import Pencil
from .randstat import RngState, as_generator, gaussian_matrix

__all__ = [
    "KcfBlock",
    "KcfSpec",
    "GroundTruth",
    "KcfParseError",
    "IllConditionedDisguise",
    "jordan",
    "nilpotent",
    "right_singular",
    "left_singular",
    "assemble",
    "apply_equivalence",
    "disguise",
    "paper_pencil",
    "parse_kcf_string",
    "corpus",
]


class IllConditionedDisguise(Exception):
    """All attempted random equivalence transforms exceeded the condition
    number guard."""


class KcfParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class KcfBlock:
    """One canonical block: ``jordan`` (size >= 1, finite eigenvalue),
    ``nilpotent`` (size >= 1, infinite eigenvalue), ``right_singular``
    (index m >= 0, block size m x (m+1)) or ``left_singular`` (index n >= 0,
    block size (n+1) x n)."""

    kind: str
    size: int
    value: complex = 0.0

    def __post_init__(self):
        if self.kind not in ("jordan", "nilpotent", "right_singular", "left_singular"):
            raise ValueError(f"unknown block kind {self.kind!r}")
        if self.kind in ("jordan", "nilpotent") and self.size < 1:
            raise ValueError(f"{self.kind} blocks need size >= 1")
        if self.kind in ("right_singular", "left_singular") and self.size < 0:
            raise ValueError("singular block indices must be >= 0")

    @property
    def rows(self) -> int:
        if self.kind == "right_singular":
            return self.size
        if self.kind == "left_singular":
            return self.size + 1
        return self.size

    @property
    def cols(self) -> int:
        if self.kind == "right_singular":
            return self.size + 1
        if self.kind == "left_singular":
            return self.size
        return self.size


def jordan(size: int, value) -> KcfBlock:
    return KcfBlock("jordan", size, complex(value))


def nilpotent(size: int) -> KcfBlock:
    return KcfBlock("nilpotent", size)


def right_singular(m: int) -> KcfBlock:
    return KcfBlock("right_singular", m)


def left_singular(n: int) -> KcfBlock:
    return KcfBlock("left_singular", n)


@dataclass(frozen=True)
class KcfSpec:
    """An ordered list of canonical blocks with derived pencil invariants."""

    blocks: tuple[KcfBlock, ...]

    def __init__(self, blocks):
        object.__setattr__(self, "blocks", tuple(blocks))
        rows = sum(b.rows for b in self.blocks)
        cols = sum(b.cols for b in self.blocks)
        if rows != cols:
            raise ValueError(f"blocks assemble to a {rows} x {cols} matrix; pencil must be square")
        if self.k_right != self.k_left:
            raise ValueError(
                f"{self.k_right} right singular blocks vs {self.k_left} left ones; counts must agree"
            )

    @property
    def k_right(self) -> int:
        return sum(1 for b in self.blocks if b.kind == "right_singular")

    @property
    def k_left(self) -> int:
        return sum(1 for b in self.blocks if b.kind == "left_singular")

    @property
    def k(self) -> int:
        return self.k_right

    @property
    def n(self) -> int:
        return sum(b.rows for b in self.blocks)

    @property
    def nrank(self) -> int:
        return self.n - self.k

    @property
    def m_sum(self) -> int:
        return sum(b.size for b in self.blocks if b.kind == "right_singular")

    @property
    def n_sum(self) -> int:
        return sum(b.size for b in self.blocks if b.kind == "left_singular")

    @property
    def r(self) -> int:
        return sum(b.size for b in self.blocks if b.kind in ("jordan", "nilpotent"))

    @property
    def finite_eigenvalues(self) -> list[complex]:
        out = []
        for b in self.blocks:
            if b.kind == "jordan":
                out.extend([b.value] * b.size)
        return out

    @property
    def simple_finite_eigenvalues(self) -> list[complex]:
        vals = [b.value for b in self.blocks if b.kind == "jordan"]
        return [
            b.value
            for b in self.blocks
            if b.kind == "jordan" and b.size == 1 and vals.count(b.value) == 1
        ]

    @property
    def field(self) -> FieldKind:
        real = all(b.value.imag == 0 for b in self.blocks if b.kind == "jordan")
        return FieldKind.REAL if real else FieldKind.COMPLEX


@dataclass
class GroundTruth:
    """Exact knowledge about a constructed (or shipped) pencil.

    For assembled pencils ``p_inv`` and ``q`` hold the equivalence transforms
    bringing the pencil to its canonical block-diagonal form, and
    ``min_reducing``/``left_reducing`` are orthonormal bases of the minimal
    (left) reducing subspaces.  Shipped pencils may carry partial truth
    (``None`` transforms) with numerically recovered eigenvalue witnesses.
    """

    n: int
    k: int
    nrank: int
    r: int
    m_sum: int
    n_sum: int
    field: FieldKind
    finite: list[complex]
    witnesses: list[EigenvalueTruth]
    p_inv: np.ndarray | None = None
    q: np.ndarray | None = None
    min_reducing: np.ndarray | None = None
    left_reducing: np.ndarray | None = None
    block_layout: list[tuple[KcfBlock, range, range]] | None = None

    def witness_for(self, lam: complex, tol: float = 1e-6) -> EigenvalueTruth:
        if not self.witnesses:
            raise KeyError("ground truth carries no eigenvalue witnesses")
        best = min(self.witnesses, key=lambda w: abs(w.value - lam))
        if abs(best.value - complex(lam)) > tol * (1.0 + abs(best.value)):
            raise KeyError(f"no ground-truth eigenvalue near {lam}")
        return best

    def to_json_dict(self) -> dict:
        return {
            "schema": "singpencil/1",
            "n": self.n,
            "k": self.k,
            "nrank": self.nrank,
            "regular_size": self.r,
            "right_index_sum": self.m_sum,
            "left_index_sum": self.n_sum,
            "field": self.field.value,
            "finite_eigenvalues": [[z.real, z.imag] for z in self.finite],
            "gamma": {format(w.value, ".16g"): w.gamma for w in self.witnesses},
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_json_dict(), **kwargs)


def _scalar(z: complex, dtype):
    return np.dtype(dtype).type(z if np.issubdtype(dtype, np.complexfloating) else z.real)


def _power_column(lam: complex, length: int, dtype) -> np.ndarray:
    v = _scalar(lam, dtype) ** np.arange(length)
    return v / np.linalg.norm(v)


def assemble(spec: KcfSpec) -> tuple[Pencil, GroundTruth]:
    """Assemble the block-diagonal pencil declared by ``spec`` together with
    its full ground truth (identity transforms)."""
    n = spec.n
    dtype = spec.field.dtype
    a = np.zeros((n, n), dtype=dtype)
    b = np.zeros((n, n), dtype=dtype)

    layout = []
    r0 = c0 = 0
    for blk in spec.blocks:
        rows, cols = blk.rows, blk.cols
        rr, cc = range(r0, r0 + rows), range(c0, c0 + cols)
        if blk.kind == "jordan":
            for i in range(rows):
                a[r0 + i, c0 + i] = _scalar(blk.value, dtype)
                if i + 1 < rows:
                    a[r0 + i, c0 + i + 1] = 1.0
                b[r0 + i, c0 + i] = 1.0
        elif blk.kind == "nilpotent":
            for i in range(rows):
                a[r0 + i, c0 + i] = 1.0
                if i + 1 < rows:
                    b[r0 + i, c0 + i + 1] = 1.0
        elif blk.kind == "right_singular":
            for i in range(blk.size):
                a[r0 + i, c0 + i + 1] = 1.0
                b[r0 + i, c0 + i] = 1.0
        else:  # left_singular
            for i in range(blk.size):
                a[r0 + i + 1, c0 + i] = 1.0
                b[r0 + i, c0 + i] = 1.0
        layout.append((blk, rr, cc))
        r0 += rows
        c0 += cols

    pencil = Pencil(a, b)

    min_cols = [c for blk, _, cc in layout if blk.kind == "right_singular" for c in cc]
    left_rows = [r for blk, rr, _ in layout if blk.kind == "left_singular" for r in rr]
    eye = np.eye(n, dtype=dtype)
    min_reducing = eye[:, min_cols] if min_cols else np.zeros((n, 0), dtype=dtype)
    left_reducing = eye[:, left_rows] if left_rows else np.zeros((n, 0), dtype=dtype)

    witnesses = []
    for lam in spec.simple_finite_eigenvalues:
        right_inner = np.zeros((n, spec.k), dtype=dtype)
        left_inner = np.zeros((n, spec.k), dtype=dtype)
        ri = li = 0
        right_vec = np.zeros(n, dtype=dtype)
        left_vec = np.zeros(n, dtype=dtype)
        for blk, rr, cc in layout:
            if blk.kind == "right_singular":
                right_inner[cc.start : cc.stop, ri] = _power_column(lam, blk.size + 1, dtype)
                ri += 1
            elif blk.kind == "left_singular":
                left_inner[rr.start : rr.stop, li] = _power_column(
                    np.conj(lam), blk.size + 1, dtype
                )
                li += 1
            elif blk.kind == "jordan" and blk.size == 1 and blk.value == lam:
                right_vec[cc.start] = 1.0
                left_vec[rr.start] = 1.0
        gamma = 1.0 / np.sqrt(1.0 + abs(lam) ** 2)
        witnesses.append(
            EigenvalueTruth(complex(lam), right_inner, right_vec, left_inner, left_vec, float(gamma))
        )

    truth = GroundTruth(
        n=n,
        k=spec.k,
        nrank=spec.nrank,
        r=spec.r,
        m_sum=spec.m_sum,
        n_sum=spec.n_sum,
        field=spec.field,
        finite=spec.finite_eigenvalues,
        witnesses=witnesses,
        p_inv=eye.copy(),
        q=eye.copy(),
        min_reducing=min_reducing,
        left_reducing=left_reducing,
        block_layout=layout,
    )
    return pencil, truth


def _orth_columns(m: np.ndarray) -> np.ndarray:
    if m.shape[1] == 0:
        return m
    q, _ = qr_positive(m)
    return q


def apply_equivalence(
    p: Pencil, gt: GroundTruth, left: np.ndarray, right: np.ndarray
) -> tuple[Pencil, GroundTruth]:
    """Replace the pencil by ``(L A R, L B R)`` and transform all ground
    truth consistently: right subspaces map through R^-1, left ones through
    L^-*, bases are re-orthonormalized, and gamma is recomputed from the
    transformed distinguished eigenvectors."""
    a2 = left @ p.a @ right
    b2 = left @ p.b @ right
    p2 = Pencil(a2, b2, p.scale_a, p.scale_b)

    def through_right(m):
        return None if m is None else np.linalg.solve(right, m)

    def through_left(m):
        return None if m is None else np.linalg.solve(left.conj().T, m)

    witnesses = []
    for w in gt.witnesses:
        ri = _orth_columns(through_right(w.right_inner))
        rv = through_right(w.right_vec.reshape(-1, 1))[:, 0]
        if ri.shape[1]:
            rv = rv - ri @ (ri.conj().T @ rv)
        rv = rv / np.linalg.norm(rv)
        li = _orth_columns(through_left(w.left_inner))
        lv = through_left(w.left_vec.reshape(-1, 1))[:, 0]
        if li.shape[1]:
            lv = lv - li @ (li.conj().T @ lv)
        lv = lv / np.linalg.norm(lv)
        gamma = abs(lv.conj() @ b2 @ rv) / np.sqrt(1.0 + abs(w.value) ** 2)
        witnesses.append(EigenvalueTruth(w.value, ri, rv, li, lv, float(gamma)))

    min_reducing = gt.min_reducing
    if min_reducing is not None:
        min_reducing = _orth_columns(through_right(min_reducing))
    left_reducing = gt.left_reducing
    if left_reducing is not None:
        left_reducing = _orth_columns(through_left(left_reducing))

    truth = GroundTruth(
        n=gt.n,
        k=gt.k,
        nrank=gt.nrank,
        r=gt.r,
        m_sum=gt.m_sum,
        n_sum=gt.n_sum,
        field=gt.field if not np.iscomplexobj(a2) else FieldKind.COMPLEX,
        finite=list(gt.finite),
        witnesses=witnesses,
        p_inv=None if gt.p_inv is None else left @ gt.p_inv,
        q=None if gt.q is None else through_right(gt.q),
        min_reducing=min_reducing,
        left_reducing=left_reducing,
        block_layout=gt.block_layout,
    )
    return p2, truth


def disguise(p: Pencil, gt: GroundTruth, kind: str, rng) -> tuple[Pencil, GroundTruth]:
    """Hide the block structure behind a random equivalence transform.

    ``orthogonal`` draws Haar-uniform unitary transforms (in the pencil's
    field); ``uniform_entries`` draws real matrices with i.i.d. U(0,1)
    entries, rejecting draws with condition number above 1e4 (at most 10
    attempts, then :class:`IllConditionedDisguise`).
    """
    gen = as_generator(rng)
    n = p.n
    if kind == "orthogonal":
        left, _ = qr_positive(gaussian_matrix(n, n, p.field, gen))
        right, _ = qr_positive(gaussian_matrix(n, n, p.field, gen))
        return apply_equivalence(p, gt, left, right)
    if kind == "uniform_entries":
        for _ in range(10):
            left = gen.uniform(size=(n, n))
            right = gen.uniform(size=(n, n))
            if np.linalg.cond(left) <= 1e4 and np.linalg.cond(right) <= 1e4:
                return apply_equivalence(p, gt, left, right)
        raise IllConditionedDisguise("no transform with condition number <= 1e4 in 10 draws")
    raise ValueError(f"unknown disguise kind {kind!r}")


# ---------------------------------------------------------------------------
# shipped pencils

_HMP8X8_A = np.array(
    [
        [-1, -1, -1, -1, -1, -1, -1, 0],
        [1, 0, 0, 0, 0, 0, 0, 0],
        [1, 2, 1, 1, 1, 1, 1, 0],
        [1, 2, 3, 3, 3, 3, 3, 0],
        [1, 2, 3, 2, 2, 2, 2, 0],
        [1, 2, 3, 4, 3, 3, 3, -1],
        [1, 2, 3, 4, 5, 5, 4, 1],
        [0, 0, 0, 0, 2, 2, 1, 2],
    ],
    dtype=np.float64,
)

_HMP8X8_B = np.array(
    [
        [-2, -2, -2, -2, -2, -2, -2, 0],
        [2, -1, -1, -1, -1, -1, -1, 0],
        [2, 5, 5, 5, 5, 5, 5, 0],
        [2, 5, 5, 4, 4, 4, 4, 0],
        [2, 5, 5, 6, 5, 5, 5, -1],
        [2, 5, 5, 6, 7, 7, 7, 1],
        [2, 5, 5, 6, 7, 6, 6, 1],
        [0, 0, 0, 0, 0, -1, -1, 0],
    ],
    dtype=np.float64,
)

# coefficient matrices of the two cubic 5 x 5 polynomial matrices whose
# operator determinants build the 25 x 25 pencil
_TPE_A1 = np.array([[0, 0, 4, 1, 0], [0, 5, 2, 0, 1], [6, 3, 1, 0, 0], [1, 0, 0, 0, 0], [0, 1, 0, 0, 0]], dtype=np.float64)
_TPE_B1 = np.array([[0, 0, 7, 0, 0], [0, 8, 0, -1, 0], [9, 0, 0, 0, -1], [0, 0, 0, 0, 0], [0, 0, 0, 0, 0]], dtype=np.float64)
_TPE_C1 = np.array([[0, 0, 0, 0, 0], [0, 0, 0, 0, 0], [10, 0, 0, 0, 0], [0, -1, 0, 0, 0], [0, 0, -1, 0, 0]], dtype=np.float64)
_TPE_A2 = np.array([[0, 0, 7, 1, 0], [0, 6, 9, 0, 1], [5, 8, 10, 0, 0], [1, 0, 0, 0, 0], [0, 1, 0, 0, 0]], dtype=np.float64)
_TPE_B2 = np.array([[0, 0, 4, 0, 0], [0, 3, 0, -1, 0], [2, 0, 0, 0, -1], [0, 0, 0, 0, 0], [0, 0, 0, 0, 0]], dtype=np.float64)
_TPE_C2 = np.array([[0, 0, 0, 0, 0], [0, 0, 0, 0, 0], [1, 0, 0, 0, 0], [0, -1, 0, 0, 0], [0, 0, -1, 0, 0]], dtype=np.float64)

# The nine finite eigenvalues of the delta25 pencil: lambda-components of the
# common roots of the two bivariate determinant polynomials, found with an
# independent symbolic resultant/companion computation (regenerated by the
# test suite).  Exactly one of them is real.
DELTA25_EIGENVALUES = (
    -2.4182797819566906 + 0j,
    -1.1330895050101324 - 0.3011559092904769j,
    -1.1330895050101324 + 0.3011559092904769j,
    -0.560850270703229 - 2.0355451419015385j,
    -0.560850270703229 + 2.0355451419015385j,
    0.07235921917005667 - 1.2248760671611425j,
    0.07235921917005667 + 1.2248760671611425j,
    0.08072044752164997 - 1.1123285330088233j,
    0.08072044752164997 + 1.1123285330088233j,
)

_BLOCKDIAG10_A20 = np.array(
    [[1, 0, 0, 0, 0], [0, 2, 0, 0, 0], [0, 0, 1, 1, 0], [0, 0, -1, 1, 0], [0, 0, 0, 0, 1]],
    dtype=np.float64,
)
_BLOCKDIAG10_B20 = np.array(
    [[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0], [0, 0, 0, 1, 0], [0, 0, 0, 0, 0]],
    dtype=np.float64,
)


def _partial_truth(p: Pencil, k: int, r: int, m_sum: int, n_sum: int, finite) -> GroundTruth:
    witnesses = [eig_witness(p, lam, k=k) for lam in finite]
    return GroundTruth(
        n=p.n,
        k=k,
        nrank=p.n - k,
        r=r,
        m_sum=m_sum,
        n_sum=n_sum,
        field=p.field,
        finite=list(finite),
        witnesses=witnesses,
    )


def paper_pencil(name: str) -> tuple[Pencil, GroundTruth]:
    """One of the three shipped pencils: ``hmp8x8``, ``delta25`` or
    ``blockdiag10``.  Matrices are exact (integer entries for hmp8x8 and
    blockdiag10); the ground truth is partial — no canonical transforms, but
    exact eigenvalues with numerically recovered kernel witnesses.

    Note on blockdiag10: besides the three advertised eigenvalues
    1+i, 1-i, 2 the matrices carry a fourth simple finite eigenvalue 1 (the
    trailing diagonal block contains ``1 - lambda * 1``); all four are
    declared here, verified by rank drops.
    """
    if name == "hmp8x8":
        p = Pencil(_HMP8X8_A.copy(), _HMP8X8_B.copy())
        return p, _partial_truth(p, k=2, r=3, m_sum=1, n_sum=2, finite=[1.0 / 3.0, 0.5])
    if name == "delta25":
        d0 = np.kron(_TPE_B1, _TPE_C2) - np.kron(_TPE_C1, _TPE_B2)
        d1 = np.kron(_TPE_C1, _TPE_A2) - np.kron(_TPE_A1, _TPE_C2)
        p = Pencil(d1, d0)
        return p, _partial_truth(p, k=4, r=21, m_sum=0, n_sum=0, finite=list(DELTA25_EIGENVALUES))
    if name == "blockdiag10":
        a = np.zeros((10, 10))
        b = np.zeros((10, 10))
        a[0, 4] = 1.0
        b[0, 3] = 1.0
        a[5:, 5:] = _BLOCKDIAG10_A20
        b[5:, 5:] = _BLOCKDIAG10_B20
        p = Pencil(a, b)
        finite = [1.0 + 1.0j, 1.0 - 1.0j, 2.0 + 0j, 1.0 + 0j]
        return p, _partial_truth(p, k=4, r=5, m_sum=1, n_sum=0, finite=finite)
    raise ValueError(f"unknown pencil {name!r}; expected hmp8x8, delta25 or blockdiag10")


# ---------------------------------------------------------------------------
# block grammar, e.g. "J1(0.5),J1(1/3),N1,L0,L1,LT0,LT2"

_TOKEN = re.compile(r"\s*(LT|[JNL])\s*(\d+)\s*(\(([^()]*)\))?\s*")


def _parse_scalar(text: str, pos: int) -> complex:
    s = text.strip().replace("i", "j").replace(" ", "")
    try:
        if "/" in s and "j" not in s:
            return complex(Fraction(s))
        return complex(s)
    except (ValueError, ZeroDivisionError):
        raise KcfParseError(f"cannot parse eigenvalue {text!r}", pos) from None


def parse_kcf_string(text: str) -> KcfSpec:
    """Parse the compact block grammar: ``J<size>(<eig>)`` for Jordan blocks
    (eigenvalue as float, fraction like 1/3, or complex like 1+2i),
    ``N<size>`` for nilpotent, ``L<m>`` / ``LT<n>`` for right/left singular
    blocks.  Blocks are comma separated."""
    blocks = []
    pos = 0
    for part in text.split(","):
        m = _TOKEN.fullmatch(part)
        if m is None:
            raise KcfParseError(f"cannot parse block {part.strip()!r}", pos)
        tag, size, value = m.group(1), int(m.group(2)), m.group(4)
        if tag == "J":
            if value is None:
                raise KcfParseError("Jordan block needs an eigenvalue, e.g. J1(0.5)", pos)
            blocks.append(jordan(size, _parse_scalar(value, pos)))
        elif value is not None:
            raise KcfParseError(f"{tag}{size} takes no eigenvalue", pos)
        elif tag == "N":
            blocks.append(nilpotent(size))
        elif tag == "L":
            blocks.append(right_singular(size))
        else:
            blocks.append(left_singular(size))
        pos += len(part) + 1
    if not blocks:
        raise KcfParseError("empty block list", 0)
    return KcfSpec(blocks)


# ---------------------------------------------------------------------------
# fixed corpus of structured pencils used across the verification suite

_CORPUS = [
    ("ex1-plain", "J1(1/2),J1(1/3),N1,L0,L1,LT0,LT2", None, 101),
    ("ex1-orth", "J1(1/2),J1(1/3),N1,L0,L1,LT0,LT2", "orthogonal", 102),
    ("ex1-uniform", "J1(1/2),J1(1/3),N1,L0,L1,LT0,LT2", "uniform_entries", 103),
    ("k1-mixed", "J1(2),N1,L1,LT1", "orthogonal", 104),
    ("k1-complex", "J1(1+2i),J1(-0.5i),L0,LT0", "orthogonal", 105),
    ("k2-wide", "J1(0.7),J1(-1.3),N1,L0,L2,LT1,LT0", "uniform_entries", 106),
    ("k3-thin", "J1(0.9),L0,L0,L1,LT0,LT0,LT2", "orthogonal", 107),
    ("k2-leftheavy", "J1(3),J1(-2),L0,L0,LT1,LT2", "orthogonal", 108),
    ("k1-minimal", "J1(0.5),L0,LT0", None, 109),
    ("k2-complex", "J1(1i),J1(2),N1,L1,L0,LT0,LT1", "uniform_entries", 110),
]


def corpus() -> list[tuple[str, Pencil, GroundTruth]]:
    """Ten structured pencils (assembled, some disguised with fixed seeds)
    spanning k = 1..3, both fields, and all block kinds."""
    out = []
    for name, spec_text, disguise_kind, seed in _CORPUS:
        p, gt = assemble(parse_kcf_string(spec_text))
        if disguise_kind is not None:
            p, gt = disguise(p, gt, disguise_kind, RngState(seed))
        out.append((name, p, gt))
    return out
