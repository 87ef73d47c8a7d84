"""The three randomized eigensolvers for singular pencils.

All three turn the singular pencil into a generically regular problem using
random draws keyed to the configuration seed:

* ``modify``  adds a rank-k modification ``tau * (U D_A V* - lambda U D_B V*)``,
* ``project`` compresses to the (n-k) x (n-k) pencil ``Up* (A - lambda B) Vp``
  with ``[U Up]``, ``[V Vp]`` unitary,
* ``augment`` borders the pencil to size (n+k) with ``U T, S V*`` coupling
  blocks built from random diagonal pencils.

Eigenvalues of the original pencil are recovered by thresholding the
orthogonality statistics (sigma_i, tau_i) and the reciprocal condition
number gamma_i = |y_i* B x_i| (1+|lambda_i|^2)^(-1/2); every computed
eigenvalue is classified into one of the disjoint groups (true finite /
true infinite / prescribed / random right / random left) that the spectrum
of the transformed pencil decomposes into.

Solvers scale the input to unit 1-norms internally and report eigenvalues
mapped back to the caller's frame; sigma/tau/gamma are quantities of the
scaled problem (which is what the thresholds are calibrated for).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .matcore import FieldKind, SingularPencilSuspected, generalized_eigen, qr_positive
from .oracle import gamma_exact
from .pencil import Pencil, scale_one_norm
from .randstat import RngState, as_generator, gaussian_matrix

__all__ = [
    "MethodConfig",
    "EigRecord",
    "SolveReport",
    "GenericityFailure",
    "DistinctnessFailure",
    "MatchFailure",
    "solve_modify",
    "solve_project",
    "solve_augment",
    "solve",
    "cross_check",
    "CrossCheckReport",
    "CrossRow",
    "chordal_distance",
]

_EPS = np.finfo(np.float64).eps

GROUPS = ("true_finite", "true_infinite", "prescribed", "random_right", "random_left", "rejected")

#: chordal gap used when matching eigenvalues against prescribed values or
#: across methods; ambiguity within the gap raises MatchFailure
MATCH_GUARD = 1e-6


class GenericityFailure(Exception):
    """The random draws kept producing a pencil the backend could not solve."""


class DistinctnessFailure(Exception):
    """Could not draw diagonal pencils with pairwise distinct eigenvalues."""


class MatchFailure(Exception):
    """Ambiguous or failed eigenvalue pairing."""


@dataclass(frozen=True)
class MethodConfig:
    """Method selection plus extraction thresholds.

    ``tau`` scales the modification (ignored by project/augment), ``delta1``
    thresholds the orthogonality statistics, ``delta2`` the reciprocal
    condition number.  ``field`` is the field of the random draws, which may
    be complex even for a real pencil (and preferably is: the left tail of
    the extraction ratio is heavier for real draws).
    """

    method: str = "modify"
    field: FieldKind = FieldKind.COMPLEX
    tau: float = 1e-2
    delta1: float = math.sqrt(_EPS)
    delta2: float = 100.0 * _EPS
    seed: int = 0
    resample_limit: int = 10

    def __post_init__(self):
        if self.method not in ("modify", "project", "augment"):
            raise ValueError(f"unknown method {self.method!r}")
        object.__setattr__(self, "field", FieldKind.parse(self.field))
        if self.tau == 0:
            raise ValueError("tau must be nonzero")
        if self.delta1 <= 0 or self.delta2 <= 0:
            raise ValueError("thresholds must be positive")


@dataclass
class EigRecord:
    """One computed eigenvalue with its extraction statistics.

    ``alpha, beta`` are the homogeneous eigenvalue in the caller's frame;
    ``alpha_scaled, beta_scaled`` in the internally scaled frame the
    statistics refer to.  ``group`` is the classification result.
    """

    alpha: complex
    beta: complex
    alpha_scaled: complex
    beta_scaled: complex
    right: np.ndarray
    left: np.ndarray
    sigma: float
    tau: float
    gamma: float
    group: str

    @property
    def value(self) -> complex:
        return self.alpha / self.beta if self.beta != 0 else complex(np.inf)

    @property
    def value_scaled(self) -> complex:
        return self.alpha_scaled / self.beta_scaled if self.beta_scaled != 0 else complex(np.inf)

    @property
    def is_finite(self) -> bool:
        return self.beta != 0


@dataclass
class SolveReport:
    """Aggregated solve result: records, class counts, and the random
    modification artifacts kept for auditing."""

    method: str
    n: int
    k: int
    config: MethodConfig
    records: list[EigRecord]
    artifacts: dict
    scale_a: float
    scale_b: float
    resamples: int = 0

    @property
    def finite_eigenvalues(self) -> list[complex]:
        vals = [r.value for r in self.records if r.group == "true_finite"]
        return sorted(vals, key=lambda z: (z.real, z.imag))

    @property
    def counts(self) -> dict:
        out = {g: 0 for g in GROUPS}
        for r in self.records:
            out[r.group] += 1
        return out

    def to_json_dict(self, include_vectors: bool = False) -> dict:
        recs = []
        for r in self.records:
            d = {
                "alpha": [r.alpha.real, r.alpha.imag],
                "beta": [r.beta.real, r.beta.imag],
                "lambda": None if not r.is_finite else [r.value.real, r.value.imag],
                "sigma": r.sigma,
                "tau": r.tau,
                "gamma": r.gamma,
                "group": r.group,
            }
            if include_vectors:
                d["right"] = [[z.real, z.imag] for z in np.asarray(r.right, dtype=complex)]
                d["left"] = [[z.real, z.imag] for z in np.asarray(r.left, dtype=complex)]
            recs.append(d)
        return {
            "schema": "singpencil/1",
            "method": self.method,
            "field": self.config.field.value,
            "n": self.n,
            "k": self.k,
            "tau": self.config.tau,
            "delta1": self.config.delta1,
            "delta2": self.config.delta2,
            "seed": self.config.seed,
            "scale_a": self.scale_a,
            "scale_b": self.scale_b,
            "resamples": self.resamples,
            "counts": self.counts,
            "finite_eigenvalues": [[z.real, z.imag] for z in self.finite_eigenvalues],
            "records": recs,
        }


def chordal_distance(a1: complex, b1: complex, a2: complex, b2: complex) -> float:
    """Chordal metric between homogeneous eigenvalues (infinity-safe)."""
    n1 = math.hypot(abs(a1), abs(b1))
    n2 = math.hypot(abs(a2), abs(b2))
    if n1 == 0 or n2 == 0:
        return math.inf
    return abs(a1 * b2 - a2 * b1) / (n1 * n2)


# ---------------------------------------------------------------------------
# random draws


def _draw_unitary_split(gen, n: int, k: int, fld: FieldKind):
    q, _ = qr_positive(gaussian_matrix(n, n, fld, gen))
    return q[:, :k], q[:, k:]


def _draw_distinct_diagonals(gen, k: int, fld: FieldKind, count: int, limit: int):
    """``count`` diagonal pencil pairs (as k-vectors) whose pooled homogeneous
    eigenvalues are pairwise separated by at least MATCH_GUARD chordally."""
    for _ in range(limit):
        vecs = [gaussian_matrix(k, 1, fld, gen)[:, 0] for _ in range(2 * count)]
        pairs = []
        for j in range(count):
            pairs.extend(zip(vecs[2 * j], vecs[2 * j + 1]))
        ok = all(
            chordal_distance(*pairs[i], *pairs[j]) >= MATCH_GUARD
            for i in range(len(pairs))
            for j in range(i + 1, len(pairs))
        )
        if ok and all(math.hypot(abs(a), abs(b)) > 0 for a, b in pairs):
            return vecs
    raise DistinctnessFailure(
        f"no diagonal draw with chordal separation {MATCH_GUARD} in {limit} attempts"
    )


# ---------------------------------------------------------------------------
# shared classification


def _classify(
    alpha,
    beta,
    sig_test,
    tau_test,
    thresholds,
    gammas,
    prescribed_pairs,
    delta1: float,
    delta2: float,
):
    groups = []
    for i in range(len(alpha)):
        below_s = sig_test[i] < thresholds[i]
        below_t = tau_test[i] < thresholds[i]
        if below_s and below_t:
            if gammas[i] > delta2:
                groups.append("true_finite")
            elif abs(beta[i]) < delta1:
                groups.append("true_infinite")
            else:
                groups.append("rejected")
            continue
        dists = [chordal_distance(alpha[i], beta[i], pa, pb) for pa, pb in prescribed_pairs]
        if dists and min(dists) <= MATCH_GUARD:
            groups.append("prescribed")
        elif below_s and not below_t:
            groups.append("random_right")
        elif below_t and not below_s:
            groups.append("random_left")
        else:
            groups.append("rejected")
    return groups


def _make_records(scale_a, scale_b, alpha, beta, vr, vl, sig, tav, gammas, groups):
    records = []
    for i in range(len(alpha)):
        ao = alpha[i] * scale_a
        bo = beta[i] * scale_b
        norm = math.hypot(abs(ao), abs(bo))
        records.append(
            EigRecord(
                alpha=complex(ao / norm),
                beta=complex(bo / norm),
                alpha_scaled=complex(alpha[i]),
                beta_scaled=complex(beta[i]),
                right=vr[:, i],
                left=vl[:, i],
                sigma=float(sig[i]),
                tau=float(tav[i]),
                gamma=float(gammas[i]),
                group=groups[i],
            )
        )
    return records


def _stack(triples):
    alpha = np.array([t.alpha for t in triples])
    beta = np.array([t.beta for t in triples])
    vr = np.column_stack([t.right for t in triples])
    vl = np.column_stack([t.left for t in triples])
    return alpha, beta, vr, vl


# ---------------------------------------------------------------------------
# method cores (explicit draws, scaled pencil in, records out)


def _modify_core(ps: Pencil, k: int, cfg: MethodConfig, u, v, d_a, d_b):
    mod_a = u @ (d_a[:, None] * v.conj().T)
    mod_b = u @ (d_b[:, None] * v.conj().T)
    triples = generalized_eigen(ps.a + cfg.tau * mod_a, ps.b + cfg.tau * mod_b)
    alpha, beta, vr, vl = _stack(triples)
    sig = np.linalg.norm(v.conj().T @ vr, axis=0)
    tav = np.linalg.norm(u.conj().T @ vl, axis=0)
    gammas = np.abs(np.einsum("ij,ij->j", vl.conj(), ps.b @ vr)) * np.abs(beta)
    thresholds = np.full(len(alpha), cfg.delta1)
    prescribed = list(zip(d_a, d_b))
    groups = _classify(alpha, beta, sig, tav, thresholds, gammas, prescribed, cfg.delta1, cfg.delta2)
    records = _make_records(ps.scale_a, ps.scale_b, alpha, beta, vr, vl, sig, tav, gammas, groups)
    return records, {"u": u, "v": v, "d_a": d_a, "d_b": d_b}


def _project_core(ps: Pencil, k: int, cfg: MethodConfig, u, u_perp, v, v_perp):
    a22 = u_perp.conj().T @ ps.a @ v_perp
    b22 = u_perp.conj().T @ ps.b @ v_perp
    triples = generalized_eigen(a22, b22)
    alpha, beta, vr, vl = _stack(triples)

    # orthogonality statistics in homogeneous form: multiplying the tests
    # sigma_i = ||U*(A - lam B) Vp x||, tau_i = ||y* Up*(A - lam B) V|| and the
    # acceptance threshold delta1 (1+|lam|) by |beta| leaves them equivalent
    # and well defined at infinite eigenvalues
    a_uv = u.conj().T @ ps.a @ v_perp
    b_uv = u.conj().T @ ps.b @ v_perp
    sig_h = np.linalg.norm(beta * (a_uv @ vr) - alpha * (b_uv @ vr), axis=0)
    a_pv = vl.conj().T @ (u_perp.conj().T @ ps.a @ v)
    b_pv = vl.conj().T @ (u_perp.conj().T @ ps.b @ v)
    tau_h = np.linalg.norm(beta[:, None] * a_pv - alpha[:, None] * b_pv, axis=1)
    thresholds = cfg.delta1 * (np.abs(alpha) + np.abs(beta))

    gammas = np.abs(np.einsum("ij,ij->j", vl.conj(), b22 @ vr)) * np.abs(beta)
    groups = _classify(alpha, beta, sig_h, tau_h, thresholds, gammas, [], cfg.delta1, cfg.delta2)
    finite = np.abs(beta) > 0
    denom = np.where(finite, np.abs(beta), 1.0)
    sig = np.where(finite, sig_h / denom, sig_h)
    tav = np.where(finite, tau_h / denom, tau_h)
    records = _make_records(ps.scale_a, ps.scale_b, alpha, beta, vr, vl, sig, tav, gammas, groups)
    return records, {"u": u, "v": v, "u_perp": u_perp, "v_perp": v_perp}


def _augment_core(ps: Pencil, k: int, cfg: MethodConfig, u, v, s_a, s_b, t_a, t_b):
    n = ps.n
    dtype = np.result_type(ps.a.dtype, u.dtype)
    zero = np.zeros((k, k), dtype=dtype)
    a_aug = np.block([[ps.a, u * t_a[None, :]], [s_a[:, None] * v.conj().T, zero]])
    b_aug = np.block([[ps.b, u * t_b[None, :]], [s_b[:, None] * v.conj().T, zero]])
    triples = generalized_eigen(a_aug, b_aug)
    alpha, beta, vr, vl = _stack(triples)
    sig = np.linalg.norm(vr[n:], axis=0)
    tav = np.linalg.norm(vl[n:], axis=0)
    gammas = np.abs(np.einsum("ij,ij->j", vl[:n].conj(), ps.b @ vr[:n])) * np.abs(beta)
    thresholds = np.full(len(alpha), cfg.delta1)
    prescribed = list(zip(s_a, s_b)) + list(zip(t_a, t_b))
    groups = _classify(alpha, beta, sig, tav, thresholds, gammas, prescribed, cfg.delta1, cfg.delta2)
    records = _make_records(ps.scale_a, ps.scale_b, alpha, beta, vr, vl, sig, tav, gammas, groups)
    return records, {"u": u, "v": v, "s_a": s_a, "s_b": s_b, "t_a": t_a, "t_b": t_b}


# ---------------------------------------------------------------------------
# public solvers


def _prepare(p: Pencil, k: int, cfg: MethodConfig | None, method: str):
    cfg = replace(cfg, method=method) if cfg is not None else MethodConfig(method=method)
    if int(k) != k or not (1 <= k < p.n):
        raise ValueError(f"k must satisfy 1 <= k < n (got k={k}, n={p.n})")
    return scale_one_norm(p), int(k), cfg


def _run(ps, k, cfg, rng, draw_and_solve):
    gen = as_generator(rng if rng is not None else RngState(cfg.seed))
    failures = []
    for attempt in range(cfg.resample_limit):
        try:
            records, artifacts = draw_and_solve(gen)
        except SingularPencilSuspected as exc:
            failures.append(exc)
            continue
        return SolveReport(
            method=cfg.method,
            n=ps.n,
            k=k,
            config=cfg,
            records=records,
            artifacts=artifacts,
            scale_a=ps.scale_a,
            scale_b=ps.scale_b,
            resamples=attempt,
        )
    raise GenericityFailure(
        f"{cfg.method} failed for {cfg.resample_limit} independent draws; last error: {failures[-1]}"
    )


def solve_modify(p: Pencil, k: int, cfg: MethodConfig | None = None, rng=None) -> SolveReport:
    """Rank-completing modification solver.

    Draws Stiefel-uniform U, V (n x k) and random diagonal D_A, D_B, solves
    ``A + tau U D_A V* - lambda (B + tau U D_B V*)``, and classifies each
    eigenpair from sigma_i = ||V* x_i||, tau_i = ||U* y_i|| and gamma_i
    (computed with the original B).  True finite eigenvalues satisfy
    ``max(sigma_i, tau_i) < delta1`` and ``gamma_i > delta2``.
    """
    ps, k, cfg = _prepare(p, k, cfg, "modify")

    def step(gen):
        u, _ = _draw_unitary_split(gen, ps.n, k, cfg.field)
        v, _ = _draw_unitary_split(gen, ps.n, k, cfg.field)
        d_a, d_b = _draw_distinct_diagonals(gen, k, cfg.field, 1, cfg.resample_limit)
        return _modify_core(ps, k, cfg, u, v, d_a, d_b)

    return _run(ps, k, cfg, rng, step)


def solve_project(p: Pencil, k: int, cfg: MethodConfig | None = None, rng=None) -> SolveReport:
    """Normal-rank projection solver: solves the (n-k) x (n-k) pencil
    ``Up* (A - lambda B) Vp`` for random unitary ``[U Up]``, ``[V Vp]``.
    Acceptance threshold scales with the eigenvalue: ``delta1 (1+|lambda|)``.
    """
    ps, k, cfg = _prepare(p, k, cfg, "project")

    def step(gen):
        u, u_perp = _draw_unitary_split(gen, ps.n, k, cfg.field)
        v, v_perp = _draw_unitary_split(gen, ps.n, k, cfg.field)
        return _project_core(ps, k, cfg, u, u_perp, v, v_perp)

    return _run(ps, k, cfg, rng, step)


def solve_augment(p: Pencil, k: int, cfg: MethodConfig | None = None, rng=None) -> SolveReport:
    """Augmentation solver: borders the pencil to size n+k with coupling
    blocks ``U T_A``/``S_A V*`` (and the B analogues) built from random
    diagonal pencils with 2k pairwise distinct prescribed eigenvalues."""
    ps, k, cfg = _prepare(p, k, cfg, "augment")

    def step(gen):
        u, _ = _draw_unitary_split(gen, ps.n, k, cfg.field)
        v, _ = _draw_unitary_split(gen, ps.n, k, cfg.field)
        s_a, s_b, t_a, t_b = _draw_distinct_diagonals(gen, k, cfg.field, 2, cfg.resample_limit)
        return _augment_core(ps, k, cfg, u, v, s_a, s_b, t_a, t_b)

    return _run(ps, k, cfg, rng, step)


_SOLVERS = {"modify": solve_modify, "project": solve_project, "augment": solve_augment}


def solve(p: Pencil, k: int, cfg: MethodConfig, rng=None) -> SolveReport:
    """Dispatch on ``cfg.method``."""
    return _SOLVERS[cfg.method](p, k, cfg, rng)


# ---------------------------------------------------------------------------
# cross-method consistency


@dataclass
class CrossRow:
    value: complex
    value_scaled: complex
    gammas: tuple[float, float, float]
    gamma_reference: float

    @property
    def discrepancy(self) -> float:
        return max(self.gammas) - min(self.gammas)


@dataclass
class CrossCheckReport:
    rows: list[CrossRow]
    max_discrepancy: float
    reports: dict


def cross_check(
    p: Pencil, k: int, seed: int, field: FieldKind = FieldKind.COMPLEX, cfg: MethodConfig | None = None
) -> CrossCheckReport:
    """Run all three methods on one shared unitary draw and compare the
    per-eigenvalue gamma values, which agree in exact arithmetic.

    Eigenvalues are paired across methods chordally with gap guard
    ``MATCH_GUARD``; missing or ambiguous matches raise
    :class:`MatchFailure`.  The reference column holds the exact
    gamma(lambda) of the scaled pencil for each matched eigenvalue.
    """
    base = cfg if cfg is not None else MethodConfig()
    fld = FieldKind.parse(field)
    ps, k, _ = _prepare(p, k, base, base.method)
    gen = RngState(seed).generator()
    u, u_perp = _draw_unitary_split(gen, ps.n, k, fld)
    v, v_perp = _draw_unitary_split(gen, ps.n, k, fld)
    d_a, d_b = _draw_distinct_diagonals(gen, k, fld, 1, base.resample_limit)
    s_a, s_b, t_a, t_b = _draw_distinct_diagonals(gen, k, fld, 2, base.resample_limit)

    cfgs = {m: replace(base, method=m, field=fld, seed=seed) for m in _SOLVERS}
    cores = {
        "modify": lambda: _modify_core(ps, k, cfgs["modify"], u, v, d_a, d_b),
        "project": lambda: _project_core(ps, k, cfgs["project"], u, u_perp, v, v_perp),
        "augment": lambda: _augment_core(ps, k, cfgs["augment"], u, v, s_a, s_b, t_a, t_b),
    }
    reports = {}
    for name, run in cores.items():
        records, artifacts = run()
        reports[name] = SolveReport(
            method=name,
            n=ps.n,
            k=k,
            config=cfgs[name],
            records=records,
            artifacts=artifacts,
            scale_a=ps.scale_a,
            scale_b=ps.scale_b,
        )

    finite = {m: [r for r in rep.records if r.group == "true_finite"] for m, rep in reports.items()}
    counts = {m: len(v) for m, v in finite.items()}
    if len(set(counts.values())) != 1:
        raise MatchFailure(f"methods disagree on the number of finite eigenvalues: {counts}")

    rows = []
    for ref in finite["modify"]:
        gammas = [ref.gamma]
        for other in ("project", "augment"):
            dists = [
                chordal_distance(ref.alpha_scaled, ref.beta_scaled, r.alpha_scaled, r.beta_scaled)
                for r in finite[other]
            ]
            hits = [i for i, d in enumerate(dists) if d <= MATCH_GUARD]
            if len(hits) != 1:
                raise MatchFailure(
                    f"{len(hits)} candidates in {other} for eigenvalue {ref.value} (guard {MATCH_GUARD})"
                )
            gammas.append(finite[other][hits[0]].gamma)
        # the computed eigenvalue carries an O(n eps) error, so the kernel
        # detection tolerance must sit above it
        lam = ref.value_scaled
        tol = 100 * ps.n * _EPS * (np.linalg.norm(ps.a, "fro") + abs(lam) * np.linalg.norm(ps.b, "fro"))
        g_ref = gamma_exact(ps, lam, k=k, tol=tol)
        rows.append(CrossRow(ref.value, lam, tuple(gammas), g_ref))

    max_disc = max((row.discrepancy for row in rows), default=0.0)
    return CrossCheckReport(rows=rows, max_discrepancy=max_disc, reports=reports)
