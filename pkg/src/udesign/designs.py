"""Weighted unitary t-designs: representation, certification and a gallery.

A weighted set (D, w) of projective unitaries is a t-design when its t-th
moment operator matches the Haar average, or equivalently when the frame
potential sum_{x,y} w(x)w(y)|tr(U(x)†U(y))|^(2t) meets its lower bound
gamma(t, d) exactly.  This module certifies sets against both criteria,
computes gamma(t, d) by enumeration, and holds the known small designs used
throughout the package.
"""

from __future__ import annotations

import itertools
from bisect import bisect_left
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidInputError, ResourceLimitError
from .linalg import ATOL_ALG, assert_unitary, dag, permutation_operator, swap_operator

# Tolerance on the frame-potential gap for design certification.
ATOL_CERT = 1e-8
# Two unitaries are treated as phase-equivalent when |tr(U†V)|² >= d² - DEDUP_TOL.
DEDUP_TOL = 1e-6
# Enumeration guard for gamma(t, d): S_t is enumerated exhaustively.
MAX_GAMMA_T = 9

_PAULI = {
    'I': np.eye(2, dtype=complex),
    'X': np.array([[0, 1], [1, 0]], dtype=complex),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'Z': np.array([[1, 0], [0, -1]], dtype=complex),
}
_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_PHASE = np.array([[1, 0], [0, 1j]], dtype=complex)

GALLERY_NAMES = ('utof', 'pu2_11pt', 'pu2_clifford12', 'pu2_clifford24', 'pu2_600cell')


def canonical_phase(u: np.ndarray) -> np.ndarray:
    """Rescale by a phase so the largest-modulus entry (row-major first among
    ties) is real positive.  Stable anchor for dedup and file round-trips;
    ties are resolved with a small tolerance so float noise cannot flip the
    anchor between computation routes."""
    u = np.asarray(u, dtype=complex)
    flat = u.reshape(-1)
    mods = np.abs(flat)
    top = mods.max()
    k = int(np.argmax(mods >= top - 1e-12 * (1.0 + top)))
    pivot = flat[k]
    if pivot.real > 0 and abs(pivot.imag) <= 1e-14 * pivot.real:
        return u                       # already canonical; keep file round-trips exact
    return u * (np.conj(pivot) / np.abs(pivot))


@dataclass(frozen=True)
class WeightedUnitarySet:
    """Finite weighted subset of PU(d): unitaries with positive weights.

    Weights must be positive and sum to one; elements are phase-canonicalized
    on construction.  Phase-distinctness is an ingestion-level invariant,
    checked by :func:`assert_phase_distinct` at the file boundary and after
    group closure (optimizer-internal sets may transiently contain
    phase-equivalent copies).
    """

    dim: int
    unitaries: np.ndarray    # (n, d, d)
    weights: np.ndarray      # (n,)

    def __post_init__(self):
        unitaries = np.asarray(self.unitaries, dtype=complex)
        weights = np.asarray(self.weights, dtype=float)
        if unitaries.ndim != 3 or unitaries.shape[1:] != (self.dim, self.dim):
            raise InvalidInputError(
                f"unitaries must have shape (n, {self.dim}, {self.dim}), got {unitaries.shape}")
        if weights.shape != (unitaries.shape[0],):
            raise InvalidInputError("one weight per element required")
        if unitaries.shape[0] == 0:
            raise InvalidInputError("a weighted set needs at least one element")
        if np.any(weights <= 0):
            raise InvalidInputError("all weights must be strictly positive")
        if abs(weights.sum() - 1.0) > ATOL_ALG:
            raise InvalidInputError(f"weights sum to {weights.sum():.12f}, expected 1")
        ident = np.eye(self.dim)
        residuals = np.linalg.norm(np.einsum('nba,nbc->nac', unitaries.conj(), unitaries) - ident,
                                   axis=(1, 2))
        if residuals.max() > ATOL_ALG:
            raise InvalidInputError(f"element {int(residuals.argmax())} is not unitary")
        unitaries = np.array([canonical_phase(u) for u in unitaries])
        unitaries.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, 'unitaries', unitaries)
        object.__setattr__(self, 'weights', weights)

    def __len__(self) -> int:
        return self.unitaries.shape[0]

    def gram(self) -> np.ndarray:
        """Matrix of overlaps tr(U(x)† U(y))."""
        flat = self.unitaries.reshape(len(self), -1)
        return flat.conj() @ flat.T


def uniform_set(dim: int, unitaries) -> WeightedUnitarySet:
    """Weighted set with uniform weights 1/n."""
    unitaries = np.asarray(unitaries, dtype=complex)
    n = unitaries.shape[0]
    return WeightedUnitarySet(dim, unitaries, np.full(n, 1.0 / n))


def assert_phase_distinct(s: WeightedUnitarySet, dedup_tol: float = DEDUP_TOL) -> None:
    """Raise if two elements are phase-equivalent, |tr(U†V)|² >= d² - tol."""
    overlap = np.abs(s.gram()) ** 2
    np.fill_diagonal(overlap, 0.0)
    worst = overlap.max() if len(s) > 1 else 0.0
    if worst >= s.dim ** 2 - dedup_tol:
        raise InvalidInputError(
            f"set contains phase-equivalent elements (max off-diagonal |tr|² = {worst:.9f})")


def merge_phase_duplicates(s: WeightedUnitarySet, dedup_tol: float = DEDUP_TOL) -> WeightedUnitarySet:
    """Combine the weights of phase-equivalent elements, keeping first seen."""
    kept: list[int] = []
    weights: list[float] = []
    threshold = s.dim ** 2 - dedup_tol
    for i, u in enumerate(s.unitaries):
        for pos, j in enumerate(kept):
            if abs(np.vdot(s.unitaries[j], u)) ** 2 >= threshold:
                weights[pos] += s.weights[i]
                break
        else:
            kept.append(i)
            weights.append(float(s.weights[i]))
    return WeightedUnitarySet(s.dim, s.unitaries[kept], np.array(weights))


def frame_potential(s: WeightedUnitarySet, t: int) -> float:
    """Double sum sum_{x,y} w(x) w(y) |tr(U(x)† U(y))|^(2t)."""
    if t < 1:
        raise InvalidInputError(f"t must be >= 1, got {t}")
    overlap2 = np.abs(s.gram()) ** 2
    return float(s.weights @ overlap2 ** t @ s.weights)


def _longest_increasing_run(seq: tuple[int, ...]) -> int:
    # patience sorting: tails[k] = smallest tail of an increasing subsequence
    # of length k+1
    tails: list[int] = []
    for x in seq:
        k = bisect_left(tails, x)
        if k == len(tails):
            tails.append(x)
        else:
            tails[k] = x
    return len(tails)


@lru_cache(maxsize=None)
def gamma(t: int, d: int) -> int:
    """Haar average of |tr U|^(2t) on PU(d), as an exact integer.

    Counts the permutations of S_t whose one-line form has no increasing
    subsequence longer than d.  Equals t! once d >= t, and the Catalan
    number (2t)!/(t!(t+1)!) at d = 2.
    """
    if t < 1 or d < 2:
        raise InvalidInputError(f"need t >= 1 and d >= 2, got t={t}, d={d}")
    if t > MAX_GAMMA_T:
        raise ResourceLimitError(f"gamma enumeration capped at t <= {MAX_GAMMA_T}, got t={t}")
    if d >= t:
        import math
        return math.factorial(t)
    return sum(1 for p in itertools.permutations(range(1, t + 1))
               if _longest_increasing_run(p) <= d)


def haar_moment(t: int, d: int) -> np.ndarray:
    """Haar average of U^⊗t ⊗ (U^⊗t)† on (C^d)^⊗2t, closed form for t <= 2.

    t = 1 gives T/d with T the swap; t = 2 combines the four permutation
    operators P_3412, P_4321, P_4312, P_3421 with coefficients 1/(d²-1) and
    -1/(d(d²-1)).
    """
    if d < 2:
        raise InvalidInputError(f"dimension must be >= 2, got {d}")
    if t == 1:
        return swap_operator(d) / d
    if t == 2:
        c1 = 1.0 / (d * d - 1)
        c2 = 1.0 / (d * (d * d - 1))
        return (c1 * (permutation_operator((3, 4, 1, 2), d) + permutation_operator((4, 3, 2, 1), d))
                - c2 * (permutation_operator((4, 3, 1, 2), d) + permutation_operator((3, 4, 2, 1), d)))
    raise InvalidInputError(f"exact moment operators are available for t in {{1, 2}}, got t={t}")


def design_moment(s: WeightedUnitarySet, t: int) -> np.ndarray:
    """Weighted moment operator sum_x w(x) U(x)^⊗t ⊗ (U(x)^⊗t)†."""
    dim = s.dim ** (2 * t)
    acc = np.zeros((dim, dim), dtype=complex)
    for w, u in zip(s.weights, s.unitaries):
        upow = u
        for _ in range(t - 1):
            upow = np.kron(upow, u)
        acc += w * np.kron(upow, dag(upow))
    return acc


@dataclass(frozen=True)
class DesignCertificate:
    """Outcome of the potential-gap test, with the moment residual at t <= 2."""

    t: int
    potential: float
    gamma: float
    gap: float
    moment_residual: float | None
    passed: bool

    def __post_init__(self):
        if self.gap < -ATOL_CERT:
            raise InvalidInputError(
                f"potential gap {self.gap:.3e} violates the lower bound; numerical trouble")


def certify(s: WeightedUnitarySet, t: int, atol_cert: float = ATOL_CERT) -> DesignCertificate:
    """Certify a weighted set as a t-design through the potential gap.

    The gap potential - gamma(t, d) is nonnegative and vanishes exactly on
    designs; for t <= 2 the moment-operator residual is also computed (it is
    the square root of the gap, so the two criteria agree by construction).
    """
    pot = frame_potential(s, t)
    g = float(gamma(t, s.dim))
    gap = pot - g
    residual = None
    if t <= 2:
        residual = float(np.linalg.norm(design_moment(s, t) - haar_moment(t, s.dim)))
    return DesignCertificate(t=t, potential=pot, gamma=g, gap=gap,
                             moment_residual=residual, passed=bool(gap <= atol_cert))


def moment_residual_tol(atol_cert: float, t: int, d: int) -> float:
    """Residual threshold matched to the gap tolerance."""
    return np.sqrt(atol_cert) * d ** t


def quat_to_unitary(r, atol: float = ATOL_ALG) -> np.ndarray:
    """Unit quaternion (r0, r1, r2, r3) -> r0·I + i(r1·X + r2·Y + r3·Z).

    The map identifies PU(2) with the projective 3-sphere and preserves
    distances: |tr(U†V)|² = 4<r, s>².
    """
    r = np.asarray(r, dtype=float)
    if r.shape != (4,):
        raise InvalidInputError(f"expected a 4-vector, got shape {r.shape}")
    if abs(np.linalg.norm(r) - 1.0) > atol:
        raise InvalidInputError(f"quaternion norm is {np.linalg.norm(r):.9f}, expected 1")
    return (r[0] * _PAULI['I']
            + 1j * (r[1] * _PAULI['X'] + r[2] * _PAULI['Y'] + r[3] * _PAULI['Z']))


def group_closure(generators, max_order: int = 10_000,
                  dedup_tol: float = DEDUP_TOL) -> WeightedUnitarySet:
    """Projective closure of the generated group, uniform weights.

    Breadth-first multiplication with phase-equivalence dedup; raises once
    the closure exceeds ``max_order`` elements.
    """
    gens = [assert_unitary(g) for g in generators]
    if not gens:
        raise InvalidInputError("need at least one generator")
    d = gens[0].shape[0]
    threshold = d * d - dedup_tol
    elements = [canonical_phase(np.eye(d, dtype=complex))]
    frontier = list(elements)
    while frontier:
        fresh = []
        for u in frontier:
            for g in gens:
                cand = canonical_phase(g @ u)
                if not any(abs(np.vdot(e, cand)) ** 2 >= threshold for e in elements):
                    elements.append(cand)
                    fresh.append(cand)
                    if len(elements) > max_order:
                        raise ResourceLimitError(
                            f"group closure exceeded max_order = {max_order}")
        frontier = fresh
    return uniform_set(d, np.array(elements))


def unitary_operator_frame(n: int, d: int) -> WeightedUnitarySet:
    """Unweighted 1-design of n >= d² unitaries with matrix elements
    <j|U_m|k> = exp(2πi jk/d + 2πi (j + kd) m/n)/sqrt(d)."""
    if n < d * d:
        raise InvalidInputError(f"a 1-design needs at least d² = {d * d} elements, got n={n}")
    j = np.arange(d)[:, None]
    k = np.arange(d)[None, :]
    ops = []
    for m in range(n):
        phase = 2 * np.pi * (j * k / d + (j + k * d) * m / n)
        ops.append(np.exp(1j * phase) / np.sqrt(d))
    return uniform_set(d, np.array(ops))


def _pu2_11pt() -> WeightedUnitarySet:
    a = 1.0 / np.sqrt(3.0)
    b = np.sqrt(2.0 / 3.0)
    columns = [
        (1, 0, 0, 0),
        (0, a, a, a), (0, -a, a, a), (0, a, -a, a), (0, a, a, -a),
        (a, b, 0, 0), (a, -b, 0, 0),
        (a, 0, b, 0), (a, 0, -b, 0),
        (a, 0, 0, b), (a, 0, 0, -b),
    ]
    unitaries = np.array([quat_to_unitary(np.array(c, dtype=float)) for c in columns])
    weights = np.array([1 / 16] + [3 / 32] * 10)
    return WeightedUnitarySet(2, unitaries, weights)


def _pu2_600cell() -> WeightedUnitarySet:
    # 120 vertices of the 600-cell: unit-quaternion permutations of
    # (±1,0,0,0), (±1/2,±1/2,±1/2,±1/2) and even permutations of
    # (0, ±1/2, ±phi/2, ±1/(2 phi)); antipodal pairs collapse to 60 points.
    phi = (1 + np.sqrt(5)) / 2
    verts = []
    for i in range(4):
        for sign in (1.0, -1.0):
            v = [0.0] * 4
            v[i] = sign
            verts.append(v)
    for signs in itertools.product((0.5, -0.5), repeat=4):
        verts.append(list(signs))
    base = (0.0, 0.5, phi / 2, 1 / (2 * phi))
    for perm in itertools.permutations(range(4)):
        inversions = sum(1 for i in range(4) for j in range(i + 1, 4) if perm[i] > perm[j])
        if inversions % 2:
            continue
        pattern = [base[j] for j in perm]
        for signs in itertools.product((1.0, -1.0), repeat=3):
            it = iter(signs)
            verts.append([x * (next(it) if x != 0.0 else 1.0) for x in pattern])
    points: list[np.ndarray] = []
    for v in verts:
        v = np.asarray(v)
        k = int(np.argmax(np.abs(v) > 1e-12))
        v = v if v[k] > 0 else -v
        if not any(np.allclose(v, p, atol=1e-12) for p in points):
            points.append(v)
    return uniform_set(2, np.array([quat_to_unitary(p) for p in points]))


def pu2_muub_family() -> list[WeightedUnitarySet]:
    """The three mutually unbiased unitary bases inside the 12-point design.

    Hardcoded from the 24-cell quaternion coordinates: the axis basis
    {I, iX, iY, iZ} and the two half-quaternion bases split by sign parity.
    """
    axis = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    even = [(1, 1, 1, 1), (1, 1, -1, -1), (1, -1, 1, -1), (1, -1, -1, 1)]
    odd = [(1, 1, 1, -1), (1, 1, -1, 1), (1, -1, 1, 1), (1, -1, -1, -1)]
    bases = []
    for quads, scale in ((axis, 1.0), (even, 0.5), (odd, 0.5)):
        ops = np.array([quat_to_unitary(np.asarray(q, dtype=float) * scale) for q in quads])
        bases.append(uniform_set(2, ops))
    return bases


def gallery(name: str, n: int | None = None, dim: int | None = None) -> WeightedUnitarySet:
    """Known designs by name.

    utof(n, d) is an unweighted 1-design for any n >= d²; pu2_11pt is the
    minimal weighted PU(2) 2-design; pu2_clifford12 (the closure of <HR, R²>)
    and pu2_clifford24 (the projective Clifford group <H, R>) are unweighted
    2- and 3-designs; pu2_600cell is the 60-point 5-design from the 600-cell.
    """
    if name == 'utof':
        if n is None or dim is None:
            raise InvalidInputError("utof needs both n and dim")
        return unitary_operator_frame(n, dim)
    if name == 'pu2_11pt':
        return _pu2_11pt()
    if name == 'pu2_clifford12':
        return group_closure([_HADAMARD @ _PHASE, _PHASE @ _PHASE])
    if name == 'pu2_clifford24':
        return group_closure([_HADAMARD, _PHASE])
    if name == 'pu2_600cell':
        return _pu2_600cell()
    raise InvalidInputError(f"unknown gallery name {name!r}; known: {', '.join(GALLERY_NAMES)}")


GALLERY_CERTIFIED_T = {
    'utof': 1,
    'pu2_11pt': 2,
    'pu2_clifford12': 2,
    'pu2_clifford24': 3,
    'pu2_600cell': 5,
}


@dataclass(frozen=True)
class MuubReport:
    """Findings of :func:`muub_check` on a family of unitary operator bases."""

    m: int
    bound: int                       # d² - 1
    orthogonal: bool
    max_orthogonality_defect: float
    mutually_unbiased: bool
    max_unbiasedness_defect: float
    welch_sum: float                 # fourth-power sum with basis weights 1/(m d²)
    is_two_design: bool
    complete: bool                   # m == d² - 1 and all pairwise unbiased


def muub_check(bases: list[WeightedUnitarySet], atol: float = ATOL_ALG) -> MuubReport:
    """Check a family of unitary operator bases and its union 2-design property.

    Each basis must contain exactly d² elements with tr(U_j†U_k) = d delta;
    pairs of bases are mutually unbiased when every cross overlap has
    |tr(U†V)|² = 1.  The union with basis weights 1/(m d²) is a weighted
    2-design exactly when the fourth-power overlap sum equals 2.
    """
    if not bases:
        raise InvalidInputError("need at least one basis")
    d = bases[0].dim
    for b in bases:
        if b.dim != d:
            raise InvalidInputError("all bases must share one dimension")
        if len(b) != d * d:
            raise InvalidInputError(f"a unitary operator basis for d={d} has d²={d * d} elements, got {len(b)}")
    m = len(bases)
    orth_defect = 0.0
    for b in bases:
        gram = b.gram()
        orth_defect = max(orth_defect, float(np.abs(gram - d * np.eye(d * d)).max()))
    unbias_defect = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            flat_i = bases[i].unitaries.reshape(d * d, -1)
            flat_j = bases[j].unitaries.reshape(d * d, -1)
            cross = np.abs(flat_i.conj() @ flat_j.T) ** 2
            unbias_defect = max(unbias_defect, float(np.abs(cross - 1.0).max()))
    w_basis = 1.0 / (m * d * d)
    flats = [b.unitaries.reshape(d * d, -1) for b in bases]
    welch = 0.0
    for fi in flats:
        for fj in flats:
            welch += w_basis * w_basis * float((np.abs(fi.conj() @ fj.T) ** 4).sum())
    orthogonal = orth_defect <= atol
    unbiased = unbias_defect <= atol
    return MuubReport(
        m=m,
        bound=d * d - 1,
        orthogonal=orthogonal,
        max_orthogonality_defect=orth_defect,
        mutually_unbiased=unbiased,
        max_unbiasedness_defect=unbias_defect,
        welch_sum=welch,
        is_two_design=bool(abs(welch - 2.0) <= ATOL_CERT),
        complete=bool(m == d * d - 1 and orthogonal and unbiased),
    )


@dataclass(frozen=True)
class EquiangularityDiagnostic:
    size: int
    minimal_size: int                # (d² - 1)² + 1
    target_overlap: float            # 1 - 1/(d² - 1)
    min_overlap: float
    max_overlap: float
    weights_uniform: bool


def equiangularity_diagnostic(s: WeightedUnitarySet) -> EquiangularityDiagnostic:
    """Report how close a set sits to the (conjecturally nonexistent) minimal
    equiangular 2-design configuration.  Informational only."""
    d = s.dim
    overlap = np.abs(s.gram()) ** 2
    off = overlap[~np.eye(len(s), dtype=bool)]
    return EquiangularityDiagnostic(
        size=len(s),
        minimal_size=(d * d - 1) ** 2 + 1,
        target_overlap=1.0 - 1.0 / (d * d - 1),
        min_overlap=float(off.min()) if off.size else float('nan'),
        max_overlap=float(off.max()) if off.size else float('nan'),
        weights_uniform=bool(np.allclose(s.weights, 1.0 / len(s), atol=1e-9)),
    )
