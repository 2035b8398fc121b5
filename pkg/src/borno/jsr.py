"""Certified interval computation of the spectral radius of a bounded set.

For a finite set of matrices this is the joint spectral radius.  The interval
bracket rests on two classical facts, both consequences of submultiplicativity
and the power identity rho(S^n) = rho(S)^n:

* every word product P_w gives the lower bound rho(P_w)^(1/|w|);
* every fully expanded level l gives the upper bound max_{|w|=l} ||P_w||^(1/l).

The search is a level-synchronous expansion with *safe* pruning: a word is
dropped only when an optimistic bound on every descendant it could still
produce (within the depth budget) falls below the current lower bound by at
least the pruning slack.  Safe pruning provably changes neither the per-level
maxima nor the best lower bound, so the returned interval is identical to the
one exhaustive enumeration would produce, while skipping decayed subtrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import algebra
from .algebra import (
    AlgebraElement,
    BoundedSet,
    FiniteHull,
    GridFunctionAlgebra,
    MatrixAlgebra,
    bounded_set,
    gauge,
    multiply,
    norm,
    scale,
    spectral_radius_single,
)
from .errors import CapExceeded, InvariantViolation

CERTIFIED = "certified"
DEPTH_LIMITED = "depth-limited"

# products are renormalized by exact powers of two outside this norm range,
# with the exponent carried separately; power-of-two scaling is bit-exact
_RESCALE_HI = math.ldexp(1.0, 500)
_RESCALE_LO = math.ldexp(1.0, -500)


@dataclass(frozen=True)
class RadiusEstimate:
    lower: float
    upper: float
    witness_word: tuple
    depth: int
    status: str

    @property
    def gap(self):
        return self.upper - self.lower

    def as_dict(self):
        return {
            "lower": self.lower,
            "upper": self.upper,
            "witness_word": list(self.witness_word),
            "depth": self.depth,
            "status": self.status,
        }


@dataclass(frozen=True)
class HullCertificate:
    hull: FiniteHull
    scale: float
    closure_defect: float


def _exp2(x):
    return math.pow(2.0, x)


def _rate(value, exponent, length):
    """(value * 2^exponent)^(1/length) without forming the scaled number."""
    if value == 0.0:
        return 0.0
    if exponent == 0:
        return value ** (1.0 / length)
    return _exp2((math.log2(value) + exponent) / length)


class _Node:
    __slots__ = ("word", "element", "exponent")

    def __init__(self, word, element, exponent):
        self.word = word
        self.element = element
        self.exponent = exponent


def _optimistic_rate(child_norm, exponent, length, log2_gen_max, depth):
    """Best norm rate any descendant of this word could reach within depth."""
    if child_norm == 0.0:
        return 0.0
    base = math.log2(child_norm) + exponent
    if log2_gen_max == -math.inf:
        return _exp2(base / length)
    best = -math.inf
    for n in range(length, depth + 1):
        best = max(best, (base + (n - length) * log2_gen_max) / n)
    return _exp2(best)


def jsr_estimate(s, depth, gap_target=1e-3):
    """Certified interval for the spectral radius of a bounded set.

    Deterministic: exploration order is lexicographic in generator index and
    all reductions are order-independent, so the result does not depend on
    how the work is scheduled.
    """
    if not isinstance(s, BoundedSet):
        s = bounded_set(s)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if not gap_target > 0:
        raise ValueError("gap target must be positive")
    gens = s.generators
    gen_norms = [norm(g) for g in gens]
    gen_max = max(gen_norms)
    log2_gen_max = math.log2(gen_max) if gen_max > 0 else -math.inf
    slack = gap_target / 2.0

    lower = 0.0
    upper = math.inf
    witness = ()
    explored = 0

    alive = [_Node((), None, 0)]
    for level in range(1, depth + 1):
        explored = level
        next_alive = []
        level_max = 0.0
        overflowed = False
        for node in alive:
            for idx, g in enumerate(gens):
                if node.element is None:
                    child = g
                else:
                    child = multiply(node.element, g)
                exponent = node.exponent
                child_norm = norm(child)
                if not math.isfinite(child_norm):
                    overflowed = True
                    continue
                if child_norm != 0.0 and not (_RESCALE_LO <= child_norm <= _RESCALE_HI):
                    shift = int(math.floor(math.log2(child_norm)))
                    child = scale(math.ldexp(1.0, -shift), child)
                    exponent += shift
                    child_norm = norm(child)
                word = node.word + (idx,)
                nrate = _rate(child_norm, exponent, level)
                level_max = max(level_max, nrate)
                rho = spectral_radius_single(child)
                rrate = _rate(rho, exponent, level)
                if rrate > lower:
                    lower = rrate
                    witness = word
                opt = _optimistic_rate(child_norm, exponent, level,
                                       log2_gen_max, depth)
                if opt <= lower - slack:
                    continue
                next_alive.append(_Node(word, child, exponent))
        if overflowed:
            return RadiusEstimate(lower, math.inf, witness, explored, DEPTH_LIMITED)
        upper = min(upper, level_max)
        alive = next_alive
        if upper - lower <= gap_target or not alive:
            break

    status = CERTIFIED if upper - lower <= gap_target else DEPTH_LIMITED
    return RadiusEstimate(lower, upper, witness, explored, status)


# ---------------------------------------------------------------------------
# identities of the spectral radius
# ---------------------------------------------------------------------------

def _intervals_intersect(lo1, hi1, lo2, hi2, slack):
    return lo1 <= hi2 + slack and lo2 <= hi1 + slack


def _expand_products(s, n):
    """All length-n products of generators, expanded explicitly."""
    gens = list(s.generators)
    current = gens
    for _ in range(n - 1):
        current = [multiply(p, g) for p in current for g in gens]
    return bounded_set(current)


def check_specrad_identities(s, c, n, depth, gap_target=1e-6):
    """Interval consistency of rho(cS) = |c| rho(S) and rho(S^n) = rho(S)^n.

    Also confirms that the finite-set and disked-hull readings of S produce
    the identical estimate.  Raises InvariantViolation on any inconsistency,
    which would indicate a kernel bug rather than a property of the input.
    """
    if not isinstance(s, BoundedSet):
        s = bounded_set(s)
    if n not in (2, 3):
        raise ValueError("power identity is checked for n in {2, 3}")
    base = jsr_estimate(s, depth, gap_target)
    scaled = jsr_estimate(s.scaled(c), depth, gap_target)
    power_depth = max(1, depth // n)
    powered = jsr_estimate(_expand_products(s, n), power_depth, gap_target)
    hull = jsr_estimate(s.as_hull(), depth, gap_target)

    mag = abs(c)
    slack = 1e-9 * max(1.0, mag * base.upper if math.isfinite(base.upper) else 1.0)
    if not _intervals_intersect(mag * base.lower, mag * base.upper,
                                scaled.lower, scaled.upper, slack):
        raise InvariantViolation(
            f"rho(cS) interval [{scaled.lower}, {scaled.upper}] misses "
            f"|c|*rho(S) interval [{mag * base.lower}, {mag * base.upper}]"
        )
    pow_slack = 1e-9 * max(1.0, base.upper ** n if math.isfinite(base.upper) else 1.0)
    if not _intervals_intersect(base.lower ** n, base.upper ** n,
                                powered.lower, powered.upper, pow_slack):
        raise InvariantViolation(
            f"rho(S^{n}) interval [{powered.lower}, {powered.upper}] misses "
            f"rho(S)^{n} interval [{base.lower ** n}, {base.upper ** n}]"
        )
    if (hull.lower, hull.upper) != (base.lower, base.upper):
        raise InvariantViolation("hull interpretation changed the estimate")
    return {
        "base": base,
        "scaled": scaled,
        "powered": powered,
        "hull": hull,
        "scalar": c,
        "power": n,
        "consistent": True,
    }


# ---------------------------------------------------------------------------
# submultiplicative hulls
# ---------------------------------------------------------------------------

_DECAY_CUT = 1e-12
_INSIDE_TOL = 1e-12


def submultiplicative_hull(s, r, max_products=512):
    """Finite disked hull T with S <= r*T and T*T inside (1+defect)*T.

    Expands products of (1/r) S level by level.  A product already inside the
    hull built so far adds nothing and is dropped; products decayed below the
    norm cut are kept as terminal generators but not extended.  The returned
    closure defect is measured directly on all pairwise products of the final
    generators, so the certificate does not depend on the expansion strategy.
    """
    if not isinstance(s, BoundedSet):
        s = bounded_set(s)
    if not r > 0:
        raise ValueError("scale r must be positive")
    scaled_gens = [scale(1.0 / r, g) for g in s.generators]
    generators = []
    frontier = []
    decay_profile = {}

    def note(level, value):
        decay_profile[level] = max(decay_profile.get(level, 0.0), value)

    for g in scaled_gens:
        n = norm(g)
        note(1, n)
        generators.append(g)
        if n >= _DECAY_CUT:
            frontier.append(g)
    level = 1
    while frontier:
        level += 1
        new_frontier = []
        for p in frontier:
            for g in scaled_gens:
                q = multiply(p, g)
                nq = norm(q)
                note(level, nq)
                if nq < _DECAY_CUT:
                    generators.append(q)
                    continue
                if gauge(FiniteHull(tuple(generators)), q) <= 1.0 + _INSIDE_TOL:
                    continue
                generators.append(q)
                new_frontier.append(q)
                if len(generators) > max_products:
                    raise CapExceeded(
                        f"hull cap {max_products} reached at product length {level}",
                        decay_profile,
                    )
        frontier = new_frontier

    hull = FiniteHull(tuple(generators))
    defect = 0.0
    for a in generators:
        for b in generators:
            defect = max(defect, gauge(hull, multiply(a, b)) - 1.0)
    defect = max(0.0, defect)
    containment = max(gauge(hull, g) for g in scaled_gens)
    if containment > 1.0 + _INSIDE_TOL:
        raise InvariantViolation("hull does not absorb (1/r) S")
    return HullCertificate(hull, r, defect)


# ---------------------------------------------------------------------------
# pointwise-max formula on grid-function algebras
# ---------------------------------------------------------------------------

def jsr_grid_max(s, depth, gap_target=1e-3):
    """Fiberwise profile plus global estimate for a grid-function set.

    The global interval must intersect [max lower, max upper] of the profile;
    this is the pointwise-max formula for spectral radii of function sets.
    """
    if not isinstance(s, BoundedSet):
        s = bounded_set(s)
    desc = s.descriptor
    if not isinstance(desc, GridFunctionAlgebra):
        raise TypeError("jsr_grid_max requires a grid-function algebra")
    profile = []
    for i in range(len(desc.grid.points)):
        fiber_set = bounded_set([g.data[i] for g in s.generators])
        profile.append(jsr_estimate(fiber_set, depth, gap_target))
    global_est = jsr_estimate(s, depth, gap_target)
    max_lower = max(p.lower for p in profile)
    max_upper = max(p.upper for p in profile)
    slack = 1e-9 * max(1.0, max_upper if math.isfinite(max_upper) else 1.0)
    if not _intervals_intersect(global_est.lower, global_est.upper,
                                max_lower, max_upper, slack):
        raise InvariantViolation(
            f"global interval [{global_est.lower}, {global_est.upper}] misses "
            f"fiber max interval [{max_lower}, {max_upper}]"
        )
    return {"global": global_est, "profile": profile}


# ---------------------------------------------------------------------------
# Kronecker bound and direct unions
# ---------------------------------------------------------------------------

def kronecker_bound_check(s_a, s_b, depth, gap_target=1e-3):
    """rho of the set of Kronecker products obeys rho(A (x) B) <= rho(A) rho(B)."""
    if not isinstance(s_a, BoundedSet):
        s_a = bounded_set(s_a)
    if not isinstance(s_b, BoundedSet):
        s_b = bounded_set(s_b)
    da, db = s_a.descriptor, s_b.descriptor
    if not (isinstance(da, MatrixAlgebra) and isinstance(db, MatrixAlgebra)):
        raise TypeError("kronecker_bound_check requires matrix algebras")
    desc = MatrixAlgebra(da.dim * db.dim, da.norm_kind)
    prods = [AlgebraElement(desc, np.kron(a.data, b.data))
             for a in s_a.generators for b in s_b.generators]
    est_a = jsr_estimate(s_a, depth, gap_target)
    est_b = jsr_estimate(s_b, depth, gap_target)
    est_ab = jsr_estimate(bounded_set(prods), depth, gap_target)
    bound = est_a.upper * est_b.upper
    slack = 1e-9 * max(1.0, bound if math.isfinite(bound) else 1.0)
    if est_ab.lower > bound + slack:
        raise InvariantViolation(
            f"Kronecker lower bound {est_ab.lower} exceeds "
            f"rho(S_A) rho(S_B) bound {bound}"
        )
    return {"left": est_a, "right": est_b, "product": est_ab, "bound": bound}


def pad_to(element, dim):
    """Embed a matrix element into the top-left corner of a larger algebra."""
    desc = element.descriptor
    if not isinstance(desc, MatrixAlgebra):
        raise TypeError("padding is defined for matrix algebras")
    if dim < desc.dim:
        raise ValueError("cannot pad into a smaller algebra")
    out = np.zeros((dim, dim), dtype=np.complex128)
    out[: desc.dim, : desc.dim] = element.data
    return AlgebraElement(MatrixAlgebra(dim, desc.norm_kind), out)


def direct_union_liminf(chain, depth, gap_target=1e-3, slack=1e-8):
    """Stagewise estimates across nested corner embeddings must agree.

    ``chain`` is an ordered list of BoundedSets realizing the same set inside
    nested matrix algebras (each element a padded copy).  After the support
    stabilizes, padding changes neither norms nor eigenvalues, so all stages
    produce the same interval up to solver noise.
    """
    stages = [jsr_estimate(s, depth, gap_target) for s in chain]
    reference = stages[0]
    scale_ref = max(1.0, reference.upper if math.isfinite(reference.upper) else 1.0)
    for est in stages[1:]:
        if (abs(est.lower - reference.lower) > slack * scale_ref
                or abs(est.upper - reference.upper) > slack * scale_ref):
            raise InvariantViolation(
                "direct-union stages disagree: "
                f"[{reference.lower}, {reference.upper}] vs [{est.lower}, {est.upper}]"
            )
    return {"stages": stages, "consistent": True}
