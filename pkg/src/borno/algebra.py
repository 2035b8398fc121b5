"""Finite-dimensional normed algebras: matrix blocks, direct sums, grid-sampled
function algebras, plus disks and their gauge semi-norms.

All values are complex, all containers immutable after construction, all
operations pure.  Norm kinds: ``op2`` (largest singular value) and ``maxrow``
(maximum absolute row sum).  Both are submultiplicative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import DescriptorMismatch, NumericalFailure, UnsupportedDisk

NORM_TOL = 1e-10
EIG_TOL = 1e-9
RANK_TOL = 1e-9
LP_TOL = 1e-9

OP2 = "op2"
MAXROW = "maxrow"


# ---------------------------------------------------------------------------
# descriptors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """A finite ordered point set with an explicit distance table."""

    points: tuple
    distances: tuple  # row-major tuple of tuples

    def __post_init__(self):
        if not self.points:
            raise ValueError("grid must be nonempty")
        n = len(self.points)
        if len(self.distances) != n or any(len(r) != n for r in self.distances):
            raise ValueError("distance table shape does not match point list")

    def distance(self, i, j):
        return self.distances[i][j]

    @staticmethod
    def from_points(points, metric):
        pts = tuple(points)
        dist = tuple(
            tuple(float(metric(p, q)) for q in pts) for p in pts
        )
        return GridSpec(pts, dist)

    @staticmethod
    def circle(m):
        """Uniform m-point grid on the circle with geodesic distance."""
        angles = tuple(2.0 * math.pi * k / m for k in range(m))

        def geo(a, b):
            d = abs(a - b) % (2.0 * math.pi)
            return min(d, 2.0 * math.pi - d)

        return GridSpec.from_points(angles, geo)

    @staticmethod
    def interval(lo, hi, m):
        """Uniform m-point grid on [lo, hi] with the euclidean distance."""
        if m == 1:
            pts = (float(lo),)
        else:
            step = (hi - lo) / (m - 1)
            pts = tuple(float(lo + k * step) for k in range(m))
        return GridSpec.from_points(pts, lambda a, b: abs(a - b))


@dataclass(frozen=True)
class MatrixAlgebra:
    dim: int
    norm_kind: str = OP2

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("matrix algebra dimension must be >= 1")
        if self.norm_kind not in (OP2, MAXROW):
            raise ValueError(f"unknown norm kind {self.norm_kind!r}")

    def __str__(self):
        return f"M{self.dim}[{self.norm_kind}]"


@dataclass(frozen=True)
class DirectSum:
    summands: tuple

    def __post_init__(self):
        if not self.summands:
            raise ValueError("direct sum needs at least one summand")

    def __str__(self):
        return "(" + " + ".join(str(s) for s in self.summands) + ")"


@dataclass(frozen=True)
class GridFunctionAlgebra:
    grid: GridSpec
    fiber: object

    def __str__(self):
        return f"C({len(self.grid.points)} pts, {self.fiber})"


def linear_dim(desc):
    """Complex coordinate dimension of an algebra descriptor."""
    if isinstance(desc, MatrixAlgebra):
        return desc.dim * desc.dim
    if isinstance(desc, DirectSum):
        return sum(linear_dim(s) for s in desc.summands)
    if isinstance(desc, GridFunctionAlgebra):
        return len(desc.grid.points) * linear_dim(desc.fiber)
    raise TypeError(f"not a descriptor: {desc!r}")


# ---------------------------------------------------------------------------
# elements
# ---------------------------------------------------------------------------

class AlgebraElement:
    """A concrete element of a model algebra.

    ``data`` is a complex matrix for :class:`MatrixAlgebra` and a tuple of
    child elements for :class:`DirectSum` / :class:`GridFunctionAlgebra`.
    """

    __slots__ = ("descriptor", "data")

    def __init__(self, descriptor, data):
        if isinstance(descriptor, MatrixAlgebra):
            mat = np.array(data, dtype=np.complex128, order="C")
            if mat.shape != (descriptor.dim, descriptor.dim):
                raise ValueError(
                    f"data shape {mat.shape} does not match {descriptor}"
                )
            if not np.all(np.isfinite(mat)):
                raise ValueError("non-finite entry in algebra element")
            mat.flags.writeable = False
            object.__setattr__(self, "data", mat)
        elif isinstance(descriptor, DirectSum):
            children = tuple(data)
            if len(children) != len(descriptor.summands):
                raise ValueError("direct-sum arity mismatch")
            for child, sub in zip(children, descriptor.summands):
                if child.descriptor != sub:
                    raise DescriptorMismatch(child.descriptor, sub, "direct-sum slot")
            object.__setattr__(self, "data", children)
        elif isinstance(descriptor, GridFunctionAlgebra):
            children = tuple(data)
            if len(children) != len(descriptor.grid.points):
                raise ValueError("grid arity mismatch")
            for child in children:
                if child.descriptor != descriptor.fiber:
                    raise DescriptorMismatch(child.descriptor, descriptor.fiber, "grid fiber")
            object.__setattr__(self, "data", children)
        else:
            raise TypeError(f"not a descriptor: {descriptor!r}")
        object.__setattr__(self, "descriptor", descriptor)

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraElement is immutable")

    def __repr__(self):
        return f"AlgebraElement({self.descriptor}, {self.data!r})"

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        if self.descriptor != other.descriptor:
            return False
        if isinstance(self.descriptor, MatrixAlgebra):
            return bool(np.array_equal(self.data, other.data))
        return self.data == other.data

    def __hash__(self):
        return hash((self.descriptor, self.data.tobytes()
                     if isinstance(self.descriptor, MatrixAlgebra) else self.data))


def matrix_element(data, norm_kind=OP2):
    mat = np.asarray(data, dtype=np.complex128)
    return AlgebraElement(MatrixAlgebra(mat.shape[0], norm_kind), mat)


def scalar_element(value, norm_kind=OP2):
    return matrix_element([[value]], norm_kind)


def grid_element(descriptor, values):
    """Build a grid-algebra element from per-point fiber data."""
    fiber = descriptor.fiber
    children = []
    for v in values:
        if isinstance(v, AlgebraElement):
            children.append(v)
        else:
            children.append(AlgebraElement(fiber, v))
    return AlgebraElement(descriptor, children)


def zero(descriptor):
    if isinstance(descriptor, MatrixAlgebra):
        return AlgebraElement(descriptor, np.zeros((descriptor.dim, descriptor.dim)))
    if isinstance(descriptor, DirectSum):
        return AlgebraElement(descriptor, tuple(zero(s) for s in descriptor.summands))
    return AlgebraElement(
        descriptor, tuple(zero(descriptor.fiber) for _ in descriptor.grid.points)
    )


def identity(descriptor):
    if isinstance(descriptor, MatrixAlgebra):
        return AlgebraElement(descriptor, np.eye(descriptor.dim))
    if isinstance(descriptor, DirectSum):
        return AlgebraElement(descriptor, tuple(identity(s) for s in descriptor.summands))
    return AlgebraElement(
        descriptor, tuple(identity(descriptor.fiber) for _ in descriptor.grid.points)
    )


def _check_same(a, b, context):
    if a.descriptor != b.descriptor:
        raise DescriptorMismatch(a.descriptor, b.descriptor, context)


def _matmul_stable(a, b):
    """Matrix product with a size-stable accumulation order.

    Sequential rank-one updates over the inner index: zero-padded corners
    then reproduce the unpadded product bit for bit, which BLAS kernels
    (whose fused accumulation depends on the matrix size) do not guarantee.
    """
    out = np.zeros_like(a)
    for k in range(a.shape[0]):
        out += a[:, k, None] * b[None, k, :]
    return out


def multiply(a, b):
    """Algebra product: block matrix product, pointwise on grids."""
    _check_same(a, b, "multiply")
    if isinstance(a.descriptor, MatrixAlgebra):
        return AlgebraElement(a.descriptor, _matmul_stable(a.data, b.data))
    return AlgebraElement(
        a.descriptor, tuple(multiply(x, y) for x, y in zip(a.data, b.data))
    )


def add(a, b):
    _check_same(a, b, "add")
    if isinstance(a.descriptor, MatrixAlgebra):
        return AlgebraElement(a.descriptor, a.data + b.data)
    return AlgebraElement(
        a.descriptor, tuple(add(x, y) for x, y in zip(a.data, b.data))
    )


def subtract(a, b):
    _check_same(a, b, "subtract")
    if isinstance(a.descriptor, MatrixAlgebra):
        return AlgebraElement(a.descriptor, a.data - b.data)
    return AlgebraElement(
        a.descriptor, tuple(subtract(x, y) for x, y in zip(a.data, b.data))
    )


def scale(c, a):
    if isinstance(a.descriptor, MatrixAlgebra):
        return AlgebraElement(a.descriptor, c * a.data)
    return AlgebraElement(a.descriptor, tuple(scale(c, x) for x in a.data))


# ---------------------------------------------------------------------------
# norms and spectral radius of a single element
# ---------------------------------------------------------------------------

def _power_iteration_bracket(mat, max_iter=2000, tol=NORM_TOL):
    """Largest singular value by power iteration on A^H A.

    Returns (estimate, converged, bracket).
    """
    n = mat.shape[0]
    if n == 0:
        return 0.0, True, (0.0, 0.0)
    upper = float(np.linalg.norm(mat, "fro"))
    if upper == 0.0:
        return 0.0, True, (0.0, 0.0)
    gram = mat.conj().T @ mat
    v = np.ones(n, dtype=np.complex128) / math.sqrt(n)
    sigma = 0.0
    for _ in range(max_iter):
        w = gram @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0, True, (0.0, upper)
        v_new = w / nw
        sigma_new = math.sqrt(nw)
        if abs(sigma_new - sigma) <= tol * max(sigma_new, 1e-300):
            resid = float(np.linalg.norm(gram @ v_new - nw * v_new))
            if resid <= math.sqrt(tol) * nw:
                return sigma_new, True, (sigma_new, upper)
        sigma, v = sigma_new, v_new
    return sigma, False, (sigma, upper)


def _op2_norm(mat):
    try:
        u, s, vh = np.linalg.svd(mat)
    except np.linalg.LinAlgError:
        est, ok, bracket = _power_iteration_bracket(mat)
        if ok:
            return est
        raise NumericalFailure("operator-2-norm iteration did not converge", bracket)
    sigma = float(s[0]) if s.size else 0.0
    if sigma == 0.0:
        return 0.0
    # residual certificate for the leading singular triple
    r1 = float(np.linalg.norm(mat @ vh[0].conj() - sigma * u[:, 0]))
    r2 = float(np.linalg.norm(mat.conj().T @ u[:, 0] - sigma * vh[0].conj()))
    if max(r1, r2) > NORM_TOL * sigma + 1e-13 * float(np.linalg.norm(mat, "fro")):
        est, ok, bracket = _power_iteration_bracket(mat)
        if ok:
            return est
        raise NumericalFailure("operator-2-norm residual check failed", bracket)
    return sigma


def norm(a):
    """Algebra norm of an element; submultiplicative for both norm kinds."""
    desc = a.descriptor
    if isinstance(desc, MatrixAlgebra):
        if desc.norm_kind == MAXROW:
            return float(np.max(np.sum(np.abs(a.data), axis=1)))
        return _op2_norm(a.data)
    return max(norm(x) for x in a.data)


def _gelfand_bracket(mat, kind, kmax=64):
    """Fallback bracket for the classical spectral radius via ||a^k||^(1/k)."""
    best_upper = math.inf
    power = mat
    elem_kind = MatrixAlgebra(mat.shape[0], kind)
    for k in range(1, kmax + 1):
        if k > 1:
            power = power @ mat
        if not np.all(np.isfinite(power.view(np.float64))):
            break
        nk = norm(AlgebraElement(elem_kind, power))
        best_upper = min(best_upper, nk ** (1.0 / k))
    return (0.0, best_upper)


def spectral_radius_single(a):
    """Classical spectral radius: maximum eigenvalue modulus, blockwise max."""
    desc = a.descriptor
    if isinstance(desc, MatrixAlgebra):
        try:
            eigs = np.linalg.eigvals(a.data)
        except np.linalg.LinAlgError:
            bracket = _gelfand_bracket(a.data, desc.norm_kind)
            raise NumericalFailure("eigenvalue iteration failed", bracket)
        return float(np.max(np.abs(eigs))) if eigs.size else 0.0
    return max(spectral_radius_single(x) for x in a.data)


# ---------------------------------------------------------------------------
# coordinates
# ---------------------------------------------------------------------------

def vec(a):
    """Flatten an element to a complex coordinate vector (row-major, in order)."""
    if isinstance(a.descriptor, MatrixAlgebra):
        return a.data.reshape(-1).copy()
    return np.concatenate([vec(x) for x in a.data])


def unvec(descriptor, coords):
    """Inverse of :func:`vec`."""
    coords = np.asarray(coords, dtype=np.complex128)
    if coords.shape != (linear_dim(descriptor),):
        raise ValueError("coordinate vector has wrong length")
    if isinstance(descriptor, MatrixAlgebra):
        return AlgebraElement(descriptor, coords.reshape(descriptor.dim, descriptor.dim))
    children = []
    offset = 0
    subs = (descriptor.summands if isinstance(descriptor, DirectSum)
            else [descriptor.fiber] * len(descriptor.grid.points))
    for sub in subs:
        d = linear_dim(sub)
        children.append(unvec(sub, coords[offset:offset + d]))
        offset += d
    return AlgebraElement(descriptor, tuple(children))


def basis(descriptor):
    """Canonical coordinate basis as elements, ordered consistently with vec()."""
    d = linear_dim(descriptor)
    eye = np.eye(d, dtype=np.complex128)
    return [unvec(descriptor, eye[k]) for k in range(d)]


# ---------------------------------------------------------------------------
# disks and gauges
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormBall:
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("norm ball radius must be positive")


@dataclass(frozen=True)
class FiniteHull:
    """Absolutely convex hull of finitely many elements, real coefficients."""

    generators: tuple

    def __post_init__(self):
        if not self.generators:
            raise ValueError("finite hull needs at least one generator")
        d0 = self.generators[0].descriptor
        for g in self.generators[1:]:
            if g.descriptor != d0:
                raise DescriptorMismatch(g.descriptor, d0, "hull generator")


@dataclass(frozen=True)
class Scaled:
    factor: float
    inner: object

    def __post_init__(self):
        if not self.factor > 0:
            raise ValueError("disk scale must be positive")


@dataclass(frozen=True)
class SumDisk:
    left: object
    right: object


def _real_coords(element):
    v = vec(element)
    return np.concatenate([v.real, v.imag])


def _flatten_disk(disk, mult=1.0):
    """Normalize a disk term into ('ball', r) or ('hull', [(gens, scale)...]).

    Mixed ball/hull sums have no exact formula and raise UnsupportedDisk.
    """
    if isinstance(disk, NormBall):
        return ("ball", disk.radius * mult)
    if isinstance(disk, FiniteHull):
        return ("hull", [(disk.generators, mult)])
    if isinstance(disk, Scaled):
        return _flatten_disk(disk.inner, mult * disk.factor)
    if isinstance(disk, SumDisk):
        left = _flatten_disk(disk.left, mult)
        right = _flatten_disk(disk.right, mult)
        if left[0] != right[0]:
            raise UnsupportedDisk(
                "sum of a norm ball and a finite hull has no exact gauge formula"
            )
        if left[0] == "ball":
            return ("ball", left[1] + right[1])
        return ("hull", left[1] + right[1])
    raise TypeError(f"not a disk: {disk!r}")


def _hull_gauge_single(generators, x):
    """min sum |lambda_i| with sum lambda_i g_i = x over real lambda."""
    target = _real_coords(x)
    cols = np.stack([_real_coords(g) for g in generators], axis=1)
    # rank test: is x in the real span of the generators?
    sol, residual, _rank, _sv = np.linalg.lstsq(cols, target, rcond=None)
    fit = cols @ sol
    if np.linalg.norm(fit - target) > RANK_TOL * (1.0 + np.linalg.norm(target)):
        return math.inf
    n = cols.shape[1]
    # lambda = p - q with p, q >= 0; minimize 1.(p + q)
    a_eq = np.concatenate([cols, -cols], axis=1)
    c = np.ones(2 * n)
    res = linprog(c, A_eq=a_eq, b_eq=target, bounds=[(0, None)] * (2 * n),
                  method="highs")
    if not res.success:
        raise NumericalFailure(f"gauge LP failed: {res.message}")
    return float(res.fun)


def _hull_gauge_groups(groups, x):
    """Gauge of a Minkowski sum of scaled hulls via a single grouped LP.

    Minimizes t subject to x = sum_i sum_j lambda_ij g_ij and
    sum_j |lambda_ij| <= t * scale_i for each group i.
    """
    target = _real_coords(x)
    dim = target.shape[0]
    blocks = []
    sizes = []
    for gens, s in groups:
        cols = np.stack([_real_coords(g) for g in gens], axis=1)
        blocks.append(cols)
        sizes.append(cols.shape[1])
    all_cols = np.concatenate(blocks, axis=1)
    sol, _res, _rank, _sv = np.linalg.lstsq(all_cols, target, rcond=None)
    if np.linalg.norm(all_cols @ sol - target) > RANK_TOL * (1.0 + np.linalg.norm(target)):
        return math.inf
    total = sum(sizes)
    # variables: p (total), q (total), t (1)
    a_eq = np.concatenate([all_cols, -all_cols, np.zeros((dim, 1))], axis=1)
    n_groups = len(groups)
    a_ub = np.zeros((n_groups, 2 * total + 1))
    offset = 0
    for i, ((_gens, s), sz) in enumerate(zip(groups, sizes)):
        a_ub[i, offset:offset + sz] = 1.0
        a_ub[i, total + offset:total + offset + sz] = 1.0
        a_ub[i, -1] = -s
        offset += sz
    c = np.zeros(2 * total + 1)
    c[-1] = 1.0
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(n_groups), A_eq=a_eq, b_eq=target,
                  bounds=[(0, None)] * (2 * total + 1), method="highs")
    if not res.success:
        raise NumericalFailure(f"grouped gauge LP failed: {res.message}")
    return float(res.fun)


def gauge(disk, x):
    """Minkowski gauge of ``x`` with respect to ``disk``; may be +inf."""
    kind = _flatten_disk(disk)
    if kind[0] == "ball":
        return norm(x) / kind[1]
    groups = kind[1]
    if len(groups) == 1 and groups[0][1] == 1.0:
        return _hull_gauge_single(groups[0][0], x)
    return _hull_gauge_groups(groups, x)


def disk_descriptor(disk):
    """Descriptor a hull-backed disk lives in, or None for pure norm balls."""
    if isinstance(disk, FiniteHull):
        return disk.generators[0].descriptor
    if isinstance(disk, Scaled):
        return disk_descriptor(disk.inner)
    if isinstance(disk, SumDisk):
        return disk_descriptor(disk.left) or disk_descriptor(disk.right)
    return None


# ---------------------------------------------------------------------------
# bounded sets
# ---------------------------------------------------------------------------

FINITE_SET = "set"
DISKED_HULL = "hull"


@dataclass(frozen=True)
class BoundedSet:
    """A finite generator list, read either as the set itself or its disked hull.

    Both interpretations have the same spectral radius, which is why the
    joint-spectral-radius kernel never needs to distinguish them.
    """

    generators: tuple
    interpretation: str = FINITE_SET

    def __post_init__(self):
        if not self.generators:
            raise ValueError("bounded set needs at least one generator")
        if self.interpretation not in (FINITE_SET, DISKED_HULL):
            raise ValueError(f"unknown interpretation {self.interpretation!r}")
        d0 = self.generators[0].descriptor
        for g in self.generators[1:]:
            if g.descriptor != d0:
                raise DescriptorMismatch(g.descriptor, d0, "bounded set generator")

    @property
    def descriptor(self):
        return self.generators[0].descriptor

    def as_hull(self):
        return BoundedSet(self.generators, DISKED_HULL)

    def scaled(self, c):
        return BoundedSet(tuple(scale(c, g) for g in self.generators),
                          self.interpretation)


def bounded_set(elements, interpretation=FINITE_SET):
    return BoundedSet(tuple(elements), interpretation)
