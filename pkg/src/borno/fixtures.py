"""Built-in model maps: function-algebra embeddings, matrix towers, and the
negative control, together with the smoothing families used by the
approximation certificates.

The function-algebra fixtures realize dense-subalgebra embeddings at desk
scale as pullbacks along point maps, which are exactly multiplicative.  The
trigonometric structure (interpolation, Fejer means) lives in the linear
smoothing and density maps, where no multiplicativity is required.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import (
    GridFunctionAlgebra,
    GridSpec,
    MatrixAlgebra,
    AlgebraElement,
    grid_element,
)
from .maps import Homomorphism, LinearMap

SCALAR = MatrixAlgebra(1)


def scalar_grid_algebra(grid):
    return GridFunctionAlgebra(grid, SCALAR)


def grid_function(desc, values):
    return grid_element(desc, [[[v]] for v in values])


def grid_values(element):
    return np.array([child.data[0, 0] for child in element.data])


# ---------------------------------------------------------------------------
# pullbacks along point maps (always exactly multiplicative)
# ---------------------------------------------------------------------------

def pullback_map(source_desc, target_desc, point_map):
    """f(x)(t) = x(point_map(t)), as a 0/1 selection on coordinates."""
    m_t = len(target_desc.grid.points)
    m_s = len(source_desc.grid.points)
    action = np.zeros((m_t, m_s))
    for t_idx in range(m_t):
        action[t_idx, point_map(t_idx)] = 1.0
    return Homomorphism(source_desc, target_desc, action)


def corner_embedding(k, n, norm_kind="op2"):
    """M_k into the top-left corner of M_n."""
    source = MatrixAlgebra(k, norm_kind)
    target = MatrixAlgebra(n, norm_kind)

    def embed(e):
        out = np.zeros((n, n), dtype=np.complex128)
        out[:k, :k] = e.data
        return AlgebraElement(target, out)

    return Homomorphism.from_callable(source, target, embed)


def corner_compression(n, k, norm_kind="op2"):
    """Compression of M_n onto its top-left M_k corner, padded back into M_n."""
    desc = MatrixAlgebra(n, norm_kind)

    def compress(e):
        out = np.zeros((n, n), dtype=np.complex128)
        out[:k, :k] = e.data[:k, :k]
        return AlgebraElement(desc, out)

    return LinearMap.from_callable(desc, desc, compress)


# ---------------------------------------------------------------------------
# trigonometric machinery on uniform circle grids
# ---------------------------------------------------------------------------

def fourier_synthesis_matrix(degree, angles):
    """Evaluation of a degree <= d trig polynomial at the given angles.

    Columns are indexed by frequency -d..d; entry (k, f) = exp(i f angle_k).
    """
    freqs = np.arange(-degree, degree + 1)
    angles = np.asarray(angles, dtype=np.float64)
    return np.exp(1j * np.outer(angles, freqs))


def fejer_matrix(m, order):
    """Fejer smoothing of order n acting on values on the uniform m-grid.

    Diagonal in the discrete Fourier basis with weights max(0, 1-|f|/(n+1)).
    """
    freqs = np.fft.fftfreq(m, d=1.0 / m)  # 0, 1, ..., -1 convention
    weights = np.maximum(0.0, 1.0 - np.abs(freqs) / (order + 1.0))
    dft = np.fft.fft(np.eye(m), axis=0)
    idft = np.conj(dft).T / m
    return idft @ (weights[:, None] * dft)


# ---------------------------------------------------------------------------
# the catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MapFixture:
    name: str
    map: LinearMap
    expected: str  # "pass" or "fail" under the isoradial certificate
    notes: str = ""
    sigmas: tuple = ()
    family: tuple = ()  # declared bounded family in the target, for rates
    modulus: object = None  # Lipschitz constant wrt the grid metric, if declared


def trig_grid_fixture(degree=3, points=None):
    """Coarse circle-grid functions inside a finer grid, by nearest-point pullback.

    The coarse grid has 2d+1 points (the sample count that determines a
    degree-d trig polynomial); the fine grid doubles it, satisfying the
    m >= 4d rule of thumb.
    """
    coarse_n = 2 * degree + 1
    fine_n = points if points is not None else 2 * coarse_n
    if fine_n % coarse_n != 0:
        raise ValueError("fine grid must refine the coarse grid")
    ratio = fine_n // coarse_n
    source = scalar_grid_algebra(GridSpec.circle(coarse_n))
    target = scalar_grid_algebra(GridSpec.circle(fine_n))

    def nearest(t_idx):
        return int((t_idx + ratio // 2) // ratio) % coarse_n

    hom = pullback_map(source, target, nearest)
    return MapFixture(
        name=f"trig-grid-d{degree}",
        map=hom,
        expected="pass",
        notes="coarse-in-fine circle grid, isometric pullback",
    )


def matrix_tower_fixture(k=2, n=6, norm_kind="op2"):
    return MapFixture(
        name=f"matrix-tower-{k}-{n}",
        map=corner_embedding(k, n, norm_kind),
        expected="pass",
        notes="corner embedding preserves norms and eigenvalues",
    )


def interval_restriction_fixture():
    """Negative control: functions on [0, 2] restricted to the [0, 1] part.

    Restriction is multiplicative, but the sup over [0, 2] of the coordinate
    function is twice its sup over [0, 1], so spectral radii are not preserved.
    """
    source = scalar_grid_algebra(GridSpec.interval(0.0, 2.0, 9))
    target = scalar_grid_algebra(GridSpec.interval(0.0, 1.0, 5))
    m_s = len(source.grid.points)
    m_t = len(target.grid.points)
    action = np.zeros((m_t, m_s))
    for t_idx, t in enumerate(target.grid.points):
        s_idx = source.grid.points.index(t)
        action[t_idx, s_idx] = 1.0
    hom = Homomorphism(source, target, action)
    return MapFixture(
        name="interval-restriction",
        map=hom,
        expected="fail",
        notes="sup over [0,2] doubles the sup over [0,1] on the ramp probe",
    )


def trig_fejer_fixture(m=16, orders=range(1, 65), amplitude=0.5):
    """Half-step rotation pullback on the m-point circle grid plus Fejer maps.

    f relabels grid values along the rotated grid (an exact isomorphism); the
    smoothing maps sigma_n are chosen so that f o sigma_n is the order-n Fejer
    mean, which converges to the identity on the declared Lipschitz family.
    """
    half_step = math.pi / m
    fine = GridSpec.circle(m)
    rotated = GridSpec.from_points(
        tuple(a + half_step for a in fine.points),
        lambda a, b: min(abs(a - b) % (2 * math.pi),
                         2 * math.pi - abs(a - b) % (2 * math.pi)),
    )
    source = scalar_grid_algebra(rotated)
    target = scalar_grid_algebra(fine)
    hom = Homomorphism(source, target, np.eye(m))
    sigmas = tuple(
        LinearMap(target, source, fejer_matrix(m, n)) for n in orders
    )
    angles = np.array(fine.points)
    family = (
        grid_function(target, amplitude * np.sin(angles)),
        grid_function(target, amplitude * np.cos(angles)),
    )
    return MapFixture(
        name="trig-fejer",
        map=hom,
        expected="pass",
        notes="rotation pullback with Fejer smoothing family",
        sigmas=sigmas,
        family=family,
        modulus=amplitude,  # |sin|, |cos| are 1-Lipschitz; family scales them
    )


def tower_compression_fixture(n=8, support=4, orders=range(1, 9),
                              norm_kind="op2"):
    """Identity on M_n with corner compressions as the smoothing family.

    For sets supported in the top-left support x support corner the rates
    vanish as soon as the compression rank reaches the support size.
    """
    desc = MatrixAlgebra(n, norm_kind)
    hom = Homomorphism.identity(desc)
    sigmas = tuple(corner_compression(n, k, norm_kind) for k in orders)
    rng = np.random.default_rng(0xB00C)
    block = rng.standard_normal((support, support))
    mat = np.zeros((n, n), dtype=np.complex128)
    mat[:support, :support] = block
    corner_unit = np.zeros((n, n), dtype=np.complex128)
    corner_unit[:support, :support] = np.eye(support)
    family = (AlgebraElement(desc, mat), AlgebraElement(desc, corner_unit))
    return MapFixture(
        name="tower-compression",
        map=hom,
        expected="pass",
        notes="corner compressions fix corner-supported sets",
        sigmas=sigmas,
        family=family,
    )


def trig_interpolation_map(degree, points=None):
    """Trig coefficients (frequency -d..d) evaluated on a circle grid.

    With 2d+1 grid points the synthesis matrix is square and invertible, so
    interpolation is exact; with more points it is a strict least-squares
    problem.  The coefficient space is modeled as a scalar grid over the
    frequency labels; the map is linear only and not labeled a homomorphism.
    """
    n_coeff = 2 * degree + 1
    m = points if points is not None else n_coeff
    freq_grid = GridSpec.from_points(
        tuple(float(f) for f in range(-degree, degree + 1)),
        lambda a, b: abs(a - b),
    )
    source = scalar_grid_algebra(freq_grid)
    target = scalar_grid_algebra(GridSpec.circle(m))
    action = fourier_synthesis_matrix(degree, target.grid.points)
    return LinearMap(source, target, action)


def fixture_catalog():
    """Named ready-made fixtures, keyed by name."""
    entries = [
        trig_grid_fixture(),
        matrix_tower_fixture(),
        interval_restriction_fixture(),
        trig_fejer_fixture(),
        tower_compression_fixture(),
    ]
    return {e.name: e for e in entries}
