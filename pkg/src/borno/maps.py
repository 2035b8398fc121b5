"""Linear maps and homomorphisms between model algebras.

A map is stored as its complex action matrix on the canonical coordinate
basis of the source (the basis :func:`borno.algebra.vec` flattens against),
so linearity is exact by construction.  Multiplicativity never is; it gets
measured, as the defect max ||f(e_i e_j) - f(e_i) f(e_j)|| over basis pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import basis, linear_dim, multiply, norm, subtract, unvec, vec
from .errors import DescriptorMismatch

HOM_DEFECT_TOL = 1e-9


class LinearMap:
    """Bounded linear map between model algebras, no multiplicativity assumed."""

    __slots__ = ("source", "target", "action")

    def __init__(self, source, target, action):
        action = np.asarray(action, dtype=np.complex128)
        expected = (linear_dim(target), linear_dim(source))
        if action.shape != expected:
            raise ValueError(
                f"action matrix shape {action.shape}, expected {expected}"
            )
        if not np.all(np.isfinite(action.view(np.float64))):
            raise ValueError("non-finite entry in action matrix")
        action = action.copy()
        action.flags.writeable = False
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "action", action)

    def __setattr__(self, name, value):
        raise AttributeError("LinearMap is immutable")

    def __call__(self, element):
        if element.descriptor != self.source:
            raise DescriptorMismatch(element.descriptor, self.source, "map input")
        return unvec(self.target, self.action @ vec(element))

    def compose(self, other):
        """self after other."""
        if other.target != self.source:
            raise DescriptorMismatch(other.target, self.source, "composition")
        return LinearMap(other.source, self.target, self.action @ other.action)

    def add(self, other):
        if (other.source, other.target) != (self.source, self.target):
            raise DescriptorMismatch(other.source, self.source, "map sum")
        return LinearMap(self.source, self.target, self.action + other.action)

    def subtract(self, other):
        if (other.source, other.target) != (self.source, self.target):
            raise DescriptorMismatch(other.source, self.source, "map difference")
        return LinearMap(self.source, self.target, self.action - other.action)

    def scaled(self, c):
        return LinearMap(self.source, self.target, c * self.action)

    @staticmethod
    def identity(descriptor):
        d = linear_dim(descriptor)
        return LinearMap(descriptor, descriptor, np.eye(d))

    @staticmethod
    def zero(source, target):
        return LinearMap(source, target, np.zeros((linear_dim(target),
                                                   linear_dim(source))))

    @staticmethod
    def from_images(source, target, images):
        """Map determined by the images of the canonical source basis."""
        cols = [vec(img) for img in images]
        if len(cols) != linear_dim(source):
            raise ValueError("need one image per source basis element")
        return LinearMap(source, target, np.stack(cols, axis=1))

    @staticmethod
    def from_callable(source, target, fn):
        return LinearMap.from_images(source, target,
                                     [fn(e) for e in basis(source)])


def multiplicativity_defect(f):
    """max over basis pairs of ||f(e_i e_j) - f(e_i) f(e_j)||."""
    elems = basis(f.source)
    images = [f(e) for e in elems]
    worst = 0.0
    for i, ei in enumerate(elems):
        for j, ej in enumerate(elems):
            lhs = f(multiply(ei, ej))
            rhs = multiply(images[i], images[j])
            worst = max(worst, norm(subtract(lhs, rhs)))
    return worst


@dataclass(frozen=True)
class MultReport:
    defect: float
    tolerance: float

    @property
    def multiplicative(self):
        return self.defect <= self.tolerance


def check_multiplicative(f, tolerance=HOM_DEFECT_TOL):
    """Recompute the multiplicativity defect of any linear map."""
    return MultReport(multiplicativity_defect(f), tolerance)


class Homomorphism(LinearMap):
    """A linear map whose multiplicativity defect passed the tolerance gate."""

    __slots__ = ("mult_defect",)

    def __init__(self, source, target, action, tolerance=HOM_DEFECT_TOL):
        super().__init__(source, target, action)
        defect = multiplicativity_defect(self)
        if defect > tolerance:
            raise ValueError(
                f"multiplicativity defect {defect:.3e} exceeds {tolerance:.1e}; "
                "construct a LinearMap instead"
            )
        object.__setattr__(self, "mult_defect", defect)

    @staticmethod
    def from_images(source, target, images, tolerance=HOM_DEFECT_TOL):
        cols = [vec(img) for img in images]
        return Homomorphism(source, target, np.stack(cols, axis=1), tolerance)

    @staticmethod
    def from_callable(source, target, fn, tolerance=HOM_DEFECT_TOL):
        return Homomorphism.from_images(source, target,
                                        [fn(e) for e in basis(source)],
                                        tolerance)

    @staticmethod
    def identity(descriptor):
        d = linear_dim(descriptor)
        return Homomorphism(descriptor, descriptor, np.eye(d))
