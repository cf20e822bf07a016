"""Vacuum constraints on phase space and their smeared scalar forms.

Phase space is the set of pairs (gamma, pi): a riemannian metric and a
covariant symmetric 2-tensor on the same grid.  The momentum constraint
-2 div_gamma(pi), index raised to a vector field, and the energy constraint
-R(gamma) + Tr(pi^2) - Tr(pi)^2/(d-1) are smeared against a shift vector
field X and lapse function phi:

    C_(X,phi)(gamma, pi) = integral of { gamma(X, C_mom) + phi C_en } vol_gamma.

Functionals carry structured labels so brackets of brackets can be assembled
and reported symbolically.  Evaluators are pure; the optional batch evaluator
takes raw component arrays with a leading batch axis and exists so gradient
sweeps can amortize FFT costs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _kernels as K
from .grid import (
    MetricField,
    ScalarField,
    SymTensorField,
    TorusGrid,
    VectorField,
    check_same_grid,
)


@dataclass(frozen=True)
class PhaseSpacePoint:
    gamma: MetricField
    pi: SymTensorField

    def __post_init__(self):
        check_same_grid(self.gamma, self.pi)
        self.pi.require_variance("covariant")

    @classmethod
    def flat_vacuum(cls, grid: TorusGrid) -> "PhaseSpacePoint":
        return cls(MetricField.euclidean(grid), SymTensorField.zeros(grid))

    @property
    def grid(self) -> TorusGrid:
        return self.gamma.grid


@dataclass(frozen=True)
class Section:
    """A pair (shift vector field, lapse function) on one grid."""

    shift: VectorField
    lapse: ScalarField

    def __post_init__(self):
        check_same_grid(self.shift, self.lapse)

    @classmethod
    def zero(cls, grid: TorusGrid) -> "Section":
        return cls(VectorField.zeros(grid), ScalarField.zeros(grid))

    @classmethod
    def from_shift(cls, x: VectorField) -> "Section":
        return cls(x, ScalarField.zeros(x.grid))

    @classmethod
    def from_lapse(cls, phi: ScalarField) -> "Section":
        return cls(VectorField.zeros(phi.grid), phi)

    @property
    def grid(self) -> TorusGrid:
        return self.shift.grid

    def sup_norm(self) -> float:
        return max(self.shift.sup_norm(), self.lapse.sup_norm())


@dataclass(frozen=True)
class FunctionalLabel:
    """Structured name of a phase-space functional.

    kind is one of "C_section", "product", "nested_bracket", "custom";
    payload holds the constituents (a Section, two labels, or a free string).
    """

    kind: str
    payload: tuple = ()

    def describe(self) -> str:
        if self.kind == "C_section":
            return "C_(X,phi)"
        if self.kind == "nested_bracket":
            left, right = self.payload
            return f"{{{left.describe()}, {right.describe()}}}"
        if self.kind == "product":
            left, right = self.payload
            return f"({left.describe()} * {right.describe()})"
        return str(self.payload[0]) if self.payload else "custom"


BatchEvaluator = Callable[[np.ndarray, np.ndarray, TorusGrid], np.ndarray]


@dataclass(frozen=True)
class Functional:
    """A real-valued function of phase-space points with a structured label."""

    label: FunctionalLabel
    evaluator: Callable[[PhaseSpacePoint], float]
    batch_evaluator: Optional[BatchEvaluator] = None

    def __call__(self, p: PhaseSpacePoint) -> float:
        return float(self.evaluator(p))


def momentum_constraint(p: PhaseSpacePoint) -> VectorField:
    """C_mom = -2 div_gamma(pi), returned as a vector field (index raised)."""
    grid = p.grid
    g_inv = K.sym_inverse(p.gamma.components, grid.dim)
    div = K.divergence_sym_cov(p.gamma.components, p.pi.components, grid, g_inv=g_inv)
    return VectorField(grid, -2.0 * K.sym_apply(g_inv, div, grid.dim))


def energy_constraint(p: PhaseSpacePoint) -> ScalarField:
    """C_en = -R(gamma) + Tr(pi^2) - Tr(pi)^2 / (d - 1)."""
    grid = p.grid
    values = _energy_density(p.gamma.components, p.pi.components, grid)
    return ScalarField(grid, values)


def _energy_density(gamma: np.ndarray, pi: np.ndarray, grid: TorusGrid) -> np.ndarray:
    g_inv = K.sym_inverse(gamma, grid.dim)
    tr, tr2 = K.endo_traces(g_inv, pi, grid.dim)
    r = K.ricci_scalar(gamma, grid)
    return -r + tr2 - tr * tr / (grid.dim - 1)


def _smeared_values(
    gamma: np.ndarray,
    pi: np.ndarray,
    shift: np.ndarray,
    lapse: np.ndarray,
    grid: TorusGrid,
) -> np.ndarray:
    """Batched C_(X,phi); gamma/pi may carry leading batch axes."""
    g_inv = K.sym_inverse(gamma, grid.dim)
    div = K.divergence_sym_cov(gamma, pi, grid, g_inv=g_inv)
    # gamma(X, C_mom) collapses to -2 X^i (div pi)_i: the raising cancels.
    density = -2.0 * K.vec_dot(shift, div, grid.dim)
    tr, tr2 = K.endo_traces(g_inv, pi, grid.dim)
    density = density + lapse * (-K.ricci_scalar(gamma, grid) + tr2 - tr * tr / (grid.dim - 1))
    return K.integrate_scalar(density, gamma, grid)


def smeared_constraint(a: Section, p: PhaseSpacePoint) -> float:
    """C_(X,phi) evaluated at (gamma, pi); linear in the section."""
    check_same_grid(a.shift, p.gamma)
    value = _smeared_values(
        p.gamma.components, p.pi.components, a.shift.components, a.lapse.values, p.grid
    )
    return float(value)


def constraint_functional(a: Section) -> Functional:
    """The smeared constraint as a labeled Functional."""
    shift, lapse = a.shift.components, a.lapse.values

    def batch(gamma: np.ndarray, pi: np.ndarray, grid: TorusGrid) -> np.ndarray:
        return _smeared_values(gamma, pi, shift, lapse, grid)

    return Functional(
        label=FunctionalLabel("C_section", (a,)),
        evaluator=lambda p: smeared_constraint(a, p),
        batch_evaluator=batch,
    )


def custom_functional(name: str, evaluator: Callable[[PhaseSpacePoint], float]) -> Functional:
    return Functional(FunctionalLabel("custom", (name,)), evaluator)


def add_functionals(f: Functional, g: Functional, cf: float = 1.0, cg: float = 1.0) -> Functional:
    """Linear combination cf*F + cg*G."""
    batch = None
    if f.batch_evaluator is not None and g.batch_evaluator is not None:
        fb, gb = f.batch_evaluator, g.batch_evaluator

        def batch(gamma, pi, grid):
            return cf * fb(gamma, pi, grid) + cg * gb(gamma, pi, grid)

    return Functional(
        FunctionalLabel("custom", (f"{cf}*{f.label.describe()} + {cg}*{g.label.describe()}",)),
        lambda p: cf * f(p) + cg * g(p),
        batch,
    )


def product_functional(f: Functional, g: Functional) -> Functional:
    """Pointwise product F*G on phase space."""
    batch = None
    if f.batch_evaluator is not None and g.batch_evaluator is not None:
        fb, gb = f.batch_evaluator, g.batch_evaluator

        def batch(gamma, pi, grid):
            return fb(gamma, pi, grid) * gb(gamma, pi, grid)

    return Functional(
        FunctionalLabel("product", (f.label, g.label)),
        lambda p: f(p) * g(p),
        batch,
    )
