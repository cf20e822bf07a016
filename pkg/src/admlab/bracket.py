"""Discrete canonical Poisson structure on phase space.

Degrees of freedom are the nodal metric components gamma_ij(x), i <= j,
followed by their conjugate momenta.  The conjugate of gamma_ij(x) is the
contravariant tensor density ptilde^{ij} = sqrt(det gamma) gamma^{ik}
gamma^{jl} pi_kl at the same node, scaled by the quadrature cell weight and
by 2 for off-diagonal slots.  With that scaling, the discrete pairing

    {F, G} = sum_A ( dF/dgamma_A dG/dp_A - dG/dgamma_A dF/dp_A )

is the quadrature of the continuum canonical bracket, which is what makes
the smeared-constraint bracket relations verifiable to discretization
accuracy.  All derivatives of functionals are taken numerically, one nodal
degree of freedom at a time; functionals that expose a batch evaluator get
their sweeps vectorized in chunks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import _kernels as K
from .calculus import (
    apply_contravariant_to_form,
    grad_spatial,
    lie_bracket,
    lie_derivative_scalar,
    lie_derivative_sym2,
    metric_inverse,
    one_form_combination,
)
from .constraints import (
    Functional,
    FunctionalLabel,
    PhaseSpacePoint,
    Section,
    constraint_functional,
)
from .errors import DegenerateMetricError
from .grid import (
    MetricField,
    ScalarField,
    SymTensorField,
    TorusGrid,
    VectorField,
    check_same_grid,
    leading_minors,
    sym_multiplicity,
)


@dataclass(frozen=True)
class DofVector:
    """Packed canonical coordinates: gamma block then momentum block."""

    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        n = 2 * self.grid.n_sym_components * self.grid.n_points
        arr = np.asarray(self.values, dtype=float)
        if arr.shape != (n,):
            raise ValueError(f"expected {n} degrees of freedom, got shape {arr.shape}")
        object.__setattr__(self, "values", arr)

    @property
    def n_half(self) -> int:
        return self.grid.n_sym_components * self.grid.n_points

    def gamma_block(self) -> np.ndarray:
        return self.values[: self.n_half]

    def momentum_block(self) -> np.ndarray:
        return self.values[self.n_half :]


@dataclass(frozen=True)
class GradientStrategy:
    """Finite-difference recipe for functional gradients.

    Per-DOF step is eta * max(1, |value|).  ``richardson`` refines the chosen
    stencil by combining steps eta and eta/2.
    """

    method: Literal["central_fd", "higher_order_fd"] = "central_fd"
    eta: float = 1e-6
    richardson: bool = False
    chunk_size: int = 512


def _momentum_scale(grid: TorusGrid) -> np.ndarray:
    """Cell weight times off-diagonal multiplicity, one entry per packed slot."""
    return grid.cell_weight * sym_multiplicity(grid.dim)


def pack_canonical(p: PhaseSpacePoint) -> DofVector:
    """Canonical coordinates of a phase-space point."""
    grid = p.grid
    gamma = p.gamma.components
    g_inv = K.sym_inverse(gamma, grid.dim)
    ptilde = K.raise_or_lower_sym(p.pi.components, g_inv, grid.dim)
    ptilde = ptilde * np.expand_dims(np.sqrt(K.sym_det(gamma, grid.dim)), -grid.dim - 1)
    scale = _momentum_scale(grid).reshape((-1,) + (1,) * grid.dim)
    packed = np.concatenate([gamma.ravel(), (scale * ptilde).ravel()])
    return DofVector(grid, packed)


def _unpack_arrays(values: np.ndarray, grid: TorusGrid) -> tuple[np.ndarray, np.ndarray]:
    """Batched inverse of the packing map; raises on degenerate metrics."""
    ncomp = grid.n_sym_components
    lead = values.shape[:-1]
    n_half = ncomp * grid.n_points
    gamma = values[..., :n_half].reshape(lead + (ncomp,) + grid.shape)
    for k, minor in enumerate(leading_minors(gamma, grid.dim), start=1):
        if not np.all(minor > 0.0):
            raise DegenerateMetricError(f"unpacked metric has non-positive minor {k}")
    scale = _momentum_scale(grid).reshape((-1,) + (1,) * grid.dim)
    ptilde = values[..., n_half:].reshape(lead + (ncomp,) + grid.shape) / scale
    pi = K.raise_or_lower_sym(ptilde, gamma, grid.dim)
    pi = pi / np.expand_dims(np.sqrt(K.sym_det(gamma, grid.dim)), -grid.dim - 1)
    return gamma, pi


def unpack_canonical(x: DofVector) -> PhaseSpacePoint:
    gamma, pi = _unpack_arrays(x.values, x.grid)
    return PhaseSpacePoint(
        MetricField.from_components(x.grid, gamma),
        SymTensorField(x.grid, pi, "covariant"),
    )


_STENCILS = {
    # offsets (in units of the step) and weights (divided by the step)
    "central_fd": ((1.0, 0.5), (-1.0, -0.5)),
    "higher_order_fd": ((-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)),
}


def _sweep_batched(functional: Functional, x0: np.ndarray, steps: np.ndarray,
                   grid: TorusGrid, stencil, chunk_size: int) -> np.ndarray:
    """All partial derivatives via the functional's batch evaluator."""
    n = x0.size
    grad = np.zeros(n)
    offsets = np.array([o for o, _ in stencil])
    weights = np.array([w for _, w in stencil])
    for start in range(0, n, chunk_size):
        idx = np.arange(start, min(start + chunk_size, n))
        h = steps[idx]
        batch = np.repeat(x0[None, :], idx.size * offsets.size, axis=0)
        rows = np.arange(idx.size * offsets.size)
        cols = np.repeat(idx, offsets.size)
        batch[rows, cols] += np.repeat(h, offsets.size) * np.tile(offsets, idx.size)
        try:
            gamma, pi = _unpack_arrays(batch, grid)
        except DegenerateMetricError:
            # one retry with a smaller step before giving up
            batch = np.repeat(x0[None, :], idx.size * offsets.size, axis=0)
            batch[rows, cols] += np.repeat(0.5 * h, offsets.size) * np.tile(offsets, idx.size)
            gamma, pi = _unpack_arrays(batch, grid)
            h = 0.5 * h
        values = functional.batch_evaluator(gamma, pi, grid)
        values = values.reshape(idx.size, offsets.size)
        grad[idx] = values @ weights / h
    return grad


def _sweep_scalar(functional: Functional, x0: np.ndarray, steps: np.ndarray,
                  grid: TorusGrid, stencil) -> np.ndarray:
    grad = np.zeros(x0.size)
    for a in range(x0.size):
        h = steps[a]
        for attempt in range(2):
            try:
                acc = 0.0
                for offset, weight in stencil:
                    x = x0.copy()
                    x[a] += offset * h
                    acc += weight * functional(unpack_canonical(DofVector(grid, x)))
                grad[a] = acc / h
                break
            except DegenerateMetricError:
                if attempt == 1:
                    raise
                h = 0.5 * h
    return grad


def _gradient_once(functional: Functional, x0: np.ndarray, eta: float,
                   grid: TorusGrid, strategy: GradientStrategy) -> np.ndarray:
    steps = eta * np.maximum(1.0, np.abs(x0))
    stencil = _STENCILS[strategy.method]
    if functional.batch_evaluator is not None:
        return _sweep_batched(functional, x0, steps, grid, stencil, strategy.chunk_size)
    return _sweep_scalar(functional, x0, steps, grid, stencil)


def functional_gradient(
    functional: Functional, p: PhaseSpacePoint, strategy: GradientStrategy = GradientStrategy()
) -> DofVector:
    """Partial derivatives of the functional with respect to every canonical DOF."""
    x0 = pack_canonical(p).values
    grad = _gradient_once(functional, x0, strategy.eta, p.grid, strategy)
    if strategy.richardson:
        finer = _gradient_once(functional, x0, 0.5 * strategy.eta, p.grid, strategy)
        order = 2 if strategy.method == "central_fd" else 4
        factor = 2.0**order
        grad = (factor * finer - grad) / (factor - 1.0)
    return DofVector(p.grid, grad)


def _pair_gradients(grad_f: np.ndarray, grad_g: np.ndarray, n_half: int) -> float:
    return float(
        np.dot(grad_f[:n_half], grad_g[n_half:]) - np.dot(grad_g[:n_half], grad_f[n_half:])
    )


def poisson_bracket(
    f: Functional, g: Functional, p: PhaseSpacePoint,
    strategy: GradientStrategy = GradientStrategy(),
) -> float:
    """{F, G}(p) via numerical gradients; antisymmetric and bilinear."""
    grad_f = functional_gradient(f, p, strategy).values
    grad_g = functional_gradient(g, p, strategy).values
    return _pair_gradients(grad_f, grad_g, p.grid.n_sym_components * p.grid.n_points)


def bracket_as_functional(
    f: Functional, g: Functional, strategy: GradientStrategy = GradientStrategy()
) -> Functional:
    """{F, G} as a Functional, so brackets can be nested.

    Each evaluation runs two full gradient sweeps; nesting multiplies the
    cost by the DOF count, so triple brackets are affordable only on coarse
    grids.
    """
    return Functional(
        FunctionalLabel("nested_bracket", (f.label, g.label)),
        lambda p: poisson_bracket(f, g, p, strategy),
    )


@dataclass(frozen=True)
class RelationCheck:
    """One verified bracket relation at one phase-space point."""

    relation: str
    statement: str
    bracket: float
    smeared: float

    @property
    def residual(self) -> float:
        return abs(self.bracket - self.smeared)

    @property
    def scale(self) -> float:
        return max(abs(self.bracket), abs(self.smeared))

    @property
    def relative(self) -> float:
        return self.residual / self.scale if self.scale > 0 else 0.0


def dewitt_residuals(
    p: PhaseSpacePoint,
    x: VectorField,
    y: VectorField,
    phi: ScalarField,
    psi: ScalarField,
    strategy: GradientStrategy = GradientStrategy(),
) -> list[RelationCheck]:
    """Residuals of the three constraint bracket relations at one point.

    (i)   {C_X, C_Y}     vs C_[X,Y]
    (ii)  {C_X, C_phi}   vs C_(X.phi)
    (iii) {C_phi, C_psi} vs C_(gamma^{-1}(phi dpsi - psi dphi))

    The third smearing vector is built with the metric of ``p``, which is
    exactly what makes the family of brackets metric-dependent.
    """
    grid = p.grid
    n_half = grid.n_sym_components * grid.n_points
    c_x = constraint_functional(Section.from_shift(x))
    c_y = constraint_functional(Section.from_shift(y))
    c_phi = constraint_functional(Section.from_lapse(phi))
    c_psi = constraint_functional(Section.from_lapse(psi))
    grads = {
        name: functional_gradient(f, p, strategy).values
        for name, f in (("x", c_x), ("y", c_y), ("phi", c_phi), ("psi", c_psi))
    }

    checks = []
    rhs_i = Section.from_shift(lie_bracket(x, y))
    checks.append(
        RelationCheck(
            "shift_shift",
            "{C_X, C_Y} = C_[X,Y]",
            _pair_gradients(grads["x"], grads["y"], n_half),
            constraint_functional(rhs_i)(p),
        )
    )
    rhs_ii = Section.from_lapse(lie_derivative_scalar(x, phi))
    checks.append(
        RelationCheck(
            "shift_lapse",
            "{C_X, C_phi} = C_(X.phi)",
            _pair_gradients(grads["x"], grads["phi"], n_half),
            constraint_functional(rhs_ii)(p),
        )
    )
    rhs_iii = Section.from_shift(
        apply_contravariant_to_form(metric_inverse(p.gamma), one_form_combination(phi, psi))
    )
    checks.append(
        RelationCheck(
            "lapse_lapse",
            "{C_phi, C_psi} = C_(gamma^{-1}(phi dpsi - psi dphi))",
            _pair_gradients(grads["phi"], grads["psi"], n_half),
            constraint_functional(rhs_iii)(p),
        )
    )
    return checks


def frozen_section_bracket(gamma_bar: MetricField, a: Section, b: Section) -> Section:
    """Bracket of section labels with the metric frozen to gamma_bar.

    ([X,Y] + phi grad(psi) - psi grad(phi),  X.psi - Y.phi)
    """
    check_same_grid(gamma_bar, a.shift, b.shift)
    x, phi = a.shift, a.lapse
    y, psi = b.shift, b.lapse
    shift = lie_bracket(x, y).components
    shift = shift + phi.values * grad_spatial(gamma_bar, psi).components
    shift = shift - psi.values * grad_spatial(gamma_bar, phi).components
    lapse = lie_derivative_scalar(x, psi).values - lie_derivative_scalar(y, phi).values
    return Section(VectorField(gamma_bar.grid, shift), ScalarField(gamma_bar.grid, lapse))


def section_jacobiator_frozen(gamma_bar: MetricField, a: Section, b: Section, c: Section) -> Section:
    """[a,[b,c]] + [b,[c,a]] + [c,[a,b]] under the frozen bracket."""
    j1 = frozen_section_bracket(gamma_bar, a, frozen_section_bracket(gamma_bar, b, c))
    j2 = frozen_section_bracket(gamma_bar, b, frozen_section_bracket(gamma_bar, c, a))
    j3 = frozen_section_bracket(gamma_bar, c, frozen_section_bracket(gamma_bar, a, b))
    grid = gamma_bar.grid
    return Section(
        VectorField(grid, j1.shift.components + j2.shift.components + j3.shift.components),
        ScalarField(grid, j1.lapse.values + j2.lapse.values + j3.lapse.values),
    )


def anomaly_section(
    gamma_bar: MetricField, x: VectorField, phi: ScalarField, psi: ScalarField
) -> Section:
    """The section (L_X(gamma_bar^{-1}) applied to (phi dpsi - psi dphi), 0)."""
    moved_inverse = lie_derivative_sym2(x, metric_inverse(gamma_bar))
    shift = apply_contravariant_to_form(moved_inverse, one_form_combination(phi, psi))
    return Section.from_shift(shift)


def frozen_jacobiator_residual(
    gamma_bar: MetricField, x: VectorField, phi: ScalarField, psi: ScalarField
) -> float:
    """Sup-norm gap between the frozen-bracket jacobiator of ((X,0),(0,phi),(0,psi))
    and its closed-form anomaly section."""
    jac = section_jacobiator_frozen(
        gamma_bar, Section.from_shift(x), Section.from_lapse(phi), Section.from_lapse(psi)
    )
    target = anomaly_section(gamma_bar, x, phi, psi)
    shift_gap = float(np.max(np.abs(jac.shift.components - target.shift.components)))
    lapse_gap = jac.lapse.sup_norm()  # the anomaly has no lapse part
    return max(shift_gap, lapse_gap)
