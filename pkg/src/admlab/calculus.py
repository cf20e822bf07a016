"""Tensor calculus on the torus: the public, single-field operations.

These wrap the batched kernels in :mod:`admlab._kernels` with field types and
the validation the kernels skip.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from .errors import VarianceMismatchError
from .grid import (
    ChristoffelField,
    MetricField,
    OneFormField,
    ScalarField,
    SymTensorField,
    TorusGrid,
    VectorField,
    check_same_grid,
)


def spectral_derivative(f: ScalarField, axis: int) -> ScalarField:
    """Partial derivative d_axis f by Fourier differentiation (periodic, spectral)."""
    return ScalarField(f.grid, K.deriv(f.values, f.grid, axis))


def metric_inverse(gamma: MetricField) -> SymTensorField:
    """Pointwise inverse metric gamma^{ij} (contravariant)."""
    inv = K.sym_inverse(gamma.components, gamma.dim)
    return SymTensorField(gamma.grid, inv, "contravariant")


def christoffel(gamma: MetricField) -> ChristoffelField:
    """Levi-Civita connection coefficients of gamma."""
    return ChristoffelField(gamma.grid, K.christoffel(gamma.components, gamma.grid))


def scalar_curvature(gamma: MetricField) -> ScalarField:
    """Scalar curvature R(gamma); identically zero for flat (constant) metrics."""
    return ScalarField(gamma.grid, K.ricci_scalar(gamma.components, gamma.grid))


def grad_spatial(gamma: MetricField, phi: ScalarField) -> VectorField:
    """Metric gradient (grad phi)^i = gamma^{ij} d_j phi."""
    grid = check_same_grid(gamma, phi)
    g_inv = K.sym_inverse(gamma.components, grid.dim)
    return VectorField(grid, K.gradient_vec(g_inv, phi.values, grid))


def divergence_sym(gamma: MetricField, pi: SymTensorField) -> OneFormField:
    """Covariant divergence (div pi)_j = gamma^{ik} nabla_i pi_kj."""
    grid = check_same_grid(gamma, pi)
    pi.require_variance("covariant")
    return OneFormField(grid, K.divergence_sym_cov(gamma.components, pi.components, grid))


def lie_bracket(x: VectorField, y: VectorField) -> VectorField:
    """Commutator of vector fields, [X, Y]^i = X^j d_j Y^i - Y^j d_j X^i."""
    grid = check_same_grid(x, y)
    return VectorField(grid, K.lie_bracket_vec(x.components, y.components, grid))


def lie_derivative_sym2(x: VectorField, t: SymTensorField) -> SymTensorField:
    """Lie derivative of a symmetric 2-tensor; handles both variances.

    Covariant:      (L_X T)_ij = X^k d_k T_ij + T_kj d_i X^k + T_ik d_j X^k
    Contravariant:  (L_X T)^ij = X^k d_k T^ij - T^kj d_k X^i - T^ik d_k X^j
    """
    grid = check_same_grid(x, t)
    out = K.lie_sym2(x.components, t.components, grid, t.variance)
    return SymTensorField(grid, out, t.variance)


def lie_derivative_scalar(x: VectorField, f: ScalarField) -> ScalarField:
    """Directional derivative X . f = X^i d_i f."""
    grid = check_same_grid(x, f)
    df = np.stack(K.all_derivs(f.values, grid), axis=-grid.dim - 1)
    return ScalarField(grid, K.vec_dot(x.components, df, grid.dim))


def traces(gamma: MetricField, pi: SymTensorField) -> tuple[ScalarField, ScalarField]:
    """(Tr pi, Tr pi^2) with pi read as the endomorphism gamma^{ik} pi_kj."""
    grid = check_same_grid(gamma, pi)
    pi.require_variance("covariant")
    g_inv = K.sym_inverse(gamma.components, grid.dim)
    tr, tr2 = K.endo_traces(g_inv, pi.components, grid.dim)
    return ScalarField(grid, tr), ScalarField(grid, tr2)


def integrate_density(gamma: MetricField, f: ScalarField) -> float:
    """Integral of f against the riemannian volume density of gamma."""
    grid = check_same_grid(gamma, f)
    return float(K.integrate_scalar(f.values, gamma.components, grid))


def raise_index(gamma: MetricField, u: OneFormField) -> VectorField:
    """u^i = gamma^{ij} u_j."""
    grid = check_same_grid(gamma, u)
    g_inv = K.sym_inverse(gamma.components, grid.dim)
    return VectorField(grid, K.sym_apply(g_inv, u.components, grid.dim))


def lower_index(gamma: MetricField, x: VectorField) -> OneFormField:
    """x_i = gamma_ij x^j."""
    grid = check_same_grid(gamma, x)
    return OneFormField(grid, K.sym_apply(gamma.components, x.components, grid.dim))


def one_form_combination(phi: ScalarField, psi: ScalarField) -> OneFormField:
    """The one-form phi d(psi) - psi d(phi)."""
    grid = check_same_grid(phi, psi)
    dpsi = np.stack(K.all_derivs(psi.values, grid), axis=-grid.dim - 1)
    dphi = np.stack(K.all_derivs(phi.values, grid), axis=-grid.dim - 1)
    return OneFormField(grid, phi.values * dpsi - psi.values * dphi)


def contract_sym_vector(t: SymTensorField, x: VectorField) -> OneFormField:
    """(i_X T)_j = X^i T_ij for a covariant symmetric tensor."""
    grid = check_same_grid(t, x)
    t.require_variance("covariant")
    return OneFormField(grid, K.sym_apply(t.components, x.components, grid.dim))


def apply_contravariant_to_form(t: SymTensorField, u: OneFormField) -> VectorField:
    """(T u)^i = T^{ij} u_j for a contravariant symmetric tensor."""
    grid = check_same_grid(t, u)
    if t.variance != "contravariant":
        raise VarianceMismatchError("expected a contravariant tensor")
    return VectorField(grid, K.sym_apply(t.components, u.components, grid.dim))
