"""Batched array kernels behind the public field operations.

Layout convention: the trailing ``dim`` axes of every array are grid axes.
A component axis, when present, sits immediately before them -- packed
symmetric components (i <= j) for 2-tensors, plain index for vectors.
Christoffel arrays carry (upper, packed-lower) axes.  Anything in front of
these broadcasts, so a batch of field configurations is just a leading axis;
the finite-difference gradient code relies on this.
"""

from __future__ import annotations

import numpy as np

from .grid import TorusGrid, sym_index, sym_pairs


def comp(arr: np.ndarray, dim: int, i: int, j: int) -> np.ndarray:
    """View of packed symmetric component (i, j)."""
    return arr[(Ellipsis, sym_index(dim, i, j)) + (slice(None),) * dim]


def vcomp(arr: np.ndarray, dim: int, i: int) -> np.ndarray:
    """View of vector/one-form component i."""
    return arr[(Ellipsis, i) + (slice(None),) * dim]


def gcomp(arr: np.ndarray, dim: int, k: int, i: int, j: int) -> np.ndarray:
    """View of Christoffel component Gamma^k_ij."""
    return arr[(Ellipsis, k, sym_index(dim, i, j)) + (slice(None),) * dim]


def deriv(arr: np.ndarray, grid: TorusGrid, axis: int) -> np.ndarray:
    """Spectral partial derivative along grid axis ``axis``.

    Exact for trigonometric polynomials of degree < N/2; the Nyquist mode is
    dropped (its derivative phase is not representable on the grid).
    """
    if not 0 <= axis < grid.dim:
        raise ValueError(f"axis must be in [0, {grid.dim}), got {axis}")
    fft_axis = axis - grid.dim  # grid axes are the trailing ones
    spectrum = np.fft.fft(arr, axis=fft_axis)
    spectrum *= 1j * grid.wavenumbers(axis)
    return np.fft.ifft(spectrum, axis=fft_axis).real


def all_derivs(arr: np.ndarray, grid: TorusGrid) -> list[np.ndarray]:
    """[d_0 arr, ..., d_{dim-1} arr]."""
    return [deriv(arr, grid, axis) for axis in range(grid.dim)]


def sym_det(g: np.ndarray, dim: int) -> np.ndarray:
    """Determinant of a packed symmetric matrix field."""
    if dim == 2:
        return comp(g, 2, 0, 0) * comp(g, 2, 1, 1) - comp(g, 2, 0, 1) ** 2
    a, b, c = comp(g, 3, 0, 0), comp(g, 3, 0, 1), comp(g, 3, 0, 2)
    d_, e, f = comp(g, 3, 1, 1), comp(g, 3, 1, 2), comp(g, 3, 2, 2)
    return a * (d_ * f - e * e) - b * (b * f - e * c) + c * (b * e - d_ * c)


def sym_inverse(g: np.ndarray, dim: int, det: np.ndarray | None = None) -> np.ndarray:
    """Pointwise inverse of a packed symmetric matrix field (adjugate formula)."""
    if det is None:
        det = sym_det(g, dim)
    out = np.empty_like(g)
    if dim == 2:
        a, b, c = comp(g, 2, 0, 0), comp(g, 2, 0, 1), comp(g, 2, 1, 1)
        comp(out, 2, 0, 0)[...] = c / det
        comp(out, 2, 0, 1)[...] = -b / det
        comp(out, 2, 1, 1)[...] = a / det
        return out
    a, b, c = comp(g, 3, 0, 0), comp(g, 3, 0, 1), comp(g, 3, 0, 2)
    d_, e, f = comp(g, 3, 1, 1), comp(g, 3, 1, 2), comp(g, 3, 2, 2)
    comp(out, 3, 0, 0)[...] = (d_ * f - e * e) / det
    comp(out, 3, 0, 1)[...] = (c * e - b * f) / det
    comp(out, 3, 0, 2)[...] = (b * e - c * d_) / det
    comp(out, 3, 1, 1)[...] = (a * f - c * c) / det
    comp(out, 3, 1, 2)[...] = (b * c - a * e) / det
    comp(out, 3, 2, 2)[...] = (a * d_ - b * b) / det
    return out


def sym_apply(t: np.ndarray, v: np.ndarray, dim: int) -> np.ndarray:
    """Contract one index: (t v)_i = sum_j t_ij v_j (works for either variance)."""
    pieces = []
    for i in range(dim):
        acc = comp(t, dim, i, 0) * vcomp(v, dim, 0)
        for j in range(1, dim):
            acc = acc + comp(t, dim, i, j) * vcomp(v, dim, j)
        pieces.append(acc)
    return np.stack(pieces, axis=-dim - 1)


def vec_dot(u: np.ndarray, v: np.ndarray, dim: int) -> np.ndarray:
    """sum_i u_i v_i."""
    acc = vcomp(u, dim, 0) * vcomp(v, dim, 0)
    for i in range(1, dim):
        acc = acc + vcomp(u, dim, i) * vcomp(v, dim, i)
    return acc


def sym_pair_contract(t: np.ndarray, u: np.ndarray, v: np.ndarray, dim: int) -> np.ndarray:
    """sum_ij t_ij u_i v_j."""
    return vec_dot(sym_apply(t, u, dim), v, dim)


def raise_or_lower_sym(s: np.ndarray, m: np.ndarray, dim: int) -> np.ndarray:
    """(m s m)_ij = sum_kl m_ik s_kl m_lj; flips the variance of ``s`` when ``m``
    is the (inverse) metric."""
    pieces = []
    for i, j in sym_pairs(dim):
        acc = None
        for k in range(dim):
            for l in range(dim):
                term = comp(m, dim, i, k) * comp(s, dim, k, l) * comp(m, dim, l, j)
                acc = term if acc is None else acc + term
        pieces.append(acc)
    return np.stack(pieces, axis=-dim - 1)


def endo_traces(g_inv: np.ndarray, pi: np.ndarray, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Traces of pi viewed as the endomorphism pi^i_j = g^{ik} pi_kj.

    Returns (tr pi, tr pi^2).
    """
    endo = [[None] * dim for _ in range(dim)]
    for i in range(dim):
        for j in range(dim):
            acc = None
            for k in range(dim):
                term = comp(g_inv, dim, i, k) * comp(pi, dim, k, j)
                acc = term if acc is None else acc + term
            endo[i][j] = acc
    tr = endo[0][0]
    for i in range(1, dim):
        tr = tr + endo[i][i]
    tr2 = None
    for i in range(dim):
        for j in range(dim):
            term = endo[i][j] * endo[j][i]
            tr2 = term if tr2 is None else tr2 + term
    return tr, tr2


def christoffel(gamma: np.ndarray, grid: TorusGrid, g_inv: np.ndarray | None = None) -> np.ndarray:
    """Gamma^k_ij = 1/2 g^{kl} (d_i g_lj + d_j g_li - d_l g_ij), packed lower pair."""
    dim = grid.dim
    if g_inv is None:
        g_inv = sym_inverse(gamma, dim)
    dg = [deriv(gamma, grid, axis) for axis in range(dim)]  # dg[l] ~ d_l gamma
    lowered = []  # [ (i,j) slot ] -> list over l of (d_i g_lj + d_j g_li - d_l g_ij)
    for i, j in sym_pairs(dim):
        lowered.append(
            [comp(dg[i], dim, l, j) + comp(dg[j], dim, l, i) - comp(dg[l], dim, i, j) for l in range(dim)]
        )
    blocks = []
    for k in range(dim):
        rows = []
        for slot, (i, j) in enumerate(sym_pairs(dim)):
            acc = None
            for l in range(dim):
                term = comp(g_inv, dim, k, l) * lowered[slot][l]
                acc = term if acc is None else acc + term
            rows.append(0.5 * acc)
        blocks.append(np.stack(rows, axis=-dim - 1))
    return np.stack(blocks, axis=-dim - 2)


def ricci_scalar(gamma: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Scalar curvature from Ric_jl = d_i G^i_jl - d_l G^i_ij + G^i_im G^m_jl - G^i_lm G^m_ij."""
    dim = grid.dim
    g_inv = sym_inverse(gamma, dim)
    gam = christoffel(gamma, grid, g_inv)

    div_gam = {}  # (j,l) packed slot -> sum_i d_i G^i_jl
    for slot, (j, l) in enumerate(sym_pairs(dim)):
        acc = None
        for i in range(dim):
            term = deriv(gcomp(gam, dim, i, j, l), grid, i)
            acc = term if acc is None else acc + term
        div_gam[j, l] = acc

    tr_gam = []  # m -> sum_i G^i_im
    for m in range(dim):
        acc = None
        for i in range(dim):
            term = gcomp(gam, dim, i, i, m)
            acc = term if acc is None else acc + term
        tr_gam.append(acc)
    d_tr_gam = [[deriv(tr_gam[j], grid, l) for l in range(dim)] for j in range(dim)]

    scalar = None
    for j in range(dim):
        for l in range(dim):
            ric = div_gam[min(j, l), max(j, l)] - d_tr_gam[j][l]
            for m in range(dim):
                ric = ric + tr_gam[m] * gcomp(gam, dim, m, j, l)
                for i in range(dim):
                    ric = ric - gcomp(gam, dim, i, l, m) * gcomp(gam, dim, m, i, j)
            term = comp(g_inv, dim, j, l) * ric
            scalar = term if scalar is None else scalar + term
    return scalar


def lie_bracket_vec(x: np.ndarray, y: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i."""
    dim = grid.dim
    dx = [deriv(x, grid, axis) for axis in range(dim)]
    dy = [deriv(y, grid, axis) for axis in range(dim)]
    pieces = []
    for i in range(dim):
        acc = None
        for j in range(dim):
            term = vcomp(x, dim, j) * vcomp(dy[j], dim, i) - vcomp(y, dim, j) * vcomp(dx[j], dim, i)
            acc = term if acc is None else acc + term
        pieces.append(acc)
    return np.stack(pieces, axis=-dim - 1)


def lie_sym2(x: np.ndarray, t: np.ndarray, grid: TorusGrid, variance: str) -> np.ndarray:
    """Lie derivative of a symmetric 2-tensor along X, for either variance."""
    dim = grid.dim
    dt = [deriv(t, grid, axis) for axis in range(dim)]
    dx = [[deriv(vcomp(x, dim, k), grid, axis) for axis in range(dim)] for k in range(dim)]
    sign = 1.0 if variance == "covariant" else -1.0
    pieces = []
    for i, j in sym_pairs(dim):
        acc = None
        for k in range(dim):
            adv = vcomp(x, dim, k) * comp(dt[k], dim, i, j)
            if variance == "covariant":
                grad_terms = comp(t, dim, k, j) * dx[k][i] + comp(t, dim, i, k) * dx[k][j]
            else:
                grad_terms = comp(t, dim, k, j) * dx[i][k] + comp(t, dim, i, k) * dx[j][k]
            term = adv + sign * grad_terms
            acc = term if acc is None else acc + term
        pieces.append(acc)
    return np.stack(pieces, axis=-dim - 1)


def divergence_sym_cov(
    gamma: np.ndarray,
    pi: np.ndarray,
    grid: TorusGrid,
    g_inv: np.ndarray | None = None,
    gam: np.ndarray | None = None,
) -> np.ndarray:
    """(div pi)_j = g^{ik} (d_i pi_kj - G^l_ik pi_lj - G^l_ij pi_kl), one-form output."""
    dim = grid.dim
    if g_inv is None:
        g_inv = sym_inverse(gamma, dim)
    if gam is None:
        gam = christoffel(gamma, grid, g_inv)
    dpi = [deriv(pi, grid, axis) for axis in range(dim)]
    pieces = []
    for j in range(dim):
        acc = None
        for i in range(dim):
            for k in range(dim):
                nabla = comp(dpi[i], dim, k, j)
                for l in range(dim):
                    nabla = nabla - gcomp(gam, dim, l, i, k) * comp(pi, dim, l, j)
                    nabla = nabla - gcomp(gam, dim, l, i, j) * comp(pi, dim, k, l)
                term = comp(g_inv, dim, i, k) * nabla
                acc = term if acc is None else acc + term
        pieces.append(acc)
    return np.stack(pieces, axis=-dim - 1)


def gradient_vec(g_inv: np.ndarray, phi: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """(grad phi)^i = g^{ij} d_j phi."""
    dphi = np.stack(all_derivs(phi, grid), axis=-grid.dim - 1)
    return sym_apply(g_inv, dphi, grid.dim)


def grid_sum(values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Sum over the grid axes (fixed C order, deterministic)."""
    return values.sum(axis=tuple(range(-grid.dim, 0)))


def integrate_scalar(values: np.ndarray, gamma: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Quadrature of ``values`` against the volume density of ``gamma``."""
    vol = np.sqrt(sym_det(gamma, grid.dim))
    return grid_sum(values * vol, grid) * grid.cell_weight
