"""Seeded band-limited random fields for reproducible experiments.

A field is a real trigonometric polynomial with Fourier support |k_i| <= kmax,
built from normal coefficients of a PCG64 generator and rescaled so its
sup-norm equals the requested amplitude.  Identical seeds give bit-identical
fields.
"""

from __future__ import annotations

import numpy as np

from .errors import BandLimitError, DegenerateMetricError
from .grid import MetricField, ScalarField, SymTensorField, TorusGrid, VectorField


def _band_modes(dim: int, kmax: int) -> list[tuple[int, ...]]:
    """Mode vectors with |k_i| <= kmax, one per conjugate pair, plus DC."""
    rng = range(-kmax, kmax + 1)
    modes = [(0,) * dim]
    grids = np.meshgrid(*([list(rng)] * dim), indexing="ij")
    all_modes = np.stack([g.ravel() for g in grids], axis=1)
    for k in all_modes:
        k = tuple(int(v) for v in k)
        nonzero = next((v for v in k if v != 0), 0)
        if nonzero > 0:  # keep one representative of each +/-k pair
            modes.append(k)
    return modes


def _random_components(grid: TorusGrid, n_comp: int, kmax: int, rng: np.random.Generator) -> np.ndarray:
    modes = _band_modes(grid.dim, kmax)
    coeffs = rng.standard_normal((n_comp, len(modes), 2))
    coords = grid.coordinate_fields()
    out = np.zeros((n_comp,) + grid.shape)
    for m, k in enumerate(modes):
        phase = sum(k[a] * coords[a] for a in range(grid.dim))
        cos_k, sin_k = np.cos(phase), np.sin(phase)
        for c in range(n_comp):
            out[c] += coeffs[c, m, 0] * cos_k + (0.0 if all(v == 0 for v in k) else coeffs[c, m, 1] * sin_k)
    return out


def random_band_limited(
    grid: TorusGrid,
    seed: int,
    kmax: int,
    kind: str = "scalar",
    amplitude: float = 1.0,
):
    """Deterministic random field of the requested kind.

    ``kind``: "scalar", "vector", "sym2", or "metric".  For "metric" the
    result is the euclidean metric plus a sym2 perturbation of sup-norm
    ``amplitude``; if that fails the positive-definiteness test the call
    errors rather than rescaling.
    """
    if kmax >= grid.n_per_axis // 2:
        raise BandLimitError(f"kmax must be < N/2 = {grid.n_per_axis // 2}, got {kmax}")
    if kmax < 0:
        raise BandLimitError(f"kmax must be non-negative, got {kmax}")
    if amplitude < 0:
        raise ValueError(f"amplitude must be non-negative, got {amplitude}")
    rng = np.random.default_rng(seed)
    n_comp = {"scalar": 1, "vector": grid.dim, "sym2": grid.n_sym_components, "metric": grid.n_sym_components}
    if kind not in n_comp:
        raise ValueError(f"unknown kind {kind!r}")
    raw = _random_components(grid, n_comp[kind], kmax, rng)
    peak = np.max(np.abs(raw))
    scaled = raw * (amplitude / peak) if peak > 0 and amplitude > 0 else np.zeros_like(raw)

    if kind == "scalar":
        return ScalarField(grid, scaled[0])
    if kind == "vector":
        return VectorField(grid, scaled)
    if kind == "sym2":
        return SymTensorField(grid, scaled, "covariant")
    identity = SymTensorField.identity(grid).components
    try:
        return MetricField.from_components(grid, identity + scaled)
    except DegenerateMetricError as exc:
        raise DegenerateMetricError(
            f"metric perturbation of amplitude {amplitude} is not positive-definite; "
            f"lower the amplitude (seed {seed})"
        ) from exc
