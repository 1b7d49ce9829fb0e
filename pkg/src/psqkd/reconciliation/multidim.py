"""Eight-dimensional reconciliation over the induced binary-input channel.

Bob maps each block of eight samples onto the unit sphere point carrying
his key bits, publishes the rotation coefficients taking his normalized
block there, and the syndrome of the bits.  Alice applies the same
rotation to her normalized block; her result concentrates around Bob's
sphere point with a spread set only by the correlation of the data.

The per-dimension channel model is computed exactly rather than assumed.
Writing Alice's normalized block as cos(theta) times Bob's direction plus
an isotropic remainder, each rotated coordinate v_i obeys
E[v_i | u_i] = mu u_i and Var[v_i] = (1 - mu^2)/8 with mu = E[cos theta],
and cos(theta) = s / sqrt(s^2 + (1 - rho^2) q) for s = rho r +
sqrt(1 - rho^2) g, where r is chi with 8 degrees of freedom, g standard
normal, q chi-square with 7, and rho^2 = snr/(1 + snr).  mu is evaluated
by Gauss-Laguerre/Hermite quadrature over (r, g, q).  LLRs then follow
from the Gaussian approximation of v_i, whose first two moments the model
gets exactly (the calibration test gates this).
"""

from __future__ import annotations

import functools
import math

import numpy as np
from scipy import special

from ..errors import DegenerateBlockError, DomainError
from .bp import decode_syndrome
from .ldpc import LdpcCode
from .rotation import apply_rotation, rotation_coefficients

_NORM_FLOOR = 1e-12
_ROOT8 = math.sqrt(8.0)


def bits_to_sphere(bits) -> np.ndarray:
    """Map bits to sphere coordinates u_i = (1 - 2 b_i)/sqrt(8), (nb, 8)."""
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size % 8:
        raise DomainError(f"bit count must be a multiple of 8, got shape {bits.shape}")
    return ((1.0 - 2.0 * bits.astype(float)) / _ROOT8).reshape(-1, 8)


def _unit_blocks(data, side: str) -> np.ndarray:
    blocks = np.asarray(data, dtype=float)
    if blocks.ndim != 2 or blocks.shape[1] != 8:
        raise DomainError(f"{side} blocks must have shape (nb, 8), got {blocks.shape}")
    norms = np.linalg.norm(blocks, axis=1)
    bad = int(np.count_nonzero(norms <= _NORM_FLOOR))
    if bad:
        raise DegenerateBlockError(f"{bad} {side} block(s) with norm below {_NORM_FLOOR:g}")
    return blocks / norms[:, None]


def encode_side_info(y_blocks, bits):
    """Bob's side information: rotation coefficients per block, plus u.

    y_blocks has shape (nb, 8) and bits length 8*nb; returns (alpha, u)
    with both shaped (nb, 8).  The syndrome of the bits travels separately
    (an LdpcCode computes it).
    """
    u = bits_to_sphere(bits)
    y_unit = _unit_blocks(y_blocks, "reference")
    if u.shape != y_unit.shape:
        raise DomainError(f"bit blocks {u.shape} do not match data blocks {y_unit.shape}")
    return rotation_coefficients(y_unit, u), u


@functools.lru_cache(maxsize=256)
def mu_of_snr(snr: float, n_radial: int = 32, n_normal: int = 40,
              n_residual: int = 32) -> float:
    """Mean alignment mu = E[cos theta] between rotated blocks at a given snr.

    Triple Gaussian quadrature: the reference norm r (chi_8) through
    generalized Laguerre weight alpha=3 in r^2/2, the aligned noise g
    through Hermite, the orthogonal noise power q (chi-square_7) through
    Laguerre alpha=2.5 in q/2.
    """
    if snr <= 0.0:
        raise DomainError(f"snr must be > 0, got {snr}")
    rho2 = snr / (1.0 + snr)
    rho = math.sqrt(rho2)
    xr, wr = special.roots_genlaguerre(n_radial, 3.0)
    xg, wg = special.roots_hermite(n_normal)
    xq, wq = special.roots_genlaguerre(n_residual, 2.5)
    r = np.sqrt(2.0 * xr)
    g = math.sqrt(2.0) * xg
    q = 2.0 * xq
    s = rho * r[:, None, None] + math.sqrt(1.0 - rho2) * g[None, :, None]
    cos = s / np.sqrt(s * s + (1.0 - rho2) * q[None, None, :])
    w = (wr[:, None, None] * wg[None, :, None] * wq[None, None, :])
    norm = math.gamma(4.0) * math.sqrt(math.pi) * math.gamma(3.5)
    return float(np.sum(w * cos) / norm)


def llr_scale(mu: float) -> float:
    """LLR per unit v for the Gaussian N(mu*u_i, (1-mu^2)/8) model."""
    if not (0.0 < mu < 1.0):
        raise DomainError(f"mu must lie in (0, 1), got {mu}")
    return 2.0 * (mu / _ROOT8) / ((1.0 - mu * mu) / 8.0)


def snr_estimate(x, y) -> float:
    """Batch snr from the empirical correlation, rho^2/(1 - rho^2)."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size or x.size < 2:
        raise DomainError("need two equal-length batches of at least 2 samples")
    sxx = float(x @ x)
    syy = float(y @ y)
    if sxx <= 0.0 or syy <= 0.0:
        raise DomainError("zero-energy batch; snr undefined")
    rho2 = float(x @ y) ** 2 / (sxx * syy)
    if rho2 >= 1.0 - 1e-12:
        raise DomainError("correlation saturated; snr estimate diverges")
    return rho2 / (1.0 - rho2)


def decode(x_blocks, alpha, syndrome, code: LdpcCode, snr_est: float,
           max_iter: int = 200):
    """Alice's decoding pass: rotate, model LLRs, run syndrome decoding.

    Returns (bits, iterations) with bits None on failure.
    """
    x_unit = _unit_blocks(x_blocks, "query")
    if alpha is None or np.asarray(alpha).shape != x_unit.shape:
        raise DomainError("rotation coefficients must match block shape")
    v = apply_rotation(alpha, x_unit)
    mu = mu_of_snr(float(snr_est))
    llr = llr_scale(mu) * v.ravel()
    return decode_syndrome(code, llr, syndrome, max_iter=max_iter)
