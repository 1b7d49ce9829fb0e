"""Conditional source preparation by photon counting on a tap of mode B.

A two-mode squeezed vacuum of variance V is split on a beamsplitter of
transmittance T; the reflected arm hits a photon counter of efficiency
eta_d.  Registering k clicks (or any click, for on-off counters) prepares a
non-Gaussian conditional state of the kept pair whose second moments, click
probabilities and equivalent-loss parametrization are computed here in
closed form.  In the prepare-and-measure picture the same conditioning is a
classical acceptance filter on Alice's heterodyne data, implemented by
:func:`filter_q`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError
from .gaussian import TwoModeCovariance

SCHEME_NONE = "none"
SCHEME_K_PHOTON = "k_photon"
SCHEME_ON_OFF = "on_off"
_SCHEMES = (SCHEME_NONE, SCHEME_K_PHOTON, SCHEME_ON_OFF)

K_MAX = 64
# Mixture series over the number of tap photons: stop once the remaining
# geometric tail is below this fraction of the partial sum (the click
# probability can itself be tiny, so the bound must be relative), hard cap
# on the index either way.
_SERIES_TAIL = 1e-14
_SERIES_CAP = 10000


@dataclass(frozen=True)
class SourceSpec:
    """Source configuration: squeezing, tap transmittance, conditioning scheme.

    scheme "none" disables the tap entirely (t is forced to 1), "k_photon"
    conditions on exactly ``k`` clicks, "on_off" on at least one click.
    eta_d is the counter efficiency; the detected fraction of tap photons.
    """

    v: float
    t: float = 1.0
    scheme: str = SCHEME_NONE
    k: int = 0
    eta_d: float = 1.0

    def __post_init__(self):
        if self.v < 1.0:
            raise DomainError(f"v must be >= 1, got {self.v}")
        if self.scheme not in _SCHEMES:
            raise DomainError(f"unknown scheme {self.scheme!r}")
        if self.scheme == SCHEME_NONE:
            object.__setattr__(self, "t", 1.0)
        if not (0.0 < self.t <= 1.0):
            raise DomainError(f"t must lie in (0, 1], got {self.t}")
        if self.scheme == SCHEME_K_PHOTON and not (0 <= self.k <= K_MAX):
            raise DomainError(f"k must lie in [0, {K_MAX}], got {self.k}")
        if not (0.0 < self.eta_d <= 1.0):
            raise DomainError(f"eta_d must lie in (0, 1], got {self.eta_d}")
        if self.t * self.lambda2 >= 1.0:
            raise DomainError("t * lambda^2 must be < 1")

    @property
    def lambda2(self) -> float:
        """Squared squeezing parameter (v - 1)/(v + 1)."""
        return (self.v - 1.0) / (self.v + 1.0)

    @property
    def lam(self) -> float:
        return math.sqrt(self.lambda2)

    @classmethod
    def tmsv(cls, v):
        return cls(v=v)

    @classmethod
    def k_photon(cls, v, t, k, eta_d=1.0):
        return cls(v=v, t=t, scheme=SCHEME_K_PHOTON, k=k, eta_d=eta_d)

    @classmethod
    def on_off(cls, v, t, eta_d=1.0):
        return cls(v=v, t=t, scheme=SCHEME_ON_OFF, eta_d=eta_d)


@dataclass(frozen=True)
class SubtractionReport:
    """Closed-form summary of the conditional state.

    success_prob is the click probability, cov the conditional covariance of
    the kept pair, and (v_a, eta_a) the equivalent pure-source-plus-loss
    parameters reproducing cov exactly:
    cov = (v_a, eta_a*v_a + 1 - eta_a, sqrt(eta_a*(v_a^2 - 1))).
    """

    success_prob: float
    v_tilde: float
    cov: TwoModeCovariance
    eta_a: float
    v_a: float


def _ideal_prob_k(lambda2, t, k):
    """Exact-k tap-photon probability: geometric with polynomial-free weight."""
    denom = 1.0 - t * lambda2
    base = (1.0 - lambda2) / denom
    ratio = lambda2 * (1.0 - t) / denom
    return base * ratio**k


def success_prob_k(src: SourceSpec, k: int | None = None) -> float:
    """Probability of exactly k clicks with an ideal counter (eta_d folded in
    when the source carries one).

    For eta_d = 1 this is the two-parameter geometric law
    (1 - lam^2)/(1 - T lam^2) * (lam^2 (1-T)/(1 - T lam^2))^k; for eta_d < 1
    it is the binomially thinned mixture over tap photon numbers.
    """
    if k is None:
        k = src.k
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    if src.eta_d == 1.0:
        return _ideal_prob_k(src.lambda2, src.t, k)
    weights, _ = _mixture_weights(src.lambda2, src.t, k, src.eta_d)
    return float(weights.sum())


def success_prob_onoff(src: SourceSpec) -> float:
    """Probability of at least one click.

    Ideal counter: (1-T) lam^2 / (1 - T lam^2).  Lossy counter: one minus the
    no-click probability of the thinned tap distribution.
    """
    lam2, t = src.lambda2, src.t
    if src.eta_d == 1.0:
        return (1.0 - t) * lam2 / (1.0 - lam2 * t)
    weights, _ = _onoff_weights(lam2, t, src.eta_d)
    return float(weights.sum())


def v_tilde(src: SourceSpec, k: int | None = None) -> float:
    """Conditional variance of Alice's accepted heterodyne marginal.

    Ideal k-click case: (k+1)/(1 - T lam^2).  For k = 0, T = 1 this is the
    unconditioned heterodyne variance (V+1)/2.
    """
    if k is None:
        k = src.k
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    return (k + 1.0) / (1.0 - src.t * src.lambda2)


def _mixture_weights(lambda2, t, k, eta_d):
    """Unnormalized weights over the tap photon number m >= k for k clicks.

    w_m = P(m) * C(m, k) * eta^k * (1-eta)^(m-k).  Series is truncated once
    the exact geometric tail bound drops below _SERIES_TAIL.
    Returns (weights, m_values).
    """
    denom = 1.0 - t * lambda2
    base = (1.0 - lambda2) / denom
    ratio = lambda2 * (1.0 - t) / denom
    if ratio == 0.0:
        # Tap is dark: only m = k = 0 has support.
        if k == 0:
            return np.array([base]), np.array([0])
        return np.array([0.0]), np.array([k])
    log_base = math.log(base)
    log_ratio = math.log(ratio)
    log_eta = math.log(eta_d)
    log_miss = math.log1p(-eta_d) if eta_d < 1.0 else -math.inf

    weights, ms = [], []
    m = k
    total = 0.0
    log_w = log_base + m * log_ratio + k * log_eta  # C(k,k) = 1, (1-eta)^0 = 1
    while m < _SERIES_CAP:
        w = math.exp(log_w)
        weights.append(w)
        ms.append(m)
        total += w
        if eta_d == 1.0:
            break
        # w_{m+1}/w_m = ratio*(1-eta)*(m+1)/(m+1-k), decreasing toward ratio*(1-eta).
        step = log_ratio + log_miss + math.log((m + 1.0) / (m + 1.0 - k))
        log_w += step
        r = math.exp(step)
        if r < 1.0 and w * r / (1.0 - r) < _SERIES_TAIL * total:
            break
        m += 1
    return np.asarray(weights), np.asarray(ms)


def _onoff_weights(lambda2, t, eta_d):
    """Unnormalized weights over tap photon number m >= 1 for at-least-one click.

    w_m = P(m) * (1 - (1-eta)^m).
    """
    denom = 1.0 - t * lambda2
    base = (1.0 - lambda2) / denom
    ratio = lambda2 * (1.0 - t) / denom
    if ratio == 0.0:
        return np.array([0.0]), np.array([1])
    weights, ms = [], []
    pm = base * ratio
    m = 1
    total = 0.0
    while m < _SERIES_CAP:
        w = pm * (1.0 - (1.0 - eta_d) ** m)
        weights.append(w)
        ms.append(m)
        total += w
        if total > 0.0 and pm * ratio / (1.0 - ratio) < _SERIES_TAIL * total:
            break
        pm *= ratio
        m += 1
    return np.asarray(weights), np.asarray(ms)


def _cov_from_v_tilde(lam, t, vt) -> TwoModeCovariance:
    """Conditional covariance of the kept pair for acceptance variance vt."""
    return TwoModeCovariance(
        v1=2.0 * vt - 1.0,
        v2=2.0 * t * lam * lam * vt + 1.0,
        phi=2.0 * math.sqrt(t) * lam * vt,
    )


def covariance_subtracted(src: SourceSpec) -> SubtractionReport:
    """Conditional covariance and click probability for the configured scheme.

    Every conditional component with m tap photons removed has second moments
    linear in its acceptance variance (m+1)/(1 - T lam^2) and zero mean, so
    any counter model reduces to the weight-averaged variance <vt>; the
    equivalent-loss form then follows with eta_a = T lam^2 <vt>/(<vt> - 1).
    """
    lam2, lam, t = src.lambda2, src.lam, src.t
    if src.scheme == SCHEME_NONE:
        vt = (src.v + 1.0) / 2.0
        cov = TwoModeCovariance(src.v, src.v, math.sqrt(src.v**2 - 1.0))
        return SubtractionReport(1.0, vt, cov, 1.0, src.v)

    if src.scheme == SCHEME_K_PHOTON:
        if src.eta_d == 1.0:
            prob = _ideal_prob_k(lambda2=lam2, t=t, k=src.k)
            vt = v_tilde(src)
            cov = _cov_from_v_tilde(lam, t, vt)
            v_a, eta_a = equivalent_loss_params(src)
            return SubtractionReport(prob, vt, cov, eta_a, v_a)
        weights, ms = _mixture_weights(lam2, t, src.k, src.eta_d)
    else:
        weights, ms = _onoff_weights(lam2, t, src.eta_d)

    prob = float(weights.sum())
    if prob <= 0.0:
        # Dark tap: conditional moments of the k-click branch still follow the
        # limiting formulas, harmless because the branch is never realized.
        vt = v_tilde(src, src.k if src.scheme == SCHEME_K_PHOTON else 1)
    else:
        vt_components = (ms + 1.0) / (1.0 - t * lam2)
        vt = float((weights * vt_components).sum() / prob)
    cov = _cov_from_v_tilde(lam, t, vt)
    if vt > 1.0:
        eta_a = t * lam2 * vt / (vt - 1.0)
    else:
        eta_a = 1.0  # vacuum-limit branch, cov is then (1, 1, 0)
    return SubtractionReport(prob, vt, cov, eta_a, 2.0 * vt - 1.0)


def equivalent_loss_params(src: SourceSpec) -> tuple[float, float]:
    """Pure-source-plus-loss parameters (v_a, eta_a) of the ideal k-click state.

    v_a = 2*(k+1)/(1 - T lam^2) - 1 and eta_a = lam^2 T (k+1)/(k + lam^2 T);
    the conditional covariance equals a variance-v_a two-mode squeezed vacuum
    whose second mode passed through transmittance eta_a.  Requires eta_d = 1.
    """
    if src.scheme != SCHEME_K_PHOTON:
        raise DomainError("equivalent_loss_params is defined for the k_photon scheme")
    if src.eta_d != 1.0:
        raise DomainError("equivalent_loss_params requires an ideal counter")
    vt = v_tilde(src)
    v_a = 2.0 * vt - 1.0
    lt = src.lambda2 * src.t
    if src.k == 0:
        eta_a = 1.0  # no photon removed: plain tap loss is absent from mode B
    else:
        eta_a = lt * (src.k + 1.0) / (src.k + lt)
    return v_a, eta_a


def filter_q(x_a, p_a, src: SourceSpec):
    """Acceptance probability of Alice's heterodyne outcome (x_a, p_a).

    The virtual-conditioning filter: with u = (1-T) lam^2 (x_a^2 + p_a^2)/2,
    k-click acceptance is the Poisson weight e^(-u) u^k / k!, on-off
    acceptance is 1 - e^(-u), and scheme "none" accepts everything.
    Vectorized over numpy inputs; values lie in [0, 1] with supremum
    k^k e^(-k)/k! over outcomes for the k-click filter.
    """
    x_a = np.asarray(x_a, dtype=float)
    p_a = np.asarray(p_a, dtype=float)
    if src.scheme == SCHEME_NONE:
        shape = np.broadcast_shapes(x_a.shape, p_a.shape)
        return np.ones(shape) if shape else 1.0
    u = (1.0 - src.t) * src.lambda2 * (x_a * x_a + p_a * p_a) / 2.0
    if src.scheme == SCHEME_ON_OFF:
        q = -np.expm1(-u)
    else:
        k = src.k
        if k == 0:
            q = np.exp(-u)
        else:
            with np.errstate(divide="ignore"):
                log_q = special.xlogy(k, u) - u - special.gammaln(k + 1.0)
            q = np.exp(log_q)
    if q.shape == ():
        return float(q)
    return q


def filter_q_max(src: SourceSpec) -> float:
    """Supremum of the acceptance filter over all heterodyne outcomes."""
    if src.scheme == SCHEME_NONE:
        return 1.0
    if src.scheme == SCHEME_ON_OFF:
        return 1.0
    k = src.k
    if k == 0:
        return 1.0
    return math.exp(k * math.log(k) - k - special.gammaln(k + 1.0))
