"""Two-mode Gaussian state algebra and the collective-attack key rate.

Conventions
-----------
Shot-noise units throughout: the vacuum has quadrature variance 1, a
symmetric two-mode state in standard form is

    gamma = [[v1*I2, phi*Z], [phi*Z, v2*I2]],    Z = diag(1, -1),

and a pure two-mode squeezed vacuum of variance V has (v1, v2, phi) =
(V, V, sqrt(V^2 - 1)).  The key rate is for reverse reconciliation with
homodyne detection on the second mode, Holevo-bounded collective attacks,
and an overall success probability multiplying the raw rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, InvalidStateError, SingularityError

LN2 = math.log(2.0)

# A symplectic eigenvalue this far below 1 still counts as physical (rounding slack).
PHYSICALITY_TOL = 1e-9


@dataclass(frozen=True)
class TwoModeCovariance:
    """Standard-form two-mode covariance matrix, stored as its three parameters.

    The dataclass performs no validation: unphysical parameter triples are
    representable on purpose so that :func:`check_physicality` can be a total
    function.  Operations that require physicality check it themselves.
    """

    v1: float
    v2: float
    phi: float

    def matrix(self) -> np.ndarray:
        """Return the dense 4x4 covariance matrix in (x1, p1, x2, p2) ordering."""
        g = np.zeros((4, 4))
        g[0, 0] = g[1, 1] = self.v1
        g[2, 2] = g[3, 3] = self.v2
        g[0, 2] = g[2, 0] = self.phi
        g[1, 3] = g[3, 1] = -self.phi
        return g

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.v1, self.v2, self.phi)


@dataclass(frozen=True)
class ChannelSpec:
    """Thermal-loss channel, given either directly or through a fiber length.

    Parameters
    ----------
    t_c : float, optional
        Channel transmittance in (0, 1].  Derived from the distance form when
        omitted.
    epsilon : float
        Excess noise referred to the channel input, >= 0.
    distance_km, loss_db_per_km : float, optional
        Fiber form; t_c = 10**(-loss_db_per_km * distance_km / 10).  When both
        forms are given they must agree to 1e-12.
    """

    t_c: float | None = None
    epsilon: float = 0.0
    distance_km: float | None = None
    loss_db_per_km: float | None = None

    def __post_init__(self):
        t_c = self.t_c
        if self.distance_km is not None:
            if self.loss_db_per_km is None:
                raise DomainError("distance_km given without loss_db_per_km")
            if self.distance_km < 0 or self.loss_db_per_km < 0:
                raise DomainError("distance and loss must be non-negative")
            derived = 10.0 ** (-self.loss_db_per_km * self.distance_km / 10.0)
            if t_c is None:
                t_c = derived
            elif abs(t_c - derived) > 1e-12:
                raise DomainError(
                    f"t_c={t_c} inconsistent with distance form (expected {derived})"
                )
        elif self.loss_db_per_km is not None:
            raise DomainError("loss_db_per_km given without distance_km")
        if t_c is None:
            raise DomainError("ChannelSpec needs t_c or the distance form")
        if not (0.0 < t_c <= 1.0):
            raise DomainError(f"t_c must lie in (0, 1], got {t_c}")
        if self.epsilon < 0.0:
            raise DomainError(f"epsilon must be >= 0, got {self.epsilon}")
        object.__setattr__(self, "t_c", float(t_c))

    @property
    def chi(self) -> float:
        """Total channel-referred added noise (1 - t_c)/t_c + epsilon."""
        return (1.0 - self.t_c) / self.t_c + self.epsilon


@dataclass(frozen=True)
class KeyRateReport:
    """Decomposition of one key-rate evaluation (bits per emitted symbol)."""

    mutual_info: float
    holevo: float
    raw_rate: float
    success_prob: float
    key_rate: float
    beta: float

    @property
    def is_secure(self) -> bool:
        return self.key_rate > 0.0


def _symplectic_squared(cov: TwoModeCovariance):
    """Squared symplectic eigenvalues (lam1^2 >= lam2^2) or None if complex."""
    v1, v2, phi = cov.v1, cov.v2, cov.phi
    delta = v1 * v1 + v2 * v2 - 2.0 * phi * phi
    d = v1 * v2 - phi * phi
    disc = delta * delta - 4.0 * d * d
    if disc < 0.0:
        if disc < -1e-12 * max(1.0, delta * delta):
            return None
        disc = 0.0
    root = math.sqrt(disc)
    lo = (delta - root) / 2.0
    hi = (delta + root) / 2.0
    return hi, lo


def check_physicality(cov: TwoModeCovariance) -> bool:
    """True iff ``cov`` describes a physical state.

    The test is v1, v2 >= 1 together with the smaller symplectic eigenvalue
    >= 1 - 1e-9.  Total function: never raises.
    """
    if cov.v1 < 1.0 or cov.v2 < 1.0:
        return False
    sq = _symplectic_squared(cov)
    if sq is None:
        return False
    hi, lo = sq
    if lo < 0.0:
        return False
    return math.sqrt(lo) >= 1.0 - PHYSICALITY_TOL


def symplectic_eigenvalues(cov: TwoModeCovariance) -> tuple[float, float]:
    """Symplectic spectrum (lam1 >= lam2) of a physical standard-form state.

    Closed form via the two symplectic invariants
    Delta = v1^2 + v2^2 - 2 phi^2 and det = (v1 v2 - phi^2)^2:
    lam_{1,2}^2 = (Delta +/- sqrt(Delta^2 - 4 (v1 v2 - phi^2)^2)) / 2.
    """
    sq = _symplectic_squared(cov)
    if sq is None:
        raise InvalidStateError(f"complex symplectic spectrum for {cov}")
    hi, lo = sq
    if lo < 0.0:
        raise InvalidStateError(f"negative squared symplectic eigenvalue for {cov}")
    lam1, lam2 = math.sqrt(hi), math.sqrt(lo)
    if lam2 < 1.0 - PHYSICALITY_TOL or cov.v1 < 1.0 or cov.v2 < 1.0:
        raise InvalidStateError(
            f"non-physical covariance {cov}: smallest symplectic eigenvalue {lam2}"
        )
    return lam1, lam2


def entropy_term(x: float) -> float:
    """Bosonic entropy g(x) = (x+1) log2(x+1) - x log2 x, with g(0) = 0.

    ``x`` is the mean thermal photon number (lam - 1)/2 of a symplectic
    eigenvalue lam.
    """
    if x < 0.0:
        raise DomainError(f"entropy_term needs x >= 0, got {x}")
    return float(special.xlogy(x + 1.0, x + 1.0) - special.xlogy(x, x)) / LN2


def apply_channel(cov: TwoModeCovariance, ch: ChannelSpec) -> TwoModeCovariance:
    """Send the second mode through a thermal-loss channel.

    (v1, v2, phi) -> (v1, t_c*(v2 + chi), sqrt(t_c)*phi) with
    chi = (1 - t_c)/t_c + epsilon.  t_c = 1, epsilon = 0 is the identity.
    """
    if not check_physicality(cov):
        raise InvalidStateError(f"apply_channel needs a physical input, got {cov}")
    return TwoModeCovariance(
        v1=cov.v1,
        v2=ch.t_c * (cov.v2 + ch.chi),
        phi=math.sqrt(ch.t_c) * cov.phi,
    )


def key_rate_homodyne(
    cov: TwoModeCovariance,
    beta: float,
    success_prob: float = 1.0,
) -> KeyRateReport:
    """Reverse-reconciliation key rate of a shared state against collective attacks.

    Mutual information uses Alice's heterodyne variance (v1+1)/2 conditioned on
    Bob's homodyne outcome; the Holevo bound uses the joint symplectic spectrum
    and the conditional single-mode eigenvalue sqrt(v1*(v1 - phi^2/v2)).
    Negative rates are returned as-is, never clamped.

    Parameters
    ----------
    cov : TwoModeCovariance
        Post-channel state shared by Alice and Bob.
    beta : float
        Reconciliation efficiency in (0, 1].
    success_prob : float
        Probability weight multiplying the raw rate (postselection yield).
    """
    if not (0.0 < beta <= 1.0):
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    if not (0.0 <= success_prob <= 1.0):
        raise DomainError(f"success_prob must lie in [0, 1], got {success_prob}")
    v1, v2, phi = cov.v1, cov.v2, cov.phi
    if v2 == 0.0:
        raise SingularityError("key_rate_homodyne: v2 = 0")

    va = (v1 + 1.0) / 2.0
    va_cond = va - phi * phi / (2.0 * v2)
    if va_cond <= 0.0:
        raise InvalidStateError(f"negative conditional variance for {cov}")
    mutual_info = 0.5 * math.log2(va / va_cond)

    lam1, lam2 = symplectic_eigenvalues(cov)
    lam3_sq = v1 * (v1 - phi * phi / v2)
    if lam3_sq < 0.0:
        if lam3_sq < -1e-9:
            raise InvalidStateError(f"negative conditional invariant for {cov}")
        lam3_sq = 0.0
    lam3 = math.sqrt(lam3_sq)

    def photon_arg(lam):
        x = (lam - 1.0) / 2.0
        if x < 0.0:
            if x < -1e-9:
                raise InvalidStateError(f"symplectic eigenvalue {lam} below 1")
            x = 0.0
        return x

    holevo = (
        entropy_term(photon_arg(lam1))
        + entropy_term(photon_arg(lam2))
        - entropy_term(photon_arg(lam3))
    )
    raw = beta * mutual_info - holevo
    return KeyRateReport(
        mutual_info=mutual_info,
        holevo=holevo,
        raw_rate=raw,
        success_prob=success_prob,
        key_rate=success_prob * raw,
        beta=beta,
    )
