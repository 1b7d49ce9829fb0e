"""Prepare-and-measure simulation with classical acceptance filtering.

The sender draws heterodyne-distributed Gaussian pairs, accepts each against
the conditioning filter of :func:`psqkd.subtraction.filter_q`, and the
receiver's homodyne outcome is drawn from its exact conditional law through
the thermal-loss channel.  Accepted-subset moment estimators reconstruct
the post-channel covariance in the same convention as the analytic chain,
with Gaussian-formula standard errors (conservatively inflated, since the
accepted marginal is not Gaussian).  A linear rescaling converts records
taken at one tap transmittance into a postselection for another, without
new quantum data.

Sampling is chunked; each chunk owns an independent child stream of the run
seed and chunk sums are reduced with compensated summation, so results are
bitwise reproducible regardless of how chunks are scheduled.
"""

from __future__ import annotations

import gzip
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EstimationError
from .gaussian import ChannelSpec, TwoModeCovariance
from .subtraction import SourceSpec, filter_q

_CHUNK = 1 << 20
# Inflation applied to standard-error bands: the accepted marginal has
# non-Gaussian fourth moments, so the Gaussian SE formulas run a bit small.
SE_INFLATION = 1.2


@dataclass(frozen=True)
class SampleRecord:
    """One protocol round: the sender's draws, the filter verdict, the
    receiver's homodyne outcome (present whether or not the round was kept)."""

    x_a: float
    p_a: float
    accepted: bool
    x_b: float


@dataclass(frozen=True)
class ExperimentRecords:
    """Columnar record stream of one simulated run."""

    x_a: np.ndarray
    p_a: np.ndarray
    accepted: np.ndarray
    x_b: np.ndarray

    def __post_init__(self):
        x_a = np.asarray(self.x_a, dtype=float)
        p_a = np.asarray(self.p_a, dtype=float)
        x_b = np.asarray(self.x_b, dtype=float)
        acc = np.asarray(self.accepted, dtype=bool)
        if not (x_a.shape == p_a.shape == x_b.shape == acc.shape) or x_a.ndim != 1:
            raise DomainError("record columns must be 1d and equal length")
        for arr in (x_a, p_a, x_b, acc):
            arr.flags.writeable = False
        object.__setattr__(self, "x_a", x_a)
        object.__setattr__(self, "p_a", p_a)
        object.__setattr__(self, "x_b", x_b)
        object.__setattr__(self, "accepted", acc)

    def __len__(self) -> int:
        return self.x_a.size

    def record(self, i: int) -> SampleRecord:
        return SampleRecord(
            x_a=float(self.x_a[i]), p_a=float(self.p_a[i]),
            accepted=bool(self.accepted[i]), x_b=float(self.x_b[i]),
        )


@dataclass(frozen=True)
class MomentEstimate:
    """Accepted-subset moment estimators and their standard errors.

    cov is the reconstructed post-channel covariance: v1 = 2<x_a^2> - 1,
    phi = sqrt(2) <x_a x_b>, v2 = <x_b^2>, all uncentered over accepted
    records.  m2_xa is the raw accepted second moment of x_a, whose analytic
    target is the conditional heterodyne variance.  Standard errors are the
    Gaussian fourth-moment formulas, uninflated; band checks multiply by
    SE_INFLATION.
    """

    cov: TwoModeCovariance
    accept_rate: float
    n_samples: int
    n_accepted: int
    m2_xa: float
    mean_xa: float
    mean_pa: float
    se_v1: float
    se_v2: float
    se_phi: float
    se_m2_xa: float
    se_mean: float
    se_accept: float

    def cov_within(self, target: TwoModeCovariance, n_sigma: float = 3.0) -> bool:
        """Entrywise |estimate - target| <= n_sigma inflated standard errors."""
        s = n_sigma * SE_INFLATION
        return (
            abs(self.cov.v1 - target.v1) <= s * self.se_v1
            and abs(self.cov.v2 - target.v2) <= s * self.se_v2
            and abs(self.cov.phi - target.phi) <= s * self.se_phi
        )


@dataclass(frozen=True)
class ExperimentResult:
    records: ExperimentRecords | None
    estimate: MomentEstimate
    seed: int


@dataclass(frozen=True)
class RescaleSpec:
    """Linear rescaling between tap transmittances.

    Records taken from a variance-v source behind a transmittance-t0 tap,
    scaled by g, are statistically identical to records of a variance
    v_prime source behind a transmittance-eta tap, because the sent
    amplitude obeys sqrt(eta) lam' g = sqrt(t0) lam.  g and v_prime are
    derived on construction.
    """

    v: float
    t0: float
    eta: float
    g: float = 0.0
    v_prime: float = 0.0

    def __post_init__(self):
        if self.v < 1.0:
            raise DomainError(f"v must be >= 1, got {self.v}")
        for name, val in (("t0", self.t0), ("eta", self.eta)):
            if not (0.0 < val <= 1.0):
                raise DomainError(f"{name} must lie in (0, 1], got {val}")
        v_prime = 1.0 + (self.t0 / self.eta) * (self.v - 1.0)
        lam = math.sqrt((self.v - 1.0) / (self.v + 1.0))
        lam_p = math.sqrt((v_prime - 1.0) / (v_prime + 1.0))
        if lam == 0.0:
            g = math.sqrt(self.t0 / self.eta)  # v = 1 limit: pure scale
        else:
            g = math.sqrt(self.t0) * lam / (math.sqrt(self.eta) * lam_p)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "v_prime", v_prime)

    @property
    def lam_prime(self) -> float:
        return math.sqrt((self.v_prime - 1.0) / (self.v_prime + 1.0))


def _estimate(x, p, y, acc, n_samples) -> MomentEstimate:
    """Moment estimators over the accepted subset of one record set."""
    n_acc = int(np.count_nonzero(acc))
    if n_acc == 0:
        raise EstimationError("no accepted samples; cannot estimate moments")
    xs, ps, ys = x[acc], p[acc], y[acc]
    m2x = float(xs @ xs) / n_acc
    m2y = float(ys @ ys) / n_acc
    m11 = float(xs @ ys) / n_acc
    mean_x = float(xs.sum()) / n_acc
    mean_p = float(ps.sum()) / n_acc
    se_m2x = m2x * math.sqrt(2.0 / n_acc)
    se_m2y = m2y * math.sqrt(2.0 / n_acc)
    se_m11 = math.sqrt((m2x * m2y + m11 * m11) / n_acc)
    rate = n_acc / n_samples
    return MomentEstimate(
        cov=TwoModeCovariance(v1=2.0 * m2x - 1.0, v2=m2y, phi=math.sqrt(2.0) * m11),
        accept_rate=rate,
        n_samples=n_samples,
        n_accepted=n_acc,
        m2_xa=m2x,
        mean_xa=mean_x,
        mean_pa=mean_p,
        se_v1=2.0 * se_m2x,
        se_v2=se_m2y,
        se_phi=math.sqrt(2.0) * se_m11,
        se_m2_xa=se_m2x,
        se_mean=math.sqrt(m2x / n_acc),
        se_accept=math.sqrt(max(rate * (1.0 - rate), 1.0 / n_samples) / n_samples),
    )


def _estimate_streaming(sums: dict, n_samples: int) -> MomentEstimate:
    n_acc = int(math.fsum(sums["n"]))
    if n_acc == 0:
        raise EstimationError("no accepted samples; cannot estimate moments")
    m2x = math.fsum(sums["xx"]) / n_acc
    m2y = math.fsum(sums["yy"]) / n_acc
    m11 = math.fsum(sums["xy"]) / n_acc
    mean_x = math.fsum(sums["x"]) / n_acc
    mean_p = math.fsum(sums["p"]) / n_acc
    se_m2x = m2x * math.sqrt(2.0 / n_acc)
    se_m2y = m2y * math.sqrt(2.0 / n_acc)
    se_m11 = math.sqrt((m2x * m2y + m11 * m11) / n_acc)
    rate = n_acc / n_samples
    return MomentEstimate(
        cov=TwoModeCovariance(v1=2.0 * m2x - 1.0, v2=m2y, phi=math.sqrt(2.0) * m11),
        accept_rate=rate,
        n_samples=n_samples,
        n_accepted=n_acc,
        m2_xa=m2x,
        mean_xa=mean_x,
        mean_pa=mean_p,
        se_v1=2.0 * se_m2x,
        se_v2=se_m2y,
        se_phi=math.sqrt(2.0) * se_m11,
        se_m2_xa=se_m2x,
        se_mean=math.sqrt(m2x / n_acc),
        se_accept=math.sqrt(max(rate * (1.0 - rate), 1.0 / n_samples) / n_samples),
    )


def run_experiment(src: SourceSpec, ch: ChannelSpec, n_samples: int, seed: int,
                   keep_records: bool = True) -> ExperimentResult:
    """Simulate n_samples protocol rounds and estimate the post-channel moments.

    Per round: (x_a, p_a) i.i.d. Gaussian with the heterodyne variance
    (v+1)/2; acceptance compares one uniform draw against the filter value;
    the receiver's outcome is x_b = sqrt(2 t t_c) lam x_a + noise with noise
    variance 1 + t_c epsilon, its exact conditional law.  The filter models
    an ideal counter, so src.eta_d must be 1.  Identical seeds give
    identical streams; keep_records=False drops the columns (streaming sums
    only), which large runs want.
    """
    if src.eta_d != 1.0:
        raise DomainError("run_experiment models ideal counters only (eta_d = 1)")
    if n_samples < 10_000:
        raise DomainError(f"n_samples must be >= 10000, got {n_samples}")
    het_sd = math.sqrt((src.v + 1.0) / 2.0)
    mean_coef = math.sqrt(2.0 * src.t * ch.t_c) * src.lam
    noise_sd = math.sqrt(1.0 + ch.t_c * ch.epsilon)

    n_chunks = (n_samples + _CHUNK - 1) // _CHUNK
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    sums = {key: [] for key in ("n", "xx", "yy", "xy", "x", "p")}
    kept = {key: [] for key in ("x", "p", "y", "a")} if keep_records else None

    for i in range(n_chunks):
        size = min(_CHUNK, n_samples - i * _CHUNK)
        rng = np.random.default_rng(children[i])
        x = rng.normal(0.0, het_sd, size)
        p = rng.normal(0.0, het_sd, size)
        u = rng.uniform(size=size)
        y = mean_coef * x + rng.normal(0.0, noise_sd, size)
        acc = u < filter_q(x, p, src)
        xs, ps, ys = x[acc], p[acc], y[acc]
        sums["n"].append(float(np.count_nonzero(acc)))
        sums["xx"].append(float(xs @ xs))
        sums["yy"].append(float(ys @ ys))
        sums["xy"].append(float(xs @ ys))
        sums["x"].append(float(xs.sum()))
        sums["p"].append(float(ps.sum()))
        if keep_records:
            kept["x"].append(x)
            kept["p"].append(p)
            kept["y"].append(y)
            kept["a"].append(acc)

    estimate = _estimate_streaming(sums, n_samples)
    records = None
    if keep_records:
        records = ExperimentRecords(
            x_a=np.concatenate(kept["x"]), p_a=np.concatenate(kept["p"]),
            accepted=np.concatenate(kept["a"]), x_b=np.concatenate(kept["y"]),
        )
    return ExperimentResult(records=records, estimate=estimate, seed=seed)


def collect_accepted_pairs(src: SourceSpec, ch: ChannelSpec, n_pairs: int,
                           seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Stream protocol rounds, keeping only accepted (x_a, x_b) pairs.

    Memory-bounded companion to run_experiment for large correlated
    datasets: chunks draw from the same per-index child streams, accepted
    pairs accumulate until n_pairs are collected, everything else is
    dropped.  Raises EstimationError if four times the expected number of
    rounds fails to produce enough acceptances.
    """
    if src.eta_d != 1.0:
        raise DomainError("collect_accepted_pairs models ideal counters only (eta_d = 1)")
    if n_pairs < 1:
        raise DomainError(f"n_pairs must be >= 1, got {n_pairs}")
    from .subtraction import covariance_subtracted

    p = covariance_subtracted(src).success_prob
    if p <= 0.0 or n_pairs / p > 4096.0 * _CHUNK:
        raise EstimationError(
            f"collecting {n_pairs} pairs needs roughly {n_pairs / max(p, 1e-300):.3g} "
            "rounds at this acceptance probability; beyond the sampling budget")
    max_chunks = min(int(math.ceil(4.0 * n_pairs / (p * _CHUNK))) + 8, 4096)
    het_sd = math.sqrt((src.v + 1.0) / 2.0)
    mean_coef = math.sqrt(2.0 * src.t * ch.t_c) * src.lam
    noise_sd = math.sqrt(1.0 + ch.t_c * ch.epsilon)
    children = np.random.SeedSequence(seed).spawn(max_chunks)
    xs, ys = [], []
    total = 0
    for i in range(max_chunks):
        rng = np.random.default_rng(children[i])
        x = rng.normal(0.0, het_sd, _CHUNK)
        p_a = rng.normal(0.0, het_sd, _CHUNK)
        u = rng.uniform(size=_CHUNK)
        noise = rng.normal(0.0, noise_sd, _CHUNK)
        acc = u < filter_q(x, p_a, src)
        xa = x[acc]
        xs.append(xa)
        ys.append(mean_coef * xa + noise[acc])
        total += xa.size
        if total >= n_pairs:
            break
    if total < n_pairs:
        raise EstimationError(f"collected {total} accepted pairs of {n_pairs} "
                              f"requested after {max_chunks} chunks")
    return np.concatenate(xs)[:n_pairs], np.concatenate(ys)[:n_pairs]


def rescale_and_filter(records: ExperimentRecords, spec: RescaleSpec, k: int,
                       seed: int) -> tuple[ExperimentRecords, MomentEstimate]:
    """Rescale recorded sender data and re-run the acceptance filter.

    Scales both sender quadratures by spec.g, then filters with the k-click
    acceptance of a (v_prime, eta) source using fresh uniforms from seed.
    The receiver column is untouched; the sent-amplitude identity makes the
    accepted subset match a genuine (v_prime, eta, k) run through the same
    channel, which the returned estimate lets callers verify.
    """
    src = SourceSpec.k_photon(spec.v_prime, spec.eta, k)
    x = spec.g * records.x_a
    p = spec.g * records.p_a
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    u = rng.uniform(size=len(records))
    acc = u < filter_q(x, p, src)
    out = ExperimentRecords(x_a=x, p_a=p, accepted=acc, x_b=records.x_b)
    return out, _estimate(x, p, records.x_b, acc, len(records))


def estimate_moments(records: ExperimentRecords) -> MomentEstimate:
    """Accepted-subset estimators for an existing record set."""
    return _estimate(records.x_a, records.p_a, records.x_b, records.accepted,
                     len(records))


def decoy_partition(records: ExperimentRecords) -> tuple[ExperimentRecords, ExperimentRecords]:
    """Split records into the kept set and the discarded (decoy) set."""
    acc = records.accepted

    def take(mask):
        return ExperimentRecords(
            x_a=records.x_a[mask], p_a=records.p_a[mask],
            accepted=records.accepted[mask], x_b=records.x_b[mask],
        )

    return take(acc), take(~acc)


def export_records(records: ExperimentRecords, path: str) -> None:
    """Write records as columnar text: x_a p_a accepted x_b per line.

    Floats use full round-trip precision; a path ending in .gz gzips the
    stream.
    """
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "wt") as fh:
        fh.write("# columns=x_a p_a accepted x_b\n")
        fh.write(f"# n_samples={len(records)}\n")
        for i in range(len(records)):
            fh.write(
                f"{records.x_a[i]:.17g} {records.p_a[i]:.17g} "
                f"{int(records.accepted[i])} {records.x_b[i]:.17g}\n"
            )


def load_records(path: str) -> ExperimentRecords:
    """Read a columnar record file written by export_records."""
    opener = gzip.open if str(path).endswith(".gz") else open
    rows = []
    with opener(path, "rt") as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4:
                raise DomainError(f"malformed record line: {line.strip()!r}")
            rows.append((float(parts[0]), float(parts[1]),
                         bool(int(parts[2])), float(parts[3])))
    if not rows:
        raise DomainError(f"no records found in {path}")
    x, p, a, y = zip(*rows)
    return ExperimentRecords(
        x_a=np.array(x), p_a=np.array(p),
        accepted=np.array(a, dtype=bool), x_b=np.array(y),
    )
