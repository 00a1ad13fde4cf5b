"""Finite-SNR effective rate / effective capacity by Monte Carlo.

The effective rate for QoS exponent theta is
    -(1 / (theta*T*B*n_R)) * log E{ exp(-theta*T*B * log2 det(I + n_R*SNR*H K H^dag)) }
in bits/s/Hz/dimension. The expectation is estimated with a streaming
log-mean-exp so that large theta*T*B products never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import (ChannelModel, IidComplexGaussian, iter_sample_chunks,
                       hermitian_eig, mean_gram_mc)
from .errors import DomainError, NumericError

LOG2E = math.log2(math.e)
LN2 = math.log(2.0)


@dataclass(frozen=True)
class QosScenario:
    """QoS exponent theta (1/bit), block duration T (s), bandwidth B (Hz)."""

    theta: float
    t: float
    b: float
    n_r: int
    n_t: int

    def __post_init__(self):
        if self.theta < 0 or self.t <= 0 or self.b <= 0:
            raise DomainError("QosScenario requires theta >= 0, T > 0, B > 0")
        if self.n_r < 1 or self.n_t < 1:
            raise DomainError("QosScenario requires n_R, n_T >= 1")

    @property
    def theta_hat(self) -> float:
        """Dimensionless exponent theta * T * B * log2(e)."""
        return self.theta * self.t * self.b * LOG2E

    @property
    def theta_tb(self) -> float:
        """theta * T * B, the exponent applied to a bits/s/Hz rate."""
        return self.theta * self.t * self.b

    @classmethod
    def from_theta_hat(cls, theta_hat: float, t: float, b: float,
                       n_r: int, n_t: int) -> "QosScenario":
        return cls(theta=theta_hat / (t * b * LOG2E), t=t, b=b,
                   n_r=n_r, n_t=n_t)


# ---------------------------------------------------------------------------
# covariance strategies

@dataclass(frozen=True)
class UniformIdentity:
    """K_x = I / n_T."""


@dataclass(frozen=True)
class WaterfillingCsit:
    """Per-realization log-det maximizer under tr(K_x) <= 1."""


@dataclass(frozen=True)
class BeamformingCsit:
    """Rank-one K_x on the per-realization maximum-eigenvalue direction."""


@dataclass(frozen=True)
class FixedCovariance:
    """A given PSD covariance with tr(K) <= 1."""

    k: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.k)
        if np.max(np.abs(k - k.conj().T)) > 1e-10:
            raise DomainError("FixedCovariance K must be Hermitian")
        w = np.linalg.eigvalsh(k)
        if w.min() < -1e-10:
            raise DomainError("FixedCovariance K must be PSD")
        if w.sum() > 1.0 + 1e-12:
            raise DomainError("FixedCovariance requires tr(K) <= 1")


@dataclass(frozen=True)
class StatisticalOptimized:
    """K maximizing the effective rate given only E{H^dagger H}."""

    opt_samples: int | None = None


CovarianceStrategy = (UniformIdentity | WaterfillingCsit | BeamformingCsit |
                      FixedCovariance | StatisticalOptimized)


def log_det_rate(h: np.ndarray, k: np.ndarray, snr: float, n_r: int) -> float:
    """log2 det(I + n_R*snr*H K H^dag) in bits/s/Hz, via PSD eigenvalues."""
    if snr < 0:
        raise DomainError("log_det_rate requires snr >= 0")
    if snr == 0:
        return 0.0
    m = h @ k @ h.conj().T
    ev = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return float(np.log2(1.0 + n_r * snr * np.clip(ev.real, 0.0, None)).sum())


def waterfill(gram_eigs: np.ndarray, gain: float):
    """Water-filling fractions d_i maximizing sum log(1 + gain*eig_i*d_i).

    Returns (d, degenerate). An all-zero spectrum yields the uniform
    allocation with degenerate=True.
    """
    eigs = np.asarray(gram_eigs, dtype=float)
    if gain <= 0:
        raise DomainError("waterfill requires gain > 0")
    k = len(eigs)
    if np.all(eigs <= 0):
        return np.full(k, 1.0 / k), True
    order = np.argsort(eigs)[::-1]
    lam = eigs[order]
    pos = lam > 0
    inv = np.where(pos, 1.0 / (gain * np.where(pos, lam, 1.0)), np.inf)
    cums = np.cumsum(np.where(pos, inv, 0.0))
    counts = np.arange(1, k + 1)
    mu = (1.0 + cums) / counts
    active = int(np.sum(mu > inv))
    mu_star = (1.0 + cums[active - 1]) / active
    d_sorted = np.maximum(0.0, mu_star - inv)
    d = np.empty(k)
    d[order] = d_sorted
    return d, False


def _batch_waterfill_rates(eigs: np.ndarray, gain: float) -> np.ndarray:
    """Vectorized water-filling rate over a batch of descending spectra."""
    lam = np.sort(eigs, axis=1)[:, ::-1]
    pos = lam > 0
    inv = np.where(pos, 1.0 / (gain * np.where(pos, lam, 1.0)), np.inf)
    cums = np.cumsum(np.where(pos, inv, 0.0), axis=1)
    counts = np.arange(1, lam.shape[1] + 1)
    mu = (1.0 + cums) / counts
    n_active = np.maximum(np.sum(mu > inv, axis=1), 1)
    mu_star = (1.0 + np.take_along_axis(cums, n_active[:, None] - 1, 1)[:, 0]) \
        / n_active
    d = np.maximum(0.0, mu_star[:, None] - inv)
    rate = np.where(d > 0, np.log2(1.0 + gain * np.where(pos, lam, 0.0) * d),
                    0.0)
    return rate.sum(axis=1)


def _small_gram_eigs(h: np.ndarray) -> np.ndarray:
    """Nonzero gram eigenvalues via the smaller of HH^dag / H^dag H."""
    n_r, n_t = h.shape[1], h.shape[2]
    small = h @ h.conj().transpose(0, 2, 1) if n_r <= n_t \
        else h.conj().transpose(0, 2, 1) @ h
    return np.clip(np.linalg.eigvalsh(small), 0.0, None)


def chunk_rates(h: np.ndarray, strategy: CovarianceStrategy, snr: float,
                n_r: int) -> np.ndarray:
    """Per-sample log-det service rates (bits/s/Hz) for one sample chunk."""
    if snr == 0:
        return np.zeros(h.shape[0])
    gain = n_r * snr
    if isinstance(strategy, UniformIdentity):
        ev = _small_gram_eigs(h)
        return np.log2(1.0 + gain / h.shape[2] * ev).sum(axis=1)
    if isinstance(strategy, FixedCovariance):
        m = h @ strategy.k @ h.conj().transpose(0, 2, 1)
        ev = np.clip(np.linalg.eigvalsh(m).real, 0.0, None)
        return np.log2(1.0 + gain * ev).sum(axis=1)
    if isinstance(strategy, BeamformingCsit):
        lam = _small_gram_eigs(h)[:, -1]
        return np.log2(1.0 + gain * lam)
    if isinstance(strategy, WaterfillingCsit):
        return _batch_waterfill_rates(_small_gram_eigs(h), gain)
    raise DomainError(f"unsupported strategy {strategy!r}")


@dataclass(frozen=True)
class EffCapEstimate:
    value: float
    std_err: float
    normalized_per_rx: bool
    n_samples: int


class _LogMeanExp:
    """Streaming log-mean-exp with delta-method standard error."""

    def __init__(self):
        self.m = -np.inf
        self.s1 = 0.0
        self.s2 = 0.0
        self.n = 0

    def add(self, x: np.ndarray):
        cm = float(x.max())
        if not math.isfinite(cm) and cm > 0:
            raise NumericError(f"infinite exponent in log-mean-exp: {cm}")
        if cm > self.m:
            if math.isfinite(self.m):
                r = math.exp(self.m - cm)
                self.s1 *= r
                self.s2 *= r * r
            self.m = cm
        w = np.exp(x - self.m)
        self.s1 += float(w.sum())
        self.s2 += float((w * w).sum())
        self.n += len(x)

    def log_mean(self) -> float:
        if self.s1 <= 0.0 or not math.isfinite(self.m):
            raise NumericError(
                f"MGF sample mean underflowed; max exponent was {self.m}")
        return self.m + math.log(self.s1 / self.n)

    def se_log(self) -> float:
        mean_w = self.s1 / self.n
        var_w = max(self.s2 / self.n - mean_w ** 2, 0.0)
        return math.sqrt(var_w / self.n) / mean_w


def effective_rate_mc(scenario: QosScenario, model: ChannelModel,
                      strategy: CovarianceStrategy, snr: float,
                      n_samples: int, seed: int) -> EffCapEstimate:
    """Monte Carlo effective rate in bits/s/Hz/dimension."""
    if scenario.theta <= 0:
        raise DomainError("effective_rate_mc requires theta > 0; "
                          "use ergodic_rate_mc for theta = 0")
    if snr < 0:
        raise DomainError("snr must be >= 0")
    if isinstance(strategy, StatisticalOptimized):
        n_opt = strategy.opt_samples or n_samples
        _, est = optimize_covariance_statistical(scenario, model, snr,
                                                 n_opt, seed)
        return est
    a = scenario.theta_tb
    acc = _LogMeanExp()
    for h in iter_sample_chunks(model, n_samples, seed):
        acc.add(-a * chunk_rates(h, strategy, snr, scenario.n_r))
    denom = a * scenario.n_r
    return EffCapEstimate(value=-acc.log_mean() / denom,
                          std_err=acc.se_log() / denom,
                          normalized_per_rx=True, n_samples=n_samples)


def ergodic_rate_mc(model: ChannelModel, strategy: CovarianceStrategy,
                    snr: float, n_samples: int, seed: int,
                    n_r: int | None = None) -> EffCapEstimate:
    """Sample-mean log-det rate per receive dimension (theta -> 0 limit)."""
    if snr < 0:
        raise DomainError("snr must be >= 0")
    n_r = n_r if n_r is not None else model.n_r
    s = 0.0
    sq = 0.0
    for h in iter_sample_chunks(model, n_samples, seed):
        r = chunk_rates(h, strategy, snr, n_r) / n_r
        s += float(r.sum())
        sq += float((r * r).sum())
    mean = s / n_samples
    var = max(sq / n_samples - mean ** 2, 0.0)
    return EffCapEstimate(value=mean, std_err=math.sqrt(var / n_samples),
                          normalized_per_rx=True, n_samples=n_samples)


def _simplex_project(p: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(p)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(p) + 1)
    cond = u - css / idx > 0
    rho = idx[cond][-1]
    tau = css[rho - 1] / rho
    return np.maximum(p - tau, 0.0)


def optimize_covariance_statistical(scenario: QosScenario, model: ChannelModel,
                                    snr: float, n_samples: int, seed: int):
    """Maximize the effective rate over K in the eigenbasis of E{H^dagger H}.

    Projected-gradient simplex search with common random numbers; ties are
    broken toward the uniform allocation.
    """
    if scenario.theta <= 0:
        raise DomainError("optimize_covariance_statistical requires theta > 0")
    if isinstance(model, IidComplexGaussian):
        mean_gram = model.exact_mean_gram()
    else:
        mean_gram = mean_gram_mc(model, n_samples, seed)
    _, u = hermitian_eig(mean_gram)

    # cache rotated channels once; every candidate K reuses the same draws
    chunks = [h @ u for h in iter_sample_chunks(model, n_samples, seed)]
    a = scenario.theta_tb
    gain = scenario.n_r * snr
    denom = a * scenario.n_r

    def estimate(p: np.ndarray) -> EffCapEstimate:
        acc = _LogMeanExp()
        for b in chunks:
            m = (b * p) @ b.conj().transpose(0, 2, 1)
            ev = np.clip(np.linalg.eigvalsh(m).real, 0.0, None)
            rates = np.log2(1.0 + gain * ev).sum(axis=1)
            acc.add(-a * rates)
        return EffCapEstimate(value=-acc.log_mean() / denom,
                              std_err=acc.se_log() / denom,
                              normalized_per_rx=True, n_samples=n_samples)

    n_t = scenario.n_t
    p = np.full(n_t, 1.0 / n_t)
    best = estimate(p)
    uniform_est = best
    step = 0.1
    eps = 1e-4
    for _ in range(200):
        g = np.empty(n_t)
        for i in range(n_t):
            dp = p.copy()
            dp[i] += eps
            g[i] = (estimate(_simplex_project(dp)).value - best.value) / eps
        moved = False
        while step > 1e-4:
            cand = _simplex_project(p + step * g)
            if np.max(np.abs(cand - p)) < 1e-4:
                break
            cand_est = estimate(cand)
            if cand_est.value > best.value:
                p, best = cand, cand_est
                moved = True
                break
            step *= 0.5
        if not moved:
            break
    if best.value <= uniform_est.value + 2.0 * uniform_est.std_err:
        p = np.full(n_t, 1.0 / n_t)
        best = uniform_est
    k = (u * p) @ u.conj().T
    return k, best


def bit_energy_curve(scenario: QosScenario, model: ChannelModel,
                     strategy: CovarianceStrategy, snr_grid, n_samples: int,
                     seed: int, normalized_per_rx: bool = True):
    """(E_b/N0 dB, rate) points along an ascending SNR grid.

    E_b/N0 = snr / rate with the rate in the requested normalization;
    points whose rate is below 10 standard errors are dropped.
    """
    snr_grid = np.asarray(snr_grid, dtype=float)
    if np.any(snr_grid <= 0) or np.any(np.diff(snr_grid) <= 0):
        raise DomainError("snr_grid must be positive and ascending")
    rows = []
    for snr in snr_grid:
        if scenario.theta == 0:
            est = ergodic_rate_mc(model, strategy, snr, n_samples, seed,
                                  n_r=scenario.n_r)
        else:
            est = effective_rate_mc(scenario, model, strategy, snr,
                                    n_samples, seed)
        rate = est.value if normalized_per_rx else est.value * scenario.n_r
        err = est.std_err if normalized_per_rx else est.std_err * scenario.n_r
        if rate < 10.0 * err:
            continue
        eb_db = 10.0 * math.log10(snr / rate)
        rows.append((eb_db, rate))
    return rows
