"""Low-SNR derivatives, energy-efficiency metrics, sparse-wideband minimum
bit energies, and high-SNR slope / power-offset computations.

The closed-form low-SNR results take Monte Carlo spectral moments as inputs;
the high-SNR path evaluates the Hankel-matrix MGF of the i.i.d. Rayleigh
log-det rate by quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .channels import (ChannelModel, IidComplexGaussian, MomentEstimates,
                       iter_sample_chunks, max_eig_subspace, mean_gram_mc)
from .engine import (CovarianceStrategy, BeamformingCsit, FixedCovariance,
                     QosScenario, StatisticalOptimized, UniformIdentity,
                     WaterfillingCsit, _LogMeanExp, _simplex_project, LN2)
from .errors import DomainError, NumericError
from .special import gamma_fn, confluent_1f1


@dataclass(frozen=True)
class LowSnrDerivatives:
    first_deriv: float
    second_deriv: float
    regime: str


@dataclass(frozen=True)
class EnergyMetrics:
    eb_min_linear: float
    eb_min_db: float
    wideband_slope_s0: float
    per_receive_antenna: bool = True


@dataclass(frozen=True)
class HighSnrMetrics:
    s_inf: float
    l_inf: float
    regime_note: str


@dataclass(frozen=True)
class SparseWidebandConfig:
    m: int
    p_over_n0: float
    b_c: float
    growth: str = "bounded_m"

    def __post_init__(self):
        if self.m < 1 or self.p_over_n0 <= 0 or self.b_c <= 0:
            raise DomainError("invalid SparseWidebandConfig")
        if self.growth not in ("bounded_m", "sublinear"):
            raise DomainError(f"unknown growth mode {self.growth!r}")


# ---------------------------------------------------------------------------
# low-SNR derivatives

def derivs_csit(moments: MomentEstimates, scenario: QosScenario,
                l: int = 1) -> LowSnrDerivatives:
    """Derivatives at SNR=0 with per-realization channel knowledge."""
    if l < 1:
        raise DomainError("multiplicity l must be >= 1")
    e1 = moments.e_lambda_max
    e2 = moments.e_lambda_max_sq
    a = scenario.theta_tb
    n_r = scenario.n_r
    first = e1 / LN2
    second = a * n_r / LN2 ** 2 * (e1 ** 2 - e2) - n_r / (l * LN2) * e2
    return LowSnrDerivatives(first, second, "csit")


def derivs_uniform(moments: MomentEstimates,
                   scenario: QosScenario) -> LowSnrDerivatives:
    """Derivatives at SNR=0 for K_x = I/n_T."""
    et = moments.e_trace
    et2 = moments.e_trace_sq
    eg2 = moments.e_trace_gram_sq
    a = scenario.theta_tb
    n_r, n_t = scenario.n_r, scenario.n_t
    first = et / (n_t * LN2)
    second = (a * n_r / (n_t ** 2 * LN2 ** 2) * (et ** 2 - et2)
              - n_r / (n_t ** 2 * LN2) * eg2)
    return LowSnrDerivatives(first, second, "uniform")


def _min_simplex_quadratic(q: np.ndarray, rng: np.random.Generator):
    """Minimize a^T Q a over the probability simplex."""
    l = q.shape[0]
    if l == 1:
        return np.array([1.0]), float(q[0, 0])
    if l == 2:
        # alpha = (t, 1-t): f(t) = (Q00 - 2Q01 + Q11) t^2 + 2(Q01 - Q11) t + Q11
        a2 = q[0, 0] - 2 * q[0, 1] + q[1, 1]
        a1 = 2 * (q[0, 1] - q[1, 1])
        cands = [0.0, 1.0]
        if a2 > 0:
            cands.append(min(1.0, max(0.0, -a1 / (2 * a2))))
        vals = [a2 * t * t + a1 * t + q[1, 1] for t in cands]
        t = cands[int(np.argmin(vals))]
        return np.array([t, 1.0 - t]), float(min(vals))
    best_a, best_v = None, np.inf
    starts = [np.full(l, 1.0 / l)] + [
        _simplex_project(rng.random(l)) for _ in range(19)]
    for a in starts:
        step = 0.1
        v = float(a @ q @ a)
        for _ in range(500):
            g = 2.0 * (q @ a)
            cand = _simplex_project(a - step * g)
            cv = float(cand @ q @ cand)
            if cv < v - 1e-15:
                if np.max(np.abs(cand - a)) < 1e-10:
                    a, v = cand, cv
                    break
                a, v = cand, cv
            else:
                step *= 0.5
                if step < 1e-8:
                    break
        if v < best_v:
            best_a, best_v = a, v
    return best_a, best_v


def derivs_statistical(mean_gram: np.ndarray, model: ChannelModel,
                       scenario: QosScenario, n_samples: int = 100_000,
                       seed: int = 0, rel_tol: float = 1e-2,
                       ) -> LowSnrDerivatives:
    """Derivatives at SNR=0 when only E{H^dagger H} is known.

    The second derivative minimizes a quadratic form over the simplex of
    power fractions in the maximal-eigenvalue eigenspace of mean_gram; the
    quadratic coefficients are Monte Carlo expectations.
    """
    summ = max_eig_subspace(mean_gram, rel_tol=rel_tol)
    lam = summ.lambda_max
    l = summ.multiplicity_l
    u = summ.max_eig_basis
    first = lam / LN2

    # MC estimates of E{M_ii M_jj} and E{|M_ij|^2} for M = U^dag H^dag H U
    a_sum = np.zeros((l, l))
    b_sum = np.zeros((l, l))
    n = 0
    for h in iter_sample_chunks(model, n_samples, seed):
        c = h @ u
        m = c.conj().transpose(0, 2, 1) @ c
        diag = np.real(np.einsum("nii->ni", m))
        a_sum += np.einsum("ni,nj->ij", diag, diag)
        b_sum += np.einsum("nij,nij->ij", m, m.conj()).real
        n += h.shape[0]
    a_mat = a_sum / n
    b_mat = b_sum / n

    c1 = scenario.theta_tb * scenario.n_r / LN2 ** 2
    c2 = scenario.n_r / LN2
    q = c1 * a_mat + c2 * b_mat
    _, min_val = _min_simplex_quadratic(q, np.random.default_rng(seed))
    second = c1 * lam ** 2 - min_val
    return LowSnrDerivatives(first, second, "statistical")


def energy_metrics(derivs: LowSnrDerivatives) -> EnergyMetrics:
    """Minimum bit energy and wideband slope from the zero-SNR derivatives."""
    if derivs.first_deriv <= 0:
        raise DomainError("energy_metrics requires first_deriv > 0")
    if derivs.second_deriv >= 0:
        raise DomainError("energy_metrics requires second_deriv < 0")
    eb = 1.0 / derivs.first_deriv
    s0 = 2.0 * derivs.first_deriv ** 2 / (-derivs.second_deriv) * LN2
    return EnergyMetrics(eb_min_linear=eb, eb_min_db=10.0 * math.log10(eb),
                         wideband_slope_s0=s0)


# ---------------------------------------------------------------------------
# sparse wideband

def _sparse_exponent_chunks(model, strategy, n_samples, seed):
    """Per-sample quantity whose scaled exponential MGF sets the bit energy."""
    for h in iter_sample_chunks(model, n_samples, seed):
        if isinstance(strategy, UniformIdentity):
            yield (np.abs(h) ** 2).sum(axis=(1, 2)) / h.shape[2]
        elif isinstance(strategy, FixedCovariance):
            m = h @ strategy.k @ h.conj().transpose(0, 2, 1)
            yield np.real(np.einsum("nii->n", m))
        elif isinstance(strategy, (WaterfillingCsit, BeamformingCsit)):
            small = h @ h.conj().transpose(0, 2, 1) \
                if h.shape[1] <= h.shape[2] \
                else h.conj().transpose(0, 2, 1) @ h
            yield np.linalg.eigvalsh(small)[:, -1]
        else:
            raise DomainError(f"unsupported strategy {strategy!r}")


def sparse_ebmin_bounded(config: SparseWidebandConfig, scenario: QosScenario,
                         model: ChannelModel, strategy: CovarianceStrategy,
                         n_samples: int, seed: int):
    """Bounded-subchannel minimum bit energy; returns (linear, dB).

    rho = theta*T*P/(m*N0); E_b/N0 = rho / (-log E{exp(-rho*q/ln2)}) with
    q the strategy-appropriate quadratic channel gain.
    """
    if scenario.theta <= 0:
        raise DomainError("sparse_ebmin_bounded requires theta > 0")
    if config.growth != "bounded_m":
        raise DomainError("config.growth must be 'bounded_m'")
    rho = scenario.theta * scenario.t * config.p_over_n0 / config.m

    if isinstance(strategy, StatisticalOptimized):
        return _sparse_ebmin_statistical(config, scenario, model, rho,
                                         n_samples, seed)
    acc = _LogMeanExp()
    for q in _sparse_exponent_chunks(model, strategy, n_samples, seed):
        acc.add(-rho * q / LN2)
    denom = -acc.log_mean()
    if denom <= 0:
        raise NumericError(
            f"MGF mean did not decay; max exponent {acc.m}")
    eb = rho / denom
    return eb, 10.0 * math.log10(eb)


def _sparse_ebmin_statistical(config, scenario, model, rho, n_samples, seed):
    """Minimize the bounded-m bit energy over K in the E{H^dag H} eigenbasis."""
    if isinstance(model, IidComplexGaussian):
        mg = model.exact_mean_gram()
    else:
        mg = mean_gram_mc(model, n_samples, seed)
    _, u = np.linalg.eigh(mg)
    u = u[:, ::-1]
    # per-sample per-direction gains |H u_i|^2
    gains = np.concatenate([
        (np.abs(h @ u) ** 2).sum(axis=1)
        for h in iter_sample_chunks(model, n_samples, seed)])

    def neg_log_mgf(p):
        acc = _LogMeanExp()
        acc.add(-rho / LN2 * gains @ p)
        return -acc.log_mean()

    n_t = model.n_t
    p = np.zeros(n_t)
    p[0] = 1.0  # strongest statistical eigendirection
    best = neg_log_mgf(p)
    for start in [np.full(n_t, 1.0 / n_t), p]:
        cur, val, step = start, neg_log_mgf(start), 0.1
        for _ in range(200):
            g = np.empty(n_t)
            for i in range(n_t):
                dp = cur.copy()
                dp[i] += 1e-5
                g[i] = (neg_log_mgf(_simplex_project(dp)) - val) / 1e-5
            cand = _simplex_project(cur + step * g)
            cv = neg_log_mgf(cand)
            if cv > val:
                moved = np.max(np.abs(cand - cur))
                cur, val = cand, cv
                if moved < 1e-6:
                    break
            else:
                step *= 0.5
                if step < 1e-6:
                    break
        if val > best:
            best, p = val, cur
    eb = rho / best
    return eb, 10.0 * math.log10(eb)


def sparse_ebmin_sublinear(model: ChannelModel,
                           strategy: CovarianceStrategy,
                           n_samples: int, seed: int):
    """Sublinear-growth (m -> inf) minimum bit energy; returns (linear, dB)."""
    if isinstance(strategy, StatisticalOptimized):
        if isinstance(model, IidComplexGaussian):
            mg = model.exact_mean_gram()
        else:
            mg = mean_gram_mc(model, n_samples, seed)
        lam = float(np.linalg.eigvalsh(mg)[-1])
        denom = lam
    else:
        total = 0.0
        n = 0
        for q in _sparse_exponent_chunks(model, strategy, n_samples, seed):
            total += float(q.sum())
            n += len(q)
        denom = total / n
    if denom <= 0:
        raise DomainError("degenerate channel: zero mean gain")
    eb = LN2 / denom
    return eb, 10.0 * math.log10(eb)


# ---------------------------------------------------------------------------
# high-SNR Hankel MGF

def _hankel_integrand_entry(theta_hat: float, p: int, c: float,
                            quad_order: int) -> float:
    """g = int_0^inf (1+c z)^{-theta_hat} z^p e^{-z} dz.

    Gauss-Laguerre with order doubling; falls back to piecewise adaptive
    quadrature when the two-scale integrand (c >> 1) defeats the rule.
    """
    from .special import gauss_laguerre

    prev = None
    order = max(1, min(quad_order, 256))
    while order <= 256:
        rule = gauss_laguerre(order)
        val = float(np.sum(rule.weights
                           * (1.0 + c * rule.nodes) ** (-theta_hat)
                           * rule.nodes ** p))
        if prev is not None and abs(val - prev) <= 1e-8 * abs(val):
            return val
        prev = val
        order *= 2

    def f(z):
        return (1.0 + c * z) ** (-theta_hat) * z ** p * math.exp(-z)

    cuts = [0.0]
    if c > 1.0:
        cuts.append(1.0 / c)
        if 100.0 / c < 1.0:
            cuts.append(100.0 / c)
    cuts.extend([1.0, 10.0, 50.0])
    cuts = sorted(set(cuts))
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        v, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-12, limit=300)
        total += v
    v, _ = integrate.quad(f, cuts[-1], np.inf, epsabs=1e-300, epsrel=1e-12,
                          limit=300)
    total += v
    if not math.isfinite(total) or total <= 0:
        raise NumericError(
            f"hankel entry quadrature failed for theta_hat={theta_hat}, "
            f"p={p}, c={c}")
    return total


def _hankel_log_mgf(scenario: QosScenario, snr: float,
                    quad_order: int = 32) -> float:
    if snr <= 0:
        raise DomainError("hankel MGF requires snr > 0")
    th = scenario.theta_hat
    if th == 0:
        return 0.0
    k = min(scenario.n_r, scenario.n_t)
    d = abs(scenario.n_r - scenario.n_t)
    c = scenario.n_r / scenario.n_t * snr
    g = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            g[i, j] = g[j, i] = _hankel_integrand_entry(th, i + j + d, c,
                                                        quad_order)
    # factor out row scales so slogdet sees O(1) numbers
    scales = g.max(axis=1)
    sign, logdet = np.linalg.slogdet(g / scales[:, None])
    if sign <= 0:
        raise NumericError("Hankel MGF determinant not positive")
    # normalization det(G)|_{theta=0} = prod_i Gamma(d+i)*Gamma(i), so the
    # MGF is exactly 1 when theta = 0
    log_norm = sum(math.lgamma(d + i) + math.lgamma(i)
                   for i in range(1, k + 1))
    return logdet + float(np.log(scales).sum()) - log_norm


def hankel_mgf(scenario: QosScenario, snr: float,
               quad_order: int = 32) -> float:
    """MGF E{exp(-theta*T*B*log2 det(I + (n_R/n_T) SNR H H^dag))}, i.i.d."""
    return math.exp(_hankel_log_mgf(scenario, snr, quad_order))


def hankel_effective_rate(scenario: QosScenario, snr: float,
                          quad_order: int = 32) -> float:
    """Closed-form (quadrature) effective rate in bits/s/Hz, unnormalized."""
    if scenario.theta <= 0:
        raise DomainError("hankel_effective_rate requires theta > 0")
    return -_hankel_log_mgf(scenario, snr, quad_order) / scenario.theta_tb


def hankel_entry_closed(i: int, j: int, scenario: QosScenario,
                        snr: float) -> float:
    """Two-term confluent-hypergeometric form of the Hankel entry g_{i,j}."""
    th = scenario.theta_hat
    k = min(scenario.n_r, scenario.n_t)
    d = abs(scenario.n_r - scenario.n_t)
    if not (0 <= i < k and 0 <= j < k):
        raise DomainError("entry indices out of range")
    p = d + i + j
    if abs((th - p) - round(th - p)) < 1e-9:
        raise DomainError(
            f"closed form invalid: theta_hat - (d+i+j) = {th - p} is the "
            f"integer {int(round(th - p))}")
    c = scenario.n_r / scenario.n_t * snr
    x = 1.0 / c
    pref = math.pi / (gamma_fn(th) * math.sin(math.pi * (p - th)))
    term1 = (c ** (-1.0 - p) * gamma_fn(1.0 + p) / gamma_fn(2.0 + p - th)
             * confluent_1f1(1.0 + p, 2.0 + p - th, x))
    term2 = (c ** (-th) * gamma_fn(th) / gamma_fn(th - p)
             * confluent_1f1(th, th - p, x))
    return pref * (term1 - term2)


# ---------------------------------------------------------------------------
# high-SNR slope and power offset

def highsnr_slope_empirical(rate_points) -> float:
    """Least-squares slope of rate against log2(SNR)."""
    pts = sorted(rate_points)
    if len(pts) < 4:
        raise DomainError("need at least 4 rate points")
    snrs = np.array([p[0] for p in pts])
    rates = np.array([p[1] for p in pts])
    if snrs[0] < 1e3:
        raise DomainError("slope regression requires snr >= 1e3")
    if snrs[-1] / snrs[0] < 100.0:
        raise DomainError("rate points must span at least 20 dB")
    x = np.log2(snrs)
    slope, _ = np.polyfit(x, rates, 1)
    return float(slope)


def highsnr_metrics(scenario: QosScenario, model: ChannelModel,
                    n_samples: int, seed: int) -> HighSnrMetrics:
    """High-SNR slope and power offset for the i.i.d. Gaussian model."""
    if not isinstance(model, IidComplexGaussian):
        raise DomainError("highsnr_metrics requires the i.i.d. Gaussian model")
    n_r, n_t = scenario.n_r, scenario.n_t
    mn, mx = min(n_r, n_t), max(n_r, n_t)
    th = scenario.theta_hat
    a = scenario.theta_tb

    def det_w_log2(h):
        w = h @ h.conj().transpose(0, 2, 1) if n_r <= n_t \
            else h.conj().transpose(0, 2, 1) @ h
        ev = np.linalg.eigvalsh(w)
        return np.log2(np.maximum(ev, 1e-300)).sum(axis=1)

    if th == 0:
        total = 0.0
        n = 0
        for h in iter_sample_chunks(model, n_samples, seed):
            total += float(det_w_log2(h).sum())
            n += h.shape[0]
        l_inf = math.log2(n_t / n_r) - total / n / mn
        return HighSnrMetrics(float(mn), l_inf, "ergodic (theta = 0)")

    if th < mx - mn + 1:
        acc = _LogMeanExp()
        for h in iter_sample_chunks(model, n_samples, seed):
            acc.add(-a * det_w_log2(h))
        l_inf = math.log2(n_t / n_r) + acc.log_mean() / (a * mn)
        return HighSnrMetrics(float(mn), l_inf,
                              "full slope (theta_hat < max - min + 1)")

    if mn == 1 and th > 1:
        return HighSnrMetrics(1.0 / th, math.nan,
                              "single-antenna reduced slope")

    if th > mx + mn - 1:
        return HighSnrMetrics(mn ** 2 / th, math.nan,
                              "heuristic multi-antenna reduced slope")

    # intermediate band: empirical regression on the Hankel rate curve
    snrs = 10.0 ** (np.array([30.0, 35.0, 40.0, 45.0, 50.0]) / 10.0)
    pts = [(s, hankel_effective_rate(scenario, s)) for s in snrs]
    s_inf = highsnr_slope_empirical(pts)
    l_inf = float(np.mean([math.log2(s) - r / s_inf for s, r in pts]))
    return HighSnrMetrics(s_inf, l_inf, "empirical (intermediate band)")
