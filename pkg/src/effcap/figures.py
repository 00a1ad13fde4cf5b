"""CSV dataset generation: SNR sweeps and the six reference figure grids.

Each figure is emitted as one CSV file per curve so downstream plotting
stays trivial. All numeric cells use 12 significant digits.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .channels import IidComplexGaussian
from .config import RunConfig
from .engine import (QosScenario, UniformIdentity, _LogMeanExp,
                     effective_rate_mc, ergodic_rate_mc)
from .channels import iter_sample_chunks
from .engine import chunk_rates
from .errors import ConfigError

SWEEP_COLUMNS = ["snr_db", "snr_linear", "rate_bits_s_hz", "rate_per_dim",
                 "std_err", "eb_n0_db", "strategy", "theta_hat", "n_R",
                 "n_T", "n_samples", "seed"]

_FIG_THETA_HAT_SISO = (0.0, 0.5, 1.0, 2.0, 5.0)
_FIG3_THETA_HAT = (0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0)
_FIG4_NT = (2, 3, 4, 8, 15)
_FIG56_THETA = (0.0, 0.1, 0.5, 1.0, 2.0)

_T = 1e-3  # block duration, seconds
_B = 1e5  # bandwidth, Hz


def _fmt(v) -> str:
    if isinstance(v, float):
        return "%.12g" % v
    return str(v)


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _rate_point(scenario: QosScenario, model, strategy, snr: float,
                n_samples: int, seed: int):
    """(rate per dim, std err) at one SNR, ergodic when theta = 0."""
    if scenario.theta == 0:
        est = ergodic_rate_mc(model, strategy, snr, n_samples, seed,
                              n_r=scenario.n_r)
    else:
        est = effective_rate_mc(scenario, model, strategy, snr, n_samples,
                                seed)
    return est.value, est.std_err


def sweep_rows(scenario: QosScenario, model, strategy, snr_db_grid,
               n_samples: int, seed: int):
    """One row per SNR grid point in the stable sweep schema."""
    name = type(strategy).__name__
    rows = []
    for db in snr_db_grid:
        snr = 10.0 ** (db / 10.0)
        val, err = _rate_point(scenario, model, strategy, snr, n_samples,
                               seed)
        unnorm = val * scenario.n_r
        eb_db = 10.0 * math.log10(snr / unnorm) if unnorm > 0 else math.inf
        rows.append((float(db), snr, unnorm, val, err, eb_db, name,
                     scenario.theta_hat, scenario.n_r, scenario.n_t,
                     n_samples, seed))
    return rows


def run_sweep(cfg: RunConfig, out_path: str | None = None) -> str:
    """Execute the config's SNR sweep and write the CSV dataset."""
    grid = cfg.sweep_grid_db()
    rows = sweep_rows(cfg.scenario(), cfg.model(), cfg.strategy(), grid,
                      cfg.n_samples, cfg.seed)
    path = out_path or cfg.kv["output.path"]
    _write_csv(path, SWEEP_COLUMNS, rows)
    return path


@dataclass(frozen=True)
class FigureCurve:
    label: str
    path: str
    header: list
    rows: list


def _antenna_figure(name, out_dir, n_samples, seed, curves, snr_db_grid):
    """Figures 1-4 share the sweep schema; one file per curve."""
    out = []
    for label, theta_hat, n_r, n_t in curves:
        scenario = QosScenario.from_theta_hat(theta_hat, _T, _B, n_r, n_t)
        model = IidComplexGaussian(n_r, n_t)
        rows = sweep_rows(scenario, model, UniformIdentity(), snr_db_grid,
                          n_samples, seed)
        path = os.path.join(out_dir, f"{name}_{label}.csv")
        _write_csv(path, SWEEP_COLUMNS, rows)
        out.append(FigureCurve(label, path, SWEEP_COLUMNS, rows))
    return out


def _sparse_rate(theta, t, b_c, m, p_over_n0, n_r, n_t, n_samples, seed):
    """Unnormalized effective rate of one sparse-multipath subchannel."""
    snr = p_over_n0 / (n_r * m * b_c)
    model = IidComplexGaussian(n_r, n_t)
    strategy = UniformIdentity()
    if theta == 0:
        est = ergodic_rate_mc(model, strategy, snr, n_samples, seed)
        return snr, est.value * n_r
    a = theta * t * b_c
    acc = _LogMeanExp()
    for h in iter_sample_chunks(model, n_samples, seed):
        acc.add(-a * chunk_rates(h, strategy, snr, n_r))
    return snr, -acc.log_mean() / a


_SPARSE_COLUMNS = ["b_c_hz", "m", "snr_linear", "theta", "rate_bits_s_hz",
                   "eb_n0_db", "n_samples", "seed"]


def _sparse_figure(name, out_dir, n_samples, seed, m_schedule, n_points,
                   thetas):
    b_c_grid = np.logspace(4.0, 7.0, n_points)
    n_r = n_t = 2
    p_over_n0 = 1e4
    out = []
    for theta in thetas:
        rows = []
        for b_c in b_c_grid:
            m = m_schedule(b_c)
            snr, rate = _sparse_rate(theta, _T, b_c, m, p_over_n0, n_r, n_t,
                                     n_samples, seed)
            eb_db = 10.0 * math.log10(snr / rate) if rate > 0 else math.inf
            rows.append((float(b_c), m, snr, theta, rate, eb_db, n_samples,
                         seed))
        label = ("theta%g" % theta).replace(".", "p")
        path = os.path.join(out_dir, f"{name}_{label}.csv")
        _write_csv(path, _SPARSE_COLUMNS, rows)
        out.append(FigureCurve(label, path, _SPARSE_COLUMNS, rows))
    return out


def reproduce_figure(name: str, out_dir: str = ".", n_samples: int = 200_000,
                     seed: int = 0, theta_values=None, snr_db=None,
                     n_points: int = 25):
    """Emit the per-curve CSV datasets for one of the reference figures.

    theta_values / snr_db override the default parameter grids (useful for
    cheap partial reproductions); figures 5/6 ignore snr_db because their
    SNR is set by the coherence-bandwidth schedule.
    """
    os.makedirs(out_dir, exist_ok=True)

    def _lab(th):
        return ("thetahat%g" % th).replace(".", "p")

    if name == "fig1":
        ths = theta_values if theta_values is not None else _FIG_THETA_HAT_SISO
        grid = snr_db if snr_db is not None else np.linspace(-20, 30, 26)
        curves = [(_lab(th), th, 1, 1) for th in ths]
        return _antenna_figure(name, out_dir, n_samples, seed, curves, grid)
    if name == "fig2":
        ths = theta_values if theta_values is not None else _FIG_THETA_HAT_SISO
        grid = snr_db if snr_db is not None else np.linspace(-40, 10, 26)
        curves = [(_lab(th), th, 1, 1) for th in ths]
        return _antenna_figure(name, out_dir, n_samples, seed, curves, grid)
    if name == "fig3":
        ths = theta_values if theta_values is not None else _FIG3_THETA_HAT
        grid = snr_db if snr_db is not None else np.linspace(-40, 10, 26)
        curves = [(_lab(th), th, 2, 5) for th in ths]
        return _antenna_figure(name, out_dir, n_samples, seed, curves, grid)
    if name == "fig4":
        nts = theta_values if theta_values is not None else _FIG4_NT
        grid = snr_db if snr_db is not None else np.linspace(-40, 10, 26)
        curves = [(f"nT{int(nt)}", 1.0, 2, int(nt)) for nt in nts]
        return _antenna_figure(name, out_dir, n_samples, seed, curves, grid)
    if name == "fig5":
        ths = theta_values if theta_values is not None else _FIG56_THETA
        return _sparse_figure(name, out_dir, n_samples, seed,
                              lambda b_c: 5, n_points, ths)
    if name == "fig6":
        ths = theta_values if theta_values is not None else _FIG56_THETA
        # m grows from 5 to 100 as B_c sweeps 10 kHz -> 10 MHz; the growth
        # schedule is geometric in B_c (the source grid is log-spaced)
        def m_of(b_c):
            frac = (math.log10(b_c) - 4.0) / 3.0
            return max(5, int(round(5.0 * (100.0 / 5.0) ** frac)))
        return _sparse_figure(name, out_dir, n_samples, seed, m_of,
                              n_points, ths)
    raise ConfigError(f"unknown figure name {name!r} (use fig1..fig6)")


def extrapolated_eb_min_db(rows) -> float:
    """Zero-rate intercept of the E_b/N0 (dB) vs rate curve.

    Linear extrapolation through the two smallest-rate points of a sweep
    dataset (rows in the sweep schema).
    """
    pts = sorted((r[2], r[5]) for r in rows if math.isfinite(r[5]))
    if len(pts) < 2:
        raise ConfigError("need at least two finite bit-energy points")
    (r1, e1), (r2, e2) = pts[0], pts[1]
    return e1 - r1 * (e2 - e1) / (r2 - r1)
