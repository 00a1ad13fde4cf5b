"""Flat dotted key=value run configuration.

Example:

    scenario.theta_hat = 1.0
    scenario.t = 1e-3
    scenario.b = 1e5
    scenario.n_r = 2
    scenario.n_t = 2
    strategy.name = uniform
    sweep.snr_db_start = -20
    sweep.snr_db_stop = 20
    sweep.n_points = 21
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import (FixedMatrix, IidComplexGaussian, KroneckerCorrelated)
from .engine import (BeamformingCsit, FixedCovariance, QosScenario,
                     StatisticalOptimized, UniformIdentity, WaterfillingCsit)
from .errors import ConfigError

_SECTIONS = ("scenario", "model", "strategy", "sweep", "mc", "sparse",
             "output")

_STRATEGIES = ("uniform", "waterfilling", "beamforming", "fixed",
               "statistical")

_DEFAULTS = {
    "scenario.t": 1e-3,
    "scenario.b": 1e5,
    "scenario.n_r": 1,
    "scenario.n_t": 1,
    "model.variant": "iid",
    "strategy.name": "uniform",
    "mc.n_samples": 200_000,
    "mc.seed": 0,
    "output.path": "out.csv",
    "output.format": "csv",
}


def _parse_scalar(raw: str):
    raw = raw.strip()
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def _format_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_kv_text(text: str) -> dict:
    """Parse 'section.key = value' lines into a flat dict."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = line.split("=", 1)
        key = key.strip()
        if "." not in key or key.split(".", 1)[0] not in _SECTIONS:
            raise ConfigError(
                f"line {lineno}: unknown section in key {key!r} "
                f"(sections: {', '.join(_SECTIONS)})")
        out[key] = _parse_scalar(raw)
    return out


def apply_overrides(kv: dict, overrides) -> dict:
    out = dict(kv)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        key = key.strip()
        if "." not in key or key.split(".", 1)[0] not in _SECTIONS:
            raise ConfigError(f"override key {key!r} has no known section")
        out[key] = _parse_scalar(raw)
    return out


@dataclass(frozen=True)
class RunConfig:
    """Validated flat configuration; section accessors build domain objects."""

    kv: dict = field(default_factory=dict)

    def __post_init__(self):
        merged = dict(_DEFAULTS)
        merged.update(self.kv)
        object.__setattr__(self, "kv", merged)
        self._validate()

    def _validate(self):
        bad = []
        has_theta = "scenario.theta" in self.kv
        has_hat = "scenario.theta_hat" in self.kv
        if has_theta == has_hat:
            bad.append("scenario.theta / scenario.theta_hat "
                       "(exactly one required)")
        for k in ("scenario.t", "scenario.b"):
            if not (isinstance(self.kv[k], (int, float))
                    and self.kv[k] > 0):
                bad.append(k)
        for k in ("scenario.n_r", "scenario.n_t"):
            if not (isinstance(self.kv[k], int) and self.kv[k] >= 1):
                bad.append(k)
        if self.kv["strategy.name"] not in _STRATEGIES:
            bad.append("strategy.name")
        if self.kv["model.variant"] not in ("iid", "fixed", "kronecker"):
            bad.append("model.variant")
        if any(k.startswith("sweep.") for k in self.kv):
            for k in ("sweep.snr_db_start", "sweep.snr_db_stop",
                      "sweep.n_points"):
                if k not in self.kv:
                    bad.append(k + " (missing)")
            if not bad:
                lo = self.kv["sweep.snr_db_start"]
                hi = self.kv["sweep.snr_db_stop"]
                n = self.kv["sweep.n_points"]
                if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                    bad.append("sweep bounds (need finite start < stop)")
                if not (isinstance(n, int) and n >= 1):
                    bad.append("sweep.n_points")
        if not (isinstance(self.kv["mc.n_samples"], int)
                and self.kv["mc.n_samples"] >= 1000):
            bad.append("mc.n_samples")
        if not (isinstance(self.kv["mc.seed"], int)
                and self.kv["mc.seed"] >= 0):
            bad.append("mc.seed")
        if bad:
            raise ConfigError("invalid config fields: " + "; ".join(bad))

    # ------------------------------------------------------------------
    def scenario(self) -> QosScenario:
        kv = self.kv
        common = dict(t=float(kv["scenario.t"]), b=float(kv["scenario.b"]),
                      n_r=kv["scenario.n_r"], n_t=kv["scenario.n_t"])
        if "scenario.theta" in kv:
            return QosScenario(theta=float(kv["scenario.theta"]), **common)
        return QosScenario.from_theta_hat(float(kv["scenario.theta_hat"]),
                                          **common)

    def model(self):
        kv = self.kv
        n_r, n_t = kv["scenario.n_r"], kv["scenario.n_t"]
        variant = kv["model.variant"]
        if variant == "iid":
            return IidComplexGaussian(n_r, n_t)
        if variant == "fixed":
            re = self._float_list("model.h_real", n_r * n_t)
            im = self._float_list("model.h_imag", n_r * n_t,
                                  default=[0.0] * (n_r * n_t))
            h = (np.array(re) + 1j * np.array(im)).reshape(n_r, n_t)
            return FixedMatrix(h)
        # kronecker: exponential correlation rho^{|i-j|} on each side
        rho_r = float(kv.get("model.rho_r", 0.0))
        rho_t = float(kv.get("model.rho_t", 0.0))
        idx_r = np.arange(n_r)
        idx_t = np.arange(n_t)
        r_r = rho_r ** np.abs(idx_r[:, None] - idx_r[None, :])
        r_t = rho_t ** np.abs(idx_t[:, None] - idx_t[None, :])
        return KroneckerCorrelated(r_r.astype(complex), r_t.astype(complex))

    def strategy(self):
        name = self.kv["strategy.name"]
        if name == "uniform":
            return UniformIdentity()
        if name == "waterfilling":
            return WaterfillingCsit()
        if name == "beamforming":
            return BeamformingCsit()
        if name == "statistical":
            return StatisticalOptimized()
        n_t = self.kv["scenario.n_t"]
        diag = self._float_list("strategy.k_diag", n_t)
        return FixedCovariance(np.diag(diag).astype(complex))

    def _float_list(self, key: str, n: int, default=None):
        if key not in self.kv:
            if default is not None:
                return default
            raise ConfigError(f"{key} required (comma-separated, {n} values)")
        raw = str(self.kv[key])
        vals = [float(x) for x in raw.split(",")]
        if len(vals) != n:
            raise ConfigError(f"{key} must have {n} values, got {len(vals)}")
        return vals

    def sweep_grid_db(self) -> np.ndarray:
        if "sweep.snr_db_start" not in self.kv:
            raise ConfigError("sweep block missing")
        return np.linspace(self.kv["sweep.snr_db_start"],
                           self.kv["sweep.snr_db_stop"],
                           self.kv["sweep.n_points"])

    @property
    def n_samples(self) -> int:
        return self.kv["mc.n_samples"]

    @property
    def seed(self) -> int:
        return self.kv["mc.seed"]


def parse_config(text: str) -> RunConfig:
    return RunConfig(parse_kv_text(text))


def serialize_config(cfg: RunConfig) -> str:
    lines = []
    for section in _SECTIONS:
        for key in sorted(k for k in cfg.kv if k.startswith(section + ".")):
            lines.append(f"{key} = {_format_scalar(cfg.kv[key])}")
    return "\n".join(lines) + "\n"
