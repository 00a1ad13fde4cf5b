import numpy as np
import pytest

from effcap import cli
from effcap.channels import IidComplexGaussian, KroneckerCorrelated
from effcap.config import (RunConfig, apply_overrides, parse_config,
                           parse_kv_text, serialize_config)
from effcap.engine import UniformIdentity, WaterfillingCsit
from effcap.errors import ConfigError

BASE = """
scenario.theta_hat = 1.0
scenario.n_r = 2
scenario.n_t = 2
sweep.snr_db_start = -10
sweep.snr_db_stop = 10
sweep.n_points = 5
mc.n_samples = 2000
"""


class TestParsing:
    def test_defaults_applied(self):
        cfg = parse_config(BASE)
        assert cfg.kv["scenario.t"] == 1e-3
        assert cfg.kv["strategy.name"] == "uniform"
        assert cfg.n_samples == 2000
        assert cfg.seed == 0

    def test_roundtrip_identity(self):
        cfg = parse_config(BASE)
        text = serialize_config(cfg)
        again = parse_config(text)
        assert again.kv == cfg.kv
        assert serialize_config(again) == text

    def test_comments_and_blank_lines(self):
        kv = parse_kv_text("# comment\n\nscenario.theta = 0.1  # trailing\n")
        assert kv == {"scenario.theta": 0.1}

    def test_theta_xor_theta_hat(self):
        with pytest.raises(ConfigError):
            parse_config("scenario.n_r = 1\n")  # neither given
        with pytest.raises(ConfigError):
            parse_config("scenario.theta = 0.1\nscenario.theta_hat = 1.0\n")

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError):
            parse_kv_text("bogus.key = 1\n")
        with pytest.raises(ConfigError):
            parse_kv_text("nodots = 1\n")

    def test_malformed_line_rejected(self):
        with pytest.raises(ConfigError):
            parse_kv_text("scenario.theta 0.1\n")

    def test_bad_sweep_rejected(self):
        with pytest.raises(ConfigError):
            parse_config(BASE.replace("sweep.snr_db_stop = 10",
                                      "sweep.snr_db_stop = -20"))
        with pytest.raises(ConfigError):
            parse_config(BASE.replace("sweep.n_points = 5",
                                      "sweep.n_points = 0"))

    def test_bad_strategy_rejected(self):
        with pytest.raises(ConfigError):
            parse_config(BASE + "strategy.name = magic\n")

    def test_overrides(self):
        kv = parse_kv_text(BASE)
        kv = apply_overrides(kv, ["mc.seed=7", "strategy.name=waterfilling"])
        cfg = RunConfig(kv)
        assert cfg.seed == 7
        assert isinstance(cfg.strategy(), WaterfillingCsit)
        with pytest.raises(ConfigError):
            apply_overrides(kv, ["noequals"])
        with pytest.raises(ConfigError):
            apply_overrides(kv, ["bogus.key=1"])


class TestDomainObjects:
    def test_scenario_theta_vs_theta_hat(self):
        a = parse_config("scenario.theta_hat = 1.0\n").scenario()
        b = parse_config(
            f"scenario.theta = {a.theta!r}\n").scenario()
        assert abs(a.theta - b.theta) < 1e-18

    def test_iid_model(self):
        m = parse_config(BASE).model()
        assert isinstance(m, IidComplexGaussian)
        assert (m.n_r, m.n_t) == (2, 2)

    def test_fixed_model_from_lists(self):
        cfg = parse_config(
            "scenario.theta_hat = 1.0\n"
            "scenario.n_r = 1\nscenario.n_t = 2\n"
            "model.variant = fixed\n"
            "model.h_real = 1.0, 2.0\n"
            "model.h_imag = 0.0, -1.0\n")
        h = cfg.model().h
        assert np.array_equal(h, np.array([[1.0, 2.0 - 1.0j]]))

    def test_fixed_model_wrong_length(self):
        cfg = parse_config(
            "scenario.theta_hat = 1.0\nscenario.n_r = 2\nscenario.n_t = 2\n"
            "model.variant = fixed\nmodel.h_real = 1.0, 2.0\n")
        with pytest.raises(ConfigError):
            cfg.model()

    def test_kronecker_model(self):
        cfg = parse_config(BASE + "model.variant = kronecker\n"
                                  "model.rho_t = 0.5\n")
        m = cfg.model()
        assert isinstance(m, KroneckerCorrelated)
        assert m.r_t[0, 1] == 0.5
        assert np.array_equal(m.r_r, np.eye(2))

    def test_sweep_grid(self):
        grid = parse_config(BASE).sweep_grid_db()
        assert np.array_equal(grid, np.linspace(-10, 10, 5))
        with pytest.raises(ConfigError):
            parse_config("scenario.theta_hat = 1.0\n").sweep_grid_db()


def run_cli(*argv):
    return cli.main(list(argv))


class TestCli:
    def write_cfg(self, tmp_path, text=BASE):
        p = tmp_path / "run.cfg"
        p.write_text(text)
        return str(p)

    def test_sweep_schema_and_determinism(self, tmp_path):
        cfg = self.write_cfg(tmp_path)
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        assert run_cli("sweep", "--config", cfg, "--out", str(out1),
                       "--quiet") == 0
        assert run_cli("sweep", "--config", cfg, "--out", str(out2),
                       "--quiet") == 0
        assert out1.read_bytes() == out2.read_bytes()
        lines = out1.read_text().strip().splitlines()
        header = lines[0].split(",")
        assert header[:6] == ["snr_db", "snr_linear", "rate_bits_s_hz",
                              "rate_per_dim", "std_err", "eb_n0_db"]
        assert len(lines) == 6  # header + 5 grid points

    def test_missing_scenario_is_config_error(self, tmp_path):
        out = tmp_path / "x.csv"
        assert run_cli("sweep", "--out", str(out), "--quiet") == 2

    def test_bad_sweep_is_config_error(self, tmp_path):
        cfg = self.write_cfg(tmp_path)
        assert run_cli("sweep", "--config", cfg, "--quiet",
                       "--set", "sweep.n_points=0",
                       "--out", str(tmp_path / "x.csv")) == 2

    def test_bogus_override_is_config_error(self, tmp_path):
        cfg = self.write_cfg(tmp_path)
        assert run_cli("sweep", "--config", cfg, "--quiet",
                       "--set", "nonsense.key=1",
                       "--out", str(tmp_path / "x.csv")) == 2

    def test_low_snr(self, tmp_path, capsys):
        cfg = self.write_cfg(tmp_path)
        assert run_cli("low-snr", "--config", cfg) == 0
        out = capsys.readouterr().out
        assert "eb_n0_min_db" in out
        assert "wideband_slope_s0" in out

    def test_high_snr(self, tmp_path, capsys):
        cfg = self.write_cfg(tmp_path)
        assert run_cli("high-snr", "--config", cfg, "--samples", "2000",
                       "--set", "scenario.theta_hat=0.5") == 0
        assert "s_inf = 2" in capsys.readouterr().out

    def test_bit_energy(self, tmp_path):
        cfg = self.write_cfg(tmp_path)
        out = tmp_path / "be.csv"
        assert run_cli("bit-energy", "--config", cfg, "--out", str(out),
                       "--quiet") == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "eb_n0_db,rate_bits_s_hz"
        assert len(lines) >= 2

    def test_sparse_wideband(self, tmp_path, capsys):
        cfg = self.write_cfg(tmp_path, BASE + "sparse.m = 5\n"
                                              "sparse.p_over_n0 = 1e4\n"
                                              "sparse.b_c = 1e5\n")
        assert run_cli("sparse-wideband", "--config", cfg) == 0
        out = capsys.readouterr().out
        assert "ebmin_bounded_db" in out
        assert "ebmin_sublinear_db" in out

    def test_sparse_wideband_missing_block(self, tmp_path):
        cfg = self.write_cfg(tmp_path)
        assert run_cli("sparse-wideband", "--config", cfg, "--quiet") == 2

    def test_sparse_wideband_zero_channel_numeric_error(self, tmp_path):
        cfg = self.write_cfg(
            tmp_path,
            "scenario.theta_hat = 1.0\n"
            "scenario.n_r = 1\nscenario.n_t = 1\n"
            "model.variant = fixed\nmodel.h_real = 0.0\n"
            "mc.n_samples = 2000\n"
            "sparse.m = 5\nsparse.p_over_n0 = 1e4\nsparse.b_c = 1e5\n")
        assert run_cli("sparse-wideband", "--config", cfg, "--quiet") == 3

    def test_queue_validate(self, tmp_path):
        cfg = self.write_cfg(tmp_path,
                             "scenario.theta_hat = 1.0\n"
                             "mc.n_samples = 100000\n")
        trace = tmp_path / "trace.csv"
        code = run_cli("queue-validate", "--config", cfg, "--quiet",
                       "--snr-db", "10", "--blocks", "400000",
                       "--trace-out", str(trace))
        assert code == 0
        assert trace.read_text().startswith("block_index,queue_bits")

    def test_validate_suite(self):
        assert run_cli("validate", "wideband", "--samples", "20000",
                       "--quiet") == 0

    def test_reproduce_fig(self, tmp_path):
        assert run_cli("reproduce-fig", "fig1", "--out", str(tmp_path),
                       "--samples", "2000", "--quiet") == 0
        made = sorted(p.name for p in tmp_path.glob("*.csv"))
        assert made  # one CSV per curve
        for p in tmp_path.glob("*.csv"):
            assert p.read_text().splitlines()[0].startswith("snr_db")

    def test_reproduce_fig_unknown_name(self, tmp_path):
        assert run_cli("reproduce-fig", "fig99", "--out", str(tmp_path),
                       "--quiet") == 2
