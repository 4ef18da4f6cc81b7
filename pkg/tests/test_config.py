import math
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leoharvest import config as cf
from leoharvest.analytics import AdaptiveModulation
from leoharvest.errors import ConfigError


class TestDefaults:
    def test_shipped_file_is_the_default(self):
        assert cf.loads(cf.default_text()) == cf.ExperimentConfig()

    def test_empty_file_gives_defaults(self):
        assert cf.loads("") == cf.ExperimentConfig()

    def test_table2_link(self):
        cfg = cf.ExperimentConfig()
        link = cfg.link_budget()
        assert link.p == pytest.approx(1.0)
        assert link.g == pytest.approx(100.0)
        assert link.noise_power == pytest.approx(10 ** ((-174 + 10 * math.log10(2e7) - 30) / 10), rel=1e-14)
        geom = cfg.orbit_geometry()
        assert (geom.r_a, geom.gamma) == pytest.approx((600e3, 900e3))

    def test_kepler_motion(self):
        m = cf.ExperimentConfig().motion_params()
        assert m.omega_s == pytest.approx(math.sqrt(3.986004418e14 / 6971e3**3), rel=1e-14)

    def test_numeric_omega_s(self):
        cfg = cf.loads("[motion]\nomega_s = 0.002\n")
        assert cfg.motion_params().omega_s == 0.002

    def test_schemes(self):
        assert isinstance(cf.loads('[scheme]\nkind = "adaptive"').modulation(), AdaptiveModulation)
        fixed = cf.loads('[scheme]\nkind = "fixed"\nrate_bits = 2\ntau_db = 10').modulation()
        assert fixed.rate_bits == 2 and fixed.tau == pytest.approx(10.0, rel=1e-15)


class TestStrictness:
    @pytest.mark.parametrize("text, fragment", [
        ("[cox]\nlamda = 3", "cox.lamda"),
        ("[coxx]\nlambda = 3", "coxx"),
        ("top = 1", "top"),
        ("[cox]\nlambda = 'ten'", "cox.lambda"),
        ("[cox]\nlambda = true", "cox.lambda"),
        ("[sim]\ntrials = 1.5", "sim.trials"),
        ("[cox]\nlambda = -1", "cox"),
        ("[geometry]\ngamma_km = 100", "geometry"),
        ("[link]\nnakagami_m = 0", "nakagami_m"),
        ("[scheme]\nkind = 'qam'", "scheme.kind"),
        ("[polar]\nspacing = 'grid'", "polar.spacing"),
        ("[motion]\nomega_s = 'fast'", "motion.omega_s"),
        ("[pass]\nphi = 'ninety'", "pass.phi"),
        ("[delay]\nd_grid = [1, -2]", "delay"),
        ("[sweep]\nparameter = 'cox.mu'", "sweep.values"),
        ("[sweep]\nvalues = [1]", "sweep.parameter"),
        ("[sweep]\nparameter = 'scheme.kind'\nvalues = [1]", "not numeric"),
        ("[sweep]\nparameter = 'cox.nu'\nvalues = [1]", "cox.nu"),
        ("[output]\nformat = 'json'", "output.format"),
        ("cox = 3", "cox"),
    ])
    def test_rejections_name_the_field(self, text, fragment):
        with pytest.raises(ConfigError) as info:
            cf.loads(text)
        assert fragment in str(info.value)

    def test_syntax_error_reports_line(self):
        with pytest.raises(ConfigError) as info:
            cf.loads("[cox]\nlambda = 3\nmu = = 4\n")
        assert "line 3" in str(info.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            cf.load(tmp_path / "nope.toml")

    def test_file_errors_carry_path(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("[cox]\nlamda = 1\n")
        with pytest.raises(ConfigError) as info:
            cf.load(p)
        assert "bad.toml" in str(info.value) and "cox.lamda" in str(info.value)


class TestRoundTrip:
    def test_non_default_round_trip(self):
        text = """
[geometry]
altitude_km = 700
gamma_km = 750.25
[cox]
lambda = 12
[motion]
omega_s = 0.0011
include_earth_rotation = true
[pass]
phi = 1.3
[delay]
d_grid = [0, 10.5, 20]
[sim]
time_step = 0.5
seed = 42
[sweep]
parameter = "cox.mu"
values = [1, 2.5]
"""
        cfg = cf.loads(text)
        assert cf.loads(cf.dumps(cfg)) == cfg
        assert cfg.sim_config().time_step == 0.5
        assert cfg.sim_config().include_earth_rotation

    @settings(max_examples=60, deadline=None)
    @given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(601, 2800), st.integers(0, 2**63))
    def test_echo_reparses_identically(self, lam, mu, gamma, seed):
        cfg = cf.from_dict({"cox": {"lambda": lam, "mu": mu}, "geometry": {"gamma_km": gamma},
                            "sim": {"seed": seed}})
        assert cf.loads(cf.dumps(cfg)) == cfg


class TestOverrides:
    def test_float_override(self):
        cfg = cf.with_override(cf.ExperimentConfig(), "geometry.gamma_km", 1000)
        assert cfg.geometry.gamma_km == 1000.0

    def test_int_override(self):
        assert cf.with_override(cf.ExperimentConfig(), "polar.n_orbits", 7.0).polar.n_orbits == 7
        with pytest.raises(ConfigError):
            cf.with_override(cf.ExperimentConfig(), "polar.n_orbits", 7.5)

    def test_override_is_validated(self):
        with pytest.raises(ConfigError):
            cf.with_override(cf.ExperimentConfig(), "geometry.gamma_km", 10.0)

    def test_pass_angle_override(self):
        cfg = cf.with_override(cf.ExperimentConfig(), "pass.phi", 1.2)
        assert cfg.pass_inclination() == 1.2

    def test_with_sim(self):
        cfg = cf.with_sim(cf.ExperimentConfig(), trials=10, seed=3)
        assert (cfg.sim.trials, cfg.sim.seed) == (10, 3)


@pytest.mark.parametrize("text, radians", [("90deg", math.pi / 2), ("45.5 deg", math.radians(45.5)),
                                           ("-1e1deg", math.radians(-10))])
def test_parse_angle(text, radians):
    assert cf.parse_angle(text) == pytest.approx(radians, rel=1e-15)


@pytest.mark.parametrize("path", sorted((Path(__file__).parent.parent / "configs").glob("*.toml")),
                         ids=lambda p: p.name)
def test_example_configs_load(path):
    cfg = cf.load(path)
    assert cf.loads(cf.dumps(cfg)) == cfg
