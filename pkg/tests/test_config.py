import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bawopto.config import (
    ConfigError,
    UnitError,
    ValidationError,
    dump_config,
    load_config,
    parse_config,
    parse_quantity,
)
from bawopto.model import CavityMode, ModeEntry, ModeFamily, SystemConfig, AcousticMode

from conftest import MINIMAL


def test_cavity_derived_values(write_cfg):
    cfg = load_config(write_cfg(MINIMAL))
    assert cfg.cavity.q_unloaded == pytest.approx(2500 * (1 + 0.8 + 0.136), rel=1e-12)
    assert cfg.cavity.q_unloaded == pytest.approx(4840, rel=1e-12)
    assert cfg.cavity.kappa_c == pytest.approx(6.075e9 / 2500, rel=1e-12)


def test_gram_masses_converted():
    cfg = parse_config(MINIMAL)
    assert cfg.modes[0].mode.m_eff == pytest.approx(3.52e-7, rel=1e-15)


def test_label_gives_family_and_indices():
    mode = parse_config(MINIMAL).modes[0].mode
    assert mode.family is ModeFamily.A_longitudinal
    assert mode.indices == (5, 0, 0)


def test_missing_f_m_names_mode_and_field():
    text = MINIMAL.replace("f_m = 8.3 MHz\n", "")
    with pytest.raises(ValidationError) as err:
        parse_config(text)
    assert "A_5_0_0" in str(err.value) and "f_m" in str(err.value)


def test_unknown_unit_reports_line():
    text = MINIMAL.replace("q_loaded = 2500", "q_loaded = 2500 furlongs")
    with pytest.raises(UnitError) as err:
        parse_config(text)
    assert err.value.line == 4


def test_wrong_dimension_unit():
    with pytest.raises(UnitError):
        parse_quantity("3 MHz", "m_eff")


def test_parse_error_line_number():
    text = MINIMAL + "\n[mode B_7_0_0]\nf_m 5.8 MHz\n"
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.line == MINIMAL.count("\n") + 3


def test_comments_and_whitespace():
    text = MINIMAL.replace("q_m = 1e6", "q_m=1e6   # trailing comment\n# full comment line")
    assert parse_config(text).modes[0].mode.q_m == 1e6


def test_file_q_unloaded_is_ignored():
    text = MINIMAL.replace("beta2 = 0.136", "beta2 = 0.136\nq_unloaded = 4250")
    assert parse_config(text).cavity.q_unloaded == pytest.approx(4840, rel=1e-12)


def test_validation_error_collects_all():
    text = MINIMAL.replace("q_loaded = 2500", "q_loaded = -1").replace("q_m = 1e6", "q_m = 0")
    with pytest.raises(ValidationError) as err:
        parse_config(text)
    assert len(err.value.violations) == 2


@pytest.mark.parametrize("bad", [
    "[nonsense]\nx = 1\n",
    "[cavity]\nf_c = 6 GHz\nf_c = 7 GHz\n",
    "f_c = 6 GHz\n",
    "[mode]\nf_m = 1 MHz\n",
    "[cavity]\nwidth = 3\n",
])
def test_malformed_files(bad):
    with pytest.raises(ConfigError):
        parse_config(bad)


def test_pull_section_samples():
    text = MINIMAL + "\n[pull A_5_0_0]\ndelta_x_1 = 1e-15 m\ndelta_f_c_1 = 44 Hz\ndelta_x_2 = 2e-15 m\ndelta_f_c_2 = 88 Hz\n"
    entry = parse_config(text).modes[0]
    assert entry.pull_samples == ((1e-15, 44.0), (2e-15, 88.0))


def test_pull_section_for_unknown_mode():
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + "\n[pull Z]\ndelta_x_1 = 1 m\ndelta_f_c_1 = 1 Hz\n")


def test_sample_config_round_trip(sample_config):
    again = parse_config(dump_config(sample_config))
    assert again == sample_config


def test_sample_config_loads(sample_config):
    assert [e.label for e in sample_config.modes] == ["B_5_0_0", "A_3_0_0", "B_7_0_0", "B_9_0_0", "A_5_0_0"]
    assert sample_config.reference("A_5_0_0.g0") == pytest.approx(2.38e-6)
    assert sample_config.reference("A_3_0_0.g0_abstract") == pytest.approx(1.4e-5)
    assert sample_config.readout.incident_power == pytest.approx(1e-5)


positive = st.floats(min_value=1e-3, max_value=1e12, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(f_c=positive, q_l=st.floats(1, 1e7), b1=st.floats(0, 10), b2=st.floats(0, 10),
       f_m=positive, q_m=st.floats(1, 1e9), m=st.floats(1e-12, 1.0))
def test_round_trip_property(f_c, q_l, b1, b2, f_m, q_m, m):
    cfg = SystemConfig(
        cavity=CavityMode(f_c, q_l, b1, b2),
        modes=(ModeEntry(AcousticMode("X1", ModeFamily.B_shear, (1, 2, 3), f_m, q_m, m)),),
    )
    again = parse_config(dump_config(cfg))
    assert again == cfg
    # derived fields recompute identically
    assert again.cavity.q_unloaded == cfg.cavity.q_unloaded
