import dataclasses

import pytest

from bawopto.model import (
    AcousticMode,
    BvdBranch,
    CavityMode,
    CrystalGeometry,
    ModeEntry,
    ModeFamily,
    PhysicalConstants,
    SystemConfig,
    validate,
)


def a500(**kw):
    args = dict(label="A_5_0_0", family=ModeFamily.A_longitudinal, indices=(5, 0, 0),
                f_m=8.3e6, q_m=1e6, m_eff=3.52e-7)
    args.update(kw)
    return AcousticMode(**args)


def system(**kw):
    args = dict(cavity=CavityMode(6.075e9, 2500, 0.8, 0.136), modes=(ModeEntry(a500()),))
    args.update(kw)
    return SystemConfig(**args)


def test_valid_config_has_no_violations():
    assert validate(system()) == []


def test_derived_cavity_fields():
    cav = CavityMode(6.075e9, 2500, 0.8, 0.136)
    assert cav.q_unloaded == pytest.approx(4840, rel=1e-12)
    assert cav.kappa_c == pytest.approx(2.43e6, rel=1e-12)


def test_derived_fields_cannot_be_overridden():
    with pytest.raises(TypeError):
        CavityMode(6.075e9, 2500, q_unloaded=4250)


def test_negative_q_loaded_single_violation():
    out = validate(system(cavity=CavityMode(6.075e9, -1)))
    assert len(out) == 1
    assert "q_loaded must be > 0" in out[0]


def test_inconsistent_gamma_names_mode():
    mode = a500(gamma_m=8.3 * 1.01)
    out = validate(system(modes=(ModeEntry(mode),)))
    assert len(out) == 1
    assert "A_5_0_0" in out[0] and "gamma_m" in out[0]


def test_gamma_defaults_to_linewidth():
    mode = a500()
    assert mode.gamma_m * mode.q_m == pytest.approx(mode.f_m, rel=1e-12)


def test_duplicate_labels_and_empty_modes():
    out = validate(system(modes=(ModeEntry(a500()), ModeEntry(a500()))))
    assert any("not unique" in v for v in out)
    assert any("at least one" in v for v in validate(system(modes=())))


def test_geometry_invariants():
    out = validate(system(geometry=CrystalGeometry(30e-3, 2e-3, 1e-3)))
    assert out == ["geometry: convex_radius must be > center_thickness"]
    out = validate(system(geometry=CrystalGeometry(-1, 2e-3, 0.1)))
    assert out == ["geometry: diameter must be > 0"]


def test_bvd_from_mode_satisfies_relations():
    mode = a500()
    bvd = BvdBranch.from_mode(mode, 100.0)
    assert bvd.k_m**2 * bvd.l_m == pytest.approx(mode.m_eff, rel=1e-12)
    assert bvd.k_m**2 / bvd.c_m == pytest.approx(100.0, rel=1e-12)
    assert validate(system(modes=(ModeEntry(mode, bvd),))) == []


def test_bvd_inconsistent_inductance_flagged():
    mode = a500()
    bvd = dataclasses.replace(BvdBranch.from_mode(mode, 100.0), l_m=1.0)
    out = validate(system(modes=(ModeEntry(mode, bvd),)))
    assert out == ["mode A_5_0_0: k_m^2 * l_m inconsistent with m_eff"]


def test_envelope_larger_than_crystal_flagged():
    out = validate(system(modes=(ModeEntry(a500(), overtone_n=5, envelope_waist_r0=20e-3),)))
    assert out == ["mode A_5_0_0: envelope_waist_r0 must not exceed the crystal radius"]


def test_types_are_immutable():
    with pytest.raises(dataclasses.FrozenInstanceError):
        PhysicalConstants().hbar = 1.0
    assert PhysicalConstants().hbar == 1.054571817e-34


def test_family_parse():
    assert ModeFamily.parse("B") is ModeFamily.B_shear
    assert ModeFamily.parse("A_longitudinal") is ModeFamily.A_longitudinal
    with pytest.raises(ValueError):
        ModeFamily.parse("C")
