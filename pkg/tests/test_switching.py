import json
import math
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ecwatermark import (
    ConfigError,
    ConfigurationWarning,
    Curve,
    FirParams,
    InputError,
    Point,
    SwitchingConfig,
    alpha1,
    alpha2,
    eta1,
    eta2,
    sigma,
    sigma_detail,
    validate_theta,
)

finite_floats = st.floats(min_value=-50, max_value=50, allow_nan=False)


def make_config(**overrides):
    base = dict(
        curve=Curve(2, 2, 17),
        l=7,
        alpha_x=(4.0, 1.0, 3.0, 2.4),
        alpha_y=(2.5, 0.7, 1.7, 3.1),
        eta1_rows=((0.0, 0.5, 0.0), (0.0, 0.0, 0.05), (1.0, -0.15, 0.012)),
        n_h=2,
        eta_floor=1.0,
        eta_margin=0.05,
        eta_slope=2.0,
    )
    base.update(overrides)
    return SwitchingConfig(**base)


# -- scaling stage -------------------------------------------------------------

def test_alpha1_zero_map():
    assert alpha1(3.7, (0.0, 0.0), (0.0, 0.0), 17) == (0.0, 0.0)


def test_alpha1_identical_parameterization():
    coeffs = (1.5, 0.3, 0.2)
    x, y = alpha1(2.0, coeffs, coeffs, 17)
    assert x == y


def test_alpha1_atan_closed_form():
    x, _ = alpha1(1.0, (4.0, 1.0), (0.0, 0.0), 17)
    assert x == pytest.approx(math.pi, abs=1e-12)


def test_alpha1_output_interval():
    for y in (-1e4, -123.4, -1.0, 0.0, 0.3, 99.9, 1e4):
        gx, gy = alpha1(y, (4.0, 1.0, 3.0, 2.4), (2.5, 0.7, 1.7, 3.1), 17)
        assert 0.0 <= gx < 17.0
        assert 0.0 <= gy < 17.0


def test_alpha1_tiny_negative_stays_in_interval():
    # float modulo folds -1e-20 % 17 onto 17.0; the map must return 0.0 instead
    gx, _ = alpha1(-1e-22, (0.0, 0.0, 1.0), (0.0, 0.0), 17)
    assert 0.0 <= gx < 17.0


def test_alpha1_rejects_non_finite():
    with pytest.raises(InputError):
        alpha1(math.nan, (1.0, 1.0), (1.0, 1.0), 17)
    with pytest.raises(InputError):
        alpha1(math.inf, (1.0, 1.0), (1.0, 1.0), 17)


def test_alpha1_rejects_overflowing_polynomial():
    with pytest.raises(InputError):
        alpha1(1e200, (0.0, 0.0, 1.0, 1.0), (0.0, 0.0), 17)


# -- projection stage ----------------------------------------------------------

def test_alpha2_examples(desk_curve):
    assert alpha2((5.2, 1.3), desk_curve) == Point(5, 1)
    assert alpha2((6.0, 3.0), desk_curve) == Point(6, 3)
    assert alpha2((0.0, 8.5), desk_curve) == Point(0, 6)  # tie rule


# -- feature map ---------------------------------------------------------------

def test_eta1_zero_rows():
    assert eta1(Point(6, 3), ((0.0, 0.0), (0.0, 0.0))) == (0.0, 0.0)


def test_eta1_norm_row():
    (value,) = eta1(Point(6, 3), ((0.0, 1.0),))
    assert value == pytest.approx(math.sqrt(45), abs=1e-12)


def test_eta1_rejects_identity():
    from ecwatermark import INFINITY

    with pytest.raises(ValueError):
        eta1(INFINITY, ((0.0, 1.0),))


@given(st.lists(st.floats(min_value=-3, max_value=3), min_size=2, max_size=4))
def test_eta1_distinct_rows_generically_distinct(row):
    # a row and a shifted copy disagree unless the draw is degenerate
    other = [c + 1.0 for c in row]
    a, b = eta1(Point(6, 3), (tuple(row), tuple(other)))
    assert a != b


# -- clamping stage --------------------------------------------------------------

def test_eta2_worked_example():
    theta = eta2((2.0, 3.0, 4.0), floor=0.1, slope=1.0, margin=0.1)
    assert theta.taps[0] == 2.0
    assert theta.taps[1] == pytest.approx(0.75, abs=1e-15)
    assert theta.taps[2] == pytest.approx(0.3, abs=1e-12)
    assert validate_theta(theta).ok


def test_eta2_passthrough_when_tail_zero():
    assert eta2((1.0, 0.0, 0.0), floor=0.1, slope=1.0, margin=0.1).taps == (1.0, 0.0, 0.0)


def test_eta2_floor_rule():
    assert eta2((0.0, 5.0, 1.0), floor=0.1, slope=1.0, margin=0.1).b0 == 0.1
    assert eta2((-0.01, 5.0, 1.0), floor=0.1, slope=1.0, margin=0.1).b0 == -0.1


def test_eta2_tail_radius_is_exact_margin():
    theta = eta2((1.4, -2.0, 3.0, -0.5), floor=1.0, slope=1.0, margin=0.1)
    total = sum(abs(v / theta.b0) for v in theta.taps[2:])
    # |b1| = 2/3 leaves headroom 1/3 > margin, so the margin applies unclamped
    expected = 1.0 - abs(theta.taps[1]) - 0.1
    assert total == pytest.approx(expected, rel=1e-12)


def test_eta2_margin_clamped_when_headroom_small():
    # |b1| -> 0.999..., leaving less headroom than the configured margin
    theta = eta2((1.0, 1e6, 1.0), floor=1.0, slope=1.0, margin=0.5)
    assert validate_theta(theta).ok


@given(
    st.lists(finite_floats, min_size=2, max_size=7),
    st.floats(min_value=1.0, max_value=3.0),
    st.floats(min_value=0.05, max_value=5.0),
    st.floats(min_value=0.001, max_value=0.9),
)
def test_eta2_total_into_admissible_set(b_raw, floor, slope, margin):
    theta = eta2(b_raw, floor=floor, slope=slope, margin=margin)
    assert validate_theta(theta).ok


# -- admissibility test ----------------------------------------------------------

def test_validate_theta_accepts_example():
    assert validate_theta((1.0, 0.5, 0.2)).ok


def test_validate_theta_names_first_violation():
    r = validate_theta((0.0, 0.5, 0.2))
    assert not r.ok and "b0" in r.violation
    r = validate_theta((1.0, 1.5, 0.2))
    assert not r.ok and "b1" in r.violation
    r = validate_theta((1.0, 0.5, 0.6))
    assert not r.ok and "1 - |b1|" in r.violation


def test_validate_theta_needs_two_taps():
    with pytest.raises(ValueError):
        validate_theta((1.0,))


def test_firparams_carrier():
    theta = FirParams((2.0, 0.75, 0.3))
    assert theta.b0 == 2.0
    assert theta.order == 2
    assert list(theta) == [2.0, 0.75, 0.3]
    with pytest.raises(ValueError):
        FirParams((math.nan, 1.0))


# -- full switching map ------------------------------------------------------------

def test_sigma_scalar_identity_matches_chain(demo_cfg):
    cfg1 = make_config(l=1)
    y = 3.21
    scaled = alpha1(y, cfg1.alpha_x, cfg1.alpha_y, 17)
    p = alpha2(scaled, cfg1.curve)
    expected = eta2(eta1(p, cfg1.eta1_rows), floor=1.0, slope=2.0, margin=0.05)
    assert sigma(y, cfg1) == expected


def test_sigma_chained_example():
    # alpha lands on (5, 1); l = 2 doubles it to (6, 3)
    cfg = make_config(l=2, alpha_x=(0.0, 0.0, 5.2), alpha_y=(0.0, 0.0, 1.3))
    detail = sigma_detail(1.0, cfg)
    assert detail.generator_point == Point(5, 1)
    assert detail.secret_multiple == Point(6, 3)
    assert not detail.fallback_used
    assert detail.theta == eta2(
        eta1(Point(6, 3), cfg.eta1_rows), floor=1.0, slope=2.0, margin=0.05
    )


def test_sigma_fallback_on_degenerate_scalar():
    with pytest.warns(ConfigurationWarning):
        cfg = make_config(l=19)
    detail = sigma_detail(4.2, cfg)
    assert detail.fallback_used
    assert detail.secret_multiple == detail.generator_point
    assert detail.theta == eta2(
        eta1(detail.generator_point, cfg.eta1_rows),
        floor=1.0, slope=2.0, margin=0.05,
    )


def test_fallback_never_evaluates_identity():
    with pytest.warns(ConfigurationWarning):
        cfg = make_config(l=38)  # 2 * group order
    for y in (-5.0, 0.0, 1.7, 44.0):
        assert not sigma_detail(y, cfg).secret_multiple.is_infinity


def test_sigma_periodic_in_scalar(demo_cfg):
    cfg_a = make_config(l=7)
    cfg_b = make_config(l=7 + 19)
    for y in (0.0, 1.0, 9.7, 10.2, 100.0):
        assert sigma(y, cfg_a) == sigma(y, cfg_b)


def test_sigma_deterministic_across_instances():
    text = make_config().to_json()
    cfg_a = SwitchingConfig.from_json(text)
    cfg_b = SwitchingConfig.from_json(text)
    for y in [x * 0.37 for x in range(-50, 50)]:
        assert sigma(y, cfg_a).taps == sigma(y, cfg_b).taps


def test_sigma_range_bounded_by_affine_points(demo_cfg):
    reachable = {
        eta2(eta1(s_pt, demo_cfg.eta1_rows),
             floor=demo_cfg.eta_floor, slope=demo_cfg.eta_slope,
             margin=demo_cfg.eta_margin).taps
        for s_pt in demo_cfg.curve.affine_points()
    }
    assert len(reachable) <= 18
    seen = {sigma(y * 0.11, demo_cfg).taps for y in range(2000)}
    assert seen <= reachable


@given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
def test_sigma_totality(y):
    cfg = make_config()
    assert validate_theta(sigma(y, cfg)).ok


# -- configuration -----------------------------------------------------------------

def test_config_round_trip():
    cfg = make_config()
    clone = SwitchingConfig.from_json(cfg.to_json())
    assert clone.to_dict() == cfg.to_dict()


def test_config_missing_field_reports_path():
    with pytest.raises(ConfigError) as err:
        SwitchingConfig.from_dict({"curve": {"s": 17, "a": 2, "b": 2}, "l": 7})
    assert "alpha" in str(err.value)


def test_config_bad_row_count():
    with pytest.raises(ConfigError) as err:
        make_config(eta1_rows=((0.0, 1.0),), n_h=2)
    assert "eta1" in str(err.value)


def test_config_rejects_bad_margin():
    with pytest.raises(ConfigError):
        make_config(eta_margin=1.5)


def test_config_rejects_bad_scalar():
    with pytest.raises(ConfigError):
        make_config(l=0)


def test_config_warns_on_weak_floor():
    with pytest.warns(ConfigurationWarning, match="floor"):
        make_config(eta_floor=0.1)


def test_config_warns_on_degenerate_scalar():
    with pytest.warns(ConfigurationWarning, match="scalar"):
        make_config(l=19)


def test_config_defaults_are_quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        make_config()


def test_config_file_round_trip(tmp_path):
    cfg = make_config()
    path = tmp_path / "cfg.json"
    cfg.save(path)
    assert SwitchingConfig.load(path).to_dict() == cfg.to_dict()


def test_config_invalid_json_reports_path(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{nope")
    with pytest.raises(ConfigError):
        SwitchingConfig.load(path)


def test_eta2_subnormal_tail_is_normalized():
    # ratio-first evaluation: the scale factor alone would overflow here
    theta = eta2((0.0, 0.0, 2.2250738585072e-309), floor=1.0, slope=1.0, margin=0.5)
    assert theta.taps == (1.0, 0.0, 0.5)
    assert validate_theta(theta).ok


def test_eta2_underflowing_tail_collapses_to_zero():
    theta = eta2((1e308, 0.0, 5e-324), floor=1.0, slope=1.0, margin=0.1)
    assert theta.taps == (1e308, 0.0, 0.0)
    assert validate_theta(theta).ok


def test_eta2_rejects_non_finite_raw_taps():
    with pytest.raises(ValueError):
        eta2((math.inf, 0.0), floor=1.0, slope=1.0, margin=0.1)


def test_eta2_squash_capped_below_one():
    theta = eta2((1.0, 1e200, 0.5), floor=1.0, slope=1.0, margin=0.1)
    assert abs(theta.taps[1]) < 1.0
    assert validate_theta(theta).ok
