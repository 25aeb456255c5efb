import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ecwatermark import (
    FirParams,
    InputError,
    ParameterError,
    PeriodicTrigger,
    SwitchProtocol,
    ThresholdTrigger,
    apply_switch,
    check_stability,
    eta2,
    generator_matrices,
    make_pair,
    remover_matrices,
    validate_theta,
)

finite_floats = st.floats(min_value=-50, max_value=50, allow_nan=False)


# -- realizations ------------------------------------------------------------

def test_generator_matrices_shape_and_content():
    A, B, C, D = generator_matrices((2.0, 0.75, 0.3))
    assert A.tolist() == [[0.0, 0.0], [1.0, 0.0]]
    assert B.tolist() == [[1.0], [0.0]]
    assert C.tolist() == [[0.75, 0.3]]
    assert D.tolist() == [[2.0]]


def test_generator_poles_all_at_origin():
    A, _, _, _ = generator_matrices((2.0, 0.75, 0.3, -0.1))
    assert np.abs(np.linalg.eigvals(A)).max() < 1e-12


def test_remover_matrices_are_standard_inverse():
    taps = (2.0, 0.75, 0.3)
    A, B, C, D = generator_matrices(taps)
    Aq, Bq, Cq, Dq = remover_matrices(taps)
    assert Dq[0, 0] == 0.5
    assert np.allclose(Aq, A - B @ C / taps[0])
    assert np.allclose(Bq, B / taps[0])
    assert np.allclose(Cq, -C / taps[0])


def test_remover_needs_nonzero_b0():
    with pytest.raises(ParameterError):
        remover_matrices((0.0, 0.5))


# -- stability reports ----------------------------------------------------------

def test_stability_pass_case():
    report = check_stability((1.0, 0.5, 0.2))
    assert report.gershgorin_pass
    assert report.spectral_radius < 1.0
    # complex pair with modulus sqrt(0.2)
    assert report.spectral_radius == pytest.approx(math.sqrt(0.2), abs=1e-12)


def test_stability_tap_test_fails_but_radius_below_one():
    report = check_stability((1.0, 0.95, 0.2))
    assert not report.gershgorin_pass  # 0.2 >= 1 - 0.95
    assert report.spectral_radius < 1.0


def test_stability_pure_gain():
    report = check_stability((1.0, 0.0, 0.0))
    assert report.gershgorin_pass
    assert report.spectral_radius == 0.0


def test_stability_zero_b0_reports_infinite_radius():
    report = check_stability((0.0, 0.5, 0.1))
    assert not report.gershgorin_pass
    assert math.isinf(report.spectral_radius)


def test_tap_conditions_alone_do_not_bound_radius():
    # passes the three tap conditions, yet the inverse is unstable; this is
    # why the sufficient test also requires |b0| >= 1
    taps = (0.1, 0.75, 0.015)
    assert validate_theta(taps).ok
    report = check_stability(taps)
    assert not report.gershgorin_pass
    assert report.spectral_radius > 1.0


@given(
    st.lists(finite_floats, min_size=2, max_size=7),
    st.floats(min_value=1.0, max_value=3.0),
    st.floats(min_value=0.1, max_value=5.0),
    st.floats(min_value=0.01, max_value=0.9),
)
def test_clamped_taps_always_stable(b_raw, floor, slope, margin):
    theta = eta2(b_raw, floor=floor, slope=slope, margin=margin)
    report = check_stability(theta)
    assert report.gershgorin_pass
    assert report.spectral_radius < 1.0


@given(st.lists(st.floats(min_value=-2, max_value=2), min_size=2, max_size=6))
def test_tap_test_implies_radius_below_one(taps):
    report = check_stability(taps)
    if report.gershgorin_pass:
        assert report.spectral_radius < 1.0


# -- unit construction and stepping ------------------------------------------------

def test_make_pair_rejects_inadmissible():
    with pytest.raises(ParameterError):
        make_pair((0.0, 0.5, 0.1))


def test_make_pair_example_dq():
    _, rem = make_pair((2.0, 0.75, 0.3))
    assert rem.matrices[3][0, 0] == 0.5


def test_identity_taps_pass_through():
    gen, rem = make_pair((1.0, 0.0, 0.0))
    for v in (0.0, 1.5, -2.25, 1e6):
        assert gen.step(v) == v
        assert rem.step(v) == v


def test_impulse_response():
    gen, _ = make_pair((1.0, 0.5, 0.2))
    outputs = [gen.step(v) for v in (1.0, 0.0, 0.0, 0.0, 0.0)]
    assert outputs == [1.0, 0.5, 0.2, 0.0, 0.0]


def test_generator_matches_convolution_oracle():
    rng = np.random.default_rng(3)
    taps = (1.3, 0.4, -0.2, 0.1)
    gen, _ = make_pair(taps)
    u = rng.normal(size=200)
    got = np.array([gen.step(float(v)) for v in u])
    expected = np.convolve(u, taps)[:200]
    assert np.abs(got - expected).max() < 1e-12


def test_step_rejects_non_finite():
    gen, _ = make_pair((1.0, 0.5, 0.2))
    with pytest.raises(InputError):
        gen.step(math.nan)


def test_roundtrip_inversion_white_noise():
    rng = np.random.default_rng(11)
    theta = eta2((2.0, 3.0, 4.0), floor=1.0, slope=1.0, margin=0.1)
    gen, rem = make_pair(theta)
    u = rng.normal(scale=5.0, size=1000)
    err = max(abs(rem.step(gen.step(float(v))) - float(v)) for v in u)
    assert err < 1e-9


def test_roundtrip_inversion_bulk():
    # broad draw over the clamp's output set, 200-step sequences each
    rng = np.random.default_rng(2026)
    worst = 0.0
    for _ in range(10_000):
        n_h = int(rng.integers(1, 5))
        theta = eta2(rng.uniform(-30, 30, n_h + 1),
                     floor=1.0, slope=1.0, margin=0.05)
        gen, rem = make_pair(theta)
        u = rng.normal(scale=10.0, size=200)
        err = max(abs(rem.step(gen.step(float(v))) - float(v)) for v in u)
        worst = max(worst, err)
    assert worst < 1e-9


# -- switching behavior ----------------------------------------------------------

def test_switch_to_same_taps_is_no_op():
    gen_a, _ = make_pair((1.5, 0.3, 0.4))
    gen_b, rem_b = make_pair((1.5, 0.3, 0.4))
    u = np.linspace(-2, 2, 120)
    out_a = []
    for i, v in enumerate(u):
        if i == 60:
            apply_switch(gen_b, rem_b, FirParams((1.5, 0.3, 0.4)))
        out_a.append((gen_a.step(float(v)), gen_b.step(float(v))))
    assert all(a == b for a, b in out_a)


def test_switch_keeps_pair_synchronized():
    rng = np.random.default_rng(8)
    theta_a = eta2((2.0, 1.0, 1.0), floor=1.0, slope=1.0, margin=0.1)
    theta_b = eta2((5.0, -4.0, 0.5), floor=1.0, slope=1.0, margin=0.1)
    gen, rem = make_pair(theta_a)
    worst = 0.0
    for k in range(200):
        if k == 50:
            apply_switch(gen, rem, theta_b)
        u = float(rng.normal(scale=3.0))
        worst = max(worst, abs(rem.step(gen.step(u)) - u))
    assert worst < 1e-9


def test_registers_stay_equal_across_switch():
    rng = np.random.default_rng(9)
    gen, rem = make_pair((2.0, 0.5, 0.3))
    for k in range(40):
        if k == 20:
            apply_switch(gen, rem, FirParams((3.0, -0.25, 0.1)))
        rem.step(gen.step(float(rng.normal())))
    assert np.allclose(gen.state, rem.state, atol=1e-12)


def test_switch_rejects_inadmissible_taps():
    gen, rem = make_pair((1.0, 0.5, 0.2))
    with pytest.raises(ParameterError):
        apply_switch(gen, rem, (1.0, 0.5, 0.6))


def test_switch_rejects_changed_tap_count():
    gen, rem = make_pair((1.0, 0.5, 0.2))
    with pytest.raises(ParameterError):
        apply_switch(gen, rem, (1.0, 0.5))


def test_mismatched_taps_break_reconstruction():
    # the detection mechanism: desynchronized taps amplify the error
    gen, _ = make_pair((2.0, 0.5, 0.3))
    _, rem = make_pair((6.0, -0.2, 0.1))
    errs = [abs(rem.step(gen.step(10.0)) - 10.0) for _ in range(50)]
    assert max(errs) > 1.0


# -- triggers ----------------------------------------------------------------------

def test_periodic_trigger_pattern():
    t = PeriodicTrigger(50)
    fired = [k for k in range(201) if t.fires(k, 0.0)]
    assert fired == [50, 100, 150, 200]


def test_periodic_trigger_rejects_bad_period():
    with pytest.raises(ValueError):
        PeriodicTrigger(0)


def test_threshold_trigger_is_open_half_line():
    t = ThresholdTrigger(1.0)
    assert not t.fires(3, 1.0)
    assert t.fires(3, 1.0 + 1e-12)
    assert not t.fires(3, 0.0)


def test_protocol_records_times():
    proto = SwitchProtocol(PeriodicTrigger(10))
    for k in range(35):
        proto.check(k, 0.0)
    assert proto.switch_times == [10, 20, 30]


def test_protocol_without_trigger_never_fires():
    proto = SwitchProtocol(None)
    assert not any(proto.check(k, 99.0) for k in range(5))
    assert proto.switch_times == []


def test_subnormal_leading_tap_handled():
    # passes the tap-domain conditions yet has no double-precision inverse
    taps = (5e-324, 0.0)
    assert validate_theta(taps).ok
    report = check_stability(taps)
    assert not report.gershgorin_pass
    assert math.isinf(report.spectral_radius)
    with pytest.raises(ParameterError):
        make_pair(taps)
