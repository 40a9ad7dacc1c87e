import io
import logging
import math

import numpy as np
import pytest

from noetherlab import catalog, flow
from noetherlab.errors import ConfigurationError, DomainError
from noetherlab.flow import Trajectory, action_integral, bump_profile, conservation_drift, \
                            flow_symmetry, image_curve, integrate_characteristic, \
                            permutation_check, stationarity_probe
from noetherlab.geometry import PhasePoint, SystemSpec
from noetherlab.noether import DerivedSymmetry, ExplicitSymmetry, translation


def momentum_direction(n):
    return np.concatenate((np.zeros(n + 1), np.ones(n)))


def test_free_motion_is_exact(free1d):
    traj = integrate_characteristic(free1d, PhasePoint(0, (0,), (2,)), duration=1.0, step=0.25)
    assert len(traj) == 5
    assert traj.final.q[0] == pytest.approx(2.0, abs=1e-15)
    assert traj.final.p[0] == 2.0
    assert traj.times.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_step_is_shrunk_to_fit_the_duration(free1d, caplog):
    caplog.set_level(logging.DEBUG, logger='noetherlab.flow')
    traj = integrate_characteristic(free1d, PhasePoint(0, (0,), (1,)), duration=1.0, step=0.3)
    assert traj.step == 0.25
    assert traj.times[-1] == 1.0
    assert "shrunk" in caplog.text


def test_times_start_at_the_initial_time(free1d):
    traj = integrate_characteristic(free1d, PhasePoint(10, (0,), (1,)), duration=0.5, step=0.1)
    assert traj.initial.t == 10.0
    assert traj.times[3] == 10 + 0.1 * 3


def test_oscillator_returns_after_a_period(harmonic):
    traj = integrate_characteristic(harmonic, PhasePoint(0, (1,), (0,)), duration=2 * math.pi, step=0.01)
    assert abs(traj.final.q[0] - 1.0) <= 1e-8
    assert abs(traj.final.p[0]) <= 1e-8
    assert traj.generator == 'characteristic'


def test_circular_kepler_orbit_returns_after_a_period(kepler, x_star):
    traj = integrate_characteristic(kepler, x_star, duration=2 * math.pi, step=0.01)
    assert np.max(np.abs(traj.final.vector[1:] - x_star.vector[1:])) <= 1e-7


def test_integration_is_4th_order(harmonic):
    x0 = PhasePoint(0, (1,), (0,))
    errors = []
    for step in [0.1, 0.05]:
        traj = integrate_characteristic(harmonic, x0, duration=2.0, step=step)
        errors.append(abs(traj.final.q[0] - math.cos(2.0)) + abs(traj.final.p[0] + math.sin(2.0)))
    assert 12 <= errors[0] / errors[1] <= 20


def test_integration_is_deterministic(kepler, x_star):
    a = integrate_characteristic(kepler, x_star, duration=1.0, step=0.01)
    b = integrate_characteristic(kepler, x_star, duration=1.0, step=0.01)
    assert np.array_equal(a.states, b.states)


@pytest.mark.parametrize('duration, step', [(1.0, 0.0), (1.0, -0.1), (0.0, 0.1), (-1.0, 0.1), (math.inf, 0.1)])
def test_invalid_grids(free1d, duration, step):
    with pytest.raises(ConfigurationError):
        integrate_characteristic(free1d, PhasePoint(0, (0,), (1,)), duration=duration, step=step)


def test_mismatching_initial_point(free1d, x_star):
    with pytest.raises(ConfigurationError):
        integrate_characteristic(free1d, x_star, duration=1.0, step=0.1)


def test_domain_errors_report_the_step():
    spec = SystemSpec.from_texts(1, 'p1^2/2 + log(q1)')
    with pytest.raises(DomainError) as err:
        integrate_characteristic(spec, PhasePoint(0, (0.5,), (-1,)), duration=2.0, step=0.1)
    assert err.value.index is not None
    assert 1 <= err.value.index < 20


def test_energy_is_conserved(harmonic):
    traj = integrate_characteristic(harmonic, PhasePoint(0, (1,), (0,)), duration=2 * math.pi, step=0.01)
    assert conservation_drift(harmonic.integrals['H'], traj) <= 1e-9


@pytest.mark.parametrize('x0', [
    PhasePoint(0, (1, 0), (0, 1)),
    PhasePoint(0, (1, 0), (0, 1.2)),
    PhasePoint(0.3, (0.8, -0.6), (0.2, 1.1)),
])
def test_kepler_integrals_are_conserved(kepler, x0):
    traj = integrate_characteristic(kepler, x0, duration=1.0, step=1e-3)
    for expr in kepler.integrals.values():
        assert conservation_drift(expr, traj, kepler.params) <= 1e-10


@pytest.mark.parametrize('name', catalog.names())
def test_symmetry_flows_conserve_their_integrals(name):
    entry = catalog.builtin(name)
    spec = entry.spec
    for x in entry.sample(5, rho_min=1.0):
        for expr in spec.integrals.values():
            traj = flow_symmetry(spec, DerivedSymmetry(expr), x, s=0.01, step=1e-3)
            assert conservation_drift(expr, traj, spec.params) <= 1e-9


def test_non_integral_drifts(harmonic):
    traj = integrate_characteristic(harmonic, PhasePoint(0, (1,), (0,)), duration=1.0, step=0.01)
    assert conservation_drift(lambda x: x.q[0], traj) == pytest.approx(1 - math.cos(1.0), abs=1e-8)


def test_drift_reports_the_failing_sample(free1d):
    traj = integrate_characteristic(free1d, PhasePoint(0, (1,), (-1,)), duration=2.0, step=0.5)
    with pytest.raises(DomainError) as err:
        conservation_drift(free1d.parse('log(q1)'), traj)
    assert err.value.index == 2


def test_action_of_free_motion(free1d):
    traj = integrate_characteristic(free1d, PhasePoint(0, (0,), (2,)), duration=1.0, step=0.1)
    assert action_integral(free1d, traj) == pytest.approx(2.0, abs=1e-12)


def test_action_of_oscillator_over_a_period(harmonic):
    traj = integrate_characteristic(harmonic, PhasePoint(0, (1,), (0,)), duration=2 * math.pi, step=0.01)
    assert abs(action_integral(harmonic, traj)) <= 1e-4


def test_action_includes_the_perturbation():
    spec = SystemSpec.from_texts(1, 'p1^2/2', beta={'dt': 0.5})
    traj = integrate_characteristic(spec, PhasePoint(0, (0,), (2,)), duration=1.0, step=0.1)
    assert action_integral(spec, traj) == pytest.approx(2.5, abs=1e-12)


def test_translation_flow(free2d, x_star):
    traj = flow_symmetry(free2d, translation(free2d, 1), x_star, s=2.0, step=0.5)
    assert traj.final.q == pytest.approx((3.0, 0.0), abs=1e-14)
    assert traj.final.p == x_star.p
    assert traj.generator == 'symmetry(explicit)'


def test_backward_flow(free2d, x_star):
    traj = flow_symmetry(free2d, translation(free2d, 1), x_star, s=-1.0, step=0.25)
    assert traj.step == -0.25
    assert traj.final.q == pytest.approx((0.0, 0.0), abs=1e-14)


def test_rotation_flow(kepler, x_star):
    rotation = DerivedSymmetry(kepler.integrals['L'])
    traj = flow_symmetry(kepler, rotation, x_star, s=math.pi / 2, step=0.01)
    assert np.max(np.abs(traj.final.vector - [0, 0, 1, -1, 0])) <= 1e-8
    assert traj.generator == 'symmetry(derived)'


def test_image_curve_with_zero_parameter(kepler, x_star):
    traj = integrate_characteristic(kepler, x_star, duration=0.5, step=0.1)
    image = image_curve(kepler, DerivedSymmetry(kepler.integrals['L']), traj, 0.0)
    assert np.array_equal(image.states, traj.states)


def test_symmetries_permute_characteristic_curves(kepler):
    traj = integrate_characteristic(kepler, PhasePoint(0, (1, 0), (0, 1.2)), duration=1.0, step=0.02)
    for name in ['L', 'A1']:
        symmetry = DerivedSymmetry(kepler.integrals[name])
        assert permutation_check(kepler, symmetry, traj, s=0.1) <= 1e-5


def test_non_symmetries_do_not_permute_characteristic_curves(free2d):
    shear = ExplicitSymmetry.from_texts(free2d, '0', ['0', 'q1'], ['0', '0'])
    traj = integrate_characteristic(free2d, PhasePoint(0, (0, 0), (1, 1)), duration=1.0, step=0.1)
    assert permutation_check(free2d, shear, traj, s=1.0) == pytest.approx(0.5, abs=1e-9)


def test_translations_do_not_permute_oscillations(harmonic):
    traj = integrate_characteristic(harmonic, PhasePoint(0, (1,), (0,)), duration=1.0, step=0.01)
    assert permutation_check(harmonic, translation(harmonic, 1), traj, s=0.1) >= 1e-2


def test_permutation_check_needs_five_samples(free1d):
    traj = integrate_characteristic(free1d, PhasePoint(0, (0,), (1,)), duration=1.0, step=0.5)
    with pytest.raises(ConfigurationError):
        permutation_check(free1d, translation(free1d, 1), traj, s=1.0)


def test_bump_profile_vanishes_at_the_ends(harmonic):
    traj = integrate_characteristic(harmonic, PhasePoint(0, (1,), (0,)), duration=1.0, step=0.1)
    profile = bump_profile(traj, momentum_direction(1))
    assert profile.shape == traj.states.shape
    assert not profile[0].any()
    assert not profile[-1].any()
    assert profile[5].tolist() == [0.0, 0.0, 1.0]


def test_bump_profile_of_a_wrong_direction(harmonic):
    traj = integrate_characteristic(harmonic, PhasePoint(0, (1,), (0,)), duration=1.0, step=0.1)
    with pytest.raises(ConfigurationError):
        bump_profile(traj, [0, 1])


def test_characteristic_curves_are_stationary(kepler, x_star):
    traj = integrate_characteristic(kepler, x_star, duration=1.0, step=1e-3)
    profile = bump_profile(traj, momentum_direction(2))
    result = stationarity_probe(kepler, traj, profile, [-1e-2, -1e-3, 0.0, 1e-3, 1e-2])
    assert len(result.pairs) == 5
    assert abs(result.slope) <= 1e-6
    assert result.curvature < 0


def test_oscillator_curves_are_stationary(harmonic):
    traj = integrate_characteristic(harmonic, PhasePoint(0, (1,), (0,)), duration=1.0, step=1e-3)
    profile = bump_profile(traj, momentum_direction(1))
    result = stationarity_probe(harmonic, traj, profile, [-1e-2, -1e-3, 0.0, 1e-3, 1e-2])
    assert abs(result.slope) <= 1e-6


def test_other_curves_are_not_stationary(harmonic):
    times = np.linspace(0.0, 1.0, 101)
    states = np.column_stack((times, np.zeros_like(times), np.ones_like(times)))
    curve = Trajectory.from_states(states, 0.01)
    profile = bump_profile(curve, momentum_direction(1))
    result = stationarity_probe(harmonic, curve, profile, [-1e-3, 0.0, 1e-3])
    assert result.slope == pytest.approx(-2 / math.pi, rel=1e-3)


def test_probe_rejects_moving_ends(harmonic):
    traj = integrate_characteristic(harmonic, PhasePoint(0, (1,), (0,)), duration=1.0, step=0.1)
    profile = np.ones_like(traj.states)
    with pytest.raises(ConfigurationError):
        stationarity_probe(harmonic, traj, profile, [-1e-3, 0.0, 1e-3])


def test_probe_accepts_horizontal_ends(harmonic):
    traj = integrate_characteristic(harmonic, PhasePoint(0, (1,), (0,)), duration=1.0, step=0.1)
    profile = np.tile(momentum_direction(1), (len(traj), 1))
    result = stationarity_probe(harmonic, traj, profile, [-1e-3, 0.0, 1e-3])
    assert len(result.pairs) == 3


def test_probe_needs_three_amplitudes(harmonic):
    traj = integrate_characteristic(harmonic, PhasePoint(0, (1,), (0,)), duration=1.0, step=0.1)
    profile = bump_profile(traj, momentum_direction(1))
    with pytest.raises(ConfigurationError):
        stationarity_probe(harmonic, traj, profile, [0.0, 1e-3, 1e-3])


def test_trajectory_needs_two_samples():
    with pytest.raises(ConfigurationError):
        Trajectory.from_states([[0, 1, 0]], 0.1)


def test_trajectory_is_read_only(free1d):
    traj = integrate_characteristic(free1d, PhasePoint(0, (0,), (1,)), duration=1.0, step=0.5)
    with pytest.raises(ValueError):
        traj.states[0, 0] = 1.0


def test_csv_output(free1d):
    traj = integrate_characteristic(free1d, PhasePoint(0, (0,), (1,)), duration=0.2, step=0.1)
    stream = io.StringIO()
    traj.to_csv(stream)
    lines = stream.getvalue().splitlines()
    assert lines[0] == 't,q1,p1'
    assert lines[1] == '0,0,1'
    t, q, p = lines[2].split(',')
    assert t == '0.10000000000000001'
    assert float(q) == pytest.approx(0.1, rel=1e-15)
    assert p == '1'
    assert len(lines) == 4


def test_symmetry_steps_constant():
    assert flow.SYMMETRY_STEPS == 16
