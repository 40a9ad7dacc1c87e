import logging

import pytest

from noetherlab import sampling
from noetherlab.errors import ConfigurationError
from noetherlab.geometry import PhasePoint, SystemSpec, elementary_action
from noetherlab.sampling import parse_point, sample_points


def test_sampling_is_deterministic(kepler):
    assert sample_points(kepler, 10, seed=42) == sample_points(kepler, 10, seed=42)
    assert sample_points(kepler, 10, seed=42) != sample_points(kepler, 10, seed=43)


def test_default_seed(kepler):
    assert sample_points(kepler, 3) == sample_points(kepler, 3, seed=sampling.DEFAULT_SEED)


def test_sampling_nothing(kepler):
    assert sample_points(kepler, 0) == ()


def test_negative_count(kepler):
    with pytest.raises(ConfigurationError):
        sample_points(kepler, -1)


def test_points_stay_in_the_box(free1d):
    box = [(0.0, 1.0), (-3.0, -2.0), (5.0, 6.0)]
    for x in sample_points(free1d, 50, box=box):
        assert 0 <= x.t <= 1
        assert -3 <= x.q[0] <= -2
        assert 5 <= x.p[0] <= 6


def test_one_interval_for_all_coordinates(free2d):
    for x in sample_points(free2d, 50, box=(-0.5, 0.5)):
        assert all(-0.5 <= value <= 0.5 for value in x.vector)


@pytest.mark.parametrize('box', [[(0.0, 1.0)] * 2, (1.0, 0.0)])
def test_invalid_boxes(free1d, box):
    with pytest.raises(ConfigurationError):
        sample_points(free1d, 1, box=box)


def test_guard_is_respected(free1d):
    for x in sample_points(free1d, 50, guard=lambda x: x.q[0] > 0):
        assert x.q[0] > 0


def test_undefined_points_are_rejected():
    spec = SystemSpec.from_texts(1, 'p1^2/2 + log(q1)')
    for x in sample_points(spec, 50):
        assert x.q[0] > 0


def test_degenerate_points_are_rejected(harmonic):
    for x in sample_points(harmonic, 50, rho_min=0.5):
        assert abs(elementary_action(harmonic, x)) > 0.5


def test_exhausted_tries(free1d):
    with pytest.raises(ConfigurationError):
        sample_points(free1d, 1, guard=lambda x: False, max_tries=10)


def test_many_retries_are_warned(free1d, caplog):
    calls = []

    def every_50th(x):
        calls.append(x)
        return len(calls) % 50 == 0

    with caplog.at_level(logging.WARNING, logger='noetherlab.sampling'):
        points = sample_points(free1d, 3, guard=every_50th)
    assert len(points) == 3
    assert "retries" in caplog.text


@pytest.mark.parametrize('text, n, expected', [
    ('0,1,0,0,1', 2, PhasePoint(0, (1, 0), (0, 1))),
    (' 0.5, -1e-3, 2 ', 1, PhasePoint(0.5, (-1e-3,), (2,))),
])
def test_parse_point(text, n, expected):
    assert parse_point(text, n) == expected


@pytest.mark.parametrize('text, n', [('0,1,0', 2), ('0,a,1', 1), ('', 1)])
def test_malformed_points(text, n):
    with pytest.raises(ConfigurationError):
        parse_point(text, n)
