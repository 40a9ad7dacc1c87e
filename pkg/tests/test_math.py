import pytest

from noetherlab import math


def test_residual_math():
    residual = math.Residual(-0.5, 1.5)

    assert residual.absolute == 0.5
    assert residual.scale == 1.5
    assert residual.relative == 0.2
    assert float(residual) == 0.2
    assert str(residual) == '0.2'

    assert residual == 0.2
    assert residual != 0.3
    assert not residual != 0.2
    assert residual > 0.1
    assert residual < 0.3
    assert residual >= 0.2
    assert residual <= 0.2
    assert not residual < 0.2
    assert not residual > 0.2

    assert residual + 1 == 1.2
    assert residual * 2 == 0.4
    assert residual / 2 == 0.1
    assert residual - 0.2 == 0.0


def test_residuals_compare_among_themselves():
    small = math.Residual(1e-12)
    large = math.Residual(0.5, 1.0)
    assert small < large
    assert large == math.Residual(0.25)
    assert hash(large) == hash(0.25)


def test_unsupported_operands():
    residual = math.Residual(1.0)
    with pytest.raises(TypeError):
        residual + 'x'
    assert (residual == 'x') is False


def test_residual_within_tolerance():
    assert math.Residual(1e-10, 1.0).within(1e-10)
    assert not math.Residual(1e-9).within(1e-10)


def test_relative_sums_the_magnitudes_of_terms():
    residual = math.relative(0.3, -1.0, 2.0)
    assert residual.scale == 3.0
    assert residual.relative == pytest.approx(0.3 / 4)


def test_worst_picks_the_largest_relative_value():
    a = math.Residual(1.0, 99.0)   # 0.01
    b = math.Residual(0.5, 0.0)    # 0.5
    c = math.Residual(2.0, 9.0)    # 0.2
    assert math.worst([a, b, c]) is b


def test_worst_of_nothing_is_zero():
    assert math.worst([]) == 0
