import math

import pytest

from speccl.fdiff import Jet, cos, lift, sin, value


def test_first_order_polynomial():
    x, y = lift([2.0, 3.0])
    f = x * x * y + 4.0 * y - x
    assert f.val == pytest.approx(2.0 * 2.0 * 3.0 + 12.0 - 2.0)
    assert f.grad[0] == pytest.approx(2.0 * 2.0 * 3.0 - 1.0)  # 2xy - 1
    assert f.grad[1] == pytest.approx(2.0 * 2.0 + 4.0)        # x^2 + 4


def test_trig_derivatives():
    (x,) = lift([0.7])
    f = sin(x) * cos(x)
    assert f.val == pytest.approx(math.sin(0.7) * math.cos(0.7))
    assert f.grad[0] == pytest.approx(math.cos(1.4))  # d/dx sin x cos x = cos 2x


def test_nested_second_derivatives():
    # second derivatives via jets of jets: f = x^2 y + sin(x)
    x0, y0 = 1.3, -0.4
    outer = lift([x0, y0])
    inner = lift(outer)
    xi, yi = inner
    f = xi * xi * yi + sin(xi)
    # d2f/dx2 = 2y - sin(x), d2f/dxdy = 2x
    dfdx = f.grad[0]
    assert isinstance(dfdx, Jet)
    assert value(dfdx) == pytest.approx(2.0 * x0 * y0 + math.cos(x0))
    assert dfdx.grad[0] == pytest.approx(2.0 * y0 - math.sin(x0))
    assert dfdx.grad[1] == pytest.approx(2.0 * x0)


def test_powers_and_scalars():
    (x,) = lift([2.0])
    f = 3.0 - x ** 3
    assert f.val == pytest.approx(-5.0)
    assert f.grad[0] == pytest.approx(-12.0)
    with pytest.raises(ValueError):
        x ** -1
    with pytest.raises(ValueError):
        x ** 0.5
