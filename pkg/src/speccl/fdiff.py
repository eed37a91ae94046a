"""Minimal forward-mode differentiation with nestable coefficients.

A :class:`Jet` carries a value and its partials with respect to a fixed set
of independent variables.  Both the value and the partials may themselves be
Jets, which yields exact higher-order derivatives by nesting; the
backstepping recursion relies on this to differentiate through virtual
controls that already contain derivatives of earlier ones.

Only the operations the control formulas need are implemented: +, -, *,
integer powers, and sin/cos through the dispatching helpers below.
"""

from __future__ import annotations

import math

__all__ = ["Jet", "lift", "value", "sin", "cos"]


class Jet:
    __slots__ = ("val", "grad")

    def __init__(self, val, grad):
        self.val = val
        self.grad = tuple(grad)

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.val + other.val,
                       tuple(a + b for a, b in zip(self.grad, other.grad)))
        return Jet(self.val + other, self.grad)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, tuple(-g for g in self.grad))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(
                self.val * other.val,
                tuple(self.val * gb + other.val * ga
                      for ga, gb in zip(self.grad, other.grad)),
            )
        return Jet(self.val * other, tuple(g * other for g in self.grad))

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("Jet powers must be non-negative integers")
        out = 1.0
        for _ in range(k):
            out = out * self
        return out

    def __repr__(self):
        return f"Jet({self.val!r}, {self.grad!r})"


def lift(values):
    """Promote a flat sequence to Jets, one unit direction per entry.

    The entries may themselves be Jets; the result is then one nesting level
    deeper and its partials are exact to all represented orders.
    """
    m = len(values)
    out = []
    for i, v in enumerate(values):
        grad = [0.0] * m
        grad[i] = 1.0
        out.append(Jet(v, grad))
    return out


def value(x):
    """Strip all Jet layers from a scalar."""
    while isinstance(x, Jet):
        x = x.val
    return x


def sin(x):
    if isinstance(x, Jet):
        c = cos(x.val)
        return Jet(sin(x.val), tuple(c * g for g in x.grad))
    return math.sin(x)


def cos(x):
    if isinstance(x, Jet):
        s = sin(x.val)
        return Jet(cos(x.val), tuple(-1.0 * s * g for g in x.grad))
    return math.cos(x)
