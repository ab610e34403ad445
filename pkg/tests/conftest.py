"""Shared oracles and fixtures.

Oracle routes are deliberately independent of the library internals:
closed-form gamma-function values, scipy's QUADPACK wrappers, exact rational
arithmetic, and a Runge-Kutta continuation of the defining differential
equation.  Library results are checked against these, never against
themselves.
"""

import cmath
import math
import random

import pytest


SEED = 0x5157


@pytest.fixture
def rng():
    return random.Random(SEED)


def gamma_half_period(n: int) -> float:
    """Closed form for the fundamental half period: Gamma(1/n)^2 / (n Gamma(2/n)).

    This equals the integral of (1 - t^n)^(-(n-1)/n) over [0, 1].
    """
    return math.gamma(1.0 / n) ** 2 / (n * math.gamma(2.0 / n))


def gamma_full_period(n: int) -> float:
    return 2.0 * gamma_half_period(n)


def slit_integral_oracle(n: int) -> float:
    """Closed form for the integral of (t^n - 1)^(-(n-1)/n) over [1, inf).

    Substituting u = t^-n turns it into a Beta integral:
    (1/n) B(1/n, (n-2)/n)... reduced through the reflection formula this is
    (pi_n/4) * sec(pi/n) with pi_n the full period.
    """
    return 0.5 * gamma_half_period(n) / math.cos(math.pi / n)


def rk4_sine_continuation(n: int, z: complex, steps: int = 4000) -> complex:
    """Independent oracle: continue s' = z * (1 - s^n)^((n-1)/n) from 0.

    Integrates along the straight segment [0, z] with classical RK4 while
    tracking the branch of the power by committing the argument of 1 - s^n
    at every accepted node (nearest-branch unwrapping).  Purely local; no
    library quadrature or folding code involved.
    """
    beta = (n - 1) / n
    state = {"arg": 0.0}

    def unwrap(s: complex) -> float:
        w = 1.0 - s ** n
        if abs(w) < 1e-280:
            raise ZeroDivisionError("oracle hit a branch point")
        phi = cmath.phase(w)
        k = round((state["arg"] - phi) / (2.0 * math.pi))
        return phi + 2.0 * math.pi * k

    def rhs(s: complex) -> complex:
        theta = unwrap(s)
        return z * abs(1.0 - s ** n) ** beta * cmath.exp(1j * beta * theta)

    h = 1.0 / steps
    s = 0j
    for _ in range(steps):
        k1 = rhs(s)
        k2 = rhs(s + 0.5 * h * k1)
        k3 = rhs(s + 0.5 * h * k2)
        k4 = rhs(s + h * k3)
        s = s + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        state["arg"] = unwrap(s)
    return s


def rk4_pair_continuation(n: int, z: complex, steps: int = 12000):
    """Branch-free oracle for the sine/cosine pair.

    Integrates the polynomial system s' = z c^(n-1), c' = -z s^(n-1) with
    s(0) = 0, c(0) = 1 along the segment [0, z].  No fractional powers at
    all, so there is no branch to track; accuracy is limited only by the
    RK4 step count.  Returns (sine, cosine) at z.
    """

    def rhs(s: complex, c: complex):
        return z * c ** (n - 1), -z * s ** (n - 1)

    h = 1.0 / steps
    s, c = 0j, 1.0 + 0j
    for _ in range(steps):
        k1 = rhs(s, c)
        k2 = rhs(s + 0.5 * h * k1[0], c + 0.5 * h * k1[1])
        k3 = rhs(s + 0.5 * h * k2[0], c + 0.5 * h * k2[1])
        k4 = rhs(s + h * k3[0], c + h * k3[1])
        s += (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        c += (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return s, c
