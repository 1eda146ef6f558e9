from fractions import Fraction

import mpmath
import pytest
from hypothesis import HealthCheck, settings

from equidist.exactnum import Basis, IrrationalGenerator

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def mp_to_fraction(x) -> Fraction:
    """Exact Fraction of an mpmath number (the stored mantissa is unsigned)."""
    sign, man, exp, _ = mpmath.mpf(x)._mpf_
    v = Fraction(int(man)) * (Fraction(2) ** int(exp))
    return -v if sign else v


def frac_mp(x):
    return x - mpmath.floor(x)


def torus_gap(a: Fraction, b: Fraction) -> Fraction:
    d = (a - b) % 1
    return min(d, 1 - d)


@pytest.fixture(autouse=True)
def _restore_mp_precision():
    # tests that raise mpmath precision must not leak it into later modules
    prec = mpmath.mp.prec
    yield
    mpmath.mp.prec = prec


@pytest.fixture
def basis():
    return Basis([
        IrrationalGenerator("s2", "sqrt", radicand=2),
        IrrationalGenerator("s3", "sqrt", radicand=3),
        IrrationalGenerator("s5", "sqrt", radicand=5),
        IrrationalGenerator("pi", "pi"),
        IrrationalGenerator("pi2", "pi", power=2),
    ])
