import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rackcasimir.special import EULER_GAMMA, bessel_k, i0, k0_fast, k0_regular, k012_fast

# mpmath besselk at 25 digits
REFERENCE = [
    (1e-6, 13.931442073626419, 999999.99999278432, 1999999999999.5002),
    (1e-3, 7.0236888005623813, 999.99623815608555, 1999999.5000009716),
    (0.5, 0.92441907122766586, 1.6564411200033009, 7.5501835512408694),
    (1.0, 0.42102443824070833, 0.60190723019723457, 1.6248388986351775),
    (2.0, 0.11389387274953344, 0.13986588181652243, 0.25375975456605586),
    (2.5, 0.062347553200366186, 0.073890816347747064, 0.12146020627856384),
    (10.0, 1.7780062316167652e-5, 1.8648773453825585e-5, 2.1509817006932769e-5),
    (50.0, 3.4101677497894955e-23, 3.4441022267175556e-23, 3.5479318388581977e-23),
    (300.0, 3.7236948548891433e-132, 3.7298958583323727e-132, 3.7485608272780257e-132),
    (700.0, 4.6697764316853769e-306, 4.6731107967079661e-306, 4.6831281768188282e-306),
]


@pytest.mark.parametrize("x,k0,k1,k2", REFERENCE)
def test_bessel_k_matches_reference(x, k0, k1, k2):
    for order, ref in enumerate((k0, k1, k2)):
        assert bessel_k(order, x) == pytest.approx(ref, rel=1e-10)


def test_unit_argument_values():
    assert bessel_k(0, 1.0) == pytest.approx(0.4210244382, abs=1e-9)
    assert bessel_k(1, 1.0) == pytest.approx(0.6019072302, abs=1e-9)


def test_small_argument_asymptotics():
    x = 1e-4
    assert bessel_k(0, x) == pytest.approx(-math.log(x / 2) - EULER_GAMMA, abs=1e-6)


def test_underflow_to_zero():
    assert bessel_k(0, 800.0) == 0.0
    assert bessel_k(1, 1e4) == 0.0


@pytest.mark.parametrize("x", [0.0, -1.0, np.nan])
def test_domain_error(x):
    with pytest.raises(ValueError):
        bessel_k(0, x)


def test_bad_order():
    with pytest.raises(ValueError):
        bessel_k(3, 1.0)


def test_array_input_shape():
    x = np.linspace(0.1, 5, 12).reshape(3, 4)
    assert bessel_k(1, x).shape == (3, 4)


@given(st.floats(1e-6, 700.0))
def test_against_scipy(x):
    from scipy.special import kv

    for order in (0, 1, 2):
        assert bessel_k(order, x) == pytest.approx(kv(order, x), rel=1e-10)


@given(st.floats(1e-3, 650.0))
def test_fast_variants_agree(x):
    k0, k1, k2 = k012_fast(x)
    assert k0_fast(x) == pytest.approx(bessel_k(0, x), rel=1e-12)
    assert k1 == pytest.approx(bessel_k(1, x), rel=1e-12)
    assert k2 == pytest.approx(bessel_k(2, x), rel=1e-12)


@given(st.floats(0.01, 20.0))
def test_recurrence_and_wronskian(x):
    from scipy.special import iv

    k0, k1, k2 = (bessel_k(n, x) for n in range(3))
    assert k2 == pytest.approx(k0 + 2 * k1 / x, rel=1e-13)
    # I0 K1 + I1 K0 = 1/x
    assert iv(0, x) * k1 + iv(1, x) * k0 == pytest.approx(1 / x, rel=1e-9)


@given(st.floats(1e-8, 6.0))
def test_singular_split(x):
    assert -math.log(x / 2) * i0(x) + k0_regular(x) == pytest.approx(bessel_k(0, x), rel=1e-12)


def test_regular_part_at_zero():
    assert k0_regular(0.0) == pytest.approx(-EULER_GAMMA, rel=1e-15)
