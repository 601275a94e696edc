import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxcorr.seqkit import (
    SequenceSpec,
    check_bounded_away,
    f_log_adjusted,
    fit_sandwich_constants,
    gen_sequence,
    parse_sequence,
)


def test_power_identity():
    assert gen_sequence(SequenceSpec("power", 1.0), 3).tolist() == [1.0, 2.0, 3.0]


def test_sqrt_nlogn_value():
    v = gen_sequence(parse_sequence("sqrt-nlogn"), 3)[-1]
    assert v == pytest.approx(math.sqrt(3 * math.log(3)), rel=1e-15)
    assert v == pytest.approx(1.8154, abs=5e-5)


def test_explicit_passthrough():
    spec = parse_sequence("explicit(0,1,4,9)")
    assert gen_sequence(spec, 4).tolist() == [0, 1, 4, 9]


def test_explicit_errors():
    with pytest.raises(ValueError, match="explicit sequence has 3 values"):
        gen_sequence(parse_sequence("explicit(1,2,3)"), 4)
    with pytest.raises(ValueError, match="negative"):
        gen_sequence(parse_sequence("explicit(1,-2,3)"), 3)
    with pytest.raises(ValueError):
        gen_sequence(SequenceSpec("power", 1.0, offset=5), 4)


@pytest.mark.parametrize("text", ["linear", "quadratic", "sqrt-nlogn", "const3",
                                  "power(0.6)", "power(1.5,scale=2)", "power-log(0.5)",
                                  "explicit(1.0,2.5)"])
def test_text_round_trip(text):
    spec = parse_sequence(text)
    assert parse_sequence(spec.to_text()) == spec


def test_parse_rejects_garbage():
    for bad in ["cubic", "power()", "power(1,shift=2)", "const"]:
        with pytest.raises(ValueError):
            parse_sequence(bad)


@settings(max_examples=100, deadline=None)
@given(kind=st.sampled_from(["power", "power-log"]),
       exponent=st.floats(0, 3),
       scale=st.floats(0.01, 100),
       n_max=st.integers(2, 500))
def test_power_kinds_nonnegative_nondecreasing(kind, exponent, scale, n_max):
    v = gen_sequence(SequenceSpec(kind, exponent, scale=scale), n_max)
    assert np.all(v >= 0)
    assert np.all(np.diff(v) >= 0)


def test_sandwich_constants_chung_case():
    n = np.arange(1, 1001, dtype=float)
    k = fit_sandwich_constants(np.ones_like(n), n)
    assert (k.c, k.B) == (1.0, 1.0)
    assert k.finite_range_certificate


def test_sandwich_constants_quadratic():
    n = np.arange(1, 1001, dtype=float)
    k = fit_sandwich_constants(n, n**2)
    assert 1.0 <= k.c <= 2.0
    # increments 2n - 1 against alpha_n = n: c = max(1, (2n-1)/n) = 1999/1000
    assert k.c == pytest.approx(1999 / 1000, rel=1e-15)
    assert k.B == pytest.approx(3.0)


def test_sandwich_constants_reject_flat_step():
    with pytest.raises(ValueError, match="no finite c"):
        fit_sandwich_constants([1, 1, 1], [1, 2, 2])
    with pytest.raises(ValueError, match="alpha_n = 0"):
        fit_sandwich_constants([1, 0, 1], [1, 2, 3])
    with pytest.raises(ValueError, match="nondecreasing"):
        fit_sandwich_constants([1, 1, 1], [1, 3, 2])


@settings(max_examples=100, deadline=None)
@given(e=st.floats(0.0, 2.0), N=st.integers(3, 300))
def test_sandwich_constants_hold_elementwise(e, N):
    n = np.arange(1, N + 1, dtype=float)
    alpha, beta = n**e, n ** (e + 1)
    k = fit_sandwich_constants(alpha, beta)
    inc = np.diff(np.concatenate(([0.0], beta)))
    slack = 1 + 1e-12
    assert np.all(alpha / k.c <= inc * slack)
    assert np.all(inc <= k.c * alpha * slack)
    assert np.all(np.diff(beta) / beta[:-1] <= k.B * slack)
    assert k.B <= 2 ** (e + 1) - 1 + 1e-12


def test_f_log_adjusted_values():
    assert f_log_adjusted(0.0) == 0.0
    with pytest.raises(ValueError):
        f_log_adjusted(-1.0)
    r3 = f_log_adjusted(3 * math.log(3)) / 3
    assert r3 >= 0.5
    r6 = f_log_adjusted(1e6 * math.log(1e6)) / 1e6
    assert 1.5 <= r6 <= 2.0


def test_f_log_adjusted_ratio_bounds():
    ns = np.unique(np.geomspace(3, 10**6, 2000).astype(int))
    r = np.array([f_log_adjusted(n * math.log(n)) / n for n in ns])
    assert np.all(r >= 0.5) and np.all(r <= 2.1)


def test_f_log_adjusted_strictly_increasing():
    xs = np.concatenate(([0.0], np.geomspace(1e-8, 1e12, 4000)))
    f = np.array([f_log_adjusted(x) for x in xs])
    assert np.all(np.diff(f) > 0)


def test_check_bounded_away():
    assert check_bounded_away(np.arange(1, 101), 1.0) == (1.0, 1.0)
    lo, hi = check_bounded_away([1, 1, 1], 1.0)
    assert lo == pytest.approx(1 / 3) and hi == 1.0
    n = np.arange(3, 10**4 + 1, dtype=float)
    lo, hi = check_bounded_away(np.sqrt(n * np.log(n)), 0.5, offset=3)
    assert lo > 1 and hi < 4
    with pytest.raises(ValueError):
        check_bounded_away([], 1.0)
