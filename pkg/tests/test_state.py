import cmath
import math

import pytest
from hypothesis import given, strategies as st

from branchlab.errors import ZeroState
from branchlab.state import (
    Amplitude,
    DuplicateLabel,
    EigenBranch,
    NotNormalized,
    WaveFunction,
    born_probability,
    normalize,
    validate,
)


def branch(re, im=0.0, label="a"):
    return EigenBranch(label, Amplitude(re, im), 0.0)


@pytest.mark.parametrize(
    "amp, expected",
    [((1.0, 0.0), 1.0), ((0.6, 0.8), 1.0), ((0.0, 0.0), 0.0)],
)
def test_born_probability(amp, expected):
    assert born_probability(branch(*amp)) == pytest.approx(expected, abs=1e-15)


def test_born_probability_one_third():
    assert born_probability(branch(math.sqrt(1 / 3))) == pytest.approx(1 / 3, rel=1e-15)


def test_amplitude_rejects_non_finite():
    with pytest.raises(ValueError):
        Amplitude(float("nan"), 0.0)
    with pytest.raises(ValueError):
        Amplitude(0.0, float("inf"))


def test_normalize_equal_weights():
    wf = normalize(WaveFunction.from_amplitudes("o", [("a", 1), ("b", 1)]))
    for b in wf:
        assert b.amplitude.re == pytest.approx(math.sqrt(0.5), rel=1e-15)
        assert b.amplitude.im == 0.0


def test_normalize_single_branch():
    wf = normalize(WaveFunction.from_amplitudes("o", [("a", 2)]))
    assert wf.branches[0].amplitude == Amplitude(1.0, 0.0)


def test_normalize_mixed_phases():
    # |1|^2 + |i|^2 + |1+i|^2 = 4, so probabilities are 1/4, 1/4, 2/4.
    wf = normalize(WaveFunction.from_amplitudes("o", [("a", 1), ("b", 1j), ("c", 1 + 1j)]))
    assert wf.probabilities() == pytest.approx([0.25, 0.25, 0.5], abs=1e-15)
    assert abs(sum(wf.probabilities()) - 1) <= 1e-15


def test_normalize_zero_state():
    with pytest.raises(ZeroState):
        normalize(WaveFunction.from_amplitudes("o", [("a", 0), ("b", 0)]))


def test_validate_examples():
    ok = WaveFunction.from_amplitudes("o", [("a", math.sqrt(0.5)), ("b", math.sqrt(0.5))])
    assert validate(ok) == []
    dup = WaveFunction.from_amplitudes("o", [("phi1", math.sqrt(0.5)), ("phi1", math.sqrt(0.5))])
    assert validate(dup) == [DuplicateLabel("phi1")]
    short = WaveFunction.from_amplitudes("o", [("a", math.sqrt(0.9))])
    (v,) = validate(short)
    assert isinstance(v, NotNormalized) and v.total == pytest.approx(0.9)


def test_validate_never_raises_on_empty():
    assert validate(WaveFunction("o", ())) != []


amplitudes = st.lists(
    st.tuples(
        st.floats(-10, 10, allow_nan=False, allow_subnormal=False),
        st.floats(-10, 10, allow_nan=False, allow_subnormal=False),
    ),
    min_size=1,
    max_size=16,
).filter(lambda xs: sum(a * a + b * b for a, b in xs) > 1e-6)


def _wf(xs):
    return WaveFunction.from_amplitudes("o", [(f"b{i}", complex(a, b)) for i, (a, b) in enumerate(xs)])


@given(amplitudes)
def test_normalized_states_validate(xs):
    wf = normalize(_wf(xs))
    assert validate(wf) == []
    assert abs(math.fsum(wf.probabilities()) - 1.0) <= 1e-9


@given(amplitudes)
def test_normalize_idempotent_bitwise(xs):
    once = normalize(_wf(xs))
    assert normalize(once) == once


@given(amplitudes, st.floats(0, 2 * math.pi))
def test_born_probability_phase_invariant(xs, theta):
    wf = normalize(_wf(xs))
    phase = cmath.exp(1j * theta)
    rotated = WaveFunction.from_amplitudes(
        "o", [(b.label, complex(b.amplitude) * phase) for b in wf]
    )
    for p, q in zip(wf.probabilities(), rotated.probabilities()):
        assert abs(p - q) <= 4 * math.ulp(max(p, q, 2**-1022))
