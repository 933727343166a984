import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inacc import (
    DecisionContext,
    DimensionMismatch,
    NonFiniteUtility,
    NotAProbability,
    PriorHasZero,
    ProbabilityVector,
    TooSmall,
    TrivialContext,
    UtilityFunction,
    expectation,
    validate_context,
)


def weights(n=3, positive=False):
    lo = 0.05 if positive else 0.0
    return st.lists(
        st.floats(lo, 1.0, allow_nan=False), min_size=n, max_size=n
    ).filter(lambda w: sum(w) > 0.1)


def prob_vector(n=3, positive=False):
    return weights(n, positive).map(
        lambda w: ProbabilityVector(x / math.fsum(w) for x in w)
    )


def utility(n=3):
    return st.lists(
        st.floats(-10, 10, allow_nan=False, allow_infinity=False),
        min_size=n,
        max_size=n,
    ).map(UtilityFunction)


class TestProbabilityVector:
    def test_rejects_small_spaces(self):
        with pytest.raises(TooSmall):
            ProbabilityVector([0.5, 0.5])

    def test_rejects_negative(self):
        with pytest.raises(NotAProbability):
            ProbabilityVector([0.6, 0.6, -0.2])

    def test_rejects_bad_sum(self):
        with pytest.raises(NotAProbability):
            ProbabilityVector([0.5, 0.3, 0.3])

    def test_renormalizes_rounding_noise(self):
        pv = ProbabilityVector([0.5, 0.3, 0.2 + 5e-10])
        assert math.fsum(pv.weights) == pytest.approx(1.0, abs=1e-15)

    def test_rejects_beyond_tolerance(self):
        with pytest.raises(NotAProbability):
            ProbabilityVector([0.5, 0.3, 0.2 + 5e-9])

    def test_strictly_positive_flag(self):
        assert ProbabilityVector([0.5, 0.3, 0.2]).strictly_positive
        assert not ProbabilityVector([0.5, 0.5, 0.0]).strictly_positive

    def test_uniform(self):
        assert ProbabilityVector.uniform(4).weights == (0.25,) * 4

    def test_mass(self):
        pv = ProbabilityVector([0.5, 0.3, 0.2])
        assert pv.mass([1, 3]) == pytest.approx(0.7)


class TestUtilityFunction:
    def test_rejects_nan(self):
        with pytest.raises(NonFiniteUtility):
            UtilityFunction([1.0, float("nan"), 0.0])

    def test_rejects_infinity(self):
        with pytest.raises(NonFiniteUtility):
            UtilityFunction([1.0, float("inf"), 0.0])

    def test_shift_and_minus(self):
        f = UtilityFunction([1.0, 2.0, 3.0])
        assert f.shifted(1.0).values == (0.0, 1.0, 2.0)
        assert f.minus(UtilityFunction([1.0, 1.0, 1.0])).values == (0.0, 1.0, 2.0)


class TestExpectation:
    def test_constant_function(self):
        q = ProbabilityVector([0.5, 0.3, 0.2])
        assert expectation(UtilityFunction([1, 1, 1]), q) == pytest.approx(1.0)

    def test_indicator(self):
        q = ProbabilityVector([0.5, 0.3, 0.2])
        assert expectation(UtilityFunction([1, 0, 0]), q) == pytest.approx(0.5)

    def test_log_ratio_fixture(self):
        f = UtilityFunction([0.405465, -0.105361, -0.510826])
        q = ProbabilityVector([0.5, 0.3, 0.2])
        assert expectation(f, q) == pytest.approx(0.068959, abs=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            expectation(UtilityFunction([1, 2, 3, 4]), ProbabilityVector.uniform(3))

    @given(prob_vector(), utility(), utility(), st.floats(-5, 5), st.floats(-5, 5))
    @settings(max_examples=100)
    def test_linearity(self, q, f, g, a, b):
        combo = UtilityFunction(a * x + b * y for x, y in zip(f.values, g.values))
        lhs = expectation(combo, q)
        rhs = a * expectation(f, q) + b * expectation(g, q)
        assert lhs == pytest.approx(rhs, abs=1e-9, rel=1e-9)

    @given(prob_vector(), st.floats(-100, 100, allow_nan=False))
    @settings(max_examples=50)
    def test_constant_property(self, q, c):
        f = UtilityFunction([c] * q.n)
        assert expectation(f, q) == pytest.approx(c, abs=1e-9, rel=1e-9)


class TestValidateContext:
    def setup_method(self):
        self.p_star = ProbabilityVector([0.5, 0.3, 0.2])
        self.p = ProbabilityVector.uniform(3)

    def test_trivial_rejected(self):
        ctx = DecisionContext(
            p_star=self.p_star,
            p=self.p,
            f1=UtilityFunction([2, 2, 2]),
            f2=UtilityFunction([1, 1, 1]),
        )
        with pytest.raises(TrivialContext):
            validate_context(ctx)

    def test_zero_prior_rejected(self):
        ctx = DecisionContext(
            p_star=self.p_star,
            p=ProbabilityVector([0.5, 0.5, 0.0]),
            d=UtilityFunction([1, -1, 0]),
        )
        with pytest.raises(PriorHasZero):
            validate_context(ctx)

    def test_materializes_d(self):
        ctx = DecisionContext(
            p_star=self.p_star,
            p=self.p,
            f1=UtilityFunction([1, 0, 0]),
            f2=UtilityFunction([0, 1, 0]),
        )
        validated = validate_context(ctx)
        assert validated.d.values == (1.0, -1.0, 0.0)

    def test_d_only_context_gets_zero_f2(self):
        ctx = DecisionContext(p_star=self.p_star, p=self.p, d=UtilityFunction([1, -1, 0]))
        validated = validate_context(ctx)
        assert validated.f1.values == (1.0, -1.0, 0.0)
        assert validated.f2.values == (0.0, 0.0, 0.0)

    def test_dimension_mismatch(self):
        ctx = DecisionContext(
            p_star=self.p_star, p=self.p, d=UtilityFunction([1, -1, 0, 0])
        )
        with pytest.raises(DimensionMismatch):
            validate_context(ctx)

    @given(utility())
    @settings(max_examples=100)
    def test_accepts_iff_some_entry_nonpositive(self, d):
        ctx = DecisionContext(p_star=self.p_star, p=self.p, d=d)
        if min(d.values) <= 0.0:
            assert validate_context(ctx).d.values == d.values
        else:
            with pytest.raises(TrivialContext):
                validate_context(ctx)
