from fractions import Fraction as Fr
import random

import pytest
from hypothesis import given, settings, strategies as st

from envctl.algebra import Event, full_space
from envctl.assessment import extends_assessment, validate_full_conditional
from envctl.coherence import (
    ConditionalAssessment,
    Entry,
    ExtensionOracle,
    IncoherentBase,
    ValueOutsideInterval,
    assessment_from_prior_strategy,
    check_coherence,
    extension_interval,
    witness_extension,
)
from envctl.fixtures import binomial_events, binomial_surrogate, grid_2x2

from strategies import finite_instances, random_instance


def _agrees(P, a):
    return all(P(e.F, e.K) == e.value for e in a.entries)


def test_total_probability_is_coherent():
    sp = full_space(2, 2)
    a = ConditionalAssessment(
        sp,
        (
            Entry(sp.E(0), sp.omega, Fr(1, 2)),
            Entry(sp.E(0), sp.H(0), Fr(1, 4)),
            Entry(sp.E(0), sp.H(1), Fr(3, 4)),
            Entry(sp.H(0), sp.omega, Fr(1, 2)),
        ),
    )
    res = check_coherence(a)
    assert res
    assert validate_full_conditional(res.witness)
    assert _agrees(res.witness, a)


def test_contradictory_duplicate():
    sp = full_space(2, 2)
    a = ConditionalAssessment(sp, (Entry(sp.E(0), sp.omega, Fr(3, 10)), Entry(sp.E(0), sp.omega, Fr(2, 5))))
    res = check_coherence(a)
    assert not res and res.failed_layer == 0


def test_total_probability_bound_violated():
    sp = full_space(2, 2)
    a = ConditionalAssessment(
        sp,
        (
            Entry(sp.E(0), sp.H(0), Fr(1, 4)),
            Entry(sp.E(0), sp.omega, Fr(9, 10)),
            Entry(sp.H(0), sp.omega, Fr(1)),
        ),
    )
    assert not check_coherence(a)
    with pytest.raises(IncoherentBase):
        ExtensionOracle(a)


def test_assessed_target_is_degenerate():
    inst = grid_2x2()
    a = assessment_from_prior_strategy(inst.prior, inst.sigma)
    sp = inst.space
    atom = sp.atom(0, 1)
    assert extension_interval(a, atom, sp.H(0)) == (Fr(3, 4), Fr(3, 4))
    assert extension_interval(a, sp.H(0), sp.omega) == (Fr(1, 2), Fr(1, 2))


def test_grid_bayes_ratio():
    inst = grid_2x2()
    a = assessment_from_prior_strategy(inst.prior, inst.sigma)
    assert extension_interval(a, inst.space.H(0), inst.space.E(0)) == (Fr(1, 4), Fr(1, 4))


@pytest.mark.parametrize("n", [2, 3])
def test_binomial_surrogate_interval(n):
    inst = binomial_surrogate(n)
    C, D = binomial_events(inst)
    a = assessment_from_prior_strategy(inst.prior, inst.sigma)
    assert extension_interval(a, C, D) == (Fr(1, 10) ** n, Fr(9, 10) ** n)


def test_witness_endpoints_and_midpoint():
    inst = binomial_surrogate(2)
    C, D = binomial_events(inst)
    a = assessment_from_prior_strategy(inst.prior, inst.sigma)
    orc = ExtensionOracle(a)
    lo, hi = orc.interval(C, D)
    for v in (lo, (lo + hi) / 2, hi):
        P = orc.witness(C, D, v)
        assert validate_full_conditional(P)
        assert extends_assessment(P, inst.prior, inst.sigma)
        assert P(C, D) == v
    with pytest.raises(ValueOutsideInterval):
        witness_extension(a, C, D, hi + Fr(1, 100))


@settings(max_examples=40, deadline=None)
@given(finite_instances(), st.data())
def test_duality(inst, data):
    sp = inst.space
    a = assessment_from_prior_strategy(inst.prior, inst.sigma)
    orc = ExtensionOracle(a)
    F = Event(sp, data.draw(st.integers(0, sp.full_mask)))
    K = Event(sp, data.draw(st.integers(1, sp.full_mask)))
    lo, hi = orc.interval(F, K)
    lo_c, hi_c = orc.interval(~F, K)
    assert lo <= hi
    assert (lo, hi) == (1 - hi_c, 1 - lo_c)


@settings(max_examples=30, deadline=None)
@given(finite_instances(), st.data())
def test_more_entries_never_widen(inst, data):
    sp = inst.space
    full = assessment_from_prior_strategy(inst.prior, inst.sigma)
    keep = data.draw(st.lists(st.booleans(), min_size=len(full), max_size=len(full)))
    part = ConditionalAssessment(sp, tuple(e for e, k in zip(full.entries, keep) if k))
    F = Event(sp, data.draw(st.integers(0, sp.full_mask)))
    K = Event(sp, data.draw(st.integers(1, sp.full_mask)))
    lo_p, hi_p = extension_interval(part, F, K)
    lo_f, hi_f = extension_interval(full, F, K)
    assert lo_p <= lo_f <= hi_f <= hi_p


def test_witnesses_valid_on_random_instances():
    rng = random.Random(7)
    for _ in range(6):
        inst = random_instance(rng, 3, 2)
        sp = inst.space
        orc = ExtensionOracle(assessment_from_prior_strategy(inst.prior, inst.sigma))
        for _ in range(3):
            F = Event(sp, rng.randrange(sp.full_mask + 1))
            K = Event(sp, rng.randrange(1, sp.full_mask + 1))
            for v in orc.interval(F, K):
                P = orc.witness(F, K, v)
                assert validate_full_conditional(P)
                assert extends_assessment(P, inst.prior, inst.sigma)
                assert P(F, K) == v


def test_coherence_witness_covers_every_atom():
    inst = binomial_surrogate(2)
    res = check_coherence(assessment_from_prior_strategy(inst.prior, inst.sigma))
    assert res and validate_full_conditional(res.witness)
