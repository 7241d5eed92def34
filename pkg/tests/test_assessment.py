from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings, strategies as st

from envctl.algebra import EmptyConditioning, event_of, full_space, gn_implies
from envctl.assessment import (
    AssessmentError,
    EventNotInPriorAlgebra,
    LayeredConditional,
    Prior,
    StatisticalModel,
    canonical_extension,
    evaluate_layered,
    extends_assessment,
    strategy_from_model,
    validate_full_conditional,
)

from strategies import events, nonempty_events, simplex, spaces


def grid():
    sp = full_space(2, 2)
    model = StatisticalModel(sp, ((Fr(1, 4), Fr(3, 4)), (Fr(3, 4), Fr(1, 4))))
    return sp, model, strategy_from_model(sp, model)


def test_strategy_examples():
    sp, _, sigma = grid()
    assert sigma(sp.omega, 0) == 1 and sigma(sp.omega, 1) == 1
    assert sigma(sp.E(0), 0) == Fr(1, 4)
    sp2 = full_space(2, 2)
    sigma2 = strategy_from_model(sp2, StatisticalModel(sp2, ((Fr(1, 4), Fr(3, 4)), (Fr(3, 4), Fr(1, 4)))))
    f = event_of(sp2, "(H1 & E1) | (H2 & E2)")
    assert sigma2(f, 0) == Fr(1, 4) and sigma2(f, 1) == Fr(1, 4)


def test_model_validation():
    sp = full_space(1, 2)
    with pytest.raises(AssessmentError):
        StatisticalModel(sp, ((Fr(1, 2), Fr(1, 3)),))
    with pytest.raises(TypeError):
        StatisticalModel(sp, ((0.5, 0.5),))


def test_prior():
    sp = full_space(3, 1)
    pi = Prior.on_groups(sp, [[0], [1, 2]], [Fr(3, 5), Fr(2, 5)])
    assert pi.prob(sp.H(1) | sp.H(2)) == Fr(2, 5)
    assert pi.prob(sp.omega) == 1
    with pytest.raises(EventNotInPriorAlgebra):
        pi.prob(sp.H(1))
    with pytest.raises(AssessmentError):
        Prior.on_cells(sp, [Fr(1, 2), Fr(1, 2), Fr(1, 2)])


def test_evaluate_examples():
    sp = full_space(2, 2)
    uni = LayeredConditional(sp, ((Fr(1, 4),) * 4,))
    assert evaluate_layered(uni, sp.atom(0, 0), sp.omega) == Fr(1, 4)
    assert evaluate_layered(uni, sp.omega, sp.H(0)) == 1
    two = LayeredConditional(sp, ((Fr(1, 2), Fr(1, 2), 0, 0), (0, 0, Fr(1, 2), Fr(1, 2))))
    assert evaluate_layered(two, sp.atom(1, 0), sp.H(1)) == Fr(1, 2)
    with pytest.raises(EmptyConditioning):
        evaluate_layered(two, sp.omega, sp.empty)


def test_layer_invariants_enforced():
    sp = full_space(1, 2)
    with pytest.raises(AssessmentError):
        LayeredConditional(sp, ((Fr(1, 2), Fr(1, 3)),))
    with pytest.raises(AssessmentError):
        LayeredConditional(sp, ((1, 0),))  # second atom never reached
    with pytest.raises(AssessmentError):
        LayeredConditional(sp, ((Fr(1, 2), Fr(1, 2)), (1, 0)))


def test_validate_reports():
    sp = full_space(2, 2)
    good = LayeredConditional(sp, ((Fr(1, 2), Fr(1, 2), 0, 0), (0, 0, Fr(1, 3), Fr(2, 3))))
    assert validate_full_conditional(good)
    bad = LayeredConditional(sp, ((Fr(1, 2), Fr(1, 3), 0, 0), (0, 0, Fr(1, 3), Fr(2, 3))), check=False)
    rep = validate_full_conditional(bad)
    assert not rep and rep.condition == "C2"

    # swap P(.|Omega) for the uniform distribution, leaving every other conditional intact
    def table(F, K):
        if K.is_omega:
            return Fr(len(F), 4)
        return good(F, K)

    rep = validate_full_conditional(table, sp)
    assert not rep and rep.condition == "C3"
    G, a, H = rep.witness
    assert table(G & a, H) != table(G, H) * table(a, G & H)


def test_extends_assessment():
    sp, model, sigma = grid()
    pi = Prior.on_cells(sp, [Fr(1, 2), Fr(1, 2)])
    P = canonical_extension(pi, sigma)
    assert extends_assessment(P, pi, sigma)
    other = Prior.on_cells(sp, [Fr(1, 3), Fr(2, 3)])
    assert not extends_assessment(P, other, sigma)


def test_null_cell_constraint_binds():
    sp, model, sigma = grid()
    pi = Prior.on_cells(sp, [1, 0])
    P = canonical_extension(pi, sigma)
    assert extends_assessment(P, pi, sigma)
    # same layer 0, but H2's own layer perturbed
    Q = LayeredConditional(sp, (P.layers[0], (0, 0, Fr(1, 2), Fr(1, 2))))
    assert not extends_assessment(Q, pi, sigma)


@st.composite
def layered(draw):
    sp = draw(spaces())
    order = draw(st.permutations(range(sp.n_atoms)))
    cuts = sorted(set(draw(st.lists(st.integers(1, sp.n_atoms - 1), max_size=3)))) if sp.n_atoms > 1 else []
    groups, start = [], 0
    for c in cuts + [sp.n_atoms]:
        groups.append(order[start:c])
        start = c
    layers = []
    for g in groups:
        w = draw(simplex(len(g), allow_zero=False))
        vec = [Fr(0)] * sp.n_atoms
        for a, x in zip(g, w):
            vec[a] = x
        layers.append(tuple(vec))
    return LayeredConditional(sp, tuple(layers))


@settings(max_examples=60, deadline=None)
@given(layered(), st.data())
def test_layered_properties(P, data):
    sp = P.space
    assert validate_full_conditional(P)
    E, F = data.draw(events(sp)), data.draw(events(sp))
    H, K = data.draw(nonempty_events(sp)), data.draw(nonempty_events(sp))
    assert P(F, K) + P(~F, K) == 1
    if gn_implies((E, H), (F, K)):
        assert P(E, H) <= P(F, K)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_strategy_additive(data):
    sp = data.draw(spaces())
    rows = []
    for i in range(sp.n_conditioning):
        cols = [j for j in range(sp.n_observable) if sp.compat[i][j]]
        w = data.draw(simplex(len(cols)))
        r = [Fr(0)] * sp.n_observable
        for j, x in zip(cols, w):
            r[j] = x
        rows.append(tuple(r))
    sigma = strategy_from_model(sp, StatisticalModel(sp, tuple(rows)))
    F, G = data.draw(events(sp)), data.draw(events(sp))
    G = G - F
    for i in range(sp.n_conditioning):
        assert sigma(F | G, i) == sigma(F, i) + sigma(G, i)
        assert sigma(sp.H(i), i) == 1
