import pytest
from hypothesis import given, strategies as st

from envctl.algebra import (
    AlgebraError,
    BadIndex,
    EmptyConditioning,
    EmptyRowOrColumn,
    Subalgebra,
    build_space,
    event_of,
    finite_partitions,
    full_space,
    gn_implies,
)

from strategies import events, nonempty_events, spaces


def test_build_space_counts():
    assert full_space(2, 2).n_atoms == 4
    sp = build_space([[1, 1], [1, 1], [1, 0]])
    assert sp.n_atoms == 5
    assert sp.atoms == ((0, 0), (0, 1), (1, 0), (1, 1), (2, 0))


@pytest.mark.parametrize("compat", [[[0]], [[1, 0], [1, 0]], [[1, 1], [0, 0]]])
def test_build_space_rejects_empty(compat):
    with pytest.raises(EmptyRowOrColumn):
        build_space(compat)


def test_event_expressions():
    sp = full_space(2, 2)
    assert event_of(sp, "H1 ∨ H2").is_omega
    ev = event_of(sp, "H1 ∧ E1")
    assert list(ev) == [0] and ev == sp.atom(0, 0)
    assert len(event_of(sp, "¬(H1 ∧ E1)")) == 3
    assert event_of(sp, "not (H1 and E2) or empty") == ~sp.atom(0, 1)
    assert event_of(sp, "~Omega").is_empty
    with pytest.raises(BadIndex):
        event_of(sp, "H3")
    with pytest.raises(AlgebraError):
        event_of(sp, "(H1 & E1")


def test_row_and_column_events():
    sp = build_space([[1, 1], [1, 0]])
    assert len(sp.H(0)) == 2 and len(sp.E(1)) == 1
    with pytest.raises(BadIndex):
        sp.atom(1, 1)


def test_gn_examples():
    sp = full_space(2, 2)
    a = event_of(sp, "H1 & E1")
    h1 = sp.H(0)
    assert gn_implies((a, h1), (a, h1))
    assert gn_implies((sp.empty, h1), (sp.omega, sp.E(0)))
    assert not gn_implies((a, h1), (a, sp.omega))
    with pytest.raises(EmptyConditioning):
        gn_implies((a, sp.empty), (a, h1))


@given(st.data())
def test_boolean_laws(data):
    sp = data.draw(spaces())
    a, b, c = (data.draw(events(sp)) for _ in range(3))
    assert ~(a | b) == ~a & ~b
    assert ~(a & b) == ~a | ~b
    assert a & (b | c) == (a & b) | (a & c)
    assert a | (b & c) == (a | b) & (a | c)
    assert ~~a == a
    assert (a | ~a).is_omega and (a & ~a).is_empty


@given(st.data())
def test_gn_is_preorder(data):
    sp = data.draw(spaces())
    pairs = [(data.draw(events(sp)), data.draw(nonempty_events(sp))) for _ in range(3)]
    p, q, r = pairs
    assert gn_implies(p, p)
    if gn_implies(p, q) and gn_implies(q, r):
        assert gn_implies(p, r)


def test_subalgebra_membership():
    sp = full_space(3, 2)
    sub = Subalgebra.from_row_groups(sp, [[0], [1, 2]])
    assert sub.contains(sp.H(0)) and sub.contains(sp.H(1) | sp.H(2))
    assert not sub.contains(sp.H(1))
    assert len(list(sub.events())) == 4
    assert sub.is_row_algebra and sub.block_rows(1) == [1, 2]
    with pytest.raises(AlgebraError):
        Subalgebra(sp, (sp.H(0),), ("x",))


@pytest.mark.parametrize("k,count", [(1, 1), (2, 2), (3, 5), (4, 15)])
def test_partition_counts(k, count):
    sp = full_space(k, 1)
    sub = Subalgebra.cells(sp)
    parts = list(finite_partitions(sub))
    assert len(parts) == count
    assert parts[0] == sub.blocks
    for part in parts:
        assert sum(len(e) for e in part) == sp.n_atoms
        # the finest partition refines every other one
        for blk in sub.blocks:
            assert any(blk <= e for e in part)
    assert len(list(finite_partitions(sub, max_count=2))) == min(2, count)
