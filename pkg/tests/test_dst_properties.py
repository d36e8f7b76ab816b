"""Randomized algebraic properties of the combination rules.

Hypothesis generates arbitrary normal mass functions on frames of 2..4
hypotheses; each property is checked against the stated identity rather than
against the implementation itself.
"""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from evigrid.dst import (FrameOfDiscernment, MassFunction, Refining,
                         TotalConflictError, combine_conjunctive,
                         combine_dempster, combine_disjunctive, discount,
                         pignistic, refine)

FRAMES = {n: FrameOfDiscernment(tuple("abcd"[:n])) for n in (2, 3, 4)}


@st.composite
def mass_functions(draw, frame=None):
    if frame is None:
        frame = FRAMES[draw(st.sampled_from(sorted(FRAMES)))]
    weights = draw(st.lists(st.floats(min_value=0.0, max_value=1.0),
                            min_size=frame.size - 1, max_size=frame.size - 1))
    arr = np.zeros(frame.size)
    arr[1:] = weights
    if arr.sum() == 0.0:
        arr[frame.omega] = 1.0
    arr /= arr.sum()
    return MassFunction(frame, arr)


@st.composite
def mass_function_pairs(draw):
    frame = FRAMES[draw(st.sampled_from(sorted(FRAMES)))]
    return draw(mass_functions(frame=frame)), draw(mass_functions(frame=frame))


@st.composite
def mass_function_triples(draw):
    frame = FRAMES[draw(st.sampled_from(sorted(FRAMES)))]
    return tuple(draw(mass_functions(frame=frame)) for _ in range(3))


@given(mass_function_pairs())
def test_conjunctive_commutes(pair):
    m1, m2 = pair
    assert np.allclose(combine_conjunctive(m1, m2).masses,
                       combine_conjunctive(m2, m1).masses, atol=1e-9)


@given(mass_function_triples())
def test_conjunctive_associates(triple):
    m1, m2, m3 = triple
    left = combine_conjunctive(combine_conjunctive(m1, m2), m3)
    right = combine_conjunctive(m1, combine_conjunctive(m2, m3))
    assert np.allclose(left.masses, right.masses, atol=1e-9)


@given(mass_function_pairs())
def test_disjunctive_commutes(pair):
    m1, m2 = pair
    assert np.allclose(combine_disjunctive(m1, m2).masses,
                       combine_disjunctive(m2, m1).masses, atol=1e-9)


@given(mass_function_triples())
def test_disjunctive_associates(triple):
    m1, m2, m3 = triple
    left = combine_disjunctive(combine_disjunctive(m1, m2), m3)
    right = combine_disjunctive(m1, combine_disjunctive(m2, m3))
    assert np.allclose(left.masses, right.masses, atol=1e-9)


@given(mass_function_pairs())
def test_dempster_is_normalized_conjunctive(pair):
    m1, m2 = pair
    conj = combine_conjunctive(m1, m2)
    try:
        out = combine_dempster(m1, m2)
    except TotalConflictError:
        assert conj.conflict >= 1.0 - 1e-12
        return
    expected = conj.masses.copy()
    expected[0] = 0.0
    expected /= 1.0 - conj.conflict
    assert np.allclose(out.masses, expected, atol=1e-9)


@given(mass_functions())
def test_vacuous_is_neutral(m):
    vac = MassFunction.vacuous(m.frame)
    assert np.allclose(combine_conjunctive(vac, m).masses, m.masses, atol=1e-9)
    assert np.allclose(combine_dempster(vac, m).masses, m.masses, atol=1e-9)


@given(mass_functions(),
       st.floats(min_value=0.0, max_value=1.0),
       st.floats(min_value=0.0, max_value=1.0))
def test_discount_composition(m, a, b):
    twice = discount(discount(m, a), b)
    once = discount(m, 1.0 - (1.0 - a) * (1.0 - b))
    assert np.allclose(twice.masses, once.masses, atol=1e-9)


@given(mass_functions())
def test_pignistic_is_probability(m):
    bet = pignistic(m)
    assert (bet >= -1e-12).all()
    assert abs(bet.sum() - 1.0) < 1e-9


@given(mass_function_pairs(), st.randoms(use_true_random=False))
def test_refine_commutes_with_conjunctive(pair, rnd):
    m1, m2 = pair
    source = m1.frame
    target = FrameOfDiscernment(tuple("pqrstuvw"[:2 * source.n]))
    # random refining: give each source singleton its own target singleton,
    # then scatter the remaining target hypotheses over the sources
    mapping = {lab: 1 << k for k, lab in enumerate(source.labels)}
    for extra in range(source.n, target.n):
        lab = source.labels[rnd.randrange(source.n)]
        mapping[lab] |= 1 << extra
    r = Refining(source, target, mapping)
    left = refine(combine_conjunctive(m1, m2), r)
    right = combine_conjunctive(refine(m1, r), refine(m2, r))
    assert np.allclose(left.masses, right.masses, atol=1e-9)


@settings(max_examples=200)
@given(mass_function_pairs())
def test_operations_stay_normalized(pair):
    m1, m2 = pair
    for out in (combine_conjunctive(m1, m2), combine_disjunctive(m1, m2),
                discount(m1, 0.3)):
        assert abs(out.masses.sum() - 1.0) < 1e-9
