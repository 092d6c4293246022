import pytest
from gengap.errors import GroupConstructionError, HypothesisViolation, UndeclaredGeneratorError
from gengap.groups import (
    ALL_PRIMES,
    CyclicTimesZFactor,
    FiniteGroup,
    NilpotentProductFactor,
    Presentation,
    Word,
    abelian,
    alternating4,
    commutator_quotient_rank,
    crt_units,
    cyclic,
    dihedral,
    direct_product,
    generating_primes,
    good_primes,
    is_nilpotent,
    min_generators_group,
    natural_presentation,
    normal_sylow,
    presentation_from_mapping,
    primes_of,
    quaternion8,
    quotient_group,
    smallest_prime_outside,
    symmetric3,
    trivial_group,
)


def test_cyclic_group():
    c6 = cyclic(6)
    assert c6.order == 6
    assert c6.is_abelian()
    assert c6.element_order(c6.generator("a")) == 6
    assert c6.power(1, -1) == 5
    assert primes_of(c6) == {2, 3}
    with pytest.raises(GroupConstructionError):
        cyclic(0)


@pytest.mark.parametrize(
    "orders, invariants",
    [([2, 6], (2, 6)), ([6, 2], (2, 6)), ([4, 6], (2, 12)), ([2, 3], (6,)), ([3, 3], (3, 3))],
)
def test_abelian_invariants(orders, invariants):
    group = abelian(orders)
    assert group.invariants == invariants
    assert group.order == orders[0] * orders[1]
    assert min_generators_group(group) == len(invariants)


def test_direct_product_of_coprime_cyclic_groups_is_cyclic():
    group = direct_product(cyclic(2), cyclic(3))
    assert group.order == 6
    assert group.invariants == (6,)
    assert min_generators_group(group) == 1


def test_table_validation():
    with pytest.raises(GroupConstructionError):
        FiniteGroup(((0, 1), (1, 0)), 0, ())
    with pytest.raises(GroupConstructionError):
        FiniteGroup(((0, 1), (1, 1)), 0, (1,))
    with pytest.raises(UndeclaredGeneratorError):
        cyclic(3).generator("b")


def test_symmetric_group():
    s3 = symmetric3()
    assert not s3.is_abelian()
    assert not is_nilpotent(s3)
    with pytest.raises(HypothesisViolation):
        min_generators_group(s3)
    with pytest.raises(HypothesisViolation):
        generating_primes(s3)
    assert len(normal_sylow(s3, 3)) == 3
    with pytest.raises(HypothesisViolation):
        normal_sylow(s3, 2)
    assert commutator_quotient_rank(s3, 2) == 1
    assert commutator_quotient_rank(s3, 3) == 0


@pytest.mark.parametrize(
    "group, order, nilpotent, d",
    [
        (dihedral(3), 6, False, None),
        (dihedral(4), 8, True, 2),
        (quaternion8(), 8, True, 2),
        (dihedral(6), 12, False, None),
        (alternating4(), 12, False, None),
    ],
)
def test_small_nonabelian_groups(group, order, nilpotent, d):
    assert group.order == order
    assert not group.is_abelian()
    assert is_nilpotent(group) == nilpotent
    if nilpotent:
        assert min_generators_group(group) == d
    else:
        with pytest.raises(HypothesisViolation):
            min_generators_group(group)


def test_involutions_and_sylow_subgroups():
    q8 = quaternion8()
    assert [q8.element_order(g) for g in range(8)].count(2) == 1
    assert len(normal_sylow(alternating4(), 2)) == 4
    with pytest.raises(HypothesisViolation):
        normal_sylow(alternating4(), 3)
    with pytest.raises(GroupConstructionError):
        dihedral(1)


def test_quotient_group():
    quotient, projection = quotient_group(cyclic(6), frozenset({0, 3}))
    assert quotient.order == 3
    assert len(set(projection)) == 3
    with pytest.raises(HypothesisViolation):
        quotient_group(symmetric3(), frozenset({0, 3}))


def test_elementary_abelian_quotients():
    klein = abelian([2, 2])
    assert commutator_quotient_rank(klein, 2) == 2
    assert commutator_quotient_rank(klein, 3) == 0
    assert generating_primes(klein) == {2}
    assert generating_primes(cyclic(6)) == {2, 3}


def test_words():
    word = Word.parse("x^3 c X")
    assert len(word) == 5
    assert word.letters[-1] == ("x", -1)
    assert (word * word.inverse()).reduced() == Word()
    assert str(Word.power_of("c", -2)) == "c^-1 c^-1"
    with pytest.raises(ValueError):
        Word((("x", 2),))


def test_natural_presentations():
    assert natural_presentation(cyclic(5)).relators == (Word.power_of("x", 5),)
    klein = natural_presentation(abelian([2, 2]))
    assert klein.rank == 2
    assert len(klein.relators) == 3
    with pytest.raises(HypothesisViolation):
        natural_presentation(symmetric3())


def test_presentation_checks_relators():
    c3 = cyclic(3)
    presentation = presentation_from_mapping({"generators": ["x"], "relators": ["x^3"], "images": {"x": "a"}}, c3)
    assert presentation.evaluate(Word.parse("x x")) == c3.power(c3.generator("a"), 2)
    with pytest.raises(GroupConstructionError):
        presentation_from_mapping({"generators": ["x"], "relators": ["x^2"], "images": {"x": "a"}}, c3)
    with pytest.raises(GroupConstructionError):
        Presentation(("x",), (), c3, (0,))
    with pytest.raises(UndeclaredGeneratorError):
        presentation.image("y")


def test_factor_specs():
    assert min_generators_group(CyclicTimesZFactor(3)) == 2
    assert min_generators_group(NilpotentProductFactor(abelian([2, 2]), 2)) == 4
    assert generating_primes(NilpotentProductFactor(trivial_group(), 1)) is ALL_PRIMES
    assert 7 in ALL_PRIMES and 8 not in ALL_PRIMES
    with pytest.raises(GroupConstructionError):
        CyclicTimesZFactor(1)
    with pytest.raises(HypothesisViolation):
        NilpotentProductFactor(symmetric3(), 1)


def test_prime_helpers():
    assert smallest_prime_outside({2, 3}) == 5
    assert smallest_prime_outside(set()) == 2
    assert good_primes({2, 3}, 3) == [5, 7, 11]
    units = crt_units([2, 3, 5])
    for p, u in units.items():
        for q in (2, 3, 5):
            assert u % q == (1 if q == p else 0)
    with pytest.raises(GroupConstructionError):
        crt_units([3, 3])
