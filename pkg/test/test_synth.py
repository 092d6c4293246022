import time
from functools import lru_cache

import pytest
from gengap.builders import augmentation_lattice, relation_lattice_of
from gengap.config import DEFAULT_SETTINGS, FAST_SETTINGS
from gengap.errors import HypothesisViolation, ProblemSchemaError
from gengap.formulas import FreeProductProblem, parse_factor
from gengap.gmodule import d_rational, min_generators_module
from gengap.groups import CyclicTimesZFactor, abelian, cyclic, good_primes, primes_of
from gengap.synth import (
    INCOMPLETE,
    REFUTED,
    VERIFIED,
    FactorModule,
    InducedElement,
    LatticeModule,
    build_nested_family,
    certificate_from_dict,
    check_good,
    factor_module,
    identity_suite,
    induced_from_json,
    infinite_factor_generators,
    synthesize_generators,
    verify_certificate,
    window_words,
)
from hypothesis import given, settings
from hypothesis import strategies as st


def problem(factors, module="augmentation"):
    return FreeProductProblem.from_dict({"factors": factors, "module": module})


@pytest.fixture(scope="module")
def cyclic_pair():
    p = problem(["C2", "C3"])
    return p, synthesize_generators(p, FAST_SETTINGS)


@pytest.fixture(scope="module")
def relation_pair():
    p = problem(["C2xZ", "C3xZ"], "relation")
    return p, synthesize_generators(p, FAST_SETTINGS, verify=False)


def test_nested_family_over_the_klein_relation_module():
    lattice = relation_lattice_of(abelian([2, 2])).lattice
    family = build_nested_family(lattice, [3, 2], FAST_SETTINGS)
    assert family.primes == (2, 3)
    assert family.counts == (3, 2)
    assert len(family.minimal) == 2
    assert family.check(lattice) == {2: 1, 3: 0}
    assert family.to_dict()["counts"] == [3, 2]
    with pytest.raises(HypothesisViolation):
        build_nested_family(lattice, [], FAST_SETTINGS)


@lru_cache(maxsize=None)
def small_lattice(name):
    kind, invariants = name.split(":")
    group = abelian([int(m) for m in invariants.split(",")])
    if kind == "augmentation":
        return augmentation_lattice(group)
    return relation_lattice_of(group).lattice


LATTICES = ["augmentation:2", "augmentation:3", "augmentation:4", "augmentation:6", "augmentation:2,2", "relation:4", "relation:2,2"]


@given(
    name=st.sampled_from(LATTICES),
    primes=st.lists(st.sampled_from([2, 3, 5, 7]), min_size=1, max_size=3, unique=True),
)
@settings(max_examples=20, deadline=None)
def test_random_nested_families(name, primes):
    lattice = small_lattice(name)
    family = build_nested_family(lattice, primes, FAST_SETTINGS)
    assert sorted(family.primes) == sorted(primes)
    for p in family.primes:
        assert family.count(p) == min_generators_module(lattice.mod_p(p))
    assert list(family.counts) == sorted(family.counts, reverse=True)
    for larger, smaller in zip(family.sets, family.sets[1:]):
        assert larger[: len(smaller)] == smaller
    residuals = family.check(lattice)
    assert all(residuals[p] == family.count(p) - family.counts[-1] for p in family.primes)


@pytest.mark.parametrize("name", LATTICES)
def test_rational_count_agrees_at_good_primes(name):
    lattice = small_lattice(name)
    counts = {min_generators_module(lattice.mod_p(q)) for q in good_primes(primes_of(lattice.group), 3)}
    assert counts == {d_rational(lattice)}


def test_good_module_witnesses():
    witness = check_good(augmentation_lattice(cyclic(6)), [2, 3], [2, 3, 5], FAST_SETTINGS)
    assert witness.delta == 1
    assert witness.exponent >= 1
    assert all(d <= 1 for d in witness.cyclicity.values())
    relation = check_good(relation_lattice_of(abelian([2, 2])).lattice, [2], [2, 3], FAST_SETTINGS)
    assert relation.delta == 2
    assert relation.to_dict()["family"]["counts"] == [3, 2]
    with pytest.raises(HypothesisViolation):
        check_good(augmentation_lattice(cyclic(6)), [2, 3], [2, 3], FAST_SETTINGS)


def test_induced_elements_absorb_syllables_of_their_own_factor():
    p = problem(["C2", "C3"])
    modules = [factor_module(p, i) for i in range(p.n)]
    assert all(isinstance(m, LatticeModule) for m in modules)
    a = modules[0].group.generators[0]
    x = InducedElement.local(0, {0: 1})
    assert x.times_syllable(modules, (0, a)) == InducedElement.local(0, {0: -1})
    b = modules[1].group.generators[0]
    moved = x.times_word(modules, ((1, b), (0, a)))
    assert not moved.is_local(0)
    assert moved.factors == (0,)
    assert (x * 3 - x - x - x).is_zero()
    assert induced_from_json(moved.to_json()) == moved
    with pytest.raises(ProblemSchemaError):
        induced_from_json([{"factor": 0, "slot": 0}])


def test_window_words_alternate_between_factors():
    p = problem(["C2", "C3"])
    modules = [factor_module(p, i) for i in range(p.n)]
    words = window_words(modules, 2)
    assert words[0] == ()
    # the empty word, 1 + 2 single syllables, 1·2 + 2·1 alternating pairs
    assert len(words) == 8
    assert all(w[k][0] != w[k + 1][0] for w in words for k in range(len(w) - 1))


def test_synthesis_for_cyclic_factors(cyclic_pair):
    p, cert = cyclic_pair
    assert cert.size == 2
    assert cert.claimed == 2
    assert cert.exponent == 1
    assert cert.provenance["slack"] == 0
    assert cert.verification.status == VERIFIED
    assert cert.verification.verified


def test_dropping_a_generator_is_refuted(cyclic_pair):
    p, cert = cyclic_pair
    smaller = cert.without(0)
    assert smaller.size == 1
    result = verify_certificate(smaller, p, settings=FAST_SETTINGS)
    assert result.status == REFUTED
    assert "|X| = 1" in result.reason


def test_certificates_survive_serialisation(cyclic_pair):
    p, cert = cyclic_pair
    restored = certificate_from_dict(cert.to_dict())
    assert restored.verification is None
    assert restored.generators == cert.generators
    assert verify_certificate(restored, p, settings=FAST_SETTINGS).status == VERIFIED
    data = cert.to_dict()
    del data["exponent"]
    with pytest.raises(ProblemSchemaError):
        certificate_from_dict(data)


def test_synthesis_for_cyclic_times_z_relations(relation_pair):
    p, cert = relation_pair
    assert cert.size == 3
    assert cert.factor_exponents == (4, 9)
    assert cert.exponent == 36
    assert cert.provenance["slack"] == 1
    assert cert.provenance["layers"] == {"2": 1, "3": 1}
    assert cert.factor_generators == ((0,), (1,))
    assert cert.verification is None


def test_verification_windows(relation_pair):
    p, cert = relation_pair
    assert verify_certificate(cert, p, depth_cap=0).status == INCOMPLETE
    assert verify_certificate(cert.without(2), p, depth_cap=0).status == REFUTED


def test_cyclic_times_z_relation_certificate_verifies(relation_pair):
    p, cert = relation_pair
    start = time.perf_counter()
    result = verify_certificate(cert, p, depth_cap=6)
    assert result.status == VERIFIED
    assert time.perf_counter() - start < 10
    assert all(w is not None and w <= 6 for w in result.exponent_windows)
    assert all(w is not None and w <= 6 for w in result.prime_windows.values())
    assert set(result.prime_windows) == {2, 3}


def test_mixed_augmentation_synthesis():
    cert = synthesize_generators(problem(["C2xZ", "C3"]), FAST_SETTINGS, verify=False)
    assert cert.size == 3
    assert cert.claimed == 3
    assert cert.provenance["slack"] == 1


def test_explicit_generators_of_infinite_factors():
    relation = infinite_factor_generators(CyclicTimesZFactor(2), "relation")
    assert relation.size == 1
    assert relation.exponent == 4
    assert set(relation.residuals) == {2}
    augmentation = infinite_factor_generators(parse_factor("C2xZ"), "augmentation", settings=FAST_SETTINGS)
    assert augmentation.size == 1
    assert augmentation.exponent % 4 == 0
    assert all(augmentation.module.contains(x) for x in augmentation.elements)
    with pytest.raises(HypothesisViolation):
        infinite_factor_generators(parse_factor("C2"), "augmentation")


def test_identity_suite():
    checks = identity_suite(orders=(2,), primes=(5,), settings=DEFAULT_SETTINGS)
    names = [c.name for c in checks]
    assert "augmentation identity, C6" in names
    assert "literal z residual, C2" in names
    failing = [c.to_dict() for c in checks if not c.holds]
    assert failing == []


def test_factor_modules_must_implement_the_whole_interface():
    class Partial(FactorModule):
        def identity(self):
            return 0

    with pytest.raises(TypeError):
        Partial()
    p = problem(["C2", "C3"])
    assert isinstance(factor_module(p, 0), FactorModule)
