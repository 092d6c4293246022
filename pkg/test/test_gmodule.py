import numpy as np
import pytest
from gengap.builders import augmentation_lattice, relation_lattice_of
from gengap.errors import HypothesisViolation, InvalidTargetError
from gengap.gmodule import (
    FiniteZGModule,
    FpGModule,
    brute_force_d,
    composition_factors,
    composition_series,
    d_rational,
    decompose_semisimple,
    extend_generating_set,
    hom_dimension,
    is_isomorphic_simple,
    is_semisimple,
    min_generators_module,
    minimal_generating_set,
    quotient_structure,
    radical,
    radical_by_homs,
    regular_module,
    reorder_series,
    simple_modules,
    simple_multiplicities,
    top,
    trivial_module,
)
from gengap.config import DEFAULT_SETTINGS
from gengap.groups import abelian, alternating4, cyclic, dihedral, quaternion8, symmetric3
from hypothesis import given, settings
from hypothesis import strategies as st

BRUTE_FORCE_CAP = DEFAULT_SETTINGS.brute_force_cap


def direct_sum(*modules: FpGModule) -> FpGModule:
    group, p = modules[0].group, modules[0].p
    dim = sum(m.dim for m in modules)
    actions = []
    for k in range(len(group.generators)):
        a = np.zeros((dim, dim), dtype=np.int64)
        offset = 0
        for m in modules:
            a[offset : offset + m.dim, offset : offset + m.dim] = m.actions[k]
            offset += m.dim
        actions.append(a)
    return FpGModule(group, p, dim, tuple(actions))


def sign_module(p: int) -> FpGModule:
    return FpGModule(cyclic(2), p, 1, (np.array([[p - 1]]),))


def test_regular_module_is_cyclic():
    for group, p in [(cyclic(3), 2), (cyclic(4), 2), (abelian([2, 2]), 3), (symmetric3(), 3)]:
        module = regular_module(group, p)
        module.validate()
        assert min_generators_module(module) == 1


def test_trivial_modules_need_one_generator_per_dimension():
    assert min_generators_module(trivial_module(cyclic(3), 3, 2)) == 2
    assert min_generators_module(trivial_module(cyclic(3), 2, 3)) == 3
    assert brute_force_d(trivial_module(cyclic(3), 3, 2), BRUTE_FORCE_CAP) == 2


def test_simple_modules_of_c3_over_f2():
    simples = simple_modules(cyclic(3), 2)
    assert sorted(s.dim for s in simples) == [1, 2]
    regular = regular_module(cyclic(3), 2)
    assert is_semisimple(regular)
    assert sorted(b.rows for b in decompose_semisimple(regular)) == [1, 2]
    assert [m for _, m in simple_multiplicities(regular)] == [1, 1]


def test_radical_and_top_in_characteristic_dividing_the_order():
    regular = regular_module(cyclic(3), 3)
    assert radical(regular).rows == 2
    assert top(regular).dim == 1
    assert not is_semisimple(regular)
    with pytest.raises(HypothesisViolation):
        decompose_semisimple(regular)


@pytest.mark.parametrize(
    "group, p, dims",
    [(symmetric3(), 2, [1, 2]), (dihedral(6), 2, [1, 2]), (alternating4(), 3, [1, 3])],
)
def test_simple_modules_without_a_normal_sylow_subgroup(group, p, dims):
    simples = simple_modules(group, p)
    assert sorted(s.dim for s in simples) == dims
    for s in simples:
        s.validate()
        assert is_semisimple(s)
    regular = regular_module(group, p)
    assert sum(f.dim for f in composition_factors(regular)) == group.order
    assert min_generators_module(regular) == 1


def test_radical_of_s3_over_f2():
    regular = regular_module(symmetric3(), 2)
    # F_2S3 = F_2C2 + M_2(F_2), with radical spanned by the sum of the group elements
    rad = radical(regular)
    assert rad.entries.tolist() == [[1] * 6]
    assert top(regular).dim == 5
    assert sorted(f.dim for f in composition_factors(regular)) == [1, 1, 2, 2]
    assert radical_by_homs(regular_module(dihedral(4), 2)).rows == 7


def test_hom_and_dual():
    regular = regular_module(cyclic(2), 3)
    assert hom_dimension(regular, trivial_module(cyclic(2), 3)) == 1
    assert hom_dimension(regular, sign_module(3)) == 1
    assert not is_isomorphic_simple(trivial_module(cyclic(2), 3), sign_module(3))
    dual = regular.dual()
    dual.validate()
    assert min_generators_module(dual) == 1


def test_quotient_and_submodule():
    regular = regular_module(cyclic(2), 3)
    basis = regular.spin([np.array([1, 1])])
    assert basis.rows == 1
    assert regular.submodule(basis).dim == 1
    assert regular.quotient(basis).module.dim == 1


def test_greedy_generating_sets():
    module = direct_sum(trivial_module(cyclic(2), 3, 2), sign_module(3))
    generators = minimal_generating_set(module)
    assert len(generators) == 2
    assert module.spin(generators).rows == module.dim
    extra = extend_generating_set(module, [np.array([1, 0, 1])])
    assert len(extra) == 1


CASES = [
    (group, p, kind)
    for group in (cyclic(2), cyclic(3), cyclic(4), abelian([2, 2]), cyclic(6))
    for p in (2, 3)
    for kind in ("regular", "augmentation", "relation")
] + [
    (group, p, kind)
    for group, p in ((symmetric3(), 3), (symmetric3(), 2), (dihedral(4), 2), (quaternion8(), 2))
    for kind in ("regular", "augmentation")
]


def _module(group, p, kind) -> FpGModule:
    if kind == "regular":
        return regular_module(group, p)
    if kind == "augmentation":
        return augmentation_lattice(group).mod_p(p)
    return relation_lattice_of(group).lattice.mod_p(p)


@pytest.mark.parametrize("group, p, kind", CASES)
def test_radical_method_matches_brute_force(group, p, kind):
    module = _module(group, p, kind)
    if p**module.dim > BRUTE_FORCE_CAP:
        pytest.skip("beyond the enumeration cap")
    assert min_generators_module(module) == brute_force_d(module, BRUTE_FORCE_CAP)


@given(st.data())
@settings(max_examples=15, deadline=None)
def test_direct_sums_match_brute_force(data):
    group = data.draw(st.sampled_from([cyclic(2), cyclic(3), abelian([2, 2])]))
    p = data.draw(st.sampled_from([2, 3]))
    regular = data.draw(st.integers(0, 1))
    trivial = data.draw(st.integers(0 if regular else 1, 3))
    parts = [regular_module(group, p)] * regular + ([trivial_module(group, p, trivial)] if trivial else [])
    module = direct_sum(*parts)
    if p**module.dim > BRUTE_FORCE_CAP:
        return
    assert min_generators_module(module) == brute_force_d(module, BRUTE_FORCE_CAP)


def test_lattice_generator_counts():
    assert d_rational(augmentation_lattice(cyclic(6))) == 1
    klein = augmentation_lattice(abelian([2, 2]))
    assert klein.rank == 3
    klein.validate()
    assert min_generators_module(klein.mod_p(2)) == 2
    assert d_rational(relation_lattice_of(abelian([2, 2])).lattice) == 2


def test_quotient_structure():
    lattice = augmentation_lattice(cyclic(2))
    assert quotient_structure(lattice, [[1]]).is_trivial
    two = quotient_structure(lattice, [[2]])
    assert two.invariant_factors == (2,)
    assert two.exponent == 2
    assert two.primes == (2,)
    assert quotient_structure(lattice, []).exponent == 0


def _swap_module() -> FiniteZGModule:
    return FiniteZGModule.from_invariants(cyclic(2), [3, 3], [[[0, 1], [1, 0]]])


def test_composition_series_of_a_coprime_module():
    module = _swap_module()
    assert module.size == 9
    series = composition_series(module)
    assert len(series.factors) == 2
    trivial, sign = trivial_module(cyclic(2), 3), sign_module(3)
    assert sorted(is_isomorphic_simple(f, trivial) for f in series.factors) == [False, True]
    assert any(is_isomorphic_simple(f, sign) for f in series.factors)


def test_reordered_composition_series():
    module = _swap_module()
    trivial, sign = trivial_module(cyclic(2), 3), sign_module(3)
    for target in ([trivial, sign], [sign, trivial]):
        series = reorder_series(module, target)
        assert all(is_isomorphic_simple(f, t) for f, t in zip(series.factors, target))
        assert module.order(series.chain[-1]) == 1
    with pytest.raises(InvalidTargetError):
        reorder_series(module, [trivial, trivial])


def test_finite_modules_of_non_coprime_order_are_rejected():
    module = FiniteZGModule.from_invariants(cyclic(2), [2], [[[1]]])
    with pytest.raises(HypothesisViolation):
        composition_series(module)
