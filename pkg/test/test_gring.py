import pytest
from gengap.errors import MixedOperandsError, ProblemSchemaError, UndeclaredGeneratorError
from gengap.gring import (
    CyclicTimesCRelations,
    GroupRingElement,
    IdentityContext,
    LaurentGroupRingElement,
    augmentation_identity_residual,
    cyclic_times_c_target,
    divide_by_c_minus_one,
    evaluate_expression,
    fox_derivative,
    fox_image,
    verify_identity,
)
from gengap.groups import Word, abelian, cyclic, symmetric3


def test_group_ring_arithmetic():
    group = cyclic(3)
    a = GroupRingElement.of(group, group.generator("a"))
    ghat = GroupRingElement.ghat(group)
    assert ((a - GroupRingElement.one(group)) * ghat).is_zero()
    assert ghat * ghat == ghat * 3
    assert (ghat * 3).augment() == 9
    assert (GroupRingElement.ghat(group, 3) * GroupRingElement.ghat(group, 3)).is_zero()
    with pytest.raises(MixedOperandsError):
        ghat + GroupRingElement.ghat(group, 3)
    with pytest.raises(ValueError):
        GroupRingElement(group, (1, 0))


def test_non_abelian_group_ring_is_not_commutative():
    group = symmetric3()
    x, y = (GroupRingElement.of(group, g) for g in group.generators[:2])
    assert x * y != y * x


def test_laurent_arithmetic():
    group = cyclic(2)
    c, c_inv = LaurentGroupRingElement.c_power(group, 1), LaurentGroupRingElement.c_power(group, -1)
    assert c * c_inv == LaurentGroupRingElement.integer(group, 1)
    ghat = LaurentGroupRingElement.ghat(group)
    assert (ghat * (c - 1)).augment() == 0
    assert (ghat * (c - 1)).coinvariants().is_zero()
    assert (ghat * (c - 1)).group_part_augmentation() == {(1,): 2, (0,): -2}
    assert (c * 2 + c_inv * c_inv * c_inv).exponent_span() == 3
    assert (ghat * 3).reduce_mod(3).is_zero()
    assert str(LaurentGroupRingElement.zero(group)) == "0"
    with pytest.raises(ValueError):
        LaurentGroupRingElement.from_dict(group, {(0, (1, 0)): 1})
    with pytest.raises(MixedOperandsError):
        ghat + LaurentGroupRingElement.ghat(group, rank=2)


def test_fox_derivatives_of_a_power():
    target = cyclic_times_c_target(3)
    ghat = LaurentGroupRingElement.ghat(target.group)
    word = Word.power_of("x", 3)
    assert fox_derivative(word, "x", target, "left") == ghat
    assert fox_derivative(word, "x", target, "right") == ghat
    assert fox_derivative(word, "c", target).is_zero()
    with pytest.raises(UndeclaredGeneratorError):
        fox_derivative(word, "y", target)
    with pytest.raises(ValueError):
        fox_derivative(word, "x", target, "middle")


@pytest.mark.parametrize("side", ["left", "right"])
@pytest.mark.parametrize("text", ["x^2 c X C", "x^3", "c x c X X"])
def test_fundamental_formula(side, text):
    image = fox_image(Word.parse(text), ("x", "c"), cyclic_times_c_target(3), side)
    assert image.fundamental_residual().is_zero()


@pytest.mark.parametrize("n", [2, 3, 4])
def test_cyclic_times_c_relations(n):
    relations = CyclicTimesCRelations(n)
    assert relations.contains(relations.u)
    assert relations.contains(relations.w)
    assert relations.contains(relations.z())
    residual = relations.literal_z_residual() - relations.u * (1 - relations.c(1)) * (1 - relations.c(1)) * n
    assert residual.is_zero()


@pytest.mark.parametrize("n", [2, 3])
def test_sigma_undoes_the_averaged_section(n):
    relations = CyclicTimesCRelations(n)
    for j in range(1, n):
        for i in (0, 1):
            v = (relations.ring(relations.group.power(relations.a, j)) - 1) * relations.c(i)
            assert relations.sigma(relations.tau(v)) == v
            assert relations.sigma(relations.tau_hat(v)) == v * n
    with pytest.raises(ValueError):
        relations.tau(relations.one())


def test_psi_lies_in_s_times_delta_c():
    relations = CyclicTimesCRelations(2)
    v = relations.ring(relations.a) - 1
    for g in range(relations.group.order):
        assert relations.lies_in_s_times_delta_c(relations.psi(g, v))


def test_divide_by_c_minus_one():
    group = cyclic(3)
    c = LaurentGroupRingElement.c_power(group, 1)
    q = LaurentGroupRingElement.ghat(group) * c * c + LaurentGroupRingElement.monomial(group, 1, (-1,), 5)
    assert divide_by_c_minus_one(q * (c - 1)) * (c - 1) == q * (c - 1)
    assert divide_by_c_minus_one(c) is None
    with pytest.raises(ValueError):
        divide_by_c_minus_one(LaurentGroupRingElement.zero(group, rank=2))


@pytest.mark.parametrize("group", [cyclic(2), cyclic(5), abelian([2, 2])])
def test_augmentation_identity(group):
    x = LaurentGroupRingElement.monomial(group, group.generators[0]) - 1
    assert augmentation_identity_residual(group, x).is_zero()


def test_expressions():
    context = IdentityContext(cyclic(3))
    ghat = evaluate_expression({"mul": [{"gen": "a"}, {"ghat": True}]}, context)
    assert ghat == LaurentGroupRingElement.ghat(cyclic(3))
    vector = evaluate_expression({"mul": [{"c": 1}, {"vec": [1, {"gen": "a"}]}]}, context)
    assert len(vector) == 2
    bound = IdentityContext(cyclic(3), bindings={"v": ghat})
    assert evaluate_expression({"neg": {"var": "v"}}, bound) == -ghat


def test_verify_identity():
    context = IdentityContext(cyclic(3))
    result = verify_identity({"mul": [{"sub": [{"gen": "a"}, 1]}, {"ghat": True}]}, 0, context)
    assert result.holds
    result = verify_identity({"add": [{"gen": "a"}, {"c": 1}]}, {"int": 2}, context)
    assert not result.holds
    assert not result.residue.is_zero()
    with pytest.raises(MixedOperandsError):
        verify_identity({"vec": [1, 0]}, 1, context)


@pytest.mark.parametrize(
    "expr",
    [
        {"foo": [1]},
        {"var": "z"},
        {"sub": [1, 2, 3]},
        {"add": []},
        {"mul": [{"vec": [1, 0]}, {"vec": [0, 1]}]},
        [1, 2],
    ],
)
def test_malformed_expressions(expr):
    with pytest.raises(ProblemSchemaError):
        evaluate_expression(expr, IdentityContext(cyclic(3)))
