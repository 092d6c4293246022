import pytest
from gengap.errors import GroupConstructionError, HypothesisViolation, ProblemSchemaError, RefusedComputation
from gengap.formulas import (
    FreeProductProblem,
    augmentation_count_mod_p,
    bergman_table,
    bridson_q,
    bridson_tweedale,
    coprime_augmentation,
    coprime_relation,
    d_induced,
    gap_zero_by_quotient,
    generic_values,
    mixed_augmentation,
    mixed_relation,
    nilpotent_gap_zero,
    parse_factor,
    relation_generator_count,
    resolution_kernel_count,
    split_factors,
)
from gengap.groups import (
    ALL_PRIMES,
    CyclicTimesZFactor,
    FiniteFactor,
    NilpotentProductFactor,
    dihedral,
    min_generators_group,
    symmetric3,
)


def problem(factors, module="augmentation"):
    return FreeProductProblem.from_dict({"factors": split_factors(factors), "module": module})


def test_split_factors():
    assert split_factors("C2xZ * Nil(C2xC2,rank=2), C3") == ["C2xZ", "Nil(C2xC2,rank=2)", "C3"]
    assert split_factors("C2,,C3") == ["C2", "C3"]


def test_parse_factor():
    assert isinstance(parse_factor("C6"), FiniteFactor)
    assert parse_factor("C6").group.order == 6
    assert parse_factor("C5xZ") == CyclicTimesZFactor(5)
    z = parse_factor("Z")
    assert isinstance(z, NilpotentProductFactor) and z.rank == 1 and z.group.order == 1
    nil = parse_factor("Nil(C2xC2, rank=2)")
    assert nil.rank == 2 and nil.group.order == 4
    klein_z = parse_factor("C2xC2xZ")
    assert isinstance(klein_z, NilpotentProductFactor) and klein_z.rank == 1
    with pytest.raises(ProblemSchemaError):
        parse_factor("D4")


def test_augmentation_counts_for_groups_with_non_normal_sylow_subgroups():
    assert augmentation_count_mod_p(symmetric3(), 0, 2) == 1
    assert augmentation_count_mod_p(symmetric3(), 1, 2) == 2
    assert augmentation_count_mod_p(symmetric3(), 0, 3) == 2
    assert augmentation_count_mod_p(dihedral(6), 0, 2) == 2


@pytest.mark.parametrize(
    "data, error",
    [
        ({"module": "relation"}, ProblemSchemaError),
        ({"factors": ["C2"], "module": "tensor"}, ProblemSchemaError),
        ({"factors": ["C2"], "module": {"kernel": 0}}, ProblemSchemaError),
        ({"factors": ["C2"], "module": {"cokernel": 1}}, ProblemSchemaError),
        ({"factors": []}, ProblemSchemaError),
        ({"factors": ["C1", "C2"]}, GroupConstructionError),
        ({"factors": ["Z"], "presentations": {"0": {"generators": ["x"], "relators": []}}}, ProblemSchemaError),
    ],
)
def test_malformed_problems(data, error):
    with pytest.raises(error):
        FreeProductProblem.from_dict(data)


def test_problem_description_and_support():
    p = FreeProductProblem.from_dict({"factors": ["C2", "C3xZ"], "module": {"kernel": 3}})
    assert p.module == "kernel" and p.stage == 3
    assert p.describe() == "C2 * C3xZ (kernel[3])"
    assert p.support() == [2, 3, 5]


def test_d_induced_for_cyclic_times_z_relations():
    report = d_induced(problem("C2xZ,C3xZ", "relation"))
    assert report.value == 3
    assert report.table == {2: 3, 3: 3, 5: 2}
    assert report.argmax == (2, 3)
    assert report.to_dict()["table"] == {"2": 3, "3": 3, "5": 2}


def test_generic_values():
    assert generic_values(problem("C2,C3")) == [1, 1]
    assert generic_values(problem("C2xZ,C3xZ", "relation")) == [1, 1]
    assert bergman_table(problem("C2,C3")) == {2: 2, 3: 2, 5: 2}


def test_coprime_augmentation():
    report = coprime_augmentation(problem("C2,C3"))
    assert report.value == 2
    assert report.derived["gap"] == 0
    klein_nonic = coprime_augmentation(problem("C2xC2,C3xC3"))
    assert klein_nonic.value == 3
    assert klein_nonic.derived["gap"] == 1
    assert not klein_nonic.derived["criterion"]
    with pytest.raises(HypothesisViolation):
        coprime_augmentation(problem("C2,C4"))
    with pytest.raises(HypothesisViolation):
        coprime_augmentation(problem("C2,C3xZ"))


def test_coprime_relation():
    assert coprime_relation(problem("C2,C3", "relation")).value == 2
    report = coprime_relation(problem("C2xC2,C3xC3", "relation"))
    assert report.value == 5
    assert report.derived["d_free"] == 4
    assert report.derived["adef"] == 1
    assert coprime_relation(problem("C2xC2,C3xC3,C5xC5", "relation")).value == 7


# d_{G_k}(ΔG_k) and adef(G_k) for the natural presentations
SINGLE_FACTOR = {"C2": (1, 0), "C3": (1, 0), "C5": (1, 0), "C2xC2": (2, 1), "C3xC3": (2, 1)}
COPRIME_INSTANCES = [
    "C2,C3", "C2,C5", "C3,C5", "C2,C3xC3", "C5,C3xC3", "C2xC2,C3", "C2xC2,C5", "C2xC2,C3xC3",
    "C2,C3,C5", "C2xC2,C3,C5", "C2,C3xC3,C5", "C2xC2,C3xC3,C5",
]


@pytest.mark.parametrize("factors", COPRIME_INSTANCES)
def test_coprime_corpus(factors):
    names = split_factors(factors)
    augmentation = coprime_augmentation(problem(factors))
    assert augmentation.value == max(SINGLE_FACTOR[f][0] for f in names) + len(names) - 1
    assert augmentation.value == d_induced(problem(factors)).value
    relation = coprime_relation(problem(factors, "relation"))
    assert relation.derived["component_adef"] == [SINGLE_FACTOR[f][1] for f in names]
    assert relation.derived["adef"] == max(SINGLE_FACTOR[f][1] for f in names)
    assert relation.value == d_induced(problem(factors, "relation")).value


@pytest.mark.parametrize(
    "factors, gap",
    [
        ("C2,C3", 0),
        ("C2xC2,C3", 0),
        ("C2xC2,C3xC3", 1),
        ("C2,C3,C5", 0),
        ("C2xC2,C3xC3,C5", 1),
        ("C2xC2,C3,C5xC5", 1),
        ("C2xZ,C3", 0),
        ("C2xZ,C3xZ", 1),
        ("Z,C2xC2", 0),
        ("C2xZ,C3xC3", 1),
        ("C5,C2xC2xZ", 0),
        ("C3xC3xZ,C2xZ,C5", 1),
    ],
)
def test_gap_zero_verdicts(factors, gap):
    factor_specs = [parse_factor(f) for f in split_factors(factors)]
    d_group = sum(min_generators_group(f) for f in factor_specs)
    assert d_group - d_induced(problem(factors)).value == gap
    assert nilpotent_gap_zero(factor_specs).criterion_met == (gap == 0)


def test_resolution_kernel_count():
    p = FreeProductProblem.from_dict({"factors": ["C2", "C3"], "module": {"kernel": 1}})
    report = resolution_kernel_count(p)
    assert report.value == 2
    assert report.derived["rational_counts"] == [1, 1]
    with pytest.raises(HypothesisViolation):
        resolution_kernel_count(p, 2)


@pytest.mark.parametrize("factors, value, gap", [("C2xZ,C3", 3, 0), ("C2xZ,C3xZ", 3, 1), ("C2,C3", 2, 0)])
def test_mixed_augmentation(factors, value, gap):
    report = mixed_augmentation(problem(factors))
    assert report.value == value
    assert report.derived["gap"] == gap
    assert report.value == d_induced(problem(factors)).value


def test_mixed_relation():
    report = mixed_relation(problem("C2xZ,C3xZ", "relation"))
    assert report.value == 3
    assert report.derived["d_free"] == 4
    with pytest.raises(HypothesisViolation):
        mixed_relation(problem("C2xZ,C3", "relation"))
    with pytest.raises(HypothesisViolation):
        mixed_relation(problem("C2xZ,C4xZ", "relation"))


def test_nilpotent_gap_criterion():
    met = nilpotent_gap_zero([parse_factor(f) for f in ("C2xC2", "Z", "C3")])
    assert met.criterion_met
    assert met.exceptional == (0,)
    assert met.prime == 2
    assert met.shared == (0, 1)
    assert max(met.table.values()) == 4
    assert met.to_dict()["gap"] == 0
    failed = nilpotent_gap_zero([parse_factor(f) for f in ("C2xC2", "C3xC3")])
    assert not failed.criterion_met
    assert failed.exceptional == (0, 1)


def test_gap_zero_by_quotient():
    report = gap_zero_by_quotient(parse_factor("C2xC2"))
    assert report.d_group == 2
    assert report.quotient_ranks == {2: 2, 3: 0}
    assert report.generating_primes == (2,)
    assert gap_zero_by_quotient(parse_factor("Z")).generating_primes is ALL_PRIMES


def test_bridson_tweedale():
    assert (bridson_q(2), bridson_q(3)) == (8, 63)
    report = bridson_tweedale([2, 3])
    assert report.value == 3
    assert report.table == {2: 3, 3: 3, 5: 2}
    assert report.derived["c"] == {"2": 16, "3": 189}
    with pytest.raises(HypothesisViolation):
        bridson_tweedale([2, 4])
    with pytest.raises(HypothesisViolation):
        bridson_tweedale([1])
    with pytest.raises(ProblemSchemaError):
        bridson_tweedale([])


def test_normal_generator_counts_are_refused():
    with pytest.raises(RefusedComputation):
        relation_generator_count(problem("C2,C3", "relation"))
