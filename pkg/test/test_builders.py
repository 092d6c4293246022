import pytest
from gengap.builders import (
    ResolutionSpec,
    augmentation_basis,
    augmentation_lattice,
    boundary_matrix,
    complete_generators,
    cyclic_resolution,
    good_prime,
    relation_lattice_of,
    resolution_kernel,
    resolution_rational_count,
    swan_witness,
)
from gengap.config import FAST_SETTINGS
from gengap.errors import HypothesisViolation, InvalidResolutionError
from gengap.gmodule import FiniteZGModule, d_rational, min_generators_module, quotient_structure
from gengap.gring import GroupRingElement
from gengap.groups import abelian, cyclic, symmetric3


@pytest.mark.parametrize("group", [cyclic(2), cyclic(5), abelian([2, 2]), symmetric3()])
def test_augmentation_lattice(group):
    lattice = augmentation_lattice(group)
    assert lattice.rank == group.order - 1
    assert len(augmentation_basis(group)) == group.order - 1
    lattice.validate()
    assert all(sum(row) == 0 for row in lattice.embedding.tolist())


@pytest.mark.parametrize("orders, rank, d_mod_2", [([2], 1, 1), ([4], 1, 1), ([2, 2], 5, 3)])
def test_relation_lattices(orders, rank, d_mod_2):
    relation = relation_lattice_of(abelian(orders))
    assert relation.rank == rank
    assert relation.euler_defect() == 0
    assert len(relation.fox_images) == len(relation.presentation.relators)
    assert min_generators_module(relation.lattice.mod_p(2)) == d_mod_2


def test_boundary_matrix_maps_onto_the_augmentation_ideal():
    presentation = relation_lattice_of(cyclic(3)).presentation
    matrix = boundary_matrix(presentation)
    assert matrix.shape == (3, 3)
    assert all(sum(row) == 0 for row in matrix.tolist())


def test_cyclic_resolution_kernels():
    spec = cyclic_resolution(cyclic(3), 4)
    spec.check_exact(4)
    first = resolution_kernel(spec, 1)
    assert first.rank == 1
    assert resolution_rational_count(spec, 1) == d_rational(first) == 1
    second = resolution_kernel(spec, 2)
    assert second.rank == 2
    assert resolution_rational_count(spec, 2) == 1
    with pytest.raises(InvalidResolutionError):
        resolution_kernel(spec, 0)
    with pytest.raises(HypothesisViolation):
        cyclic_resolution(abelian([2, 2]), 2)


def test_inexact_resolution_is_rejected():
    group = cyclic(3)
    ghat = GroupRingElement.ghat(group)
    spec = ResolutionSpec(group, (1,), (((ghat,),),), period=2)
    with pytest.raises(InvalidResolutionError):
        spec.check_exact(1)
    with pytest.raises(InvalidResolutionError):
        spec.integer_boundary(2)


def test_good_prime():
    assert good_prime(cyclic(6)) == 5
    module = FiniteZGModule.from_invariants(cyclic(2), [5], [[[1]]])
    assert good_prime(cyclic(2), module) == 3
    assert good_prime(cyclic(3), module) == 2


def test_swan_witness_for_cyclic_augmentation():
    lattice = augmentation_lattice(cyclic(6))
    witness = swan_witness(lattice, settings=FAST_SETTINGS)
    assert witness.prime in (2, 3)
    assert witness.size == 1
    assert witness.d_values == {2: 1, 3: 1, 5: 1}
    assert quotient_structure(lattice, witness.generators).is_trivial


def test_swan_witness_at_explicit_primes():
    lattice = relation_lattice_of(abelian([2, 2])).lattice
    witness = swan_witness(lattice, [2, 3], FAST_SETTINGS)
    assert witness.d_values[2] == 3
    assert witness.d_values[3] == 2
    assert witness.prime == 2
    assert witness.found == {2: True}
    assert quotient_structure(lattice, witness.generators).is_trivial


def test_complete_generators():
    lattice = augmentation_lattice(abelian([2, 2]))
    extra = complete_generators(lattice, [[1, 0, 0]], 2, budget=FAST_SETTINGS.candidate_budget)
    assert len(extra) == 1
    module = lattice.mod_p(2)
    assert module.spin([[1, 0, 0]] + extra).rows == module.dim
