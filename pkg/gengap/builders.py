"""The canonical lattices of a finite group: augmentation ideals, relation modules and resolution kernels.

Everything is realised inside a free module ZG^k, coordinate s·|G| + g standing for e_s·g.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from gengap.config import DEFAULT_SETTINGS, Settings
from gengap.errors import HypothesisViolation, InvalidResolutionError, ShapeMismatchError
from gengap.exactla import IntegerSolver, IntMatrix, as_int_matrix, hermite_normal_form, integer_kernel, int_matmul, int_zeros
from gengap.gmodule import (
    FiniteZGModule,
    ZGLattice,
    d_rational,
    extend_generating_set,
    min_generators_module,
    minimal_generating_set,
    quotient_structure,
)
from gengap.gring import FoxVector, GroupRingElement, TargetMap, fox_image
from gengap.groups import FiniteGroup, Presentation, crt_units, natural_presentation, primes_of, smallest_prime_outside
from loguru import logger


def augmentation_basis(group: FiniteGroup) -> List[List[int]]:
    """Rows g - 1 for g != 1, as vectors of ZG."""
    rows = []
    for g in range(group.order):
        if g == group.identity:
            continue
        row = [0] * group.order
        row[g] += 1
        row[group.identity] -= 1
        rows.append(row)
    return rows


def augmentation_lattice(group: FiniteGroup) -> ZGLattice:
    """ΔG with basis {g - 1 : g != 1}."""
    rows = augmentation_basis(group)
    if not rows:
        return ZGLattice(group, 0, (), int_zeros(0, group.order))
    return ZGLattice.from_sublattice(group, rows, 1)


# --------------------------------------------------------------------------- relation modules


@dataclass(frozen=True, eq=False)
class RelationLattice:
    lattice: ZGLattice
    presentation: Presentation
    fox_images: Tuple[FoxVector, ...] = field(repr=False)

    @property
    def embedding(self) -> IntMatrix:
        return self.lattice.embedding

    @property
    def rank(self) -> int:
        return self.lattice.rank

    def euler_defect(self) -> int:
        """rank(R̄) - d(F)|G| + (|G| - 1); zero for every presentation of a finite group."""
        n = self.presentation.target.order
        return self.rank - self.presentation.rank * n + (n - 1)


def boundary_matrix(presentation: Presentation) -> IntMatrix:
    """Integer matrix of ZG^{d(F)} -> ZG, e_x·g -> (x̄ - 1)g."""
    group = presentation.target
    n = group.order
    rows = []
    for x in presentation.generators:
        image = presentation.image(x)
        for g in range(n):
            row = [0] * n
            row[group.mul(image, g)] += 1
            row[g] -= 1
            rows.append(row)
    return as_int_matrix(rows, n)


def finite_target(presentation: Presentation) -> TargetMap:
    images = {x: (presentation.image(x), ()) for x in presentation.generators}
    return TargetMap(presentation.target, images, rank=0)


def fox_vector_coordinates(vector: FoxVector) -> List[int]:
    """A vector of ZG^d (no Laurent variables) as a flat integer list."""
    group = vector.components[0].group
    out = [0] * (len(vector) * group.order)
    for s, component in enumerate(vector.components):
        for (g, exps), a in component.terms:
            if any(exps):
                raise ShapeMismatchError("vector involves Laurent variables")
            out[s * group.order + g] += a
    return out


def relation_lattice(presentation: Presentation) -> RelationLattice:
    """R̄ = R/R' as the integer kernel of ZG^{d(F)} -> ΔG, checked against the Fox images of the relators."""
    group = presentation.target
    kernel = integer_kernel(boundary_matrix(presentation))
    lattice = ZGLattice.from_sublattice(group, kernel, presentation.rank)
    expected = presentation.rank * group.order - group.order + 1
    if lattice.rank != expected:
        raise HypothesisViolation(f"relation lattice has rank {lattice.rank}, expected {expected}")
    target = finite_target(presentation)
    solver = IntegerSolver(kernel)
    images = []
    for relator in presentation.relators:
        image = fox_image(relator, presentation.generators, target, side="right")
        if solver.solve(fox_vector_coordinates(image.vector)) is None:
            raise HypothesisViolation(f"Fox image of {relator} is not in the relation lattice")
        images.append(image.vector)
    logger.debug(f"relation lattice of {group.name} on {presentation.rank} generators has rank {lattice.rank}")
    return RelationLattice(lattice, presentation, tuple(images))


def relation_lattice_of(group: FiniteGroup, presentation: Optional[Presentation] = None) -> RelationLattice:
    return relation_lattice(presentation if presentation is not None else natural_presentation(group))


# --------------------------------------------------------------------------- free resolutions


@dataclass(frozen=True)
class ResolutionSpec:
    """... -> ZG^{f_2} -> ZG^{f_1} -> ΔG -> 0, boundaries[j - 1] being the f_j x f_{j-1} matrix of θ_j over ZG (f_0 = 1).

    The row vector v of ZG^{f_j} is sent to v·θ_j, so e_i -> sum_k t_ik e_k with t_ik acting by left multiplication.
    """

    group: FiniteGroup
    ranks: Tuple[int, ...]
    boundaries: Tuple[Tuple[Tuple[GroupRingElement, ...], ...], ...]
    period: Optional[int] = None  # cohomological period, when known

    def __post_init__(self) -> None:
        if len(self.ranks) != len(self.boundaries):
            raise ShapeMismatchError("one boundary matrix per free module")
        previous = 1
        for f, theta in zip(self.ranks, self.boundaries):
            if len(theta) != f or any(len(row) != previous for row in theta):
                raise ShapeMismatchError(f"boundary into ZG^{previous} from ZG^{f} has the wrong shape")
            previous = f

    @property
    def stages(self) -> int:
        return len(self.ranks)

    def integer_boundary(self, s: int) -> IntMatrix:
        """The Z-matrix of θ_s: row (i, g) has coefficient t_ik[h] in column (k, h·g)."""
        if not 1 <= s <= self.stages:
            raise InvalidResolutionError(f"stage {s} outside 1..{self.stages}")
        group, n = self.group, self.group.order
        theta = self.boundaries[s - 1]
        target_rank = 1 if s == 1 else self.ranks[s - 2]
        rows = []
        for i in range(self.ranks[s - 1]):
            for g in range(n):
                row = [0] * (target_rank * n)
                for k in range(target_rank):
                    for h, t in enumerate(theta[i][k].coeffs):
                        if t:
                            row[k * n + group.mul(h, g)] += t
                rows.append(row)
        return as_int_matrix(rows, target_rank * n)

    def check_exact(self, s: int) -> None:
        """Exactness at every stage up to s: image θ_1 = ΔG and image θ_{j+1} = ker θ_j."""
        group = self.group
        first = hermite_normal_form(self.integer_boundary(1), group.order)
        if not np.array_equal(first, hermite_normal_form(augmentation_basis(group), group.order)):
            raise InvalidResolutionError("image of θ_1 is not the augmentation ideal")
        for j in range(1, min(s - 1, self.stages - 1) + 1):
            theta, following = self.integer_boundary(j), self.integer_boundary(j + 1)
            if any(x != 0 for row in int_matmul(following, theta).tolist() for x in row):
                raise InvalidResolutionError(f"θ_{j + 1}·θ_{j} is not zero")
            kernel = integer_kernel(theta)
            image = hermite_normal_form(following, theta.shape[0])
            if not np.array_equal(kernel, image):
                raise InvalidResolutionError(f"resolution is not exact at stage {j}")


def cyclic_resolution(group: FiniteGroup, stages: int) -> ResolutionSpec:
    """The periodic resolution of a cyclic group: θ_odd = a - 1, θ_even = Ĝ, every f_j = 1."""
    if len(group.generators) != 1 or group.element_order(group.generators[0]) != group.order:
        raise HypothesisViolation(f"{group.name} is not cyclic on one generator")
    a = group.generators[0]
    odd = GroupRingElement.of(group, a) - GroupRingElement.one(group)
    even = GroupRingElement.ghat(group)
    boundaries = tuple(((odd if j % 2 else even,),) for j in range(1, stages + 1))
    return ResolutionSpec(group, (1,) * stages, boundaries, period=2)


def resolution_kernel(spec: ResolutionSpec, s: int) -> ZGLattice:
    """ker θ_s with the induced action."""
    if s < 1:
        raise InvalidResolutionError(f"stage must be at least 1, got {s}")
    spec.check_exact(s)
    theta = spec.integer_boundary(s)
    kernel = integer_kernel(theta)
    lattice = ZGLattice.from_sublattice(spec.group, kernel, spec.ranks[s - 1])
    logger.debug(f"kernel of θ_{s} over {spec.group.name} has rank {lattice.rank}")
    return lattice


def resolution_rational_count(spec: ResolutionSpec, s: int) -> int:
    """f_s - f_{s-1} + ... ± f_1 + δ_s with δ_s = 1 for even s and 0 for odd s."""
    total = sum((-1) ** (s - j) * spec.ranks[j - 1] for j in range(1, s + 1))
    return total + (1 if s % 2 == 0 else 0)


# --------------------------------------------------------------------------- primes


def good_prime(group: FiniteGroup, module: Union[ZGLattice, FiniteZGModule, None] = None) -> int:
    """Smallest prime outside π(G) ∪ π(torsion of M); lattices are torsion free."""
    excluded = set(primes_of(group))
    if isinstance(module, FiniteZGModule):
        excluded |= set(sympy.primefactors(module.size))
    return smallest_prime_outside(excluded)


@dataclass(frozen=True)
class SwanWitness:
    """A constructive proof that d_G(M) = d_G(M/pM): |generators| = d(M/pM) and M = generators·ZG."""

    prime: Optional[int]
    generators: Tuple[Tuple[int, ...], ...]  # lattice coordinates
    d_values: Dict[int, int]  # d(M/qM) for every prime examined
    found: Dict[int, bool]  # whether a witness was found at each candidate prime

    @property
    def size(self) -> int:
        return len(self.generators)


def _lift(vectors: Sequence[np.ndarray]) -> List[List[int]]:
    return [[int(x) for x in v] for v in vectors]


def _combine(parts: Dict[int, List[List[int]]], size: int, rank: int) -> List[List[int]]:
    """Chinese remainder combination: row i is congruent to parts[q][i] modulo each q."""
    units = crt_units(sorted(parts))
    out = [[0] * rank for _ in range(size)]
    for q, rows in parts.items():
        for i, row in enumerate(rows):
            for k, x in enumerate(row):
                out[i][k] += units[q] * x
    return out


def _generators_at(lattice: ZGLattice, p: int, size: int, seed: int, budget: int) -> List[List[int]]:
    rows = _lift(minimal_generating_set(lattice.mod_p(p), seed, budget))
    return rows + [[0] * lattice.rank for _ in range(size - len(rows))]


def _witness_at(lattice: ZGLattice, p: int, d: int, settings: Settings) -> Optional[List[List[int]]]:
    parts = {p: _generators_at(lattice, p, d, settings.seed, settings.candidate_budget)}
    for round_ in range(settings.swan_rounds):
        candidate = _combine(parts, d, lattice.rank)
        structure = quotient_structure(lattice, candidate)
        logger.debug(f"swan search at p = {p}, round {round_}: quotient factors {structure.invariant_factors}")
        if structure.is_trivial:
            return candidate
        if structure.exponent == 0:
            return None
        for q in structure.primes:
            if q in parts:
                # generation mod q was built in, so q cannot reappear
                return None
            if min_generators_module(lattice.mod_p(q)) > d:
                return None
            parts[q] = _generators_at(lattice, q, d, settings.seed + round_, settings.candidate_budget)
    return None


def swan_witness(
    lattice: ZGLattice, primes: Optional[Sequence[int]] = None, settings: Settings = DEFAULT_SETTINGS
) -> SwanWitness:
    """Search for a prime p and d(M/pM) elements generating M over ZG.

    Candidate primes are those (from `primes`, else π(G)) where d(M/pM) is maximal; a failed search is
    reported as undecided (prime None), never as a proof that M is not Swan.
    """
    group = lattice.group
    if lattice.rank == 0:
        return SwanWitness(None, (), {}, {})
    examined = sorted(set(primes) if primes is not None else set(primes_of(group)))
    d_values = {q: min_generators_module(lattice.mod_p(q)) for q in examined}
    outside = good_prime(group)
    d_values.setdefault(outside, d_rational(lattice))
    top = max(d_values.values())
    candidates = [q for q in examined if d_values[q] == top] or [outside]
    found: Dict[int, bool] = {}
    for p in candidates:
        generators = _witness_at(lattice, p, top, settings)
        found[p] = generators is not None
        if generators is not None:
            logger.debug(f"{lattice} is generated by {top} elements, witnessed at p = {p}")
            return SwanWitness(p, tuple(tuple(g) for g in generators), d_values, found)
    logger.info(f"no swan witness for {lattice} at primes {candidates}")
    return SwanWitness(None, (), d_values, found)


def complete_generators(
    lattice: ZGLattice, chosen: Sequence[Sequence[int]], p: int, seed: int = 0, budget: int = 400
) -> List[List[int]]:
    """Extend `chosen` (lattice coordinates) by vectors generating M/pM together with it."""
    module = lattice.mod_p(p)
    return _lift(extend_generating_set(module, [np.array([x % p for x in v], dtype=np.int64) for v in chosen], seed, budget))
