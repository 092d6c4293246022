"""Generating sets for induced modules over free products, and certificates that they generate.

For G = G_1 * ... * G_n and M = ⊕ M_i ⊗ ZG the synthesis picks, factor by factor, a small set X_i with
M_i/X_iZG_i of finite exponent, then spends the slack s = δ - Σ|X_i| on elements w_1..w_s gluing together
the residual generators u_{i,k}(p) of all quotients. A certificate is checked by spinning X over growing
windows of words: m_i·M_i ⊆ X_iZG_i over Z, and M = XZG + pM for every prime p dividing the exponent m.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from functools import cached_property, reduce
from math import lcm, prod
from typing import Any, Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import sympy
from gengap.builders import augmentation_lattice, complete_generators, relation_lattice_of, swan_witness
from gengap.config import DEFAULT_SETTINGS, Settings
from gengap.errors import (
    BudgetExhausted,
    HypothesisViolation,
    InvariantFailure,
    ProblemSchemaError,
    ShapeMismatchError,
)
from gengap.exactla import FpMatrix, IntegerSolver, minimal_multiple, reduce_against, rref
from gengap.formulas import (
    FreeProductProblem,
    bergman_table,
    component_lattice,
    d_induced,
    generic_values,
    swan_class,
)
from gengap.gmodule import ZGLattice, min_generators_module, minimal_generating_set, quotient_structure
from gengap.gring import CyclicTimesCRelations, FoxVector, LaurentGroupRingElement, augmentation_identity_residual
from gengap.groups import (
    CyclicTimesZFactor,
    FactorSpec,
    FiniteFactor,
    FiniteGroup,
    NilpotentProductFactor,
    as_nilpotent_product,
    commutator_quotient_rank,
    crt_units,
    good_primes,
    primes_of,
    smallest_prime_outside,
)
from loguru import logger

Slot = Hashable
Component = Dict[Slot, int]
Syllable = Tuple[int, Hashable]  # (factor index, element of that factor)
CosetWord = Tuple[Syllable, ...]
Key = Tuple[int, Slot, CosetWord]

VERIFIED, INCOMPLETE, REFUTED = "verified", "incomplete", "refuted"

# spinning stops (incomplete) once a window would produce more rows than this
MAX_WINDOW_ROWS = 1500


def _jsonable(value: Any) -> Any:
    if isinstance(value, (tuple, list)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.integer):
        return int(value)
    return value


def _lift(vectors: Sequence[np.ndarray]) -> List[List[int]]:
    return [[int(x) for x in v] for v in vectors]


# --------------------------------------------------------------------------- nested families


@dataclass(frozen=True)
class NestedFamily:
    """x_1, ..., x_d with X_p = {x_1, ..., x_{d_p}} minimally generating M/pM for every p in `primes`.

    Primes are ordered by decreasing d_p, so the sets X_p are prefixes of each other.
    """

    primes: Tuple[int, ...]
    counts: Tuple[int, ...]
    elements: Tuple[Tuple[int, ...], ...]  # lattice coordinates

    def count(self, p: int) -> int:
        return self.counts[self.primes.index(p)]

    def set_at(self, p: int) -> List[List[int]]:
        return [list(x) for x in self.elements[: self.count(p)]]

    @property
    def sets(self) -> Tuple[Tuple[Tuple[int, ...], ...], ...]:
        return tuple(self.elements[:d] for d in self.counts)

    @property
    def minimal(self) -> List[List[int]]:
        return [list(x) for x in self.elements[: self.counts[-1]]]

    def check(self, lattice: ZGLattice) -> Dict[int, int]:
        """d(M/(pM + X_min·ZG)) per prime; raises when X_p fails to generate or the counts do not nest."""
        residuals = {}
        for p, d in zip(self.primes, self.counts):
            if _residual_count(lattice, self.set_at(p), p) != 0:
                raise InvariantFailure(f"X_{p} does not generate {lattice} modulo {p}")
            residuals[p] = _residual_count(lattice, self.minimal, p)
            if residuals[p] != d - self.counts[-1]:
                raise InvariantFailure(f"nesting fails at p = {p}: residual {residuals[p]}, expected {d - self.counts[-1]}")
        return residuals

    def to_dict(self) -> Dict[str, Any]:
        return {
            "primes": list(self.primes),
            "counts": list(self.counts),
            "elements": _jsonable(self.elements),
        }


def _residual_count(lattice: ZGLattice, elements: Sequence[Sequence[int]], p: int) -> int:
    """d_G(M/(pM + XZG))."""
    module = lattice.mod_p(p)
    seeds = [np.array([x % p for x in v], dtype=np.int64) for v in elements]
    return min_generators_module(module.quotient(module.spin(seeds)).module)


def build_nested_family(
    lattice: ZGLattice, primes: Sequence[int], settings: Settings = DEFAULT_SETTINGS
) -> NestedFamily:
    """Combine minimal generating sets Y_p of M/pM into one nested family with CRT units.

    x_k = Σ_p ε_p·y_{p,k}, where ε_p ≡ 1 mod p and ≡ 0 mod the other primes, padding short Y_p with zeros.
    """
    if not primes:
        raise HypothesisViolation("a nested family needs at least one prime")
    counts = {p: min_generators_module(lattice.mod_p(p)) for p in set(primes)}
    ordered = sorted(counts, key=lambda p: (-counts[p], p))
    top = counts[ordered[0]]
    units = crt_units(ordered)
    elements = [[0] * lattice.rank for _ in range(top)]
    for p in ordered:
        rows = _lift(minimal_generating_set(lattice.mod_p(p), settings.seed, settings.candidate_budget))
        for k, row in enumerate(rows):
            for j, x in enumerate(row):
                elements[k][j] += units[p] * x
    logger.debug(f"nested family for {lattice} over {ordered}: counts {[counts[p] for p in ordered]}")
    return NestedFamily(tuple(ordered), tuple(counts[p] for p in ordered), tuple(tuple(x) for x in elements))


# --------------------------------------------------------------------------- re-choosing X modulo Ππ


@dataclass(frozen=True)
class Rechoice:
    elements: Tuple[Tuple[int, ...], ...]
    exponent: int
    quotient_primes: Tuple[int, ...]
    attempts: int


def _symmetric(x: int, modulus: int) -> int:
    r = x % modulus
    return r - modulus if 2 * r > modulus else r


def rechoose(
    lattice: ZGLattice,
    elements: Sequence[Sequence[int]],
    primes: Sequence[int],
    settings: Settings = DEFAULT_SETTINGS,
    exact: bool = False,
) -> Rechoice:
    """Replace X by some X' ≡ X mod Ππ whose quotient M/X'ZG has finite exponent and is cyclic modulo every
    prime outside π (trivial altogether when `exact`).

    Tries the symmetric residues of X first, then X itself, then random perturbations by multiples of Ππ.
    """
    modulus = prod(set(primes))
    primes = set(primes)
    rng = np.random.default_rng(settings.seed)

    def candidates():
        yield [[_symmetric(x, modulus) for x in v] for v in elements]
        yield [list(v) for v in elements]
        base = [[_symmetric(x, modulus) for x in v] for v in elements]
        for _ in range(settings.rechoice_budget):
            shift = rng.integers(-1, 2, size=(len(base), lattice.rank))
            yield [[x + modulus * int(s) for x, s in zip(v, row)] for v, row in zip(base, shift)]

    for attempt, candidate in enumerate(candidates()):
        structure = quotient_structure(lattice, candidate)
        if structure.exponent == 0:
            continue
        if exact and not structure.is_trivial:
            continue
        outside = [q for q in structure.primes if q not in primes]
        if all(_residual_count(lattice, candidate, q) <= 1 for q in outside):
            logger.debug(f"re-choice for {lattice} succeeded after {attempt + 1} candidates, exponent {structure.exponent}")
            return Rechoice(tuple(tuple(v) for v in candidate), structure.exponent, structure.primes, attempt + 1)
    raise BudgetExhausted(f"no admissible re-choice of generators for {lattice} within {settings.rechoice_budget} perturbations")


# --------------------------------------------------------------------------- good modules


@dataclass(frozen=True)
class GoodModuleWitness:
    claimed: Tuple[int, ...]
    delta: int
    tested: Tuple[int, ...]
    family: Optional[NestedFamily]
    generators: Tuple[Tuple[int, ...], ...]
    exponent: int
    generic_counts: Dict[int, int]  # d(M/pM) at good primes outside the claimed set
    cyclicity: Dict[int, int]  # d(M/(qM + XZG)) at primes outside the tested set
    attempts: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "claimed": list(self.claimed),
            "delta": self.delta,
            "tested": list(self.tested),
            "family": self.family.to_dict() if self.family else None,
            "generators": _jsonable(self.generators),
            "exponent": self.exponent,
            "generic_counts": {str(p): d for p, d in sorted(self.generic_counts.items())},
            "cyclicity": {str(p): d for p, d in sorted(self.cyclicity.items())},
            "attempts": self.attempts,
        }


def check_good(
    lattice: ZGLattice,
    claimed: Sequence[int],
    tested: Sequence[int],
    settings: Settings = DEFAULT_SETTINGS,
) -> GoodModuleWitness:
    """Collect evidence that M is good: d(M/pM) constant off `claimed`, and the minimal element of a nested
    family over `tested` has a quotient of finite exponent that is cyclic modulo primes outside `tested`."""
    claimed, tested = tuple(sorted(set(claimed))), tuple(sorted(set(tested)))
    if not set(tested) > set(claimed):
        raise HypothesisViolation(f"tested primes {list(tested)} must strictly contain {list(claimed)}")
    if lattice.rank == 0:
        return GoodModuleWitness(claimed, 0, tested, None, (), 1, {}, {})
    generic = {p: min_generators_module(lattice.mod_p(p)) for p in good_primes(set(claimed), 3)}
    if len(set(generic.values())) != 1:
        raise InvariantFailure(f"d(M/pM) is not constant off {list(claimed)}: {generic}")
    delta = next(iter(generic.values()))
    family = build_nested_family(lattice, tested, settings)
    family.check(lattice)
    chosen = rechoose(lattice, family.minimal, tested, settings)
    sampled = set(good_primes(set(tested), 3)) | {q for q in chosen.quotient_primes if q not in tested}
    cyclicity = {q: _residual_count(lattice, chosen.elements, q) for q in sorted(sampled)}
    bad = {q: d for q, d in cyclicity.items() if d > 1}
    if bad:
        raise InvariantFailure(f"quotient of {lattice} is not cyclic modulo {sorted(bad)}")
    logger.info(f"{lattice} is good with δ = {delta} (exponent {chosen.exponent} on π = {list(tested)})")
    return GoodModuleWitness(
        claimed, delta, tested, family, chosen.elements, chosen.exponent, generic, cyclicity, chosen.attempts
    )


# --------------------------------------------------------------------------- factor modules


class FactorModule(ABC):
    """M_i seen from the free product: coordinates, the right action of H_i on them and its syllables."""

    index: int
    swan_class: str

    @abstractmethod
    def identity(self) -> Hashable:
        ...

    @abstractmethod
    def multiply(self, g: Hashable, h: Hashable) -> Hashable:
        ...

    @abstractmethod
    def weight(self, g: Hashable) -> int:
        ...

    @abstractmethod
    def syllables(self, max_weight: int) -> List[Hashable]:
        """Non-identity elements of H_i of weight at most max_weight."""

    @abstractmethod
    def act(self, component: Component, g: Hashable) -> Component:
        ...

    @abstractmethod
    def canonical_generators(self) -> List[Component]:
        ...

    @abstractmethod
    def contains(self, component: Component) -> bool:
        ...


@dataclass(frozen=True, eq=False)
class LatticeModule(FactorModule):
    """A ZG_i-lattice of a finite factor; slots are lattice coordinates."""

    index: int
    lattice: ZGLattice
    swan_class: str = "finite augmentation"

    @property
    def group(self) -> FiniteGroup:
        return self.lattice.group

    def identity(self) -> int:
        return self.group.identity

    def multiply(self, g: int, h: int) -> int:
        return self.group.mul(g, h)

    def weight(self, g: int) -> int:
        return 1

    def syllables(self, max_weight: int) -> List[int]:
        if max_weight < 1:
            return []
        return [g for g in range(self.group.order) if g != self.group.identity]

    def act(self, component: Component, g: int) -> Component:
        vector = [0] * self.lattice.rank
        for k, a in component.items():
            vector[k] += a
        return {k: a for k, a in enumerate(self.lattice.act(vector, g)) if a}

    def canonical_generators(self) -> List[Component]:
        return [{k: 1} for k in range(self.lattice.rank)]

    def contains(self, component: Component) -> bool:
        return all(isinstance(k, int) and 0 <= k < self.lattice.rank for k in component)

    def component(self, coordinates: Sequence[int]) -> Component:
        return {k: int(a) for k, a in enumerate(coordinates) if a}


def _exponent_vectors(rank: int, total: int):
    """All integer vectors of length rank with Σ|e| = total."""
    if rank == 0:
        if total == 0:
            yield ()
        return
    for first in range(-total, total + 1):
        for rest in _exponent_vectors(rank - 1, total - abs(first)):
            yield (first,) + rest


@dataclass(frozen=True, eq=False)
class LaurentModule(FactorModule):
    """A submodule of Z[G_i x C^r]^width; slots are (component, group element, c-exponents)."""

    index: int
    group: FiniteGroup
    rank: int
    width: int
    swan_class: str = "nilpotent augmentation"

    def identity(self) -> Tuple[int, Tuple[int, ...]]:
        return self.group.identity, (0,) * self.rank

    def multiply(self, g, h):
        return self.group.mul(g[0], h[0]), tuple(x + y for x, y in zip(g[1], h[1]))

    def weight(self, g) -> int:
        return 1 + sum(abs(x) for x in g[1])

    def syllables(self, max_weight: int) -> List[Tuple[int, Tuple[int, ...]]]:
        out = []
        for total in range(max_weight):
            for exps in _exponent_vectors(self.rank, total):
                for g in range(self.group.order):
                    if total == 0 and g == self.group.identity:
                        continue
                    out.append((g, exps))
        return out

    def act(self, component: Component, g) -> Component:
        h, f = g
        out: Component = {}
        for (s, k, e), a in component.items():
            key = (s, self.group.mul(k, h), tuple(x + y for x, y in zip(e, f)))
            out[key] = out.get(key, 0) + a
        return {k: a for k, a in out.items() if a}

    def component(self, vector: FoxVector) -> Component:
        if len(vector) != self.width:
            raise ShapeMismatchError(f"expected a vector with {self.width} components, got {len(vector)}")
        return {(s, g, e): a for s, entry in enumerate(vector.components) for (g, e), a in entry.terms if a}

    def vector(self, component: Component) -> FoxVector:
        parts: List[Dict] = [{} for _ in range(self.width)]
        for (s, g, e), a in component.items():
            parts[s][(g, e)] = parts[s].get((g, e), 0) + a
        return FoxVector(tuple(LaurentGroupRingElement.from_dict(self.group, part, self.rank) for part in parts))

    def ring(self, g: int, exps: Optional[Tuple[int, ...]] = None, coefficient: int = 1) -> LaurentGroupRingElement:
        return LaurentGroupRingElement.monomial(self.group, g, exps, coefficient, self.rank)

    def _well_formed(self, component: Component) -> bool:
        for key in component:
            if not (isinstance(key, tuple) and len(key) == 3):
                return False
            s, g, e = key
            if not (0 <= s < self.width and 0 <= g < self.group.order and len(e) == self.rank):
                return False
        return True


@dataclass(frozen=True, eq=False)
class CyclicRelationModule(LaurentModule):
    """The relation module S of <x, c | x^n, [x, c]> inside Z[C_n x C]^2."""

    swan_class: str = "C_n x Z relation"

    @classmethod
    def of(cls, index: int, n: int) -> "CyclicRelationModule":
        return cls(index, CyclicTimesCRelations(n).group, 1, 2)

    @cached_property
    def relations(self) -> CyclicTimesCRelations:
        return CyclicTimesCRelations(self.group.order)

    def canonical_generators(self) -> List[Component]:
        return [self.component(self.relations.u), self.component(self.relations.w)]

    def contains(self, component: Component) -> bool:
        return self._well_formed(component) and self.relations.contains(self.vector(component))


@dataclass(frozen=True, eq=False)
class NilpotentAugmentationModule(LaurentModule):
    """ΔH for H = G x Z^r inside Z[G x C^r]."""

    def c_minus_one(self, axis: int) -> LaurentGroupRingElement:
        return LaurentGroupRingElement.c_power(self.group, 1, self.rank, axis) - 1

    def element(self, value: LaurentGroupRingElement) -> Component:
        return self.component(FoxVector((value,)))

    def canonical_generators(self) -> List[Component]:
        identity = (0,) * self.rank
        out = [self.element(self.ring(g, identity) - 1) for g in self.group.generators]
        return out + [self.element(self.c_minus_one(j)) for j in range(self.rank)]

    def contains(self, component: Component) -> bool:
        return self._well_formed(component) and sum(component.values()) == 0


def factor_module(problem: FreeProductProblem, i: int) -> FactorModule:
    factor, kind = problem.factors[i], problem.module
    label = swan_class(problem, i) or "none"
    if isinstance(factor, FiniteFactor):
        return LatticeModule(i, component_lattice(problem, i), label)
    if isinstance(factor, CyclicTimesZFactor) and kind == "relation":
        return CyclicRelationModule.of(i, factor.n)
    nilpotent = as_nilpotent_product(factor)
    if kind == "augmentation":
        if nilpotent.rank == 0:
            return LatticeModule(i, augmentation_lattice(nilpotent.group), label)
        return NilpotentAugmentationModule(i, nilpotent.group, nilpotent.rank, 1)
    if kind == "relation" and nilpotent.rank == 0:
        return LatticeModule(i, relation_lattice_of(nilpotent.group).lattice, label)
    raise HypothesisViolation(f"{kind} modules of {factor.label} are not supported by the synthesis")


# --------------------------------------------------------------------------- generators of one factor


@dataclass(frozen=True, eq=False)
class FactorGenerators:
    """X_i with m_i·M_i ⊆ X_i·ZH_i, plus the residual generators u_{i,k}(p) of N_i = M_i/X_iZH_i."""

    module: FactorModule
    elements: Tuple[Component, ...]
    exponent: int
    residuals: Mapping[int, Tuple[Component, ...]]  # p -> generators of N_i/pN_i
    quotient_primes: Tuple[int, ...]
    notes: Mapping[str, Any] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.elements)


def _lattice_generators(
    module: LatticeModule, primes: Sequence[int], settings: Settings, exact: bool
) -> FactorGenerators:
    lattice = module.lattice
    if lattice.rank == 0:
        return FactorGenerators(module, (), 1, {}, ())
    family = build_nested_family(lattice, primes, settings)
    try:
        choice = rechoose(lattice, family.minimal, primes, settings, exact=exact)
    except BudgetExhausted:
        if not exact:
            raise
        witness = swan_witness(lattice, settings=settings)
        if witness.prime is None or witness.size != len(family.minimal):
            raise
        structure = quotient_structure(lattice, witness.generators)
        choice = Rechoice(witness.generators, structure.exponent, structure.primes, 0)
    residuals = {}
    for p in choice.quotient_primes:
        extra = complete_generators(lattice, choice.elements, p, settings.seed, settings.candidate_budget)
        if extra:
            residuals[p] = tuple(module.component(v) for v in extra)
    notes = {"family": family.to_dict(), "rechoice_attempts": choice.attempts}
    return FactorGenerators(
        module,
        tuple(module.component(x) for x in choice.elements),
        choice.exponent,
        residuals,
        choice.quotient_primes,
        notes,
    )


def _relation_generators(module: CyclicRelationModule) -> FactorGenerators:
    relations = module.relations
    n = module.group.order
    w = module.component(relations.w)
    residuals = {p: (w,) for p in sympy.primefactors(n)}
    literal = relations.literal_z()
    notes = {"literal_z": [str(entry) for entry in literal.components]}
    primes = tuple(sympy.primefactors(n))
    return FactorGenerators(module, (module.component(relations.z()),), n * n, residuals, primes, notes)


def _augmentation_generators(
    module: NilpotentAugmentationModule, primes: Sequence[int], settings: Settings
) -> FactorGenerators:
    group, rank = module.group, module.rank
    shifts = [module.c_minus_one(j) for j in range(rank)]
    if group.order == 1:
        return FactorGenerators(module, tuple(module.element(c) for c in shifts), 1, {}, ())
    lattice = augmentation_lattice(group)
    family = build_nested_family(lattice, primes, settings)
    choice = rechoose(lattice, family.minimal, primes, settings)

    def embed(coordinates: Sequence[int]) -> LaurentGroupRingElement:
        coefficients = lattice.embed(coordinates)
        identity = (0,) * rank
        return LaurentGroupRingElement.from_dict(group, {(g, identity): a for g, a in enumerate(coefficients) if a}, rank)

    x = embed(choice.elements[0])
    ghat = LaurentGroupRingElement.ghat(group, rank)
    elements = [x + ghat * shifts[0]] + shifts[1:]
    residuals: Dict[int, Tuple[Component, ...]] = {}
    for p in sorted(primes_of(group)):
        d = family.count(p)
        if commutator_quotient_rank(group, p) != d:
            raise HypothesisViolation(
                f"d(ΔG/{p}ΔG) = {d} differs from the rank of G/G'G^{p} for {group.name}"
            )
        residuals[p] = (module.element(shifts[0]),) + tuple(module.element(embed(y)) for y in family.set_at(p)[1:])
    for q in choice.quotient_primes:
        if q in primes:
            continue
        extra = complete_generators(lattice, choice.elements[:1], q, settings.seed, settings.candidate_budget)
        if extra:
            residuals[q] = tuple(module.element(embed(v)) for v in extra)
    quotient_primes = tuple(sorted(set(primes_of(group)) | set(choice.quotient_primes)))
    notes = {"x": str(x), "m": choice.exponent}
    return FactorGenerators(
        module,
        tuple(module.element(e) for e in elements),
        group.order**2 * choice.exponent,
        residuals,
        quotient_primes,
        notes,
    )


def build_factor_generators(
    module: FactorModule, primes: Sequence[int], settings: Settings = DEFAULT_SETTINGS, exact: bool = False
) -> FactorGenerators:
    if isinstance(module, LatticeModule):
        return _lattice_generators(module, primes, settings, exact)
    if isinstance(module, CyclicRelationModule):
        return _relation_generators(module)
    if isinstance(module, NilpotentAugmentationModule):
        return _augmentation_generators(module, primes, settings)
    raise HypothesisViolation(f"no generator construction for {module!r}")


def infinite_factor_generators(
    factor: FactorSpec, module: str = "augmentation", primes: Optional[Sequence[int]] = None,
    settings: Settings = DEFAULT_SETTINGS,
) -> FactorGenerators:
    """Explicit X and exponent bound for C_n x Z relation modules and ΔH with H = G x Z^r, r >= 1."""
    if isinstance(factor, CyclicTimesZFactor) and module == "relation":
        return _relation_generators(CyclicRelationModule.of(0, factor.n))
    if module == "augmentation" and isinstance(factor, (CyclicTimesZFactor, NilpotentProductFactor)):
        nilpotent = as_nilpotent_product(factor)
        if nilpotent.rank > 0:
            if primes is None:
                finite = set(primes_of(nilpotent.group))
                primes = sorted(finite) + [smallest_prime_outside(finite)]
            target = NilpotentAugmentationModule(0, nilpotent.group, nilpotent.rank, 1)
            return _augmentation_generators(target, primes, settings)
    raise HypothesisViolation(f"unsupported factor shape for explicit generators: {module} module of {factor.label}")


# --------------------------------------------------------------------------- induced elements


@dataclass(frozen=True)
class InducedElement:
    """A finite sum of m ⊗ w with m in some M_i and w a normal-form word not starting with a G_i-syllable."""

    terms: Tuple[Tuple[Key, int], ...] = ()

    @classmethod
    def from_dict(cls, coefficients: Mapping[Key, int]) -> "InducedElement":
        return cls(tuple(sorted((k, int(a)) for k, a in coefficients.items() if a)))

    @classmethod
    def local(cls, i: int, component: Component) -> "InducedElement":
        return cls.from_dict({(i, slot, ()): a for slot, a in component.items()})

    def as_dict(self) -> Dict[Key, int]:
        return dict(self.terms)

    def __add__(self, other: "InducedElement") -> "InducedElement":
        out = self.as_dict()
        for k, a in other.terms:
            out[k] = out.get(k, 0) + a
        return InducedElement.from_dict(out)

    def __neg__(self) -> "InducedElement":
        return InducedElement(tuple((k, -a) for k, a in self.terms))

    def __sub__(self, other: "InducedElement") -> "InducedElement":
        return self + (-other)

    def __mul__(self, n: int) -> "InducedElement":
        return InducedElement.from_dict({k: n * a for k, a in self.terms})

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.terms

    def reduce_mod(self, p: int) -> "InducedElement":
        return InducedElement.from_dict({k: a % p for k, a in self.terms})

    @property
    def factors(self) -> Tuple[int, ...]:
        return tuple(sorted({k[0] for k, _ in self.terms}))

    def is_local(self, i: int) -> bool:
        return all(k[0] == i and not k[2] for k, _ in self.terms)

    def component(self, i: int, word: CosetWord = ()) -> Component:
        return {k[1]: a for k, a in self.terms if k[0] == i and k[2] == word}

    def times_syllable(self, modules: Sequence[FactorModule], syllable: Syllable) -> "InducedElement":
        j, h = syllable
        out: Dict[Key, int] = {}
        absorbed: Component = {}
        for (i, slot, word), a in self.terms:
            if not word and i == j:
                absorbed[slot] = absorbed.get(slot, 0) + a
                continue
            if word and word[-1][0] == j:
                merged = modules[j].multiply(word[-1][1], h)
                new = word[:-1] if merged == modules[j].identity() else word[:-1] + ((j, merged),)
            else:
                new = word + (syllable,)
            out[(i, slot, new)] = out.get((i, slot, new), 0) + a
        if absorbed:
            for slot, a in modules[j].act(absorbed, h).items():
                out[(j, slot, ())] = out.get((j, slot, ()), 0) + a
        return InducedElement.from_dict(out)

    def times_word(self, modules: Sequence[FactorModule], word: CosetWord) -> "InducedElement":
        return reduce(lambda acc, syllable: acc.times_syllable(modules, syllable), word, self)

    def to_json(self) -> List[Dict[str, Any]]:
        return [
            {"factor": i, "slot": _jsonable(slot), "word": _jsonable(word), "coefficient": a}
            for (i, slot, word), a in self.terms
        ]


def window_words(modules: Sequence[FactorModule], weight: int) -> List[CosetWord]:
    """All alternating words of total syllable weight at most `weight`, the empty word first."""
    syllables = {j: [(h, m.weight(h)) for h in m.syllables(weight)] for j, m in enumerate(modules)}
    out: List[CosetWord] = [()]

    def extend(word: CosetWord, budget: int) -> None:
        last = word[-1][0] if word else None
        for j in range(len(modules)):
            if j == last:
                continue
            for h, cost in syllables[j]:
                if cost <= budget:
                    longer = word + ((j, h),)
                    out.append(longer)
                    extend(longer, budget - cost)

    extend((), weight)
    return out


# --------------------------------------------------------------------------- certificates


@dataclass(frozen=True)
class VerificationResult:
    status: str
    reason: str
    exponent_windows: Tuple[Optional[int], ...]  # per factor: weight at which m_i·M_i ⊆ X_iZH_i was solved
    prime_windows: Dict[int, Optional[int]]  # p -> weight at which M = XZG + pM was reached
    witnesses: Dict[str, Any] = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return self.status == VERIFIED

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status,
            "reason": self.reason,
            "exponent_windows": list(self.exponent_windows),
            "prime_windows": {str(p): w for p, w in sorted(self.prime_windows.items())},
            "witnesses": self.witnesses,
        }


@dataclass(frozen=True)
class GenerationCertificate:
    problem: str
    generators: Tuple[InducedElement, ...]
    exponent: int
    factor_exponents: Tuple[int, ...]
    factor_generators: Tuple[Tuple[int, ...], ...]  # indices into `generators` forming each X_i
    claimed: int
    provenance: Dict[str, Any] = field(default_factory=dict)
    verification: Optional[VerificationResult] = None

    @property
    def size(self) -> int:
        return len(self.generators)

    def without(self, index: int) -> "GenerationCertificate":
        """The same certificate with one generator dropped."""
        keep = [k for k in range(self.size) if k != index]
        renumber = {old: new for new, old in enumerate(keep)}
        return replace(
            self,
            generators=tuple(self.generators[k] for k in keep),
            factor_generators=tuple(tuple(renumber[k] for k in part if k in renumber) for part in self.factor_generators),
            verification=None,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "problem": self.problem,
            "size": self.size,
            "claimed": self.claimed,
            "exponent": self.exponent,
            "factor_exponents": list(self.factor_exponents),
            "factor_generators": [list(part) for part in self.factor_generators],
            "generators": [g.to_json() for g in self.generators],
            "provenance": self.provenance,
            "verification": self.verification.to_dict() if self.verification else None,
        }


def _exponent_solution(
    module: FactorModule, elements: Sequence[Component], exponent: int, weight: int
) -> Optional[List[List[Any]]]:
    """Solve exponent·v ∈ Σ_x x·(elements of H_i of weight <= weight) for every canonical generator v."""
    syllables = [module.identity()] + module.syllables(weight)
    labels = [(k, h) for k in range(len(elements)) for h in syllables]
    rows = [module.act(elements[k], h) for k, h in labels]
    targets = [{slot: exponent * a for slot, a in v.items()} for v in module.canonical_generators()]
    columns: Dict[Slot, int] = {}
    for entry in rows + targets:
        for slot in entry:
            columns.setdefault(slot, len(columns))
    if not rows:
        return [] if all(not t for t in targets) else None
    matrix = [[0] * len(columns) for _ in rows]
    for r, entry in enumerate(rows):
        for slot, a in entry.items():
            matrix[r][columns[slot]] = a
    solver = IntegerSolver(matrix, len(columns))
    solutions = []
    for target in targets:
        vector = [0] * len(columns)
        for slot, a in target.items():
            vector[columns[slot]] = a
        x = solver.solve(vector)
        if x is None:
            return None
        solutions.append([[labels[r][0], _jsonable(labels[r][1]), int(c)] for r, c in enumerate(x) if c])
    return solutions


def exponent_in_window(part: FactorGenerators, weight: int) -> int:
    """Least m with m·v ∈ X_i·(weight window) for all canonical v; 0 while some v is out of rational reach."""
    module = part.module
    syllables = [module.identity()] + module.syllables(weight)
    rows = [module.act(x, h) for x in part.elements for h in syllables]
    canonical = module.canonical_generators()
    columns: Dict[Slot, int] = {}
    for entry in rows + canonical:
        for slot in entry:
            columns.setdefault(slot, len(columns))

    def dense(entry: Component) -> List[int]:
        out = [0] * len(columns)
        for slot, a in entry.items():
            out[columns[slot]] = a
        return out

    value = 1
    for v in canonical:
        m = minimal_multiple([dense(r) for r in rows], dense(v))
        if m == 0:
            return 0
        value = lcm(value, m)
    return value


def check_factor_mod_p(part: FactorGenerators, p: int, weight: int) -> bool:
    """M_i = X_iZH_i + pM_i, witnessed over the given window of H_i."""
    module = part.module
    syllables = [module.identity()] + module.syllables(weight)
    rows = [module.act(x, h) for x in part.elements for h in syllables]
    return _spans_mod_p(rows, module.canonical_generators(), p)


def _spans_mod_p(rows: Sequence[Mapping[Hashable, int]], targets: Sequence[Mapping[Hashable, int]], p: int) -> bool:
    columns: Dict[Hashable, int] = {}
    for entry in list(rows) + list(targets):
        for key, a in entry.items():
            if a % p:
                columns.setdefault(key, len(columns))
    if not columns:
        return True
    matrix = np.zeros((max(len(rows), 1), len(columns)), dtype=np.int64)
    for r, entry in enumerate(rows):
        for key, a in entry.items():
            if a % p:
                matrix[r, columns[key]] = a % p
    reduced = rref(FpMatrix(p, matrix))
    for target in targets:
        vector = np.zeros(len(columns), dtype=np.int64)
        for key, a in target.items():
            if a % p:
                vector[columns[key]] = a % p
        if reduce_against(reduced.basis.entries, reduced.pivots, vector, p).any():
            return False
    return True


def _induced_rows(
    generators: Sequence[InducedElement], modules: Sequence[FactorModule], words: Sequence[CosetWord], p: int
) -> List[Dict[Key, int]]:
    rows = []
    for x in generators:
        x = x.reduce_mod(p)
        if x.is_zero():
            continue
        for word in words:
            rows.append(x.times_word(modules, word).reduce_mod(p).as_dict())
    return rows


def _shape_errors(cert: GenerationCertificate, modules: Sequence[FactorModule]) -> Optional[str]:
    """Membership of every generator in M; raises on malformed data."""
    n = len(modules)
    if len(cert.factor_exponents) != n or len(cert.factor_generators) != n:
        raise ShapeMismatchError(f"certificate describes {len(cert.factor_exponents)} factors, problem has {n}")
    for i, part in enumerate(cert.factor_generators):
        for k in part:
            if not 0 <= k < cert.size or not cert.generators[k].is_local(i):
                raise ShapeMismatchError(f"generator {k} is listed for factor {i} but is not supported on it")
    for k, x in enumerate(cert.generators):
        for i in x.factors:
            if not 0 <= i < n:
                raise ShapeMismatchError(f"generator {k} refers to factor {i}")
        by_word: Dict[Tuple[int, CosetWord], Component] = {}
        for (i, slot, word), a in x.terms:
            by_word.setdefault((i, word), {})[slot] = a
        for (i, word), component in by_word.items():
            if not modules[i].contains(component):
                return f"generator {k} has a component outside M_{i} at word {_jsonable(word)}"
    return None


def verify_certificate(
    cert: GenerationCertificate,
    problem: FreeProductProblem,
    depth_cap: Optional[int] = None,
    settings: Settings = DEFAULT_SETTINGS,
) -> VerificationResult:
    """Semidecision over growing windows: verified once (i) m_i·v ∈ X_i·ZH_i for every canonical v of every
    factor and (ii) every canonical generator lies in XZG + pM for every p | m; refuted only when |X| is below
    the Bergman count or a generator lies outside M."""
    cap = settings.depth_cap if depth_cap is None else depth_cap
    modules = [factor_module(problem, i) for i in range(problem.n)]
    n = len(modules)
    primes = [int(p) for p in sympy.primefactors(cert.exponent)] if cert.exponent > 1 else []
    exponent_windows: List[Optional[int]] = [None] * n
    prime_windows: Dict[int, Optional[int]] = {p: None for p in primes}

    def result(status: str, reason: str, witnesses: Optional[Dict[str, Any]] = None) -> VerificationResult:
        logger.info(f"certificate for {problem.describe()}: {status} ({reason})")
        return VerificationResult(status, reason, tuple(exponent_windows), dict(prime_windows), witnesses or {})

    outside = _shape_errors(cert, modules)
    if outside:
        return result(REFUTED, outside)
    table = bergman_table(problem)
    top = max(table.values())
    if cert.size < top:
        p = min(q for q, v in table.items() if v == top)
        return result(REFUTED, f"|X| = {cert.size} < d(M/{p}M) = {top}")
    if lcm(*cert.factor_exponents) != cert.exponent:
        raise ShapeMismatchError(f"exponent {cert.exponent} is not the lcm of {list(cert.factor_exponents)}")

    targets = [InducedElement.local(i, v) for i, m in enumerate(modules) for v in m.canonical_generators()]
    witnesses: Dict[str, Any] = {}
    for weight in range(1, cap + 1):
        for i, module in enumerate(modules):
            if exponent_windows[i] is not None:
                continue
            elements = [cert.generators[k].component(i) for k in cert.factor_generators[i]]
            solution = _exponent_solution(module, elements, cert.factor_exponents[i], weight)
            if solution is not None:
                exponent_windows[i] = weight
                witnesses[f"exponent_{i}"] = solution
                logger.debug(f"factor {i}: {cert.factor_exponents[i]}·M_{i} ⊆ X_{i}ZH_{i} at weight {weight}")
        pending = [p for p, w in prime_windows.items() if w is None]
        if pending:
            words = window_words(modules, weight)
            if len(words) * cert.size > MAX_WINDOW_ROWS:
                return result(INCOMPLETE, f"window of weight {weight} has {len(words)} words, beyond the row cap", witnesses)
            for p in pending:
                rows = _induced_rows(cert.generators, modules, words, p)
                if _spans_mod_p(rows, [t.reduce_mod(p).as_dict() for t in targets], p):
                    prime_windows[p] = weight
                    logger.debug(f"M = XZG + {p}M at weight {weight} ({len(rows)} rows)")
        if all(w is not None for w in exponent_windows) and all(w is not None for w in prime_windows.values()):
            return result(VERIFIED, f"exponent {cert.exponent} and all primes dividing it checked by weight {weight}", witnesses)
    return result(INCOMPLETE, f"depth cap {cap} reached", witnesses)


def synthesize_generators(
    problem: FreeProductProblem, settings: Settings = DEFAULT_SETTINGS, verify: bool = True
) -> GenerationCertificate:
    """Build X with |X| = max_p Σ_i d(M_i/pM_i) for the induced module, then verify it."""
    report = d_induced(problem)
    delta = report.value
    generic = generic_values(problem)
    slack = delta - sum(generic)
    if slack < 0:
        raise InvariantFailure(f"generic values {generic} exceed the formula value {delta}")
    primes = sorted(problem.support())
    modules = [factor_module(problem, i) for i in range(problem.n)]
    parts: List[FactorGenerators] = []
    outside: Dict[int, List[int]] = {}
    for i, module in enumerate(modules):
        part = build_factor_generators(module, primes, settings, exact=slack == 0)
        if part.size != generic[i]:
            raise InvariantFailure(f"factor {i}: built {part.size} generators, generic value is {generic[i]}")
        new = [q for q in part.quotient_primes if q not in primes]
        outside[i] = new
        primes = sorted(set(primes) | set(new))
        logger.debug(f"factor {i}: |X_{i}| = {part.size}, exponent bound {part.exponent}, new primes {new}")
        parts.append(part)

    layers: Dict[int, List[InducedElement]] = {}
    for i, part in enumerate(parts):
        for p, residual in sorted(part.residuals.items()):
            layers.setdefault(p, []).extend(InducedElement.local(i, u) for u in residual)
    crowded = {p: len(layer) for p, layer in layers.items() if len(layer) > slack}
    if crowded:
        raise InvariantFailure(f"residual generators {crowded} exceed the slack {slack}")
    units = crt_units(sorted(layers)) if layers else {}
    finite_part = []
    for k in range(slack):
        w = InducedElement()
        for p, layer in sorted(layers.items()):
            if k < len(layer):
                w = w + layer[k] * units[p]
        finite_part.append(w)

    generators: List[InducedElement] = []
    indices: List[Tuple[int, ...]] = []
    for i, part in enumerate(parts):
        start = len(generators)
        generators.extend(InducedElement.local(i, x) for x in part.elements)
        indices.append(tuple(range(start, len(generators))))
    generators.extend(finite_part)
    exponents = tuple(part.exponent for part in parts)
    provenance = {
        "construction": "nested families per factor, residual generators glued by CRT units",
        "swan_classes": [module.swan_class for module in modules],
        "generic_values": generic,
        "slack": slack,
        "layers": {str(p): len(layer) for p, layer in sorted(layers.items())},
        "outside_primes": {str(i): new for i, new in outside.items()},
        "factors": [dict(part.notes) for part in parts],
        "formula": report.to_dict(),
    }
    cert = GenerationCertificate(
        problem.describe(), tuple(generators), lcm(*exponents), exponents, tuple(indices), delta, provenance
    )
    logger.info(f"synthesized {cert.size} generators for {problem.describe()} (exponent {cert.exponent})")
    if verify:
        cert = replace(cert, verification=verify_certificate(cert, problem, settings.depth_cap, settings))
    return cert


# --------------------------------------------------------------------------- reading certificates back


def _tupled(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(_tupled(v) for v in value)
    return value


def induced_from_json(entries: Sequence[Mapping[str, Any]]) -> InducedElement:
    try:
        coefficients = {
            (int(e["factor"]), _tupled(e["slot"]), _tupled(e["word"])): int(e["coefficient"]) for e in entries
        }
    except (KeyError, TypeError, ValueError) as error:
        raise ProblemSchemaError(f"malformed generator term: {error}", "generators")
    return InducedElement.from_dict(coefficients)


def certificate_from_dict(data: Mapping[str, Any]) -> GenerationCertificate:
    """Inverse of GenerationCertificate.to_dict; the stored verification verdict is dropped."""
    for name in ("problem", "generators", "exponent", "factor_exponents", "factor_generators", "claimed"):
        if name not in data:
            raise ProblemSchemaError(f"certificate has no '{name}'", name)
    return GenerationCertificate(
        str(data["problem"]),
        tuple(induced_from_json(g) for g in data["generators"]),
        int(data["exponent"]),
        tuple(int(m) for m in data["factor_exponents"]),
        tuple(tuple(int(k) for k in part) for part in data["factor_generators"]),
        int(data["claimed"]),
        dict(data.get("provenance") or {}),
    )


# --------------------------------------------------------------------------- identity suite


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    holds: bool
    detail: str

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "holds": self.holds, "detail": self.detail}


def _first_window(check, depth_cap: int) -> Optional[int]:
    return next((weight for weight in range(1, depth_cap + 1) if check(weight)), None)


def identity_suite(
    orders: Sequence[int] = (2, 3), primes: Sequence[int] = (5, 7), settings: Settings = DEFAULT_SETTINGS
) -> List[IdentityCheck]:
    """Exact checks of the ring identities the C_n x Z constructions rest on."""
    checks: List[IdentityCheck] = []
    for n in sorted(set(orders) | {6}):
        group = CyclicTimesCRelations(n).group
        a = LaurentGroupRingElement.monomial(group, group.generators[0])
        residual = augmentation_identity_residual(group, a - 1)
        checks.append(IdentityCheck(f"augmentation identity, C{n}", residual.is_zero(), "(x + Ĝ(c-1))(|G| - Ĝ) = |G|x at x = a - 1"))
    for n in orders:
        relations = CyclicTimesCRelations(n)
        group, a = relations.group, relations.a
        basis = [relations.ring(group.power(a, j), i) - relations.c(i) for j in range(1, n) for i in (0, 1)]
        retract = all((relations.sigma(relations.tau_hat(v)) - v * n).is_zero() for v in basis)
        checks.append(IdentityCheck(f"sigma after tau_hat, C{n}", retract, f"σ(τ̂(v)) = {n}v on a basis of ΔG ⊗ ZC"))
        vanish = all(relations.lies_in_s_times_delta_c(relations.psi(g, v)) for g in range(group.order) for v in basis)
        checks.append(IdentityCheck(f"psi lies in S·ΔC, C{n}", vanish, "τ(vg^-1)g - τ(v) ∈ S(c - 1)"))
        residual = relations.literal_z_residual() - relations.u * ((relations.one() - relations.c(1)) * (relations.one() - relations.c(1)) * n)
        checks.append(IdentityCheck(f"literal z residual, C{n}", residual.is_zero(), "z'(n - Ĝc) - n²w = n·u(1 - c)²"))
        module = CyclicRelationModule.of(0, n)
        part = _relation_generators(module)
        for q in primes:
            if n % q == 0:
                continue
            window = _first_window(lambda weight: check_factor_mod_p(part, q, weight), settings.depth_cap)
            detail = f"first window of weight {window}" if window else f"not reached by weight {settings.depth_cap}"
            checks.append(IdentityCheck(f"S = zZH + {q}S, C{n}", window is not None, detail))
        window = _first_window(lambda weight: exponent_in_window(part, weight) != 0, settings.depth_cap)
        exponent = exponent_in_window(part, window) if window else 0
        holds = exponent != 0 and (n * n) % exponent == 0
        checks.append(IdentityCheck(f"exponent of S/zZH, C{n}", holds, f"{exponent} at weight {window}, divides {n * n}"))
    for check in checks:
        logger.debug(f"{check.name}: {'holds' if check.holds else 'FAILS'}")
    return checks
