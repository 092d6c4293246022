"""Closed-form generator counts for induced modules over free products, with per-prime evidence.

For G = G_1 * ... * G_n and M = ⊕ M_i ⊗ ZG the count d_G(M) is the maximum over primes of the
Bergman sums Σ_i d_{G_i}(M_i/pM_i), as soon as the components are good Swan modules. Only finitely
many primes matter: outside ∪ π(G_i) every sum takes its generic value, represented by one good prime.
"""

import re
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import sympy
from gengap.builders import (
    ResolutionSpec,
    augmentation_lattice,
    cyclic_resolution,
    relation_lattice_of,
    resolution_kernel,
    resolution_rational_count,
)
from gengap.errors import (
    GroupConstructionError,
    HypothesisViolation,
    InvariantFailure,
    ProblemSchemaError,
    RefusedComputation,
)
from gengap.gmodule import ZGLattice, d_rational, min_generators_module
from gengap.groups import (
    ALL_PRIMES,
    CyclicTimesZFactor,
    FactorSpec,
    FiniteFactor,
    FiniteGroup,
    NilpotentProductFactor,
    Presentation,
    abelian,
    as_nilpotent_product,
    commutator_quotient_rank,
    generating_primes,
    min_generators_group,
    presentation_from_mapping,
    primes_of,
    smallest_prime_outside,
    trivial_group,
)
from loguru import logger

MODULE_KINDS = ("augmentation", "relation", "kernel")

# elementary abelian quotients above this order use the known value d(ΔE/pΔE) = rank E
EXACT_QUOTIENT_ORDER = 32


# --------------------------------------------------------------------------- problems


_FACTOR_PATTERN = re.compile(r"^Nil\(\s*(?P<group>[^,()]+)\s*,\s*rank\s*=\s*(?P<rank>\d+)\s*\)$")


def parse_group(text: str) -> FiniteGroup:
    """C6, C2xC2, C1 ..."""
    parts = [p.strip() for p in text.strip().split("x")]
    orders = []
    for part in parts:
        if not re.fullmatch(r"C\d+", part):
            raise ProblemSchemaError(f"cannot read '{text}' as a product of cyclic groups", "factors")
        orders.append(int(part[1:]))
    if all(m == 1 for m in orders):
        return trivial_group()
    return abelian([m for m in orders if m > 1])


def parse_factor(text: str) -> FactorSpec:
    """C6 | C2xC2 | C5xZ | Z | Nil(C2xC2,rank=2)."""
    text = text.strip()
    match = _FACTOR_PATTERN.match(text)
    if match:
        return NilpotentProductFactor(parse_group(match["group"]), int(match["rank"]))
    if text == "Z":
        return NilpotentProductFactor(trivial_group(), 1)
    if text.endswith("xZ"):
        finite = text[: -len("xZ")]
        if re.fullmatch(r"C\d+", finite):
            return CyclicTimesZFactor(int(finite[1:]))
        return NilpotentProductFactor(parse_group(finite), 1)
    return FiniteFactor(parse_group(text))


def split_factors(text: str) -> List[str]:
    return [part.strip() for part in re.split(r"[,*](?![^()]*\))", text) if part.strip()]


@dataclass(frozen=True)
class FreeProductProblem:
    """G = G_1 * ... * G_n with the module kind induced from every factor."""

    factors: Tuple[FactorSpec, ...]
    module: str = "augmentation"
    stage: Optional[int] = None  # resolution stage s for module == "kernel"
    resolutions: Tuple[Optional[ResolutionSpec], ...] = ()

    def __post_init__(self) -> None:
        if not self.factors:
            raise ProblemSchemaError("a free product needs at least one factor", "factors")
        if self.module not in MODULE_KINDS:
            raise ProblemSchemaError(f"unknown module kind '{self.module}'", "module")
        if self.module == "kernel" and (self.stage is None or self.stage < 1):
            raise ProblemSchemaError(f"kernel modules need a stage s >= 1, got {self.stage}", "module.kernel")
        if self.resolutions and len(self.resolutions) != len(self.factors):
            raise ProblemSchemaError("give one resolution (or null) per factor", "resolutions")
        for i, factor in enumerate(self.factors):
            if isinstance(factor, FiniteFactor) and factor.group.order == 1:
                raise GroupConstructionError(f"factor {i} is trivial")
            if isinstance(factor, NilpotentProductFactor) and factor.group.order == 1 and factor.rank == 0:
                raise GroupConstructionError(f"factor {i} is trivial")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FreeProductProblem":
        """{"factors": ["C2", "C3xZ"], "module": "relation" | {"kernel": 3}, "presentations": {"0": {...}}}"""
        if "factors" not in data:
            raise ProblemSchemaError("missing factor list", "factors")
        factors = [parse_factor(f) for f in data["factors"]]
        for key, value in (data.get("presentations") or {}).items():
            index = int(key)
            if not 0 <= index < len(factors) or not isinstance(factors[index], FiniteFactor):
                raise ProblemSchemaError(f"presentation given for factor {key}, which is not finite", f"presentations.{key}")
            try:
                presentation = presentation_from_mapping(value, factors[index].group)
            except KeyError as error:
                raise ProblemSchemaError(f"presentation is missing {error}", f"presentations.{key}")
            factors[index] = FiniteFactor(factors[index].group, presentation)
        module, stage = data.get("module", "augmentation"), None
        if isinstance(module, Mapping):
            if set(module) != {"kernel"}:
                raise ProblemSchemaError(f"unknown module selector {dict(module)}", "module")
            module, stage = "kernel", int(module["kernel"])
        return cls(tuple(factors), module, stage)

    @property
    def n(self) -> int:
        return len(self.factors)

    def resolution(self, i: int) -> ResolutionSpec:
        if self.resolutions and self.resolutions[i] is not None:
            return self.resolutions[i]
        factor = self.factors[i]
        if not isinstance(factor, FiniteFactor):
            raise HypothesisViolation(f"resolution kernels are only built for finite factors, not {factor.label}")
        if len(factor.group.generators) != 1:
            raise HypothesisViolation(f"no resolution is built in for {factor.group.name}; supply one with its period")
        return cyclic_resolution(factor.group, self.stage)

    def support(self) -> List[int]:
        """∪ π(G_i) followed by the smallest prime outside it."""
        primes = set()
        for factor in self.factors:
            primes |= set(primes_of(factor.group))
        return sorted(primes) + [smallest_prime_outside(primes)]

    def describe(self) -> str:
        kind = f"kernel[{self.stage}]" if self.module == "kernel" else self.module
        return f"{' * '.join(f.label for f in self.factors)} ({kind})"


@dataclass
class FormulaReport:
    formula: str
    value: int
    table: Dict[int, int] = field(default_factory=dict)  # p -> Σ_i d_{G_i}(M_i/pM_i)
    argmax: Tuple[int, ...] = ()
    transcript: List[str] = field(default_factory=list)
    derived: Dict[str, Any] = field(default_factory=dict)

    def note(self, line: str) -> None:
        logger.debug(f"{self.formula}: {line}")
        self.transcript.append(line)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "formula": self.formula,
            "value": self.value,
            "table": {str(p): v for p, v in sorted(self.table.items())},
            "argmax": list(self.argmax),
            "transcript": list(self.transcript),
            "derived": dict(self.derived),
        }


def _argmax(table: Mapping[int, int]) -> Tuple[int, ...]:
    top = max(table.values())
    return tuple(p for p, v in sorted(table.items()) if v == top)


def _check_coprime(orders: Sequence[int]) -> None:
    for i in range(len(orders)):
        for j in range(i + 1, len(orders)):
            if gcd(orders[i], orders[j]) != 1:
                raise HypothesisViolation(f"factor orders {orders[i]} and {orders[j]} are not coprime")


# --------------------------------------------------------------------------- component counts


@lru_cache(maxsize=None)
def _finite_component(group: FiniteGroup, kind: str, presentation: Optional[Presentation], stage: Optional[int],
                      resolution: Optional[ResolutionSpec]) -> ZGLattice:
    if kind == "augmentation":
        return augmentation_lattice(group)
    if kind == "relation":
        return relation_lattice_of(group, presentation).lattice
    return resolution_kernel(resolution, stage)


def component_lattice(problem: FreeProductProblem, i: int) -> ZGLattice:
    factor = problem.factors[i]
    if not isinstance(factor, FiniteFactor):
        raise HypothesisViolation(f"{factor.label} has no finite component lattice")
    resolution = problem.resolution(i) if problem.module == "kernel" else None
    return _finite_component(factor.group, problem.module, factor.presentation, problem.stage, resolution)


def augmentation_count_mod_p(group: FiniteGroup, rank: int, p: int) -> int:
    """d(ΔH/pΔH) for H = G x Z^rank: max{d_G(ΔG/pΔG), dim G/G'G^p + rank}."""
    if group.order == 1:
        return rank
    finite = min_generators_module(augmentation_lattice(group).mod_p(p))
    return max(finite, commutator_quotient_rank(group, p) + rank)


def component_count(problem: FreeProductProblem, i: int, p: int) -> int:
    """d_{G_i}(M_i/pM_i)."""
    factor = problem.factors[i]
    if isinstance(factor, FiniteFactor):
        return min_generators_module(component_lattice(problem, i).mod_p(p))
    if isinstance(factor, CyclicTimesZFactor):
        if problem.module == "relation":
            return 2 if factor.n % p == 0 else 1
        if problem.module == "augmentation":
            return augmentation_count_mod_p(factor.group, 1, p)
    if isinstance(factor, NilpotentProductFactor):
        if problem.module == "augmentation":
            return augmentation_count_mod_p(factor.group, factor.rank, p)
        if problem.module == "relation" and factor.rank == 0:
            return min_generators_module(relation_lattice_of(factor.group).lattice.mod_p(p))
    raise HypothesisViolation(f"{problem.module} modules of {factor.label} are not supported")


def bergman_mod_p(problem: FreeProductProblem, p: int) -> int:
    """Σ_i d_{G_i}(M_i/pM_i), which equals d_G(M/pM) for the induced module."""
    return sum(component_count(problem, i, p) for i in range(problem.n))


def bergman_table(problem: FreeProductProblem) -> Dict[int, int]:
    return {p: bergman_mod_p(problem, p) for p in problem.support()}


def swan_class(problem: FreeProductProblem, i: int) -> Optional[str]:
    """Name of the built-in family of good Swan modules the i-th component belongs to, None if it is in none."""
    factor, kind = problem.factors[i], problem.module
    if isinstance(factor, FiniteFactor):
        if kind in ("augmentation", "relation"):
            return f"finite {kind}"
        resolution = problem.resolution(i)
        if resolution.period is None:
            raise HypothesisViolation(f"cohomological period of {factor.label} unknown; supply it with the resolution")
        if (problem.stage + 2) % resolution.period == 0:
            return None
        return "resolution kernel"
    if isinstance(factor, CyclicTimesZFactor):
        return "C_n x Z relation" if kind == "relation" else "nilpotent augmentation" if kind == "augmentation" else None
    if kind == "augmentation":
        return "nilpotent augmentation"
    if kind == "relation" and factor.rank == 0:
        return "finite relation"
    return None


def generic_values(problem: FreeProductProblem) -> List[int]:
    """δ_{G_i}(M_i), the component counts at a prime outside every π(G_i)."""
    good = problem.support()[-1]
    return [component_count(problem, i, good) for i in range(problem.n)]


def d_induced(problem: FreeProductProblem) -> FormulaReport:
    """d_G(M) = max_p Σ_i d_{G_i}(M_i/pM_i) when the hypotheses of the free-product theorem hold."""
    report = FormulaReport("d_induced", 0)
    classes = [swan_class(problem, i) for i in range(problem.n)]
    table = bergman_table(problem)
    report.table = table
    if all(c is not None for c in classes):
        report.note(f"every component is a good Swan module: {classes}")
    else:
        good = problem.support()[-1]
        deltas = generic_values(problem)
        excess = [
            (i, p) for i in range(problem.n) for p in problem.support()[:-1] if component_count(problem, i, p) > deltas[i]
        ]
        if not excess:
            report.note(f"components {[i for i, c in enumerate(classes) if c is None]} are not known to be Swan")
            raise HypothesisViolation(
                f"{problem.describe()}: no component is known to be Swan and none exceeds its generic value "
                f"(generic values at p = {good}: {deltas})"
            )
        report.note(f"component {excess[0][0]} exceeds its generic value at p = {excess[0][1]}")
    report.value = max(table.values())
    report.argmax = _argmax(table)
    report.derived["swan_classes"] = [c or "none" for c in classes]
    report.note(f"max of {table} attained at {report.argmax}")
    return report


# --------------------------------------------------------------------------- finite factors of coprime orders


def _finite_groups(problem: FreeProductProblem) -> List[FiniteGroup]:
    groups = []
    for factor in problem.factors:
        if not isinstance(factor, FiniteFactor):
            raise HypothesisViolation(f"{factor.label} is not a finite factor")
        groups.append(factor.group)
    _check_coprime([g.order for g in groups])
    return groups


def lattice_count(lattice: ZGLattice) -> int:
    """d_G(M) for a Swan lattice M: the largest d(M/pM) over π(G) and one good prime."""
    if lattice.rank == 0:
        return 0
    counts = [min_generators_module(lattice.mod_p(p)) for p in sorted(primes_of(lattice.group))]
    return max(counts + [d_rational(lattice)])


def _cross_check(report: FormulaReport, problem: FreeProductProblem) -> None:
    induced = d_induced(problem)
    report.table, report.argmax = induced.table, induced.argmax
    if induced.value != report.value:
        raise InvariantFailure(f"{report.formula} gives {report.value} but the Bergman sums give {induced.value}")
    report.note(f"agrees with max over Bergman sums {induced.table}")


def coprime_augmentation(problem: FreeProductProblem) -> FormulaReport:
    """d_G(ΔG) = max_k d_{G_k}(ΔG_k) + n - 1, with gap(G) = d(G) - d_G(ΔG)."""
    groups = _finite_groups(problem)
    problem = FreeProductProblem(problem.factors, "augmentation")
    counts = [lattice_count(augmentation_lattice(g)) for g in groups]
    d_groups = [min_generators_group(g) for g in groups]
    value = max(counts) + problem.n - 1
    report = FormulaReport("coprime_augmentation", value)
    report.note(f"d(ΔG_k) = {counts}, d(G_k) = {d_groups}")
    gap = sum(d_groups) - value
    component_gaps = [d - c for d, c in zip(d_groups, counts)]
    by_formula = min(
        component_gaps[k] + sum(d_groups[i] - 1 for i in range(problem.n) if i != k) for k in range(problem.n)
    )
    if gap != by_formula:
        raise InvariantFailure(f"gap {gap} disagrees with min_k formula {by_formula}")
    predicate = any(
        component_gaps[k] == 0 and all(d_groups[i] <= 1 for i in range(problem.n) if i != k) for k in range(problem.n)
    )
    if (gap == 0) != predicate:
        raise InvariantFailure(f"gap = {gap} but the cyclic-factor criterion says {predicate}")
    report.note(f"gap zero criterion (one factor of gap 0, the rest cyclic): {predicate}")
    report.derived.update({"gap": gap, "d_group": sum(d_groups), "component_gaps": component_gaps, "criterion": predicate})
    _cross_check(report, problem)
    return report


def coprime_relation(problem: FreeProductProblem) -> FormulaReport:
    """d_G(R̄) = max_k{d_{G_k}(R̄_k) + Σ_{i≠k} d(F_i)}, so adef(F/R) = max_k adef(F_k/R_k)."""
    groups = _finite_groups(problem)
    problem = FreeProductProblem(problem.factors, "relation")
    relation_lattices = [relation_lattice_of(f.group, f.presentation) for f in problem.factors]
    counts = [lattice_count(r.lattice) for r in relation_lattices]
    ranks = [r.presentation.rank for r in relation_lattices]
    value = max(counts[k] + sum(ranks[i] for i in range(problem.n) if i != k) for k in range(problem.n))
    report = FormulaReport("coprime_relation", value)
    report.note(f"d(R̄_k) = {counts}, d(F_k) = {ranks} for {[g.name for g in groups]}")
    adef = value - sum(ranks)
    component_adef = [c - r for c, r in zip(counts, ranks)]
    if adef != max(component_adef):
        raise InvariantFailure(f"adef {adef} differs from max of component adefs {component_adef}")
    report.derived.update({"adef": adef, "component_adef": component_adef, "d_free": sum(ranks)})
    _cross_check(report, problem)
    return report


def resolution_kernel_count(problem: FreeProductProblem, s: Optional[int] = None) -> FormulaReport:
    """d_G(ker θ_s) as a max of Bergman sums and, for coprime orders, as max_k{d(K_k) + Σ_{i≠k} d(QK_i)}."""
    s = s if s is not None else problem.stage
    problem = FreeProductProblem(problem.factors, "kernel", s, problem.resolutions)
    for i in range(problem.n):
        resolution = problem.resolution(i)
        if resolution.period is None:
            raise HypothesisViolation(f"cohomological period of factor {i} unknown")
        if (s + 2) % resolution.period == 0:
            raise HypothesisViolation(f"s + 2 = {s + 2} is divisible by the period {resolution.period} of factor {i}")
    induced = d_induced(problem)
    report = FormulaReport("resolution_kernel_count", induced.value, induced.table, induced.argmax)
    report.note(f"s = {s}: max over Bergman sums {induced.table}")
    orders = [f.group.order for f in problem.factors]
    if all(gcd(orders[i], orders[j]) == 1 for i in range(len(orders)) for j in range(i + 1, len(orders))):
        kernels = [component_lattice(problem, i) for i in range(problem.n)]
        rational = [resolution_rational_count(problem.resolution(i), s) for i in range(problem.n)]
        measured = [d_rational(k) for k in kernels]
        if rational != measured:
            raise InvariantFailure(f"rational counts {measured} differ from the alternating sums {rational}")
        counts = [lattice_count(k) for k in kernels]
        coprime = max(counts[k] + sum(rational[i] for i in range(problem.n) if i != k) for k in range(problem.n))
        if coprime != report.value:
            raise InvariantFailure(f"coprime formula gives {coprime}, Bergman sums give {report.value}")
        report.note(f"coprime orders: d(K_k) = {counts}, d(QK_i) = {rational}")
        report.derived.update({"component_counts": counts, "rational_counts": rational})
    return report


# --------------------------------------------------------------------------- infinite factors


def _nilpotent_parts(problem: FreeProductProblem) -> List[NilpotentProductFactor]:
    parts = [as_nilpotent_product(f) for f in problem.factors]
    _check_coprime([p.group.order for p in parts])
    return parts


def mixed_augmentation(problem: FreeProductProblem) -> FormulaReport:
    """H_i = G_i x A_i: d_H(ΔH) = max_k{d(H_k) + Σ_{i≠k}(d(A_i) + δ_{A_i,1})}, gap = min_k Σ_{i≠k}(d(G_i) - δ_{A_i,1})."""
    parts = _nilpotent_parts(problem)
    problem = FreeProductProblem(problem.factors, "augmentation")
    d_finite = [min_generators_group(p.group) for p in parts]
    d_h = [d + p.rank for d, p in zip(d_finite, parts)]
    trivial_a = [1 if p.rank == 0 else 0 for p in parts]
    n = problem.n
    value = max(d_h[k] + sum(parts[i].rank + trivial_a[i] for i in range(n) if i != k) for k in range(n))
    gap = min(sum(d_finite[i] - trivial_a[i] for i in range(n) if i != k) for k in range(n))
    report = FormulaReport("mixed_augmentation", value)
    report.note(f"d(H_i) = {d_h}, d(A_i) = {[p.rank for p in parts]}")
    if gap != sum(d_h) - value:
        raise InvariantFailure(f"gap formula gives {gap}, d(H) - d(ΔH) gives {sum(d_h) - value}")
    report.derived.update({"gap": gap, "d_group": sum(d_h)})
    if all(p.group.is_abelian() for p in parts):
        awkward = [i for i, p in enumerate(parts) if p.group.order > 1 and not (p.rank == 0 and d_finite[i] <= 1)]
        criterion = len(awkward) <= 1
        if criterion != (gap == 0):
            raise InvariantFailure(f"gap = {gap} but the torsion-free-or-cyclic criterion says {criterion}")
        report.note(f"factors neither torsion free nor finite cyclic: {awkward}")
        report.derived["criterion"] = criterion
    _cross_check(report, problem)
    return report


def mixed_relation(problem: FreeProductProblem) -> FormulaReport:
    """Natural presentations of (C_{n_i} x Z), coprime n_i: d_H(R̄) = n + 1."""
    for factor in problem.factors:
        if not isinstance(factor, CyclicTimesZFactor):
            raise HypothesisViolation(f"{factor.label} is not of the form C_n x Z with its natural presentation")
    _check_coprime([f.n for f in problem.factors])
    problem = FreeProductProblem(problem.factors, "relation")
    value = problem.n + 1
    report = FormulaReport("mixed_relation", value)
    report.note("each S̄_i needs 2 generators mod p | n_i and 1 generically")
    _cross_check(report, problem)
    report.derived["d_free"] = 2 * problem.n
    return report


@dataclass
class NilpotentGapReport:
    criterion_met: bool
    exceptional: Tuple[int, ...]  # factors neither cyclic nor with torsion-free abelianisation
    prime: Optional[int] = None  # the generating prime q shared by J(q)
    shared: Tuple[int, ...] = ()  # J(q)
    primes: Tuple[int, ...] = ()  # p_i per factor
    quotients: Tuple[str, ...] = ()  # H_i / H_i' H_i^{p_i}
    table: Dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "criterion_met": self.criterion_met,
            "exceptional": list(self.exceptional),
            "prime": self.prime,
            "shared": list(self.shared),
            "primes": list(self.primes),
            "quotients": list(self.quotients),
            "table": {str(p): v for p, v in sorted(self.table.items())},
            "gap": 0 if self.criterion_met else None,
        }


def _elementary_count(p: int, rank: int, q: int) -> int:
    """d(ΔE/qΔE) for E elementary abelian of order p^rank."""
    if p**rank <= EXACT_QUOTIENT_ORDER:
        return min_generators_module(augmentation_lattice(abelian([p] * rank)).mod_p(q))
    return rank if q == p else 1


def nilpotent_gap_zero(factors: Sequence[FactorSpec]) -> NilpotentGapReport:
    """gap(H) = 0 when all but at most one nilpotent factor is cyclic or has torsion-free abelianisation.

    The proof is constructive: every factor is sent onto an elementary abelian quotient of the same
    rank, at a generating prime shared with the exceptional factor wherever possible, and the Bergman
    sums of the image free product reach d(H).
    """
    parts = [as_nilpotent_product(f) for f in factors]
    d_h = [min_generators_group(p) for p in parts]
    torsion_free = [p.group.order == 1 for p in parts]
    exceptional = tuple(i for i in range(len(parts)) if not (d_h[i] <= 1 or torsion_free[i]))
    if len(exceptional) > 1:
        logger.debug(f"gap criterion fails: factors {exceptional} are neither cyclic nor torsion free")
        return NilpotentGapReport(False, exceptional)
    if exceptional:
        anchor = exceptional[0]
    else:
        anchor = next((i for i, p in enumerate(parts) if p.group.order > 1), 0)
    anchor_primes = generating_primes(parts[anchor])
    q = 2 if anchor_primes is ALL_PRIMES else min(anchor_primes)
    chosen, shared = [], []
    for i, part in enumerate(parts):
        primes = generating_primes(part)
        if q in primes:
            chosen.append(q)
            shared.append(i)
        else:
            chosen.append(min(primes))
    table: Dict[int, int] = {}
    for p in sorted(set(chosen)) + [smallest_prime_outside(set(chosen))]:
        table[p] = sum(_elementary_count(c, d, p) for c, d in zip(chosen, d_h))
    if max(table.values()) != sum(d_h):
        raise InvariantFailure(f"elementary abelian image reaches {max(table.values())}, not d(H) = {sum(d_h)}")
    quotients = tuple(abelian([c] * d).name if d else "C1" for c, d in zip(chosen, d_h))
    return NilpotentGapReport(True, exceptional, q, tuple(shared), tuple(chosen), quotients, table)


@dataclass
class GapZeroReport:
    label: str
    d_group: int
    quotient_ranks: Dict[int, int]  # p -> dim H/H'H^p
    generating_primes: Any  # a tuple, or ALL_PRIMES

    def to_dict(self) -> Dict[str, Any]:
        primes = "all" if self.generating_primes is ALL_PRIMES else list(self.generating_primes)
        return {"factor": self.label, "d_group": self.d_group, "gap": 0,
                "quotient_ranks": {str(p): r for p, r in sorted(self.quotient_ranks.items())}, "generating_primes": primes}


def gap_zero_by_quotient(factor: FactorSpec) -> GapZeroReport:
    """A nilpotent H has gap 0: some H/H'H^p has d(H) generators, and its augmentation ideal is Swan."""
    part = as_nilpotent_product(factor)
    d = min_generators_group(part)
    primes = sorted(primes_of(part.group))
    primes.append(smallest_prime_outside(set(primes)))
    ranks = {p: commutator_quotient_rank(part.group, p) + part.rank for p in primes}
    generating = generating_primes(part)
    if generating is not ALL_PRIMES:
        generating = tuple(sorted(generating))
    if not any(r == d for r in ranks.values()):
        raise InvariantFailure(f"no elementary abelian quotient of {part.label} has {d} generators")
    return GapZeroReport(part.label, d, ranks, generating)


def bridson_q(n: int) -> int:
    return (n + 1) ** n - 1


def bridson_tweedale(ms: Sequence[int]) -> FormulaReport:
    """Q_m = <x, t | ρ_m, x^m>; the free product of Q_{m_i} presented by the ρ_{m_i} alone has d(R̄) = r + 1."""
    if not ms:
        raise ProblemSchemaError("give at least one m", "m")
    if any(m < 2 for m in ms):
        raise HypothesisViolation(f"every m must be at least 2, got {tuple(ms)}")
    qs = [bridson_q(m) for m in ms]
    for i in range(len(qs)):
        for j in range(i + 1, len(qs)):
            if gcd(qs[i], qs[j]) != 1:
                raise HypothesisViolation(f"gcd(q_{ms[i]}, q_{ms[j]}) = {gcd(qs[i], qs[j])} is not 1")
    r = len(ms)
    report = FormulaReport("bridson_tweedale", r + 1)
    bad_primes = [sympy.primefactors(q) for q in qs]
    for p in sorted({p for m in ms for p in sympy.primefactors(m)}):
        report.table[p] = sum(2 if m % p == 0 else 1 for m in ms)
    outside = smallest_prime_outside({p for ps in bad_primes for p in ps})
    report.table[outside] = r
    report.argmax = _argmax(report.table)
    if max(report.table.values()) != r + 1:
        raise InvariantFailure(f"per-prime sums {report.table} do not reach r + 1 = {r + 1}")
    report.note("each R̄_i is good with δ = 1 and exceptional primes π(q_m); it needs 2 generators mod p | m")
    report.derived.update(
        {
            "q": {str(m): q for m, q in zip(ms, qs)},
            "c": {str(m): m * q for m, q in zip(ms, qs)},
            "exceptional_primes": {str(m): ps for m, ps in zip(ms, bad_primes)},
            "delta": {str(m): 1 for m in ms},
        }
    )
    return report


def relation_generator_count(*_: Any, **__: Any) -> int:
    """d_F(R), the number of normal generators of R, is out of reach of these methods."""
    raise RefusedComputation("d_F(R) is not computed: module generator counts only bound it from below")
