"""Finite groups by multiplication table, words, free presentations and the factor specs of free products."""

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations, product
from math import prod
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

import sympy
from gengap.errors import GroupConstructionError, HypothesisViolation, UndeclaredGeneratorError
from loguru import logger

# groups up to this order get their table axioms checked exhaustively on construction
EXHAUSTIVE_CHECK_ORDER = 24


class _AllPrimes:
    """Symbolic value for 'every prime', e.g. the generating primes of a free abelian group."""

    def __contains__(self, p: object) -> bool:
        return isinstance(p, int) and sympy.isprime(p)

    def __repr__(self) -> str:
        return "ALL_PRIMES"


ALL_PRIMES = _AllPrimes()


@dataclass(frozen=True)
class FiniteGroup:
    """A finite group given by its multiplication table.

    Elements are the indices 0..order-1; table[g][h] is the index of the product gh.
    `generators` are the distinguished generators, named by `generator_names` (a, b, c... by default).
    """

    table: Tuple[Tuple[int, ...], ...]
    identity: int
    generators: Tuple[int, ...]
    generator_names: Tuple[str, ...] = ()
    name: str = field(default="", compare=False)
    invariants: Optional[Tuple[int, ...]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        n = len(self.table)
        if n == 0:
            raise GroupConstructionError("a group needs at least one element")
        if any(len(row) != n for row in self.table):
            raise GroupConstructionError(f"multiplication table of {self.name or 'group'} is not square")
        if not self.generator_names:
            object.__setattr__(self, "generator_names", tuple("abcdefgh"[i] for i in range(len(self.generators))))
        if len(self.generator_names) != len(self.generators):
            raise GroupConstructionError("every generator needs exactly one name")
        if n <= EXHAUSTIVE_CHECK_ORDER:
            self._check_axioms()
        if len(self.closure(self.generators)) != n:
            raise GroupConstructionError(f"generators {self.generators} do not generate {self.name or 'the group'}")

    def _check_axioms(self) -> None:
        n, e, t = self.order, self.identity, self.table
        for g in range(n):
            if t[e][g] != g or t[g][e] != g:
                raise GroupConstructionError(f"{e} is not an identity for element {g}")
            if e not in t[g]:
                raise GroupConstructionError(f"element {g} has no inverse")
        for g, h, k in product(range(n), repeat=3):
            if t[t[g][h]][k] != t[g][t[h][k]]:
                raise GroupConstructionError(f"table is not associative at ({g}, {h}, {k})")

    @property
    def order(self) -> int:
        return len(self.table)

    def __len__(self) -> int:
        return self.order

    def mul(self, g: int, h: int) -> int:
        return self.table[g][h]

    @cached_property
    def inverses(self) -> Tuple[int, ...]:
        return tuple(row.index(self.identity) for row in self.table)

    def inv(self, g: int) -> int:
        return self.inverses[g]

    def power(self, g: int, k: int) -> int:
        base = g if k >= 0 else self.inv(g)
        out = self.identity
        for _ in range(abs(k)):
            out = self.mul(out, base)
        return out

    def element_order(self, g: int) -> int:
        k, x = 1, g
        while x != self.identity:
            x = self.mul(x, g)
            k += 1
        return k

    def generator(self, name: str) -> int:
        try:
            return self.generators[self.generator_names.index(name)]
        except ValueError:
            raise UndeclaredGeneratorError(f"group {self.name} has no generator named '{name}'")

    def closure(self, elements: Sequence[int]) -> FrozenSet[int]:
        seen = {self.identity}
        queue = deque([self.identity])
        while queue:
            x = queue.popleft()
            for g in elements:
                y = self.mul(x, g)
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return frozenset(seen)

    @cached_property
    def words(self) -> Tuple[Tuple[int, ...], ...]:
        """For every element a shortest word (as generator positions) evaluating to it."""
        words: Dict[int, Tuple[int, ...]] = {self.identity: ()}
        queue = deque([self.identity])
        while queue:
            x = queue.popleft()
            for position, g in enumerate(self.generators):
                y = self.mul(x, g)
                if y not in words:
                    words[y] = words[x] + (position,)
                    queue.append(y)
        return tuple(words[g] for g in range(self.order))

    def is_abelian(self) -> bool:
        return all(self.mul(g, h) == self.mul(h, g) for g in self.generators for h in self.generators)

    def is_normal(self, subgroup: FrozenSet[int]) -> bool:
        return all(self.mul(self.mul(self.inv(g), h), g) in subgroup for g in self.generators for h in subgroup)

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name or self.order})"


def _relabel(elements: List[Tuple], mul, identity, generators, names, name, invariants=None) -> FiniteGroup:
    index = {x: i for i, x in enumerate(elements)}
    table = tuple(tuple(index[mul(x, y)] for y in elements) for x in elements)
    return FiniteGroup(
        table, index[identity], tuple(index[g] for g in generators), tuple(names), name=name, invariants=invariants
    )


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise GroupConstructionError(f"cyclic group order must be positive, got {n}")
    table = tuple(tuple((i + j) % n for j in range(n)) for i in range(n))
    if n == 1:
        return FiniteGroup(table, 0, (), (), name="C1", invariants=())
    return FiniteGroup(table, 0, (1,), ("a",), name=f"C{n}", invariants=(n,))


def trivial_group() -> FiniteGroup:
    return cyclic(1)


def normalize_invariants(factors: Sequence[int]) -> Tuple[int, ...]:
    """Rewrite a list of cyclic orders as the divisibility chain m_1 | m_2 | ... with all m_i >= 2."""
    primary: Dict[int, List[int]] = {}
    for m in factors:
        if m < 1:
            raise GroupConstructionError(f"cyclic orders must be positive, got {m}")
        for p, e in sympy.factorint(m).items():
            primary.setdefault(p, []).append(p**e)
    length = max((len(v) for v in primary.values()), default=0)
    chain = [1] * length
    for powers in primary.values():
        for k, q in enumerate(sorted(powers, reverse=True)):
            chain[length - 1 - k] *= q
    return tuple(m for m in chain if m > 1)


def abelian(factors: Sequence[int]) -> FiniteGroup:
    """Product of cyclic groups; generators follow the normalized invariant factors."""
    if any(m < 2 for m in factors):
        raise GroupConstructionError(f"invariant factors must each be at least 2, got {tuple(factors)}")
    chain = normalize_invariants(factors)
    if not chain:
        return trivial_group()
    if len(chain) == 1:
        return cyclic(chain[0])
    elements = list(product(*(range(m) for m in chain)))
    zero = tuple(0 for _ in chain)
    gens = [tuple(1 if i == k else 0 for i in range(len(chain))) for k in range(len(chain))]

    def mul(x, y):
        return tuple((a + b) % m for a, b, m in zip(x, y, chain))

    name = "x".join(f"C{m}" for m in chain)
    return _relabel(elements, mul, zero, gens, "abcdefgh"[: len(chain)], name, invariants=chain)


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    elements = list(product(range(g.order), range(h.order)))

    def mul(x, y):
        return (g.mul(x[0], y[0]), h.mul(x[1], y[1]))

    gens = [(x, h.identity) for x in g.generators] + [(g.identity, y) for y in h.generators]
    names = "abcdefgh"[: len(gens)]
    invariants = None
    if g.invariants is not None and h.invariants is not None:
        invariants = normalize_invariants(g.invariants + h.invariants)
    return _relabel(elements, mul, (g.identity, h.identity), gens, names, f"{g.name}x{h.name}", invariants)


def symmetric3() -> FiniteGroup:
    """S3 as permutations of (0, 1, 2); generators a = (0 1 2), b = (0 1)."""
    elements = [(0, 1, 2), (1, 2, 0), (2, 0, 1), (1, 0, 2), (0, 2, 1), (2, 1, 0)]

    def mul(x, y):
        # apply x first, then y
        return tuple(y[x[i]] for i in range(3))

    return _relabel(elements, mul, (0, 1, 2), [(1, 2, 0), (1, 0, 2)], "ab", "S3")


def dihedral(n: int) -> FiniteGroup:
    """The dihedral group of order 2n; generators a = rotation, b = reflection."""
    if n < 2:
        raise GroupConstructionError(f"dihedral groups need n >= 2, got {n}")
    elements = [(k, s) for s in range(2) for k in range(n)]

    def mul(x, y):
        return ((x[0] + (-1) ** x[1] * y[0]) % n, (x[1] + y[1]) % 2)

    return _relabel(elements, mul, (0, 0), [(1, 0), (0, 1)], "ab", f"D{2 * n}")


def quaternion8() -> FiniteGroup:
    """Q8 as the units ±1, ±i, ±j, ±k; generators a = i, b = j."""
    one = (1, 0, 0, 0)
    units = [tuple(sign * (1 if k == slot else 0) for k in range(4)) for slot in range(4) for sign in (1, -1)]

    def mul(x, y):
        a1, b1, c1, d1 = x
        a2, b2, c2, d2 = y
        return (
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )

    return _relabel(units, mul, one, [(0, 1, 0, 0), (0, 0, 1, 0)], "ab", "Q8")


def alternating4() -> FiniteGroup:
    """A4 as even permutations of (0, 1, 2, 3); generators a = (0 1 2), b = (0 1)(2 3)."""

    def even(x) -> bool:
        return sum(1 for i in range(4) for j in range(i + 1, 4) if x[i] > x[j]) % 2 == 0

    elements = [x for x in permutations(range(4)) if even(x)]

    def mul(x, y):
        return tuple(y[x[i]] for i in range(4))

    return _relabel(elements, mul, (0, 1, 2, 3), [(1, 2, 0, 3), (1, 0, 3, 2)], "ab", "A4")


def primes_of(group: FiniteGroup) -> FrozenSet[int]:
    return frozenset(sympy.primefactors(group.order))


def quotient_group(group: FiniteGroup, normal: FrozenSet[int]) -> Tuple[FiniteGroup, Tuple[int, ...]]:
    """G/N together with the projection as a tuple element -> coset index."""
    if not group.is_normal(normal):
        raise HypothesisViolation(f"subgroup of order {len(normal)} is not normal in {group.name}")
    cosets: List[FrozenSet[int]] = []
    projection = [-1] * group.order
    for g in range(group.order):
        if projection[g] >= 0:
            continue
        coset = frozenset(group.mul(g, n) for n in normal)
        for x in coset:
            projection[x] = len(cosets)
        cosets.append(coset)
    reps = [min(c) for c in cosets]
    table = tuple(tuple(projection[group.mul(x, y)] for y in reps) for x in reps)
    gens = sorted({projection[g] for g in group.generators if projection[g] != projection[group.identity]})
    quotient = FiniteGroup(table, projection[group.identity], tuple(gens), name=f"{group.name}/N{len(normal)}")
    return quotient, tuple(projection)


def p_part(n: int, p: int) -> int:
    out = 1
    while n % p == 0:
        n //= p
        out *= p
    return out


def normal_sylow(group: FiniteGroup, p: int) -> FrozenSet[int]:
    """The normal Sylow p-subgroup; raises HypothesisViolation when the Sylow p-subgroups are not normal."""
    elements = frozenset(g for g in range(group.order) if p_part(group.element_order(g), p) == group.element_order(g))
    if len(elements) != p_part(group.order, p):
        raise HypothesisViolation(f"the Sylow {p}-subgroup of {group.name} is not normal")
    return elements


def is_nilpotent(group: FiniteGroup) -> bool:
    try:
        for p in primes_of(group):
            normal_sylow(group, p)
    except HypothesisViolation:
        return False
    return True


def commutator_quotient_rank(group: FiniteGroup, p: int) -> int:
    """Rank of the elementary abelian quotient G/G'G^p."""
    n = group.order
    words = [group.mul(group.mul(g, h), group.mul(group.inv(g), group.inv(h))) for g in range(n) for h in range(n)]
    words += [group.power(g, p) for g in range(n)]
    kernel = group.closure(sorted(set(words)))
    index = n // len(kernel)
    rank = 0
    while index > 1:
        index //= p
        rank += 1
    return rank


# --------------------------------------------------------------------------- words and presentations


@dataclass(frozen=True)
class Word:
    """A word in a free group: a tuple of (generator symbol, +1/-1) letters."""

    letters: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        for symbol, exponent in self.letters:
            if exponent not in (1, -1):
                raise ValueError(f"letter exponents must be +1 or -1, got {exponent} on '{symbol}'")

    @classmethod
    def parse(cls, text: str) -> "Word":
        """Parse 'x^3 c x^-1 C'; an upper case single letter means the inverse of its lower case letter."""
        letters: List[Tuple[str, int]] = []
        for token in text.replace("*", " ").split():
            symbol, _, power = token.partition("^")
            exponent = int(power) if power else 1
            if not power and len(symbol) == 1 and symbol.isupper():
                symbol, exponent = symbol.lower(), -1
            sign = 1 if exponent > 0 else -1
            letters.extend([(symbol, sign)] * abs(exponent))
        return cls(tuple(letters))

    @classmethod
    def power_of(cls, symbol: str, k: int) -> "Word":
        return cls(((symbol, 1 if k > 0 else -1),) * abs(k))

    def inverse(self) -> "Word":
        return Word(tuple((s, -e) for s, e in reversed(self.letters)))

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def reduced(self) -> "Word":
        out: List[Tuple[str, int]] = []
        for letter in self.letters:
            if out and out[-1][0] == letter[0] and out[-1][1] == -letter[1]:
                out.pop()
            else:
                out.append(letter)
        return Word(tuple(out))

    def symbols(self) -> FrozenSet[str]:
        return frozenset(s for s, _ in self.letters)

    def __str__(self) -> str:
        return " ".join(s if e == 1 else f"{s}^-1" for s, e in self.letters) or "1"


def commutator(a: Word, b: Word) -> Word:
    """[a, b] = a b a^-1 b^-1."""
    return a * b * a.inverse() * b.inverse()


@dataclass(frozen=True)
class Presentation:
    generators: Tuple[str, ...]
    relators: Tuple[Word, ...]
    target: FiniteGroup
    images: Tuple[int, ...]  # image in target of each generator, in order

    def __post_init__(self) -> None:
        if len(self.images) != len(self.generators):
            raise GroupConstructionError("every presentation generator needs an image")
        for relator in self.relators:
            if self.evaluate(relator) != self.target.identity:
                raise GroupConstructionError(f"relator {relator} does not evaluate to the identity")
        if len(self.target.closure(self.images)) != self.target.order:
            raise GroupConstructionError(f"generator images do not generate {self.target.name}")

    @property
    def rank(self) -> int:
        """d(F), the number of free generators."""
        return len(self.generators)

    def image(self, symbol: str) -> int:
        try:
            return self.images[self.generators.index(symbol)]
        except ValueError:
            raise UndeclaredGeneratorError(f"'{symbol}' is not a generator of this presentation")

    def evaluate(self, word: Word) -> int:
        out = self.target.identity
        for symbol, exponent in word.letters:
            g = self.image(symbol)
            out = self.target.mul(out, g if exponent == 1 else self.target.inv(g))
        return out


def natural_presentation(group: FiniteGroup) -> Presentation:
    """<x | x^n> for cyclic groups; for an abelian group on generators x1.. with invariant factors m_i,
    the relators x_i^{m_i} and all commutators [x_i, x_j]."""
    if group.invariants is None:
        raise HypothesisViolation(f"no natural presentation is built in for {group.name}")
    if len(group.generators) == 1:
        n = group.element_order(group.generators[0])
        return Presentation(("x",), (Word.power_of("x", n),), group, group.generators)
    symbols = ("x", "y", "z", "t")[: len(group.generators)] if len(group.generators) <= 4 else tuple(
        f"x{i}" for i in range(len(group.generators))
    )
    relators = [Word.power_of(s, group.element_order(g)) for s, g in zip(symbols, group.generators)]
    for i in range(len(symbols)):
        for j in range(i + 1, len(symbols)):
            relators.append(commutator(Word.power_of(symbols[i], 1), Word.power_of(symbols[j], 1)))
    return Presentation(symbols, tuple(relators), group, group.generators)


def presentation_from_mapping(data: Mapping, group: FiniteGroup) -> Presentation:
    """Build a presentation from {"generators": [...], "relators": ["x^2", ...], "images": {"x": "a", ...}};
    images are generator names of the group or element indices."""
    generators = tuple(data["generators"])
    relators = tuple(Word.parse(r) for r in data["relators"])
    images = []
    for symbol in generators:
        value = data["images"][symbol]
        images.append(group.generator(value) if isinstance(value, str) else int(value))
    return Presentation(generators, relators, group, tuple(images))


# --------------------------------------------------------------------------- factors of free products


@dataclass(frozen=True)
class FiniteFactor:
    group: FiniteGroup
    presentation: Optional[Presentation] = None

    @property
    def label(self) -> str:
        return self.group.name


@dataclass(frozen=True)
class CyclicTimesZFactor:
    """C_n x Z with its natural presentation <x, c | x^n, [x, c]>."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise GroupConstructionError(f"C_n x Z needs n >= 2, got {self.n}")

    @cached_property
    def group(self) -> FiniteGroup:
        return cyclic(self.n)

    @property
    def rank(self) -> int:
        return 1

    @property
    def label(self) -> str:
        return f"C{self.n}xZ"

    def presentation_words(self) -> Tuple[Word, Word]:
        x, c = Word.power_of("x", 1), Word.power_of("c", 1)
        return Word.power_of("x", self.n), commutator(x, c)


@dataclass(frozen=True)
class NilpotentProductFactor:
    """G x Z^rank with G finite nilpotent."""

    group: FiniteGroup
    rank: int

    def __post_init__(self) -> None:
        if self.rank < 0:
            raise GroupConstructionError(f"free abelian rank must be non-negative, got {self.rank}")
        if not is_nilpotent(self.group):
            raise HypothesisViolation(f"{self.group.name} is not nilpotent")

    @property
    def label(self) -> str:
        return f"Nil({self.group.name},rank={self.rank})"


FactorSpec = Union[FiniteFactor, CyclicTimesZFactor, NilpotentProductFactor]


def as_nilpotent_product(factor: FactorSpec) -> NilpotentProductFactor:
    if isinstance(factor, NilpotentProductFactor):
        return factor
    if isinstance(factor, CyclicTimesZFactor):
        return NilpotentProductFactor(factor.group, 1)
    return NilpotentProductFactor(factor.group, 0)


def min_generators_group(group: Union[FiniteGroup, FactorSpec]) -> int:
    """d(G) = max_p rank(G/G'G^p); G must be nilpotent.

    d(G x Z^r) is d(G) plus r.
    """
    if not isinstance(group, FiniteGroup):
        if isinstance(group, FiniteFactor):
            return min_generators_group(group.group)
        factor = as_nilpotent_product(group)
        return min_generators_group(factor.group) + factor.rank
    if not is_nilpotent(group):
        raise HypothesisViolation(f"{group.name} is not nilpotent")
    return max((commutator_quotient_rank(group, p) for p in primes_of(group)), default=0)


def generating_primes(group: Union[FiniteGroup, FactorSpec]):
    """Primes p with d(G/G'G^p) = d(G); ALL_PRIMES when the finite part is trivial and the free rank positive."""
    if not isinstance(group, FiniteGroup):
        factor = as_nilpotent_product(group)
        if factor.group.order == 1 and factor.rank > 0:
            return ALL_PRIMES
        return generating_primes(factor.group)
    d = min_generators_group(group)
    primes = frozenset(p for p in primes_of(group) if commutator_quotient_rank(group, p) == d)
    logger.debug(f"generating primes of {group.name}: {sorted(primes)}")
    return primes


def smallest_prime_outside(excluded) -> int:
    p = 2
    while p in excluded:
        p = sympy.nextprime(p)
    return p


def good_primes(excluded, count: int) -> List[int]:
    out: List[int] = []
    p = 1
    while len(out) < count:
        p = sympy.nextprime(p)
        if p not in excluded:
            out.append(p)
    return out


def crt_units(primes: Sequence[int]) -> Dict[int, int]:
    """For each p the integer p'·(p'^-1 mod p), congruent to 1 mod p and 0 mod the other primes."""
    if len(set(primes)) != len(primes):
        raise GroupConstructionError(f"primes {tuple(primes)} are not distinct")
    units = {}
    for p in primes:
        other = prod(q for q in primes if q != p)
        units[p] = other * pow(other, -1, p)
    return units
