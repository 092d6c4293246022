"""ZG-lattices, F_pG-modules and finite ZG-modules.

Modules are right modules: a vector v is acted on as v·A_g, so A_{gh} = A_g·A_h.
When the Sylow p-subgroup P is normal, rad(F_pG) = F_pG·ΔP and the simple F_pG-modules are those of the
semisimple F_p[G/P]. Otherwise the simple modules are read off a composition series of the regular module
and the radical of a module is the common kernel of its maps onto them.
"""

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations, product
from math import ceil
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from gengap.config import DEFAULT_SETTINGS
from gengap.errors import (
    BudgetExhausted,
    HypothesisViolation,
    InvalidTargetError,
    ShapeMismatchError,
)
from gengap.exactla import (
    EchelonSpan,
    FpMatrix,
    IntegerSolver,
    IntMatrix,
    as_int_matrix,
    check_prime,
    hermite_normal_form,
    int_identity,
    int_matmul,
    int_zeros,
    inverse_mod_p,
    invariant_factors_to_exponent,
    lattice_coordinates,
    left_kernel,
    matmul_mod,
    rref,
    smith_normal_form,
    solve_mod_p,
)
from gengap.groups import FiniteGroup, normal_sylow, primes_of, quotient_group, smallest_prime_outside
from loguru import logger


@dataclass(frozen=True, eq=False)
class FpGModule:
    group: FiniteGroup
    p: int
    dim: int
    actions: Tuple[np.ndarray, ...]  # one dim x dim matrix per group generator

    def __post_init__(self) -> None:
        check_prime(self.p)
        if len(self.actions) != len(self.group.generators):
            raise ShapeMismatchError(f"need {len(self.group.generators)} action matrices, got {len(self.actions)}")
        actions = tuple(np.asarray(a, dtype=np.int64).reshape(self.dim, self.dim) % self.p for a in self.actions)
        object.__setattr__(self, "actions", actions)

    @cached_property
    def element_actions(self) -> Tuple[np.ndarray, ...]:
        out = []
        for word in self.group.words:
            m = np.eye(self.dim, dtype=np.int64)
            for position in word:
                m = matmul_mod(m, self.actions[position], self.p)
            out.append(m)
        return tuple(out)

    def act(self, v: np.ndarray, g: int) -> np.ndarray:
        return matmul_mod(np.asarray(v, dtype=np.int64).reshape(1, -1), self.element_actions[g], self.p)[0]

    def validate(self) -> None:
        """Check that g -> A_g is a homomorphism of the whole group."""
        table = self.group.table
        for g in range(self.group.order):
            for h in range(self.group.order):
                lhs = matmul_mod(self.element_actions[g], self.element_actions[h], self.p)
                if not np.array_equal(lhs, self.element_actions[table[g][h]]):
                    raise HypothesisViolation(f"action is not a homomorphism at ({g}, {h})")

    def spin(self, seeds: Sequence[np.ndarray]) -> FpMatrix:
        """Reduced echelon basis of the smallest submodule containing the seeds."""
        span = EchelonSpan(self.dim, self.p)
        queue: List[np.ndarray] = []
        for v in seeds:
            v = np.asarray(v, dtype=np.int64) % self.p
            if len(v) != self.dim:
                raise ShapeMismatchError(f"seed of length {len(v)} does not live in a module of dimension {self.dim}")
            if span.add(v):
                queue.append(v)
        while queue:
            v = queue.pop()
            for a in self.actions:
                w = matmul_mod(v.reshape(1, -1), a, self.p)[0]
                if span.add(w):
                    queue.append(w)
        return span.matrix()

    def submodule(self, basis: FpMatrix) -> "FpGModule":
        """The submodule spanned by `basis` (which must be action closed), in the coordinates of its rref basis."""
        reduced = rref(basis)
        rows, pivots = reduced.basis.entries, list(reduced.pivots)
        actions = []
        for a in self.actions:
            images = matmul_mod(rows, a, self.p)
            actions.append(images[:, pivots] if pivots else np.zeros((0, 0), dtype=np.int64))
        return FpGModule(self.group, self.p, reduced.rank, tuple(actions))

    def quotient(self, basis: FpMatrix) -> "Quotient":
        reduced = rref(basis)
        pivots = list(reduced.pivots)
        free = [c for c in range(self.dim) if c not in set(pivots)]
        rows = reduced.basis.entries
        projection = np.zeros((self.dim, len(free)), dtype=np.int64)
        for i in range(self.dim):
            e = np.zeros(self.dim, dtype=np.int64)
            e[i] = 1
            for row, c in zip(rows, pivots):
                if e[c]:
                    e = (e - e[c] * row) % self.p
            projection[i] = e[free]
        actions = tuple(matmul_mod(a[free, :], projection, self.p) for a in self.actions)
        return Quotient(FpGModule(self.group, self.p, len(free), actions), tuple(free), projection)

    def dual(self) -> "FpGModule":
        return FpGModule(self.group, self.p, self.dim, tuple(self.element_actions[self.group.inv(g)].T for g in self.group.generators))

    def __repr__(self) -> str:
        return f"FpGModule({self.group.name}, p={self.p}, dim={self.dim})"


@dataclass(frozen=True)
class Quotient:
    module: FpGModule
    free: Tuple[int, ...]  # coordinates of the parent that survive
    projection: np.ndarray  # parent dim x quotient dim

    def project(self, v: np.ndarray) -> np.ndarray:
        return matmul_mod(np.asarray(v, dtype=np.int64).reshape(1, -1), self.projection, self.module.p)[0]

    def lift(self, q: np.ndarray, parent_dim: int) -> np.ndarray:
        v = np.zeros(parent_dim, dtype=np.int64)
        v[list(self.free)] = q
        return v


def regular_module(group: FiniteGroup, p: int) -> FpGModule:
    actions = []
    for h in group.generators:
        a = np.zeros((group.order, group.order), dtype=np.int64)
        for i in range(group.order):
            a[i, group.mul(i, h)] = 1
        actions.append(a)
    return FpGModule(group, p, group.order, tuple(actions))


def trivial_module(group: FiniteGroup, p: int, dim: int = 1) -> FpGModule:
    return FpGModule(group, p, dim, tuple(np.eye(dim, dtype=np.int64) for _ in group.generators))


# --------------------------------------------------------------------------- homomorphisms and simple modules


def hom_space(source: FpGModule, target: FpGModule) -> List[np.ndarray]:
    """Basis of Hom_G(source, target) as source.dim x target.dim matrices X with A_g X = X B_g."""
    if source.group != target.group or source.p != target.p:
        raise ShapeMismatchError("modules over different groups or fields")
    n, s, p = source.dim, target.dim, source.p
    if n == 0 or s == 0:
        return []
    blocks = [
        (np.kron(a, np.eye(s, dtype=np.int64)) - np.kron(np.eye(n, dtype=np.int64), b.T)) % p
        for a, b in zip(source.actions, target.actions)
    ]
    system = np.concatenate(blocks, axis=0) if blocks else np.zeros((0, n * s), dtype=np.int64)
    kernel = rref(FpMatrix(p, system)).kernel.entries
    return [row.reshape(n, s) for row in kernel]


def hom_dimension(source: FpGModule, target: FpGModule) -> int:
    return len(hom_space(source, target))


def is_isomorphic_simple(s: FpGModule, t: FpGModule) -> bool:
    return s.p == t.p and s.dim == t.dim and s.group == t.group and hom_dimension(s, t) > 0


def _minimal_polynomial(e: np.ndarray, p: int) -> List[int]:
    """Coefficients (lowest degree first, monic) of the minimal polynomial of a square matrix."""
    n = e.shape[0]
    powers = [np.eye(n, dtype=np.int64).reshape(-1)]
    current = np.eye(n, dtype=np.int64)
    while True:
        current = matmul_mod(current, e, p)
        flat = current.reshape(-1)
        coefficients = solve_mod_p(FpMatrix(p, np.array(powers)), flat)
        if coefficients is not None:
            return [int(-c) % p for c in coefficients] + [1]
        powers.append(flat)


def _evaluate_polynomial(coefficients: Sequence[int], e: np.ndarray, p: int) -> np.ndarray:
    out = np.zeros_like(e)
    identity = np.eye(e.shape[0], dtype=np.int64)
    for c in reversed(coefficients):
        out = (matmul_mod(out, e, p) + int(c) * identity) % p
    return out


def _equivariant_complement(module: FpGModule, sub: FpMatrix) -> FpMatrix:
    """A G-stable complement of `sub` by averaging a projection over the group (needs p not dividing |G|)."""
    p, n = module.p, module.dim
    reduced = rref(sub)
    k = reduced.rank
    free = [c for c in range(n) if c not in set(reduced.pivots)]
    extended = np.zeros((n, n), dtype=np.int64)
    extended[:k] = reduced.basis.entries
    for i, c in enumerate(free):
        extended[k + i, c] = 1
    target = np.zeros((n, n), dtype=np.int64)
    target[:k] = reduced.basis.entries
    projection = matmul_mod(inverse_mod_p(FpMatrix(p, extended)).entries, target, p)
    averaged = np.zeros((n, n), dtype=np.int64)
    for g in range(module.group.order):
        a, a_inv = module.element_actions[g], module.element_actions[module.group.inv(g)]
        averaged = (averaged + matmul_mod(matmul_mod(a, projection, p), a_inv, p)) % p
    averaged = (averaged * pow(module.group.order, -1, p)) % p
    return left_kernel(FpMatrix(p, averaged))


def _split_once(module: FpGModule, rng: np.random.Generator, attempts: int) -> Optional[Tuple[FpMatrix, FpMatrix]]:
    """Split a semisimple module into two nonzero submodules, or return None when it is simple.

    A random endomorphism e is tried: a reducible minimal polynomial gives the submodule ker g(e) for an
    irreducible factor g; an irreducible one of degree dim End certifies that the module is simple.
    """
    p = module.p
    endomorphisms = hom_space(module, module)
    x = sympy.Symbol("x")
    for _ in range(attempts):
        weights = rng.integers(0, p, size=len(endomorphisms))
        e = np.zeros((module.dim, module.dim), dtype=np.int64)
        for weight, hom in zip(weights, endomorphisms):
            e = (e + int(weight) * hom) % p
        minpoly = _minimal_polynomial(e, p)
        _, factors = sympy.Poly(list(reversed(minpoly)), x, modulus=p).factor_list()
        if len(factors) == 1 and factors[0][1] == 1:
            if factors[0][0].degree() == len(endomorphisms):
                return None
            continue
        g = [int(c) % p for c in reversed(factors[0][0].all_coeffs())]
        kernel = left_kernel(FpMatrix(p, _evaluate_polynomial(g, e, p)))
        complement = _equivariant_complement(module, kernel)
        return kernel, complement
    raise BudgetExhausted(f"could not split or certify {module} after {attempts} random endomorphisms")


def decompose_semisimple(module: FpGModule, seed: int = 0, attempts: int = DEFAULT_SETTINGS.split_attempts) -> List[FpMatrix]:
    """Bases (in module coordinates) of simple submodules whose direct sum is the module; p must not divide |G|."""
    if module.group.order % module.p == 0:
        raise HypothesisViolation(f"p = {module.p} divides |G| = {module.group.order}; the module need not be semisimple")
    rng = np.random.default_rng(seed)
    pieces: List[FpMatrix] = []
    stack = [FpMatrix.identity(module.dim, module.p)] if module.dim else []
    while stack:
        basis = stack.pop()
        sub = module.submodule(basis)
        rows = rref(basis).basis
        split = _split_once(sub, rng, attempts)
        if split is None:
            pieces.append(rows)
            continue
        for part in split:
            stack.append(part @ rows)
    logger.debug(f"{module} splits into simple pieces of dimensions {[b.rows for b in pieces]}")
    return pieces


def inflate(module: FpGModule, group: FiniteGroup, projection: Sequence[int]) -> FpGModule:
    """View a module of a quotient group G/N as a G-module."""
    return FpGModule(group, module.p, module.dim, tuple(module.element_actions[projection[g]] for g in group.generators))


def _random_algebra_element(module: FpGModule, rng: np.random.Generator) -> np.ndarray:
    weights = rng.integers(0, module.p, size=module.group.order)
    theta = np.zeros((module.dim, module.dim), dtype=np.int64)
    for weight, a in zip(weights, module.element_actions):
        if weight:
            theta = (theta + int(weight) * a) % module.p
    return theta


def find_submodule(module: FpGModule, rng: np.random.Generator, attempts: int) -> Optional[FpMatrix]:
    """A proper nonzero submodule, or None when the module is simple. Works for any p.

    Random elements θ of the group algebra are tried. A vector of ker f(θ), f an irreducible factor of the
    minimal polynomial, that spins to a proper subspace gives a submodule. If dim ker f(θ) = deg f and a kernel
    vector spins to everything, the same test on the dual side either yields a submodule as an annihilator or
    certifies that the module is simple.
    """
    p, n = module.p, module.dim
    if n <= 1:
        return None
    x = sympy.Symbol("x")
    dual = module.dual()
    for _ in range(attempts):
        theta = _random_algebra_element(module, rng)
        minpoly = _minimal_polynomial(theta, p)
        _, factors = sympy.Poly(list(reversed(minpoly)), x, modulus=p).factor_list()
        for factor, _power in factors:
            value = _evaluate_polynomial([int(c) % p for c in reversed(factor.all_coeffs())], theta, p)
            kernel = left_kernel(FpMatrix(p, value))
            sub = module.spin([kernel.entries[0]])
            if sub.rows < n:
                return sub
            if kernel.rows != factor.degree():
                continue
            w = left_kernel(FpMatrix(p, value.T)).entries[0]
            dual_sub = dual.spin([w])
            if dual_sub.rows < n:
                return left_kernel(FpMatrix(p, dual_sub.entries.T))
            return None
    raise BudgetExhausted(f"could not split or certify {module} after {attempts} random algebra elements")


def composition_factors(module: FpGModule, seed: int = 0, attempts: int = DEFAULT_SETTINGS.split_attempts) -> List[FpGModule]:
    """The simple composition factors of a module, with multiplicity."""
    rng = np.random.default_rng(seed)
    factors: List[FpGModule] = []
    stack = [module] if module.dim else []
    while stack:
        current = stack.pop()
        sub = find_submodule(current, rng, attempts)
        if sub is None:
            factors.append(current)
            continue
        stack.append(current.submodule(sub))
        stack.append(current.quotient(sub).module)
    return factors


def _normal_sylow(group: FiniteGroup, p: int) -> Optional[FrozenSet[int]]:
    try:
        return normal_sylow(group, p)
    except HypothesisViolation:
        return None


@lru_cache(maxsize=None)
def simple_modules(group: FiniteGroup, p: int, attempts: int = DEFAULT_SETTINGS.split_attempts) -> Tuple[FpGModule, ...]:
    """One representative of every simple F_pG-module.

    With a normal Sylow p-subgroup P they are the summands of the semisimple F_p[G/P]; otherwise they are
    taken from the composition factors of F_pG, in which every simple module occurs.
    """
    sylow = _normal_sylow(group, p)
    if sylow is not None:
        quotient, projection = quotient_group(group, sylow)
        regular = regular_module(quotient, p)
        pieces = decompose_semisimple(regular, seed=p, attempts=attempts)
        candidates = [inflate(regular.submodule(basis), group, projection) for basis in pieces]
    else:
        candidates = composition_factors(regular_module(group, p), seed=p, attempts=attempts)
    representatives: List[FpGModule] = []
    for candidate in candidates:
        if not any(is_isomorphic_simple(candidate, known) for known in representatives):
            representatives.append(candidate)
    logger.debug(f"{group.name} has {len(representatives)} simple modules over F_{p}")
    return tuple(representatives)


# --------------------------------------------------------------------------- radical and generator counts


def radical(module: FpGModule) -> FpMatrix:
    """rad N = N·ΔP for a normal Sylow p-subgroup P, the common kernel of all maps onto simple modules otherwise."""
    sylow = _normal_sylow(module.group, module.p)
    if sylow is None:
        return radical_by_homs(module)
    seeds = []
    for i in range(module.dim):
        e = np.zeros(module.dim, dtype=np.int64)
        e[i] = 1
        for g in sylow:
            seeds.append((module.act(e, g) - e) % module.p)
    return module.spin(seeds)


def radical_by_homs(module: FpGModule) -> FpMatrix:
    """rad N as the common kernel of all maps onto simple modules."""
    maps = [hom for s in simple_modules(module.group, module.p) for hom in hom_space(module, s)]
    if not maps:
        return FpMatrix.identity(module.dim, module.p)
    return rref(left_kernel(FpMatrix(module.p, np.concatenate(maps, axis=1)))).basis


def top(module: FpGModule) -> FpGModule:
    return module.quotient(radical(module)).module


def is_semisimple(module: FpGModule) -> bool:
    return radical(module).rows == 0


def simple_multiplicities(module: FpGModule) -> List[Tuple[FpGModule, int]]:
    """Multiplicity of each simple module in the top of `module`."""
    out = []
    for s in simple_modules(module.group, module.p):
        end = hom_dimension(s, s)
        out.append((s, hom_dimension(module, s) // end))
    return out


def min_generators_module(module: FpGModule) -> int:
    """d_G(N) = max over simple S of ceil(dim Hom(N, S) / dim S)."""
    if module.dim == 0:
        return 0
    return max(ceil(hom_dimension(module, s) / s.dim) for s in simple_modules(module.group, module.p))


def brute_force_d(module: FpGModule, cap: int = DEFAULT_SETTINGS.brute_force_cap) -> Optional[int]:
    """Exact d_G(N) by exhaustive search over sums of cyclic submodules; None when p^dim exceeds cap."""
    if module.dim == 0:
        return 0
    if module.p**module.dim > cap:
        return None

    def key(basis: FpMatrix) -> bytes:
        return rref(basis).basis.entries.tobytes()

    cyclic: Dict[bytes, np.ndarray] = {}
    for coordinates in product(range(module.p), repeat=module.dim):
        if not any(coordinates):
            continue
        basis = module.spin([np.array(coordinates, dtype=np.int64)])
        cyclic.setdefault(key(basis), basis.entries)
    full = key(FpMatrix.identity(module.dim, module.p))
    level: Dict[bytes, np.ndarray] = {b"": np.zeros((0, module.dim), dtype=np.int64)}
    for k in range(1, module.dim + 1):
        following: Dict[bytes, np.ndarray] = {}
        for rows in level.values():
            for generator in cyclic.values():
                total = rref(FpMatrix(module.p, np.concatenate([rows, generator], axis=0))).basis
                following.setdefault(total.entries.tobytes(), total.entries)
        if full in following:
            return k
        level = following
    raise AssertionError("the module is always a sum of dim-many cyclic submodules")


def _candidates(module: FpGModule, rng: np.random.Generator, budget: int) -> Iterator[np.ndarray]:
    n = module.dim
    for i in range(n):
        e = np.zeros(n, dtype=np.int64)
        e[i] = 1
        yield e
    for i, j in combinations(range(n), 2):
        e = np.zeros(n, dtype=np.int64)
        e[i] = e[j] = 1
        yield e
    for _ in range(budget):
        yield rng.integers(0, module.p, size=n).astype(np.int64)


def extend_generating_set(
    module: FpGModule, chosen: Sequence[np.ndarray], seed: int = 0, budget: int = 400
) -> List[np.ndarray]:
    """Vectors which together with `chosen` generate the module, as few as possible.

    Greedy: each accepted vector lowers d of the remaining quotient by one, which is always possible.
    """
    rng = np.random.default_rng(seed)
    chosen = [np.asarray(v, dtype=np.int64) % module.p for v in chosen]
    added: List[np.ndarray] = []
    current = module.spin(chosen)
    remaining = min_generators_module(module.quotient(current).module)
    while remaining > 0:
        span = EchelonSpan(module.dim, module.p)
        for row in current.entries:
            span.add(row)
        for candidate in _candidates(module, rng, budget):
            if span.contains(candidate):
                continue
            trial = module.spin(chosen + added + [candidate])
            left = min_generators_module(module.quotient(trial).module)
            if left == remaining - 1:
                added.append(candidate)
                current, remaining = trial, left
                break
        else:
            raise BudgetExhausted(f"no generator found for {module} within {budget} random candidates")
    return added


def minimal_generating_set(module: FpGModule, seed: int = 0, budget: int = 400) -> List[np.ndarray]:
    return extend_generating_set(module, [], seed, budget)


# --------------------------------------------------------------------------- lattices


@dataclass(frozen=True, eq=False)
class ZGLattice:
    """A free Z-module of finite rank with a ZG-action by integer matrices.

    `embedding`, when present, lists the basis vectors as rows in the coordinates of a free module ZG^k
    (coordinate s·|G| + g is the coefficient of e_s·g).
    """

    group: FiniteGroup
    rank: int
    actions: Tuple[IntMatrix, ...]
    embedding: Optional[IntMatrix] = None

    def __post_init__(self) -> None:
        if len(self.actions) != len(self.group.generators):
            raise ShapeMismatchError(f"need {len(self.group.generators)} action matrices, got {len(self.actions)}")
        actions = tuple(as_int_matrix(a, self.rank) if self.rank else int_zeros(0, 0) for a in self.actions)
        object.__setattr__(self, "actions", actions)

    @classmethod
    def from_sublattice(cls, group: FiniteGroup, basis, free_rank: int) -> "ZGLattice":
        """The G-stable sublattice of ZG^free_rank spanned by the rows of `basis`."""
        n = group.order
        basis = as_int_matrix(basis, free_rank * n)
        solver = IntegerSolver(basis, free_rank * n)
        actions = []
        for h in group.generators:
            rows = []
            for row in basis.tolist():
                image = [0] * (free_rank * n)
                for index, value in enumerate(row):
                    if value:
                        s, g = divmod(index, n)
                        image[s * n + group.mul(g, h)] += value
                coordinates = solver.solve(image)
                if coordinates is None:
                    raise HypothesisViolation("sublattice is not stable under the group action")
                rows.append(coordinates)
            actions.append(as_int_matrix(rows, basis.shape[0]))
        return cls(group, basis.shape[0], tuple(actions), basis)

    @property
    def free_rank(self) -> int:
        if self.embedding is None:
            raise ValueError("lattice has no embedding into a free module")
        return self.embedding.shape[1] // self.group.order

    @cached_property
    def element_actions(self) -> Tuple[IntMatrix, ...]:
        out = []
        for word in self.group.words:
            m = int_identity(self.rank)
            for position in word:
                m = int_matmul(m, self.actions[position])
            out.append(m)
        return tuple(out)

    def act(self, v: Sequence[int], g: int) -> List[int]:
        if self.rank == 0:
            return []
        return int_matmul(as_int_matrix([list(v)]), self.element_actions[g])[0].tolist()

    def mod_p(self, p: int) -> FpGModule:
        actions = tuple(np.array([[int(x) % p for x in row] for row in a.tolist()], dtype=np.int64).reshape(self.rank, self.rank) for a in self.actions)
        return FpGModule(self.group, p, self.rank, actions)

    def embed(self, coordinates: Sequence[int]) -> List[int]:
        """Lattice coordinates -> coordinates in the ambient free module."""
        if self.embedding is None:
            raise ValueError("lattice has no embedding into a free module")
        out = [0] * self.embedding.shape[1]
        for c, row in zip(coordinates, self.embedding.tolist()):
            if c:
                for k, value in enumerate(row):
                    if value:
                        out[k] += c * value
        return out

    def validate(self) -> None:
        """Actions are invertible over Z and multiply like the group."""
        for a in self.actions:
            smith = smith_normal_form(a)
            if smith.invariant_factors and any(d != 1 for d in smith.invariant_factors):
                raise HypothesisViolation("an action matrix is not invertible over Z")
        table = self.group.table
        for g in range(self.group.order):
            for h in self.group.generators:
                if not np.array_equal(int_matmul(self.element_actions[g], self.element_actions[h]), self.element_actions[table[g][h]]):
                    raise HypothesisViolation(f"action is not a homomorphism at ({g}, {h})")

    def __repr__(self) -> str:
        return f"ZGLattice({self.group.name}, rank={self.rank})"


def d_rational(lattice: ZGLattice) -> int:
    """d_G(QM), read off at the smallest prime not dividing |G|."""
    if lattice.rank == 0:
        return 0
    p = smallest_prime_outside(primes_of(lattice.group))
    return min_generators_module(lattice.mod_p(p))


@dataclass(frozen=True)
class QuotientStructure:
    invariant_factors: Tuple[int, ...]  # one per lattice rank, 1 for trivial layers, 0 for infinite ones
    exponent: int  # 0 encodes an infinite quotient

    @property
    def is_trivial(self) -> bool:
        return all(f == 1 for f in self.invariant_factors)

    @property
    def primes(self) -> Tuple[int, ...]:
        return tuple(sympy.primefactors(self.exponent)) if self.exponent > 1 else ()


def quotient_structure(lattice: ZGLattice, elements: Sequence[Sequence[int]]) -> QuotientStructure:
    """Invariant factors of M / XZG, where X is given in lattice coordinates."""
    rows = [lattice.act(x, g) for x in elements for g in range(lattice.group.order)]
    if rows and lattice.rank:
        factors = list(smith_normal_form(as_int_matrix(rows, lattice.rank)).invariant_factors)
    else:
        factors = []
    factors += [0] * (lattice.rank - len(factors))
    return QuotientStructure(tuple(factors), invariant_factors_to_exponent(factors))


# --------------------------------------------------------------------------- finite modules


@dataclass(frozen=True, eq=False)
class FiniteZGModule:
    """M = L / L' for G-stable lattices L' ⊂ L inside Z^n carrying integer actions."""

    group: FiniteGroup
    actions: Tuple[IntMatrix, ...]
    lattice: IntMatrix  # basis rows of L
    sublattice: IntMatrix  # basis rows of L'

    MAX_ORDER = 10**6

    @classmethod
    def from_invariants(cls, group: FiniteGroup, factors: Sequence[int], actions: Sequence) -> "FiniteZGModule":
        """Z/m_1 ⊕ ... ⊕ Z/m_k with generators acting by the given integer matrices."""
        k = len(factors)
        actions = tuple(as_int_matrix(a, k) for a in actions)
        lattice = int_identity(k)
        sublattice = int_zeros(k, k)
        for i, m in enumerate(factors):
            sublattice[i, i] = int(m)
        module = cls(group, actions, lattice, sublattice)
        module._check_stable(sublattice)
        return module

    def __post_init__(self) -> None:
        if self.order(self.lattice) > self.MAX_ORDER:
            raise HypothesisViolation(f"finite modules are limited to order {self.MAX_ORDER}")

    def _check_stable(self, basis: IntMatrix) -> None:
        solver = IntegerSolver(basis)
        for a in self.actions:
            for row in int_matmul(basis, a).tolist():
                if solver.solve(row) is None:
                    raise HypothesisViolation("action does not preserve the defining sublattice")

    def order(self, basis: IntMatrix) -> int:
        """|K / L'| for a G-stable lattice K between L' and L."""
        coordinates = [lattice_coordinates(basis, row) for row in self.sublattice.tolist()]
        if any(c is None for c in coordinates):
            raise ValueError("sublattice is not contained in the given lattice")
        factors = smith_normal_form(as_int_matrix(coordinates, basis.shape[0])).invariant_factors
        if any(f == 0 for f in factors) or len(factors) < basis.shape[0]:
            raise ValueError("quotient is infinite")
        out = 1
        for f in factors:
            out *= f
        return out

    @property
    def size(self) -> int:
        return self.order(self.lattice)

    def layer(self, basis: IntMatrix, p: int) -> Tuple[Quotient, FpGModule]:
        """K/(pK + L') as an F_pG-module, together with the parent module on K/pK."""
        solver = IntegerSolver(basis)
        k = basis.shape[0]
        actions = []
        for a in self.actions:
            rows = [solver.solve(row) for row in int_matmul(basis, a).tolist()]
            actions.append(np.array([[x % p for x in row] for row in rows], dtype=np.int64).reshape(k, k))
        ambient = FpGModule(self.group, p, k, tuple(actions))
        bottom = [[x % p for x in solver.solve(row)] for row in self.sublattice.tolist()]
        return ambient.quotient(ambient.spin([np.array(r, dtype=np.int64) for r in bottom])), ambient

    def maximal_sublattice(self, basis: IntMatrix, p: int, keep: Sequence[FpMatrix], quotient: Quotient) -> IntMatrix:
        """Preimage in K of the sum of the given summands of K/(pK + L')."""
        k = basis.shape[0]
        rows = [[p * x for x in row] for row in basis.tolist()] + self.sublattice.tolist()
        for summand in keep:
            for q in summand.entries:
                lifted = quotient.lift(q, k)
                rows.append(int_matmul(as_int_matrix([lifted.tolist()]), basis)[0].tolist())
        return hermite_normal_form(rows, basis.shape[1])


@dataclass(frozen=True)
class CompositionSeries:
    chain: Tuple[IntMatrix, ...]  # M_0 = L ⊃ M_1 ⊃ ... ⊃ M_d = L'
    factors: Tuple[FpGModule, ...]  # factors[i] ≅ M_i / M_{i+1}


def _check_coprime(module: FiniteZGModule) -> None:
    bad = set(sympy.primefactors(module.size)) & set(primes_of(module.group))
    if bad:
        raise HypothesisViolation(f"|M| is divisible by {sorted(bad)}, which also divide |G|")


def composition_series(module: FiniteZGModule, attempts: int = DEFAULT_SETTINGS.split_attempts) -> CompositionSeries:
    _check_coprime(module)
    chain, factors = [hermite_normal_form(module.lattice)], []
    current = chain[0]
    while module.order(current) > 1:
        p = min(sympy.primefactors(module.order(current)))
        quotient, _ = module.layer(current, p)
        pieces = decompose_semisimple(quotient.module, attempts=attempts)
        factors.append(quotient.module.submodule(pieces[0]))
        current = module.maximal_sublattice(current, p, pieces[1:], quotient)
        chain.append(current)
    return CompositionSeries(tuple(chain), tuple(factors))


def reorder_series(
    module: FiniteZGModule, target: Sequence[FpGModule], attempts: int = DEFAULT_SETTINGS.split_attempts
) -> CompositionSeries:
    """A composition series whose successive factors are isomorphic to `target`, in that order."""
    series = composition_series(module, attempts)
    unmatched = list(series.factors)
    for t in target:
        match = next((i for i, f in enumerate(unmatched) if is_isomorphic_simple(f, t)), None)
        if match is None:
            raise InvalidTargetError(f"{t} does not occur (often enough) among the composition factors")
        unmatched.pop(match)
    if unmatched:
        raise InvalidTargetError(f"target omits {len(unmatched)} composition factor(s)")
    chain, factors = [series.chain[0]], []
    current = chain[0]
    for t in target:
        quotient, _ = module.layer(current, t.p)
        pieces = decompose_semisimple(quotient.module, attempts=attempts)
        chosen = next((i for i, b in enumerate(pieces) if is_isomorphic_simple(quotient.module.submodule(b), t)), None)
        if chosen is None:
            raise InvalidTargetError(f"no maximal submodule with quotient {t} at step {len(factors)}")
        factors.append(quotient.module.submodule(pieces[chosen]))
        current = module.maximal_sublattice(current, t.p, pieces[:chosen] + pieces[chosen + 1:], quotient)
        chain.append(current)
    return CompositionSeries(tuple(chain), tuple(factors))
