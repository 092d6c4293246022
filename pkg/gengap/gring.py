"""Group rings ZG and F_pG, the Laurent extension Z[G x C^r], Fox derivatives and symbolic identity checks.

Modules are right modules throughout; Fox derivatives come in both the left convention
(d(uv) = du + u dv) and the right convention (d(uv) = du v + dv). Relation modules are embedded with the
right convention, as the kernel of (r_x) -> sum_x (x - 1) r_x.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from gengap.errors import MixedOperandsError, ProblemSchemaError, UndeclaredGeneratorError
from gengap.groups import FiniteGroup, Word, commutator, cyclic
from loguru import logger

Exponents = Tuple[int, ...]


@dataclass(frozen=True)
class GroupRingElement:
    """Element of ZG (modulus None) or F_pG, stored as a dense coefficient tuple indexed by group element."""

    group: FiniteGroup
    coeffs: Tuple[int, ...]
    modulus: Optional[int] = None

    def __post_init__(self) -> None:
        if len(self.coeffs) != self.group.order:
            raise ValueError(f"need {self.group.order} coefficients, got {len(self.coeffs)}")
        if self.modulus is not None:
            object.__setattr__(self, "coeffs", tuple(int(c) % self.modulus for c in self.coeffs))

    @classmethod
    def zero(cls, group: FiniteGroup, modulus: Optional[int] = None) -> "GroupRingElement":
        return cls(group, (0,) * group.order, modulus)

    @classmethod
    def of(cls, group: FiniteGroup, g: int, coefficient: int = 1, modulus: Optional[int] = None) -> "GroupRingElement":
        coeffs = [0] * group.order
        coeffs[g] = coefficient
        return cls(group, tuple(coeffs), modulus)

    @classmethod
    def one(cls, group: FiniteGroup, modulus: Optional[int] = None) -> "GroupRingElement":
        return cls.of(group, group.identity, 1, modulus)

    @classmethod
    def ghat(cls, group: FiniteGroup, modulus: Optional[int] = None) -> "GroupRingElement":
        return cls(group, (1,) * group.order, modulus)

    def _check(self, other: "GroupRingElement") -> None:
        if other.group != self.group or other.modulus != self.modulus:
            raise MixedOperandsError(
                f"cannot combine elements over {self.group.name} (mod {self.modulus}) and {other.group.name} (mod {other.modulus})"
            )

    def __add__(self, other: "GroupRingElement") -> "GroupRingElement":
        self._check(other)
        return GroupRingElement(self.group, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.modulus)

    def __sub__(self, other: "GroupRingElement") -> "GroupRingElement":
        return self + (-other)

    def __neg__(self) -> "GroupRingElement":
        return GroupRingElement(self.group, tuple(-a for a in self.coeffs), self.modulus)

    def __mul__(self, other: Union["GroupRingElement", int]) -> "GroupRingElement":
        if isinstance(other, int):
            return GroupRingElement(self.group, tuple(other * a for a in self.coeffs), self.modulus)
        self._check(other)
        out = [0] * self.group.order
        for g, a in enumerate(self.coeffs):
            if a:
                row = self.group.table[g]
                for h, b in enumerate(other.coeffs):
                    if b:
                        out[row[h]] += a * b
        return GroupRingElement(self.group, tuple(out), self.modulus)

    __rmul__ = __mul__

    def augment(self) -> int:
        total = sum(self.coeffs)
        return total % self.modulus if self.modulus is not None else total

    def is_zero(self) -> bool:
        return not any(self.coeffs)


@dataclass(frozen=True)
class LaurentGroupRingElement:
    """Element of Z[G x C^rank] = (ZG)[c_1^±1, ..., c_rank^±1] with central c_i.

    `terms` holds the nonzero coefficients as sorted ((g, exponents), coefficient) pairs.
    """

    group: FiniteGroup
    terms: Tuple[Tuple[Tuple[int, Exponents], int], ...] = ()
    rank: int = 1

    @classmethod
    def from_dict(cls, group: FiniteGroup, coefficients: Mapping[Tuple[int, Exponents], int], rank: int = 1):
        items = []
        for (g, exps), a in coefficients.items():
            if a:
                if len(exps) != rank:
                    raise ValueError(f"exponent vector {exps} does not have length {rank}")
                items.append(((g, tuple(exps)), int(a)))
        return cls(group, tuple(sorted(items)), rank)

    @classmethod
    def zero(cls, group: FiniteGroup, rank: int = 1) -> "LaurentGroupRingElement":
        return cls(group, (), rank)

    @classmethod
    def monomial(cls, group: FiniteGroup, g: int, exps: Optional[Exponents] = None, coefficient: int = 1, rank: int = 1):
        exps = tuple(exps) if exps is not None else (0,) * rank
        return cls.from_dict(group, {(g, exps): coefficient}, rank)

    @classmethod
    def integer(cls, group: FiniteGroup, n: int, rank: int = 1) -> "LaurentGroupRingElement":
        return cls.monomial(group, group.identity, None, n, rank)

    @classmethod
    def c_power(cls, group: FiniteGroup, k: int, rank: int = 1, axis: int = 0) -> "LaurentGroupRingElement":
        exps = tuple(k if i == axis else 0 for i in range(rank))
        return cls.monomial(group, group.identity, exps, 1, rank)

    @classmethod
    def ghat(cls, group: FiniteGroup, rank: int = 1) -> "LaurentGroupRingElement":
        return cls.from_dict(group, {(g, (0,) * rank): 1 for g in range(group.order)}, rank)

    @classmethod
    def from_group_ring(cls, element: GroupRingElement, rank: int = 1) -> "LaurentGroupRingElement":
        return cls.from_dict(element.group, {(g, (0,) * rank): a for g, a in enumerate(element.coeffs)}, rank)

    def as_dict(self) -> Dict[Tuple[int, Exponents], int]:
        return dict(self.terms)

    def _check(self, other: "LaurentGroupRingElement") -> None:
        if other.group != self.group or other.rank != self.rank:
            raise MixedOperandsError(f"cannot combine Laurent elements over {self.group.name} and {other.group.name}")

    def __add__(self, other: "LaurentGroupRingElement") -> "LaurentGroupRingElement":
        if isinstance(other, int):
            other = LaurentGroupRingElement.integer(self.group, other, self.rank)
        self._check(other)
        out = self.as_dict()
        for key, a in other.terms:
            out[key] = out.get(key, 0) + a
        return LaurentGroupRingElement.from_dict(self.group, out, self.rank)

    __radd__ = __add__

    def __neg__(self) -> "LaurentGroupRingElement":
        return LaurentGroupRingElement(self.group, tuple((k, -a) for k, a in self.terms), self.rank)

    def __sub__(self, other: "LaurentGroupRingElement") -> "LaurentGroupRingElement":
        if isinstance(other, int):
            other = LaurentGroupRingElement.integer(self.group, other, self.rank)
        return self + (-other)

    def __rsub__(self, other: int) -> "LaurentGroupRingElement":
        return LaurentGroupRingElement.integer(self.group, other, self.rank) - self

    def __mul__(self, other: Union["LaurentGroupRingElement", int]) -> "LaurentGroupRingElement":
        if isinstance(other, int):
            return LaurentGroupRingElement.from_dict(self.group, {k: other * a for k, a in self.terms}, self.rank)
        self._check(other)
        out: Dict[Tuple[int, Exponents], int] = {}
        table = self.group.table
        for (g, e), a in self.terms:
            for (h, f), b in other.terms:
                key = (table[g][h], tuple(x + y for x, y in zip(e, f)))
                out[key] = out.get(key, 0) + a * b
        return LaurentGroupRingElement.from_dict(self.group, out, self.rank)

    def __rmul__(self, other: int) -> "LaurentGroupRingElement":
        return self * other

    def is_zero(self) -> bool:
        return not self.terms

    def augment(self) -> int:
        return sum(a for _, a in self.terms)

    def coinvariants(self) -> GroupRingElement:
        """Image in ZG under c_i -> 1."""
        coeffs = [0] * self.group.order
        for (g, _), a in self.terms:
            coeffs[g] += a
        return GroupRingElement(self.group, tuple(coeffs))

    def group_part_augmentation(self) -> Dict[Exponents, int]:
        """Coefficient sums per c-monomial; all zero exactly when the element lies in ΔG·Z[G x C^r]."""
        out: Dict[Exponents, int] = {}
        for (_, e), a in self.terms:
            out[e] = out.get(e, 0) + a
        return {e: a for e, a in out.items() if a}

    def reduce_mod(self, p: int) -> "LaurentGroupRingElement":
        return LaurentGroupRingElement.from_dict(self.group, {k: a % p for k, a in self.terms}, self.rank)

    def exponent_span(self) -> int:
        return max((sum(abs(x) for x in e) for (_, e), _ in self.terms), default=0)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (g, e), a in self.terms:
            cs = "".join(f"c{i + 1 if self.rank > 1 else ''}^{x}" for i, x in enumerate(e) if x)
            parts.append(f"{a}*g{g}{cs}")
        return " + ".join(parts)


Scalar = Union[LaurentGroupRingElement, int]


@dataclass(frozen=True)
class FoxVector:
    """Element of the free module Z[G x C^r]^d, one component per free generator."""

    components: Tuple[LaurentGroupRingElement, ...]

    @classmethod
    def zero(cls, group: FiniteGroup, d: int, rank: int = 1) -> "FoxVector":
        return cls(tuple(LaurentGroupRingElement.zero(group, rank) for _ in range(d)))

    def __add__(self, other: "FoxVector") -> "FoxVector":
        return FoxVector(tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "FoxVector") -> "FoxVector":
        return FoxVector(tuple(a - b for a, b in zip(self.components, other.components)))

    def __neg__(self) -> "FoxVector":
        return FoxVector(tuple(-a for a in self.components))

    def __mul__(self, r: Scalar) -> "FoxVector":
        """Right action of the ring."""
        return FoxVector(tuple(a * r for a in self.components))

    def __rmul__(self, n: int) -> "FoxVector":
        return self * n

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self.components)

    def __len__(self) -> int:
        return len(self.components)


# --------------------------------------------------------------------------- Fox calculus


@dataclass(frozen=True)
class TargetMap:
    """Sends each free generator to (finite part, c-exponents) in G x C^rank."""

    group: FiniteGroup
    images: Mapping[str, Tuple[int, Exponents]]
    rank: int = 1

    def element(self, symbol: str, sign: int) -> LaurentGroupRingElement:
        if symbol not in self.images:
            raise UndeclaredGeneratorError(f"generator '{symbol}' has no image")
        g, e = self.images[symbol]
        if sign == -1:
            g, e = self.group.inv(g), tuple(-x for x in e)
        return LaurentGroupRingElement.monomial(self.group, g, e, 1, self.rank)

    def evaluate(self, word: Word) -> LaurentGroupRingElement:
        out = LaurentGroupRingElement.integer(self.group, 1, self.rank)
        for symbol, sign in word.letters:
            out = out * self.element(symbol, sign)
        return out

    def generator_minus_one(self, symbol: str) -> LaurentGroupRingElement:
        return self.element(symbol, 1) - 1


def fox_derivative(word: Word, x: str, target: TargetMap, side: str = "left") -> LaurentGroupRingElement:
    """Image in Z[G x C^r] of the Fox derivative of `word` with respect to the free generator `x`.

    side="left": d(uv) = du + u dv, d(x^-1) = -x^-1.
    side="right": d(uv) = du v + dv, d(x^-1) = -x^-1.
    """
    if x not in target.images:
        raise UndeclaredGeneratorError(f"generator '{x}' has no image")
    letters = word.letters
    prefixes = [LaurentGroupRingElement.integer(target.group, 1, target.rank)]
    for symbol, sign in letters:
        prefixes.append(prefixes[-1] * target.element(symbol, sign))
    suffixes = [LaurentGroupRingElement.integer(target.group, 1, target.rank)]
    for symbol, sign in reversed(letters):
        suffixes.append(target.element(symbol, sign) * suffixes[-1])
    suffixes.reverse()  # suffixes[i] is the image of letters[i:]
    out = LaurentGroupRingElement.zero(target.group, target.rank)
    for i, (symbol, sign) in enumerate(letters):
        if symbol != x:
            continue
        if side == "left":
            out = out + (prefixes[i] if sign == 1 else -prefixes[i + 1])
        elif side == "right":
            out = out + (suffixes[i + 1] if sign == 1 else -suffixes[i])
        else:
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return out


@dataclass(frozen=True)
class FoxImage:
    word: Word
    generators: Tuple[str, ...]
    vector: FoxVector
    target: TargetMap = field(compare=False)
    side: str = "right"

    def fundamental_residual(self) -> LaurentGroupRingElement:
        """Zero exactly when the fundamental formula of the Fox calculus holds."""
        total = LaurentGroupRingElement.zero(self.target.group, self.target.rank)
        for symbol, d in zip(self.generators, self.vector.components):
            diff = self.target.generator_minus_one(symbol)
            total = total + (d * diff if self.side == "left" else diff * d)
        return total - (self.target.evaluate(self.word) - 1)


def fox_image(word: Word, generators: Sequence[str], target: TargetMap, side: str = "right") -> FoxImage:
    vector = FoxVector(tuple(fox_derivative(word, x, target, side) for x in generators))
    return FoxImage(word, tuple(generators), vector, target, side)


def relation_boundary(vector: FoxVector, generators: Sequence[str], target: TargetMap) -> LaurentGroupRingElement:
    """sum_x (x - 1) r_x; vectors in the relation module are exactly those sent to zero."""
    total = LaurentGroupRingElement.zero(target.group, target.rank)
    for symbol, r in zip(generators, vector.components):
        total = total + target.generator_minus_one(symbol) * r
    return total


# --------------------------------------------------------------------------- the C_n x C relation module

X_AND_C = ("x", "c")


def cyclic_times_c_target(n: int) -> TargetMap:
    group = cyclic(n)
    return TargetMap(group, {"x": (group.generators[0], (0,)), "c": (group.identity, (1,))}, 1)


@dataclass(frozen=True)
class CyclicTimesCRelations:
    """The relation module S of <x, c | x^n, [x, c]> inside Z[C_n x C]^2.

    u is the Fox image of x^n, w that of [x, c]; together they generate S.
    """

    n: int

    @property
    def target(self) -> TargetMap:
        return cyclic_times_c_target(self.n)

    @property
    def group(self) -> FiniteGroup:
        return self.target.group

    @property
    def a(self) -> int:
        return self.group.generators[0]

    def ring(self, g: int, k: int = 0, coefficient: int = 1) -> LaurentGroupRingElement:
        return LaurentGroupRingElement.monomial(self.group, g, (k,), coefficient)

    def one(self) -> LaurentGroupRingElement:
        return self.ring(self.group.identity)

    def c(self, k: int = 1) -> LaurentGroupRingElement:
        return self.ring(self.group.identity, k)

    def ghat(self) -> LaurentGroupRingElement:
        return LaurentGroupRingElement.ghat(self.group)

    @property
    def u(self) -> FoxVector:
        return fox_image(Word.power_of("x", self.n), X_AND_C, self.target).vector

    @property
    def w(self) -> FoxVector:
        return self.commutator_image(1)

    def commutator_image(self, j: int) -> FoxVector:
        """Fox image of [x^j, c]."""
        return fox_image(commutator(Word.power_of("x", j), Word.power_of("c", 1)), X_AND_C, self.target).vector

    def contains(self, vector: FoxVector) -> bool:
        return relation_boundary(vector, X_AND_C, self.target).is_zero()

    def tau(self, v: LaurentGroupRingElement) -> FoxVector:
        """Section of the relation module over ΔG ⊗ ZC: (1 - a^-j) c^i goes to the image of [x^j, c] times c^i.

        v must lie in ΔG·Z[G x C].
        """
        if v.group_part_augmentation():
            raise ValueError("tau is only defined on ΔG ⊗ ZC")
        out = FoxVector.zero(self.group, 2)
        for (g, (i,)), coefficient in v.terms:
            if g == self.group.identity:
                continue
            j = next(j for j in range(1, self.n) if self.group.power(self.a, -j) == g)
            # (g - 1) c^i = -(1 - a^-j) c^i
            out = out - self.commutator_image(j) * self.c(i) * coefficient
        return out

    def tau_hat(self, v: LaurentGroupRingElement) -> FoxVector:
        """G-average of tau: v -> sum_g tau(v g^-1) g, a Z[G x C]-homomorphism."""
        out = FoxVector.zero(self.group, 2)
        for g in range(self.group.order):
            out = out + self.tau(v * self.ring(self.group.inv(g))) * self.ring(g)
        return out

    def sigma(self, s: FoxVector) -> LaurentGroupRingElement:
        """Retraction onto ΔG ⊗ ZC: the c-component times -c."""
        return s.components[1] * self.c(1) * -1

    def z(self) -> FoxVector:
        """tau_hat((a - 1) ⊗ 1) - u."""
        return self.tau_hat(self.ring(self.a) - 1) - self.u

    def literal_z(self) -> FoxVector:
        """n·w - u·c, the displayed formula read in this module's conventions."""
        return self.w * self.n - self.u * self.c(1)

    def literal_z_residual(self) -> FoxVector:
        """literal_z·(n - Ĝc) - n²·w; this equals n·u·(1 - c)², which lies in u·Z[G x C]."""
        factor = self.ghat() * self.c(1) * -1 + self.n
        return self.literal_z() * factor - self.w * (self.n * self.n)

    def psi(self, g: int, v: LaurentGroupRingElement) -> FoxVector:
        """Failure of tau to be G-linear: tau(v g^-1) g - tau(v)."""
        return self.tau(v * self.ring(self.group.inv(g))) * self.ring(g) - self.tau(v)

    def lies_in_s_times_delta_c(self, vector: FoxVector) -> bool:
        """True when vector = s·(c - 1) for some s in the relation module."""
        quotient = []
        for component in vector.components:
            q = divide_by_c_minus_one(component)
            if q is None:
                return False
            quotient.append(q)
        return self.contains(FoxVector(tuple(quotient)))


def divide_by_c_minus_one(f: LaurentGroupRingElement) -> Optional[LaurentGroupRingElement]:
    """q with q·(c - 1) = f in Z[G x C], or None when c - 1 does not divide f."""
    if f.rank != 1:
        raise ValueError("division by c - 1 needs rank one")
    by_group: Dict[int, Dict[int, int]] = {}
    for (g, (i,)), a in f.terms:
        by_group.setdefault(g, {})[i] = a
    out: Dict[Tuple[int, Exponents], int] = {}
    for g, series in by_group.items():
        if sum(series.values()):
            return None
        running = 0
        for i in range(min(series), max(series) + 1):
            running += series.get(i, 0)
            out[(g, (i,))] = -running
    return LaurentGroupRingElement.from_dict(f.group, out, 1)


def augmentation_identity_residual(group: FiniteGroup, x: LaurentGroupRingElement) -> LaurentGroupRingElement:
    """(x + Ĝ(c - 1))(|G| - Ĝ) - |G|x for x in ΔG; zero whenever xĜ = 0."""
    ghat = LaurentGroupRingElement.ghat(group)
    c = LaurentGroupRingElement.c_power(group, 1)
    n = group.order
    return (x + ghat * (c - 1)) * (n - ghat) - x * n


# --------------------------------------------------------------------------- symbolic identities


@dataclass(frozen=True)
class IdentityContext:
    """Names available to expressions: group generators by name, plus bound ring elements or vectors."""

    group: FiniteGroup
    rank: int = 1
    bindings: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class IdentityResult:
    holds: bool
    residue: Union[LaurentGroupRingElement, FoxVector]


def evaluate_expression(expr: Any, context: IdentityContext) -> Union[LaurentGroupRingElement, FoxVector]:
    """Evaluate the prefix format: {"mul": [...]}, {"add": [...]}, {"sub": [a, b]}, {"neg": e},
    {"ghat": true}, {"gen": "a"}, {"c": k}, {"int": n}, {"var": name}, {"vec": [...]}."""
    group, rank = context.group, context.rank
    if isinstance(expr, int):
        return LaurentGroupRingElement.integer(group, expr, rank)
    if not isinstance(expr, Mapping) or len(expr) != 1:
        raise ProblemSchemaError(f"malformed expression {expr!r}", "expression")
    (op, arg), = expr.items()
    if op == "int":
        return LaurentGroupRingElement.integer(group, int(arg), rank)
    if op == "ghat":
        return LaurentGroupRingElement.ghat(group, rank)
    if op == "gen":
        return LaurentGroupRingElement.monomial(group, group.generator(arg), None, 1, rank)
    if op == "c":
        return LaurentGroupRingElement.c_power(group, int(arg), rank)
    if op == "var":
        if arg not in context.bindings:
            raise ProblemSchemaError(f"unbound name '{arg}'", "expression.var")
        return context.bindings[arg]
    if op == "vec":
        return FoxVector(tuple(evaluate_expression(e, context) for e in arg))
    if op == "neg":
        return -evaluate_expression(arg, context)
    values = [evaluate_expression(e, context) for e in arg]
    if not values:
        raise ProblemSchemaError(f"'{op}' needs at least one operand", f"expression.{op}")
    if op == "add":
        out = values[0]
        for v in values[1:]:
            out = out + v
        return out
    if op == "sub":
        if len(values) != 2:
            raise ProblemSchemaError("'sub' takes exactly two operands", "expression.sub")
        return values[0] - values[1]
    if op == "mul":
        out = values[0]
        for v in values[1:]:
            if isinstance(out, FoxVector) and isinstance(v, FoxVector):
                raise ProblemSchemaError("cannot multiply two vectors", "expression.mul")
            if isinstance(v, FoxVector):
                out = FoxVector(tuple(out * comp for comp in v.components))
            else:
                out = out * v
        return out
    raise ProblemSchemaError(f"unknown operator '{op}'", "expression")


def verify_identity(lhs: Any, rhs: Any, context: IdentityContext) -> IdentityResult:
    """Evaluate both sides exactly; the identity holds iff lhs - rhs is zero."""
    left = evaluate_expression(lhs, context)
    right = evaluate_expression(rhs, context)
    if isinstance(left, FoxVector) != isinstance(right, FoxVector):
        raise MixedOperandsError("cannot compare a ring element with a vector")
    residue = left - right
    logger.debug(f"identity residue is {'zero' if residue.is_zero() else 'nonzero'}")
    return IdentityResult(residue.is_zero(), residue)
