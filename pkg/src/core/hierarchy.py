"""
ASRAM Hierarchy Module
Prenex formulas over the naturals, the quantifier-bounding transformation,
a bounded brute-force evaluator and the bound-escalation harness

Text format:

    EXISTS a . FORALL b < 10 . (b <= a + 3) AND (a*a < inp)

Body terms use +, * and - (truncated subtraction), comparisons =, <, <=,
connectives AND, OR, NOT, nonnegative literals and the free variable inp.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from math import prod
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from pyparsing import (
    CaselessKeyword, Group, OpAssoc, Opt, ParseException, ParserElement,
    StringEnd, Suppress, Word, ZeroOrMore, alphanums, alphas, infix_notation,
    nums, one_of,
)

from src.core.errors import FormulaSyntaxError, ResourceRefusal
from src.core.oracle import VerdictKind

logger = logging.getLogger(__name__)

ParserElement.enable_packrat()

DEFAULT_BUDGET = 10 ** 8
DEFAULT_LEVELS = (2, 4, 8, 16, 32)
DEFAULT_CONFIRMATIONS = 3
INPUT_NAME = "inp"


# ---------------------------------------------------------------------------
# Body expressions
# ---------------------------------------------------------------------------

class Expr:
    """Quantifier-free body node; compile() turns it into a closure over an env list"""

    def compile(self, index: Dict[str, int]) -> Callable[[list], int]:
        raise NotImplementedError

    def variables(self) -> set:
        raise NotImplementedError


def _wrap(node: "Expr", *kinds) -> str:
    return f"({node})" if isinstance(node, kinds) else str(node)


@dataclass(frozen=True)
class Num(Expr):
    value: int

    def compile(self, index):
        value = self.value
        return lambda env: value

    def variables(self):
        return set()

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def compile(self, index):
        slot = index[self.name]
        return lambda env: env[slot]

    def variables(self):
        return {self.name}

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # '+', '*' or '-' (monus)
    left: Expr
    right: Expr

    def compile(self, index):
        lhs, rhs = self.left.compile(index), self.right.compile(index)
        if self.op == "+":
            return lambda env: lhs(env) + rhs(env)
        if self.op == "*":
            return lambda env: lhs(env) * rhs(env)
        return lambda env: max(lhs(env) - rhs(env), 0)

    def variables(self):
        return self.left.variables() | self.right.variables()

    def __str__(self):
        return f"{_wrap(self.left, BinOp)} {self.op} {_wrap(self.right, BinOp)}"


@dataclass(frozen=True)
class Compare(Expr):
    op: str  # '=', '<' or '<='
    left: Expr
    right: Expr

    def compile(self, index):
        lhs, rhs = self.left.compile(index), self.right.compile(index)
        if self.op == "=":
            return lambda env: lhs(env) == rhs(env)
        if self.op == "<":
            return lambda env: lhs(env) < rhs(env)
        return lambda env: lhs(env) <= rhs(env)

    def variables(self):
        return self.left.variables() | self.right.variables()

    def __str__(self):
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class And(Expr):
    items: Tuple[Expr, ...]

    def compile(self, index):
        parts = [item.compile(index) for item in self.items]
        return lambda env: all(p(env) for p in parts)

    def variables(self):
        return set().union(*(item.variables() for item in self.items))

    def __str__(self):
        return " AND ".join(_wrap(item, And, Or) for item in self.items)


@dataclass(frozen=True)
class Or(Expr):
    items: Tuple[Expr, ...]

    def compile(self, index):
        parts = [item.compile(index) for item in self.items]
        return lambda env: any(p(env) for p in parts)

    def variables(self):
        return set().union(*(item.variables() for item in self.items))

    def __str__(self):
        return " OR ".join(_wrap(item, And, Or) for item in self.items)


@dataclass(frozen=True)
class Not(Expr):
    item: Expr

    def compile(self, index):
        inner = self.item.compile(index)
        return lambda env: not inner(env)

    def variables(self):
        return self.item.variables()

    def __str__(self):
        return f"NOT ({self.item})"


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

class QuantKind(Enum):
    EXISTS = "EXISTS"
    FORALL = "FORALL"


@dataclass(frozen=True)
class Quantifier:
    kind: QuantKind
    var: str
    bound: Optional[int] = None

    def __str__(self):
        bound = f" < {self.bound}" if self.bound is not None else ""
        return f"{self.kind.value} {self.var}{bound} ."


@dataclass(frozen=True)
class Formula:
    prefix: Tuple[Quantifier, ...]
    body: Expr

    @property
    def k(self) -> int:
        return len(self.prefix)

    def __str__(self):
        return format_formula(self)


def format_formula(f: Formula) -> str:
    return " ".join([str(q) for q in f.prefix] + [str(f.body)])


def _fold_left(node_type):
    def action(tokens):
        items = tokens[0]
        acc = items[0]
        for i in range(1, len(items), 2):
            acc = node_type(items[i], acc, items[i + 1])
        return acc
    return action


def _flatten(node_type):
    def action(tokens):
        return node_type(tuple(tokens[0][0::2]))
    return action


def _build_grammar():
    exists, forall = CaselessKeyword("EXISTS"), CaselessKeyword("FORALL")
    and_, or_, not_ = CaselessKeyword("AND"), CaselessKeyword("OR"), CaselessKeyword("NOT")
    keyword = exists | forall | and_ | or_ | not_

    name = ~keyword + Word(alphas + "_", alphanums + "_")
    number = Word(nums).set_parse_action(lambda t: Num(int(t[0])))
    variable = name.copy().set_parse_action(lambda t: Var(t[0]))

    term = infix_notation(number | variable, [
        ("*", 2, OpAssoc.LEFT, _fold_left(BinOp)),
        (one_of("+ -"), 2, OpAssoc.LEFT, _fold_left(BinOp)),
    ])
    comparison = (term + one_of("<= < =") + term).set_parse_action(
        lambda t: Compare(t[1], t[0], t[2]))
    body = infix_notation(comparison, [
        (not_, 1, OpAssoc.RIGHT, lambda t: Not(t[0][1])),
        (and_, 2, OpAssoc.LEFT, _flatten(And)),
        (or_, 2, OpAssoc.LEFT, _flatten(Or)),
    ])

    quantifier = (exists | forall) + name + Opt(Suppress("<") + Word(nums)) + Suppress(".")
    quantifier.set_parse_action(lambda t: Quantifier(
        QuantKind(t[0].upper()), t[1], int(t[2]) if len(t) > 2 else None))
    return Group(ZeroOrMore(quantifier)) + body + StringEnd()


_FORMULA = _build_grammar()


def parse_formula(text: str) -> Formula:
    """
    Parse formula text

    Raises:
        FormulaSyntaxError: on grammar errors, repeated variables or
                            references to undeclared variables
    """
    try:
        result = _FORMULA.parse_string(text, parse_all=True)
    except ParseException as e:
        raise FormulaSyntaxError(e.msg, e.lineno, e.col)

    prefix = tuple(result[0])
    body = result[1]
    names = [q.var for q in prefix]
    if INPUT_NAME in names:
        raise FormulaSyntaxError(f"'{INPUT_NAME}' is reserved for the input")
    if len(set(names)) != len(names):
        raise FormulaSyntaxError("quantified variables must be distinct")
    undeclared = body.variables() - set(names) - {INPUT_NAME}
    if undeclared:
        raise FormulaSyntaxError(f"undeclared variable(s): {', '.join(sorted(undeclared))}")
    return Formula(prefix, body)


# ---------------------------------------------------------------------------
# Bounding and evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundAssignment:
    """
    Bounds A_1..A_(k-1) for all but the last variable, and an evaluation cap
    for the last one; that cap is empirical (the last quantifier is unbounded)
    """

    bounds: Tuple[int, ...]
    final_cap: int

    empirical = True

    def __post_init__(self):
        if any(b < 1 for b in self.bounds) or self.final_cap < 1:
            raise ValueError("every bound must be at least 1")

    @property
    def lagging(self) -> bool:
        """The final cap does not strictly outpace every prefix bound"""
        return any(self.final_cap <= b for b in self.bounds)


def bound_quantifiers(f: Formula, b: BoundAssignment) -> Formula:
    """
    Bound every quantified variable except the last by the matching A_i

    The body and the quantifier kinds are untouched.

    Raises:
        ValueError: if the prefix already carries bounds or the lengths differ
    """
    if any(q.bound is not None for q in f.prefix):
        raise ValueError("formula prefix is already bounded")
    if len(b.bounds) != max(f.k - 1, 0):
        raise ValueError(f"expected {max(f.k - 1, 0)} bound(s), got {len(b.bounds)}")
    prefix = tuple(
        replace(q, bound=b.bounds[i]) if i < f.k - 1 else q
        for i, q in enumerate(f.prefix)
    )
    return Formula(prefix, f.body)


def effective_bounds(f: Formula, b: BoundAssignment) -> List[int]:
    """Per-variable scan limits: explicit bounds first, then A_i, the last gets final_cap"""
    limits = []
    for i, q in enumerate(f.prefix):
        if q.bound is not None:
            limits.append(q.bound)
        elif i == f.k - 1:
            limits.append(b.final_cap)
        elif i < len(b.bounds):
            limits.append(b.bounds[i])
        else:
            raise ValueError(f"no bound for variable '{q.var}'")
    return limits


def eval_bounded(f: Formula, inp, b: BoundAssignment, budget: int = DEFAULT_BUDGET) -> bool:
    """
    Brute-force truth value with every variable scanned over 0..bound-1

    Args:
        f: Formula
        inp: Value of the free variable inp
        b: Bounds for the unbounded prefix variables
        budget: Maximum number of body evaluations

    Raises:
        ResourceRefusal: when the product of the bounds exceeds the budget
    """
    limits = effective_bounds(f, b)
    cost = prod(limits)
    if cost > budget:
        raise ResourceRefusal(f"{cost} body evaluations exceed the budget of {budget}", budget)

    index = {INPUT_NAME: 0}
    index.update({q.var: i + 1 for i, q in enumerate(f.prefix)})
    body = f.body.compile(index)
    env = [int(inp)] + [0] * f.k
    kinds = [q.kind for q in f.prefix]

    def search(level: int) -> bool:
        if level == f.k:
            return bool(body(env))
        slot = level + 1
        if kinds[level] is QuantKind.EXISTS:
            for v in range(limits[level]):
                env[slot] = v
                if search(level + 1):
                    return True
            return False
        for v in range(limits[level]):
            env[slot] = v
            if not search(level + 1):
                return False
        return True

    return search(0)


# ---------------------------------------------------------------------------
# Escalation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundSchedule:
    stages: Tuple[BoundAssignment, ...]
    confirmations: int = DEFAULT_CONFIRMATIONS

    def __post_init__(self):
        if not self.stages:
            raise ValueError("bound schedule must not be empty")
        if self.confirmations < 1 or self.confirmations > len(self.stages):
            raise ValueError("confirmations must be between 1 and the number of stages")

    @classmethod
    def default(cls, k: int, levels: Sequence[int] = DEFAULT_LEVELS,
                confirmations: int = DEFAULT_CONFIRMATIONS) -> "BoundSchedule":
        """Prefix bounds L at every stage, final cap L*L"""
        stages = tuple(BoundAssignment((level,) * max(k - 1, 0), level * level) for level in levels)
        return cls(stages, confirmations)


@dataclass(frozen=True)
class StageResult:
    bounds: Tuple[int, ...]
    final_cap: int
    truth: bool

    def to_dict(self) -> Dict:
        return {'bounds': list(self.bounds), 'final_cap': self.final_cap, 'truth': self.truth}


@dataclass
class BoundVerdict:
    kind: VerdictKind
    evidence: List[StageResult]
    truth: Optional[bool] = None
    lagging: bool = False

    @property
    def stabilized(self) -> bool:
        return self.kind is VerdictKind.STABILIZED

    def to_dict(self) -> Dict:
        return {
            'verdict': self.kind.value,
            'truth': self.truth,
            'lagging': self.lagging,
            'evidence': [e.to_dict() for e in self.evidence],
        }


def escalate_bounds(f: Formula, inp, schedule: Optional[BoundSchedule] = None,
                    budget: int = DEFAULT_BUDGET) -> BoundVerdict:
    """
    Evaluate the formula at every stage of a bound schedule

    Stabilized iff the last c stage verdicts agree. Schedules whose final cap
    does not outpace the prefix bounds are flagged as lagging.

    Args:
        f: Formula with an unbounded prefix (explicit bounds are honoured)
        inp: Input value
        schedule: Defaults to BoundSchedule.default(f.k)
        budget: Per-stage body evaluation budget

    Returns:
        BoundVerdict
    """
    schedule = schedule or BoundSchedule.default(f.k)
    lagging = f.k > 1 and any(stage.lagging for stage in schedule.stages)
    evidence: List[StageResult] = []
    for stage in schedule.stages:
        try:
            truth = eval_bounded(f, inp, stage, budget)
        except ResourceRefusal as e:
            logger.warning("bound escalation stopped: %s", e)
            return BoundVerdict(VerdictKind.RESOURCE_EXCEEDED, evidence, lagging=lagging)
        logger.info("bounds=%s final_cap=%d -> %s", stage.bounds, stage.final_cap, truth)
        evidence.append(StageResult(stage.bounds, stage.final_cap, truth))

    window = [e.truth for e in evidence[-schedule.confirmations:]]
    if all(t == window[-1] for t in window):
        return BoundVerdict(VerdictKind.STABILIZED, evidence, truth=window[-1], lagging=lagging)
    return BoundVerdict(VerdictKind.UNSTABLE, evidence, lagging=lagging)
