"""
ASRAM Oracle Module
ALN oracle families (the operational stand-in for an ALS set), the oracle
spec mini-language, and the escalation / stabilization harness
"""

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import gmpy2 as gmp

from src.core.errors import OracleExhausted, OracleSpecError, ValidationError
from src.core.isa import FaultCode, Program, validate_program
from src.core.machine import (
    DEFAULT_FUEL, DEFAULT_MEM_BITS, DrawHistory, RunOutcome, Status, run,
)

logger = logging.getLogger(__name__)


class FamilyKind(Enum):
    POW2_SCHEDULE = "pow2"
    FIXED_LIST = "fixed"
    EXPONENT_PLAN = "plan"
    JITTERED_POW2 = "jitter"


@dataclass(frozen=True)
class OracleFamily:
    """
    Immutable description of an ALN draw generator

    The family itself holds no run state: the draw index comes from the
    history the machine passes in, so one family can serve many runs.

    Attributes:
        kind: Generator kind
        scale: Escalation parameter s >= 1
        draws: Explicit draws (FIXED_LIST)
        exponents: Exponent plan, draw i is 2**(s*e_i) (EXPONENT_PLAN)
        jitter: Additive terms cycled over draws (JITTERED_POW2)
        run_index: Position of the run inside an escalation schedule
        max_draws: Fault after this many draws (1 gives the ARAM)
    """

    kind: FamilyKind
    scale: int = 1
    draws: Tuple[int, ...] = ()
    exponents: Tuple[int, ...] = ()
    jitter: Tuple[int, ...] = ()
    run_index: int = 0
    max_draws: Optional[int] = None
    spec: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if self.scale < 1:
            raise OracleSpecError(f"scale must be a positive integer, got {self.scale}")
        if self.max_draws is not None and self.max_draws < 0:
            raise OracleSpecError("max_draws must be nonnegative")
        if self.kind is FamilyKind.JITTERED_POW2 and not self.jitter:
            raise OracleSpecError("jittered family needs at least one jitter term")
        if any(e < 1 for e in self.exponents):
            raise OracleSpecError("plan exponents must be positive")

    def at_scale(self, scale: int, run_index: int = 0) -> "OracleFamily":
        """The same family escalated to another scale"""
        return replace(self, scale=scale, run_index=run_index)

    def next_draw(self, history: DrawHistory) -> gmp.mpz:
        return next_draw(self, history)

    def draw_bits(self, history: DrawHistory) -> int:
        return draw_bits(self, history)

    def describe(self) -> str:
        """Canonical mini-language text for this family"""
        if self.kind is FamilyKind.FIXED_LIST:
            text = "fixed:" + ",".join(_format_literal(d) for d in self.draws)
        elif self.kind is FamilyKind.EXPONENT_PLAN:
            text = "plan:" + ",".join(str(e) for e in self.exponents)
            if self.scale != 1:
                text += f",s={self.scale}"
        elif self.kind is FamilyKind.JITTERED_POW2:
            text = f"jitter:s={self.scale},j=" + "|".join(str(j) for j in self.jitter)
        else:
            text = f"pow2:s={self.scale}"
        if self.max_draws is not None:
            text += f",max={self.max_draws}"
        return text


def pow2_exponent(scale: int, history: DrawHistory) -> int:
    """
    Exponent chosen by the power-of-two schedule

    Strictly greater than scale * (1 + B), B being the largest bit-length
    among the input, every prior draw and every register value seen.
    """
    return scale * (1 + history.max_bits) + 1


def next_draw(family: OracleFamily, history: DrawHistory) -> gmp.mpz:
    """
    Next ALN value of a family

    Args:
        family: Oracle family
        history: Summary of the run so far; history.index is the draw number

    Returns:
        The draw as an mpz

    Raises:
        OracleExhausted: when the family cannot provide this draw
    """
    i = _available(family, history)
    if family.kind is FamilyKind.FIXED_LIST:
        return gmp.mpz(family.draws[i])
    if family.kind is FamilyKind.EXPONENT_PLAN:
        return gmp.mpz(1) << (family.scale * family.exponents[i])

    power = gmp.mpz(1) << pow2_exponent(family.scale, history)
    if family.kind is FamilyKind.JITTERED_POW2:
        return power + family.jitter[(family.run_index + i) % len(family.jitter)]
    return power


def draw_bits(family: OracleFamily, history: DrawHistory) -> int:
    """
    Bit-length of the draw next_draw would return, without building it

    Raises:
        OracleExhausted: when the family cannot provide this draw
    """
    i = _available(family, history)
    if family.kind is FamilyKind.FIXED_LIST:
        return int(gmp.bit_length(gmp.mpz(family.draws[i])))
    if family.kind is FamilyKind.EXPONENT_PLAN:
        return family.scale * family.exponents[i] + 1

    e = pow2_exponent(family.scale, history)
    if family.kind is FamilyKind.JITTERED_POW2:
        term = gmp.mpz(family.jitter[(family.run_index + i) % len(family.jitter)])
        if gmp.bit_length(term) > e:
            # the power is the smaller summand here, so it is cheap to build
            return int(gmp.bit_length((gmp.mpz(1) << e) + term))
    return e + 1


def _available(family: OracleFamily, history: DrawHistory) -> int:
    i = history.index
    if family.max_draws is not None and i >= family.max_draws:
        raise OracleExhausted(f"family allows {family.max_draws} draw(s)")
    if family.kind is FamilyKind.FIXED_LIST and i >= len(family.draws):
        raise OracleExhausted(f"fixed list has only {len(family.draws)} draw(s)")
    if family.kind is FamilyKind.EXPONENT_PLAN and i >= len(family.exponents):
        raise OracleExhausted(f"exponent plan has only {len(family.exponents)} entries")
    return i


# ---------------------------------------------------------------------------
# Spec mini-language
# ---------------------------------------------------------------------------

_POWER = re.compile(r"2\^(\d+)$")


def parse_literal(text: str) -> gmp.mpz:
    """Decimal, 0x-hex or 2^<e> literal"""
    text = text.strip()
    m = _POWER.match(text)
    if m:
        return gmp.mpz(1) << int(m.group(1))
    try:
        if text.lower().startswith("0x"):
            return gmp.mpz(text[2:], 16)
        return gmp.mpz(text, 10)
    except ValueError:
        raise OracleSpecError(f"malformed literal '{text}'")


def _format_literal(value) -> str:
    value = gmp.mpz(value)
    if value > 1 and gmp.bit_length(value) > 64 and value & (value - 1) == 0:
        return f"2^{int(gmp.bit_length(value)) - 1}"
    return str(value)


def read_literal_file(path, exponents: bool = False) -> List[int]:
    """
    Read a fixed/plan file: one literal per line, '#' comments allowed

    Args:
        path: File to read
        exponents: Plan semantics; a bare number is an exponent and 2^<e>
                   denotes the draw whose exponent is e
    """
    values = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        m = _POWER.match(line)
        try:
            if exponents:
                values.append(int(m.group(1)) if m else int(line))
            else:
                values.append(int(parse_literal(line)))
        except (ValueError, OracleSpecError):
            raise OracleSpecError(f"{path}:{lineno}: malformed literal '{line}'")
    return values


def parse_oracle_spec(text: str, base_dir=None) -> OracleFamily:
    """
    Parse the oracle mini-language

    Forms: pow2:s=3   fixed:@file   fixed:64,2^80   plan:@file   plan:6,73
    plan:tower=2   plan:general=5   jitter:s=3,j=0|1|2|3 ; every form also
    accepts max=N.

    Args:
        text: Spec string
        base_dir: Directory for relative @file references

    Raises:
        OracleSpecError: on malformed specs
    """
    kind_text, sep, rest = text.strip().partition(":")
    try:
        kind = FamilyKind(kind_text.lower())
    except ValueError:
        raise OracleSpecError(f"unknown oracle kind '{kind_text}'")
    if kind in (FamilyKind.FIXED_LIST, FamilyKind.EXPONENT_PLAN) and not rest:
        raise OracleSpecError(f"'{kind_text}' needs draws, a plan or an @file")

    options: Dict[str, str] = {}
    items: List[str] = []
    for token in filter(None, (t.strip() for t in rest.split(","))):
        if "=" in token:
            key, _, value = token.partition("=")
            options[key.strip().lower()] = value.strip()
        else:
            items.append(token)

    def _int_option(key: str, default: Optional[int]) -> Optional[int]:
        if key not in options:
            return default
        try:
            return int(options.pop(key))
        except ValueError:
            raise OracleSpecError(f"option {key} must be an integer")

    scale = _int_option("s", 1)
    max_draws = _int_option("max", None)
    values: List[int] = []
    for item in items:
        if item.startswith("@"):
            path = Path(item[1:])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            if not path.exists():
                raise OracleSpecError(f"oracle file not found: {path}")
            values.extend(read_literal_file(path, exponents=kind is FamilyKind.EXPONENT_PLAN))
        elif kind is FamilyKind.EXPONENT_PLAN:
            m = _POWER.match(item)
            values.append(int(m.group(1)) if m else int(parse_literal(item)))
        else:
            values.append(int(parse_literal(item)))

    if kind is FamilyKind.EXPONENT_PLAN and ("tower" in options or "general" in options):
        from src.core.programs import sufficient_general_plan, sufficient_plan

        if "tower" in options:
            values.extend(sufficient_plan(_int_option("tower", None)).exponents)
        else:
            values.extend(sufficient_general_plan(_int_option("general", None)).exponents)

    jitter: Tuple[int, ...] = ()
    if "j" in options:
        try:
            jitter = tuple(int(j) for j in options.pop("j").split("|"))
        except ValueError:
            raise OracleSpecError("jitter terms must be integers separated by '|'")
    if options:
        raise OracleSpecError(f"unknown option(s): {', '.join(sorted(options))}")

    if kind is FamilyKind.FIXED_LIST:
        return OracleFamily(kind, scale, draws=tuple(values), max_draws=max_draws, spec=text)
    if kind is FamilyKind.EXPONENT_PLAN:
        return OracleFamily(kind, scale, exponents=tuple(values), max_draws=max_draws, spec=text)
    if items:
        raise OracleSpecError(f"'{kind_text}' does not take explicit draws")
    return OracleFamily(kind, scale, jitter=jitter, max_draws=max_draws, spec=text)


# ---------------------------------------------------------------------------
# Escalation harness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EscalationSchedule:
    """Strictly increasing scales; a verdict needs the last c runs to agree"""

    scales: Tuple[int, ...]
    confirmations: int = 2

    def __post_init__(self):
        if not self.scales:
            raise ValueError("escalation schedule must not be empty")
        if any(s < 1 for s in self.scales):
            raise ValueError("scales must be positive")
        if any(b <= a for a, b in zip(self.scales, self.scales[1:])):
            raise ValueError("scales must be strictly increasing")
        if self.confirmations < 2:
            raise ValueError("at least two confirmations are required")
        if self.confirmations > len(self.scales):
            raise ValueError("more confirmations than scales")

    @classmethod
    def linear(cls, count: int, confirmations: int = 2) -> "EscalationSchedule":
        return cls(tuple(range(1, count + 1)), confirmations)


class VerdictKind(Enum):
    STABILIZED = "stabilized"
    UNSTABLE = "unstable"
    RESOURCE_EXCEEDED = "resource_exceeded"


@dataclass(frozen=True)
class Evidence:
    scale: int
    output: gmp.mpz
    steps: int
    status: Status
    fault: Optional[FaultCode] = None

    @property
    def resource_limited(self) -> bool:
        return self.status is Status.FUEL_EXHAUSTED or self.fault is FaultCode.MEMORY_CEILING

    def to_dict(self) -> Dict:
        return {
            'scale': self.scale,
            'output_bits': int(gmp.bit_length(self.output)),
            'steps': self.steps,
            'status': self.status.value,
            'fault': self.fault.value if self.fault else None,
        }


@dataclass
class Verdict:
    """
    Result of an escalation run

    steps_max is the largest step count seen: an empirical lower bound on
    the worst-case run-time over all draw sequences, not the worst case.
    """

    kind: VerdictKind
    evidence: List[Evidence]
    value: Optional[gmp.mpz] = None
    steps_max: int = 0
    settled_at: Optional[int] = None

    @property
    def stabilized(self) -> bool:
        return self.kind is VerdictKind.STABILIZED

    def to_dict(self) -> Dict:
        return {
            'verdict': self.kind.value,
            'value_bits': None if self.value is None else int(gmp.bit_length(self.value)),
            'steps_max': self.steps_max,
            'settled_at': self.settled_at,
            'evidence': [e.to_dict() for e in self.evidence],
        }


def judge(evidence: Sequence[Evidence], confirmations: int) -> Verdict:
    """Turn per-scale evidence (ordered by scale) into a verdict"""
    evidence = list(evidence)
    steps_max = max((e.steps for e in evidence), default=0)
    window = evidence[-confirmations:]
    if any(e.resource_limited for e in window):
        return Verdict(VerdictKind.RESOURCE_EXCEEDED, evidence, steps_max=steps_max)
    value = window[-1].output
    if any(e.output != value for e in window):
        return Verdict(VerdictKind.UNSTABLE, evidence, steps_max=steps_max)

    settled = len(evidence) - 1
    while settled > 0 and evidence[settled - 1].output == value and not evidence[settled - 1].resource_limited:
        settled -= 1
    return Verdict(VerdictKind.STABILIZED, evidence, value=value, steps_max=steps_max,
                   settled_at=evidence[settled].scale)


def stabilization_check(program: Program, inp, schedule: EscalationSchedule,
                        family: OracleFamily,
                        fuel: int = DEFAULT_FUEL,
                        mem_ceiling: int = DEFAULT_MEM_BITS,
                        workers: int = 1) -> Verdict:
    """
    Run a program once per scale of the schedule and judge the outputs

    Runs may execute concurrently; the verdict is computed from results
    ordered by scale, so completion order does not matter.

    Args:
        program: Program under test
        inp: Input value
        schedule: Escalation schedule
        family: Family template, escalated to each scale in turn
        fuel: Step budget per run
        mem_ceiling: Per-value bit budget per run
        workers: Concurrent runs

    Returns:
        Verdict with one Evidence per scale
    """
    report = validate_program(program)
    if not report.valid:
        raise ValidationError(report)

    def _one(indexed: Tuple[int, int]) -> Evidence:
        index, scale = indexed
        outcome: RunOutcome = run(program, inp, family.at_scale(scale, index),
                                  fuel, mem_ceiling, validate=False)
        logger.info("scale %d: status=%s steps=%d output_bits=%d",
                    scale, outcome.status.value, outcome.steps, int(gmp.bit_length(outcome.output)))
        return Evidence(scale, outcome.output, outcome.steps, outcome.status, outcome.fault)

    jobs = list(enumerate(schedule.scales))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            evidence = list(pool.map(_one, jobs))
    else:
        evidence = [_one(job) for job in jobs]

    verdict = judge(evidence, schedule.confirmations)
    logger.info("verdict %s after %d run(s)", verdict.kind.value, len(evidence))
    return verdict
