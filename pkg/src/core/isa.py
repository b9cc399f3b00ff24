"""
ASRAM Instruction Set Module
Value semantics of every primitive operation, the opcode vocabulary, the
instruction-set profiles and program validation
"""

import sys
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Tuple

import gmpy2 as gmp

from src.core.errors import MachineFault


class FaultCode(Enum):
    """Reasons a run can stop abnormally"""

    DIV_BY_ZERO = "DIV_BY_ZERO"
    EXACT_DIV_REMAINDER = "EXACT_DIV_REMAINDER"
    MEMORY_CEILING = "MEMORY_CEILING"
    ALN_EXHAUSTED = "ALN_EXHAUSTED"


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------

def to_value(x) -> gmp.mpz:
    """
    Coerce an integer into a register value

    Raises:
        ValueError: if x is negative
    """
    v = gmp.mpz(x)
    if v < 0:
        raise ValueError(f"register values are nonnegative, got {x}")
    return v


def monus(a, b) -> gmp.mpz:
    """Truncated subtraction: max(a - b, 0)"""
    a, b = gmp.mpz(a), gmp.mpz(b)
    return a - b if a > b else gmp.mpz(0)


def int_div(a, b) -> gmp.mpz:
    """Floor division; a zero divisor is a DIV_BY_ZERO fault"""
    b = gmp.mpz(b)
    if b == 0:
        raise MachineFault(FaultCode.DIV_BY_ZERO, "integer division by zero")
    return gmp.f_div(gmp.mpz(a), b)


def exact_div(a, b) -> gmp.mpz:
    """Division defined only when b divides a (b = 0 never divides)"""
    a, b = gmp.mpz(a), gmp.mpz(b)
    if b == 0 or not gmp.is_divisible(a, b):
        raise MachineFault(FaultCode.EXACT_DIV_REMAINDER, f"{b} does not divide the dividend")
    return gmp.divexact(a, b)


def mod(a, b) -> gmp.mpz:
    """a - b*floor(a/b); a zero modulus is a DIV_BY_ZERO fault"""
    b = gmp.mpz(b)
    if b == 0:
        raise MachineFault(FaultCode.DIV_BY_ZERO, "modulus is zero")
    return gmp.f_mod(gmp.mpz(a), b)


def lshift(a, b, max_bits: Optional[int] = None) -> gmp.mpz:
    """
    Left shift: a * 2**b

    Args:
        a: Value to shift
        b: Shift amount
        max_bits: Optional ceiling on the result's bit-length

    Raises:
        MachineFault: MEMORY_CEILING when the result would exceed max_bits
    """
    a, b = gmp.mpz(a), gmp.mpz(b)
    if a == 0:
        return a
    limit = sys.maxsize if max_bits is None else max_bits
    if gmp.bit_length(a) + b > limit:
        raise MachineFault(FaultCode.MEMORY_CEILING, f"shift by {b} exceeds {limit} bits")
    return a << int(b)


def bool_op(kind, a, b) -> gmp.mpz:
    """Bitwise AND / OR / XOR of the binary representations"""
    kind = Opcode(kind) if isinstance(kind, str) else kind
    a, b = gmp.mpz(a), gmp.mpz(b)
    if kind is Opcode.AND:
        return a & b
    if kind is Opcode.OR:
        return a | b
    if kind is Opcode.XOR:
        return a ^ b
    raise ValueError(f"{kind} is not a Boolean operation")


# ---------------------------------------------------------------------------
# Opcodes and profiles
# ---------------------------------------------------------------------------

class Opcode(Enum):
    """Every opcode costs exactly one unit when executed"""

    ADD = "ADD"
    SUB = "SUB"      # monus
    MUL = "MUL"
    DIV = "DIV"      # integer division
    EXD = "EXD"      # exact division
    MOD = "MOD"
    SHL = "SHL"
    AND = "AND"
    OR = "OR"
    XOR = "XOR"
    SET = "SET"
    MOV = "MOV"
    LDI = "LDI"
    STI = "STI"
    JMP = "JMP"
    JEQ = "JEQ"
    ALN = "ALN"
    HALT = "HALT"

    @classmethod
    def from_mnemonic(cls, text: str) -> Optional["Opcode"]:
        try:
            return cls(text.upper())
        except ValueError:
            return None


BINARY_OPS = {
    Opcode.ADD: lambda a, b: gmp.mpz(a) + gmp.mpz(b),
    Opcode.SUB: monus,
    Opcode.MUL: lambda a, b: gmp.mpz(a) * gmp.mpz(b),
    Opcode.DIV: int_div,
    Opcode.EXD: exact_div,
    Opcode.MOD: mod,
    Opcode.SHL: lshift,
    Opcode.AND: lambda a, b: bool_op(Opcode.AND, a, b),
    Opcode.OR: lambda a, b: bool_op(Opcode.OR, a, b),
    Opcode.XOR: lambda a, b: bool_op(Opcode.XOR, a, b),
}

JUMPS = frozenset({Opcode.JMP, Opcode.JEQ})

# Control flow, data movement, ALN and HALT are in every profile
_COMMON = frozenset({
    Opcode.SET, Opcode.MOV, Opcode.LDI, Opcode.STI,
    Opcode.JMP, Opcode.JEQ, Opcode.ALN, Opcode.HALT,
})


class Profile(Enum):
    """Named operation sets a program may declare"""

    ARITH = "ARITH"
    SHIFT_BOOL = "SHIFT_BOOL"
    DIV_SHIFT_BOOL = "DIV_SHIFT_BOOL"
    FULL = "FULL"

    @property
    def allowed(self) -> FrozenSet[Opcode]:
        return PROFILE_OPCODES[self]

    def allows(self, opcode: Opcode) -> bool:
        return opcode in PROFILE_OPCODES[self]


_SHIFT_BOOL = _COMMON | {Opcode.ADD, Opcode.SHL, Opcode.AND, Opcode.OR, Opcode.XOR}

PROFILE_OPCODES: Dict[Profile, FrozenSet[Opcode]] = {
    Profile.ARITH: _COMMON | {Opcode.ADD, Opcode.SUB, Opcode.MUL, Opcode.DIV, Opcode.MOD},
    Profile.SHIFT_BOOL: _SHIFT_BOOL,
    Profile.DIV_SHIFT_BOOL: _SHIFT_BOOL | {Opcode.EXD},
    Profile.FULL: frozenset(Opcode),
}


# ---------------------------------------------------------------------------
# Instructions
# ---------------------------------------------------------------------------

class OperandKind(Enum):
    REG = "register"
    IND = "indirect"
    IMM = "immediate"


@dataclass(frozen=True)
class Operand:
    """r<n> reads R[n], @r<n> reads R[R[n]], an immediate is a literal Value"""

    kind: OperandKind
    value: int

    @classmethod
    def reg(cls, n: int) -> "Operand":
        return cls(OperandKind.REG, int(n))

    @classmethod
    def ind(cls, n: int) -> "Operand":
        return cls(OperandKind.IND, int(n))

    @classmethod
    def imm(cls, v: int) -> "Operand":
        return cls(OperandKind.IMM, int(v))

    def __str__(self):
        if self.kind is OperandKind.REG:
            return f"r{self.value}"
        if self.kind is OperandKind.IND:
            return f"@r{self.value}"
        # mpz formatting has no digit limit, unlike int.__str__
        return str(gmp.mpz(self.value))


_REG = frozenset({OperandKind.REG})
_SRC = frozenset({OperandKind.REG, OperandKind.IND})
_ANY = frozenset(OperandKind)

# Operand slots per opcode (the jump target is separate)
SHAPES: Dict[Opcode, Tuple[FrozenSet[OperandKind], ...]] = {
    **{op: (_REG, _ANY, _ANY) for op in BINARY_OPS},
    Opcode.SET: (_REG, frozenset({OperandKind.IMM})),
    Opcode.MOV: (_REG, _SRC),
    Opcode.LDI: (_REG, _REG),
    Opcode.STI: (_REG, _REG),
    Opcode.JMP: (),
    Opcode.JEQ: (_ANY, _ANY),
    Opcode.ALN: (_REG,),
    Opcode.HALT: (),
}


@dataclass(frozen=True)
class Instruction:
    """
    One machine instruction

    The label name is kept for printing only; two instructions are identical
    when opcode, operands and resolved target agree.
    """

    opcode: Opcode
    operands: Tuple[Operand, ...] = ()
    target: Optional[int] = None
    label: Optional[str] = field(default=None, compare=False)

    @property
    def dst(self) -> Optional[Operand]:
        return self.operands[0] if self.operands and self.opcode not in JUMPS else None

    @property
    def src1(self) -> Optional[Operand]:
        if self.opcode in JUMPS:
            return self.operands[0] if self.operands else None
        return self.operands[1] if len(self.operands) > 1 else None

    @property
    def src2(self) -> Optional[Operand]:
        if self.opcode in JUMPS:
            return self.operands[1] if len(self.operands) > 1 else None
        return self.operands[2] if len(self.operands) > 2 else None

    def __str__(self):
        parts = [str(o) for o in self.operands]
        if self.opcode in JUMPS:
            parts.append(self.label if self.label else f"L{self.target}")
        return self.opcode.value + (" " + ", ".join(parts) if parts else "")


@dataclass(frozen=True)
class Program:
    """The executable artifact: an instruction list bound to a declared profile"""

    instructions: Tuple[Instruction, ...]
    profile: Profile
    labels: Dict[str, int] = field(default_factory=dict, compare=False)
    name: Optional[str] = field(default=None, compare=False)
    aln_hint: Optional[int] = field(default=None, compare=False)

    def __len__(self):
        return len(self.instructions)

    def __getitem__(self, index: int) -> Instruction:
        return self.instructions[index]

    def aln_sites(self) -> int:
        """Number of ALN instructions in the text (not draws at run time)"""
        return sum(1 for ins in self.instructions if ins.opcode is Opcode.ALN)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

class Violation:
    """A single validation failure"""

    def __init__(self, index: int, message: str):
        self.index = index
        self.message = message

    def to_dict(self) -> Dict:
        return {'index': self.index, 'message': self.message}

    def __repr__(self):
        return f"Violation(index={self.index}, message='{self.message}')"


class ValidationReport:
    """Outcome of validate_program; valid iff there are no violations"""

    def __init__(self, profile: Profile, violations: List[Violation]):
        self.profile = profile
        self.violations = violations

    @property
    def valid(self) -> bool:
        return not self.violations

    def indices(self) -> List[int]:
        return [v.index for v in self.violations]

    def to_dict(self) -> Dict:
        return {
            'profile': self.profile.value,
            'valid': self.valid,
            'violations': [v.to_dict() for v in self.violations],
        }

    def __str__(self):
        if self.valid:
            return f"valid under {self.profile.value}"
        lines = [f"{len(self.violations)} violation(s) under {self.profile.value}:"]
        lines += [f"  instruction {v.index}: {v.message}" for v in self.violations]
        return "\n".join(lines)


def validate_program(program: Program, profile: Optional[Profile] = None) -> ValidationReport:
    """
    Check a program against a profile

    Args:
        program: Program to check
        profile: Profile to enforce; defaults to the program's declared profile

    Returns:
        ValidationReport listing each violation with its instruction index
    """
    profile = profile or program.profile
    violations: List[Violation] = []
    size = len(program.instructions)

    for index, ins in enumerate(program.instructions):
        if not profile.allows(ins.opcode):
            violations.append(Violation(
                index, f"{ins.opcode.value} is not allowed by profile {profile.value}"))

        shape = SHAPES[ins.opcode]
        if len(ins.operands) != len(shape):
            violations.append(Violation(
                index, f"{ins.opcode.value} takes {len(shape)} operand(s), got {len(ins.operands)}"))
        else:
            for slot, (operand, kinds) in enumerate(zip(ins.operands, shape)):
                if operand.kind not in kinds:
                    allowed = "/".join(sorted(k.value for k in kinds))
                    violations.append(Violation(
                        index, f"operand {slot + 1} of {ins.opcode.value} must be {allowed}, "
                               f"got {operand.kind.value}"))
                elif operand.value < 0:
                    violations.append(Violation(index, f"negative operand {operand.value}"))

        if ins.opcode in JUMPS:
            if ins.target is None:
                name = ins.label or "?"
                violations.append(Violation(index, f"jump target '{name}' is not defined"))
            elif not 0 <= ins.target <= size:
                violations.append(Violation(index, f"jump target {ins.target} is out of range"))
        elif ins.target is not None or ins.label is not None:
            violations.append(Violation(index, f"{ins.opcode.value} does not take a jump target"))

    return ValidationReport(profile, violations)
