"""
ASRAM Programs Module
Reference program generators: the unrolled tower 2^(2^(2^x)), the general
tower 2^(2^y) for any y, their sufficient exponent plans, and the input
padding encoder/decoder
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import gmpy2 as gmp

from src.core.errors import ResourceRefusal
from src.core.isa import Instruction, Opcode, Operand, Profile, Program
from src.core.oracle import FamilyKind, OracleFamily

logger = logging.getLogger(__name__)

DEFAULT_TOWER_CAP = 4
DEFAULT_GENERAL_CAP = 8

R = Operand.reg
IMM = Operand.imm


@dataclass(frozen=True)
class TowerLayout:
    """
    Register assignment of a generated tower program

    A_i lives in r<i>, P_i in r<alns + i>, temp and the modulus scratch in
    the two registers above those; the result is written to r0.
    """

    x: int
    alns: int

    # instruction count of gen_tower is SLOPE * x + INTERCEPT
    SLOPE = 5
    INTERCEPT = 2

    def aln(self, i: int) -> Operand:
        return R(i)

    def power(self, i: int) -> Operand:
        return R(self.alns + i)

    @property
    def temp(self) -> Operand:
        return R(2 * self.alns + 1)

    @property
    def modulus(self) -> Operand:
        return R(2 * self.alns + 2)

    @classmethod
    def instruction_count(cls, x: int) -> int:
        return cls.SLOPE * x + cls.INTERCEPT


@dataclass(frozen=True)
class ExponentPlan:
    """Draw i is 2**exponents[i-1]"""

    x: int
    exponents: Tuple[int, ...]

    def family(self) -> OracleFamily:
        return OracleFamily(FamilyKind.EXPONENT_PLAN, exponents=self.exponents)

    def to_text(self, title: str = "") -> str:
        header = f"# {title}\n" if title else ""
        return header + "".join(f"{e}\n" for e in self.exponents)

    def save(self, path, title: str = "") -> Path:
        path = Path(path)
        path.write_text(self.to_text(title), encoding="utf-8", newline="\n")
        return path


def _ins(opcode: Opcode, *operands: Operand) -> Instruction:
    return Instruction(opcode, tuple(operands))


def _evaluate_step(layout: TowerLayout, hi: int, lo: int) -> List[Instruction]:
    """
    P_lo <- A_lo ** (k*k) given P_hi = A_hi ** k, in four instructions:
    temp = P_hi mod (A_hi - A_lo) evaluates the power at A_lo, and reducing
    modulo A_hi - temp evaluates it again at temp
    """
    m, t = layout.modulus, layout.temp
    return [
        _ins(Opcode.SUB, m, layout.aln(hi), layout.aln(lo)),
        _ins(Opcode.MOD, t, layout.power(hi), m),
        _ins(Opcode.SUB, m, layout.aln(hi), t),
        _ins(Opcode.MOD, layout.power(lo), layout.power(hi), m),
    ]


def gen_tower(x: int) -> Program:
    """
    Unrolled ARITH program computing 2^(2^(2^x)) in 5x + 2 steps

    Args:
        x: Tower parameter, x >= 1

    Returns:
        Program drawing x ALNs
    """
    if x < 1:
        raise ValueError("tower parameter must be at least 1")
    layout = TowerLayout(x, x)
    code = [_ins(Opcode.ALN, layout.aln(i)) for i in range(1, x + 1)]
    code.append(_ins(Opcode.MUL, layout.power(x), layout.aln(x), layout.aln(x)))
    for i in range(x - 1, 0, -1):
        code += _evaluate_step(layout, i + 1, i)

    m, t = layout.modulus, layout.temp
    code += [
        _ins(Opcode.SUB, m, layout.aln(1), IMM(2)),
        _ins(Opcode.MOD, t, layout.power(1), m),
        _ins(Opcode.SUB, m, layout.aln(1), t),
        _ins(Opcode.MOD, R(0), layout.power(1), m),
        _ins(Opcode.HALT),
    ]
    assert len(code) == TowerLayout.instruction_count(x)
    return Program(tuple(code), Profile.ARITH, name=f"tower_x{x}", aln_hint=x)


def sufficient_plan(x: int, cap: int = DEFAULT_TOWER_CAP) -> ExponentPlan:
    """
    Minimal exponent plan for gen_tower(x)

    e_1 = 2^(2^x) + 2 and e_(i+1) = e_i * 2^(2^(x-i)) + 1.

    Raises:
        ResourceRefusal: for x above cap (e_x grows doubly exponentially)
    """
    if x < 1:
        raise ValueError("tower parameter must be at least 1")
    if x > cap:
        raise ResourceRefusal(f"tower x={x} exceeds the configured cap of {cap}", cap)
    exponents = [2 ** (2 ** x) + 2]
    for i in range(1, x):
        exponents.append(exponents[-1] * 2 ** (2 ** (x - i)) + 1)
    return ExponentPlan(x, tuple(exponents))


def _general_levels(y: int) -> Tuple[int, List[int]]:
    """Number of ALNs and, per level 1..n, the log2 of the exponent held there"""
    bits = bin(y)[2:]
    n = len(bits)
    m = [0] * (n + 1)
    m[n] = 1
    for i in range(n - 1, 0, -1):
        m[i] = 2 * m[i + 1] + int(bits[n - i])
    return n, m


def gen_general_tower(y: int) -> Program:
    """
    ARITH program computing 2^(2^y) for any y >= 1

    Square-and-multiply over the bits of y: the leading bit starts from
    P_n = A_n^2, every further bit costs one evaluation step (which doubles
    log2 of the exponent) plus a squaring when the bit is set. The final
    reduction modulo A_1 - 2 evaluates the power at 2.
    """
    if y < 1:
        raise ValueError("general tower parameter must be at least 1")
    n, _ = _general_levels(y)
    bits = bin(y)[2:]
    layout = TowerLayout(y, n)
    code = [_ins(Opcode.ALN, layout.aln(i)) for i in range(1, n + 1)]
    code.append(_ins(Opcode.MUL, layout.power(n), layout.aln(n), layout.aln(n)))
    for i in range(n - 1, 0, -1):
        code += _evaluate_step(layout, i + 1, i)
        if bits[n - i] == "1":
            code.append(_ins(Opcode.MUL, layout.power(i), layout.power(i), layout.power(i)))
    code += [
        _ins(Opcode.SUB, layout.modulus, layout.aln(1), IMM(2)),
        _ins(Opcode.MOD, R(0), layout.power(1), layout.modulus),
        _ins(Opcode.HALT),
    ]
    return Program(tuple(code), Profile.ARITH, name=f"general_tower_y{y}", aln_hint=n)


def sufficient_general_plan(y: int, cap: int = DEFAULT_GENERAL_CAP) -> ExponentPlan:
    """
    Minimal exponent plan for gen_general_tower(y)

    With k_i = 2^(m_i) the exponent held at level i: e_1 = 2^y + 1 and
    e_(i+1) = e_i * k_(i+1)^2 + 1.
    """
    if y < 1:
        raise ValueError("general tower parameter must be at least 1")
    if y > cap:
        raise ResourceRefusal(f"general tower y={y} exceeds the configured cap of {cap}", cap)
    n, m = _general_levels(y)
    exponents = [2 ** y + 1]
    for i in range(1, n):
        exponents.append(exponents[-1] * 2 ** (2 * m[i + 1]) + 1)
    return ExponentPlan(y, tuple(exponents))


def pad_input(inp, t: int) -> gmp.mpz:
    """(2*inp + 1) * 2^t; the bit-length grows by exactly t + 1"""
    if t < 0:
        raise ValueError("padding length must be nonnegative")
    return (2 * gmp.mpz(inp) + 1) << t


def unpad_input(padded) -> Tuple[gmp.mpz, int]:
    """
    Inverse of pad_input: t is the number of trailing zero bits

    Raises:
        ValueError: for 0, which has no odd part
    """
    padded = gmp.mpz(padded)
    if padded < 1:
        raise ValueError("padded value must be positive")
    t = int(gmp.bit_scan1(padded))
    return (padded >> t) // 2, t
