"""
ASRAM Machine Module
Unit-cost interpreter: executes a validated program under an ALN oracle with
fuel, a per-value memory ceiling, function/acceptor conventions and tracing
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional

import gmpy2 as gmp

from src.core.errors import MachineFault, OracleExhausted, ValidationError
from src.core.isa import (
    BINARY_OPS, FaultCode, Instruction, Opcode, Operand, OperandKind, Program,
    lshift, to_value, validate_program,
)

logger = logging.getLogger(__name__)

DEFAULT_FUEL = 10 ** 6
DEFAULT_MEM_BITS = 2 ** 30
DEFAULT_PREVIEW = 16  # hex digits shown per operand in trace events

ZERO = gmp.mpz(0)


class Status(Enum):
    RUNNING = "running"
    HALTED = "halted"
    FAULT = "fault"
    FUEL_EXHAUSTED = "fuel_exhausted"


@dataclass(frozen=True)
class DrawHistory:
    """What an oracle may look at when sizing the next draw"""

    input_bits: int
    max_register_bits: int
    draws: tuple

    @property
    def index(self) -> int:
        """Zero-based index of the draw being requested"""
        return len(self.draws)

    @property
    def max_bits(self) -> int:
        prior = max((int(gmp.bit_length(d)) for d in self.draws), default=0)
        return max(self.input_bits, self.max_register_bits, prior)


@dataclass
class MachineState:
    """
    Sparse register file plus control state

    Absent registers read as 0; writing 0 removes the entry.
    """

    registers: Dict[int, gmp.mpz] = field(default_factory=dict)
    pc: int = 0
    steps: int = 0
    aln_draws: List[gmp.mpz] = field(default_factory=list)
    status: Status = Status.RUNNING
    fault: Optional[FaultCode] = None
    input_bits: int = 0
    max_bits: int = 0

    @classmethod
    def initial(cls, inp, extra_inputs: Iterable = ()) -> "MachineState":
        """R[0] = input, R[1..m-1] = extra inputs, everything else zero"""
        state = cls()
        for address, value in enumerate([inp, *extra_inputs]):
            state.write(address, to_value(value))
        state.input_bits = state.max_bits
        return state

    def read(self, address) -> gmp.mpz:
        return self.registers.get(int(address), ZERO)

    def write(self, address, value, ceiling: Optional[int] = None) -> int:
        bits = int(gmp.bit_length(value))
        if ceiling is not None and bits > ceiling:
            raise MachineFault(FaultCode.MEMORY_CEILING, f"{bits}-bit value exceeds {ceiling} bits")
        address = int(address)
        if value:
            self.registers[address] = gmp.mpz(value)
        else:
            self.registers.pop(address, None)
        if bits > self.max_bits:
            self.max_bits = bits
        return bits

    def history(self) -> DrawHistory:
        return DrawHistory(self.input_bits, self.max_bits, tuple(self.aln_draws))


def _preview(value, width: int) -> str:
    """Leading hex digits of a value, marked when truncated"""
    bits = int(gmp.bit_length(value))
    if bits <= 4 * width:
        return hex(int(value))
    head = gmp.mpz(value) >> (bits - 4 * width)
    return f"{hex(int(head))}..."


@dataclass(frozen=True)
class TraceEvent:
    step: int
    pc: int
    mnemonic: str
    dst_bits: Optional[int]
    draw_index: Optional[int]
    operands: tuple  # (preview, bit_length) per source operand

    def to_dict(self) -> Dict:
        record = {
            'step': self.step,
            'pc': self.pc,
            'mnemonic': self.mnemonic,
            'dst_bits': self.dst_bits,
            'operands': [{'preview': p, 'bits': b} for p, b in self.operands],
        }
        if self.draw_index is not None:
            record['draw_index'] = self.draw_index
        return record


@dataclass
class RunOutcome:
    """Observable result of one concrete run"""

    output: gmp.mpz
    steps: int
    status: Status
    aln_draws: List[gmp.mpz]
    fault: Optional[FaultCode] = None
    trace: Optional[List[TraceEvent]] = None
    max_bits: int = 0

    @property
    def accepted(self) -> bool:
        return self.output != 0

    def to_dict(self) -> Dict:
        return {
            'status': self.status.value,
            'fault': self.fault.value if self.fault else None,
            'output_bits': int(gmp.bit_length(self.output)),
            'accepted': self.accepted,
            'steps': self.steps,
            'draw_bits': [int(gmp.bit_length(d)) for d in self.aln_draws],
            'max_bits': self.max_bits,
        }


def _fetch(state: MachineState, operand: Operand) -> gmp.mpz:
    if operand.kind is OperandKind.REG:
        return state.read(operand.value)
    if operand.kind is OperandKind.IND:
        return state.read(state.read(operand.value))
    return gmp.mpz(operand.value)


def _binary(opcode: Opcode, a, b, ceiling: int) -> gmp.mpz:
    if opcode is Opcode.SHL:
        return lshift(a, b, ceiling)
    if opcode is Opcode.MUL and a and b:
        # the product has at least bits(a) + bits(b) - 1 bits
        if gmp.bit_length(a) + gmp.bit_length(b) - 1 > ceiling:
            raise MachineFault(FaultCode.MEMORY_CEILING, "product exceeds the memory ceiling")
    return BINARY_OPS[opcode](a, b)


def step(state: MachineState, program: Program, oracle,
         mem_ceiling: int = DEFAULT_MEM_BITS,
         trace: Optional[List[TraceEvent]] = None,
         preview: int = DEFAULT_PREVIEW) -> MachineState:
    """
    Execute exactly one instruction, updating state in place

    Args:
        state: Running machine state with pc inside the program
        oracle: Object with next_draw(DrawHistory) -> Value, and optionally
            draw_bits(DrawHistory) -> int to size a draw before it is built
        mem_ceiling: Maximum bit-length of any stored value
        trace: When given, one TraceEvent is appended
        preview: Hex digits per operand preview in trace events

    Returns:
        The same state object
    """
    ins: Instruction = program.instructions[state.pc]
    op = ins.opcode
    pc = state.pc
    state.steps += 1
    next_pc = pc + 1
    dst_bits = None
    draw_index = None
    sources = [_fetch(state, o) for o in ins.operands[1:]] if op not in (Opcode.JEQ, Opcode.STI) \
        else [_fetch(state, o) for o in ins.operands]

    try:
        if op in BINARY_OPS:
            result = _binary(op, sources[0], sources[1], mem_ceiling)
            dst_bits = state.write(ins.operands[0].value, result, mem_ceiling)
        elif op is Opcode.SET or op is Opcode.MOV:
            dst_bits = state.write(ins.operands[0].value, sources[0], mem_ceiling)
        elif op is Opcode.LDI:
            dst_bits = state.write(ins.operands[0].value, state.read(sources[0]), mem_ceiling)
        elif op is Opcode.STI:
            dst_bits = state.write(sources[0], sources[1], mem_ceiling)
        elif op is Opcode.JMP:
            next_pc = ins.target
        elif op is Opcode.JEQ:
            if sources[0] == sources[1]:
                next_pc = ins.target
        elif op is Opcode.ALN:
            draw_index = len(state.aln_draws)
            history = state.history()
            sizer = getattr(oracle, "draw_bits", None)
            try:
                if sizer is not None and sizer(history) > mem_ceiling:
                    raise MachineFault(FaultCode.MEMORY_CEILING, "ALN draw exceeds the memory ceiling")
                draw = to_value(oracle.next_draw(history))
            except OracleExhausted as e:
                raise MachineFault(FaultCode.ALN_EXHAUSTED, str(e))
            if gmp.bit_length(draw) > mem_ceiling:
                raise MachineFault(FaultCode.MEMORY_CEILING, "ALN draw exceeds the memory ceiling")
            state.aln_draws.append(draw)
            dst_bits = state.write(ins.operands[0].value, draw, mem_ceiling)
        elif op is Opcode.HALT:
            state.status = Status.HALTED
            next_pc = pc
    except MachineFault as fault:
        state.status = Status.FAULT
        state.fault = fault.code
        next_pc = pc
        logger.debug("fault at pc=%d (%s): %s", pc, op.value, fault)

    state.pc = next_pc
    if trace is not None:
        trace.append(TraceEvent(
            step=state.steps,
            pc=pc,
            mnemonic=op.value,
            dst_bits=dst_bits,
            draw_index=draw_index,
            operands=tuple((_preview(v, preview), int(gmp.bit_length(v))) for v in sources),
        ))
    return state


def run(program: Program, inp, oracle,
        fuel: int = DEFAULT_FUEL,
        mem_ceiling: int = DEFAULT_MEM_BITS,
        trace: bool = False,
        preview: int = DEFAULT_PREVIEW,
        extra_inputs: Iterable = (),
        validate: bool = True) -> RunOutcome:
    """
    Run a program to completion in function mode

    Running past the last instruction is an implicit halt. Faults and fuel
    exhaustion report output 0.

    Args:
        program: Program to execute
        inp: Input value stored in R[0]
        oracle: ALN oracle handle
        fuel: Step budget
        mem_ceiling: Per-value bit budget
        trace: Collect one TraceEvent per executed instruction
        preview: Hex digits per operand preview in trace events
        extra_inputs: Further inputs stored in R[1], R[2], ...
        validate: Check the program against its profile first

    Returns:
        RunOutcome

    Raises:
        ValidationError: if validate is set and the program is invalid
    """
    if fuel <= 0 or mem_ceiling <= 0:
        raise ValueError("fuel and memory ceiling must be positive")
    if validate:
        report = validate_program(program)
        if not report.valid:
            raise ValidationError(report)

    state = MachineState.initial(inp, extra_inputs)
    events: Optional[List[TraceEvent]] = [] if trace else None
    size = len(program.instructions)

    while state.status is Status.RUNNING:
        if state.pc >= size:
            state.status = Status.HALTED
        elif state.steps >= fuel:
            state.status = Status.FUEL_EXHAUSTED
        else:
            step(state, program, oracle, mem_ceiling, events, preview)

    output = state.read(0) if state.status is Status.HALTED else ZERO
    logger.debug("run finished: status=%s steps=%d draws=%d",
                 state.status.value, state.steps, len(state.aln_draws))
    return RunOutcome(
        output=output,
        steps=state.steps,
        status=state.status,
        aln_draws=list(state.aln_draws),
        fault=state.fault,
        trace=events,
        max_bits=state.max_bits,
    )


def run_acceptor(program: Program, inp, oracle,
                 fuel: int = DEFAULT_FUEL,
                 mem_ceiling: int = DEFAULT_MEM_BITS) -> bool:
    """Acceptor mode: True iff the run halts with a nonzero R[0]"""
    return run(program, inp, oracle, fuel, mem_ceiling).accepted


class Machine:
    """Interpreter bound to a fixed set of run limits"""

    def __init__(self, fuel: int = DEFAULT_FUEL, mem_ceiling: int = DEFAULT_MEM_BITS,
                 preview: int = DEFAULT_PREVIEW):
        if fuel <= 0 or mem_ceiling <= 0:
            raise ValueError("fuel and memory ceiling must be positive")
        self.fuel = fuel
        self.mem_ceiling = mem_ceiling
        self.preview = preview

    def run(self, program: Program, inp, oracle, trace: bool = False) -> RunOutcome:
        return run(program, inp, oracle, self.fuel, self.mem_ceiling, trace, self.preview)

    def run_acceptor(self, program: Program, inp, oracle) -> bool:
        return self.run(program, inp, oracle).accepted

    def __repr__(self):
        return f"Machine(fuel={self.fuel}, mem_ceiling={self.mem_ceiling})"
