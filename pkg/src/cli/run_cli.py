"""
run and check commands: one concrete run, or an escalation schedule judged
for stabilization
"""

import logging

import gmpy2 as gmp

from src.cli.common import ExitCode, Limits, emit, positive_option, read_program, settings_for
from src.core.assembler import print_program
from src.core.machine import Status, TraceEvent, run
from src.core.oracle import EscalationSchedule, VerdictKind, parse_oracle_spec, stabilization_check
from src.core.utils import dump_record, exact_value, format_value, parse_input_literal, text_hash

logger = logging.getLogger(__name__)

RUN_EXIT = {
    Status.HALTED: ExitCode.OK,
    Status.FAULT: ExitCode.FAULT,
    Status.FUEL_EXHAUSTED: ExitCode.FUEL,
}

VERDICT_EXIT = {
    VerdictKind.STABILIZED: ExitCode.OK,
    VerdictKind.UNSTABLE: ExitCode.UNSTABLE,
    VerdictKind.RESOURCE_EXCEEDED: ExitCode.RESOURCE,
}


def _trace_line(event: TraceEvent) -> str:
    operands = " ".join(f"{p}({b}b)" for p, b in event.operands)
    line = f"{event.step:>8}  pc={event.pc:<4} {event.mnemonic:<4} {operands}"
    if event.dst_bits is not None:
        line += f" -> {event.dst_bits} bits"
    if event.draw_index is not None:
        line += f" [draw {event.draw_index}]"
    return line


def cmd_run(args) -> int:
    settings = settings_for(args)
    limits = Limits(args, settings)
    wide = settings.output.wide_value_bits
    program = read_program(args.program, args.profile)
    inp = parse_input_literal(args.input)
    extra = [parse_input_literal(v) for v in args.extra or []]
    family = parse_oracle_spec(args.oracle)

    outcome = run(program, inp, family, limits.fuel, limits.mem_bits,
                  trace=args.trace, preview=limits.preview, extra_inputs=extra)

    for event in outcome.trace or []:
        if args.format == "jsonl":
            print(dump_record({'event': 'trace', **event.to_dict()}))
        else:
            print(_trace_line(event))

    human = f"output={format_value(outcome.output, wide)} steps={outcome.steps} status={outcome.status.value}"
    if outcome.fault:
        human += f" fault={outcome.fault.value}"
    human += f" draws={len(outcome.aln_draws)}"
    if outcome.aln_draws:
        human += f" max_draw_bits={max(int(gmp.bit_length(d)) for d in outcome.aln_draws)}"
    if args.acceptor:
        human += f" accepted={'yes' if outcome.accepted else 'no'}"

    emit(args, human,
         event='run',
         program=program.name,
         program_hash=text_hash(print_program(program)),
         input=exact_value(inp),
         extra_inputs=[exact_value(v) for v in extra],
         oracle=family.describe(),
         fuel=limits.fuel,
         mem_bits=limits.mem_bits,
         output=exact_value(outcome.output),
         **outcome.to_dict())

    if args.acceptor and outcome.status is Status.FUEL_EXHAUSTED:
        # non-termination rejects
        return ExitCode.OK
    return RUN_EXIT[outcome.status]


def cmd_check(args) -> int:
    settings = settings_for(args)
    limits = Limits(args, settings)
    wide = settings.output.wide_value_bits
    program = read_program(args.program, args.profile)
    inp = parse_input_literal(args.input)
    family = parse_oracle_spec(args.oracle)
    schedule = EscalationSchedule(
        tuple(settings.oracle.scales if args.scales is None else args.scales),
        positive_option(args.confirmations, settings.oracle.confirmations, "--confirmations"),
    )
    workers = positive_option(args.workers, settings.oracle.workers, "--workers")

    verdict = stabilization_check(program, inp, schedule, family,
                                  limits.fuel, limits.mem_bits, workers)

    program_hash = text_hash(print_program(program))
    for e in verdict.evidence:
        line = f"  scale={e.scale:<4} {e.status.value:<15} steps={e.steps:<8} output={format_value(e.output, wide)}"
        if e.fault:
            line += f" fault={e.fault.value}"
        if args.format == "jsonl":
            print(dump_record({'event': 'evidence', 'program_hash': program_hash, **e.to_dict()}))
        else:
            print(line)

    human = verdict.kind.value
    if verdict.stabilized:
        human += f" value={format_value(verdict.value, wide)} settled_at={verdict.settled_at}"
    human += f" steps_max={verdict.steps_max}"

    emit(args, human,
         event='check',
         program=program.name,
         program_hash=program_hash,
         input=exact_value(inp),
         oracle=family.describe(),
         scales=list(schedule.scales),
         confirmations=schedule.confirmations,
         fuel=limits.fuel,
         mem_bits=limits.mem_bits,
         value=None if verdict.value is None else exact_value(verdict.value),
         **verdict.to_dict())
    return VERDICT_EXIT[verdict.kind]
