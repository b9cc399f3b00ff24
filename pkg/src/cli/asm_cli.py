"""
asm command: parse and validate a .asr file, optionally print or save the
canonical text
"""

import sys

from src.cli.common import ExitCode, emit, read_program
from src.core.assembler import print_program, save_program
from src.core.errors import AssemblyError, ValidationError
from src.core.utils import text_hash


def cmd_asm(args) -> int:
    try:
        program = read_program(args.program, args.profile)
    except AssemblyError as e:
        emit(args, event='asm', program=args.program, valid=False,
             diagnostics=[d.to_dict() for d in e.diagnostics])
        return ExitCode.USAGE
    except ValidationError as e:
        emit(args, event='asm', program=args.program, **e.report.to_dict())
        return ExitCode.USAGE

    text = print_program(program)
    if args.print:
        sys.stdout.write(text)
    if args.output:
        save_program(program, args.output)

    emit(args,
         f"{program.name}: valid under {program.profile.value}, "
         f"{len(program)} instructions, {program.aln_sites()} ALN site(s)",
         event='asm',
         program=program.name,
         program_hash=text_hash(text),
         profile=program.profile.value,
         valid=True,
         instructions=len(program),
         aln_sites=program.aln_sites())
    return ExitCode.OK
