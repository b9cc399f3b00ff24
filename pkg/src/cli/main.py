"""
ASRAM Command Line
Entry point: asm, run, check, gen and formula subcommands
"""

import argparse
import logging
import sys
from pathlib import Path

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from src.cli.asm_cli import cmd_asm
from src.cli.common import ExitCode, error
from src.cli.formula_cli import cmd_formula
from src.cli.gen_cli import cmd_gen
from src.cli.run_cli import cmd_check, cmd_run
from src.core.errors import AsramError, AssemblyError, ResourceRefusal, ValidationError
from src.core.isa import Profile

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; 2 is the machine-fault code here"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ExitCode.USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("values must be positive")
    return values


def _common_flags() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument('--fuel', type=int, help='Step budget per run')
    common.add_argument('--mem-bits', type=int, help='Largest bit-length a register may hold')
    common.add_argument('--trace', action='store_true', help='Print one line per executed instruction')
    common.add_argument('--format', choices=['human', 'jsonl'], default='human',
                        help='Human-readable lines or one JSON record per line')
    common.add_argument('--config', help='Settings YAML (defaults to config/defaults.yaml)')
    common.add_argument('-v', '--verbose', action='count', default=0, help='-v for INFO, -vv for DEBUG')
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = _Parser(prog='asram', description='ASRAM virtual machine toolkit')
    commands = parser.add_subparsers(dest='command', required=True)
    profiles = [p.value for p in Profile]

    asm = commands.add_parser('asm', parents=[common], help='Validate and pretty-print a program')
    asm.add_argument('program', help='.asr file')
    asm.add_argument('--profile', choices=profiles, help='Validate under another profile')
    asm.add_argument('--print', action='store_true', help='Print the canonical text')
    asm.add_argument('-o', '--output', help='Write the canonical text to a file')
    asm.set_defaults(handler=cmd_asm)

    run = commands.add_parser('run', parents=[common], help='Run a program once')
    run.add_argument('program', help='.asr file')
    run.add_argument('--input', default='0', help='Input value (decimal, 0x-hex or 2^e)')
    run.add_argument('--extra', action='append', help='Further input stored in R[1], R[2], ...')
    run.add_argument('--profile', choices=profiles, help='Profile override')
    run.add_argument('--oracle', default='pow2', help='Oracle spec, e.g. pow2:s=3 or plan:@x1.plan')
    run.add_argument('--acceptor', action='store_true', help='Acceptor mode: report accept/reject')
    run.set_defaults(handler=cmd_run)

    check = commands.add_parser('check', parents=[common], help='Escalate the oracle and judge stabilization')
    check.add_argument('program', help='.asr file')
    check.add_argument('--input', default='0', help='Input value (decimal, 0x-hex or 2^e)')
    check.add_argument('--profile', choices=profiles, help='Profile override')
    check.add_argument('--oracle', default='pow2', help='Oracle family template')
    check.add_argument('--scales', type=_int_list, help='Escalation scales, e.g. 1,2,3,4')
    check.add_argument('--confirmations', type=int, help='Agreeing runs needed')
    check.add_argument('--workers', type=int, help='Concurrent runs')
    check.set_defaults(handler=cmd_check)

    gen = commands.add_parser('gen', parents=[common], help='Generate a tower program and its plan')
    gen.add_argument('kind', choices=['tower', 'general-tower'])
    gen.add_argument('x', type=int, help='Tower parameter')
    gen.add_argument('--out-dir', default='.', help='Directory for the .asr and .plan files')
    gen.set_defaults(handler=cmd_gen)

    formula = commands.add_parser('formula', parents=[common], help='Bound-escalation verdict for a formula')
    formula.add_argument('formula', help='Formula text, or @file')
    formula.add_argument('--input', default='0', help='Value of inp')
    formula.add_argument('--levels', type=_int_list, help='Prefix bound per stage')
    formula.add_argument('--final-caps', type=_int_list, help='Explicit final cap per stage')
    formula.add_argument('--confirmations', type=int, help='Agreeing stages needed')
    formula.add_argument('--budget', type=int, help='Body evaluations allowed per stage')
    formula.set_defaults(handler=cmd_formula)

    return parser


def configure_logging(verbosity: int):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    try:
        return int(args.handler(args))
    except (AssemblyError, ValidationError):
        # diagnostics were already printed by the command
        return ExitCode.USAGE
    except ResourceRefusal as e:
        error(str(e))
        return ExitCode.RESOURCE
    except (AsramError, ValueError, OSError) as e:
        error(str(e))
        return ExitCode.USAGE


if __name__ == "__main__":
    sys.exit(main())
