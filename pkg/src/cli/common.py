"""
Shared CLI plumbing: exit codes, settings resolution, input/oracle parsing
and output helpers
"""

import sys
from enum import IntEnum
from typing import Optional

from src.core.assembler import load_program
from src.core.errors import AssemblyError, ValidationError
from src.core.isa import Profile, Program
from src.core.utils import (
    Settings, check_memory_ceiling, dump_record, load_settings, record,
)


class ExitCode(IntEnum):
    OK = 0
    USAGE = 1
    FAULT = 2
    FUEL = 3
    UNSTABLE = 4
    RESOURCE = 5


def positive_option(value, default, flag: str):
    """A command-line value when given, else the settings default; either must be positive"""
    resolved = default if value is None else value
    if resolved < 1:
        raise ValueError(f"{flag} must be positive, got {resolved}")
    return resolved


class Limits:
    """Run limits resolved from the command line first, then the settings file"""

    def __init__(self, args, settings: Settings):
        self.fuel = positive_option(args.fuel, settings.machine.fuel, "--fuel")
        self.mem_bits = positive_option(args.mem_bits, settings.machine.mem_bits, "--mem-bits")
        self.preview = settings.machine.trace_preview
        check_memory_ceiling(self.mem_bits)


def settings_for(args) -> Settings:
    return load_settings(getattr(args, 'config', None))


def error(message: str):
    print(f"error: {message}", file=sys.stderr)


def read_program(path: str, profile_name: Optional[str] = None) -> Program:
    """Load a program, printing every diagnostic before re-raising"""
    profile = Profile(profile_name.upper()) if profile_name else None
    try:
        return load_program(path, profile)
    except AssemblyError as e:
        for diagnostic in e.diagnostics:
            print(f"{path}:{diagnostic}", file=sys.stderr)
        raise
    except ValidationError as e:
        print(f"{path}: {e.report}", file=sys.stderr)
        raise


def emit(args, human: str = "", **fields):
    """Print a human line or one machine-readable record, per --format"""
    if args.format == "jsonl":
        print(dump_record(record(**fields)))
    elif human:
        print(human)
