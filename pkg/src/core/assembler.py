"""
ASRAM Assembler Module
Parser and canonical printer for the .asr text format

Grammar (one statement per line, ';' starts a comment):

    .profile ARITH|SHIFT_BOOL|DIV_SHIFT_BOOL|FULL      (mandatory)
    .name <identifier>                                  (optional)
    .alns <count>                                       (optional ALN-count hint)
    [label:] MNEMONIC [operand {, operand}]

Operands are r<n> (direct), @r<n> (indirect), decimal or 0x literals, and
label identifiers as the last operand of JMP / JEQ.
"""

import logging
import re
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import gmpy2 as gmp

from src.core.errors import AssemblyError, Diagnostic, ValidationError
from src.core.isa import (
    JUMPS, Instruction, Opcode, Operand, Profile, Program, validate_program,
)

logger = logging.getLogger(__name__)

ASR_SUFFIX = ".asr"

_LABEL_DEF = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_.]*)\s*:")
_MNEMONIC = re.compile(r"\s*([A-Za-z]+)")
_REGISTER = re.compile(r"[rR](\d+)$")
_INDIRECT = re.compile(r"@[rR](\d+)$")
_DECIMAL = re.compile(r"\d+$")
_HEX = re.compile(r"0[xX][0-9a-fA-F]+$")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*$")


def _strip_comment(line: str) -> str:
    cut = line.find(";")
    return line if cut < 0 else line[:cut]


def _split_operands(text: str, base_col: int) -> List[Tuple[str, int]]:
    """Split 'a, b, c' into (token, 1-based column) pairs; empty tokens are kept"""
    if not text.strip():
        return []
    pieces = []
    start = 0
    for part in text.split(","):
        stripped = part.strip()
        lead = len(part) - len(part.lstrip())
        pieces.append((stripped, base_col + start + lead))
        start += len(part) + 1
    return pieces


def _parse_operand(token: str) -> Optional[Operand]:
    m = _REGISTER.match(token)
    if m:
        return Operand.reg(int(m.group(1)))
    m = _INDIRECT.match(token)
    if m:
        return Operand.ind(int(m.group(1)))
    if _HEX.match(token):
        return Operand.imm(int(gmp.mpz(token[2:], 16)))
    if _DECIMAL.match(token):
        return Operand.imm(int(gmp.mpz(token, 10)))
    return None


def _is_label_name(token: str) -> bool:
    return bool(_IDENT.match(token)) and not _REGISTER.match(token)


def parse(text: str) -> Program:
    """
    Parse assembly source into a Program

    Labels are resolved to instruction indices; a reference to an undefined
    label is left unresolved (target None) for validate_program to report.

    Args:
        text: .asr source, LF or CRLF line endings

    Returns:
        Program

    Raises:
        AssemblyError: with one Diagnostic per problem found
    """
    diagnostics: List[Diagnostic] = []
    instructions: List[Tuple[Opcode, Tuple[Operand, ...], Optional[str], int]] = []
    labels: Dict[str, int] = {}
    profile: Optional[Profile] = None
    name: Optional[str] = None
    aln_hint: Optional[int] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).rstrip()
        if not line.strip():
            continue

        stripped = line.lstrip()
        indent = len(line) - len(stripped)
        if stripped.startswith("."):
            fields = stripped.split()
            directive, args = fields[0].lower(), fields[1:]
            col = indent + 1
            if len(args) != 1:
                diagnostics.append(Diagnostic(lineno, col, f"{directive} takes exactly one argument"))
            elif directive == ".profile":
                if profile is not None:
                    diagnostics.append(Diagnostic(lineno, col, "duplicate .profile directive"))
                try:
                    profile = Profile(args[0].upper())
                except ValueError:
                    diagnostics.append(Diagnostic(lineno, col, f"unknown profile '{args[0]}'"))
            elif directive == ".name":
                name = args[0]
            elif directive == ".alns":
                if _DECIMAL.match(args[0]):
                    aln_hint = int(args[0])
                else:
                    diagnostics.append(Diagnostic(lineno, col, f"malformed ALN count '{args[0]}'"))
            else:
                diagnostics.append(Diagnostic(lineno, col, f"unknown directive '{fields[0]}'"))
            continue

        pos = 0
        m = _LABEL_DEF.match(line)
        if m:
            label = m.group(1)
            if _REGISTER.match(label):
                diagnostics.append(Diagnostic(lineno, m.start(1) + 1, f"label '{label}' looks like a register"))
            elif label in labels:
                diagnostics.append(Diagnostic(lineno, m.start(1) + 1, f"duplicate label '{label}'"))
            else:
                labels[label] = len(instructions)
            pos = m.end()

        if not line[pos:].strip():
            continue

        m = _MNEMONIC.match(line, pos)
        if not m or (m.end() < len(line) and not line[m.end()].isspace()):
            diagnostics.append(Diagnostic(lineno, pos + len(line[pos:]) - len(line[pos:].lstrip()) + 1,
                                          "syntax error: expected a mnemonic"))
            continue
        opcode = Opcode.from_mnemonic(m.group(1))
        if opcode is None:
            diagnostics.append(Diagnostic(lineno, m.start(1) + 1, f"unknown mnemonic '{m.group(1)}'"))
            continue

        operands: List[Operand] = []
        target_name: Optional[str] = None
        tokens = _split_operands(line[m.end():], m.end() + 1)
        ok = True
        for i, (token, col) in enumerate(tokens):
            if not token:
                diagnostics.append(Diagnostic(lineno, col, "syntax error: empty operand"))
                ok = False
                continue
            if opcode in JUMPS and i == len(tokens) - 1 and _is_label_name(token):
                target_name = token
                continue
            operand = _parse_operand(token)
            if operand is None:
                diagnostics.append(Diagnostic(lineno, col, f"malformed operand '{token}'"))
                ok = False
                continue
            operands.append(operand)
        if ok:
            instructions.append((opcode, tuple(operands), target_name, lineno))

    if profile is None:
        diagnostics.insert(0, Diagnostic(1, 1, "missing mandatory .profile directive"))
    if diagnostics:
        raise AssemblyError(diagnostics)

    resolved = tuple(
        Instruction(opcode, operands, labels.get(target_name) if target_name else None, target_name)
        for opcode, operands, target_name, _ in instructions
    )
    return Program(resolved, profile, labels=labels, name=name, aln_hint=aln_hint)


def _label_names(program: Program) -> Tuple[Dict[int, List[str]], Dict[int, str]]:
    """Names to emit before each index, and the name each jump target prints as"""
    by_index: Dict[int, List[str]] = {}
    for label, index in program.labels.items():
        by_index.setdefault(index, []).append(label)
    for names in by_index.values():
        names.sort()

    taken = set(program.labels)
    target_name: Dict[int, str] = {}
    for ins in program.instructions:
        if ins.opcode not in JUMPS or ins.target is None or ins.target in target_name:
            continue
        if ins.label and program.labels.get(ins.label) == ins.target:
            target_name[ins.target] = ins.label
        elif ins.target in by_index:
            target_name[ins.target] = by_index[ins.target][0]
        else:
            synthetic = f"L{ins.target}"
            while synthetic in taken:
                synthetic += "_"
            taken.add(synthetic)
            by_index[ins.target] = [synthetic]
            target_name[ins.target] = synthetic
    return by_index, target_name


def print_program(program: Program, header: bool = True) -> str:
    """
    Canonical text of a program

    One instruction per line, labels on their own line, lowercase registers,
    comments dropped, LF line endings.

    Args:
        program: Program to print
        header: Emit the .profile/.name/.alns directives

    Returns:
        Assembly source ('' for an empty program without header)
    """
    by_index, target_name = _label_names(program)
    lines: List[str] = []
    if header:
        lines.append(f".profile {program.profile.value}")
        if program.name:
            lines.append(f".name {program.name}")
        if program.aln_hint is not None:
            lines.append(f".alns {program.aln_hint}")

    for index, ins in enumerate(program.instructions):
        for label in by_index.get(index, []):
            lines.append(f"{label}:")
        parts = [str(o) for o in ins.operands]
        if ins.opcode in JUMPS:
            jump_label = target_name.get(ins.target) if ins.target is not None else ins.label
            parts.append(jump_label or "?")
        text = ins.opcode.value
        if parts:
            text += " " + ", ".join(parts)
        lines.append("    " + text)
    for label in by_index.get(len(program.instructions), []):
        lines.append(f"{label}:")

    return "\n".join(lines) + "\n" if lines else ""


def load_program(path, profile: Optional[Profile] = None) -> Program:
    """
    Read, parse and validate a .asr file

    Args:
        path: File to load
        profile: Profile override; replaces the file's .profile when given

    Raises:
        AssemblyError: on syntax problems
        ValidationError: when the program violates the profile
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    program = parse(text)
    if program.name is None:
        program = Program(program.instructions, program.profile, labels=program.labels,
                          name=path.stem, aln_hint=program.aln_hint)
    report = validate_program(program, profile)
    if not report.valid:
        raise ValidationError(report)
    if profile is not None:
        program = replace(program, profile=profile)
    if program.aln_hint is not None and program.aln_hint != program.aln_sites():
        logger.warning("%s: .alns says %d but the program has %d ALN site(s)",
                       path.name, program.aln_hint, program.aln_sites())
    logger.info("loaded %s: %d instructions under %s", path.name, len(program), report.profile.value)
    return program


def save_program(program: Program, path) -> Path:
    """Write the canonical text of a program"""
    path = Path(path)
    path.write_text(print_program(program), encoding="utf-8", newline="\n")
    return path
