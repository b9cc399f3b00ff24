import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core.assembler import load_program, parse, print_program, save_program
from src.core.errors import AssemblyError, ValidationError
from src.core.isa import Instruction, Opcode, Operand, OperandKind, Profile, Program
from src.core.programs import gen_general_tower, gen_tower


def test_minimal_program():
    program = parse(".profile ARITH\nHALT")
    assert len(program) == 1
    assert program[0].opcode is Opcode.HALT
    assert program.profile is Profile.ARITH


def test_labels_resolve_to_indices():
    program = parse(".profile ARITH\n"
                    "loop: ADD r1, r1, 1\n"
                    "JEQ r1, r2, done\n"
                    "JMP loop\n"
                    "done: HALT\n")
    assert len(program) == 4
    assert program.labels == {'loop': 0, 'done': 3}
    assert program[1].target == 3
    assert program[2].target == 0


def test_aln_operand():
    program = parse(".profile ARITH\nALN r3")
    assert program[0] == Instruction(Opcode.ALN, (Operand.reg(3),))
    assert program.aln_sites() == 1


def test_operand_forms_and_case():
    program = parse(".profile FULL\n  mov r1, @r2\n  Add r3, r1, 0x10\n  set r4, 123456789012345678901234567890")
    assert program[0].operands[1].kind is OperandKind.IND
    assert program[1].operands[2] == Operand.imm(16)
    assert program[2].operands[1].value == 123456789012345678901234567890


def test_comments_crlf_and_directives():
    program = parse("; header\r\n.profile SHIFT_BOOL\r\n.name demo\r\n.alns 2\r\n  AND r0, r0, 1 ; low bit\r\n  HALT\r\n")
    assert program.name == "demo"
    assert program.aln_hint == 2
    assert len(program) == 2


def test_missing_profile_is_reported_at_line_one():
    with pytest.raises(AssemblyError) as err:
        parse("HALT\n")
    assert (err.value.diagnostics[0].line, err.value.diagnostics[0].column) == (1, 1)


def test_every_problem_is_collected_with_positions():
    source = ".profile ARITH\n  FOO r1\n  ADD r1, , r2\n  MOV r1, q9\nx: HALT\nx: HALT\n"
    with pytest.raises(AssemblyError) as err:
        parse(source)
    found = [(d.line, d.column) for d in err.value.diagnostics]
    assert found == [(2, 3), (3, 11), (4, 11), (6, 1)]
    assert "unknown mnemonic 'FOO'" in err.value.diagnostics[0].message
    assert "duplicate label" in err.value.diagnostics[3].message


def test_register_like_label_is_rejected():
    with pytest.raises(AssemblyError):
        parse(".profile ARITH\nr1: HALT\n")


def test_undefined_label_reaches_validation():
    program = parse(".profile ARITH\nJMP nowhere\n")
    assert program[0].target is None
    assert program[0].label == "nowhere"


def test_print_emits_labels_on_their_own_line():
    program = parse(".profile ARITH\nstart: SET r0, 1\nJMP start\n")
    assert print_program(program) == ".profile ARITH\nstart:\n    SET r0, 1\n    JMP start\n"


def test_print_invents_labels_for_bare_targets():
    program = Program((Instruction(Opcode.JMP, target=1), Instruction(Opcode.HALT)), Profile.ARITH)
    text = print_program(program, header=False)
    assert text == "    JMP L1\nL1:\n    HALT\n"
    assert parse(".profile ARITH\n" + text) == program


def test_empty_program_prints_empty_text():
    assert print_program(Program((), Profile.ARITH), header=False) == ""


def test_print_then_parse_is_identity_on_generated_programs():
    for program in [gen_tower(1), gen_tower(3), gen_general_tower(5), gen_general_tower(6)]:
        again = parse(print_program(program))
        assert again == program
        assert again.name == program.name


def test_print_is_canonical():
    messy = parse(".profile ARITH\n   add   R1 ,r2,  3   ; comment\n  top :  jmp top\n")
    text = print_program(messy)
    assert print_program(parse(text)) == text


registers = st.integers(min_value=0, max_value=64).map(Operand.reg)
immediates = st.integers(min_value=0, max_value=2 ** 200).map(Operand.imm)
binary = st.builds(lambda op, d, a, b: Instruction(op, (d, a, b)),
                   st.sampled_from([Opcode.ADD, Opcode.SUB, Opcode.MUL, Opcode.DIV, Opcode.MOD]),
                   registers, registers | immediates, registers | immediates)


@settings(max_examples=50)
@given(st.lists(binary, max_size=20))
def test_straight_line_programs_survive_printing(body):
    program = Program(tuple(body) + (Instruction(Opcode.HALT),), Profile.ARITH)
    assert parse(print_program(program)) == program


def test_load_program_validates_and_names(corpus):
    program = load_program(corpus / "tower_x1.asr")
    assert program == gen_tower(1)
    assert load_program(corpus / "constant.asr").name == "constant"
    with pytest.raises(ValidationError) as err:
        load_program(corpus / "bad_profile.asr")
    assert err.value.report.indices() == [0]


def test_load_program_profile_override(corpus):
    program = load_program(corpus / "bad_profile.asr", Profile.ARITH)
    assert program.profile is Profile.ARITH


def test_save_program(tmp_path):
    path = save_program(gen_tower(2), tmp_path / "t.asr")
    assert load_program(path) == gen_tower(2)


def test_aln_hint_mismatch_is_logged(tmp_path, caplog):
    path = tmp_path / "hint.asr"
    path.write_text(".profile ARITH\n.alns 3\nALN r1\nHALT\n")
    assert load_program(path).aln_hint == 3
    assert ".alns says 3" in caplog.text
