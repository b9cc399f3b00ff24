import random

import gmpy2 as gmp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core.errors import MachineFault
from src.core.isa import (
    FaultCode, Instruction, Opcode, Operand, Profile, Program, bool_op, exact_div,
    int_div, lshift, mod, monus, to_value, validate_program,
)

values = st.integers(min_value=0, max_value=2 ** 256)
positive = st.integers(min_value=1, max_value=2 ** 128)


def ins(opcode, *operands, target=None, label=None):
    return Instruction(opcode, tuple(operands), target, label)


R = Operand.reg
IMM = Operand.imm


class TestValueOps:
    def test_monus_examples(self):
        assert monus(5, 3) == 2
        assert monus(3, 5) == 0
        assert monus(0, 0) == 0

    def test_int_div_examples(self):
        assert int_div(7, 2) == 3
        assert int_div(6, 3) == 2
        assert int_div(0, 5) == 0

    def test_int_div_by_zero_faults(self):
        with pytest.raises(MachineFault) as fault:
            int_div(7, 0)
        assert fault.value.code is FaultCode.DIV_BY_ZERO

    def test_exact_div_examples(self):
        assert exact_div(48, 6) == 8
        assert exact_div(0, 3) == 0
        with pytest.raises(MachineFault) as fault:
            exact_div(7, 2)
        assert fault.value.code is FaultCode.EXACT_DIV_REMAINDER

    def test_exact_div_by_zero_is_a_remainder_fault(self):
        with pytest.raises(MachineFault) as fault:
            exact_div(0, 0)
        assert fault.value.code is FaultCode.EXACT_DIV_REMAINDER

    def test_mod_examples(self):
        assert mod(4096, 62) == 4
        assert mod(10, 5) == 0
        assert mod(3, 7) == 3
        with pytest.raises(MachineFault) as fault:
            mod(3, 0)
        assert fault.value.code is FaultCode.DIV_BY_ZERO

    def test_lshift_examples(self):
        assert lshift(3, 4) == 48
        assert lshift(1, 0) == 1
        assert lshift(0, 100) == 0

    def test_lshift_respects_ceiling(self):
        assert lshift(1, 63, max_bits=64) == 2 ** 63
        with pytest.raises(MachineFault) as fault:
            lshift(1, 64, max_bits=64)
        assert fault.value.code is FaultCode.MEMORY_CEILING

    def test_bool_op_examples(self):
        assert bool_op(Opcode.AND, 12, 10) == 8
        assert bool_op(Opcode.OR, 12, 10) == 14
        assert bool_op("XOR", 12, 12) == 0
        with pytest.raises(ValueError):
            bool_op(Opcode.ADD, 1, 1)

    def test_values_are_nonnegative(self):
        assert to_value(5) == 5
        with pytest.raises(ValueError):
            to_value(-1)

    @settings(max_examples=200)
    @given(values, values)
    def test_monus_clamps(self, a, b):
        assert monus(a, b) == max(a - b, 0)

    @settings(max_examples=200)
    @given(values, values)
    def test_xor_is_self_inverse(self, a, b):
        assert bool_op(Opcode.XOR, bool_op(Opcode.XOR, a, b), b) == a

    def test_euclidean_identity_on_random_pairs(self):
        rng = random.Random(1)
        for _ in range(1000):
            a = rng.getrandbits(rng.randint(1, 300))
            b = rng.getrandbits(rng.randint(1, 200)) + 1
            assert a == b * int_div(a, b) + mod(a, b)
            assert 0 <= mod(a, b) < b

    def test_exact_division_faults_on_every_non_divisible_pair(self):
        rng = random.Random(2)
        checked = 0
        while checked < 500:
            a = rng.getrandbits(rng.randint(1, 200))
            b = rng.getrandbits(rng.randint(1, 64)) + 1
            if a % b == 0:
                assert exact_div(a, b) * b == a
                continue
            with pytest.raises(MachineFault):
                exact_div(a, b)
            checked += 1

    @settings(max_examples=100)
    @given(positive, st.integers(min_value=0, max_value=4096))
    def test_lshift_is_multiplication_by_power_of_two(self, a, b):
        assert lshift(a, b) == a * 2 ** b


class TestValidation:
    def test_mul_under_shift_bool_is_rejected_at_its_index(self):
        program = Program((ins(Opcode.SET, R(1), IMM(3)),
                           ins(Opcode.MUL, R(0), R(1), R(1)),
                           ins(Opcode.HALT)), Profile.SHIFT_BOOL)
        report = validate_program(program)
        assert not report.valid
        assert report.indices() == [1]
        assert "MUL" in report.violations[0].message

    def test_profile_override(self):
        program = Program((ins(Opcode.MUL, R(0), R(0), R(0)),), Profile.SHIFT_BOOL)
        assert validate_program(program, Profile.ARITH).valid
        assert validate_program(program, Profile.ARITH).profile is Profile.ARITH

    def test_empty_program_is_valid(self):
        assert validate_program(Program((), Profile.ARITH)).valid

    def test_undefined_jump_target(self):
        program = Program((ins(Opcode.JMP, label="nowhere"),), Profile.ARITH)
        report = validate_program(program)
        assert report.indices() == [0]
        assert "nowhere" in report.violations[0].message

    def test_jump_target_out_of_range(self):
        program = Program((ins(Opcode.JMP, target=5),), Profile.ARITH)
        assert not validate_program(program).valid
        # jumping to one past the end halts and is allowed
        assert validate_program(Program((ins(Opcode.JMP, target=1),), Profile.ARITH)).valid

    def test_operand_shapes(self):
        bad = Program((ins(Opcode.SET, R(0), R(1)),
                       ins(Opcode.ADD, IMM(1), R(1), R(2)),
                       ins(Opcode.ALN, IMM(3)),
                       ins(Opcode.HALT, R(0))), Profile.FULL)
        assert validate_program(bad).indices() == [0, 1, 2, 3]

    def test_every_profile_keeps_control_flow_and_aln(self):
        for profile in Profile:
            for opcode in (Opcode.SET, Opcode.MOV, Opcode.LDI, Opcode.STI,
                           Opcode.JMP, Opcode.JEQ, Opcode.ALN, Opcode.HALT):
                assert profile.allows(opcode)

    def test_profiles(self):
        assert Profile.ARITH.allows(Opcode.DIV)
        assert not Profile.ARITH.allows(Opcode.SHL)
        assert Profile.SHIFT_BOOL.allows(Opcode.XOR)
        assert not Profile.SHIFT_BOOL.allows(Opcode.SUB)
        assert Profile.DIV_SHIFT_BOOL.allows(Opcode.EXD)
        assert Profile.FULL.allowed == frozenset(Opcode)

    def test_operand_printing_has_no_digit_limit(self):
        huge = gmp.mpz(7) ** 6000
        assert str(IMM(int(huge))) == str(huge)
        assert str(Operand.ind(4)) == "@r4"
