"""
ASRAM Linear Form Module
Formal expressions a0 + sum(a_i * w_i) over symbolic ALN exponents, where each
w_i dominates everything built from lower-indexed symbols
"""

from dataclasses import dataclass
from enum import Enum
from functools import total_ordering
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import gmpy2 as gmp


class Ordering(Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@total_ordering
@dataclass(frozen=True)
class LinearForm:
    """
    Normalized linear form: (index, coefficient) pairs sorted by index,
    zero coefficients dropped. Index 0 is the constant term.
    """

    terms: Tuple[Tuple[int, int], ...] = ()

    @classmethod
    def of(cls, coeffs: Optional[Mapping[int, int]] = None) -> "LinearForm":
        coeffs = coeffs or {}
        for index, coeff in coeffs.items():
            if index < 0 or coeff < 0:
                raise ValueError(f"indices and coefficients are nonnegative, got {index}: {coeff}")
        return cls(tuple(sorted((int(i), int(c)) for i, c in coeffs.items() if c)))

    @classmethod
    def constant(cls, value: int) -> "LinearForm":
        return cls.of({0: value})

    @classmethod
    def omega(cls, index: int, coeff: int = 1) -> "LinearForm":
        if index < 1:
            raise ValueError("symbol indices start at 1")
        return cls.of({index: coeff})

    def coeff(self, index: int) -> int:
        return self.as_dict().get(index, 0)

    def as_dict(self) -> Dict[int, int]:
        return dict(self.terms)

    @property
    def max_index(self) -> int:
        return self.terms[-1][0] if self.terms else 0

    def __add__(self, other: "LinearForm") -> "LinearForm":
        return lf_add(self, other)

    def __lt__(self, other: "LinearForm") -> bool:
        return lf_compare(self, other) is Ordering.LESS

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for index, coeff in reversed(self.terms):
            if index == 0:
                parts.append(str(coeff))
            else:
                parts.append(f"w{index}" if coeff == 1 else f"{coeff}*w{index}")
        return " + ".join(parts)


def lf_add(p: LinearForm, q: LinearForm) -> LinearForm:
    """Coefficient-wise sum"""
    total = p.as_dict()
    for index, coeff in q.terms:
        total[index] = total.get(index, 0) + coeff
    return LinearForm.of(total)


def lf_scale(p: LinearForm, k: int) -> LinearForm:
    """Multiply every coefficient by a nonnegative constant"""
    if k < 0:
        raise ValueError("scale factor must be nonnegative")
    return LinearForm.of({i: c * k for i, c in p.terms})


def lf_compare(p: LinearForm, q: LinearForm) -> Ordering:
    """
    Lexicographic comparison from the highest occurring index downwards

    The first unequal coefficient decides; valid as a comparison of values
    whenever every w_i is large enough relative to the lower-indexed ones.
    """
    a, b = p.as_dict(), q.as_dict()
    for index in sorted(set(a) | set(b), reverse=True):
        x, y = a.get(index, 0), b.get(index, 0)
        if x != y:
            return Ordering.LESS if x < y else Ordering.GREATER
    return Ordering.EQUAL


def lf_instantiate(p: LinearForm, witnesses: Sequence) -> gmp.mpz:
    """
    Evaluate a form with concrete values for w_1..w_k

    Args:
        p: Form to evaluate
        witnesses: witnesses[i-1] is the value of w_i

    Raises:
        ValueError: if a symbol used by p has no witness
    """
    if p.max_index > len(witnesses):
        raise ValueError(f"missing witness for w{p.max_index}")
    total = gmp.mpz(0)
    for index, coeff in p.terms:
        total += coeff if index == 0 else coeff * gmp.mpz(witnesses[index - 1])
    return total


def power_witnesses(count: int, base_bits: int = 64, growth: int = 9) -> List[gmp.mpz]:
    """w_i = 2**(base_bits * growth**i) for i = 1..count"""
    return [gmp.mpz(1) << (base_bits * growth ** i) for i in range(1, count + 1)]


def dominating_witnesses(count: int, coeff_bound: int) -> List[gmp.mpz]:
    """Smallest power-of-two witnesses passing witnesses_dominate for coeff_bound"""
    witnesses: List[gmp.mpz] = []
    lower_sum = gmp.mpz(1)
    for _ in range(count):
        w = gmp.mpz(1) << int(gmp.bit_length(max(coeff_bound - 1, 1) * lower_sum))
        witnesses.append(w)
        lower_sum += w
    return witnesses


def witnesses_dominate(witnesses: Sequence, coeff_bound: int) -> bool:
    """
    True when every w_i exceeds any form over lower symbols whose
    coefficients are below coeff_bound, i.e. w_i > (B-1) * (1 + sum_{j<i} w_j)
    """
    lower_sum = gmp.mpz(1)
    for w in witnesses:
        w = gmp.mpz(w)
        bound = gmp.mpz(coeff_bound - 1)
        # bit lengths settle almost every case without a big multiplication
        if gmp.bit_length(w) <= gmp.bit_length(bound) + gmp.bit_length(lower_sum) + 1:
            if w <= bound * lower_sum:
                return False
        lower_sum += w
    return True


