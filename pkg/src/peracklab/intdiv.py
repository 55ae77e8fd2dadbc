"""Integer division with carried remainders.

``div`` mirrors C's ``div()``: quotient and remainder in one record, so the
caller can feed the remainder back into the next numerator and never lose
sub-unit residue.

``divu`` is the unsigned two-direction variant. It keeps a pair of
complementary remainders, ``rem[0]`` for moving up and ``rem[1]`` for moving
down, with ``rem[0] + rem[1] == denom`` after every call. One carry can then
absorb both additive increases and multiplicative decreases without signed
arithmetic.
"""

from typing import NamedTuple, Tuple

WORD_BITS = 64
WORD_MAX = (1 << WORD_BITS) - 1


class CarryDiv(NamedTuple):
    quot: int = 0
    rem: int = 0


class DualCarry(NamedTuple):
    quot: int = 0
    rem: Tuple[int, int] = (0, 0)
    # denominator of the producing call; 0 for a fresh carry
    denom: int = 0


INC = 0
DEC = 1


def _check(num: int, denom: int) -> None:
    if denom <= 0:
        raise ZeroDivisionError(f"denominator must be positive, got {denom}")
    if num < 0:
        raise ValueError(f"numerator must be non-negative, got {num}")
    if num > WORD_MAX or denom > WORD_MAX:
        raise OverflowError(f"operand exceeds {WORD_BITS}-bit word: {num}/{denom}")


def div(num: int, denom: int) -> CarryDiv:
    _check(num, denom)
    q, r = divmod(num, denom)
    return CarryDiv(q, r)


def divu(num: int, denom: int, flip: int) -> DualCarry:
    """Divide, writing the remainder into ``rem[flip]`` and its complement
    ``denom - rem[flip]`` into the other slot.

    The complement is allowed to equal ``denom`` (when the remainder is 0);
    it is deliberately not wrapped to 0.
    """
    _check(num, denom)
    if flip not in (0, 1):
        raise ValueError(f"flip must be 0 or 1, got {flip!r}")
    q, r = divmod(num, denom)
    if flip:
        return DualCarry(q, (denom - r, r), denom)
    return DualCarry(q, (r, denom - r), denom)
