"""Independent reference computations used to freeze expected values.

Nothing here imports the code paths under test beyond plain data types.
"""

from fractions import Fraction
from itertools import product


def naive_cycle_stats(components):
    """Brute-force enumeration over k**4 slot assignments in plain Fractions.

    ``components`` is a list of ``((pos, n1, n2, n3), weight)`` tuples.
    Returns (violation probability, expected CH, total probability mass).
    """
    viol = Fraction(0)
    expect = Fraction(0)
    mass = Fraction(0)
    for slots in product(components, repeat=4):
        weight = Fraction(1)
        for _, w in slots:
            weight *= w
        ch = slots[0][0][0] - slots[1][0][1] - slots[2][0][2] - slots[3][0][3]
        mass += weight
        expect += weight * ch
        if ch > 0:
            viol += weight
    return viol, expect, mass


def three_state_closed_form():
    # ab slot holds the high state and some other slot is not high, or
    # ab holds the mid state and some other slot holds the low state.
    half, quarter = Fraction(1, 2), Fraction(1, 4)
    return half * (1 - half**3) + quarter * (1 - (1 - quarter) ** 3)


def coupon_cycle_length():
    """Expected blocks per cycle when filling 4 slots from uniform settings."""
    return sum(Fraction(4, 4 - filled) for filled in range(4))


# The 12-trial reference table: rows a, a', b, b' over trials 1..12.
REFERENCE_TABLE_ROWS = {
    "a": "+++++++++000",
    "a'": "+++00++++000",
    "b": "+++++++++000",
    "b'": "000++++++000",
}


def reference_table_columns():
    rows = REFERENCE_TABLE_ROWS
    return ["".join(rows[r][i] for r in ("a", "a'", "b", "b'")) for i in range(12)]


def count_pair(columns, alice_row, bob_row, pair):
    """Count trials whose (alice, bob) symbols equal ``pair`` for the chosen rows."""
    idx = {"a": 0, "a'": 1, "b": 2, "b'": 3}
    return sum(1 for col in columns if col[idx[alice_row]] + col[idx[bob_row]] == pair)
