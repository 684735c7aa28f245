"""Arithmetic expression parser: oracle equivalence and edge cases."""

from fractions import Fraction

import pytest

from vireo.expr import ExprError, parse_expression


def test_precedence():
    assert parse_expression("2+3×4") == 14
    assert parse_expression("2+3*4") == 14
    assert parse_expression("2-3-4") == -5  # left associative
    assert parse_expression("12÷4÷3") == 1
    assert parse_expression("2+3×4-6÷2") == 11


def test_exact_fractions():
    assert parse_expression("1÷3") == Fraction(1, 3)
    assert parse_expression("1÷3×3") == 1
    assert parse_expression("7÷2") == Fraction(7, 2)


def test_whitespace_and_parens():
    assert parse_expression(" 1 + 2 ") == 3
    assert parse_expression("(1+2)×3") == 9
    assert parse_expression("8") == 8


@pytest.mark.parametrize(
    "bad",
    ["", "+", "1+", "×3", "1++2", "1 2", "abc", "3÷0", "1÷(2-2)", "(", "1)",
     "-3+5"],
)
def test_malformed(bad):
    with pytest.raises(ExprError):
        parse_expression(bad)


# --- independent oracle ------------------------------------------------------
#
# Build random expression trees, evaluate them bottom-up with Fractions, and
# render them to text; the parser must recover the same value.  The tree
# evaluator never looks at operator precedence, so agreement on flat (un-
# parenthesized) renderings exercises the parser's precedence handling.


def _random_flat_expr(rng):
    """A parenthesis-free expression and its value via stepwise evaluation."""
    n_ops = rng.integers(1, 5)
    tokens = [int(rng.integers(0, 13))]
    for _ in range(n_ops):
        tokens.append(rng.choice(["+", "-", "×", "÷"]))
        tokens.append(int(rng.integers(1, 13)))  # nonzero: avoid 3÷0
    # oracle: two explicit passes, multiplicative first, then additive
    values = [Fraction(tokens[0])]
    ops = []
    for i in range(1, len(tokens), 2):
        op, operand = tokens[i], Fraction(tokens[i + 1])
        if op == "×":
            values[-1] = values[-1] * operand
        elif op == "÷":
            values[-1] = values[-1] / operand
        else:
            ops.append(op)
            values.append(operand)
    total = values[0]
    for op, operand in zip(ops, values[1:]):
        total = total + operand if op == "+" else total - operand
    return "".join(str(t) for t in tokens), total


def test_parser_matches_brute_force_oracle():
    import numpy as np

    rng = np.random.default_rng(20260815)
    for _ in range(1000):
        text, expected = _random_flat_expr(rng)
        assert parse_expression(text) == expected, text
