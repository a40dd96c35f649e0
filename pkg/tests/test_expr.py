import math

import numpy as np
import pytest

from multitime.expr import (
    BinOp,
    DomainError,
    ExpressionSyntaxError,
    Num,
    UnboundVariableError,
    UnknownFunctionError,
    Var,
    evaluate,
    free_variables,
    parse_expression,
    to_string,
)
from multitime.numdiff import (
    central_difference,
    default_step,
    partial_derivative,
    richardson_difference,
)


class TestParsing:
    def test_kinetic_term(self):
        e = parse_expression("p1_1^2/(2*1.0)")
        assert free_variables(e) == {"p1_1"}
        assert evaluate(e, {"p1_1": 3.0}) == 4.5

    def test_sine_of_difference(self):
        e = parse_expression("sin(x1_1 - x2_1)")
        assert free_variables(e) == {"x1_1", "x2_1"}

    def test_syntax_error_column(self):
        with pytest.raises(ExpressionSyntaxError) as exc:
            parse_expression("x1_1 + * 3")
        assert exc.value.column == 8

    def test_unknown_function(self):
        with pytest.raises(UnknownFunctionError):
            parse_expression("sinh(x)")

    def test_empty_source(self):
        with pytest.raises(ExpressionSyntaxError):
            parse_expression("   ")

    def test_trailing_garbage(self):
        with pytest.raises(ExpressionSyntaxError):
            parse_expression("1 + 2)")

    def test_power_right_associative(self):
        e = parse_expression("2^3^2")
        assert isinstance(e, BinOp) and e.op == "^"
        assert isinstance(e.left, Num)
        assert evaluate(e, {}) == 512.0

    def test_precedence(self):
        assert evaluate(parse_expression("1 + 2 * 3^2"), {}) == 19.0
        assert evaluate(parse_expression("-2^2"), {}) == -4.0

    @pytest.mark.parametrize("source", [
        "p1_1^2/(2*1.0)",
        "sin(x1_1 - x2_1)",
        "2^3^2",
        "(2^3)^2",
        "a - (b + c)",
        "a - b - c",
        "-(x + y)^2",
        "x - -y",
        "exp(-(x1_1 - x2_1)^2) * tanh(t1)",
        "1/(1 + x^2) + sqrt(abs(x))",
    ])
    def test_round_trip_structural(self, source):
        tree = parse_expression(source)
        assert parse_expression(to_string(tree)) == tree


class TestEvaluation:
    def test_identity_case(self):
        assert evaluate(parse_expression("exp(0)*cos(0)"), {}) == 1.0

    def test_unbound_variable(self):
        with pytest.raises(UnboundVariableError):
            evaluate(parse_expression("x + 1"), {})

    def test_extra_bindings_allowed(self):
        assert evaluate(parse_expression("x"), {"x": 2.0, "y": 7.0}) == 2.0

    @pytest.mark.parametrize("source,bindings", [
        ("log(x)", {"x": -1.0}),
        ("log(x)", {"x": 0.0}),
        ("sqrt(x)", {"x": -4.0}),
        ("1/x", {"x": 0.0}),
    ])
    def test_domain_errors(self, source, bindings):
        with pytest.raises(DomainError):
            evaluate(parse_expression(source), bindings)

    def test_deterministic(self):
        e = parse_expression("sin(x)*exp(cos(x)) + x^3/7")
        b = {"x": 0.12345}
        assert evaluate(e, b) == evaluate(e, b)


class TestDerivatives:
    def test_quadratic_exact(self):
        e = parse_expression("x^2")
        assert partial_derivative(e, "x", {"x": 3.0}, h=1e-4) == pytest.approx(
            6.0, abs=1e-7)

    def test_sine_against_cosine_oracle(self):
        e = parse_expression("sin(x)")
        for x in (0.0, 0.4, -1.1):
            got = partial_derivative(e, "x", {"x": x}, h=1e-5)
            assert got == pytest.approx(math.cos(x), abs=1e-8)

    def test_constant_exact_zero(self):
        e = parse_expression("t*0 + 5")
        assert partial_derivative(e, "t", {"t": 2.0}) == 0.0

    def test_low_degree_polynomials_exact(self):
        # central differences are exact on degree <= 2 up to rounding
        rng = np.random.default_rng(7)
        for _ in range(20):
            a, b, c = rng.uniform(-2, 2, 3)
            x = float(rng.uniform(-3, 3))
            e = parse_expression(f"({a})*x^2 + ({b})*x + ({c})")
            got = partial_derivative(e, "x", {"x": x})
            want = 2 * a * x + b
            assert abs(got - want) < 1e-9 * max(1.0, abs(want))

    def test_default_step(self):
        assert default_step(0.0) == 1e-4
        assert default_step(100.0) == 1e-2

    def test_step_must_be_positive(self):
        with pytest.raises(ValueError):
            partial_derivative(parse_expression("x"), "x", {"x": 1.0}, h=-1.0)

    def test_richardson_second_order_convergence(self):
        # |central - richardson| tracks the h^2 truncation term, so it
        # should drop ~16x (assert >= 10x) when h drops 4x
        rng = np.random.default_rng(42)
        for _ in range(100):
            a = float(rng.uniform(0.5, 1.5))
            b = float(rng.uniform(0.3, 1.0))
            x = float(rng.uniform(-1.0, 1.0))
            f = lambda u: math.sin(a * u) + b * u**3
            h = 1e-2
            gap_coarse = abs(central_difference(f, x, h)
                             - richardson_difference(f, x, h))
            gap_fine = abs(central_difference(f, x, h / 4)
                           - richardson_difference(f, x, h / 4))
            if gap_coarse < 1e-10:
                continue  # third derivative vanished at this point
            assert gap_coarse / gap_fine >= 10.0
