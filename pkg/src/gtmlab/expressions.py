"""Safe arithmetic expressions for number-theoretic run parameters.

Run parameters like the kick spacing are often irrational combinations
(pi divided by the golden mean, half of another parameter), so plain
numeric flags lose precision and intent.  This evaluator accepts a tiny
arithmetic language instead of calling eval: the four binary operations
and unary sign over numeric literals, the constants pi, gm (the golden
mean), sqrt2, sqrt3, and references to previously evaluated keys.
Anything else is rejected with the offending key and position.
"""

from __future__ import annotations

import ast
import math

__all__ = ["CONSTANTS", "ExpressionError", "evaluate_expression", "evaluate_parameters"]

GOLDEN_MEAN = (1.0 + math.sqrt(5.0)) / 2.0

CONSTANTS = {
    "pi": math.pi,
    "gm": GOLDEN_MEAN,
    "sqrt2": math.sqrt(2.0),
    "sqrt3": math.sqrt(3.0),
}


class ExpressionError(ValueError):
    """Raised when a parameter expression cannot be evaluated."""


_BINARY = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
}


def _fail(key: str, position: int, reason: str) -> ExpressionError:
    return ExpressionError(f"key '{key}', position {position}: {reason}")


def _eval_node(node: ast.expr, key: str, env: dict) -> float:
    if isinstance(node, ast.Constant):
        if isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        raise _fail(key, node.col_offset, f"literal {node.value!r} is not a number")
    if isinstance(node, ast.Name):
        if node.id in env:
            return float(env[node.id])
        known = ", ".join(sorted(env))
        raise _fail(key, node.col_offset,
                    f"unknown name '{node.id}' (known: {known})")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        value = _eval_node(node.operand, key, env)
        return value if isinstance(node.op, ast.UAdd) else -value
    if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
        left = _eval_node(node.left, key, env)
        right = _eval_node(node.right, key, env)
        if isinstance(node.op, ast.Div) and right == 0.0:
            raise _fail(key, node.col_offset, "division by zero")
        return _BINARY[type(node.op)](left, right)
    label = type(node.op).__name__ if isinstance(node, (ast.BinOp, ast.UnaryOp)) \
        else type(node).__name__
    raise _fail(key, node.col_offset,
                f"'{label}' is not allowed (use + - * /, numbers, and names)")


def evaluate_expression(text: str, key: str, env: dict | None = None) -> float:
    """Evaluate one expression; ``env`` maps referencable names to values."""
    scope = dict(CONSTANTS)
    scope.update(env or {})
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        position = (exc.offset or 1) - 1
        raise _fail(key, position, f"syntax error in {text!r}") from None
    value = _eval_node(tree.body, key, scope)
    if not math.isfinite(value):
        raise _fail(key, 0, f"expression {text!r} is not finite")
    return value


def evaluate_parameters(pairs: dict) -> dict:
    """Evaluate a parameter map in declared order.

    String values are expressions; numeric values pass through.  Each
    evaluated key becomes referencable by the keys after it.  Keys must
    not shadow the built-in constants.
    """
    out: dict = {}
    env: dict = {}
    for key, raw in pairs.items():
        if key in CONSTANTS:
            raise ExpressionError(
                f"key '{key}' collides with a built-in constant")
        if isinstance(raw, str):
            value = evaluate_expression(raw, key, env)
        elif isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ExpressionError(
                f"key '{key}': value {raw!r} is neither a number nor an expression")
        else:
            value = float(raw)
            if not math.isfinite(value):
                raise ExpressionError(f"key '{key}': value {raw!r} is not finite")
        out[key] = value
        env[key] = value
    return out
