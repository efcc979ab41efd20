"""Tiny expression language for exponent and weight fields.

Fields are strings such as ``"2 + 0.3*x"`` or ``"clamp(1 - y, 0, 0.5)"``.
Allowed: numeric literals, the coordinates ``x`` and ``y``, ``+ - * /``,
unary minus, ``min``, ``max`` and ``clamp``.  Anything else is rejected at
parse time, so extremal values can be found reliably by grid scans.
"""

from __future__ import annotations

import ast

import numpy as np

from .errors import MalformedFieldError

_FUNCS = {"min": (2, None), "max": (2, None), "clamp": (3, 3)}


def _check(node: ast.AST, name: str, dim: int) -> None:
    if isinstance(node, ast.Expression):
        _check(node.body, name, dim)
    elif isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise MalformedFieldError(name, f"unsupported literal {node.value!r}")
    elif isinstance(node, ast.Name):
        allowed = ("x",) if dim == 1 else ("x", "y")
        if node.id not in allowed:
            raise MalformedFieldError(name, f"unknown variable {node.id!r}")
    elif isinstance(node, ast.BinOp):
        if not isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
            raise MalformedFieldError(name, f"operator {type(node.op).__name__} not allowed")
        _check(node.left, name, dim)
        _check(node.right, name, dim)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.USub, ast.UAdd)):
            raise MalformedFieldError(name, f"operator {type(node.op).__name__} not allowed")
        _check(node.operand, name, dim)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS or node.keywords:
            raise MalformedFieldError(name, "only min, max and clamp calls are allowed")
        lo, hi = _FUNCS[node.func.id]
        n = len(node.args)
        if n < lo or (hi is not None and n > hi):
            raise MalformedFieldError(name, f"{node.func.id} takes the wrong number of arguments")
        for arg in node.args:
            _check(arg, name, dim)
    else:
        raise MalformedFieldError(name, f"syntax {type(node).__name__} not allowed")


def _eval(node: ast.AST, env: dict):
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        return env[node.id]
    if isinstance(node, ast.UnaryOp):
        v = _eval(node.operand, env)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        left, right = _eval(node.left, env), _eval(node.right, env)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if np.any(np.asarray(right) == 0):
            raise ZeroDivisionError("division by zero")
        return left / right
    args = [_eval(a, env) for a in node.args]
    fname = node.func.id
    if fname == "min":
        out = args[0]
        for a in args[1:]:
            out = np.minimum(out, a)
        return out
    if fname == "max":
        out = args[0]
        for a in args[1:]:
            out = np.maximum(out, a)
        return out
    v, lo, hi = args
    return np.minimum(np.maximum(v, lo), hi)


class ScalarField:
    """A field over the unit interval (dim 1) or unit square (dim 2).

    >>> ScalarField("2 + 0.3*x", "p").evaluate([0.0, 1.0])
    array([2. , 2.3])
    """

    def __init__(self, expression: str | float, name: str = "field", dim: int = 1):
        self.name = name
        self.dim = dim
        self.expression = str(expression)
        try:
            tree = ast.parse(self.expression.strip(), mode="eval")
        except SyntaxError as exc:
            raise MalformedFieldError(name, f"cannot parse {self.expression!r}: {exc.msg}") from None
        _check(tree, name, dim)
        self._tree = tree.body

    def __repr__(self):
        return f"ScalarField({self.expression!r}, name={self.name!r})"

    def evaluate(self, points) -> np.ndarray:
        """Evaluate at points of shape (n,) in 1D or (n, 2) in 2D."""
        pts = np.asarray(points, dtype=float)
        if self.dim == 1:
            if pts.ndim == 2:
                pts = pts[:, 0]
            env = {"x": pts}
            shape = pts.shape
        else:
            pts = np.atleast_2d(pts)
            env = {"x": pts[:, 0], "y": pts[:, 1]}
            shape = pts.shape[:1]
        try:
            with np.errstate(divide="raise", invalid="raise", over="raise", under="ignore"):
                val = _eval(self._tree, env)
        except (ZeroDivisionError, FloatingPointError) as exc:
            raise MalformedFieldError(self.name, f"evaluation failed: {exc}") from None
        val = np.broadcast_to(np.asarray(val, dtype=float), shape).copy()
        if not np.all(np.isfinite(val)):
            raise MalformedFieldError(self.name, "non-finite value on the domain")
        return val

    def is_constant(self) -> bool:
        return not any(isinstance(n, ast.Name) for n in ast.walk(self._tree))


class DerivedField(ScalarField):
    """Field computed from other fields by a Python callable."""

    def __init__(self, func, name: str, dim: int = 1):
        self.name = name
        self.dim = dim
        self.expression = f"<derived {name}>"
        self._func = func

    def evaluate(self, points) -> np.ndarray:
        return np.asarray(self._func(np.asarray(points, dtype=float)), dtype=float)

    def is_constant(self) -> bool:
        return False
