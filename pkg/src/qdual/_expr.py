"""Restricted arithmetic evaluator for coefficient strings such as ``1/sqrt(2)``."""
import ast
import cmath
import math
import operator

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCS = {
    "sqrt": lambda z: cmath.sqrt(z) if isinstance(z, complex) or z < 0 else math.sqrt(z),
    "exp": cmath.exp,
    "cos": math.cos,
    "sin": math.sin,
    "abs": abs,
}
_CONSTS = {"pi": math.pi, "i": 1j, "j": 1j, "e": math.e}


def evaluate(text: str, variables=None) -> complex:
    """Evaluate an arithmetic expression; names are limited to a fixed whitelist."""
    names = dict(_CONSTS)
    if variables:
        names.update(variables)

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
            return node.value
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](walk(node.operand))
        if isinstance(node, ast.Name) and node.id in names:
            return names[node.id]
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
        ):
            return _FUNCS[node.func.id](walk(node.args[0]))
        raise ValueError(f"unsupported expression element: {ast.dump(node)}")

    return walk(ast.parse(text.strip(), mode="eval"))
