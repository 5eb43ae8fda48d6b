"""작은 산술식 파서/평가기/기호 미분기

문법 (EBNF)::

    expr    = term , { ("+" | "-") , term } ;
    term    = unary , { ("*" | "/") , unary } ;
    unary   = "-" , unary | power ;
    power   = primary , [ "^" , unary ] ;          (* 우결합 *)
    primary = number | "u" | "v" | "pi"
            | func , "(" , expr , ")"
            | "(" , expr , ")" ;
    func    = "sin" | "cos" | "tan" | "exp" | "log" | "sqrt" | "abs" | "sign" ;
    number  = digits , [ "." , [ digits ] ] , [ exponent ]
            | "." , digits , [ exponent ] ;

변수 u, v는 평면 좌표 χ1, χ2에 대응한다. sign은 abs의 도함수를 표현하기 위해
추가된 함수다 (sign(0) = 0).
"""
import logging
import math
import re
from dataclasses import dataclass
from functools import lru_cache

from errors import ExprEvaluationError, ParseError

logger = logging.getLogger("schwarzga.expr")

VARIABLES = ("u", "v")
CONSTANTS = {"pi": math.pi}
FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "sign")

_TOKEN_RE = re.compile(
    r"(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)

_PRIMARY_EXPECTED = ("number", "u", "v", "pi", "function", "(", "-")


class Expr:
    """수식 트리 노드의 기반 클래스"""

    def eval(self, u, v):
        return evaluate(self, u, v)

    def __str__(self):
        return to_source(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float

    def _key(self):
        return (self.value, math.copysign(1.0, self.value))

    def __eq__(self, other):
        return isinstance(other, Num) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())



@dataclass(frozen=True)
class Const(Expr):
    name: str


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


# 토큰화 / 파싱
def _byte_offset(src, index):
    return len(src[:index].encode("utf-8"))


def _tokenize(src):
    tokens = []
    index = 0
    while index < len(src):
        if src[index].isspace():
            index += 1
            continue
        match = _TOKEN_RE.match(src, index)
        if match is None:
            raise ParseError(f"알 수 없는 문자 {src[index]!r}", _byte_offset(src, index), _PRIMARY_EXPECTED)
        kind = match.lastgroup
        tokens.append((kind, match.group(kind), _byte_offset(src, index)))
        index = match.end()
    tokens.append(("end", "", _byte_offset(src, len(src))))
    return tokens


class _Parser:
    """재귀 하강 파서"""

    def __init__(self, src):
        self.tokens = _tokenize(src)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def at_op(self, *ops):
        kind, text, _ = self.peek()
        return kind == "op" and text in ops

    def expect_op(self, op):
        kind, text, offset = self.peek()
        if kind != "op" or text != op:
            raise ParseError(f"'{op}'이(가) 필요합니다 (발견: {text or '입력 끝'!r})", offset, (op,))
        self.take()

    def parse(self):
        tree = self.expr()
        kind, text, offset = self.peek()
        if kind != "end":
            raise ParseError(
                f"예상치 못한 토큰 {text!r}", offset, ("+", "-", "*", "/", "^", "end of input")
            )
        return tree

    def expr(self):
        node = self.term()
        while self.at_op("+", "-"):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.at_op("*", "/"):
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.at_op("-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.primary()
        if self.at_op("^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def primary(self):
        kind, text, offset = self.take()
        if kind == "number":
            value = float(text)
            if not math.isfinite(value):
                raise ParseError(f"숫자가 너무 큽니다: {text}", offset, ("number",))
            return Num(value)
        if kind == "name":
            if text in VARIABLES:
                return Var(text)
            if text in CONSTANTS:
                return Const(text)
            if text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            raise ParseError(f"알 수 없는 이름 {text!r}", offset, _PRIMARY_EXPECTED)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        found = text or "입력 끝"
        raise ParseError(f"피연산자가 필요합니다 (발견: {found!r})", offset, _PRIMARY_EXPECTED)


def parse(src):
    """문자열을 수식 트리로 파싱

    Args:
        src (str): 수식 문자열 (예: "u^2+v^2")

    Returns:
        Expr: 수식 트리

    Raises:
        ParseError: 구문 오류 (바이트 위치와 기대 토큰 포함)
    """
    return _Parser(src).parse()


# 평가
def _fail(message, node):
    raise ExprEvaluationError(message, to_source(node))


def _checked(value, node):
    if not math.isfinite(value):
        _fail("결과가 유한하지 않습니다", node)
    return value


def _power(base, exponent, node):
    if base < 0 and not float(exponent).is_integer():
        _fail("음수의 비정수 거듭제곱", node)
    if base == 0 and exponent < 0:
        _fail("0의 음수 거듭제곱", node)
    try:
        return _checked(math.pow(base, exponent), node)
    except OverflowError:
        _fail("거듭제곱 오버플로", node)


def _apply(func, x, node):
    if func == "log" and x <= 0:
        _fail("양수가 아닌 값의 로그", node)
    if func == "sqrt" and x < 0:
        _fail("음수의 제곱근", node)
    try:
        if func == "sin":
            return math.sin(x)
        if func == "cos":
            return math.cos(x)
        if func == "tan":
            return _checked(math.tan(x), node)
        if func == "exp":
            return _checked(math.exp(x), node)
        if func == "log":
            return math.log(x)
        if func == "sqrt":
            return math.sqrt(x)
        if func == "abs":
            return abs(x)
        return float((x > 0) - (x < 0))
    except OverflowError:
        _fail("오버플로", node)


@lru_cache(maxsize=256)
def compile_expr(node):
    """수식 트리를 (u, v) -> float 호출 가능 객체로 변환

    Args:
        node (Expr): 수식 트리

    Returns:
        callable: 평가 함수
    """
    if isinstance(node, Num):
        value = node.value
        return lambda u, v: value
    if isinstance(node, Const):
        value = CONSTANTS[node.name]
        return lambda u, v: value
    if isinstance(node, Var):
        if node.name == "u":
            return lambda u, v: u
        return lambda u, v: v
    if isinstance(node, Neg):
        inner = compile_expr(node.operand)
        return lambda u, v: -inner(u, v)
    if isinstance(node, Call):
        inner = compile_expr(node.arg)
        func = node.func
        return lambda u, v: _apply(func, inner(u, v), node)
    if isinstance(node, BinOp):
        left = compile_expr(node.left)
        right = compile_expr(node.right)
        if node.op == "+":
            return lambda u, v: _checked(left(u, v) + right(u, v), node)
        if node.op == "-":
            return lambda u, v: _checked(left(u, v) - right(u, v), node)
        if node.op == "*":
            return lambda u, v: _checked(left(u, v) * right(u, v), node)
        if node.op == "/":

            def divide(u, v):
                denominator = right(u, v)
                if denominator == 0:
                    _fail("0으로 나누기", node)
                return _checked(left(u, v) / denominator, node)

            return divide
        return lambda u, v: _power(left(u, v), right(u, v), node)
    raise TypeError(f"수식 노드가 아닙니다: {node!r}")


def evaluate(node, u, v):
    """수식을 (u, v)에서 평가

    Args:
        node (Expr): 수식 트리
        u (float): χ1
        v (float): χ2

    Returns:
        float: 값

    Raises:
        ExprEvaluationError: 정의역 오류 (부분식 포함)
    """
    return compile_expr(node)(float(u), float(v))


# 출력
_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _precedence(node):
    if isinstance(node, BinOp):
        return _PRECEDENCE[node.op]
    if isinstance(node, Neg) or (isinstance(node, Num) and math.copysign(1.0, node.value) < 0):
        return 3
    return 5


def _format_number(value):
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value)) if value != 0 or math.copysign(1.0, value) > 0 else "-0"
    return repr(value)


def to_source(node):
    """수식 트리를 다시 파싱 가능한 문자열로 출력 (트리 구조 보존)"""
    if isinstance(node, Num):
        return _format_number(node.value)
    if isinstance(node, (Const, Var)):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    if isinstance(node, Neg):
        inner = to_source(node.operand)
        return f"-({inner})" if _precedence(node.operand) < 3 else f"-{inner}"

    prec = _PRECEDENCE[node.op]
    left = to_source(node.left)
    right = to_source(node.right)
    if node.op == "^":
        if _precedence(node.left) <= 4:
            left = f"({left})"
        if _precedence(node.right) < 3:
            right = f"({right})"
        return f"{left}^{right}"
    if _precedence(node.left) < prec:
        left = f"({left})"
    if _precedence(node.right) <= prec:
        right = f"({right})"
    if node.op in "+-":
        return f"{left} {node.op} {right}"
    return f"{left}{node.op}{right}"


# 기호 미분
ZERO = Num(0.0)
ONE = Num(1.0)


def _is_num(node, value=None):
    return isinstance(node, Num) and (value is None or node.value == value)


def _fold(op, left, right):
    try:
        value = evaluate(BinOp(op, left, right), 0.0, 0.0)
    except ExprEvaluationError:
        return None
    return Num(value)


def _add(a, b):
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if _is_num(a) and _is_num(b):
        return _fold("+", a, b) or BinOp("+", a, b)
    return BinOp("+", a, b)


def _sub(a, b):
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return _neg(b)
    if _is_num(a) and _is_num(b):
        return _fold("-", a, b) or BinOp("-", a, b)
    return BinOp("-", a, b)


def _mul(a, b):
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return ZERO
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if _is_num(a) and _is_num(b):
        return _fold("*", a, b) or BinOp("*", a, b)
    return BinOp("*", a, b)


def _div(a, b):
    if _is_num(a, 0.0):
        return ZERO
    if _is_num(b, 1.0):
        return a
    return BinOp("/", a, b)


def _pow(a, b):
    if _is_num(b, 1.0):
        return a
    if _is_num(b, 0.0):
        return ONE
    return BinOp("^", a, b)


def _neg(a):
    if _is_num(a):
        return Num(-a.value) if a.value != 0 else ZERO
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def _depends_on_variables(node):
    if isinstance(node, Var):
        return True
    if isinstance(node, (Num, Const)):
        return False
    if isinstance(node, Neg):
        return _depends_on_variables(node.operand)
    if isinstance(node, Call):
        return _depends_on_variables(node.arg)
    return _depends_on_variables(node.left) or _depends_on_variables(node.right)


def derivative(node, var):
    """구조적 미분 ∂node/∂var

    Args:
        node (Expr): 수식 트리
        var (str): "u" 또는 "v"

    Returns:
        Expr: 도함수 트리 (간단한 상수 접기 적용)
    """
    if isinstance(node, (Num, Const)):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.name == var else ZERO
    if isinstance(node, Neg):
        return _neg(derivative(node.operand, var))
    if isinstance(node, Call):
        arg = node.arg
        inner = derivative(arg, var)
        if _is_num(inner, 0.0):
            return ZERO
        if node.func == "sin":
            outer = Call("cos", arg)
        elif node.func == "cos":
            outer = _neg(Call("sin", arg))
        elif node.func == "tan":
            outer = _add(ONE, _pow(Call("tan", arg), Num(2.0)))
        elif node.func == "exp":
            outer = node
        elif node.func == "log":
            return _div(inner, arg)
        elif node.func == "sqrt":
            return _div(inner, _mul(Num(2.0), node))
        elif node.func == "abs":
            # 0에서는 열미분 0
            outer = Call("sign", arg)
        else:
            return ZERO
        return _mul(outer, inner)

    left, right = node.left, node.right
    d_left = derivative(left, var)
    d_right = derivative(right, var)
    if node.op == "+":
        return _add(d_left, d_right)
    if node.op == "-":
        return _sub(d_left, d_right)
    if node.op == "*":
        return _add(_mul(d_left, right), _mul(left, d_right))
    if node.op == "/":
        return _div(_sub(_mul(d_left, right), _mul(left, d_right)), _pow(right, Num(2.0)))
    # 거듭제곱
    if not _depends_on_variables(right):
        exponent_minus_one = _sub(right, ONE)
        return _mul(_mul(right, _pow(left, exponent_minus_one)), d_left)
    log_term = _mul(d_right, Call("log", left))
    ratio_term = _div(_mul(right, d_left), left)
    return _mul(node, _add(log_term, ratio_term))


def gradient(node):
    """기호 그래디언트 (∂u, ∂v)"""
    return derivative(node, "u"), derivative(node, "v")
