"""openQASM 2 front end: parse a practical subset and lower to U3 + CNOT.

The parser accepts the statements that benchmark exports actually use:
the version header, include, qreg/creg, barrier, end-of-circuit measure,
and a fixed gate subset (u1/u2/u3/u/p, x, y, z, h, s, sdg, t, tdg, rx, ry,
rz, cx, cz, cp, swap).  Multiple quantum registers are concatenated into one
flat wire space in declaration order.  Anything outside the subset raises
:class:`QasmError` with a 1-based line/column span instead of crashing.

Mid-circuit measurement and classical conditionals are rejected: measured
results never feed back into user circuits here, and the protocol-internal
conditionals produced by the distributing compiler live at the event level,
not in QASM.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .gates import SUPPORTED_GATES, Gate


@dataclass(frozen=True)
class SourceSpan:
    """1-based position of a token in the source text."""

    line: int
    column: int

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}"


class QasmError(Exception):
    """Structured parse/validation diagnostic."""

    def __init__(self, message: str, span: SourceSpan | None = None):
        self.span = span
        prefix = f"{span}: " if span is not None else ""
        super().__init__(prefix + message)
        self.message = message


@dataclass(frozen=True)
class Circuit:
    """Flat-register circuit IR: gates in program order over n_qubits wires."""

    n_qubits: int
    ops: tuple[Gate, ...]
    name: str = "circuit"

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        for g in self.ops:
            for q in g.qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"gate '{g.kind}' wire {q} outside {self.n_qubits}-qubit register")


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_SYMBOLS = {";", ",", "(", ")", "[", "]", "+", "-", "*", "/", "{", "}", "=", "<", ">"}


@dataclass(frozen=True)
class _Token:
    kind: str  # id | number | string | symbol | arrow | eof
    text: str
    span: SourceSpan


def _lex(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        span = SourceSpan(line, col)
        if text.startswith("->", i):
            tokens.append(_Token("arrow", "->", span))
            i += 2
            col += 2
            continue
        if ch == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise QasmError("unterminated string literal", span)
            tokens.append(_Token("string", text[i + 1 : j], span))
            col += j + 1 - i
            i = j + 1
            continue
        if ch in _SYMBOLS:
            tokens.append(_Token("symbol", ch, span))
            i += 1
            col += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            seen_e = False
            while j < n:
                c = text[j]
                if c.isdigit() or c == ".":
                    j += 1
                elif c in "eE" and not seen_e:
                    seen_e = True
                    j += 1
                    if j < n and text[j] in "+-":
                        j += 1
                else:
                    break
            tokens.append(_Token("number", text[i:j], span))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("id", text[i:j], span))
            col += j - i
            i = j
            continue
        raise QasmError(f"unexpected character {ch!r}", span)
    tokens.append(_Token("eof", "", SourceSpan(line, col)))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


@dataclass
class _Register:
    name: str
    size: int
    offset: int


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.qregs: dict[str, _Register] = {}
        self.cregs: dict[str, _Register] = {}
        self.n_qubits = 0
        self.ops: list[Gate] = []

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            raise QasmError(f"expected {want!r}, found {tok.text or 'end of input'!r}", tok.span)
        return self.advance()

    # -- expressions for gate parameters ------------------------------------

    def parse_expr(self) -> float:
        value = self.parse_term()
        while self.peek().kind == "symbol" and self.peek().text in "+-":
            op = self.advance().text
            rhs = self.parse_term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def parse_term(self) -> float:
        value = self.parse_factor()
        while self.peek().kind == "symbol" and self.peek().text in "*/":
            op = self.advance().text
            rhs = self.parse_factor()
            if op == "*":
                value *= rhs
            else:
                if rhs == 0.0:
                    raise QasmError("division by zero in gate parameter", self.peek().span)
                value /= rhs
        return value

    def parse_factor(self) -> float:
        tok = self.peek()
        if tok.kind == "symbol" and tok.text == "-":
            self.advance()
            return -self.parse_factor()
        if tok.kind == "symbol" and tok.text == "+":
            self.advance()
            return self.parse_factor()
        if tok.kind == "symbol" and tok.text == "(":
            self.advance()
            value = self.parse_expr()
            self.expect("symbol", ")")
            return value
        if tok.kind == "number":
            self.advance()
            try:
                return float(tok.text)
            except ValueError:
                raise QasmError(f"bad numeric literal {tok.text!r}", tok.span) from None
        if tok.kind == "id" and tok.text == "pi":
            self.advance()
            return math.pi
        raise QasmError(f"expected a numeric parameter, found {tok.text or 'end of input'!r}", tok.span)

    # -- operands ------------------------------------------------------------

    def parse_operand(self, regs: dict[str, _Register], what: str) -> tuple[_Register, int | None]:
        tok = self.expect("id")
        reg = regs.get(tok.text)
        if reg is None:
            raise QasmError(f"unknown {what} register {tok.text!r}", tok.span)
        if self.peek().kind == "symbol" and self.peek().text == "[":
            self.advance()
            idx_tok = self.expect("number")
            try:
                idx = int(idx_tok.text)
            except ValueError:
                raise QasmError(f"bad index {idx_tok.text!r}", idx_tok.span) from None
            self.expect("symbol", "]")
            if not 0 <= idx < reg.size:
                raise QasmError(
                    f"index {idx} out of range for {what} register "
                    f"{reg.name!r} of size {reg.size}",
                    idx_tok.span,
                )
            return reg, idx
        return reg, None

    # -- statements ----------------------------------------------------------

    def parse_program(self) -> None:
        tok = self.peek()
        if tok.kind == "id" and tok.text == "OPENQASM":
            self.advance()
            version = self.expect("number")
            if not version.text.startswith("2"):
                raise QasmError(f"unsupported openQASM version {version.text}", version.span)
            self.expect("symbol", ";")
        while self.peek().kind != "eof":
            self.parse_statement()

    def parse_statement(self) -> None:
        tok = self.peek()
        if tok.kind != "id":
            raise QasmError(f"expected a statement, found {tok.text!r}", tok.span)
        word = tok.text
        if word == "include":
            self.advance()
            self.expect("string")
            self.expect("symbol", ";")
        elif word in ("qreg", "creg"):
            self.parse_register(word)
        elif word == "barrier":
            self.parse_barrier()
        elif word == "measure":
            self.parse_measure()
        elif word == "if":
            raise QasmError("classical conditionals ('if') are not supported", tok.span)
        elif word in ("gate", "opaque", "reset"):
            raise QasmError(f"'{word}' statements are not supported", tok.span)
        elif word == "OPENQASM":
            raise QasmError("version header must be the first statement", tok.span)
        else:
            self.parse_gate_call()

    def parse_register(self, which: str) -> None:
        self.advance()
        name_tok = self.expect("id")
        name = name_tok.text
        if name in self.qregs or name in self.cregs:
            raise QasmError(f"register {name!r} already defined", name_tok.span)
        self.expect("symbol", "[")
        size_tok = self.expect("number")
        try:
            size = int(size_tok.text)
        except ValueError:
            raise QasmError(f"bad register size {size_tok.text!r}", size_tok.span) from None
        if size < 1:
            raise QasmError(f"register size must be positive, got {size}", size_tok.span)
        self.expect("symbol", "]")
        self.expect("symbol", ";")
        if which == "qreg":
            self.qregs[name] = _Register(name, size, self.n_qubits)
            self.n_qubits += size
        else:
            self.cregs[name] = _Register(name, size, 0)

    def parse_barrier(self) -> None:
        self.advance()
        # Operands are parsed for validity but the marker carries no wires.
        while True:
            self.parse_operand(self.qregs, "quantum")
            if self.peek().kind == "symbol" and self.peek().text == ",":
                self.advance()
                continue
            break
        self.expect("symbol", ";")
        self.ops.append(Gate("barrier", ()))

    def parse_measure(self) -> None:
        span = self.peek().span
        self.advance()
        qreg, qidx = self.parse_operand(self.qregs, "quantum")
        self.expect("arrow")
        creg, cidx = self.parse_operand(self.cregs, "classical")
        self.expect("symbol", ";")
        if qidx is None and cidx is None:
            if qreg.size != creg.size:
                raise QasmError(
                    f"cannot broadcast measure: {qreg.name!r} has {qreg.size} qubits, "
                    f"{creg.name!r} has {creg.size} bits",
                    span,
                )
            for k in range(qreg.size):
                self.ops.append(Gate("measure", (qreg.offset + k,)))
        elif qidx is not None and cidx is not None:
            self.ops.append(Gate("measure", (qreg.offset + qidx,)))
        else:
            raise QasmError("measure operands must be both indexed or both registers", span)

    def parse_gate_call(self) -> None:
        name_tok = self.advance()
        name = name_tok.text
        if name not in SUPPORTED_GATES:
            raise QasmError(f"unsupported gate {name!r}", name_tok.span)
        want_qubits, want_params = SUPPORTED_GATES[name]
        params: list[float] = []
        if self.peek().kind == "symbol" and self.peek().text == "(":
            self.advance()
            if not (self.peek().kind == "symbol" and self.peek().text == ")"):
                params.append(self.parse_expr())
                while self.peek().kind == "symbol" and self.peek().text == ",":
                    self.advance()
                    params.append(self.parse_expr())
            self.expect("symbol", ")")
        if len(params) != want_params:
            raise QasmError(
                f"gate {name!r} expects {want_params} parameter(s), got {len(params)}",
                name_tok.span,
            )
        operands: list[tuple[_Register, int | None]] = [self.parse_operand(self.qregs, "quantum")]
        while self.peek().kind == "symbol" and self.peek().text == ",":
            self.advance()
            operands.append(self.parse_operand(self.qregs, "quantum"))
        self.expect("symbol", ";")
        if len(operands) != want_qubits:
            raise QasmError(
                f"gate {name!r} expects {want_qubits} operand(s), got {len(operands)}",
                name_tok.span,
            )
        if want_qubits == 1:
            reg, idx = operands[0]
            targets = [reg.offset + idx] if idx is not None else [reg.offset + k for k in range(reg.size)]
            for q in targets:
                self.ops.append(Gate(name, (q,), tuple(params)))
        else:
            wires = []
            for reg, idx in operands:
                if idx is None:
                    raise QasmError(
                        f"two-qubit gate {name!r} needs indexed operands, got register {reg.name!r}",
                        name_tok.span,
                    )
                wires.append(reg.offset + idx)
            if wires[0] == wires[1]:
                raise QasmError(f"gate {name!r} operands must be distinct wires", name_tok.span)
            self.ops.append(Gate(name, tuple(wires), tuple(params)))


def parse_qasm(text: str, name: str = "circuit") -> Circuit:
    """Parse openQASM 2 source into a :class:`Circuit`.

    Raises :class:`QasmError` with a source span on any syntax problem,
    unsupported construct, register clash, or out-of-range index.
    """
    parser = _Parser(_lex(text))
    parser.parse_program()
    if parser.n_qubits == 0:
        raise QasmError("no quantum register declared")
    seen_measure = False
    for g in parser.ops:
        if g.kind == "measure":
            seen_measure = True
        elif seen_measure and g.kind != "barrier":
            raise QasmError(
                "mid-circuit measurement is not supported; measures must come last"
            )
    return Circuit(parser.n_qubits, tuple(parser.ops), name=name)


# ---------------------------------------------------------------------------
# Lowering to the U3 + CNOT basis
# ---------------------------------------------------------------------------

_PI = math.pi

# Fixed 1q gates as (theta, phi, lambda); phases beyond global are exact.
_U3_TABLE: dict[str, tuple[float, float, float]] = {
    "x": (_PI, 0.0, _PI),
    "y": (_PI, _PI / 2.0, _PI / 2.0),
    "z": (0.0, 0.0, _PI),
    "h": (_PI / 2.0, 0.0, _PI),
    "s": (0.0, 0.0, _PI / 2.0),
    "sdg": (0.0, 0.0, -_PI / 2.0),
    "t": (0.0, 0.0, _PI / 4.0),
    "tdg": (0.0, 0.0, -_PI / 4.0),
}


def _lower_gate(g: Gate) -> list[Gate]:
    kind, q, p = g.kind, g.qubits, g.params
    if kind in ("u3", "cx", "measure", "barrier"):
        return [g]
    if kind == "u":
        return [Gate("u3", q, p)]
    if kind == "u2":
        return [Gate("u3", q, (_PI / 2.0, p[0], p[1]))]
    if kind in ("u1", "p"):
        return [Gate("u3", q, (0.0, 0.0, p[0]))]
    if kind in _U3_TABLE:
        return [Gate("u3", q, _U3_TABLE[kind])]
    if kind == "rx":
        return [Gate("u3", q, (p[0], -_PI / 2.0, _PI / 2.0))]
    if kind == "ry":
        return [Gate("u3", q, (p[0], 0.0, 0.0))]
    if kind == "rz":
        # Equal to the diagonal rotation up to a global phase.
        return [Gate("u3", q, (0.0, 0.0, p[0]))]
    if kind == "cz":
        h = (_PI / 2.0, 0.0, _PI)
        return [Gate("u3", (q[1],), h), Gate("cx", q), Gate("u3", (q[1],), h)]
    if kind == "cp":
        half = p[0] / 2.0
        return [
            Gate("u3", (q[0],), (0.0, 0.0, half)),
            Gate("cx", q),
            Gate("u3", (q[1],), (0.0, 0.0, -half)),
            Gate("cx", q),
            Gate("u3", (q[1],), (0.0, 0.0, half)),
        ]
    if kind == "swap":
        a, b = q
        return [Gate("cx", (a, b)), Gate("cx", (b, a)), Gate("cx", (a, b))]
    raise ValueError(f"no lowering for gate kind '{kind}'")


def lower_to_basis(circuit: Circuit) -> Circuit:
    """Rewrite every gate into {u3, cx}; measure/barrier pass through.

    Unitary-equivalent to the input up to global phase, and idempotent.
    """
    ops: list[Gate] = []
    for g in circuit.ops:
        ops.extend(_lower_gate(g))
    return Circuit(circuit.n_qubits, tuple(ops), name=circuit.name)
