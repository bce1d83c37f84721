"""OpenQASM 2.0 front end.

Only the subset the emulator executes is accepted: one ``qreg``/``creg`` pair,
the standard ``U``/``CX`` gates, the native trapped-ion rotations
(``r, rx, ry, rz, rxx, rzz``), ``measure``, ``barrier`` and ``reset``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence

__all__ = [
    "Circuit",
    "Instruction",
    "QasmError",
    "QasmSyntaxError",
    "UNITARY_KINDS",
    "emit_qasm",
    "parse_qasm",
]

# kind -> (number of qubits, number of angle parameters)
_ARITY = {
    "U": (1, 3),
    "CX": (2, 0),
    "R": (1, 2),
    "RX": (1, 1),
    "RY": (1, 1),
    "RZ": (1, 1),
    "RXX": (2, 1),
    "RZZ": (2, 1),
    "MEASURE": (1, 0),
    "RESET": (1, 0),
    "BARRIER": (None, 0),
}

UNITARY_KINDS = frozenset({"U", "CX", "R", "RX", "RY", "RZ", "RXX", "RZZ"})

_GATE_NAMES = {
    "u": "U",
    "U": "U",
    "u3": "U",
    "cx": "CX",
    "CX": "CX",
    "r": "R",
    "rx": "RX",
    "ry": "RY",
    "rz": "RZ",
    "rxx": "RXX",
    "rzz": "RZZ",
}

_EMIT_NAMES = {
    "U": "u",
    "CX": "cx",
    "R": "r",
    "RX": "rx",
    "RY": "ry",
    "RZ": "rz",
    "RXX": "rxx",
    "RZZ": "rzz",
}


class QasmError(ValueError):
    """Raised for semantically invalid programs (bad register use, arity, ...)."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class QasmSyntaxError(QasmError):
    pass


@dataclass(frozen=True)
class Instruction:
    kind: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    clbits: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in _ARITY:
            raise QasmError(f"unknown instruction kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        object.__setattr__(self, "clbits", tuple(int(c) for c in self.clbits))
        n_q, n_p = _ARITY[self.kind]
        if n_q is not None and len(self.qubits) != n_q:
            raise QasmError(f"{self.kind} acts on {n_q} qubit(s), got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise QasmError(f"{self.kind} qubit operands must be distinct: {self.qubits}")
        if len(self.params) != n_p:
            raise QasmError(f"{self.kind} takes {n_p} parameter(s), got {len(self.params)}")
        if self.kind == "MEASURE":
            if len(self.clbits) != 1:
                raise QasmError("MEASURE writes exactly one classical bit")
        elif self.clbits:
            raise QasmError(f"{self.kind} does not write classical bits")

    @property
    def is_unitary(self) -> bool:
        return self.kind in UNITARY_KINDS


@dataclass
class Circuit:
    """Ordered instruction list over ``n_qubits`` qubits and ``n_clbits`` bits.

    Qubit ``k`` is bit ``k`` of a basis-state index (little endian).  The
    builder methods return ``self`` so calls can be chained.
    """

    n_qubits: int
    n_clbits: int = 0
    instructions: list[Instruction] = field(default_factory=list)

    def __post_init__(self):
        if self.n_qubits < 0 or self.n_clbits < 0:
            raise QasmError("register sizes must be non-negative")
        instructions, self.instructions = self.instructions, []
        for instr in instructions:
            self.append(instr)

    def append(self, instr: Instruction) -> "Circuit":
        for q in instr.qubits:
            if not 0 <= q < self.n_qubits:
                raise QasmError(f"qubit index {q} out of range for register of size {self.n_qubits}")
        for c in instr.clbits:
            if not 0 <= c < self.n_clbits:
                raise QasmError(f"clbit index {c} out of range for register of size {self.n_clbits}")
        self.instructions.append(instr)
        return self

    def extend(self, instructions) -> "Circuit":
        for instr in instructions:
            self.append(instr)
        return self

    def __len__(self):
        return len(self.instructions)

    def __iter__(self) -> Iterator[Instruction]:
        return iter(self.instructions)

    def copy(self) -> "Circuit":
        return Circuit(self.n_qubits, self.n_clbits, list(self.instructions))

    # builder helpers
    def u(self, theta, phi, lam, q):
        return self.append(Instruction("U", (q,), (theta, phi, lam)))

    def h(self, q):
        return self.u(math.pi / 2, 0.0, math.pi, q)

    def x(self, q):
        return self.u(math.pi, 0.0, math.pi, q)

    def cx(self, control, target):
        return self.append(Instruction("CX", (control, target)))

    def r(self, theta, phi, q):
        return self.append(Instruction("R", (q,), (theta, phi)))

    def rx(self, theta, q):
        return self.append(Instruction("RX", (q,), (theta,)))

    def ry(self, theta, q):
        return self.append(Instruction("RY", (q,), (theta,)))

    def rz(self, theta, q):
        return self.append(Instruction("RZ", (q,), (theta,)))

    def rxx(self, theta, q0, q1):
        return self.append(Instruction("RXX", (q0, q1), (theta,)))

    def rzz(self, theta, q0, q1):
        return self.append(Instruction("RZZ", (q0, q1), (theta,)))

    def measure(self, q, c):
        return self.append(Instruction("MEASURE", (q,), clbits=(c,)))

    def measure_all(self):
        if self.n_clbits < self.n_qubits:
            raise QasmError("not enough classical bits to measure every qubit")
        for q in range(self.n_qubits):
            self.measure(q, q)
        return self

    def barrier(self, *qubits):
        return self.append(Instruction("BARRIER", qubits or tuple(range(self.n_qubits))))

    def reset(self, q):
        return self.append(Instruction("RESET", (q,)))

    def without_measurements(self) -> "Circuit":
        kept = [i for i in self.instructions if i.kind not in ("MEASURE", "BARRIER")]
        return Circuit(self.n_qubits, self.n_clbits, kept)


# ---------------------------------------------------------------- lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<newline>\n)
  | (?P<comment>//[^\n]*)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<string>"[^"\n]*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<arrow>->)
  | (?P<sym>[\[\](){};,+\-*/^])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QasmSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(_Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------- parser


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.qreg: tuple[str, int] | None = None
        self.creg: tuple[str, int] | None = None
        self.instructions: list[Instruction] = []

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def error(self, message, tok=None, cls=QasmSyntaxError):
        tok = tok or self.tok
        return cls(message, tok.line, tok.column)

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        if self.tok.text != text:
            shown = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {shown!r}")
        return self.advance()

    def expect_kind(self, kind: str) -> _Token:
        if self.tok.kind != kind:
            shown = self.tok.text or "end of input"
            raise self.error(f"expected {kind}, found {shown!r}")
        return self.advance()

    def parse(self) -> Circuit:
        head = self.tok
        if head.text != "OPENQASM":
            raise self.error("program must start with 'OPENQASM 2.0;'")
        self.advance()
        version = self.expect_kind("number")
        if version.text not in ("2.0", "2"):
            raise self.error(f"unsupported OpenQASM version {version.text}", version)
        self.expect(";")
        while self.tok.kind != "eof":
            self.statement()
        n_q = self.qreg[1] if self.qreg else 0
        n_c = self.creg[1] if self.creg else 0
        return Circuit(n_q, n_c, self.instructions)

    def statement(self):
        tok = self.tok
        if tok.kind != "ident":
            raise self.error(f"unexpected token {tok.text!r}")
        word = tok.text
        if word == "include":
            self.advance()
            path = self.expect_kind("string")
            if path.text.strip('"') != "qelib1.inc":
                raise self.error("include files are not supported", path, QasmError)
            self.expect(";")
        elif word in ("qreg", "creg"):
            self.declaration(word)
        elif word == "measure":
            self.advance()
            qubits = self.operand("q")
            self.expect("->")
            clbits = self.operand("c")
            self.expect(";")
            if len(qubits) != len(clbits):
                raise self.error("measure operands have different sizes", tok, QasmError)
            for q, c in zip(qubits, clbits):
                self.instructions.append(Instruction("MEASURE", (q,), clbits=(c,)))
        elif word == "barrier":
            self.advance()
            qubits = list(self.operand("q"))
            while self.tok.text == ",":
                self.advance()
                qubits.extend(self.operand("q"))
            self.expect(";")
            self.instructions.append(Instruction("BARRIER", tuple(qubits)))
        elif word == "reset":
            self.advance()
            qubits = self.operand("q")
            self.expect(";")
            for q in qubits:
                self.instructions.append(Instruction("RESET", (q,)))
        elif word in ("gate", "opaque", "if"):
            raise self.error(f"'{word}' statements are not supported", tok, QasmError)
        else:
            self.gate()

    def declaration(self, word: str):
        tok = self.advance()
        name = self.expect_kind("ident").text
        self.expect("[")
        size_tok = self.expect_kind("number")
        if not size_tok.text.isdigit():
            raise self.error("register size must be an integer", size_tok)
        self.expect("]")
        self.expect(";")
        attr = "qreg" if word == "qreg" else "creg"
        if getattr(self, attr) is not None:
            raise self.error(f"only one {word} declaration is supported", tok, QasmError)
        setattr(self, attr, (name, int(size_tok.text)))

    def operand(self, which: str) -> tuple[int, ...]:
        """Parse ``name`` or ``name[i]`` and return the referenced indices."""
        name_tok = self.expect_kind("ident")
        reg = self.qreg if which == "q" else self.creg
        label = "qreg" if which == "q" else "creg"
        if reg is None or reg[0] != name_tok.text:
            raise self.error(f"undeclared {label} {name_tok.text!r}", name_tok, QasmError)
        if self.tok.text != "[":
            return tuple(range(reg[1]))
        self.advance()
        idx_tok = self.expect_kind("number")
        if not idx_tok.text.isdigit():
            raise self.error("register index must be an integer", idx_tok)
        self.expect("]")
        idx = int(idx_tok.text)
        if idx >= reg[1]:
            raise self.error(
                f"index {idx} out of range for {label} {reg[0]}[{reg[1]}]", idx_tok, QasmError
            )
        return (idx,)

    def gate(self):
        name_tok = self.advance()
        kind = _GATE_NAMES.get(name_tok.text)
        if kind is None:
            raise self.error(f"unknown gate {name_tok.text!r}", name_tok, QasmError)
        params = []
        if self.tok.text == "(":
            self.advance()
            if self.tok.text != ")":
                params.append(self.expr())
                while self.tok.text == ",":
                    self.advance()
                    params.append(self.expr())
            self.expect(")")
        operands = [self.operand("q")]
        while self.tok.text == ",":
            self.advance()
            operands.append(self.operand("q"))
        self.expect(";")
        n_q, n_p = _ARITY[kind]
        if len(params) != n_p:
            raise self.error(f"{name_tok.text} expects {n_p} parameter(s), got {len(params)}", name_tok, QasmError)
        if len(operands) != n_q:
            raise self.error(f"{name_tok.text} expects {n_q} qubit(s), got {len(operands)}", name_tok, QasmError)
        # whole-register operands broadcast
        width = max(len(op) for op in operands)
        if any(len(op) not in (1, width) for op in operands):
            raise self.error("register operands have mismatched sizes", name_tok, QasmError)
        for k in range(width):
            qubits = tuple(op[0] if len(op) == 1 else op[k] for op in operands)
            try:
                self.instructions.append(Instruction(kind, qubits, tuple(params)))
            except QasmError as exc:
                raise self.error(str(exc), name_tok, QasmError) from None

    # expression grammar: expr := term (('+'|'-') term)* ; term := unary (('*'|'/') unary)*
    # unary := '-' unary | '+' unary | power ; power := atom ('^' unary)?
    def expr(self) -> float:
        value = self.term()
        while self.tok.text in ("+", "-"):
            op = self.advance().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> float:
        value = self.unary()
        while self.tok.text in ("*", "/"):
            op_tok = self.advance()
            rhs = self.unary()
            if op_tok.text == "*":
                value *= rhs
            else:
                if rhs == 0:
                    raise self.error("division by zero", op_tok)
                value /= rhs
        return value

    def unary(self) -> float:
        if self.tok.text == "-":
            self.advance()
            return -self.unary()
        if self.tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> float:
        base = self.atom()
        if self.tok.text == "^":
            self.advance()
            return base ** self.unary()
        return base

    def atom(self) -> float:
        tok = self.tok
        if tok.kind == "number":
            self.advance()
            return float(tok.text)
        if tok.text == "pi":
            self.advance()
            return math.pi
        if tok.text == "(":
            self.advance()
            value = self.expr()
            self.expect(")")
            return value
        shown = tok.text or "end of input"
        raise self.error(f"expected a number, 'pi' or '(' in expression, found {shown!r}")


def parse_qasm(text: str) -> Circuit:
    """Parse OpenQASM 2.0 source into a :class:`Circuit`.

    Angle expressions are folded to radians. Errors carry 1-based
    ``line``/``column`` attributes.
    """
    return _Parser(text).parse()


def _fmt(x: float) -> str:
    return format(x, ".17g")


def emit_qasm(circuit: Circuit) -> str:
    lines = ["OPENQASM 2.0;", f"qreg q[{circuit.n_qubits}];"]
    if circuit.n_clbits:
        lines.append(f"creg c[{circuit.n_clbits}];")
    for instr in circuit.instructions:
        qs = ",".join(f"q[{q}]" for q in instr.qubits)
        if instr.kind == "MEASURE":
            lines.append(f"measure q[{instr.qubits[0]}] -> c[{instr.clbits[0]}];")
        elif instr.kind == "RESET":
            lines.append(f"reset {qs};")
        elif instr.kind == "BARRIER":
            lines.append(f"barrier {qs};")
        else:
            name = _EMIT_NAMES[instr.kind]
            if instr.params:
                name += "(" + ",".join(_fmt(p) for p in instr.params) + ")"
            lines.append(f"{name} {qs};")
    return "\n".join(lines) + "\n"


def load_qasm(path) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return parse_qasm(fh.read())


def circuit_depth(circuit: Circuit, kinds: Sequence[str] | None = None) -> int:
    """Number of layers when instructions are packed greedily (barriers ignored)."""
    level = [0] * circuit.n_qubits
    for instr in circuit:
        if instr.kind == "BARRIER" or (kinds is not None and instr.kind not in kinds):
            continue
        d = max(level[q] for q in instr.qubits) + 1
        for q in instr.qubits:
            level[q] = d
    return max(level, default=0)
