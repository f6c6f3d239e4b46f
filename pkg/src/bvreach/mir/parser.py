"""Parser for the textual mini-IR (a strict subset of LLVM IR)."""

from __future__ import annotations

import re

from .ir import (BINOPS, ICMP_PREDS, INTRINSICS, NSW_OPS, Block, BinOp, Br, Call,
                 CondBr, Const, Ext, ICmp, Phi, Program, Reg, Ret, Select,
                 Unreachable, uses_of)


class ParseError(Exception):
    """Malformed or ill-formed program. ``kind`` names the error class."""

    def __init__(self, kind: str, message: str, line: int = 0, col: int = 0):
        self.kind = kind
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {kind}: {message}")


class UnsupportedInstruction(ParseError):
    def __init__(self, opcode: str, line: int = 0, col: int = 0):
        self.opcode = opcode
        super().__init__("unsupported", f"unsupported instruction '{opcode}'", line, col)


_TOKEN = re.compile(r"""
    (?P<nl>\n)
  | (?P<ws>[ \t\r]+)
  | (?P<comment>;[^\n]*)
  | (?P<label>[A-Za-z$._][-A-Za-z$._0-9]*:)
  | (?P<local>%[-A-Za-z$._0-9]+)
  | (?P<global>@[-A-Za-z$._0-9]+)
  | (?P<attr>\#\d+)
  | (?P<int>-?\d+)
  | (?P<type>i\d+\b)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9.]*)
  | (?P<punct>\.\.\.|[(){}\[\],=*])
""", re.VERBOSE)

_TERMINATORS = {"br", "ret", "unreachable"}


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"{self.kind}:{self.text!r}@{self.line}:{self.col}"


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError("syntax", f"unexpected character {text[pos]!r}",
                             line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.positions: dict[str, tuple[int, int]] = {}
        self.uses: list[tuple[Reg, int, int]] = []
        self.phi_refs: list[tuple[str, _Tok]] = []

    # -- token helpers

    def peek(self, k=0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError("syntax", msg, tok.line, tok.col)

    def expect(self, kind, text=None) -> _Tok:
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            self.fail(f"expected {want!r}, found {t.text or 'end of input'!r}")
        return self.next()

    def accept(self, kind, text=None):
        t = self.peek()
        if t.kind == kind and (text is None or t.text == text):
            return self.next()
        return None

    def width(self) -> int:
        t = self.expect("type")
        w = int(t.text[1:])
        if w < 1:
            self.fail("bit-width must be positive", t)
        return w

    def value(self, width: int):
        t = self.next()
        if t.kind == "int":
            return Const(width, int(t.text) % (1 << width))
        if t.kind == "ident" and t.text in ("true", "false"):
            if width != 1:
                raise ParseError("width", f"'{t.text}' used at width {width}", t.line, t.col)
            return Const(1, int(t.text == "true"))
        if t.kind == "local":
            r = Reg(t.text, width)
            self.uses.append((r, t.line, t.col))
            return r
        if t.kind == "ident" and t.text in ("undef", "poison"):
            raise UnsupportedInstruction(t.text, t.line, t.col)
        self.fail(f"expected a value, found {t.text!r}", t)

    def label_ref(self) -> tuple[str, _Tok]:
        self.expect("ident", "label")
        t = self.expect("local")
        return t.text[1:], t

    # -- grammar

    def parse(self) -> tuple[Program, dict]:
        self.expect("ident", "define")
        ret_width = self.width()
        g = self.expect("global")
        if g.text != "@main":
            raise ParseError("syntax", f"expected @main, found {g.text}", g.line, g.col)
        self.expect("punct", "(")
        self.expect("punct", ")")
        while self.peek().kind in ("attr", "ident"):
            self.next()
        self.expect("punct", "{")
        blocks = []
        label_pos = {}
        refs = []
        while not self.accept("punct", "}"):
            t = self.peek()
            if t.kind != "label":
                self.fail("expected a block label")
            self.next()
            label = t.text[:-1]
            if label in label_pos:
                raise ParseError("duplicate", f"duplicate block label '{label}'", t.line, t.col)
            label_pos[label] = (t.line, t.col)
            blocks.append(self.block(label, ret_width, refs))
        if self.peek().kind != "eof":
            self.fail("trailing input after function body")
        if not blocks:
            self.fail("function has no blocks")
        for name, tok in refs:
            if name not in label_pos:
                raise ParseError("unknown-label", f"unknown label '%{name}'", tok.line, tok.col)
        return Program(tuple(blocks), ret_width), label_pos

    def block(self, label, ret_width, refs) -> Block:
        phis, body = [], []
        while True:
            t = self.peek()
            if t.kind in ("label", "eof") or (t.kind == "punct" and t.text == "}"):
                raise ParseError("syntax", f"block '{label}' has no terminator", t.line, t.col)
            if t.kind == "local":
                item = self.assignment()
                if isinstance(item, Phi):
                    if body:
                        raise ParseError("ssa", "phi node after non-phi instruction",
                                         t.line, t.col)
                    phis.append(item)
                else:
                    body.append(item)
                continue
            if t.kind != "ident":
                self.fail(f"expected an instruction, found {t.text!r}")
            if t.text == "call":
                body.append(self.call())
                continue
            if t.text in _TERMINATORS:
                term = self.terminator(ret_width, refs)
                return Block(label, tuple(phis), tuple(body), term)
            raise UnsupportedInstruction(t.text, t.line, t.col)

    def assignment(self):
        dest_tok = self.next()
        dest = dest_tok.text
        self.expect("punct", "=")
        op_tok = self.peek()
        if op_tok.kind != "ident":
            self.fail(f"expected an opcode, found {op_tok.text!r}")
        op = op_tok.text
        self.next()
        if dest in self.positions:
            raise ParseError("duplicate", f"register {dest} assigned twice",
                             dest_tok.line, dest_tok.col)
        self.positions[dest] = (dest_tok.line, dest_tok.col)
        if op in BINOPS:
            nsw = False
            while self.peek().kind == "ident" and self.peek().text in ("nsw", "nuw", "exact"):
                flag = self.next()
                if flag.text == "nsw":
                    if op not in NSW_OPS:
                        raise ParseError("unsupported", f"'nsw' on '{op}' is not supported",
                                         flag.line, flag.col)
                    nsw = True
            w = self.width()
            a = self.value(w)
            self.expect("punct", ",")
            b = self.value(w)
            return BinOp(op, dest, w, a, b, nsw)
        if op == "icmp":
            p = self.expect("ident")
            if p.text not in ICMP_PREDS:
                self.fail(f"unknown icmp predicate {p.text!r}", p)
            w = self.width()
            a = self.value(w)
            self.expect("punct", ",")
            b = self.value(w)
            return ICmp(p.text, dest, w, a, b)
        if op in ("zext", "sext"):
            fw = self.width()
            src = self.value(fw)
            self.expect("ident", "to")
            tw_tok = self.peek()
            tw = self.width()
            if tw <= fw:
                raise ParseError("width", f"{op} must widen (i{fw} to i{tw})",
                                 tw_tok.line, tw_tok.col)
            return Ext(op, dest, fw, tw, src)
        if op == "select":
            cw = self.width()
            if cw != 1:
                raise ParseError("width", "select condition must be i1", op_tok.line, op_tok.col)
            c = self.value(1)
            self.expect("punct", ",")
            w = self.width()
            a = self.value(w)
            self.expect("punct", ",")
            w2_tok = self.peek()
            if self.width() != w:
                raise ParseError("width", "select arms differ in width", w2_tok.line, w2_tok.col)
            b = self.value(w)
            return Select(dest, w, c, a, b)
        if op == "phi":
            w = self.width()
            arms = []
            while True:
                self.expect("punct", "[")
                v = self.value(w)
                self.expect("punct", ",")
                lt = self.expect("local")
                self.expect("punct", "]")
                arms.append((v, lt.text[1:], lt))
                if not self.accept("punct", ","):
                    break
            self.phi_refs.extend((lbl, tok) for _, lbl, tok in arms)
            return Phi(dest, w, tuple((v, lbl) for v, lbl, _ in arms))
        raise UnsupportedInstruction(op, op_tok.line, op_tok.col)

    def call(self) -> Call:
        call_tok = self.next()
        self.expect("ident", "void")
        name_tok = None
        if self.accept("ident", "bitcast"):
            depth = 0
            while True:
                t = self.next()
                if t.kind == "eof":
                    self.fail("unterminated bitcast", call_tok)
                if t.kind == "global" and name_tok is None:
                    name_tok = t
                if t.kind == "punct" and t.text == "(":
                    depth += 1
                elif t.kind == "punct" and t.text == ")":
                    depth -= 1
                    if depth == 0:
                        break
        else:
            name_tok = self.expect("global")
        if name_tok is None:
            self.fail("call without callee", call_tok)
        fn = INTRINSICS.get(name_tok.text[1:])
        if fn is None:
            raise UnsupportedInstruction(f"call {name_tok.text}", name_tok.line, name_tok.col)
        self.expect("punct", "(")
        arg = None
        if fn != "error":
            w = self.width()
            arg = self.value(w)
        self.expect("punct", ")")
        while self.accept("attr"):
            pass
        return Call(fn, arg)

    def terminator(self, ret_width, refs):
        t = self.next()
        if t.text == "unreachable":
            return Unreachable()
        if t.text == "ret":
            w_tok = self.peek()
            w = self.width()
            if w != ret_width:
                raise ParseError("width", f"ret i{w} in function returning i{ret_width}",
                                 w_tok.line, w_tok.col)
            return Ret(w, self.value(w))
        if self.peek().kind == "ident" and self.peek().text == "label":
            lbl, tok = self.label_ref()
            refs.append((lbl, tok))
            return Br(lbl)
        w_tok = self.peek()
        if self.width() != 1:
            raise ParseError("width", "branch condition must be i1", w_tok.line, w_tok.col)
        c = self.value(1)
        self.expect("punct", ",")
        a, at = self.label_ref()
        self.expect("punct", ",")
        b, bt = self.label_ref()
        refs.extend([(a, at), (b, bt)])
        return CondBr(c, a, b)


def parse(text: str) -> Program:
    """Parse and validate a mini-IR module; raises :class:`ParseError`."""
    parser = _Parser(text)
    program, label_pos = parser.parse()
    for lbl, tok in parser.phi_refs:
        if lbl not in label_pos:
            raise ParseError("unknown-label", f"unknown label '%{lbl}'", tok.line, tok.col)
    registers = _check(program, parser.positions, parser.uses, label_pos)
    return Program(program.blocks, program.ret_width, registers)


def dominators(program: Program) -> dict[str, set[str]]:
    """Dominator sets of the blocks reachable from the entry."""
    preds = program.predecessors()
    entry = program.blocks[program.entry].label
    reach, stack = {entry}, [entry]
    while stack:
        b = program.block(stack.pop())
        for s in b.term.successors:
            if s not in reach:
                reach.add(s)
                stack.append(s)
    order = [b.label for b in program.blocks if b.label in reach]
    dom = {lbl: set(reach) for lbl in order}
    dom[entry] = {entry}
    changed = True
    while changed:
        changed = False
        for lbl in order:
            if lbl == entry:
                continue
            ps = [p for p in preds[lbl] if p in reach]
            new = set.intersection(*(dom[p] for p in ps)) if ps else set()
            new = new | {lbl}
            if new != dom[lbl]:
                dom[lbl] = new
                changed = True
    return dom


def _check(program: Program, positions, uses, label_pos) -> dict[str, int]:
    registers = {}
    for b in program.blocks:
        for item in (*b.phis, *b.body):
            if not isinstance(item, Call):
                w = item.to_width if isinstance(item, Ext) else item.width
                if isinstance(item, ICmp):
                    w = 1
                registers[item.dest] = w
    for r, line, col in uses:
        if r.name not in registers:
            raise ParseError("ssa", f"use of undefined register {r.name}", line, col)
        if registers[r.name] != r.width:
            raise ParseError("width", f"{r.name} has width {registers[r.name]}, used as i{r.width}",
                             line, col)

    entry = program.blocks[program.entry]
    if entry.phis:
        line, col = positions[entry.phis[0].dest]
        raise ParseError("ssa", "entry block has phi nodes", line, col)

    preds = program.predecessors()
    dom = dominators(program)
    def_block = program.def_block()
    for b in program.blocks:
        for phi in b.phis:
            line, col = positions[phi.dest]
            labels = [lbl for _, lbl in phi.incoming]
            if len(set(labels)) != len(labels) or set(labels) != set(preds[b.label]):
                raise ParseError("ssa", f"phi {phi.dest} incoming labels {sorted(labels)} "
                                 f"differ from predecessors {sorted(preds[b.label])}", line, col)
            for v, lbl in phi.incoming:
                if isinstance(v, Reg) and lbl in dom:
                    if def_block[v.name] not in dom[lbl]:
                        raise ParseError("ssa", f"{v.name} does not dominate the end of %{lbl}",
                                         line, col)
        defined_here = {p.dest for p in b.phis}
        items = [*b.body, b.term]
        for item in items:
            for v in uses_of(item):
                if not isinstance(v, Reg):
                    continue
                d = def_block[v.name]
                bad = False
                if d == b.label:
                    bad = v.name not in defined_here
                elif b.label in dom:
                    bad = d not in dom[b.label]
                if bad:
                    line, col = label_pos[b.label]
                    raise ParseError("ssa", f"use of {v.name} in %{b.label} is not dominated "
                                     f"by its definition", line, col)
            if not isinstance(item, Call) and hasattr(item, "dest"):
                defined_here.add(item.dest)
    return registers
