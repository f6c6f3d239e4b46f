"""Symbolic transition system (init, goal, universal, transitions) for a program."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import bvir as B
from .mir.ir import BinOp, Br, Call, CondBr, Const, Ext, ICmp, Program, Ret, Select
from .statespace import CURR, PRED, StateSpace, build_state_space


@dataclass(frozen=True)
class Transition:
    source: int  # block code
    guard: B.Term  # over current-state variables
    target: int
    updates: tuple  # ((var name, term), ...) in state-space order

    def update_map(self) -> dict:
        return dict(self.updates)


@dataclass
class EncodedSystem:
    space: StateSpace
    init: B.Term
    goal: B.Term
    univ: B.Term
    transitions: list = field(default_factory=list)

    @property
    def trans(self) -> B.Term:
        return B.And(*(transition_formula(self.space, t) for t in self.transitions))


def _curr(space, primed=False):
    return B.var(CURR, space.block_width, primed)


def _pred(space, primed=False):
    return B.var(PRED, space.block_width, primed)


def _code(space, c):
    return B.const(c, space.block_width)


def encode_initial(space: StateSpace) -> B.Term:
    return B.And(B.Eq(_curr(space), _code(space, 1)), B.Eq(_pred(space), _code(space, 1)))


def encode_goal(space: StateSpace) -> B.Term:
    return B.Eq(_curr(space), _code(space, space.error_code))


def encode_universal(space: StateSpace) -> B.Term:
    lo, hi = _code(space, 1), _code(space, space.error_code)
    parts = []
    for v in (_curr(space), _pred(space)):
        parts += [B.cmp("ule", lo, v), B.cmp("ule", v, hi)]
    return B.And(*parts)


class _BlockEncoder:
    def __init__(self, program: Program, space: StateSpace, label: str, return_check: bool):
        self.program, self.space = program, space
        self.block = program.block(label)
        self.code = space.enc[label]
        self.return_check = return_check
        self.env: dict[str, B.Term] = {}
        self.assigned: dict[str, B.Term] = {}
        self.out: list[Transition] = []

    def value(self, v) -> B.Term:
        if isinstance(v, Const):
            return B.const(v.value, v.width)
        if v.name in self.env:
            return self.env[v.name]
        if self.space.is_state(v.name):
            return B.var(v.name, v.width)
        raise KeyError(f"{v.name} is neither local nor persistent")

    def cond(self, v) -> B.Term:
        return B.bv_to_bool(self.value(v))

    def define(self, dest: str, term: B.Term):
        self.env[dest] = term
        if self.space.is_state(dest):
            self.assigned[dest] = term

    def emit(self, guard, target):
        if guard is B.FALSE:
            return
        ups = tuple((n, self.assigned[n]) for n in self.space.var_names if n in self.assigned)
        self.out.append(Transition(self.code, guard, target, ups))

    def run(self) -> list[Transition]:
        sp = self.space
        pred = _pred(sp)
        # phis read the state left by the previous transition, in parallel
        phi_vals = {}
        for phi in self.block.phis:
            *rest, (last_v, _) = phi.incoming
            term = self.value(last_v)
            for v, lbl in reversed(rest):
                term = B.Ite(B.Eq(pred, _code(sp, sp.enc[lbl])), self.value(v), term)
            phi_vals[phi.dest] = term
        for dest, term in phi_vals.items():
            self.define(dest, term)

        guard = B.TRUE
        for ins in self.block.body:
            if isinstance(ins, Call):
                if ins.fn == "error":
                    self.emit(guard, sp.error_code)
                    return self.out
                c = self.cond(ins.arg)
                sink = sp.ok_code if ins.fn == "assume" else sp.error_code
                self.emit(B.And(guard, B.Not(c)), sink)
                guard = B.And(guard, c)
            elif isinstance(ins, BinOp):
                a, b = self.value(ins.lhs), self.value(ins.rhs)
                if ins.op == "sdiv" or ins.nsw:
                    ov = B.overflow_condition(ins.op, a, b)
                    self.emit(B.And(guard, ov), sp.error_code)
                    guard = B.And(guard, B.Not(ov))
                self.define(ins.dest, B.bv(ins.op, a, b))
            elif isinstance(ins, ICmp):
                c = B.icmp(ins.pred, self.value(ins.lhs), self.value(ins.rhs))
                self.define(ins.dest, B.bool_to_bv(c))
            elif isinstance(ins, Ext):
                self.define(ins.dest, B.ext(ins.kind, self.value(ins.src), ins.to_width))
            elif isinstance(ins, Select):
                self.define(ins.dest, B.Ite(self.cond(ins.cond), self.value(ins.then),
                                            self.value(ins.other)))

        term = self.block.term
        if isinstance(term, Br):
            self.emit(guard, sp.enc[term.label])
        elif isinstance(term, CondBr):
            c = self.cond(term.cond)
            self.emit(B.And(guard, c), sp.enc[term.then])
            self.emit(B.And(guard, B.Not(c)), sp.enc[term.other])
        elif isinstance(term, Ret) and self.return_check:
            nz = B.bv_to_bool(self.value(term.value))
            self.emit(B.And(guard, nz), sp.error_code)
            self.emit(B.And(guard, B.Not(nz)), sp.ok_code)
        else:
            self.emit(guard, sp.ok_code)
        return self.out


def encode_block(program: Program, space: StateSpace, label: str, *,
                 return_check: bool = False) -> list[Transition]:
    return _BlockEncoder(program, space, label, return_check).run()


def sink_loops(space: StateSpace) -> list[Transition]:
    return [Transition(c, B.TRUE, c, ()) for c in (space.ok_code, space.error_code)]


def transition_formula(space: StateSpace, t: Transition) -> B.Term:
    """``curr = src ∧ guard ⇒ curr' = tgt ∧ pred' = src ∧ updates ∧ frame``."""
    lhs = B.And(B.Eq(_curr(space), _code(space, t.source)), t.guard)
    ups = t.update_map()
    rhs = [B.Eq(_curr(space, True), _code(space, t.target)),
           B.Eq(_pred(space, True), _code(space, t.source))]
    for name, w in space.vars:
        rhs.append(B.Eq(B.var(name, w, True), ups.get(name, B.var(name, w))))
    return B.Implies(lhs, B.And(*rhs))


def encode_program(program: Program, space: StateSpace | None = None, *,
                   return_check: bool = False) -> EncodedSystem:
    space = space or build_state_space(program)
    trans = []
    for label in space.labels:
        trans += encode_block(program, space, label, return_check=return_check)
    trans += sink_loops(space)
    return EncodedSystem(space, encode_initial(space), encode_goal(space),
                         encode_universal(space), trans)


def dump_transitions(system: EncodedSystem) -> str:
    sp = system.space
    lines = []
    for t in system.transitions:
        ups = " ".join(f"{n}'={B.to_smtlib(e)}" for n, e in t.updates)
        src, tgt = sp.decode_block(t.source), sp.decode_block(t.target)
        line = f"[{src}] {B.to_smtlib(t.guard)} => {tgt} ({t.target}), pred'={t.source}"
        lines.append(line + (", " + ups if ups else ""))
    return "\n".join(lines) + "\n"


def dump_smt(system: EncodedSystem) -> str:
    """The four formulas as SMT-LIB assertions."""
    sp = system.space
    decls = []
    for name, (_, w) in sp.layout.items():
        for p in ("", "'"):
            decls.append(f"(declare-const |{name}{p}| (_ BitVec {w}))")
    out = decls[:]
    for tag, f in (("init", system.init), ("univ", system.univ), ("goal", system.goal)):
        out.append(f"; {tag}")
        out.append(f"(assert {B.to_smtlib(f)})")
    out.append("; trans")
    for t in system.transitions:
        out.append(f"(assert {B.to_smtlib(transition_formula(sp, t))})")
    return "\n".join(out) + "\n"
