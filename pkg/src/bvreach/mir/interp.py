"""Concrete execution of mini-IR programs and the explicit-state reachability oracle."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .ir import BinOp, Br, Call, CondBr, Const, Ext, ICmp, Program, Ret, Select


def _signed(v: int, w: int) -> int:
    return v - (1 << w) if v >> (w - 1) & 1 else v


def _arith(op: str, a: int, b: int, w: int, div_fault: bool):
    """Result of ``op`` on unsigned ``w``-bit operands, or a fault string."""
    mask = (1 << w) - 1
    if op == "add":
        return (a + b) & mask
    if op == "sub":
        return (a - b) & mask
    if op == "mul":
        return (a * b) & mask
    if op == "and":
        return a & b
    if op == "or":
        return a | b
    if op == "xor":
        return a ^ b
    if op == "shl":
        return (a << b) & mask if b < w else 0
    if op == "lshr":
        return a >> b if b < w else 0
    if op == "ashr":
        return (_signed(a, w) >> min(b, w - 1)) & mask
    if op == "udiv":
        return a // b if b else mask
    if op == "urem":
        return a % b if b else a
    sa, sb = _signed(a, w), _signed(b, w)
    if op in ("sdiv", "srem") and b == 0:
        if div_fault:
            return "division by zero"
        if op == "sdiv":
            return mask if sa >= 0 else 1
        return a
    if op == "sdiv":
        q = abs(sa) // abs(sb)
        return (q if (sa < 0) == (sb < 0) else -q) & mask
    if op == "srem":
        r = abs(sa) % abs(sb)
        return (-r if sa < 0 else r) & mask
    raise ValueError(op)


def signed_overflows(op: str, a: int, b: int, w: int) -> bool:
    """Whether the mathematical signed result of ``op`` leaves the ``w``-bit range."""
    lo, hi = -(1 << (w - 1)), (1 << (w - 1)) - 1
    sa, sb = _signed(a, w), _signed(b, w)
    if op == "add":
        r = sa + sb
    elif op == "sub":
        r = sa - sb
    elif op == "mul":
        r = sa * sb
    elif op == "sdiv":
        return sa == lo and sb == -1
    else:
        raise ValueError(op)
    return not lo <= r <= hi


def _compare(pred: str, a: int, b: int, w: int) -> bool:
    if pred[0] == "s":
        a, b = _signed(a, w), _signed(b, w)
    return {
        "eq": a == b, "ne": a != b,
        "ugt": a > b, "uge": a >= b, "ult": a < b, "ule": a <= b,
        "sgt": a > b, "sge": a >= b, "slt": a < b, "sle": a <= b,
    }[pred]


@dataclass
class BlockResult:
    kind: str  # goto | ok | error | ret
    target: str | None = None
    assigned: dict = field(default_factory=dict)
    reason: str = ""
    value: int | None = None


def execute_block(program: Program, label: str, pred: str, env, *,
                  div_fault: bool = True) -> BlockResult:
    """Run one block. ``env`` supplies register values on entry.

    ``assigned`` lists every register written before the block left, in order;
    on an error or ok exit it stops at the faulting instruction.
    """
    block = program.block(label)
    local: dict[str, int] = {}

    def get(v, scope=local):
        if isinstance(v, Const):
            return v.value
        if v.name in scope:
            return scope[v.name]
        return env[v.name]

    entry_vals = {}
    for phi in block.phis:
        for v, lbl in phi.incoming:
            if lbl == pred:
                entry_vals[phi.dest] = get(v, {})
                break
        else:
            raise KeyError(f"phi {phi.dest} has no arm for %{pred}")
    local.update(entry_vals)

    for ins in block.body:
        if isinstance(ins, Call):
            if ins.fn == "error":
                return BlockResult("error", assigned=dict(local), reason="error call")
            holds = get(ins.arg) != 0
            if not holds:
                if ins.fn == "assume":
                    return BlockResult("ok", assigned=dict(local), reason="assume violated")
                return BlockResult("error", assigned=dict(local), reason="assertion failed")
            continue
        if isinstance(ins, BinOp):
            a, b = get(ins.lhs), get(ins.rhs)
            if (ins.nsw or ins.op == "sdiv") and ins.op in ("add", "sub", "mul", "sdiv"):
                if signed_overflows(ins.op, a, b, ins.width):
                    return BlockResult("error", assigned=dict(local),
                                       reason=f"signed overflow in {ins.dest}")
            r = _arith(ins.op, a, b, ins.width, div_fault)
            if isinstance(r, str):
                return BlockResult("error", assigned=dict(local), reason=r)
            local[ins.dest] = r
        elif isinstance(ins, ICmp):
            local[ins.dest] = int(_compare(ins.pred, get(ins.lhs), get(ins.rhs), ins.width))
        elif isinstance(ins, Ext):
            v = get(ins.src)
            if ins.kind == "sext":
                v = _signed(v, ins.from_width) & ((1 << ins.to_width) - 1)
            local[ins.dest] = v
        elif isinstance(ins, Select):
            local[ins.dest] = get(ins.then) if get(ins.cond) else get(ins.other)

    term = block.term
    if isinstance(term, Br):
        return BlockResult("goto", term.label, dict(local))
    if isinstance(term, CondBr):
        tgt = term.then if get(term.cond) else term.other
        return BlockResult("goto", tgt, dict(local))
    if isinstance(term, Ret):
        return BlockResult("ret", assigned=dict(local), value=get(term.value))
    return BlockResult("ok", assigned=dict(local), reason="unreachable executed")


@dataclass(frozen=True)
class Outcome:
    kind: str  # terminated | error | ok | fuel
    blocks: int
    exit_value: int | None = None
    reason: str = ""


def interpret(program: Program, fuel: int, *, return_check: bool = False) -> Outcome:
    """Execute from the entry block; each block entered costs one unit of fuel."""
    env: dict[str, int] = {}
    label = program.blocks[program.entry].label
    pred = label
    used = 0
    while True:
        if used >= fuel:
            return Outcome("fuel", used)
        used += 1
        res = execute_block(program, label, pred, env, div_fault=True)
        env.update(res.assigned)
        if res.kind == "goto":
            pred, label = label, res.target
            continue
        if res.kind == "ret":
            if return_check and res.value != 0:
                return Outcome("error", used, res.value, "nonzero return value")
            return Outcome("terminated", used, res.value)
        return Outcome(res.kind, used, reason=res.reason)


# ---------------------------------------------------------------- state level


@dataclass(frozen=True)
class ConcreteState:
    curr: int
    pred: int
    values: tuple[int, ...]  # persistent registers, state-space order


def successor(program: Program, space, state: ConcreteState, *,
              return_check: bool = False) -> ConcreteState:
    """One transition of the symbolic system, computed concretely.

    Mirrors the encoding: division by zero follows SMT-LIB totalization, the
    sinks loop on themselves and every transition records the source as pred.
    """
    names = space.var_names
    if state.curr in (space.ok_code, space.error_code):
        return ConcreteState(state.curr, state.curr, state.values)
    label = space.decode_block(state.curr)
    pred = space.decode_block(state.pred)
    env = dict(zip(names, state.values))
    res = execute_block(program, label, pred, env, div_fault=False)
    values = tuple(res.assigned.get(n, env[n]) for n in names)
    if res.kind == "goto":
        nxt = space.enc[res.target]
    elif res.kind == "ret":
        nxt = space.error_code if return_check and res.value != 0 else space.ok_code
    elif res.kind == "ok":
        nxt = space.ok_code
    else:
        nxt = space.error_code
    return ConcreteState(nxt, state.curr, values)


def initial_state(space) -> ConcreteState:
    entry = 1
    return ConcreteState(entry, entry, tuple(0 for _ in space.vars))


@dataclass(frozen=True)
class BfsResult:
    kind: str  # reachable | unreachable | abort
    length: int | None = None
    path: tuple[ConcreteState, ...] = ()
    visited: int = 0


def bfs_reachable_error(program: Program, max_bits: int = 30, *,
                        return_check: bool = False, space=None) -> BfsResult:
    """Shortest transition count from the initial state to ``error``.

    Persistent registers start at zero: every read is dominated by a write, so
    their initial contents never influence a run.
    """
    from ..statespace import build_state_space

    space = space or build_state_space(program)
    if space.n > max_bits:
        return BfsResult("abort")
    start = initial_state(space)
    parent = {start: None}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        if s.curr == space.error_code:
            path = [s]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            path.reverse()
            return BfsResult("reachable", len(path) - 1, tuple(path), len(parent))
        t = successor(program, space, s, return_check=return_check)
        if t not in parent:
            parent[t] = s
            queue.append(t)
    return BfsResult("unreachable", visited=len(parent))
