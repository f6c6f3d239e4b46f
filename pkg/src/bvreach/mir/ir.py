"""Program representation for the SSA mini-IR."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

BINOPS = ("add", "sub", "mul", "sdiv", "udiv", "srem", "urem",
          "and", "or", "xor", "shl", "lshr", "ashr")
ICMP_PREDS = ("eq", "ne", "ugt", "uge", "ult", "ule", "sgt", "sge", "slt", "sle")
NSW_OPS = ("add", "sub", "mul")
INTRINSICS = {
    "__VERIFIER_assume": "assume",
    "__VERIFIER_assert": "assert",
    "__VERIFIER_error": "error",
}


@dataclass(frozen=True)
class Const:
    width: int
    value: int  # already reduced modulo 2**width

    def __str__(self):
        if self.width == 1:
            return "true" if self.value else "false"
        return str(self.value)


@dataclass(frozen=True)
class Reg:
    name: str  # includes the leading '%'
    width: int

    def __str__(self):
        return self.name


Value = Union[Const, Reg]


@dataclass(frozen=True)
class Phi:
    dest: str
    width: int
    incoming: tuple[tuple[Value, str], ...]  # (value, predecessor label)

    def __str__(self):
        arms = ", ".join(f"[ {v}, %{lbl} ]" for v, lbl in self.incoming)
        return f"{self.dest} = phi i{self.width} {arms}"


@dataclass(frozen=True)
class BinOp:
    op: str
    dest: str
    width: int
    lhs: Value
    rhs: Value
    nsw: bool = False

    def __str__(self):
        flag = " nsw" if self.nsw else ""
        return f"{self.dest} = {self.op}{flag} i{self.width} {self.lhs}, {self.rhs}"


@dataclass(frozen=True)
class ICmp:
    pred: str
    dest: str
    width: int
    lhs: Value
    rhs: Value

    def __str__(self):
        return f"{self.dest} = icmp {self.pred} i{self.width} {self.lhs}, {self.rhs}"


@dataclass(frozen=True)
class Ext:
    kind: str  # zext | sext
    dest: str
    from_width: int
    to_width: int
    src: Value

    def __str__(self):
        return f"{self.dest} = {self.kind} i{self.from_width} {self.src} to i{self.to_width}"


@dataclass(frozen=True)
class Select:
    dest: str
    width: int
    cond: Value
    then: Value
    other: Value

    def __str__(self):
        return (f"{self.dest} = select i1 {self.cond}, i{self.width} {self.then}, "
                f"i{self.width} {self.other}")


@dataclass(frozen=True)
class Call:
    fn: str  # assume | assert | error
    arg: Value | None = None

    def __str__(self):
        name = {v: k for k, v in INTRINSICS.items()}[self.fn]
        if self.arg is None:
            return f"call void @{name}()"
        return f"call void @{name}(i1 {self.arg})"


Instr = Union[BinOp, ICmp, Ext, Select, Call]


@dataclass(frozen=True)
class Br:
    label: str

    def __str__(self):
        return f"br label %{self.label}"

    @property
    def successors(self):
        return (self.label,)


@dataclass(frozen=True)
class CondBr:
    cond: Value
    then: str
    other: str

    def __str__(self):
        return f"br i1 {self.cond}, label %{self.then}, label %{self.other}"

    @property
    def successors(self):
        return (self.then, self.other)


@dataclass(frozen=True)
class Ret:
    width: int
    value: Value

    def __str__(self):
        return f"ret i{self.width} {self.value}"

    successors = ()


@dataclass(frozen=True)
class Unreachable:
    def __str__(self):
        return "unreachable"

    successors = ()


Terminator = Union[Br, CondBr, Ret, Unreachable]


@dataclass(frozen=True)
class Block:
    label: str
    phis: tuple[Phi, ...]
    body: tuple[Instr, ...]
    term: Terminator

    def defs(self):
        """Registers defined here, in textual order."""
        out = [p.dest for p in self.phis]
        out += [i.dest for i in self.body if not isinstance(i, Call)]
        return out


def uses_of(item) -> list[Value]:
    """Operands read by an instruction or terminator (phis excluded)."""
    if isinstance(item, (BinOp, ICmp)):
        return [item.lhs, item.rhs]
    if isinstance(item, Ext):
        return [item.src]
    if isinstance(item, Select):
        return [item.cond, item.then, item.other]
    if isinstance(item, Call):
        return [] if item.arg is None else [item.arg]
    if isinstance(item, CondBr):
        return [item.cond]
    if isinstance(item, Ret):
        return [item.value]
    return []


@dataclass(frozen=True)
class Program:
    blocks: tuple[Block, ...]
    ret_width: int = 32
    registers: dict = field(default_factory=dict, compare=False, hash=False)
    entry: int = 0

    @property
    def labels(self) -> list[str]:
        return [b.label for b in self.blocks]

    def block(self, label: str) -> Block:
        for b in self.blocks:
            if b.label == label:
                return b
        raise KeyError(label)

    def predecessors(self) -> dict[str, list[str]]:
        preds = {b.label: [] for b in self.blocks}
        for b in self.blocks:
            for s in b.term.successors:
                if b.label not in preds[s]:
                    preds[s].append(b.label)
        return preds

    def def_block(self) -> dict[str, str]:
        out = {}
        for b in self.blocks:
            for d in b.defs():
                out[d] = b.label
        return out


def format_program(p: Program) -> str:
    lines = [f"define i{p.ret_width} @main() {{"]
    for b in p.blocks:
        lines.append(f"{b.label}:")
        for item in (*b.phis, *b.body, b.term):
            lines.append(f"  {item}")
    lines.append("}")
    return "\n".join(lines) + "\n"
