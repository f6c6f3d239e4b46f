"""Symbolic state space: block registers ``curr``/``pred`` plus persistent SSA registers."""

from __future__ import annotations

from dataclasses import dataclass

from .mir.ir import Program, Reg, uses_of

CURR = "curr"
PRED = "pred"


@dataclass(frozen=True)
class StateSpace:
    labels: tuple[str, ...]
    block_width: int
    vars: tuple[tuple[str, int], ...]  # persistent registers, definition order
    layout: dict  # name -> (first bit index, width); bit i of a var is index first+i

    @property
    def ok_code(self) -> int:
        return len(self.labels) + 1

    @property
    def error_code(self) -> int:
        return len(self.labels) + 2

    @property
    def n(self) -> int:
        return 2 * self.block_width + sum(w for _, w in self.vars)

    @property
    def enc(self) -> dict[str, int]:
        return {lbl: i + 1 for i, lbl in enumerate(self.labels)}

    @property
    def var_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.vars)

    def width(self, name: str) -> int:
        return self.layout[name][1]

    def is_state(self, reg: str) -> bool:
        return reg in self.layout and reg not in (CURR, PRED)

    def decode_block(self, code: int) -> str:
        """Label for ``code``; ``"ok"``/``"error"`` for the sinks, ``"invalid"`` otherwise."""
        if 1 <= code <= len(self.labels):
            return self.labels[code - 1]
        if code == self.ok_code:
            return "ok"
        if code == self.error_code:
            return "error"
        return "invalid"

    def dump(self) -> str:
        lines = []
        for name, (lo, w) in self.layout.items():
            lines.append(f"{name} {w} {lo}..{lo + w - 1}")
        return "\n".join(lines) + "\n"

    def pack(self, curr: int, pred: int, values: dict[str, int]) -> list[bool]:
        """Bit vector (index 0 = state bit 1) for a concrete state."""
        bits = [False] * self.n
        for name, val in ((CURR, curr), (PRED, pred), *values.items()):
            lo, w = self.layout[name]
            for i in range(w):
                bits[lo - 1 + i] = bool((val >> i) & 1)
        return bits

    def unpack(self, bits) -> tuple[int, int, dict[str, int]]:
        def get(name):
            lo, w = self.layout[name]
            return sum(1 << i for i in range(w) if bits[lo - 1 + i])
        return get(CURR), get(PRED), {name: get(name) for name in self.var_names}


def block_width_for(num_blocks: int) -> int:
    """Smallest width holding codes 1..num_blocks+2."""
    return (num_blocks + 2).bit_length()


def persistent_registers(program: Program) -> list[str]:
    """Registers whose values must survive a transition.

    A register persists when it is read in a block other than the one defining
    it, or when it feeds a phi (a phi reads the value left by the previous
    transition, also around a self loop).
    """
    def_block = program.def_block()
    keep = set()
    for b in program.blocks:
        for phi in b.phis:
            for v, _ in phi.incoming:
                if isinstance(v, Reg):
                    keep.add(v.name)
        for item in (*b.body, b.term):
            for v in uses_of(item):
                if isinstance(v, Reg) and def_block[v.name] != b.label:
                    keep.add(v.name)
    order = [d for b in program.blocks for d in b.defs()]
    return [r for r in order if r in keep]


def build_state_space(program: Program) -> StateSpace:
    labels = tuple(program.labels)
    bw = block_width_for(len(labels))
    names = persistent_registers(program)
    vars_ = tuple((r, program.registers[r]) for r in names)
    layout = {CURR: (1, bw), PRED: (bw + 1, bw)}
    nxt = 2 * bw + 1
    for name, w in vars_:
        layout[name] = (nxt, w)
        nxt += w
    return StateSpace(labels, bw, vars_, layout)


def decode_block(space: StateSpace, code: int) -> str:
    return space.decode_block(code)
