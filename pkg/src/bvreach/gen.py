"""Random small programs for differential testing against the explicit-state oracle."""

from __future__ import annotations

import random

from .mir import parse
from .statespace import build_state_space

_SAFE_OPS = ("add", "sub", "mul", "and", "or", "xor", "shl", "lshr", "ashr", "udiv", "urem",
             "sdiv", "srem")
_PREDS = ("eq", "ne", "ugt", "uge", "ult", "ule", "sgt", "sge", "slt", "sle")


def _program_text(rng: random.Random, width: int, nvars: int) -> str:
    w = width
    mask = (1 << w) - 1
    out = ["define i32 @main() {", "entry:", "  br label %head", "head:"]
    names = [f"%v{i}" for i in range(nvars)]
    for i, v in enumerate(names):
        out.append(f"  {v} = phi i{w} [ {rng.randrange(1 << w)}, %entry ], [ {v}.n, %latch ]")
    out.append(f"  %g = icmp {rng.choice(_PREDS)} i{w} {rng.choice(names)}, {rng.randrange(1 << w)}")
    out.append("  br i1 %g, label %body, label %exit")

    out.append("body:")
    pool = list(names)
    tmp = 0

    def operand():
        if rng.random() < 0.3:
            return str(rng.randrange(1 << w))
        return rng.choice(pool)

    def fresh():
        nonlocal tmp
        tmp += 1
        return f"%t{tmp}"

    for _ in range(rng.randint(1, 3)):
        op = rng.choice(_SAFE_OPS)
        d = fresh()
        if op in ("udiv", "urem", "sdiv", "srem"):
            rhs = str(rng.randrange(1, mask + 1))  # nonzero constant divisor
        else:
            rhs = operand()
        nsw = " nsw" if op in ("add", "sub", "mul") and rng.random() < 0.35 else ""
        out.append(f"  {d} = {op}{nsw} i{w} {rng.choice(pool)}, {rhs}")
        pool.append(d)
    if rng.random() < 0.4:
        c, s = fresh(), fresh()
        out.append(f"  {c} = icmp {rng.choice(_PREDS)} i{w} {rng.choice(pool)}, {operand()}")
        out.append(f"  {s} = select i1 {c}, i{w} {operand()}, i{w} {operand()}")
        pool.append(s)
    if rng.random() < 0.25:
        c, z = fresh(), fresh()
        out.append(f"  {c} = icmp {rng.choice(_PREDS)} i{w} {rng.choice(pool)}, {operand()}")
        out.append(f"  {z} = {rng.choice(('zext', 'sext'))} i1 {c} to i{w}")
        pool.append(z)
    if rng.random() < 0.3:
        c = fresh()
        out.append(f"  {c} = icmp {rng.choice(_PREDS)} i{w} {rng.choice(pool)}, {operand()}")
        fn = rng.choice(("__VERIFIER_assume", "__VERIFIER_assert"))
        out.append(f"  call void @{fn}(i1 {c})")
    brk = rng.random() < 0.3
    if brk:
        c = fresh()
        out.append(f"  {c} = icmp {rng.choice(_PREDS)} i{w} {rng.choice(pool)}, {operand()}")
        out.append(f"  br i1 {c}, label %exit, label %latch")
    else:
        out.append("  br label %latch")

    out.append("latch:")
    body_vals = pool[nvars:] or names
    for v in names:
        src = rng.choice(body_vals + [v])
        if rng.random() < 0.5:
            out.append(f"  {v}.n = {rng.choice(('add', 'xor', 'sub'))} i{w} {src}, "
                       f"{rng.randrange(1, 1 << w)}")
        else:
            out.append(f"  {v}.n = or i{w} {src}, 0")
    out.append("  br label %head")

    out.append("exit:")
    c = "%ok"
    out.append(f"  {c} = icmp {rng.choice(_PREDS)} i{w} {rng.choice(names)}, {rng.randrange(1 << w)}")
    if rng.random() < 0.5:
        out.append(f"  call void @__VERIFIER_assert(i1 {c})")
        out.append("  ret i32 0")
        out.append("}")
    else:
        out.append(f"  br i1 {c}, label %done, label %fail")
        out.append("fail:")
        out.append("  call void @__VERIFIER_error()")
        out.append("  unreachable")
        out.append("done:")
        out.append("  ret i32 0")
        out.append("}")
    return "\n".join(out) + "\n"


def random_program(seed: int, max_bits: int = 30):
    """(text, Program) for a loop program with at most ``max_bits`` state bits."""
    rng = random.Random(seed)
    while True:
        text = _program_text(rng, rng.choice((3, 4)), rng.randint(1, 3))
        prog = parse(text)
        if build_state_space(prog).n <= max_bits:
            return text, prog
