import pytest
from hypothesis import given
from hypothesis import strategies as st

from bvreach import bvir as B
from bvreach import fixtures
from bvreach.mir import parse
from bvreach.statespace import build_state_space


def s(v, w):
    return v - (1 << w) if v >> (w - 1) & 1 else v


def ref(op, a, b, w):
    """SMT-LIB fixed-size semantics written out independently of the library."""
    m = (1 << w) - 1
    if op == "add":
        return (a + b) % (1 << w)
    if op == "sub":
        return (a - b) % (1 << w)
    if op == "mul":
        return (a * b) % (1 << w)
    if op == "udiv":
        return m if b == 0 else a // b
    if op == "urem":
        return a if b == 0 else a % b
    if op == "sdiv":
        sa, sb = s(a, w), s(b, w)
        if sb == 0:
            return m if sa >= 0 else 1
        q = abs(sa) // abs(sb)
        return (q if (sa >= 0) == (sb >= 0) else -q) % (1 << w)
    if op == "srem":
        sa, sb = s(a, w), s(b, w)
        if sb == 0:
            return a
        r = abs(sa) % abs(sb)
        return (r if sa >= 0 else -r) % (1 << w)
    if op == "and":
        return a & b
    if op == "or":
        return a | b
    if op == "xor":
        return a ^ b
    if op == "shl":
        return 0 if b >= w else (a << b) & m
    if op == "lshr":
        return 0 if b >= w else a >> b
    if op == "ashr":
        return (s(a, w) >> min(b, w)) % (1 << w)
    raise ValueError(op)


OPS = ["add", "sub", "mul", "udiv", "urem", "sdiv", "srem", "and", "or", "xor",
       "shl", "lshr", "ashr"]


def test_unsigned_wrap():
    t = B.bv("add", B.var("x", 32), B.const(2, 32))
    assert B.evaluate(t, {"x": 4294967294}) == 0


def test_sub_exhaustive_4bit():
    x, y = B.var("x", 4), B.var("y", 4)
    t = B.bv("sub", x, y)
    for a in range(16):
        for b in range(16):
            assert B.evaluate(t, {"x": a, "y": b}) == (a - b) % 16


@pytest.mark.parametrize("op", OPS)
def test_ops_exhaustive_4bit(op):
    t = B.bv(op, B.var("x", 4), B.var("y", 4))
    for a in range(16):
        for b in range(16):
            assert B.evaluate(t, {"x": a, "y": b}) == ref(op, a, b, 4), (a, b)


@given(st.sampled_from(OPS), st.sampled_from([8, 16, 32]), st.data())
def test_ops_random_widths(op, w, data):
    a = data.draw(st.integers(0, (1 << w) - 1))
    b = data.draw(st.integers(0, (1 << w) - 1))
    t = B.bv(op, B.var("x", w), B.var("y", w))
    assert B.evaluate(t, {"x": a, "y": b}) == ref(op, a, b, w)
    # constant folding agrees with evaluation
    assert B.bv(op, B.const(a, w), B.const(b, w)).value == ref(op, a, b, w)


def test_ite_true_picks_first():
    a, b = B.var("a", 8), B.var("b", 8)
    assert B.Ite(B.TRUE, a, b) is a
    c = B.var("c", 8)
    t = B.Ite(B.cmp("eq", c, B.const(0, 8)), a, b)
    assert B.evaluate(t, {"a": 3, "b": 4, "c": 0}) == 3


def test_ite_definition_exhaustive():
    # x = ite(c, y, z)  <=>  (c ∧ x = y) ∨ (¬c ∧ x = z), all 3-bit values
    x, y, z = (B.var(n, 3) for n in "xyz")
    c = B.var("c", 0)
    lhs = B.Eq(x, B.Ite(c, y, z))
    rhs = B.Or(B.And(c, B.Eq(x, y)), B.And(B.Not(c), B.Eq(x, z)))
    for cv in (0, 1):
        for xv in range(8):
            for yv in range(8):
                for zv in range(8):
                    env = {"x": xv, "y": yv, "z": zv, "c": cv}
                    assert B.evaluate(lhs, env) == B.evaluate(rhs, env)


@pytest.mark.parametrize("pred", ["eq", "ne", "ugt", "uge", "ult", "ule",
                                  "sgt", "sge", "slt", "sle"])
def test_icmp_exhaustive(pred):
    import operator
    ops = {"eq": operator.eq, "ne": operator.ne, "gt": operator.gt, "ge": operator.ge,
           "lt": operator.lt, "le": operator.le}
    t = B.icmp(pred, B.var("x", 4), B.var("y", 4))
    for a in range(16):
        for b in range(16):
            if pred in ("eq", "ne"):
                want = ops[pred](a, b)
            elif pred[0] == "u":
                want = ops[pred[1:]](a, b)
            else:
                want = ops[pred[1:]](s(a, 4), s(b, 4))
            assert B.evaluate(t, {"x": a, "y": b}) == int(want)


def test_ext():
    x = B.var("x", 4)
    assert B.evaluate(B.ext("sext", x, 8), {"x": 0b1010}) == 0b11111010
    assert B.evaluate(B.ext("zext", x, 8), {"x": 0b1010}) == 0b1010
    assert B.ext("zext", x, 4) is x
    with pytest.raises(ValueError):
        B.ext("zext", x, 2)


def test_bit_at_bounds():
    x = B.var("x", 4)
    assert B.evaluate(B.sign_bit(x), {"x": 8}) == 1
    with pytest.raises(ValueError):
        B.bit_at(x, 4)


def range_check(op, a, b, w):
    lo, hi = -(1 << (w - 1)), (1 << (w - 1)) - 1
    sa, sb = s(a, w), s(b, w)
    if op == "sdiv":
        return sa == lo and sb == -1
    r = {"add": sa + sb, "sub": sa - sb, "mul": sa * sb}[op]
    return not lo <= r <= hi


@pytest.mark.parametrize("op", ["add", "sub", "mul", "sdiv"])
@pytest.mark.parametrize("w", [4, 5])
def test_overflow_condition_eval_exhaustive(op, w):
    t = B.overflow_condition(op, B.var("a", w), B.var("b", w))
    for a in range(1 << w):
        for b in range(1 << w):
            assert B.evaluate(t, {"a": a, "b": b}) == range_check(op, a, b, w), (a, b)


def test_overflow_examples():
    a, b = B.var("a", 4), B.var("b", 4)
    assert B.evaluate(B.overflow_condition("add", a, b), {"a": 7, "b": 1}) == 1
    assert B.evaluate(B.overflow_condition("sdiv", a, b), {"a": 8, "b": 15}) == 1
    # 1 + (-2) does not overflow
    assert B.evaluate(B.overflow_condition("add", a, b), {"a": 1, "b": 14}) == 0
    for op in ("add", "sub", "mul"):
        for w in (2, 8, 32):
            t = B.overflow_condition(op, B.var("a", w), B.var("b", w))
            assert B.evaluate(t, {"a": 0, "b": 0}) == 0


def test_hash_consing():
    x = B.var("x", 8)
    assert B.bv("add", x, B.const(1, 8)) is B.bv("add", x, B.const(1, 8))
    assert B.prime(x) is B.var("x", 8, True)


def test_width_mismatch_rejected():
    with pytest.raises(ValueError):
        B.bv("add", B.var("x", 8), B.var("y", 4))


def test_same_frame():
    space = build_state_space(parse(fixtures.load("overflow_golden")))
    t = B.var("%tmp2", 32)
    assert B.same_frame(space, set()) is B.Eq(B.prime(t), t)
    assert B.same_frame(space, {"%tmp2"}) is B.TRUE


def test_evaluate_pure():
    t = B.bv("mul", B.var("x", 8), B.var("x", 8, True))
    env, nxt = {"x": 7}, {"x": 9}
    assert B.evaluate(t, env, nxt) == B.evaluate(t, env, nxt) == 63


def test_smtlib_text():
    t = B.cmp("ule", B.const(10, 32), B.var("%tmp2", 32))
    assert B.to_smtlib(t) == "(bvule (_ bv10 32) |%tmp2|)"
