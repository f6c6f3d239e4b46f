"""Hash-consed bit-vector / boolean terms with constant folding.

Width 0 marks a boolean term. Variables carry a ``primed`` flag so one term
language covers both the current and the next state.
"""

from __future__ import annotations

BOOL = 0

_BV_BINARY = ("add", "sub", "mul", "udiv", "urem", "sdiv", "srem",
              "bvand", "bvor", "bvxor", "shl", "lshr", "ashr")
_BV_ALIAS = {"and": "bvand", "or": "bvor", "xor": "bvxor"}
_CMP = ("eq", "ult", "ule", "slt", "sle")


class Term:
    __slots__ = ("op", "args", "width", "params", "__weakref__")
    _table: dict = {}

    def __new__(cls, op, args=(), width=BOOL, params=()):
        key = (op, tuple(id(a) for a in args), width, params)
        hit = cls._table.get(key)
        if hit is not None:
            return hit
        t = object.__new__(cls)
        t.op, t.args, t.width, t.params = op, tuple(args), width, params
        cls._table[key] = t
        return t

    @property
    def is_const(self):
        return self.op == "const"

    @property
    def value(self):
        return self.params[0]

    def __repr__(self):
        return to_smtlib(self)

    # operator sugar used by tests and the encoder
    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


def _mask(w):
    return (1 << w) - 1


def _signed(v, w):
    return v - (1 << w) if v >> (w - 1) & 1 else v


# ---------------------------------------------------------------- leaves


def const(value: int, width: int) -> Term:
    if width == BOOL:
        return Term("const", (), BOOL, (1 if value else 0,))
    return Term("const", (), width, (value & _mask(width),))


TRUE = const(1, BOOL)
FALSE = const(0, BOOL)


def var(name: str, width: int, primed: bool = False) -> Term:
    return Term("var", (), width, (name, primed))


def prime(t: Term) -> Term:
    """Rename every variable to its next-state copy."""
    cache = {}

    def go(x):
        if x in cache:
            return cache[x]
        if x.op == "var":
            r = var(x.params[0], x.width, True)
        elif x.args:
            r = Term(x.op, tuple(go(a) for a in x.args), x.width, x.params)
        else:
            r = x
        cache[x] = r
        return r
    return go(t)


# ---------------------------------------------------------------- boolean


def Not(a: Term) -> Term:
    if a.is_const:
        return FALSE if a.value else TRUE
    if a.op == "not":
        return a.args[0]
    return Term("not", (a,))


def And(*xs) -> Term:
    out = []
    seen = set()
    for x in _flatten("and", xs):
        if x.is_const:
            if not x.value:
                return FALSE
            continue
        if id(x) in seen:
            continue
        if x.op == "not" and id(x.args[0]) in seen:
            return FALSE
        if id(Not(x)) in seen:
            return FALSE
        seen.add(id(x))
        out.append(x)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return Term("and", tuple(out))


def Or(*xs) -> Term:
    return Not(And(*(Not(x) for x in _flatten("or", xs))))


def Implies(a: Term, b: Term) -> Term:
    if a.is_const:
        return b if a.value else TRUE
    if b.is_const and b.value:
        return TRUE
    return Term("implies", (a, b))


def _flatten(op, xs):
    for x in xs:
        if isinstance(x, (list, tuple)):
            yield from _flatten(op, x)
        elif x.op == op:
            yield from x.args
        else:
            yield x


def Ite(c: Term, a: Term, b: Term) -> Term:
    if a.width != b.width:
        raise ValueError("ite arms differ in width")
    if c.is_const:
        return a if c.value else b
    if a is b:
        return a
    if c.op == "not":
        return Ite(c.args[0], b, a)
    if a.width == BOOL and a.is_const and b.is_const:
        return c if a.value else Not(c)
    return Term("ite", (c, a, b), a.width)


# ---------------------------------------------------------------- bit-vectors


def _check(a, b):
    if a.width != b.width or a.width == BOOL:
        raise ValueError(f"width mismatch {a.width} vs {b.width}")


def bv(op: str, a: Term, b: Term) -> Term:
    _check(a, b)
    op = _BV_ALIAS.get(op, op)
    if a.is_const and b.is_const:
        return const(_fold_bv(op, a.value, b.value, a.width), a.width)
    if op in ("add", "bvor", "bvxor", "shl", "lshr", "ashr", "sub") and b.is_const and b.value == 0:
        return a
    if op in ("add", "bvor", "bvxor") and a.is_const and a.value == 0:
        return b
    if op in ("bvand", "mul") and b.is_const and b.value == 0:
        return b
    if op in ("bvand", "mul") and a.is_const and a.value == 0:
        return a
    return Term(op, (a, b), a.width)


def _fold_bv(op, a, b, w):
    m = _mask(w)
    op = _BV_ALIAS.get(op, op)
    if op == "add":
        return (a + b) & m
    if op == "sub":
        return (a - b) & m
    if op == "mul":
        return (a * b) & m
    if op == "udiv":
        return a // b if b else m
    if op == "urem":
        return a % b if b else a
    if op == "sdiv":
        if b == 0:
            return m if not a >> (w - 1) & 1 else 1
        sa, sb = _signed(a, w), _signed(b, w)
        q = abs(sa) // abs(sb)
        return (q if (sa < 0) == (sb < 0) else -q) & m
    if op == "srem":
        if b == 0:
            return a
        sa, sb = _signed(a, w), _signed(b, w)
        r = abs(sa) % abs(sb)
        return (-r if sa < 0 else r) & m
    if op == "bvand":
        return a & b
    if op == "bvor":
        return a | b
    if op == "bvxor":
        return a ^ b
    if op == "shl":
        return (a << b) & m if b < w else 0
    if op == "lshr":
        return a >> b if b < w else 0
    if op == "ashr":
        return (_signed(a, w) >> min(b, w - 1)) & m
    raise ValueError(op)


def cmp(op: str, a: Term, b: Term) -> Term:
    _check(a, b)
    if a.is_const and b.is_const:
        return const(_fold_cmp(op, a.value, b.value, a.width), BOOL)
    if a is b:
        return const(op in ("eq", "ule", "sle"), BOOL)
    if op == "eq":
        if a.is_const:
            a, b = b, a
        # (ite c k1 k2) = k  with constant arms reduces to c, not c or a constant
        if b.is_const and a.op == "ite" and a.args[1].is_const and a.args[2].is_const:
            hit1, hit2 = a.args[1] is b, a.args[2] is b
            return Ite(a.args[0], const(hit1, BOOL), const(hit2, BOOL))
    return Term(op, (a, b))


def _fold_cmp(op, a, b, w):
    if op == "eq":
        return a == b
    if op == "ult":
        return a < b
    if op == "ule":
        return a <= b
    sa, sb = _signed(a, w), _signed(b, w)
    return sa < sb if op == "slt" else sa <= sb


def Eq(a, b):
    if a.width != BOOL:
        return cmp("eq", a, b)
    if b.width != BOOL:
        raise ValueError("width mismatch")
    if b.is_const:
        return a if b.value else Not(a)
    if a.is_const:
        return b if a.value else Not(b)
    if a is b:
        return TRUE
    return Not(Term("xor1", (a, b)))


def icmp(pred: str, a: Term, b: Term) -> Term:
    """LLVM predicate as a boolean term."""
    if pred == "eq":
        return cmp("eq", a, b)
    if pred == "ne":
        return Not(cmp("eq", a, b))
    sign = "s" if pred[0] == "s" else "u"
    rel = pred[1:]
    if rel == "lt":
        return cmp(sign + "lt", a, b)
    if rel == "le":
        return cmp(sign + "le", a, b)
    if rel == "gt":
        return cmp(sign + "lt", b, a)
    return cmp(sign + "le", b, a)


def ext(kind: str, a: Term, to_width: int) -> Term:
    if to_width < a.width:
        raise ValueError(f"{kind} cannot narrow i{a.width} to i{to_width}")
    if to_width == a.width:
        return a
    if a.is_const:
        v = a.value if kind == "zext" else _signed(a.value, a.width)
        return const(v, to_width)
    return Term(kind, (a,), to_width)


def bool_to_bv(c: Term) -> Term:
    return Ite(c, const(1, 1), const(0, 1))


def bv_to_bool(a: Term) -> Term:
    """Nonzero test."""
    return Not(cmp("eq", a, const(0, a.width)))


def bit_at(a: Term, index: int) -> Term:
    if not 0 <= index < a.width:
        raise ValueError("bit index out of range")
    if a.is_const:
        return const(a.value >> index & 1, BOOL)
    return Term("bit", (a,), BOOL, (index,))


def sign_bit(a: Term) -> Term:
    return bit_at(a, a.width - 1)


def overflow_condition(op: str, a: Term, b: Term) -> Term:
    """Condition under which signed ``op`` on ``a``, ``b`` leaves the representable range."""
    w = a.width
    if op == "add":
        r = bv("add", a, b)
        return And(Eq(sign_bit(a), sign_bit(b)), Not(Eq(sign_bit(r), sign_bit(a))))
    if op == "sub":
        r = bv("sub", a, b)
        return And(Not(Eq(sign_bit(a), sign_bit(b))), Not(Eq(sign_bit(r), sign_bit(a))))
    if op == "mul":
        p = bv("mul", ext("sext", a, 2 * w), ext("sext", b, 2 * w))
        hi = const((1 << (w - 1)) - 1, 2 * w)
        lo = const(-(1 << (w - 1)), 2 * w)
        return Or(cmp("slt", hi, p), cmp("slt", p, lo))
    if op == "sdiv":
        return And(cmp("eq", a, const(1 << (w - 1), w)), cmp("eq", b, const(-1, w)))
    raise ValueError(op)


# ---------------------------------------------------------------- evaluation


def evaluate(t: Term, cur: dict, nxt: dict | None = None) -> int:
    """Value of ``t`` (0/1 for booleans) under variable assignments."""
    memo = {}

    def go(x):
        r = memo.get(id(x))
        if r is not None:
            return r
        op = x.op
        if op == "const":
            r = x.value
        elif op == "var":
            name, primed = x.params
            r = (nxt if primed else cur)[name] & _mask(x.width) if x.width else (nxt if primed else cur)[name]
        elif op == "not":
            r = 1 - go(x.args[0])
        elif op == "and":
            r = int(all(go(a) for a in x.args))
        elif op == "implies":
            r = int(not go(x.args[0]) or go(x.args[1]))
        elif op == "xor1":
            r = go(x.args[0]) ^ go(x.args[1])
        elif op == "ite":
            r = go(x.args[1]) if go(x.args[0]) else go(x.args[2])
        elif op in _BV_BINARY:
            r = _fold_bv(op, go(x.args[0]), go(x.args[1]), x.width)
        elif op in _CMP:
            a = x.args[0]
            r = int(_fold_cmp(op, go(a), go(x.args[1]), a.width))
        elif op == "bit":
            r = go(x.args[0]) >> x.params[0] & 1
        elif op == "zext":
            r = go(x.args[0])
        elif op == "sext":
            a = x.args[0]
            r = _signed(go(a), a.width) & _mask(x.width)
        else:
            raise ValueError(op)
        memo[id(x)] = r
        return r
    return go(t)


def variables(t: Term) -> set:
    out, stack, seen = set(), [t], set()
    while stack:
        x = stack.pop()
        if id(x) in seen:
            continue
        seen.add(id(x))
        if x.op == "var":
            out.add(x)
        stack.extend(x.args)
    return out


# ---------------------------------------------------------------- printing

_SMT = {"and": "and", "not": "not", "implies": "=>", "xor1": "xor", "ite": "ite",
        "add": "bvadd", "sub": "bvsub", "mul": "bvmul", "udiv": "bvudiv",
        "urem": "bvurem", "sdiv": "bvsdiv", "srem": "bvsrem", "bvand": "bvand",
        "bvor": "bvor", "bvxor": "bvxor", "shl": "bvshl", "lshr": "bvlshr",
        "ashr": "bvashr", "eq": "=", "ult": "bvult", "ule": "bvule",
        "slt": "bvslt", "sle": "bvsle"}


def to_smtlib(t: Term) -> str:
    op = t.op
    if op == "const":
        if t.width == BOOL:
            return "true" if t.value else "false"
        return f"(_ bv{t.value} {t.width})"
    if op == "var":
        name, primed = t.params
        return f"|{name}{chr(39) if primed else ''}|"
    if op == "bit":
        i = t.params[0]
        return f"(= ((_ extract {i} {i}) {to_smtlib(t.args[0])}) #b1)"
    if op in ("zext", "sext"):
        a = t.args[0]
        kind = "zero_extend" if op == "zext" else "sign_extend"
        return f"((_ {kind} {t.width - a.width}) {to_smtlib(a)})"
    return "(" + _SMT[op] + " " + " ".join(to_smtlib(a) for a in t.args) + ")"


# ---------------------------------------------------------------- state helpers


def state_var(space, name: str, primed: bool = False) -> Term:
    return var(name, space.width(name), primed)


def same_frame(space, assigned) -> Term:
    """Conjunction of ``v' = v`` over persistent registers not in ``assigned``."""
    return And(*(Eq(var(n, w, True), var(n, w)) for n, w in space.vars if n not in assigned))
