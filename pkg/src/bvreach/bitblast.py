"""Tseitin bit-blasting of terms into CNF and assembly of the four DimSpec sections."""

from __future__ import annotations

from . import bvir as B
from .dimspec import DimSpecProblem

TRUE = 1 << 60
FALSE = -TRUE


class CnfBuilder:
    """Gate-level CNF construction with constant folding and structural hashing.

    ``var_bits(name, width, primed)`` supplies the literals of a state variable.
    Fresh variables are numbered from ``first_aux``.
    """

    def __init__(self, var_bits, first_aux: int):
        self.var_bits = var_bits
        self.next_var = first_aux
        self.first_aux = first_aux
        self.clauses: list[tuple[int, ...]] = []
        self.gates: dict = {}
        self.terms: dict = {}

    # -------------------------------------------------------------- gates

    def fresh(self) -> int:
        v = self.next_var
        self.next_var += 1
        return v

    def add(self, *lits):
        out = []
        for l in lits:
            if l == TRUE:
                return
            if l != FALSE:
                out.append(l)
        if not out:
            # unsatisfiable section: keep it visible as a contradiction on a fresh var
            x = self.fresh()
            self.clauses += [(x,), (-x,)]
            return
        self.clauses.append(tuple(out))

    def and2(self, a, b):
        if a == FALSE or b == FALSE or a == -b:
            return FALSE
        if a == TRUE or a == b:
            return b
        if b == TRUE:
            return a
        key = ("and", min(a, b), max(a, b))
        x = self.gates.get(key)
        if x is None:
            x = self.fresh()
            self.clauses += [(-x, a), (-x, b), (x, -a, -b)]
            self.gates[key] = x
        return x

    def and_n(self, lits):
        lits = sorted(set(lits))
        if FALSE in lits:
            return FALSE
        lits = [l for l in lits if l != TRUE]
        seen = set(lits)
        if any(-l in seen for l in lits):
            return FALSE
        if not lits:
            return TRUE
        if len(lits) == 1:
            return lits[0]
        if len(lits) == 2:
            return self.and2(*lits)
        key = ("andn", tuple(lits))
        x = self.gates.get(key)
        if x is None:
            x = self.fresh()
            for l in lits:
                self.clauses.append((-x, l))
            self.clauses.append((x, *(-l for l in lits)))
            self.gates[key] = x
        return x

    def or2(self, a, b):
        return -self.and2(-a, -b)

    def or_n(self, lits):
        return -self.and_n([-l for l in lits])

    def xor2(self, a, b):
        if a in (TRUE, FALSE):
            return -b if a == TRUE else b
        if b in (TRUE, FALSE):
            return -a if b == TRUE else a
        if a == b:
            return FALSE
        if a == -b:
            return TRUE
        neg = (a < 0) != (b < 0)
        a, b = abs(a), abs(b)
        key = ("xor", min(a, b), max(a, b))
        x = self.gates.get(key)
        if x is None:
            x = self.fresh()
            self.clauses += [(-x, a, b), (-x, -a, -b), (x, -a, b), (x, a, -b)]
            self.gates[key] = x
        return -x if neg else x

    def mux(self, c, t, e):
        if c == TRUE:
            return t
        if c == FALSE:
            return e
        if t == e:
            return t
        if t == -e:
            return self.xor2(c, e)
        if t == TRUE or t == c:
            return self.or2(c, e)
        if t == FALSE or t == -c:
            return self.and2(-c, e)
        if e == TRUE or e == -c:
            return self.or2(-c, t)
        if e == FALSE or e == c:
            return self.and2(c, t)
        if c < 0:
            c, t, e = -c, e, t
        key = ("mux", c, t, e)
        x = self.gates.get(key)
        if x is None:
            x = self.fresh()
            self.clauses += [(-c, -t, x), (-c, t, -x), (c, -e, x), (c, e, -x),
                             (-t, -e, x), (t, e, -x)]
            self.gates[key] = x
        return x

    def maj(self, a, b, c):
        for p, q, r in ((a, b, c), (b, c, a), (c, a, b)):
            if p == TRUE:
                return self.or2(q, r)
            if p == FALSE:
                return self.and2(q, r)
        if a == b or a == -b:
            return a if a == b else c
        if a == c or a == -c:
            return a if a == c else b
        if b == c or b == -c:
            return b if b == c else a
        key = ("maj",) + tuple(sorted((a, b, c)))
        x = self.gates.get(key)
        if x is None:
            x = self.fresh()
            self.clauses += [(-x, a, b), (-x, a, c), (-x, b, c),
                             (x, -a, -b), (x, -a, -c), (x, -b, -c)]
            self.gates[key] = x
        return x

    # -------------------------------------------------------------- words

    def const_bits(self, value, width):
        return [TRUE if value >> i & 1 else FALSE for i in range(width)]

    def adder(self, a, b, cin=FALSE):
        out, c = [], cin
        for x, y in zip(a, b):
            out.append(self.xor2(self.xor2(x, y), c))
            c = self.maj(x, y, c)
        return out, c

    def neg(self, a):
        return self.adder([-x for x in a], self.const_bits(0, len(a)), TRUE)[0]

    def sub(self, a, b):
        return self.adder(a, [-x for x in b], TRUE)[0]

    def mul(self, a, b):
        w = len(a)
        acc = [FALSE] * w
        for i, bi in enumerate(b):
            if bi == FALSE:
                continue
            row = [FALSE] * i + [self.and2(aj, bi) for aj in a[: w - i]]
            acc = self.adder(acc, row)[0]
        return acc

    def ult(self, a, b):
        # a < b  iff  a - b borrows, i.e. a + ~b + 1 has no carry out
        return -self.adder(a, [-x for x in b], TRUE)[1]

    def slt(self, a, b):
        return self.ult(a[:-1] + [-a[-1]], b[:-1] + [-b[-1]])

    def eq(self, a, b):
        return self.and_n([-self.xor2(x, y) for x, y in zip(a, b)])

    def is_zero(self, a):
        return self.and_n([-x for x in a])

    def ite(self, c, a, b):
        return [self.mux(c, x, y) for x, y in zip(a, b)]

    def udivrem(self, a, d):
        key = ("divrem", tuple(a), tuple(d))
        hit = self.gates.get(key)
        if hit is not None:
            return hit
        w = len(a)
        if all(l in (TRUE, FALSE) for l in a + d):
            av = sum(1 << i for i, l in enumerate(a) if l == TRUE)
            dv = sum(1 << i for i, l in enumerate(d) if l == TRUE)
            q = self.const_bits(B._fold_bv("udiv", av, dv, w), w)
            r = self.const_bits(B._fold_bv("urem", av, dv, w), w)
            self.gates[key] = (q, r)
            return q, r
        q = [self.fresh() for _ in range(w)]
        r = [self.fresh() for _ in range(w)]
        zero = self.is_zero(d)
        z = [FALSE] * w
        prod = self.mul(q + z, d + z)
        total, _ = self.adder(prod, r + z)
        self.add(zero, self.eq(total, a + z))
        self.add(zero, self.ult(r, d))
        for x in q:
            self.add(-zero, x)
        for x, y in zip(r, a):
            self.add(-zero, -x, y)
            self.add(-zero, x, -y)
        self.gates[key] = (q, r)
        return q, r

    def sdivrem(self, a, b):
        sa, sb = a[-1], b[-1]
        ua = self.ite(sa, self.neg(a), a)
        ub = self.ite(sb, self.neg(b), b)
        q, r = self.udivrem(ua, ub)
        return self.ite(self.xor2(sa, sb), self.neg(q), q), self.ite(sa, self.neg(r), r)

    def shift(self, op, a, b):
        w = len(a)
        fill = a[-1] if op == "ashr" else FALSE
        cur = list(a)
        i = 0
        while (1 << i) < w:
            k = 1 << i
            if op == "shl":
                moved = [FALSE] * k + cur[: w - k]
            else:
                moved = cur[k:] + [fill] * k
            cur = self.ite(b[i], moved, cur)
            i += 1
        big = -self.ult(b, self.const_bits(w, len(b))) if w < (1 << len(b)) else FALSE
        return self.ite(big, [fill] * w, cur)

    # -------------------------------------------------------------- terms

    def lit(self, t: B.Term):
        """Literal of a boolean term."""
        return self.term(t)

    def bits(self, t: B.Term):
        return self.term(t)

    def term(self, t: B.Term):
        hit = self.terms.get(id(t))
        if hit is not None:
            return hit
        stack = [t]
        while stack:
            x = stack[-1]
            pending = [a for a in x.args if id(a) not in self.terms]
            if pending:
                stack.extend(pending)
                continue
            stack.pop()
            if id(x) not in self.terms:
                self.terms[id(x)] = self._node(x)
        return self.terms[id(t)]

    def _node(self, x):
        op, args = x.op, [self.terms[id(a)] for a in x.args]
        if op == "const":
            if x.width == B.BOOL:
                return TRUE if x.value else FALSE
            return self.const_bits(x.value, x.width)
        if op == "var":
            name, primed = x.params
            if x.width == B.BOOL:
                raise ValueError("boolean state variables are not supported")
            return list(self.var_bits(name, x.width, primed))
        if op == "not":
            return -args[0]
        if op == "and":
            return self.and_n(args)
        if op == "implies":
            return self.or2(-args[0], args[1])
        if op == "xor1":
            return self.xor2(*args)
        if op == "ite":
            c, a, b = args
            return self.mux(c, a, b) if x.width == B.BOOL else self.ite(c, a, b)
        if op == "bit":
            return args[0][x.params[0]]
        if op == "eq":
            return self.eq(*args)
        if op == "ult":
            return self.ult(*args)
        if op == "ule":
            return -self.ult(args[1], args[0])
        if op == "slt":
            return self.slt(*args)
        if op == "sle":
            return -self.slt(args[1], args[0])
        if op == "zext":
            a = args[0]
            return a + [FALSE] * (x.width - len(a))
        if op == "sext":
            a = args[0]
            return a + [a[-1]] * (x.width - len(a))
        a, b = args if len(args) == 2 else (None, None)
        if op == "add":
            return self.adder(a, b)[0]
        if op == "sub":
            return self.sub(a, b)
        if op == "mul":
            return self.mul(a, b)
        if op == "udiv":
            return self.udivrem(a, b)[0]
        if op == "urem":
            return self.udivrem(a, b)[1]
        if op == "sdiv":
            return self.sdivrem(a, b)[0]
        if op == "srem":
            return self.sdivrem(a, b)[1]
        if op == "bvand":
            return [self.and2(p, q) for p, q in zip(a, b)]
        if op == "bvor":
            return [self.or2(p, q) for p, q in zip(a, b)]
        if op == "bvxor":
            return [self.xor2(p, q) for p, q in zip(a, b)]
        if op in ("shl", "lshr", "ashr"):
            return self.shift(op, a, b)
        raise ValueError(f"cannot blast {op}")

    # -------------------------------------------------------------- assertion

    def assert_formula(self, f: B.Term):
        """Add clauses forcing ``f``; top-level conjunctions and implications are flattened."""
        for part in _conjuncts(f):
            if part.op == "implies":
                ante = self.lit(part.args[0])
                for c in _conjuncts(part.args[1]):
                    self._assert_under(ante, c)
            else:
                self._assert_under(TRUE, part)

    def _assert_under(self, ante, c):
        if c.op == "eq":
            # bitwise equality as two clauses per bit, no xor gates
            for x, y in zip(self.bits(c.args[0]), self.bits(c.args[1])):
                self.add(-ante, -x, y)
                self.add(-ante, x, -y)
            return
        self.add(-ante, self.lit(c))


def _conjuncts(f):
    if f.op == "and":
        for a in f.args:
            yield from _conjuncts(a)
    else:
        yield f


def blast(f: B.Term, layout: dict):
    """Clauses for ``f`` over a standalone numbering.

    ``layout`` maps variable name to (first bit, width). State bits keep their
    indices, primed copies sit at s + index and aux variables start at 2s + 1.
    Returns (clauses, highest variable used).
    """
    s = sum(w for _, w in layout.values())

    def var_bits(name, width, primed):
        lo, w = layout[name]
        return [lo + i + (s if primed else 0) for i in range(w)]

    cb = CnfBuilder(var_bits, 2 * s + 1)
    cb.assert_formula(f)
    return cb.clauses, cb.next_var - 1


def blast_system(system, *, space=None) -> DimSpecProblem:
    """Blast init, univ, goal and the transition relation into one DimSpec problem.

    Per-step layout: state bits 1..s, then the aux blocks of I, U, G and T.
    Primed references in T live at n + j.
    """
    space = space or system.space
    s = space.n
    layout = space.layout
    sections = []
    for f in (system.init, system.univ, system.goal, system.trans):
        clauses, top = blast(f, layout)
        sections.append((clauses, max(0, top - 2 * s)))
    counts = [aux for _, aux in sections]
    n = s + sum(counts)
    remapped = []
    base = s
    for (clauses, aux), is_t in zip(sections, (False, False, False, True)):
        def mp(l, base=base):
            v = abs(l)
            if v <= s:
                r = v
            elif v <= 2 * s:
                r = n + v - s
            else:
                r = base + v - 2 * s
            return r if l > 0 else -r
        remapped.append([tuple(mp(l) for l in c) for c in clauses])
        base += aux
    variables = [(name, lo, w) for name, (lo, w) in layout.items()]
    return DimSpecProblem(n, *remapped, state_bits=s, variables=variables)


def encode_file(program, *, return_check: bool = False) -> DimSpecProblem:
    from .encoder import encode_program
    return blast_system(encode_program(program, return_check=return_check))
