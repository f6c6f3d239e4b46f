"""Exhaustive small-width checks shared by ``selftest`` and the test-suite."""

from __future__ import annotations

import random

from . import bvir as B
from .bitblast import FALSE, TRUE, CnfBuilder
from .sat import SAT, Solver
from .mir.interp import signed_overflows


class CircuitProbe:
    """Blast a term over free variables once, then read its value for given inputs."""

    def __init__(self, term: B.Term, inputs: dict):
        self.inputs = inputs  # name -> width
        layout, nxt = {}, 1
        for name, w in inputs.items():
            layout[name] = list(range(nxt, nxt + w))
            nxt += w
        self.layout = layout
        cb = CnfBuilder(lambda name, w, primed: layout[name], nxt)
        out = cb.term(term)
        self.out = out if isinstance(out, list) else [out]
        self.solver = Solver()
        self.solver.ensure_vars(cb.next_var)
        for c in cb.clauses:
            self.solver.add_clause(c)

    def __call__(self, **values) -> int:
        assume = []
        for name, bits in self.layout.items():
            v = values[name]
            assume += [b if v >> i & 1 else -b for i, b in enumerate(bits)]
        res = self.solver.solve(assume)
        if res.status != SAT:
            raise AssertionError("circuit has no model for fixed inputs")
        total = 0
        for i, l in enumerate(self.out):
            bit = l == TRUE or (l != FALSE and res.value(l))
            total |= bit << i
        return total


def overflow_mismatches(op: str, width: int, overflow=None) -> list:
    """Operand pairs where the blasted overflow condition disagrees with the range check."""
    overflow = overflow or B.overflow_condition
    a, b = B.var("a", width), B.var("b", width)
    probe = CircuitProbe(overflow(op, a, b), {"a": width, "b": width})
    bad = []
    for x in range(1 << width):
        for y in range(1 << width):
            if bool(probe(a=x, b=y)) != signed_overflows(op, x, y, width):
                bad.append((x, y))
    return bad


BV_OPS = ("add", "sub", "mul", "udiv", "urem", "sdiv", "srem", "and", "or", "xor",
          "shl", "lshr", "ashr")


def blaster_mismatches(op: str, width: int) -> list:
    a, b = B.var("a", width), B.var("b", width)
    probe = CircuitProbe(B.bv(op, a, b), {"a": width, "b": width})
    bad = []
    for x in range(1 << width):
        for y in range(1 << width):
            if probe(a=x, b=y) != B._fold_bv(op, x, y, width):
                bad.append((x, y))
    return bad


def cmp_mismatches(pred: str, width: int) -> list:
    a, b = B.var("a", width), B.var("b", width)
    probe = CircuitProbe(B.icmp(pred, a, b), {"a": width, "b": width})
    bad = []
    for x in range(1 << width):
        for y in range(1 << width):
            want = B.evaluate(B.icmp(pred, B.const(x, width), B.const(y, width)), {})
            if probe(a=x, b=y) != want:
                bad.append((x, y))
    return bad


def random_3cnf(rng: random.Random, nvars: int, nclauses: int):
    out = []
    for _ in range(nclauses):
        vs = rng.sample(range(1, nvars + 1), min(3, nvars))
        out.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return out


def _column(i: int, nvars: int) -> int:
    """Truth-table column of variable i+1 over all 2**nvars assignments."""
    half = 1 << i
    m, span = ((1 << half) - 1) << half, 2 * half
    while span < (1 << nvars):
        m |= m << span
        span *= 2
    return m


def brute_force_sat(nvars: int, clauses) -> bool:
    """Enumerate all assignments at once, one bit per assignment."""
    full = (1 << (1 << nvars)) - 1
    cols = [_column(i, nvars) for i in range(nvars)]
    acc = full
    for c in clauses:
        cl = 0
        for l in c:
            col = cols[abs(l) - 1]
            cl |= col if l > 0 else full ^ col
        acc &= cl
        if not acc:
            return False
    return True


def model_satisfies(model, clauses) -> bool:
    return all(any(model[abs(l)] == (l > 0) for l in c) for c in clauses)


def sat_mismatches(count: int, seed: int = 0, max_vars: int = 20) -> list:
    """Random 3-CNF instances where the solver disagrees with enumeration or returns a bad model."""
    rng = random.Random(seed)
    bad = []
    for i in range(count):
        n = rng.randint(3, max_vars)
        m = int(n * rng.uniform(3.0, 5.5))
        cnf = random_3cnf(rng, n, m)
        s = Solver()
        s.ensure_vars(n)
        for c in cnf:
            s.add_clause(c)
        res = s.solve()
        expect = brute_force_sat(n, cnf)
        if (res.status == SAT) != expect:
            bad.append((i, "verdict"))
        elif res.status == SAT and not model_satisfies(res.model, cnf):
            bad.append((i, "model"))
    return bad
