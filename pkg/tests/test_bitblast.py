import itertools
import random

import pytest

from bvreach import bvir as B
from bvreach import checks, dimspec, fixtures
from bvreach.bitblast import FALSE, TRUE, CnfBuilder, blast, blast_system
from bvreach.encoder import encode_program
from bvreach.mir import parse
from bvreach.sat import SAT, UNSAT, Solver


def system_of(name):
    return encode_program(parse(fixtures.load(name)))


def section_solver(clauses, nvars):
    s = Solver()
    s.ensure_vars(nvars)
    for c in clauses:
        s.add_clause(c)
    return s


def assign(space, env, primed_offset=0):
    lits = []
    for name, (lo, w) in space.layout.items():
        v = env[name]
        lits += [(lo + i + primed_offset) * (1 if v >> i & 1 else -1) for i in range(w)]
    return lits


def all_envs(space):
    names = list(space.layout)
    ranges = [range(1 << space.layout[n][1]) for n in names]
    for vals in itertools.product(*ranges):
        yield dict(zip(names, vals))


@pytest.mark.parametrize("name", ["overflow_i4", "bug_odd", "safe_even"])
@pytest.mark.parametrize("tag", ["i", "u", "g"])
def test_state_formulas_exhaustive(name, tag):
    system = system_of(name)
    space = system.space
    assert space.n <= 14
    problem = blast_system(system)
    term = {"i": system.init, "u": system.univ, "g": system.goal}[tag]
    solver = section_solver(problem.section(tag), problem.n)
    for env in all_envs(space):
        got = solver.solve(assign(space, env)).status == SAT
        assert got == bool(B.evaluate(term, env)), env


@pytest.mark.parametrize("name", ["overflow_i4", "bug_toggle", "bug_overflow"])
def test_transition_sampled(name):
    system = system_of(name)
    space = system.space
    problem = blast_system(system)
    solver = section_solver(problem.t, 2 * problem.n)
    rng = random.Random(1)
    envs = list(all_envs(space))
    checked = 0
    for _ in range(1500):
        cur = rng.choice(envs)
        # half the time take the real successor so that true cases are exercised
        if rng.random() < 0.5:
            nxt = _successor_env(system, cur) or rng.choice(envs)
        else:
            nxt = rng.choice(envs)
        want = bool(B.evaluate(system.trans, cur, nxt))
        got = solver.solve(assign(space, cur) + assign(space, nxt, problem.n)).status == SAT
        assert got == want, (cur, nxt)
        checked += want
    assert checked > 100


def _successor_env(system, cur):
    for t in system.transitions:
        if t.source == cur["curr"] and B.evaluate(t.guard, cur):
            ups = t.update_map()
            out = {"curr": t.target, "pred": t.source}
            for n, _ in system.space.vars:
                out[n] = B.evaluate(ups[n], cur) if n in ups else cur[n]
            return out
    return None


@pytest.mark.parametrize("name", ["overflow_i4", "bug_pair"])
def test_aux_functionally_determined(name):
    problem = blast_system(system_of(name))
    space = system_of(name).space
    rng = random.Random(7)
    for tag in ("i", "u", "g", "t"):
        clauses = problem.section(tag)
        width = 2 * problem.n if tag == "t" else problem.n
        state = set(range(1, problem.s + 1))
        if tag == "t":
            state |= {v + problem.n for v in state}
        for _ in range(20):
            fixed = [v if rng.random() < 0.5 else -v for v in sorted(state)]
            s = section_solver(clauses, width)
            r = s.solve(fixed)
            if r.status != SAT:
                continue
            # other sections' aux blocks are simply absent from this one
            used = {abs(l) for c in clauses for l in c}
            aux = sorted(used - state)
            if not aux:
                continue
            s.add_clause([-v if r.value(v) else v for v in aux])
            assert s.solve(fixed).status == UNSAT
    assert space.n == problem.s


def test_curr_equals_one_fixes_bits():
    layout = {"curr": (1, 4)}
    clauses, _ = blast(B.Eq(B.var("curr", 4), B.const(1, 4)), layout)
    s = section_solver(clauses, 8)
    r = s.solve()
    assert r.status == SAT
    assert [r.value(i) for i in range(1, 5)] == [True, False, False, False]
    for v in range(16):
        lits = [(i + 1) * (1 if v >> i & 1 else -1) for i in range(4)]
        assert (s.solve(lits).status == SAT) == (v == 1)


@pytest.mark.parametrize("op", checks.BV_OPS)
def test_blaster_ops_4bit(op):
    assert checks.blaster_mismatches(op, 4) == []


@pytest.mark.parametrize("op", ["add", "mul", "udiv", "sdiv", "srem", "ashr"])
def test_blaster_ops_random_8bit(op):
    a, b = B.var("a", 8), B.var("b", 8)
    probe = checks.CircuitProbe(B.bv(op, a, b), {"a": 8, "b": 8})
    rng = random.Random(op)
    for _ in range(150):
        x, y = rng.randrange(256), rng.randrange(256)
        assert probe(a=x, b=y) == B.evaluate(B.bv(op, a, b), {"a": x, "b": y})


def test_ext_and_select_blasting():
    a = B.var("a", 4)
    c = B.bv_to_bool(B.var("c", 1))
    t = B.Ite(c, B.ext("sext", a, 8), B.ext("zext", a, 8))
    probe = checks.CircuitProbe(t, {"a": 4, "c": 1})
    for x in range(16):
        for cv in (0, 1):
            assert probe(a=x, c=cv) == B.evaluate(t, {"a": x, "c": cv})


def test_hash_consing_same_literal():
    layout = {"x": [1, 2, 3, 4], "y": [5, 6, 7, 8]}
    cb = CnfBuilder(lambda n, w, p: layout[n], 9)
    t = B.bv("mul", B.var("x", 4), B.var("y", 4))
    first = cb.term(t)
    n_clauses = len(cb.clauses)
    assert cb.term(B.bv("mul", B.var("x", 4), B.var("y", 4))) == first
    assert len(cb.clauses) == n_clauses


def test_constant_gates_fold():
    cb = CnfBuilder(lambda n, w, p: [], 1)
    assert cb.and2(TRUE, FALSE) == FALSE
    assert cb.or2(5, TRUE) == TRUE
    assert cb.xor2(7, 7) == FALSE
    assert cb.and2(3, -3) == FALSE


@pytest.mark.parametrize("name", fixtures.names())
def test_layout_ranges(name):
    p = blast_system(system_of(name))
    assert p.s == system_of(name).space.n
    for tag in ("i", "u", "g"):
        assert all(0 < abs(l) <= p.n for c in p.section(tag) for l in c)
    assert all(0 < abs(l) <= 2 * p.n for c in p.t for l in c)
    p.validate()


def test_golden_state_bits_and_determinism():
    a = dimspec.write(blast_system(system_of("overflow_golden")))
    b = dimspec.write(blast_system(system_of("overflow_golden")))
    assert a == b
    assert "c state-bits 40" in a


def test_ret_program_problem():
    p = blast_system(encode_program(parse("define i32 @main() { entry: ret i32 0 }")))
    base = [*p.i, *p.u]
    assert section_solver(base, p.n).solve().status == SAT
    assert section_solver(base + list(p.g), p.n).solve().status == UNSAT
