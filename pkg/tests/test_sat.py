import random

from hypothesis import given, settings
from hypothesis import strategies as st

from bvreach import checks
from bvreach.sat import SAT, UNSAT, Solver, luby, solve_cnf


def test_simple_model():
    s = Solver()
    s.add_clause([1, -2])
    s.add_clause([2])
    r = s.solve()
    assert r.status == SAT and r.value(1) and r.value(2)


def test_empty_clause_makes_unsat_forever():
    s = Solver()
    s.add_clause([1, 2])
    s.add_clause([])
    assert s.solve().status == UNSAT
    assert s.solve([1]).status == UNSAT


def test_activation_literal_pattern():
    # (a0 ∨ g) under ¬a0 forces g; without the assumption the clause is inert
    s = Solver()
    s.add_clause([1, 2])
    s.add_clause([-2, 3])
    r = s.solve([-1])
    assert r.status == SAT and r.value(2)
    s.add_clause([-2])
    assert s.solve([-1]).status == UNSAT
    assert s.solve().status == SAT


def test_core_is_subset_of_assumptions():
    s = Solver()
    s.add_clause([1])
    r = s.solve([-1])
    assert r.status == UNSAT
    assert r.core <= {-1}
    assert r.core


def test_core_is_unsat():
    rng = random.Random(3)
    for _ in range(100):
        n = rng.randint(4, 10)
        cnf = checks.random_3cnf(rng, n, rng.randint(5, 40))
        assumptions = [v if rng.random() < 0.5 else -v for v in rng.sample(range(1, n + 1), 4)]
        r = solve_cnf(cnf, assumptions, n)
        if r.status == UNSAT:
            assert set(r.core) <= set(assumptions)
            assert solve_cnf(cnf, list(r.core), n).status == UNSAT


def test_incremental_with_varying_assumptions():
    rng = random.Random(11)
    for _ in range(40):
        n = rng.randint(5, 12)
        cnf = checks.random_3cnf(rng, n, int(n * 4.2))
        s = Solver()
        for c in cnf:
            s.add_clause(c)
        for _ in range(5):
            lits = [v if rng.random() < 0.5 else -v for v in rng.sample(range(1, n + 1), 3)]
            expect = checks.brute_force_sat(n, cnf + [(l,) for l in lits])
            r = s.solve(lits)
            assert (r.status == SAT) == expect
            if r.status == SAT:
                assert checks.model_satisfies(r.model, cnf)
                assert all(r.value(l) for l in lits)


def test_determinism_under_seed():
    rng = random.Random(5)
    cnf = checks.random_3cnf(rng, 30, 120)
    a = solve_cnf(cnf, (), 30, seed=9)
    b = solve_cnf(cnf, (), 30, seed=9)
    assert a.status == b.status and a.model == b.model


def test_pigeonhole_unsat():
    # 6 pigeons, 5 holes
    p, h = 6, 5
    var = lambda i, j: i * h + j + 1  # noqa: E731
    cnf = [[var(i, j) for j in range(h)] for i in range(p)]
    for j in range(h):
        for a in range(p):
            for b in range(a + 1, p):
                cnf.append([-var(a, j), -var(b, j)])
    assert solve_cnf(cnf, (), p * h).status == UNSAT


def test_conflict_budget_gives_unknown():
    p, h = 8, 7
    var = lambda i, j: i * h + j + 1  # noqa: E731
    cnf = [[var(i, j) for j in range(h)] for i in range(p)]
    for j in range(h):
        for a in range(p):
            for b in range(a + 1, p):
                cnf.append([-var(a, j), -var(b, j)])
    s = Solver()
    for c in cnf:
        s.add_clause(c)
    assert s.solve(conflict_budget=10).status == "unknown"


def test_luby_prefix():
    assert [luby(i) for i in range(15)] == [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]


def test_dimacs_dump_roundtrip():
    s = Solver()
    s.add_clause([1, -3])
    s.add_clause([2])
    text = s.to_dimacs()
    assert text.startswith("p cnf")
    assert "1 -3 0" in text


clause = st.lists(st.integers(1, 8).flatmap(lambda v: st.sampled_from([v, -v])),
                  min_size=1, max_size=4)


@settings(max_examples=150, deadline=None)
@given(st.lists(clause, max_size=30))
def test_matches_enumeration(cnf):
    r = solve_cnf(cnf, (), 8, check_models=True)
    assert (r.status == SAT) == checks.brute_force_sat(8, cnf)
    if r.status == SAT:
        assert checks.model_satisfies(r.model, cnf)
