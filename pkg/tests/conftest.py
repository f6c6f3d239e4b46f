import pytest

from bvreach import fixtures
from bvreach.bitblast import FALSE, TRUE, CnfBuilder
from bvreach.mir import parse
from bvreach.sat import UNSAT, Solver

ACCEPTANCE = {}


def record(criterion, ok, detail=""):
    ACCEPTANCE[criterion] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key}: {'PASS' if ok else 'FAIL'} {detail}")


def equivalent(f, g, layout):
    """SAT check that boolean terms f and g agree on every assignment of ``layout``.

    ``layout`` maps variable name -> (first bit, width); primed copies sit s bits higher.
    """
    s = sum(w for _, w in layout.values())

    def bits(name, width, primed):
        lo, w = layout[name]
        return [lo + i + (s if primed else 0) for i in range(w)]

    cb = CnfBuilder(bits, 2 * s + 1)
    diff = cb.xor2(cb.lit(f), cb.lit(g))
    if diff in (TRUE, FALSE):
        return diff == FALSE
    solver = Solver()
    solver.ensure_vars(cb.next_var)
    for c in cb.clauses:
        solver.add_clause(c)
    return solver.solve([diff]).status == UNSAT


@pytest.fixture
def load():
    def _load(name):
        return parse(fixtures.load(name))
    return _load
