"""Decision procedures for DimSpec problems: incremental unrolling and IC3."""

from __future__ import annotations

import heapq
import itertools
import multiprocessing as mp
import time
from dataclasses import dataclass, field

from .dimspec import DimSpecProblem, shift
from .sat import SAT, UNKNOWN, UNSAT, Solver

MAX_STEPS = 4096


@dataclass
class Verdict:
    status: str  # sat | unsat | unknown
    k: int | None = None
    steps: list = field(default_factory=list)  # per step: state bits, index 0 = bit 1
    invariant: list = field(default_factory=list)  # clauses over one step block
    reason: str = ""
    stats: dict = field(default_factory=dict)
    engine: str = ""


class Timeout(Exception):
    pass


def _deadline(timeout):
    return None if timeout is None else time.monotonic() + timeout


# ---------------------------------------------------------------- incremental


class _Unroller:
    """Step blocks of n variables followed by that step's activation literal.

    Step ``k`` owns variables k*(n+1)+1 .. k*(n+1)+n; its activation literal is
    k*(n+1)+n+1.
    """

    def __init__(self, p: DimSpecProblem, seed=0):
        self.p = p
        self.stride = p.n + 1
        self.solver = Solver(seed=seed)

    def var(self, k, j):
        return k * self.stride + j

    def act(self, k):
        return k * self.stride + self.p.n + 1

    def at(self, clause, k):
        n = self.p.n
        out = []
        for l in clause:
            v = abs(l)
            m = self.var(k, v) if v <= n else self.var(k + 1, v - n)
            out.append(m if l > 0 else -m)
        return out

    def add_step(self, k):
        p, s = self.p, self.solver
        if k == 0:
            for c in p.i:
                s.add_clause(self.at(c, 0))
        else:
            for c in p.t:
                s.add_clause(self.at(c, k - 1))
        for c in p.u:
            s.add_clause(self.at(c, k))
        a = self.act(k)
        for c in p.g:
            s.add_clause([a] + self.at(c, k))

    def model_steps(self, model, k):
        width = self.p.s
        return [[bool(model[self.var(i, j)]) for j in range(1, width + 1)]
                for i in range(k + 1)]


def solve_incremental(p: DimSpecProblem, max_steps: int = MAX_STEPS,
                      timeout: float | None = None, seed: int = 0) -> Verdict:
    """Smallest k with F_k satisfiable, using one solve call per step."""
    start = time.monotonic()
    deadline = _deadline(timeout)
    u = _Unroller(p, seed)
    solves = 0
    for k in range(max_steps + 1):
        if deadline is not None and time.monotonic() >= deadline:
            stats = {"solves": solves, "conflicts": u.solver.stats["conflicts"],
                     "time_ms": int((time.monotonic() - start) * 1000)}
            return Verdict(UNKNOWN, k, reason="timeout", stats=stats, engine="inc")
        u.add_step(k)
        if k > 0:
            # the goal at k-1 is already refuted; keep it disabled for good
            u.solver.add_clause([u.act(k - 1)])
        res = u.solver.solve([-u.act(k)], deadline=deadline)
        solves += 1
        stats = {"solves": solves, "conflicts": u.solver.stats["conflicts"],
                 "time_ms": int((time.monotonic() - start) * 1000)}
        if res.status == SAT:
            return Verdict(SAT, k, u.model_steps(res.model, k), stats=stats, engine="inc")
        if res.status == UNKNOWN:
            return Verdict(UNKNOWN, k, reason="timeout", stats=stats, engine="inc")
    stats["time_ms"] = int((time.monotonic() - start) * 1000)
    return Verdict(UNKNOWN, max_steps, reason="bound", stats=stats, engine="inc")


# ---------------------------------------------------------------- IC3


class _IC3:
    def __init__(self, p: DimSpecProblem, deadline, seed=0):
        self.p, self.n, self.s = p, p.n, p.s
        self.deadline = deadline
        self.solves = 0
        # main solver: U(0) ∧ T(0,1) ∧ U(1), I and G behind activation literals
        self.main = Solver(seed=seed)
        self.main.ensure_vars(2 * self.n)
        for c in p.u:
            self.main.add_clause(c)
            self.main.add_clause(shift(c, self.n))
        for c in p.t:
            self.main.add_clause(c)
        self.act_init = self.main.new_var()
        for c in p.i:
            self.main.add_clause([-self.act_init, *c])
        self.act_goal = self.main.new_var()
        for c in p.g:
            self.main.add_clause([-self.act_goal, *c])
        # initiation checks: I ∧ U
        self.init = Solver(seed=seed)
        self.init.ensure_vars(self.n)
        for c in (*p.i, *p.u):
            self.init.add_clause(c)
        self.deltas: list[list[tuple]] = [[], []]  # level 0 is I itself
        self.acts: list[int] = [0, self.main.new_var()]

    # -------------------------------------------------------------- queries

    def _solve(self, solver, assumptions):
        if self.deadline is not None and time.monotonic() >= self.deadline:
            raise Timeout
        self.solves += 1
        res = solver.solve(assumptions, deadline=self.deadline)
        if res.status == UNKNOWN:
            raise Timeout
        return res

    def frame_assumptions(self, i):
        if i == 0:
            return [self.act_init]
        return self.acts[i:]

    def cube_of(self, model, block=0):
        off = block * self.n
        return tuple(j if model[off + j] else -j for j in range(1, self.s + 1))

    def intersects_init(self, cube):
        return self._solve(self.init, list(cube)).status == SAT

    def add_clause(self, clause, level):
        self.deltas[level].append(clause)
        self.main.add_clause([-self.acts[level], *clause])

    def relative(self, cube, level):
        """SAT(F_{level-1} ∧ ¬cube ∧ U ∧ T ∧ U' ∧ cube'); returns (result, used temp act)."""
        tmp = self.main.new_var()
        self.main.add_clause([-tmp, *(-l for l in cube)])
        primed = [l + self.n if l > 0 else l - self.n for l in cube]
        res = self._solve(self.main, [tmp, *self.frame_assumptions(level - 1), *primed])
        self.main.add_clause([-tmp])
        return res, primed

    # -------------------------------------------------------------- generalization

    def generalize(self, cube, level, core):
        n = self.n
        kept = {l - n if l > 0 else l + n for l in core}
        cand = tuple(l for l in cube if l in kept)
        if not cand or self.intersects_init(cand):
            cand = cube
        for lit in list(cand):
            if lit not in cand or len(cand) == 1:
                continue
            trial = tuple(l for l in cand if l != lit)
            if self.intersects_init(trial):
                continue
            res, _ = self.relative(trial, level)
            if res.status == UNSAT:
                core_vars = {l - n if l > 0 else l + n for l in res.core if n < abs(l) <= 2 * n}
                shrunk = tuple(l for l in trial if l in core_vars)
                cand = shrunk if shrunk and not self.intersects_init(shrunk) else trial
        return cand

    # -------------------------------------------------------------- main loop

    def block(self, bad_cube, k):
        """Block a bad cube at level k; returns a counterexample chain or None."""
        counter = itertools.count()
        # entries: (level, tiebreak, cube, link to successor entry)
        heap = [(k, next(counter), bad_cube, None)]
        while heap:
            level, _, cube, succ = heapq.heappop(heap)
            if level == 0:
                return (cube, succ)
            if self.is_blocked(cube, level):
                if level < k:
                    heapq.heappush(heap, (level + 1, next(counter), cube, succ))
                continue
            res, primed = self.relative(cube, level)
            if res.status == SAT:
                pred = self.cube_of(res.model)
                node = (cube, succ)
                if level - 1 == 0 or self.intersects_init(pred):
                    return (pred, node)
                heapq.heappush(heap, (level - 1, next(counter), pred, node))
                heapq.heappush(heap, (level, next(counter), cube, succ))
                continue
            core = {l for l in res.core if l in set(primed)}
            gen = self.generalize(cube, level, core)
            clause = tuple(-l for l in gen)
            # push the clause as far as it stays relatively inductive
            lvl = level
            while lvl < k:
                r, _ = self.relative(gen, lvl + 1)
                if r.status == SAT:
                    break
                lvl += 1
            self.add_clause(clause, lvl)
            if lvl < k:
                heapq.heappush(heap, (lvl + 1, next(counter), cube, succ))
        return None

    def is_blocked(self, cube, level):
        res = self._solve(self.main, [*self.frame_assumptions(level), *cube])
        return res.status == UNSAT

    def propagate(self, k):
        """Push clauses forward; returns the index of a level whose delta emptied."""
        for i in range(1, k):
            for clause in list(self.deltas[i]):
                primed = [-(l + self.n) if l > 0 else -(l - self.n) for l in clause]
                res = self._solve(self.main, [*self.frame_assumptions(i), *primed])
                if res.status == UNSAT:
                    self.deltas[i].remove(clause)
                    self.add_clause(clause, i + 1)
            if not self.deltas[i]:
                return i
        return None

    def run(self):
        res = self._solve(self.init, [])
        if res.status == UNSAT:
            return Verdict(UNSAT, 0, invariant=[], reason="no initial state")
        g = Solver()
        g.ensure_vars(self.n)
        for c in (*self.p.i, *self.p.u, *self.p.g):
            g.add_clause(c)
        res = self._solve(g, [])
        if res.status == SAT:
            return Verdict(SAT, 0, [self._bits(self.cube_of(res.model))])
        k = 1
        while True:
            while True:
                res = self._solve(self.main, [*self.frame_assumptions(k), self.act_goal])
                if res.status == UNSAT:
                    break
                chain = self.block(self.cube_of(res.model), k)
                if chain is not None:
                    return self._counterexample(chain)
            k += 1
            self.deltas.append([])
            self.acts.append(self.main.new_var())
            fixed = self.propagate(k)
            if fixed is not None:
                inv = [c for j in range(fixed + 1, k + 1) for c in self.deltas[j]]
                return Verdict(UNSAT, fixed, invariant=inv)

    def _bits(self, cube):
        return [l > 0 for l in cube]

    def _counterexample(self, chain):
        steps = []
        node = chain
        while node is not None:
            cube, node = node
            steps.append(self._bits(cube))
        return Verdict(SAT, len(steps) - 1, steps)


def solve_ic3(p: DimSpecProblem, timeout: float | None = None, seed: int = 0,
              certify: bool = True) -> Verdict:
    start = time.monotonic()
    engine = _IC3(p, _deadline(timeout), seed)
    try:
        v = engine.run()
    except Timeout:
        v = Verdict(UNKNOWN, reason="timeout")
    v.engine = "ic3"
    v.stats = {"solves": engine.solves, "frames": len(engine.deltas) - 1,
               "conflicts": engine.main.stats["conflicts"],
               "time_ms": int((time.monotonic() - start) * 1000)}
    if v.status == UNSAT and certify:
        problems = check_invariant(p, v.invariant)
        if problems:
            raise AssertionError("invariant certification failed: " + "; ".join(problems))
        v.stats["invariant_clauses"] = len(v.invariant)
    if v.status == SAT and not _path_ok(p, v.steps):
        raise AssertionError("counterexample does not replay on the DimSpec problem")
    return v


def check_invariant(p: DimSpecProblem, inv) -> list[str]:
    """Failed conditions (empty when ``inv`` is an inductive invariant excluding G)."""
    n = p.n
    failed = []
    a = Solver()
    a.ensure_vars(n)
    for c in (*p.i, *p.u):
        a.add_clause(c)
    if any(a.solve([-l for l in c]).status != UNSAT for c in inv):
        failed.append("initiation")
    b = Solver()
    b.ensure_vars(2 * n)
    for c in (*inv, *p.u, *p.t, *(shift(c, n) for c in p.u)):
        b.add_clause(c)
    if any(b.solve([-(l + n if l > 0 else l - n) for l in c]).status != UNSAT for c in inv):
        failed.append("consecution")
    g = Solver()
    g.ensure_vars(n)
    for c in (*inv, *p.u, *p.g):
        g.add_clause(c)
    if g.solve().status != UNSAT:
        failed.append("safety")
    return failed


def _path_ok(p: DimSpecProblem, steps) -> bool:
    """Fix the state bits of every step and check F_k is satisfiable."""
    from .sat import solve_cnf
    from .dimspec import unroll
    k = len(steps) - 1
    nv, clauses = unroll(p, k)
    fixed = [j + 1 + i * p.n if b else -(j + 1 + i * p.n)
             for i, st in enumerate(steps) for j, b in enumerate(st)]
    return solve_cnf(clauses, fixed, nv).status == SAT


# ---------------------------------------------------------------- race


def _worker(name, p, max_steps, timeout, seed, queue):
    try:
        if name == "inc":
            v = solve_incremental(p, max_steps, timeout, seed)
        else:
            v = solve_ic3(p, timeout, seed)
    except Exception as exc:  # surfaced to the parent
        v = Verdict(UNKNOWN, reason=f"error: {exc}", engine=name)
    queue.put(v)


def solve_both(p: DimSpecProblem, max_steps: int = MAX_STEPS,
               timeout: float | None = None, seed: int = 0) -> Verdict:
    """Run both engines in separate processes; the first definitive verdict wins."""
    ctx = mp.get_context("fork")
    queue = ctx.Queue()
    procs = [ctx.Process(target=_worker, args=(name, p, max_steps, timeout, seed, queue),
                         daemon=True) for name in ("inc", "ic3")]
    for pr in procs:
        pr.start()
    fallback = None
    try:
        for _ in procs:
            v = queue.get()
            if v.status != UNKNOWN:
                return v
            if fallback is None or v.reason.startswith("error"):
                fallback = v
        return fallback
    finally:
        for pr in procs:
            if pr.is_alive():
                pr.terminate()
            pr.join()


def solve(p: DimSpecProblem, engine: str = "both", max_steps: int = MAX_STEPS,
          timeout: float | None = None, seed: int = 0) -> Verdict:
    if engine == "inc":
        return solve_incremental(p, max_steps, timeout, seed)
    if engine == "ic3":
        return solve_ic3(p, timeout, seed)
    if engine == "both":
        return solve_both(p, max_steps, timeout, seed)
    raise ValueError(f"unknown engine {engine!r}")


# ---------------------------------------------------------------- traces


class TraceError(RuntimeError):
    pass


@dataclass(frozen=True)
class TraceStep:
    block: str
    pred: str
    values: dict


def extract_trace(v: Verdict, space, program, *, return_check: bool = False) -> list[TraceStep]:
    """Decode a SAT verdict into block-level steps and replay it concretely."""
    from .mir.interp import ConcreteState, successor

    if v.status != SAT:
        raise ValueError("trace requested for a non-SAT verdict")
    states = []
    for bits in v.steps:
        curr, pred, values = space.unpack(bits[: space.n])
        for code, what in ((curr, "curr"), (pred, "pred")):
            if space.decode_block(code) == "invalid":
                raise TraceError(f"{what} code {code} out of range")
        states.append(ConcreteState(curr, pred, tuple(values[n] for n in space.var_names)))
    if states[0].curr != 1 or states[0].pred != 1:
        raise TraceError("trace does not start in the entry block")
    if states[-1].curr != space.error_code:
        raise TraceError("trace does not end in the error block")
    for i, (a, b) in enumerate(zip(states, states[1:])):
        expect = successor(program, space, a, return_check=return_check)
        if expect != b:
            raise TraceError(f"step {i} does not replay: expected {expect}, got {b}")
    return [TraceStep(space.decode_block(s.curr), space.decode_block(s.pred),
                      dict(zip(space.var_names, s.values))) for s in states]
