"""Incremental CDCL SAT solver with an assumption-based interface.

Literals are non-zero DIMACS integers. Internally a literal ``v`` is coded as
``2*v`` and ``-v`` as ``2*v + 1``, so negation is ``code ^ 1``.

Features: two watched literals, first-UIP learning with local minimization,
exponential VSIDS, phase saving, Luby restarts, learnt clause reduction and
failed-assumption cores.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

SAT = "sat"
UNSAT = "unsat"
UNKNOWN = "unknown"

_TRUE = 1
_FALSE = -1
_UNDEF = 0


@dataclass
class SolveResult:
    status: str
    model: list[bool] | None = None  # index 0 unused
    core: frozenset[int] = frozenset()
    conflicts: int = 0

    def __bool__(self):
        return self.status == SAT

    def value(self, lit: int) -> bool:
        v = self.model[abs(lit)]
        return v if lit > 0 else not v


def luby(i: int) -> int:
    """i-th element (0-based) of the Luby sequence 1,1,2,1,1,2,4,..."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


class Solver:
    def __init__(self, seed: int = 0, check_models: bool = False):
        self.check_models = check_models
        self._rng = random.Random(seed)
        self.random_freq = 0.0
        self.nvars = 0
        self.ok = True
        self.clauses: list[list[int]] = []
        self.learnts: list[list[int]] = []
        self._lbd: dict[int, int] = {}
        self.val = [_UNDEF, _UNDEF]
        self.level = [0]
        self.reason: list = [None]
        self.activity = [0.0]
        self.phase = [False]
        self.seen = [False]
        self.watches: list[list[list[int]]] = [[], []]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.var_inc = 1.0
        self.var_decay = 0.95
        self.heap: list[int] = []
        self.heap_pos = [-1]
        self.max_learnts = 2000.0
        self.stats = {"solves": 0, "conflicts": 0, "decisions": 0, "propagations": 0}

    # ------------------------------------------------------------------ vars

    def ensure_vars(self, n: int) -> None:
        while self.nvars < n:
            self.nvars += 1
            v = self.nvars
            self.val += [_UNDEF, _UNDEF]
            self.level.append(0)
            self.reason.append(None)
            self.activity.append(0.0)
            self.phase.append(False)
            self.seen.append(False)
            self.watches += [[], []]
            self.heap_pos.append(-1)
            self._heap_insert(v)

    def new_var(self) -> int:
        self.ensure_vars(self.nvars + 1)
        return self.nvars

    # ------------------------------------------------------------------ heap

    def _heap_up(self, i: int) -> None:
        heap, pos, act = self.heap, self.heap_pos, self.activity
        v = heap[i]
        a = act[v]
        while i > 0:
            parent = (i - 1) >> 1
            pv = heap[parent]
            if act[pv] >= a:
                break
            heap[i] = pv
            pos[pv] = i
            i = parent
        heap[i] = v
        pos[v] = i

    def _heap_down(self, i: int) -> None:
        heap, pos, act = self.heap, self.heap_pos, self.activity
        n = len(heap)
        v = heap[i]
        a = act[v]
        while True:
            child = 2 * i + 1
            if child >= n:
                break
            if child + 1 < n and act[heap[child + 1]] > act[heap[child]]:
                child += 1
            cv = heap[child]
            if act[cv] <= a:
                break
            heap[i] = cv
            pos[cv] = i
            i = child
        heap[i] = v
        pos[v] = i

    def _heap_insert(self, v: int) -> None:
        if self.heap_pos[v] >= 0:
            return
        self.heap.append(v)
        self.heap_pos[v] = len(self.heap) - 1
        self._heap_up(len(self.heap) - 1)

    def _heap_pop(self) -> int:
        heap, pos = self.heap, self.heap_pos
        v = heap[0]
        last = heap.pop()
        pos[v] = -1
        if heap:
            heap[0] = last
            pos[last] = 0
            self._heap_down(0)
        return v

    def _bump(self, v: int) -> None:
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for i in range(1, self.nvars + 1):
                act[i] *= 1e-100
            self.var_inc *= 1e-100
        if self.heap_pos[v] >= 0:
            self._heap_up(self.heap_pos[v])

    # --------------------------------------------------------------- clauses

    def add_clause(self, lits) -> bool:
        """Add a permanent clause. Returns False once the instance is UNSAT."""
        if not self.ok:
            return False
        if self.trail_lim:
            self._cancel_until(0)
        top = 0
        for lit in lits:
            if lit == 0:
                raise ValueError("literal 0 is not allowed")
            a = abs(lit)
            if a > top:
                top = a
        self.ensure_vars(top)
        val = self.val
        seen_codes = set()
        clause = []
        for lit in lits:
            code = 2 * lit if lit > 0 else -2 * lit + 1
            if code in seen_codes:
                continue
            if code ^ 1 in seen_codes:
                return True
            v = val[code]
            if v == _TRUE:
                return True
            if v == _FALSE:
                continue
            seen_codes.add(code)
            clause.append(code)
        if not clause:
            self.ok = False
            return False
        if len(clause) == 1:
            self._enqueue(clause[0], None)
            if self._propagate() is not None:
                self.ok = False
                return False
            return True
        self.clauses.append(clause)
        self.watches[clause[0]].append(clause)
        self.watches[clause[1]].append(clause)
        return True

    add = add_clause

    # ---------------------------------------------------------------- search

    def _enqueue(self, code: int, reason) -> None:
        v = code >> 1
        self.val[code] = _TRUE
        self.val[code ^ 1] = _FALSE
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(code)

    def _propagate(self):
        val = self.val
        watches = self.watches
        trail = self.trail
        level = self.level
        reason = self.reason
        dl = len(self.trail_lim)
        qhead = self.qhead
        props = 0
        confl = None
        while qhead < len(trail):
            false_lit = trail[qhead] ^ 1
            qhead += 1
            props += 1
            ws = watches[false_lit]
            n = len(ws)
            i = j = 0
            while i < n:
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0] = c[1]
                    c[1] = false_lit
                first = c[0]
                if val[first] == _TRUE:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    if val[lk] != _FALSE:
                        c[1] = lk
                        c[k] = false_lit
                        watches[lk].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if val[first] == _FALSE:
                        confl = c
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        qhead = len(trail)
                    else:
                        val[first] = _TRUE
                        val[first ^ 1] = _FALSE
                        fv = first >> 1
                        level[fv] = dl
                        reason[fv] = c
                        trail.append(first)
            del ws[j:]
            if confl is not None:
                break
        self.qhead = qhead
        self.stats["propagations"] += props
        return confl

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        val, phase, reason = self.val, self.phase, self.reason
        trail = self.trail
        stop = self.trail_lim[lvl]
        for idx in range(len(trail) - 1, stop - 1, -1):
            code = trail[idx]
            v = code >> 1
            val[code] = _UNDEF
            val[code ^ 1] = _UNDEF
            reason[v] = None
            phase[v] = (code & 1) == 0
            if self.heap_pos[v] < 0:
                self._heap_insert(v)
        del trail[stop:]
        del self.trail_lim[lvl:]
        self.qhead = len(trail)

    def _analyze(self, confl):
        seen, level, reason, trail = self.seen, self.level, self.reason, self.trail
        dl = len(self.trail_lim)
        learnt = [0]
        path = 0
        p = -1
        idx = len(trail) - 1
        touched = []
        while True:
            start = 0 if p == -1 else 1
            for k in range(start, len(confl)):
                q = confl[k]
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    touched.append(v)
                    self._bump(v)
                    if level[v] >= dl:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            confl = reason[p >> 1]
            seen[p >> 1] = False
            path -= 1
            if path <= 0:
                break
        learnt[0] = p ^ 1

        # local minimization: drop literals implied by other learnt literals
        if len(learnt) > 2:
            keep = [learnt[0]]
            for q in learnt[1:]:
                r = reason[q >> 1]
                if r is None:
                    keep.append(q)
                    continue
                for k in range(1, len(r)):
                    w = r[k] >> 1
                    if not seen[w] and level[w] > 0:
                        keep.append(q)
                        break
            learnt = keep
        for v in touched:
            seen[v] = False

        if len(learnt) == 1:
            bt = 0
        else:
            best = 1
            for k in range(2, len(learnt)):
                if level[learnt[k] >> 1] > level[learnt[best] >> 1]:
                    best = k
            learnt[1], learnt[best] = learnt[best], learnt[1]
            bt = level[learnt[1] >> 1]
        lbd = len({level[q >> 1] for q in learnt})
        return learnt, bt, lbd

    def _analyze_final(self, p: int) -> set[int]:
        """Assumption codes (including ``p``) that together force ``p`` false."""
        out = {p}
        v0 = p >> 1
        if self.level[v0] == 0:
            return out
        seen, reason, trail = self.seen, self.reason, self.trail
        seen[v0] = True
        marked = [v0]
        for idx in range(len(trail) - 1, self.trail_lim[0] - 1, -1):
            q = trail[idx]
            v = q >> 1
            if not seen[v]:
                continue
            r = reason[v]
            if r is None:
                out.add(q)
            else:
                for k in range(1, len(r)):
                    w = r[k] >> 1
                    if self.level[w] > 0 and not seen[w]:
                        seen[w] = True
                        marked.append(w)
        for v in marked:
            seen[v] = False
        return out

    def _pick_branch(self) -> int:
        val = self.val
        if self.random_freq and self._rng.random() < self.random_freq and self.heap:
            v = self.heap[self._rng.randrange(len(self.heap))]
            if val[2 * v] == _UNDEF:
                return 2 * v if self.phase[v] else 2 * v + 1
        while self.heap:
            v = self._heap_pop()
            if val[2 * v] == _UNDEF:
                return 2 * v if self.phase[v] else 2 * v + 1
        return -1

    def _reduce_db(self) -> None:
        locked = set()
        for code in self.trail:
            r = self.reason[code >> 1]
            if r is not None:
                locked.add(id(r))
        lbd = self._lbd
        ranked = sorted(self.learnts, key=lambda c: (lbd.get(id(c), 99), len(c)))
        half = len(ranked) // 2
        keep = []
        for i, c in enumerate(ranked):
            if i < half or lbd.get(id(c), 99) <= 2 or id(c) in locked:
                keep.append(c)
            else:
                lbd.pop(id(c), None)
        self.learnts = keep
        watches = [[] for _ in range(len(self.watches))]
        for c in self.clauses:
            watches[c[0]].append(c)
            watches[c[1]].append(c)
        for c in keep:
            watches[c[0]].append(c)
            watches[c[1]].append(c)
        self.watches = watches

    def solve(self, assumptions=(), conflict_budget: int | None = None,
              deadline: float | None = None) -> SolveResult:
        """Solve under ``assumptions``; the solver stays usable afterwards.

        ``deadline`` is an absolute ``time.monotonic()`` value.
        """
        self.stats["solves"] += 1
        start_conflicts = self.stats["conflicts"]
        if not self.ok:
            return SolveResult(UNSAT)
        self._cancel_until(0)
        top = max((abs(a) for a in assumptions), default=0)
        self.ensure_vars(top)
        assume = [2 * a if a > 0 else -2 * a + 1 for a in assumptions]
        if self._propagate() is not None:
            self.ok = False
            return SolveResult(UNSAT)

        restart_idx = 0
        conflicts_left = 100 * luby(restart_idx)
        val = self.val
        while True:
            confl = self._propagate()
            if confl is not None:
                self.stats["conflicts"] += 1
                conflicts_left -= 1
                if not self.trail_lim:
                    self.ok = False
                    return SolveResult(UNSAT, conflicts=self.stats["conflicts"] - start_conflicts)
                learnt, bt, lbd = self._analyze(confl)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self.learnts.append(learnt)
                    self._lbd[id(learnt)] = lbd
                    self.watches[learnt[0]].append(learnt)
                    self.watches[learnt[1]].append(learnt)
                    self._enqueue(learnt[0], learnt)
                self.var_inc /= self.var_decay
                done = self.stats["conflicts"] - start_conflicts
                if conflict_budget is not None and done >= conflict_budget:
                    self._cancel_until(0)
                    return SolveResult(UNKNOWN, conflicts=done)
                if deadline is not None and (done & 63) == 0 and time.monotonic() > deadline:
                    self._cancel_until(0)
                    return SolveResult(UNKNOWN, conflicts=done)
                continue

            if conflicts_left <= 0:
                restart_idx += 1
                conflicts_left = 100 * luby(restart_idx)
                self._cancel_until(0)
            if len(self.learnts) - len(self.trail) >= self.max_learnts:
                self._reduce_db()
                self.max_learnts *= 1.1

            nxt = -1
            while len(self.trail_lim) < len(assume):
                p = assume[len(self.trail_lim)]
                if val[p] == _TRUE:
                    self.trail_lim.append(len(self.trail))
                elif val[p] == _FALSE:
                    codes = self._analyze_final(p)
                    core = frozenset(-(c >> 1) if c & 1 else c >> 1 for c in codes)
                    self._cancel_until(0)
                    return SolveResult(UNSAT, core=core,
                                       conflicts=self.stats["conflicts"] - start_conflicts)
                else:
                    nxt = p
                    break
            if nxt == -1:
                nxt = self._pick_branch()
                if nxt == -1:
                    model = [False] * (self.nvars + 1)
                    for v in range(1, self.nvars + 1):
                        model[v] = val[2 * v] == _TRUE
                    self._cancel_until(0)
                    res = SolveResult(SAT, model=model,
                                      conflicts=self.stats["conflicts"] - start_conflicts)
                    if self.check_models:
                        self._verify(res, assumptions)
                    return res
                self.stats["decisions"] += 1
            self.trail_lim.append(len(self.trail))
            self._enqueue(nxt, None)

    def _verify(self, res: SolveResult, assumptions) -> None:
        for c in self.clauses:
            if not any(res.model[q >> 1] != bool(q & 1) for q in c):
                raise AssertionError("model violates clause")
        for a in assumptions:
            if not res.value(a):
                raise AssertionError("model violates assumption")

    # --------------------------------------------------------------- output

    def to_dimacs(self) -> str:
        """DIMACS text of the permanent clause database (level-0 units included)."""
        lines = []
        units = [c for c in self.trail[: self.trail_lim[0] if self.trail_lim else len(self.trail)]]
        body = [[c] for c in units] + self.clauses
        lines.append(f"p cnf {self.nvars} {len(body)}")
        for c in body:
            lines.append(" ".join(str(q >> 1 if not q & 1 else -(q >> 1)) for q in c) + " 0")
        return "\n".join(lines) + "\n"


def solve_cnf(clauses, assumptions=(), nvars: int = 0, **kw) -> SolveResult:
    """One-shot convenience wrapper."""
    s = Solver(**kw)
    s.ensure_vars(nvars)
    for c in clauses:
        s.add_clause(c)
    return s.solve(assumptions)

