"""DimSpec problems: four CNF sections over a per-step variable block of size n."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

SECTIONS = ("i", "u", "g", "t")


class DimSpecError(ValueError):
    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass
class DimSpecProblem:
    n: int
    i: list = field(default_factory=list)
    u: list = field(default_factory=list)
    g: list = field(default_factory=list)
    t: list = field(default_factory=list)
    state_bits: int | None = None  # leading state bits of each step block
    variables: list = field(default_factory=list)  # (name, first bit, width)

    def __post_init__(self):
        for tag in SECTIONS:
            setattr(self, tag, [tuple(c) for c in getattr(self, tag)])

    @property
    def s(self) -> int:
        return self.n if self.state_bits is None else self.state_bits

    def section(self, tag):
        return getattr(self, tag)

    def validate(self):
        for tag in SECTIONS:
            limit = 2 * self.n if tag == "t" else self.n
            for c in self.section(tag):
                if not c:
                    raise DimSpecError(f"empty clause in section {tag}")
                for lit in c:
                    if lit == 0 or abs(lit) > limit:
                        raise DimSpecError(f"literal {lit} out of range in section {tag}")

    def num_clauses(self) -> int:
        return sum(len(self.section(t)) for t in SECTIONS)


def write(p: DimSpecProblem, sink=None) -> str:
    """Serialize ``p``; returns the text and writes it to ``sink`` when given."""
    out = []
    if p.state_bits is not None:
        out.append(f"c state-bits {p.state_bits}")
    for name, lo, w in p.variables:
        out.append(f"c var {name} {lo} {w}")
    for tag in SECTIONS:
        clauses = p.section(tag)
        nv = 2 * p.n if tag == "t" else p.n
        out.append(f"{tag} cnf {nv} {len(clauses)}")
        out.extend(" ".join(map(str, c)) + " 0" for c in clauses)
    text = "\n".join(out) + "\n"
    if sink is not None:
        sink.write(text.encode() if isinstance(sink, (io.RawIOBase, io.BufferedIOBase)) else text)
    return text


def read(source) -> DimSpecProblem:
    """Parse DimSpec text (a string, bytes or a readable stream)."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode()
    state_bits, variables = None, []
    sections: dict = {}
    n = None
    cur, expected, nvars, clauses = None, 0, 0, None
    pending: list[int] = []

    def close(lineno):
        if cur is None:
            return
        if pending:
            raise DimSpecError(f"unterminated clause in section {cur}", lineno)
        if len(clauses) != expected:
            raise DimSpecError(f"section {cur} declares {expected} clauses, found {len(clauses)}",
                               lineno)
        sections[cur] = clauses

    lines = source.split("\n")
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "c":
            if len(parts) == 3 and parts[1] == "state-bits":
                state_bits = _int(parts[2], lineno)
            elif len(parts) == 5 and parts[1] == "var":
                variables.append((parts[2], _int(parts[3], lineno), _int(parts[4], lineno)))
            continue
        if parts[0] in SECTIONS and len(parts) > 1 and parts[1] == "cnf":
            close(lineno)
            tag = parts[0]
            order = SECTIONS.index(tag)
            if order != len(sections):
                raise DimSpecError(f"section {tag} out of order", lineno)
            if len(parts) != 4:
                raise DimSpecError("malformed header", lineno)
            nv, nc = _int(parts[2], lineno), _int(parts[3], lineno)
            if nv < 0 or nc < 0:
                raise DimSpecError("negative count in header", lineno)
            if tag == "t":
                if n is not None and nv != 2 * n:
                    raise DimSpecError(f"t section must declare {2 * n} variables", lineno)
                n = n if n is not None else nv // 2
            elif n is None:
                n = nv
            elif nv != n:
                raise DimSpecError(f"section {tag} declares {nv} variables, expected {n}", lineno)
            cur, expected, nvars, clauses = tag, nc, nv, []
            continue
        if cur is None:
            raise DimSpecError(f"unexpected content {line[:20]!r} before first header", lineno)
        for tok in parts:
            lit = _int(tok, lineno)
            if lit == 0:
                if not pending:
                    raise DimSpecError("empty clause", lineno)
                clauses.append(tuple(pending))
                pending = []
            elif abs(lit) > nvars:
                raise DimSpecError(f"literal {lit} out of range (max {nvars})", lineno)
            else:
                pending.append(lit)
        if len(clauses) > expected:
            raise DimSpecError(f"trailing clauses in section {cur}", lineno)
    close(len(lines))
    if len(sections) != 4:
        missing = [t for t in SECTIONS if t not in sections]
        raise DimSpecError(f"missing section(s) {' '.join(missing)}", len(lines))
    return DimSpecProblem(n, sections["i"], sections["u"], sections["g"], sections["t"],
                          state_bits=state_bits, variables=variables)


def _int(tok, lineno):
    try:
        return int(tok)
    except ValueError:
        raise DimSpecError(f"expected integer, got {tok!r}", lineno) from None


def shift(clause, offset):
    return tuple(l + offset if l > 0 else l - offset for l in clause)


def unroll(p: DimSpecProblem, k: int) -> tuple[int, list]:
    """Clauses of I(0) ∧ U(0..k) ∧ T(i, i+1) for i < k ∧ G(k); returns (variables, clauses)."""
    n = p.n
    out = list(p.i)
    for step in range(k + 1):
        out += [shift(c, step * n) for c in p.u]
        if step < k:
            out += [shift(c, step * n) for c in p.t]
    out += [shift(c, k * n) for c in p.g]
    return (k + 1) * n, out


def write_dimacs(nvars: int, clauses, sink=None) -> str:
    text = f"p cnf {nvars} {len(clauses)}\n" + "".join(
        " ".join(map(str, c)) + " 0\n" for c in clauses)
    if sink is not None:
        sink.write(text)
    return text


def read_dimacs(source) -> tuple[int, list]:
    if hasattr(source, "read"):
        source = source.read()
    nvars, clauses, pending = None, [], []
    for lineno, raw in enumerate(source.split("\n"), 1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimSpecError("malformed problem line", lineno)
            nvars = _int(parts[2], lineno)
            continue
        for tok in parts:
            lit = _int(tok, lineno)
            if lit == 0:
                clauses.append(tuple(pending))
                pending = []
            else:
                pending.append(lit)
    if pending:
        clauses.append(tuple(pending))
    if nvars is None:
        raise DimSpecError("missing problem line")
    return nvars, clauses
