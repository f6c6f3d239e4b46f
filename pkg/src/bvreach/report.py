"""Machine-readable run reports: one ``key=value`` per line."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

KEYS = ("input", "engine", "ans", "k", "reason", "solves", "conflicts", "frames",
        "invariant_clauses", "encode_ms", "time_ms", "clauses")


@dataclass
class RunReport:
    input: str = "-"
    engine: str = "-"
    ans: str = "unknown"
    k: int | None = None
    reason: str = ""
    solves: int = 0
    conflicts: int = 0
    frames: int | None = None
    invariant_clauses: int | None = None
    encode_ms: int = 0
    time_ms: int = 0
    clauses: int = 0

    def render(self) -> str:
        lines = []
        for key in KEYS:
            val = getattr(self, key)
            lines.append(f"{key}={'' if val is None else val}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "RunReport":
        types = {f.name: f.type for f in fields(cls)}
        kw = {}
        for line in text.splitlines():
            if "=" not in line:
                continue
            key, _, val = line.partition("=")
            if key not in types:
                continue
            if "int" in str(types[key]):
                kw[key] = int(val) if val != "" else None
            else:
                kw[key] = val
        return cls(**kw)

    @classmethod
    def from_verdict(cls, v, *, input="-", encode_ms=0, clauses=0) -> "RunReport":
        st = v.stats
        return cls(input=input, engine=v.engine or "-", ans=v.status, k=v.k,
                   reason=v.reason, solves=st.get("solves", 0),
                   conflicts=st.get("conflicts", 0), frames=st.get("frames"),
                   invariant_clauses=st.get("invariant_clauses"), encode_ms=encode_ms,
                   time_ms=st.get("time_ms", 0), clauses=clauses)

    def as_dict(self):
        return asdict(self)
