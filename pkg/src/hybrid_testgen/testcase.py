"""Test cases and seeds shared by every engine."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Provenance(str, enum.Enum):
    PRIMARY = "primary"
    FUZZER = "fuzzer"
    BMC = "bmc"
    TRACER_COMPLETED = "tracer-completed"
    SELECTIVE = "selective"


SMART_PROVENANCES = {Provenance.FUZZER, Provenance.BMC, Provenance.TRACER_COMPLETED}


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # not a pytest test class

    values: tuple
    provenance: Provenance
    id: str = ""

    def to_json(self) -> dict:
        return {"id": self.id, "provenance": self.provenance.value, "values": list(self.values)}

    @classmethod
    def from_json(cls, data: dict) -> "TestCase":
        return cls(tuple(data["values"]), Provenance(data["provenance"]), data.get("id", ""))


@dataclass
class Seed:
    values: tuple
    provenance: Provenance
    deepest_depth: int = 0
    unique_goals: int = 0
    energy: int = 64
    smart: bool = False
    order: int = 0  # insertion order, used as the recency tie-break
    goals: frozenset = field(default_factory=frozenset)

    @property
    def score(self) -> tuple:
        return (self.deepest_depth, self.unique_goals)

    def to_json(self) -> dict:
        return {
            "values": list(self.values),
            "provenance": self.provenance.value,
            "smart": self.smart,
            "score": list(self.score),
            "energy": self.energy,
            "goals": sorted(self.goals),
        }


class SeedStore:
    """Ordered, duplicate-free collection of seeds."""

    def __init__(self, seeds=()):
        self.seeds = []
        self._keys = set()
        for s in seeds:
            self.add(s)

    def __len__(self):
        return len(self.seeds)

    def __iter__(self):
        return iter(self.seeds)

    def __bool__(self):
        return bool(self.seeds)

    def covered_by_others(self, values) -> set:
        out = set()
        for s in self.seeds:
            if s.values != values:
                out |= s.goals
        return out

    def add(self, seed: Seed) -> bool:
        if seed.values in self._keys:
            return False
        seed.order = len(self.seeds)
        self._keys.add(seed.values)
        self.seeds.append(seed)
        return True

    @property
    def smart(self) -> list:
        return [s for s in self.seeds if s.smart]
