# apps/placement/state.py
"""
What a client knows about the consortium while it plans a file: per-node
chunk load, pending mirror pairs and nodes the masters report unreachable.

A client builds one PlacementState per write from the masters' distribution
tables, then every planned stripe updates it so later stripes of the same
file see earlier decisions.
"""
from collections import Counter
from dataclasses import dataclass, field


@dataclass
class PlacementState:
    loads: Counter = field(default_factory=Counter)
    # node B -> [A, ...]: the next chunk designated to B goes to A
    pending: dict = field(default_factory=dict)
    unavailable: set = field(default_factory=set)
    sequence: int = 0

    def next_sequence(self) -> int:
        self.sequence += 1
        return self.sequence

    def is_available(self, node: str) -> bool:
        return node not in self.unavailable

    def open_mirror(self, target: str, designated: str) -> None:
        self.pending.setdefault(target, []).append(designated)

    def pending_for(self, designated: str) -> list:
        return list(self.pending.get(designated, ()))

    def close_mirror(self, designated: str, target: str) -> None:
        partners = self.pending.get(designated, [])
        if target in partners:
            partners.remove(target)
        if not partners:
            self.pending.pop(designated, None)

    def pending_pairs(self) -> list[tuple[str, str]]:
        return sorted((b, a) for b, partners in self.pending.items() for a in partners)

    @classmethod
    def merge(cls, snapshots) -> "PlacementState":
        """Combine per-organization snapshots reported by masters."""
        state = cls()
        for snap in snapshots:
            state.loads.update(snap.loads)
            for b, partners in snap.pending.items():
                state.pending.setdefault(b, []).extend(partners)
            state.unavailable |= snap.unavailable
            state.sequence = max(state.sequence, snap.sequence)
        return state
