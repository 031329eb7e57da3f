# apps/hashslot/tables.py
"""
Two-layer hash slot tables.

The inter table splits the 16,384 slots between organizations in proportion
to their master bandwidth; each organization's intra table splits them
between its nodes in proportion to storage capacity. Counts come from
largest-remainder apportionment and every target gets one contiguous range,
in ascending identity order. Intra tables are indexed by `intra_slot_of`, so
which node a chunk lands on does not depend on where its inter slot fell.
"""
import bisect
from dataclasses import dataclass
from fractions import Fraction

from apps.core.exceptions import ConfigurationError

from .slots import SLOT_COUNT, intra_slot_of, slot_of

INTER = "inter"
INTRA_PREFIX = "intra:"


def apportion(weights: dict, total: int = SLOT_COUNT) -> dict:
    """Largest-remainder split of `total` slots; ties go to the lower identity."""
    if not weights:
        raise ConfigurationError("cannot allocate slots to zero targets")
    for target, weight in weights.items():
        if isinstance(weight, bool) or not isinstance(weight, (int, float, Fraction)) or weight <= 0:
            raise ConfigurationError(
                f"weight for {target!r} must be positive, got {weight!r}", target=target)

    exact = {t: Fraction(w) for t, w in weights.items()}
    weight_sum = sum(exact.values())
    quotas = {t: total * w / weight_sum for t, w in exact.items()}
    counts = {t: int(q) for t, q in quotas.items()}
    leftover = total - sum(counts.values())
    by_remainder = sorted(quotas, key=lambda t: (-(quotas[t] - counts[t]), t))
    for target in by_remainder[:leftover]:
        counts[target] += 1
    return counts


@dataclass(frozen=True)
class SlotTable:
    layer: str
    targets: tuple      # ascending identities
    weights: tuple      # aligned with targets
    counts: tuple       # aligned with targets

    @classmethod
    def build(cls, layer: str, weights: dict) -> "SlotTable":
        for target in weights:
            if not target or any(ch.isspace() for ch in str(target)):
                raise ConfigurationError(f"invalid target identity {target!r}")
        counts = apportion(weights)
        targets = tuple(sorted(weights))
        return cls(
            layer=layer,
            targets=targets,
            weights=tuple(weights[t] for t in targets),
            counts=tuple(counts[t] for t in targets),
        )

    def __post_init__(self):
        starts, position = [], 0
        for count in self.counts:
            starts.append(position)
            position += count
        if position != SLOT_COUNT:
            raise ConfigurationError(f"{self.layer} table covers {position} slots, not {SLOT_COUNT}")
        object.__setattr__(self, "_starts", tuple(starts))

    @property
    def organization(self) -> str | None:
        if self.layer.startswith(INTRA_PREFIX):
            return self.layer[len(INTRA_PREFIX):]
        return None

    def slot_counts(self) -> dict:
        return dict(zip(self.targets, self.counts))

    def ranges(self):
        for target, start, count in zip(self.targets, self._starts, self.counts):
            yield target, start, start + count - 1

    def target_at(self, slot: int) -> str:
        if not 0 <= slot < SLOT_COUNT:
            raise ValueError(f"slot {slot} outside [0, {SLOT_COUNT})")
        # zero-count targets share a start with their successor; bisect_right skips them
        return self.targets[bisect.bisect_right(self._starts, slot) - 1]

    @property
    def assignments(self) -> list:
        out = []
        for target, count in zip(self.targets, self.counts):
            out.extend([target] * count)
        return out

    def slot_for(self, chunk_hash: str) -> int:
        organization = self.organization
        if organization is None:
            return slot_of(chunk_hash)
        return intra_slot_of(chunk_hash, organization)

    def lookup(self, chunk_hash: str) -> str:
        return self.target_at(self.slot_for(chunk_hash))

    def canonical_lines(self) -> list[str]:
        lines = [f"table {self.layer}"]
        for (target, first, last), weight in zip(self.ranges(), self.weights):
            lines.append(f"{target} {_weight_text(weight)} {first} {last}")
        return lines


def _weight_text(weight) -> str:
    if isinstance(weight, float) and weight.is_integer():
        return str(int(weight))
    return str(weight)


def _parse_weight(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def allocate_inter(bandwidths: dict) -> SlotTable:
    return SlotTable.build(INTER, bandwidths)


def allocate_intra(capacities: dict, organization: str = "") -> SlotTable:
    return SlotTable.build(INTRA_PREFIX + organization, capacities)


def org_for(chunk_hash: str, inter_table: SlotTable) -> str:
    return inter_table.lookup(chunk_hash)


def node_for(chunk_hash: str, intra_table: SlotTable) -> str:
    return intra_table.lookup(chunk_hash)


@dataclass(frozen=True)
class SlotTables:
    """The inter table plus one intra table per organization."""

    inter: SlotTable
    intra: dict

    @classmethod
    def build(cls, master_bandwidths: dict, node_capacities: dict) -> "SlotTables":
        """
        master_bandwidths: org -> bandwidth of its master
        node_capacities: org -> {node: capacity}
        """
        if set(master_bandwidths) != set(node_capacities):
            raise ConfigurationError("inter and intra tables name different organizations")
        return cls(
            inter=allocate_inter(master_bandwidths),
            intra={org: allocate_intra(nodes, org) for org, nodes in node_capacities.items()},
        )

    def designate(self, chunk_hash: str) -> tuple[str, str]:
        """(organization, node) the hash slots assign a chunk to."""
        org = org_for(chunk_hash, self.inter)
        return org, node_for(chunk_hash, self.intra[org])

    @property
    def organizations(self) -> tuple:
        return self.inter.targets

    def nodes_of(self, org: str) -> tuple:
        return self.intra[org].targets

    def org_of_node(self, node: str) -> str:
        for org, table in self.intra.items():
            if node in table.targets:
                return org
        raise KeyError(node)

    def to_canonical(self) -> str:
        lines = self.inter.canonical_lines()
        for org in sorted(self.intra):
            lines.extend(self.intra[org].canonical_lines())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_canonical(cls, text: str) -> "SlotTables":
        sections, current = {}, None
        for raw in text.splitlines():
            if not raw.strip():
                continue
            parts = raw.split()
            if parts[0] == "table" and len(parts) == 2:
                current = parts[1]
                sections[current] = []
            elif current is not None and len(parts) == 4:
                sections[current].append(parts)
            else:
                raise ConfigurationError(f"malformed slot table line: {raw!r}")

        tables = {}
        for layer, rows in sections.items():
            table = SlotTable(
                layer=layer,
                targets=tuple(r[0] for r in rows),
                weights=tuple(_parse_weight(r[1]) for r in rows),
                counts=tuple(int(r[3]) - int(r[2]) + 1 for r in rows),
            )
            tables[layer] = table
        if INTER not in tables:
            raise ConfigurationError("slot table text has no inter table")
        intra = {t.organization: t for layer, t in tables.items() if layer != INTER}
        return cls(inter=tables[INTER], intra=intra)
