# apps/placement/planner.py
"""
Per-stripe chunk placement with the mirror strategy.

Chunk i of a stripe belongs to group i mod l. Each group is designated one
organization: the inter table owner of the group's first chunk, or the next
organization in table order when an earlier group already took it. Inside
that organization every chunk is designated a node by the intra table.
Resolution recomputes the same designation from the stripe's chunk hashes.

Pass 1 keeps every chunk whose group stays in its designated organization
and whose designated node is available and not taken by an earlier chunk.

Pass 2 places the rest in index order. Within the designated organization a
chunk first takes a pending mirror partner of its designated node and
otherwise the least loaded free node, which opens a new mirror pair. A group
whose organization is excluded or short of available nodes moves wholesale
to an unused organization, preferring more inter slots; its chunks go to the
least loaded free nodes there. Every chunk not held by its designated node
leaves a link behind.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field

from apps.core.digests import digest_lines
from apps.core.exceptions import ChunkNotFound, PlacementImpossible
from apps.erasure.params import CodeParams
from apps.hashslot.tables import SlotTables

from .links import LinkRecord
from .state import PlacementState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PlacementEntry:
    index: int
    chunk_hash: str
    designated_org: str
    designated_node: str
    holder_org: str
    holder: str

    @property
    def diverted(self) -> bool:
        return self.holder != self.designated_node


@dataclass
class PlacementPlan:
    stripe_hash: str
    entries: list
    links: list
    mirrors_opened: list = field(default_factory=list)   # (target, designated)
    mirrors_closed: list = field(default_factory=list)   # (designated, target)

    @property
    def holders(self) -> list[str]:
        return [e.holder for e in self.entries]

    @property
    def designations(self) -> list[tuple[str, str]]:
        return [(e.designated_org, e.designated_node) for e in self.entries]

    def by_holder_org(self) -> dict:
        groups = {}
        for entry in self.entries:
            groups.setdefault(entry.holder_org, []).append(entry)
        return groups

    def org_counts(self) -> Counter:
        return Counter(e.holder_org for e in self.entries)

    def link_for(self, index: int):
        entry = self.entries[index]
        return next((ln for ln in self.links if ln.chunk_hash == entry.chunk_hash
                     and ln.holder == entry.holder), None)


def _eligible_nodes(tables, org, state):
    return [n for n in tables.nodes_of(org) if state.is_available(n)]


def _group_orgs(chunk_hashes, tables: SlotTables, groups: int) -> list[str]:
    orgs = tables.organizations
    if groups > len(orgs):
        raise PlacementImpossible(
            f"{len(orgs)} organizations cannot host {groups} groups", organizations=len(orgs))
    picked = []
    for g in range(groups):
        start = orgs.index(tables.inter.lookup(chunk_hashes[g]))
        for step in range(len(orgs)):
            org = orgs[(start + step) % len(orgs)]
            if org not in picked:
                picked.append(org)
                break
    return picked


def designate_stripe(chunk_hashes, tables: SlotTables, l: int) -> list[tuple[str, str]]:
    """(organization, node) designated to each chunk of a stripe, in index order."""
    chunk_hashes = list(chunk_hashes)
    group_orgs = _group_orgs(chunk_hashes, tables, min(l, len(chunk_hashes)))
    designations = []
    for i, chunk_hash in enumerate(chunk_hashes):
        org = group_orgs[i % len(group_orgs)]
        designations.append((org, tables.intra[org].lookup(chunk_hash)))
    return designations


def plan_stripe(chunk_hashes, tables: SlotTables, params: CodeParams,
                exclusions=frozenset(), state: PlacementState | None = None) -> PlacementPlan:
    """
    Place one stripe. `state` is updated with the planned loads and mirror
    changes; pass a fresh PlacementState to plan in isolation.
    """
    state = state if state is not None else PlacementState()
    chunk_hashes = list(chunk_hashes)
    n = len(chunk_hashes)
    exclusions = frozenset(exclusions)

    usable = [o for o in tables.organizations
              if o not in exclusions and _eligible_nodes(tables, o, state)]
    if len(usable) < min(params.l, n):
        raise PlacementImpossible(
            f"{len(usable)} organizations can store data, {params.l} needed", eligible=usable)

    designated = designate_stripe(chunk_hashes, tables, params.l)
    groups = min(params.l, n)
    members = [list(range(g, n, groups)) for g in range(groups)]

    def can_host(org, size):
        return org not in exclusions and len(_eligible_nodes(tables, org, state)) >= size

    # one organization per group
    inter_slots = tables.inter.slot_counts()
    group_org = [designated[g][0] for g in range(groups)]
    moved = [g for g in range(groups) if not can_host(group_org[g], len(members[g]))]
    in_use = {group_org[g] for g in range(groups) if g not in moved}
    for g in moved:
        candidates = [o for o in tables.organizations
                      if o not in in_use and can_host(o, len(members[g]))]
        if not candidates:
            raise PlacementImpossible(f"no organization can host group {g}", group=g)
        group_org[g] = min(candidates, key=lambda o: (-inter_slots[o], o))
        in_use.add(group_org[g])
        logger.debug("Group %d moved to %s", g, group_org[g])

    holders = [None] * n
    taken = set()

    # pass 1: designated nodes that stay put
    diverted = []
    for i, (d_org, d_node) in enumerate(designated):
        if group_org[i % groups] == d_org and state.is_available(d_node) and d_node not in taken:
            holders[i] = d_node
            taken.add(d_node)
        else:
            diverted.append(i)

    opened, closed, links = [], [], []

    # pass 2: diverted chunks in index order
    for i in diverted:
        org = group_org[i % groups]
        d_org, d_node = designated[i]
        free = [nd for nd in _eligible_nodes(tables, org, state) if nd not in taken]
        if not free:
            raise PlacementImpossible(f"no free node in {org} for chunk {i}", index=i)

        target = None
        if org == d_org:
            target = next((a for a in state.pending_for(d_node) if a in free), None)
            if target is not None:
                state.close_mirror(d_node, target)
                closed.append((d_node, target))
        if target is None:
            target = min(free, key=lambda nd: (state.loads[nd], nd))
            if org == d_org:
                state.open_mirror(target, d_node)
                opened.append((target, d_node))

        holders[i] = target
        taken.add(target)
        links.append(LinkRecord(chunk_hashes[i], target, state.next_sequence()))

    entries = []
    for i, h in enumerate(chunk_hashes):
        state.loads[holders[i]] += 1
        entries.append(PlacementEntry(
            i, h, designated[i][0], designated[i][1], group_org[i % groups], holders[i]))

    if links:
        logger.debug("Stripe planned with %d diverted chunks", len(links))
    return PlacementPlan(
        stripe_hash=digest_lines(chunk_hashes),
        entries=entries,
        links=links,
        mirrors_opened=opened,
        mirrors_closed=closed,
    )


def resolve(chunk_hash: str, tables: SlotTables, nodes, masters=None, designation=None) -> str:
    """
    Node identity holding `chunk_hash`.

    `nodes` maps node identity to an object with `has_chunk(hash)` and
    `get_link(hash)`. `designation` is the chunk's (organization, node) from
    `designate_stripe`; without it the chunk is looked up on its own. The
    designated node answers itself or follows exactly one link. When it
    knows nothing, the designated organization's master (from `masters`,
    org -> node) is asked for its link copy.
    """
    org, node = designation if designation is not None else tables.designate(chunk_hash)
    designated = nodes.get(node)
    if designated is not None:
        if designated.has_chunk(chunk_hash):
            return node
        link = designated.get_link(chunk_hash)
        if link is not None and _holds(nodes, link.holder, chunk_hash):
            return link.holder

    master = nodes.get((masters or {}).get(org))
    if master is not None and master is not designated:
        link = master.get_link(chunk_hash)
        if link is not None and _holds(nodes, link.holder, chunk_hash):
            return link.holder
    raise ChunkNotFound(f"chunk {chunk_hash[:12]} not found", chunk_hash=chunk_hash)


def _holds(nodes, identity, chunk_hash):
    holder = nodes.get(identity)
    return holder is not None and holder.has_chunk(chunk_hash)
