# apps/nodes/node.py
"""
DBNode runtime: one node's chunk store, link store and, on the master,
the organization's distribution table.

Chunks and links are reference counted by the identifier of the file that
owns them, so identical chunks shared by several files (zero padding, equal
regions) survive until the last owner is purged.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field

from django.db import models

from apps.core.constants import LINK_RECORD_BYTES
from apps.core.digests import digest
from apps.core.exceptions import CapacityExceeded, DigestMismatch, TransferFailed, WriteFailed
from apps.placement.links import LinkRecord
from apps.placement.state import PlacementState

from . import messages as msg
from .distribution import master_distribute
from .stores import MemoryChunkStore

logger = logging.getLogger(__name__)


class NodeRole(models.TextChoices):
    MASTER = "master", "Master"
    COMMON = "common", "Common"


@dataclass
class DistributionTable:
    """Master bookkeeping: who holds what inside the organization."""

    holders: dict = field(default_factory=dict)     # chunk hash -> set of nodes
    loads: Counter = field(default_factory=Counter)
    pending: dict = field(default_factory=dict)     # node B -> [A, ...]
    sequence: int = 0
    # directory copy of every link designated to the organization
    links: dict = field(default_factory=dict)       # chunk hash -> LinkRecord
    link_owners: dict = field(default_factory=dict) # chunk hash -> Counter(fid)

    def record(self, chunk_hash, node):
        nodes = self.holders.setdefault(chunk_hash, set())
        if node not in nodes:
            nodes.add(node)
            self.loads[node] += 1

    def forget(self, chunk_hash, node):
        nodes = self.holders.get(chunk_hash)
        if nodes and node in nodes:
            nodes.discard(node)
            self.loads[node] -= 1
            if not self.loads[node]:
                del self.loads[node]
            if not nodes:
                del self.holders[chunk_hash]

    def as_dict(self) -> dict:
        return {
            "holders": {h: sorted(n) for h, n in sorted(self.holders.items())},
            "pending": {b: list(a) for b, a in sorted(self.pending.items())},
            "sequence": self.sequence,
            "links": [self.links[h].as_dict() for h in sorted(self.links)],
            "link_owners": {h: dict(c) for h, c in sorted(self.link_owners.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DistributionTable":
        table = cls(pending={b: list(a) for b, a in data.get("pending", {}).items()},
                    sequence=int(data.get("sequence", 0)),
                    links={d["chunk_hash"]: LinkRecord.from_dict(d) for d in data.get("links", [])},
                    link_owners={h: Counter(c) for h, c in data.get("link_owners", {}).items()})
        for chunk_hash, nodes in data.get("holders", {}).items():
            for node in nodes:
                table.record(chunk_hash, node)
        return table


class DBNode:

    def __init__(self, identity: str, organization: str, capacity: int,
                 bandwidth: float, role: str = NodeRole.COMMON, store=None):
        self.identity = identity
        self.organization = organization
        self.capacity = capacity
        self.bandwidth = bandwidth
        self.role = role
        self.alive = True
        self.store = store if store is not None else MemoryChunkStore()
        self.chunk_owners = {}      # hash -> Counter(fid)
        self.links = {}             # hash -> LinkRecord
        self.link_owners = {}       # hash -> Counter(fid)
        self.table = DistributionTable()
        self.peers = {}             # identity -> DBNode, set by the consortium
        self._stored_bytes = sum(self.store.size_of(h) for h in self.store.keys())

    def __repr__(self):
        return f"<DBNode {self.identity} {self.organization} {self.role}>"

    @property
    def is_master(self) -> bool:
        return self.role == NodeRole.MASTER

    @property
    def stored_bytes(self) -> int:
        return self._stored_bytes

    @property
    def link_count(self) -> int:
        return len(self.links) + len(self.table.links)

    @property
    def link_bytes(self) -> int:
        return self.link_count * LINK_RECORD_BYTES

    def _require_alive(self):
        if not self.alive:
            raise TransferFailed(f"{self.identity} is unreachable", node=self.identity)

    # -- message dispatch --------------------------------------------------

    def handle(self, message):
        if isinstance(message, msg.StoreChunk):
            return self.store_chunk(message.chunk_hash, message.data, message.owner)
        if isinstance(message, msg.FetchChunk):
            return self.fetch_chunk(message.chunk_hash)
        if isinstance(message, msg.DeleteChunk):
            return self.delete_chunk(message.chunk_hash, message.owner)
        if isinstance(message, msg.StoreLink):
            return self.store_link(message.link, message.owner)
        if isinstance(message, msg.Distribute):
            return self.distribute(message)
        raise TypeError(f"{self.identity} cannot handle {type(message).__name__}")

    # -- chunks ------------------------------------------------------------

    def has_chunk(self, chunk_hash: str) -> bool:
        return chunk_hash in self.store

    def store_chunk(self, chunk_hash: str, data: bytes, owner: str = "") -> msg.StoreAck:
        self._require_alive()
        if digest(data) != chunk_hash:
            raise DigestMismatch(f"payload does not hash to {chunk_hash[:12]}",
                                 node=self.identity, chunk_hash=chunk_hash)
        if chunk_hash not in self.store:
            if self._stored_bytes + len(data) > self.capacity:
                raise CapacityExceeded(
                    f"{self.identity} has {self.capacity - self._stored_bytes} bytes free, "
                    f"chunk needs {len(data)}", node=self.identity)
            self.store.put(chunk_hash, data)
            self._stored_bytes += len(data)
        self.chunk_owners.setdefault(chunk_hash, Counter())[owner] += 1
        # a node never keeps a link for a chunk it holds
        self.links.pop(chunk_hash, None)
        self.link_owners.pop(chunk_hash, None)
        return msg.StoreAck(self.identity, chunk_hash)

    def fetch_chunk(self, chunk_hash: str) -> msg.FetchReply:
        self._require_alive()
        data = self.store.get(chunk_hash)
        if data is not None:
            return msg.FetchReply(msg.DATA, chunk_hash, data=data)
        link = self.get_link(chunk_hash)
        if link is not None:
            return msg.FetchReply(msg.REDIRECT, chunk_hash, holder=link.holder)
        return msg.FetchReply(msg.NOT_FOUND, chunk_hash)

    def delete_chunk(self, chunk_hash: str, owner: str | None = None) -> msg.DeleteAck:
        """Drop one owner's references, or every reference when owner is None."""
        owners = self.chunk_owners.get(chunk_hash)
        if owners is not None and owner is not None:
            owners.pop(owner, None)
            if owners:
                return msg.DeleteAck(self.identity, chunk_hash)
        self.chunk_owners.pop(chunk_hash, None)
        freed = 0
        if chunk_hash in self.store:
            freed = self.store.size_of(chunk_hash)
            self.store.delete(chunk_hash)
            self._stored_bytes -= freed
        return msg.DeleteAck(self.identity, chunk_hash, freed)

    # -- links -------------------------------------------------------------

    def _link_stores(self):
        return ((self.links, self.link_owners), (self.table.links, self.table.link_owners))

    def get_link(self, chunk_hash: str):
        return self.links.get(chunk_hash) or self.table.links.get(chunk_hash)

    def store_link(self, link: LinkRecord, owner: str = "") -> bool:
        """
        Keep a link. A master files every link in its directory, even for a
        chunk it holds itself; any other node skips links for its own chunks.
        """
        self._require_alive()
        if self.is_master:
            links, owners = self.table.links, self.table.link_owners
        elif self.has_chunk(link.chunk_hash):
            return False
        else:
            links, owners = self.links, self.link_owners
        links.setdefault(link.chunk_hash, link)
        owners.setdefault(link.chunk_hash, Counter())[owner] += 1
        return True

    def delete_link(self, chunk_hash: str, owner: str | None = None) -> None:
        for links, link_owners in self._link_stores():
            owners = link_owners.get(chunk_hash)
            if owners is not None and owner is not None:
                owners.pop(owner, None)
                if owners:
                    continue
            link_owners.pop(chunk_hash, None)
            links.pop(chunk_hash, None)

    # -- file lifecycle ----------------------------------------------------

    def references(self, fid: str) -> int:
        return (sum(c[fid] for c in self.chunk_owners.values())
                + sum(c[fid] for _, owners in self._link_stores() for c in owners.values()))

    def chunk_references(self, fid: str) -> int:
        return sum(c[fid] for c in self.chunk_owners.values())

    def purge_file(self, fid: str) -> int:
        """Remove every chunk and link reference owned by `fid`; returns bytes freed."""
        freed = 0
        for chunk_hash in [h for h, c in self.chunk_owners.items() if fid in c]:
            freed += self.delete_chunk(chunk_hash, fid).freed
        for _, owners in self._link_stores():
            for chunk_hash in [h for h, c in owners.items() if fid in c]:
                self.delete_link(chunk_hash, fid)
        return freed

    # -- master duties -----------------------------------------------------

    def distribute(self, message: msg.Distribute):
        """Place this organization's share of a planned stripe among `peers`."""
        self._require_alive()
        if not self.is_master:
            raise WriteFailed(f"{self.identity} is not the master of {self.organization}",
                              node=self.identity)
        return master_distribute(self, message.plan, message.payloads, message.owner, self.peers)

    def snapshot(self, members) -> PlacementState:
        """This organization's view for a client planning a write."""
        state = PlacementState(sequence=self.table.sequence)
        for node in members:
            state.loads[node.identity] = len(node.chunk_owners)
            if not node.alive:
                state.unavailable.add(node.identity)
        state.pending = {b: list(a) for b, a in self.table.pending.items()}
        return state

    # -- persistence -------------------------------------------------------

    def to_state(self) -> dict:
        return {
            "identity": self.identity,
            "organization": self.organization,
            "role": str(self.role),
            "alive": self.alive,
            "chunk_owners": {h: dict(c) for h, c in sorted(self.chunk_owners.items())},
            "links": [self.links[h].as_dict() for h in sorted(self.links)],
            "link_owners": {h: dict(c) for h, c in sorted(self.link_owners.items())},
            "table": self.table.as_dict(),
        }

    def load_state(self, data: dict) -> None:
        self.alive = bool(data.get("alive", True))
        self.chunk_owners = {h: Counter(c) for h, c in data.get("chunk_owners", {}).items()
                             if h in self.store}
        self.links = {d["chunk_hash"]: LinkRecord.from_dict(d) for d in data.get("links", [])}
        self.link_owners = {h: Counter(c) for h, c in data.get("link_owners", {}).items()}
        self.table = DistributionTable.from_dict(data.get("table", {}))
