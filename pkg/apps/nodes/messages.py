# apps/nodes/messages.py
"""
Messages a DBNode accepts.

    StoreChunk   chunk_hash, data, owner        payload = len(data)
    FetchChunk   chunk_hash                     payload = 64 (the hash)
    DeleteChunk  chunk_hash, owner              payload = 64
    StoreLink    link, owner                    payload = 128
    Distribute   plan, payloads, owner, org     payload = the org's chunk bytes

Replies are StoreAck, FetchReply, DeleteAck and, for Distribute, a
DistributeReport. A fetch reply is data, a one-hop redirect or not-found.
"""
from dataclasses import dataclass, field

from apps.core.constants import DIGEST_HEX_LENGTH, LINK_RECORD_BYTES
from apps.placement.links import LinkRecord


@dataclass(frozen=True)
class StoreChunk:
    chunk_hash: str
    data: bytes = field(repr=False)
    owner: str = ""

    @property
    def wire_size(self) -> int:
        return len(self.data)


@dataclass(frozen=True)
class FetchChunk:
    chunk_hash: str

    wire_size = DIGEST_HEX_LENGTH


@dataclass(frozen=True)
class DeleteChunk:
    chunk_hash: str
    owner: str | None = None

    wire_size = DIGEST_HEX_LENGTH


@dataclass(frozen=True)
class StoreLink:
    link: LinkRecord
    owner: str = ""

    wire_size = LINK_RECORD_BYTES


@dataclass(frozen=True)
class Distribute:
    """A master's share of one planned stripe: chunks held in `organization`."""

    plan: object            # PlacementPlan
    payloads: dict = field(repr=False)  # chunk hash -> bytes
    owner: str = ""
    organization: str = ""

    @property
    def wire_size(self) -> int:
        return sum(len(self.payloads[e.chunk_hash]) for e in self.plan.entries
                   if e.holder_org == self.organization)


@dataclass(frozen=True)
class StoreAck:
    node: str
    chunk_hash: str
    stored: bool = True


@dataclass(frozen=True)
class DeleteAck:
    node: str
    chunk_hash: str
    freed: int = 0


DATA = "data"
REDIRECT = "redirect"
NOT_FOUND = "not_found"


@dataclass(frozen=True)
class FetchReply:
    kind: str
    chunk_hash: str
    data: bytes | None = field(default=None, repr=False)
    holder: str | None = None

    @property
    def ok(self) -> bool:
        return self.kind == DATA
