# apps/placement/links.py
from dataclasses import dataclass

from apps.core.constants import LINK_RECORD_BYTES
from apps.core.digests import is_digest, public_key


@dataclass(frozen=True)
class LinkRecord:
    """Redirect from a chunk hash to the node that really holds it."""

    chunk_hash: str
    holder: str
    created_at: int = 0

    def __post_init__(self):
        if not is_digest(self.chunk_hash):
            raise ValueError(f"link for malformed hash {self.chunk_hash!r}")

    @property
    def size(self) -> int:
        return LINK_RECORD_BYTES

    def encode(self) -> bytes:
        """64 ASCII hex bytes of the hash followed by the holder's 64-byte key."""
        return self.chunk_hash.encode("ascii") + public_key(self.holder)

    def as_dict(self) -> dict:
        return {"chunk_hash": self.chunk_hash, "holder": self.holder, "created_at": self.created_at}

    @classmethod
    def from_dict(cls, data: dict) -> "LinkRecord":
        return cls(data["chunk_hash"], data["holder"], int(data.get("created_at", 0)))
