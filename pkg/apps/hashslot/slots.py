# apps/hashslot/slots.py
"""Chunk hash -> slot routing, the same CRC16 scheme Redis Cluster uses."""
from redis.crc import REDIS_CLUSTER_HASH_SLOTS, key_slot

from apps.core.digests import digest, is_digest

SLOT_COUNT = REDIS_CLUSTER_HASH_SLOTS


def crc_slot(raw: bytes) -> int:
    """CRC-16/XMODEM of raw bytes modulo 16,384."""
    return key_slot(raw, SLOT_COUNT)


def _require_digest(chunk_hash):
    if not is_digest(chunk_hash):
        raise ValueError(f"not a 64-character hex digest: {chunk_hash!r}")


def slot_of(chunk_hash: str) -> int:
    _require_digest(chunk_hash)
    return crc_slot(chunk_hash.encode("ascii"))


def intra_slot_of(chunk_hash: str, organization: str) -> int:
    """
    Slot of a chunk inside one organization's intra table.

    CRC16 is linear, so salting the hash would only XOR the inter slot with a
    constant and keep whole organizations inside one intra range. The intra
    slot is taken over a second digest of (organization, hash) instead.
    """
    _require_digest(chunk_hash)
    salted = digest(f"{organization}/{chunk_hash}".encode("utf-8"))
    return crc_slot(salted.encode("ascii"))
