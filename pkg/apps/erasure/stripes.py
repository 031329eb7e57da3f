# apps/erasure/stripes.py
"""
File <-> stripe conversion.

A file is cut into groups of k data chunks of chunk_size bytes. The final
group is zero-padded; the original length travels in the file tree so the
padding is dropped again on reassembly.
"""
import math
from dataclasses import dataclass, field

from apps.core.digests import digest, digest_lines
from apps.core.exceptions import MissingStripe

from .codec import get_codec
from .params import CodeParams


@dataclass(frozen=True)
class Chunk:
    index: int
    data: bytes = field(repr=False)
    hash: str = ""

    def __post_init__(self):
        if not self.hash:
            object.__setattr__(self, "hash", digest(self.data))

    @property
    def size(self) -> int:
        return len(self.data)


@dataclass(frozen=True)
class Stripe:
    index: int
    chunks: tuple

    @property
    def stripe_hash(self) -> str:
        return digest_lines(c.hash for c in self.chunks)

    @property
    def chunk_hashes(self) -> list[str]:
        return [c.hash for c in self.chunks]


@dataclass(frozen=True)
class Partition:
    groups: list
    original_length: int

    @property
    def stripe_count(self) -> int:
        return len(self.groups)


def partition_file(data: bytes, chunk_size: int, k: int) -> Partition:
    if chunk_size <= 0:
        raise ValueError(f"chunk_size must be positive, got {chunk_size}")
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")

    view = memoryview(data)
    stripe_bytes = k * chunk_size
    stripe_count = math.ceil(len(data) / stripe_bytes)
    groups = []
    for s in range(stripe_count):
        group = []
        for j in range(k):
            start = s * stripe_bytes + j * chunk_size
            piece = bytes(view[start:start + chunk_size])
            if len(piece) < chunk_size:
                piece += bytes(chunk_size - len(piece))
            group.append(piece)
        groups.append(group)
    return Partition(groups=groups, original_length=len(data))


def encode_stripe(data_chunks, params: CodeParams, index: int = 0) -> Stripe:
    encoded = get_codec(params.n, params.k).encode(list(data_chunks))
    return Stripe(index=index, chunks=tuple(Chunk(i, c) for i, c in enumerate(encoded)))


def decode_stripe(available, params: CodeParams) -> list[bytes]:
    """
    Recover the k data chunks of a stripe.

    `available` maps chunk index to fragment bytes, or is an iterable of
    (index, bytes) pairs. Callers drop chunks whose digest does not match
    before decoding.
    """
    if not isinstance(available, dict):
        available = dict(available)
    return get_codec(params.n, params.k).decode(available)


def encode_file(data: bytes, params: CodeParams, chunk_size: int):
    partition = partition_file(data, chunk_size, params.k)
    stripes = [encode_stripe(group, params, index=i)
               for i, group in enumerate(partition.groups)]
    return stripes, partition.original_length


def reassemble_file(stripes, original_length: int, stripe_count: int | None = None) -> bytes:
    """
    Concatenate decoded stripes and cut the padding.

    `stripes` is a sequence of k-chunk lists (None for a stripe that could not
    be decoded) or a mapping stripe index -> chunk list.
    """
    if not isinstance(stripes, dict):
        stripes = {i: s for i, s in enumerate(stripes) if s is not None}
    if stripe_count is None:
        stripe_count = max(stripes, default=-1) + 1

    out = bytearray()
    for index in range(stripe_count):
        if index not in stripes:
            raise MissingStripe(f"stripe {index} is missing", stripe=index)
        for chunk in stripes[index]:
            out += chunk
    if len(out) < original_length:
        raise MissingStripe(
            f"stripe {stripe_count} is missing: have {len(out)} of {original_length} bytes",
            stripe=stripe_count)
    del out[original_length:]
    return bytes(out)
