# apps/erasure/codec.py
"""
(n, k) Reed-Solomon through liberasurecode.

A stripe's k data chunks are joined and handed to the driver, which returns
n fragments that each carry their own index and checksum header. Those
fragments are the stored chunks. Any k of them give back the joined payload,
which is split again into k equal data chunks.
"""
import logging
from functools import lru_cache

from pyeclib.ec_iface import ECDriver, ECDriverError

from apps.core.exceptions import UnrecoverableStripe

logger = logging.getLogger(__name__)

EC_TYPE = "liberasurecode_rs_vand"


class ErasureCodec:

    def __init__(self, n: int, k: int, ec_type: str = EC_TYPE):
        if not 1 <= k < n:
            raise ValueError(f"unsupported code ({n}, {k})")
        self.n = n
        self.k = k
        try:
            self.driver = ECDriver(k=k, m=n - k, ec_type=ec_type)
        except ECDriverError as exc:
            raise ValueError(f"unsupported code ({n}, {k}) for {ec_type}: {exc}") from exc

    def encode(self, data_chunks) -> list[bytes]:
        """k equal-length byte chunks -> n fragments."""
        if len(data_chunks) != self.k:
            raise ValueError(f"expected {self.k} data chunks, got {len(data_chunks)}")
        lengths = {len(c) for c in data_chunks}
        if len(lengths) != 1:
            raise ValueError(f"data chunks differ in length: {sorted(lengths)}")
        if not lengths.pop():
            raise ValueError("data chunks are empty")
        return [bytes(f) for f in self.driver.encode(b"".join(data_chunks))]

    def decode(self, available) -> list[bytes]:
        """{index: fragment} with at least k entries -> k data chunks."""
        indices = sorted(i for i in available if 0 <= i < self.n)
        if len(indices) < self.k:
            raise UnrecoverableStripe(
                f"{len(indices)} chunks available, {self.k} needed",
                available=indices)
        try:
            payload = self.driver.decode([bytes(available[i]) for i in indices])
        except ECDriverError as exc:
            logger.error("Decoding from fragments %s failed: %s", indices, exc)
            raise UnrecoverableStripe(f"fragments {indices} do not decode: {exc}",
                                      available=indices) from exc
        size = len(payload) // self.k
        return [payload[j * size:(j + 1) * size] for j in range(self.k)]


@lru_cache(maxsize=32)
def get_codec(n: int, k: int) -> ErasureCodec:
    return ErasureCodec(n, k)
