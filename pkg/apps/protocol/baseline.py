# apps/protocol/baseline.py
"""
Full-copy baseline: the writer's own node keeps the whole file and a reader
streams it from that single holder. Nothing is replicated or coded.
"""
import logging
import random

from apps.core.digests import digest
from apps.core.exceptions import FileNotFound

from .client import drive

logger = logging.getLogger(__name__)


def stratified_holder(topology, trial: int, seed: int) -> str:
    """Trial t is served by organization t mod M; the node inside it is a seeded draw."""
    orgs = sorted(topology.organizations)
    org = orgs[trial % len(orgs)]
    return random.Random(seed * 100_003 + trial).choice(sorted(topology.organizations[org]))


class BaselineStore:

    def __init__(self, consortium):
        self.consortium = consortium
        self.files = {}     # fid -> (holder, bytes)

    def write(self, holder: str, data: bytes) -> tuple[str, float]:
        """Local write: no network time."""
        fid = digest(data)
        self.files[fid] = (holder, bytes(data))
        return fid, 0.0

    def read(self, fid: str) -> tuple[bytes, float]:
        if fid not in self.files:
            raise FileNotFound(f"baseline has no file {fid}", fid=fid)
        holder, data = self.files[fid]
        return drive(self.consortium.network, self._stream(holder, data))

    def _stream(self, holder, data):
        net = self.consortium.network
        started = net.now()
        yield net.transfer(holder, self.consortium.client, len(data)).done
        return data, net.now() - started

    def delete(self, fid: str) -> None:
        self.files.pop(fid, None)
