# apps/nodes/stores.py
"""
Chunk stores: hash -> bytes.

MemoryChunkStore backs simulations and benchmarks. DirectoryChunkStore keeps
one file per chunk hash through Django's storage API, rooted at the node's
directory under NODE_STORAGE_ROOT.
"""
import os

from django.conf import settings
from django.core.files.base import ContentFile
from django.core.files.storage import FileSystemStorage


class MemoryChunkStore:

    def __init__(self):
        self._chunks = {}

    def __contains__(self, chunk_hash):
        return chunk_hash in self._chunks

    def __len__(self):
        return len(self._chunks)

    def get(self, chunk_hash):
        return self._chunks.get(chunk_hash)

    def put(self, chunk_hash, data: bytes) -> None:
        self._chunks[chunk_hash] = bytes(data)

    def delete(self, chunk_hash) -> None:
        self._chunks.pop(chunk_hash, None)

    def keys(self):
        return sorted(self._chunks)

    def size_of(self, chunk_hash) -> int:
        return len(self._chunks[chunk_hash])


class DirectoryChunkStore:

    def __init__(self, node: str, root: str | None = None):
        root = root or settings.NODE_STORAGE_ROOT
        self.location = os.path.join(root, node)
        self.storage = FileSystemStorage(location=self.location)
        self._index = set(self._scan())

    def _scan(self):
        if not os.path.isdir(self.location):
            return []
        _, files = self.storage.listdir("")
        return [f for f in files if len(f) == 64]

    def __contains__(self, chunk_hash):
        return chunk_hash in self._index

    def __len__(self):
        return len(self._index)

    def get(self, chunk_hash):
        if chunk_hash not in self._index:
            return None
        with self.storage.open(chunk_hash, "rb") as fh:
            return fh.read()

    def put(self, chunk_hash, data: bytes) -> None:
        if chunk_hash in self._index:
            return
        self.storage.save(chunk_hash, ContentFile(bytes(data)))
        self._index.add(chunk_hash)

    def delete(self, chunk_hash) -> None:
        if chunk_hash in self._index:
            self.storage.delete(chunk_hash)
            self._index.discard(chunk_hash)

    def keys(self):
        return sorted(self._index)

    def size_of(self, chunk_hash) -> int:
        return self.storage.size(chunk_hash)
