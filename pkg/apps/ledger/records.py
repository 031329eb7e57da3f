# apps/ledger/records.py
"""
File trees and access policies, with the canonical text the ledger stores.

Canonical text is field-ordered and newline-delimited so a file identifier
recomputed on any platform matches the one on the ledger.
"""
from dataclasses import dataclass, field

from apps.core.digests import digest_lines
from apps.core.exceptions import DigestMismatch, InvalidFileTree


def _check_identity(value: str, what: str) -> str:
    if not value or any(ch.isspace() for ch in value) or "," in value:
        raise InvalidFileTree(f"invalid {what} identity {value!r}")
    return value


@dataclass(frozen=True)
class FileTree:
    """File hash -> stripe hashes -> chunk hashes, plus original length."""

    stripes: tuple          # one tuple of chunk hashes per stripe
    original_length: int
    owner: str

    def __post_init__(self):
        object.__setattr__(self, "stripes", tuple(tuple(s) for s in self.stripes))
        _check_identity(self.owner, "owner")

    @property
    def stripe_hashes(self) -> list[str]:
        return [digest_lines(chunks) for chunks in self.stripes]

    @property
    def file_hash(self) -> str:
        return digest_lines([*self.stripe_hashes, str(self.original_length)])

    fid = file_hash

    @property
    def stripe_count(self) -> int:
        return len(self.stripes)

    def chunk_hashes(self):
        for chunks in self.stripes:
            yield from chunks

    def as_dict(self) -> dict:
        return {
            "fid": self.file_hash,
            "owner": self.owner,
            "original_length": self.original_length,
            "stripes": [list(s) for s in self.stripes],
        }

    def to_canonical(self) -> str:
        lines = [
            f"fid {self.file_hash}",
            f"owner {self.owner}",
            f"length {self.original_length}",
            f"stripes {self.stripe_count}",
        ]
        for stripe_hash, chunks in zip(self.stripe_hashes, self.stripes):
            lines.append(" ".join(["stripe", stripe_hash, *chunks]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_canonical(cls, text: str) -> "FileTree":
        lines = text.splitlines()
        try:
            head = dict(line.split(" ", 1) for line in lines[:4])
            stripe_lines = [line.split() for line in lines[4:] if line]
            fid, owner = head["fid"], head["owner"]
            length, count = int(head["length"]), int(head["stripes"])
        except (KeyError, ValueError) as exc:
            raise InvalidFileTree(f"malformed file tree text: {exc}") from exc
        if len(stripe_lines) != count or any(p[0] != "stripe" for p in stripe_lines):
            raise InvalidFileTree(f"file tree lists {len(stripe_lines)} stripes, header says {count}")

        tree = cls(stripes=[p[2:] for p in stripe_lines], original_length=length, owner=owner)
        recorded = [p[1] for p in stripe_lines]
        if recorded != tree.stripe_hashes or fid != tree.file_hash:
            raise DigestMismatch(f"file tree {fid[:12]} does not hash to its identifier", fid=fid)
        return tree


@dataclass(frozen=True)
class AccessPolicy:
    permission_list: frozenset = field(default_factory=frozenset)
    banned_list: frozenset = field(default_factory=frozenset)
    tokens: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "permission_list", frozenset(self.permission_list))
        object.__setattr__(self, "banned_list", frozenset(self.banned_list))
        if self.tokens is not None and self.tokens < 0:
            raise InvalidFileTree(f"token count cannot be negative: {self.tokens}")

    def admits(self, requester: str) -> bool:
        """Permission and banned rules only; tokens are checked by the ledger."""
        if requester in self.banned_list:
            return False
        return not self.permission_list or requester in self.permission_list

    def to_canonical(self) -> str:
        tokens = "-" if self.tokens is None else str(self.tokens)
        return (
            f"permit {','.join(sorted(self.permission_list))}\n"
            f"ban {','.join(sorted(self.banned_list))}\n"
            f"tokens {tokens}\n"
        )

    @classmethod
    def from_canonical(cls, text: str) -> "AccessPolicy":
        fields = dict((line.split(" ", 1) + [""])[:2] for line in text.splitlines() if line)
        tokens = fields.get("tokens", "-")
        return cls(
            permission_list=[p for p in fields.get("permit", "").split(",") if p],
            banned_list=[b for b in fields.get("ban", "").split(",") if b],
            tokens=None if tokens == "-" else int(tokens),
        )


@dataclass(frozen=True)
class Grant:
    tree: FileTree
    policy: AccessPolicy
    final: bool = False     # the tokens ran out with this read
