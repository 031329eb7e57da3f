# apps/core/digests.py
"""
Content digests used for chunk, stripe and file identities.

Every identity in the system is a SHA-256 digest rendered as 64 lowercase hex
characters. Stripe and file digests are taken over newline-joined text so
they do not depend on platform byte order.
"""
import hashlib
import re

from .constants import DIGEST_HEX_LENGTH

_HEX_DIGEST = re.compile(r"^[0-9a-f]{%d}$" % DIGEST_HEX_LENGTH)


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest_lines(lines) -> str:
    """Digest over an ordered sequence of text lines."""
    payload = "\n".join(str(line) for line in lines).encode("ascii")
    return hashlib.sha256(payload).hexdigest()


def is_digest(value) -> bool:
    return isinstance(value, str) and bool(_HEX_DIGEST.match(value))


def public_key(identity: str) -> bytes:
    """64-byte public-key form of an opaque node identity."""
    return hashlib.sha512(identity.encode("utf-8")).digest()
