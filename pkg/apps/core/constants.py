"""
Units and fixed sizes shared across the DBNode apps.
"""

MB = 1_000_000
MBIT = 1_000_000

# 64-character hex digest + 64-byte node public key.
LINK_HASH_BYTES = 64
LINK_KEY_BYTES = 64
LINK_RECORD_BYTES = LINK_HASH_BYTES + LINK_KEY_BYTES

DIGEST_HEX_LENGTH = 64

DEFAULT_CHANNEL = "fc"
