"""Canonical JSON serialization and digests.

Every byte that gets hashed or signed goes through canonical_bytes so the
representation is stable across platforms and field-assignment order:
keys sorted bytewise, no insignificant whitespace, floats in shortest
round-trip decimal form, nulls kept explicit.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

ZERO_HASH = b"\x00" * 32


def canonical_bytes(obj: Any) -> bytes:
    """Serialize to canonical UTF-8 JSON bytes.

    Rejects NaN/Infinity: they have no JSON form and would silently break
    digest stability.
    """
    return json.dumps(
        obj,
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        allow_nan=False,
    ).encode("utf-8")


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
