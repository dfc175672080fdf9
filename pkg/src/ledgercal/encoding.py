"""Canonical binary encoding primitives.

Every structure that is hashed or signed anywhere in the system is encoded
through these helpers, so digest equality is independent of any in-memory
representation.  The byte layout is documented field by field in
``docs/wire.md``; changing anything here is a wire-format break.
"""

from __future__ import annotations

import json
from typing import Any, Iterator

U32_MAX = 2**32 - 1
U64_MAX = 2**64 - 1


def enc_u8(n: int) -> bytes:
    if not 0 <= n <= 0xFF:
        raise ValueError(f"u8 out of range: {n}")
    return n.to_bytes(1, "big")


def enc_u32(n: int) -> bytes:
    if not 0 <= n <= U32_MAX:
        raise ValueError(f"u32 out of range: {n}")
    return n.to_bytes(4, "big")


def enc_u64(n: int) -> bytes:
    if not 0 <= n <= U64_MAX:
        raise ValueError(f"u64 out of range: {n}")
    return n.to_bytes(8, "big")


def enc_bytes(b: bytes) -> bytes:
    return enc_u32(len(b)) + b


def enc_str(s: str) -> bytes:
    return enc_bytes(s.encode("utf-8"))


class Reader:
    """Sequential decoder over one canonical byte string.

    Raises ValueError on truncation or trailing garbage so that malformed
    wire data can never decode silently.
    """

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def _take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise ValueError("truncated encoding")
        chunk = self._data[self._pos : self._pos + n]
        self._pos += n
        return chunk

    def u8(self) -> int:
        return self._take(1)[0]

    def u32(self) -> int:
        return int.from_bytes(self._take(4), "big")

    def u64(self) -> int:
        return int.from_bytes(self._take(8), "big")

    def raw(self, n: int) -> bytes:
        return self._take(n)

    def bytes_(self) -> bytes:
        return self._take(self.u32())

    def str_(self) -> str:
        return self.bytes_().decode("utf-8")

    def done(self) -> bool:
        return self._pos == len(self._data)

    def expect_done(self) -> None:
        if not self.done():
            raise ValueError("trailing bytes after encoding")


def _check_json_value(value: Any) -> None:
    if value is None or isinstance(value, bool) or isinstance(value, str):
        return
    if isinstance(value, int):
        # floats are excluded on purpose: no canonical cross-language rendering
        return
    if isinstance(value, float):
        raise ValueError("floats are not allowed in canonical call arguments")
    if isinstance(value, list):
        for item in value:
            _check_json_value(item)
        return
    if isinstance(value, dict):
        for key, item in value.items():
            if not isinstance(key, str):
                raise ValueError("argument object keys must be strings")
            _check_json_value(item)
        return
    raise ValueError(f"unsupported argument type: {type(value).__name__}")


def canonical_json(value: Any) -> bytes:
    """UTF-8 bytes of the canonical JSON rendering (sorted keys, no spaces).

    Allowed values: null, bool, int, str, list, dict with str keys.
    """
    _check_json_value(value)
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def decode_json(data: bytes) -> Any:
    value = json.loads(data.decode("utf-8"))
    _check_json_value(value)
    return value


def iter_length_prefixed(data: bytes) -> Iterator[bytes]:
    """Yield the records of an append-only length-prefixed file body."""
    pos = 0
    while pos < len(data):
        if pos + 4 > len(data):
            raise ValueError("truncated record length")
        n = int.from_bytes(data[pos : pos + 4], "big")
        pos += 4
        if pos + n > len(data):
            raise ValueError("truncated record body")
        yield data[pos : pos + n]
        pos += n
