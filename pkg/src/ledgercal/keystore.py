"""Local alias -> keypair store with restrictive file permissions.

Keys are the user's sole means of access; the file is chmod 0600 and its
rendering is byte-stable so load/store round-trips exactly.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .crypto import Address, KeyPair, get_signature

STORE_VERSION = 1


class Keystore:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._seeds: dict[str, bytes] = {}
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        raw = json.loads(self.path.read_text())
        if raw.get("version") != STORE_VERSION:
            raise ValueError(f"unsupported keystore version in {self.path}")
        self._seeds = {alias: bytes.fromhex(entry["seed"]) for alias, entry in raw["keys"].items()}

    def save(self) -> None:
        payload = {
            "version": STORE_VERSION,
            "keys": {alias: {"seed": seed.hex()} for alias, seed in sorted(self._seeds.items())},
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd = os.open(self.path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.chmod(self.path, 0o600)

    def create(self, alias: str, seed: bytes | None = None) -> tuple[KeyPair, Address]:
        if alias in self._seeds:
            raise ValueError(f"alias {alias!r} already exists")
        sig = get_signature()
        seed = seed if seed is not None else os.urandom(sig.seed_len)
        pair = sig.keypair_from_seed(seed)
        self._seeds[alias] = seed
        self.save()
        return pair, pair.address

    def get(self, alias: str) -> KeyPair:
        try:
            seed = self._seeds[alias]
        except KeyError:
            raise KeyError(f"no key with alias {alias!r} in {self.path}") from None
        return get_signature().keypair_from_seed(seed)

    def delete(self, alias: str) -> None:
        self._seeds.pop(alias, None)
        self.save()

    def aliases(self) -> list[str]:
        return sorted(self._seeds)

    def address_of(self, alias: str) -> Address:
        return self.get(alias).address
