"""Key pairs, addresses, and the pluggable digest/signature algorithms.

Accounts are identified by 20-byte addresses derived from a public key;
contracts get addresses derived from (creator, creator nonce).  Both the
digest and the signature scheme sit behind a small registry with one
default each ("sha256", "ed25519") so the wire format, not a library,
defines the system.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .encoding import enc_u64
from .errors import BadSignature

ADDRESS_LEN = 20
DIGEST_LEN = 32

# Domain separation tags so an account address can never collide with a
# contract address derived from the same bytes.
_ACCOUNT_TAG = b"ledgercal/addr/account"
_CONTRACT_TAG = b"ledgercal/addr/contract"


@dataclass(frozen=True, order=True)
class Address:
    """20-byte identifier rendered as 0x-prefixed lowercase hex (42 chars)."""

    bytes: bytes

    def __post_init__(self):
        if len(self.bytes) != ADDRESS_LEN:
            raise ValueError(f"address must be {ADDRESS_LEN} bytes")

    def __str__(self) -> str:
        return "0x" + self.bytes.hex()

    @classmethod
    def parse(cls, text: str) -> "Address":
        if not isinstance(text, str) or len(text) != 2 + 2 * ADDRESS_LEN:
            raise ValueError(f"malformed address: {text!r}")
        if not text.startswith("0x") or text[2:].lower() != text[2:]:
            raise ValueError(f"malformed address: {text!r}")
        try:
            raw = bytes.fromhex(text[2:])
        except ValueError:
            raise ValueError(f"malformed address: {text!r}") from None
        return cls(raw)


ZERO_ADDRESS = Address(b"\x00" * ADDRESS_LEN)  # CREATE marker as a tx target


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


class DigestAlgo:
    """Digest interface; implementations must be pure and 32-byte valued."""

    name = "sha256"

    def digest(self, data: bytes) -> bytes:
        return sha256(data)


class SignatureAlgo:
    """Signature interface over raw byte strings."""

    name = "ed25519"
    seed_len = 32

    def keypair_from_seed(self, seed: bytes) -> "KeyPair":
        if len(seed) != self.seed_len:
            raise ValueError(f"seed must be {self.seed_len} bytes")
        priv = Ed25519PrivateKey.from_private_bytes(seed)
        pub = priv.public_key().public_bytes(
            serialization.Encoding.Raw, serialization.PublicFormat.Raw
        )
        return KeyPair(public_key=pub, secret_key=seed)

    def sign(self, secret_key: bytes, message: bytes) -> bytes:
        priv = Ed25519PrivateKey.from_private_bytes(secret_key)
        return priv.sign(message)

    def verify(self, public_key: bytes, message: bytes, signature: bytes) -> bool:
        try:
            Ed25519PublicKey.from_public_bytes(public_key).verify(signature, message)
            return True
        except (InvalidSignature, ValueError):
            return False


_DIGESTS = {"sha256": DigestAlgo()}
_SIGNATURES = {"ed25519": SignatureAlgo()}


def get_digest(name: str = "sha256") -> DigestAlgo:
    try:
        return _DIGESTS[name]
    except KeyError:
        raise ValueError(f"unknown digest algorithm: {name}") from None


def get_signature(name: str = "ed25519") -> SignatureAlgo:
    try:
        return _SIGNATURES[name]
    except KeyError:
        raise ValueError(f"unknown signature algorithm: {name}") from None


def register_digest(name: str, algo: DigestAlgo) -> None:
    _DIGESTS[name] = algo


def register_signature(name: str, algo: SignatureAlgo) -> None:
    _SIGNATURES[name] = algo


@dataclass(frozen=True)
class KeyPair:
    public_key: bytes
    secret_key: bytes

    @property
    def address(self) -> Address:
        return address_from_public_key(self.public_key)


def address_from_public_key(public_key: bytes) -> Address:
    """Last 20 bytes of the tagged sha256 of the raw public key."""
    return Address(sha256(_ACCOUNT_TAG + public_key)[-ADDRESS_LEN:])


def contract_address(creator: Address, creator_nonce: int) -> Address:
    """Deterministic address for a contract deployed by (creator, nonce)."""
    material = _CONTRACT_TAG + creator.bytes + enc_u64(creator_nonce)
    return Address(sha256(material)[-ADDRESS_LEN:])


def keygen(seed: bytes | None = None, algo: str = "ed25519") -> tuple[KeyPair, Address]:
    """Fresh (or seed-determined) keypair plus its derived address."""
    sig = get_signature(algo)
    if seed is None:
        seed = os.urandom(sig.seed_len)
    pair = sig.keypair_from_seed(seed)
    return pair, pair.address


def sign(secret_key: bytes, message: bytes, algo: str = "ed25519") -> bytes:
    return get_signature(algo).sign(secret_key, message)


def verify_or_raise(public_key: bytes, message: bytes, signature: bytes, algo: str = "ed25519") -> None:
    if not get_signature(algo).verify(public_key, message, signature):
        raise BadSignature("signature does not verify")
