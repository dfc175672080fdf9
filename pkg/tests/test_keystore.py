import stat

import pytest

from ledgercal.keystore import Keystore


def test_create_and_reload(tmp_path):
    path = tmp_path / "keys.json"
    ks = Keystore(path)
    pair, addr = ks.create("alice", seed=b"\x05" * 32)
    assert pair.address == addr

    again = Keystore(path)
    assert again.aliases() == ["alice"]
    assert again.get("alice") == pair
    assert again.address_of("alice") == addr


def test_duplicate_alias_rejected(tmp_path):
    ks = Keystore(tmp_path / "keys.json")
    ks.create("alice")
    with pytest.raises(ValueError):
        ks.create("alice")


def test_unknown_alias(tmp_path):
    ks = Keystore(tmp_path / "keys.json")
    with pytest.raises(KeyError):
        ks.get("nobody")


def test_file_permissions_are_restrictive(tmp_path):
    path = tmp_path / "keys.json"
    Keystore(path).create("alice")
    mode = stat.S_IMODE(path.stat().st_mode)
    assert mode == 0o600


def test_save_load_roundtrip_is_byte_identical(tmp_path):
    path = tmp_path / "keys.json"
    ks = Keystore(path)
    ks.create("bob", seed=b"\x01" * 32)
    ks.create("alice", seed=b"\x02" * 32)
    original = path.read_bytes()
    reloaded = Keystore(path)
    reloaded.save()
    assert path.read_bytes() == original


def test_delete(tmp_path):
    path = tmp_path / "keys.json"
    ks = Keystore(path)
    ks.create("alice")
    ks.delete("alice")
    assert Keystore(path).aliases() == []
