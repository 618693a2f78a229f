import json

import numpy as np
import pytest

from citypulse.config import RunConfig, parse_config, pick
from citypulse.container import read_container, write_container
from citypulse.errors import ArtifactError, ConfigError
from citypulse.geo import CITY_PRESETS, PlaceMode
from citypulse.store import (ArtifactStore, check_digest, check_magic, digests, file_digest, input_hash,
                             load_manifest, write_lock)


def test_parse_config():
    cfg = parse_config("""
# comment
seed = 7
lda.k = 5   # trailing note
preprocess.preset = topic
city.x.sw = [1.0, 2.0]
flag = true
""")
    assert cfg == {"seed": 7, "lda.k": 5, "preprocess.preset": "topic", "city.x.sw": [1.0, 2.0], "flag": True}
    for bad in ("no equals sign", "a..b = 1", " = 3"):
        with pytest.raises(ConfigError):
            parse_config(bad)


def test_flags_beat_file_beat_defaults(tmp_path):
    p = tmp_path / "run.conf"
    p.write_text("seed = 3\nlda.k = 9\n")
    cfg = RunConfig.load(str(p))
    assert cfg.seed == 3
    assert pick(cfg, "lda.k", None, 50, int) == 9
    assert pick(cfg, "lda.k", 4, 50, int) == 4
    assert pick(cfg, "lda.iterations", None, 20, int) == 20
    assert cfg.override(seed=11, other=None).seed == 11
    assert cfg.section("lda") == {"k": 9}
    with pytest.raises(ConfigError):
        pick(RunConfig({"lda.k": "many"}), "lda.k", None, 1, int)
    with pytest.raises(ConfigError):
        RunConfig({"seed": "x"}).seed
    with pytest.raises(ConfigError):
        RunConfig.load(str(tmp_path / "missing.conf"))


def test_city_resolution():
    assert RunConfig().city("rio") == CITY_PRESETS["rio"]
    c = RunConfig({"city.rio.place_mode": "overlap", "city.rio.utc_offset": -120}).city("rio")
    assert c.place_mode is PlaceMode.OVERLAP and c.utc_offset_minutes == -120 and c.box == CITY_PRESETS["rio"].box
    custom = RunConfig({"city.here.sw": [0, 0], "city.here.ne": [1, 1]}).city("here")
    assert custom.box.ne.lat == 1 and custom.place_mode is PlaceMode.CONTAINMENT
    for bad in ({}, {"city.here.utc_offset": 0}, {"city.here.sw": [1, 1], "city.here.ne": [0, 0]},
                {"city.here.sw": [0, 0], "city.here.ne": [1, 1], "city.here.place_mode": "near"}):
        with pytest.raises(ConfigError):
            RunConfig(bad).city("here")


def test_container_round_trip_and_corruption(tmp_path):
    p = tmp_path / "a.bin"
    write_container(p, "CPTEST", {"note": "x"}, {"w": ("f32", np.arange(6.0).reshape(2, 3)),
                                                 "i": ("i32", np.array([1, -2]))})
    header, arr = read_container(p, "CPTEST")
    assert header["note"] == "x" and arr["w"].shape == (2, 3) and arr["i"].tolist() == [1, -2]
    assert check_magic(p, "CPTEST")["version"] == 1
    with pytest.raises(ArtifactError):
        check_magic(p, "OTHER")
    with pytest.raises(ArtifactError):
        read_container(p, "CPTEST", version=2)
    p.write_bytes(p.read_bytes()[:-3])
    with pytest.raises(ArtifactError):
        read_container(p, "CPTEST")
    p.write_bytes(p.read_bytes() + b"0123")
    with pytest.raises(ArtifactError):
        read_container(p, "CPTEST")
    with pytest.raises(ArtifactError):
        check_magic(tmp_path / "nope", "CPTEST")


def test_store_naming_and_manifest(tmp_path):
    src = tmp_path / "in.txt"
    src.write_text("hello")
    d = digests({"docs": str(src), "vocab": None})
    assert list(d) == ["docs"] and d["docs"] == file_digest(src)
    store = ArtifactStore(tmp_path / "store")
    a = store.path_for("vocab", "topic", d, {"min_count": 1}, "json")
    b = store.path_for("vocab", "topic", d, {"min_count": 2}, "json")
    assert a != b and a.parent.name == "vocab" and len(a.stem.split("-")[-1]) == 8
    assert input_hash(d, {"x": 1}) == input_hash(dict(d), {"x": 1})
    a.parent.mkdir(parents=True)
    a.write_text("{}")
    ArtifactStore.record(a, "vocab", d, {"min_count": 1}, {"seed": 0}, [a])
    m = load_manifest(a)
    assert m["inputs"] == d and m["outputs"] == {a.name: file_digest(a)}
    assert load_manifest(b) is None
    check_digest(src, d["docs"], "docs")
    src.write_text("changed")
    with pytest.raises(ArtifactError):
        check_digest(src, d["docs"], "docs")


def test_store_root_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("CITYPULSE_HOME", str(tmp_path))
    assert ArtifactStore().root == tmp_path
    monkeypatch.delenv("CITYPULSE_HOME")
    assert str(ArtifactStore().root) == ".citypulse"


def test_write_lock_is_exclusive(tmp_path):
    target = tmp_path / "x" / "model.bin"
    with write_lock(target):
        with pytest.raises(ArtifactError):
            with write_lock(target):
                pass
    with write_lock(target):
        pass
    assert not (tmp_path / "x" / "model.bin.lock").exists()
