import logging

import numpy as np
import pytest

from src.database.run_store import RunManifest, RunStore, read_manifest, write_manifest
from src.utils.exceptions import ConfigError
from src.utils.helpers import (canonical_json, config_hash, config_section, load_config,
                               read_json, resolve_log_level, write_json)


@pytest.fixture
def store(tmp_path):
    with RunStore(tmp_path / "runs.db") as s:
        yield s


def manifest(command="synth", outputs=(), status="ok"):
    return RunManifest(command=command, config_hash="ab" * 32, seed=0, version="0.1.0",
                       wall_time=0.5, inputs=["coeff.json"], outputs=list(outputs), status=status)


class TestRunStore:
    def test_record_and_fetch(self, store, tmp_path):
        run_id = store.record_run(manifest(outputs=[tmp_path / "gamma.cgof"]), tmp_path)
        run = store.get_run(run_id)
        assert run.command == "synth"
        assert run.output_dir == str(tmp_path)
        assert [a.kind for a in store.artifacts_for(run_id)] == ["cgof"]

    def test_artifact_moves_to_latest_run(self, store, tmp_path):
        path = tmp_path / "curve.csv"
        first = store.record_run(manifest("curve", [path]), tmp_path)
        second = store.record_run(manifest("curve", [path]), tmp_path)
        assert first != second
        assert store.owner_of(path) == second
        assert store.artifacts_for(first) == []

    def test_stats(self, store, tmp_path):
        store.record_run(manifest("synth", [tmp_path / "a.cgof"]), tmp_path)
        store.record_run(manifest("forward", [tmp_path / "b.cgof"], status="failed"), tmp_path)
        stats = store.get_stats()
        assert stats['total_runs'] == 2
        assert stats['failed_runs'] == 1
        assert stats['artifacts'] == 2
        assert stats['by_command'] == {'synth': 1, 'forward': 1}
        assert len(store.get_runs(command="forward")) == 1

    def test_unknown_path_has_no_owner(self, store, tmp_path):
        assert store.owner_of(tmp_path / "missing.json") is None


def test_manifest_roundtrip(tmp_path):
    original = manifest(outputs=["gamma.cgof", "mu.cgof"])
    path = write_manifest(tmp_path, original)
    assert path.name == "manifest.json"
    assert read_manifest(tmp_path) == original


class TestHelpers:
    def test_config_hash_ignores_key_order(self):
        assert config_hash({'a': 1, 'b': [1, 2]}) == config_hash({'b': [1, 2], 'a': 1})
        assert config_hash({'a': 1}) != config_hash({'a': 2})

    def test_canonical_json_handles_numpy(self):
        text = canonical_json({'x': np.float64(0.5), 'z': 1 + 2j, 'v': np.arange(2)})
        assert text == '{"v":[0,1],"x":0.5,"z":[1.0,2.0]}'

    def test_json_files(self, tmp_path):
        write_json(tmp_path / "out" / "a.json", {'k': np.int64(3)})
        assert read_json(tmp_path / "out" / "a.json") == {'k': 3}
        (tmp_path / "bad.json").write_text("{", encoding='utf-8')
        with pytest.raises(ConfigError):
            read_json(tmp_path / "bad.json")

    def test_load_config(self, tmp_path):
        path = tmp_path / "settings.yaml"
        path.write_text("grid:\n  n: 16\n", encoding='utf-8')
        assert load_config(path) == {'grid': {'n': 16}}
        path.write_text("- 1\n- 2\n", encoding='utf-8')
        with pytest.raises(ConfigError):
            load_config(path)
        path.write_text("grid: [unclosed\n", encoding='utf-8')
        with pytest.raises(ConfigError):
            load_config(path)

    def test_template_config_loads(self):
        config = load_config()
        assert config_section(config, 'grid')['n'] > 0

    def test_config_section(self):
        assert config_section({'grid': None}, 'grid') == {}
        with pytest.raises(ConfigError):
            config_section({'grid': 3}, 'grid')

    def test_log_level(self, monkeypatch):
        monkeypatch.setenv("CGO_MAXWELL_LOG", "debug")
        assert resolve_log_level() == logging.DEBUG
        assert resolve_log_level(logging.ERROR) == logging.ERROR
        monkeypatch.setenv("CGO_MAXWELL_LOG", "")
        assert resolve_log_level() == logging.INFO
