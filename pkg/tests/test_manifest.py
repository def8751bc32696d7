"""Tests for utils.manifest."""

import os

import pytest

from utils.manifest import CorpusManifest, ManifestEntry, read_jsonl, resolve, write_jsonl


def touch(path):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    open(path, 'wb').close()


class TestCorpusManifest:
    def test_load_file(self, tmp_path):
        manifest_file = tmp_path / 'speech.txt'
        manifest_file.write_text("# corpus\n\naudio/a.wav\tspk1\n/abs/b.wav\n")
        manifest = CorpusManifest.load(str(manifest_file))
        assert len(manifest) == 2
        assert manifest[0] == ManifestEntry(os.path.join(str(tmp_path), 'audio/a.wav'), 'spk1')
        assert manifest[1] == ManifestEntry('/abs/b.wav', None)

    def test_too_many_columns(self, tmp_path):
        manifest_file = tmp_path / 'bad.txt'
        manifest_file.write_text("a.wav\tspk\textra\n")
        with pytest.raises(ValueError, match="bad.txt:1"):
            CorpusManifest.load(str(manifest_file))

    def test_missing(self, tmp_path):
        with pytest.raises(ValueError, match="not found"):
            CorpusManifest.load(str(tmp_path / 'nope.txt'))

    def test_scan_directory(self, tmp_path):
        touch(str(tmp_path / 'spk2' / 'x.wav'))
        touch(str(tmp_path / 'spk1' / 'y.WAV'))
        touch(str(tmp_path / 'spk1' / 'notes.txt'))
        touch(str(tmp_path / '.git' / 'z.wav'))
        manifest = CorpusManifest.load(str(tmp_path))
        assert [(os.path.basename(e.path), e.speaker) for e in manifest] == [('y.WAV', 'spk1'), ('x.wav', 'spk2')]

    def test_save_and_reload(self, tmp_path):
        manifest = CorpusManifest([ManifestEntry('/a.wav', 's1'), ManifestEntry('/b.wav')])
        path = str(tmp_path / 'out.txt')
        manifest.save(path)
        assert list(CorpusManifest.load(path)) == list(manifest)


class TestJsonl:
    def test_write_and_read(self, tmp_path):
        path = str(tmp_path / 'deep' / 'manifest.jsonl')
        write_jsonl(path, [{'b': 1, 'a': 2}, {'c': None}])
        assert read_jsonl(path) == [{'a': 2, 'b': 1}, {'c': None}]
        with open(path) as f:
            assert f.readline() == '{"a": 2, "b": 1}\n'

    def test_invalid_line(self, tmp_path):
        path = tmp_path / 'bad.jsonl'
        path.write_text('{"a": 1}\n{broken\n')
        with pytest.raises(ValueError, match="bad.jsonl:2"):
            read_jsonl(str(path))

    def test_missing(self, tmp_path):
        with pytest.raises(ValueError, match="not found"):
            read_jsonl(str(tmp_path / 'none.jsonl'))

    def test_resolve(self):
        assert resolve('x.wav', '/data') == '/data/x.wav'
        assert resolve('/abs/x.wav', '/data') == '/abs/x.wav'
