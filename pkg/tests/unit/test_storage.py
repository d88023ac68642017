import numpy as np
import pandas as pd
import pytest

from shared.exceptions import NotFoundError, StorageError
from shared.storage import (
    DocumentRepository,
    TableRepository,
    decode_floats,
    encode_floats,
)

pytestmark = pytest.mark.unit


class TestTableRepository:
    def test_floats_survive_the_csv(self, tmp_path):
        frame = pd.DataFrame({"t": [0.0, 0.1, 0.2], "e_1": [1 / 3, np.pi, -1e-300]})
        tables = TableRepository(tmp_path)
        path = tables.save(frame, "trajectory")
        assert path.name == "trajectory.csv"
        pd.testing.assert_frame_equal(tables.load("trajectory"), frame)

    def test_header_only_table(self, tmp_path):
        tables = TableRepository(tmp_path)
        tables.save(pd.DataFrame(columns=["t", "q_1"]), "empty")
        loaded = tables.load("empty")
        assert list(loaded.columns) == ["t", "q_1"]
        assert loaded.empty

    def test_blank_file_reads_as_empty_frame(self, tmp_path):
        (tmp_path / "blank.csv").write_text("", encoding="utf-8")
        assert TableRepository(tmp_path).load("blank").empty

    def test_list_and_missing(self, tmp_path):
        tables = TableRepository(tmp_path / "nested")
        assert tables.list() == []
        tables.save(pd.DataFrame({"a": [1]}), "b")
        tables.save(pd.DataFrame({"a": [1]}), "a")
        assert tables.list() == ["a", "b"]
        assert tables.exists("a")
        with pytest.raises(NotFoundError):
            tables.load("c")


class TestDocumentRepository:
    def test_round_trip_keeps_key_order(self, tmp_path):
        documents = DocumentRepository(tmp_path)
        documents.save({"z": 1, "a": [1.5, 2.5]}, "config")
        loaded = documents.load("config")
        assert loaded == {"z": 1, "a": [1.5, 2.5]}
        assert list(loaded) == ["z", "a"]

    def test_non_mapping_is_storage_error(self, tmp_path):
        (tmp_path / "list.yml").write_text("- 1\n", encoding="utf-8")
        with pytest.raises(StorageError):
            DocumentRepository(tmp_path).load("list")

    def test_unwritable_root(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x", encoding="utf-8")
        with pytest.raises(StorageError):
            DocumentRepository(blocker / "sub").save({"a": 1}, "doc")


def test_hex_encoding_is_exact():
    values = np.array([[0.1, 1 / 3], [np.pi, -2.5e-310]])
    encoded = encode_floats(values)
    assert isinstance(encoded[0][0], str)
    assert np.array_equal(decode_floats(encoded), values)
    assert decode_floats(encode_floats(0.1)) == 0.1
