"""Tests for the bundled regression corpus."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import pytest

from qchain.corpus import CorpusEntry, load_index, run_corpus, run_document
from qchain.errors import ErrorCode, InvalidInputError, ScenarioParseError
from qchain.scenario import RunSettings


@pytest.fixture
def small_corpus(tmp_path: Path, qubit_document: dict[str, Any]) -> Path:
    """Three documents: one pinned, one unpinned and one broken."""
    directory = tmp_path / "corpus"
    directory.mkdir()
    (directory / "a-qubit.json").write_text(json.dumps(qubit_document))
    renamed = {**qubit_document, "name": "renamed"}
    (directory / "b-renamed.json").write_text(json.dumps(renamed))
    (directory / "c-broken.json").write_text("{ not json")
    return directory


class TestBundledCorpus:
    """The bundled documents all reproduce their pinned values."""

    def test_index_lists_every_document(self, corpus_dir: Path) -> None:
        index = load_index(corpus_dir)
        files = {p.name for p in corpus_dir.glob("*.json") if p.name != "index.json"}
        assert set(index) == files
        assert len(index) == 20

    def test_all_documents_pass(self, corpus_dir: Path) -> None:
        results = run_corpus(corpus_dir, workers=4)
        failures = [(r.file, r.code, r.message) for r in results if r.status != "ok"]
        assert failures == []
        assert [r.file for r in results] == sorted(r.file for r in results)
        assert sum(r.checked for r in results) > 50

    def test_histories_verdicts_are_checked(self, corpus_dir: Path) -> None:
        index = load_index(corpus_dir)
        result = run_document(corpus_dir / "plus-histories.json", index["plus-histories.json"])
        assert result.status == "ok"
        assert result.checked == len(index["plus-histories.json"].expected) + 2


class TestRunDocument:
    """Single documents, pinned or not."""

    def test_unpinned_document(self, small_corpus: Path) -> None:
        result = run_document(small_corpus / "a-qubit.json")
        assert result.status == "ok"
        assert result.name == "qubit"
        assert result.rows == 2
        assert result.checked == 0
        assert result.max_difference is not None
        assert result.max_difference < 1e-12

    def test_pin_mismatch(self, small_corpus: Path) -> None:
        """A wrong pinned value is a numerical failure."""
        entry = CorpusEntry.model_validate(
            {"expected": [{"labels": ["1"], "probability": 0.75}]}
        )
        result = run_document(small_corpus / "a-qubit.json", entry)
        assert result.status == "failed"
        assert result.code == "numerical_invariant"
        assert result.exit_status == 4
        assert "expected 0.75" in result.message

    def test_consistency_mismatch(self, small_corpus: Path) -> None:
        """Pinned verdicts of families the report lacks fail."""
        entry = CorpusEntry(consistent={"bare": True})
        result = run_document(small_corpus / "a-qubit.json", entry)
        assert result.status == "failed"
        assert "family 'bare'" in result.message

    def test_broken_document(self, small_corpus: Path) -> None:
        """Parse errors are captured, not raised."""
        result = run_document(small_corpus / "c-broken.json")
        assert result.status == "failed"
        assert result.code == "syntax_error"
        assert result.exit_status == 2

    def test_settings_apply(self, small_corpus: Path) -> None:
        settings = RunSettings(equivalence_tolerance=1e-6)
        result = run_document(small_corpus / "a-qubit.json", settings=settings)
        assert result.status == "ok"


class TestRunCorpus:
    """Directories with and without an index."""

    def test_glob_without_index(self, small_corpus: Path) -> None:
        index = load_index(small_corpus)
        assert list(index) == ["a-qubit.json", "b-renamed.json", "c-broken.json"]

    @pytest.mark.parametrize("workers", [1, 3])
    def test_results_sorted(self, small_corpus: Path, workers: int) -> None:
        results = run_corpus(small_corpus, workers=workers)
        assert [r.file for r in results] == ["a-qubit.json", "b-renamed.json", "c-broken.json"]
        assert [r.status for r in results] == ["ok", "ok", "failed"]
        assert results[1].name == "renamed"

    def test_index_restricts_documents(self, small_corpus: Path) -> None:
        """Only indexed files run when an index exists."""
        index = {"b-renamed.json": {"description": "renamed qubit"}}
        (small_corpus / "index.json").write_text(json.dumps(index))
        results = run_corpus(small_corpus)
        assert [r.file for r in results] == ["b-renamed.json"]

    def test_missing_indexed_file(self, small_corpus: Path) -> None:
        """An indexed file that does not exist fails on its own row."""
        index = {"a-qubit.json": {}, "missing.json": {}}
        (small_corpus / "index.json").write_text(json.dumps(index))
        results = run_corpus(small_corpus, workers=2)
        assert [(r.file, r.status) for r in results] == [
            ("a-qubit.json", "ok"),
            ("missing.json", "failed"),
        ]
        assert results[1].code == "unreadable_input"
        assert results[1].exit_status == 2


class TestLoadIndex:
    """Broken index files raise coded errors."""

    def test_not_json(self, small_corpus: Path) -> None:
        (small_corpus / "index.json").write_text("{ not json")
        with pytest.raises(ScenarioParseError, match="not valid JSON") as exc_info:
            load_index(small_corpus)
        assert exc_info.value.code is ErrorCode.SYNTAX_ERROR

    def test_not_utf8(self, small_corpus: Path) -> None:
        (small_corpus / "index.json").write_bytes(b'{"caf\xe9.json": {}}')
        with pytest.raises(ScenarioParseError) as exc_info:
            load_index(small_corpus)
        assert exc_info.value.code is ErrorCode.SYNTAX_ERROR

    def test_invalid_entry(self, small_corpus: Path) -> None:
        index = {"a-qubit.json": {"expected": [{"labels": ["0"], "probability": "half"}]}}
        (small_corpus / "index.json").write_text(json.dumps(index))
        with pytest.raises(ScenarioParseError, match="invalid entries") as exc_info:
            load_index(small_corpus)
        assert exc_info.value.code is ErrorCode.SCHEMA_ERROR
        assert exc_info.value.path == "a-qubit.json.expected.0.probability"

    def test_index_is_directory(self, small_corpus: Path) -> None:
        (small_corpus / "index.json").mkdir()
        with pytest.raises(InvalidInputError, match="Cannot read corpus index") as exc_info:
            load_index(small_corpus)
        assert exc_info.value.code is ErrorCode.UNREADABLE_INPUT
