import pytest

from twistlab.core.corpus import (
    DATA_DIR,
    CorpusSummary,
    RecordResult,
    corpus_descriptors,
    fricke_sweep,
    load_corpus,
    load_table_records,
    verify_eta_tables,
)
from twistlab.core.errors import ParseError
from twistlab.core.modular import EisensteinDescriptor


SINGLE_ROW = "single-3-3-a | 3 | 3 | -3 | 1 | 3^9,1^-3 | A106402\n"
HEADER = "# id | ...\n"


def write_corpus(root, single=SINGLE_ROW, double="", displays=""):
    (root / "single_twist.txt").write_text(HEADER + single, encoding="utf-8")
    (root / "double_twist.txt").write_text(HEADER + double, encoding="utf-8")
    (root / "displays.txt").write_text(HEADER + displays, encoding="utf-8")
    return root


def test_bundled_corpus():
    records = load_corpus()
    assert len(records) == 57
    assert len(load_table_records(DATA_DIR / "single_twist.txt")) == 15
    assert len({r.id for r in records}) == 57
    first = records[0]
    assert first.id == "single-3-3-a"
    assert first.lhs == "G(3,-3,1)"
    assert first.descriptor == EisensteinDescriptor(m=3, d1=-3, d2=1)


def test_descriptors_are_distinct():
    descriptors = corpus_descriptors()
    keys = [(d.m, d.d1, d.d2) for d in descriptors]
    assert len(keys) == len(set(keys))
    assert keys[0] == (3, -3, 1)


def test_duplicate_ids_rejected(tmp_path):
    displays = "single-3-3-a | G(3,-3,1) | eta(3)^9/eta(1)^3 | L2chi3\n"
    write_corpus(tmp_path, displays=displays)
    with pytest.raises(ParseError, match="duplicate"):
        load_corpus(tmp_path)


def test_malformed_rows_rejected(tmp_path):
    write_corpus(tmp_path, single="single-3-3-a | 3 | 3 | -3 | 1\n")
    with pytest.raises(ParseError, match="expected 7 fields"):
        load_corpus(tmp_path)
    write_corpus(tmp_path, single="single-3-3-a | 3 | 2 | -3 | 1 | 3^9,1^-3 | A106402\n")
    with pytest.raises(ParseError, match="weight"):
        load_corpus(tmp_path)


def test_eta_tables_from_directory(tmp_path):
    write_corpus(tmp_path, displays="g2-chi5 | G(2,5,1) | eta(5)^5/eta(1) | L1chi5\n")
    summary = verify_eta_tables(n_max=20, data_dir=tmp_path)
    assert summary.passed
    assert [r.id for r in summary.results] == ["g2-chi5", "single-3-3-a"]


def test_fricke_sweep(ctx):
    summary = fricke_sweep(ctx, seed=3, descriptors=[EisensteinDescriptor(m=3, d1=-3, d2=1)], points=1)
    (result,) = summary.results
    assert result.id == "fricke-3--3-1-0"
    assert result.kind == "fricke"
    assert result.passed


def test_summary_counts():
    results = [
        RecordResult(id="a", kind="eta", passed=True, seconds=0.0),
        RecordResult(id="b", kind="eta", passed=False, seconds=0.0, detail="mismatch"),
    ]
    summary = CorpusSummary(results=results)
    assert not summary.passed
    assert summary.counts == {"total": 2, "passed": 1, "failed": 1}
    merged = summary.merged(CorpusSummary(results=[RecordResult(id="0", kind="eta", passed=True, seconds=0.0)]))
    assert [r.id for r in merged.results] == ["0", "a", "b"]
