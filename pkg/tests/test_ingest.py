"""Judgment/run/corpus ingestion: formats, warnings, round trips."""

import io
import json

import pytest

from bor_eval.ingest import (
    Document,
    Judgments,
    LabeledCorpus,
    ParseError,
    Run,
    class_relevance,
    dataset_stats,
    extract_subject,
    format_run_lines,
    parse_corpus,
    parse_qrels,
    parse_run,
    write_qrels,
    write_run,
)

QRELS = """\
q1 0 docA 1
q1 0 docB 0
q1 0 docC 2
q2 0 docA 1
"""

RUN = """\
q1 Q0 docC 1 14.5 sysA
q1 Q0 docA 2 12.25 sysA
q1 Q0 docB 3 3.125 sysA
q2 Q0 docB 1 9.0 sysA
"""


def test_parse_qrels_threshold():
    j = parse_qrels(io.StringIO(QRELS))
    assert j.relevant("q1") == frozenset({"docA", "docC"})
    assert j.relevant("q2") == frozenset({"docA"})
    assert j.r_count("q1") == 2
    strict = parse_qrels(io.StringIO(QRELS), threshold=2)
    assert strict.relevant("q1") == frozenset({"docC"})
    assert strict.r_count("q2") == 0


def test_parse_qrels_duplicates_keep_max_grade():
    text = "q1 0 d1 1\nq1 0 d1 0\nq1 0 d2 0\nq1 0 d2 2\n"
    j = parse_qrels(io.StringIO(text))
    assert j.duplicate_count == 2
    assert j.relevant("q1") == frozenset({"d1", "d2"})


@pytest.mark.parametrize(
    "line",
    ["q1 0 d1", "q1 0 d1 x", "q1 0 d1 1 extra", ""],
)
def test_parse_qrels_malformed(line):
    with pytest.raises(ParseError):
        parse_qrels(io.StringIO(line + "\n") if line else io.StringIO(""))


def test_parse_qrels_reports_line_number():
    with pytest.raises(ParseError) as exc:
        parse_qrels(io.StringIO("q1 0 d1 1\nbroken line\n"))
    assert "line 2" in str(exc.value)


def test_parse_run_orders_by_score_then_doc():
    run = parse_run(io.StringIO(RUN))
    assert run.ranked_ids("q1") == ["docC", "docA", "docB"]
    assert run.system_tag == "sysA"
    assert run.rank_warnings == 0


def test_parse_run_resorts_and_warns_on_rank_disagreement():
    text = "q1 Q0 d1 1 2.0 t\nq1 Q0 d2 2 5.0 t\n"
    run = parse_run(io.StringIO(text))
    assert run.ranked_ids("q1") == ["d2", "d1"]  # score wins
    assert run.rank_warnings == 1


def test_parse_run_score_tie_breaks_by_doc_id():
    text = "q1 Q0 zeta 1 1.0 t\nq1 Q0 alpha 2 1.0 t\n"
    run = parse_run(io.StringIO(text))
    assert run.ranked_ids("q1") == ["alpha", "zeta"]


def test_parse_run_duplicate_doc_is_error():
    text = "q1 Q0 d1 1 2.0 t\nq1 Q0 d1 2 1.0 t\n"
    with pytest.raises(ParseError):
        parse_run(io.StringIO(text))


def test_run_round_trip_is_byte_identical(tmp_path):
    run = parse_run(io.StringIO(RUN))
    out = tmp_path / "copy.run"
    write_run(run, out)
    assert out.read_text() == RUN


def test_format_run_lines_reranks_from_position():
    run = Run({"q": [("a", 0.3), ("b", 0.1)]}, system_tag="t")
    lines = list(format_run_lines(run))
    assert lines[0].split() == ["q", "Q0", "a", "1", "0.3", "t"]
    assert lines[1].split() == ["q", "Q0", "b", "2", "0.1", "t"]


def test_qrels_round_trip(tmp_path):
    j = parse_qrels(io.StringIO(QRELS))
    out = tmp_path / "copy.qrels"
    write_qrels(j, out)
    back = parse_qrels(out)
    assert back.relevant("q1") == j.relevant("q1")
    assert back.relevant("q2") == j.relevant("q2")


def test_parse_corpus_jsonl():
    lines = [
        json.dumps({"id": "d1", "text": "hello world", "label": "a"}),
        json.dumps({"id": "d2", "text": "more text"}),
    ]
    corpus = parse_corpus(io.StringIO("\n".join(lines) + "\n"))
    assert len(corpus) == 2
    assert corpus.get("d1").label == "a"
    assert corpus.get("d2").label is None


def test_parse_corpus_tsv():
    corpus = parse_corpus(io.StringIO("d1\tsci\tsome text here\nd2\trec\tother text\n"))
    assert corpus.get("d2").label == "rec"
    assert corpus.get("d1").text == "some text here"


def test_parse_corpus_duplicate_id():
    with pytest.raises(ValueError):
        LabeledCorpus([Document("d1", "x"), Document("d1", "y")])


def test_class_relevance_partition():
    corpus = LabeledCorpus(
        [
            Document("a1", "", "sci"),
            Document("a2", "", "sci"),
            Document("a3", "", "sci"),
            Document("b1", "", "rec"),
            Document("b2", "", "rec"),
        ]
    )
    j = class_relevance(corpus)
    assert j.relevant("a1") == frozenset({"a2", "a3"})  # self excluded
    assert j.relevant("b2") == frozenset({"b1"})
    assert j.r_count("a2") == 2
    subset = class_relevance(corpus, query_doc_ids=["a1", "b1"])
    assert subset.query_ids() == ["a1", "b1"]


def test_class_relevance_missing_label():
    corpus = LabeledCorpus([Document("d1", "", "x"), Document("d2", "")])
    with pytest.raises(ValueError) as exc:
        class_relevance(corpus)
    assert "d2" in str(exc.value)


def test_class_judgments_iterates_like_grades():
    j = Judgments.from_class_labels(
        {"sci": ("a1", "a2")}, {"a1": ("a1", "sci")}
    )
    assert sorted(j.iter_judgments()) == [("a1", "a2", 1)]


def test_dataset_stats():
    j = parse_qrels(io.StringIO(QRELS))
    stats = dataset_stats(j, corpus_size=100)
    assert stats.per_query_r == {"q1": 2, "q2": 1}
    assert stats.mean_r == pytest.approx(1.5)
    assert stats.zero_r_query_ids == []
    sparse = parse_qrels(io.StringIO("q1 0 d1 0\nq2 0 d2 1\n"))
    stats2 = dataset_stats(sparse, corpus_size=100)
    assert stats2.zero_r_query_ids == ["q1"]
    assert stats2.mean_r == pytest.approx(1.0)
    with pytest.raises(ValueError):
        dataset_stats(j, corpus_size=1)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("Subject: hello world\n\nbody", "hello world"),
        ("Subject: Re: re: FWD: topic\nbody", "topic"),
        ("\n\n  plain first line\nrest", "plain first line"),
        ("", ""),
    ],
)
def test_extract_subject(text, expected):
    assert extract_subject(text) == expected


def test_bad_utf8_counts_decode_warnings(tmp_path):
    path = tmp_path / "dirty.qrels"
    path.write_bytes(b"q1 0 d\xff1 1\n")
    j = parse_qrels(path)
    assert j.decode_warnings == 1
    assert j.r_count("q1") == 1
