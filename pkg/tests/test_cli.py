import json
from pathlib import Path

import pytest

from autopyramid.cli import main

from stubs import constant_presence, dead_endpoint, scripted_chat

DATA = Path(__file__).parent / "data"
TOY = str(DATA / "toy.jsonl")


def read_jsonl(path):
    return [json.loads(line) for line in Path(path).read_text(encoding="utf-8").splitlines()]


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return str(path)


def manifest_of(path):
    return json.loads(Path(f"{path}.manifest.json").read_text(encoding="utf-8"))


def test_extract_sent(tmp_path, capsys):
    out = tmp_path / "units.jsonl"
    assert main(["extract", "--strategy", "sent", "--input", TOY, "--out", str(out)]) == 0
    rows = read_jsonl(out)
    assert len(rows) == 6
    assert rows[0] == {
        "example_id": "e1",
        "reference_index": 0,
        "strategy": "sentence_split",
        "text": "The cat sat on the mat.",
    }
    manifest = manifest_of(out)
    assert manifest["command"] == "extract"
    assert TOY in manifest["inputs"]


def test_extract_is_deterministic(tmp_path):
    first = tmp_path / "one.jsonl"
    second = tmp_path / "two.jsonl"
    for out in (first, second):
        assert main(["extract", "--strategy", "ngram", "--input", TOY, "--out", str(out)]) == 0
    assert first.read_bytes() == second.read_bytes()
    left, right = manifest_of(first), manifest_of(second)
    left.pop("timestamp")
    right.pop("timestamp")
    assert left == right


def test_extract_ngram_row_count(tmp_path):
    out = tmp_path / "units.jsonl"
    assert main([
        "extract", "--strategy", "ngram", "--input", TOY, "--out", str(out),
        "--ngram-sizes", "3", "--ngram-fraction", "1.0",
    ]) == 0
    rows = read_jsonl(out)
    assert all(r["strategy"] == "ngram" for r in rows)
    # trigram windows per sentence: e1 4+1, e2 2+2, e3 3+2
    assert len(rows) == 14


def test_extract_unknown_strategy_usage_error(tmp_path, capsys):
    code = main(["extract", "--strategy", "mystery", "--input", TOY, "--out", str(tmp_path / "u.jsonl")])
    capsys.readouterr()
    assert code == 2


def test_extract_smu_from_graphs_file(tmp_path):
    dataset = write_jsonl(
        tmp_path / "d.jsonl",
        [
            {
                "example_id": "g1",
                "references": [{"text": "The boy wants to go.", "scus": ["boy wants to go"]}],
                "systems": [],
            }
        ],
    )
    graphs = tmp_path / "g.penman"
    graphs.write_text(
        "# ::snt The boy wants to go.\n"
        "(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))\n",
        encoding="utf-8",
    )
    out = tmp_path / "units.jsonl"
    assert main([
        "extract", "--strategy", "smu", "--input", dataset,
        "--graphs", str(graphs), "--out", str(out),
    ]) == 0
    assert [r["text"] for r in read_jsonl(out)] == ["boy want", "want boy go", "boy go"]


def test_extract_smu_all_deps_mode(tmp_path):
    dataset = write_jsonl(
        tmp_path / "d.jsonl",
        [
            {
                "example_id": "g1",
                "references": [{"text": "The boy wants to go.", "scus": []}],
                "systems": [],
            }
        ],
    )
    graphs = tmp_path / "g.penman"
    graphs.write_text(
        "(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))\n", encoding="utf-8"
    )
    out = tmp_path / "units.jsonl"
    assert main([
        "extract", "--strategy", "smu", "--input", dataset,
        "--graphs", str(graphs), "--split-mode", "all-deps", "--out", str(out),
    ]) == 0
    assert [r["text"] for r in read_jsonl(out)] == ["boy want go", "boy go"]
    assert manifest_of(out)["extra"]["split_mode"] == "all-deps"


def test_extract_smu_graph_count_mismatch(tmp_path, capsys):
    dataset = write_jsonl(
        tmp_path / "d.jsonl",
        [
            {
                "example_id": "g1",
                "references": [{"text": "One sentence. Two sentences.", "scus": []}],
                "systems": [],
            }
        ],
    )
    graphs = tmp_path / "g.penman"
    graphs.write_text("(b / boy)\n", encoding="utf-8")
    code = main([
        "extract", "--strategy", "smu", "--input", dataset,
        "--graphs", str(graphs), "--out", str(tmp_path / "u.jsonl"),
    ])
    capsys.readouterr()
    assert code == 2


def test_extract_smu_via_parse_service(tmp_path, stub_service):
    stub = stub_service(
        lambda path, body: (
            200,
            {"graphs": ["(r / run-01 :ARG0 (d / dog))"] * len(body["sentences"])},
        )
    )
    dataset = write_jsonl(
        tmp_path / "d.jsonl",
        [
            {
                "example_id": "g1",
                "references": [{"text": "A dog runs.", "scus": []}],
                "systems": [],
            }
        ],
    )
    out = tmp_path / "units.jsonl"
    assert main([
        "extract", "--strategy", "smu", "--input", dataset,
        "--parse-endpoint", stub.url, "--out", str(out),
    ]) == 0
    assert [r["text"] for r in read_jsonl(out)] == ["dog run"]


def test_extract_smu_needs_graph_source(tmp_path, capsys):
    code = main(["extract", "--strategy", "smu", "--input", TOY, "--out", str(tmp_path / "u.jsonl")])
    capsys.readouterr()
    assert code == 2


def test_extract_sgu_without_endpoint_is_service_error(tmp_path, capsys):
    code = main(["extract", "--strategy", "sgu", "--input", TOY, "--out", str(tmp_path / "u.jsonl")])
    capsys.readouterr()
    assert code == 3


def test_extract_sgu_against_stub(tmp_path, stub_service):
    stub = stub_service(scripted_chat("First fact # Second fact"))
    out = tmp_path / "units.jsonl"
    assert main([
        "extract", "--strategy", "sgu", "--input", TOY, "--out", str(out),
        "--llm-endpoint", stub.url, "--llm-model", "splitter-1",
    ]) == 0
    rows = read_jsonl(out)
    assert len(rows) == 6  # 2 fragments x 3 references
    assert {r["text"] for r in rows} == {"First fact", "Second fact"}
    assert manifest_of(out)["extra"]["sgu_prompt_framing"].startswith("system,")
    body = stub.requests[0][1]
    assert body["temperature"] == 0.0
    assert [m["role"] for m in body["messages"]] == ["system", "user", "assistant", "user"]


def test_extract_import(tmp_path):
    units = tmp_path / "in.txt"
    units.write_text("unit alpha\nunit beta\n", encoding="utf-8")
    out = tmp_path / "units.jsonl"
    assert main([
        "extract", "--strategy", "import", "--input", TOY,
        "--import-path", str(units), "--out", str(out),
    ]) == 0
    rows = read_jsonl(out)
    assert [r["text"] for r in rows] == ["unit alpha", "unit beta"]
    assert all(r["strategy"] == "imported_stu" for r in rows)


def test_extract_import_jsonl_keeps_alignment(tmp_path):
    source = tmp_path / "in.jsonl"
    write_jsonl(
        source,
        [
            {"example_id": "e1", "reference_index": 1, "strategy": "smu", "text": "one"},
            {"example_id": "e2", "reference_index": 0, "strategy": "smu", "text": "two"},
        ],
    )
    out = tmp_path / "units.jsonl"
    assert main([
        "extract", "--strategy", "import", "--input", TOY,
        "--import-path", str(source), "--out", str(out),
    ]) == 0
    rows = read_jsonl(out)
    assert [(r["example_id"], r["reference_index"]) for r in rows] == [("e1", 1), ("e2", 0)]
    assert all(r["strategy"] == "imported_stu" for r in rows)


def test_extract_import_needs_path(tmp_path, capsys):
    code = main(["extract", "--strategy", "import", "--input", TOY, "--out", str(tmp_path / "u.jsonl")])
    capsys.readouterr()
    assert code == 2


def test_score_lexical_values(tmp_path):
    units = tmp_path / "units.jsonl"
    scores = tmp_path / "scores.jsonl"
    assert main(["extract", "--strategy", "sent", "--input", TOY, "--out", str(units)]) == 0
    assert main([
        "score", "--input", TOY, "--units", str(units), "--out", str(scores),
    ]) == 0
    rows = read_jsonl(scores)
    by_key = {(r["example_id"], r["system_id"]): r["score"] for r in rows}
    assert by_key[("e1", "sysA")] == 1.0
    assert by_key[("e1", "sysB")] == 0.0
    assert by_key[("e2", "sysA")] == 0.5
    assert by_key[("e3", "sysA")] == pytest.approx(0.625)
    assert by_key[("e3", "sysB")] == pytest.approx(0.45)
    # deterministic row order: example id then system id
    assert [(r["example_id"], r["system_id"]) for r in rows] == sorted(
        (r["example_id"], r["system_id"]) for r in rows
    )
    assert "summary_token_counts" in manifest_of(scores)["extra"]


def test_score_remote_against_stub(tmp_path, stub_service):
    stub = stub_service(constant_presence(0.7))
    units = tmp_path / "units.jsonl"
    scores = tmp_path / "scores.jsonl"
    assert main(["extract", "--strategy", "sent", "--input", TOY, "--out", str(units)]) == 0
    assert main([
        "score", "--input", TOY, "--units", str(units), "--out", str(scores),
        "--scorer", "remote", "--nli-endpoint", stub.url,
    ]) == 0
    assert all(r["score"] == pytest.approx(0.7) for r in read_jsonl(scores))


def test_score_remote_needs_endpoint(tmp_path, capsys):
    units = tmp_path / "units.jsonl"
    assert main(["extract", "--strategy", "sent", "--input", TOY, "--out", str(units)]) == 0
    code = main([
        "score", "--input", TOY, "--units", str(units),
        "--out", str(tmp_path / "s.jsonl"), "--scorer", "remote",
    ])
    capsys.readouterr()
    assert code == 3


def test_score_remote_unreachable_exits_3(tmp_path, capsys):
    units = tmp_path / "units.jsonl"
    assert main(["extract", "--strategy", "sent", "--input", TOY, "--out", str(units)]) == 0
    code = main([
        "score", "--input", TOY, "--units", str(units),
        "--out", str(tmp_path / "s.jsonl"), "--scorer", "remote",
        "--nli-endpoint", dead_endpoint(),
    ])
    capsys.readouterr()
    assert code == 3


def test_score_empty_units_exits_2(tmp_path, capsys):
    units = tmp_path / "units.jsonl"
    units.write_text("", encoding="utf-8")
    code = main([
        "score", "--input", TOY, "--units", str(units), "--out", str(tmp_path / "s.jsonl"),
    ])
    err = capsys.readouterr().err
    assert code == 2
    assert "e1" in err and "e2" in err and "e3" in err


def test_intrinsic_identity(tmp_path, capsys):
    units = tmp_path / "units.jsonl"
    rows = []
    for entry in read_jsonl(TOY):
        for scu in entry["references"][0]["scus"]:
            rows.append(
                {
                    "example_id": entry["example_id"],
                    "reference_index": 0,
                    "strategy": "gold_scu",
                    "text": scu,
                }
            )
    write_jsonl(units, rows)
    out = tmp_path / "report.jsonl"
    assert main([
        "intrinsic", "--input", TOY, "--units", str(units), "--out", str(out),
    ]) == 0
    stdout = capsys.readouterr().out
    assert "1.0000" in stdout
    report = read_jsonl(out)[0]
    assert report["easiness_r"] == 1.0
    assert report["easiness_p"] == 1.0
    assert report["empty_approx"] == 0


def test_intrinsic_matches_library_composition(tmp_path):
    from autopyramid.data import load_dataset
    from autopyramid.extract import ContentUnit, extract_sentence_units
    from autopyramid.stats import easiness

    units = tmp_path / "units.jsonl"
    out = tmp_path / "report.jsonl"
    assert main(["extract", "--strategy", "sent", "--input", TOY, "--out", str(units)]) == 0
    assert main(["intrinsic", "--input", TOY, "--units", str(units), "--out", str(out)]) == 0
    report = read_jsonl(out)[0]

    expect_r = []
    expect_p = []
    for entry in load_dataset(TOY):
        gold = [ContentUnit(t, "gold_scu") for t in entry.pooled_scus()]
        approx = extract_sentence_units(entry.references[0].text)
        result = easiness(gold, approx)
        expect_r.append(result.easiness_r)
        expect_p.append(result.easiness_p)
    assert report["easiness_r"] == pytest.approx(sum(expect_r) / len(expect_r))
    assert report["easiness_p"] == pytest.approx(sum(expect_p) / len(expect_p))
    assert 0 < report["easiness_r"] < 1


def test_intrinsic_requires_gold_units(tmp_path, capsys):
    dataset = write_jsonl(
        tmp_path / "d.jsonl",
        [
            {
                "example_id": "n1",
                "references": [{"text": "Some text here.", "scus": []}],
                "systems": [],
            }
        ],
    )
    units = tmp_path / "units.jsonl"
    write_jsonl(units, [{"example_id": "n1", "reference_index": 0, "strategy": "ngram", "text": "x"}])
    code = main(["intrinsic", "--input", dataset, "--units", str(units)])
    capsys.readouterr()
    assert code == 2


def test_metaeval_identity(tmp_path, capsys):
    scores = tmp_path / "scores.jsonl"
    rows = []
    for entry in read_jsonl(TOY):
        for system in entry["systems"]:
            rows.append(
                {
                    "example_id": entry["example_id"],
                    "system_id": system["system_id"],
                    "score": system["human_score"],
                }
            )
    write_jsonl(scores, rows)
    out = tmp_path / "table.jsonl"
    assert main([
        "metaeval", "--input", TOY, "--scores", str(scores), "--out", str(out),
    ]) == 0
    cells = read_jsonl(out)
    assert len(cells) == 4
    assert all(cell["value"] == 1.0 for cell in cells)
    table = capsys.readouterr().out
    assert "system" in table and "summary" in table


def test_metaeval_single_level_and_corr_flags(tmp_path, capsys):
    scores = tmp_path / "scores.jsonl"
    rows = []
    for entry in read_jsonl(TOY):
        for system in entry["systems"]:
            rows.append(
                {
                    "example_id": entry["example_id"],
                    "system_id": system["system_id"],
                    "score": system["human_score"],
                }
            )
    write_jsonl(scores, rows)
    out = tmp_path / "table.jsonl"
    assert main([
        "metaeval", "--input", TOY, "--scores", str(scores),
        "--level", "summary", "--corr", "pearson", "--out", str(out),
    ]) == 0
    capsys.readouterr()
    cells = read_jsonl(out)
    assert [(c["level"], c["corr"]) for c in cells] == [("summary", "pearson")]


def test_metaeval_single_system_exits_2(tmp_path, capsys):
    dataset = write_jsonl(
        tmp_path / "d.jsonl",
        [
            {
                "example_id": "x1",
                "references": [{"text": "Text one.", "scus": ["a"]}],
                "systems": [{"system_id": "only", "summary": "s", "human_score": 0.5}],
            }
        ],
    )
    scores = write_jsonl(
        tmp_path / "s.jsonl", [{"example_id": "x1", "system_id": "only", "score": 0.5}]
    )
    code = main(["metaeval", "--input", dataset, "--scores", scores])
    capsys.readouterr()
    assert code == 2


def test_metaeval_degenerate_cell_prints_na(tmp_path, capsys):
    scores = tmp_path / "scores.jsonl"
    rows = []
    for entry in read_jsonl(TOY):
        for system in entry["systems"]:
            rows.append(
                {"example_id": entry["example_id"], "system_id": system["system_id"], "score": 0.5}
            )
    write_jsonl(scores, rows)
    code = main(["metaeval", "--input", TOY, "--scores", str(scores), "--level", "system"])
    out = capsys.readouterr().out
    assert code == 0
    assert "n/a" in out


def test_metaeval_missing_score_row_exits_2(tmp_path, capsys):
    scores = write_jsonl(
        tmp_path / "s.jsonl", [{"example_id": "e1", "system_id": "sysA", "score": 0.5}]
    )
    code = main(["metaeval", "--input", TOY, "--scores", scores])
    capsys.readouterr()
    assert code == 2


def test_stats_toy_dataset(tmp_path, capsys):
    out = tmp_path / "stats.jsonl"
    assert main(["stats", "--input", TOY, "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "avg sentences/reference  2.00" in printed
    row = read_jsonl(out)[0]
    assert row["examples"] == 3
    assert row["avg_sentences"] == 2.0
    assert row["avg_words"] == pytest.approx(26 / 3)
    assert row["avg_words_per_sentence"] == pytest.approx(26 / 6)
    assert row["refs_per_example"] == 1.0
    assert row["avg_scus"] == 2.0


def test_stats_empty_dataset_exits_2(tmp_path, capsys):
    empty = tmp_path / "d.jsonl"
    empty.write_text("", encoding="utf-8")
    code = main(["stats", "--input", str(empty)])
    capsys.readouterr()
    assert code == 2


def test_missing_input_file_exits_2(tmp_path, capsys):
    code = main(["stats", "--input", str(tmp_path / "gone.jsonl")])
    capsys.readouterr()
    assert code == 2


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0
    capsys.readouterr()
