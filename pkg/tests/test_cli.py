"""End-to-end tests for the command-line interface."""
from __future__ import annotations

import json

import pytest

from ftm.cli import main
from ftm.config import RunConfig
from ftm.ingest import FileSource, load_graph
from ftm.reports import read_entity_mappings, write_entity_mappings
from ftm.snapshot import save_snapshot

import dataclasses

import synth
from embed_stub import StubEmbedService

EX1 = "http://one.example/"
EX2 = "http://two.example/"
RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"

CONFLICT_NT1 = f"""\
<{EX1}res/a> <{EX1}prop/pages> "288" .
<{EX1}res/a> <{RDFS_LABEL}> "Crimson Harbor" .
"""

CONFLICT_NT2 = f"""\
<{EX2}res/x> <{EX2}vocab/pages> "4810" .
<{EX2}res/x> <{RDFS_LABEL}> "Crimson Harbor" .
"""

GOLD_XML = f"""<?xml version="1.0" encoding="utf-8"?>
<rdf:RDF xmlns="http://knowledgeweb.semanticweb.org/heterogeneity/alignment"
         xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#">
  <Alignment><map><Cell>
    <entity1 rdf:resource="{EX1}res/a"/>
    <entity2 rdf:resource="{EX2}res/x"/>
    <relation>=</relation>
  </Cell></map></Alignment>
</rdf:RDF>
"""


@pytest.fixture(scope="module")
def world_paths(tmp_path_factory):
    world = synth.build_world(seed=3, aligned=20, unaligned=4)
    return synth.write_world(world, tmp_path_factory.mktemp("world"))


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestMatch:
    def test_writes_artifacts(self, world_paths, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(["match", "--source", world_paths["source"],
                   "--target", world_paths["target"],
                   "--output-dir", str(out)])
        assert rc == 0
        stdout = capsys.readouterr().out
        assert "entity mappings:" in stdout
        assert "iterations:" in stdout
        mappings = read_entity_mappings(str(out / "entity_mappings.tsv"))
        assert mappings
        assert (out / "triple_mappings.tsv").stat().st_size > 0
        report = json.loads((out / "run_report.json").read_text("utf-8"))
        assert report["entity_mappings"] == len(mappings)
        assert 1 <= len(report["iterations"]) <= 10

    def test_empty_graphs(self, tmp_path, capsys):
        source = write(tmp_path / "one.nt", "")
        target = write(tmp_path / "two.nt", "")
        out = tmp_path / "out"
        rc = main(["match", "--source", source, "--target", target,
                   "--output-dir", str(out)])
        assert rc == 0
        assert (out / "entity_mappings.tsv").stat().st_size == 0
        assert (out / "triple_mappings.tsv").stat().st_size == 0
        report = json.loads((out / "run_report.json").read_text("utf-8"))
        assert report["entity_mappings"] == 0

    def test_missing_source_file(self, tmp_path, capsys):
        target = write(tmp_path / "two.nt", "")
        rc = main(["match", "--source", str(tmp_path / "absent.nt"),
                   "--target", target, "--output-dir", str(tmp_path / "out")])
        assert rc == 2
        assert capsys.readouterr().err.startswith("error [input]")

    def test_source_flag_required(self, tmp_path, capsys):
        target = write(tmp_path / "two.nt", "")
        rc = main(["match", "--target", target,
                   "--output-dir", str(tmp_path / "out")])
        assert rc == 2
        assert "error [config]" in capsys.readouterr().err

    def test_flag_overrides_config_file(self, world_paths, tmp_path, capsys):
        config = write(tmp_path / "config.json", json.dumps({
            "source": world_paths["source"], "target": world_paths["target"],
            "threshold": 0.5, "output_dir": str(tmp_path / "out")}))
        rc = main(["match", "--config", config, "--threshold", "0.95"])
        assert rc == 0
        assert "at or above 0.95" in capsys.readouterr().out

    def test_unknown_config_key(self, tmp_path, capsys):
        config = write(tmp_path / "config.json", json.dumps({"treshold": 0.5}))
        rc = main(["match", "--config", config])
        assert rc == 2
        assert "error [config]" in capsys.readouterr().err

    def test_remote_embedder_end_to_end(self, tmp_path, capsys):
        source = write(tmp_path / "one.nt", CONFLICT_NT1)
        target = write(tmp_path / "two.nt", CONFLICT_NT2)
        with StubEmbedService(dimension=32) as service:
            rc = main(["match", "--source", source, "--target", target,
                       "--embedder", "remote", "--embedder-url", service.url,
                       "--output-dir", str(tmp_path / "out")])
        assert rc == 0
        assert service.request_count > 0

    def test_remote_embedder_unreachable(self, tmp_path, capsys):
        source = write(tmp_path / "one.nt", CONFLICT_NT1)
        target = write(tmp_path / "two.nt", CONFLICT_NT2)
        rc = main(["match", "--source", source, "--target", target,
                   "--embedder", "remote",
                   "--embedder-url", "http://127.0.0.1:1",
                   "--output-dir", str(tmp_path / "out")])
        assert rc == 2
        assert "error [input]" in capsys.readouterr().err


class TestDeterminism:
    def test_outputs_identical_across_thread_counts(self, world_paths,
                                                    tmp_path, capsys):
        artifacts = []
        for threads in (1, 2, 4):
            out = tmp_path / f"out{threads}"
            rc = main(["match", "--source", world_paths["source"],
                       "--target", world_paths["target"],
                       "--threads", str(threads), "--output-dir", str(out)])
            assert rc == 0
            report = json.loads((out / "run_report.json").read_text("utf-8"))
            report.pop("wall_seconds")
            report["config"].pop("threads")
            report["config"].pop("output_dir")
            for record in report["iterations"]:
                record.pop("duration_seconds")
            artifacts.append((
                (out / "entity_mappings.tsv").read_bytes(),
                (out / "triple_mappings.tsv").read_bytes(),
                report))
        assert artifacts[0] == artifacts[1] == artifacts[2]


class TestDiverge:
    def planted(self, tmp_path):
        source = write(tmp_path / "one.nt", CONFLICT_NT1)
        target = write(tmp_path / "two.nt", CONFLICT_NT2)
        from ftm.matcher import EntityMapping
        mappings = tmp_path / "mappings.tsv"
        write_entity_mappings(str(mappings), {
            (EX1 + "res/a", EX2 + "res/x"):
            EntityMapping(EX1 + "res/a", EX2 + "res/x", 0.95)})
        return source, target, str(mappings)

    def test_planted_conflict_flagged_divergent(self, tmp_path, capsys):
        source, target, mappings = self.planted(tmp_path)
        out = tmp_path / "out"
        rc = main(["diverge", "--source", source, "--target", target,
                   "--mappings", mappings, "--output-dir", str(out)])
        assert rc == 0
        stdout = capsys.readouterr().out
        assert "classified 2 triple pairs: 1 compatible, 1 divergent," in stdout
        lines = (out / "divergences.tsv").read_text("utf-8").splitlines()
        divergent = [l for l in lines if l.endswith("\tDivergent")]
        assert len(divergent) == 1
        assert "pages" in divergent[0]

    def test_no_shared_predicates(self, tmp_path, capsys):
        source = write(tmp_path / "one.nt",
                       f'<{EX1}res/a> <{EX1}prop/pages> "288" .\n')
        target = write(tmp_path / "two.nt",
                       f'<{EX2}res/x> <{EX2}vocab/height> "4810" .\n')
        from ftm.matcher import EntityMapping
        mappings = tmp_path / "mappings.tsv"
        write_entity_mappings(str(mappings), {
            (EX1 + "res/a", EX2 + "res/x"):
            EntityMapping(EX1 + "res/a", EX2 + "res/x", 0.95)})
        out = tmp_path / "out"
        rc = main(["diverge", "--source", source, "--target", target,
                   "--mappings", str(mappings), "--output-dir", str(out)])
        assert rc == 0
        assert (out / "divergences.tsv").stat().st_size == 0

    def test_missing_mappings_suggests_match(self, tmp_path, capsys):
        source, target, _ = self.planted(tmp_path)
        rc = main(["diverge", "--source", source, "--target", target,
                   "--output-dir", str(tmp_path / "out")])
        assert rc == 2
        assert "run 'ftm match' first" in capsys.readouterr().err

    def test_default_mappings_path_after_match(self, tmp_path, capsys):
        source, target, _ = self.planted(tmp_path)
        out = tmp_path / "out"
        assert main(["match", "--source", source, "--target", target,
                     "--output-dir", str(out)]) == 0
        rc = main(["diverge", "--source", source, "--target", target,
                   "--output-dir", str(out)])
        assert rc == 0
        assert (out / "divergences.tsv").exists()

    def test_malformed_mappings_file(self, tmp_path, capsys):
        source, target, _ = self.planted(tmp_path)
        broken = write(tmp_path / "broken.tsv", "a\tb\n")
        rc = main(["diverge", "--source", source, "--target", target,
                   "--mappings", broken, "--output-dir", str(tmp_path / "o")])
        assert rc == 2
        assert "error [input]" in capsys.readouterr().err


def eval_fixture(tmp_path):
    from ftm.matcher import EntityMapping
    predictions = tmp_path / "predictions.tsv"
    rows = {("a", "x"): EntityMapping("a", "x", 0.95),
            ("b", "y"): EntityMapping("b", "y", 0.95),
            ("c", "y"): EntityMapping("c", "y", 0.4)}
    write_entity_mappings(str(predictions), rows)
    gold = write(tmp_path / "gold.tsv", "a\tx\nb\ty\nc\tz\n")
    return str(predictions), gold


class TestEval:
    def test_report_fields_and_hits(self, tmp_path, capsys):
        predictions, gold = eval_fixture(tmp_path)
        rc = main(["eval", "--predictions", predictions, "--gold", gold,
                   "--threshold", "0.9"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["true_positives"] == 2
        assert payload["false_negatives"] == 1
        assert payload["precision"] == 1.0
        assert payload["recall"] == pytest.approx(2 / 3)
        assert payload["hits"]["hit@1"] == pytest.approx(2 / 3)
        assert set(payload["hits"]) == {"hit@1", "hit@5", "hit@10"}

    def test_sweep_picks_best_threshold(self, tmp_path, capsys):
        predictions, gold = eval_fixture(tmp_path)
        rc = main(["eval", "--predictions", predictions, "--gold", gold,
                   "--sweep"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        # keeping (c, y) visible costs more F than dropping it
        assert payload["flags"] == ["swept-best-threshold=0.41"]
        assert payload["f_measure"] == pytest.approx(0.8)

    def test_empty_gold_rejected(self, tmp_path, capsys):
        predictions, _ = eval_fixture(tmp_path)
        gold = write(tmp_path / "empty.tsv", "# nothing here\n")
        rc = main(["eval", "--predictions", predictions, "--gold", gold])
        assert rc == 2
        assert "no pairs" in capsys.readouterr().err

    def test_report_file_matches_stdout(self, tmp_path, capsys):
        predictions, gold = eval_fixture(tmp_path)
        report_path = tmp_path / "report.json"
        rc = main(["eval", "--predictions", predictions, "--gold", gold,
                   "--report", str(report_path)])
        assert rc == 0
        stdout = capsys.readouterr().out
        assert report_path.read_text("utf-8") == stdout.rstrip("\n") + "\n"

    def test_xml_gold(self, tmp_path, capsys):
        from ftm.matcher import EntityMapping
        predictions = tmp_path / "predictions.tsv"
        write_entity_mappings(str(predictions), {
            (EX1 + "res/a", EX2 + "res/x"):
            EntityMapping(EX1 + "res/a", EX2 + "res/x", 0.95)})
        gold = write(tmp_path / "gold.xml", GOLD_XML)
        rc = main(["eval", "--predictions", str(predictions), "--gold", gold])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["recall"] == 1.0


class TestStats:
    def test_three_triple_table(self, tmp_path, capsys):
        source = write(tmp_path / "one.nt", f"""\
<{EX1}a> <{EX1}p> "1" .
<{EX1}a> <{EX1}p> "2" .
<{EX1}b> <{EX1}link> <{EX1}a> .
""")
        rc = main(["stats", "--source", source])
        assert rc == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == f"graph: {source}"
        assert lines[1] == "triples: 3  entities: 2  predicates: 2"
        assert lines[3] == f"{EX1}p\t2\t1\t2\t0.5000\t1.0000\t1.0000"
        assert lines[4] == f"{EX1}link\t1\t1\t1\t1.0000\t1.0000\t1.0000"

    def test_empty_graph_header_only(self, tmp_path, capsys):
        source = write(tmp_path / "one.nt", "")
        rc = main(["stats", "--source", source])
        assert rc == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 3
        assert lines[2].startswith("predicate\t")

    def test_snapshot_round_trip(self, tmp_path, capsys):
        source = write(tmp_path / "one.nt", f"""\
<{EX1}a> <{EX1}p> "1" .
<{EX1}b> <{EX1}p> "2"^^<http://www.w3.org/2001/XMLSchema#integer> .
""")
        assert main(["stats", "--source", source]) == 0
        from_file = capsys.readouterr().out
        graph = load_graph(FileSource(source))
        snap = str(tmp_path / "one.snap")
        save_snapshot(graph, snap)
        assert main(["stats", "--source", snap]) == 0
        assert capsys.readouterr().out == from_file


class TestBuildTripleGold:
    def test_labelled_rows_written(self, tmp_path, capsys):
        source = write(tmp_path / "one.nt", f"""\
<{EX1}res/a> <{EX1}prop/pages> "288" .
<{EX1}res/b> <{EX1}prop/pages> "300" .
""")
        target = write(tmp_path / "two.nt", f"""\
<{EX2}res/x> <{EX2}vocab/pages> "269" .
<{EX2}res/y> <{EX2}vocab/pages> "9000" .
""")
        gold = write(tmp_path / "gold.tsv",
                     f"{EX1}res/a\t{EX2}res/x\n"
                     f"{EX1}res/b\t{EX2}res/y\n"
                     f"{EX1}prop/pages\t{EX2}vocab/pages\n")
        output = tmp_path / "triple_gold.tsv"
        rc = main(["build-triple-gold", "--source", source, "--target", target,
                   "--gold", gold, "--output", str(output)])
        assert rc == 0
        assert "wrote 2 labelled triple pairs" in capsys.readouterr().out
        lines = output.read_text("utf-8").splitlines()
        labels = {line.split("\t")[0]: line.split("\t")[6] for line in lines}
        assert labels[EX1 + "res/a"] == "Compatible"
        assert labels[EX1 + "res/b"] == "Divergent"
        assert all(len(line.split("\t")) == 7 for line in lines)

    def test_empty_gold_rejected(self, tmp_path, capsys):
        source = write(tmp_path / "one.nt", "")
        target = write(tmp_path / "two.nt", "")
        gold = write(tmp_path / "gold.tsv", "\n")
        rc = main(["build-triple-gold", "--source", source, "--target", target,
                   "--gold", gold, "--output", str(tmp_path / "o.tsv")])
        assert rc == 2


class TestParser:
    def test_help_lists_every_config_key(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["--help"])
        assert excinfo.value.code == 0
        stdout = capsys.readouterr().out
        for field in dataclasses.fields(RunConfig):
            assert field.name in stdout

    def test_match_help_lists_flags(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["match", "--help"])
        assert excinfo.value.code == 0
        stdout = capsys.readouterr().out
        for flag in ("--source", "--target", "--format", "--endpoint",
                     "--page-size", "--embedder", "--embedder-url",
                     "--threshold", "--k-top", "--max-iters", "--seed",
                     "--threads", "--output-dir", "--config"):
            assert flag in stdout

    def test_unknown_command_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["frobnicate"])
        assert excinfo.value.code == 2
