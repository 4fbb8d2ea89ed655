import hashlib
import threading
import urllib.parse
import urllib.request
from pathlib import Path

import pytest

from conftest import DATA_DIR, build_gold_catalog
from heritage_catalog.catalog import Catalog
from heritage_catalog.cli import main, make_query_server, parse_bgp_text, solutions_to_csv
from heritage_catalog.rdf import Iri, ParseError, parse_nquads
from heritage_catalog.store import Store

BASE = "https://example.org/catalog/"


def run(*argv) -> int:
    return main(list(argv))


def catalog_digests(root: Path) -> dict:
    digests = {}
    for path in sorted(root.rglob("*")):
        if path.is_file() and "bundles" not in path.parts[len(root.parts):]:
            digests[str(path.relative_to(root))] = hashlib.sha256(path.read_bytes()).hexdigest()
    return digests


@pytest.fixture
def gold_root(tmp_path) -> Path:
    root = tmp_path / "gold"
    build_gold_catalog(root)
    return root


class TestInit:
    def test_init_creates_skeleton(self, tmp_path, capsys):
        root = tmp_path / "cat"
        assert run("init", str(root)) == 0
        for name in ("data.nq", "prov.nq", "catalog.cfg"):
            assert (root / name).is_file()
        for sub in ("tables", "mappings", "bundles"):
            assert (root / sub).is_dir()
        assert len(Store.load(root / "data.nq")) == 0

    def test_init_twice_exits_2(self, tmp_path):
        root = tmp_path / "cat"
        assert run("init", str(root)) == 0
        assert run("init", str(root)) == 2


class TestIngest:
    def test_process_ingest(self, tmp_path, capsys):
        root = tmp_path / "cat"
        run("init", str(root))
        assert run("--catalog", str(root), "ingest", str(DATA_DIR / "gold_bibliographic.csv"), "--kind", "bibliographic") == 0
        assert run("--catalog", str(root), "ingest", str(DATA_DIR / "gold_process.csv"), "--kind", "process") == 0
        out = capsys.readouterr().out
        assert "created=" in out
        catalog = Catalog.open(root)
        assert len(catalog.phases) == 17
        assert len(catalog.assets) == 11

    def test_missing_column_exits_3(self, tmp_path, capsys):
        root = tmp_path / "cat"
        run("init", str(root))
        bad = tmp_path / "bad.csv"
        bad.write_text("object,phase,unit,agents,technique,tools,end\n1,acquisition,Lab,A,SLS,T,2023-01-02\n")
        assert run("--catalog", str(root), "ingest", str(bad), "--kind", "process") == 3
        assert "start" in capsys.readouterr().err

    def test_reingest_only_touches_changed_rows(self, tmp_path):
        root = tmp_path / "cat"
        run("init", str(root))
        first = tmp_path / "bib.csv"
        first.write_text("id,title,type\n1,Alpha,vase\n2,Beta,coin\n")
        assert run("--catalog", str(root), "ingest", str(first), "--kind", "bibliographic") == 0
        catalog = Catalog.open(root)
        # row-hash oracle: identical rows must produce no new snapshots
        chains_before = {e.value: len(catalog.tracker.chain(e)) for e in catalog.tracker.entities()}

        second = tmp_path / "bib.csv"
        second.write_text("id,title,type\n1,Alpha,vase\n2,Beta RENAMED,coin\n")
        assert run("--catalog", str(root), "ingest", str(second), "--kind", "bibliographic") == 0
        catalog = Catalog.open(root)
        chains_after = {e.value: len(catalog.tracker.chain(e)) for e in catalog.tracker.entities()}
        assert chains_after[BASE + "cho/1"] == chains_before[BASE + "cho/1"] == 1
        assert chains_after[BASE + "cho/2"] == 2

    def test_unchanged_reingest_is_noop(self, gold_root):
        catalog = Catalog.open(gold_root)
        before = {e.value: len(catalog.tracker.chain(e)) for e in catalog.tracker.entities()}
        assert run("--catalog", str(gold_root), "ingest", str(DATA_DIR / "gold_process.csv"), "--kind", "process") == 0
        catalog = Catalog.open(gold_root)
        after = {e.value: len(catalog.tracker.chain(e)) for e in catalog.tracker.entities()}
        assert before == after


class TestMap:
    def _prepared(self, tmp_path):
        root = tmp_path / "cat"
        run("init", str(root))
        run("--catalog", str(root), "ingest", str(DATA_DIR / "golden_source.csv"), "--kind", "bibliographic")
        return root

    def test_golden_counts(self, tmp_path, capsys):
        root = self._prepared(tmp_path)
        capsys.readouterr()
        assert run("--catalog", str(root), "map", str(DATA_DIR / "golden_mapping.yml"), "golden_source") == 0
        out = capsys.readouterr().out
        # 17 golden statements, minus the three titles already ingested as dct:title
        golden = parse_nquads((DATA_DIR / "golden.nt").read_text())
        catalog = Catalog.open(root)
        assert golden <= catalog.store.quads()
        assert out.startswith("quads=")
        assert "entities=3" in out

    def test_rerun_reports_zero_new(self, tmp_path, capsys):
        root = self._prepared(tmp_path)
        run("--catalog", str(root), "map", str(DATA_DIR / "golden_mapping.yml"), "golden_source")
        capsys.readouterr()
        assert run("--catalog", str(root), "map", str(DATA_DIR / "golden_mapping.yml"), "golden_source") == 0
        assert "quads=0 entities=0" in capsys.readouterr().out

    def test_unknown_table_exits_3(self, tmp_path):
        root = self._prepared(tmp_path)
        assert run("--catalog", str(root), "map", str(DATA_DIR / "golden_mapping.yml"), "nope") == 3

    def test_fresh_catalog_map_matches_golden_exactly(self, tmp_path, capsys):
        root = tmp_path / "cat"
        run("init", str(root))
        table_src = DATA_DIR / "golden_source.csv"
        stored = root / "tables" / "golden_source.csv"
        stored.write_bytes(table_src.read_bytes())
        capsys.readouterr()
        assert run("--catalog", str(root), "map", str(DATA_DIR / "golden_mapping.yml"), "golden_source") == 0
        assert "quads=17 entities=3" in capsys.readouterr().out


class TestProv:
    def test_log_of_fresh_entity(self, gold_root, capsys):
        assert run("--catalog", str(gold_root), "prov", "log", BASE + "cho/25") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 1
        assert lines[0].startswith("1 creation ")

    def test_restore_before_creation_is_empty(self, gold_root, capsys):
        assert run("--catalog", str(gold_root), "prov", "restore", BASE + "cho/25", "2000-01-01T00:00:00Z") == 0
        assert capsys.readouterr().out == ""

    def test_restore_now_matches_current(self, gold_root, capsys):
        catalog = Catalog.open(gold_root)
        entity = Iri(BASE + "cho/25")
        assert run("--catalog", str(gold_root), "prov", "restore", entity.value, "2100-01-01T00:00:00Z") == 0
        state = parse_nquads(capsys.readouterr().out)
        assert state == catalog.store.subject_quads(entity)

    def test_restore_mid_history_matches_forward_replay(self, gold_root, capsys):
        from conftest import forward_replay
        from heritage_catalog.provenance import iso_timestamp
        from heritage_catalog.store import Delta
        from heritage_catalog.rdf import Literal, Quad

        catalog = Catalog.open(gold_root)
        entity = Iri(BASE + "cho/25")
        extra = Quad(entity, Iri(BASE + "note"), Literal("later edit"), Iri(entity.value + "/record"))
        catalog.tracker.record_modification(
            entity, Delta(inserts={extra}), catalog.config.agent_iri(), time=catalog.next_time()
        )
        catalog.save()
        chain = catalog.tracker.chain(entity)
        assert len(chain) == 2
        capsys.readouterr()
        moment = iso_timestamp(chain[0].generated_at)
        assert run("--catalog", str(gold_root), "prov", "restore", entity.value, moment) == 0
        restored = parse_nquads(capsys.readouterr().out)
        assert restored == forward_replay([chain[0].update_query])
        assert extra not in restored

    def test_unknown_entity_exits_4(self, gold_root):
        assert run("--catalog", str(gold_root), "prov", "log", BASE + "cho/404") == 4

    def test_bad_timestamp_exits_3(self, gold_root):
        assert run("--catalog", str(gold_root), "prov", "restore", BASE + "cho/25", "not-a-time") == 3


class TestAudit:
    def test_gold_exits_0(self, gold_root):
        assert run("--catalog", str(gold_root), "audit") == 0

    def test_missing_licences_exit_1_with_rows(self, gold_root, capsys):
        catalog = Catalog.open(gold_root)
        dcho = Iri(BASE + "dcho/26")
        doomed = {
            q for q in catalog.store.subject_quads(dcho)
            if q.predicate.value in ("http://purl.org/dc/terms/license", "https://w3id.org/hcat/vocab/recordLicence")
        }
        catalog.store.delete_quads(doomed)
        catalog.save()
        capsys.readouterr()
        assert run("--catalog", str(gold_root), "audit", "--format", "csv") == 1
        out = capsys.readouterr().out
        for check_id in ("OBJ-R2", "MET-R2", "REC-R3"):
            assert sum(1 for line in out.splitlines() if line.startswith(check_id) and ",fail," in line) == 1

    def test_rdf_format_parses(self, gold_root, capsys):
        assert run("--catalog", str(gold_root), "audit", "--format", "rdf") == 0
        parse_nquads(capsys.readouterr().out)

    def test_unknown_format_exits_3(self, gold_root):
        assert run("--catalog", str(gold_root), "audit", "--format", "yaml") == 3


class TestValidate:
    def test_gold_is_compliant(self, gold_root):
        assert run("--catalog", str(gold_root), "validate") == 0

    def test_violation_exits_1(self, gold_root, capsys):
        catalog = Catalog.open(gold_root)
        asset = next(a for a in catalog.assets if a.id.value.endswith("proc-25"))
        from heritage_catalog import vocab
        from heritage_catalog.rdf import Literal, Quad

        old = {q for q in catalog.store.subject_quads(asset.id) if q.predicate == vocab.POLYGON_COUNT}
        (old_quad,) = old
        catalog.store.delete_quads(old)
        catalog.store.insert_quads({Quad(asset.id, vocab.POLYGON_COUNT, Literal("1000001", datatype=vocab.XSD_INTEGER), old_quad.graph)})
        catalog.save()
        capsys.readouterr()
        assert run("--catalog", str(gold_root), "validate") == 1
        out = capsys.readouterr().out
        assert "scanned_polygons_max" in out
        assert "1000001" in out

    def test_empty_catalog_exits_0(self, tmp_path):
        root = tmp_path / "cat"
        run("init", str(root))
        assert run("--catalog", str(root), "validate") == 0


class TestQuery:
    def test_type_query_matches_brute_force(self, gold_root, capsys):
        pattern = "?s <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> ?t"
        assert run("--catalog", str(gold_root), "query", pattern) == 0
        out = capsys.readouterr().out
        catalog = Catalog.open(gold_root)
        expected = sum(
            1 for q in catalog.store.quads() if q.predicate.value == "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
        )
        assert len(out.splitlines()) == expected + 1  # header line

    def test_malformed_pattern_exits_3(self, gold_root):
        assert run("--catalog", str(gold_root), "query", "<only-two> <terms>") == 3

    def test_csv_deterministic(self, gold_root, capsys):
        pattern = "?s ?p ?o"
        run("--catalog", str(gold_root), "query", pattern)
        first = capsys.readouterr().out
        run("--catalog", str(gold_root), "query", pattern)
        assert capsys.readouterr().out == first


class TestHttpEndpoint:
    @pytest.fixture
    def server(self, gold_root):
        catalog = Catalog.open(gold_root)
        server = make_query_server(catalog, 0)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        yield f"http://127.0.0.1:{server.server_address[1]}"
        server.shutdown()
        server.server_close()

    def test_health(self, server):
        with urllib.request.urlopen(server + "/health") as response:
            assert response.status == 200

    def test_query_returns_csv(self, server, gold_root):
        q = urllib.parse.quote("?s <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> ?t")
        with urllib.request.urlopen(f"{server}/query?q={q}") as response:
            assert response.status == 200
            assert response.headers["Content-Type"].startswith("text/csv")
            body = response.read().decode()
        assert body.splitlines()[0] == "s,t"

    def test_bad_query_is_400(self, server):
        q = urllib.parse.quote("<one>")
        with pytest.raises(urllib.error.HTTPError) as err:
            urllib.request.urlopen(f"{server}/query?q={q}")
        assert err.value.code == 400

    def test_zero_solutions_empty_body(self, server):
        q = urllib.parse.quote("?s <http://nowhere.example.org/p> ?o")
        with urllib.request.urlopen(f"{server}/query?q={q}") as response:
            assert response.status == 200
            assert response.read() == b""


class TestReport:
    def test_storage_percentages(self, gold_root, capsys):
        assert run("--catalog", str(gold_root), "report", "storage") == 0
        out = capsys.readouterr().out
        assert "raw_material" in out
        total = sum(float(line.split("percent=")[1]) for line in out.strip().splitlines())
        assert abs(total - 100.0) <= 0.2

    def test_status_vector(self, gold_root, capsys):
        assert run("--catalog", str(gold_root), "report", "status", BASE + "cho/25") == 0
        out = capsys.readouterr().out
        assert out.count("complete") == 8

    def test_status_unknown_object_exits_4(self, gold_root):
        assert run("--catalog", str(gold_root), "report", "status", BASE + "cho/404") == 4

    def test_bundle_digests_verify(self, gold_root, tmp_path, capsys):
        out_dir = tmp_path / "deposit"
        assert run("--catalog", str(gold_root), "report", "bundle", BASE + "dcho/25", str(out_dir)) == 0
        manifest = (out_dir / "manifest.txt").read_text().splitlines()
        assert manifest
        for line in manifest:
            path, digest, size = line.split("\t")
            data = (out_dir / path).read_bytes()
            assert hashlib.sha256(data).hexdigest() == digest
            assert int(size) == len(data)


class TestReadOnlyCommands:
    def test_catalog_bytes_untouched(self, gold_root, tmp_path, capsys):
        before = catalog_digests(gold_root)
        run("--catalog", str(gold_root), "audit")
        run("--catalog", str(gold_root), "audit", "--format", "rdf")
        run("--catalog", str(gold_root), "validate")
        run("--catalog", str(gold_root), "query", "?s ?p ?o")
        run("--catalog", str(gold_root), "report", "storage")
        run("--catalog", str(gold_root), "report", "status", BASE + "cho/25")
        run("--catalog", str(gold_root), "report", "bundle", BASE + "dcho/25", str(tmp_path / "b"))
        run("--catalog", str(gold_root), "prov", "log", BASE + "cho/25")
        run("--catalog", str(gold_root), "prov", "restore", BASE + "cho/25", "2023-06-01T00:00:00Z")
        assert catalog_digests(gold_root) == before


class TestCatalogFiles:
    def test_store_files_stay_canonical_after_commands(self, gold_root):
        for name in ("data.nq", "prov.nq"):
            text = (gold_root / name).read_text(encoding="utf-8")
            from heritage_catalog.rdf import serialize_nquads

            assert serialize_nquads(parse_nquads(text)) == text

    def test_env_var_supplies_catalog_path(self, gold_root, monkeypatch, capsys):
        monkeypatch.setenv("HERITAGE_CATALOG", str(gold_root))
        assert run("report", "storage") == 0
        assert "raw_material" in capsys.readouterr().out


class TestPatternParsing:
    def test_three_and_four_position_lines(self):
        patterns, variables = parse_bgp_text("?s ?p ?o\n?s ?p ?o ?g .")
        assert len(patterns) == 2
        assert variables == ["s", "p", "o", "g"]

    def test_too_few_positions(self):
        with pytest.raises(ParseError):
            parse_bgp_text("?s ?p")

    def test_csv_rendering(self):
        from heritage_catalog.rdf import Literal

        text = solutions_to_csv(["s"], [{"s": Literal('tricky "value"')}])
        assert text.splitlines()[0] == "s"
        assert '""' in text  # csv-escaped quotes
