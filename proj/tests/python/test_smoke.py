import io
import json
import os
import shutil
import subprocess
from pathlib import Path

import pytest

import credi

FIXTURES = Path(os.environ.get("CREDI_FIXTURES_DIR", Path(__file__).resolve().parents[1] / "fixtures"))


def test_corpus_stats_count_identity():
    stats = credi.corpus_stats(str(FIXTURES / "ncre_synthetic.jsonl"))
    assert stats["instances"] == 3591
    assert stats["gold_labels"] == 3 * stats["instances"] == 10773
    assert round(stats["dimensions"]["polarity"]["percentages"]["positive"], 2) == 58.12


def test_split_sizes():
    assert credi.split_sizes(3591) == (2872, 359, 360)


def test_weighted_f1_small_case():
    assert credi.weighted_f1(["A", "A", "B"], ["A", "B", "B"], ["A", "B"]) == pytest.approx(2 / 3)


def test_answer_round_trip_and_errors():
    labels = {"polarity": "negative", "rel_type": "affiliative", "hierarchy": "senior"}
    assert credi.parse_response("Sure. " + credi.render_answer(labels) + " Done.") == labels
    with pytest.raises(ValueError):
        credi.parse_response("polarity=hostile; rel_type=other; hierarchy=peer")


def test_topk_and_embedder():
    e = credi.HashEmbedder(32)
    entries = [(f"d{i}", e.embed(t)) for i, t in enumerate(["郭靖道", "黄蓉笑道", "欧阳锋冷笑"])]
    hits = credi.topk(entries, e.embed("黄蓉笑道"), 2)
    assert hits[0][0] == "d1"
    assert hits[0][1] == pytest.approx(1.0, abs=1e-6)
    assert len(hits) == 2


def test_graphml_loads_in_networkx():
    nx = pytest.importorskip("networkx")
    text = credi.network(str(FIXTURES / "corpus50.jsonl"), "graphml")
    g = nx.read_graphml(io.BytesIO(text.encode("utf-8")))
    assert not g.is_directed()
    assert g.number_of_nodes() == 17
    assert g.number_of_edges() == 24
    for _, _, data in g.edges(data=True):
        assert -1.0 <= data["polarity_score"] <= 1.0
        assert data["color"].startswith("#")
    assert credi.edge_color(-1.0) == "#FF0000"
    assert credi.node_size(0) == 1.0


def _workspace(tmp_path):
    cfg = json.loads((FIXTURES / "config50.json").read_text(encoding="utf-8"))
    for key in ("novels", "roster", "corpus", "roles"):
        cfg["paths"][key] = str(FIXTURES / cfg["paths"][key])
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg, ensure_ascii=False), encoding="utf-8")
    return path


def test_in_process_run(tmp_path):
    path = _workspace(tmp_path)
    code, out, err = credi.run_cli(["--config", str(path), "run"])
    assert code == 0, err
    report = json.loads((tmp_path / "out" / "reports" / "eval.json").read_text(encoding="utf-8"))
    assert report["schema"] == "credi.eval_report/1"
    assert credi.run_cli(["stats"])[0] == 4


def test_cli_binary(tmp_path):
    exe = os.environ.get("CREDI_CLI") or shutil.which("credi")
    if not exe:
        pytest.skip("credi executable not available")
    path = _workspace(tmp_path)
    result = subprocess.run([exe, "--config", str(path), "--network.formats", "graphml", "network"],
                            capture_output=True, text=True)
    assert result.returncode == 0, result.stderr
    assert sorted(p.name for p in (tmp_path / "out").iterdir()) == ["network.graphml"]
