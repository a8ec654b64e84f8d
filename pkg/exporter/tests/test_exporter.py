"""Exporter tests.

The engine is exercised only through its published interfaces: the GLIX/GLQY
wire formats and the installed `glyphrank` CLI (driven via subprocess). The
parity test is the release criterion and prints a PASS/FAIL line.
"""

import csv
import json
import shutil
import struct
import subprocess
import sys

import numpy as np
import pytest
import torch

from glyphrank_export import (
    MissingIds,
    ShapeMismatch,
    export_index,
    export_queries,
    load_checkpoint,
    save_toy_checkpoint,
)
from glyphrank_export.cli import main
from glyphrank_export.toy import ToyConfig

IDS_ENTRIES = [
    ("c00", "⿰日月"),
    ("c01", "⿱日月"),
    ("c02", "⿰木木"),
    ("c03", "⿳日木月"),
    ("c04", "⿲日月木"),
    ("c05", "⿱⿰日月木"),
    ("c06", "日"),
    ("c07", "⿰⿱日月⿰木水"),
    ("c08", "⿱水火"),
    ("c09", "⿰火水"),
]


def glyphrank_cmd():
    exe = shutil.which("glyphrank")
    if exe:
        return [exe]
    return [sys.executable, "-m", "glyphrank.cli"]


def run_engine(*args):
    return subprocess.run(
        glyphrank_cmd() + list(args), capture_output=True, text=True, check=False
    )


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("export")
    ckpt = root / "toy.pt"
    cfg = save_toy_checkpoint(ckpt, ToyConfig(dim=16, hidden=32, image_size=16, grid=4), seed=3)
    dict_path = root / "ids.tsv"
    dict_path.write_text("".join(f"{l}\t{s}\n" for l, s in IDS_ENTRIES), encoding="utf-8")
    rng = np.random.default_rng(12)
    images_path = root / "images.jsonl"
    with open(images_path, "w", encoding="utf-8") as fh:
        for i in range(10):
            record = {
                "id": f"q{i:02d}",
                "pixels": rng.uniform(0, 1, size=(cfg.image_size, cfg.image_size)).round(4).tolist(),
                "truth": IDS_ENTRIES[i][0],
            }
            fh.write(json.dumps(record) + "\n")
    return root, ckpt, dict_path, images_path, cfg


@pytest.fixture(scope="module")
def exported(workspace):
    root, ckpt, dict_path, images_path, _ = workspace
    idx = root / "toy.glix"
    qry = root / "toy.glqy"
    m_idx = export_index(ckpt, dict_path, idx)
    m_qry = export_queries(ckpt, images_path, qry)
    return idx, qry, m_idx, m_qry


class TestFormatConformance:
    def test_manifest_matches_binary_headers(self, exported):
        idx, qry, m_idx, m_qry = exported
        for path, magic, manifest in ((idx, b"GLIX", m_idx), (qry, b"GLQY", m_qry)):
            with open(path, "rb") as fh:
                assert fh.read(4) == magic
                version, dim, count = struct.unpack("<III", fh.read(12))
            assert version == 1
            assert dim == manifest.dim
            assert count == manifest.count
        assert m_idx.count == 10 and m_qry.count == 10
        assert m_qry.n_patches == 16 and m_idx.n_patches is None
        assert m_idx.normalized and "toy" in m_idx.checkpoint

    def test_engine_accepts_exported_files(self, exported, tmp_path):
        idx, qry, _, _ = exported
        result = run_engine(
            "evaluate", "--index", str(idx), "--queries", str(qry), "--k", "5"
        )
        assert result.returncode == 0, result.stderr
        report = json.loads(result.stdout)
        assert 0.0 <= report["top1_accuracy"] <= 1.0


class TestErrors:
    def test_missing_ids_names_the_character(self, workspace, tmp_path):
        _, ckpt, _, _, _ = workspace
        bad = tmp_path / "bad.tsv"
        bad.write_text("c00\t⿰日月\nzap\t\n", encoding="utf-8")
        with pytest.raises(MissingIds, match="zap"):
            export_index(ckpt, bad, tmp_path / "o.glix")

    def test_image_shape_mismatch(self, workspace, tmp_path):
        _, ckpt, _, _, _ = workspace
        bad = tmp_path / "img.jsonl"
        bad.write_text(json.dumps({"id": "q", "pixels": [[0.1, 0.2], [0.3, 0.4]]}) + "\n")
        with pytest.raises(ShapeMismatch):
            export_queries(ckpt, bad, tmp_path / "o.glqy")

    def test_unknown_architecture(self, tmp_path):
        p = tmp_path / "weird.pt"
        torch.save({"arch": "unknown", "config": {}, "state_dict": {}}, p)
        with pytest.raises(ShapeMismatch, match="unknown architecture"):
            load_checkpoint(p)


class TestCli:
    def test_index_and_queries_commands(self, workspace, tmp_path, capsys):
        _, ckpt, dict_path, images_path, _ = workspace
        code = main(
            ["index", "--checkpoint", str(ckpt), "--dict", str(dict_path),
             "--out", str(tmp_path / "i.glix")]
        )
        out = capsys.readouterr().out
        assert code == 0
        manifest = json.loads(out)
        assert manifest["count"] == 10 and manifest["dim"] == 16
        code = main(
            ["queries", "--checkpoint", str(ckpt), "--images", str(images_path),
             "--out", str(tmp_path / "q.glqy")]
        )
        assert code == 0
        assert json.loads(capsys.readouterr().out)["n_patches"] == 16

    def test_missing_checkpoint_is_usage_error(self, tmp_path, capsys):
        code = main(["index", "--checkpoint", str(tmp_path / "nope.pt"),
                     "--dict", str(tmp_path / "nope.tsv"), "--out", str(tmp_path / "o.glix")])
        assert code == 1


def native_similarities(adapter, entries, images):
    """Framework-native global cosine and patch-driven local similarity."""
    sims = {}
    with torch.no_grad():
        cands = {label: adapter.encode_text(ids) for label, ids in entries}
        masks = {
            label: torch.tensor([0 if 0x2FF0 <= ord(ch) <= 0x2FFB else 1 for ch in ids], dtype=torch.bool)
            for label, ids in entries
        }
        for qid, pixels, _ in images:
            qg, ql = adapter.encode_image(pixels)
            for label, _ in entries:
                cg, cl = cands[label]
                radicals = cl[masks[label]]
                s_global = float(qg @ cg)
                s_local = float((ql @ radicals.T).max(dim=1).values.mean())
                sims[qid, label] = (s_global, s_local)
    return sims


def test_engine_parity(workspace, exported, tmp_path):
    """Release criterion: engine scores on exported files match the
    framework-native computation within 1e-5 over all 100 query/candidate
    pairs, for both the global and the local similarity."""
    from glyphrank_export.export import read_images_jsonl

    _, ckpt, _, images_path, _ = workspace
    idx, qry, _, _ = exported
    adapter = load_checkpoint(ckpt)
    native = native_similarities(adapter, IDS_ENTRIES, read_images_jsonl(images_path))

    out_csv = tmp_path / "ranks.csv"
    result = run_engine(
        "query", "--index", str(idx), "--queries", str(qry),
        "--k", str(len(IDS_ENTRIES)), "--out", str(out_csv),
    )
    assert result.returncode == 0, result.stderr
    with open(out_csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 100

    worst_g = worst_l = 0.0
    for row in rows:
        ng, nl = native[row["query_id"], row["label"]]
        worst_g = max(worst_g, abs(float(row["s_global"]) - ng))
        worst_l = max(worst_l, abs(float(row["s_local"]) - nl))
    ok = worst_g <= 1e-5 and worst_l <= 1e-5
    print(
        f"[{'PASS' if ok else 'FAIL'}] exporter/engine similarity parity on 100 pairs "
        f"(max global err={worst_g:.2e}, max local err={worst_l:.2e})"
    )
    assert ok
