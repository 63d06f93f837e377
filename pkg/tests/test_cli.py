import json

import pytest

from kron_trace.cli import run


def test_gen_then_trace(tmp_path, capsys):
    net = tmp_path / "sg4.json"
    assert run(["gen", "sg-slit", "--level", "4", "-o", str(net)]) == 0
    doc = json.loads(net.read_text())
    assert set(doc) == {"network", "geometry", "domain"}
    out = tmp_path / "sg4.trace.json"
    assert run(["trace", str(net), "-o", str(out)]) == 0
    tr = json.loads(out.read_text())
    assert len(tr["boundary"]) == 32
    assert max(abs(k) for k in tr["kappa"].values()) == 0.0


def test_trace_reads_bare_network(tmp_path):
    full = tmp_path / "hs.json"
    run(["gen", "half-strip", "--width", "8", "--far", "absorbing", "-o", str(full)])
    bare = tmp_path / "bare.json"
    bare.write_text(json.dumps(json.loads(full.read_text())["network"]))
    assert run(["trace", str(bare), "--measure", "harmonic", "-o", str(tmp_path / "t.json")]) == 0


@pytest.mark.parametrize("kind", ["besov", "whitney", "doubling", "capdensity", "jump",
                                  "killing", "exit", "heatkernel", "green-hm"])
def test_reports(tmp_path, kind):
    out = tmp_path / f"{kind}.json"
    assert run(["report", kind, "sg-slit", "--level", "4", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert {"name", "samples", "min", "max", "ratio", "fit", "pass"} <= set(doc)
    assert out.with_suffix(".csv").exists()


def test_failed_threshold_exits_one(tmp_path):
    out = tmp_path / "j.json"
    assert run(["report", "jump", "sg-slit", "--level", "4", "--max-ratio", "1.01",
                "-o", str(out)]) == 1


def test_usage_and_data_errors(tmp_path, capsys):
    assert run(["bogus"]) == 2
    assert run(["gen", "sg-slit", "-o", str(tmp_path / "x.json")]) == 2
    assert run(["gen", "sg-slit", "--level", "3"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"vertices": [], "edges": [], "extra": 1}')
    assert run(["trace", str(bad), "-o", str(tmp_path / "t.json")]) == 2
    assert not (tmp_path / "t.json").exists()
    assert run(["trace", str(tmp_path / "missing.json"), "-o", str(tmp_path / "t.json")]) == 2
    assert "SchemaError" in capsys.readouterr().err


def test_artifacts_are_byte_identical(tmp_path):
    for tag in ("a", "b"):
        assert run(["suite", "half-strip", "--widths", "8,16", "--seed", "3", "--no-criteria",
                    "-o", str(tmp_path / tag)]) == 0
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*")
                   if p.is_file() and p.name != "manifest.json")
    assert files
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    m = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert m["seed"] == 3 and m["timings"] and m["artifacts"]


def test_export(tmp_path):
    assert run(["export", "sg-slit", "--level", "4", "-o", str(tmp_path)]) == 0
    assert {p.name for p in tmp_path.iterdir()} == {"domain.json", "trace.json", "cover.json"}
