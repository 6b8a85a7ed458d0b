import json
import os
import pathlib
import shutil
import subprocess

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]
CLI = os.environ.get("TFQ_CLI") or shutil.which("tfqudit")
if CLI:
    CLI = str(pathlib.Path(CLI).resolve())
SCHEMAS = pathlib.Path(os.environ.get("TFQ_SCHEMAS", ROOT / "schemas"))

pytestmark = pytest.mark.skipif(CLI is None, reason="tfqudit executable not found (set TFQ_CLI)")


def run(*args, cwd):
    return subprocess.run([CLI, *map(str, args)], cwd=cwd, capture_output=True, text=True)


def validator(name):
    jsonschema = pytest.importorskip("jsonschema")
    referencing = pytest.importorskip("referencing")
    resources = []
    for p in SCHEMAS.glob("*.schema.json"):
        resources.append((p.name, referencing.Resource.from_contents(json.loads(p.read_text()))))
    registry = referencing.Registry().with_resources(resources)
    schema = json.loads((SCHEMAS / name).read_text())
    return jsonschema.Draft202012Validator(schema, registry=registry)


def load(path):
    return json.loads(pathlib.Path(path).read_text())


@pytest.fixture(scope="module")
def tags(tmp_path_factory):
    wd = tmp_path_factory.mktemp("sim")
    r = run("--seed", 7, "--out", "sim", "simulate", "--preset", "ideal",
            "--duration", 0.2, "--pair-rate", 2e5, cwd=wd)
    assert r.returncode == 0, r.stderr
    meta = load(wd / "sim" / "tags.sim.json")
    validator("simulation_config.schema.json").validate(meta["simulation"])
    return wd, wd / meta["tags"]


def test_bin_certify_mub(tags):
    wd, path = tags
    assert run("--out", "b", "bin", "--tags", path, "--d", 4, cwd=wd).returncode == 0
    m = wd / "b" / "matrices"
    r = run("--out", "c", "certify", "--tt", m / "TT.csv", "--ff", m / "FF.csv",
            "--d", 4, "--no-bootstrap", cwd=wd)
    assert r.returncode == 0, r.stderr
    cert = load(wd / "c" / "certify.json")
    validator("dimension_report.schema.json").validate(cert)
    assert cert["witness"]["d_ent"] == 4

    r = run("--out", "m", "mub-check", "--matrix", m / "TF.csv", "--d", 4, cwd=wd)
    assert r.returncode == 0, r.stderr
    validator("mub.schema.json").validate(load(wd / "m" / "mub.json"))


def test_keyrate_and_sweep(tmp_path):
    r = run("--out", "k", "keyrate", "--w", 0.98, "--h-tt", 0.1, "--d", 8, "--regime", "all", cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    out = load(tmp_path / "k" / "keyrate.json")
    validator("keyrate.schema.json").validate(out)
    ells = {x["regime"]: x["ell"] for x in out["results"]}
    assert ells["coherent"] <= ells["collective"] <= ells["asymptotic"]
    assert out["protocol"]["d"] == 8

    r = run("--out", "s", "sweep", "--w", 0.98, "--h-tt", 0.1, "--d", 8,
            "--variable", "splitting_ratio", "--grid", "0.05,0.1,0.2", cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    csv = (tmp_path / "s" / "sweep_splitting_ratio_collective.csv").read_text().splitlines()
    assert csv[0].startswith("variable,value,regime,ell")
    assert len(csv) == 4


def test_report_bundle_is_deterministic(tags):
    wd, path = tags
    outputs = []
    for name in ("r1", "r2"):
        r = run("--seed", 3, "--out", name, "report", "--tags", path, "--d", 2, 4,
                "--samples", 200, cwd=wd)
        assert r.returncode == 0, r.stderr
        outputs.append((wd / name / "reports" / "d0004.json").read_text())
    assert outputs[0] == outputs[1]

    summary = load(wd / "r1" / "summary.json")
    validator("summary.schema.json").validate(summary)
    validator("pipeline_config.schema.json").validate(summary["config"])
    for rep in (wd / "r1" / "reports").glob("d*.json"):
        validator("dimension_report.schema.json").validate(load(rep))


def test_exit_codes(tmp_path, tags):
    _, path = tags
    # 2: configuration
    (tmp_path / "bad.json").write_text('{"nope": 1}')
    assert run("--config", "bad.json", "report", "--tags", path, cwd=tmp_path).returncode == 2
    assert run("keyrate", "--w", 0.9, "--h-tt", 0.1, "--d", 4, "--regime", "bogus", cwd=tmp_path).returncode == 2
    assert run("keyrate", "--w", "nan", "--h-tt", 0.1, "--d", 4, cwd=tmp_path).returncode == 2
    assert run("keyrate", "--w", 1.5, "--h-tt", 0.1, "--d", 4, cwd=tmp_path).returncode == 2
    (tmp_path / "broken.json").write_text("{not json")
    assert run("--config", "broken.json", "report", "--tags", path, cwd=tmp_path).returncode == 2
    # 3: data
    assert run("certify", "--tt", "missing.csv", "--ff", "missing.csv", cwd=tmp_path).returncode == 3
    (tmp_path / "TT.csv").write_text('{"d":2,"basis_pair":"TT","duration":1,"format":"dense"}\n1,2\n')
    assert run("certify", "--tt", "TT.csv", "--ff", "TT.csv", cwd=tmp_path).returncode == 3
