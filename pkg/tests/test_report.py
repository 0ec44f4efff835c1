import csv
import hashlib
import json

import numpy as np

from pi_discovery import BleMode, RunManifest
from pi_discovery.report import MANIFEST_NAME, atomic_write_text, dumps, write_csv, write_json
from pi_discovery.svg import Series, cdf_chart, line_chart, scatter_chart

from .conftest import get_hw


def test_atomic_write(tmp_path):
    """Test that the target is replaced and no temporary file is left."""
    target = tmp_path / "sub" / "out.txt"
    atomic_write_text(target, "first")
    atomic_write_text(target, "second")
    assert target.read_text() == "second"
    assert [p.name for p in target.parent.iterdir()] == ["out.txt"]


def test_json_output(tmp_path):
    """Test numpy scalars, enums and the manifest reference."""
    path = write_json(tmp_path / "r.json", {"dm": np.float64(1.5), "mode": BleMode.BIDIR, "n": np.int64(3)})
    data = json.loads(path.read_text())
    assert data == {"dm": 1.5, "mode": "bidir", "n": 3, "manifest": MANIFEST_NAME}
    assert "manifest" not in json.loads(dumps({"a": 1}))


def test_csv_output(tmp_path):
    """Test the header row and empty cells for missing values."""
    path = write_csv(tmp_path / "r.csv", ["eta", "dm"], [(0.01, 1.28), (0.02, None)])
    with path.open() as f:
        rows = list(csv.reader(f))
    assert rows == [["eta", "dm"], ["0.01", "1.28"], ["0.02", ""]]


def test_manifest(tmp_path):
    """Test the manifest's output hashes and hardware profile."""
    out = write_csv(tmp_path / "r.csv", ["a"], [(1,)])
    manifest = RunManifest(command="param", arguments={"eta": 0.01}, hw=get_hw(), master_seed=7)
    manifest.add(out)
    path = manifest.write(tmp_path)
    data = json.loads(path.read_text())
    assert path.name == MANIFEST_NAME
    assert data["outputs"] == {"r.csv": hashlib.sha256(out.read_bytes()).hexdigest()}
    assert data["hardware_profile_sha256"] == get_hw().digest()
    assert data["master_seed"] == 7
    assert data["finished"] is not None


def test_line_chart():
    """Test a line chart with a log-scaled axis and an escaped title."""
    svg = line_chart(
        "gain <Disco & co>",
        [Series("Disco", [0.01, 0.02], [40.0, 20.0]), Series("empty-y", [0.01, 0.02], [0.0, 5.0])],
        "duty-cycle",
        "gain",
        log_y=True,
    )
    assert svg.startswith("<svg")
    assert svg.endswith("</svg>\n")
    assert "gain &lt;Disco &amp; co&gt;" in svg
    assert svg.count("<polyline") == 2


def test_cdf_and_scatter_charts():
    """Test step and scatter plots."""
    cdf = cdf_chart("cdf", [Series("a", [0.1, 0.2, 0.3], [1 / 3, 2 / 3, 1.0])])
    assert cdf.count("<polyline") == 1 and cdf.endswith("</svg>\n")

    scatter = scatter_chart("gap", [Series("rows", [0.01, 0.02, 0.03], [0.1, 0.0, 0.2])])
    assert scatter.count("<circle") == 3
