import json

import numpy as np
import pytest

from gmtpool import report
from gmtpool.config import RunConfig
from gmtpool.errors import UsageError
from gmtpool.graphs import gen_ring
from gmtpool.report import (
    cluster_svg,
    get_template,
    list_templates,
    overlay_svg,
    register_template_directory,
    render_template,
    write_assignment,
    write_coordinates,
    write_history,
    write_run_record,
    write_summary,
)
from gmtpool.report.loader import load_templates, parse_template
from gmtpool.settings import settings

CUSTOM = """---
name: badge
description: A single label
arguments:
  - name: label
  - name: color
    required: false
---
<text fill="{{ color or 'black' }}">{{ label }}</text>
"""


@pytest.fixture(autouse=True)
def _fresh_templates():
    report.refresh()
    yield
    report.refresh()


def test_builtin_templates():
    names = {t.name for t in list_templates()}
    assert {"overlay", "clusters"} <= names
    args = {a.name: a.required for a in get_template("overlay").arguments}
    assert args["caption"] is False and args["title"] is True
    with pytest.raises(KeyError):
        get_template("nope")


def test_missing_required_argument():
    with pytest.raises(UsageError) as info:
        render_template("overlay", {"title": "t"})
    assert "edges" in info.value.data["missing"]


def test_custom_directory_and_escaping(tmp_path):
    (tmp_path / "badge.svg.j2").write_text(CUSTOM)
    (tmp_path / "broken.svg.j2").write_text("no front matter here")
    assert set(load_templates(tmp_path)) == {"badge"}
    register_template_directory(tmp_path)
    assert render_template("badge", {"label": "a<b"}).strip() == '<text fill="black">a&lt;b</text>'
    assert parse_template(tmp_path / "badge.svg.j2").dict()["arguments"][1]["required"] is False
    with pytest.raises(FileNotFoundError):
        load_templates(tmp_path / "missing")


def test_overlay_and_cluster_svg():
    g = gen_ring(6)
    svg = overlay_svg(g.coords, g.coords * 0.9, g.edges, title="ring", caption="x_error 0")
    assert svg.startswith("<svg")
    assert svg.count("<line") == 6
    assert svg.count("<circle") == 12
    assert "x_error 0" in svg
    assert "x_error" not in overlay_svg(g.coords, g.coords, g.edges, title="ring")

    clusters = cluster_svg(g.coords, g.edges, np.array([0, 0, 0, 1, 1, 1]), 2, title="k=2")
    assert clusters.count("<circle") == 6
    assert clusters.count("<title>cluster 1</title>") == 3


def test_csv_headers(tmp_path):
    g = gen_ring(4)
    lines = write_coordinates(tmp_path / "c.csv", g.coords, g.coords).read_text().splitlines()
    assert lines[0] == "node_id,x_true,y_true,x_rec,y_rec"
    assert len(lines) == 5

    lines = write_assignment(tmp_path / "a.csv", np.full((3, 2), 0.5)).read_text().splitlines()
    assert lines[0] == "node_id,cluster_0,cluster_1"
    assert lines[1] == "0,0.5,0.5"

    lines = write_history(tmp_path / "h" / "h.csv", [{"epoch": 1, "train_loss": 0.25}]).read_text().splitlines()
    assert lines == ["epoch,train_loss,val_loss,val_acc", "1,0.25,,"]

    summary = {"runs": 2.0, "folds": 20.0, "test_acc_mean": 0.8, "test_acc_std": 0.1, "val_acc_mean": 0.7, "val_acc_std": 0.0}
    lines = write_summary(tmp_path / "s.csv", summary, dataset="MUTAG", pool="gmt").read_text().splitlines()
    assert lines[0].startswith("dataset,pool,runs,folds")
    assert lines[1] == "MUTAG,gmt,2,20,0.8,0.1,0.7,0.0"


def test_run_record(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "GIT_DESCRIBE", "v1.2-3-gabc")
    config = RunConfig.build(task="reconstruct", seed=5)
    out = write_coordinates(tmp_path / "coordinates.csv", np.zeros((2, 2)), np.zeros((2, 2)))
    record = json.loads(write_run_record(tmp_path, config, [out]).read_text())
    assert record["task"] == "reconstruct"
    assert record["seed"] == 5
    assert record["git_describe"] == "v1.2-3-gabc"
    assert record["outputs"] == ["coordinates.csv"]
    assert record["config"]["pool"] == "gmpool"
    assert RunConfig.from_text((tmp_path / "config.txt").read_text()) == config
