import csv
import io
import json

import numpy as np
import pytest

from planesym.cli import COLUMNS, EXIT_ERROR, EXIT_OK, EXIT_PERIODICITY, main
from planesym.hka import HkaRecord, hka_path, write_hka
from planesym.imageio import save_png16
from tables import TABLES
from conftest import small_render


def test_constant_image_exits_with_periodicity_code(tmp_path, capsys):
    path = tmp_path / "flat.png"
    save_png16(path, np.full((256, 256), 0.4))
    assert main(["classify", str(path)]) == EXIT_PERIODICITY
    assert "error" in capsys.readouterr().err


def test_unreadable_image_exits_with_error(tmp_path):
    path = tmp_path / "x.png"
    path.write_text("nope")
    assert main(["classify", str(path)]) == EXIT_ERROR


def test_classify_csv_and_json(tmp_path, capsys):
    path = tmp_path / "p4.png"
    save_png16(path, small_render("p4"))
    assert main(["classify", str(path)]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert list(rows[0]) == COLUMNS
    assert len(rows) == 17 and rows[0]["kl_best"] == "p4"
    out = tmp_path / "r.json"
    assert main(["classify", str(path), "--format", "json", "--out", str(out),
                 "--subset", "p2,p4"]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["kl_best"] == "p4" and doc["subset"] == ["p2", "p4"]


def test_classify_several_images_into_directory(tmp_path):
    paths = []
    for g in ("p4", "p2mg"):
        paths.append(tmp_path / f"{g}.png")
        save_png16(paths[-1], small_render(g))
    out = tmp_path / "out"
    out.mkdir()
    assert main(["classify", *map(str, paths), "--out", str(out)]) == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["p2mg.csv", "p4.csv"]


def test_classify_selection_errors(tmp_path):
    path = tmp_path / "p4.png"
    save_png16(path, small_render("p4"))
    assert main(["classify", str(path), "--size", "100"]) == EXIT_ERROR
    with pytest.raises(SystemExit):
        main(["classify", str(path), "--center", "12"])
    with pytest.raises(SystemExit):
        main(["classify", str(path), "--subset", "p2,p5"])


def test_classify_hka_reproduces_published_weights(tmp_path, capsys):
    # (J, N) per group encoded as a single coefficient pair with the given squared residual
    for g, J, N in TABLES[1]:
        if g not in ("p2", "p3", "p6"):
            continue
        write_hka(hka_path(tmp_path, "t1", g),
                  [HkaRecord(1, 0, 1.0, 0.0, 1.0 - np.sqrt(J), 0.0)]
                  + [HkaRecord(i, 1, 1.0, 0.0, 1.0, 0.0) for i in range(1, N)])
    assert main(["classify-hka", str(tmp_path), "--format", "json"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    weights = {r["group"]: r["G-AW(subset)"] for r in doc["rows"]}
    assert weights["p2"] == pytest.approx(46.1, abs=0.5)
    assert weights["p3"] == pytest.approx(26.9, abs=0.5)
    assert weights["p6"] == pytest.approx(27.0, abs=0.5)
    assert doc["kl_best"] == "p2"


def test_classify_hka_empty_directory(tmp_path):
    assert main(["classify-hka", str(tmp_path)]) == EXIT_ERROR


def test_generate(tmp_path):
    assert main(["generate", "--group", "p4", "--cell", "24,24,90", "--size", "128",
                 "--rgb", "0.5", "--spread", "2", "--out", str(tmp_path), "--name", "t"]) == EXIT_OK
    side = json.loads((tmp_path / "t_rgb0.50_spread2.json").read_text())
    assert side["group"] == "p4" and side["noise"]["rgb_level"] == 0.5
    assert (tmp_path / "t_rgb0.50_spread2.png").exists()


def test_generate_matrix_and_pseudo(tmp_path):
    assert main(["generate", "--pseudo", "--size", "64", "--cell", "16,16,120", "--matrix",
                 "--out", str(tmp_path)]) == EXIT_OK
    assert len(list(tmp_path.glob("*.png"))) == 14
    side = json.loads(next(tmp_path.glob("*.json")).read_text())
    assert side["pseudo_hexagonal"] is True and side["group"] == "p2"
