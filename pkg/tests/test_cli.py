import json

import pytest

from conekit.cli import run
from conekit.io import SCHEMA, load_lattice, load_preset, revalidate


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _json_tail(text):
    return json.loads(text[text.index("{"):])


def test_lattice_info(capsys):
    code, out, _ = _run(capsys, "lattice", "info", "--preset", "u-plus-neg2")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == SCHEMA
    assert doc["result"]["rank"] == 3 and doc["result"]["signature"][:2] == [1, 2]
    assert doc["config"]["lattice"] == "u-plus-neg2"
    assert revalidate(doc) == []


def test_on_wall_point_exit_1(capsys):
    code, _, err = _run(capsys, "chambers", "locate", "--lattice", "diag:2,-2", "--squares", "2",
                        "--height", "2", "--point", "1,0")
    assert code == 1 and "point lies on wall (0,1)" in err


def test_density_csv(capsys, tmp_path):
    prefix = str(tmp_path / "dens")
    code, out, _ = _run(capsys, "hyp", "density", "--lattice", "diag:1,-1,-1,-1", "--d-max", "20",
                        "--radius", "1.5", "--samples", "2000", "--seed", "7", "--out", prefix)
    assert code == 0
    rows = out.strip().splitlines()
    assert rows[0] == "D,f_D,wall_count" and len(rows) == 21
    f = [float(r.split(",")[1]) for r in rows[1:]]
    assert all(b <= a for a, b in zip(f, f[1:]))
    meta = json.loads((tmp_path / "dens.json").read_text())
    assert meta["tolerances"]["normalization"] == 1e-12
    assert (tmp_path / "dens.csv").read_text() == out
    assert revalidate(meta) == []


def test_presets():
    assert load_preset("diag:1,-1,-1").gram == ((1, 0, 0), (0, -1, 0), (0, 0, -1))
    assert load_preset("u").gram == ((0, 1), (1, 0))
    from conekit import ConfigError
    with pytest.raises(ConfigError):
        load_preset("nosuch")


def test_config_errors_exit_2(capsys, tmp_path):
    assert _run(capsys, "lattice", "info", "--preset", "nosuch")[0] == 2
    assert _run(capsys, "nosuch")[0] == 2
    assert _run(capsys, "enum", "--lattice", "u", "--square", "-2", "--height", "x")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"gram": [[1, 2], [3, 4]]}')
    assert _run(capsys, "lattice", "info", "--lattice", str(bad))[0] == 2
    assert _run(capsys, "enum", "--lattice", "u", "--square", "-2", "--height", "2",
                "--anchor", "1,a")[0] == 2


def test_wrong_signature_exit_1(capsys):
    code, _, err = _run(capsys, "enum", "--lattice", "diag:1,1,-1", "--square", "-1",
                        "--height", "2")
    assert code == 1 and "signature" in err


def test_data_dir_override(monkeypatch, tmp_path):
    (tmp_path / "mine.json").write_text(json.dumps({"label": "mine", "rank": 2,
                                                    "gram": [[2, 1], [1, -2]]}))
    monkeypatch.setenv("CONEKIT_DATA_DIR", str(tmp_path))
    assert load_lattice("mine").gram == ((2, 1), (1, -2))


def test_enum_output(capsys):
    code, out, _ = _run(capsys, "enum", "--lattice", "lorentz-3", "--square", "-1",
                        "--anchor", "1,0,0", "--height", "1")
    lines = out.splitlines()
    vecs = [l for l in lines[:6]]
    assert vecs == ["0,0,1", "0,1,0", "1,-1,-1", "1,-1,1", "1,1,-1", "1,1,1"]
    doc = _json_tail(out)
    assert doc["result"]["count"] == 6 and doc["result"]["wall_squares"] == [-1]
    assert revalidate(doc) == []


def test_enum_cusps(capsys):
    code, out, _ = _run(capsys, "enum", "--lattice", "lorentz-3", "--square", "0",
                        "--anchor", "1,0,0", "--height", "1")
    assert out.splitlines()[:4] == ["1,-1,0", "1,0,-1", "1,0,1", "1,1,0"]


def test_orbits_report(capsys, tmp_path):
    code, out, _ = _run(capsys, "orbits", "--lattice", "u-plus-neg2", "--squares", "2",
                        "--height", "3", "--anchor", "1,1,0")
    doc = json.loads(out)
    assert code == 0 and doc["result"]["class_count"] == 2
    assert doc["result"]["status"] == "complete_within_window"
    assert revalidate(doc) == []
    gfile = tmp_path / "g.json"
    gfile.write_text(json.dumps({"name": "swap", "generators": [[[0, 1, 0], [1, 0, 0], [0, 0, 1]]]}))
    code, out, _ = _run(capsys, "orbits", "--lattice", "u-plus-neg2", "--squares", "2",
                        "--height", "2", "--anchor", "1,1,0", "--group", str(gfile))
    assert code == 0 and json.loads(out)["result"]["group"] == "swap"
    gfile.write_text(json.dumps({"generators": [[[2, 0, 0], [0, 1, 0], [0, 0, 1]]]}))
    assert _run(capsys, "orbits", "--lattice", "u-plus-neg2", "--squares", "2", "--height", "2",
                "--group", str(gfile))[0] == 1


@pytest.mark.parametrize("action, extra", [
    ("locate", []), ("faces", []), ("cross", ["--wall", "0,0,1"]),
    ("aut-orbits", ["--group-height", "2", "--word-cap", "2"]),
])
def test_chambers_round_trip(capsys, action, extra):
    code, out, _ = _run(capsys, "chambers", action, "--lattice", "u-plus-neg2", "--squares", "2",
                        "--height", "3", "--anchor", "1,1,0", *extra)
    doc = json.loads(out)
    assert code == 0 and revalidate(doc) == []
    assert all(k.count(",") == 2 for k in doc["result"]["chamber"]["signs"])


def test_cross_non_face_exit_1(capsys):
    code, _, err = _run(capsys, "chambers", "cross", "--lattice", "u-plus-neg2", "--squares", "2",
                        "--height", "3", "--anchor", "1,1,0", "--wall", "3,0,1")
    assert code == 1 and "not a face" in err


def test_geodesic_and_cusps(capsys):
    code, out, _ = _run(capsys, "hyp", "geodesic", "--lattice", "diag:1,-2,-1", "--wall", "0,0,1")
    doc = json.loads(out)
    assert code == 0 and doc["result"]["automorph"] == [[3, 4], [2, 3]]
    assert doc["tolerances"]["geodesic"] == 1e-9 and revalidate(doc) == []
    code, _, err = _run(capsys, "hyp", "geodesic", "--lattice", "lorentz-3", "--wall", "0,0,1")
    assert code == 1 and "cusp-bounded" in err
    code, out, _ = _run(capsys, "hyp", "cusps", "--lattice", "lorentz-3")
    doc = json.loads(out)
    assert code == 0 and doc["result"]["geodesic_count"] == 5 and revalidate(doc) == []


def test_period_commands(capsys):
    code, out, _ = _run(capsys, "period", "picard", "--lattice", "lorentz-3",
                        "--classes", "0,1,0;0,0,1")
    doc = json.loads(out)
    assert doc["result"]["picard"]["signature"] == [0, 2, 0] and revalidate(doc) == []
    code, out, _ = _run(capsys, "period", "projective", "--lattice", "lorentz-3",
                        "--classes", "0,1,0;0,0,1")
    assert json.loads(out)["result"]["projective"] is False
    code, out, _ = _run(capsys, "period", "deform", "--lattice", "diag:1,-1,-1,-1,-1",
                        "--classes", "0,1,0,0,0")
    doc = json.loads(out)
    assert doc["result"]["target"]["signature"] == [1, 2, 0] and revalidate(doc) == []
    assert _run(capsys, "period", "picard", "--lattice", "lorentz-3")[0] == 2


def test_tampered_report_is_caught(capsys):
    _, out, _ = _run(capsys, "chambers", "faces", "--lattice", "u-plus-neg2", "--squares", "2",
                     "--height", "3", "--anchor", "1,1,0")
    doc = json.loads(out)
    face = next(f for f in doc["result"]["faces"] if f["is_face"])
    face["witness"] = [1, 0, 0]
    assert revalidate(doc)


@pytest.mark.parametrize("argv", [
    ["enum", "--lattice", "lorentz-4", "--square", "-3", "--height", "6"],
    ["chambers", "faces", "--lattice", "u-plus-neg2", "--squares", "2", "--height", "4",
     "--anchor", "1,1,0"],
    ["hyp", "density", "--lattice", "lorentz-4", "--d-max", "6", "--samples", "300"],
])
def test_threads_do_not_change_bytes(capsys, argv):
    _, one, _ = _run(capsys, *argv, "--threads", "1")
    _, eight, _ = _run(capsys, *argv, "--threads", "8")
    assert one == eight
