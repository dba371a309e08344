import json
import subprocess
import sys

from erdos_affine.cli import main
from erdos_affine.geometry import PointSet
from erdos_affine.grid import GridSet


def run(*args):
    return main(list(args))


def test_seq_polygon(tmp_path, capsys):
    assert run("seq", "family=polygon", "n_max=20", f"out={tmp_path}") == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "n,k_n,delta_n,score" and len(lines) == 21
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "seq" and manifest["config"]["n_max"] == 20


def test_seq_geometric_plateau(tmp_path, capsys):
    assert run("seq", "family=geometric", "ratio=0.5", "n_max=100", f"out={tmp_path}") == 0
    last = capsys.readouterr().out.strip().splitlines()[-1].split(",")
    assert abs(float(last[3]) - 0.6931) < 0.01


def test_usage_errors(tmp_path):
    assert run("seq", "family=nope", f"out={tmp_path}") == 2
    assert run("seq", "colour=red") == 2
    assert run("seq", "n_max=abc") == 2
    assert run("seq", "novalue") == 2
    assert run("frobnicate") == 2
    assert run() == 2


def test_construct_deterministic_and_pbm(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["construct", "family=polygon", "n=4", "alpha=0.5", "seed=17", "x_samples=3",
            "budget=200"]
    assert run(*args, f"out={a}") == 0
    assert run(*args, f"out={b}") == 0
    for name in ("stage.grid", "points.txt", "stage.pbm"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    E = GridSet.loads((a / "stage.grid").read_text())
    pbm = (a / "stage.pbm").read_text().split("\n")
    assert pbm[0] == "P1" and pbm[1] == f"{E.L} {E.L}"
    pixels = " ".join(pbm[2:]).split()
    assert len(pixels) == E.L * E.L


def test_construct_product_one_dimensional(tmp_path, capsys):
    assert run("construct", "family=product", "n=6", "alpha=0.5", f"out={tmp_path}") == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["mu_V"]["method"] == "exact"


def test_construct_cap(tmp_path):
    assert run("construct", "family=polygon", "n=30", "alpha=0.5", "max_cells=100",
               f"out={tmp_path}") == 4


def test_detect(tmp_path, capsys):
    A = PointSet.from_scalars([0.01])
    (tmp_path / "a.txt").write_text(A.dumps())
    (tmp_path / "full.grid").write_text(GridSet.full(1, 8).dumps())
    (tmp_path / "empty.grid").write_text(GridSet.full(1, 8, False).dumps())
    (tmp_path / "bad.grid").write_text("not a grid\n")
    assert run("detect", f"grid={tmp_path / 'full.grid'}", f"points={tmp_path / 'a.txt'}",
               f"out={tmp_path / 'o1'}") == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "found"
    assert run("detect", f"grid={tmp_path / 'empty.grid'}", f"points={tmp_path / 'a.txt'}",
               f"out={tmp_path / 'o2'}") == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "not_found_certified"
    assert run("detect", f"grid={tmp_path / 'bad.grid'}", f"points={tmp_path / 'a.txt'}",
               f"out={tmp_path / 'o3'}") == 3
    assert run("detect", f"points={tmp_path / 'a.txt'}") == 2


def test_prop23_quick_and_errors(tmp_path, capsys):
    assert run("prop23", "family=product", "alpha=0.5", "quality_k=2", "n_min=2", "n_max=60",
               "omega_trials=10", f"out={tmp_path / 'p'}") == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["omega_accepted"]
    assert run("prop23", "family=polygon", "mode=exact_1d", f"out={tmp_path / 'q'}") == 3
    assert run("prop23", "family=product", "omega_trials=0", f"out={tmp_path / 'r'}") == 5


def test_replay_reproduces(tmp_path, capsys):
    out = tmp_path / "c"
    assert run("construct", "family=product", "n=5", "seed=3", f"out={out}") == 0
    first = (out / "stage.grid").read_text()
    (out / "stage.grid").unlink()
    assert run("replay", f"manifest={out / 'manifest.json'}") == 0
    assert (out / "stage.grid").read_text() == first


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "erdos_affine", "seq", "family=polygon", "n_max=3",
                        f"out={tmp_path}"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("n,k_n")
