import subprocess
import sys

import numpy as np
import pytest

from bayesbd.cli import linear_fit, main, parse_shape
from bayesbd.geometry import circle_boundary
from bayesbd.imageio import read_fit, read_observation, save_png, image_grid, summary_from_curve, write_fit

S1 = ["--boundary", "ellipse:a=0.35,b=0.25,rotation=60,dx=0.1,dy=0.1"]


def run(*args):
    return main([str(a) for a in args])


def simulate(path, *extra, m=40, seed=1):
    return run("simulate", "--family", "binary", "--m", m, "--pi-in", 0.5, "--pi-out", 0.2,
               "--seed", seed, "--out", path, *extra)


def test_parse_shape():
    assert parse_shape("circle:r=0.2") == circle_boundary(0.2)
    e = parse_shape("ellipse:a=0.35,b=0.25,rotation=90")
    assert e(0.0) == pytest.approx(0.25)
    assert parse_shape("triangle")(np.pi / 2) == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        parse_shape("hexagon")
    with pytest.raises(ValueError):
        parse_shape("circle:q=1")


def test_simulate_s2_flags(tmp_path):
    out = tmp_path / "s2.txt"
    assert simulate(out, "--boundary", "triangle:height=0.5", m=100) == 0
    o = read_observation(out)
    assert o.n == 10_000 and set(np.unique(o.intensity)) == {0.0, 1.0}
    cfg = o.meta["config"]
    assert cfg["pi_in"] == 0.5 and cfg["pi_out"] == 0.2 and cfg["boundary"] == "triangle:height=0.5"
    assert o.meta["boundary"] == {"kind": "triangle", "height": 0.5}


def test_simulate_missing_pi_is_usage_error(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        run("simulate", "--family", "binary", "--pi-out", 0.2, "--out", tmp_path / "x.txt")
    assert e.value.code == 2
    assert "--pi-in" in capsys.readouterr().err


def test_simulate_seed_determinism(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    simulate(a, seed=7)
    simulate(b, seed=7)
    assert a.read_bytes() == b.read_bytes()
    simulate(b, seed=8)
    assert a.read_bytes() != b.read_bytes()


def test_fit_nrun_zero_usage_error(tmp_path):
    obs = tmp_path / "o.txt"
    simulate(obs)
    with pytest.raises(SystemExit) as e:
        run("fit", "--input", obs, "--family", "binary", "--nrun", 0, "--out", tmp_path / "f.txt")
    assert e.value.code == 2


def test_fit_family_mismatch(tmp_path, capsys):
    obs = tmp_path / "g.txt"
    run("simulate", "--family", "gaussian", "--m", 20, "--mu-in", 1, "--mu-out", -1,
        "--sd-in", 1, "--sd-out", 1, "--out", obs)
    code = run("fit", "--input", obs, "--family", "binary", "--nrun", 10, "--nburn", 0,
               "--out", tmp_path / "f.txt")
    assert code == 1
    assert "non-binary intensity" in capsys.readouterr().err
    assert not (tmp_path / "f.txt").exists()


def test_fit_and_metrics_pipeline(tmp_path, capsys):
    obs, fit = tmp_path / "s1.txt", tmp_path / "fit.txt"
    simulate(obs, *S1, m=100, seed=11)
    svg = tmp_path / "fit.svg"
    assert run("fit", "--input", obs, "--family", "binary", "--nrun", 4000, "--nburn", 1000,
               "--J", 10, "--ordering", "I", "--sampler", "slice", "--seed", 3, "--out", fit,
               "--svg", svg) == 0
    assert svg.read_text().count("<path ") == 3
    capsys.readouterr()
    assert run("metrics", "--fit", fit, "--truth", S1[1]) == 0
    report = dict(line.split(" = ") for line in capsys.readouterr().out.strip().splitlines())
    assert float(report["lebesgue"]) <= 0.03
    rec = read_fit(fit)
    assert rec.config["sampler"] == "slice" and rec.seed == 3
    assert rec.membership.size == 10_000


def truth_fit(tmp_path, radius, center=(0.5, 0.5)):
    p = tmp_path / f"fit_{radius}.txt"
    write_fit(summary_from_curve(circle_boundary(radius)), [], p, center=center)
    return p


def test_metrics_identical_and_concentric(tmp_path, capsys):
    p = truth_fit(tmp_path, 0.2)
    run("metrics", "--fit", p, "--truth", "circle:r=0.2")
    vals = [float(line.split(" = ")[1]) for line in capsys.readouterr().out.splitlines()]
    assert vals == [0.0, 0.0, 0.0]
    run("metrics", "--fit", p, "--truth", "circle:r=0.3")
    vals = [float(line.split(" = ")[1]) for line in capsys.readouterr().out.splitlines()]
    assert vals == pytest.approx([0.15708, 0.3846, 0.1], abs=1e-4)


def test_metrics_truth_file_and_center_mismatch(tmp_path, capsys):
    p = truth_fit(tmp_path, 0.2)
    q = truth_fit(tmp_path, 0.3, center=(0.4, 0.5))
    assert run("metrics", "--fit", p, "--truth", q) == 1
    assert "reference points differ" in capsys.readouterr().err
    assert run("metrics", "--fit", p, "--truth", "circle:r=0.2", "--truth-center", "0.5,0.4") == 1
    table = tmp_path / "curve.txt"
    th = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    np.savetxt(table, np.column_stack([th, np.full(200, 0.3)]))
    capsys.readouterr()
    assert run("metrics", "--fit", p, "--truth", table) == 0
    assert "lebesgue = 0.15707963" in capsys.readouterr().out


def test_bench_single_size(tmp_path, capsys):
    out = tmp_path / "bench.txt"
    assert run("bench", "--sizes", 10, "--iters", 5, "--repeats", 1, "--out", out) == 0
    text = out.read_text()
    rows = [l for l in text.splitlines() if l and l[0].isdigit()]
    assert len(rows) == 1 and rows[0].startswith("100\t")
    assert "needs at least two sizes" in text and "r2" not in text


def test_linear_fit_exact():
    fit = linear_fit([(100, 1.0), (200, 2.0), (400, 4.0)])
    assert fit["slope"] == pytest.approx(0.01) and fit["r2"] == pytest.approx(1.0)
    assert linear_fit([(100, 1.0)]) is None


def test_image_input_and_mask(tmp_path, capsys):
    m = 40
    x, y = image_grid(m, m)
    img = tmp_path / "disk.png"
    save_png(img, (np.hypot(x - 0.5, y - 0.5) < 0.3).astype(float), m, m)
    mask = tmp_path / "mask.txt"
    mask.write_text(" ".join("1" if v < 0.45 else "0" for v in np.hypot(x - 0.5, y - 0.5)))
    fit = tmp_path / "f.txt"
    assert run("fit", "--input", img, "--family", "binary", "--binarize", 5, "--nrun", 200,
               "--nburn", 100, "--mask", mask, "--out", fit) == 0
    rec = read_fit(fit)
    assert rec.mask.sum() == (np.hypot(x - 0.5, y - 0.5) < 0.45).sum()
    assert np.max(np.abs(rec.summary.estimate - 0.3)) < 0.03
    bad = tmp_path / "bad_mask.txt"
    bad.write_text("1 0 2")
    assert run("fit", "--input", img, "--family", "binary", "--binarize", 5, "--mask", bad,
               "--out", fit) == 1


def test_multifit_too_few_pixels(tmp_path, capsys):
    obs = tmp_path / "o.txt"
    simulate(obs, "--boundary", "circle:r=0.05", m=20)
    code = run("multifit", "--input", obs, "--family", "binary", "--centers", "0.5,0.5",
               "--stages", 3, "--nrun", 100, "--nburn", 50, "--inimean", 0.05,
               "--out-prefix", tmp_path / "mf")
    assert code == 1
    assert "stopping after" in capsys.readouterr().err
    assert (tmp_path / "mf_stage1.txt").exists()


def test_multifit_usage_errors(tmp_path):
    obs = tmp_path / "o.txt"
    simulate(obs, m=10)
    for extra in (["--stages", 1], ["--stages", 3, "--centers", "0.5,0.5", "0.4,0.4"]):
        args = ["multifit", "--input", obs, "--family", "binary", "--out-prefix", tmp_path / "p"]
        if "--centers" not in extra:
            args += ["--centers", "0.5,0.5"]
        with pytest.raises(SystemExit) as e:
            run(*args, *extra)
        assert e.value.code == 2


def test_module_entry_point_exit_codes(tmp_path):
    r = subprocess.run([sys.executable, "-m", "bayesbd", "fit"], capture_output=True, text=True)
    assert r.returncode == 2
    r = subprocess.run([sys.executable, "-m", "bayesbd", "fit", "--input", str(tmp_path / "nope"),
                        "--family", "binary", "--out", str(tmp_path / "f.txt")],
                       capture_output=True, text=True)
    assert r.returncode == 1 and "no such file" in r.stderr
