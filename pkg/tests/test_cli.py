"""End-to-end command line behavior: reports, artifacts, exit codes."""

import json

import numpy as np
import pytest

import delayfilter as df
from delayfilter.cli import main


@pytest.fixture()
def model_file(tmp_path):
    def write(example_id, name="model.json", with_noise=False, delay=None):
        model, noise, _ = df.reference_example(example_id)
        doc = {"A": model.A.tolist(), "H": model.H.tolist(), "C": model.C.tolist()}
        if with_noise:
            doc["Q"] = noise.Q.tolist()
            doc["R"] = noise.R.tolist()
        if delay is not None:
            doc["delay"] = delay
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)
    return write


def _report(capsys):
    return json.loads(capsys.readouterr().out)


def test_analyze_report(model_file, capsys):
    rc = main(["analyze", model_file("minphase3", with_noise=True)])
    report = _report(capsys)
    assert rc == 0
    assert report["schema_version"] == 1
    assert report["delay_analysis"]["minimal_delay"] == 1
    assert report["zeros"]["classification"] == "AllInsideUnitCircle"
    assert report["verdict"] == "AsymptoticallyUnbiased"
    assert report["gain"]["method"] == "SquareInverse"
    assert report["noise_defaulted"] is False


def test_analyze_infeasible_exits_2(model_file, capsys):
    rc = main(["analyze", model_file("invertibility4")])
    report = _report(capsys)
    assert rc == 2
    assert report["delay_analysis"]["minimal_delay"] is None
    assert report["verdict"] is None


def test_analyze_nonsquare_defaults_noise(model_file, capsys):
    rc = main(["analyze", model_file("nonsquare3")])
    report = _report(capsys)
    assert rc == 0
    assert report["noise_defaulted"] is True
    assert report["gain"]["method"] == "MinVarLagrangian"
    assert report["gain"]["steady_state_converged"] is True


def test_simulate_then_filter_roundtrip(model_file, tmp_path, capsys):
    mf = model_file("minphase3", with_noise=True)
    traj_csv = str(tmp_path / "traj.csv")
    est_csv = str(tmp_path / "est.csv")

    rc = main(["simulate", mf, "--e1", "sine:1:40", "--T", "80",
               "--seed", "3", "--out", traj_csv])
    sim_report = _report(capsys)
    assert rc == 0
    assert sim_report["rows"] == 81
    assert sim_report["noise"] == "off"

    rc = main(["filter", mf, traj_csv, "--out", est_csv])
    report = _report(capsys)
    assert rc == 0
    assert report["delay"] == 1
    assert report["gain"]["mode"] == "FixedSquare"
    assert report["verdict"] == "AsymptoticallyUnbiased"
    assert report["emitted"] == 79
    # The innovation is not zero on clean data: it is exactly the
    # signal the unknown input injects, and the filter decodes ehat
    # from it. What must vanish is the estimation error.
    assert report["innovation_rms"] > 1e-3

    lines = open(est_csv).read().splitlines()
    assert lines[0] == "k,xhat1,xhat2,xhat3,ehat1,innov1"
    assert len(lines) == 82

    truth = {}
    for row in open(traj_csv).read().splitlines()[1:]:
        cells = row.split(",")
        truth[int(cells[0])] = [float(c) for c in cells[2:]]  # x1,x2,x3,e1
    worst = 0.0
    for row in lines[1:]:
        cells = row.split(",")
        if cells[1] == "":
            continue  # warm-up row
        k = int(cells[0])
        # delay 1: row k estimates the state at k-1 and the input at k-2
        xhat = [float(c) for c in cells[1:4]]
        ehat = float(cells[4])
        worst = max(worst, max(abs(a - b) for a, b in zip(xhat, truth[k - 1][:3])))
        worst = max(worst, abs(ehat - truth[k - 2][3]))
    assert worst <= 1e-8


def test_simulate_deterministic(model_file, tmp_path, capsys):
    mf = model_file("minphase3")
    a = str(tmp_path / "a.csv")
    b = str(tmp_path / "b.csv")
    assert main(["simulate", mf, "--e1", "prbs:1:9", "--seed", "7", "--out", a]) == 0
    capsys.readouterr()
    assert main(["simulate", mf, "--e1", "prbs:1:9", "--seed", "7", "--out", b]) == 0
    capsys.readouterr()
    assert open(a).read() == open(b).read()


def test_simulate_missing_channel_exits_1(model_file, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", model_file("compartmental-25"), "--e1", "sine:1:40"])
    assert exc.value.code == 1


def test_simulate_rejects_bad_spec(model_file):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", model_file("minphase3"), "--e1", "ramp:1:5"])
    assert exc.value.code == 1


def test_simulate_noise_needs_q_r_or_defaults(model_file, tmp_path, capsys):
    # no Q/R in the file: simulate --noise on falls back to the default pair
    mf = model_file("minphase3")
    out = str(tmp_path / "noisy.csv")
    rc = main(["simulate", mf, "--e1", "sine:1:40", "--noise", "on", "--out", out])
    report = _report(capsys)
    assert rc == 0
    assert report["noise_defaulted"] is True


def test_filter_delay_flag_overrides_file(model_file, tmp_path, capsys):
    mf = model_file("nonsquare3", with_noise=True, delay=2)
    traj_csv = str(tmp_path / "t.csv")
    main(["simulate", mf, "--e1", "sine:1:40", "--out", traj_csv])
    capsys.readouterr()

    rc = main(["filter", mf, traj_csv, "--gain", "minvar",
               "--out", str(tmp_path / "e2.csv")])
    report = _report(capsys)
    assert rc == 0
    assert report["delay"] == 2  # file value honored
    assert report["gain"]["mode"] == "TimeVaryingMinVar"
    assert report["verdict"] == "AsymptoticallyUnbiased"

    rc = main(["filter", mf, traj_csv, "--delay", "1",
               "--out", str(tmp_path / "e1.csv")])
    assert rc == 0
    assert _report(capsys)["delay"] == 1  # flag wins


def test_filter_infeasible_delay_exits_2(model_file, tmp_path, capsys):
    mf = model_file("compartmental-25")
    traj_csv = str(tmp_path / "t.csv")
    main(["simulate", mf, "--e1", "sine:1:40", "--e2", "sine:1:30",
          "--out", traj_csv])
    capsys.readouterr()
    rc = main(["filter", mf, traj_csv, "--delay", "0",
               "--out", str(tmp_path / "e.csv")])
    assert rc == 2


def test_filter_mismatched_measurements_exit_1(model_file, tmp_path, capsys):
    mf = model_file("minphase3")
    bad = tmp_path / "bad.csv"
    bad.write_text("k,y1,y2\n0,1.0,2.0\n")
    rc = main(["filter", mf, str(bad)])
    assert rc == 1


def test_reproduce_known_example(tmp_path, capsys):
    rc = main(["reproduce", "minphase3", "--outdir", str(tmp_path)])
    report = _report(capsys)
    assert rc == 0
    assert report["all_passed"] is True
    assert (tmp_path / "minphase3-trajectory.csv").exists()
    assert (tmp_path / "minphase3-estimates.csv").exists()
    assert all(f["passed"] for f in report["facts"])


def test_reproduce_infeasible_example_skips_estimates(tmp_path, capsys):
    rc = main(["reproduce", "invertibility4", "--outdir", str(tmp_path)])
    report = _report(capsys)
    assert rc == 0
    assert report["estimates_skipped"] == "no feasible delay"
    assert (tmp_path / "invertibility4-trajectory.csv").exists()
    assert not (tmp_path / "invertibility4-estimates.csv").exists()


def test_reproduce_unknown_example_exits_1(capsys):
    rc = main(["reproduce", "not-an-example"])
    assert rc == 1


def test_unknown_flag_exits_1(model_file):
    with pytest.raises(SystemExit) as exc:
        main(["analyze", model_file("minphase3"), "--bogus"])
    assert exc.value.code == 1
