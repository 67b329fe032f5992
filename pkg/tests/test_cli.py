import io
import json
import subprocess
import sys

import numpy as np
import pandas as pd
import pytest

from liftscale.cli import main, parse_args, run
from liftscale.dataio import COVTYPE_SCHEMA, VOTING_SCHEMA, DatasetSchema, read_results, serialize
from liftscale.discretize import QUINTILES

from tables import voting_like_frame, write_frame


@pytest.fixture
def voting_csv(tmp_path):
    frame = voting_like_frame(seed=11)
    frame.columns = VOTING_SCHEMA.columns
    return write_frame(frame, tmp_path / "voting.csv", header=True)


@pytest.fixture
def continuous_csv(tmp_path):
    rng = np.random.default_rng(4)
    n = 400
    df = pd.DataFrame(rng.gamma(2.0, size=(n, 4)), columns=["E", "A", "S", "HH"])
    df["region"] = rng.choice(["north", "south"], n)
    df["cover"] = np.where(df["E"] + df["HH"] > 4.5, 1, 2)
    return write_frame(df, tmp_path / "terrain.csv", header=True)


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(parse_args(argv), out, err)
    return code, out.getvalue(), err.getvalue()


# ---------------------------------------------------------------- parsing

def test_profile_flags_map_to_runspec():
    spec = parse_args(["select-profile", "--data", "voting.csv", "--target", "party",
                       "--target-value", "republican", "--min-support", "0.15", "--max-k", "5"])
    assert spec.resolution == "profile"
    assert (spec.target, spec.target_value, spec.min_support, spec.max_k) == \
        ("party", "republican", 0.15, 5)


def test_window_quintile_flags():
    spec = parse_args(["select-window", "--data", "covtype.csv", "--continuous",
                       "E,A,S,HH,HR,HF,H9,HN,H3,VH", "--quantiles", "0.2,0.4,0.6,0.8"])
    assert spec.joint
    assert spec.quantiles == QUINTILES.probs
    assert spec.continuous[0] == "E" and len(spec.continuous) == 10


def test_defaults():
    spec = parse_args(["select-global", "--data", "x.csv"])
    assert spec.quantiles == pytest.approx((1 / 3, 2 / 3))
    assert (spec.min_support, spec.max_k, spec.top_n) == (0.0, None, 10)
    assert spec.workers >= 1


@pytest.mark.parametrize("argv", [
    ["select-profile", "--data", "x.csv"],
    ["lift", "--data", "x.csv"],
    ["select-global", "--data", "x.csv", "--features", "a", "--continuous", "b"],
    ["select-global", "--data", "x.csv", "--no-header"],
    ["select-global", "--data", "x.csv", "--delimiter", "ab"],
    ["select-global", "--data", "x.csv", "--group", "g"],
    ["select-global", "--data", "x.csv", "--min-support", "1.5"],
    ["select-global", "--data", "x.csv", "--max-k", "0"],
    ["select-global", "--data", "x.csv", "--quantiles", "0.5,0.2"],
    ["select-global"],
    ["frobnicate", "--data", "x.csv"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        parse_args(argv)
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_flags_validate_before_reading(tmp_path):
    # the data file does not exist; the usage error must still win
    with pytest.raises(SystemExit) as exc:
        main(["select-profile", "--data", str(tmp_path / "absent.csv")])
    assert exc.value.code == 2


# ---------------------------------------------------------------- running

def test_profile_run(voting_csv, tmp_path):
    out_path = tmp_path / "res.json"
    code, out, err = invoke(["select-profile", "--data", str(voting_csv), "--target", "party",
                             "--target-value", "republican", "--min-support", "0.15",
                             "--max-k", "2", "--workers", "1", "-o", str(out_path)])
    assert code == 0, err
    doc = read_results(out_path)
    best = doc.results["profile"]["candidates"][0]
    assert f"top lift = {best['score']:.3g}" in out
    assert "Relative Frequency" in out
    assert doc.config["min_support"] == 0.15
    assert "workers" not in doc.config
    assert doc.results["profile"]["top_lift_table"]["subset"] == best["subset"]


def test_global_and_window_runs(voting_csv):
    for cmd in ("select-global", "select-window"):
        code, out, err = invoke([cmd, "--data", str(voting_csv), "--target", "party",
                                 "--max-k", "1", "--max-window-cells", "2", "--workers", "1"])
        assert code == 0, err
        assert "search over 16 subsets" in out


def test_no_feasible_profile_exit_3(voting_csv):
    code, _, err = invoke(["select-profile", "--data", str(voting_csv), "--target", "party",
                           "--target-value", "republican", "--min-support", "0.99",
                           "--max-k", "1", "--workers", "1"])
    assert code == 3
    assert "no profile" in err


def test_empty_file_exit_1(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("")
    code, _, err = invoke(["select-global", "--data", str(p), "--names", "a,b", "--no-header"])
    assert code == 1
    assert "line 1" in err
    assert "Traceback" not in err


@pytest.mark.parametrize("argv, needle", [
    (["select-global", "--data", "{missing}"], "no such file"),
    (["select-global", "--data", "{csv}", "--features", "NOPE"], "unknown columns"),
    (["select-profile", "--data", "{csv}", "--target", "party", "--target-value", "whig",
      "--max-k", "1"], "whig"),
    (["select-global", "--data", "{csv}", "--schema", "iris"], "no built-in schema"),
])
def test_data_errors_exit_1(argv, needle, voting_csv, tmp_path):
    argv = [a.format(missing=tmp_path / "missing.csv", csv=voting_csv) for a in argv]
    code, _, err = invoke(argv + ["--workers", "1"])
    assert code == 1
    assert needle in err


def test_lift_command_categorical(voting_csv):
    code, out, _ = invoke(["lift", "--data", str(voting_csv), "--target", "party",
                           "--features", "WP,PF", "--bits"])
    assert code == 0
    assert "(n,y)" in out
    assert "bits" in out and "nats" in out


def test_lift_command_joint_with_groups(continuous_csv, tmp_path):
    out_path = tmp_path / "lift.json"
    code, out, err = invoke(["lift", "--data", str(continuous_csv), "--target", "cover",
                             "--continuous", "E,HH", "--group", "region",
                             "--quantiles", "0.2,0.4,0.6,0.8", "-o", str(out_path)])
    assert code == 0, err
    assert "Quintile 5" in out
    d = json.loads(out_path.read_text())
    model = d["results"]["lift"]["model"]
    assert [g["group"] for g in model["groups"]] == [["north"], ["south"]]
    rows = np.array(d["results"]["lift"]["table"]["counts"]).sum(axis=1)
    assert np.all(np.abs(rows - 80) <= 2)


def test_joint_select_global(continuous_csv):
    code, out, err = invoke(["select-global", "--data", str(continuous_csv), "--target", "cover",
                             "--continuous", "E,A,S,HH", "--quantiles", "0.2,0.4,0.6,0.8",
                             "--max-k", "2", "--workers", "1"])
    assert code == 0, err
    first = out.splitlines()[2]
    assert "(E,HH)" in first


def test_schema_continuous_columns_are_binned_jointly(tmp_path):
    rng = np.random.default_rng(5)
    n = 300
    frame = pd.DataFrame(0, index=range(n), columns=COVTYPE_SCHEMA.columns)
    frame[COVTYPE_SCHEMA.continuous] = rng.integers(0, 3000, size=(n, 10))
    frame["cover"] = rng.integers(1, 8, n)
    p = write_frame(frame, tmp_path / "covtype.data")
    code, out, err = invoke(["lift", "--data", str(p), "--features", "E,HH,HF",
                             "--quantiles", "0.2,0.4,0.6,0.8", "--workers", "1"])
    assert code == 0, err
    assert "Quintile 5" in out
    assert "n = 300" in out
    code, _, err = invoke(["select-global", "--data", str(p), "--max-k", "1", "--workers", "1"])
    assert code == 0, err


def test_mixed_feature_kinds_exit_1(continuous_csv, tmp_path):
    schema = tmp_path / "s.json"
    s = DatasetSchema.build(["E", "A", "S", "HH", "region", "cover"], target="cover",
                            continuous=["E", "A"])
    schema.write_text(json.dumps(s.to_dict()))
    code, _, err = invoke(["lift", "--data", str(continuous_csv), "--schema", str(schema),
                           "--features", "E,region"])
    assert code == 1
    assert "cannot mix" in err


def test_worker_count_keeps_payload(voting_csv, tmp_path):
    payloads = []
    for w in ("1", "2"):
        p = tmp_path / f"w{w}.json"
        code, _, err = invoke(["select-window", "--data", str(voting_csv), "--target", "party",
                               "--max-k", "2", "--max-window-cells", "2", "--min-support", "0.15",
                               "--workers", w, "-o", str(p)])
        assert code == 0, err
        payloads.append(serialize(read_results(p).payload()))
    assert payloads[0] == payloads[1]


def test_builtin_schema_detected_by_file_name(tmp_path):
    p = write_frame(voting_like_frame(seed=2), tmp_path / "house-votes-84.data")
    code, out, err = invoke(["select-profile", "--data", str(p), "--target-value", "democrat",
                             "--max-k", "1", "--workers", "1"])
    assert code == 0, err
    assert "party" in out


def test_module_entry_point(voting_csv):
    proc = subprocess.run([sys.executable, "-m", "liftscale", "select-global", "--data",
                           str(voting_csv), "--target", "party", "--max-k", "1", "--top-n", "3", "--workers", "1"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0, proc.stderr
    assert "top eta" in proc.stdout
