import json
import subprocess
import sys
from pathlib import Path

import pytest

from miptdyn.cli import EXIT_OK, EXIT_PHYSICS, EXIT_USAGE, main
from miptdyn.manifest import BUNDLED_DIR, ManifestError, load_manifest, locate

SMALL = """\
[experiment]
name = "tiny"
seed = 11

[[ensemble]]
name = "crit"
L = [16, 24, 32]
p = 0.15995
initial_state = "volume"
n_trajectories = 6
t_max = 40

[[analysis]]
kind = "power"
ensembles = ["crit"]
window = [1, 4]

[[analysis]]
kind = "collapse"
ensembles = ["crit"]

[[analysis]]
kind = "linear-in-L"
ensembles = ["crit"]
x = 0.125
"""


def write(tmp_path, text, name="m.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_run_small_manifest_and_rerun_is_byte_identical(tmp_path):
    m = write(tmp_path, SMALL)
    assert main(["run", str(m), "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["run", str(m), "--out", str(tmp_path / "b")]) == EXIT_OK
    files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())
    assert files_a == files_b
    assert any(str(f).endswith("analysis01_collapse_L16_p0.15995.csv") for f in files_a)
    for f in files_a:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_outputs_embed_hash_seed_and_conventions(tmp_path):
    m = write(tmp_path, SMALL)
    out = tmp_path / "o"
    assert main(["run", str(m), "--out", str(out)]) == EXIT_OK
    sha = load_manifest(m).sha256
    for csv in out.rglob("*.csv"):
        head = csv.read_text()
        assert f"manifest_sha256={sha}" in head
        assert "master_seed=11" in head
    data = next((out / "data").glob("*.csv")).read_text()
    assert "odd_sublayer=" in data and "prep_time=64" in data
    resolved = json.loads((out / "resolved_manifest.json").read_text())
    assert resolved["ensembles"][0]["prep_time"] == [64, 96, 128]
    assert resolved["ensembles"][0]["measurement_layers_per_unit"] == 2
    rep = json.loads((out / "analysis" / "analysis02_linear-in-L.json").read_text())
    assert rep["report"]["times"] == [2, 3, 4]


def test_seed_override_changes_data(tmp_path):
    m = write(tmp_path, SMALL)
    main(["run", str(m), "--out", str(tmp_path / "a")])
    main(["run", str(m), "--out", str(tmp_path / "b"), "--seed", "12"])
    a = sorted((tmp_path / "a" / "data").glob("*.csv"))[0].read_text()
    b = sorted((tmp_path / "b" / "data").glob("*.csv"))[0].read_text()
    assert a != b


def test_empty_manifest_is_noop(tmp_path, capsys):
    m = write(tmp_path, '[experiment]\nname = "nothing"\n')
    assert main(["run", str(m), "--out", str(tmp_path / "x")]) == EXIT_OK
    assert "nothing to run" in capsys.readouterr().out
    assert not (tmp_path / "x").exists()


def test_invalid_p_names_field_and_line(tmp_path, capsys):
    text = SMALL.replace("p = 0.15995", "p = 1.5")
    m = write(tmp_path, text)
    assert main(["run", str(m)]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert f"{m}:8: ensemble[0].p" in err
    assert "1.5" in err


def test_syntax_error_reports_line(tmp_path):
    m = write(tmp_path, "[experiment]\nname = \"x\"\nseed = = 3\n")
    with pytest.raises(ManifestError) as exc:
        load_manifest(m)
    assert exc.value.line == 3


@pytest.mark.parametrize("bad,field", [
    ('kind = "power"', None),
    ('L = [15]', "ensemble[0].L"),
    ('n_trajectories = 0', "ensemble[0].n_trajectories"),
    ('initial_state = "mixed"', "ensemble[0].initial_state"),
    ('prep_time = "four"', "ensemble[0].prep_time"),
])
def test_validation_errors(tmp_path, bad, field):
    key = bad.split(" =")[0]
    if field is None:
        text = SMALL.replace('kind = "power"', 'kind = "fourier"')
        field = "analysis[0].kind"
    else:
        lines = [ln for ln in SMALL.splitlines() if not ln.startswith(key + " =")]
        idx = lines.index('name = "crit"')
        lines.insert(idx + 1, bad)
        text = "\n".join(lines) + "\n"
    m = write(tmp_path, text)
    with pytest.raises(ManifestError) as exc:
        load_manifest(m)
    assert exc.value.field == field
    assert exc.value.line is not None


def test_duplicate_and_unknown_ensemble_names(tmp_path):
    dup = SMALL + '\n[[ensemble]]\nname = "crit"\nL = 8\np = 0.1\n'
    with pytest.raises(ManifestError, match="duplicate"):
        load_manifest(write(tmp_path, dup))
    unknown = SMALL.replace('ensembles = ["crit"]\nwindow', 'ensembles = ["nope"]\nwindow')
    with pytest.raises(ManifestError, match="unknown ensemble"):
        load_manifest(write(tmp_path, unknown, "u.toml"))


def test_fixed_w_members(tmp_path):
    text = '[[ensemble]]\nname = "w"\nL = [64, 256]\nw = 1.0\n'
    man = load_manifest(write(tmp_path, text))
    members = man.members(man.ensembles[0])
    assert members[1][1] == pytest.approx(0.172215872336536974, abs=1e-15)


def test_locate_finds_nth_table():
    text = "[[ensemble]]\nL = 1\n[[ensemble]]\nname = 'b'\nL = 2\n"
    assert locate(text, "ensemble", 1, "L") == 5
    assert locate(text, "ensemble", 0, "L") == 2
    assert locate(text, "ensemble", 1, "missing") == 3


def test_bundled_manifests_parse():
    names = sorted(p.stem for p in BUNDLED_DIR.glob("*.toml"))
    assert names == ["fig2", "fig3", "fig4"]
    for n in names:
        man = load_manifest(BUNDLED_DIR / f"{n}.toml")
        assert man.ensembles and man.analyses


def test_bundled_fig2_end_to_end(tmp_path):
    assert main(["run", "fig2", "--out", str(tmp_path)]) == EXIT_OK
    power = json.loads((tmp_path / "analysis" / "analysis00_power.json").read_text())
    assert len(power["report"]["fits"]) == 3
    assert len(list((tmp_path / "analysis").glob("analysis02_collapse_L*.csv"))) == 3
    assert (tmp_path / "sweep.json").exists()


def test_sweep_then_fit_and_collapse(tmp_path, capsys):
    out = tmp_path / "sw"
    assert main(["sweep", "--L", "16", "24", "32", "--p", "0.16", "--init", "volume", "--n", "5", "--t-max", "40",
                 "--out", str(out)]) == EXIT_OK
    csvs = sorted(str(p) for p in out.glob("S_*.csv"))
    assert len(csvs) == 3
    assert main(["fit", *csvs, "--model", "power", "--window", "1", "4", "--out", str(tmp_path / "f.json")]) == 0
    rep = json.loads((tmp_path / "f.json").read_text())
    assert rep["analysis"] == "power" and len(rep["report"]["fits"]) == 3
    assert main(["fit", *csvs, "--model", "linear-in-L", "--time", "3"]) == 0
    assert main(["collapse", *csvs, "--out", str(tmp_path / "c")]) == EXIT_OK
    assert "collapse score" in capsys.readouterr().out
    assert len(list((tmp_path / "c").glob("collapse_L*.csv"))) == 3


def test_sweep_fixed_w(tmp_path):
    out = tmp_path / "w"
    assert main(["sweep", "--L", "16", "32", "--w", "-1", "--n", "2", "--t-max", "5", "--out", str(out)]) == 0
    assert len(list(out.glob("S_*.csv"))) == 2


def test_fit_failure_exit_code(tmp_path):
    out = tmp_path / "p1"
    main(["sweep", "--L", "8", "--p", "1.0", "--n", "2", "--t-max", "10", "--out", str(out)])
    csv = str(next(out.glob("S_*.csv")))
    # S is zero after t = 0, so a power-law fit is impossible
    assert main(["fit", csv, "--model", "power", "--window", "2", "8"]) == EXIT_PHYSICS


def test_scan_outside_grid_exit_code(tmp_path, capsys):
    code = main(["scan-critical", "--L", "32", "--p", "0.5", "0.7", "--n", "10", "--t-max", "24",
                 "--window", "2", "24", "--out", str(tmp_path)])
    assert code == EXIT_PHYSICS
    assert "outside grid" in capsys.readouterr().out
    assert (tmp_path / "scan.json").exists()


def test_usage_errors():
    assert main([]) == EXIT_USAGE
    assert main(["fit"]) == EXIT_USAGE
    assert main(["run", "/no/such/manifest.toml"]) == EXIT_USAGE
    assert main(["sweep", "--L", "7", "--p", "0.1", "--n", "1", "--out", "/tmp/never"]) == EXIT_USAGE


def test_module_entry_point(tmp_path):
    m = write(tmp_path, '[experiment]\nname = "n"\n')
    proc = subprocess.run([sys.executable, "-m", "miptdyn", "run", str(m)], capture_output=True, text=True)
    assert proc.returncode == 0
    bad = write(tmp_path, SMALL.replace("p = 0.15995", "p = 1.5"), "bad.toml")
    proc = subprocess.run([sys.executable, "-m", "miptdyn", "run", str(bad)], capture_output=True, text=True)
    assert proc.returncode == 2 and "ensemble[0].p" in proc.stderr
