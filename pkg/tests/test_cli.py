import subprocess
import sys

import yaml

from kickrotor.cli import EXIT_CONFIG, EXIT_TRUNCATION, main

CONFIG = {
    "name": "cli",
    "molecule": {"j_max": 30},
    "ensemble": {"temperature_k": 10.0},
    "trains": [{"name": "p", "recipe": "periodic", "n_pulses": 4, "kick_strength": 1.0,
                "period_trev": 0.8, "n_realizations": 1}],
}


def write(tmp_path, data, name="c.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return path


def test_simulate(tmp_path, capsys):
    path = write(tmp_path, CONFIG)
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "manifest.json").exists()


def test_seed_and_jmax_overrides(tmp_path):
    data = dict(CONFIG, trains=[dict(CONFIG["trains"][0], recipe="timing_noise", rel_sigma=0.2)])
    path = write(tmp_path, data)
    assert main(["simulate", "--config", str(path), "--seed", "99", "--jmax", "35",
                 "--out", str(tmp_path / "o")]) == 0
    resolved = yaml.safe_load((tmp_path / "o" / "config.resolved.yaml").read_text())
    assert resolved["trains"][0]["base_seed"] == 99 and resolved["molecule"]["j_max"] == 35


def test_validate_prints_resolved(tmp_path, capsys):
    assert main(["validate", "--config", str(write(tmp_path, CONFIG))]) == 0
    resolved = yaml.safe_load(capsys.readouterr().out)
    assert "resolved" in resolved and resolved["molecule"]["delta_alpha"] > 0


def test_config_errors_exit_2(tmp_path, capsys):
    bad = dict(CONFIG, molecule={"j_max": 1})
    assert main(["validate", "--config", str(write(tmp_path, bad))]) == EXIT_CONFIG
    assert "molecule.j_max" in capsys.readouterr().err
    assert main(["simulate"]) == EXIT_CONFIG
    assert main(["preset", "fig2", "--config", str(write(tmp_path, CONFIG))]) == EXIT_CONFIG


def test_truncation_exit_3(tmp_path, capsys):
    data = dict(CONFIG, trains=[dict(CONFIG["trains"][0], n_pulses=24, kick_strength=3.0)])
    assert main(["simulate", "--config", str(write(tmp_path, data)),
                 "--out", str(tmp_path / "o")]) == EXIT_TRUNCATION
    assert "j_max" in capsys.readouterr().err


def test_scan(tmp_path):
    path = write(tmp_path, CONFIG)
    assert main(["scan", "--config", str(path), "--axis", "n_pulses", "--values", "2", "4",
                 "--out", str(tmp_path / "s")]) == 0
    assert (tmp_path / "s" / "scan.csv").exists()


def test_preset_calibration(tmp_path):
    assert main(["preset", "calibration", "--out", str(tmp_path / "cal")]) == 0
    text = (tmp_path / "cal" / "calibration_fits.csv").read_text()
    assert text.splitlines()[1] == "kick_strength,period_ps,frequency_per_kick,contrast"


def test_console_entry_point():
    done = subprocess.run([sys.executable, "-m", "kickrotor.cli", "--version"],
                          capture_output=True, text=True)
    assert done.returncode == 0 and "kickrotor" in done.stdout
