import io
import json
import subprocess
import sys

import numpy as np
import pytest

from multitrace.cli import main, parse_states, read_state_file, write_state_file
from multitrace.circuit import parse_circuit
from multitrace.errors import ValidationError


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), buf)
    return code, buf.getvalue()


def records(*argv):
    code, text = run(*argv)
    assert code == 0
    return [json.loads(line) for line in text.splitlines()]


def test_estimate_plus_states():
    (rec,) = records("estimate", "--states", "plus*3", "--shots-override", "500")
    assert rec["estimate"]["re"] == 1.0
    assert rec["oracle"] == {"re": pytest.approx(1.0), "im": pytest.approx(0.0, abs=1e-12)}
    assert rec["estimate"]["shots_per_part"] == 500


def test_estimate_default_shots():
    (rec,) = records("estimate", "-m", "2", "--states", "maximally_mixed")
    assert rec["estimate"]["shots_per_part"] == 1753
    assert abs(rec["estimate"]["re"] - 0.5) < 0.1


def test_output_is_reproducible():
    argv = ("estimate", "--states", "hs_random:2*4", "--seed", "9", "--shots-override", "300")
    assert run(*argv) == run(*argv)
    assert "wall_clock_s" not in run(*argv)[1]
    assert "wall_clock_s" in run(*argv, "--timing")[1]


def test_seeded_presets_differ_by_index():
    a, b = parse_states("hs_random:2,hs_random:2", seed=4)
    assert not np.allclose(a.matrix, b.matrix)
    c, _ = parse_states("hs_random:2,zero", seed=4)
    assert np.allclose(a.matrix, c.matrix)


def test_sweep_and_csv():
    code, text = run("estimate", "--states", "zero", "--sweep", "m=2..4", "--shots-override", "50",
                     "--format", "csv")
    assert code == 0
    lines = text.strip().splitlines()
    assert len(lines) == 4 and lines[0].startswith("command")


def test_schedule_text_and_json():
    code, text = run("schedule", "-m", "5", "-p", "4", "--format", "text")
    assert code == 0 and text.count("panel ") == 13
    (rec,) = records("schedule", "-m", "5", "-p", "4")
    assert rec["panels"] == 13 and rec["steps"] == 11


def test_ghz_enumeration():
    (rec,) = records("ghz-test", "-r", "4", "--enumerate-branches")
    assert len(rec["branches"]) == 4
    assert rec["min_fidelity"] > 1 - 1e-9
    (rec,) = records("ghz-test", "-n", "6", "--shots-override", "10")
    assert rec["min_fidelity"] > 1 - 1e-9


def test_dump_circuit(tmp_path):
    path = tmp_path / "c.txt"
    code, _ = run("ghz-test", "-r", "3", "--dump-circuit", str(path))
    assert code == 0
    c = parse_circuit(path.read_text())
    assert c.num_qubits == 4 and c.measurement_labels == ("b1",)


def test_oracle_and_distance():
    (rec,) = records("oracle", "--states", "zero,plus,plus_i", "--control-distribution", "imag")
    assert rec["matrix_product"]["im"] == pytest.approx(0.25)
    assert rec["abs_difference"] < 1e-12
    (rec,) = records("distance", "--rho", "zero", "--sigma", "one", "-p", "4")
    assert rec["distance"] == pytest.approx(2**0.25)
    assert rec["abs_difference"] < 1e-12


def test_measure_with_channel():
    (rec,) = records("measure", "--rho", "hs_random:2", "--sigma", "haar_pure", "--alpha", "0.5",
                     "--channel", "random:3", "--seed", "2")
    assert rec["data_processing"]["holds"]
    assert rec["k_alpha"] == pytest.approx(rec["k_alpha_via_q"])


def test_poly_command():
    (rec,) = records("poly", "--rho", "inline:0.75 0;0 0.25", "--degree", "4", "--shots-override", "400")
    assert rec["hoeffding_N"] > 400
    assert rec["estimate"]["N"] == 400
    assert abs(rec["abs_error"]) < 0.2


def test_state_file_round_trip(tmp_path):
    path = tmp_path / "rho.txt"
    rho = np.array([[0.6, 0.2 - 0.1j], [0.2 + 0.1j, 0.4]])
    write_state_file(path, rho)
    assert np.allclose(read_state_file(path).matrix, rho)
    (rec,) = records("oracle", "--states", f"file:{path},file:{path}")
    assert rec["matrix_product"]["re"] == pytest.approx(np.trace(rho @ rho).real)


def test_exit_codes(tmp_path, capsys):
    assert run("estimate", "--states", "inline:1 1;1 1")[0] == 2  # trace 2
    assert run("estimate", "--states", "nonsense*2")[0] == 2
    assert run("estimate", "-m", "3", "--states", "zero,one")[0] == 2
    assert run("oracle", "--states", f"file:{tmp_path / 'missing'}*2")[0] == 2
    assert run("ghz-test")[0] == 2
    assert "error:" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["no-such-command"])


def test_bad_state_file(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("dim 2\n1 0\n")
    with pytest.raises(ValidationError):
        read_state_file(p)


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "multitrace", "oracle", "--states", "zero*2"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["matrix_product"]["re"] == pytest.approx(1.0)
