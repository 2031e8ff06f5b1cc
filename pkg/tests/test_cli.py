"""End-to-end tests for the benchmark command line."""

import csv
import io
import math
import os

import numpy as np
import pytest

from cagmps import cli, ed, store
from cagmps.cli import main


def read_csv_text(text):
    return list(csv.reader(io.StringIO(text)))


def run_main(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# gates


def test_gates_first_line_and_block_count(capsys):
    code, out, _ = run_main(["gates"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "11520,720,32,12"
    assert sum(1 for ln in lines if ln.startswith("gate ")) == 12
    # five lines per block after the header
    assert len(lines) == 1 + 12 * 5


def test_gates_reruns_are_byte_identical(tmp_path, capsys):
    p1 = tmp_path / "a.txt"
    p2 = tmp_path / "b.txt"
    assert main(["gates", "--out", str(p1)]) == 0
    assert main(["gates", "--out", str(p2)]) == 0
    assert p1.read_bytes() == p2.read_bytes()


def test_gates_matrices_parse_back_unitary(capsys):
    code, out, _ = run_main(["gates"], capsys)
    assert code == 0
    lines = out.splitlines()
    blocks = [i for i, ln in enumerate(lines) if ln.startswith("gate ")]
    for i in blocks:
        re_vals = [float(v) for v in lines[i + 2].split()[1:]]
        im_vals = [float(v) for v in lines[i + 3].split()[1:]]
        assert len(re_vals) == 16 and len(im_vals) == 16
        U = (np.array(re_vals) + 1j * np.array(im_vals)).reshape(4, 4)
        assert np.allclose(U.conj().T @ U, np.eye(4), atol=1e-12)


def test_gates_identity_block(capsys):
    code, out, _ = run_main(["gates"], capsys)
    lines = out.splitlines()
    assert lines[1] == "gate 0"
    assert lines[2] == "word -"
    # the identity tableau maps every pair to itself with phase +1
    tokens = lines[5].split()[1:]
    assert len(tokens) == 16
    for tok in tokens:
        pin, rest = tok.split("->")
        phase, pout = rest.split(",")
        assert phase == "+1" and pin == pout


def test_gates_tableau_tokens_wellformed(capsys):
    code, out, _ = run_main(["gates"], capsys)
    labels = [a + b for a in "IXYZ" for b in "IXYZ"]
    for ln in out.splitlines():
        if not ln.startswith("tableau "):
            continue
        tokens = ln.split()[1:]
        assert [t.split("->")[0] for t in tokens] == labels
        outs = []
        for tok in tokens:
            phase, pout = tok.split("->")[1].split(",")
            assert phase in ("+1", "-1", "+i", "-i")
            assert pout in labels
            outs.append(pout)
        # conjugation permutes the pair labels
        assert sorted(outs) == sorted(labels)
        assert tokens[0] == "II->+1,II"


# ---------------------------------------------------------------------------
# ed


def test_ed_tight_binding_l4(capsys):
    code, out, _ = run_main(["ed", "--model", "tight-binding", "--L", "4"], capsys)
    assert code == 0
    rows = read_csv_text(out)
    assert rows[0] == ["index", "eigenvalue"]
    assert float(rows[1][1]) == pytest.approx(-math.sqrt(5.0), abs=1e-7)
    assert len(rows) - 1 <= 16


def test_ed_matches_library_ground_energy(capsys):
    code, out, _ = run_main(["ed", "--L", "6", "--t", "1.0", "--V", "2.0"], capsys)
    assert code == 0
    rows = read_csv_text(out)
    assert float(rows[1][1]) == pytest.approx(ed.ground_energy(6, 1.0, 2.0), abs=1e-10)
    values = [float(r[1]) for r in rows[1:]]
    assert values == sorted(values)


def test_ed_rejects_large_l(capsys):
    code, _, err = run_main(["ed", "--L", "13"], capsys)
    assert code == 2
    assert "12" in err


def test_ed_writes_file_and_prints_ground_energy(tmp_path, capsys):
    out_path = tmp_path / "spectrum.csv"
    code, out, _ = run_main(["ed", "--L", "4", "--model", "tight-binding",
                             "--out", str(out_path)], capsys)
    assert code == 0
    assert out.startswith("ground_energy ")
    rows = read_csv_text(out_path.read_text())
    assert float(rows[1][1]) == pytest.approx(float(out.split()[1]))


# ---------------------------------------------------------------------------
# run


RUN_ARGS = ["run", "--model", "tv", "--L", "8", "--t", "1", "--V", "2",
            "--chi", "16", "--sweeps", "6", "--reference", "ed"]


def even_sector_ground(n_sites, t, V):
    """Lowest eigenvalue restricted to even particle number."""
    H = ed.dense_hamiltonian(n_sites, t, V)
    occ = np.array([bin(i).count("1") for i in range(2 ** n_sites)])
    keep = np.flatnonzero(occ % 2 == 0)
    return float(np.linalg.eigvalsh(H[np.ix_(keep, keep)])[0])


def test_run_both_methods_csv(capsys):
    code, out, _ = run_main(RUN_ARGS, capsys)
    assert code == 0
    rows = read_csv_text(out)
    header, data = rows[0], rows[1:]
    assert header[:14] == [
        "model", "L", "t", "V", "chi", "sweeps", "clifford", "seed", "method",
        "energy", "reference_energy", "energy_error", "mid_bond_entropy",
        "wall_time_s",
    ]
    assert header[14:] == [f"S_{b}" for b in range(1, 8)]
    assert [r[8] for r in data] == ["gmps", "cagmps"]
    assert [r[6] for r in data] == ["off", "on"]
    reference = ed.ground_energy(8, 1.0, 2.0)
    for row in data:
        assert float(row[10]) == pytest.approx(reference, abs=1e-12)
        err = float(row[11])
        assert err == pytest.approx(float(row[9]) - reference, abs=1e-12)
        assert err >= -1e-9  # variational: never below the true ground state
        assert err <= 1e-6
        # mid_bond_entropy is one of the S_b columns
        mid = (8 - 1) // 2
        assert row[12] == row[14 + mid]


def test_run_deterministic_apart_from_timing(capsys):
    code1, out1, _ = run_main(RUN_ARGS, capsys)
    code2, out2, _ = run_main(RUN_ARGS, capsys)
    assert code1 == code2 == 0
    rows1, rows2 = read_csv_text(out1), read_csv_text(out2)
    wall = rows1[0].index("wall_time_s")
    for r1, r2 in zip(rows1, rows2):
        masked1 = r1[:wall] + r1[wall + 1:]
        masked2 = r2[:wall] + r2[wall + 1:]
        assert masked1 == masked2


def test_run_crlf_and_atomic_write(tmp_path, capsys):
    out_path = tmp_path / "bench.csv"
    code = main(RUN_ARGS + ["--out", str(out_path)])
    assert code == 0
    raw = out_path.read_bytes()
    assert b"\r\n" in raw
    assert not [f for f in os.listdir(tmp_path) if f.startswith(".out-")]


def test_run_chi_list_order(capsys):
    args = ["run", "--model", "tight-binding", "--L", "6", "--chi", "4,8",
            "--sweeps", "4", "--clifford", "off", "--reference", "ed"]
    code, out, _ = run_main(args, capsys)
    assert code == 0
    data = read_csv_text(out)[1:]
    assert [(r[4], r[8]) for r in data] == [("4", "gmps"), ("8", "gmps")]


def test_run_high_chi_reference(capsys):
    args = ["run", "--model", "tight-binding", "--L", "6", "--chi", "8",
            "--sweeps", "6", "--clifford", "off", "--reference", "high-chi"]
    code, out, _ = run_main(args, capsys)
    assert code == 0
    row = read_csv_text(out)[1]
    # chi=16 captures L=6 exactly: the reference is the even-sector optimum
    assert float(row[10]) == pytest.approx(even_sector_ground(6, 1.0, 0.0), abs=1e-8)


def test_run_checkpoint_round_trip(tmp_path, capsys):
    prefix = tmp_path / "ck"
    code, out, _ = run_main(RUN_ARGS + ["--checkpoint", str(prefix)], capsys)
    assert code == 0
    data = read_csv_text(out)[1:]
    for row in data:
        bundle = store.load_checkpoint(f"{prefix}.{row[8]}.chi{row[4]}")
        energy = bundle.state.expectation(bundle.hamiltonian)
        assert energy.real == pytest.approx(float(row[9]), abs=1e-9)


def test_run_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# benchmark settings\n"
        "model = tv\n"
        "L = 6\n"
        "V = 2.0   # interaction\n"
        "chi = 16\n"
        "sweeps = 6\n"
        "clifford = off\n"
        "reference = ed\n"
    )
    code, out, _ = run_main(["run", "--config", str(cfg)], capsys)
    assert code == 0
    data = read_csv_text(out)[1:]
    assert len(data) == 1 and data[0][8] == "gmps"

    code, out, _ = run_main(
        ["run", "--config", str(cfg), "--clifford", "on"], capsys)
    assert code == 0
    data = read_csv_text(out)[1:]
    assert len(data) == 1 and data[0][8] == "cagmps"


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--chi", "16"],  # missing L
        ["run", "--L", "6", "--chi", "0"],  # bad chi
        ["run", "--L", "6", "--chi", "8,nope"],  # unparsable chi
        ["run", "--L", "1", "--chi", "8"],  # too short
        ["run", "--L", "6", "--chi", "8", "--sweeps", "0"],  # no sweeps
        ["run", "--L", "20", "--chi", "8", "--reference", "ed"],  # ed too large
        ["run", "--model", "tight-binding", "--L", "6", "--chi", "8", "--V", "2"],
        ["run", "--L", "6", "--chi", "8", "--seed", "-1"],
        ["ed", "--L", "1"],
        ["fit-c", "--data", "/nonexistent/file.csv"],
    ],
)
def test_config_errors_exit_2(argv, capsys):
    code, _, err = run_main(argv, capsys)
    assert code == 2
    assert err.startswith("error:")


def test_bad_config_file_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("chi 16\n")
    code, _, err = run_main(["run", "--config", str(cfg)], capsys)
    assert code == 2
    assert "key = value" in err


# ---------------------------------------------------------------------------
# fit-c


def write_fit_csv(path, rows, include_method=True):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if include_method:
            writer.writerow(["method", "L", "mid_bond_entropy"])
        else:
            writer.writerow(["L", "mid_bond_entropy"])
        writer.writerows(rows)


def test_fit_c_exact_recovery(tmp_path, capsys):
    c, a, b = 1.25, 0.4, -2.0
    lengths = [8, 12, 16, 24, 32, 48]
    rows = [["x", L, (c / 6.0) * math.log(L) + a + b / L] for L in lengths]
    path = tmp_path / "data.csv"
    write_fit_csv(path, rows)
    code, out, _ = run_main(["fit-c", "--data", str(path)], capsys)
    assert code == 0
    table = read_csv_text(out)
    assert table[0] == ["method", "c", "a", "b", "rms"]
    method, c_fit, a_fit, b_fit, rms = table[1]
    assert method == "x"
    assert float(c_fit) == pytest.approx(c, abs=1e-10)
    assert float(a_fit) == pytest.approx(a, abs=1e-10)
    assert float(b_fit) == pytest.approx(b, abs=1e-10)
    assert float(rms) <= 1e-10


def test_fit_c_constant_data(tmp_path, capsys):
    rows = [["x", L, 0.75] for L in (8, 16, 32, 64)]
    path = tmp_path / "flat.csv"
    write_fit_csv(path, rows)
    code, out, _ = run_main(["fit-c", "--data", str(path)], capsys)
    assert code == 0
    _, c_fit, a_fit, b_fit, rms = read_csv_text(out)[1]
    assert float(c_fit) == pytest.approx(0.0, abs=1e-10)
    assert float(b_fit) == pytest.approx(0.0, abs=1e-10)
    assert float(a_fit) == pytest.approx(0.75, abs=1e-10)
    assert float(rms) <= 1e-12


def test_fit_c_groups_by_method(tmp_path, capsys):
    rows = []
    for L in (8, 16, 32, 48):
        rows.append(["gmps", L, (1.0 / 6.0) * math.log(L) + 0.5])
        rows.append(["cagmps", L, (0.5 / 6.0) * math.log(L) + 0.25])
    path = tmp_path / "two.csv"
    write_fit_csv(path, rows)
    code, out, _ = run_main(["fit-c", "--data", str(path)], capsys)
    assert code == 0
    table = {r[0]: [float(v) for v in r[1:]] for r in read_csv_text(out)[1:]}
    assert set(table) == {"gmps", "cagmps"}
    assert table["gmps"][0] == pytest.approx(1.0, abs=1e-10)
    assert table["cagmps"][0] == pytest.approx(0.5, abs=1e-10)


def test_fit_c_without_method_column(tmp_path, capsys):
    rows = [[L, 0.2 * math.log(L) + 0.1] for L in (8, 16, 32)]
    path = tmp_path / "plain.csv"
    write_fit_csv(path, rows, include_method=False)
    code, out, _ = run_main(["fit-c", "--data", str(path)], capsys)
    assert code == 0
    table = read_csv_text(out)
    assert table[1][0] == "all"
    assert float(table[1][1]) == pytest.approx(1.2, abs=1e-10)


def test_fit_c_needs_three_lengths(tmp_path, capsys):
    rows = [["x", 8, 0.3], ["x", 8, 0.3], ["x", 16, 0.4]]
    path = tmp_path / "short.csv"
    write_fit_csv(path, rows)
    code, _, err = run_main(["fit-c", "--data", str(path)], capsys)
    assert code == 2
    assert "three" in err


def test_fit_c_missing_columns(tmp_path, capsys):
    path = tmp_path / "cols.csv"
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows([["L", "energy"], ["8", "-1.0"]])
    code, _, err = run_main(["fit-c", "--data", str(path)], capsys)
    assert code == 2
    assert "mid_bond_entropy" in err


# ---------------------------------------------------------------------------
# library-level fit helper


def test_fit_entropy_scaling_rejects_two_lengths():
    with pytest.raises(cli.ConfigError):
        cli.fit_entropy_scaling([8, 16], [0.1, 0.2])
