import json

import numpy as np
import pytest

from pdcomplete import PartialKernel, StructuralError, validate_serrated
from pdcomplete.cli import main
from pdcomplete.graphdomain import pattern_from_blocks
from pdcomplete.specio import (
    format_matrix_csv,
    parse_spec,
    read_matrix_csv,
    read_spec,
    write_matrix_csv,
    write_spec,
)

from conftest import random_correlation


RS_SPEC = {
    "version": "1",
    "n": 3,
    "entries": [[1, 1, 1.0], [2, 2, 1.0], [3, 3, 1.0], [1, 2, 0.5], [2, 3, 0.3]],
    "cover": [[1, 2], [2, 3]],
}


def write_json(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


class TestSpecFiles:
    def test_parse_rs_instance(self):
        spec = parse_spec(RS_SPEC)
        assert spec.kernel.values[0, 1] == 0.5
        assert spec.kernel.values[1, 0] == 0.5  # mirrored automatically
        assert spec.cover.blocks == ((0, 1), (1, 2))

    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        full = random_correlation(5, rng)
        # exercise non-representable decimals
        full[0, 1] = full[1, 0] = 1.0 / 3.0
        blocks = [(0, 1, 2), (2, 3, 4)]
        pattern = pattern_from_blocks(blocks, 5)
        kern = PartialKernel.from_full(full, pattern)
        cover = validate_serrated(blocks, pattern)
        path = tmp_path / "spec.json"
        write_spec(path, kernel=kern, cover=cover)
        spec = read_spec(path)
        assert np.array_equal(spec.kernel.values, kern.values)
        assert spec.cover.blocks == cover.blocks

    def test_conflicting_mirror_rejected(self):
        data = dict(RS_SPEC)
        data["entries"] = RS_SPEC["entries"] + [[2, 1, 0.7]]
        with pytest.raises(StructuralError, match=r"\(2, 1\)"):
            parse_spec(data)

    def test_missing_diagonal_rejected(self):
        data = dict(RS_SPEC)
        data["entries"] = [e for e in RS_SPEC["entries"] if e[:2] != [2, 2]]
        with pytest.raises(StructuralError, match=r"\(2, 2\)"):
            parse_spec(data)

    def test_stationary_block(self):
        data = {"version": "1", "stationary": {"samples": [1.0, 0.9, 0.7], "delta": 0.1}}
        spec = parse_spec(data)
        assert spec.stationary.w == 2

    def test_cover_and_tree_conflict(self):
        data = dict(RS_SPEC)
        data["tree"] = {"bags": [[1, 2], [2, 3]], "edges": [[1, 2]]}
        with pytest.raises(StructuralError, match="not both"):
            parse_spec(data)


class TestMatrixCsv:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        m = rng.normal(size=(4, 4))
        m = m + m.T
        path = tmp_path / "m.csv"
        write_matrix_csv(path, m, labels=["a", "b", "c", "d"])
        back, labels = read_matrix_csv(path)
        assert labels == ("a", "b", "c", "d")
        assert np.array_equal(back, m)

    def test_header_row(self):
        text = format_matrix_csv(np.eye(2), labels=["p", "q"])
        assert text.splitlines()[0] == "p,q"


class TestCliComplete:
    def test_rs_instance(self, tmp_path):
        spec = write_json(tmp_path / "rs.json", RS_SPEC)
        out_m = tmp_path / "out.csv"
        out_r = tmp_path / "out.json"
        code = main(["complete", spec, "--output-matrix", str(out_m),
                     "--output-report", str(out_r)])
        assert code == 0
        values, _ = read_matrix_csv(out_m)
        assert values[0, 2] == pytest.approx(0.15, abs=1e-12)
        report = json.loads(out_r.read_text())
        assert report["restriction_residual"] <= 1e-12
        assert report["inverse_offpattern_residual"] <= 1e-10

    def test_fully_specified_returns_input(self, tmp_path):
        full = random_correlation(3, np.random.default_rng(2))
        entries = [[i + 1, j + 1, float(full[i, j])] for i in range(3) for j in range(i, 3)]
        data = {"version": "1", "n": 3, "entries": entries, "cover": [[1, 2, 3]]}
        spec = write_json(tmp_path / "full.json", data)
        out_m = tmp_path / "full.csv"
        code = main(["complete", spec, "--output-matrix", str(out_m),
                     "--output-report", str(tmp_path / "full_rep.json")])
        assert code == 0
        values, _ = read_matrix_csv(out_m)
        assert np.abs(values - full).max() < 1e-15

    def test_asymmetric_pair_exit_2(self, tmp_path, capsys):
        data = dict(RS_SPEC)
        data["entries"] = RS_SPEC["entries"] + [[2, 1, 0.7]]
        spec = write_json(tmp_path / "bad.json", data)
        code = main(["complete", spec])
        assert code == 2
        assert "(2, 1)" in capsys.readouterr().err

    def test_unreadable_exit_1(self, tmp_path):
        assert main(["complete", str(tmp_path / "absent.json")]) == 1
        garbled = tmp_path / "garbled.json"
        garbled.write_text("{not json", encoding="utf-8")
        assert main(["complete", str(garbled)]) == 1

    def test_missing_cover_exit_2(self, tmp_path):
        data = {k: v for k, v in RS_SPEC.items() if k != "cover"}
        spec = write_json(tmp_path / "nocover.json", data)
        assert main(["complete", spec]) == 2


class TestCliBounds:
    def test_uncoupled_instance(self, tmp_path, capsys):
        data = dict(RS_SPEC)
        data["entries"] = [[1, 1, 1.0], [2, 2, 1.0], [3, 3, 1.0], [1, 2, 0.0], [2, 3, 0.0]]
        spec = write_json(tmp_path / "zero.json", data)
        assert main(["bounds", spec, "--entry", "1", "3"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload == {"m": -1.0, "M": 1.0, "canonical": 0.0}

    def test_rs_midpoint(self, tmp_path, capsys):
        spec = write_json(tmp_path / "rs.json", RS_SPEC)
        assert main(["bounds", spec, "--entry", "1", "3"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["canonical"] == pytest.approx(0.15, abs=1e-10)
        radius = np.sqrt(0.75 * 0.91)
        assert payload["m"] == pytest.approx(0.15 - radius, abs=1e-8)
        assert payload["M"] == pytest.approx(0.15 + radius, abs=1e-8)

    def test_specified_entry_exit_2(self, tmp_path):
        spec = write_json(tmp_path / "rs.json", RS_SPEC)
        assert main(["bounds", spec, "--entry", "1", "2"]) == 2

    def test_single_missing_entry_without_cover(self, tmp_path, capsys):
        data = {
            "version": "1",
            "n": 3,
            "entries": [[1, 1, 1.0], [2, 2, 1.0], [3, 3, 1.0], [1, 2, 0.5], [2, 3, 0.3]],
        }
        spec = write_json(tmp_path / "single.json", data)
        assert main(["bounds", spec, "--entry", "1", "3"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["canonical"] == pytest.approx(0.15, abs=1e-7)


class TestCliExtend:
    def test_ou_extension(self, tmp_path):
        data = {
            "version": "1",
            "stationary": {
                "samples": [float(np.exp(-0.1 * k)) for k in range(6)],
                "delta": 0.1,
            },
        }
        spec = write_json(tmp_path / "ou.json", data)
        out_m = tmp_path / "ext.csv"
        out_r = tmp_path / "ext.json"
        code = main(["extend", spec, "--points", "21", "--refine", "2",
                     "--output-matrix", str(out_m), "--output-report", str(out_r)])
        assert code == 0
        rows = out_m.read_text().strip().splitlines()
        assert rows[0] == "k,t,level_1,level_2"
        last_col = np.array([float(r.split(",")[-1]) for r in rows[1:]])
        assert np.abs(last_col - np.exp(-0.1 * np.arange(21))).max() < 1e-8
        payload = json.loads(out_r.read_text())
        assert max(lv["stationarity_residual"] for lv in payload["levels"]) < 1e-8

    def test_constant_all_ones(self, tmp_path):
        data = {"version": "1",
                "stationary": {"samples": [1.0, 1.0, 1.0], "delta": 0.1}}
        spec = write_json(tmp_path / "one.json", data)
        out_m = tmp_path / "one.csv"
        code = main(["extend", spec, "--points", "9", "--refine", "1",
                     "--output-matrix", str(out_m),
                     "--output-report", str(tmp_path / "one.json.out")])
        assert code == 0
        rows = out_m.read_text().strip().splitlines()
        col = np.array([float(r.split(",")[-1]) for r in rows[1:]])
        assert np.abs(col - 1.0).max() < 1e-10

    def test_sine_not_pd_exit_2(self, tmp_path, capsys):
        data = {"version": "1",
                "stationary": {"samples": [float(np.sin(0.1 * k)) for k in range(6)],
                                "delta": 0.1}}
        spec = write_json(tmp_path / "sin.json", data)
        assert main(["extend", spec, "--points", "21"]) == 2
        assert "not positive-definite" in capsys.readouterr().err


class TestCliVerify:
    def _complete(self, tmp_path):
        spec = write_json(tmp_path / "rs.json", RS_SPEC)
        out_m = tmp_path / "rs.csv"
        main(["complete", spec, "--output-matrix", str(out_m),
              "--output-report", str(tmp_path / "rs_rep.json")])
        return spec, out_m

    def test_self_check(self, tmp_path, capsys):
        spec, out_m = self._complete(tmp_path)
        capsys.readouterr()  # drop the completion command's status line
        code = main(["verify", str(out_m), spec, "--checks", "10", "--seed", "1"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["inverse_offpattern_residual"] <= 1e-8
        assert payload["restriction_residual"] <= 1e-12

    def test_strict_flags_perturbation(self, tmp_path, capsys):
        spec, out_m = self._complete(tmp_path)
        values, labels = read_matrix_csv(out_m)
        values[0, 2] = values[2, 0] = values[0, 2] + 0.2
        write_matrix_csv(out_m, values, labels)
        code = main(["verify", str(out_m), spec, "--checks", "10", "--strict", "1e-6"])
        assert code == 4

    def test_shape_mismatch_exit_2(self, tmp_path):
        spec, out_m = self._complete(tmp_path)
        write_matrix_csv(out_m, np.eye(4))
        assert main(["verify", str(out_m), spec]) == 2

    def test_identity_diagonal_pattern_zero_residuals(self, tmp_path, capsys):
        data = {"version": "1", "n": 3,
                "entries": [[1, 1, 1.0], [2, 2, 1.0], [3, 3, 1.0]]}
        spec = write_json(tmp_path / "diag.json", data)
        out_m = tmp_path / "eye.csv"
        write_matrix_csv(out_m, np.eye(3))
        code = main(["verify", str(out_m), spec, "--checks", "5"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["inverse_offpattern_residual"] == 0.0
        assert payload["logdet"] == 0.0


class TestCliRefine:
    def test_stationary_refine(self, tmp_path, capsys):
        data = {"version": "1",
                "stationary": {"samples": [float(np.exp(-0.1 * k)) for k in range(6)],
                                "delta": 0.1}}
        spec = write_json(tmp_path / "ou.json", data)
        code = main(["refine", spec, "--levels", "3", "--points", "21"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["final_gap"] <= 1e-10
        assert len(payload["levels"]) == 3


class TestDeterminism:
    def test_reports_byte_identical(self, tmp_path):
        spec = write_json(tmp_path / "rs.json", RS_SPEC)
        outs = []
        for tag in ("a", "b"):
            out_m = tmp_path / f"{tag}.csv"
            out_r = tmp_path / f"{tag}.json"
            code = main(["complete", spec, "--output-matrix", str(out_m),
                         "--output-report", str(out_r), "--seed", "0"])
            assert code == 0
            outs.append((out_m.read_bytes(), out_r.read_bytes()))
        assert outs[0] == outs[1]

    def test_verify_byte_identical(self, tmp_path):
        spec = write_json(tmp_path / "rs.json", RS_SPEC)
        out_m = tmp_path / "rs.csv"
        main(["complete", spec, "--output-matrix", str(out_m),
              "--output-report", str(tmp_path / "rep.json")])
        reports = []
        for tag in ("x", "y"):
            out_r = tmp_path / f"{tag}.json"
            code = main(["verify", str(out_m), spec, "--checks", "20",
                         "--seed", "7", "--output-report", str(out_r)])
            assert code == 0
            reports.append(out_r.read_bytes())
        assert reports[0] == reports[1]


class TestCliNumericalFailure:
    def test_non_psd_block_exit_3(self, tmp_path, capsys):
        data = dict(RS_SPEC)
        data["entries"] = [[1, 1, 1.0], [2, 2, 1.0], [3, 3, 1.0], [1, 2, 2.0], [2, 3, 0.3]]
        spec = write_json(tmp_path / "indef.json", data)
        assert main(["complete", spec]) == 3
        assert "not positive semidefinite" in capsys.readouterr().err

    def test_bounds_csv_format(self, tmp_path, capsys):
        spec = write_json(tmp_path / "rs.json", RS_SPEC)
        assert main(["bounds", spec, "--entry", "1", "3", "--format", "csv"]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out[0] == "m,M,canonical"
        assert float(out[1].split(",")[2]) == pytest.approx(0.15, abs=1e-10)
