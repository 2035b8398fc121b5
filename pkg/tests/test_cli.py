import json

import pytest

from borno.cli import builtin_instances, main, run_instance
from borno.serialize import instance_digest


def run_cli(args):
    return main(list(args))


def write_fixture(tmp_path, name):
    path = tmp_path / f"{name}.json"
    assert run_cli(["fixture", name, "--out", str(path)]) == 0
    return path


def report_of(tmp_path, name, extra=()):
    inst = write_fixture(tmp_path, name)
    out = tmp_path / f"{name}-report.json"
    code = run_cli(["run", "--input", str(inst), "--out", str(out), *extra])
    with open(out) as fh:
        return code, json.load(fh)


class TestFixtures:
    def test_every_builtin_validates_and_runs(self, tmp_path):
        for name, inst in builtin_instances().items():
            assert inst["schema"] == "borno/1"
        for name in ("golden-pair", "nilpotent", "contraction-hull",
                     "cauchy-geometric", "completion-demo",
                     "approx-truncation"):
            code, report = report_of(tmp_path, name)
            assert code in (0, 1, 2)
            assert report["schema"] == "borno/1"

    def test_unknown_fixture_exits_three(self, tmp_path, capsys):
        assert run_cli(["fixture", "nope",
                        "--out", str(tmp_path / "x.json")]) == 3

    def test_golden_pair_certifies(self, tmp_path):
        code, report = report_of(tmp_path, "golden-pair")
        assert code == 0
        assert report["results"]["lower"] >= 1.618
        assert report["verdicts"]["estimate"] == "pass"

    def test_negative_control_exits_one(self, tmp_path):
        code, report = report_of(tmp_path, "interval-restriction")
        assert code == 1
        assert report["verdicts"]["isoradial"] == "fail"

    def test_subcommand_alias_checks_command(self, tmp_path):
        inst = write_fixture(tmp_path, "golden-pair")
        assert run_cli(["jsr", "--input", str(inst)]) == 0
        assert run_cli(["cauchy", "--input", str(inst)]) == 3


class TestErrors:
    def test_malformed_json_exits_three(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run_cli(["run", "--input", str(bad)]) == 3

    def test_unknown_command_rejected(self, tmp_path):
        bad = tmp_path / "cmd.json"
        bad.write_text(json.dumps({"schema": "borno/1", "command": "wat",
                                   "payload": {}, "config": {}}))
        assert run_cli(["run", "--input", str(bad)]) == 3

    def test_unknown_field_rejected(self, tmp_path):
        bad = tmp_path / "field.json"
        inst = builtin_instances()["golden-pair"]
        inst["surprise"] = 1
        bad.write_text(json.dumps(inst))
        assert run_cli(["run", "--input", str(bad)]) == 3

    def test_wrong_schema_rejected(self, tmp_path):
        bad = tmp_path / "schema.json"
        inst = builtin_instances()["golden-pair"]
        inst["schema"] = "borno/2"
        bad.write_text(json.dumps(inst))
        assert run_cli(["run", "--input", str(bad)]) == 3

    def test_missing_input_exits_three(self):
        assert run_cli(["run"]) == 3

    def test_numerical_failure_exits_four(self, tmp_path):
        inst = builtin_instances()["golden-pair"]
        half = json.loads(json.dumps(inst))
        gens = half["payload"]["set"]["generators"]
        for g in gens:
            for row in g:
                for entry in row:
                    entry[0] *= 0.5
                    entry[1] *= 0.5
        hull_inst = {
            "schema": "borno/1",
            "command": "hull",
            "payload": {"set": half["payload"]["set"], "r": 1.0,
                        "max_products": 3},
            "config": {},
        }
        path = tmp_path / "hull.json"
        path.write_text(json.dumps(hull_inst))
        assert run_cli(["run", "--input", str(path)]) == 4


class TestDeterminism:
    @pytest.mark.parametrize("name", ["golden-pair", "cauchy-geometric",
                                      "approx-truncation"])
    def test_reports_identical_across_thread_counts(self, tmp_path, name):
        inst = write_fixture(tmp_path, name)
        outputs = []
        for threads in ("1", "4", "0"):
            out = tmp_path / f"{name}-{threads}.json"
            code = run_cli(["run", "--input", str(inst), "--out", str(out),
                            "--threads", threads])
            assert code in (0, 1, 2)
            with open(out) as fh:
                report = json.load(fh)
            report.pop("wall_time_ms")
            outputs.append(json.dumps(report, sort_keys=True))
        assert outputs[0] == outputs[1] == outputs[2]

    def test_digest_is_stable(self):
        inst = builtin_instances()["golden-pair"]
        assert instance_digest(inst) == instance_digest(
            json.loads(json.dumps(inst)))

    def test_rerun_identical_modulo_timing(self, tmp_path):
        inst = builtin_instances()["nilpotent"]
        a = run_instance(inst, {})
        b = run_instance(inst, {})
        a.pop("wall_time_ms"), b.pop("wall_time_ms")
        assert a == b


class TestExplicitPayloads:
    def test_apple_with_inline_maps(self, tmp_path):
        import numpy as np
        from borno.algebra import MatrixAlgebra, bounded_set, matrix_element
        from borno.maps import Homomorphism
        from borno.serialize import bounded_set_to_json, map_to_json

        ident = Homomorphism.identity(MatrixAlgebra(2))
        inst = {
            "schema": "borno/1",
            "command": "apple",
            "payload": {
                "map": map_to_json(ident),
                "sigmas": [map_to_json(ident)],
                "h": map_to_json(ident),
                "set": bounded_set_to_json(
                    bounded_set([matrix_element(0.5 * np.eye(2))])),
            },
            "config": {"depth": 3, "samples": 2, "tgrid": 9},
        }
        path = tmp_path / "apple.json"
        path.write_text(json.dumps(inst))
        out = tmp_path / "apple-report.json"
        assert run_cli(["run", "--input", str(path), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["verdicts"]["apple"] == "pass"
        assert len(report["results"]["homotopy"]["t_grid"]) == 9

    def test_convergence_mode(self, tmp_path):
        from fractions import Fraction
        from borno.closedforms import EpsForm
        from borno.seqspace import (DiskForm, GeoTerm, SeqVector,
                                    SequenceModel)
        from borno.serialize import sequence_to_json, vector_to_json

        model = SequenceModel(geo_terms=(
            GeoTerm(1, 1, SeqVector.unit(1, 1)),
            GeoTerm(-1, Fraction(1, 2), SeqVector.unit(1, 1))))
        inst = {
            "schema": "borno/1",
            "command": "cauchy",
            "payload": {
                "space": {"disks": [DiskForm("sum").as_dict()],
                          "horizon": 64, "tails_admitted": True},
                "sequence": sequence_to_json(model),
                "disk": 0,
                "eps": EpsForm.geometric(1, Fraction(1, 2)).as_dict(),
                "mode": "convergence",
                "limit": vector_to_json(SeqVector.unit(1, 1)),
            },
            "config": {},
        }
        path = tmp_path / "conv.json"
        path.write_text(json.dumps(inst))
        assert run_cli(["run", "--input", str(path)]) == 0

    def test_isoradial_with_inline_map(self, tmp_path):
        from borno.fixtures import corner_embedding
        from borno.serialize import map_to_json

        inst = {
            "schema": "borno/1",
            "command": "isoradial",
            "payload": {"map": map_to_json(corner_embedding(2, 3))},
            "config": {"samples": 2, "depth": 3},
        }
        path = tmp_path / "iso.json"
        path.write_text(json.dumps(inst))
        assert run_cli(["run", "--input", str(path)]) == 0


class TestCsv:
    def test_csv_flattening(self, tmp_path):
        inst = write_fixture(tmp_path, "approx-truncation")
        out = tmp_path / "rep.json"
        assert run_cli(["run", "--input", str(inst), "--out", str(out),
                        "--csv"]) == 0
        csv_path = tmp_path / "rep.csv"
        assert csv_path.exists()
        text = csv_path.read_text()
        assert "rates" in text
