import io
import json
import os
from pathlib import Path

import pytest

from drgt import cli, presets
from drgt.specfile import SpecError, emit_spec, parse_spec, parse_spec_text, spec_from_dict
from drgt.uncertainty import Interval

GOLDEN = Path(__file__).parent / "golden"
# fixtures that solve in well under a second
FAST = ["battle_of_sexes_nash", "battle_of_sexes_bayesian", "matching_pennies_nash",
        "free_rider_robust", "free_rider_robust_condition2", "free_rider_robust_condition3",
        "inspection_robust", "inspection_robust_condition2", "inspection_robust_discrete",
        "dro_free_rider_m1", "dro_free_rider_m2", "dro_free_rider_s0", "dro_free_rider_singleton",
        "dro_inspection_m1", "dro_inspection_m2", "dro_inspection_s0",
        "dro_inspection_singleton"]


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def write_spec(tmp_path, doc, name="game.json"):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


class TestParse:
    def test_free_rider_cost_interval(self):
        spec = spec_from_dict(presets.fixture_dict("free_rider_robust"))
        (sup,) = spec.payload.supports
        assert isinstance(sup, Interval)
        assert (sup.lo, sup.hi) == (0.25, 0.625)
        assert (sup.lo + sup.hi) / 2 == 7 / 16
        assert (sup.hi - sup.lo) / 2 == 3 / 16

    @pytest.mark.parametrize("name", presets.fixture_names())
    def test_round_trip(self, name):
        spec = spec_from_dict(presets.fixture_dict(name))
        assert parse_spec_text(emit_spec(spec)) == spec

    def test_zero_risk_level(self, tmp_path):
        doc = presets.fixture_dict("dro_inspection_m1")
        doc["risk"] = [0.0, 0.5]
        code, _, err = call("--spec", write_spec(tmp_path, doc))
        assert code == cli.EXIT_SPEC
        assert "risk" in err

    def test_mean_outside_support(self, tmp_path):
        doc = presets.fixture_dict("dro_free_rider_singleton")
        doc["ambiguity"]["m"] = presets.fixture_dict("dro_free_rider_m1")["ambiguity"]["m"]
        with pytest.raises(SpecError) as exc:
            parse_spec(write_spec(tmp_path, doc))
        assert exc.value.where == "ambiguity.m"
        assert call("--spec", write_spec(tmp_path, doc))[0] == cli.EXIT_SPEC

    def test_malformed_json_reports_line(self, tmp_path):
        path = write_spec(tmp_path, '{\n  "regime": "nash",\n  "actions": [2, 2\n}')
        with pytest.raises(SpecError) as exc:
            parse_spec(path)
        assert "line 4" in str(exc.value)

    def test_dimension_mismatch(self, tmp_path):
        doc = presets.fixture_dict("battle_of_sexes_nash")
        doc["actions"] = [3, 2]
        with pytest.raises(SpecError) as exc:
            parse_spec(write_spec(tmp_path, doc))
        assert exc.value.where.startswith("payoffs")

    @pytest.mark.parametrize("mutate,where", [
        (lambda d: d.pop("regime"), "regime"),
        (lambda d: d.update(regime="mixed"), "regime"),
        (lambda d: d.update(extra=1), "extra"),
        (lambda d: d.update(solver={"bogus": 1}), "solver"),
    ])
    def test_field_errors(self, mutate, where):
        doc = presets.fixture_dict("battle_of_sexes_nash")
        mutate(doc)
        with pytest.raises(SpecError) as exc:
            spec_from_dict(doc)
        assert where in str(exc.value)

    def test_unknown_fixture(self):
        code, _, err = call("--fixture", "no_such_game")
        assert code == cli.EXIT_SPEC and "no_such_game" in err

    def test_fixture_self_check(self):
        presets.self_check()


class TestRun:
    def test_free_rider_csv_rows(self):
        code, out, _ = call("--fixture", "free_rider_robust", "--format", "csv")
        lines = out.splitlines()
        assert code == 0 and lines[0] == cli.CSV_HEADER
        assert len(lines) == 13
        assert {ln.split(",")[0] for ln in lines[1:]} == {"1", "2", "3"}
        assert all(len(ln.split(",")[3].split(".")[1]) == 6 for ln in lines[1:])

    def test_alias(self):
        assert call("--fixture", "robust_free_rider", "--format", "csv")[1] == \
            call("--fixture", "free_rider_robust", "--format", "csv")[1]

    def test_inspection_special_dro(self):
        table = cli.run(spec_from_dict(presets.fixture_dict("dro_inspection_m2")))
        (row,) = table.rows
        assert row.vector()[[0, 2]] == pytest.approx([1 / 3, 3 / 5], abs=1e-3)
        assert [m for m, _ in row.per_player] == pytest.approx([6, -11 / 3], abs=1e-2)

    def test_empty_table(self, tmp_path):
        doc = presets.fixture_dict("free_rider_robust")
        doc["solver"] = {"max_iters": 0}
        path = write_spec(tmp_path, doc)
        code, out, err = call("--spec", path, "--starts", "1", "--format", "csv")
        assert code == cli.EXIT_EMPTY
        assert out.splitlines()[:2] == [cli.CSV_HEADER, cli.EMPTY_NOTE]
        assert "starts" in err

    def test_flags_override_spec(self, tmp_path):
        code, out, _ = call("--fixture", "free_rider_robust", "--starts", "7", "--seed", "3",
                            "--method", "steepest")
        assert code == 0
        assert "steepest, 7 starts from seed 3" in out

    def test_bad_starts(self):
        assert call("--fixture", "free_rider_robust", "--starts", "0")[0] == cli.EXIT_SPEC

    def test_list_fixtures(self):
        code, out, _ = call("--list-fixtures")
        names = [ln.split()[0] for ln in out.splitlines()]
        assert code == 0 and names == presets.fixture_names()

    def test_dump_spec_parses(self):
        code, out, _ = call("--fixture", "inspection_robust", "--dump-spec")
        assert code == 0
        assert parse_spec_text(out) == spec_from_dict(presets.fixture_dict("inspection_robust"))

    def test_reduced_path_checked(self, monkeypatch):
        # a wrong reduced tensor must surface as an internal error
        spec = spec_from_dict(presets.fixture_dict("battle_of_sexes_nash"))
        real = cli.plan

        def skewed(s):
            system, summarize, path, Q = real(s)
            return system, cli.tensor_summary(presets_pennies()), path, Q
        monkeypatch.setattr(cli, "plan", skewed)
        with pytest.raises(cli.InternalError):
            cli.run(spec, num_starts=5)

    def test_csv_deterministic(self):
        a = call("--fixture", "dro_free_rider_m1", "--format", "csv", "--starts", "30")[1]
        b = call("--fixture", "dro_free_rider_m1", "--format", "csv", "--starts", "30")[1]
        assert a.encode() == b.encode()


def presets_pennies():
    return spec_from_dict(presets.fixture_dict("matching_pennies_nash")).payload


@pytest.mark.parametrize("name", FAST)
def test_plain_matches_golden(name):
    code, out, _ = call("--fixture", name)
    assert code == 0
    path = GOLDEN / f"{name}.txt"
    if os.environ.get("DRGT_UPDATE_GOLDEN"):
        path.write_text(out)
    assert out == path.read_text()
