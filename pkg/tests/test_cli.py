import io
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

from regimes.cli import main

MODELS = Path(__file__).resolve().parent.parent / "models"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


def kv(text):
    pairs = {}
    for line in text.splitlines():
        key, _, value = line.partition("=")
        pairs[key] = value
    return pairs


def model(name):
    return str(MODELS / name)


class TestEvaluateAndGrec:
    def test_stability_report_f1(self):
        code, out, _ = run("stability", "--model", model("f1.id"))
        assert code == 0
        assert kv(out)["simple_stability"] == "true"

    def test_stability_report_f2_fails_with_witness(self):
        code, out, _ = run("stability", "--model", model("f2.id"))
        assert code == 1
        got = kv(out)
        assert got["simple_stability"] == "false"
        assert got["stage_2"] == "false"
        assert got["witness_2"] == "L2-U1-sigma"

    def test_grec_equals_direct_oracle(self):
        c1, out1, _ = run("grec", "--model", model("f2.id"), "--strategy", "e2")
        c2, out2, _ = run(
            "evaluate", "--model", model("f2.id"), "--strategy", "e2", "--direct"
        )
        assert c1 == c2 == 0
        lhs = float(kv(out1)["consequence"])
        rhs = float(kv(out2)["consequence"])
        assert abs(lhs - rhs) < 1e-9

    def test_target_flag(self):
        _, out0, _ = run("evaluate", "--model", model("f1.id"), "--target", "0")
        _, out1, _ = run("evaluate", "--model", model("f1.id"), "--target", "1")
        assert abs(float(kv(out0)["consequence"]) + float(kv(out1)["consequence"]) - 1.0) < 1e-9

    def test_k_flag(self):
        _, out, _ = run("evaluate", "--model", model("f1.id"), "--k", "0=2,1=2")
        assert abs(float(kv(out)["consequence"]) - 2.0) < 1e-9


class TestChecks:
    def test_seqrand(self):
        assert run("seqrand", "--model", model("f1.id"))[0] == 0
        code, out, _ = run("seqrand", "--model", model("f2.id"))
        assert code == 1 and kv(out)["sequential_randomization"] == "false"

    def test_numeric_stability(self):
        code, out, _ = run(
            "stability", "--model", model("f2.id"), "--numeric", "--strategy", "e2"
        )
        assert code == 1
        assert kv(out)["mode"] == "numeric"
        assert kv(out)["stage_2"] == "false"

    def test_seqirrel(self):
        code, out, _ = run("seqirrel", "--model", model("f4.id"), "--strategy", "e")
        got = kv(out)
        assert code == 1
        assert got["sequential_irrelevance"] == "false"
        assert got["extended_positivity_e"] == "true"

    def test_positivity(self):
        code, out, _ = run("positivity", "--model", model("f1.id"), "--strategy", "mix")
        got = kv(out)
        assert code == 0
        assert got == {
            "simple": "true", "extended": "true",
            "parent_child": "true", "general": "true",
        }

    def test_graphsep_narrow_and_wide(self):
        code, out, _ = run("graphsep", "--model", model("f2.id"))
        assert code == 0 and kv(out)["graphsep"] == "true"
        code, out, _ = run("graphsep", "--model", model("f2_wide.id"))
        assert code == 1 and kv(out)["i_1"] == "false"

    def test_verify_general(self):
        code, out, _ = run(
            "verify-general", "--model", model("f2.id"), "--strategy", "e2"
        )
        got = kv(out)
        assert code == 0 and got["all"] == "true"
        assert float(got["consequence_delta"]) <= 1e-9
        code, out, _ = run(
            "verify-general", "--model", model("f2.id"), "--strategy", "e2wide"
        )
        assert code == 1 and kv(out)["y_bridge"] == "false"


class TestAdmissibleCommand:
    def test_f3_search(self):
        code, out, _ = run("admissible", "--model", model("f3.id"))
        assert code == 0
        got = kv(out)
        assert got["ordering"] == "B,A"
        assert got["sequence"] == ";L"

    def test_f3_explicit_bad_order(self):
        code, out, _ = run("admissible", "--model", model("f3.id"), "--order", "A,B")
        assert code == 1
        assert kv(out)["admissible"] == "false"

    def test_f5_improve(self):
        code, out, _ = run("admissible", "--model", model("f5.id"), "--improve")
        assert code == 0
        assert kv(out)["sequence"] == ";X"

    def test_none_found(self):
        code, out, _ = run("admissible", "--model", model("f4_two_actions.id"))
        assert code == 1
        assert kv(out)["ordering"] == "none"


class TestOptimizeCommand:
    def test_f1_optimize_max_and_min(self):
        code, out, _ = run("optimize", "--model", model("f1.id"))
        assert code == 0
        vmax = float(kv(out)["value"])
        code, out, _ = run("optimize", "--model", model("f1.id"), "--min")
        vmin = float(kv(out)["value"])
        assert code == 0 and vmin <= vmax

    def test_refusal_on_unlicensed_model(self):
        code, out, err = run("optimize", "--model", model("f4.id"))
        assert code == 2
        assert "refused" in err
        assert out == ""

    def test_f2_narrow_is_licensed(self):
        code, out, _ = run("optimize", "--model", model("f2.id"))
        assert code == 0


class TestSimulateEstimate:
    def test_simulate_and_estimate(self, tmp_path):
        out_file = tmp_path / "rows.txt"
        code, out, _ = run(
            "simulate", "--model", model("f1.id"), "--regime", "obs",
            "--n", "50000", "--seed", "11", "--out", str(out_file),
        )
        assert code == 0 and kv(out)["rows"] == "50000"
        code, out, _ = run(
            "estimate", "--model", model("f1.id"), "--data", str(out_file),
            "--strategy", "dyn",
        )
        assert code == 0
        est = float(kv(out)["consequence"])
        _, exact_out, _ = run(
            "evaluate", "--model", model("f1.id"), "--strategy", "dyn"
        )
        assert abs(est - float(kv(exact_out)["consequence"])) < 0.05

    def test_estimate_dump_tables(self, tmp_path):
        out_file = tmp_path / "rows.txt"
        run(
            "simulate", "--model", model("f1.id"), "--regime", "obs",
            "--n", "50", "--seed", "1", "--out", str(out_file),
        )
        code, out, _ = run(
            "estimate", "--model", model("f1.id"), "--data", str(out_file),
            "--alpha", "0",
        )
        assert code == 0
        assert any(line.startswith("cond[1|-]=") for line in out.splitlines())


class TestErrorsAndDeterminism:
    def test_missing_model_file(self):
        code, _, err = run("stability", "--model", "/nonexistent.id")
        assert code == 2 and "error" in err

    def test_parse_error_exit(self, tmp_path):
        bad = tmp_path / "bad.id"
        bad.write_text("var Y kind=resp states=0,1\norder Y\ncpt Y | -\nrow - : 0.9 0.2\n")
        code, _, err = run("stability", "--model", str(bad))
        assert code == 2 and "sums to" in err

    def test_unknown_strategy(self):
        code, _, err = run("grec", "--model", model("f1.id"), "--strategy", "zzz")
        assert code == 2 and "unknown strategy" in err

    def test_usage_error(self):
        assert run("grec", "--model", model("f1.id"))[0] == 2

    def test_byte_identical_reports(self, tmp_path):
        commands = [
            ("stability", "--model", model("f2.id")),
            ("grec", "--model", model("f2.id"), "--strategy", "e2"),
            ("admissible", "--model", model("f3.id")),
            ("optimize", "--model", model("f1.id")),
            ("verify-general", "--model", model("f2.id"), "--strategy", "e2"),
        ]
        for argv in commands:
            a = run(*argv)
            b = run(*argv)
            assert a == b

    def test_dataset_files_bit_exact(self, tmp_path):
        f_a, f_b = tmp_path / "a.txt", tmp_path / "b.txt"
        for f in (f_a, f_b):
            run(
                "simulate", "--model", model("f1.id"), "--regime", "mix",
                "--n", "300", "--seed", "9", "--out", str(f),
            )
        assert f_a.read_bytes() == f_b.read_bytes()
