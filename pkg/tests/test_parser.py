from pathlib import Path

import pytest

from regimes.errors import ParseError
from regimes.fixtures import f1, f2, f3, f4, f5
from regimes.parser import ModelDocument, format_model, parse_model

MODELS = Path(__file__).resolve().parent.parent / "models"

MINIMAL = """\
# smallest possible document
var Y kind=resp states=y1,y0
order Y
cpt Y | -
row - : 0.3 0.7
"""


class TestGrammar:
    def test_minimal_document(self):
        doc = parse_model(MINIMAL)
        assert doc.diagram.response == "Y"
        assert doc.diagram.cpts["Y"].table[()] == (0.3, 0.7)

    def test_comments_and_blank_lines_ignored(self):
        doc = parse_model("\n\n# hello\n" + MINIMAL + "\n# bye\n")
        assert doc.diagram.n == 0

    def test_shipped_f2_document(self):
        doc = parse_model((MODELS / "f2.id").read_text())
        assert len(doc.diagram.order) == 6
        assert sorted(doc.strategies) == ["e2", "e2wide"]
        assert doc.diagram.int_parents["A2"] == ("A1",)

    def test_deterministic_row_shorthand(self):
        text = MINIMAL.replace("order Y", "order Y")  # unchanged
        doc = parse_model(
            "var L kind=obs states=0,1\n"
            "var A kind=act states=0,1\n"
            "var Y kind=resp states=0,1\n"
            "order L A Y\n"
            "edge L A\nedge L Y\nedge A Y\nedge sigma A\n"
            "cpt L | -\nrow - : 0.5 0.5\n"
            "cpt A | L\nrow 0 : 0.5 0.5\nrow 1 : 0.5 0.5\n"
            "cpt Y | L,A\n"
            "row 0,0 : 0.5 0.5\nrow 0,1 : 0.5 0.5\n"
            "row 1,0 : 0.5 0.5\nrow 1,1 : 0.5 0.5\n"
            "strategy s\n"
            "assign A | L\n"
            "row 0 : 1\n"
            "prow 1 : 0.25 0.75\n"
        )
        pol = doc.strategies["s"].policies["A"]
        assert pol.table[("0",)] == (0.0, 1.0)
        assert pol.table[("1",)] == (0.25, 0.75)


class TestDiagnostics:
    def check(self, text, fragment, line=None):
        with pytest.raises(ParseError) as err:
            parse_model(text)
        assert fragment in str(err.value)
        if line is not None:
            assert err.value.line == line

    def test_unknown_directive(self):
        self.check(MINIMAL + "flub x\n", "unknown directive", line=6)

    def test_bad_row_sum_names_row(self):
        bad = MINIMAL.replace("row - : 0.3 0.7", "row - : 0.3 0.6")
        self.check(bad, "sums to", line=5)

    def test_missing_row_reported_at_header(self):
        text = (
            "var L kind=obs states=0,1\n"
            "var Y kind=resp states=0,1\n"
            "order L Y\n"
            "edge L Y\n"
            "cpt L | -\nrow - : 0.5 0.5\n"
            "cpt Y | L\nrow 0 : 0.5 0.5\n"
        )
        self.check(text, "missing rows", line=7)

    def test_duplicate_row(self):
        bad = MINIMAL + "cpt Y | -\n"
        self.check(bad, "duplicate cpt", line=6)

    def test_unknown_variable_in_edge(self):
        self.check(MINIMAL + "edge Q Y\n", "unknown variable", line=6)

    def test_sigma_into_nonaction_at_parse_time(self):
        self.check(MINIMAL + "edge sigma Y\n", "non-action", line=6)

    def test_backward_edge_reported(self):
        text = (
            "var L kind=obs states=0,1\n"
            "var Y kind=resp states=0,1\n"
            "order Y L\n"  # response not last
            "cpt L | -\nrow - : 0.5 0.5\n"
            "cpt Y | -\nrow - : 0.5 0.5\n"
        )
        self.check(text, "last")

    def test_order_must_cover_all(self):
        text = MINIMAL.replace("order Y", "order Y Y")
        self.check(text, "exactly once", line=3)

    def test_strategy_row_on_hidden_parent(self):
        doc_text = (MODELS / "f2.id").read_text()
        bad = doc_text + "strategy bad\nassign A1 | U1\nrow 0 : 1\nrow 1 : 0\nassign A2 | -\nrow - : 0\n"
        self.check(bad, "hidden")


class TestRoundTrip:
    @pytest.mark.parametrize("build", [f1, f2, f3, f4, f5])
    def test_fixture_round_trip(self, build):
        doc = ModelDocument(*build())
        text = format_model(doc)
        back = parse_model(text)
        assert back.diagram == doc.diagram
        assert back.strategies == doc.strategies
        assert format_model(back) == text

    def test_shipped_files_match_builders(self):
        from regimes import fixtures as F

        pairs = [
            ("f1.id", F.f1), ("f2.id", F.f2), ("f3.id", F.f3),
            ("f4.id", F.f4), ("f5.id", F.f5),
        ]
        for name, build in pairs:
            doc = parse_model((MODELS / name).read_text())
            diagram, strategies = build()
            assert doc.diagram == diagram, name
            assert doc.strategies == strategies, name
        assert parse_model((MODELS / "f2_wide.id").read_text()).diagram == F.f2(wide=True)[0]
        assert (
            parse_model((MODELS / "f4_two_actions.id").read_text()).diagram
            == F.f4(two_actions=True)[0]
        )
