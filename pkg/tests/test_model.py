import itertools

import numpy as np
import pytest

from helpers import random_strategy, rng
from regimes.errors import CapacityError, InputError, ModelError, PolicyError
from regimes.fixtures import f1, f2, f4
from regimes.model import (
    UNDEFINED,
    Cpt,
    ExactSource,
    InfluenceDiagram,
    Policy,
    Strategy,
    Variable,
    conditional,
    consequence_direct,
    joint_distribution,
    observable_joint,
    support,
)


def single_response(p1=0.3):
    v = Variable("Y", "resp", ("y1", "y0"))
    return InfluenceDiagram([v], [], {"Y": Cpt("Y", (), {(): (p1, 1 - p1)})})


class TestValidation:
    def test_minimal_document(self):
        d = single_response()
        assert d.n == 0 and d.response == "Y"

    def test_two_responses_rejected(self):
        vs = [Variable("Y1", "resp", ("0", "1")), Variable("Y2", "resp", ("0", "1"))]
        cpts = {v.name: Cpt(v.name, (), {(): (0.5, 0.5)}) for v in vs}
        with pytest.raises(ModelError):
            InfluenceDiagram(vs, [], cpts)

    def test_response_must_be_last(self):
        vs = [Variable("Y", "resp", ("0", "1")), Variable("L", "obs", ("0", "1"))]
        cpts = {v.name: Cpt(v.name, (), {(): (0.5, 0.5)}) for v in vs}
        with pytest.raises(ModelError):
            InfluenceDiagram(vs, [], cpts)

    def test_backward_edge_rejected(self):
        vs = [Variable("L", "obs", ("0", "1")), Variable("Y", "resp", ("0", "1"))]
        cpts = {
            "L": Cpt("L", (), {(): (0.5, 0.5)}),
            "Y": Cpt("Y", (), {(): (0.5, 0.5)}),
        }
        with pytest.raises(ModelError):
            InfluenceDiagram(vs, [("Y", "L")], cpts)

    def test_sigma_into_nonaction_rejected(self):
        vs = [Variable("L", "obs", ("0", "1")), Variable("Y", "resp", ("0", "1"))]
        cpts = {
            "L": Cpt("L", (), {(): (0.5, 0.5)}),
            "Y": Cpt("Y", ("L",), {("0",): (0.5, 0.5), ("1",): (0.4, 0.6)}),
        }
        with pytest.raises(ModelError):
            InfluenceDiagram(vs, [("L", "Y"), ("sigma", "L")], cpts)

    def test_bad_row_sum_rejected(self):
        v = Variable("Y", "resp", ("0", "1"))
        with pytest.raises(ModelError):
            InfluenceDiagram([v], [], {"Y": Cpt("Y", (), {(): (0.6, 0.3)})})

    def test_hidden_int_parent_rejected(self):
        vs = [
            Variable("U", "hid", ("0", "1")),
            Variable("A", "act", ("0", "1")),
            Variable("Y", "resp", ("0", "1")),
        ]
        cpts = {
            "U": Cpt("U", (), {(): (0.5, 0.5)}),
            "A": Cpt("A", ("U",), {("0",): (0.5, 0.5), ("1",): (0.4, 0.6)}),
            "Y": Cpt("Y", ("A",), {("0",): (0.5, 0.5), ("1",): (0.4, 0.6)}),
        }
        with pytest.raises(ModelError):
            InfluenceDiagram(
                vs, [("U", "A"), ("A", "Y"), ("sigma", "A")], cpts,
                int_parents={"A": ("U",)},
            )

    def test_int_parents_folded_into_obs(self):
        # declared obs-parents omit an int-parent; normalization adds it
        # with no numeric effect
        vs = [
            Variable("L", "obs", ("0", "1")),
            Variable("A", "act", ("0", "1")),
            Variable("Y", "resp", ("0", "1")),
        ]
        cpts = {
            "L": Cpt("L", (), {(): (0.5, 0.5)}),
            "A": Cpt("A", (), {(): (0.7, 0.3)}),
            "Y": Cpt("Y", ("A",), {("0",): (0.5, 0.5), ("1",): (0.4, 0.6)}),
        }
        d = InfluenceDiagram(
            vs, [("L", "A"), ("A", "Y"), ("sigma", "A")], cpts,
            obs_parents={"A": ()}, int_parents={"A": ("L",)},
        )
        assert d.obs_parents["A"] == ("L",)
        assert d.cpts["A"].table[("0",)] == d.cpts["A"].table[("1",)] == (0.7, 0.3)

    def test_capacity_guard(self):
        states = tuple(str(i) for i in range(8))
        vs = [Variable(f"L{i}", "obs", states) for i in range(8)]
        vs.append(Variable("Y", "resp", states))
        cpts = {
            v.name: Cpt(v.name, (), {(): tuple([1.0] + [0.0] * 7)}) for v in vs
        }
        d = InfluenceDiagram(vs, [], cpts)
        with pytest.raises(CapacityError):
            joint_distribution(d, "obs")


class TestJointDistribution:
    def test_single_binary_response(self):
        j = joint_distribution(single_response(0.3), "obs")
        assert np.allclose(j.probs, [0.3, 0.7])

    def test_f1_obs_mass_and_action_marginal(self):
        d, _ = f1()
        j = joint_distribution(d, "obs")
        assert abs(j.total() - 1.0) < 1e-9
        # marginal of A1 equals its table combined with p(L1)
        pl = d.cpts["L1"].table[()]
        pa = d.cpts["A1"].table
        want = sum(pl[i] * pa[(s,)][1] for i, s in enumerate(("0", "1")))
        assert abs(j.prob({"A1": "1"}) - want) < 1e-12

    def test_degenerate_policy_rows_zero_off_policy_mass(self):
        d, strats = f2()
        det = Strategy(
            "det",
            {
                "A1": Policy((), {(): (1.0, 0.0)}),
                "A2": Policy(("A1",), {("0",): (0.0, 1.0), ("1",): (1.0, 0.0)}),
            },
        )
        j = joint_distribution(d, det)
        assert j.prob({"A1": "1"}) == 0.0
        assert j.prob({"A1": "0", "A2": "0"}) == 0.0
        assert abs(j.total() - 1.0) < 1e-9

    def test_mass_one_under_every_regime(self):
        d, strats = f1()
        for regime in ["obs", *strats.values()]:
            assert abs(joint_distribution(d, regime).total() - 1.0) < 1e-9

    def test_strategy_on_hidden_rejected(self):
        d, _ = f2()
        bad = Strategy(
            "bad",
            {
                "A1": Policy(("U1",), {("0",): (1.0, 0.0), ("1",): (0.0, 1.0)}),
                "A2": Policy((), {(): (0.5, 0.5)}),
            },
        )
        with pytest.raises(PolicyError):
            joint_distribution(d, bad)

    def test_incomplete_strategy_rejected(self):
        d, _ = f2()
        partial = Strategy(
            "partial",
            {
                "A1": Policy((), {(): (0.5, 0.5)}),
                "A2": Policy(("A1",), {("0",): (0.5, 0.5)}),  # missing row for A1=1
            },
        )
        with pytest.raises(PolicyError):
            joint_distribution(d, partial)


class TestConditional:
    def test_marginal_when_given_empty(self):
        j = joint_distribution(single_response(0.3), "obs")
        assert conditional(j, ("Y",), {}) == {("y1",): 0.3, ("y0",): 0.7}

    def test_zero_probability_event_undefined(self):
        d = single_response(1.0)
        j = joint_distribution(d, "obs")
        assert conditional(j, (), {"Y": "y0"}) is UNDEFINED

    def test_factorization_identity_on_f1(self):
        # conditional of Y given the full past equals the Y table row
        d, _ = f1()
        j = joint_distribution(d, "obs")
        past = {"L1": "1", "A1": "0", "L2": "1", "A2": "1"}
        got = conditional(j, ("Y",), past)
        want = d.cpts["Y"].table[("1", "0", "1", "1")]
        assert abs(got[("0",)] - want[0]) < 1e-12

    def test_unknown_state_rejected(self):
        j = joint_distribution(single_response(), "obs")
        with pytest.raises(InputError):
            conditional(j, (), {"Y": "nope"})


class TestSupport:
    def test_all_positive_tables_full_support(self):
        d, _ = f1()
        sup = support(d, "obs")
        base = d.base
        want = 1  # null history
        run = 1
        for m in base.boundaries[1:]:
            run = np.prod([len(base.states[v]) for v in base.vars[:m]])
            want += run
        assert len(sup) == want

    def test_degenerate_strategy_excludes_off_policy(self):
        d, _ = f1()
        stat = Strategy.static("s", {"A1": "1", "A2": "0"}, d.states)
        sup = support(d, stat)
        assert ("0", "0") not in sup  # (l1, a1) with off-policy action
        assert ("0", "1") in sup

    def test_structural_zero_removes_histories(self):
        # zero the observational probability of A1=1 everywhere
        d, _ = f4()
        cpts = dict(d.cpts)
        cpts["A1"] = Cpt("A1", ("U",), {("0",): (1.0, 0.0), ("1",): (1.0, 0.0)})
        d2 = InfluenceDiagram(d.variables, list(d.dag.edges), cpts,
                              d.obs_parents, d.int_parents)
        sup = support(d2, "obs")
        assert ("1",) not in sup and ("0",) in sup


class TestConsequenceDirect:
    def test_normalization(self):
        d, strats = f1()
        for regime in ["obs", *strats.values()]:
            one = consequence_direct(d, regime, {"0": 1.0, "1": 1.0})
            assert abs(one - 1.0) < 1e-9

    def test_indicator_is_marginal(self):
        d = single_response(0.25)
        assert abs(consequence_direct(d, "obs", {"y1": 1.0, "y0": 0.0}) - 0.25) < 1e-12

    def test_full_enumeration_oracle_static(self):
        d, strats = f1()
        k = {"0": 0.2, "1": 1.7}
        # independent oracle: literally sum the factorization over all cells
        stat = strats["stat"]
        base = d.base
        total = 0.0
        for cfg in itertools.product("01", repeat=5):
            l1, a1, l2, a2, y = cfg
            p = d.cpts["L1"].table[()][int(l1)]
            p *= stat.policies["A1"].table[()][int(a1)]
            p *= d.cpts["L2"].table[(l1, a1)][int(l2)]
            p *= stat.policies["A2"].table[()][int(a2)]
            p *= d.cpts["Y"].table[(l1, a1, l2, a2)][int(y)]
            total += p * k[y]
        assert abs(consequence_direct(d, stat, k) - total) < 1e-12

    def test_linearity_in_k(self):
        d, strats = f1()
        gen = rng(11)
        k1 = {s: float(gen.normal()) for s in ("0", "1")}
        k2 = {s: float(gen.normal()) for s in ("0", "1")}
        a, b = 1.7, -0.4
        mix = {s: a * k1[s] + b * k2[s] for s in k1}
        lhs = consequence_direct(d, strats["mix"], mix)
        rhs = a * consequence_direct(d, strats["mix"], k1) + b * consequence_direct(
            d, strats["mix"], k2
        )
        assert abs(lhs - rhs) < 1e-12


class TestExtendedStabilityByConstruction:
    def test_nonaction_conditionals_shared_across_regimes(self):
        # any control strategy leaves every non-action conditional given
        # its full past unchanged wherever both sides are defined
        d, _ = f2()
        for seed in range(5):
            s = random_strategy(d, seed)
            jo = joint_distribution(d, "obs")
            je = joint_distribution(d, s)
            for v in d.order:
                if d.kinds[v] == "act":
                    continue
                past = d.order[: d.index[v]]
                for cfg in itertools.product(*(d.states[p] for p in past)):
                    given = dict(zip(past, cfg))
                    co = conditional(jo, (v,), given)
                    ce = conditional(je, (v,), given)
                    if co is UNDEFINED or ce is UNDEFINED:
                        continue
                    assert all(abs(co[c] - ce[c]) < 1e-9 for c in co)

    def test_support_subset_under_parent_child_positivity(self):
        d, strats = f1()  # all-positive tables: parent-child positivity holds
        for s in strats.values():
            assert support(d, s).issubset(support(d, "obs"))


class TestExactSource:
    def test_conditional_matches_joint(self):
        d, _ = f1()
        src = ExactSource(d)
        j = observable_joint(d, "obs")
        cond = src.l_conditional(2, ("1", "0"))
        want = conditional(j, ("L2",), {"L1": "1", "A1": "0"})
        assert np.allclose(cond, [want[("0",)], want[("1",)]])

    def test_support_matches_module_level(self):
        d, _ = f2()
        assert set(ExactSource(d).support().histories) == set(
            support(d, "obs").histories
        )
