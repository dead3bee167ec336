"""Small reference diagrams used by the test suite and the shipped models.

Each builder returns ``(diagram, strategies)``.  Table entries are drawn
from a symmetric Dirichlet with unit concentration under a seeded
counter-based generator, so every build is reproducible and generic
(strictly positive, no accidental independencies).
"""

from __future__ import annotations

import numpy as np

from .model import Cpt, InfluenceDiagram, Policy, Strategy, Variable

B = ("0", "1")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def _rows(rng, parents_cards: int, width: int) -> list[tuple[float, ...]]:
    return [tuple(map(float, rng.dirichlet(np.ones(width)))) for _ in range(parents_cards)]


def _cpt(rng, child: str, parents: tuple[str, ...], states) -> Cpt:
    import itertools

    configs = list(itertools.product(*(states[p] for p in parents)))
    rows = _rows(rng, len(configs), len(states[child]))
    return Cpt(child, parents, dict(zip(configs, rows)))


def _random_cpts(rng, parent_map, states) -> dict[str, Cpt]:
    return {v: _cpt(rng, v, tuple(ps), states) for v, ps in parent_map.items()}


def complete_stable(n_actions: int = 2, seed: int = 1):
    """Fully connected diagram over (L1, A1, ..., LN, AN, Y), no hidden
    variables, regime arrows into actions only.  Stable by construction."""
    names = []
    for i in range(1, n_actions + 1):
        names += [f"L{i}", f"A{i}"]
    names.append("Y")
    kinds = {v: ("act" if v.startswith("A") else "obs") for v in names}
    kinds["Y"] = "resp"
    variables = [Variable(v, kinds[v], B) for v in names]
    edges = [(u, v) for i, u in enumerate(names) for v in names[i + 1 :]]
    edges += [("sigma", a) for a in names if kinds[a] == "act"]
    states = {v: B for v in names}
    parent_map = {v: tuple(names[:i]) for i, v in enumerate(names)}
    rng = _rng(seed)
    diagram = InfluenceDiagram(variables, edges, _random_cpts(rng, parent_map, states))

    strategies = {
        "stat": Strategy.static("stat", {a: "1" for a in diagram.actions}, states),
        "dyn": Strategy(
            "dyn",
            {
                f"A{i}": Policy(
                    (f"L{i}",),
                    {("0",): (1.0, 0.0), ("1",): (0.0, 1.0)},
                )
                for i in range(1, n_actions + 1)
            },
        ),
        "mix": Strategy(
            "mix",
            {
                f"A{i}": Policy(
                    (f"L{i}",),
                    {
                        ("0",): tuple(map(float, rng.dirichlet(np.ones(2)))),
                        ("1",): tuple(map(float, rng.dirichlet(np.ones(2)))),
                    },
                )
                for i in range(1, n_actions + 1)
            },
        ),
    }
    return diagram, strategies


def f1(seed: int = 1):
    """Two-stage fully connected stable diagram."""
    return complete_stable(2, seed)


def f2(seed: int = 2, wide: bool = False):
    """Two-stage diagram with hidden confounders where plain stability
    fails but the mixed-diagram route succeeds for strategies whose second
    action looks only at the first.

    ``wide=True`` declares the second action's interventional parents as
    (A1, L2), the variant for which the stage-1 graphical check fails.
    """
    variables = [
        Variable("U1", "hid", B),
        Variable("A1", "act", B),
        Variable("U2", "hid", B),
        Variable("L2", "obs", B),
        Variable("A2", "act", B),
        Variable("Y", "resp", B),
    ]
    edges = [
        ("U1", "A1"),
        ("U1", "L2"),
        ("U2", "L2"),
        ("A1", "L2"),
        ("A1", "A2"),
        ("L2", "A2"),
        ("U2", "Y"),
        ("A2", "Y"),
        ("sigma", "A1"),
        ("sigma", "A2"),
    ]
    states = {v.name: B for v in variables}
    parent_map = {
        "U1": (),
        "A1": ("U1",),
        "U2": (),
        "L2": ("U1", "A1", "U2"),
        "A2": ("A1", "L2"),
        "Y": ("U2", "A2"),
    }
    rng = _rng(seed)
    diagram = InfluenceDiagram(
        variables,
        edges,
        _random_cpts(rng, parent_map, states),
        obs_parents={"A1": ("U1",), "A2": ("A1", "L2")},
        int_parents={"A1": (), "A2": ("A1", "L2") if wide else ("A1",)},
    )
    strategies = {
        "e2": Strategy(
            "e2",
            {
                "A1": Policy((), {(): tuple(map(float, rng.dirichlet(np.ones(2))))}),
                "A2": Policy(
                    ("A1",),
                    {
                        ("0",): tuple(map(float, rng.dirichlet(np.ones(2)))),
                        ("1",): tuple(map(float, rng.dirichlet(np.ones(2)))),
                    },
                ),
            },
        ),
        "e2wide": Strategy(
            "e2wide",
            {
                "A1": Policy((), {(): tuple(map(float, rng.dirichlet(np.ones(2))))}),
                "A2": Policy(
                    ("A1", "L2"),
                    {
                        c: tuple(map(float, rng.dirichlet(np.ones(2))))
                        for c in [("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")]
                    },
                ),
            },
        ),
    }
    return diagram, strategies


def f3(seed: int = 3):
    """Two unordered actions with a hidden common cause; only the ordering
    that intervenes on B first admits a licensed recursion."""
    variables = [
        Variable("U", "hid", B),
        Variable("B", "act", B),
        Variable("L", "obs", B),
        Variable("A", "act", B),
        Variable("Y", "resp", B),
    ]
    edges = [
        ("U", "A"),
        ("U", "L"),
        ("B", "L"),
        ("L", "Y"),
        ("A", "Y"),
        ("sigma", "A"),
        ("sigma", "B"),
    ]
    states = {v.name: B for v in variables}
    parent_map = {"U": (), "B": (), "L": ("U", "B"), "A": ("U",), "Y": ("L", "A")}
    rng = _rng(seed)
    diagram = InfluenceDiagram(variables, edges, _random_cpts(rng, parent_map, states))
    strategies = {
        "e": Strategy(
            "e",
            {
                "B": Policy((), {(): tuple(map(float, rng.dirichlet(np.ones(2))))}),
                "A": Policy(
                    ("L",),
                    {
                        ("0",): tuple(map(float, rng.dirichlet(np.ones(2)))),
                        ("1",): tuple(map(float, rng.dirichlet(np.ones(2)))),
                    },
                ),
            },
        )
    }
    return diagram, strategies


def f4(seed: int = 4, two_actions: bool = False):
    """Single confounded action: a hidden variable drives both the
    observational action choice and the response.  With ``two_actions``
    a second confounded action follows, so no admissible ordering exists."""
    variables = [
        Variable("U", "hid", B),
        Variable("A1", "act", B),
    ]
    edges = [("U", "A1"), ("U", "Y"), ("A1", "Y"), ("sigma", "A1")]
    parent_map = {"U": (), "A1": ("U",)}
    if two_actions:
        variables += [
            Variable("L2", "obs", B),
            Variable("A2", "act", B),
        ]
        edges += [
            ("A1", "L2"),
            ("L2", "A2"),
            ("U", "A2"),
            ("A2", "Y"),
            ("sigma", "A2"),
        ]
        parent_map.update({"L2": ("A1",), "A2": ("U", "L2"), "Y": ("U", "A1", "A2")})
    else:
        parent_map["Y"] = ("U", "A1")
    variables.append(Variable("Y", "resp", B))
    states = {v.name: B for v in variables}
    rng = _rng(seed)
    diagram = InfluenceDiagram(variables, edges, _random_cpts(rng, parent_map, states))
    strategies = {
        "e": Strategy(
            "e",
            {
                a: Policy((), {(): tuple(map(float, rng.dirichlet(np.ones(2))))})
                for a in diagram.actions
            },
        ),
        "pick1": Strategy.static("pick1", {a: "1" for a in diagram.actions}, states),
    }
    return diagram, strategies


def f5(seed: int = 5):
    """Two actions where the stage-one covariate pool is separation
    redundant: the constructed per-stage pools give ({Z}, {X}) but the
    pruned sequence (-, {X}) is already admissible."""
    variables = [
        Variable("Z", "obs", B),
        Variable("A1", "act", B),
        Variable("X", "obs", B),
        Variable("A2", "act", B),
        Variable("Y", "resp", B),
    ]
    edges = [
        ("Z", "X"),
        ("A1", "X"),
        ("X", "A2"),
        ("X", "Y"),
        ("A2", "Y"),
        ("sigma", "A1"),
        ("sigma", "A2"),
    ]
    states = {v.name: B for v in variables}
    parent_map = {"Z": (), "A1": (), "X": ("Z", "A1"), "A2": ("X",), "Y": ("X", "A2")}
    rng = _rng(seed)
    diagram = InfluenceDiagram(variables, edges, _random_cpts(rng, parent_map, states))
    strategies = {
        "e": Strategy(
            "e",
            {
                "A1": Policy((), {(): tuple(map(float, rng.dirichlet(np.ones(2))))}),
                "A2": Policy(
                    ("X",),
                    {
                        ("0",): tuple(map(float, rng.dirichlet(np.ones(2)))),
                        ("1",): tuple(map(float, rng.dirichlet(np.ones(2)))),
                    },
                ),
            },
        )
    }
    return diagram, strategies
