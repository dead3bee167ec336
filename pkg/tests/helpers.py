"""Random instance generators shared across the test modules.

Tables are drawn from a symmetric Dirichlet with unit concentration under
seeded counter-based generators, so every suite is deterministic and the
parameters are generic (no accidental independencies).
"""

from __future__ import annotations

import itertools

import numpy as np

from regimes.graph import Dag
from regimes.model import Cpt, InfluenceDiagram, Policy, Strategy, Variable

B = ("0", "1")


def rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def random_dag(gen: np.random.Generator, n_nodes: int, p_edge: float = 0.4) -> Dag:
    names = tuple(f"v{i}" for i in range(n_nodes))
    edges = [
        (names[i], names[j])
        for i in range(n_nodes)
        for j in range(i + 1, n_nodes)
        if gen.random() < p_edge
    ]
    return Dag(names, edges)


def dirichlet_row(gen: np.random.Generator, width: int) -> tuple[float, ...]:
    return tuple(map(float, gen.dirichlet(np.ones(width))))


def cpt_for(gen, child, parents, states) -> Cpt:
    configs = list(itertools.product(*(states[p] for p in parents)))
    return Cpt(
        child, tuple(parents),
        {c: dirichlet_row(gen, len(states[child])) for c in configs},
    )


def random_extended_id(
    seed: int,
    n_actions: int = 2,
    hidden_to_action: bool = False,
    hidden_only_into_actions: bool = False,
    p_edge: float = 0.6,
    p_hidden: float = 0.8,
    p_obs: float = 0.8,
) -> InfluenceDiagram:
    """Random binary diagram with interleaved hidden/observed covariates.

    ``hidden_to_action`` forces at least one hidden parent of an action
    plus a hidden arrow into the response (a genuine confounder);
    ``hidden_only_into_actions`` restricts hidden out-edges to actions and
    later hidden variables, so covariates never depend on hidden history.
    """
    gen = rng(seed)
    order: list[Variable] = []
    for i in range(1, n_actions + 1):
        if gen.random() < p_hidden:
            order.append(Variable(f"U{i}", "hid", B))
        if gen.random() < p_obs:
            order.append(Variable(f"L{i}", "obs", B))
        order.append(Variable(f"A{i}", "act", B))
    order.append(Variable("Y", "resp", B))
    names = [v.name for v in order]
    kinds = {v.name: v.kind for v in order}

    def allowed(u: str, v: str) -> bool:
        if kinds[u] == "hid":
            if hidden_only_into_actions and kinds[v] in ("obs", "resp"):
                return False
            if not hidden_to_action and not hidden_only_into_actions and kinds[v] == "act":
                return False
            if hidden_to_action and kinds[v] == "act":
                return False  # placed explicitly below
        return True

    edges = []
    for i, u in enumerate(names):
        for v in names[i + 1 :]:
            if allowed(u, v) and gen.random() < p_edge:
                edges.append((u, v))
    hidden = [v for v in names if kinds[v] == "hid"]
    if hidden_to_action and hidden:
        u = hidden[0]
        a_after = next(a for a in names if kinds[a] == "act" and names.index(a) > names.index(u))
        for e in [(u, a_after), (u, "Y")]:
            if e not in edges:
                edges.append(e)
    edges += [("sigma", v) for v in names if kinds[v] == "act"]

    states = {v: B for v in names}
    dag = Dag(("sigma",) + tuple(names), edges)
    cpts = {
        v: cpt_for(gen, v, [p for p in dag.parents(v) if p != "sigma"], states)
        for v in names
    }
    return InfluenceDiagram(order, edges, cpts)


def random_strategy(
    diagram: InfluenceDiagram, seed: int, deterministic: bool | None = None
) -> Strategy:
    """Control strategy with random policy parents and random rows."""
    gen = rng(seed)
    base = diagram.base
    policies = {}
    for i, action in enumerate(base.actions, start=1):
        preceding = base.vars[: base.after_l(i)]
        parents = tuple(p for p in preceding if gen.random() < 0.5)
        table = {}
        for config in itertools.product(*(base.states[p] for p in parents)):
            hard = deterministic if deterministic is not None else gen.random() < 0.5
            if hard:
                chosen = gen.integers(len(base.states[action]))
                table[config] = tuple(
                    1.0 if j == chosen else 0.0
                    for j in range(len(base.states[action]))
                )
            else:
                table[config] = dirichlet_row(gen, len(base.states[action]))
        policies[action] = Policy(parents, table)
    return Strategy(f"rand{seed}", policies)
