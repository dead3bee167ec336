"""Backward evaluation of strategy consequences from observational ingredients.

The evaluator alternates an action-averaging step (strategy probabilities)
and a covariate-averaging step (observational conditionals) from full
histories down to the empty one.  It consumes any conditional source that
exposes the observable stage structure, per-stage block conditionals and a
possibility test, so the same engine runs on exact model conditionals and
on frequency estimates.  The module also builds the auxiliary mixed-regime
diagrams and artificial joint distributions used to justify the recursion
when plain stability fails, together with their graphical and numeric
checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputError, PositivityError
from .graph import Dag, separated
from .model import (
    SIGMA,
    UNDEFINED,
    ExactSource,
    InfluenceDiagram,
    InfoBase,
    JointTable,
    PartialHistory,
    Strategy,
    SupportSet,
    conditional,
    consequence_direct,
    joint_with_action_selector,
    observable_joint,
    response_weights,
    support_of_joint,
)

TOL = 1e-9


@dataclass(frozen=True)
class GammaSupport:
    """Live recursion frontier: observationally possible histories whose
    action prefix has positive strategy probability."""

    base: InfoBase
    histories: frozenset

    def __contains__(self, h) -> bool:
        return tuple(h) in self.histories

    def __iter__(self):
        return iter(sorted(self.histories, key=lambda h: (len(h), h)))

    def __len__(self):
        return len(self.histories)


@dataclass
class RecursionTable:
    """Values f(h) computed over the live frontier.

    Histories absent from ``values`` were pruned because they are
    observationally impossible or off-strategy; their value is 0 by
    convention.
    """

    base: InfoBase
    strategy: str
    source: str
    values: dict = field(default_factory=dict)

    @property
    def root(self) -> float:
        return self.values[()]


def _normalize_k(base: InfoBase, k):
    if callable(k):
        return k
    weights = response_weights(base, k)
    y_index = {s: i for i, s in enumerate(base.states[base.response])}
    return lambda h: float(weights[y_index[h[-1]]])


def recursion_table(source, strategy: Strategy, k) -> RecursionTable:
    """Run the backward recursion and keep every computed value."""
    base = source.base
    kfun = _normalize_k(base, k)
    table = RecursionTable(base, strategy.name, getattr(source, "label", "?"))
    positions = {
        a: tuple(base.position(p) for p in strategy.policies[a].parents)
        for a in base.actions
    }
    action_states = {a: base.states[a] for a in base.actions}

    def value_before_block(i: int, h: PartialHistory) -> float:
        # h = (lbar_{i-1}, abar_{i-1}); the i-th covariate block comes next.
        cond = source.l_conditional(i, h)
        if cond is UNDEFINED:
            raise PositivityError(h)
        total = 0.0
        for config, p in zip(base.block_configs(i), cond):
            if p <= 0.0:
                continue
            total += float(p) * value_after_block(i, h + config)
        table.values[h] = total
        return total

    def value_after_block(i: int, h: PartialHistory) -> float:
        # h = (lbar_i, abar_{i-1}); full history when i == N+1.
        if i == base.n + 1:
            v = kfun(h)
            table.values[h] = v
            return v
        action = base.action(i)
        row = strategy.policies[action].row(tuple(h[p] for p in positions[action]))
        total = 0.0
        for state, p in zip(action_states[action], row):
            if p <= 0.0:
                continue
            h2 = h + (state,)
            if not source.possible(h2):
                continue  # gamma = 0: contributes f = 0 by convention
            total += float(p) * value_before_block(i + 1, h2)
        table.values[h] = total
        return total

    value_before_block(1, ())
    return table


def g_recursion(source, strategy: Strategy, k) -> float:
    """Consequence of the strategy from observational ingredients."""
    return recursion_table(source, strategy, k).root


def gamma_support(obs_support: SupportSet, strategy: Strategy) -> GammaSupport:
    """Histories in the observational support whose action prefix the
    strategy can generate."""
    base = obs_support.base
    positions = {
        a: tuple(base.position(p) for p in strategy.policies[a].parents)
        for a in base.actions
    }
    state_pos = {a: {s: j for j, s in enumerate(base.states[a])} for a in base.actions}
    live = set()
    for h in obs_support.histories:
        ok = True
        for i in range(1, base.n + 1):
            cut = base.after_a(i)
            if len(h) < cut:
                break
            action = base.action(i)
            row = strategy.policies[action].row(tuple(h[p] for p in positions[action]))
            if row[state_pos[action][h[cut - 1]]] <= 0.0:
                ok = False
                break
        if ok:
            live.add(h)
    return GammaSupport(base, frozenset(live))


def check_cond6(obs_support: SupportSet, strategy: Strategy):
    """Whether every strategy-positive extension of a live history is
    observationally possible.  Returns (verdict, first offending history)."""
    base = obs_support.base
    gamma = gamma_support(obs_support, strategy)
    positions = {
        a: tuple(base.position(p) for p in strategy.policies[a].parents)
        for a in base.actions
    }
    for h in gamma:
        for i in range(1, base.n + 1):
            if len(h) == base.after_l(i):
                action = base.action(i)
                row = strategy.policies[action].row(tuple(h[p] for p in positions[action]))
                for state, p in zip(base.states[action], row):
                    if p > 0.0 and h + (state,) not in obs_support:
                        return False, h + (state,)
    return True, None


def construct_p_i(diagram: InfluenceDiagram, strategy: Strategy, i: int) -> JointTable:
    """Artificial joint: the first i actions follow the observational
    tables, the remaining ones follow the strategy."""
    if not 0 <= i <= diagram.n:
        raise InputError(f"stage index {i} outside 0..{diagram.n}")
    diagram.validate_strategy(strategy)
    order = {a: j + 1 for j, a in enumerate(diagram.actions)}
    return joint_with_action_selector(
        diagram, lambda a: "obs" if order[a] <= i else strategy
    )


def build_dag_i(
    diagram: InfluenceDiagram, i: int, action_order: tuple[str, ...] | None = None
) -> Dag:
    """Mixed-regime diagram: actions before stage i keep their
    observational parents, actions after it their interventional parents,
    and the stage-i action receives the only arrow out of the regime node."""
    actions = tuple(action_order) if action_order else diagram.actions
    if set(actions) != set(diagram.actions):
        raise InputError("action_order must be a permutation of the diagram's actions")
    if not 0 <= i <= len(actions) + 1:
        raise InputError(f"stage index {i} outside 0..{len(actions) + 1}")
    assignments = {}
    for j, a in enumerate(actions, start=1):
        if j < i:
            assignments[a] = diagram.obs_parents[a]
        elif j > i:
            assignments[a] = diagram.int_parents[a]
        else:
            assignments[a] = diagram.domain_parents[a] + (SIGMA,)
    return diagram.dag.with_parents(assignments)


def build_dag_i_prime(
    diagram: InfluenceDiagram, i: int, action_order: tuple[str, ...] | None = None
) -> Dag:
    """Variant of the stage-i diagram without the regime node and without
    arrows out of the stage-i action."""
    actions = tuple(action_order) if action_order else diagram.actions
    if not 1 <= i <= len(actions):
        raise InputError(f"stage index {i} outside 1..{len(actions)}")
    d = build_dag_i(diagram, i, actions).drop([SIGMA])
    a_i = actions[i - 1]
    return Dag(d.nodes, [(u, v) for u, v in d.edges if u != a_i])


@dataclass(frozen=True)
class GraphsepReport:
    stages: tuple[tuple[int, bool], ...]

    @property
    def overall(self) -> bool:
        return all(ok for _, ok in self.stages)

    def stage(self, i: int) -> bool:
        return dict(self.stages)[i]


def check_graphsep(diagram: InfluenceDiagram, strategy: Strategy | None = None) -> GraphsepReport:
    """Per-stage separation of the response from the regime node in the
    mixed diagrams; licenses the recursion without plain stability."""
    if strategy is not None:
        diagram.validate_strategy(strategy)
        for a, pol in strategy.policies.items():
            extra = set(pol.parents) - set(diagram.int_parents[a])
            if extra:
                raise InputError(
                    f"strategy {strategy.name!r} lets {a} depend on {sorted(extra)}, "
                    f"outside its declared int-parents"
                )
    base = diagram.base
    y = diagram.response
    stages = []
    for i in range(1, diagram.n + 1):
        cond = [v for j in range(1, i + 1) for v in base.block(j)]
        cond += [base.action(j) for j in range(1, i + 1)]
        d_i = build_dag_i(diagram, i)
        ok = separated(d_i, {y}, {SIGMA}, cond)
        d_ip = build_dag_i_prime(diagram, i)
        ok_prime = separated(d_ip, {y}, {base.action(i)}, cond[:-1])
        assert ok == ok_prime, f"stage {i}: the two separation tests disagree"
        stages.append((i, ok))
    return GraphsepReport(tuple(stages))


@dataclass(frozen=True)
class GeneralConditionsReport:
    """Numeric verification of the conditions licensing the recursion."""

    support_biconditional: bool
    l_factors: bool
    action_factors: bool
    y_bridge: bool
    y_bridge_failures: tuple  # (stage, history) of the first few mismatches
    positivity: bool  # strategy-positive extensions stay observationally possible
    consequence_delta: float | None  # max |recursion - oracle| when everything holds

    @property
    def overall(self) -> bool:
        return (
            self.support_biconditional
            and self.l_factors
            and self.action_factors
            and self.y_bridge
            and self.positivity
        )


def _history_conditional(joint: JointTable, base: InfoBase, vars_out, h: PartialHistory):
    return conditional(joint, vars_out, dict(zip(base.vars, h)))


def verify_general_conditions(
    diagram: InfluenceDiagram, strategy: Strategy, tol: float = TOL
) -> GeneralConditionsReport:
    """Check the artificial-distribution route stage by stage.

    All comparisons run only over conditioning histories that are live
    under both the relevant artificial distribution and the strategy.
    When every condition holds, the recursion output is compared with the
    direct oracle for each response state.
    """
    base = diagram.base
    source = ExactSource(diagram)
    obs_support = source.support()
    gamma = gamma_support(obs_support, strategy)
    obs_margin = observable_joint(diagram, "obs")

    p_tables = {i: construct_p_i(diagram, strategy, i) for i in range(0, diagram.n + 1)}
    p_margins = {i: t.marginal(base.vars) for i, t in p_tables.items()}
    p_supports = {i: support_of_joint(t, base) for i, t in p_tables.items()}

    # Support biconditional: after stage i, the artificial distribution and
    # the observational one agree on which (lbar_i, abar_i) are possible.
    support_ok = True
    for i in range(1, base.n + 1):
        m = base.after_a(i)
        in_p = {h for h in p_supports[i].histories if len(h) == m}
        in_o = {h for h in obs_support.histories if len(h) == m}
        if in_p != in_o:
            support_ok = False

    l_ok = True
    a_ok = True
    for i in range(1, base.n + 2):
        m = base.before_l(i)
        for h in (h for h in gamma.histories if len(h) == m):
            if h not in p_supports[i - 1]:
                continue
            left = _history_conditional(p_margins[i - 1], base, base.block(i), h)
            right = _history_conditional(obs_margin, base, base.block(i), h)
            if left is UNDEFINED or right is UNDEFINED:
                l_ok = l_ok and (left is right)
                continue
            if any(abs(left[c] - right[c]) > tol for c in left):
                l_ok = False
    for i in range(1, base.n + 1):
        m = base.after_l(i)
        action = base.action(i)
        pol = strategy.policies[action]
        ppos = tuple(base.position(p) for p in pol.parents)
        for h in (h for h in gamma.histories if len(h) == m):
            if h not in p_supports[i - 1]:
                continue
            left = _history_conditional(p_margins[i - 1], base, (action,), h)
            if left is UNDEFINED:
                continue
            row = pol.row(tuple(h[p] for p in ppos))
            if any(
                abs(left[(s,)] - row[j]) > tol
                for j, s in enumerate(base.states[action])
            ):
                a_ok = False

    y_ok = True
    y_failures = []
    for i in range(1, base.n + 1):
        m = base.after_a(i)
        for h in (h for h in gamma.histories if len(h) == m):
            if h not in p_supports[i - 1]:
                continue
            left = _history_conditional(p_margins[i - 1], base, (base.response,), h)
            right = _history_conditional(p_margins[i], base, (base.response,), h)
            if left is UNDEFINED or right is UNDEFINED:
                continue
            if any(abs(left[c] - right[c]) > tol for c in left):
                y_ok = False
                if len(y_failures) < 3:
                    y_failures.append((i, h))

    pos_ok, _ = check_cond6(obs_support, strategy)

    delta = None
    if support_ok and l_ok and a_ok and y_ok and pos_ok:
        delta = 0.0
        for y_state in base.states[base.response]:
            k = {s: 1.0 if s == y_state else 0.0 for s in base.states[base.response]}
            lhs = g_recursion(source, strategy, k)
            rhs = consequence_direct(diagram, strategy, k)
            delta = max(delta, abs(lhs - rhs))
        assert delta <= 1e-9, f"recursion disagrees with the oracle by {delta}"

    return GeneralConditionsReport(
        support_ok, l_ok, a_ok, y_ok, tuple(y_failures), pos_ok, delta
    )
