"""Influence-diagram data model with a distinguished regime node.

A diagram couples a DAG over typed domain variables (observables, hidden
variables, actions, one response) with one conditional probability table
per non-action variable and an observational table per action.  A
``Strategy`` supplies the interventional action mechanism; selecting the
string ``"obs"`` or a strategy as the regime fixes one exact joint
distribution, from which marginals, conditionals, supports and response
expectations are computed by direct enumeration.  These exact quantities
are the oracles that the recursive evaluator is tested against.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import CapacityError, InputError, ModelError, PolicyError
from .graph import Dag

SIGMA = "sigma"
KINDS = ("obs", "hid", "act", "resp")
ROW_SUM_TOL = 1e-9
MAX_JOINT_CELLS = 1 << 22

_FORBIDDEN_CHARS = set(" \t,:|#=;")


class _Undefined:
    """Marker for conditionals on zero-probability events."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNDEFINED"


UNDEFINED = _Undefined()


def _check_token(text: str, what: str) -> str:
    if not text or any(ch in _FORBIDDEN_CHARS for ch in text):
        raise ModelError(f"{what} {text!r} is empty or contains a reserved character")
    return text


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    states: tuple[str, ...]

    def __post_init__(self):
        _check_token(self.name, "variable name")
        if self.name == SIGMA:
            raise ModelError(f"{SIGMA!r} is reserved for the regime node")
        if self.kind not in KINDS:
            raise ModelError(f"unknown kind {self.kind!r} for variable {self.name}")
        if len(self.states) < 1:
            raise ModelError(f"variable {self.name} needs at least one state")
        for s in self.states:
            _check_token(s, f"state of {self.name}")
        if len(set(self.states)) != len(self.states):
            raise ModelError(f"duplicate state label on variable {self.name}")


@dataclass(frozen=True)
class Cpt:
    """Distribution of ``child`` for every configuration of ``parents``."""

    child: str
    parents: tuple[str, ...]
    table: Mapping[tuple[str, ...], tuple[float, ...]]

    def validate(self, states: Mapping[str, tuple[str, ...]]) -> None:
        expected = list(itertools.product(*(states[p] for p in self.parents)))
        if set(self.table) != set(expected):
            missing = [c for c in expected if c not in self.table]
            extra = [c for c in self.table if c not in set(expected)]
            raise ModelError(
                f"cpt for {self.child}: missing rows {missing[:3]}, unknown rows {extra[:3]}"
            )
        width = len(states[self.child])
        for config, row in self.table.items():
            if len(row) != width:
                raise ModelError(f"cpt for {self.child}: row {config} has {len(row)} entries, want {width}")
            if any(p < 0.0 or p > 1.0 for p in row):
                raise ModelError(f"cpt for {self.child}: row {config} has entries outside [0, 1]")
            if abs(sum(row) - 1.0) > ROW_SUM_TOL:
                raise ModelError(f"cpt for {self.child}: row {config} sums to {sum(row)!r}")

    def row(self, config: tuple[str, ...]) -> tuple[float, ...]:
        try:
            return self.table[config]
        except KeyError:
            raise ModelError(f"cpt for {self.child}: no row for {config}") from None

    def lift(self, parents: tuple[str, ...], states: Mapping[str, tuple[str, ...]]) -> "Cpt":
        """Re-key to a parent superset; added parents do not affect the rows."""
        if parents == self.parents:
            return self
        pick = [parents.index(p) for p in self.parents]
        return Cpt(self.child, parents, {
            config: self.table[tuple(config[i] for i in pick)]
            for config in itertools.product(*(states[p] for p in parents))
        })


@dataclass(frozen=True)
class Policy:
    """One action's interventional mechanism: rows over policy-parent configs."""

    parents: tuple[str, ...]
    table: Mapping[tuple[str, ...], tuple[float, ...]]

    def row(self, config: tuple[str, ...]) -> tuple[float, ...]:
        try:
            return self.table[config]
        except KeyError:
            raise PolicyError(f"no policy row for parent configuration {config}") from None


@dataclass(frozen=True)
class Strategy:
    name: str
    policies: Mapping[str, Policy]

    @classmethod
    def static(cls, name: str, assignments: Mapping[str, str], states: Mapping[str, tuple[str, ...]]) -> "Strategy":
        """Fixed action sequence, ignoring all observations."""
        policies = {}
        for action, chosen in assignments.items():
            row = tuple(1.0 if s == chosen else 0.0 for s in states[action])
            if not any(row):
                raise PolicyError(f"{chosen!r} is not a state of {action}")
            policies[action] = Policy((), {(): row})
        return cls(name, policies)


Regime = "str | Strategy"
PartialHistory = tuple  # labels of a boundary prefix of the observable base


@dataclass(frozen=True)
class InfoBase:
    """Stage structure of the observable information base.

    ``vars`` flattens the base in order; ``lblocks`` holds the N+1 groups
    of observables (the last one is the response alone) and ``actions``
    the N action names that interleave them.
    """

    vars: tuple[str, ...]
    states: Mapping[str, tuple[str, ...]]
    lblocks: tuple[tuple[str, ...], ...]
    actions: tuple[str, ...]

    def __post_init__(self):
        pos = {v: i for i, v in enumerate(self.vars)}
        before_l, after_l, after_a = [], [], []
        m = 0
        for i, block in enumerate(self.lblocks):
            before_l.append(m)
            m += len(block)
            after_l.append(m)
            if i < len(self.actions):
                m += 1
                after_a.append(m)
        object.__setattr__(self, "_pos", pos)
        object.__setattr__(self, "_before_l", tuple(before_l))
        object.__setattr__(self, "_after_l", tuple(after_l))
        object.__setattr__(self, "_after_a", tuple(after_a))
        bounds = {0, *after_l, *after_a}
        object.__setattr__(self, "boundaries", tuple(sorted(bounds)))

    @property
    def n(self) -> int:
        return len(self.actions)

    @property
    def response(self) -> str:
        return self.vars[-1]

    def position(self, var: str) -> int:
        try:
            return self._pos[var]
        except KeyError:
            raise InputError(f"{var!r} is not an observable variable") from None

    def block(self, i: int) -> tuple[str, ...]:
        return self.lblocks[i - 1]

    def action(self, i: int) -> str:
        return self.actions[i - 1]

    def before_l(self, i: int) -> int:
        return self._before_l[i - 1]

    def after_l(self, i: int) -> int:
        return self._after_l[i - 1]

    def after_a(self, i: int) -> int:
        return self._after_a[i - 1]

    def block_configs(self, i: int):
        return itertools.product(*(self.states[v] for v in self.block(i)))

    def check_history(self, h: PartialHistory) -> None:
        if len(h) not in self.boundaries:
            raise InputError(f"history length {len(h)} does not end on a stage boundary")
        for var, label in zip(self.vars, h):
            if label not in self.states[var]:
                raise InputError(f"{label!r} is not a state of {var}")


@dataclass(frozen=True)
class SupportSet:
    """Partial histories with positive probability under one regime."""

    base: InfoBase
    histories: frozenset

    def __contains__(self, h) -> bool:
        return tuple(h) in self.histories

    def __iter__(self):
        return iter(sorted(self.histories, key=lambda h: (len(h), h)))

    def __len__(self):
        return len(self.histories)

    def issubset(self, other: "SupportSet") -> bool:
        return self.histories <= other.histories


class InfluenceDiagram:
    """Validated diagram: typed variables, DAG with the regime node, tables.

    ``variables`` fixes the total order (the extended information base);
    the DAG must respect it, arrows out of the regime node may only enter
    actions, and the single response variable comes last.  Per-action
    parent subsets ``obs_parents`` and ``int_parents`` describe which
    parents the observational and interventional mechanisms may use; when
    omitted they default to all domain parents and all non-hidden domain
    parents respectively, and the interventional set is folded into the
    observational one so that int_parents <= obs_parents <= dag parents.
    """

    def __init__(
        self,
        variables: Iterable[Variable],
        edges: Iterable[tuple[str, str]],
        cpts: Mapping[str, Cpt],
        obs_parents: Mapping[str, Iterable[str]] | None = None,
        int_parents: Mapping[str, Iterable[str]] | None = None,
    ):
        self.variables = tuple(variables)
        names = tuple(v.name for v in self.variables)
        if len(set(names)) != len(names):
            raise ModelError("duplicate variable name")
        self.order = names
        self.index = {v: i for i, v in enumerate(names)}
        self.kinds = {v.name: v.kind for v in self.variables}
        self.states = {v.name: v.states for v in self.variables}

        responses = [v.name for v in self.variables if v.kind == "resp"]
        if len(responses) != 1:
            raise ModelError(f"need exactly one response variable, found {len(responses)}")
        self.response = responses[0]
        if names[-1] != self.response:
            raise ModelError("the response variable must come last in the order")

        self.actions = tuple(v.name for v in self.variables if v.kind == "act")
        self.hidden = tuple(v.name for v in self.variables if v.kind == "hid")
        self.observables = tuple(v.name for v in self.variables if v.kind in ("obs", "resp"))
        if self.actions:
            last_a = self.index[self.actions[-1]]
            stray = [v for v in self.observables[:-1] if self.index[v] > last_a]
            if stray:
                raise ModelError(f"only the response may follow the last action; found {stray}")

        self.dag = Dag((SIGMA,) + names, edges)
        for u, v in self.dag.edges:
            if v == SIGMA:
                raise ModelError("the regime node has no parents")
            if u == SIGMA:
                if self.kinds[v] != "act":
                    raise ModelError(f"arrow {SIGMA} -> {v} enters a non-action")
            elif self.index[u] >= self.index[v]:
                raise ModelError(f"edge {u} -> {v} goes backward in the declared order")

        self.domain_parents = {
            v: tuple(p for p in self.dag.parents(v) if p != SIGMA) for v in names
        }

        self.obs_parents: dict[str, tuple[str, ...]] = {}
        self.int_parents: dict[str, tuple[str, ...]] = {}
        obs_parents = dict(obs_parents or {})
        int_parents = dict(int_parents or {})
        for extra in set(obs_parents) | set(int_parents):
            if extra not in self.actions:
                raise ModelError(f"parent annotation on non-action {extra!r}")
        for a in self.actions:
            dom = self.domain_parents[a]
            op = self._sorted_subset(obs_parents.get(a, dom), dom, f"obs-parents of {a}")
            default_int = tuple(p for p in dom if self.kinds[p] != "hid")
            ip = self._sorted_subset(int_parents.get(a, default_int), dom, f"int-parents of {a}")
            bad = [p for p in ip if self.kinds[p] == "hid"]
            if bad:
                raise ModelError(f"int-parents of {a} include hidden variables {bad}")
            if not set(ip) <= set(op):
                op = self.sort(set(op) | set(ip))
            self.obs_parents[a] = op
            self.int_parents[a] = ip

        self.cpts: dict[str, Cpt] = {}
        for v in names:
            cpt = cpts.get(v)
            if cpt is None:
                raise ModelError(f"no cpt for variable {v}")
            want = self.obs_parents[v] if v in self.obs_parents else self.domain_parents[v]
            if set(cpt.parents) - set(want):
                raise ModelError(
                    f"cpt for {v} conditions on {sorted(set(cpt.parents) - set(want))}, "
                    f"not among its parents"
                )
            if set(cpt.parents) != set(want):
                cpt = cpt.lift(want, self.states)
            cpt.validate(self.states)
            self.cpts[v] = cpt

        lblocks, current = [], []
        for v in names:
            if self.kinds[v] == "act":
                lblocks.append(tuple(current))
                current = []
            elif self.kinds[v] in ("obs", "resp"):
                current.append(v)
        lblocks.append(tuple(current))
        seen = tuple(v for v in names if self.kinds[v] != "hid")
        self.base = InfoBase(seen, self.states, tuple(lblocks), self.actions)

    def _sorted_subset(self, got, dom, what) -> tuple[str, ...]:
        got = tuple(got)
        if len(set(got)) != len(got):
            raise ModelError(f"{what}: duplicate entry")
        extra = set(got) - set(dom)
        if extra:
            raise ModelError(f"{what}: {sorted(extra)} are not dag-parents")
        return self.sort(got)

    def sort(self, vars: Iterable[str]) -> tuple[str, ...]:
        return tuple(sorted(set(vars), key=self.index.__getitem__))

    @property
    def n(self) -> int:
        return len(self.actions)

    def cards(self) -> tuple[int, ...]:
        return tuple(len(self.states[v]) for v in self.order)

    def __eq__(self, other):
        return (
            isinstance(other, InfluenceDiagram)
            and self.variables == other.variables
            and self.dag.edges == other.dag.edges
            and self.obs_parents == other.obs_parents
            and self.int_parents == other.int_parents
            and self.cpts == other.cpts
        )

    def __repr__(self):
        return f"InfluenceDiagram({len(self.order)} variables, {len(self.actions)} actions)"

    def validate_strategy(self, strategy: Strategy) -> None:
        """Raise PolicyError unless the strategy is a complete control strategy."""
        for a in self.actions:
            if a not in strategy.policies:
                raise PolicyError(f"strategy {strategy.name!r} has no policy for action {a}")
        for a, pol in strategy.policies.items():
            if a not in self.actions:
                raise PolicyError(f"strategy {strategy.name!r} assigns unknown action {a!r}")
            apos = self.index[a]
            for p in pol.parents:
                if p not in self.index:
                    raise PolicyError(f"policy for {a} uses unknown variable {p!r}")
                if self.kinds[p] == "hid":
                    raise PolicyError(f"policy for {a} depends on hidden variable {p}")
                if self.kinds[p] == "act" and self.index[p] >= apos:
                    raise PolicyError(f"policy for {a} uses non-preceding action {p}")
                if self.kinds[p] in ("obs", "resp") and self.index[p] >= apos:
                    raise PolicyError(f"policy for {a} uses non-preceding variable {p}")
            expected = set(itertools.product(*(self.states[p] for p in pol.parents)))
            if set(pol.table) != expected:
                raise PolicyError(
                    f"policy for {a} must have one row per parent configuration "
                    f"({len(pol.table)} given, {len(expected)} required)"
                )
            width = len(self.states[a])
            for config, row in pol.table.items():
                if len(row) != width or any(p < 0.0 or p > 1.0 for p in row):
                    raise PolicyError(f"policy for {a}: bad row at {config}")
                if abs(sum(row) - 1.0) > ROW_SUM_TOL:
                    raise PolicyError(f"policy for {a}: row {config} sums to {sum(row)!r}")


@dataclass(eq=False)
class JointTable:
    """Dense exact joint distribution in the diagram's variable order."""

    names: tuple[str, ...]
    states: tuple[tuple[str, ...], ...]
    probs: np.ndarray

    def __post_init__(self):
        self._axis = {v: i for i, v in enumerate(self.names)}
        self._sindex = [
            {s: j for j, s in enumerate(states)} for states in self.states
        ]

    def total(self) -> float:
        return float(self.probs.sum())

    def _locate(self, assignment: Mapping[str, str]):
        idx = [slice(None)] * len(self.names)
        for var, label in assignment.items():
            if var not in self._axis:
                raise InputError(f"unknown variable {var!r}")
            ax = self._axis[var]
            if label not in self._sindex[ax]:
                raise InputError(f"{label!r} is not a state of {var}")
            idx[ax] = self._sindex[ax][label]
        return tuple(idx)

    def prob(self, assignment: Mapping[str, str]) -> float:
        return float(self.probs[self._locate(assignment)].sum())

    def marginal(self, names: Iterable[str]) -> "JointTable":
        """Marginal over ``names``; axes stay in this table's variable order."""
        keep = [v for v in self.names if v in set(names)]
        missing = set(names) - set(keep)
        if missing:
            raise InputError(f"unknown variables {sorted(missing)}")
        drop = tuple(i for i, v in enumerate(self.names) if v not in set(keep))
        return JointTable(
            tuple(keep),
            tuple(self.states[self._axis[v]] for v in keep),
            self.probs.sum(axis=drop) if drop else self.probs.copy(),
        )

    def reordered(self, names: Iterable[str]) -> "JointTable":
        """Same table with axes permuted into the given order."""
        names = tuple(names)
        if sorted(names) != sorted(self.names):
            raise InputError("reordering must list every variable exactly once")
        perm = tuple(self._axis[v] for v in names)
        return JointTable(
            names,
            tuple(self.states[i] for i in perm),
            np.transpose(self.probs, perm),
        )


def _check_capacity(cards: Iterable[int]) -> None:
    if math.prod(cards) > MAX_JOINT_CELLS:
        raise CapacityError(
            f"joint table would need {math.prod(cards)} cells (cap {MAX_JOINT_CELLS})"
        )


def _factor_array(
    diagram: InfluenceDiagram, child: str, parents: tuple[str, ...],
    rows: Callable[[tuple[str, ...]], tuple[float, ...]],
) -> tuple[tuple[str, ...], np.ndarray]:
    """Dense factor with axes (parents sorted by diagram order, child)."""
    axis_vars = diagram.sort(parents) + (child,)
    shape = tuple(len(diagram.states[v]) for v in axis_vars)
    pick = [axis_vars.index(p) for p in parents]
    flat = [
        rows(tuple(config[i] for i in pick))
        for config in itertools.product(*(diagram.states[p] for p in axis_vars[:-1]))
    ]
    return axis_vars, np.asarray(flat).reshape(shape)


def _broadcast(diagram: InfluenceDiagram, axis_vars, arr: np.ndarray) -> np.ndarray:
    shape = [1] * len(diagram.order)
    for av in axis_vars:
        shape[diagram.index[av]] = len(diagram.states[av])
    return arr.reshape(shape)


def _nonaction_product(diagram: InfluenceDiagram) -> np.ndarray:
    """Product of all non-action factors; cached, the tables never change."""
    cached = getattr(diagram, "_nonaction_cache", None)
    if cached is None:
        probs = np.ones(diagram.cards())
        for v in diagram.order:
            if diagram.kinds[v] == "act":
                continue
            cpt = diagram.cpts[v]
            probs *= _broadcast(diagram, *_factor_array(diagram, v, cpt.parents, cpt.row))
        diagram._nonaction_cache = probs
        cached = probs
    return cached


def _joint(diagram: InfluenceDiagram, action_factor) -> JointTable:
    _check_capacity(diagram.cards())
    probs = _nonaction_product(diagram).copy()
    for v in diagram.actions:
        parents, rows = action_factor(v)
        probs *= _broadcast(diagram, *_factor_array(diagram, v, parents, rows))
    return JointTable(diagram.order, tuple(diagram.states[v] for v in diagram.order), probs)


def joint_with_action_selector(diagram: InfluenceDiagram, selector) -> JointTable:
    """Joint where ``selector(action)`` picks 'obs' or a Strategy per action."""

    def action_factor(a):
        chosen = selector(a)
        if chosen == "obs":
            cpt = diagram.cpts[a]
            return cpt.parents, cpt.row
        pol = chosen.policies[a]
        return pol.parents, pol.row

    return _joint(diagram, action_factor)


def joint_distribution(diagram: InfluenceDiagram, regime: Regime) -> JointTable:
    """Exact joint over all domain variables under one regime."""
    if regime == "obs":
        return joint_with_action_selector(diagram, lambda a: "obs")
    diagram.validate_strategy(regime)
    return joint_with_action_selector(diagram, lambda a: regime)


def observable_joint(diagram: InfluenceDiagram, regime: Regime) -> JointTable:
    """Joint over the observable information base (hidden variables summed out)."""
    return joint_distribution(diagram, regime).marginal(diagram.base.vars)


def conditional(joint: JointTable, target: Iterable[str], given: Mapping[str, str]):
    """Normalized slice over ``target`` configurations, or UNDEFINED.

    Returns a mapping from target configuration (in the joint's variable
    order) to probability when the conditioning event has positive mass;
    the UNDEFINED marker otherwise.
    """
    target = [v for v in joint.names if v in set(target)]
    if set(target) & set(given):
        raise InputError("target and conditioning variables overlap")
    sub = joint.probs[joint._locate(given)]
    remaining = [v for v in joint.names if v not in given]
    drop = tuple(i for i, v in enumerate(remaining) if v not in set(target))
    table = sub.sum(axis=drop) if drop else sub
    denom = float(table.sum())
    if denom <= 0.0:
        return UNDEFINED
    table = table / denom
    out = {}
    for config in itertools.product(*(joint.states[joint._axis[v]] for v in target)):
        idx = tuple(joint._sindex[joint._axis[v]][s] for v, s in zip(target, config))
        out[config] = float(table[idx])
    return out


def _prefix_marginals(probs: np.ndarray, boundaries: Iterable[int]) -> dict[int, np.ndarray]:
    full = probs.ndim
    out = {}
    for m in boundaries:
        out[m] = probs.sum(axis=tuple(range(m, full))) if m < full else probs
    return out


def support_of_joint(joint: JointTable, base: InfoBase) -> SupportSet:
    """Boundary prefixes of the observable base with positive probability."""
    obs = joint.marginal(base.vars)
    marginals = _prefix_marginals(obs.probs, base.boundaries)
    histories = set()
    for m, arr in marginals.items():
        if m == 0:
            if float(arr) > 0.0:
                histories.add(())
            continue
        states = [base.states[v] for v in base.vars[:m]]
        for idx in np.argwhere(arr > 0.0):
            histories.add(tuple(states[k][j] for k, j in enumerate(idx)))
    return SupportSet(base, frozenset(histories))


def support(diagram: InfluenceDiagram, regime: Regime) -> SupportSet:
    return support_of_joint(joint_distribution(diagram, regime), diagram.base)


def response_weights(base: InfoBase, k: Mapping[str, float]) -> np.ndarray:
    y_states = base.states[base.response]
    missing = set(y_states) - set(k)
    if missing:
        raise InputError(f"k assigns no value to response states {sorted(missing)}")
    return np.array([float(k[s]) for s in y_states])


def consequence_direct(diagram: InfluenceDiagram, regime: Regime, k) -> float:
    """Exact expectation of k over the response (or full history) under a regime."""
    if callable(k):
        obs = observable_joint(diagram, regime)
        total = 0.0
        for idx in np.argwhere(obs.probs > 0.0):
            h = tuple(obs.states[ax][j] for ax, j in enumerate(idx))
            total += float(obs.probs[tuple(idx)]) * float(k(h))
        return total
    weights = response_weights(diagram.base, k)
    marg = joint_distribution(diagram, regime).marginal((diagram.response,))
    return float(marg.probs @ weights)


class ExactSource:
    """Conditional source backed by the diagram's exact observational joint."""

    label = "exact"

    def __init__(self, diagram: InfluenceDiagram):
        self.base = diagram.base
        obs = observable_joint(diagram, "obs")
        self._probs = obs.probs
        self._marginals = _prefix_marginals(obs.probs, self.base.boundaries)
        self._sindex = [
            {s: j for j, s in enumerate(self.base.states[v])} for v in self.base.vars
        ]
        self._support = None

    def _idx(self, h: PartialHistory) -> tuple[int, ...]:
        return tuple(self._sindex[i][s] for i, s in enumerate(h))

    def possible(self, h: PartialHistory) -> bool:
        arr = self._marginals[len(h)]
        return float(arr[self._idx(h)]) > 0.0 if len(h) else float(arr) > 0.0

    def l_conditional(self, i: int, h: PartialHistory):
        """Distribution of the i-th observable block given the prefix ``h``."""
        if len(h) != self.base.before_l(i):
            raise InputError(f"history of length {len(h)} does not precede block {i}")
        block = self._marginals[self.base.after_l(i)][self._idx(h)]
        flat = np.asarray(block, dtype=float).reshape(-1)
        denom = flat.sum()
        if denom <= 0.0:
            return UNDEFINED
        return flat / denom

    def support(self) -> SupportSet:
        if self._support is None:
            histories = set()
            for m, arr in self._marginals.items():
                if m == 0:
                    if float(arr) > 0.0:
                        histories.add(())
                    continue
                states = [self.base.states[v] for v in self.base.vars[:m]]
                for idx in np.argwhere(arr > 0.0):
                    histories.add(tuple(states[k][j] for k, j in enumerate(idx)))
            self._support = SupportSet(self.base, frozenset(histories))
        return self._support
