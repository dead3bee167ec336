"""Identifiability condition checks: stability, randomization, irrelevance,
positivity variants and support propagation.

Graphical checks run separation tests on the full diagram (hidden
variables included); numeric checks compare exact conditionals across
regimes on positive-probability events to an absolute tolerance of 1e-9.
Failed stages always carry a witness: an offending path for graphical
checks, a conditioning event with the two differing probability vectors
for numeric ones.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .graph import connecting_path
from .model import (
    SIGMA,
    InfluenceDiagram,
    Strategy,
    joint_distribution,
    observable_joint,
    support,
)
from .grecursion import check_cond6

TOL = 1e-9


@dataclass(frozen=True)
class PathWitness:
    path: tuple[str, ...]

    def __str__(self):
        return "-".join(self.path)


@dataclass(frozen=True)
class DivergenceWitness:
    event: tuple[tuple[str, str], ...]
    left: str
    right: str
    left_probs: tuple[float, ...]
    right_probs: tuple[float, ...]

    def __str__(self):
        ev = ",".join(f"{v}={s}" for v, s in self.event) or "()"
        return f"{ev}:{self.left}!={self.right}"


@dataclass(frozen=True)
class StageVerdict:
    stage: int
    passed: bool
    witness: PathWitness | DivergenceWitness | None = None


@dataclass(frozen=True)
class StabilityReport:
    check: str
    stages: tuple[StageVerdict, ...]
    extended_positivity: Mapping[str, bool] = field(default_factory=dict)

    @property
    def overall(self) -> bool:
        return all(s.passed for s in self.stages)

    def stage(self, i: int) -> StageVerdict:
        return next(s for s in self.stages if s.stage == i)


def check_simple_stability_graphical(diagram: InfluenceDiagram) -> StabilityReport:
    """Separation of each covariate block from the regime node given the
    observed past, on the full diagram."""
    base = diagram.base
    stages = []
    for i in range(1, base.n + 2):
        block = base.block(i)
        if not block:
            stages.append(StageVerdict(i, True))
            continue
        past = [v for j in range(1, i) for v in base.block(j)]
        past += [base.action(j) for j in range(1, i)]
        path = connecting_path(diagram.dag, set(block), {SIGMA}, set(past))
        witness = PathWitness(path) if path is not None else None
        stages.append(StageVerdict(i, path is None, witness))
    return StabilityReport("simple_stability_graphical", tuple(stages))


def _stage_slice(margin_probs: np.ndarray, base, i: int) -> np.ndarray:
    """Observable joint restricted to (past, block i) as a
    (past-configs, block-configs) array."""
    m0, m1 = base.before_l(i), base.after_l(i)
    sub = margin_probs.sum(axis=tuple(range(m1, margin_probs.ndim)))
    return sub.reshape(
        int(np.prod(sub.shape[:m0], dtype=np.int64)) if m0 else 1, -1
    )


def _past_configs(diagram: InfluenceDiagram, i: int):
    base = diagram.base
    past = base.vars[: base.before_l(i)]
    return past, list(itertools.product(*(base.states[v] for v in past)))


def check_simple_stability_numeric(
    diagram: InfluenceDiagram, strategies: Iterable[Strategy], tol: float = TOL
) -> StabilityReport:
    """Equality of covariate-block conditionals across the observational
    regime and every supplied strategy, wherever both sides are defined."""
    base = diagram.base
    margins = [("obs", observable_joint(diagram, "obs").probs)]
    margins += [(s.name, observable_joint(diagram, s).probs) for s in strategies]
    stages = []
    for i in range(1, base.n + 2):
        if not base.block(i):
            stages.append(StageVerdict(i, True))
            continue
        tables = [(name, _stage_slice(probs, base, i)) for name, probs in margins]
        past, configs = _past_configs(diagram, i)
        verdict: StageVerdict | None = None
        for row, event in enumerate(configs):
            rows = []
            for name, flat in tables:
                mass = flat[row].sum()
                if mass > 0.0:
                    rows.append((name, flat[row] / mass))
            for (na, va), (nb, vb) in itertools.combinations(rows, 2):
                if np.max(np.abs(va - vb)) > tol:
                    verdict = StageVerdict(
                        i,
                        False,
                        DivergenceWitness(
                            tuple(zip(past, event)), na, nb, tuple(va), tuple(vb)
                        ),
                    )
                    break
            if verdict:
                break
        stages.append(verdict or StageVerdict(i, True))
    return StabilityReport("simple_stability_numeric", tuple(stages))


def check_sequential_randomization(diagram: InfluenceDiagram) -> bool:
    """Structural test: regime arrows enter actions only, and no action has
    a hidden parent in the diagram."""
    for u, v in diagram.dag.edges:
        if u == SIGMA and diagram.kinds[v] != "act":
            return False
    hidden = set(diagram.hidden)
    return not any(hidden & set(diagram.domain_parents[a]) for a in diagram.actions)


def extended_positivity(diagram: InfluenceDiagram, strategy: Strategy) -> bool:
    """Absolute continuity of the strategy joint with respect to the
    observational one over all variables, hidden included."""
    je = joint_distribution(diagram, strategy).probs
    jo = joint_distribution(diagram, "obs").probs
    return bool(np.all((je <= 0.0) | (jo > 0.0)))


def check_sequential_irrelevance_numeric(
    diagram: InfluenceDiagram,
    strategies: Iterable[Strategy] = (),
    tol: float = TOL,
) -> StabilityReport:
    """Independence of each covariate block from all earlier hidden
    variables given the observed past, tested on the observational joint.

    The check is numeric by design: this condition is not representable
    as a single diagram.  Extended positivity against each supplied
    strategy is reported alongside.
    """
    base = diagram.base
    joint = joint_distribution(diagram, "obs")
    index = diagram.index
    stages = []
    for i in range(1, base.n + 2):
        block = base.block(i)
        if not block:
            stages.append(StageVerdict(i, True))
            continue
        if i == 1:
            u_past: tuple[str, ...] = ()
        else:
            a_prev = base.action(i - 1)
            u_past = tuple(u for u in diagram.hidden if index[u] < index[a_prev])
        if not u_past:
            stages.append(StageVerdict(i, True))
            continue
        past = base.vars[: base.before_l(i)]
        wanted = tuple(past) + u_past + tuple(block)
        margin = joint.marginal(wanted).reordered(wanted)
        p = len(past)
        u = len(u_past)
        arr = margin.probs.reshape(
            int(np.prod(margin.probs.shape[:p], dtype=np.int64)) if p else 1,
            int(np.prod(margin.probs.shape[p : p + u], dtype=np.int64)),
            -1,
        )
        verdict = None
        past_configs = list(itertools.product(*(base.states[v] for v in past)))
        u_configs = list(itertools.product(*(diagram.states[v] for v in u_past)))
        for row, event in enumerate(past_configs):
            seen = None
            for ucol, uval in enumerate(u_configs):
                mass = arr[row, ucol].sum()
                if mass <= 0.0:
                    continue
                cond = arr[row, ucol] / mass
                if seen is None:
                    seen = (uval, cond)
                elif np.max(np.abs(cond - seen[1])) > tol:
                    ev = tuple(zip(past, event)) + tuple(zip(u_past, uval))
                    ref = tuple(zip(u_past, seen[0]))
                    verdict = StageVerdict(
                        i,
                        False,
                        DivergenceWitness(
                            ev,
                            "given " + ",".join(f"{v}={s}" for v, s in ref),
                            "given " + ",".join(f"{v}={s}" for v, s in ev[-u:]),
                            tuple(seen[1]),
                            tuple(cond),
                        ),
                    )
                    break
            if verdict:
                break
        stages.append(verdict or StageVerdict(i, True))
    extras = {s.name: extended_positivity(diagram, s) for s in strategies}
    return StabilityReport("sequential_irrelevance_numeric", tuple(stages), extras)


@dataclass(frozen=True)
class PositivityReport:
    simple: bool
    extended: bool
    parent_child: bool
    general: bool


def check_positivity(diagram: InfluenceDiagram, strategy: Strategy) -> PositivityReport:
    """The four positivity variants for one strategy against the
    observational regime."""
    diagram.validate_strategy(strategy)
    simple = support(diagram, strategy).issubset(support(diagram, "obs"))
    extended = extended_positivity(diagram, strategy)

    parent_child = True
    for a in diagram.actions:
        pol = strategy.policies[a]
        cpt = diagram.cpts[a]
        joint_parents = diagram.sort(set(pol.parents) | set(cpt.parents))
        pol_pick = [joint_parents.index(p) for p in pol.parents]
        cpt_pick = [joint_parents.index(p) for p in cpt.parents]
        for config in itertools.product(*(diagram.states[p] for p in joint_parents)):
            pe = pol.row(tuple(config[j] for j in pol_pick))
            po = cpt.row(tuple(config[j] for j in cpt_pick))
            if any(e > 0.0 and o <= 0.0 for e, o in zip(pe, po)):
                parent_child = False
                break
        if not parent_child:
            break

    general, _ = check_cond6(support(diagram, "obs"), strategy)

    assert not parent_child or simple, "parent-child positivity must imply simple"
    assert not extended or simple, "extended positivity must imply simple"
    return PositivityReport(simple, extended, parent_child, general)


def support_propagation(
    diagram: InfluenceDiagram, strategies: Iterable[Strategy] = ()
) -> dict[str, np.ndarray]:
    """Zero/non-zero possibility marking over all joint configurations,
    derived from the zero pattern of the tables alone.

    Matches exact support by construction at this scale: a configuration
    is possible exactly when every factor entry along it is positive.
    """
    out = {}
    for name, regime in [("obs", "obs")] + [(s.name, s) for s in strategies]:
        if regime != "obs":
            diagram.validate_strategy(regime)
        mask = np.ones(diagram.cards(), dtype=bool)
        for v in diagram.order:
            if diagram.kinds[v] == "act" and regime != "obs":
                pol = regime.policies[v]
                parents, rows = pol.parents, pol.row
            else:
                cpt = diagram.cpts[v]
                parents, rows = cpt.parents, cpt.row
            axis_vars = diagram.sort(parents) + (v,)
            shape = [1] * len(diagram.order)
            for av in axis_vars:
                shape[diagram.index[av]] = len(diagram.states[av])
            fac = np.empty([len(diagram.states[av]) for av in axis_vars], dtype=bool)
            reorder = [axis_vars.index(p) for p in parents]
            for config in itertools.product(*(diagram.states[p] for p in axis_vars[:-1])):
                key = tuple(config[reorder[k]] for k in range(len(parents)))
                fac[tuple(diagram.states[p].index(s) for p, s in zip(axis_vars[:-1], config))] = [
                    x > 0.0 for x in rows(key)
                ]
            mask &= fac.reshape(shape)
        out[name] = mask
    return out
