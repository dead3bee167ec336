"""Line-oriented model document format.

Tokens are space separated; ``#`` starts a comment; ``-`` stands for an
empty list.  A document declares variables, the total order, edges (with
``sigma`` as the regime node, parent of actions only), optional per-action
parent annotations, one table per variable, and named strategies:

    var L2 kind=obs states=0,1
    order U1 A1 U2 L2 A2 Y
    edge U1 A1
    obs-parents A1 U1
    int-parents A1 -
    cpt L2 | U1,A1,U2
    row 0,0,0 : 0.2 0.8
    strategy e2
    assign A2 | A1
    row 0 : 1
    prow 1 : 0.25 0.75

``row`` inside a strategy names the chosen action state; ``prow`` gives a
full distribution.  Parsing validates everything the model itself would,
reporting the offending line.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ModelError, ParseError, PolicyError
from .model import SIGMA, Cpt, InfluenceDiagram, Policy, Strategy, Variable

_KIND_NAMES = {"obs": "obs", "hid": "hid", "act": "act", "resp": "resp"}


@dataclass
class ModelDocument:
    """Parsed and validated model text: a diagram plus named strategies."""

    diagram: InfluenceDiagram
    strategies: dict[str, Strategy]
    lines: dict = field(default_factory=dict, compare=False)

    def strategy(self, name: str) -> Strategy:
        try:
            return self.strategies[name]
        except KeyError:
            raise PolicyError(
                f"unknown strategy {name!r}; declared: {sorted(self.strategies) or 'none'}"
            ) from None


def _split_list(token: str) -> tuple[str, ...]:
    if token == "-":
        return ()
    return tuple(token.split(","))


def _join_list(items) -> str:
    items = tuple(items)
    return ",".join(items) if items else "-"


class _Parser:
    def __init__(self, text: str):
        self.raw = text.splitlines()
        self.variables: list[Variable] = []
        self.var_lines: dict[str, int] = {}
        self.order: tuple[str, ...] | None = None
        self.edges: list[tuple[str, str]] = []
        self.obs_parents: dict[str, tuple[str, ...]] = {}
        self.int_parents: dict[str, tuple[str, ...]] = {}
        self.cpts: dict[str, Cpt] = {}
        self.strategies: dict[str, dict[str, Policy]] = {}
        self.strategy_order: list[str] = []
        # open blocks
        self._cpt: tuple[str, tuple[str, ...], dict, int] | None = None
        self._strategy: str | None = None
        self._assign: tuple[str, tuple[str, ...], dict, int] | None = None

    def fail(self, line: int, message: str):
        raise ParseError(message, line=line)

    def names(self) -> dict[str, Variable]:
        return {v.name: v for v in self.variables}

    def parse(self) -> ModelDocument:
        for lineno, raw in enumerate(self.raw, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            tokens = text.split()
            handler = getattr(self, "_on_" + tokens[0].replace("-", "_"), None)
            if handler is None:
                self.fail(lineno, f"unknown directive {tokens[0]!r}")
            handler(tokens, lineno)
        self._close_cpt()
        self._close_assign()
        return self._build()

    # ------------------------------------------------------------------
    # directives

    def _on_var(self, tokens, lineno):
        if len(tokens) != 4:
            self.fail(lineno, "expected: var <name> kind=<...> states=<...>")
        name = tokens[1]
        opts = {}
        for t in tokens[2:]:
            if "=" not in t:
                self.fail(lineno, f"expected key=value, got {t!r}")
            key, val = t.split("=", 1)
            opts[key] = val
        if set(opts) != {"kind", "states"}:
            self.fail(lineno, "var takes exactly kind= and states=")
        if opts["kind"] not in _KIND_NAMES:
            self.fail(lineno, f"unknown kind {opts['kind']!r}")
        if name in self.var_lines:
            self.fail(lineno, f"variable {name} already declared on line {self.var_lines[name]}")
        try:
            var = Variable(name, _KIND_NAMES[opts["kind"]], _split_list(opts["states"]))
        except ModelError as exc:
            self.fail(lineno, str(exc))
        self.variables.append(var)
        self.var_lines[name] = lineno

    def _on_order(self, tokens, lineno):
        if self.order is not None:
            self.fail(lineno, "duplicate order line")
        self.order = tuple(tokens[1:])
        declared = set(self.var_lines)
        if set(self.order) != declared or len(self.order) != len(declared):
            self.fail(lineno, "order must list every declared variable exactly once")
        self._order_line = lineno

    def _on_edge(self, tokens, lineno):
        if len(tokens) != 3:
            self.fail(lineno, "expected: edge <parent> <child>")
        u, v = tokens[1], tokens[2]
        for w in (u, v):
            if w != SIGMA and w not in self.var_lines:
                self.fail(lineno, f"unknown variable {w!r}")
        if v == SIGMA:
            self.fail(lineno, f"{SIGMA} cannot be a child")
        if u == SIGMA and self.names()[v].kind != "act":
            self.fail(lineno, f"arrow {SIGMA} -> {v} enters a non-action")
        if (u, v) in self.edges:
            self.fail(lineno, f"duplicate edge {u} -> {v}")
        self.edges.append((u, v))

    def _parents_line(self, tokens, lineno, target: dict):
        if len(tokens) != 3:
            self.fail(lineno, "expected: <directive> <action> <p1,p2,...|->")
        action = tokens[1]
        if action not in self.var_lines or self.names()[action].kind != "act":
            self.fail(lineno, f"{action!r} is not a declared action")
        if action in target:
            self.fail(lineno, f"duplicate parent annotation for {action}")
        ps = _split_list(tokens[2])
        for p in ps:
            if p not in self.var_lines:
                self.fail(lineno, f"unknown variable {p!r}")
        target[action] = ps

    def _on_obs_parents(self, tokens, lineno):
        self._parents_line(tokens, lineno, self.obs_parents)

    def _on_int_parents(self, tokens, lineno):
        self._parents_line(tokens, lineno, self.int_parents)

    def _on_cpt(self, tokens, lineno):
        self._close_cpt()
        self._close_assign()
        if len(tokens) != 4 or tokens[2] != "|":
            self.fail(lineno, "expected: cpt <var> | <p1,p2,...|->")
        child = tokens[1]
        if child not in self.var_lines:
            self.fail(lineno, f"unknown variable {child!r}")
        if child in self.cpts:
            self.fail(lineno, f"duplicate cpt for {child}")
        parents = _split_list(tokens[3])
        for p in parents:
            if p not in self.var_lines:
                self.fail(lineno, f"unknown variable {p!r}")
        self._cpt = (child, parents, {}, lineno)

    def _on_strategy(self, tokens, lineno):
        self._close_cpt()
        self._close_assign()
        if len(tokens) != 2:
            self.fail(lineno, "expected: strategy <name>")
        name = tokens[1]
        if name in self.strategies:
            self.fail(lineno, f"duplicate strategy {name!r}")
        self.strategies[name] = {}
        self.strategy_order.append(name)
        self._strategy = name

    def _on_assign(self, tokens, lineno):
        self._close_cpt()
        self._close_assign()
        if self._strategy is None:
            self.fail(lineno, "assign outside a strategy block")
        if len(tokens) != 4 or tokens[2] != "|":
            self.fail(lineno, "expected: assign <action> | <p1,p2,...|->")
        action = tokens[1]
        if action not in self.var_lines or self.names()[action].kind != "act":
            self.fail(lineno, f"{action!r} is not a declared action")
        if action in self.strategies[self._strategy]:
            self.fail(lineno, f"duplicate assign for {action} in strategy {self._strategy}")
        parents = _split_list(tokens[3])
        for p in parents:
            if p not in self.var_lines:
                self.fail(lineno, f"unknown variable {p!r}")
        self._assign = (action, parents, {}, lineno)

    def _row_key(self, tokens, lineno, parents):
        if len(tokens) < 3 or tokens[2] != ":":
            self.fail(lineno, "expected: row <s1,s2,...|-> : <values>")
        key = _split_list(tokens[1])
        if len(key) != len(parents):
            self.fail(lineno, f"row names {len(key)} parent states, want {len(parents)}")
        names = self.names()
        for p, s in zip(parents, key):
            if s not in names[p].states:
                self.fail(lineno, f"{s!r} is not a state of {p}")
        return key

    def _probs(self, tokens, lineno):
        try:
            return tuple(float(t) for t in tokens)
        except ValueError:
            self.fail(lineno, f"expected probabilities, got {tokens}")

    def _on_row(self, tokens, lineno):
        if self._cpt is not None:
            child, parents, rows, _ = self._cpt
            key = self._row_key(tokens, lineno, parents)
            if key in rows:
                self.fail(lineno, f"duplicate row {key} in cpt for {child}")
            probs = self._probs(tokens[3:], lineno)
            self._check_row(probs, len(self.names()[child].states), lineno)
            rows[key] = probs
        elif self._assign is not None:
            action, parents, rows, _ = self._assign
            key = self._row_key(tokens, lineno, parents)
            if key in rows:
                self.fail(lineno, f"duplicate row {key} for {action}")
            if len(tokens) != 4:
                self.fail(lineno, "deterministic row takes a single action state")
            chosen = tokens[3]
            states = self.names()[action].states
            if chosen not in states:
                self.fail(lineno, f"{chosen!r} is not a state of {action}")
            rows[key] = tuple(1.0 if s == chosen else 0.0 for s in states)
        else:
            self.fail(lineno, "row outside a cpt or assign block")

    def _on_prow(self, tokens, lineno):
        if self._assign is None:
            self.fail(lineno, "prow outside an assign block")
        action, parents, rows, _ = self._assign
        key = self._row_key(tokens, lineno, parents)
        if key in rows:
            self.fail(lineno, f"duplicate row {key} for {action}")
        probs = self._probs(tokens[3:], lineno)
        self._check_row(probs, len(self.names()[action].states), lineno)
        rows[key] = probs

    def _check_row(self, probs, width, lineno):
        if len(probs) != width:
            self.fail(lineno, f"row has {len(probs)} entries, want {width}")
        if any(p < 0.0 or p > 1.0 for p in probs):
            self.fail(lineno, "probabilities must lie in [0, 1]")
        if abs(sum(probs) - 1.0) > 1e-9:
            self.fail(lineno, f"row sums to {sum(probs)!r}, not 1")

    # ------------------------------------------------------------------
    # assembly

    def _close_cpt(self):
        if self._cpt is None:
            return
        child, parents, rows, lineno = self._cpt
        self._cpt = None
        states = {v.name: v.states for v in self.variables}
        cpt = Cpt(child, parents, rows)
        try:
            cpt.validate(states)
        except ModelError as exc:
            self.fail(lineno, str(exc))
        self.cpts[child] = cpt

    def _close_assign(self):
        if self._assign is None:
            return
        action, parents, rows, lineno = self._assign
        self._assign = None
        self.strategies[self._strategy][action] = Policy(parents, rows)

    def _build(self) -> ModelDocument:
        if not self.variables:
            raise ParseError("no variables declared")
        if self.order is None:
            raise ParseError("missing order line")
        by_name = self.names()
        variables = [by_name[v] for v in self.order]
        try:
            diagram = InfluenceDiagram(
                variables, self.edges, self.cpts,
                self.obs_parents or None, self.int_parents or None,
            )
        except ModelError as exc:
            raise ParseError(str(exc), line=getattr(self, "_order_line", None)) from None
        strategies = {}
        for name in self.strategy_order:
            strategy = Strategy(name, dict(self.strategies[name]))
            try:
                diagram.validate_strategy(strategy)
            except PolicyError as exc:
                raise ParseError(f"strategy {name!r}: {exc}") from None
            strategies[name] = strategy
        return ModelDocument(diagram, strategies)


def parse_model(text: str) -> ModelDocument:
    """Parse and fully validate a model document."""
    return _Parser(text).parse()


def _format_row(config, probs, states) -> str:
    ones = [s for s, p in zip(states, probs) if p == 1.0]
    if len(ones) == 1 and sum(probs) == 1.0:
        return f"row {_join_list(config)} : {ones[0]}"
    return f"prow {_join_list(config)} : " + " ".join(repr(float(p)) for p in probs)


def format_model(doc: ModelDocument) -> str:
    """Canonical text for a document; parsing it back gives an equal one."""
    d = doc.diagram
    out = []
    for v in d.variables:
        out.append(f"var {v.name} kind={v.kind} states={_join_list(v.states)}")
    out.append("order " + " ".join(d.order))
    for u, v in sorted(
        d.dag.edges, key=lambda e: (d.index.get(e[0], -1), d.index.get(e[1], -1))
    ):
        out.append(f"edge {u} {v}")
    for a in d.actions:
        out.append(f"obs-parents {a} {_join_list(d.obs_parents[a])}")
        out.append(f"int-parents {a} {_join_list(d.int_parents[a])}")
    for v in d.order:
        cpt = d.cpts[v]
        out.append(f"cpt {v} | {_join_list(cpt.parents)}")
        for config in sorted(cpt.table):
            probs = cpt.table[config]
            out.append(
                f"row {_join_list(config)} : " + " ".join(repr(float(p)) for p in probs)
            )
    for name, strategy in doc.strategies.items():
        out.append(f"strategy {name}")
        for a in d.actions:
            pol = strategy.policies[a]
            out.append(f"assign {a} | {_join_list(pol.parents)}")
            for config in sorted(pol.table):
                out.append(_format_row(config, pol.table[config], d.states[a]))
    return "\n".join(out) + "\n"
