"""Observational-data simulation and frequency estimation.

Sampling contract (bit-exact across platforms): uniforms come from the
Philox 4x64-10 counter-based generator keyed by the dataset seed.  The
raw 64-bit outputs x_0, x_1, ... are mapped to doubles by
u = (x >> 11) * 2**-53 and consumed in row-major order: draw r*K + j
belongs to row r and domain variable j (in diagram order, hidden
variables included, K variables in total).  Row contents therefore
depend only on (seed, r), so a longer run extends a shorter one.

Estimation is plain relative frequency with optional additive smoothing;
with smoothing the estimated model is strictly positive, while at
alpha=0 unobserved conditioning events stay undefined and genuine
positivity failures surface.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .model import (
    UNDEFINED,
    InfluenceDiagram,
    InfoBase,
    PartialHistory,
    Regime,
)


@dataclass(frozen=True)
class Dataset:
    """Rows of state labels over the observable information base."""

    columns: tuple[str, ...]
    states: tuple[tuple[str, ...], ...]
    codes: np.ndarray  # (n, len(columns)) state indices
    regime: str
    seed: int

    @property
    def n(self) -> int:
        return int(self.codes.shape[0])

    def rows(self):
        for r in range(self.n):
            yield tuple(self.states[j][self.codes[r, j]] for j in range(len(self.columns)))

    def to_text(self) -> str:
        lines = [" ".join(self.columns)]
        lines.extend(" ".join(row) for row in self.rows())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, base: InfoBase, regime: str = "?", seed: int = -1) -> "Dataset":
        lines = [
            ln.strip()
            for ln in text.splitlines()
            if ln.strip() and not ln.lstrip().startswith("#")
        ]
        if not lines:
            raise InputError("empty dataset")
        columns = tuple(lines[0].split())
        if columns != base.vars:
            raise InputError(
                f"dataset columns {columns} do not match the information base {base.vars}"
            )
        states = tuple(base.states[v] for v in columns)
        index = [{s: j for j, s in enumerate(st)} for st in states]
        codes = np.empty((len(lines) - 1, len(columns)), dtype=np.int64)
        for r, line in enumerate(lines[1:]):
            cells = line.split()
            if len(cells) != len(columns):
                raise InputError(f"row {r + 1} has {len(cells)} cells, want {len(columns)}")
            for j, cell in enumerate(cells):
                if cell not in index[j]:
                    raise InputError(f"row {r + 1}: {cell!r} is not a state of {columns[j]}")
                codes[r, j] = index[j][cell]
        return cls(columns, states, codes, regime, seed)


def _uniforms(seed: int, n: int, k: int) -> np.ndarray:
    raw = np.random.Philox(key=np.uint64(seed)).random_raw(n * k)
    return ((raw >> np.uint64(11)) * (2.0**-53)).reshape(n, k)


def sample(diagram: InfluenceDiagram, regime: Regime, n: int, seed: int) -> Dataset:
    """n independent draws from the joint under a regime, hidden columns
    dropped.  Identical (seed, n) give bit-identical datasets."""
    if n < 1:
        raise InputError("need n >= 1")
    if regime != "obs":
        diagram.validate_strategy(regime)
    u = _uniforms(seed, n, len(diagram.order))
    codes = np.empty((n, len(diagram.order)), dtype=np.int64)
    col = {v: j for j, v in enumerate(diagram.order)}

    for j, v in enumerate(diagram.order):
        if diagram.kinds[v] == "act" and regime != "obs":
            pol = regime.policies[v]
            parents, rows = pol.parents, pol.row
        else:
            cpt = diagram.cpts[v]
            parents, rows = cpt.parents, cpt.row
        configs = list(itertools.product(*(diagram.states[p] for p in parents)))
        table = np.array([rows(c) for c in configs])
        cum = np.cumsum(table, axis=1)
        cum[:, -1] = np.maximum(cum[:, -1], 1.0)
        if parents:
            radix = np.zeros(n, dtype=np.int64)
            for p in parents:
                radix = radix * len(diagram.states[p]) + codes[:, col[p]]
        else:
            radix = np.zeros(n, dtype=np.int64)
        codes[:, j] = (u[:, j : j + 1] >= cum[radix]).sum(axis=1)

    keep = [j for j, v in enumerate(diagram.order) if diagram.kinds[v] != "hid"]
    name = regime if isinstance(regime, str) else regime.name
    return Dataset(
        diagram.base.vars,
        tuple(diagram.states[v] for v in diagram.base.vars),
        codes[:, keep],
        name,
        seed,
    )


class EstimatedSource:
    """Conditional source backed by smoothed relative frequencies.

    Serves block conditionals for the backward recursion.  A history is
    considered possible when some data row extends it; with alpha > 0 the
    smoothed model is strictly positive, so every syntactically valid
    history counts as possible.
    """

    label = "estimated"

    def __init__(self, dataset: Dataset, base: InfoBase, alpha: float = 0.5):
        if alpha < 0:
            raise InputError("alpha must be non-negative")
        if dataset.columns != base.vars:
            raise InputError("dataset schema does not match the information base")
        self.base = base
        self.alpha = float(alpha)
        self._cards = np.array([len(s) for s in dataset.states], dtype=np.int64)
        self._counts: dict[int, np.ndarray] = {}
        for m in base.boundaries:
            self._counts[m] = self._table(dataset, m)

    def _table(self, dataset: Dataset, m: int) -> np.ndarray:
        """Counts over the first m columns, shaped by their cards."""
        if m == 0:
            return np.array(float(dataset.n))
        cards = self._cards[:m]
        radix = np.zeros(dataset.n, dtype=np.int64)
        for j in range(m):
            radix = radix * cards[j] + dataset.codes[:, j]
        counts = np.bincount(radix, minlength=int(np.prod(cards)))
        return counts.reshape(tuple(cards)).astype(float)

    def _locate(self, h: PartialHistory) -> tuple[int, ...]:
        return tuple(
            self.base.states[v].index(s) for v, s in zip(self.base.vars, h)
        )

    def possible(self, h: PartialHistory) -> bool:
        if self.alpha > 0.0:
            self.base.check_history(h)
            return True
        arr = self._counts[len(h)]
        return float(arr[self._locate(h)]) > 0.0 if len(h) else float(arr) > 0.0

    def l_conditional(self, i: int, h: PartialHistory):
        if len(h) != self.base.before_l(i):
            raise InputError(f"history of length {len(h)} does not precede block {i}")
        block = self._counts[self.base.after_l(i)][self._locate(h)]
        flat = np.asarray(block, dtype=float).reshape(-1)
        total = flat.sum()
        if total <= 0.0 and self.alpha == 0.0:
            return UNDEFINED
        return (flat + self.alpha) / (total + self.alpha * flat.size)


def estimate_conditionals(dataset: Dataset, base: InfoBase, alpha: float = 0.5) -> EstimatedSource:
    """Frequency-estimated recursion ingredients from observational rows."""
    return EstimatedSource(dataset, base, alpha)
