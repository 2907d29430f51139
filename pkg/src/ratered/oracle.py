"""Brute-force single-message check, independent of the envelope machinery.

For one transmitting node with a binary alphabet, the best single message
is an arbitrary conditional from that coordinate to a small auxiliary
alphabet.  This module enumerates every row-stochastic 2 x |U| conditional
whose entries lie on a step-delta grid, keeps those that make the target
almost surely constant given every live message value, and maximizes the
expected posterior joint entropy.  Feasibility is decided combinatorially
(constancy of the target on the posterior's product support, with supports
read off exact zeros) — never by thresholding a conditional entropy.

Nothing here touches the envelope code path; agreement between the two is
a genuine cross-check, limited only by the search-grid resolution.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .envelope import BOTTOM
from .errors import ConfigError
from .lattice import initial_bank, sweep_once
from .probability import GridIndex, GridSpec, ProductPmf, binary_entropy
from .target_functions import FunctionTable


@dataclass(frozen=True)
class ConditionalSearchSpec:
    """Search space for the message conditional of one transmitting node.

    u1_cardinality of 3 (binary source alphabet plus one) already spans
    every achievable value; it is a knob so that monotonicity in the
    auxiliary alphabet size stays testable.
    """

    k: int
    search_step: float
    u1_cardinality: int = 3

    def __post_init__(self) -> None:
        if self.u1_cardinality < 1:
            raise ConfigError(
                f"u1_cardinality must be >= 1, got {self.u1_cardinality}"
            )
        if not 0.0 < self.search_step <= 1.0:
            raise ConfigError(f"search_step must be in (0, 1], got {self.search_step}")
        m_steps = round(1.0 / self.search_step)
        if m_steps < 1 or abs(m_steps * self.search_step - 1.0) > 1e-9:
            raise ConfigError(
                f"search_step {self.search_step} is not the reciprocal of an integer"
            )

    @property
    def n_search_steps(self) -> int:
        return round(1.0 / self.search_step)


@lru_cache(maxsize=None)
def _stochastic_rows(n_steps: int, parts: int) -> np.ndarray:
    """All probability rows with `parts` entries on the 1/n_steps grid,
    in lexicographic order (deterministic tie-breaking downstream)."""

    def compositions(total: int, slots: int):
        if slots == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in compositions(total - first, slots - 1):
                yield (first,) + rest

    rows = np.array(list(compositions(n_steps, parts)), dtype=np.float64)
    return rows / float(n_steps)


def _support_constancy(f: FunctionTable, p: ProductPmf, k: int) -> tuple[bool, bool, bool]:
    """Whether f is a.s. constant when coordinate k's support is {0}, {1},
    or {0,1}, with every other coordinate's support taken from p."""
    others = [p.support(j) for j in range(f.m) if j != k - 1]

    def constant_over(sk: tuple[int, ...]) -> bool:
        it = itertools.product(*others[: k - 1], sk, *others[k - 1 :])
        first = f(next(it))
        return all(f(x) == first for x in it)

    return constant_over((0,)), constant_over((1,)), constant_over((0, 1))


def single_message_reduction(
    p: ProductPmf, f: FunctionTable, spec: ConditionalSearchSpec
) -> float:
    """Best rate reduction achievable with one message from node spec.k.

    Returns the maximal expected posterior joint entropy over all feasible
    searched conditionals, or BOTTOM when none makes f almost surely
    constant for every live message value.
    """
    m = f.m
    if p.m != m:
        raise ValueError(f"pmf arity {p.m} != function arity {m}")
    if not 1 <= spec.k <= m:
        raise ValueError(f"node {spec.k} outside 1..{m}")
    if f.alphabet_sizes[spec.k - 1] != 2:
        raise ValueError("search requires a binary alphabet at the transmitting node")

    k = spec.k
    pk = p[k - 1]
    base = 0.0
    for j in range(m):
        if j != k - 1:
            base += binary_entropy(p[j])
    ok0, ok1, ok01 = _support_constancy(f, p, k)

    rows = _stochastic_rows(spec.n_search_steps, spec.u1_cardinality)
    n_rows = rows.shape[0]
    best = BOTTOM
    chunk = max(1, min(n_rows, (1 << 17) // max(n_rows, 1) + 1))
    for lo in range(0, n_rows, chunk):
        given0 = rows[lo : lo + chunk, None, :]      # message dist given X_k = 0
        given1 = rows[None, :, :]                    # message dist given X_k = 1
        mass0 = (1.0 - pk) * given0
        mass1 = pk * given1
        p_u = mass0 + mass1
        live = p_u > 0.0
        post = np.divide(mass1, p_u, out=np.zeros_like(p_u), where=live)
        at_zero = mass1 == 0.0
        at_one = mass0 == 0.0
        u_ok = np.where(at_zero, ok0, np.where(at_one, ok1, ok01))
        feasible = np.all(u_ok | ~live, axis=-1)
        if not np.any(feasible):
            continue
        interior = live & ~at_zero & ~at_one
        h_post = np.zeros_like(post)
        q = post[interior]
        h_post[interior] = -(q * np.log2(q) + (1.0 - q) * np.log2(1.0 - q))
        values = base + np.sum(p_u * h_post, axis=-1)
        cand = float(np.max(values[feasible]))
        if cand > best:
            best = cand
    return best


@dataclass(frozen=True)
class ComparisonRow:
    point: GridIndex
    envelope_value: float
    oracle_value: float
    gap: float
    envelope_feasible: bool
    oracle_feasible: bool

    @property
    def feasibility_agrees(self) -> bool:
        return self.envelope_feasible == self.oracle_feasible


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[ComparisonRow, ...]
    k: int
    search_step: float
    u1_cardinality: int
    slack: float
    worst_gap: float
    within_contract: bool

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "search_step": self.search_step,
            "u1_cardinality": self.u1_cardinality,
            "slack": self.slack,
            "worst_gap": self.worst_gap,
            "within_contract": self.within_contract,
            "rows": [
                {
                    "point": list(r.point),
                    "envelope_value": r.envelope_value,
                    "oracle_value": r.oracle_value,
                    "gap": r.gap,
                    "envelope_feasible": r.envelope_feasible,
                    "oracle_feasible": r.oracle_feasible,
                }
                for r in self.rows
            ],
        }


def resolution_slack(search_step: float, m: int) -> float:
    """Allowance for the oracle searching conditionals only on its own grid:
    an entropy term for perturbed posteriors plus a linear mass term.  Coarse
    by design; observed gaps are asserted against far tighter bands in tests.
    """
    return binary_entropy(min(search_step, 0.5)) + m * search_step


def compare_with_envelope(
    grid: GridSpec,
    f: FunctionTable,
    k: int,
    points: tuple[GridIndex, ...],
    spec: ConditionalSearchSpec,
) -> ComparisonReport:
    """Per-point gap between one envelope sweep and the brute-force search.

    gap = envelope - oracle; two BOTTOM sides count as gap 0.  Contract:
    every gap within [-1e-9, slack] and feasibility verdicts agree.
    """
    if spec.k != k:
        raise ValueError(f"spec.k={spec.k} does not match k={k}")
    if f.m != grid.m:
        raise ValueError(f"function arity {f.m} != grid m={grid.m}")
    for pt in points:
        if len(pt) != grid.m or any(not 0 <= i <= grid.n_steps for i in pt):
            raise ValueError(f"point {pt} outside the grid")

    field = sweep_once(initial_bank(grid, f)).field_for(k)
    slack = resolution_slack(spec.search_step, grid.m)

    rows = []
    worst = 0.0
    ok = True
    for pt in points:
        env = field.value_at(pt)
        ora = single_message_reduction(grid.pmf_at(pt), f, spec)
        env_feasible = env != BOTTOM
        ora_feasible = ora != BOTTOM
        if not env_feasible and not ora_feasible:
            gap = 0.0
        elif env_feasible != ora_feasible:
            gap = float("inf") if env_feasible else float("-inf")
        else:
            gap = env - ora
        rows.append(
            ComparisonRow(
                point=tuple(pt),
                envelope_value=env,
                oracle_value=ora,
                gap=gap,
                envelope_feasible=env_feasible,
                oracle_feasible=ora_feasible,
            )
        )
        if abs(gap) > abs(worst):
            worst = gap
        if not (-1e-9 <= gap <= slack) or env_feasible != ora_feasible:
            ok = False
    return ComparisonReport(
        rows=tuple(rows),
        k=k,
        search_step=spec.search_step,
        u1_cardinality=spec.u1_cardinality,
        slack=slack,
        worst_gap=worst,
        within_contract=ok,
    )
