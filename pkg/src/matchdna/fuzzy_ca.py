"""One-dimensional fuzzy cellular automata with bounded-sum rule semantics.

A state is a 1-D float array with every cell in [0, 1].  Each cell updates
synchronously from its 3-cell neighborhood (left, self, right) using one of
16 local rules expressible with fuzzy OR and fuzzy NOT:

    fuzzy OR :  a + b  ->  min(1, a + b)     (bounded sum)
    fuzzy NOT:  a      ->  1 - a

The array has a null boundary: the missing neighbor beyond either end reads
as 0.  Rule numbers follow the usual decimal naming of 3-neighborhood next
state functions; only the 16 OR/NOT-expressible ones are supported and any
other number is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Non-complemented rules as the neighborhood subset they OR together,
# encoded (left, self, right).
_RULE_TERMS = {
    0: (False, False, False),
    170: (False, False, True),
    204: (False, True, False),
    238: (False, True, True),
    240: (True, False, False),
    250: (True, False, True),
    252: (True, True, False),
    254: (True, True, True),
}

# base rule -> complemented counterpart (NOT of the base output)
COMPLEMENT_OF = {0: 255, 170: 85, 204: 51, 238: 17, 240: 15, 250: 5, 252: 3, 254: 1}
_BASE_OF = {c: b for b, c in COMPLEMENT_OF.items()}

SUPPORTED_RULES = frozenset(_RULE_TERMS) | frozenset(_BASE_OF)

DEFAULT_TOLERANCE = 1e-9
# grid used to hash states when looking for revisits (cycle detection)
CYCLE_QUANTUM = 1e-6


def _rule_terms(rule: int) -> tuple[bool, bool, bool, bool]:
    """Return (uses_left, uses_self, uses_right, complemented) for a rule."""
    if rule in _RULE_TERMS:
        return _RULE_TERMS[rule] + (False,)
    if rule in _BASE_OF:
        return _RULE_TERMS[_BASE_OF[rule]] + (True,)
    raise ValueError(f"unsupported rule number {rule}; expected one of "
                     f"{sorted(SUPPORTED_RULES)}")


class RuleSet:
    """A per-cell rule assignment, precompiled to neighbor masks.

    Wraps a sequence of rule numbers (one per cell) so that repeated
    stepping is a handful of vectorized array operations.
    """

    def __init__(self, rules):
        rules = [int(r) for r in rules]
        if not rules:
            raise ValueError("rule vector must have at least one cell")
        terms = [_rule_terms(r) for r in rules]
        self.rules = rules
        self.n = len(rules)
        self._left = np.array([t[0] for t in terms], dtype=float)
        self._self = np.array([t[1] for t in terms], dtype=float)
        self._right = np.array([t[2] for t in terms], dtype=float)
        self._comp = np.array([t[3] for t in terms], dtype=bool)

    @classmethod
    def coerce(cls, rules) -> "RuleSet":
        return rules if isinstance(rules, RuleSet) else cls(rules)

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"RuleSet({self.rules})"

    def apply(self, state: np.ndarray) -> np.ndarray:
        """One synchronous update. Accepts a 1-D state or a 2-D batch
        (rows are independent states)."""
        state = np.asarray(state, dtype=float)
        batch = state.ndim == 2
        s = state if batch else state[np.newaxis, :]
        if s.shape[1] != self.n:
            raise ValueError(f"state has {s.shape[1]} cells, rule vector has {self.n}")
        left = np.zeros_like(s)
        left[:, 1:] = s[:, :-1]
        right = np.zeros_like(s)
        right[:, :-1] = s[:, 1:]
        nxt = np.minimum(1.0, left * self._left + s * self._self + right * self._right)
        nxt[:, self._comp] = 1.0 - nxt[:, self._comp]
        return nxt if batch else nxt[0]

    def dependency_matrix(self) -> np.ndarray:
        """Boolean n x n matrix; row i marks the cells rule i reads.

        Complemented rules read the same neighbors as their base rule.
        Neighbors beyond the array ends are dropped (null boundary).
        """
        n = self.n
        dep = np.zeros((n, n), dtype=bool)
        idx = np.arange(n)
        dep[idx[1:], idx[1:] - 1] = self._left[1:].astype(bool)
        dep[idx, idx] = self._self.astype(bool)
        dep[idx[:-1], idx[:-1] + 1] = self._right[:-1].astype(bool)
        return dep


def eval_rule(rule: int, left: float, self_state: float, right: float) -> float:
    """Next value of one cell under `rule` for neighborhood (left, self, right).

    Inputs must lie in [0, 1]; pass 0.0 for a neighbor beyond the boundary.
    """
    for name, v in (("left", left), ("self", self_state), ("right", right)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} value {v} outside [0, 1]")
    uses_l, uses_s, uses_r, comp = _rule_terms(rule)
    total = uses_l * left + uses_s * self_state + uses_r * right
    out = min(1.0, total)
    return 1.0 - out if comp else out


def step(state, rules) -> np.ndarray:
    """Advance a state (or a 2-D batch of states) by one synchronous update."""
    return RuleSet.coerce(rules).apply(state)


def dependency_matrix(rules) -> np.ndarray:
    """Neighbor-dependency matrix of a rule vector (see RuleSet.dependency_matrix)."""
    return RuleSet.coerce(rules).dependency_matrix()


@dataclass
class Terminal:
    """How a trajectory ended.

    kind is 'fixed_point' (state index of the fixed state), 'cycle'
    (start index and period of the revisited segment) or 'truncated'
    (no convergence within max_steps).
    """
    kind: str
    index: int = -1
    start: int = -1
    period: int = 0
    steps: int = 0


@dataclass
class Trajectory:
    states: np.ndarray  # shape (T+1, n); row 0 is the initial state
    terminal: Terminal

    @property
    def attractor(self) -> np.ndarray:
        """Representative terminal state: the fixed point, or the
        lexicographically smallest state of the cycle, or the last state
        when truncated."""
        if self.terminal.kind == "fixed_point":
            return self.states[self.terminal.index]
        if self.terminal.kind == "cycle":
            seg = self.states[self.terminal.start:self.terminal.start + self.terminal.period]
            order = min(range(len(seg)), key=lambda i: tuple(seg[i]))
            return seg[order]
        return self.states[-1]

    @property
    def converged(self) -> bool:
        return self.terminal.kind != "truncated"


def _quantize_key(state: np.ndarray) -> bytes:
    return np.round(state / CYCLE_QUANTUM).astype(np.int64).tobytes()


def evolve(state, rules, max_steps: int = 1000,
           tolerance: float = DEFAULT_TOLERANCE) -> Trajectory:
    """Iterate a state until it fixes, revisits a prior state, or runs out.

    A fixed point is declared when one more update moves no cell by more
    than `tolerance` (sup norm); a cycle when the new state lands on the
    1e-6 quantization of an earlier one.  Otherwise the trajectory is
    truncated after `max_steps` updates.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    rs = RuleSet.coerce(rules)
    cur = np.asarray(state, dtype=float)
    if cur.ndim != 1:
        raise ValueError("evolve expects a single 1-D state")
    if cur.shape[0] != rs.n:
        raise ValueError(f"state has {cur.shape[0]} cells, rule vector has {rs.n}")
    if np.any(cur < 0.0) or np.any(cur > 1.0):
        raise ValueError("state values must lie in [0, 1]")

    states = [cur]
    seen = {_quantize_key(cur): 0}
    for _ in range(max_steps):
        nxt = rs.apply(cur)
        if np.max(np.abs(nxt - cur)) <= tolerance:
            return Trajectory(np.array(states), Terminal("fixed_point", index=len(states) - 1))
        key = _quantize_key(nxt)
        if key in seen:
            start = seen[key]
            return Trajectory(np.array(states),
                              Terminal("cycle", start=start, period=len(states) - start))
        seen[key] = len(states)
        states.append(nxt)
        cur = nxt
    return Trajectory(np.array(states), Terminal("truncated", steps=max_steps))


def _lexmin_rows(stack, row):
    """Lexicographically smallest state among stack[k][row] over k."""
    return min((tuple(s[row]) for s in stack))


def terminal_states(patterns: np.ndarray, rules, max_steps: int = 200,
                    tolerance: float = DEFAULT_TOLERANCE,
                    max_period: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """Terminal representative for every row of a pattern batch.

    Whole-batch stepping: fixed points and period-2 cycles are detected
    as they occur; rows still live after max_steps are probed for cycles
    up to max_period.  Anything longer counts as truncated.  Returns
    (terminals, converged); cycle rows are represented by the
    lexicographically smallest state of the cycle, truncated rows by
    their last state.
    """
    rs = RuleSet.coerce(rules)
    cur = np.array(patterns, dtype=float)
    if cur.ndim != 2:
        raise ValueError("terminal_states expects a 2-D pattern batch")
    m = cur.shape[0]
    done = np.zeros(m, dtype=bool)
    converged = np.zeros(m, dtype=bool)
    out = cur.copy()
    prev = None
    for _ in range(max_steps):
        act = ~done
        if not act.any():
            break
        nxt = cur.copy()
        nxt[act] = rs.apply(cur[act])
        fixed = act & (np.abs(nxt - cur).max(axis=1) <= tolerance)
        if prev is not None:
            # s(t+1) == s(t-1) means a 2-cycle through s(t)
            cyc2 = act & ~fixed & (np.abs(nxt - prev).max(axis=1) <= tolerance)
            for i in np.flatnonzero(cyc2):
                out[i] = _lexmin_rows([cur, nxt], i)
            done |= cyc2
            converged |= cyc2
        out[fixed] = nxt[fixed]
        done |= fixed
        converged |= fixed
        prev, cur = cur, nxt
    live = np.flatnonzero(~done)
    if live.size:
        base = cur[live]
        stack = [base]
        found = np.zeros(live.size, dtype=bool)
        s = base
        for _ in range(max_period):
            s = rs.apply(s)
            hit = ~found & (np.abs(s - base).max(axis=1) <= tolerance)
            for j in np.flatnonzero(hit):
                out[live[j]] = _lexmin_rows(stack, j)
                converged[live[j]] = True
            found |= hit
            if found.all():
                break
            stack.append(s)
        for j in np.flatnonzero(~found):
            out[live[j]] = base[j]  # truncated: keep the last state reached
    return out, converged


def parse_rule_vector(text: str) -> list[int]:
    """Parse '238,254,238,252' into a validated rule list."""
    rules = [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    for r in rules:
        _rule_terms(r)
    return rules


def format_rule_vector(rules) -> str:
    return ",".join(str(int(r)) for r in RuleSet.coerce(rules).rules)
