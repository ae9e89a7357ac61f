"""Down-skip-free mark strings and their sufficient summary.

A mark string records the queue length left behind by each departing
customer.  Such strings never drop by more than one per step (down-skip-free).
The summary computed here -- length, initial state, number of zeros, and the
multiset of zero-adjusted increments -- determines the conditional law of the
string under every homogeneous skip-free transition matrix, so two strings
with equal summaries are statistically interchangeable.

The zero-adjusted increment of a step x_j -> x_{j+1} is
``x_{j+1} - x_j + (1 - [x_j == 0])``: it equals the number of customers that
arrived during the service that ended the step.
"""

from __future__ import annotations

import itertools
from collections import Counter
from collections.abc import Iterator, Sequence
from dataclasses import dataclass


Marks = Sequence[int]


def parse_marks(digits: str) -> tuple[int, ...]:
    """Turn a digit string like '121211100' into a mark tuple."""
    return tuple(int(c) for c in digits)


def is_down_skip_free(symbols: Marks) -> bool:
    """True iff no step decreases by more than 1. Rejects empty input."""
    if len(symbols) == 0:
        raise ValueError("empty mark string")
    if any(s < 0 for s in symbols):
        return False
    return all(a - b <= 1 for a, b in zip(symbols, symbols[1:]))


def require_dss(symbols: Marks) -> None:
    if not is_down_skip_free(symbols):
        raise ValueError(f"mark string is not down-skip-free: {list(symbols)!r}")


def zero_adjusted_increments(symbols: Marks) -> list[int]:
    """The n-1 zero-adjusted increments of an n-symbol string."""
    return [
        b - a + (1 if a != 0 else 0) for a, b in zip(symbols, symbols[1:])
    ]


@dataclass(frozen=True)
class TauSummary:
    """Value of the summary statistic on a down-skip-free string."""

    length: int
    initial: int
    zero_count: int
    increments: tuple[tuple[int, int], ...]  # sorted (value, count) pairs

    def increment_counts(self) -> dict[int, int]:
        return dict(self.increments)


def tau(symbols: Marks) -> TauSummary:
    """Summary statistic: (length, initial state, zero count, increment counts)."""
    require_dss(symbols)
    counts = Counter(zero_adjusted_increments(symbols))
    return TauSummary(
        length=len(symbols),
        initial=symbols[0],
        zero_count=sum(1 for s in symbols if s == 0),
        increments=tuple(sorted(counts.items())),
    )


def tau_equiv(x: Marks, y: Marks) -> bool:
    """True iff the two strings have identical summaries (implies equal length)."""
    return tau(x) == tau(y)


def tau_tilde_equiv(x: Marks, y: Marks) -> bool:
    """Like tau_equiv but ignoring the zero count (a strictly weaker relation)."""
    tx, ty = tau(x), tau(y)
    return (tx.length, tx.initial, tx.increments) == (ty.length, ty.initial, ty.increments)


@dataclass(frozen=True)
class TransitionCounts:
    """Initial state plus the matrix of observed transition counts."""

    initial: int
    counts: tuple[tuple[tuple[int, int], int], ...]  # sorted ((r, s), count)

    def count_map(self) -> dict[tuple[int, int], int]:
        return dict(self.counts)


def transition_counts(symbols: Marks) -> TransitionCounts:
    require_dss(symbols)
    counts = Counter(zip(symbols, symbols[1:]))
    return TransitionCounts(
        initial=symbols[0], counts=tuple(sorted(counts.items()))
    )


def t_equiv(x: Marks, y: Marks) -> bool:
    """Equality of initial state and transition counts (refines tau_equiv)."""
    return len(x) == len(y) and transition_counts(x) == transition_counts(y)


def _terminal_clauses_hold(a_n: int, b_n: int) -> bool:
    low_matches = (a_n in (0, 1)) == (b_n in (0, 1))
    high_matches = a_n == b_n if (a_n > 1 or b_n > 1) else True
    return low_matches and high_matches


def check_terminal_lemma(x: Marks, y: Marks) -> bool:
    """For summary-equivalent strings the terminal states must agree,
    except that terminal 0 and terminal 1 are interchangeable."""
    if not tau_equiv(x, y):
        raise ValueError("terminal-state check requires tau-equivalent inputs")
    return _terminal_clauses_hold(x[-1], y[-1])


def check_s_structure(a: Marks, b: Marks, x: Marks, y: Marks) -> bool:
    """Concatenation stability: a~b and x~y must give a+x ~ b+y.

    Preconditions: the two pairs are tau-equivalent and both concatenations
    are down-skip-free.
    """
    if not (tau_equiv(a, b) and tau_equiv(x, y)):
        raise ValueError("s-structure check requires tau-equivalent pairs")
    ax = tuple(a) + tuple(x)
    by = tuple(b) + tuple(y)
    require_dss(ax)
    require_dss(by)
    return tau_equiv(ax, by)


def departure_count(symbols: Marks) -> int:
    """Departures observed strictly after the first record."""
    require_dss(symbols)
    return len(symbols) - 1


def arrival_count(symbols: Marks) -> int:
    """Arrivals between the first and last departure.

    A step from a non-empty state contributes its zero-adjusted increment;
    a step from an empty state additionally contributes the arrival that
    ended the idle period.
    """
    require_dss(symbols)
    incs = zero_adjusted_increments(symbols)
    idle_arrivals = sum(1 for s in symbols[:-1] if s == 0)
    return sum(incs) + idle_arrivals


def departures_invariant_check(x: Marks, y: Marks) -> bool:
    """Equivalent strings always share the departure count; arrivals may differ."""
    if not tau_equiv(x, y):
        raise ValueError("invariant check requires tau-equivalent inputs")
    return departure_count(x) == departure_count(y)


# ---------------------------------------------------------------------------
# Structure-preserving transformations


@dataclass(frozen=True)
class BlockSwitch:
    """Swap symbol blocks [i0:i1) and [j0:j1); blocks must not overlap."""

    i0: int
    i1: int
    j0: int
    j1: int


@dataclass(frozen=True)
class IncrementPermutation:
    """Permute the increment run at positions [start, start+len(order)) of the
    increment sequence; order is a permutation of range(len(order))."""

    start: int
    order: tuple[int, ...]


def apply_transformation(
    symbols: Marks, op: BlockSwitch | IncrementPermutation
) -> tuple[int, ...]:
    """Apply a summary-preserving rewrite, validating its side conditions.

    Block switches require equal block-initial symbols and either equal block
    terminals or terminals {0, 1} with both blocks followed by more symbols.
    Increment permutations require a run of strictly positive increments.
    The result is checked to be down-skip-free.
    """
    require_dss(symbols)
    s = tuple(symbols)
    if isinstance(op, BlockSwitch):
        i0, i1, j0, j1 = op.i0, op.i1, op.j0, op.j1
        if not (0 <= i0 < i1 <= j0 < j1 <= len(s)):
            raise ValueError(f"blocks must be ordered and disjoint: {op}")
        first, second = s[i0:i1], s[j0:j1]
        if first[0] != second[0]:
            raise ValueError("blocks must begin with the same symbol")
        t1, t2 = first[-1], second[-1]
        if t1 != t2:
            if not (t1 in (0, 1) and t2 in (0, 1)):
                raise ValueError("block terminals must match or both lie in {0, 1}")
            if j1 == len(s):
                # a 0<->1 swap in string-final position would change the zero count
                raise ValueError("terminal {0,1} switch requires interior blocks")
        out = s[:i0] + second + s[i1:j0] + first + s[j1:]
    else:
        incs = zero_adjusted_increments(s)
        k = len(op.order)
        run = incs[op.start : op.start + k]
        if len(run) != k or sorted(op.order) != list(range(k)):
            raise ValueError(f"invalid permutation window: {op}")
        if any(r < 1 for r in run):
            raise ValueError("permutation window must contain only positive increments")
        incs[op.start : op.start + k] = [run[i] for i in op.order]
        out = rebuild_from_increments(s[0], incs)
    if not is_down_skip_free(out):
        raise ValueError(f"transformation output left the state space: {out!r}")
    return out


def rebuild_from_increments(initial: int, increments: Sequence[int]) -> tuple[int, ...]:
    """Reconstruct the unique mark string with the given start and increments."""
    out = [initial]
    for r in increments:
        cur = out[-1]
        out.append(cur + r - (1 if cur != 0 else 0))
    return tuple(out)


# ---------------------------------------------------------------------------
# Enumeration and exhaustive sweeps


def enumerate_dss(length: int, max_state: int) -> Iterator[tuple[int, ...]]:
    """All down-skip-free strings of the given length over {0..max_state}."""
    if length < 1:
        raise ValueError("length must be >= 1")

    def extend(prefix: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        if len(prefix) == length:
            yield prefix
            return
        lo = max(prefix[-1] - 1, 0)
        for nxt in range(lo, max_state + 1):
            yield from extend(prefix + (nxt,))

    for first in range(max_state + 1):
        yield from extend((first,))


def tau_classes(strings: Iterator[tuple[int, ...]]) -> dict[TauSummary, list[tuple[int, ...]]]:
    classes: dict[TauSummary, list[tuple[int, ...]]] = {}
    for s in strings:
        classes.setdefault(tau(s), []).append(s)
    return classes


def count_tau_class(symbols: Marks, max_state: int, max_len: int = 10) -> int:
    """Exact size of the equivalence class of `symbols` within {0..max_state}.

    Counts distinct orderings of the increment multiset whose rebuilt string
    keeps the zero count and stays within the alphabet.  Exponential in
    length; guarded by max_len.
    """
    summary = tau(symbols)
    if summary.length > max_len:
        raise ValueError(f"string length {summary.length} exceeds bound {max_len}")
    if max(symbols) > max_state:
        raise ValueError("string exceeds the requested alphabet")
    incs = zero_adjusted_increments(symbols)
    count = 0
    for perm in _distinct_permutations(sorted(incs)):
        cand = rebuild_from_increments(summary.initial, perm)
        if max(cand) <= max_state and sum(1 for c in cand if c == 0) == summary.zero_count:
            count += 1
    return count


def count_tau_class_bruteforce(symbols: Marks, max_state: int) -> int:
    """Oracle for count_tau_class: filter the full enumeration of the space."""
    target = tau(symbols)
    return sum(
        1 for cand in enumerate_dss(len(symbols), max_state) if tau(cand) == target
    )


def _distinct_permutations(items: list[int]) -> Iterator[tuple[int, ...]]:
    seen = set()
    for perm in itertools.permutations(items):
        if perm not in seen:
            seen.add(perm)
            yield perm


def transformation_closure(
    symbols: Marks, max_states: int = 20000
) -> set[tuple[int, ...]]:
    """All strings reachable from `symbols` via valid block switches and
    increment-run permutations (breadth-first to a fixpoint)."""
    start = tuple(symbols)
    seen = {start}
    frontier = [start]
    while frontier:
        cur = frontier.pop()
        for op in _candidate_ops(cur):
            try:
                nxt = apply_transformation(cur, op)
            except ValueError:
                continue
            if nxt not in seen:
                if len(seen) >= max_states:
                    raise RuntimeError("transformation closure exceeded state budget")
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def _candidate_ops(s: tuple[int, ...]) -> Iterator[BlockSwitch | IncrementPermutation]:
    n = len(s)
    for i0 in range(n):
        for i1 in range(i0 + 1, n + 1):
            for j0 in range(i1, n):
                for j1 in range(j0 + 1, n + 1):
                    if s[i0] == s[j0]:
                        yield BlockSwitch(i0, i1, j0, j1)
    incs = zero_adjusted_increments(s)
    for start in range(len(incs)):
        for stop in range(start + 2, len(incs) + 1):
            window = incs[start:stop]
            if all(r >= 1 for r in window):
                for order in itertools.permutations(range(len(window))):
                    yield IncrementPermutation(start, order)


@dataclass(frozen=True)
class SweepRow:
    property: str
    checked: int
    violations: int


def terminal_lemma_sweep(max_len: int, max_state: int) -> SweepRow:
    """Check the terminal-state rule on every equivalent pair up to max_len.

    Grouping by summary establishes equivalence, so each pair check reduces
    to the terminal-state clauses themselves.
    """
    checked = violations = 0
    for length in range(1, max_len + 1):
        for members in tau_classes(enumerate_dss(length, max_state)).values():
            terminals = [s[-1] for s in members]
            for a_n, b_n in itertools.combinations(terminals, 2):
                checked += 1
                if not _terminal_clauses_hold(a_n, b_n):
                    violations += 1
    return SweepRow("terminal-state", checked, violations)


def t_implies_tau_sweep(max_len: int, max_state: int) -> SweepRow:
    """Transition-count equality must imply summary equality."""
    checked = violations = 0
    for length in range(1, max_len + 1):
        groups: dict[TransitionCounts, list[tuple[int, ...]]] = {}
        for s in enumerate_dss(length, max_state):
            groups.setdefault(transition_counts(s), []).append(s)
        for members in groups.values():
            for a, b in itertools.combinations(members, 2):
                checked += 1
                if not tau_equiv(a, b):
                    violations += 1
    return SweepRow("t-implies-tau", checked, violations)


def departures_sweep(max_len: int, max_state: int) -> SweepRow:
    """Departure counts must agree on every equivalent pair."""
    checked = violations = 0
    for length in range(1, max_len + 1):
        for members in tau_classes(enumerate_dss(length, max_state)).values():
            departures = [len(s) - 1 for s in members]
            for da, db in itertools.combinations(departures, 2):
                checked += 1
                if da != db:
                    violations += 1
    return SweepRow("departures-invariant", checked, violations)


def s_structure_sweep(max_total_len: int, max_state: int) -> SweepRow:
    """Concatenation stability over all admissible piece quadruples.

    For pieces a~b and x~y, the summary of a+x depends on x only through
    (summary of x, first symbol of x), and equivalent pieces share both, so
    quadruples are deduplicated by (terminal of a, terminal of b, first
    symbol of x).  Every representative is checked with the real
    concatenation test; `checked` counts representatives.
    """
    checked = violations = 0
    class_cache = {
        (length, max_state): tau_classes(enumerate_dss(length, max_state))
        for length in range(1, max_total_len)
    }
    for n in range(1, max_total_len):
        left_classes = class_cache[(n, max_state)]
        for m in range(1, max_total_len - n + 1):
            right_classes = class_cache.get((m, max_state))
            if right_classes is None:
                continue
            for left in left_classes.values():
                terminal_pairs = {
                    (a[-1], b[-1]): (a, b)
                    for a in left
                    for b in left
                }
                for right in right_classes.values():
                    x1 = right[0][0]
                    x_rep = right[0]
                    y_rep = right[-1]
                    for (ta, tb), (a, b) in terminal_pairs.items():
                        if x1 < ta - 1 or x1 < tb - 1:
                            continue  # concatenation would not be down-skip-free
                        checked += 1
                        if not check_s_structure(a, b, x_rep, y_rep):
                            violations += 1
    return SweepRow("s-structure", checked, violations)


def tau_exhaustive_report(max_len: int, max_state: int) -> list[SweepRow]:
    """The four exhaustive combinatorial checks at a given size bound."""
    return [
        terminal_lemma_sweep(max_len, max_state),
        t_implies_tau_sweep(max_len, max_state),
        s_structure_sweep(max_len, max_state),
        departures_sweep(max_len, max_state),
    ]
