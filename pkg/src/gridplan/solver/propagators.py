"""Propagators over a search state.

A state holds, per task, the routing value ``x`` (-1 unknown, 0, 1) and the
start-time bounds ``lo``/``hi``.  Start bounds of a task whose routing value
is 0 are meaningless and ignored.  Every propagator raises ``Conflict`` when
the state cannot be extended to a solution.
"""
from __future__ import annotations

from .model import Model, Resource, StorageResource


class Conflict(Exception):
    pass


class State:
    __slots__ = ("x", "lo", "hi", "dur", "changed")

    def __init__(self, x, lo, hi, dur):
        self.x = x
        self.lo = lo
        self.hi = hi
        self.dur = dur
        self.changed = False

    def copy(self) -> "State":
        return State(self.x[:], self.lo[:], self.hi[:], self.dur)

    def set_x(self, t: int, v: int):
        cur = self.x[t]
        if cur == v:
            return
        if cur != -1:
            raise Conflict
        self.x[t] = v
        self.changed = True
        if v == 1 and self.lo[t] > self.hi[t]:
            raise Conflict

    def _empty(self, t: int):
        if self.x[t] == 1:
            raise Conflict
        if self.x[t] == -1:
            self.x[t] = 0
            self.changed = True

    def set_lo(self, t: int, v: int):
        if v > self.lo[t]:
            self.lo[t] = v
            self.changed = True
            if v > self.hi[t]:
                self._empty(t)

    def set_hi(self, t: int, v: int):
        if v < self.hi[t]:
            self.hi[t] = v
            self.changed = True
            if v < self.lo[t]:
                self._empty(t)


def makespan_bound(m: Model, st: State, ub: int):
    x, hi, dur = st.x, st.hi, st.dur
    for t in range(len(x)):
        if x[t] != 0 and hi[t] > ub - dur[t]:
            st.set_hi(t, ub - dur[t])


def exactly_one(tasks: list[int], st: State):
    x = st.x
    one = -1
    free = []
    for t in tasks:
        v = x[t]
        if v == 1:
            if one >= 0:
                raise Conflict
            one = t
        elif v == -1:
            free.append(t)
    if one >= 0:
        for t in free:
            st.set_x(t, 0)
    elif not free:
        raise Conflict
    elif len(free) == 1:
        st.set_x(free[0], 1)


def _at_most_one(tasks: list[int], st: State) -> tuple[bool, list[int]]:
    """Enforce sum <= 1; return (some task fixed to 1, still-free tasks)."""
    x = st.x
    one = -1
    free = []
    for t in tasks:
        v = x[t]
        if v == 1:
            if one >= 0:
                raise Conflict
            one = t
        elif v == -1:
            free.append(t)
    if one >= 0:
        for t in free:
            st.set_x(t, 0)
        return True, []
    return False, free


def flow(ins: list[int], outs: list[int], st: State):
    """Transit node: in-sum <= 1, out-sum <= 1, in-sum == out-sum."""
    in_one, in_free = _at_most_one(ins, st)
    out_one, out_free = _at_most_one(outs, st)
    if in_one:
        if not out_one:
            if not out_free:
                raise Conflict
            if len(out_free) == 1:
                st.set_x(out_free[0], 1)
    elif not in_free:
        if out_one:
            raise Conflict
        for t in out_free:
            st.set_x(t, 0)
    if out_one:
        if not in_one:
            if not in_free:
                raise Conflict
            if len(in_free) == 1:
                st.set_x(in_free[0], 1)
    elif not out_free:
        for t in in_free:
            st.set_x(t, 0)


def chaining(ti: int, to: int, st: State):
    """An outgoing transfer starts only after the incoming one has ended."""
    x, lo, hi, dur = st.x, st.lo, st.hi, st.dur
    xi, xo = x[ti], x[to]
    if xi == 0 or xo == 0:
        return
    if xi == 1 and xo == 1:
        st.set_lo(to, lo[ti] + dur[ti])
        st.set_hi(ti, hi[to] - dur[ti])
    elif lo[ti] + dur[ti] > hi[to]:
        if xi == 1:
            st.set_x(to, 0)
        elif xo == 1:
            st.set_x(ti, 0)


def _overload(items: list[tuple[int, int, int]], capacity: int):
    """Energy check: items are (est, lct, energy)."""
    if len(items) < 2:
        return
    by_lct = sorted(items, key=lambda it: it[1])
    for a in {it[0] for it in items}:
        total = 0
        for est, lct, e in by_lct:
            if est >= a:
                total += e
                if total > capacity * (lct - a):
                    raise Conflict


def cumulative(res: Resource, st: State, energetic: bool):
    """Timetable filtering for a cumulative resource (unary when capacity is 1)."""
    x, lo, hi, dur = st.x, st.lo, st.hi, st.dur
    cap = res.capacity
    parts = []
    end = 0
    for s, e, c in res.fakes:
        parts.append((-1, s, e, c))
        end = max(end, e)
    active = []
    for t, c in res.tasks:
        v = x[t]
        if v == 0:
            continue
        if c > cap:
            st.set_x(t, 0)
            continue
        active.append((t, c))
        end = max(end, hi[t] + dur[t])
        if v == 1 and hi[t] < lo[t] + dur[t]:
            parts.append((t, hi[t], lo[t] + dur[t], c))
    if not active:
        return
    prof = [0] * (end + 1)
    for _, a, b, c in parts:
        for p in range(a, b):
            prof[p] += c
    if parts and max(prof) > cap:
        raise Conflict

    own_part = {p[0]: p for p in parts if p[0] >= 0}
    for t, c in active:
        if x[t] == 0:
            continue
        d = dur[t]
        lim = cap - c
        own = own_part.get(t)
        oa, ob = (own[1], own[2]) if own else (0, 0)
        s = lo[t]
        h = hi[t]
        while s <= h:
            bad = -1
            for p in range(s + d - 1, s - 1, -1):
                if prof[p] - (c if oa <= p < ob else 0) > lim:
                    bad = p
                    break
            if bad < 0:
                break
            s = bad + 1
        st.set_lo(t, s)
        if x[t] == 0:
            continue
        s = hi[t]
        l = lo[t]
        while s >= l:
            bad = -1
            for p in range(s, s + d):
                if prof[p] - (c if oa <= p < ob else 0) > lim:
                    bad = p
                    break
            if bad < 0:
                break
            s = bad - d
        st.set_hi(t, s)

    if energetic:
        items = [(s, e, (e - s) * c) for s, e, c in res.fakes]
        items += [(lo[t], hi[t] + dur[t], dur[t] * c) for t, c in active if x[t] == 1]
        _overload(items, cap)


def storage(res: StorageResource, st: State):
    """Storage held at a transit site from the start of the incoming transfer
    until the end of the outgoing one."""
    x, lo, hi, dur = st.x, st.lo, st.hi, st.dur
    cap = res.capacity
    parts = []
    end = 0
    for s, e, c in res.fakes:
        parts.append((-1, s, e, c))
        end = max(end, e)
    used = []
    for k, (ti, to, size) in enumerate(res.pairs):
        xi, xo = x[ti], x[to]
        if xi == 0 or xo == 0:
            continue
        if size > cap:
            if xi == 1:
                st.set_x(to, 0)
            elif xo == 1:
                st.set_x(ti, 0)
            continue
        if xi == 1 and xo == 1:
            used.append(k)
            end = max(end, hi[to] + dur[to])
            a, b = hi[ti], lo[to] + dur[to]
            if a < b:
                parts.append((k, a, b, size))
    if not used:
        if parts:
            _check_profile(parts, end, cap)
        return
    prof = _check_profile(parts, end, cap)
    own_part = {p[0]: p for p in parts if p[0] >= 0}
    for k in used:
        ti, to, size = res.pairs[k]
        own = own_part.get(k)
        oa, ob = (own[1], own[2]) if own else (0, 0)
        lim = cap - size

        def blocked(p):
            return prof[p] - (size if oa <= p < ob else 0) > lim

        # occupancy covers [start_in, lo_out + dur_out) whatever start_in is
        stop = lo[to] + dur[to]
        for p in range(stop - 1, lo[ti] - 1, -1):
            if blocked(p):
                st.set_lo(ti, p + 1)
                break
        # and [hi_in, end_out)
        for p in range(hi[ti], hi[to] + dur[to]):
            if blocked(p):
                st.set_hi(to, p - dur[to])
                break


def _check_profile(parts, end, cap) -> list[int]:
    prof = [0] * (end + 1)
    for _, a, b, c in parts:
        for p in range(a, b):
            prof[p] += c
    if max(prof) > cap:
        raise Conflict
    return prof


def lex_links(first: list[tuple[int, int]], second: list[tuple[int, int]], st: State):
    """Link index chosen by ``first`` <= that chosen by ``second``; on a tie
    the first demand starts no later than the second."""
    x, lo, hi = st.x, st.lo, st.hi
    min_first = min((li for li, t in first if x[t] != 0), default=None)
    max_second = max((li for li, t in second if x[t] != 0), default=None)
    if min_first is None or max_second is None:
        raise Conflict
    for li, t in first:
        if li > max_second and x[t] != 0:
            st.set_x(t, 0)
    for li, t in second:
        if li < min_first and x[t] != 0:
            st.set_x(t, 0)
    chosen_p = next(((li, t) for li, t in first if x[t] == 1), None)
    chosen_q = next(((li, t) for li, t in second if x[t] == 1), None)
    if chosen_p and chosen_q and chosen_p[0] == chosen_q[0]:
        tp, tq = chosen_p[1], chosen_q[1]
        st.set_hi(tp, hi[tq])
        st.set_lo(tq, lo[tp])


def class_capacity(members: list[list[tuple[int, int]]], link_res: dict, st: State, ub: int):
    """Members j.. of an ordered class all use links at or above the lowest
    link still open to member j; those links must have room for them.

    Room on a link is bounded by the time left in [0, ub] after the transfers
    of other demands already routed there, divided by the member duration.
    """
    x, dur = st.x, st.dur
    own = {t for member in members for _, t in member}
    room: dict[int, int] = {}
    for member in members:
        for li, t in member:
            if li in room:
                continue
            busy = 0
            res = link_res[li]
            for s, e, _ in res.fakes:
                busy += max(0, min(e, ub) - max(s, 0))
            for u, _ in res.tasks:
                if x[u] == 1 and u not in own:
                    busy += dur[u]
            room[li] = max(0, ub - busy) // dur[t]
    if not room:
        return
    for j in range(len(members) - 1, -1, -1):
        low = min((li for li, t in members[j] if x[t] != 0), default=None)
        if low is None:
            raise Conflict
        need = len(members) - j
        need += sum(1 for member in members[:j] for li, t in member if x[t] == 1 and li >= low)
        if sum(r for li, r in room.items() if li >= low) < need:
            raise Conflict


def propagate(m: Model, st: State, ub: int) -> None:
    """Run all propagators to a fixpoint; raise Conflict on failure."""
    energetic = m.config.propagation == "energetic"
    while True:
        st.changed = False
        makespan_bound(m, st, ub)
        for group in m.exactly_one:
            exactly_one(group, st)
        for ins, outs in m.flow:
            flow(ins, outs, st)
        for ti, to in m.chains:
            chaining(ti, to, st)
        for first, second in m.symmetry:
            lex_links(first, second, st)
        for members in m.symmetry_classes:
            class_capacity(members, m.link_res, st, ub)
        for res in m.resources:
            cumulative(res, st, energetic)
        for res in m.storage:
            storage(res, st)
        if not st.changed:
            return
