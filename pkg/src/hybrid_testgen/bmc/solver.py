"""Interval propagation with branch-and-bound over W-bit integer symbols.

Each node's interval bounds its *wrapped* value.  A node is "exact" on a box
when its mathematical result cannot overflow there, and only exact nodes pass
narrowing down to their operands, which keeps propagation sound under
wrap-around.  Products of two non-constant terms are bounded forwards but never
narrowed backwards; splitting the box takes care of them.

Models are always checked by substitution before being returned.
"""

from __future__ import annotations

import enum
import itertools
import time
from dataclasses import dataclass, field
from typing import Optional

from .terms import DivisionByZero, TermBuilder, compile_check, evaluate, symbols, trunc_div


LEAF_POINTS = 1024


class Status(str, enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


@dataclass
class SolveResult:
    status: Status
    model: Optional[dict] = None
    box: dict = field(default_factory=dict)  # narrowed intervals when UNKNOWN
    nodes: int = 0

    @property
    def sat(self) -> bool:
        return self.status is Status.SAT


class _Budget(Exception):
    pass


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


class Propagator:
    def __init__(self, builder: TermBuilder):
        self.b = builder
        self.vmin = -builder.half
        self.vmax = builder.half - 1

    # -- forward -------------------------------------------------------------

    def forward(self, t, box, memo):
        key = id(t)
        hit = memo.get(key)
        if hit is not None:
            return hit
        head = t[0]
        if head == "const":
            res = (t[1], t[1], True)
        elif head == "sym":
            lo, hi = box[t[1]]
            res = (lo, hi, True)
        elif head == "lin":
            lo = hi = t[1]
            exact = True
            for atom, c in t[2]:
                alo, ahi, aex = self.forward(atom, box, memo)
                exact = exact and aex
                if c > 0:
                    lo, hi = lo + c * alo, hi + c * ahi
                else:
                    lo, hi = lo + c * ahi, hi + c * alo
            res = self._fit(lo, hi) if exact else (self.vmin, self.vmax, False)
        elif head == "neg":
            lo, hi, _ = self.forward(t[1], box, memo)
            res = self._fit(-hi, -lo)
        elif head == "not":
            lo, hi, _ = self.forward(t[1], box, memo)
            if lo == 0 and hi == 0:
                res = (1, 1, True)
            elif lo > 0 or hi < 0:
                res = (0, 0, True)
            else:
                res = (0, 1, True)
        else:
            a = self.forward(t[1], box, memo)
            c = self.forward(t[2], box, memo)
            res = self._binary(head, a, c)
        memo[key] = res
        return res

    def _fit(self, lo, hi):
        if lo >= self.vmin and hi <= self.vmax:
            return (lo, hi, True)
        return (self.vmin, self.vmax, False)

    def _binary(self, op, a, c):
        alo, ahi = a[0], a[1]
        clo, chi = c[0], c[1]
        if op == "+":
            return self._fit(alo + clo, ahi + chi)
        if op == "-":
            return self._fit(alo - chi, ahi - clo)
        if op == "*":
            ps = (alo * clo, alo * chi, ahi * clo, ahi * chi)
            return self._fit(min(ps), max(ps))
        if op == "/":
            vals = []
            for dlo, dhi in ((clo, min(chi, -1)), (max(clo, 1), chi)):
                if dlo > dhi:
                    continue
                for nlo, nhi in ((alo, min(ahi, 0)), (max(alo, 0), ahi)):
                    if nlo > nhi:
                        continue
                    for x in (nlo, nhi):
                        for y in (dlo, dhi):
                            vals.append(trunc_div(x, y))
            if not vals:
                return (self.vmin, self.vmax, False)
            return self._fit(min(vals), max(vals))
        if op == "%":
            m = max(abs(clo), abs(chi)) - 1
            if m < 0:
                return (self.vmin, self.vmax, False)
            if alo >= 0:
                return (0, min(ahi, m), True)
            if ahi <= 0:
                return (max(alo, -m), 0, True)
            return (max(alo, -m), min(ahi, m), True)
        if op == "==":
            if ahi < clo or chi < alo:
                return (0, 0, True)
            if alo == ahi == clo == chi:
                return (1, 1, True)
            return (0, 1, True)
        if op == "!=":
            if ahi < clo or chi < alo:
                return (1, 1, True)
            if alo == ahi == clo == chi:
                return (0, 0, True)
            return (0, 1, True)
        if op == "<":
            return self._order(ahi < clo, alo >= chi)
        if op == "<=":
            return self._order(ahi <= clo, alo > chi)
        if op == ">":
            return self._order(alo > chi, ahi <= clo)
        if op == ">=":
            return self._order(alo >= chi, ahi < clo)
        a_true, a_false = alo > 0 or ahi < 0, alo == ahi == 0
        c_true, c_false = clo > 0 or chi < 0, clo == chi == 0
        if op == "&&":
            return self._order(a_true and c_true, a_false or c_false)
        if op == "||":
            return self._order(a_true or c_true, a_false and c_false)
        raise ValueError(op)

    @staticmethod
    def _order(always, never):
        if always:
            return (1, 1, True)
        if never:
            return (0, 0, True)
        return (0, 1, True)

    # -- backward ------------------------------------------------------------

    def narrow(self, t, lo, hi, box, memo) -> bool:
        """Require the value of ``t`` to lie in ``[lo, hi]``; False if impossible."""
        cur = self.forward(t, box, memo)
        nlo, nhi = max(lo, cur[0]), min(hi, cur[1])
        if nlo > nhi:
            return False
        head = t[0]
        if head == "lin" and len(t[2]) == 1 and (nlo != cur[0] or nhi != cur[1]):
            return self._narrow_wrapped(t, nlo, nhi, box, memo)
        if not cur[2] or (nlo == cur[0] and nhi == cur[1]):
            return True
        if head == "sym":
            # the memo may hold a stale, wider interval; intersect with the box itself
            blo, bhi = box[t[1]]
            nlo, nhi = max(nlo, blo), min(nhi, bhi)
            if nlo > nhi:
                return False
            box[t[1]] = (nlo, nhi)
            return True
        if head == "const":
            return True
        if head in ("not", "==", "!=", "<", "<=", ">", ">=", "&&", "||"):
            if nlo >= 1:
                return self.require(t, True, box, memo)
            if nhi <= 0:
                return self.require(t, False, box, memo)
            return True
        if head == "lin":
            return self._narrow_lin(t, nlo, nhi, box, memo)
        if head == "neg":
            return self.narrow(t[1], -nhi, -nlo, box, memo)
        if head in ("+", "-", "*"):
            a = self.forward(t[1], box, memo)
            c = self.forward(t[2], box, memo)
            if head == "+":
                return (self.narrow(t[1], nlo - c[1], nhi - c[0], box, memo)
                        and self.narrow(t[2], nlo - a[1], nhi - a[0], box, memo))
            if head == "-":
                return (self.narrow(t[1], nlo + c[0], nhi + c[1], box, memo)
                        and self.narrow(t[2], a[0] - nhi, a[1] - nlo, box, memo))
            if c[0] == c[1]:
                return self._narrow_scaled(t[1], c[0], nlo, nhi, box, memo)
            if a[0] == a[1]:
                return self._narrow_scaled(t[2], a[0], nlo, nhi, box, memo)
            return True
        if head == "%":
            # the remainder takes the sign of the dividend
            if nlo > 0:
                return self.narrow(t[1], 1, self.vmax, box, memo)
            if nhi < 0:
                return self.narrow(t[1], self.vmin, -1, box, memo)
            return True
        if head == "/":
            return self._narrow_div(t, nlo, nhi, box, memo)
        return True

    def _narrow_div(self, t, lo, hi, box, memo) -> bool:
        a = self.forward(t[1], box, memo)
        c = self.forward(t[2], box, memo)
        if c[0] > 0 or c[1] < 0:
            # divisor of known sign: bound the dividend
            if c[0] > 0:
                dlo, dhi, qlo, qhi = c[0], c[1], lo, hi
            else:
                dlo, dhi, qlo, qhi = -c[1], -c[0], -hi, -lo
            alo = qlo * dlo if qlo >= 1 else (qlo - 1) * dhi + 1
            ahi = qhi * dlo if qhi <= -1 else (qhi + 1) * dhi - 1
            if not self.narrow(t[1], alo, ahi, box, memo):
                return False
        if a[0] >= 0 or a[1] <= 0:
            # dividend of known sign and a quotient bounded away from zero: bound the divisor
            mag = max(abs(a[0]), abs(a[1]))
            if lo >= 1:
                m = mag // lo
                return self.narrow(t[2], 1, m, box, memo) if a[0] >= 0 \
                    else self.narrow(t[2], -m, -1, box, memo)
            if hi <= -1:
                m = mag // -hi
                return self.narrow(t[2], -m, -1, box, memo) if a[0] >= 0 \
                    else self.narrow(t[2], 1, m, box, memo)
        return True

    def _narrow_wrapped(self, t, lo, hi, box, memo) -> bool:
        # k + c*x is computed modulo 2**W: try every window the unwrapped sum can fall in
        k = t[1]
        atom, c = t[2][0]
        alo, ahi, _ = self.forward(atom, box, memo)
        ulo, uhi = (k + c * alo, k + c * ahi) if c > 0 else (k + c * ahi, k + c * alo)
        span = 2 * self.b.half
        first, last = (ulo - hi) // span, -((lo - uhi) // span)
        if last - first > 8:
            return True
        nlo = nhi = None
        for m in range(first, last + 1):
            wlo, whi = max(lo + m * span, ulo), min(hi + m * span, uhi)
            if wlo > whi:
                continue
            if c > 0:
                vlo, vhi = _ceil_div(wlo - k, c), (whi - k) // c
            else:
                vlo, vhi = _ceil_div(whi - k, c), (wlo - k) // c
            vlo, vhi = max(vlo, alo), min(vhi, ahi)
            if vlo > vhi:
                continue
            nlo = vlo if nlo is None else min(nlo, vlo)
            nhi = vhi if nhi is None else max(nhi, vhi)
        if nlo is None:
            return False
        return self.narrow(atom, nlo, nhi, box, memo)

    def _narrow_lin(self, t, lo, hi, box, memo) -> bool:
        # each term c*x lies in [lo, hi] minus the range of everything else
        spans = []
        for atom, c in t[2]:
            alo, ahi, _ = self.forward(atom, box, memo)
            spans.append((c * alo, c * ahi) if c > 0 else (c * ahi, c * alo))
        total_lo = t[1] + sum(s[0] for s in spans)
        total_hi = t[1] + sum(s[1] for s in spans)
        for (atom, c), (slo, shi) in zip(t[2], spans):
            rest_lo, rest_hi = total_lo - slo, total_hi - shi
            if not self._narrow_scaled(atom, c, lo - rest_hi, hi - rest_lo, box, memo):
                return False
        return True

    def _narrow_scaled(self, t, k, lo, hi, box, memo) -> bool:
        if k == 0:
            return lo <= 0 <= hi
        if k > 0:
            return self.narrow(t, _ceil_div(lo, k), hi // k, box, memo)
        return self.narrow(t, _ceil_div(hi, k), lo // k, box, memo)

    def require(self, t, truth: bool, box, memo) -> bool:
        """Require ``t`` to be non-zero (``truth``) or zero."""
        cur = self.forward(t, box, memo)
        if truth and cur[0] == 0 and cur[1] == 0:
            return False
        if not truth and (cur[0] > 0 or cur[1] < 0):
            return False
        head = t[0]
        if head == "not":
            return self.require(t[1], not truth, box, memo)
        if head == "&&":
            if truth:
                return self.require(t[1], True, box, memo) and self.require(t[2], True, box, memo)
            a = self.forward(t[1], box, memo)
            c = self.forward(t[2], box, memo)
            if a[0] > 0 or a[1] < 0:
                return self.require(t[2], False, box, memo)
            if c[0] > 0 or c[1] < 0:
                return self.require(t[1], False, box, memo)
            return True
        if head == "||":
            if not truth:
                return self.require(t[1], False, box, memo) and self.require(t[2], False, box, memo)
            a = self.forward(t[1], box, memo)
            c = self.forward(t[2], box, memo)
            if a[0] == a[1] == 0:
                return self.require(t[2], True, box, memo)
            if c[0] == c[1] == 0:
                return self.require(t[1], True, box, memo)
            return True
        if head in ("==", "!=", "<", "<=", ">", ">="):
            op = head if truth else _NEGATED[head]
            return self._compare(op, t[1], t[2], box, memo)
        if truth:
            if cur[0] == 0:
                return self.narrow(t, 1, cur[1], box, memo)
            if cur[1] == 0:
                return self.narrow(t, cur[0], -1, box, memo)
            return True
        return self.narrow(t, 0, 0, box, memo)

    def _compare(self, op, x, y, box, memo) -> bool:
        a = self.forward(x, box, memo)
        c = self.forward(y, box, memo)
        if op == "==":
            lo, hi = max(a[0], c[0]), min(a[1], c[1])
            if lo > hi:
                return False
            return self.narrow(x, lo, hi, box, memo) and self.narrow(y, lo, hi, box, memo)
        if op == "!=":
            if a[0] == a[1] == c[0] == c[1]:
                return False
            if c[0] == c[1]:
                return self._exclude(x, a, c[0], box, memo)
            if a[0] == a[1]:
                return self._exclude(y, c, a[0], box, memo)
            return True
        if op in (">", ">="):
            op = "<" if op == ">" else "<="
            x, y, a, c = y, x, c, a
        gap = 1 if op == "<" else 0
        return (self.narrow(x, a[0], c[1] - gap, box, memo)
                and self.narrow(y, a[0] + gap, c[1], box, memo))

    def _exclude(self, t, cur, v, box, memo) -> bool:
        if cur[0] == v:
            return self.narrow(t, v + 1, cur[1], box, memo)
        if cur[1] == v:
            return self.narrow(t, cur[0], v - 1, box, memo)
        return True

    def propagate(self, constraints, box, rounds: int = 16) -> bool:
        """Narrow ``box`` in place to a fixpoint (or ``rounds``); False if infeasible."""
        for _ in range(rounds):
            before = dict(box)
            for c in constraints:
                memo = {}
                if not self.require(c, True, box, memo):
                    return False
            if box == before:
                break
        return True

    def status(self, constraints, box) -> Optional[bool]:
        """True if every constraint holds on the whole box, False if one never does."""
        memo = {}
        all_true = True
        for c in constraints:
            lo, hi, _ = self.forward(c, box, memo)
            if lo == 0 and hi == 0:
                return False
            if not (lo > 0 or hi < 0):
                all_true = False
        return True if all_true else None


_NEGATED = {"==": "!=", "!=": "==", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}


def _closest_to_zero(lo, hi):
    if lo <= 0 <= hi:
        return 0
    return lo if lo > 0 else hi


class Solver:
    """Decide a conjunction of constraints over bounded integer symbols."""

    def __init__(self, width: int = 32):
        self.builder = TermBuilder(width)
        self.prop = Propagator(self.builder)

    def check_model(self, constraints, model) -> bool:
        memo = {}
        try:
            return all(evaluate(c, model, self.builder, memo) for c in constraints)
        except DivisionByZero:
            return False

    def solve(self, constraints, domains: dict, node_limit: int = 20000,
              deadline: Optional[float] = None) -> SolveResult:
        """``domains`` maps every symbol to an inclusive ``(lo, hi)`` interval."""
        constraints = list(constraints)
        domains = dict(domains)
        for c in constraints:
            for s in symbols(c):
                if s not in domains:
                    domains[s] = (self.prop.vmin, self.prop.vmax)
        counter = [0]
        self._fast = compile_check(constraints, self.builder)
        # Small magnitudes first: solutions of guards usually live there and
        # products stay exact, so propagation has something to work with.
        for mag in (16, 256, 1 << 16):
            sub = {}
            for s, (lo, hi) in domains.items():
                sub[s] = (max(lo, -mag), min(hi, mag))
            if sub == domains or any(lo > hi for lo, hi in sub.values()):
                continue
            try:
                res = self._bnb(constraints, sub, counter, node_limit // 4 + counter[0], deadline)
            except _Budget:
                continue
            if res.sat:
                res.nodes = counter[0]
                return res
        try:
            res = self._bnb(constraints, domains, counter, node_limit + counter[0], deadline)
        except _Budget as b:
            res = SolveResult(Status.UNKNOWN, box=b.args[0] if b.args else domains)
        res.nodes = counter[0]
        return res

    def _bnb(self, constraints, domains, counter, limit, deadline) -> SolveResult:
        active = set()
        for c in constraints:
            symbols(c, active)
        root = dict(domains)
        if not self.prop.propagate(constraints, root):
            return SolveResult(Status.UNSAT)
        stack = [root]
        while stack:
            counter[0] += 1
            if counter[0] > limit or (deadline is not None and counter[0] % 64 == 0 and time.monotonic() > deadline):
                raise _Budget(_hull(stack, domains))
            box = stack.pop()
            if not self.prop.propagate(constraints, box, rounds=4):
                continue
            st = self.prop.status(constraints, box)
            if st is False:
                continue
            model = self._candidates(constraints, box, st)
            if model is not None:
                return SolveResult(Status.SAT, model=model)
            points = 1
            for v in active:
                points *= box[v][1] - box[v][0] + 1
            if points <= LEAF_POINTS:
                # Splitting further costs more than checking every point.
                counter[0] += points // 64
                model = self._enumerate(constraints, box, sorted(active))
                if model is not None:
                    return SolveResult(Status.SAT, model=model)
                continue
            split = None
            width = 0
            for s in sorted(active):
                lo, hi = box[s]
                if hi - lo > width:
                    split, width = s, hi - lo
            if split is None:
                continue
            lo, hi = box[split]
            mid = lo + (hi - lo) // 2
            left, right = dict(box), dict(box)
            left[split] = (lo, mid)
            right[split] = (mid + 1, hi)
            near, far = (left, right) if abs(_closest_to_zero(lo, mid)) <= abs(_closest_to_zero(mid + 1, hi)) else (right, left)
            stack.append(far)
            stack.append(near)
        return SolveResult(Status.UNSAT)

    def _enumerate(self, constraints, box, names) -> Optional[dict]:
        f, order = self._fast
        pos = {v: i for i, v in enumerate(order)}
        point = [box[v][0] for v in order]
        idx = [pos[v] for v in names]
        for combo in itertools.product(*(range(box[v][0], box[v][1] + 1) for v in names)):
            for i, val in zip(idx, combo):
                point[i] = val
            if f(*point):
                model = {v: lo for v, (lo, _hi) in box.items()}
                model.update(zip(order, point))
                if self.check_model(constraints, model):
                    return model
        return None

    def _candidates(self, constraints, box, all_true) -> Optional[dict]:
        base = {s: _closest_to_zero(lo, hi) for s, (lo, hi) in box.items()}
        tries = [base]
        if not all_true:
            tries.append({s: lo for s, (lo, hi) in box.items()})
            tries.append({s: hi for s, (lo, hi) in box.items()})
            tries.append({s: lo + (hi - lo) // 2 for s, (lo, hi) in box.items()})
        f, order = self._fast
        for model in tries:
            if f(*(model[v] for v in order)) and self.check_model(constraints, model):
                return model
        return None


def _hull(stack, domains) -> dict:
    if not stack:
        return dict(domains)
    out = {}
    for s in domains:
        out[s] = (min(b[s][0] for b in stack), max(b[s][1] for b in stack))
    return out


def solve(constraints, domains: dict, width: int = 32, node_limit: int = 20000,
          timeout: Optional[float] = None) -> SolveResult:
    deadline = time.monotonic() + timeout if timeout is not None else None
    return Solver(width).solve(constraints, domains, node_limit, deadline)
