"""Handicap balancing: per-joint products W_p and lexicographic descent.

W_p aggregates, over every qualifying tuple at p, the per-variety counts
|D_{p,V}| normalized by the dimension count of the ambient degree-n
space on V; the M(p)-th root is carried exactly as a (radicand, root
index) pair and compared by cross-powering.  The descent repeatedly
decrements the handicaps of the currently largest W values until no
consecutive gap in the sorted list exceeds the threshold tau.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .basis import Handicap, build_ledger
from .errors import Disconnected, LedgerMissing
from .field import binom


# ---------------------------------------------------------------------------
# Exact M-th roots of nonnegative rationals
# ---------------------------------------------------------------------------


def integer_nth_root(x: int, m: int) -> int:
    """floor(x**(1/m)) for x >= 0, exact."""
    if x < 0:
        raise ValueError("negative radicand")
    if x in (0, 1) or m == 1:
        return x
    k = 1 << ((x.bit_length() + m - 1) // m)  # upper bound
    while True:
        nk = ((m - 1) * k + x // k ** (m - 1)) // m
        if nk >= k:
            break
        k = nk
    while k ** m > x:
        k -= 1
    return k


@dataclass(frozen=True)
class RootValue:
    """The exact nonnegative real Q**(1/M)."""

    Q: Fraction
    M: int = 1

    def __post_init__(self):
        if self.Q < 0 or self.M < 1:
            raise ValueError("need Q >= 0 and M >= 1")

    def is_zero(self) -> bool:
        return self.Q == 0

    def cmp(self, other: "RootValue") -> int:
        """-1 / 0 / 1 comparison of the real values, exact."""
        a = self.Q ** other.M
        b = other.Q ** self.M
        return (a > b) - (a < b)

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __eq__(self, other):
        return isinstance(other, RootValue) and self.cmp(other) == 0

    def __hash__(self):
        # hash via the canonical M-th power with reduced root index
        return hash(self.Q)

    def to_rational(self) -> Fraction | None:
        """Exact rational value when Q is a perfect M-th power, else None."""
        num = integer_nth_root(self.Q.numerator, self.M)
        den = integer_nth_root(self.Q.denominator, self.M)
        if num**self.M == self.Q.numerator and den**self.M == self.Q.denominator:
            return Fraction(num, den)
        return None

    def brackets(self, bits: int = 48) -> tuple:
        """Rational lo <= value <= hi with hi - lo <= 2**-bits."""
        N = 1 << bits
        A = self.Q.numerator * N**self.M
        B = self.Q.denominator
        k = integer_nth_root(A // B, self.M)
        while (k + 1) ** self.M * B <= A:
            k += 1
        return Fraction(k, N), Fraction(k + 1, N)

    def approx(self) -> float:
        lo, hi = self.brackets(48)
        return float((lo + hi) / 2)


def root_gap_exceeds(a: RootValue, b: RootValue, tau: Fraction) -> bool:
    """Exact verdict on a - b > tau for nonnegative root values."""
    ra, rb = a.to_rational(), b.to_rational()
    if ra is not None and rb is not None:
        return ra - rb > tau
    bits = 48
    while bits <= 3072:
        alo, ahi = a.brackets(bits)
        blo, bhi = b.brackets(bits)
        if alo - bhi > tau:
            return True
        if ahi - blo <= tau:
            return False
        bits *= 2
    raise ArithmeticError("could not separate root values from the threshold")


# ---------------------------------------------------------------------------
# W products
# ---------------------------------------------------------------------------


def build_all_ledgers(cfg, h: Handicap, n: int, cap: int | None = None) -> dict:
    return {ref: build_ledger(cfg, ref, h, n, cap=cap) for ref in cfg.all_members()}


def compute_W(cfg, h: Handicap, n: int, weights=None, ledgers=None) -> dict:
    """Exact W_p for every joint.

    W_p = (1/w_p) * [ prod over qualifying tuples, over varieties V in
    the tuple, of |D_{p,V}| / C(n + dim V, dim V) ] ** (1/M(p)); the
    weight is folded into the radicand so a single RootValue carries the
    whole expression.
    """
    if ledgers is None:
        ledgers = build_all_ledgers(cfg, h, n)
    out = {}
    for j in range(len(cfg.joints)):
        tuples = cfg.multiplicity[j]
        M = len(tuples)
        if M == 0:
            raise LedgerMissing(f"joint {j} has no qualifying tuples")
        Q = Fraction(1)
        for choice in tuples:
            for fi, picks in enumerate(choice):
                k = cfg.families[fi].k
                norm = binom(n + k, k)
                for mi in picks:
                    led = ledgers.get((fi, mi))
                    if led is None:
                        raise LedgerMissing(f"no ledger for member {(fi, mi)}")
                    Q *= Fraction(led.joint_total(j), norm)
        w = Fraction(weights[j]) if weights is not None else Fraction(1)
        out[j] = RootValue(Q / w**M, M)
    return out


# ---------------------------------------------------------------------------
# Descent
# ---------------------------------------------------------------------------


@dataclass
class BalanceState:
    alpha: Handicap
    W: dict
    sortedW: list  # (joint, RootValue) descending
    iteration: int
    status: str  # "balanced" | "cap-hit"
    log: list  # per-iteration dicts


def _sorted_desc(W: dict) -> list:
    order = sorted(W, key=lambda j: (W[j], -j))
    order.reverse()
    return [(j, W[j]) for j in order]


def _lex_cmp(a: list, b: list) -> int:
    """Compare two descending RootValue lists lexicographically."""
    for (_, x), (_, y) in zip(a, b):
        c = x.cmp(y)
        if c:
            return c
    return (len(a) > len(b)) - (len(a) < len(b))


def default_tau(cfg, n: int) -> Fraction:
    s = cfg.s
    maxdeg = max((V.degree for f in cfg.families for V in f.members), default=1)
    return Fraction(8 * s * maxdeg**s, n)


def balance(cfg, n: int, weights=None, tau=None, cap: int = 10**4) -> BalanceState:
    """Lexicographic descent on the sorted W values.

    Repeatedly finds the least t whose consecutive sorted gap exceeds
    tau, decrements the handicaps of the top-t joints (with doubling
    step size until the W multiset changes), and rebuilds.  Stops when
    no gap exceeds tau or the rebuild cap is hit.
    """
    from .config import connected_components

    if len(connected_components(cfg)) > 1:
        raise Disconnected("balance requires a connected configuration")
    if tau is None:
        tau = default_tau(cfg, n)
    tau = Fraction(tau)
    joints = list(range(len(cfg.joints)))
    h = Handicap.zero(joints)
    rebuilds = 0
    log = []
    W = compute_W(cfg, h, n, weights)
    rebuilds += 1
    sw = _sorted_desc(W)
    iteration = 0
    status = "balanced"
    move_cap = 4 * n * max(1, len(joints))  # largest decrement tried per move
    while True:
        gaps = [
            i + 1
            for i in range(len(sw) - 1)
            if root_gap_exceeds(sw[i][1], sw[i + 1][1], tau)
        ]
        if not gaps:
            break
        moved = False
        used_t = gaps[0]
        # least gap position first; fall through to wider blocks when the
        # narrow move cannot lower the sorted multiset
        for t in gaps:
            top = [j for j, _ in sw[:t]]
            step = 1
            while step <= move_cap and rebuilds < cap:
                alpha2 = dict(h.alpha)
                for j in top:
                    alpha2[j] -= step
                h2 = Handicap(alpha2, list(h.preassigned))
                W2 = compute_W(cfg, h2, n, weights)
                rebuilds += 1
                sw2 = _sorted_desc(W2)
                # accept only strictly lex-decreasing multisets; a changed
                # but larger multiset means the step is not yet big enough
                # to push the top block below the rest, so keep doubling
                if _lex_cmp(sw2, sw) < 0:
                    h, W, sw = h2, W2, sw2
                    moved = True
                    used_t = t
                    break
                step *= 2
            if moved or rebuilds >= cap:
                break
        iteration += 1
        lo, hi = sw[-1][1], sw[0][1]
        log.append(
            {
                "iteration": iteration,
                "t": used_t,
                "min_W": lo.approx(),
                "max_W": hi.approx(),
                "changed": moved,
            }
        )
        if not moved or rebuilds >= cap:
            status = "cap-hit"
            break
    return BalanceState(h, W, sw, iteration, status, log)
