"""Type criteria: symbolic decisions where a closed-form rule allows it, horizon-bounded evidence otherwise."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .catalog import CatalogEntry
from .dyadic import DyadicRational
from .errors import BadInput, UnsupportedRule
from .rules import Rule
from .sets import (Affine, CountVector, DyadicFamily, LambdaSpec, Window, _tau_of, as_fraction, count_cells,
                   enumerate_set)

TYPE1, TYPE2, EVIDENCE, INCONCLUSIVE = "Type1", "Type2", "Evidence", "Inconclusive"
GROWTH_THRESHOLD = 10**6
MAX_COUNT_EXP = 4096
SPEED_THRESHOLD = 4
INF = math.inf


@dataclass
class Verdict:
    kind: str
    reason: str
    params: dict = field(default_factory=dict)
    witness: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    evidence_for: str | None = None

    def to_dict(self) -> dict:
        d = {"criterion": self.reason, "kind": self.kind, "params": self.params, "witness": self.witness,
             "notes": list(self.notes)}
        if self.evidence_for:
            d["evidence_for"] = self.evidence_for
        return d


@dataclass(frozen=True)
class RatioChain:
    """Cells ``m_k`` on the ``ε' = ε/3`` grid with ``r_k >= 2^k`` and ``m_{k+1} - m_k >= 2``."""

    eps_prime: Fraction
    indices: tuple
    ratios: tuple  # Fraction or math.inf
    counts: CountVector | None = None

    def __len__(self):
        return len(self.indices)

    def is_valid(self) -> bool:
        for k, (m, r) in enumerate(zip(self.indices, self.ratios), start=1):
            if r < 2**k:
                return False
            if k > 1 and m - self.indices[k - 2] < 2:
                return False
        return True


def _exact_counts(spec: LambdaSpec) -> bool:
    if spec.exact:
        return True
    return isinstance(spec, Affine) and _exact_counts(spec.base)


def _require_exact(spec: LambdaSpec, what: str):
    if not _exact_counts(spec):
        raise BadInput(f"{what} needs an exact spec; this one is float-valued")


def _fmt(x) -> str:
    if x == INF:
        return "inf"
    x = Fraction(x)
    if x.denominator == 1 and x.numerator.bit_length() < 200:
        return str(x.numerator)
    if max(x.numerator.bit_length(), x.denominator.bit_length()) < 200:
        return str(x)
    return f"~10^{log10(x):.6f}"


def log10(x) -> float:
    """log10 of a positive int or Fraction of any size."""
    if x == INF:
        return INF
    x = Fraction(x)
    return math.log10(x.numerator) - math.log10(x.denominator)


# exact decision for rule-described dyadic families


def mk_type(entry) -> Verdict:
    """Decide the type of a rule-described dyadic family from ``M = sup(m_{k+1} - m_k)``."""
    if isinstance(entry, CatalogEntry):
        if entry.m is None or entry.n is None:
            raise UnsupportedRule(f"{entry.name} is not a dyadic block family")
        m, n = entry.m, entry.n
    elif isinstance(entry, DyadicFamily):
        m, n = entry.m, entry.n
    else:
        raise UnsupportedRule("mk_type needs a dyadic family")
    params = {"m": m.describe(), "n": n.describe()}
    if m.is_prefix or n.is_prefix:
        return Verdict(INCONCLUSIVE, "mk_type", params, notes=["prefix data only: sup of gaps undecidable"])
    M = m.sup_gap()
    if M is None:
        raise UnsupportedRule(f"cannot bound the gaps of {m.describe()}")
    if M == INF:
        return Verdict(TYPE2, "mk_type", params, {"M": "inf"})
    return Verdict(TYPE1, "mk_type", params, {"M": int(M)})


# count-ratio criterion


def ratio(num: int, den: int):
    """``num/den`` with ``0/0 = 0`` and ``c/0 = inf``."""
    if den == 0:
        return Fraction(0) if num == 0 else INF
    return Fraction(num, den)


def clip_horizon(spec: LambdaSpec, horizon: Window) -> tuple[Window, str | None]:
    """Cut ``horizon`` before the first block finer than ``2^-MAX_COUNT_EXP`` (counts would not fit in memory)."""
    if not getattr(spec, "is_blocks", False):
        return horizon, None
    for b in spec.blocks_in(horizon.lo, horizon.hi):
        if b.exp > MAX_COUNT_EXP:
            cut = max(horizon.lo, b.lo)
            return Window(horizon.lo, cut), f"horizon clipped at {cut}: grid finer than 2^-{MAX_COUNT_EXP}"
    return horizon, None


def prime_counts(spec: LambdaSpec, eps, horizon: Window) -> CountVector:
    """Counts on the ``ε/3`` grid, extended three cells to the left of the horizon."""
    ep = as_fraction(eps) / 3
    ext = Window(horizon.lo - 3 * ep, horizon.hi)
    return count_cells(spec, ep, ext, cap=None)


def extract_chain(cv: CountVector, depth_limit: int | None = None, first_allowed: int | None = None) -> RatioChain:
    """Greedy left-to-right chain extraction; smallest index wins ties."""
    idx, rs = [], []
    start = cv.offset + 3
    if first_allowed is not None:
        start = max(start, first_allowed)
    for n in range(start, cv.offset + len(cv)):
        k = len(idx) + 1
        if idx and n - idx[-1] < 2:
            continue
        r = ratio(cv[n], cv[n - 3] + cv[n - 2] + cv[n - 1])
        if r >= 2**k:
            idx.append(n)
            rs.append(r)
            if depth_limit is not None and len(idx) >= depth_limit:
                break
    return RatioChain(cv.eps, tuple(idx), tuple(rs), cv)


def _first_meaningful_cell(spec: LambdaSpec, cv: CountVector) -> int:
    """First cell whose left neighbourhood is not empty merely because Λ has not started."""
    lb = spec.lower_bound()
    before = spec.count(lb, cv.offset * cv.eps, None) if lb < cv.offset * cv.eps else 0
    if before:
        return cv.offset
    for n in cv.indices:
        if cv[n]:
            return n + 1
    return cv.offset + len(cv)


def count_ratio_test(spec: LambdaSpec, eps=1, horizon: Window = Window(0, 64), depth: int = 3,
                     full: bool = False) -> Verdict:
    _require_exact(spec, "count_ratio_test")
    eps = as_fraction(eps)
    horizon, clip = clip_horizon(spec, horizon)
    cv = prime_counts(spec, eps, horizon)
    first = _first_meaningful_cell(spec, cv)
    chain = extract_chain(cv, None if full else depth, first)
    params = {"eps": str(eps), "eps_prime": str(cv.eps), "horizon": str(horizon), "depth": depth}
    witness = {"indices": list(chain.indices), "positions": [str(i * cv.eps) for i in chain.indices],
               "ratios": [_fmt(r) for r in chain.ratios],
               "counts": [_fmt(cv[i]) for i in chain.indices]}
    notes = [clip] if clip else []
    if first > cv.offset + 3:
        notes.append(f"cells below {first} skipped: no elements precede them")
    kind = EVIDENCE if len(chain) >= depth and depth > 0 else INCONCLUSIVE
    v = Verdict(kind, "count_ratio", params, witness, notes, TYPE2 if kind == EVIDENCE else None)
    v.chain = chain
    return v


def reduction_bound(c) -> Fraction:
    c = as_fraction(c)
    return c + (c + 1) * c + (c + 1) * c * (2 + c)


def reduction_holds(fine: list[int], c) -> bool:
    """Check the ε→ε/3 reduction on one count sequence (fine cell ``i`` lies in coarse cell ``i // 3``).

    Whenever ``a_n/a_{n-1} > B(c)`` with ``a_{n-1} > 0``, some fine ratio at ``3n, 3n+1, 3n+2`` is ``>= c``.
    """
    c = as_fraction(c)
    B = reduction_bound(c)
    coarse = [sum(fine[3 * i:3 * i + 3]) for i in range(len(fine) // 3)]
    for n in range(2, len(coarse)):
        if coarse[n - 1] == 0 or Fraction(coarse[n], coarse[n - 1]) <= B:
            continue
        best = max(ratio(fine[m], fine[m - 3] + fine[m - 2] + fine[m - 1]) for m in (3 * n, 3 * n + 1, 3 * n + 2))
        if best < c:
            return False
    return True


# growth, lacunarity, speed


def growth_test(spec: LambdaSpec, eps=1, horizon: Window = Window(0, 16), c_list=(2, 10, 100),
                threshold=GROWTH_THRESHOLD) -> Verdict:
    _require_exact(spec, "growth_test")
    horizon, clip = clip_horizon(spec, horizon)
    cv = count_cells(spec, eps, horizon, cap=None)
    report = {}
    ok = bool(c_list)
    for c in c_list:
        c = as_fraction(c)
        best = None
        for n in cv.indices:
            if n < 1 or cv[n] == 0:
                continue
            val = Fraction(cv[n]) / c**n
            if best is None or val > best[0]:
                best = (val, n)
        if best is None:
            report[str(c)] = {"max_log10": None, "at": None}
            ok = False
        else:
            report[str(c)] = {"max_log10": round(log10(best[0]), 6), "at": best[1]}
            ok = ok and best[0] > threshold
    params = {"eps": str(as_fraction(eps)), "horizon": str(horizon), "c": [str(as_fraction(c)) for c in c_list],
              "threshold": threshold}
    if ok:
        return Verdict(EVIDENCE, "growth", params, report,
                       ["superset-hereditary: every set containing this one is type 2"] + ([clip] if clip else []), TYPE2)
    return Verdict(INCONCLUSIVE, "growth", params, report, [clip] if clip else [])


def _gap_runs_blocks(spec, lo: Fraction, hi: Fraction) -> list[Fraction]:
    """Consecutive gaps on a block set, one entry per run of equal gaps."""
    runs = []
    prev_last = None
    for b in spec.blocks_in(lo, hi):
        j0, j1 = b.j_range(lo, hi)
        if j1 <= j0:
            continue
        first = Fraction(j0, 1 << b.exp)
        last = Fraction(j1 - 1, 1 << b.exp)
        if prev_last is not None:
            runs.append(first - prev_last)
        if j1 - j0 >= 2:
            runs.append(Fraction(1, 1 << b.exp))
        prev_last = last
    return runs


def _gap_runs_points(pts: list) -> list:
    vals = [v.to_fraction() if isinstance(v, DyadicRational) else v for v in pts]
    return [b - a for a, b in zip(vals, vals[1:])]


def _gaps(spec, lo, hi):
    if spec.is_blocks:
        return _gap_runs_blocks(spec, lo, hi)
    return _gap_runs_points(enumerate_set(spec, Window(lo, hi)))


def lacunarity_test(spec: LambdaSpec, horizon: Window, parts: int = 4) -> Verdict:
    horizon, clip = clip_horizon(spec, horizon)
    L = horizon.hi - horizon.lo
    sups = []
    for p in range(parts):
        a = horizon.lo + L * p / parts
        b = horizon.lo + L * (p + 1) / parts
        g = _gaps(spec, a, b)
        sups.append(max(g) if g else None)
    whole = _gaps(spec, horizon.lo, horizon.hi)
    tol = _tau_of(spec) if not spec.exact else 0
    monotone = all(y <= x + tol for x, y in zip(whole, whole[1:]))
    known = [s for s in sups if s is not None]
    dense = (len(known) >= 2 and len(known) == len(sups) and all(y <= x for x, y in zip(known, known[1:]))
             and known[-1] < known[0])
    witness = {"trailing_sup_gaps": [None if s is None else float(s) for s in sups], "decreasing_gap": monotone}
    params = {"horizon": str(horizon), "parts": parts}
    extra = [clip] if clip else []
    if dense:
        return Verdict(EVIDENCE, "lacunarity", params, witness, ["dense-evidence"] + extra, "asymptotically dense")
    return Verdict(EVIDENCE, "lacunarity", params, witness,
                   ["lacunary-evidence", "an asymptotically lacunary set is type 2"] + extra, "asymptotically lacunary")


def lacunarity_label(v: Verdict) -> str:
    return "dense-evidence" if v.evidence_for == "asymptotically dense" else "lacunary-evidence"


def speed_test(spec: LambdaSpec, horizon: Window, threshold=SPEED_THRESHOLD) -> Verdict:
    horizon, clip = clip_horizon(spec, horizon)
    N = math.floor(horizon.hi)
    n0 = max(1, math.ceil(horizon.lo))
    ratios = []
    total = spec.count(Fraction(0), Fraction(n0 - 1), None) if n0 > 1 else 0
    for n in range(n0, N + 1):
        total += spec.count(Fraction(n - 1), Fraction(n), None)
        ratios.append((n, Fraction(total, n)))
    params = {"horizon": str(horizon), "threshold": threshold}
    if not ratios:
        return Verdict(INCONCLUSIVE, "speed", params)
    best = max(r for _, r in ratios)
    half = len(ratios) // 2
    growing = half > 0 and max(r for _, r in ratios[half:]) > max(r for _, r in ratios[:half])
    witness = {"max_ratio_log10": round(log10(best), 6) if best else None, "final_ratio": _fmt(ratios[-1][1]),
               "growing": growing}
    notes = ["superset-hereditary for algebraically independent sets"] + ([clip] if clip else [])
    if _exact_counts(spec):
        notes.append("elements are rational: the independence hypothesis fails")
    else:
        notes.append("independence of elements not verified")
    if growing and best >= threshold:
        return Verdict(EVIDENCE, "speed", params, witness, notes, TYPE2)
    return Verdict(INCONCLUSIVE, "speed", params, witness, notes)


# translators and periodicity


def _difference_count(spec: LambdaSpec, t, w: Window, cap) -> int:
    shifted = enumerate_set(spec, Window(w.lo - as_fraction(t), w.hi - as_fraction(t)), cap)
    here = enumerate_set(spec, w, cap)
    if spec.exact:
        td = DyadicRational.coerce(t) if DyadicRational.is_dyadic(t) else None
        if td is not None:
            hs = set(here)
            return sum(1 for x in shifted if x + td not in hs)
        hs = set(x.to_fraction() for x in here)
        return sum(1 for x in shifted if x.to_fraction() + as_fraction(t) not in hs)
    tau = _tau_of(spec)
    tf = float(t)
    vals = [float(x) for x in here]
    miss = 0
    for x in shifted:
        y = float(x) + tf
        i = bisect.bisect_left(vals, y - tau)
        if not (i < len(vals) and abs(vals[i] - y) <= tau):
            miss += 1
    return miss


def translator_test(spec: LambdaSpec, t, w: Window, nested: int = 4, cap=10**7) -> Verdict:
    """Count ``#((Λ+t) \\ Λ ∩ w)`` on nested windows ``[lo, lo + L*i/nested)``."""
    t = as_fraction(t)
    if t <= 0:
        raise BadInput("translator candidates must be positive")
    L = w.hi - w.lo
    counts = [_difference_count(spec, t, Window(w.lo, w.lo + L * i / nested), cap) for i in range(1, nested + 1)]
    stable = len(counts) < 2 or counts[-1] == counts[-2]
    label = "finite-evidence" if stable else "growing"
    params = {"t": str(t), "window": str(w), "nested": nested}
    return Verdict(EVIDENCE, "translator", params, {"counts": counts, "count": counts[-1]}, [label],
                   "translator" if stable else "not a translator")


def condition_star(spec: LambdaSpec, w: Window, kmax: int = 4, nested: int = 4) -> dict:
    """Which of ``1/2^k`` look like translators on ``w``."""
    out = {}
    for k in range(1, kmax + 1):
        v = translator_test(spec, Fraction(1, 2**k), w, nested)
        out[f"1/{2**k}"] = v.notes[0]
    return out


def _closed(spec: LambdaSpec, a: Fraction, b: Fraction) -> list:
    if spec.exact:
        pts = enumerate_set(spec, Window(a, b))
        from .sets import contains

        if contains(spec, b):
            pts.append(DyadicRational.coerce(b))
        return pts
    return [float(x) for x in enumerate_set(spec, Window(a, b + Fraction(_tau_of(spec))))]


def periodicity_test(spec: LambdaSpec, i: int, n: int) -> bool:
    """True iff the trace on ``[n, n+1]`` repeats under shifts by ``1/2^i`` between subcells."""
    h = Fraction(1, 2**i)
    tau = 0 if spec.exact else _tau_of(spec)
    for j in range(1, 2**i):
        left = _closed(spec, n + (j - 1) * h, n + j * h)
        right = _closed(spec, n + j * h, n + (j + 1) * h)
        if len(left) != len(right):
            return False
        if spec.exact:
            hd = DyadicRational(1, i)
            if any(x + hd != y for x, y in zip(left, right)):
                return False
        elif any(abs(x + float(h) - y) > tau for x, y in zip(left, right)):
            return False
    return True


def shift_inclusion(spec: LambdaSpec, n: int) -> tuple[bool, bool]:
    """``((Λ∩[n,n+1)) + 1 ⊆ Λ∩[n+1,n+2)``, and whether equality holds."""
    a = enumerate_set(spec, Window(n, n + 1))
    b = enumerate_set(spec, Window(n + 1, n + 2))
    if spec.exact:
        sa = [x + 1 for x in a]
        sb = set(b)
        sub = all(x in sb for x in sa)
        return sub, sub and len(sa) == len(b)
    tau = _tau_of(spec)
    bv = [float(x) for x in b]
    sub = True
    for x in a:
        y = float(x) + 1
        k = bisect.bisect_left(bv, y - tau)
        if not (k < len(bv) and abs(bv[k] - y) <= tau):
            sub = False
            break
    return sub, sub and len(a) == len(b)


def classify_all(entry: CatalogEntry, criteria, eps=1, horizon: Window = Window(0, 64), depth: int = 3) -> list:
    out = []
    for c in criteria:
        if c == "mk":
            out.append(mk_type(entry))
        elif c == "ratio":
            out.append(count_ratio_test(entry.spec, eps, horizon, depth))
        elif c == "growth":
            out.append(growth_test(entry.spec, eps, horizon))
        elif c == "lacunarity":
            out.append(lacunarity_test(entry.spec, horizon))
        elif c == "speed":
            out.append(speed_test(entry.spec, horizon))
        else:
            raise BadInput(f"unknown criterion {c!r}")
    return out


__all__ = ["Verdict", "RatioChain", "mk_type", "count_ratio_test", "growth_test", "lacunarity_test", "speed_test",
           "translator_test", "condition_star", "periodicity_test", "shift_inclusion", "reduction_bound",
           "reduction_holds", "extract_chain", "prime_counts", "ratio", "Rule"]
