"""Discrete sets bounded below with no finite accumulation point.

Every set is an immutable :class:`LambdaSpec`. Dyadic block sets are counted in
closed form, so cell counts such as ``#(2^-64 N  ∩ [64, 65))`` never enumerate.
Enumeration is capped (``DEFAULT_CAP``) and raises :class:`WindowTooLarge`.
"""

from __future__ import annotations

import bisect
import csv
import hashlib
import heapq
import io
import json
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from .dyadic import DyadicRational
from .errors import BadInput, WindowTooLarge
from .rules import Rule

DEFAULT_CAP = 10**8
DEFAULT_TAU = 2.0**-40
SCHEMA_VERSION = 1
INF = math.inf


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, DyadicRational):
        return x.to_fraction()
    if isinstance(x, (int, float, str)):
        return Fraction(x)
    if isinstance(x, np.floating):
        return Fraction(float(x))
    if isinstance(x, np.integer):
        return Fraction(int(x))
    raise TypeError(f"cannot interpret {x!r} as a rational")


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


@dataclass(frozen=True)
class Window:
    """Half-open ``[lo, hi)``; ``lo == hi`` is the empty window."""

    lo: Fraction
    hi: Fraction

    def __init__(self, lo, hi):
        lo, hi = as_fraction(lo), as_fraction(hi)
        if lo > hi:
            raise BadInput(f"window [{lo}, {hi}) has lo > hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def parse(cls, text: str) -> "Window":
        parts = text.replace("[", "").replace(")", "").split(",")
        if len(parts) != 2:
            raise BadInput(f"window must look like 'lo,hi', got {text!r}")
        return cls(Fraction(parts[0].strip()), Fraction(parts[1].strip()))

    def __str__(self):
        return f"[{self.lo},{self.hi})"

    @property
    def empty(self) -> bool:
        return self.lo == self.hi


@dataclass(frozen=True)
class Block:
    """Points ``j / 2**exp`` with ``j >= 0`` and ``lo <= j/2**exp < hi``; ``hi=None`` is +inf."""

    exp: int
    lo: int
    hi: int | None

    def __post_init__(self):
        if self.exp < 0:
            raise BadInput("block exponent must be nonnegative")
        if self.hi is not None and self.lo >= self.hi:
            raise BadInput(f"empty block support [{self.lo}, {self.hi})")

    def j_range(self, lo: Fraction, hi: Fraction) -> tuple[int, int]:
        a = max(lo, self.lo)
        b = hi if self.hi is None else min(hi, self.hi)
        scale = 1 << self.exp
        j0 = max(0, _ceil(a * scale))
        j1 = _ceil(b * scale)
        return j0, max(j0, j1)

    def count(self, lo: Fraction, hi: Fraction) -> int:
        j0, j1 = self.j_range(lo, hi)
        return j1 - j0

    def to_dict(self):
        return {"exp": self.exp, "lo": self.lo, "hi": self.hi}


def normalize_blocks(blocks: Iterable[Block]) -> tuple[Block, ...]:
    """Disjoint sorted blocks with the same point set as the union of ``blocks``.

    Nested grids make the union on an overlap the finest grid present.
    """
    events = []
    for b in blocks:
        events.append((b.lo, 1, b.exp))
        if b.hi is not None:
            events.append((b.hi, -1, b.exp))
    if not events:
        return ()
    events.sort(key=lambda e: (e[0], e[1]))
    active: Counter = Counter()
    out: list[Block] = []
    prev = None
    i = 0
    while i < len(events):
        x = events[i][0]
        if prev is not None and active and x > prev:
            e = max(active)
            if out and out[-1].exp == e and out[-1].hi == prev:
                out[-1] = Block(e, out[-1].lo, x)
            else:
                out.append(Block(e, prev, x))
        while i < len(events) and events[i][0] == x:
            _, kind, e = events[i]
            active[e] += kind
            if active[e] == 0:
                del active[e]
            i += 1
        prev = x
    if active:
        e = max(active)
        if out and out[-1].exp == e and out[-1].hi == prev:
            out[-1] = Block(e, out[-1].lo, None)
        else:
            out.append(Block(e, prev, None))
    return tuple(out)


def _blocks_count(blocks: Iterable[Block], lo: Fraction, hi: Fraction) -> int:
    return sum(b.count(lo, hi) for b in blocks)


def _blocks_iter(blocks: Iterable[Block], lo: Fraction, hi: Fraction) -> Iterator[DyadicRational]:
    for b in blocks:
        j0, j1 = b.j_range(lo, hi)
        e = b.exp
        for j in range(j0, j1):
            yield DyadicRational(j, e)


def _check_cap(n: int, cap: int | None):
    if cap is not None and n > cap:
        raise WindowTooLarge(f"window holds {n} elements, cap is {cap}")


class LambdaSpec:
    """Base class for discrete sets. Subclasses are immutable."""

    exact = True
    variant = "abstract"

    def lower_bound(self) -> Fraction:
        raise NotImplementedError

    def _iter(self, lo: Fraction, hi: Fraction, cap: int | None) -> Iterator:
        raise NotImplementedError

    def count(self, lo: Fraction, hi: Fraction, cap: int | None = DEFAULT_CAP) -> int:
        n = 0
        for _ in self._iter(lo, hi, None):
            n += 1
            _check_cap(n, cap)
        return n

    def to_dict(self) -> dict:
        raise NotImplementedError

    @property
    def is_blocks(self) -> bool:
        return False

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(json.dumps(self.to_dict(), sort_keys=True, default=str))

    def __repr__(self):
        return f"{type(self).__name__}({json.dumps(self.to_dict(), default=str)[:120]})"


class BlockSpec(LambdaSpec):
    """Sets given by disjoint ascending dyadic blocks; counts are closed form."""

    @property
    def is_blocks(self) -> bool:
        return True

    def blocks_in(self, lo: Fraction, hi: Fraction) -> list[Block]:
        raise NotImplementedError

    def count(self, lo, hi, cap=None) -> int:
        lo, hi = as_fraction(lo), as_fraction(hi)
        if lo >= hi:
            return 0
        return _blocks_count(self.blocks_in(lo, hi), lo, hi)

    def _iter(self, lo, hi, cap):
        if lo >= hi:
            return iter(())
        blocks = self.blocks_in(lo, hi)
        if cap is not None:
            _check_cap(_blocks_count(blocks, lo, hi), cap)
        return _blocks_iter(blocks, lo, hi)

    def contains(self, x) -> bool:
        x = as_fraction(x)
        for b in self.blocks_in(x, x + 1):
            if b.lo <= x and (b.hi is None or x < b.hi):
                return x >= 0 and (x * (1 << b.exp)).denominator == 1
        return False

    def lower_bound(self) -> Fraction:
        bs = self.blocks_in(Fraction(-(10**18)), Fraction(10**18))
        return Fraction(max(0, bs[0].lo)) if bs else Fraction(0)


class DyadicBlocks(BlockSpec):
    variant = "dyadic_blocks"

    def __init__(self, blocks: Iterable[Block | dict | tuple] = ()):
        bs = []
        for b in blocks:
            if isinstance(b, dict):
                b = Block(int(b["exp"]), int(b["lo"]), None if b.get("hi") is None else int(b["hi"]))
            elif isinstance(b, tuple):
                b = Block(*b)
            bs.append(b)
        self.blocks = normalize_blocks(bs)
        self._los = [b.lo for b in self.blocks]

    def blocks_in(self, lo, hi):
        i = max(0, bisect.bisect_right(self._los, _floor(as_fraction(lo))) - 1)
        out = []
        for b in self.blocks[i:]:
            if b.lo >= hi:
                break
            if b.hi is None or b.hi > lo:
                out.append(b)
        return out

    def lower_bound(self):
        return Fraction(max(0, self.blocks[0].lo)) if self.blocks else Fraction(0)

    def to_dict(self):
        return {"variant": self.variant, "blocks": [b.to_dict() for b in self.blocks]}


class DyadicFamily(BlockSpec):
    """``∪_k 2^{-m_k} N ∩ [n_k, n_{k+1})`` for ``k >= k0`` with rule-described ``m`` and ``n``.

    Prefix rules give finitely many blocks; if ``n`` has no entry after the last
    block, that block extends to +inf.
    """

    variant = "dyadic_family"

    def __init__(self, m, n, k0: int = 1, strict: bool = True):
        self.m = Rule.of(m)
        self.n = Rule.of(n)
        self.k0 = int(k0)
        self.strict = strict
        if self.m.is_prefix:
            self.nblocks = len(self.m)
            if self.n.is_prefix and len(self.n) < self.nblocks:
                raise BadInput("n prefix shorter than m prefix")
        elif self.n.is_prefix:
            self.nblocks = len(self.n)
        else:
            self.nblocks = None
        # n may not repeat: blocks must be nonempty
        self.m.check_increasing(self.k0, strict=strict, count=self.nblocks)
        self.n.check_increasing(self.k0, strict=True, count=None if not self.n.is_prefix else len(self.n))
        if self.nblocks == 0:
            raise BadInput("empty family")
        if self.m_at(self.k0) < 0:
            raise BadInput("grid exponents must be nonnegative")

    def m_at(self, k: int) -> int:
        return self.m.params[k - self.k0] if self.m.is_prefix else self.m(k)

    def n_at(self, k: int) -> int | None:
        if self.n.is_prefix:
            i = k - self.k0
            return self.n.params[i] if i < len(self.n) else None
        if self.nblocks is not None and k - self.k0 >= self.nblocks:
            return None
        return self.n(k)

    def block(self, k: int) -> Block:
        hi = self.n_at(k + 1) if (self.nblocks is None or k - self.k0 + 1 < self.nblocks) else (
            self.n_at(k + 1) if self.n.is_prefix else None)
        return Block(self.m_at(k), self.n_at(k), hi)

    def _last_k(self):
        return None if self.nblocks is None else self.k0 + self.nblocks - 1

    def _first_k_reaching(self, x: Fraction) -> int:
        """Smallest k whose block ends after x."""
        last = self._last_k()

        def ends_after(k):
            if last is not None and k >= last:
                return True
            nxt = self.n_at(k + 1)
            return nxt is None or nxt > x

        if ends_after(self.k0):
            return self.k0
        lo, step = self.k0, 1
        while True:
            probe = lo + step
            if last is not None and probe > last:
                probe = last
            if ends_after(probe):
                hi = probe
                break
            lo, step = probe, step * 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ends_after(mid):
                hi = mid
            else:
                lo = mid
        return hi

    def blocks_in(self, lo, hi):
        lo, hi = as_fraction(lo), as_fraction(hi)
        out = []
        k = self._first_k_reaching(lo)
        last = self._last_k()
        while last is None or k <= last:
            b = self.block(k)
            if b.lo >= hi:
                break
            out.append(b)
            if b.hi is None:
                break
            k += 1
        return out

    def lower_bound(self):
        return Fraction(max(0, self.n_at(self.k0)))

    def to_dict(self):
        d = {"variant": self.variant, "m": self.m.to_dict(), "n": self.n.to_dict(), "k0": self.k0}
        if not self.strict:
            d["strict"] = False
        return d


class DyadicStream(BlockSpec):
    """Block set produced by a generator function ``gen(start) -> ascending blocks``.

    ``gen`` receives an integer hint and must yield every block that ends after it.
    Serialized by catalog reference (``name`` plus ``params``).
    """

    variant = "catalog"

    def __init__(self, name: str, params: dict, gen, lower: int = 0):
        self.name = name
        self.params = dict(params)
        self._gen = gen
        self._lower = lower

    def blocks_in(self, lo, hi):
        lo, hi = as_fraction(lo), as_fraction(hi)
        out = []
        for b in self._gen(_floor(lo)):
            if b.lo >= hi:
                break
            if b.hi is None or b.hi > lo:
                out.append(b)
        return out

    def lower_bound(self):
        return Fraction(self._lower)

    def to_dict(self):
        return {"variant": self.variant, "name": self.name, "params": self.params}


class Points(LambdaSpec):
    """A finite set of exact dyadic points."""

    variant = "points"

    def __init__(self, points: Iterable):
        try:
            self.points = tuple(sorted(set(DyadicRational.coerce(p) for p in points)))
        except ValueError as e:
            raise BadInput(f"points must be dyadic: {e}") from None

    def _iter(self, lo, hi, cap):
        i = bisect.bisect_left(self.points, lo)
        j = bisect.bisect_left(self.points, hi)
        _check_cap(j - i, cap)
        return iter(self.points[i:j])

    def count(self, lo, hi, cap=None):
        lo, hi = as_fraction(lo), as_fraction(hi)
        return max(0, bisect.bisect_left(self.points, hi) - bisect.bisect_left(self.points, lo))

    def lower_bound(self):
        return self.points[0].to_fraction() if self.points else Fraction(0)

    def to_dict(self):
        return {"variant": self.variant, "points": [[p.num, p.exp] for p in self.points]}


class ExplicitReals(LambdaSpec):
    """Ascending float64 values; values within ``tau`` of the previous kept value merge.

    ``values`` is a finite sequence, or ``source`` is a zero-argument callable
    returning a fresh ascending (possibly infinite) iterator.
    """

    variant = "explicit_reals"
    exact = False

    def __init__(self, values=None, tau: float = DEFAULT_TAU, source=None, name: str | None = None,
                 params: dict | None = None):
        if (values is None) == (source is None):
            raise BadInput("give exactly one of values or source")
        self.tau = float(tau)
        self.name = name
        self.params = dict(params or {})
        if values is not None:
            vals = [float(v) for v in values]
            if any(b < a for a, b in zip(vals, vals[1:])):
                raise BadInput("explicit reals must be ascending")
            self.values = tuple(vals)
            self._source = None
        else:
            self.values = None
            self._source = source

    def _raw(self, start: float):
        if self.values is not None:
            i = bisect.bisect_left(self.values, start)
            return iter(self.values[i:])
        return self._source()

    def _iter(self, lo, hi, cap):
        flo, fhi = float(lo), float(hi)
        last = None
        n = 0
        for v in self._raw(flo):
            if last is not None and v < last:
                raise BadInput("explicit reals source is not ascending")
            if v >= fhi:
                break
            if v < flo:
                continue
            if last is not None and v - last <= self.tau:
                continue
            last = v
            n += 1
            _check_cap(n, cap)
            yield v

    def lower_bound(self):
        first = next(iter(self._raw(-INF)), None)
        return Fraction(first) if first is not None else Fraction(0)

    def to_dict(self):
        if self.values is not None:
            return {"variant": self.variant, "values": list(self.values), "tau": self.tau}
        return {"variant": "catalog", "name": self.name, "params": self.params}


def _merge_sorted(a: Iterator, b: Iterator, exact: bool, tau: float) -> Iterator:
    last = None
    for v in heapq.merge(a, b):
        if last is not None:
            if exact and v == last:
                continue
            if not exact and v - last <= tau:
                continue
        last = v
        yield v


def _tau_of(spec: LambdaSpec) -> float:
    return getattr(spec, "tau", DEFAULT_TAU)


def _as_float_iter(it):
    for v in it:
        yield float(v)


class Union(LambdaSpec):
    variant = "union"

    def __init__(self, left: LambdaSpec, right: LambdaSpec):
        self.left, self.right = left, right
        self.exact = left.exact and right.exact
        self.tau = max(_tau_of(left), _tau_of(right))

    @property
    def is_blocks(self):
        return self.left.is_blocks and self.right.is_blocks

    def blocks_in(self, lo, hi):
        return list(normalize_blocks(self.left.blocks_in(lo, hi) + self.right.blocks_in(lo, hi)))

    def count(self, lo, hi, cap=DEFAULT_CAP):
        if self.is_blocks:
            lo, hi = as_fraction(lo), as_fraction(hi)
            return _blocks_count(self.blocks_in(lo, hi), lo, hi) if lo < hi else 0
        return super().count(lo, hi, cap)

    def contains(self, x):
        return BlockSpec.contains(self, x)

    def _iter(self, lo, hi, cap):
        if self.is_blocks:
            return BlockSpec._iter(self, lo, hi, cap)
        return self._merge_iter(lo, hi, cap)

    def _merge_iter(self, lo, hi, cap):
        a = self.left._iter(lo, hi, cap)
        b = self.right._iter(lo, hi, cap)
        if not self.exact:
            a, b = _as_float_iter(a), _as_float_iter(b)
        n = 0
        for v in _merge_sorted(a, b, self.exact, self.tau):
            n += 1
            _check_cap(n, cap)
            yield v

    def lower_bound(self):
        return min(self.left.lower_bound(), self.right.lower_bound())

    def to_dict(self):
        return {"variant": self.variant, "left": self.left.to_dict(), "right": self.right.to_dict()}


class Minkowski(LambdaSpec):
    variant = "minkowski"

    def __init__(self, left: LambdaSpec, right: LambdaSpec):
        self.left, self.right = left, right
        self.exact = left.exact and right.exact
        self.tau = max(_tau_of(left), _tau_of(right))

    def lower_bound(self):
        return self.left.lower_bound() + self.right.lower_bound()

    def _iter(self, lo, hi, cap):
        lo, hi = as_fraction(lo), as_fraction(hi)
        if lo >= hi:
            return iter(())
        la, lb = self.left.lower_bound(), self.right.lower_bound()
        A = list(self.left._iter(la, hi - lb, cap))
        B = list(self.right._iter(lb, hi - la, cap))
        if not A or not B:
            return iter(())
        if self.exact:
            out = _exact_pair_sums(A, B, lo, hi)
        else:
            out = _float_pair_sums([float(a) for a in A], [float(b) for b in B], float(lo), float(hi), self.tau)
        _check_cap(len(out), cap)
        return iter(out)

    def to_dict(self):
        return {"variant": self.variant, "left": self.left.to_dict(), "right": self.right.to_dict()}


def _exact_pair_sums(A, B, lo: Fraction, hi: Fraction) -> list[DyadicRational]:
    E = max(max(d.exp for d in A), max(d.exp for d in B))
    a = [d.scaled_int(E) for d in A]
    b = [d.scaled_int(E) for d in B]
    scale = 1 << E
    klo = _ceil(lo * scale)
    khi = _ceil(hi * scale)
    big = max(abs(a[0]), abs(a[-1]), abs(b[0]), abs(b[-1]), abs(klo), abs(khi))
    if big < 2**61:
        av = np.asarray(a, dtype=np.int64)
        bv = np.asarray(b, dtype=np.int64)
        found = []
        chunk = max(1, 2_000_000 // len(bv))
        for s in range(0, len(av), chunk):
            sums = (av[s:s + chunk, None] + bv[None, :]).ravel()
            sums = sums[(sums >= klo) & (sums < khi)]
            if sums.size:
                found.append(np.unique(sums))
        keys = np.unique(np.concatenate(found)).tolist() if found else []
    else:
        bs = sorted(b)
        keyset = set()
        for x in a:
            i = bisect.bisect_left(bs, klo - x)
            j = bisect.bisect_left(bs, khi - x)
            keyset.update(x + y for y in bs[i:j])
        keys = sorted(keyset)
    return [DyadicRational(k, E) for k in keys]


def _float_pair_sums(A, B, lo, hi, tau) -> list[float]:
    av = np.asarray(A)
    bv = np.asarray(B)
    sums = (av[:, None] + bv[None, :]).ravel()
    sums = np.sort(sums[(sums >= lo) & (sums < hi)])
    out = []
    for v in sums.tolist():
        if out and v - out[-1] <= tau:
            continue
        out.append(v)
    return out


def _element_key(x) -> bytes:
    if isinstance(x, DyadicRational):
        nb = x.num.to_bytes((x.num.bit_length() + 8) // 8 or 1, "little", signed=True)
        return b"d" + x.exp.to_bytes(8, "little") + nb
    return b"f" + np.float64(x).tobytes()


def keep_element(x, p: Fraction, seed: int) -> bool:
    """Counter-based keep/drop decision; depends only on ``(seed, x)``."""
    if p >= 1:
        return True
    key = (seed % 2**64).to_bytes(8, "little")
    h = int.from_bytes(hashlib.blake2b(_element_key(x), digest_size=8, key=key).digest(), "little")
    return h < _floor(p * 2**64)


class Thinned(LambdaSpec):
    variant = "thinned"

    def __init__(self, base: LambdaSpec, p, seed: int):
        p = as_fraction(p)
        if not (0 < p <= 1):
            raise BadInput(f"thinning probability must lie in (0, 1], got {p}")
        self.base, self.p, self.seed = base, p, int(seed)
        self.exact = base.exact
        self.tau = _tau_of(base)

    def keeps(self, x) -> bool:
        return keep_element(x, self.p, self.seed)

    def _iter(self, lo, hi, cap):
        n = 0
        for v in self.base._iter(lo, hi, cap):
            if keep_element(v, self.p, self.seed):
                n += 1
                yield v

    def count(self, lo, hi, cap=DEFAULT_CAP):
        if self.p >= 1:
            return self.base.count(lo, hi, cap)
        return sum(1 for _ in self._iter(as_fraction(lo), as_fraction(hi), cap))

    def lower_bound(self):
        return self.base.lower_bound()

    def to_dict(self):
        return {"variant": self.variant, "base": self.base.to_dict(), "p": str(self.p), "seed": self.seed}


class Affine(LambdaSpec):
    """``{c*λ + t}``; elements stay exact dyadic when ``c`` and ``t`` are dyadic."""

    variant = "affine"

    def __init__(self, base: LambdaSpec, scale, shift=0):
        self.base = base
        self.scale = as_fraction(scale)
        self.shift = as_fraction(shift)
        if self.scale <= 0:
            raise BadInput("affine scale must be positive")
        self.exact = base.exact and DyadicRational.is_dyadic(self.scale) and DyadicRational.is_dyadic(self.shift)
        self.tau = _tau_of(base) * float(self.scale)

    def _pre(self, lo, hi):
        return (as_fraction(lo) - self.shift) / self.scale, (as_fraction(hi) - self.shift) / self.scale

    def _iter(self, lo, hi, cap):
        a, b = self._pre(lo, hi)
        if self.exact:
            c, t = DyadicRational.coerce(self.scale), DyadicRational.coerce(self.shift)
            return (c * v + t for v in self.base._iter(a, b, cap))
        if self.base.exact:
            return (float(self.scale * v.to_fraction() + self.shift) for v in self.base._iter(a, b, cap))
        c, t = float(self.scale), float(self.shift)
        return (c * v + t for v in self.base._iter(a, b, cap))

    def count(self, lo, hi, cap=DEFAULT_CAP):
        a, b = self._pre(lo, hi)
        return self.base.count(a, b, cap)

    def lower_bound(self):
        return self.scale * self.base.lower_bound() + self.shift

    def to_dict(self):
        return {"variant": self.variant, "base": self.base.to_dict(), "scale": str(self.scale),
                "shift": str(self.shift)}


EMPTY = DyadicBlocks(())


# operations


def enumerate_set(spec: LambdaSpec, w: Window, cap: int | None = DEFAULT_CAP) -> list:
    """Ascending, duplicate-free elements of ``spec ∩ w``."""
    if w.empty:
        return []
    return list(spec._iter(w.lo, w.hi, cap))


def count_points(spec: LambdaSpec, w: Window, cap: int | None = DEFAULT_CAP) -> int:
    if w.empty:
        return 0
    return spec.count(w.lo, w.hi, cap)


def contains(spec: LambdaSpec, x) -> bool:
    if spec.is_blocks:
        return spec.contains(x)
    if isinstance(spec, Thinned):
        return spec.keeps(x) and contains(spec.base, x)
    if spec.exact:
        x = DyadicRational.coerce(x)
        first = next(spec._iter(x.to_fraction(), x.to_fraction() + 1, None), None)
        return first is not None and first == x
    tau = _tau_of(spec)
    xf = float(x)
    first = next(spec._iter(Fraction(xf - tau), Fraction(xf + tau) + Fraction(1, 2**80), None), None)
    return first is not None


@dataclass(frozen=True)
class CountVector:
    """``counts[i] = #(Λ ∩ [nε, (n+1)ε) ∩ w)`` for ``n = offset + i``."""

    eps: Fraction
    offset: int
    counts: tuple

    def __getitem__(self, n: int) -> int:
        i = n - self.offset
        if not 0 <= i < len(self.counts):
            raise IndexError(n)
        return self.counts[i]

    def get(self, n: int, default: int = 0) -> int:
        i = n - self.offset
        return self.counts[i] if 0 <= i < len(self.counts) else default

    @property
    def indices(self) -> range:
        return range(self.offset, self.offset + len(self.counts))

    def __len__(self):
        return len(self.counts)


def count_cells(spec: LambdaSpec, eps, w: Window, cap: int | None = DEFAULT_CAP) -> CountVector:
    eps = as_fraction(eps)
    if eps <= 0:
        raise BadInput("eps must be positive")
    if w.empty:
        return CountVector(eps, _floor(w.lo / eps), ())
    n0 = _floor(w.lo / eps)
    n1 = _ceil(w.hi / eps)
    counts = []
    for n in range(n0, n1):
        a = max(n * eps, w.lo)
        b = min((n + 1) * eps, w.hi)
        counts.append(spec.count(a, b, cap) if a < b else 0)
    return CountVector(eps, n0, tuple(counts))


def union(a: LambdaSpec, b: LambdaSpec) -> LambdaSpec:
    if isinstance(a, DyadicBlocks) and not a.blocks:
        return b
    if isinstance(b, DyadicBlocks) and not b.blocks:
        return a
    if a == b:
        return a
    if isinstance(a, DyadicBlocks) and isinstance(b, DyadicBlocks):
        return DyadicBlocks(a.blocks + b.blocks)
    return Union(a, b)


def minkowski_sum(a: LambdaSpec, b: LambdaSpec, w: Window | None = None,
                  cap: int | None = DEFAULT_CAP) -> LambdaSpec:
    """Lazy ``a + b``; with a window, the sum materialized on that window."""
    m = Minkowski(a, b)
    if w is None:
        return m
    pts = enumerate_set(m, w, cap)
    if m.exact:
        return Points(pts)
    return ExplicitReals(pts, tau=m.tau)


def thin(base: LambdaSpec, p, seed: int) -> LambdaSpec:
    return Thinned(base, p, seed)


def affine(base: LambdaSpec, c, t=0) -> LambdaSpec:
    c, t = as_fraction(c), as_fraction(t)
    if c == 1 and t == 0:
        return base
    return Affine(base, c, t)


def is_subset(a: LambdaSpec, b: LambdaSpec, w: Window, cap: int | None = DEFAULT_CAP) -> bool:
    """Decide ``a ∩ w ⊆ b``; symbolic for block sets, by enumeration otherwise."""
    if w.empty:
        return True
    if a.is_blocks and b.is_blocks:
        bb = b.blocks_in(w.lo, w.hi)
        for blk in a.blocks_in(w.lo, w.hi):
            lo = max(Fraction(blk.lo), w.lo, Fraction(0))
            hi = w.hi if blk.hi is None else min(Fraction(blk.hi), w.hi)
            if blk.count(lo, hi) == 0:
                continue
            # every point of blk in [lo,hi) must sit on a grid of b at least as fine
            for seg_lo, seg_hi in _uncovered_or_coarser(blk, bb, lo, hi):
                if blk.count(seg_lo, seg_hi):
                    return False
        return True
    pa = enumerate_set(a, w, cap)
    if b.exact:
        pb = set(enumerate_set(b, w, cap))
        return all(x in pb for x in pa)
    pb = enumerate_set(b, w, cap)
    tau = _tau_of(b)
    return all(_near(pb, float(x), tau) for x in pa)


def _uncovered_or_coarser(blk: Block, bb: list[Block], lo: Fraction, hi: Fraction):
    """Sub-intervals of [lo, hi) where b has no block with exponent >= blk.exp."""
    cur = lo
    for c in bb:
        clo = Fraction(c.lo)
        chi = hi if c.hi is None else Fraction(c.hi)
        if chi <= cur or clo >= hi:
            continue
        if clo > cur:
            yield cur, min(clo, hi)
        s, e = max(clo, cur), min(chi, hi)
        if c.exp < blk.exp and s < e:
            yield s, e
        cur = max(cur, e)
        if cur >= hi:
            return
    if cur < hi:
        yield cur, hi


def _near(sorted_vals, x: float, tau: float) -> bool:
    i = bisect.bisect_left(sorted_vals, x - tau)
    return i < len(sorted_vals) and abs(sorted_vals[i] - x) <= tau


def same_points(a: list, b: list, tau: float = 0.0) -> bool:
    """Element-wise equality of two ascending lists, within ``tau`` for floats."""
    if len(a) != len(b):
        return False
    if tau == 0.0:
        return all(x == y for x, y in zip(a, b))
    return all(abs(float(x) - float(y)) <= tau for x, y in zip(a, b))


# serialization


def spec_from_dict(d: dict) -> LambdaSpec:
    v = d.get("variant")
    if v == "dyadic_blocks":
        return DyadicBlocks(d.get("blocks", []))
    if v == "dyadic_family":
        return DyadicFamily(Rule.from_dict(d["m"]), Rule.from_dict(d["n"]), d.get("k0", 1),
                            strict=d.get("strict", True))
    if v == "explicit_reals":
        return ExplicitReals(d["values"], tau=d.get("tau", DEFAULT_TAU))
    if v == "points":
        return Points(DyadicRational(int(n), int(e)) for n, e in d["points"])
    if v == "union":
        return Union(spec_from_dict(d["left"]), spec_from_dict(d["right"]))
    if v == "minkowski":
        return Minkowski(spec_from_dict(d["left"]), spec_from_dict(d["right"]))
    if v == "thinned":
        return Thinned(spec_from_dict(d["base"]), Fraction(str(d["p"])), int(d["seed"]))
    if v == "affine":
        return Affine(spec_from_dict(d["base"]), Fraction(str(d["scale"])), Fraction(str(d.get("shift", 0))))
    if v == "catalog":
        from . import catalog

        return catalog.get(d["name"], **d.get("params", {})).spec
    raise BadInput(f"unknown spec variant {v!r}")


def dumps(spec: LambdaSpec) -> str:
    return json.dumps(spec.to_dict(), sort_keys=True, indent=2)


def loads(text: str) -> LambdaSpec:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise BadInput(f"spec document is not valid JSON: {e}") from None
    if not isinstance(d, dict):
        raise BadInput("spec document must be a JSON object")
    try:
        return spec_from_dict(d)
    except (KeyError, TypeError) as e:
        raise BadInput(f"malformed spec document: {e}") from None


def header_lines(command: str, params: dict) -> list[str]:
    items = " ".join(f"{k}={params[k]}" for k in sorted(params))
    return [f"# translab schema={SCHEMA_VERSION} command={command} {items}".rstrip()]


def enumeration_csv(elements: list, params: dict) -> str:
    buf = io.StringIO()
    for line in header_lines("gen", params):
        buf.write(line + "\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["index", "num", "exp", "value_decimal"])
    for i, x in enumerate(elements):
        if isinstance(x, DyadicRational):
            wr.writerow([i, x.num, x.exp, _decimal(x)])
        else:
            wr.writerow([i, "", "", repr(float(x))])
    return buf.getvalue()


def _decimal(x: DyadicRational) -> str:
    """Exact decimal expansion (terminates for dyadic numbers)."""
    if x.exp == 0:
        return str(x.num)
    sign = "-" if x.num < 0 else ""
    q, r = divmod(abs(x.num), 1 << x.exp)
    digits = str(r * 5**x.exp).rjust(x.exp, "0").rstrip("0")
    return f"{sign}{q}.{digits}"
