"""Closed-form integer sequences ``k -> value`` used to describe dyadic families.

Only closed-form rules permit verdicts about ``sup`` of consecutive gaps; a
finite ``prefix`` is evidence only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import BadInput, NotIncreasing

KINDS = ("affine", "polynomial", "exponential", "floor_scaled", "pow2_floor", "prefix")


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class Rule:
    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise BadInput(f"unknown rule kind {self.kind!r}")

    # constructors

    @classmethod
    def affine(cls, a: int, b: int = 0) -> "Rule":
        return cls("affine", (int(a), int(b)))

    @classmethod
    def polynomial(cls, *coeffs) -> "Rule":
        """``c0 + c1*k + c2*k**2 + ...``; coefficients may be rational."""
        cs = [_frac(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        return cls("polynomial", tuple(cs))

    @classmethod
    def exponential(cls, base: int, coef=1, const=0) -> "Rule":
        """``coef * base**k + const``."""
        return cls("exponential", (int(base), _frac(coef), _frac(const)))

    @classmethod
    def floor_scaled(cls, j: int) -> "Rule":
        """``floor(k * 2**-j)``."""
        return cls("floor_scaled", (int(j),))

    @classmethod
    def pow2_floor(cls, j: int) -> "Rule":
        """Largest ``2**i`` (``i >= 0``) not exceeding ``k * 2**-j``; 0 if there is none."""
        return cls("pow2_floor", (int(j),))

    @classmethod
    def prefix(cls, values) -> "Rule":
        return cls("prefix", tuple(int(v) for v in values))

    @classmethod
    def of(cls, x) -> "Rule":
        """Accept a Rule, a finite sequence (prefix) or a serialized dict."""
        if isinstance(x, Rule):
            return x
        if isinstance(x, dict):
            return cls.from_dict(x)
        return cls.prefix(x)

    # evaluation

    @property
    def is_prefix(self) -> bool:
        return self.kind == "prefix"

    def __len__(self):
        if not self.is_prefix:
            raise TypeError("only prefix rules have a length")
        return len(self.params)

    def __call__(self, k: int) -> int:
        kind, p = self.kind, self.params
        if kind == "affine":
            return p[0] * k + p[1]
        if kind == "polynomial":
            v = Fraction(0)
            for c in reversed(p):
                v = v * k + c
            if v.denominator != 1:
                raise BadInput(f"polynomial rule is not integer valued at k={k}")
            return int(v)
        if kind == "exponential":
            v = p[1] * p[0] ** k + p[2]
            if v.denominator != 1:
                raise BadInput(f"exponential rule is not integer valued at k={k}")
            return int(v)
        if kind == "floor_scaled":
            j = p[0]
            return k >> j if j >= 0 else k << -j
        if kind == "pow2_floor":
            x = k >> p[0] if p[0] >= 0 else k << -p[0]
            return 0 if x < 1 else 1 << (x.bit_length() - 1)
        # prefix, 1-based against the family's first index is handled by callers
        return p[k]

    # structure

    def sup_gap(self):
        """``sup_k (r(k+1) - r(k))`` over distinct consecutive values.

        Returns an int when bounded, ``math.inf`` when unbounded and ``None`` when
        the rule is a finite prefix (undecidable).
        """
        kind, p = self.kind, self.params
        if kind == "affine":
            return p[0]
        if kind == "polynomial":
            if len(p) <= 2:
                return int(p[1]) if len(p) == 2 else 0
            return math.inf if p[-1] > 0 else None
        if kind == "exponential":
            if p[0] >= 2 and p[1] > 0:
                return math.inf
            return 0
        if kind == "floor_scaled":
            j = p[0]
            return 1 if j >= 0 else 1 << -j
        if kind == "pow2_floor":
            return math.inf
        return None

    def check_increasing(self, k0: int, strict: bool = True, count: int | None = None):
        """Raise NotIncreasing unless the rule is (strictly) increasing from ``k0`` on.

        Exact for affine, polynomial and exponential rules; ``count`` bounds the
        check for prefixes.
        """
        kind, p = self.kind, self.params
        if kind == "affine":
            ok = p[0] > 0 or (not strict and p[0] == 0)
        elif kind == "polynomial":
            ok = self._poly_increasing(k0, strict)
        elif kind == "exponential":
            ok = p[0] >= 2 and p[1] > 0
        elif kind in ("floor_scaled", "pow2_floor"):
            ok = not strict or (kind == "floor_scaled" and p[0] <= 0)
        else:
            vals = list(p[: count] if count is not None else p)
            ok = all((b > a) if strict else (b >= a) for a, b in zip(vals, vals[1:]))
        if not ok:
            word = "strictly increasing" if strict else "nondecreasing"
            raise NotIncreasing(f"rule {self.describe()} is not {word}")

    def _poly_increasing(self, k0: int, strict: bool) -> bool:
        p = self.params
        if len(p) == 1:
            return not strict
        # forward difference d(k) = P(k+1) - P(k), a polynomial of degree deg-1
        deg = len(p) - 1
        diff = [Fraction(0)] * deg
        for i, c in enumerate(p):
            for m in range(i):
                diff[m] += c * math.comb(i, m)
        if diff[-1] <= 0 and deg > 1:
            return False
        lead = diff[-1]
        bound = 1 + max((abs(c / lead) for c in diff[:-1]), default=Fraction(0))
        for k in range(k0, max(k0, math.ceil(bound)) + 2):
            d = sum(c * k**m for m, c in enumerate(diff))
            if d < 0 or (strict and d == 0):
                return False
        return True

    def describe(self) -> str:
        kind, p = self.kind, self.params
        if kind == "affine":
            return f"{p[0]}*k+{p[1]}"
        if kind == "polynomial":
            return " + ".join(f"{c}*k^{i}" for i, c in enumerate(p))
        if kind == "exponential":
            return f"{p[1]}*{p[0]}^k+{p[2]}"
        if kind == "floor_scaled":
            return f"floor(k*2^{-p[0]})"
        if kind == "pow2_floor":
            return f"max{{2^i <= k*2^{-p[0]}}}"
        return f"prefix{list(p)}"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": [str(x) if isinstance(x, Fraction) else x for x in self.params]}

    @classmethod
    def from_dict(cls, d: dict) -> "Rule":
        kind = d["kind"]
        params = d.get("params", [])
        if kind == "affine":
            return cls.affine(*params)
        if kind == "polynomial":
            return cls.polynomial(*params)
        if kind == "exponential":
            return cls.exponential(*params)
        if kind == "floor_scaled":
            return cls.floor_scaled(*params)
        if kind == "pow2_floor":
            return cls.pow2_floor(*params)
        if kind == "prefix":
            return cls.prefix(params)
        raise BadInput(f"unknown rule kind {kind!r}")

    @classmethod
    def parse(cls, text: str) -> "Rule":
        """Parse ``kind:arg,arg`` or a bare comma list (prefix)."""
        text = text.strip()
        if ":" not in text:
            return cls.prefix(int(t) for t in text.split(",") if t.strip())
        kind, _, rest = text.partition(":")
        args = [a.strip() for a in rest.split(",") if a.strip()]
        aliases = {"poly": "polynomial", "exp": "exponential"}
        return cls.from_dict({"kind": aliases.get(kind, kind), "params": args})
