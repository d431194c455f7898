"""Named generators for the concrete discrete sets, each tagged with its known type."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import BadInput, DepthTooLarge
from .rules import Rule
from .sets import (Block, DyadicFamily, DyadicStream, ExplicitReals, LambdaSpec, Minkowski, Union,
                   as_fraction, union as set_union)

TYPE1, TYPE2, OPEN = "Type1", "Type2", "Open"
MAX_ALG_DEPTH = 5


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    spec: LambdaSpec
    known_type: str
    source: str
    params: dict = field(default_factory=dict)
    m: Rule | None = None
    n: Rule | None = None
    k0: int = 1
    strict: bool = True
    notes: tuple = ()

    @property
    def rule_described(self) -> bool:
        return self.m is not None and self.n is not None and not self.m.is_prefix and not self.n.is_prefix

    def row(self) -> list:
        return [self.name, self.known_type, self.source, json.dumps(self.params, sort_keys=True)]


def _type_from_gap(m: Rule, n: Rule) -> str:
    if m.is_prefix or n.is_prefix:
        return OPEN
    g = m.sup_gap()
    if g is None:
        return OPEN
    return TYPE2 if g == math.inf else TYPE1


def dyadic_a() -> CatalogEntry:
    m = n = Rule.affine(1, 0)
    return CatalogEntry("dyadic_a", DyadicFamily(m, n, k0=0), TYPE1,
                        "grids 2^-k on [k,k+1): bounded exponent gaps", {}, m, n, 0)


def dyadic_family(m, n, k0: int = 1, name: str = "dyadic_family") -> CatalogEntry:
    """``∪_k 2^{-m_k} N ∩ [n_k, n_{k+1})``; the type is decided from the ``m`` rule when possible."""
    m, n = Rule.of(m), Rule.of(n)
    spec = DyadicFamily(m, n, k0=k0)
    if spec.n_at(k0) is not None and spec.n_at(k0) < 0:
        raise BadInput("block starts must be nonnegative")
    kt = _type_from_gap(m, n)
    src = "dyadic block family: type 1 iff sup(m_{k+1}-m_k) < inf"
    params = {"m": m.to_dict(), "n": n.to_dict(), "k0": k0}
    notes = ("prefix data: limsup undecidable, evidence only",) if kt == OPEN else ()
    return CatalogEntry(name, spec, kt, src, params, m, n, k0, notes=notes)


def sandwich_exponent_rule(n: int) -> Rule:
    """``l(., j)`` for odd ``n = 2j-1``, ``m(., j)`` for even ``n = 2j``."""
    if n % 2 == 0:
        return Rule.pow2_floor(n // 2)
    return Rule.floor_scaled((n + 1) // 2)


def l_value(nu: int, j: int) -> int:
    return Rule.floor_scaled(j)(nu)


def m_value(nu: int, j: int) -> int:
    return Rule.pow2_floor(j)(nu)


def sandwich(n: int) -> CatalogEntry:
    n = int(n)
    m = sandwich_exponent_rule(n)
    cells = Rule.affine(1, 0)
    spec = DyadicFamily(m, cells, k0=1, strict=False)
    kt = TYPE2 if n % 2 == 0 else TYPE1
    j = n // 2 if n % 2 == 0 else (n + 1) // 2
    src = "nested chain: odd members use floor(nu 2^-j), even members the power-of-two floor"
    return CatalogEntry(f"sandwich", spec, kt, src, {"n": n, "j": j}, m, cells, 1, strict=False)


# union counterexample: two type 2 sets whose union is the grid family 2^-n on [n, n+1)


def _lambda1_blocks(start: int):
    if start < 1:
        yield Block(0, 0, 1)
    i = 0
    while True:
        a = 4**i
        b, c = 2 * a, 4 * a
        if b > start:
            for cell in range(max(a, start), b):
                yield Block(cell, cell, cell + 1)
        if c > start:
            yield Block(b, b, c)
        i += 1


def _lambda2_blocks(start: int):
    if start < 1:
        yield Block(0, 0, 1)
    i = 0
    while True:
        a = 4**i
        b, c = 2 * a, 4 * a
        if b > start:
            yield Block(a, a, b)
        if c > start:
            for cell in range(max(b, start), c):
                yield Block(cell, cell, cell + 1)
        i += 1


def union_counterexample() -> tuple[CatalogEntry, CatalogEntry]:
    src = "decreasing-gap dense type 2 pair with type 1 union"
    l1 = DyadicStream("union_counterexample.1", {}, _lambda1_blocks)
    l2 = DyadicStream("union_counterexample.2", {}, _lambda2_blocks)
    return (CatalogEntry("union_counterexample.1", l1, TYPE2, src),
            CatalogEntry("union_counterexample.2", l2, TYPE2, src))


def union_counterexample_union() -> CatalogEntry:
    """The canonical form of the union: grid ``2^-n`` on every ``[n, n+1)``, ``n >= 0``."""
    e = dyadic_a()
    return CatalogEntry("union_counterexample.union", e.spec, TYPE1,
                        "union of the counterexample pair (equals the 2^-n grid family)", {}, e.m, e.n, 0)


def log_integers(N: int) -> CatalogEntry:
    N = int(N)
    if N < 1:
        raise BadInput("N must be at least 1")
    vals = [math.log(k) for k in range(1, N + 1)]
    return CatalogEntry("log_integers", ExplicitReals(vals), TYPE2, "logarithms of the positive integers",
                        {"N": N})


def anti_lex_pairs(count: int) -> list[tuple[int, int]]:
    """First ``count`` pairs ``(i, j)``, ``i <= j``, ordered by ``j`` then ``i``."""
    out = []
    j = 1
    while len(out) < count:
        for i in range(1, j + 1):
            out.append((i, j))
            if len(out) == count:
                break
        j += 1
    return out


def seeded_alphas(count: int, seed: int) -> list[float]:
    rng = np.random.default_rng(seed)
    while True:
        vals = rng.uniform(0.0, 1.0, size=count).tolist()
        if len(set(vals)) == count and all(0.0 < v < 1.0 for v in vals):
            return vals


def alg_indep_layers(K: int, alpha) -> list[list[Fraction]]:
    """Exact ``B_k`` for ``k = 1..K`` (values in (0, 1), ascending)."""
    pairs = anti_lex_pairs(K)
    layers, acc = [], set()
    for i, j in pairs:
        a = as_fraction(alpha[i - 1])
        scale = 1 << j
        lo = math.floor(-a * scale) + 1
        hi = math.ceil((1 - a) * scale) - 1
        acc.update(a + Fraction(l, scale) for l in range(lo, hi + 1))
        layers.append(sorted(acc))
    return layers


def alg_indep_type1(K: int = 4, alpha=None, seed: int = 0) -> CatalogEntry:
    """``Λ_1 ∪ ... ∪ Λ_K`` with ``Λ_k = ∪_{i<2^k} (B_k + 2^k + i)``."""
    K = int(K)
    if K < 1:
        raise BadInput("depth K must be at least 1")
    if K > MAX_ALG_DEPTH:
        raise DepthTooLarge(f"depth {K} exceeds the size guard {MAX_ALG_DEPTH}")
    need = max(i for i, _ in anti_lex_pairs(K))
    if alpha is None:
        alpha = seeded_alphas(need, seed)
        sampled = True
    else:
        sampled = False
    alpha = [float(a) for a in alpha]
    if len(alpha) < need:
        raise BadInput(f"need at least {need} alpha values for depth {K}")
    if any(not 0.0 < a < 1.0 for a in alpha) or len(set(alpha)) != len(alpha):
        raise BadInput("alpha values must be pairwise distinct and lie in (0, 1)")
    vals = []
    for k, B in enumerate(alg_indep_layers(K, alpha), start=1):
        base = 1 << k
        for i in range(base):
            vals.extend(float(b + base + i) for b in B)
    vals.sort()
    notes = ("assumed independent (sampled)",) if sampled else ("caller-supplied alpha; independence not certified",)
    params = {"K": K, "seed": seed} if sampled else {"K": K, "alpha": alpha}
    return CatalogEntry("alg_indep_type1", ExplicitReals(vals), TYPE1,
                        "type 1 set built from shifted copies of independent dyadic orbits", params,
                        notes=notes)


def periodicity_threshold(i: int) -> int:
    return 2 ** ((i - 1) * i // 2 + 1)


def example_dyadic_b(n=None, K: int | None = None) -> CatalogEntry:
    """Unbounded exponent gaps ``m(k+1) - m(k) = k`` over the given block starts.

    ``n`` is a rule (default ``n_k = k``) or an explicit prefix; with ``K`` only
    the first ``K`` blocks are kept and the type is left open.
    """
    m_rule = Rule.polynomial(1, Fraction(-1, 2), Fraction(1, 2))
    n_rule = Rule.affine(1, 0) if n is None else Rule.of(n)
    if K is not None:
        K = int(K)
        if K < 1:
            raise BadInput("K must be at least 1")
        n_vals = n_rule.params[:K + 1] if n_rule.is_prefix else [n_rule(k) for k in range(1, K + 2)]
        if n_rule.is_prefix and len(n_vals) < K:
            raise BadInput("prefix shorter than K")
        m_pref = Rule.prefix(m_rule(k) for k in range(1, K + 1))
        n_pref = Rule.prefix(n_vals)
        spec = DyadicFamily(m_pref, n_pref, k0=1)
        params = {"n": n_rule.to_dict(), "K": K}
        return CatalogEntry("example_dyadic_b", spec, OPEN, "exponent gaps m(k+1)-m(k)=k (truncated)", params,
                            m_pref, n_pref, 1, notes=(f"rule m(k)={m_rule.describe()}",))
    if n_rule.is_prefix:
        m_pref = Rule.prefix(m_rule(k) for k in range(1, len(n_rule) + 1))
        spec = DyadicFamily(m_pref, n_rule, k0=1)
        return CatalogEntry("example_dyadic_b", spec, OPEN, "exponent gaps m(k+1)-m(k)=k (prefix)",
                            {"n": n_rule.to_dict()}, m_pref, n_rule, 1,
                            notes=(f"rule m(k)={m_rule.describe()}",))
    spec = DyadicFamily(m_rule, n_rule, k0=1)
    return CatalogEntry("example_dyadic_b", spec, TYPE2, "exponent gaps m(k+1)-m(k)=k are unbounded",
                        {"n": n_rule.to_dict()}, m_rule, n_rule, 1)


# set algebra on entries


def union_entry(a: CatalogEntry, b: CatalogEntry) -> CatalogEntry:
    """Union with type propagation: two type 1 sets always give a type 1 union."""
    kt = TYPE1 if a.known_type == TYPE1 and b.known_type == TYPE1 else OPEN
    notes = ("union of type 1 sets is type 1",) if kt == TYPE1 else ("union type not determined by the parts",)
    return CatalogEntry(f"union({a.name},{b.name})", set_union(a.spec, b.spec), kt, "union of catalog entries",
                        {"left": a.params, "right": b.params}, notes=notes)


def minkowski_entry(a: CatalogEntry, b: CatalogEntry) -> CatalogEntry:
    kt = TYPE1 if a.known_type == TYPE1 and b.known_type == TYPE1 else OPEN
    notes = ("Minkowski sum of type 1 sets is type 1",) if kt == TYPE1 else ()
    return CatalogEntry(f"minkowski({a.name},{b.name})", Minkowski(a.spec, b.spec), kt,
                        "Minkowski sum of catalog entries", {"left": a.params, "right": b.params}, notes=notes)


# registry used by the CLI and the spec-document loader


def _rule_arg(v):
    return v if isinstance(v, (Rule, dict, list, tuple)) else Rule.parse(str(v))


def _opt_int(v):
    return None if v is None else int(v)


def get(name: str, **params) -> CatalogEntry:
    if name == "dyadic_a":
        return dyadic_a()
    if name == "dyadic_family":
        return dyadic_family(_rule_arg(params.get("m", "affine:1,0")), _rule_arg(params.get("n", "affine:1,0")),
                             int(params.get("k0", 1)))
    if name == "sandwich":
        return sandwich(int(params.get("n", 1)))
    if name in ("union_counterexample.1", "union_counterexample.2"):
        return union_counterexample()[0 if name.endswith("1") else 1]
    if name == "union_counterexample.union":
        return union_counterexample_union()
    if name == "log_integers":
        return log_integers(int(params.get("N", 1000)))
    if name == "alg_indep_type1":
        alpha = params.get("alpha")
        if isinstance(alpha, str):
            alpha = [float(a) for a in alpha.split(",")]
        return alg_indep_type1(int(params.get("K", 4)), alpha, int(params.get("seed", 0)))
    if name == "example_dyadic_b":
        n = params.get("n")
        return example_dyadic_b(None if n is None else _rule_arg(n), _opt_int(params.get("K")))
    raise BadInput(f"unknown catalog entry {name!r}")


def default_entries() -> list[CatalogEntry]:
    l1, l2 = union_counterexample()
    return [dyadic_a(), dyadic_family(Rule.exponential(2), Rule.affine(1, 0)),
            *(sandwich(n) for n in (-1, 0, 1, 2)), l1, l2, union_counterexample_union(), log_integers(1000),
            alg_indep_type1(4), example_dyadic_b()]


def listing_csv(entries=None) -> str:
    buf = io.StringIO()
    buf.write("# translab schema=1 command=catalog\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["name", "known_type", "source", "params"])
    for e in entries if entries is not None else default_entries():
        wr.writerow(e.row())
    return buf.getvalue()


__all__ = ["CatalogEntry", "TYPE1", "TYPE2", "OPEN", "dyadic_a", "dyadic_family", "sandwich", "l_value", "m_value",
           "union_counterexample", "union_counterexample_union", "log_integers", "alg_indep_type1",
           "example_dyadic_b", "union_entry", "minkowski_entry", "get", "listing_csv", "periodicity_threshold",
           "anti_lex_pairs", "Union"]
