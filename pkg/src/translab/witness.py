"""Witness step functions for the count-ratio criterion, partial-sum profiles and series tests."""

from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

import mpmath

from .classify import RatioChain, ratio
from .dyadic import DyadicRational
from .errors import BadInput, InvalidChain, PrecisionOverflow
from .rules import Rule
from .sets import Affine, LambdaSpec, Window, as_fraction, header_lines

DEFAULT_SAMPLES = 64
MAX_RANDT2_EXP = 4096
DIVERGENCE_BOUND = 10**3


@dataclass(frozen=True)
class StepFunction:
    """Nonnegative step function: ``value`` on each ``[a, b)``, zero elsewhere."""

    pieces: tuple = ()

    def __post_init__(self):
        ps = tuple(sorted((as_fraction(a), as_fraction(b), as_fraction(v)) for a, b, v in self.pieces))
        for a, b, v in ps:
            if not a < b:
                raise BadInput(f"empty piece [{a}, {b})")
            if v < 0:
                raise BadInput("step function values must be nonnegative")
        for (_, b0, _), (a1, _, _) in zip(ps, ps[1:]):
            if a1 < b0:
                raise BadInput("step function pieces overlap")
        object.__setattr__(self, "pieces", ps)

    def __call__(self, y) -> Fraction:
        y = as_fraction(y)
        i = bisect.bisect_right([p[0] for p in self.pieces], y) - 1
        if i >= 0:
            a, b, v = self.pieces[i]
            if a <= y < b:
                return v
        return Fraction(0)

    def __len__(self):
        return len(self.pieces)

    def rescaled(self, s) -> "StepFunction":
        """``g(y) = f(y / s)``."""
        s = as_fraction(s)
        return StepFunction(tuple((a * s, b * s, v) for a, b, v in self.pieces))

    def rows(self) -> list[tuple[str, str, str]]:
        return [(str(a), str(b), str(v)) for a, b, v in self.pieces]


def step_function_csv(f: StepFunction, params: dict) -> str:
    buf = io.StringIO()
    for line in header_lines("witness.f", params):
        buf.write(line + "\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["a", "b", "value"])
    wr.writerows(f.rows())
    return buf.getvalue()


@dataclass
class Type2Witness:
    """``f`` lives on the rescaled axis ``Λ/ε'``; ``g`` is the same function in original units."""

    f: StepFunction
    g: StepFunction
    I_C: Window
    I_D: Window
    eps: Fraction
    eps_prime: Fraction
    scaled_spec: LambdaSpec
    spec: LambdaSpec
    chain: RatioChain

    I_C_scaled = Window(0, 1)
    I_D_scaled = Window(-2, -1)

    @property
    def depth(self) -> int:
        return len(self.f)


def build_type2_witness(spec: LambdaSpec, eps, chain: RatioChain) -> Type2Witness:
    """``f = 1/a'_{m_k}`` on ``[m_k - 2, m_k)`` of the axis ``Λ/ε'``; convergence on ``I_C``, divergence on ``I_D``."""
    eps = as_fraction(eps)
    if eps <= 0:
        raise BadInput("eps must be positive")
    ep = eps / 3
    if chain.eps_prime != ep:
        raise InvalidChain(f"chain was built for eps'={chain.eps_prime}, expected {ep}")
    if not chain.is_valid():
        raise InvalidChain("chain violates r_k >= 2^k or m_{k+1} - m_k >= 2")
    scaled = Affine(spec, 1 / ep)
    pieces = []
    for k, m in enumerate(chain.indices, start=1):
        cnt = [scaled.count(Fraction(m - d), Fraction(m - d + 1), None) for d in (0, 1, 2, 3)]
        if cnt[0] == 0:
            raise InvalidChain(f"cell {m} is empty")
        if ratio(cnt[0], cnt[1] + cnt[2] + cnt[3]) < 2**k:
            raise InvalidChain(f"cell {m} does not reach ratio 2^{k} on this set")
        pieces.append((m - 2, m, Fraction(1, cnt[0])))
    f = StepFunction(tuple(pieces))
    return Type2Witness(f, f.rescaled(ep), Window(0, ep), Window(-2 * ep, -ep), eps, ep, scaled, spec, chain)


def block_contribution(f: StepFunction, spec: LambdaSpec, k: int, x) -> Fraction:
    """``Σ_{λ ∈ Λ ∩ [a_k - x, b_k - x)} f(x + λ)`` for the ``k``-th piece (1-based)."""
    if not 1 <= k <= len(f):
        raise BadInput(f"piece index {k} out of range")
    a, b, v = f.pieces[k - 1]
    x = as_fraction(x)
    if v == 0:
        return Fraction(0)
    return v * spec.count(a - x, b - x, None)


def total_sum(f: StepFunction, spec: LambdaSpec, x) -> Fraction:
    return sum((block_contribution(f, spec, k, x) for k in range(1, len(f) + 1)), Fraction(0))


@dataclass
class SumProfile:
    x: Fraction
    blocks: list = field(default_factory=list)
    cumulative: list = field(default_factory=list)
    cert_type: str = "none"
    cert_bounds: list = field(default_factory=list)
    cert_ok: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return all(self.cert_ok)


def _certificate(x: Fraction, k: int, I_C: Window, I_D: Window):
    if I_C.lo <= x < I_C.hi:
        return "upper", Fraction(1, 2**k)
    if I_D.lo <= x < I_D.hi:
        return "lower", Fraction(1)
    return "none", None


def sum_profile(f: StepFunction, spec: LambdaSpec, xs: Iterable, K: int | None = None,
                I_C: Window = Window(0, 1), I_D: Window = Window(-2, -1)) -> list[SumProfile]:
    """Per-sample cumulative sums through ``K`` pieces with per-block bound certificates."""
    K = len(f) if K is None else min(int(K), len(f))
    out = []
    for x in xs:
        x = as_fraction(x)
        prof = SumProfile(x)
        acc = Fraction(0)
        for k in range(1, K + 1):
            c = block_contribution(f, spec, k, x)
            acc += c
            kind, bound = _certificate(x, k, I_C, I_D)
            prof.blocks.append(c)
            prof.cumulative.append(acc)
            prof.cert_type = kind
            prof.cert_bounds.append(bound)
            if kind == "upper":
                prof.cert_ok.append(c <= bound)
            elif kind == "lower":
                prof.cert_ok.append(c >= bound)
        out.append(prof)
    return out


def dyadic_samples(w: Window, count: int = DEFAULT_SAMPLES) -> list[Fraction]:
    """``count`` equispaced points ``lo + j*(hi-lo)/count``; dyadic when ``w`` and ``count`` are."""
    step = (w.hi - w.lo) / count
    return [w.lo + j * step for j in range(count)]


def witness_profiles(w: Type2Witness, samples: int = DEFAULT_SAMPLES) -> tuple[list, list]:
    """Profiles on the rescaled axis for ``I_C`` and ``I_D`` samples."""
    xs_c = dyadic_samples(w.I_C_scaled, samples)
    xs_d = dyadic_samples(w.I_D_scaled, samples)
    return (sum_profile(w.f, w.scaled_spec, xs_c, I_C=w.I_C_scaled, I_D=w.I_D_scaled),
            sum_profile(w.f, w.scaled_spec, xs_d, I_C=w.I_C_scaled, I_D=w.I_D_scaled))


def rescaling_gap(w: Type2Witness, x) -> Fraction:
    """``Σ g(x+λ)`` minus ``Σ f(x/ε' + λ/ε')``; zero when the rescaling is consistent."""
    x = as_fraction(x)
    lhs = total_sum(w.g, w.spec, x)
    rhs = total_sum(w.f, w.scaled_spec, x / w.eps_prime)
    return lhs - rhs


def _frac_cell(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def profile_csv(profiles: list[SumProfile], params: dict) -> str:
    buf = io.StringIO()
    for line in header_lines("witness.profile", params):
        buf.write(line + "\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["x_num", "x_exp", "k", "block_sum", "cumulative", "cert_type", "cert_bound"])
    for p in profiles:
        try:
            xd = DyadicRational.coerce(p.x)
            xn, xe = xd.num, xd.exp
        except ValueError:
            xn, xe = _frac_cell(p.x), ""
        for k, (c, acc, bound) in enumerate(zip(p.blocks, p.cumulative, p.cert_bounds), start=1):
            wr.writerow([xn, xe, k, _frac_cell(c), _frac_cell(acc), p.cert_type,
                         "" if bound is None else _frac_cell(bound)])
    return buf.getvalue()


# randomized thinning series


@dataclass(frozen=True)
class SeriesRow:
    k: int
    m: int
    gap: int
    term: mpmath.mpf
    partial: mpmath.mpf


def _seq(rule, k: int, k0: int = 1):
    r = Rule.of(rule)
    if r.is_prefix:
        i = k - k0
        if i >= len(r):
            raise BadInput(f"prefix too short for term {k}")
        return r.params[i]
    return r(k)


def randt2_term(q, m: int, gap: int, prec: int = 96) -> mpmath.mpf:
    """``1 - (1 - q^(2^m))^gap`` evaluated in log space."""
    if m > MAX_RANDT2_EXP:
        raise PrecisionOverflow(f"2^{m} exceeds the supported exponent range; use m <= {MAX_RANDT2_EXP}")
    if gap < 0:
        raise BadInput("gap must be nonnegative")
    with mpmath.workprec(prec):
        q = mpmath.mpf(q) if not isinstance(q, Fraction) else mpmath.mpf(q.numerator) / q.denominator
        if not 0 < q < 1:
            raise BadInput("q must lie in (0, 1)")
        if gap == 0:
            return mpmath.mpf(0)
        x = mpmath.exp(mpmath.ldexp(mpmath.log(q), m))
        return -mpmath.expm1(gap * mpmath.log1p(-x))


def randt2_series(m, n, q, K: int, prec: int = 96) -> list[SeriesRow]:
    """Partial sums of ``Σ 1 - (1 - q^(2^m_k))^(n_{k+1} - n_k)`` for ``k = 1..K``."""
    rows = []
    acc = mpmath.mpf(0)
    prev_m = None
    for k in range(1, int(K) + 1):
        mk = _seq(m, k)
        n0, n1 = _seq(n, k), _seq(n, k + 1)
        if n1 < n0 or (prev_m is not None and mk <= prev_m):
            raise BadInput("m and n must be increasing")
        prev_m = mk
        t = randt2_term(q, mk, n1 - n0, prec)
        with mpmath.workprec(prec):
            acc = acc + t
        rows.append(SeriesRow(k, mk, n1 - n0, t, acc))
    return rows


def series_divergence_evidence(rows: list[SeriesRow], bound=DIVERGENCE_BOUND) -> bool:
    """Partial sums past ``bound`` while the terms do not vanish; evidence only."""
    if not rows:
        return False
    tail = rows[-max(1, len(rows) // 4):]
    return rows[-1].partial > bound and min(r.term for r in tail) > mpmath.mpf("1e-3")


def series_csv(rows: list[SeriesRow], params: dict) -> str:
    buf = io.StringIO()
    for line in header_lines("randt2", params):
        buf.write(line + "\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["k", "m_k", "gap", "term", "partial_sum"])
    for r in rows:
        wr.writerow([r.k, r.m, r.gap, mpmath.nstr(r.term, 17), mpmath.nstr(r.partial, 17)])
    return buf.getvalue()


# exponential integral criterion


@dataclass
class IntegralReport:
    finite: bool | None
    value: mpmath.mpf | None
    partial_sums: list = field(default_factory=list)


def _piece_integral(a: Fraction, b: Fraction, v: Fraction, c: Fraction) -> mpmath.mpf:
    lo = max(a, c)
    if lo >= b or v == 0:
        return mpmath.mpf(0)
    width = b - lo
    ea = mpmath.exp(mpmath.mpf(lo.numerator) / lo.denominator)
    # expm1 keeps narrow pieces accurate
    return mpmath.mpf(v.numerator) / v.denominator * ea * mpmath.expm1(mpmath.mpf(width.numerator) / width.denominator)


def exp_integral_test(g, c=0, max_pieces: int = 200, bound=DIVERGENCE_BOUND, prec: int = 96) -> IntegralReport:
    """``∫_c^∞ e^y g(y) dy`` for a finite step function, or partial sums for a piece generator.

    ``g`` may be a StepFunction or a callable ``k -> (a, b, value)`` for ``k = 0, 1, ...``.
    """
    c = as_fraction(c)
    with mpmath.workprec(prec):
        if isinstance(g, StepFunction):
            total = mpmath.mpf(0)
            for a, b, v in g.pieces:
                total += _piece_integral(a, b, v, c)
            return IntegralReport(True, total, [total])
        terms, partial = [], []
        acc = mpmath.mpf(0)
        for k in range(max_pieces):
            a, b, v = (as_fraction(t) for t in g(k))
            t = _piece_integral(a, b, v, c)
            acc += t
            terms.append(t)
            partial.append(acc)
        tail = terms[len(terms) // 2:]
        growing = all(y >= x for x, y in zip(tail, tail[1:]) if x > 0)
        if acc > bound and tail and min(tail) > 0 and growing:
            return IntegralReport(False, None, partial)
        # geometric tail estimate
        nz = [t for t in tail if t > 0]
        if len(nz) >= 2:
            q = max(y / x for x, y in zip(nz, nz[1:]))
            if q < 1:
                est = acc + nz[-1] * q / (1 - q)
                return IntegralReport(True, est, partial)
        elif not nz:
            return IntegralReport(True, acc, partial)
        return IntegralReport(None, None, partial)


__all__ = ["StepFunction", "Type2Witness", "build_type2_witness", "block_contribution", "sum_profile",
           "SumProfile", "witness_profiles", "rescaling_gap", "randt2_term", "randt2_series", "exp_integral_test",
           "series_divergence_evidence", "profile_csv", "step_function_csv", "series_csv", "dyadic_samples",
           "total_sum"]
