"""Simultaneous Diophantine approximation and the S-band witness for ``Λ1 ∪ {independent α}``.

``solve`` returns the smallest ``|p|`` with ``max_j ||θ_j p - α_j|| < ε``. Fractional
parts are tracked as 64-bit fixed-point integers (wrapping multiplication is exact
mod 2^64), candidates are found by a bucketed baby-step/giant-step scan and every
answer is re-verified in exact rational arithmetic.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .catalog import CatalogEntry, dyadic_a
from .errors import BadInput, NotFoundWithinBound, SpacingError
from .sets import BlockSpec, as_fraction, header_lines

ONE = 1 << 64
DEFAULT_P_BOUND = 10**7
WITNESS_P_BOUND = 10**12
DIRECT_SCAN = 1 << 20
BABY_STEPS = 1 << 21
BUCKET_DIMS = 3
MAX_WITNESS_LEVEL = 3
ALPHA_BITS = 256


def nearest_dist(x) -> Fraction:
    """``||x||``, the distance to the nearest integer (exact for rationals)."""
    x = as_fraction(x)
    r = x - math.floor(x)
    return min(r, 1 - r)


@dataclass
class ApproxProblem:
    theta: list
    alpha: list
    eps: Fraction
    p_bound: int = DEFAULT_P_BOUND

    def __post_init__(self):
        self.theta = [as_fraction(t) for t in self.theta]
        self.alpha = [as_fraction(a) for a in self.alpha]
        self.eps = as_fraction(self.eps)
        if len(self.theta) != len(self.alpha):
            raise BadInput("theta and alpha must have equal length")
        if not self.theta:
            raise BadInput("empty problem")
        if self.eps <= 0:
            raise BadInput("eps must be positive")

    @property
    def L(self) -> int:
        return len(self.theta)

    def residuals(self, p: int) -> list[Fraction]:
        return [nearest_dist(t * p - a) for t, a in zip(self.theta, self.alpha)]

    def satisfied(self, p: int) -> bool:
        return all(r < self.eps for r in self.residuals(p))


@dataclass
class PrecheckResult:
    admissible: bool | None
    u: tuple | None = None
    note: str = ""


def _ordered_vectors(L: int, bound: int):
    """Integer vectors with first nonzero entry positive, by increasing l1 norm."""
    rng = np.arange(-bound, bound + 1)
    grids = np.stack(np.meshgrid(*([rng] * L), indexing="ij"), axis=-1).reshape(-1, L)
    nz = grids != 0
    first = np.argmax(nz, axis=1)
    keep = nz.any(axis=1) & (grids[np.arange(len(grids)), first] > 0)
    g = grids[keep]
    order = np.lexsort(tuple(g[:, i] for i in reversed(range(L))) + (np.abs(g).sum(axis=1),))
    return g[order]


def precheck_condition_B(problem: ApproxProblem, bound: int = 20, int_tol: float = 1e-9,
                         alpha_tol: float = 1e-6) -> PrecheckResult:
    """Look for small ``u`` with ``Σ u_j θ_j ∈ Z`` but ``Σ u_j α_j ∉ Z``: a proof that no ``p`` exists."""
    if problem.L > 4:
        return PrecheckResult(None, note="L > 4: exhaustive relation search skipped")
    if all(nearest_dist(a) == 0 for a in problem.alpha):
        return PrecheckResult(True, note="alpha is integral")
    U = _ordered_vectors(problem.L, bound).astype(np.float64)
    th = np.array([float(t - math.floor(t)) for t in problem.theta])
    al = np.array([float(a - math.floor(a)) for a in problem.alpha])
    st = U @ th
    sa = U @ al
    dt = np.abs(st - np.round(st))
    da = np.abs(sa - np.round(sa))
    bad = np.nonzero((dt < int_tol) & (da > alpha_tol))[0]
    if bad.size:
        u = tuple(int(v) for v in U[bad[0]])
        return PrecheckResult(False, u, "integer relation on theta not matched by alpha")
    return PrecheckResult(True, note=f"no relation with |u_j| <= {bound}")


def _fixed(x: Fraction) -> int:
    """``floor(frac(x) * 2^64)``."""
    return ((x.numerator % x.denominator) << 64) // x.denominator


class _Search:
    def __init__(self, problem: ApproxProblem):
        self.pb = problem
        self.C = [np.uint64(_fixed(t)) for t in problem.theta]
        self.Cint = [_fixed(t) for t in problem.theta]
        self.T = [_fixed(a) for a in problem.alpha]
        # truncating frac(θ) costs under p * 2^-64 after multiplying by p
        self.E = min(ONE // 2, int(problem.eps * ONE) + problem.p_bound + (1 << 8))

    def _close(self, a: np.ndarray, base: int, targets: list[int], coords=None) -> np.ndarray:
        keep = np.ones(len(a), dtype=bool)
        E = np.uint64(self.E)
        for j in (coords if coords is not None else range(self.pb.L)):
            off = np.uint64((self.Cint[j] * base - targets[j]) % ONE)
            d = self.C[j] * a + off
            dist = np.minimum(d, np.uint64(0) - d)
            keep &= dist <= E
        return keep

    def _verify(self, cands):
        for p in sorted(cands, key=lambda q: (abs(q), q < 0)):
            if self.pb.satisfied(p):
                return p
        return None

    def direct(self, lo: int, hi: int, signs) -> int | None:
        """Smallest ``|p|`` with ``lo <= |p| < hi``."""
        chunk = 1 << 18
        for s in range(lo, hi, chunk):
            a = np.arange(0, min(chunk, hi - s), dtype=np.uint64)
            cands = []
            for sign in signs:
                tg = self.T if sign > 0 else [(-t) % ONE for t in self.T]
                hit = np.nonzero(self._close(a, s, tg))[0]
                cands.extend(sign * (s + int(i)) for i in hit)
            p = self._verify(cands)
            if p is not None:
                return p
        return None

    def bsgs(self, lo: int, hi: int, signs) -> int | None:
        L = self.pb.L
        d = min(BUCKET_DIMS, L)
        shift = max(0, (2 * self.E - 1).bit_length())
        if shift >= 64:
            return self.direct(lo, hi, signs)
        nc = 1 << (64 - shift)
        if nc ** d > (1 << 24):
            d = max(1, int(24 // (64 - shift)))
        G = min(BABY_STEPS, max(1, hi - lo))
        a = np.arange(G, dtype=np.uint64)
        bucket = np.zeros(G, dtype=np.int64)
        for j in range(d):
            cell = (self.C[j] * a) >> np.uint64(shift)
            bucket = bucket * nc + cell.astype(np.int64)
        order = np.argsort(bucket, kind="stable")
        counts = np.bincount(bucket, minlength=nc**d)
        starts = np.concatenate(([0], np.cumsum(counts)))
        for base in range(lo, hi, G):
            limit = hi - base
            cands = []
            for sign in signs:
                tg = self.T if sign > 0 else [(-t) % ONE for t in self.T]
                cells = []
                for j in range(d):
                    v = (tg[j] - self.Cint[j] * base) % ONE
                    cells.append(sorted({((v - self.E) % ONE) >> shift, ((v + self.E) % ONE) >> shift}))
                parts = []
                for combo in itertools.product(*cells):
                    b = 0
                    for c in combo:
                        b = b * nc + c
                    if counts[b]:
                        parts.append(order[starts[b]:starts[b + 1]])
                if not parts:
                    continue
                idx = np.concatenate(parts)
                idx = idx[idx < limit]
                av = idx.astype(np.uint64)
                hit = idx[self._close(av, base, tg)]
                cands.extend(sign * (base + int(i)) for i in hit)
            p = self._verify(cands)
            if p is not None:
                return p
        return None


def solve(problem: ApproxProblem, positive_only: bool = False) -> int:
    """Smallest ``|p| <= p_bound`` (order 0, 1, -1, 2, ...) with ``max_j ||θ_j p - α_j|| < ε``."""
    pb = problem
    if not positive_only and pb.satisfied(0):
        return 0
    search = _Search(pb)
    signs = (1,) if positive_only else (1, -1)
    top = pb.p_bound + 1
    p = search.direct(1, min(top, DIRECT_SCAN), signs)
    if p is None and top > DIRECT_SCAN:
        p = search.bsgs(DIRECT_SCAN, top, signs)
    if p is None:
        raise NotFoundWithinBound(f"no p with |p| <= {pb.p_bound} (not a proof of impossibility)")
    return p


# S-band witness


def seeded_alphas(count: int, seed: int, bits: int = ALPHA_BITS) -> list[Fraction]:
    """``α_k = 6k + u_k`` with ``u_k`` a uniform ``bits``-bit dyadic in (0, 1); gaps exceed 5."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(1, count + 1):
        words = rng.integers(0, 1 << 32, size=bits // 32, dtype=np.uint64)
        u = 0
        for wv in words.tolist():
            u = (u << 32) | int(wv)
        u |= 1
        out.append(6 * k + Fraction(u, 1 << bits))
    return out


def extract_betas(alphas: list[Fraction], need: int) -> list[int]:
    """Greedy indices of a subsequence with consecutive gaps above 5."""
    if any(b <= a for a, b in zip(alphas, alphas[1:])) or (alphas and alphas[0] <= 0):
        raise SpacingError("alphas must be positive and strictly ascending")
    idx = []
    for i, a in enumerate(alphas):
        if not idx or a - alphas[idx[-1]] > 5:
            idx.append(i)
            if len(idx) == need:
                return idx
    raise SpacingError(f"only {len(idx)} alphas with gaps > 5; need {need}")


@dataclass
class Level:
    k: int
    n: int
    r: int
    p: int | None
    t: int | None
    eps: Fraction
    alpha_ik: list  # α_{i,k}, i = 1..n
    A: list  # indices into alphas
    B: list
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.p is not None


@dataclass
class SWitness:
    alphas: list
    betas: list
    lambda1: BlockSpec
    levels: list = field(default_factory=list)

    @property
    def K(self) -> int:
        return len(self.levels)

    def supports(self) -> list[tuple[int, int, Fraction, Fraction]]:
        return [(lv.k, i, a, a + 1) for lv in self.levels for i, a in enumerate(lv.alpha_ik, start=1)]

    def in_S(self, y, k: int, i: int) -> bool:
        lv = self.levels[k - 1]
        a = lv.alpha_ik[i - 1]
        y = as_fraction(y)
        if not (a <= y <= a + 1) or not lv.ok:
            return False
        return _band_hit(y, lv.t, Fraction(1, lv.n))


def _band_hit(y: Fraction, t: int, H: Fraction) -> bool:
    """``|y - j/t| <= H/t`` for some ``j >= 1``."""
    q = y * t
    j = max(1, round(q))
    return abs(q - j) <= H


def band_measure(t: int, H: Fraction, a: Fraction, b: Fraction) -> Fraction:
    """Measure of ``∪_{j>=1} [j/t - H/t, j/t + H/t] ∩ [a, b]`` for ``0 < H``, ``a >= 1/t``."""
    H = min(as_fraction(H), Fraction(1, 2))

    def cov(x: Fraction) -> Fraction:
        q = x * t
        whole = math.floor(q)
        r = q - whole
        return whole * 2 * H + min(r, H) + max(Fraction(0), r - (1 - H))

    return (cov(as_fraction(b)) - cov(as_fraction(a))) / t


def r_value(lambda1: BlockSpec, bound: Fraction) -> int:
    """``sup{m_l : n_l <= bound}`` over the blocks of ``lambda1`` (0 if there are none)."""
    blocks = lambda1.blocks_in(Fraction(0), Fraction(math.floor(bound) + 1))
    exps = [b.exp for b in blocks if b.lo <= bound]
    return max(exps, default=0)


def level_problem(alphas, lv_r: int, n: int, A: list, B: list, p_bound: int) -> ApproxProblem:
    scale = 1 << lv_r
    pos = {j: i for i, j in enumerate(B, start=1)}
    theta = [scale * alphas[j] for j in A]
    target = [Fraction(-pos[j], n) if j in pos else Fraction(0) for j in A]
    return ApproxProblem(theta, target, Fraction(1, 10 * n), p_bound)


def build_S_witness(lambda1=None, alphas=None, K: int = 2, seed: int = 0,
                    p_bound: int = WITNESS_P_BOUND) -> SWitness:
    K = int(K)
    if not 0 <= K <= MAX_WITNESS_LEVEL:
        raise BadInput(f"K must lie in 0..{MAX_WITNESS_LEVEL}")
    if lambda1 is None:
        lambda1 = dyadic_a().spec
    elif isinstance(lambda1, CatalogEntry):
        lambda1 = lambda1.spec
    if not getattr(lambda1, "is_blocks", False):
        raise BadInput("lambda1 must be a dyadic block set")
    need = 2 ** (K + 1)
    if alphas is None:
        alphas = seeded_alphas(need, seed)
    alphas = [as_fraction(a) for a in alphas]
    bidx = extract_betas(alphas, need) if K else []
    w = SWitness(alphas, [alphas[i] for i in bidx], lambda1)
    for k in range(1, K + 1):
        n = 2**k
        B = bidx[n:2 * n]
        A = list(range(bidx[2 * n - 1] + 1))
        r = r_value(lambda1, alphas[bidx[2 * n - 1]] + 1)
        prob = level_problem(alphas, r, n, A, B, p_bound)
        alpha_ik = [alphas[j] for j in B]
        try:
            p = solve(prob, positive_only=True)
            w.levels.append(Level(k, n, r, p, p << r, prob.eps, alpha_ik, A, B))
        except NotFoundWithinBound as e:
            w.levels.append(Level(k, n, r, None, None, prob.eps, alpha_ik, A, B, str(e)))
    return w


def level_residuals(w: SWitness, k: int) -> list[Fraction]:
    lv = w.levels[k - 1]
    prob = level_problem(w.alphas, lv.r, lv.n, lv.A, lv.B, 1)
    return prob.residuals(lv.p)


def spacing_ok(w: SWitness) -> bool:
    sup = sorted((a, b) for _, _, a, b in w.supports())
    return all(c - b >= 4 for (_, b), (c, _) in zip(sup, sup[1:]))


@dataclass
class DivergenceReport:
    hits: dict  # x -> number of levels hit
    K: int

    @property
    def full_fraction(self) -> float:
        if not self.hits:
            return 1.0
        return sum(1 for h in self.hits.values() if h == self.K) / len(self.hits)


def check_claim_divergence(w: SWitness, xs, K: int | None = None) -> DivergenceReport:
    """For each ``x`` and level ``k``, locate ``l_k`` and test ``x + α_{l_k,k} ∈ S_{l_k,k}`` exactly."""
    K = w.K if K is None else min(K, w.K)
    hits = {}
    for x in xs:
        x = as_fraction(x)
        h = 0
        for k in range(1, K + 1):
            lv = w.levels[k - 1]
            if not lv.ok:
                continue
            N = round(x * lv.n * lv.t)
            i = (N - 1) // lv.n
            l = N - i * lv.n
            if w.in_S(x + lv.alpha_ik[l - 1], k, l):
                h += 1
        hits[x] = h
    return DivergenceReport(hits, K)


@dataclass
class ConvergenceReport:
    rows: list  # per level dict
    ok: bool


def check_claim_convergence(w: SWitness, K: int | None = None, samples: int = 16) -> ConvergenceReport:
    """Exact measures of ``F_k`` and ``G_k`` on [3, 4] plus the grid-divisibility facts."""
    K = w.K if K is None else min(K, w.K)
    rows, ok = [], True
    three, four = Fraction(3), Fraction(4)
    sumF = sumG = Fraction(0)
    for k in range(1, K + 1):
        lv = w.levels[k - 1]
        if not lv.ok:
            rows.append({"k": k, "error": lv.error})
            ok = False
            continue
        n, t = lv.n, lv.t
        muF = band_measure(t, Fraction(3, 2 * n), three, four)
        muG = band_measure(t, Fraction(1, n), three, four)
        sumF += muF
        sumG += muG
        beta_top = w.betas[2 * n - 1]
        fine = [b.exp for b in w.lambda1.blocks_in(Fraction(0), beta_top - 2) if b.lo <= beta_top - 2]
        grid_ok = max(fine, default=0) <= lv.r and t % (1 << lv.r) == 0
        impl_ok = _sampled_E_in_G(w, lv, samples)
        row = {"k": k, "n": n, "r": lv.r, "muF": muF, "muF_bound": Fraction(4, n), "muG": muG,
               "muG_expected": Fraction(2, n), "grid_divides": grid_ok, "E_in_G_samples": impl_ok,
               "sumF": sumF, "sumG": sumG}
        row_ok = muF <= Fraction(4, n) and muG == Fraction(2, n) and grid_ok and impl_ok
        row["ok"] = row_ok
        ok = ok and row_ok
        rows.append(row)
    return ConvergenceReport(rows, ok)


def _sampled_E_in_G(w: SWitness, lv: Level, samples: int) -> bool:
    """Construct ``x ∈ [3,4]`` and grid points ``λ`` with ``x + λ`` in a band; check ``x ∈ G_k``."""
    t, n, r = lv.t, lv.n, lv.r
    rng = np.random.default_rng(lv.k)
    for s in range(samples):
        i = s % n
        a = lv.alpha_ik[i]
        # λ on the 2^-r grid with λ + [3,4] meeting [a, a+1]
        lam = Fraction(int(rng.integers(0, 1 << 20)), 1 << 20) + math.floor(a) - 3
        lam = Fraction(math.floor(lam * (1 << r)), 1 << r)
        y = a + Fraction(int(rng.integers(1, 1 << 16)), 1 << 17)
        j = round(y * t)
        delta = Fraction(int(rng.integers(-(1 << 10), 1 << 10)), (1 << 10) * n * t)
        x = Fraction(j, t) + delta - lam
        if not (3 <= x <= 4):
            continue
        if not _band_hit(x, t, Fraction(1, n)):
            return False
    return True


def witness_csv(w: SWitness, params: dict, max_intervals: int = 10**5) -> str:
    """Per ``(k, i)``: support, ``t_k``, band half-width ``1/(n t_k)`` and exact measure.

    Explicit bands ``[(j n - 1)/(n t), (j n + 1)/(n t)]`` meeting the support are listed as
    integer ``(lo_num, hi_num, den)`` triples when their total count is at most
    ``max_intervals``; intersecting with the support columns gives ``S_{i,k}``.
    """
    buf = io.StringIO()
    for line in header_lines("kron.witness", params):
        buf.write(line + "\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["k", "i", "n", "r", "p", "t", "support_lo", "support_hi", "half_width", "measure"])
    explicit = []
    for lv in w.levels:
        for i, a in enumerate(lv.alpha_ik, start=1):
            if not lv.ok:
                wr.writerow([lv.k, i, lv.n, lv.r, "", "", str(a), str(a + 1), "", ""])
                continue
            mu = band_measure(lv.t, Fraction(1, lv.n), a, a + 1)
            wr.writerow([lv.k, i, lv.n, lv.r, lv.p, lv.t, str(a), str(a + 1), f"1/{lv.n * lv.t}", str(mu)])
            explicit.append((lv, a))
    total = sum(lv.t + 1 for lv, _ in explicit)
    if explicit and total <= max_intervals:
        wr.writerow([])
        wr.writerow(["k", "i", "lo_num", "hi_num", "den"])
        for lv, a in explicit:
            den = lv.n * lv.t
            i = lv.alpha_ik.index(a) + 1
            for j in range(math.ceil(a * lv.t - Fraction(1, 2)), math.floor((a + 1) * lv.t + Fraction(1, 2)) + 1):
                if Fraction(j * lv.n + 1, den) >= a and Fraction(j * lv.n - 1, den) <= a + 1:
                    wr.writerow([lv.k, i, j * lv.n - 1, j * lv.n + 1, den])
    return buf.getvalue()


__all__ = ["ApproxProblem", "precheck_condition_B", "solve", "nearest_dist", "build_S_witness", "SWitness",
           "check_claim_divergence", "check_claim_convergence", "band_measure", "seeded_alphas", "extract_betas",
           "level_residuals", "spacing_ok", "witness_csv", "r_value"]
