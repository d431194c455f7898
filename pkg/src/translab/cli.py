"""Command-line front end: ``translab <command> ...``.

Exit codes: 0 ok, 2 bad input, 3 cap exceeded, 4 invalid witness, 5 precision, 6 kron search exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from . import catalog, classify, kronecker, witness
from .catalog import OPEN, CatalogEntry
from .errors import BadInput, InvalidChain, TranslabError
from .sets import DEFAULT_CAP, DyadicFamily, Window, enumerate_set, enumeration_csv, header_lines, loads, thin

CRITERIA = ("mk", "ratio", "growth", "lacunarity", "speed")
WITNESS_HORIZONS = (64, 128, 256, 512, 1024, 2048, 4096)


@dataclass
class RunConfig:
    command: str
    name: str | None = None
    spec_file: str | None = None
    params: dict = field(default_factory=dict)
    eps: Fraction = Fraction(1)
    window: Window | None = None
    depth: int = 3
    samples: int = 64
    seed: int = 0
    cap: int = DEFAULT_CAP
    out: str | None = None

    def header(self, **extra) -> dict:
        d = {"seed": self.seed}
        if self.name:
            d["set"] = self.name
        if self.spec_file:
            d["spec"] = self.spec_file
        for k, v in sorted(self.params.items()):
            d[f"param.{k}"] = v
        d.update(extra)
        return {k: str(v).replace(" ", "") for k, v in d.items()}


def _param(text: str) -> tuple[str, str]:
    k, sep, v = text.partition("=")
    if not sep or not k:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return k, v


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _window(text: str) -> Window:
    try:
        return Window.parse(text)
    except BadInput as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _fraction_list(text: str) -> list[Fraction]:
    return [_fraction(t) for t in text.split(",") if t]


def _add_set_args(p, window=True):
    p.add_argument("name", nargs="?", help="catalog entry name")
    p.add_argument("--spec", dest="spec_file", help="JSON spec document instead of a catalog name")
    p.add_argument("--param", action="append", type=_param, default=[], help="catalog parameter key=value")
    if window:
        p.add_argument("--window", type=_window, help="half-open window lo,hi")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="translab", description="Translation sums over discrete sets.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="enumerate a set on a window")
    _add_set_args(g)

    c = sub.add_parser("classify", help="run type criteria")
    _add_set_args(c)
    for crit in CRITERIA:
        c.add_argument(f"--{crit}", action="store_true")
    c.add_argument("--eps", type=_fraction, default=Fraction(1))
    c.add_argument("--depth", type=int, default=3)

    w = sub.add_parser("witness", help="build a type-2 witness and its sum profiles")
    _add_set_args(w)
    w.add_argument("--eps", type=_fraction, default=Fraction(1))
    w.add_argument("--depth", type=int, default=2)
    w.add_argument("--samples", type=int, default=witness.DEFAULT_SAMPLES)

    t = sub.add_parser("thin", help="random thinning of a set")
    _add_set_args(t)
    t.add_argument("--p", type=_fraction, required=True)
    t.add_argument("--seed", type=int, default=0)

    r = sub.add_parser("randt2", help="partial sums of the thinning criterion series")
    r.add_argument("--q", type=_fraction, required=True)
    r.add_argument("--m", required=True, help="integer (constant) or rule such as exp:2")
    r.add_argument("--gap", type=int, help="constant gap n_{k+1}-n_k")
    r.add_argument("--n", help="rule for n_k (alternative to --gap)")
    r.add_argument("--terms", type=int, default=10)
    r.add_argument("--out")

    k = sub.add_parser("kron", help="simultaneous approximation and the S-band witness")
    ksub = k.add_subparsers(dest="kron_command", required=True)
    for name in ("solve", "precheck"):
        kp = ksub.add_parser(name)
        kp.add_argument("--theta", type=_fraction_list, required=True)
        kp.add_argument("--alpha", type=_fraction_list, required=True)
        kp.add_argument("--eps", type=_fraction, default=Fraction(1, 20))
        kp.add_argument("--p-bound", type=int, default=kronecker.DEFAULT_P_BOUND)
        kp.add_argument("--out")
    kw = ksub.add_parser("witness")
    kw.add_argument("--depth", type=int, default=2, help="levels K (at most 3)")
    kw.add_argument("--seed", type=int, default=0)
    kw.add_argument("--samples", type=int, default=32)
    kw.add_argument("--p-bound", type=int, default=kronecker.WITNESS_P_BOUND)
    kw.add_argument("--out")

    cat = sub.add_parser("catalog", help="list catalog entries")
    cat.add_argument("--out")
    return ap


def _entry(cfg: RunConfig) -> CatalogEntry:
    if cfg.spec_file:
        try:
            with open(cfg.spec_file, encoding="utf-8") as fh:
                spec = loads(fh.read())
        except OSError as e:
            raise BadInput(f"cannot read {cfg.spec_file}: {e}") from None
        if isinstance(spec, DyadicFamily):
            return CatalogEntry(cfg.spec_file, spec, OPEN, "spec file", {}, spec.m, spec.n, spec.k0, spec.strict)
        return CatalogEntry(cfg.spec_file, spec, OPEN, "spec file")
    if not cfg.name:
        raise BadInput("give a catalog name or --spec FILE")
    return catalog.get(cfg.name, **cfg.params)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(ns) -> RunConfig:
    return RunConfig(
        command=ns.command, name=getattr(ns, "name", None), spec_file=getattr(ns, "spec_file", None),
        params=dict(getattr(ns, "param", []) or []), eps=getattr(ns, "eps", Fraction(1)),
        window=getattr(ns, "window", None), depth=getattr(ns, "depth", 3), samples=getattr(ns, "samples", 64),
        seed=getattr(ns, "seed", 0), cap=getattr(ns, "cap", DEFAULT_CAP), out=getattr(ns, "out", None))


def cmd_gen(cfg: RunConfig) -> int:
    e = _entry(cfg)
    w = cfg.window or Window(0, 4)
    elems = enumerate_set(e.spec, w, cfg.cap)
    _emit(enumeration_csv(elems, cfg.header(window=w)), cfg.out)
    return 0


def cmd_thin(cfg: RunConfig, p: Fraction) -> int:
    e = _entry(cfg)
    w = cfg.window or Window(0, 4)
    elems = enumerate_set(thin(e.spec, p, cfg.seed), w, cfg.cap)
    _emit(enumeration_csv(elems, cfg.header(window=w, p=p)), cfg.out)
    return 0


def cmd_classify(cfg: RunConfig, criteria: list[str]) -> int:
    e = _entry(cfg)
    horizon = cfg.window or Window(0, 64)
    verdicts = []
    for crit in criteria or ["mk"]:
        if crit == "ratio" and cfg.window is None:
            verdicts.append(_ratio_auto(e.spec, cfg.eps, cfg.depth))
        else:
            verdicts.extend(classify.classify_all(e, [crit], cfg.eps, horizon, cfg.depth))
    lines = header_lines("classify", cfg.header(horizon=horizon, eps=cfg.eps, depth=cfg.depth))
    for v in verdicts:
        lines.append(json.dumps(v.to_dict(), sort_keys=True, default=str))
    _emit("\n".join(lines) + "\n", cfg.out)
    if cfg.out:
        for v in verdicts:
            print(f"{v.reason}: {v.kind}" + (f" ({v.evidence_for})" if v.evidence_for else ""))
    return 0


def _ratio_auto(spec, eps, depth, window=None):
    """Count-ratio test on growing horizons until a chain of ``depth`` appears."""
    horizons = [window] if window else [Window(0, h) for h in WITNESS_HORIZONS]
    v = None
    for h in horizons:
        v = classify.count_ratio_test(spec, eps, h, depth)
        if len(v.chain) >= depth:
            break
    return v


def cmd_witness(cfg: RunConfig) -> int:
    e = _entry(cfg)
    if cfg.depth < 0:
        raise BadInput("depth must be nonnegative")
    chain = _ratio_auto(e.spec, cfg.eps, cfg.depth, cfg.window).chain
    if len(chain) < cfg.depth:
        raise InvalidChain(f"no count-ratio chain of depth {cfg.depth} within the searched horizon")
    chain = classify.RatioChain(chain.eps_prime, chain.indices[:cfg.depth], chain.ratios[:cfg.depth],
                                chain.counts)
    wt = witness.build_type2_witness(e.spec, cfg.eps, chain)
    if cfg.depth == 0:
        print("warning: depth 0 gives f = 0", file=sys.stderr)
    prof_c, prof_d = witness.witness_profiles(wt, cfg.samples)
    hdr = cfg.header(eps=cfg.eps, depth=cfg.depth, samples=cfg.samples, chain=list(chain.indices))
    f_csv = witness.step_function_csv(wt.f, hdr)
    p_csv = witness.profile_csv(prof_c + prof_d, hdr)
    cmax = max((p.cumulative[-1] for p in prof_c if p.cumulative), default=Fraction(0))
    dmin = min((p.cumulative[-1] for p in prof_d if p.cumulative), default=Fraction(0))
    certified = all(p.certified for p in prof_c + prof_d)
    summary = (f"C-side max cumulative={float(cmax):.12g} D-side min cumulative={float(dmin):.12g} "
               f"certified={str(certified).lower()} C-tail-bound=2^-{cfg.depth}")
    if cfg.out:
        _emit(f_csv, cfg.out + ".f.csv")
        _emit(p_csv, cfg.out + ".profile.csv")
    else:
        sys.stdout.write(f_csv + p_csv)
    print(summary)
    return 0


def _as_rule_or_int(text: str):
    try:
        return int(text)
    except ValueError:
        return catalog.Rule.parse(text)


def cmd_randt2(ns) -> int:
    m = _as_rule_or_int(ns.m)
    if ns.terms < 0:
        raise BadInput("terms must be nonnegative")
    if ns.n is not None:
        if isinstance(m, int):
            raise BadInput("--n needs a rule for --m")
        rows = witness.randt2_series(m, catalog.Rule.parse(ns.n), ns.q, ns.terms)
    else:
        if ns.gap is None:
            raise BadInput("give --gap or --n")
        rows, acc = [], mpmath.mpf(0)
        for k in range(1, ns.terms + 1):
            mk = m if isinstance(m, int) else int(m(k))
            t = witness.randt2_term(ns.q, mk, ns.gap)
            with mpmath.workprec(96):
                acc = acc + t
            rows.append(witness.SeriesRow(k, mk, ns.gap, t, acc))
    params = {"q": ns.q, "m": ns.m, "terms": ns.terms, "gap": ns.gap, "n": ns.n}
    params = {k: str(v) for k, v in params.items() if v is not None}
    _emit(witness.series_csv(rows, params), ns.out)
    total = rows[-1].partial if rows else mpmath.mpf(0)
    print(f"partial_sum={mpmath.nstr(total, 17)}" if ns.out else mpmath.nstr(total, 17))
    return 0


def cmd_kron(ns) -> int:
    if ns.kron_command in ("solve", "precheck"):
        prob = kronecker.ApproxProblem(ns.theta, ns.alpha, ns.eps, ns.p_bound)
        pre = kronecker.precheck_condition_B(prob)
        lines = [f"precheck admissible={pre.admissible} u={pre.u} note={pre.note}"]
        if ns.kron_command == "solve":
            if pre.admissible is False:
                raise kronecker.NotFoundWithinBound(f"inadmissible: u={pre.u} certifies that no p exists")
            p = kronecker.solve(prob)
            res = ",".join(f"{float(r):.12g}" for r in prob.residuals(p))
            lines.append(f"p={p}")
            lines.append(f"residuals={res}")
        _emit("\n".join(lines) + "\n", ns.out)
        return 0
    w = kronecker.build_S_witness(K=ns.depth, seed=ns.seed, p_bound=ns.p_bound)
    params = {"K": ns.depth, "seed": ns.seed, "p_bound": ns.p_bound, "status": "numerical-evidence"}
    _emit(kronecker.witness_csv(w, params), ns.out)
    xs = [Fraction(1, 4) + Fraction(j, 2 * ns.samples) for j in range(ns.samples)]
    div = kronecker.check_claim_divergence(w, xs)
    conv = kronecker.check_claim_convergence(w)
    failed = [lv.k for lv in w.levels if not lv.ok]
    print(f"numerical evidence: levels={w.K} full_hit_fraction={div.full_fraction:.6g} convergence_checks={conv.ok} "
          f"spacing_ok={kronecker.spacing_ok(w)}", file=sys.stderr if not ns.out else sys.stdout)
    if failed:
        raise kronecker.NotFoundWithinBound(f"no p_k found for levels {failed}")
    return 0


def run(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    if ns.command == "catalog":
        _emit(catalog.listing_csv(), ns.out)
        return 0
    if ns.command == "randt2":
        return cmd_randt2(ns)
    if ns.command == "kron":
        return cmd_kron(ns)
    cfg = _config(ns)
    if ns.command == "gen":
        return cmd_gen(cfg)
    if ns.command == "thin":
        return cmd_thin(cfg, ns.p)
    if ns.command == "classify":
        return cmd_classify(cfg, [c for c in CRITERIA if getattr(ns, c)])
    return cmd_witness(cfg)


def main(argv=None) -> int:
    try:
        return run(argv)
    except TranslabError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
