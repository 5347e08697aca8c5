"""Command-line front end.

    simphom homology --group cyclic:2 --max-degree 3 --method both
    simphom verify --suite cube --seed 7 --trials 100
    simphom pairing --group presentation:demos/torus.json --cocycle demos/cup.json --degree 2
    simphom filtration --functor designed --degree 0 --kmax 2

Reports are JSON on stdout (or ``--out``), a short summary goes to stderr,
and the exit status is 0 exactly when every check in the report passed.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from . import cube as cb
from .freegrp import cyclic_group, symmetric_group, trivial_group
from .homology import (bar_oracle, bar_sequence_tests, compare, e_homology, ebar_complex, ebar_homology, e_complex,
                       pairing_matrix)
from .resolve import Presentation, kan_loop_group, load_cocycle, load_presentation, nerve, truncated_resolution
from .simp import (SimplicialGroupRing, SimplicialIdentityError, boundary_of_retract, check_simplicial_identities,
                   moore_member, moore_square_witness, random_moore_ring_element, random_word, retract)

DEFAULT_SEED = 0

SUITES = ("cube", "moore", "retraction", "filtration", "barseq")


class SpecError(ValueError):
    pass


# ---------------------------------------------------------------------------
# group specifications


def parse_group_spec(text: str):
    """``cyclic:m``, ``sym:k``, ``free:r``, ``trivial`` or ``presentation:<path>``.

    Returns ``("finite", FiniteGroup)`` or ``("presentation", Presentation)``."""
    kind, _, arg = text.partition(":")
    if kind == "trivial" and not arg:
        return "finite", trivial_group()
    if kind in ("cyclic", "sym", "free"):
        try:
            k = int(arg)
        except ValueError:
            raise SpecError(f"{kind}: needs a positive integer, got {arg!r}") from None
        if k < 1:
            raise SpecError(f"{kind}: parameter must be positive")
        if kind == "cyclic":
            return "finite", cyclic_group(k)
        if kind == "sym":
            return "finite", symmetric_group(k)
        return "presentation", Presentation([f"x{i + 1}" for i in range(k)], [])
    if kind == "presentation" and arg:
        return "presentation", load_presentation(arg)
    raise SpecError(f"cannot parse group spec {text!r}")


def resolution(spec, N: int):
    """Augmented free simplicial resolution through level N."""
    kind, obj = spec
    if kind == "finite":
        return kan_loop_group(nerve(obj, N + 1), N)
    return truncated_resolution(obj, N)


# ---------------------------------------------------------------------------
# suites


def _tally(counts: Dict[str, List[int]], key: str, ok: bool):
    c = counts.setdefault(key, [0, 0])
    c[0 if ok else 1] += 1


def _counts_json(counts: Dict[str, List[int]]) -> dict:
    return {k: {"pass": v[0], "fail": v[1]} for k, v in sorted(counts.items())}


def suite_retraction(seed: int = DEFAULT_SEED, trials: int = 200, groups=(2, 3), max_n: int = 4,
                     max_len: int = 6) -> dict:
    """Moore membership, idempotence and abelianized multiplicativity of
    ``r^j_n`` for every ``0 <= j < n <= max_n``, plus the boundary identity
    for ``d_n r^{n-1}_n``.

    The boundary identity is checked in the form that holds (word equality
    for n <= 2, abelianized equality above); the literal word identity is
    counted separately under ``word_identity`` and does not affect ``ok``."""
    rng = random.Random(seed)
    counts: Dict[str, List[int]] = {}
    word_identity: Dict[str, List[int]] = {}
    failures = []
    for m in groups:
        G = kan_loop_group(nerve(cyclic_group(m), max_n + 1), max_n)
        for n in range(1, max_n + 1):
            L = G.levels[n]
            for j in range(n):
                tag = f"Z/{m} n={n} j={j}"
                for _ in range(trials):
                    g, h = random_word(L, rng, max_len), random_word(L, rng, max_len)
                    r = retract(G, n, j, g)
                    ok = moore_member(G, n, j, r)
                    _tally(counts, "moore_member", ok)
                    if not ok:
                        failures.append(f"{tag}: r(g) not in G^j_n for g = {g}")
                    ok = retract(G, n, j, r) == r
                    _tally(counts, "idempotent", ok)
                    if not ok:
                        failures.append(f"{tag}: r(r(g)) != r(g) for g = {g}")
                    lhs = L.abelian_coords(retract(G, n, j, L.mul(g, h)))
                    rhs = tuple(a + b for a, b in zip(L.abelian_coords(r), L.abelian_coords(retract(G, n, j, h))))
                    ok = lhs == rhs
                    _tally(counts, "abelian_multiplicative", ok)
                    if not ok:
                        failures.append(f"{tag}: abelianized r(gh) != r(g) + r(h)")
                    if j == n - 1:
                        try:
                            boundary_of_retract(G, n, g, check=True)
                            ok = True
                        except SimplicialIdentityError as e:
                            ok = False
                            failures.append(f"{tag}: {e}")
                        _tally(counts, "boundary_identity", ok)
                        try:
                            boundary_of_retract(G, n, g, check=False, strict=True)
                            strict = True
                        except SimplicialIdentityError:
                            strict = False
                        _tally(word_identity, f"Z/{m} n={n}", strict)
    return {"suite": "retraction", "seed": seed, "trials": trials, "checks": _counts_json(counts),
            "word_identity": _counts_json(word_identity), "failures": failures[:20], "ok": not failures}


def suite_moore(seed: int = DEFAULT_SEED, trials: int = 100, groups=(2, 3), max_n: int = 2,
                inject_fault: bool = False) -> dict:
    """Simplicial identities of the Kan loop groups and the square-zero
    witness ``w = s_n(a)(s_n(b) - s_{n-1}(b))`` for Moore-ideal pairs."""
    rng = random.Random(seed)
    counts: Dict[str, List[int]] = {}
    failures = []
    for m in groups:
        G = kan_loop_group(nerve(cyclic_group(m), max_n + 2), max_n + 1)
        if inject_fault:
            k = rng.randrange(G.levels[1].rank)
            G = G.with_face_image(2, 0, k, G.levels[1].identity())
        rep = check_simplicial_identities(G)
        _tally(counts, "simplicial_identities", bool(rep))
        if not rep:
            failures.append(f"Z/{m}: {rep.describe()}")
            continue
        R = SimplicialGroupRing(G)
        for n in range(1, max_n + 1):
            for _ in range(trials):
                a = random_moore_ring_element(G, n, rng)
                b = random_moore_ring_element(G, n, rng)
                try:
                    moore_square_witness(R, n, a, b, check=True)
                    ok = True
                except (SimplicialIdentityError, ValueError) as e:
                    ok = False
                    failures.append(f"Z/{m} n={n}: {e}")
                _tally(counts, "square_witness", ok)
    return {"suite": "moore", "seed": seed, "trials": trials, "checks": _counts_json(counts),
            "failures": failures[:20], "ok": not failures}


def suite_barseq(seed: int = DEFAULT_SEED, trials: int = 100, groups=(2, 3), max_n: int = 3) -> dict:
    rng = random.Random(seed)
    rows, ok = [], True
    for m in groups:
        G = kan_loop_group(nerve(cyclic_group(m), max_n + 1), max_n)
        for n in range(2, max_n + 1):
            for j in range(n - 1):
                rep = bar_sequence_tests(G, n, j, trials, rng)
                rows.append({"group": f"Z/{m}", "n": n, "j": j, "counts": rep["counts"],
                             "failures": rep["failures"][:5], "ok": rep["ok"]})
                ok = ok and rep["ok"]
    return {"suite": "barseq", "seed": seed, "trials": trials, "cases": rows, "ok": ok}


def cube_trial(rng: random.Random, N: int, max_rank: int, inject_fault: bool = False) -> dict:
    """Everything the cube suite checks on one random split functor."""
    out: Dict[str, Any] = {"N": N, "max_rank": max_rank}
    F, data = cb.random_split_functor(rng, N, max_rank=max_rank)
    if inject_fault:
        F, where = cb.inject_fault(F, rng)
        out["fault"] = where
    rep = F.check()
    out["functor"] = rep.describe()
    if not rep:
        out["ok"] = False
        return out
    squares = duality = fib = True
    bad = []
    for n in range(-1, N + 1):
        for j in range(-1, n + 1):
            Q = cb.build_cube(F, j, n)
            sf = Q.square_failure()
            if sf is not None:
                squares = False
                bad.append(sf.describe())
            if not cb.duality_check(Q)[0]:
                duality = False
                bad.append(f"duality fails for F^{j}_{n}")
            if j + 1 <= n:
                fs = cb.fibration_sequence(F, j, n)
                if not (fs.exact and fs.alpha_surjective):
                    fib = False
                    bad.append(f"fibration sequence ({j},{n}): {fs.failure}")
    p218 = cb.check_prop_2_18(F)
    filt = True
    if N >= 2:
        for q in sorted(F.F(-1).ranks):
            a = cb.filtration(F, q, N - 1)
            b = cb.filtration_oracle(F, q, N - 1)
            if not (a.is_monotone() and a.same_stages(b)):
                filt = False
                bad.append(f"filtration mismatch in degree {q}")
    F2, d2 = cb.random_split_functor(rng, N, max_rank=max_rank)
    nat = True
    if N >= 2:
        zeta = cb.random_natural_transformation(rng, data, d2, F, F2)
        for q in sorted(F.F(-1).ranks):
            if not cb.induced_filtration_map(zeta, q, N - 1)["ok"]:
                nat = False
                bad.append(f"natural transformation leaves the filtration in degree {q}")
    neg = cb.negative_control_functor(rng, N, max_rank=max_rank)
    nrep = cb.check_prop_2_18(neg)
    neg_ok = (not nrep.hypothesis) and nrep.conclusion is None
    out.update(squares=squares, duality=duality, fibration=fib, prop_2_18_hypothesis=p218.hypothesis,
               prop_2_18=bool(p218.hypothesis and p218.conclusion_holds), filtration=filt, naturality=nat,
               negative_control=neg_ok, problems=bad[:5])
    out["ok"] = all(out[k] for k in ("squares", "duality", "fibration", "prop_2_18", "filtration", "naturality",
                                     "negative_control"))
    return out


def suite_cube(seed: int = DEFAULT_SEED, trials: int = 100, inject_fault: bool = False, max_N: int = 4) -> dict:
    rng = random.Random(seed)
    counts: Dict[str, List[int]] = {}
    cases = []
    for t in range(trials):
        # N >= 2 so that the filtration and naturality checks have a stage to test
        N = rng.randint(2, max_N)
        max_rank = rng.randint(1, 3)
        res = cube_trial(rng, N, max_rank, inject_fault=inject_fault and t == 0)
        for k in ("squares", "duality", "fibration", "prop_2_18", "filtration", "naturality", "negative_control"):
            if k in res:
                _tally(counts, k, bool(res[k]))
        _tally(counts, "functor", "fault" not in res or res["ok"])
        if not res["ok"]:
            cases.append({"trial": t, **res})
    return {"suite": "cube", "seed": seed, "trials": trials, "checks": _counts_json(counts),
            "failures": cases[:10], "ok": not cases}


def suite_filtration(seed: int = DEFAULT_SEED, trials: int = 20) -> dict:
    """Worked filtrations plus corner-versus-oracle agreement on random functors."""
    rng = random.Random(seed)
    checks = {}
    D = cb.designed_filtration_functor(3)
    a, b = cb.filtration(D, 0, 2), cb.filtration_oracle(D, 0, 2)
    checks["designed"] = a.dims() == {1: 0, 2: 1} and a.same_stages(b)
    C = cb.constant_functor(cb.random_complex(rng, (0, 1), 3), 3)
    ok = True
    for q in sorted(C.F(-1).ranks):
        f = cb.filtration(C, q, 2)
        ok = ok and f.dims()[1] == f.dim
    checks["constant_full"] = ok
    agree = 0
    for _ in range(trials):
        F, _ = cb.random_split_functor(rng, rng.randint(2, 4), max_rank=rng.randint(1, 3))
        good = True
        for q in sorted(F.F(-1).ranks):
            a, b = cb.filtration(F, q, F.N - 1), cb.filtration_oracle(F, q, F.N - 1)
            good = good and a.same_stages(b) and a.is_monotone()
        agree += good
    checks["random_agree"] = agree == trials
    return {"suite": "filtration", "seed": seed, "trials": trials, "checks": checks,
            "random_agree_count": agree, "ok": all(checks.values())}


def run_suite(name: str, seed: int, trials: Optional[int], inject_fault: bool) -> dict:
    kw = {} if trials is None else {"trials": trials}
    if name == "cube":
        return suite_cube(seed, inject_fault=inject_fault, **kw)
    if name == "moore":
        return suite_moore(seed, inject_fault=inject_fault, **kw)
    if name == "retraction":
        return suite_retraction(seed, **kw)
    if name == "filtration":
        return suite_filtration(seed, **kw)
    if name == "barseq":
        return suite_barseq(seed, **kw)
    raise SpecError(f"unknown suite {name!r}")


# ---------------------------------------------------------------------------
# commands


def cmd_homology(args) -> dict:
    spec = parse_group_spec(args.group)
    N = args.max_degree
    report: Dict[str, Any] = {"group": args.group, "max_degree": N, "method": args.method, "ring": args.ring}
    ok = True
    e_res = None
    if args.method in ("e", "both"):
        G = resolution(spec, N)
        e_res = e_homology(G, args.ring, N)
        report["homology"] = [r.to_json() for r in e_res]
        if args.ebar:
            report["ebar"] = [r.to_json() for r in ebar_homology(ebar_complex(e_complex(G, args.ring, N)))]
    if args.method in ("bar", "both"):
        if spec[0] != "finite":
            raise SpecError("the bar oracle needs a finite group")
        bar = bar_oracle(spec[1], N, args.ring)
        report["bar"] = [{"degree": h.degree, "betti": h.betti, "torsion": list(h.torsion)} for h in bar[1:]]
        if e_res is not None:
            cmp = compare(e_res, bar)
            report["oracle"] = cmp
            ok = cmp["match"]
    report["ok"] = ok
    return report


def _summary_homology(rep: dict) -> str:
    rows = rep.get("homology") or rep.get("bar") or []
    parts = []
    for r in rows:
        from .chainlab import HomologyGroup
        parts.append(f"H{r['degree']}={HomologyGroup(r['degree'], r['betti'], r['torsion'])}")
    tail = "" if "oracle" not in rep else f"  match={str(rep['oracle']['match']).lower()}"
    return "  ".join(parts) + tail


def cmd_verify(args) -> dict:
    names = SUITES if args.suite == "all" else (args.suite,)
    results = {n: run_suite(n, args.seed, args.trials, args.inject_fault) for n in sorted(names)}
    return {"seed": args.seed, "suites": results, "ok": all(r["ok"] for r in results.values())}


def cmd_pairing(args) -> dict:
    spec = parse_group_spec(args.group)
    G = resolution(spec, max(args.degree, 1))
    cocycles = [load_cocycle(p, G.pi, G.pi.parse) for p in args.cocycle]
    M = pairing_matrix(G, cocycles, args.degree)
    return {"group": args.group, "degree": args.degree, "cocycles": [str(p) for p in args.cocycle],
            "basis": M["basis"], "matrix": [[str(x) for x in row] for row in M["matrix"]],
            "verified": M["verified"], "ok": True}


def parse_functor_spec(text: str, N: int):
    kind, _, arg = text.partition(":")
    if kind == "constant":
        rng = random.Random(int(arg) if arg else DEFAULT_SEED)
        return cb.constant_functor(cb.random_complex(rng, (0, 1), 3), N)
    if kind == "designed":
        return cb.designed_filtration_functor(N)
    if kind == "random":
        return cb.random_split_functor(random.Random(int(arg or DEFAULT_SEED)), N)[0]
    if kind == "cech":
        rng = random.Random(int(arg) if arg else DEFAULT_SEED)
        return cb.cech_functor(cb.random_surjection(rng, 4, 2), N)
    raise SpecError(f"cannot parse functor spec {text!r}")


def cmd_filtration(args) -> dict:
    F = parse_functor_spec(args.functor, args.N)
    a = cb.filtration(F, args.degree, args.kmax)
    b = cb.filtration_oracle(F, args.degree, args.kmax)
    same = a.same_stages(b)
    return {"functor": args.functor, "N": args.N, "degree": args.degree, "kmax": args.kmax,
            "dims": {str(k): v for k, v in a.dims().items()}, "monotone": a.is_monotone(),
            "oracle_agrees": same, "filtration": a.to_json(), "ok": same and a.is_monotone()}


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="simphom", description=__doc__.splitlines()[0])
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")
    sub = p.add_subparsers(dest="command", required=True)

    h = sub.add_parser("homology", help="group homology from a simplicial resolution")
    h.add_argument("--group", required=True)
    h.add_argument("--max-degree", type=int, default=3)
    h.add_argument("--method", choices=("e", "bar", "both"), default="e")
    h.add_argument("--ring", choices=("int", "rat"), default="int")
    h.add_argument("--ebar", action="store_true", help="also report the degeneracy quotient")

    v = sub.add_parser("verify", help="run seeded property suites")
    v.add_argument("--suite", choices=SUITES + ("all",), default="all")
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.add_argument("--trials", type=int)
    v.add_argument("--inject-fault", action="store_true", help="perturb one structure map (negative control)")

    pr = sub.add_parser("pairing", help="pair cocycles with homology classes")
    pr.add_argument("--group", required=True)
    pr.add_argument("--cocycle", required=True, action="append", help="cocycle file (repeatable)")
    pr.add_argument("--degree", type=int, required=True)

    f = sub.add_parser("filtration", help="filtration of H_q(F(-1)) by connecting maps")
    f.add_argument("--functor", required=True, help="constant[:SEED] | designed | random:SEED | cech[:SEED]")
    f.add_argument("--degree", type=int, default=0)
    f.add_argument("--kmax", type=int, default=2)
    f.add_argument("--N", type=int, default=3)
    return p


COMMANDS: Dict[str, Callable] = {"homology": cmd_homology, "verify": cmd_verify, "pairing": cmd_pairing,
                                 "filtration": cmd_filtration}


def _summary(command: str, rep: dict) -> str:
    status = "PASS" if rep.get("ok") else "FAIL"
    if command == "homology":
        return f"{status}  {_summary_homology(rep)}"
    if command == "verify":
        return "\n".join(f"{'PASS' if r['ok'] else 'FAIL'}  {n}" for n, r in rep["suites"].items())
    if command == "pairing":
        return f"{status}  matrix {rep['matrix']}"
    return f"{status}  stages {rep['dims']}  oracle_agrees={rep['oracle_agrees']}"


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        rep = COMMANDS[args.command](args)
    except (ValueError, OSError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    report = {"command": [a for a in (argv if argv is not None else sys.argv[1:])], **rep}
    if args.timings:
        report["seconds"] = round(time.perf_counter() - t0, 3)
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    print(_summary(args.command, rep), file=sys.stderr)
    return 0 if rep.get("ok") else 1


def _json_default(x):
    if isinstance(x, Fraction):
        return str(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


if __name__ == "__main__":
    sys.exit(main())
