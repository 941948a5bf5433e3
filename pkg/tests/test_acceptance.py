"""Acceptance suite: the ten desk-scale criteria, each at its stated tolerance.

Run under pytest (one test per criterion; a summary line per criterion is
printed at the end of the session) or directly with
``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import itertools
import json
import math
import os
import sys
import tempfile
import time
from collections import Counter

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from oracles import naive_quotient_sq_length  # noqa: E402

from radialgram.campaigns import random_cnd_rplus, random_cnd_z, random_pd_rplus, random_pd_z, random_word_set  # noqa: E402
from radialgram.cli import main as cli_main  # noqa: E402
from radialgram.embedding import PAIR_CASES, classify_pair, embed, pairwise_sq_distances, sq_distance  # noqa: E402
from radialgram.gram import check_cnd, check_psd, group_gram, parity_identity_check, semigroup_gram  # noqa: E402
from radialgram.moments import moments_of, recover_laplace, recover_measure, uniqueness_gap  # noqa: E402
from radialgram.profiles import (  # noqa: E402
    CndProfileZ,
    DiscreteMeasure,
    nu_t_from_mu_t,
    schoenberg_measure,
    schoenberg_transform,
)
from radialgram.transfer import FamilySpec, build_family, default_probes, radial_to_semigroup, transfer_sweep  # noqa: E402
from radialgram.words import FreeWord, left_quotient, lp_length_pow, random_word  # noqa: E402

RESULTS: dict[int, str] = {}
SEED = 20240601


def _record(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    RESULTS[n] = line
    print(line)


def _rng(n: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([SEED, n]))


def _small_words() -> list[FreeWord]:
    out = [FreeWord()]
    exps = [k for k in range(-3, 4) if k]
    for b in range(1, 4):
        for gens in itertools.product(range(1, 4), repeat=b):
            if any(gens[i] == gens[i + 1] for i in range(b - 1)):
                continue
            for ks in itertools.product(exps, repeat=b):
                out.append(FreeWord._raw(tuple(zip(gens, ks))))
    return out


# --------------------------------------------------------------------------


def criterion_1():
    t0 = time.perf_counter()
    words = _small_words()
    D = pairwise_sq_distances([embed(w) for w in words])
    mismatches = int(np.count_nonzero(np.diag(D)))
    for i, x in enumerate(words):
        row = D[i]
        for j in range(i + 1, len(words)):
            if row[j] != lp_length_pow(left_quotient(x, words[j]), 2):
                mismatches += 1
    mismatches += int(np.count_nonzero(D != D.T))
    rng = _rng(1)
    cases = Counter()
    for _ in range(100_000):
        f, g = random_word(rng, 4, 3, 3), random_word(rng, 4, 3, 3)
        cases[classify_pair(f, g)] += 1
        d = sq_distance(embed(f), embed(g))
        if d != lp_length_pow(left_quotient(f, g), 2) or d != naive_quotient_sq_length(f.blocks, g.blocks):
            mismatches += 1
    elapsed = time.perf_counter() - t0
    min_case = min(cases[c] for c in PAIR_CASES)
    ok = mismatches == 0 and min_case >= 1000 and elapsed < 30
    detail = (f"{len(words)} words exhaustively ({len(words) ** 2} ordered pairs) + 100000 random pairs, {mismatches} mismatches, "
              f"cases {dict(sorted(cases.items()))}, {elapsed:.1f}s")
    return ok, detail


def criterion_2():
    rng = _rng(2)
    fails, worst = 0, math.inf
    for _ in range(500):
        phi = random_pd_z(rng).radial(2)
        rep = check_psd(group_gram(random_word_set(rng, max_size=10, max_blocks=6), phi))
        fails += not rep.accepted
        worst = min(worst, rep.min_eig / rep.tol)
    return fails == 0, f"500 trials, {fails} failures, worst min_eig/tol = {worst:.3g}"


def criterion_3():
    rng = _rng(3)
    fails = 0
    for _ in range(500):
        psi = random_cnd_z(rng).radial(2)
        words = random_word_set(rng, max_size=10, max_blocks=6)
        fails += not check_cnd(group_gram(words, psi)).accepted
        for t in (0.1, 1.0, 10.0):
            fails += not check_psd(group_gram(words, schoenberg_transform(psi, t))).accepted
    return fails == 0, f"500 trials x (cnd + 3 exponentials), {fails} failures"


def _separated_measure(rng, max_atoms=5, sep=0.1, wmin=0.05):
    k = int(rng.integers(1, max_atoms + 1))
    while True:
        x = np.sort(rng.uniform(-1, 1, size=k))
        if k == 1 or np.min(np.diff(x)) >= sep:
            break
    w = wmin + (1 - wmin * k) * rng.dirichlet(np.ones(k))
    return DiscreteMeasure.from_atoms(zip(x, w))


def criterion_4():
    rng = _rng(4)
    worst_loc = worst_w = worst_gap = 0.0
    bad = 0
    for _ in range(200):
        mu = _separated_measure(rng)
        k = len(mu)
        ms = moments_of(mu, 2 * k - 1)
        rec = recover_measure(ms, k).measure
        if len(rec) != k:
            bad += 1
            continue
        worst_loc = max(worst_loc, float(np.max(np.abs(np.array(rec.locs) - mu.locs))))
        worst_w = max(worst_w, float(np.max(np.abs(np.array(rec.weights) - mu.weights))))
        worst_gap = max(worst_gap, uniqueness_gap(ms, k))
    ok = bad == 0 and worst_loc <= 1e-6 and worst_w <= 1e-6 and worst_gap < 1e-8
    return ok, (f"200 measures, atom count misses {bad}, max atom err {worst_loc:.2e}, "
                f"max weight err {worst_w:.2e}, max gap {worst_gap:.2e}")


def criterion_5():
    rng = _rng(5)
    Ns = (2, 4, 8, 16, 32, 64, 128)
    violated = limit_fail = psd_cases = 0
    spaces = Counter()
    for trial in range(100):
        space = ("free-int", "free-real", "direct-sum")[trial % 3]
        spaces[space] += 1
        if space == "free-int":
            p, phi = 2.0, random_pd_z(rng).radial(2)
            targets = tuple(int(x) for x in rng.choice(np.arange(1, 9), size=int(rng.integers(1, 4)), replace=False))
        else:
            p = float(rng.choice([0.5, 1.0, 1.5, 2.0]))
            phi = random_pd_rplus(rng).radial(p)
            targets = tuple(float(x) for x in np.round(rng.uniform(0, 3, size=int(rng.integers(1, 4))), 3))
        spec = FamilySpec(space, max(Ns), targets, p)
        c = rng.normal(size=spec.M)
        checks = transfer_sweep(phi, spec, c, Ns, seed=trial)
        violated += sum(not bc.holds for bc in checks)
        pts = {0.0} | {a + b for a in spec.targets for b in spec.targets}
        dot = radial_to_semigroup(phi, default_probes(pts, space, p), p)
        if check_psd(semigroup_gram(spec.targets, dot)).accepted:
            psd_cases += 1
            limit_fail += checks[-1].quad < -1e-6
    ok = violated == 0 and limit_fail == 0
    return ok, (f"100 (profile, family) pairs over N={list(Ns)}, {violated} bound violations, "
                f"{psd_cases} PSD semigroup Grams with {limit_fail} N=128 limit failures, spaces {dict(spaces)}")


def _cross_pairs(fam, rng, count):
    N, M = fam.spec.N, fam.spec.M
    n = rng.integers(1, N + 1, size=count)
    m = (n - 1 + rng.integers(1, N, size=count)) % N + 1  # m != n
    j = rng.integers(1, M + 1, size=count)
    k = rng.integers(1, M + 1, size=count)
    return [((int(a), int(b)), (int(c), int(d))) for a, b, c, d in zip(n, j, m, k)]


def criterion_6():
    rng = _rng(6)
    parts = []
    ok = True
    fam = build_family(FamilySpec("free-int", 64, tuple(range(1, 9))))
    bad = sum(fam.observed(a, b) != fam.expected(a, b) for a, b in _cross_pairs(fam, rng, 10_000))
    ok &= bad == 0
    parts.append(f"free-int exact {bad} bad")
    for space in ("free-real", "direct-sum"):
        for p in (0.5, 1.0, 1.5, 2.0):
            targets = tuple(float(x) for x in np.round(rng.uniform(0, 4, size=8), 4))
            fam = build_family(FamilySpec(space, 64, targets, p))
            worst = 0.0
            for a, b in _cross_pairs(fam, rng, 10_000):
                want = fam.expected(a, b)
                worst = max(worst, abs(fam.observed(a, b) - want) / max(1.0, abs(want)))
            ok &= worst <= 1e-12
            parts.append(f"{space} p={p:g} {worst:.1e}")
    return ok, "10000 cross pairs each: " + ", ".join(parts)


def criterion_7():
    rng = _rng(7)
    fails = 0
    for trial in range(200):
        space = ("free-real", "direct-sum")[trial % 2]
        p = float(rng.choice([0.5, 1.0, 1.5, 2.0]))
        words = random_word_set(rng, space, max_size=10, max_blocks=6)
        fails += not check_psd(group_gram(words, random_pd_rplus(rng).radial(p))).accepted
        fails += not check_cnd(group_gram(words, random_cnd_rplus(rng).radial(p))).accepted
    h = 0.25
    worst = 0.0
    with_b = 0
    for _ in range(200):
        prof = random_pd_rplus(rng, max_atoms=3, sep=0.5)
        with_b += prof.b > 0
        k = len(prof.mu)
        rec = recover_laplace([(j * h, prof(j * h)) for j in range(2 * k + 1)], k, h).measure
        if len(rec) != k:
            worst = math.inf
            continue
        mu = prof.mu.sorted()
        worst = max(worst, float(np.max(np.abs(np.array(rec.locs) - mu.locs))),
                    float(np.max(np.abs(np.array(rec.weights) - mu.weights))), abs(rec.b - prof.b))
    ok = fails == 0 and worst <= 1e-5
    return ok, (f"200 profiles x (pd + cnd) on R_inf / R^N, {fails} failures; "
                f"200 laplace round trips ({with_b} with b) max err {worst:.2e}")


def criterion_8():
    rng = _rng(8)
    worst = 0.0
    for _ in range(10_000):
        words = [random_word(rng, 5, 3, 4) for _ in range(int(rng.integers(1, 9)))]
        lhs, rhs = parity_identity_check(words, rng.normal(size=len(words)))
        worst = max(worst, abs(lhs - rhs))
    return worst < 1e-12, f"10000 instances, max |lhs - rhs| = {worst:.2e}"


def criterion_9():
    rng = _rng(9)
    worst_eq = 0.0
    ratio_lo, ratio_hi, ratios = math.inf, -math.inf, 0
    ladder = (1.0, 0.1, 0.01, 0.001)
    for _ in range(100):
        k = int(rng.integers(1, 6))
        locs = rng.uniform(-1, 1, size=k)
        locs[rng.random(k) < 0.2] = 1.0
        nu = DiscreteMeasure.from_atoms(zip(locs, float(rng.uniform(0.1, 1.0)) * rng.dirichlet(np.ones(k))))
        prof = CndProfileZ(nu)
        n = np.array(sorted({lp_length_pow(random_word(rng, 3, 3, 3), 2) for _ in range(12)} - {0}))
        if not n.size:
            n = np.array([1])
        psi = prof(n)
        for t in (1.0, 0.1):
            nu_t = nu_t_from_mu_t(schoenberg_measure(prof, t), t)
            lhs = -np.expm1(-t * psi) / t
            worst_eq = max(worst_eq, float(np.max(np.abs(lhs - CndProfileZ(nu_t)(n)))))
        errs = [psi - (-np.expm1(-t * psi) / t) for t in ladder]
        for (t, e1), e2 in zip(zip(ladder, errs), errs[1:]):
            # asymptotic regime only: the first-order term dominates once t psi is small
            sel = (t * psi <= 0.3) & (psi > 0)
            if sel.any():
                r = e1[sel] / e2[sel]
                ratios += int(sel.sum())
                ratio_lo, ratio_hi = min(ratio_lo, float(r.min())), max(ratio_hi, float(r.max()))
        if not np.all(0.01 * psi <= 0.3):
            ratio_lo = -math.inf  # the last ladder step must cover every sample
    ok = worst_eq <= 1e-10 and ratios > 0 and 9 <= ratio_lo and ratio_hi <= 11
    return ok, (f"100 profiles, max |(1-e^-t psi)/t - nu_t integral| = {worst_eq:.2e} at t in {{1, 0.1}}, "
                f"{ratios} error ratios in [{ratio_lo:.4f}, {ratio_hi:.4f}]")


def _quiet_cli(argv) -> int:
    import contextlib
    import io

    with contextlib.redirect_stdout(io.StringIO()), contextlib.redirect_stderr(io.StringIO()):
        return cli_main(argv)


def criterion_10():
    rng = _rng(10)
    right = Counter()
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "x.json")
        for i in range(100):
            k = int(rng.integers(1, 4))
            locs = list(rng.uniform(-1, 1, size=k))
            locs.append(float(rng.choice([-1, 1]) * rng.uniform(1.01, 3.0)))
            w = rng.dirichlet(np.ones(k + 1))
            prof = {"kind": "pd-z", "mu": {"atoms": [{"loc": float(x), "w": float(v)} for x, v in zip(locs, w)]}}
            with open(path, "w") as fh:
                json.dump(prof, fh)
            right["profile"] += _quiet_cli(["check", "--profile", path, "--random", str(int(rng.integers(3, 11))),
                                            "--seed", str(i)]) == 1
        for i in range(100):
            m0 = float(rng.uniform(0.5, 2.0))
            m = list(rng.uniform(-m0, m0, size=int(rng.integers(2, 9))))
            m[0] = m0
            m[1] = float(rng.choice([-1, 1]) * m0 * rng.uniform(1.001, 3.0))
            with open(path, "w") as fh:
                json.dump({"m": m}, fh)
            code_m = _quiet_cli(["moments", path])
            code_r = _quiet_cli(["recover", path, "--k", str(max(1, len(m) // 2))])
            right["moments"] += code_m == 1 and code_r == 1
        for i in range(100):
            pts = sorted({int(x) for x in rng.integers(1, 12, size=int(rng.integers(1, 5)))})
            right["nonradial"] += _quiet_cli(["check", "--profile", "first-generator", "--semigroup",
                                              ",".join(map(str, pts))]) == 1
    ok = all(right[key] == 100 for key in ("profile", "moments", "nonradial"))
    return ok, f"exit code 1 in {right['profile']}/100 profiles, {right['moments']}/100 moment sequences, " \
               f"{right['nonradial']}/100 non-radial functions"


CRITERIA = {
    1: ("embedding isometry", criterion_1),
    2: ("PD forward synthesis on F_inf", criterion_2),
    3: ("CND forward synthesis and Schoenberg", criterion_3),
    4: ("moment recovery and uniqueness", criterion_4),
    5: ("averaging bound on witness families", criterion_5),
    6: ("witness family identities", criterion_6),
    7: ("half-line profiles on R_inf and R^N, Laplace recovery", criterion_7),
    8: ("parity identity", criterion_8),
    9: ("nu_t chain and small-t limit", criterion_9),
    10: ("negative controls", criterion_10),
}


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    title, fn = CRITERIA[n]
    ok, detail = fn()
    _record(n, title, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for n, (title, fn) in sorted(CRITERIA.items()):
        ok, detail = fn()
        _record(n, title, ok, detail)
        failed += not ok
    sys.exit(1 if failed else 0)
