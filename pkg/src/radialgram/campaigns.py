"""Seeded certification campaigns, one property suite per theorem tag.

Every trial draws from its own generator spawned off one ``SeedSequence``
keyed by (seed, tag), so a report depends only on (tag, trials, seed).
Each trial yields rows ``(statistic, value, threshold, pass)``; the
direction of the comparison is baked into ``pass``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .embedding import PAIR_CASES, classify_pair, embed, sq_distance
from .gram import (
    check_cnd,
    check_psd,
    group_gram,
    parity_identity_check,
    semigroup_gram,
    theta_matrix,
)
from .moments import recover_laplace
from .profiles import (
    CndProfileZ,
    DiscreteMeasure,
    RadialProfileZ,
    RPlusCndProfile,
    RPlusPdProfile,
    schoenberg_transform,
)
from .transfer import (
    FamilySpec,
    build_family,
    default_probes,
    radial_to_semigroup,
    transfer_sweep,
)
from .words import (
    FreeWord,
    left_quotient,
    lp_length_pow,
    random_coord_vector,
    random_real_word,
    random_word,
)

__all__ = [
    "THEOREMS",
    "Row",
    "TrialResult",
    "CampaignReport",
    "run_campaign",
    "random_pd_z",
    "random_cnd_z",
    "random_pd_rplus",
    "random_cnd_rplus",
    "random_word_set",
    "case_pair",
]

THEOREMS = (
    "thm-1.2", "thm-1.3", "prop-4.1", "prop-4.2", "lemma-3.2", "cor-3.3",
    "thm-4.5", "thm-4.6", "cor-4.9", "cor-4.10", "sec-4.3",
)
P_GRID = (0.5, 1.0, 1.5, 2.0)
T_GRID = (0.1, 1.0, 10.0)
SWEEP_NS = (2, 4, 8, 16, 32, 64, 128)


@dataclass(frozen=True)
class Row:
    statistic: str
    value: float
    threshold: float
    passed: bool


def ge(stat: str, value, threshold) -> Row:
    return Row(stat, float(value), float(threshold), bool(value >= threshold))


def le(stat: str, value, threshold) -> Row:
    return Row(stat, float(value), float(threshold), bool(value <= threshold))


@dataclass
class TrialResult:
    rows: list = field(default_factory=list)
    tags: list = field(default_factory=list)  # free-form labels counted in the summary

    def psd(self, stat: str, M, tol=None):
        rep = check_psd(M, tol)
        self.rows.append(ge(stat, rep.min_eig, -rep.tol))
        return rep

    def cnd(self, stat: str, M, tol=None):
        rep = check_cnd(M, tol)
        self.rows.append(le(stat, rep.max_eig, rep.tol))
        return rep


# --------------------------------------------------------------------------
# random inputs


def _dirichlet(rng, k: int, floor: float = 0.0) -> np.ndarray:
    w = rng.dirichlet(np.ones(k))
    return floor + (1.0 - floor * k) * w


def random_pd_z(rng, max_atoms: int = 5) -> RadialProfileZ:
    """Probability measure on [-1, 1]; endpoints and 0 appear with positive probability."""
    k = int(rng.integers(1, max_atoms + 1))
    locs = rng.uniform(-1.0, 1.0, size=k)
    special = rng.random(k) < 0.2
    locs[special] = rng.choice([-1.0, 0.0, 1.0], size=int(special.sum()))
    return RadialProfileZ(DiscreteMeasure.from_atoms(zip(locs, _dirichlet(rng, k))))


def random_cnd_z(rng, max_atoms: int = 5) -> CndProfileZ:
    k = int(rng.integers(1, max_atoms + 1))
    locs = rng.uniform(-1.0, 1.0, size=k)
    special = rng.random(k) < 0.2
    locs[special] = rng.choice([-1.0, 0.0, 1.0], size=int(special.sum()))
    mass = float(rng.uniform(0.1, 2.0))
    return CndProfileZ(DiscreteMeasure.from_atoms(zip(locs, mass * _dirichlet(rng, k))))


def _separated(rng, k: int, lo: float, hi: float, sep: float) -> np.ndarray:
    while True:
        a = np.sort(rng.uniform(lo, hi, size=k))
        if k < 2 or np.min(np.diff(a)) >= sep:
            return a


def random_pd_rplus(rng, max_atoms: int = 3, sep: float = 0.5, with_b: bool | None = None) -> RPlusPdProfile:
    """Laplace profile with exponents in [0, 3] pairwise at least `sep` apart."""
    k = int(rng.integers(1, max_atoms + 1))
    a = _separated(rng, k, 0.0, 3.0, sep)
    if rng.random() < 0.2:
        a[0] = 0.0
    if with_b is None:
        with_b = rng.random() < 0.5
    b = float(rng.uniform(0.05, 0.5)) if with_b else 0.0
    w = (1.0 - b) * _dirichlet(rng, k, floor=0.05)
    return RPlusPdProfile(DiscreteMeasure.from_atoms(zip(a, w)), b=b)


def random_cnd_rplus(rng, max_atoms: int = 3) -> RPlusCndProfile:
    k = int(rng.integers(0, max_atoms + 1))
    a = rng.uniform(0.05, 3.0, size=k)
    w = rng.uniform(0.05, 1.0, size=k)
    psi0 = float(rng.uniform(-1.0, 1.0)) if rng.random() < 0.3 else 0.0
    c = float(rng.uniform(0.0, 1.0)) if rng.random() < 0.5 else 0.0
    b = float(rng.uniform(0.0, 1.0)) if rng.random() < 0.5 else 0.0
    return RPlusCndProfile(psi0, c, b, DiscreteMeasure.from_atoms(zip(a, w)))


def random_word_set(rng, space: str = "free-int", max_size: int = 10, max_blocks: int = 6) -> list:
    n = int(rng.integers(2, max_size + 1))
    if space == "free-int":
        return [random_word(rng, max_blocks=max_blocks, max_exp=3, max_gen=3) for _ in range(n)]
    grid = 0.5 if rng.random() < 0.7 else None
    if space == "free-real":
        return [random_real_word(rng, max_blocks=max_blocks, max_gen=3, grid=grid) for _ in range(n)]
    return [random_coord_vector(rng, max_support=4, max_coord=5, grid=grid) for _ in range(n)]


def _exp(rng, max_exp: int = 3) -> int:
    return int(rng.integers(1, max_exp + 1)) * (1 if rng.random() < 0.5 else -1)


def _gen(rng, avoid=(), max_gen: int = 4) -> int:
    choices = [g for g in range(1, max_gen + 1) if g not in avoid]
    return int(rng.choice(choices))


def _tail(rng, after: int, n: int) -> list:
    out, last = [], after
    for _ in range(n):
        last = _gen(rng, (last,))
        out.append((last, _exp(rng)))
    return out


def case_pair(rng, case: str) -> tuple[FreeWord, FreeWord]:
    """A pair of reduced words built to fall into the given relative position."""
    prefix = _tail(rng, 0, int(rng.integers(0, 3)))
    last = prefix[-1][0] if prefix else 0
    a = _gen(rng, (last,))
    if case == "prefix":
        k = _exp(rng)
        l = int(np.sign(k)) * int(rng.integers(1, abs(k) + 1))
        g = prefix + [(a, k)] + _tail(rng, a, int(rng.integers(0, 3)))
        f = prefix + [(a, l)] if rng.random() < 0.8 else list(prefix)
    elif case == "opposite-sign":
        k = _exp(rng)
        l = -int(np.sign(k)) * int(rng.integers(1, 4))
        f = prefix + [(a, k)] + _tail(rng, a, int(rng.integers(0, 3)))
        g = prefix + [(a, l)] + _tail(rng, a, int(rng.integers(0, 3)))
    elif case == "new-generator":
        b = _gen(rng, (last, a))
        f = prefix + [(a, _exp(rng))] + _tail(rng, a, int(rng.integers(0, 3)))
        g = prefix + [(b, _exp(rng))] + _tail(rng, b, int(rng.integers(0, 3)))
    elif case == "interior-split":
        big = int(rng.integers(2, 4))
        small = int(rng.integers(1, big))
        sign = 1 if rng.random() < 0.5 else -1
        f = prefix + [(a, sign * small)] + _tail(rng, a, int(rng.integers(1, 3)))
        g = prefix + [(a, sign * big)] + _tail(rng, a, int(rng.integers(0, 3)))
    else:
        raise ValueError(f"unknown case {case!r}")
    f, g = FreeWord._raw(tuple(f)), FreeWord._raw(tuple(g))
    return (f, g) if rng.random() < 0.5 else (g, f)


def _random_targets(rng, space: str, max_m: int = 3) -> tuple:
    m = int(rng.integers(1, max_m + 1))
    if space == "free-int":
        return tuple(int(x) for x in rng.choice(np.arange(1, 9), size=m, replace=False))
    return tuple(float(x) for x in np.round(rng.uniform(0.0, 3.0, size=m), 3))


def _semigroup_points(rng, n: int, hi: float = 6.0) -> list:
    pts = list(rng.uniform(0.0, hi, size=n - 1))
    return [0.0] + pts


# --------------------------------------------------------------------------
# suites


def _thm_1_2(rng) -> TrialResult:
    tr = TrialResult()
    phi = random_pd_z(rng).radial(2)
    tr.psd("group_psd_min_eig", group_gram(random_word_set(rng), phi))
    return tr


def _thm_1_3(rng) -> TrialResult:
    tr = TrialResult()
    psi = random_cnd_z(rng).radial(2)
    words = random_word_set(rng)
    G = group_gram(words, psi)
    tr.cnd("group_cnd_max_eig", G)
    tr.rows.append(le("psi_e", abs(psi(FreeWord())), 0.0))
    for t in T_GRID:
        tr.psd(f"exp_t{t:g}_min_eig", group_gram(words, schoenberg_transform(psi, t)))
    return tr


def _prop_4_1(rng) -> TrialResult:
    tr = TrialResult()
    spec = FamilySpec("free-int", int(rng.integers(2, 17)), _random_targets(rng, "free-int", 4))
    fam = build_family(spec)
    bad = 0
    for a in fam.elements:
        for b in fam.elements:
            bad += fam.observed(a, b) != fam.expected(a, b)
    tr.rows.append(le("family_violations", bad, 0))
    return tr


def _prop_4_2(rng) -> TrialResult:
    tr = TrialResult()
    worst = 0
    for case in PAIR_CASES:
        f, g = case_pair(rng, case)
        got = classify_pair(f, g)
        tr.tags.append(got)
        tr.rows.append(Row(f"case_{case}", float(PAIR_CASES.index(got)), float(PAIR_CASES.index(case)), got == case))
        worst = max(worst, abs(sq_distance(embed(f), embed(g)) - lp_length_pow(left_quotient(f, g), 2)))
    for _ in range(4):
        f, g = random_word(rng, 4, 3, 3), random_word(rng, 4, 3, 3)
        tr.tags.append(classify_pair(f, g))
        worst = max(worst, abs(sq_distance(embed(f), embed(g)) - lp_length_pow(left_quotient(f, g), 2)))
    tr.rows.append(le("isometry_abs_error", worst, 0))
    words = random_word_set(rng, max_size=8)
    c = rng.normal(size=len(words))
    lhs, rhs = parity_identity_check(words, c)
    tr.rows.append(le("parity_identity_gap", abs(lhs - rhs), 1e-12 * max(1.0, abs(rhs))))
    T = theta_matrix(words, 2)
    tr.psd("parity_psd_min_eig", np.where(T % 2 == 0, 1.0, -1.0))
    tr.cnd("length_cnd_max_eig", T)
    s = float(rng.uniform(-1.0, 1.0))
    tr.psd("power_psd_min_eig", s ** T)
    return tr


def _random_space_pd(rng):
    space = str(rng.choice(["free-int", "free-real", "direct-sum"]))
    if space == "free-int":
        return space, 2.0, random_pd_z(rng).radial(2)
    p = float(rng.choice(P_GRID))
    return space, p, random_pd_rplus(rng).radial(p)


def _random_space_cnd(rng):
    space = str(rng.choice(["free-int", "free-real", "direct-sum"]))
    if space == "free-int":
        return space, 2.0, random_cnd_z(rng).radial(2)
    p = float(rng.choice(P_GRID))
    return space, p, random_cnd_rplus(rng).radial(p)


def _sum_points(targets) -> list:
    pts = {0: None}
    for a in targets:
        for b in targets:
            pts[a + b] = None
    return list(pts)


def _lemma_3_2(rng) -> TrialResult:
    tr = TrialResult()
    space, p, phi = _random_space_pd(rng)
    spec = FamilySpec(space, max(SWEEP_NS), _random_targets(rng, space), p)
    c = rng.normal(size=spec.M)
    checks = transfer_sweep(phi, spec, c, SWEEP_NS, seed=int(rng.integers(2**31)))
    for bc in checks:
        tr.rows.append(Row(f"quad_minus_bound_N{bc.N}", bc.quad - bc.bound, 0.0, bc.holds))
    dot = radial_to_semigroup(phi, default_probes(_sum_points(spec.targets), space, p), p)
    S = semigroup_gram(spec.targets, dot)
    rep = tr.psd("semigroup_psd_min_eig", S)
    if rep.accepted:
        tr.rows.append(ge("quad_N128", checks[-1].quad, -1e-6))
    sup = max(abs(v) for v in dot.values.values())
    tr.rows.append(le("sup_minus_phi0", sup - dot(0), 1e-12))
    tr.tags.append(space)
    return tr


def _cor_3_3(rng) -> TrialResult:
    tr = TrialResult()
    space, p, psi = _random_space_cnd(rng)
    targets = _random_targets(rng, space, 4)
    dot = radial_to_semigroup(psi, default_probes(_sum_points(targets), space, p), p)
    for t in T_GRID:
        S = semigroup_gram(targets, lambda s: math.exp(-t * dot(s)))
        tr.psd(f"semigroup_exp_t{t:g}_min_eig", S)
    tr.rows.append(ge("bounded_below", min(dot.values.values()) - dot(0), -1e-12))
    tr.tags.append(space)
    return tr


def _thm_4_5(rng) -> TrialResult:
    tr = TrialResult()
    prof = random_pd_rplus(rng)
    pts = _semigroup_points(rng, int(rng.integers(2, 11)))
    tr.psd("semigroup_psd_min_eig", semigroup_gram(pts, prof))
    h = 0.25
    k = len(prof.mu)
    samples = [(j * h, prof(j * h)) for j in range(2 * k + 1)]
    rec = recover_laplace(samples, k, h).measure
    err = _laplace_error(prof, rec)
    tr.rows.append(le("laplace_roundtrip_error", err, 1e-5))
    return tr


def _laplace_error(prof: RPlusPdProfile, rec: DiscreteMeasure) -> float:
    if len(rec) != len(prof.mu):
        return math.inf
    a = np.array(prof.mu.sorted().locs) - np.array(rec.locs)
    w = np.array(prof.mu.sorted().weights) - np.array(rec.weights)
    return float(max(np.max(np.abs(a)), np.max(np.abs(w)), abs(prof.b - rec.b)))


def _thm_4_6(rng) -> TrialResult:
    tr = TrialResult()
    prof = random_cnd_rplus(rng)
    pts = _semigroup_points(rng, int(rng.integers(2, 11)))
    tr.cnd("semigroup_cnd_max_eig", semigroup_gram(pts, prof))
    for t in T_GRID:
        tr.psd(f"semigroup_exp_t{t:g}_min_eig", semigroup_gram(pts, lambda s: math.exp(-t * prof(s))))
    grid = np.linspace(0.0, 10.0, 41)
    tr.rows.append(ge("bounded_below", float(np.min(prof(grid))) - prof(0.0), -1e-12))
    return tr


def _real_space_suite(rng, space: str) -> TrialResult:
    tr = TrialResult()
    p = float(rng.choice(P_GRID))
    words = random_word_set(rng, space, max_blocks=6)
    tr.psd("group_psd_min_eig", group_gram(words, random_pd_rplus(rng).radial(p)))
    T = theta_matrix(words, p)
    t = float(rng.choice(T_GRID))
    tr.psd("exp_length_psd_min_eig", np.exp(-t * T))
    tr.cnd("group_cnd_max_eig", group_gram(words, random_cnd_rplus(rng).radial(p)))
    spec = FamilySpec(space, int(rng.integers(2, 9)), _random_targets(rng, space, 4), p)
    fam = build_family(spec)
    worst = 0.0
    for a in fam.elements:
        for b in fam.elements:
            want = fam.expected(a, b)
            worst = max(worst, abs(fam.observed(a, b) - want) / max(1.0, abs(want)))
    tr.rows.append(le("family_rel_error", worst, 1e-12))
    tr.tags.append(f"p={p:g}")
    return tr


def _cor_4_9(rng) -> TrialResult:
    tr = TrialResult()
    p = float(rng.choice(P_GRID))
    words = random_word_set(rng, "free-real")
    tr.psd("group_psd_min_eig", group_gram(words, random_pd_rplus(rng).radial(p)))
    t = float(rng.choice(T_GRID))
    tr.psd("exp_length_psd_min_eig", np.exp(-t * theta_matrix(words, p)))
    tr.tags.append(f"p={p:g}")
    return tr


def _cor_4_10(rng) -> TrialResult:
    tr = TrialResult()
    p = float(rng.choice(P_GRID))
    words = random_word_set(rng, "free-real")
    tr.cnd("group_cnd_max_eig", group_gram(words, random_cnd_rplus(rng).radial(p)))
    tr.cnd("length_cnd_max_eig", theta_matrix(words, p))
    tr.tags.append(f"p={p:g}")
    return tr


SUITES: dict[str, Callable] = {
    "thm-1.2": _thm_1_2,
    "thm-1.3": _thm_1_3,
    "prop-4.1": _prop_4_1,
    "prop-4.2": _prop_4_2,
    "lemma-3.2": _lemma_3_2,
    "cor-3.3": _cor_3_3,
    "thm-4.5": _thm_4_5,
    "thm-4.6": _thm_4_6,
    "cor-4.9": _cor_4_9,
    "cor-4.10": _cor_4_10,
    "sec-4.3": lambda rng: _real_space_suite(rng, "direct-sum"),
}


# --------------------------------------------------------------------------
# reports


CSV_COLUMNS = ("trial", "theorem", "statistic", "value", "threshold", "pass")


@dataclass
class CampaignReport:
    theorem: str
    seed: int
    trials: int
    results: list  # TrialResult per trial, in trial order

    @property
    def failures(self) -> int:
        return sum(not r.passed for t in self.results for r in t.rows)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def summary(self) -> dict:
        stats: dict[str, dict] = {}
        for t in self.results:
            for r in t.rows:
                s = stats.setdefault(r.statistic, {"count": 0, "failures": 0, "min": math.inf, "max": -math.inf})
                s["count"] += 1
                s["failures"] += not r.passed
                s["min"] = min(s["min"], r.value)
                s["max"] = max(s["max"], r.value)
        tags = Counter(tag for t in self.results for tag in t.tags)
        return {"statistics": stats, "tags": dict(sorted(tags.items()))}

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "seed": self.seed,
            "trials": self.trials,
            "passed": self.passed,
            "failures": self.failures,
            "summary": self.summary(),
            "rows": [
                {"trial": i, "statistic": r.statistic, "value": r.value, "threshold": r.threshold, "pass": r.passed}
                for i, t in enumerate(self.results)
                for r in t.rows
            ],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for i, t in enumerate(self.results):
            for r in t.rows:
                w.writerow((i, self.theorem, r.statistic, repr(r.value), repr(r.threshold), "true" if r.passed else "false"))
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [f"{self.theorem}: {self.trials} trials, seed {self.seed}, "
                 f"{'PASS' if self.passed else 'FAIL'} ({self.failures} failing rows)"]
        summ = self.summary()
        for name, s in summ["statistics"].items():
            lines.append(f"  {name}: n={s['count']} fail={s['failures']} min={s['min']:.6g} max={s['max']:.6g}")
        if summ["tags"]:
            lines.append("  tags: " + ", ".join(f"{k}={v}" for k, v in summ["tags"].items()))
        return "\n".join(lines)

    def dumps(self, fmt: str = "json") -> str:
        if fmt == "json":
            return json.dumps(self.to_json(), indent=2, default=_json_default)
        if fmt == "csv":
            return self.to_csv()
        return self.to_text()


def _json_default(x):
    if isinstance(x, float) and math.isinf(x):
        return None
    raise TypeError(type(x))


def run_campaign(theorem: str, trials: int = 10, seed: int = 0) -> CampaignReport:
    if theorem not in SUITES:
        raise ValueError(f"unknown theorem tag {theorem!r}; expected one of {', '.join(THEOREMS)}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    root = np.random.SeedSequence([int(seed), THEOREMS.index(theorem)])
    suite = SUITES[theorem]
    results = [suite(np.random.default_rng(child)) for child in root.spawn(trials)]
    return CampaignReport(theorem, int(seed), int(trials), results)
