"""Command-line front end.

Exit codes: 0 success, 1 mathematical rejection (a Gram check, feasibility
test, recovery or certification failed), 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Callable

import numpy as np

from . import __version__
from .campaigns import THEOREMS, run_campaign
from .embedding import embed
from .gram import check_cnd, check_psd, group_gram, semigroup_gram
from .moments import MomentSequence, RecoveryError, hankel_feasible, moments_of, recover_laplace, recover_measure
from .profiles import (
    PROFILE_KINDS,
    CndProfileZ,
    DiscreteMeasure,
    Radial,
    RadialProfileZ,
    profile_from_json,
)
from .transfer import FamilyError, FamilySpec, RadialityError, build_family, default_probes, radial_to_semigroup
from .words import (
    SPACES,
    format_word,
    identity,
    left_quotient,
    lp_length,
    parse_word,
    random_coord_vector,
    random_real_word,
    random_word,
    word_from_json,
    word_to_json,
)

EXIT_OK, EXIT_REJECT, EXIT_USAGE = 0, 1, 2
SEED_ENV = "RADIAL_GRAM_SEED"
BUILTINS = ("parity", "length", "first-generator")


class UsageError(Exception):
    pass


class Rejected(Exception):
    """Mathematical rejection; carries the payload to print before exiting 1."""

    def __init__(self, payload, text: str):
        super().__init__(text)
        self.payload = payload
        self.text = text


# --------------------------------------------------------------------------
# io helpers


def _read_text(arg: str | None) -> str:
    if arg is None or arg == "-":
        return sys.stdin.read()
    return arg


def _read_file(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _read_json(path: str):
    return json.loads(_read_file(path))


def _emit(args, payload, text: str | None = None):
    if args.format == "json":
        print(json.dumps(payload, indent=2, default=_jsonable))
    elif args.format == "csv":
        print(_to_csv(payload))
    else:
        print(text if text is not None else json.dumps(payload, default=_jsonable))


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def _to_csv(payload) -> str:
    # flat key,value listing for non-tabular outputs
    lines = ["key,value"]

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k, v in obj.items():
                walk(f"{prefix}.{k}" if prefix else str(k), v)
        elif isinstance(obj, list):
            for i, v in enumerate(obj):
                walk(f"{prefix}.{i}", v)
        else:
            lines.append(f"{prefix},{obj}")

    walk("", payload)
    return "\n".join(lines)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        seed = int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}")
    if seed < 0:
        raise UsageError(f"{SEED_ENV} must be nonnegative")
    return seed


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _p_value(text: str) -> float:
    v = float(text)
    if not 0 < v <= 2:
        raise argparse.ArgumentTypeError("p must lie in (0, 2]")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


# --------------------------------------------------------------------------
# subcommands


def cmd_reduce(args) -> int:
    w = parse_word(_read_text(args.word).strip(), args.space)
    _emit(args, {"word": format_word(w), **word_to_json(w)}, format_word(w))
    return EXIT_OK


def cmd_length(args) -> int:
    w = parse_word(_read_text(args.word).strip(), args.space)
    p = 2.0 if args.p is None else args.p
    val = lp_length(w, p, powered=args.squared)
    payload = {"word": format_word(w), "p": p, "powered": args.squared, **val.to_json()}
    text = str(val.exact_int) if val.exact_int is not None else repr(val.value)
    _emit(args, payload, text)
    return EXIT_OK


def cmd_embed(args) -> int:
    if args.space != "free-int":
        raise UsageError("embed is defined on free-int words only")
    w = parse_word(_read_text(args.word).strip(), "free-int")
    v = embed(w)
    text = "\n".join(f"{k}\t{c}" for k, c in v.coeffs.items()) or "0"
    _emit(args, {"word": format_word(w), "sq_norm": v.sq_norm, **v.to_json()}, text)
    return EXIT_OK


def _load_words(args) -> list:
    if args.random is not None:
        rng = np.random.default_rng(_seed(args))
        if args.space == "free-int":
            return [random_word(rng, max_blocks=6, max_exp=3, max_gen=3) for _ in range(args.random)]
        if args.space == "free-real":
            return [random_real_word(rng, max_blocks=6) for _ in range(args.random)]
        return [random_coord_vector(rng) for _ in range(args.random)]
    if args.words is None:
        raise UsageError("give a words file or --random N")
    raw = _read_file(args.words)
    stripped = raw.lstrip()
    if stripped.startswith("["):
        items = json.loads(raw)
        return [parse_word(x, args.space) if isinstance(x, str) else word_from_json(x, args.space) for x in items]
    words = []
    for line in raw.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            words.append(parse_word(line, args.space))
    return words


def _first_generator(g) -> float:
    # deliberately non-radial: depends on which generator a word starts with
    if hasattr(g, "blocks"):
        return 1.0 if not g.blocks else math.exp(-g.blocks[0][0])
    return 1.0 if not g.entries else math.exp(-g.entries[0][0])


def _load_phi(args) -> tuple[Callable, str, object]:
    """Returns (word function, default mode, profile object or None)."""
    name = args.profile
    p = 2.0 if args.p is None else args.p
    if name == "parity":
        if args.space != "free-int":
            raise UsageError("the parity profile is defined on free-int words")
        return Radial(lambda n: np.where(np.asarray(n) % 2 == 0, 1.0, -1.0), 2.0), "pd", None
    if name == "length":
        return Radial(lambda s: np.asarray(s, dtype=float), p), "cnd", None
    if name == "first-generator":
        return _first_generator, "pd", None
    prof = profile_from_json(_read_json(name), strict=False)
    if isinstance(prof, (RadialProfileZ, CndProfileZ)):
        if args.space != "free-int" or p not in (1.0, 2.0):
            raise UsageError("pd-z and cnd-z profiles need free-int words with p in {1, 2}")
    return Radial(prof, p), ("pd" if prof.kind.startswith("pd") else "cnd"), prof


def _boundedness_witness(phi: Radial, space: str, tol: float | None):
    """A pair {e, g} whose 2x2 Gram is indefinite, if |phidot(s)| > phidot(0) on a scan."""
    prof = phi.profile
    phi0 = float(prof(0.0))
    if isinstance(prof, RadialProfileZ):
        pts = np.arange(0, 257, dtype=float)
    else:
        pts = np.concatenate((np.linspace(0.0, 10.0, 201), np.geomspace(10.0, 1e3, 60)))
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.asarray(prof(pts), dtype=float)
    slack = (1e-9 if tol is None else tol) * max(1.0, abs(phi0))
    bad = np.nonzero(~np.isfinite(vals) | (np.abs(vals) > phi0 + slack))[0]
    if not bad.size:
        return None
    s = float(pts[bad[0]])
    g = default_probes([s], space, phi.p)[s][0]
    words = [identity(space), g]
    with np.errstate(over="ignore", invalid="ignore"):
        M = np.array([[phi(left_quotient(a, b)) for b in words] for a in words])
    if not np.all(np.isfinite(M)):
        return {"word": format_word(g), "s": s, "value": float(vals[bad[0]]), "phi_e": phi0, "verdict": "reject"}
    rep = check_psd(M, tol)
    return {"word": format_word(g), "s": s, "value": float(vals[bad[0]]), "phi_e": phi0, **rep.to_json()}


def _parse_points(text: str) -> list:
    try:
        pts = [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"bad semigroup points {text!r}")
    if not pts or any(x < 0 for x in pts):
        raise UsageError("semigroup points must be nonnegative")
    return pts


def cmd_check(args) -> int:
    phi, default_mode, prof = _load_phi(args)
    mode = args.mode or default_mode
    p = getattr(phi, "p", args.p or 2.0)
    if args.semigroup is not None:
        pts = _parse_points(args.semigroup)
        need = sorted({a + b for a in pts for b in pts} | {0.0})
        try:
            dot = radial_to_semigroup(phi, default_probes(need, args.space, p), p)
        except RadialityError as e:
            w1, w2, v1, v2 = e.witness
            payload = {"verdict": "reject", "reason": "not radial",
                       "witness": [{"word": format_word(w1), "value": v1}, {"word": format_word(w2), "value": v2}]}
            raise Rejected(payload, str(e))
        M = semigroup_gram(pts, dot)
    else:
        words = _load_words(args)
        if not words:
            raise UsageError("no words to check")
        with np.errstate(over="ignore", invalid="ignore"):
            M = group_gram(words, phi)
    if not np.all(np.isfinite(M)):
        payload = {"n": len(M), "mode": mode, "verdict": "reject", "reason": "non-finite Gram entries"}
        raise Rejected(payload, "reject: Gram matrix has non-finite entries")
    rep = check_psd(M, args.tol) if mode == "pd" else check_cnd(M, args.tol)
    payload = rep.to_json()
    verdict = rep.verdict
    if mode == "pd" and prof is not None and args.semigroup is None:
        wit = _boundedness_witness(phi, args.space, args.tol)
        if wit is not None:
            payload["boundedness_witness"] = wit
            verdict = "reject"
            payload["verdict"] = verdict
    text = f"{verdict} mode={mode} n={rep.n} min_eig={rep.min_eig:.6g} max_eig={rep.max_eig:.6g} tol={rep.tol:.3g}"
    if verdict != "accept":
        raise Rejected(payload, text)
    _emit(args, payload, text)
    return EXIT_OK


def _load_moments(obj) -> MomentSequence:
    if isinstance(obj, list):
        return MomentSequence(tuple(obj))
    return MomentSequence.from_json(obj)


def cmd_moments(args) -> int:
    obj = _read_json(args.file)
    if isinstance(obj, dict) and "atoms" in obj:
        if args.L is None:
            raise UsageError("computing moments of a measure needs --L")
        ms = moments_of(DiscreteMeasure.from_json(obj), args.L)
        _emit(args, ms.to_json(), " ".join(repr(x) for x in ms.m))
        return EXIT_OK
    ms = _load_moments(obj)
    res = hankel_feasible(ms, args.tol)
    payload = res.to_json()
    text = ("feasible" if res.feasible else "infeasible: " + ", ".join(res.failing))
    if not res.feasible:
        raise Rejected(payload, text)
    _emit(args, payload, text)
    return EXIT_OK


def _laplace_samples(obj) -> tuple[list, float | None]:
    if isinstance(obj, list):
        return [(float(s), float(v)) for s, v in obj], None
    h = obj.get("h")
    if "samples" in obj:
        return [(float(s), float(v)) for s, v in obj["samples"]], h
    if "s" in obj and "phi" in obj:
        return list(zip(map(float, obj["s"]), map(float, obj["phi"]))), h
    raise ValueError("laplace input needs 'samples' or 's'/'phi'")


def cmd_recover(args) -> int:
    obj = _read_json(args.file)
    if args.kind == "laplace":
        samples, h = _laplace_samples(obj)
        res = recover_laplace(samples, args.k, args.h or h)
    else:
        ms = _load_moments(obj)
        feas = hankel_feasible(ms, args.tol)
        if not feas.feasible:
            payload = {"verdict": "infeasible", **feas.to_json()}
            raise Rejected(payload, "infeasible: " + ", ".join(feas.failing))
        res = recover_measure(ms, args.k)
    payload = res.to_json()
    text = "\n".join(f"{loc!r}\t{w!r}" for loc, w in res.measure.atoms)
    if res.measure.b:
        text += f"\ninf\t{res.measure.b!r}"
    _emit(args, payload, f"{text}\nresidual {res.residual:.3g}".lstrip())
    return EXIT_OK


def cmd_family(args) -> int:
    if args.spec is not None:
        spec = FamilySpec.from_json(_read_json(args.spec))
    else:
        if args.N is None or args.targets is None:
            raise UsageError("give a FamilySpec file or --N and --targets")
        targets = _parse_points(args.targets)
        spec = FamilySpec(args.space, args.N, tuple(targets), args.p or 2.0)
    fam = build_family(spec)
    try:
        checked = fam.verify()
    except FamilyError as e:
        raise Rejected({"spec": spec.to_json(), "verdict": "reject", "error": str(e)}, str(e))
    elements = [{"n": n, "k": k, "target": spec.targets[k - 1], "word": format_word(w)}
                for (n, k), w in sorted(fam.elements.items())]
    payload = {"spec": spec.to_json(), "checked_pairs": checked, "elements": elements}
    text = "\n".join(f"{e['n']}\t{e['target']}\t{e['word']}" for e in elements)
    _emit(args, payload, text + f"\nchecked {checked} pairs")
    return EXIT_OK


def cmd_certify(args) -> int:
    rep = run_campaign(args.theorem, args.trials, _seed(args))
    out = rep.dumps(args.format)
    sys.stdout.write(out if out.endswith("\n") else out + "\n")
    if args.csv is not None:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(rep.to_csv())
    return EXIT_OK if rep.passed else EXIT_REJECT


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--seed", type=_nonneg_int, default=None,
                        help=f"random seed (falls back to ${SEED_ENV}, then 0)")
    common.add_argument("--tol", type=_positive_float, default=None)
    common.add_argument("--space", choices=SPACES, default="free-int")
    common.add_argument("--p", type=_p_value, default=None)

    parser = argparse.ArgumentParser(prog="radialgram", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("reduce", parents=[common], help="free reduction of a word")
    s.add_argument("word", nargs="?", help="word text; read from stdin when omitted")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("length", parents=[common], help="l^p length of a word")
    s.add_argument("word", nargs="?")
    s.add_argument("--squared", action="store_true", help="report ||g||_p^p instead of ||g||_p")
    s.set_defaults(func=cmd_length)

    s = sub.add_parser("embed", parents=[common], help="integer embedding vector of a free-int word")
    s.add_argument("word", nargs="?")
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("check", parents=[common], help="PD / CND certificate of a radial function")
    s.add_argument("words", nargs="?", help="words file: one word per line, or a JSON list")
    s.add_argument("--profile", required=True,
                   help=f"profile JSON file (kinds {', '.join(PROFILE_KINDS)}) or builtin: {', '.join(BUILTINS)}")
    s.add_argument("--mode", choices=("pd", "cnd"), default=None)
    s.add_argument("--random", type=_positive_int, default=None, metavar="N", help="use N seeded random words")
    s.add_argument("--semigroup", default=None, metavar="POINTS",
                   help="check the induced semigroup function on these comma-separated points")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("moments", parents=[common], help="Hankel feasibility, or moments of a measure")
    s.add_argument("file", help='{"m": [...]} moment sequence, or a measure JSON with --L')
    s.add_argument("--L", type=_nonneg_int, default=None)
    s.set_defaults(func=cmd_moments)

    s = sub.add_parser("recover", parents=[common], help="recover a representing measure")
    s.add_argument("file")
    s.add_argument("--k", type=_nonneg_int, required=True, help="number of atoms")
    s.add_argument("--kind", choices=("moments", "laplace"), default="moments")
    s.add_argument("--h", type=_positive_float, default=None, help="laplace sample spacing")
    s.set_defaults(func=cmd_recover)

    s = sub.add_parser("family", parents=[common], help="build and verify a witness family")
    s.add_argument("spec", nargs="?", help="FamilySpec JSON file")
    s.add_argument("--N", type=int, default=None)
    s.add_argument("--targets", default=None, help="comma-separated targets")
    s.set_defaults(func=cmd_family)

    s = sub.add_parser("certify", parents=[common], help="run a seeded certification campaign")
    s.add_argument("--theorem", choices=THEOREMS, required=True)
    s.add_argument("--trials", type=_positive_int, default=10)
    s.add_argument("--csv", default=None, metavar="PATH", help="also write the trial table as CSV")
    s.set_defaults(func=cmd_certify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except Rejected as r:
        _emit(args, r.payload, r.text)
        return EXIT_REJECT
    except RecoveryError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_REJECT
    except (UsageError, ValueError, KeyError, TypeError, OSError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
