"""Reduced words in the free groups F_inf and R_inf, and vectors in R^N.

Elements are immutable.  Free-product words are stored as tuples of
``(generator, exponent)`` blocks in freely reduced form; generators are
1-based integers.  ``FreeWord`` carries integer exponents (arbitrary
precision), ``RealFreeWord`` carries float exponents.  ``CoordVector`` is a
finitely supported vector of the direct sum, where the group law is addition.

Text format: whitespace separated ``g<i>^<k>`` tokens (``^<k>`` optional,
default 1), identity spelled ``e``.
"""

from __future__ import annotations

import math
import re
from typing import Iterable, Union

import numpy as np

__all__ = [
    "FreeWord",
    "RealFreeWord",
    "CoordVector",
    "LengthValue",
    "SPACES",
    "parse_word",
    "format_word",
    "word_to_json",
    "word_from_json",
    "multiply",
    "inverse",
    "left_quotient",
    "identity",
    "lp_length",
    "lp_length_pow",
    "random_word",
    "random_real_word",
    "random_coord_vector",
    "is_reduced",
]

SPACES = ("free-int", "free-real", "direct-sum")

_TOKEN = re.compile(r"^g(\d+)(?:\^(.+))?$")


def _reduce(blocks: Iterable[tuple], start: tuple = ()) -> tuple:
    # stack scan; `start` must already be reduced
    stack = list(start)
    for g, k in blocks:
        if k == 0:
            continue
        if stack and stack[-1][0] == g:
            merged = stack[-1][1] + k
            if merged == 0:
                stack.pop()
            else:
                stack[-1] = (g, merged)
        else:
            stack.append((g, k))
    return tuple(stack)


class _FreeProductWord:
    """Shared machinery for reduced words of a free product of copies of a group."""

    __slots__ = ("blocks",)

    def __init__(self, blocks: Iterable[tuple] = ()):
        checked = []
        for g, k in blocks:
            if isinstance(g, bool) or int(g) != g or g < 1:
                raise ValueError(f"generator index must be a positive integer, got {g!r}")
            checked.append((int(g), self._coerce(k)))
        object.__setattr__(self, "blocks", _reduce(checked))

    @classmethod
    def _coerce(cls, k):
        return int(k)

    @classmethod
    def _raw(cls, blocks: tuple):
        # trusted constructor for blocks already known to be reduced
        obj = object.__new__(cls)
        object.__setattr__(obj, "blocks", blocks)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __eq__(self, other):
        return type(other) is type(self) and other.blocks == self.blocks

    def __hash__(self):
        return hash((type(self).__name__, self.blocks))

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __mul__(self, other):
        return multiply(self, other)

    def __invert__(self):
        return inverse(self)

    def __repr__(self):
        return f"{type(self).__name__}({format_word(self)!r})"

    def __str__(self):
        return format_word(self)

    @property
    def is_identity(self) -> bool:
        return not self.blocks

    @property
    def generators(self) -> tuple:
        return tuple(g for g, _ in self.blocks)

    @property
    def exponents(self) -> tuple:
        return tuple(k for _, k in self.blocks)


class FreeWord(_FreeProductWord):
    """Reduced word of F_inf with nonzero integer exponents."""

    __slots__ = ()

    @classmethod
    def _coerce(cls, k):
        if isinstance(k, bool):
            raise TypeError("boolean exponent")
        if isinstance(k, (int, np.integer)):
            return int(k)
        if isinstance(k, float) and k.is_integer():
            return int(k)
        raise TypeError(f"FreeWord exponents must be integers, got {k!r}")


class RealFreeWord(_FreeProductWord):
    """Reduced word of the free real line R_inf with nonzero real exponents."""

    __slots__ = ()

    @classmethod
    def _coerce(cls, k):
        k = float(k)
        if not math.isfinite(k):
            raise ValueError(f"exponent must be finite, got {k!r}")
        return k


class CoordVector:
    """Finitely supported vector in R^N; zero entries are never stored."""

    __slots__ = ("entries",)

    def __init__(self, entries: Union[dict, Iterable[tuple]] = ()):
        items = entries.items() if isinstance(entries, dict) else entries
        acc: dict[int, float] = {}
        for g, v in items:
            g = int(g)
            if g < 1:
                raise ValueError(f"coordinate index must be >= 1, got {g}")
            v = float(v)
            if not math.isfinite(v):
                raise ValueError(f"entry must be finite, got {v!r}")
            acc[g] = acc.get(g, 0.0) + v
        object.__setattr__(self, "entries", tuple(sorted((g, v) for g, v in acc.items() if v != 0.0)))

    @classmethod
    def _raw(cls, entries: tuple):
        obj = object.__new__(cls)
        object.__setattr__(obj, "entries", entries)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("CoordVector is immutable")

    def __eq__(self, other):
        return type(other) is CoordVector and other.entries == self.entries

    def __hash__(self):
        return hash(("CoordVector", self.entries))

    def __len__(self):
        return len(self.entries)

    def __mul__(self, other):
        return multiply(self, other)

    def __invert__(self):
        return inverse(self)

    def __repr__(self):
        return f"CoordVector({format_word(self)!r})"

    def __str__(self):
        return format_word(self)

    @property
    def is_identity(self) -> bool:
        return not self.entries

    def as_dict(self) -> dict:
        return dict(self.entries)


Word = Union[FreeWord, RealFreeWord, CoordVector]

_SPACE_TYPES = {"free-int": FreeWord, "free-real": RealFreeWord, "direct-sum": CoordVector}


def identity(space: str = "free-int") -> Word:
    return _space_type(space)()


def _space_type(space: str):
    try:
        return _SPACE_TYPES[space]
    except KeyError:
        raise ValueError(f"unknown space {space!r}; expected one of {SPACES}") from None


def is_reduced(blocks: Iterable[tuple]) -> bool:
    prev = None
    for g, k in blocks:
        if k == 0 or g == prev:
            return False
        prev = g
    return True


# --------------------------------------------------------------------------
# text and JSON formats


def parse_word(text: str, space: str = "free-int") -> Word:
    """Parse ``g<i>^<k>`` tokens into the freely reduced element of `space`."""
    cls = _space_type(space)
    tokens = text.split()
    if not tokens:
        raise ValueError("empty word text; spell the identity as 'e'")
    if tokens == ["e"]:
        return cls()
    pairs = []
    for tok in tokens:
        m = _TOKEN.match(tok)
        if m is None:
            raise ValueError(f"malformed token {tok!r}")
        g = int(m.group(1))
        if g == 0:
            raise ValueError(f"generator index 0 in token {tok!r}")
        raw = m.group(2)
        if raw is None:
            k = 1
        elif cls is FreeWord:
            if not re.fullmatch(r"[+-]?\d+", raw):
                raise ValueError(f"integer exponent expected in token {tok!r}")
            k = int(raw)
        else:
            try:
                k = float(raw)
            except ValueError:
                raise ValueError(f"malformed exponent in token {tok!r}") from None
            if not math.isfinite(k):
                raise ValueError(f"non-finite exponent in token {tok!r}")
        if k == 0:
            raise ValueError(f"zero exponent in token {tok!r}")
        pairs.append((g, k))
    return cls(pairs)


def _fmt_exp(k) -> str:
    if isinstance(k, float):
        return repr(k)
    return str(k)


def format_word(w: Word) -> str:
    items = w.entries if isinstance(w, CoordVector) else w.blocks
    if not items:
        return "e"
    return " ".join(f"g{g}" if k == 1 else f"g{g}^{_fmt_exp(k)}" for g, k in items)


def word_to_json(w: Word) -> dict:
    if isinstance(w, CoordVector):
        return {"entries": {str(g): v for g, v in w.entries}}
    return {"blocks": [{"g": g, "k": k} for g, k in w.blocks]}


def word_from_json(obj: dict, space: str = "free-int") -> Word:
    cls = _space_type(space)
    if cls is CoordVector:
        return CoordVector({int(g): v for g, v in obj["entries"].items()})
    return cls((b["g"], b["k"]) for b in obj["blocks"])


# --------------------------------------------------------------------------
# group law


def _check_same(f, g):
    if type(f) is not type(g):
        raise TypeError(f"cannot combine {type(f).__name__} with {type(g).__name__}")


def multiply(f: Word, g: Word) -> Word:
    _check_same(f, g)
    if isinstance(f, CoordVector):
        acc = dict(f.entries)
        for i, v in g.entries:
            acc[i] = acc.get(i, 0.0) + v
        return CoordVector._raw(tuple(sorted((i, v) for i, v in acc.items() if v != 0.0)))
    return type(f)._raw(_reduce(g.blocks, start=f.blocks))


def inverse(g: Word) -> Word:
    if isinstance(g, CoordVector):
        return CoordVector._raw(tuple((i, -v) for i, v in g.entries))
    return type(g)._raw(tuple((a, -k) for a, k in reversed(g.blocks)))


def left_quotient(x: Word, y: Word) -> Word:
    """Return ``x^{-1} y`` by stripping the common block prefix of `x` and `y`.

    Equal to ``multiply(inverse(x), y)``; cheaper because both inputs are
    reduced, so cancellation can only happen at the junction.
    """
    _check_same(x, y)
    if isinstance(x, CoordVector):
        return multiply(inverse(x), y)
    xb, yb = x.blocks, y.blocks
    n = min(len(xb), len(yb))
    i = 0
    while i < n and xb[i] == yb[i]:
        i += 1
    xr, yr = xb[i:], yb[i:]
    if xr and yr and xr[0][0] == yr[0][0]:
        g = xr[0][0]
        mid = ((g, yr[0][1] - xr[0][1]),)
        head = tuple((a, -k) for a, k in reversed(xr[1:]))
        return type(x)._raw(head + mid + yr[1:])
    head = tuple((a, -k) for a, k in reversed(xr))
    return type(x)._raw(head + yr)


# --------------------------------------------------------------------------
# l^p lengths


class LengthValue:
    """A nonnegative length; `exact_int` is set when the value is an exact integer."""

    __slots__ = ("value", "exact_int")

    def __init__(self, value: float, exact_int: int | None = None):
        self.value = float(value)
        self.exact_int = exact_int

    def __repr__(self):
        if self.exact_int is not None:
            return f"LengthValue({self.exact_int})"
        return f"LengthValue({self.value!r})"

    def __eq__(self, other):
        if isinstance(other, LengthValue):
            return self.value == other.value and self.exact_int == other.exact_int
        return NotImplemented

    def to_json(self) -> dict:
        out = {"value": self.value}
        if self.exact_int is not None:
            out["exact_int"] = self.exact_int
        return out


def _check_p(p: float) -> float:
    p = float(p)
    if not (0.0 < p <= 2.0):
        raise ValueError(f"p must lie in (0, 2], got {p}")
    return p


def _exponents(g: Word):
    return [v for _, v in (g.entries if isinstance(g, CoordVector) else g.blocks)]


def lp_length_pow(g: Word, p: float = 2.0):
    """Sum of ``|k_j|**p`` over the exponents of `g`.

    This is the semigroup-valued functional used throughout; for a
    ``FreeWord`` with ``p == 2`` the result is an exact Python integer.
    """
    if p == 2 and type(g) is FreeWord:
        return sum(k * k for _, k in g.blocks)
    p = _check_p(p)
    ks = _exponents(g)
    if isinstance(g, FreeWord) and p == 2.0:
        return sum(k * k for k in ks)
    if p == 2.0:
        return float(sum(k * k for k in ks))
    if p == 1.0:
        return float(sum(abs(k) for k in ks))
    return float(sum(abs(k) ** p for k in ks))


def lp_length(g: Word, p: float = 2.0, *, powered: bool = False) -> LengthValue:
    """The l^p length ``(sum |k_j|^p)^(1/p)``, or its p-th power if `powered`."""
    s = lp_length_pow(g, p)
    if powered:
        exact = s if isinstance(s, int) else None
        return LengthValue(s, exact)
    p = float(p)
    if isinstance(g, FreeWord) and p == 1.0:
        s = int(s)
        return LengthValue(s, s)
    return LengthValue(float(s) ** (1.0 / p))


# --------------------------------------------------------------------------
# sampling


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _sample_structure(rng, max_blocks: int, max_gen: int) -> list[int]:
    if max_blocks < 1 or max_gen < 1:
        raise ValueError("max_blocks and max_gen must be >= 1")
    n = int(rng.integers(0, max_blocks + 1))
    if max_gen == 1:
        n = min(n, 1)
    gens: list[int] = []
    for _ in range(n):
        if not gens:
            gens.append(int(rng.integers(1, max_gen + 1)))
        else:
            # uniform over the max_gen - 1 generators different from the last
            g = int(rng.integers(1, max_gen))
            gens.append(g if g < gens[-1] else g + 1)
    return gens


def random_word(seed, max_blocks: int = 4, max_exp: int = 3, max_gen: int = 3) -> FreeWord:
    """Sample a reduced ``FreeWord``; deterministic for a fixed integer seed.

    The block count is uniform on ``0..max_blocks``; generators never repeat
    in adjacent blocks; exponents are uniform on ``[-max_exp, max_exp] \\ {0}``.
    """
    if max_exp < 1:
        raise ValueError("max_exp must be >= 1")
    rng = _rng(seed)
    gens = _sample_structure(rng, max_blocks, max_gen)
    blocks = []
    for g in gens:
        k = int(rng.integers(1, max_exp + 1)) * (1 if rng.random() < 0.5 else -1)
        blocks.append((g, k))
    return FreeWord._raw(tuple(blocks))


def random_real_word(seed, max_blocks: int = 4, max_gen: int = 3, grid: float | None = 0.5,
                     max_abs: float = 2.0) -> RealFreeWord:
    """Sample a reduced ``RealFreeWord``.

    With `grid` set, exponents are nonzero multiples of `grid` in
    ``[-max_abs, max_abs]`` so that products of sampled words cancel often;
    with ``grid=None`` they are continuous.
    """
    rng = _rng(seed)
    gens = _sample_structure(rng, max_blocks, max_gen)
    blocks = []
    for g in gens:
        blocks.append((g, _real_exponent(rng, grid, max_abs)))
    return RealFreeWord._raw(tuple(blocks))


def _real_exponent(rng, grid, max_abs) -> float:
    if grid is None:
        while True:
            v = float(rng.uniform(-max_abs, max_abs))
            if v != 0.0:
                return v
    steps = max(1, int(max_abs / grid))
    return float(rng.integers(1, steps + 1)) * grid * (1 if rng.random() < 0.5 else -1)


def random_coord_vector(seed, max_support: int = 4, max_coord: int = 5, grid: float | None = 0.5,
                        max_abs: float = 2.0) -> CoordVector:
    rng = _rng(seed)
    n = int(rng.integers(0, min(max_support, max_coord) + 1))
    coords = rng.choice(np.arange(1, max_coord + 1), size=n, replace=False)
    return CoordVector({int(c): _real_exponent(rng, grid, max_abs) for c in coords})
