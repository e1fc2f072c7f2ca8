"""Finite labeled-graph presentations of one-sided sofic shifts.

A presentation is a finite directed graph whose edges carry symbols. The
shift space ``X`` is the set of label sequences of right-infinite paths, and
the dynamics is the one-sided shift dropping the first symbol.

Symbols and vertices are strings on input and are interned to dense integer
ids, ordered lexicographically by name, so every downstream output is
reproducible. Vertex sets are ``frozenset`` objects of vertex ids.

Points of ``X`` are handled through :class:`EpPoint`, eventually periodic rays
``u v v v ...``; they are the finitely representable points and are dense in
``X``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

import jsonschema

from .errors import DepthError, EmptyShiftError, PresentationError

__all__ = [
    "Edge",
    "Presentation",
    "EpPoint",
    "Potential",
    "parse_presentation",
    "load_presentation",
    "parse_potential",
    "load_potential",
    "essentialize",
    "is_essential",
    "higher_block",
    "recode_point",
    "decode_point",
    "recode_potential",
    "readable_from",
    "admissible_words",
    "norm_inf",
    "normalize_ep",
    "random_point",
]

_NAME = {"type": ["string", "integer"]}

PRESENTATION_SCHEMA = {
    "type": "object",
    "required": ["alphabet", "vertices", "edges"],
    "properties": {
        "alphabet": {"type": "array", "items": _NAME},
        "vertices": {"type": "array", "items": _NAME},
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["src", "dst", "label"],
                "properties": {"src": _NAME, "dst": _NAME, "label": _NAME},
            },
        },
    },
}

POTENTIAL_SCHEMA = {
    "type": "object",
    "required": ["kind", "table"],
    "properties": {
        "kind": {"enum": ["label", "cover"]},
        "depth": {"type": "integer", "minimum": 1},
        "table": {"type": "object", "additionalProperties": {"type": "number"}},
        "default": {"type": "number"},
    },
}


class Edge(NamedTuple):
    src: int
    dst: int
    label: int


@dataclass(frozen=True)
class Presentation:
    """Labeled graph with interned, lexicographically ordered ids.

    Use :meth:`from_names` to build one from string names; the raw
    constructor assumes ids are already valid and sorted.
    """

    alphabet: tuple[str, ...]
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]

    @classmethod
    def from_names(
        cls,
        edges: Iterable[tuple[str, str, str]],
        alphabet: Iterable[str] | None = None,
        vertices: Iterable[str] | None = None,
    ) -> "Presentation":
        edges = [(str(s), str(d), str(a)) for s, d, a in edges]
        if alphabet is None:
            alphabet = {a for _, _, a in edges}
        if vertices is None:
            vertices = {v for s, d, _ in edges for v in (s, d)}
        alphabet = [str(a) for a in alphabet]
        vertices = [str(v) for v in vertices]
        if len(set(alphabet)) != len(alphabet):
            raise PresentationError("duplicate symbol in alphabet")
        if len(set(vertices)) != len(vertices):
            raise PresentationError("duplicate vertex name")
        if not vertices or not alphabet or not edges:
            raise PresentationError("empty graph")
        alph = tuple(sorted(alphabet))
        verts = tuple(sorted(vertices))
        sidx = {a: i for i, a in enumerate(alph)}
        vidx = {v: i for i, v in enumerate(verts)}
        interned = []
        for s, d, a in edges:
            if s not in vidx or d not in vidx:
                raise PresentationError(f"dangling reference: edge {s}-{a}->{d} uses an undeclared vertex")
            if a not in sidx:
                raise PresentationError(f"dangling reference: edge {s}-{a}->{d} uses an undeclared symbol")
            interned.append(Edge(vidx[s], vidx[d], sidx[a]))
        if len(set(interned)) != len(interned):
            raise PresentationError("duplicate edge (same src, dst and label)")
        return cls(alph, verts, tuple(sorted(interned)))

    # -- lookups -----------------------------------------------------------

    @cached_property
    def symbol_index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.alphabet)}

    @cached_property
    def vertex_index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @property
    def all_vertices(self) -> frozenset[int]:
        return frozenset(range(len(self.vertices)))

    @cached_property
    def single_char(self) -> bool:
        return all(len(a) == 1 for a in self.alphabet)

    @cached_property
    def _pre_table(self) -> tuple[tuple[frozenset[int], ...], ...]:
        table = [[set() for _ in self.vertices] for _ in self.alphabet]
        for e in self.edges:
            table[e.label][e.dst].add(e.src)
        return tuple(tuple(frozenset(s) for s in row) for row in table)

    @cached_property
    def out_edges(self) -> tuple[tuple[Edge, ...], ...]:
        out = [[] for _ in self.vertices]
        for e in self.edges:
            out[e.src].append(e)
        return tuple(tuple(x) for x in out)

    def pre(self, a: int, targets: frozenset[int]) -> frozenset[int]:
        """Vertices with an ``a``-labeled edge into ``targets``."""
        row = self._pre_table[a]
        out: set[int] = set()
        for t in targets:
            out |= row[t]
        return frozenset(out)

    def pre_word(self, word: Sequence[int], targets: frozenset[int]) -> frozenset[int]:
        S = targets
        for a in reversed(word):
            if not S:
                break
            S = self.pre(a, S)
        return S

    # -- words and names ---------------------------------------------------

    def tokenize(self, text: str) -> tuple[str, ...]:
        if self.single_char:
            return tuple(ch for ch in text if not ch.isspace())
        return tuple(text.split())

    def word(self, w: str | Sequence[str]) -> tuple[int, ...]:
        """Symbol ids of ``w`` (a string or a sequence of symbol names)."""
        names = self.tokenize(w) if isinstance(w, str) else tuple(str(a) for a in w)
        try:
            return tuple(self.symbol_index[a] for a in names)
        except KeyError as exc:
            raise PresentationError(f"unknown symbol {exc.args[0]!r}") from None

    def word_names(self, ids: Sequence[int]) -> tuple[str, ...]:
        return tuple(self.alphabet[a] for a in ids)

    def format_word(self, names: Sequence[str]) -> str:
        return _format_word(names, self.single_char)

    def set_name(self, S: Iterable[int]) -> str:
        return "{" + ",".join(self.vertices[v] for v in sorted(S)) + "}"

    def vertex_names(self, S: Iterable[int]) -> frozenset[str]:
        return frozenset(self.vertices[v] for v in S)

    def to_dict(self) -> dict:
        return {
            "alphabet": list(self.alphabet),
            "vertices": list(self.vertices),
            "edges": [
                {"src": self.vertices[e.src], "dst": self.vertices[e.dst], "label": self.alphabet[e.label]}
                for e in self.edges
            ],
        }


def _format_word(names: Sequence[str], single_char: bool) -> str:
    return "".join(names) if single_char else " ".join(names)


# ---------------------------------------------------------------------------
# Eventually periodic points


def normalize_ep(prefix: tuple, cycle: tuple) -> tuple[tuple, tuple]:
    """Minimal period, then minimal preperiod, of ``prefix cycle cycle ...``."""
    if not cycle:
        raise ValueError("period must be nonempty")
    p = len(cycle)
    for d in range(1, p + 1):
        if p % d == 0 and cycle == cycle[:d] * (p // d):
            cycle = cycle[:d]
            break
    while prefix and prefix[-1] == cycle[-1]:
        cycle = cycle[-1:] + cycle[:-1]
        prefix = prefix[:-1]
    return prefix, cycle


_EP_RE = re.compile(r"^\s*(.*?)\s*\(\s*(.*?)\s*\)\s*$", re.S)


@dataclass(frozen=True, order=True)
class EpPoint:
    """The ray ``preperiod + period + period + ...`` over symbol names.

    Stored in normal form (minimal period, then minimal preperiod), so two
    EpPoints are equal exactly when they denote the same ray.
    """

    preperiod: tuple[str, ...]
    period: tuple[str, ...]

    def __post_init__(self):
        pre = tuple(str(a) for a in self.preperiod)
        per = tuple(str(a) for a in self.period)
        if not per:
            raise PresentationError("EpPoint period must be a nonempty word")
        pre, per = normalize_ep(pre, per)
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", per)

    @classmethod
    def parse(cls, text: str, g: Presentation | None = None) -> "EpPoint":
        """Parse the literal ``"u(v)"``, e.g. ``"01(0)"`` for 0 1 0 0 0 ...

        With multi-character symbols, separate symbols by whitespace:
        ``"ab cd (ef)"``.
        """
        m = _EP_RE.match(text)
        if not m:
            raise PresentationError(f"bad EpPoint literal {text!r}; expected 'u(v)'")
        u, v = m.groups()
        if g is not None:
            return cls(g.tokenize(u), g.tokenize(v))
        split = (lambda s: tuple(s.split())) if any(ch.isspace() for ch in text.strip()) else tuple
        return cls(split(u), split(v))

    def symbol(self, n: int) -> str:
        k = len(self.preperiod)
        if n < k:
            return self.preperiod[n]
        return self.period[(n - k) % len(self.period)]

    def prefix(self, n: int) -> tuple[str, ...]:
        return tuple(self.symbol(i) for i in range(n))

    def shift(self, n: int = 1) -> "EpPoint":
        k = len(self.preperiod)
        if n <= k:
            return EpPoint(self.preperiod[n:], self.period)
        r = (n - k) % len(self.period)
        return EpPoint((), self.period[r:] + self.period[:r])

    def prepend(self, word: Sequence[str]) -> "EpPoint":
        return EpPoint(tuple(word) + self.preperiod, self.period)

    def __str__(self) -> str:
        single = all(len(a) == 1 for a in self.preperiod + self.period)
        if single:
            return "".join(self.preperiod) + "(" + "".join(self.period) + ")"
        u = " ".join(self.preperiod)
        return (u + " " if u else "") + "(" + " ".join(self.period) + ")"


# ---------------------------------------------------------------------------
# Potentials


def _exact(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise PresentationError("potential values must be numbers")
    if isinstance(value, (int, Decimal)):
        out = Fraction(value)
    elif isinstance(value, float):
        out = Fraction(repr(value))
    elif isinstance(value, str):
        out = Fraction(Decimal(value))
    else:
        raise PresentationError(f"potential value {value!r} is not a number")
    return out


@dataclass(frozen=True, eq=False)
class Potential:
    """Locally constant real function.

    ``kind="label"``: the value at a point depends on its first ``depth``
    symbols; table keys are words (strings such as ``"01"`` or tuples of
    symbol names). ``kind="cover"``: the value depends on the first cover
    vertex; keys are cover vertex names such as ``"{A,B}"``.

    Values are kept as exact fractions of the decimals that were read.
    ``default`` (optional) fills keys absent from the table.
    """

    kind: str
    table: Mapping
    depth: int = 1
    default: Fraction | None = None

    def __post_init__(self):
        if self.kind not in ("label", "cover"):
            raise PresentationError(f"unknown potential kind {self.kind!r}")
        if not isinstance(self.depth, int) or self.depth < 1:
            raise DepthError("potential depth must be an integer >= 1")
        table = {k: _exact(v) for k, v in dict(self.table).items()}
        object.__setattr__(self, "table", table)
        if self.default is not None:
            object.__setattr__(self, "default", _exact(self.default))
        if not table and self.default is None:
            raise PresentationError("potential table is empty")

    @classmethod
    def constant(cls, value, depth: int = 1, kind: str = "label") -> "Potential":
        return cls(kind, {}, depth, default=value)

    @property
    def norm_inf(self) -> float:
        vals = list(self.table.values())
        if self.default is not None:
            vals.append(self.default)
        return float(max(abs(v) for v in vals))

    def is_constant(self) -> bool:
        vals = set(self.table.values())
        if self.default is not None:
            vals.add(self.default)
        return len(vals) == 1

    def resolve(self, g: Presentation) -> dict[tuple[int, ...], Fraction]:
        """Exact values on every admissible word of length ``depth`` of ``g``.

        Raises :class:`PresentationError` when the table is not total there.
        Keys for inadmissible words are ignored.
        """
        if self.kind != "label":
            raise DepthError("resolve() is for label potentials; use resolve_cover()")
        keyed: dict[tuple[int, ...], Fraction] = {}
        for key, val in self.table.items():
            w = g.word(key)
            if len(w) != self.depth:
                raise DepthError(f"table key {key!r} has length {len(w)}, expected {self.depth}")
            keyed[w] = val
        out = {}
        for w in sorted(admissible_words(g, self.depth)):
            if w in keyed:
                out[w] = keyed[w]
            elif self.default is not None:
                out[w] = self.default
            else:
                raise PresentationError(
                    f"potential table is not total: missing word {g.format_word(g.word_names(w))!r}"
                )
        return out

    def resolve_cover(self, names: Sequence[str]) -> list[Fraction]:
        if self.kind != "cover":
            raise DepthError("resolve_cover() needs a cover potential")
        out = []
        for name in names:
            if name in self.table:
                out.append(self.table[name])
            elif self.default is not None:
                out.append(self.default)
            else:
                raise PresentationError(f"potential table is not total: missing cover vertex {name!r}")
        return out

    def to_dict(self) -> dict:
        doc = {"kind": self.kind, "depth": self.depth}
        doc["table"] = {
            (k if isinstance(k, str) else "".join(k) if all(len(a) == 1 for a in k) else " ".join(k)): float(v)
            for k, v in self.table.items()
        }
        if self.default is not None:
            doc["default"] = float(self.default)
        return doc


def norm_inf(F: Potential) -> float:
    """Sup-norm of a potential: the largest absolute table value."""
    return F.norm_inf


# ---------------------------------------------------------------------------
# Parsing


def _as_document(doc):
    if isinstance(doc, Path):
        doc = doc.read_text()
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc, parse_float=Decimal)
        except json.JSONDecodeError as exc:
            raise PresentationError(f"schema violation: not JSON ({exc})") from None
    return doc


def parse_presentation(doc) -> Presentation:
    """Validate a JSON presentation document (text, mapping or Path).

    Schema: ``{"alphabet": [...], "vertices": [...],
    "edges": [{"src": .., "dst": .., "label": ..}, ...]}``.
    """
    doc = _as_document(doc)
    try:
        jsonschema.validate(doc, PRESENTATION_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise PresentationError(f"schema violation: {exc.message}") from None
    edges = [(e["src"], e["dst"], e["label"]) for e in doc["edges"]]
    return Presentation.from_names(edges, doc["alphabet"], doc["vertices"])


def load_presentation(path) -> Presentation:
    return parse_presentation(Path(path))


def parse_potential(doc) -> Potential:
    """Validate a JSON potential document.

    Schema: ``{"kind": "label"|"cover", "depth": k, "table": {"word": value}}``
    plus an optional ``"default"`` value for keys missing from the table.
    """
    doc = _as_document(doc)
    plain = json.loads(json.dumps(doc, default=float))
    try:
        jsonschema.validate(plain, POTENTIAL_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise PresentationError(f"schema violation: {exc.message}") from None
    return Potential(
        doc["kind"],
        doc["table"],
        int(doc.get("depth", 1)),
        default=doc.get("default"),
    )


def load_potential(path) -> Potential:
    return parse_potential(Path(path))


# ---------------------------------------------------------------------------
# Graph operations


def is_essential(g: Presentation) -> bool:
    has_in = {e.dst for e in g.edges}
    has_out = {e.src for e in g.edges}
    return len(has_in) == len(has_out) == len(g.vertices) and has_in == has_out


def essentialize(g: Presentation) -> Presentation:
    """Largest subgraph in which every vertex has an in-edge and an out-edge.

    The alphabet is kept as declared. Raises :class:`EmptyShiftError` when
    nothing survives.
    """
    alive = set(range(len(g.vertices)))
    edges = list(g.edges)
    while True:
        edges = [e for e in edges if e.src in alive and e.dst in alive]
        keep = {e.src for e in edges} & {e.dst for e in edges}
        if keep == alive:
            break
        alive = keep
    if not alive:
        raise EmptyShiftError("presentation presents the empty shift")
    if len(alive) == len(g.vertices):
        return g
    names = [(g.vertices[e.src], g.vertices[e.dst], g.alphabet[e.label]) for e in edges]
    return Presentation.from_names(names, g.alphabet, [g.vertices[v] for v in alive])


def _paths(g: Presentation, length: int) -> list[tuple[int, ...]]:
    """All paths with ``length`` edges, as tuples of edge indices."""
    index = {e: i for i, e in enumerate(g.edges)}
    paths: list[tuple[int, ...]] = [(i,) for i in range(len(g.edges))]
    if length == 0:
        return []
    for _ in range(length - 1):
        paths = [p + (index[e],) for p in paths for e in g.out_edges[g.edges[p[-1]].dst]]
    return paths


def admissible_words(g: Presentation, k: int) -> set[tuple[int, ...]]:
    """Labels of all length-``k`` paths (for essential ``g``: the length-k words of X)."""
    if k == 0:
        return {()}
    return {tuple(g.edges[i].label for i in p) for p in _paths(g, k)}


def _unique_names(names: list[str], fallback: list[str]) -> list[str]:
    return names if len(set(names)) == len(names) else fallback


def higher_block(g: Presentation, k: int) -> tuple[Presentation, dict[str, tuple[str, ...]]]:
    """Recode ``g`` so its symbols are the admissible length-``k`` words.

    For ``k >= 2`` the vertices of the result are the paths of ``k`` edges of
    ``g``; a path of ``k + 1`` edges becomes an edge from its first ``k``
    edges to its last ``k`` edges, labeled by the word read along its first
    ``k`` edges. The label sequence of a walk is then the sequence of
    ``k``-blocks of the original label sequence. The returned word map sends
    each new symbol to the old word it stands for. ``k = 1`` returns ``g``.
    """
    if not isinstance(k, int) or k < 1:
        raise DepthError("higher_block needs k >= 1")
    if not is_essential(g):
        raise PresentationError("higher_block needs an essential presentation")
    if k == 1:
        return g, {a: (a,) for a in g.alphabet}

    def path_name(p: tuple[int, ...]) -> str:
        parts = [g.vertices[g.edges[p[0]].src]]
        for i in p:
            e = g.edges[i]
            parts.append(f"-{g.alphabet[e.label]}->{g.vertices[e.dst]}")
        return "".join(parts)

    def path_word(p: tuple[int, ...]) -> tuple[str, ...]:
        return tuple(g.alphabet[g.edges[i].label] for i in p)

    vpaths = _paths(g, k)
    vnames = _unique_names([path_name(p) for p in vpaths], [repr(p) for p in vpaths])
    vname = dict(zip(vpaths, vnames))

    words = sorted({path_word(p) for p in vpaths})
    wnames = _unique_names(
        ["".join(w) if g.single_char else ".".join(w) for w in words],
        [repr(w) for w in words],
    )
    wname = dict(zip(words, wnames))

    new_edges = [
        (vname[p[:-1]], vname[p[1:]], wname[path_word(p[:-1])]) for p in _paths(g, k + 1)
    ]
    hb = Presentation.from_names(new_edges, wnames, vnames)
    return hb, {wname[w]: w for w in words}


def recode_point(x: EpPoint, word_map: Mapping[str, tuple[str, ...]]) -> EpPoint:
    """k-block recoding of ``x`` using the word map of :func:`higher_block`."""
    inverse = {w: a for a, w in word_map.items()}
    k = len(next(iter(word_map.values())))
    n0 = len(x.preperiod)

    def block(n: int) -> str:
        w = x.prefix(n + k)[n:]
        if w not in inverse:
            raise PresentationError(f"word {w} is not admissible")
        return inverse[w]

    return EpPoint(
        tuple(block(n) for n in range(n0)),
        tuple(block(n) for n in range(n0, n0 + len(x.period))),
    )


def decode_point(y: EpPoint, word_map: Mapping[str, tuple[str, ...]]) -> EpPoint:
    """Inverse of :func:`recode_point`: keep the first symbol of each block."""
    return EpPoint(
        tuple(word_map[a][0] for a in y.preperiod),
        tuple(word_map[a][0] for a in y.period),
    )


def recode_potential(F: Potential, g: Presentation, word_map: Mapping[str, tuple[str, ...]]) -> Potential:
    """Depth-``k`` label potential on ``g`` as a depth-1 potential on its k-block recoding."""
    if F.kind != "label":
        raise DepthError("only label potentials can be recoded")
    k = len(next(iter(word_map.values())))
    if F.depth != k:
        raise DepthError(f"potential depth {F.depth} does not match block length {k}")
    values = F.resolve(g)
    table = {}
    for a, w in word_map.items():
        table[(a,)] = values[g.word(w)]
    return Potential("label", table, 1)


# ---------------------------------------------------------------------------
# Points in X


def readable_from(g: Presentation, x: EpPoint) -> frozenset[int]:
    """Ids of the vertices from which the ray ``x`` is readable.

    Iterates the predecessor map of the period word from the full vertex set
    until it stabilizes (the sets decrease, so at most ``|V|`` rounds), then
    pulls back along the preperiod. Empty means ``x`` is not in X.
    """
    try:
        u = g.word(x.preperiod)
        v = g.word(x.period)
    except PresentationError:
        return frozenset()
    S = g.all_vertices
    while True:
        nxt = g.pre_word(v, S)
        if nxt == S:
            break
        S = nxt
    return g.pre_word(u, S)


def random_point(g: Presentation, rng, max_preperiod: int = 4) -> EpPoint:
    """Random EpPoint of X drawn by a random walk on the essential graph ``g``.

    ``rng`` is a :class:`random.Random`.
    """
    v = rng.randrange(len(g.vertices))
    labels: list[str] = []
    for _ in range(rng.randint(0, max_preperiod)):
        e = rng.choice(g.out_edges[v])
        labels.append(g.alphabet[e.label])
        v = e.dst
    seen = {v: 0}
    walk: list[str] = []
    while True:
        e = rng.choice(g.out_edges[v])
        walk.append(g.alphabet[e.label])
        v = e.dst
        if v in seen:
            start = seen[v]
            return EpPoint(tuple(labels + walk[:start]), tuple(walk[start:]))
        seen[v] = len(walk)
