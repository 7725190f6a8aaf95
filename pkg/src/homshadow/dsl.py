"""Text format for automorphisms and train-track maps.

Rose mode::

    rank: 3
    map:
      a -> cbCbaBcBC
      b -> cbC
      c -> cbaBcbCbABcBC

Train-track mode::

    graph:
      e1: v0 -> v1
      e2: v1 -> v0
    basepoint: v0
    gates:
      v0: {e1+} {e2-}
    ttmap:
      e1 -> e2 e1^-1

Optional sections: ``inverse:`` (rose mode), ``gates:``, ``conjugator:`` and
``conjugator_inverse:`` (maps on the free group read by the spanning tree,
whose generators are a, b, c, ... in the order of the non-tree edges),
``seeds:``, ``length:`` (``unit``, ``train`` or one rational per edge) and
``iterations:`` (``K`` or ``K0..K1``).  ``#`` starts a comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .graphs import DirectedGraph, GraphError, GraphMap, MarkedGraph
from .words import Automorphism, Word, format_letters

KEYWORDS = (
    "rank",
    "map",
    "inverse",
    "graph",
    "basepoint",
    "gates",
    "ttmap",
    "conjugator",
    "conjugator_inverse",
    "seeds",
    "length",
    "iterations",
)

_HEADER = re.compile(r"^(\s*)([A-Za-z_][A-Za-z_0-9]*)\s*:(.*)$")


class DSLError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.message = message


@dataclass
class _Line:
    text: str
    line: int
    col: int  # column (1-based) of text[0] in the source


@dataclass
class ParsedInput:
    """Raw contents of an input file, before any group theory is checked."""

    mode: str  # "rose" or "traintrack"
    rank: int | None = None
    images: list[str] = field(default_factory=list)
    inverse: list[str] | None = None
    vertices: list[str] = field(default_factory=list)
    edges: list[tuple[str, str, str]] = field(default_factory=list)
    basepoint: str | None = None
    gates: dict[str, list[list[tuple[str, int]]]] | None = None
    ttmap: list[list[tuple[str, int]]] = field(default_factory=list)
    conjugator: list[str] | None = None
    conjugator_inverse: list[str] | None = None
    seeds: list[str] = field(default_factory=lambda: ["a"])
    length: str | list[Fraction] = "unit"
    iterations: tuple[int, int] = (1, 8)


def _split_sections(text: str) -> dict[str, list[_Line]]:
    sections: dict[str, list[_Line]] = {}
    current = None
    for n, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        m = _HEADER.match(body)
        if m and m.group(2) in KEYWORDS:
            name = m.group(2)
            if name in sections:
                raise DSLError(f"section {name!r} appears twice", n, len(m.group(1)) + 1)
            sections[name] = []
            current = name
            rest = m.group(3)
            if rest.strip():
                col = m.start(3) + 1 + (len(rest) - len(rest.lstrip()))
                sections[name].append(_Line(rest.strip(), n, col))
            continue
        if current is None:
            raise DSLError("content before the first section header", n, 1)
        stripped = body.lstrip()
        sections[current].append(_Line(stripped, n, len(body) - len(stripped) + 1))
    return sections


def _check_case_word(ln: _Line, word_text: str, offset: int, rank: int) -> str:
    letters = []
    for i, ch in enumerate(word_text):
        col = ln.col + offset + i
        if ch.isspace():
            continue
        if not ch.isalpha() or not ch.isascii():
            raise DSLError(f"bad letter {ch!r}", ln.line, col)
        g = ord(ch.lower()) - ord("a") + 1
        if g > rank:
            raise DSLError(f"unknown generator {ch!r} (rank {rank})", ln.line, col)
        x = g if ch.islower() else -g
        if letters and letters[-1][0] == -x:
            raise DSLError(f"image is not reduced at {ch!r}", ln.line, col)
        letters.append((x, col))
    if word_text.strip() == "1":
        return ""
    return format_letters([x for x, _ in letters])


def _parse_map(lines: list[_Line], rank: int, what: str) -> list[str]:
    images: dict[int, str] = {}
    for ln in lines:
        if "->" not in ln.text:
            raise DSLError(f"expected 'x -> word' in {what}", ln.line, ln.col)
        lhs, rhs = ln.text.split("->", 1)
        name = lhs.strip()
        if len(name) != 1 or not ("a" <= name <= "z"):
            raise DSLError(f"left side must be one lowercase generator, got {name!r}", ln.line, ln.col)
        g = ord(name) - ord("a") + 1
        if g > rank:
            raise DSLError(f"unknown generator {name!r} (rank {rank})", ln.line, ln.col)
        if g in images:
            raise DSLError(f"generator {name!r} mapped twice", ln.line, ln.col)
        offset = ln.text.index("->") + 2
        body = rhs.strip()
        lead = len(rhs) - len(rhs.lstrip())
        if body == "1":
            images[g] = ""
        else:
            images[g] = _check_case_word(ln, body, offset + lead, rank)
    missing = [format_letters([g]) for g in range(1, rank + 1) if g not in images]
    if missing:
        where = lines[-1] if lines else _Line("", 0, 1)
        raise DSLError(f"{what} has no image for {', '.join(missing)}", where.line, 1)
    return [images[g] for g in range(1, rank + 1)]


_END = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)([+-])$")
_STEP = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)(\^-1)?$")


def parse_text(text: str) -> ParsedInput:
    sec = _split_sections(text)
    if "map" in sec and "graph" in sec:
        ln = sec["graph"][0] if sec["graph"] else _Line("", 1, 1)
        raise DSLError("use either map: or graph:, not both", ln.line, 1)
    if "map" not in sec and "graph" not in sec:
        raise DSLError("missing map: or graph: section", 1, 1)
    out = ParsedInput(mode="rose" if "map" in sec else "traintrack")
    if out.mode == "rose":
        if "rank" in sec:
            ln = sec["rank"][0]
            if not ln.text.isdigit() or int(ln.text) < 1:
                raise DSLError("rank must be a positive integer", ln.line, ln.col)
            out.rank = int(ln.text)
        else:
            out.rank = len(sec["map"])
        if out.rank > 26:
            raise DSLError("case notation supports rank at most 26", sec["rank"][0].line, 1)
        out.images = _parse_map(sec["map"], out.rank, "map")
        if "inverse" in sec:
            out.inverse = _parse_map(sec["inverse"], out.rank, "inverse")
        out.vertices = ["v0"]
        out.edges = [(format_letters([i]), "v0", "v0") for i in range(1, out.rank + 1)]
        out.basepoint = "v0"
    else:
        for ln in sec["graph"]:
            m = re.match(r"^([A-Za-z_][A-Za-z_0-9]*)\s*:\s*([A-Za-z_0-9]+)\s*->\s*([A-Za-z_0-9]+)$", ln.text)
            if not m:
                raise DSLError("expected 'edge: vertex -> vertex'", ln.line, ln.col)
            name, a, b = m.groups()
            if name in KEYWORDS:
                raise DSLError(f"{name!r} is reserved", ln.line, ln.col)
            if any(e[0] == name for e in out.edges):
                raise DSLError(f"edge {name!r} declared twice", ln.line, ln.col)
            for v in (a, b):
                if v not in out.vertices:
                    out.vertices.append(v)
            out.edges.append((name, a, b))
        if not out.edges:
            raise DSLError("graph has no edges", 1, 1)
        if "basepoint" in sec:
            ln = sec["basepoint"][0]
            if ln.text not in out.vertices:
                raise DSLError(f"unknown vertex {ln.text!r}", ln.line, ln.col)
            out.basepoint = ln.text
        else:
            out.basepoint = out.vertices[0]
        if "ttmap" not in sec:
            raise DSLError("missing ttmap: section", 1, 1)
        names = [e[0] for e in out.edges]
        imgs: dict[str, list] = {}
        for ln in sec["ttmap"]:
            if "->" not in ln.text:
                raise DSLError("expected 'edge -> path'", ln.line, ln.col)
            lhs, rhs = ln.text.split("->", 1)
            name = lhs.strip()
            if name not in names:
                raise DSLError(f"unknown edge {name!r}", ln.line, ln.col)
            if name in imgs:
                raise DSLError(f"edge {name!r} mapped twice", ln.line, ln.col)
            steps = []
            pos = ln.text.index("->") + 2
            for m in re.finditer(r"\S+", ln.text[pos:]):
                col = ln.col + pos + m.start()
                tok = _STEP.match(m.group(0))
                if not tok or tok.group(1) not in names:
                    raise DSLError(f"unknown edge {m.group(0)!r}", ln.line, col)
                step = (tok.group(1), -1 if tok.group(2) else 1)
                if steps and steps[-1] == (step[0], -step[1]):
                    raise DSLError("edge image is not reduced", ln.line, col)
                steps.append(step)
            if not steps:
                raise DSLError("edge image is empty", ln.line, ln.col)
            imgs[name] = steps
        missing = [n for n in names if n not in imgs]
        if missing:
            raise DSLError(f"ttmap has no image for {', '.join(missing)}", sec["ttmap"][-1].line, 1)
        out.ttmap = [imgs[n] for n in names]
    if "gates" in sec:
        names = [e[0] for e in out.edges]
        gates: dict[str, list] = {}
        for ln in sec["gates"]:
            m = re.match(r"^([A-Za-z_0-9]+)\s*:(.*)$", ln.text)
            if not m or m.group(1) not in out.vertices:
                raise DSLError("expected 'vertex: {end, ...} {end, ...}'", ln.line, ln.col)
            classes = []
            body = m.group(2)
            base = ln.col + m.start(2)
            rest = re.sub(r"\{[^{}]*\}", "", body)
            if rest.strip():
                raise DSLError("gates must be written as {...} groups", ln.line, base + body.index(rest.strip()[0]))
            for g in re.finditer(r"\{([^{}]*)\}", body):
                cls = []
                for t in re.finditer(r"[^,\s]+", g.group(1)):
                    e = _END.match(t.group(0))
                    col = base + g.start(1) + t.start()
                    if not e or e.group(1) not in names:
                        raise DSLError(f"bad edge end {t.group(0)!r}", ln.line, col)
                    cls.append((e.group(1), 1 if e.group(2) == "+" else -1))
                classes.append(cls)
            gates[m.group(1)] = classes
        out.gates = gates
    n_free = None
    for key in ("conjugator", "conjugator_inverse"):
        if key in sec:
            if n_free is None:
                n_free = _free_rank(out)
            setattr(out, key, _parse_map(sec[key], n_free, key))
    if (out.conjugator is None) != (out.conjugator_inverse is None):
        raise DSLError("conjugator and conjugator_inverse must be given together", 1, 1)
    if "seeds" in sec:
        n = _free_rank(out)
        seeds = []
        for ln in sec["seeds"]:
            for m in re.finditer(r"[^,\s]+", ln.text):
                w = _check_case_word(ln, m.group(0), m.start(), n)
                if not w:
                    raise DSLError("seed words must be nontrivial", ln.line, ln.col + m.start())
                seeds.append(w)
        out.seeds = seeds
    if "length" in sec:
        ln = sec["length"][0]
        text = " ".join(l.text for l in sec["length"])
        if text in ("unit", "train"):
            out.length = text
        else:
            try:
                vals = [Fraction(t) for t in re.split(r"[,\s]+", text) if t]
            except (ValueError, ZeroDivisionError):
                raise DSLError("length must be unit, train or a list of rationals", ln.line, ln.col) from None
            if len(vals) != len(out.edges) or any(v <= 0 for v in vals):
                raise DSLError("need one positive length per edge", ln.line, ln.col)
            out.length = vals
    if "iterations" in sec:
        ln = sec["iterations"][0]
        m = re.match(r"^(\d+)(?:\s*\.\.\s*(\d+))?$", ln.text)
        if not m:
            raise DSLError("iterations must be K or K0..K1", ln.line, ln.col)
        lo, hi = (1, int(m.group(1))) if m.group(2) is None else (int(m.group(1)), int(m.group(2)))
        if lo < 1 or hi < lo:
            raise DSLError("iteration range must satisfy 1 <= K0 <= K1", ln.line, ln.col)
        out.iterations = (lo, hi)
    return out


def _free_rank(p: ParsedInput) -> int:
    if p.mode == "rose":
        return p.rank
    return len(p.edges) - len(p.vertices) + 1


def serialize(p: ParsedInput) -> str:
    """Canonical text; ``parse_text(serialize(p))`` reproduces ``p``."""
    lines = []
    if p.mode == "rose":
        lines.append(f"rank: {p.rank}")
        lines.append("map:")
        lines += [f"  {format_letters([i])} -> {w or '1'}" for i, w in enumerate(p.images, start=1)]
        if p.inverse is not None:
            lines.append("inverse:")
            lines += [f"  {format_letters([i])} -> {w or '1'}" for i, w in enumerate(p.inverse, start=1)]
    else:
        lines.append("graph:")
        lines += [f"  {n}: {a} -> {b}" for n, a, b in p.edges]
        lines.append(f"basepoint: {p.basepoint}")
    if p.gates is not None:
        order = {e[0]: i for i, e in enumerate(p.edges)}
        lines.append("gates:")
        for v in p.vertices:
            if v not in p.gates:
                continue
            classes = [sorted(c, key=lambda t: (order[t[0]], -t[1])) for c in p.gates[v]]
            classes.sort(key=lambda c: (order[c[0][0]], -c[0][1]))
            body = " ".join("{" + ", ".join(f"{n}{'+' if s > 0 else '-'}" for n, s in c) + "}" for c in classes)
            lines.append(f"  {v}: {body}")
    if p.mode == "traintrack":
        lines.append("ttmap:")
        for (n, _, _), steps in zip(p.edges, p.ttmap):
            lines.append(f"  {n} -> " + " ".join(s if e > 0 else f"{s}^-1" for s, e in steps))
    if p.conjugator is not None:
        for key in ("conjugator", "conjugator_inverse"):
            lines.append(f"{key}:")
            lines += [f"  {format_letters([i])} -> {w or '1'}" for i, w in enumerate(getattr(p, key), start=1)]
    lines.append("seeds: " + " ".join(p.seeds))
    if isinstance(p.length, str):
        lines.append(f"length: {p.length}")
    else:
        lines.append("length: " + " ".join(str(x) for x in p.length))
    lines.append(f"iterations: {p.iterations[0]}..{p.iterations[1]}")
    return "\n".join(lines) + "\n"


def build_graph_map(p: ParsedInput) -> GraphMap:
    """Turn parsed input into a graph map (a rose map in rose mode)."""
    G = DirectedGraph(
        tuple((p.vertices.index(a), p.vertices.index(b)) for _, a, b in p.edges),
        len(p.vertices),
        tuple(p.vertices),
        tuple(e[0] for e in p.edges),
    )
    gates = None
    if p.gates is not None:
        gates = {}
        for v, classes in p.gates.items():
            gates[p.vertices.index(v)] = [{G.edge_index(n) * s for n, s in c} for c in classes]
    base = p.vertices.index(p.basepoint)
    try:
        marked = MarkedGraph(G, base, gates)
        if p.mode == "rose":
            from .words import parse_letters

            return GraphMap(marked, (0,), [parse_letters(w) for w in p.images])
        imgs = [[G.edge_index(n) * s for n, s in steps] for steps in p.ttmap]
        verts = [None] * G.n_vertices
        for e, steps in enumerate(imgs, start=1):
            a, b = G.edges[e - 1]
            for v, x in ((a, G.origin(steps[0])), (b, G.terminus(steps[-1]))):
                if verts[v] is None:
                    verts[v] = x
                elif verts[v] != x:
                    raise GraphError(f"edge images disagree on the image of vertex {G.vertex_names[v]}")
        return GraphMap(marked, verts, imgs)
    except GraphError as exc:
        raise DSLError(str(exc), 1, 1) from None


def parse_automorphism(images: list[str], inverse: list[str] | None = None) -> Automorphism:
    return Automorphism.parse(images, inverse)


def parse_seeds(p: ParsedInput) -> list[Word]:
    return [Word.parse(s) for s in p.seeds]
