"""Text documents describing spaces, algebras, DGLAs and related objects.

One self-describing line-oriented format: a ``kind:`` header followed by
named fields.  List fields open with ``field:`` and collect indented item
lines; subdocuments are bracketed by ``begin name`` / ``end name``.
Scalars are exact rationals written ``p`` or ``p/q``.  Unlisted structure
constants are zero.  Parsing is canonicalizing, so ``parse(print(x))``
returns an equal document for every valid document.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .algebras import (DgAlgebraMorphism, NilpotentDgAlgebra, SmallExtension,
                       kernel_extension)
from .dgla import Dgla
from .graded import Complex, GradedMap, GradedSpace, shift_space, symmetric_power
from .linfty import LInftyStructure
from .models import QuasismoothTrunc

KINDS = ("graded_space", "complex", "nilpotent_dg_algebra", "dgla", "linfty",
         "small_extension", "mc_element", "quasismooth")

Combo = Tuple[Tuple[str, Fraction], ...]


class DocumentError(ValueError):
    """A syntax or semantic error, located by line number."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)


@dataclass
class InputDocument:
    kind: str
    payload: Dict


# ---------------------------------------------------------------------------
# parsing

def _parse_rational(tok: str, line: int) -> Fraction:
    try:
        if "/" in tok:
            num, den = tok.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(int(tok))
    except (ValueError, ZeroDivisionError):
        raise DocumentError("invalid rational %r" % tok, line)


def _parse_combo(text: str, line: int) -> Combo:
    text = text.strip()
    if text == "0":
        return ()
    out: Dict[str, Fraction] = {}
    order: List[str] = []
    for term in text.split("+"):
        parts = term.split()
        if len(parts) != 2:
            raise DocumentError("term %r must be 'coeff name'" % term.strip(),
                                line)
        c = _parse_rational(parts[0], line)
        name = parts[1]
        if name not in out:
            out[name] = Fraction(0)
            order.append(name)
        out[name] += c
    return tuple((n, out[n]) for n in order if out[n])


def _split_lines(text: str) -> List[Tuple[int, str, bool]]:
    """(line number, stripped content, was-indented) with comments removed."""
    out = []
    for i, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        out.append((i, body.strip(), body[:1] in (" ", "\t")))
    return out


def parse(text: str) -> InputDocument:
    lines = _split_lines(text)
    doc, pos = _parse_block(lines, 0, None)
    if pos != len(lines):
        raise DocumentError("unexpected content after document end",
                            lines[pos][0])
    return doc


def _parse_block(lines, pos: int, until: Optional[str]) -> Tuple[InputDocument, int]:
    kind: Optional[str] = None
    raw: Dict[str, object] = {}
    current: Optional[str] = None
    while pos < len(lines):
        lno, body, indented = lines[pos]
        if until is not None and body == "end " + until:
            break
        if indented:
            if current is None:
                raise DocumentError("item line outside any field", lno)
            raw[current].append((lno, body))
            pos += 1
            continue
        current = None
        if body.startswith("begin "):
            name = body[6:].strip()
            if not name:
                raise DocumentError("begin requires a field name", lno)
            sub, pos = _parse_block(lines, pos + 1, name)
            if pos >= len(lines) or lines[pos][1] != "end " + name:
                raise DocumentError("missing 'end %s'" % name, lno)
            raw[name] = sub
            pos += 1
            continue
        if ":" not in body:
            raise DocumentError("expected 'field:' or 'field: value'", lno)
        name, _, rest = body.partition(":")
        name = name.strip()
        rest = rest.strip()
        if name == "kind":
            if rest not in KINDS:
                raise DocumentError("unknown kind %r" % rest, lno)
            kind = rest
        elif rest:
            raw[name] = (lno, rest)
        else:
            raw[name] = []
            current = name
        pos += 1
    if kind is None:
        raise DocumentError("document has no 'kind' header",
                            lines[pos - 1][0] if pos else None)
    payload = _PAYLOAD_BUILDERS[kind](raw)
    return InputDocument(kind, payload), pos


def _take_basis(raw, fld="basis") -> Tuple[Tuple[str, int], ...]:
    items = raw.pop(fld, [])
    if not isinstance(items, list):
        raise DocumentError("'%s' must be a list field" % fld, items[0])
    basis = []
    seen = set()
    for lno, body in items:
        parts = body.split()
        if len(parts) != 2:
            raise DocumentError("basis item must be 'name degree'", lno)
        name, deg = parts
        try:
            deg = int(deg)
        except ValueError:
            raise DocumentError("degree %r is not an integer" % parts[1], lno)
        if name in seen:
            raise DocumentError("duplicate basis name %r" % name, lno)
        seen.add(name)
        basis.append((name, deg))
    return tuple(basis)


def _check_names(combo: Combo, names, lno: int) -> None:
    for n, _ in combo:
        if n not in names:
            raise DocumentError("unknown name %r" % n, lno)


def _take_map(raw, fld, src_names, dst_names) -> Dict[str, Combo]:
    items = raw.pop(fld, [])
    out: Dict[str, Combo] = {}
    for lno, body in items:
        lhs, arrow, rhs = body.partition("->")
        if not arrow:
            raise DocumentError("map item must be 'name -> combo'", lno)
        src = lhs.strip()
        if src not in src_names:
            raise DocumentError("unknown name %r" % src, lno)
        if src in out:
            raise DocumentError("duplicate image for %r" % src, lno)
        combo = _parse_combo(rhs, lno)
        _check_names(combo, dst_names, lno)
        if combo:
            out[src] = combo
    return out


def _take_table(raw, fld, names) -> Dict[Tuple[str, str], Combo]:
    items = raw.pop(fld, [])
    out: Dict[Tuple[str, str], Combo] = {}
    for lno, body in items:
        lhs, arrow, rhs = body.partition("->")
        if not arrow:
            raise DocumentError("table item must be 'name name -> combo'", lno)
        parts = lhs.split()
        if len(parts) != 2:
            raise DocumentError("left side must be two names", lno)
        for p in parts:
            if p not in names:
                raise DocumentError("unknown name %r" % p, lno)
        key = (parts[0], parts[1])
        if key in out:
            raise DocumentError("duplicate entry for %r" % (key,), lno)
        combo = _parse_combo(rhs, lno)
        _check_names(combo, names, lno)
        if combo:
            out[key] = combo
    return out


def _take_scalar_int(raw, fld, lno_default=None) -> Optional[int]:
    item = raw.pop(fld, None)
    if item is None:
        return None
    lno, text = item
    try:
        return int(text)
    except ValueError:
        raise DocumentError("%s must be an integer" % fld, lno)


def _finish(raw) -> None:
    for k, v in raw.items():
        lno = None
        if isinstance(v, list) and v:
            lno = v[0][0]
        elif isinstance(v, tuple):
            lno = v[0]
        raise DocumentError("unknown field %r" % k, lno)


def _payload_graded_space(raw) -> Dict:
    basis = _take_basis(raw)
    _finish(raw)
    return {"basis": basis}


def _payload_complex(raw) -> Dict:
    basis = _take_basis(raw)
    names = {n for n, _ in basis}
    d = _take_map(raw, "d", names, names)
    _finish(raw)
    return {"basis": basis, "d": d}


def _payload_algebra(raw) -> Dict:
    basis = _take_basis(raw)
    names = {n for n, _ in basis}
    d = _take_map(raw, "d", names, names)
    mult = _take_table(raw, "mult", names)
    _finish(raw)
    return {"basis": basis, "d": d, "mult": mult}


def _payload_dgla(raw) -> Dict:
    basis = _take_basis(raw)
    names = {n for n, _ in basis}
    d = _take_map(raw, "d", names, names)
    bracket = _take_table(raw, "bracket", names)
    nil = _take_scalar_int(raw, "nilpotency")
    _finish(raw)
    return {"basis": basis, "d": d, "bracket": bracket, "nilpotency": nil}


def _payload_linfty(raw) -> Dict:
    basis = _take_basis(raw)
    names = {n for n, _ in basis}
    order = _take_scalar_int(raw, "order")
    if order is None:
        raise DocumentError("linfty requires an 'order' field")
    items = raw.pop("taylor", [])
    taylor: Dict[Tuple[int, Tuple[str, ...]], Combo] = {}
    for lno, body in items:
        lhs, arrow, rhs = body.partition("->")
        if not arrow:
            raise DocumentError("taylor item must be 'k | word -> combo'", lno)
        head, bar, word = lhs.partition("|")
        if not bar:
            raise DocumentError("taylor item must be 'k | word -> combo'", lno)
        try:
            k = int(head)
        except ValueError:
            raise DocumentError("arity %r is not an integer" % head.strip(), lno)
        letters = tuple(word.split())
        if len(letters) != k:
            raise DocumentError("word length does not match arity %d" % k, lno)
        for l in letters:
            if l not in names:
                raise DocumentError("unknown name %r" % l, lno)
        combo = _parse_combo(rhs, lno)
        _check_names(combo, names, lno)
        key = (k, letters)
        if key in taylor:
            raise DocumentError("duplicate taylor entry for %r" % (letters,), lno)
        if combo:
            taylor[key] = combo
    _finish(raw)
    return {"basis": basis, "order": order, "taylor": taylor}


def _payload_small_extension(raw) -> Dict:
    a = raw.pop("a", None)
    b = raw.pop("b", None)
    for nm, sub in (("a", a), ("b", b)):
        if not isinstance(sub, InputDocument) or \
                sub.kind != "nilpotent_dg_algebra":
            raise DocumentError(
                "small_extension requires a nilpotent_dg_algebra "
                "subdocument 'begin %s … end %s'" % (nm, nm))
    a_names = {n for n, _ in a.payload["basis"]}
    b_names = {n for n, _ in b.payload["basis"]}
    alpha = _take_map(raw, "alpha", a_names, b_names)
    _finish(raw)
    return {"a": a, "b": b, "alpha": alpha}


def _payload_mc_element(raw) -> Dict:
    item = raw.pop("element", None)
    if item is None:
        raise DocumentError("mc_element requires an 'element' field")
    if isinstance(item, tuple):
        lno, text = item
        combo = _parse_combo(text, lno)
    else:
        combos = [_parse_combo(body, lno) for lno, body in item]
        acc: Dict[str, Fraction] = {}
        order: List[str] = []
        for combo in combos:
            for n, c in combo:
                if n not in acc:
                    acc[n] = Fraction(0)
                    order.append(n)
                acc[n] += c
        combo = tuple((n, acc[n]) for n in order if acc[n])
    _finish(raw)
    return {"element": combo}


def _payload_quasismooth(raw) -> Dict:
    basis = _take_basis(raw)
    names = {n for n, _ in basis}
    order = _take_scalar_int(raw, "order")
    if order is None:
        raise DocumentError("quasismooth requires an 'order' field")
    items = raw.pop("d", [])
    comps: Dict[Tuple[int, str], Combo] = {}
    for lno, body in items:
        lhs, arrow, rhs = body.partition("->")
        head, bar, gen = lhs.partition("|")
        if not arrow or not bar:
            raise DocumentError("item must be 'k | generator -> combo'", lno)
        try:
            k = int(head)
        except ValueError:
            raise DocumentError("order %r is not an integer" % head.strip(), lno)
        gen = gen.strip()
        if gen not in names:
            raise DocumentError("unknown generator %r" % gen, lno)
        combo = _parse_combo(rhs, lno)
        for word, _ in combo:
            letters = word.split("*")
            if len(letters) != k:
                raise DocumentError("word %r has length != %d" % (word, k), lno)
            for l in letters:
                if l not in names:
                    raise DocumentError("unknown name %r" % l, lno)
        key = (k, gen)
        if key in comps:
            raise DocumentError("duplicate component for %r" % gen, lno)
        if combo:
            comps[key] = combo
    _finish(raw)
    return {"basis": basis, "order": order, "d": comps}


_PAYLOAD_BUILDERS = {
    "graded_space": _payload_graded_space,
    "complex": _payload_complex,
    "nilpotent_dg_algebra": _payload_algebra,
    "dgla": _payload_dgla,
    "linfty": _payload_linfty,
    "small_extension": _payload_small_extension,
    "mc_element": _payload_mc_element,
    "quasismooth": _payload_quasismooth,
}


# ---------------------------------------------------------------------------
# printing

def _format_combo(combo: Combo) -> str:
    if not combo:
        return "0"
    return " + ".join("%s %s" % (c, n) for n, c in combo)


def _emit_basis(out: List[str], basis, prefix="") -> None:
    out.append(prefix + "basis:")
    for name, deg in basis:
        out.append(prefix + "  %s %d" % (name, deg))


def _emit_map(out: List[str], fld, table: Dict[str, Combo], order) -> None:
    if not table:
        return
    out.append(fld + ":")
    for name in order:
        if name in table:
            out.append("  %s -> %s" % (name, _format_combo(table[name])))


def _emit_table(out: List[str], fld, table, order) -> None:
    if not table:
        return
    out.append(fld + ":")
    pos = {n: i for i, n in enumerate(order)}
    for (n1, n2) in sorted(table, key=lambda k: (pos[k[0]], pos[k[1]])):
        out.append("  %s %s -> %s" % (n1, n2, _format_combo(table[(n1, n2)])))


def print_document(doc: InputDocument) -> str:
    out: List[str] = ["kind: %s" % doc.kind]
    p = doc.payload
    if doc.kind in ("graded_space", "complex", "nilpotent_dg_algebra", "dgla",
                    "linfty", "quasismooth"):
        _emit_basis(out, p["basis"])
        names = [n for n, _ in p["basis"]]
    if doc.kind == "complex":
        _emit_map(out, "d", p["d"], names)
    elif doc.kind == "nilpotent_dg_algebra":
        _emit_map(out, "d", p["d"], names)
        _emit_table(out, "mult", p["mult"], names)
    elif doc.kind == "dgla":
        _emit_map(out, "d", p["d"], names)
        _emit_table(out, "bracket", p["bracket"], names)
        if p.get("nilpotency") is not None:
            out.append("nilpotency: %d" % p["nilpotency"])
    elif doc.kind == "linfty":
        out.append("order: %d" % p["order"])
        if p["taylor"]:
            out.append("taylor:")
            pos = {n: i for i, n in enumerate(names)}
            for (k, word) in sorted(p["taylor"],
                                    key=lambda kk: (kk[0],
                                                    [pos[l] for l in kk[1]])):
                out.append("  %d | %s -> %s"
                           % (k, " ".join(word),
                              _format_combo(p["taylor"][(k, word)])))
    elif doc.kind == "small_extension":
        for nm in ("a", "b"):
            out.append("begin " + nm)
            out.extend(print_document(p[nm]).splitlines())
            out.append("end " + nm)
        a_names = [n for n, _ in p["a"].payload["basis"]]
        _emit_map(out, "alpha", p["alpha"], a_names)
    elif doc.kind == "mc_element":
        out.append("element: %s" % _format_combo(p["element"]))
    elif doc.kind == "quasismooth":
        out.append("order: %d" % p["order"])
        if p["d"]:
            out.append("d:")
            pos = {n: i for i, n in enumerate(names)}
            for (k, gen) in sorted(p["d"], key=lambda kk: (kk[0], pos[kk[1]])):
                out.append("  %d | %s -> %s"
                           % (k, gen, _format_combo(p["d"][(k, gen)])))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# building library objects from documents and back

def _combo_vector(space: GradedSpace, combo: Combo):
    v = space.zero_vector()
    for n, c in combo:
        v[space.index(n)] += c
    return v


def _map_from_payload(src: GradedSpace, dst: GradedSpace, degree: int,
                      table: Dict[str, Combo]) -> GradedMap:
    m = GradedMap(src, dst, degree)
    for name, combo in table.items():
        i = src.index(name)
        for n, c in combo:
            m.set_entry(dst.index(n), i, c)
    return m


def build_space(doc: InputDocument) -> GradedSpace:
    return GradedSpace(doc.payload["basis"])


def build_complex(doc: InputDocument) -> Complex:
    space = GradedSpace(doc.payload["basis"])
    try:
        d = _map_from_payload(space, space, 1, doc.payload["d"])
        return Complex(space, d)
    except ValueError as exc:
        raise DocumentError(str(exc))


def build_algebra(doc: InputDocument) -> NilpotentDgAlgebra:
    space = GradedSpace(doc.payload["basis"])
    try:
        d = _map_from_payload(space, space, 1, doc.payload["d"])
        mult = {}
        for (n1, n2), combo in doc.payload["mult"].items():
            mult[(space.index(n1), space.index(n2))] = {
                space.index(n): c for n, c in combo}
        return NilpotentDgAlgebra(space, mult, d)
    except ValueError as exc:
        raise DocumentError(str(exc))


def build_dgla(doc: InputDocument) -> Dgla:
    space = GradedSpace(doc.payload["basis"])
    try:
        d = _map_from_payload(space, space, 1, doc.payload["d"])
        bracket = {}
        for (n1, n2), combo in doc.payload["bracket"].items():
            bracket[(space.index(n1), space.index(n2))] = {
                space.index(n): c for n, c in combo}
        return Dgla(space, bracket, d,
                    nilpotency_class=doc.payload.get("nilpotency"))
    except ValueError as exc:
        raise DocumentError(str(exc))


def build_linfty(doc: InputDocument) -> LInftyStructure:
    space = GradedSpace(doc.payload["basis"])
    order = doc.payload["order"]
    shifted = shift_space(space, 1)
    taylor: Dict[int, GradedMap] = {}
    pows = {k: symmetric_power(shifted, k) for k in range(1, order + 1)}
    try:
        for (k, word), combo in doc.payload["taylor"].items():
            m = taylor.get(k)
            if m is None:
                m = GradedMap(pows[k].space, shifted, 1)
                taylor[k] = m
            res = pows[k].index(tuple(space.index(l) for l in word))
            if res is None:
                raise DocumentError("word %r is zero in the symmetric power"
                                    % (word,))
            posn, sgn = res
            for n, c in combo:
                j = space.index(n)
                m.set_entry(j, posn,
                            m.entries.get((j, posn), Fraction(0))
                            + Fraction(sgn) * c)
        for k in range(1, order + 1):
            if k not in taylor:
                taylor[k] = GradedMap(pows[k].space, shifted, 1)
        return LInftyStructure(space, order, taylor)
    except ValueError as exc:
        raise DocumentError(str(exc))


def build_small_extension(doc: InputDocument) -> SmallExtension:
    a = build_algebra(doc.payload["a"])
    b = build_algebra(doc.payload["b"])
    try:
        alpha = DgAlgebraMorphism(
            a, b, _map_from_payload(a.space, b.space, 0, doc.payload["alpha"]))
        e = kernel_extension(alpha)
    except ValueError as exc:
        raise DocumentError(str(exc))
    # square-zero kernels that are not annihilated by A are accepted: the
    # lifting operations handle them and report strictness themselves
    errs = [err for err in e.validate() if err != "A·I != 0"]
    img = [e.iota.column(i) for i in range(e.i_complex.space.dim)]
    for x in img:
        for y in img:
            if any(e.a.product(x, y)):
                errs.append("kernel is not square-zero")
                break
    if errs:
        raise DocumentError("invalid small extension: " + "; ".join(errs))
    return e


def build_mc_element(doc: InputDocument, space: GradedSpace):
    try:
        return _combo_vector(space, doc.payload["element"])
    except KeyError as exc:
        raise DocumentError("unknown tensor basis name %s" % exc)


def build_quasismooth(doc: InputDocument) -> QuasismoothTrunc:
    v = GradedSpace(doc.payload["basis"])
    order = doc.payload["order"]
    pows = {k: symmetric_power(v, k) for k in range(1, order + 1)}
    comps: Dict[int, GradedMap] = {}
    try:
        for (k, gen), combo in doc.payload["d"].items():
            m = comps.get(k)
            if m is None:
                m = GradedMap(v, pows[k].space, 1)
                comps[k] = m
            i = v.index(gen)
            for word, c in combo:
                res = pows[k].index(tuple(v.index(l)
                                          for l in word.split("*")))
                if res is None:
                    raise DocumentError("word %r is zero in the symmetric "
                                        "power" % word)
                posn, sgn = res
                m.set_entry(posn, i,
                            m.entries.get((posn, i), Fraction(0))
                            + Fraction(sgn) * c)
        return QuasismoothTrunc(v, order, comps)
    except ValueError as exc:
        raise DocumentError(str(exc))


def build(doc: InputDocument):
    """The library object for a context-free document kind."""
    builders = {
        "graded_space": build_space,
        "complex": build_complex,
        "nilpotent_dg_algebra": build_algebra,
        "dgla": build_dgla,
        "linfty": build_linfty,
        "small_extension": build_small_extension,
        "quasismooth": build_quasismooth,
    }
    if doc.kind not in builders:
        raise DocumentError("kind %r needs extra context to build" % doc.kind)
    return builders[doc.kind](doc)


# ---- documents from library objects ---------------------------------------

def _combo_of_vector(space: GradedSpace, vec) -> Combo:
    return tuple((space.names[i], c) for i, c in enumerate(vec) if c)


def _map_payload(m: GradedMap, src: GradedSpace, dst: GradedSpace
                 ) -> Dict[str, Combo]:
    out = {}
    for i in range(src.dim):
        combo = _combo_of_vector(dst, m.column(i))
        if combo:
            out[src.names[i]] = combo
    return out


def document_of_space(v: GradedSpace) -> InputDocument:
    return InputDocument("graded_space", {"basis": tuple(v.basis)})


def document_of_complex(c: Complex) -> InputDocument:
    return InputDocument("complex", {
        "basis": tuple(c.space.basis),
        "d": _map_payload(c.d, c.space, c.space)})


def document_of_algebra(a: NilpotentDgAlgebra) -> InputDocument:
    mult = {}
    for (i, j), sv in a.mult.items():
        combo = tuple((a.space.names[k], c) for k, c in sorted(sv.items()) if c)
        if combo:
            mult[(a.space.names[i], a.space.names[j])] = combo
    return InputDocument("nilpotent_dg_algebra", {
        "basis": tuple(a.space.basis),
        "d": _map_payload(a.d, a.space, a.space),
        "mult": mult})


def document_of_dgla(l: Dgla) -> InputDocument:
    bracket = {}
    for (i, j), sv in l.bracket.items():
        combo = tuple((l.space.names[k], c) for k, c in sorted(sv.items()) if c)
        if combo:
            bracket[(l.space.names[i], l.space.names[j])] = combo
    return InputDocument("dgla", {
        "basis": tuple(l.space.basis),
        "d": _map_payload(l.d, l.space, l.space),
        "bracket": bracket,
        "nilpotency": l.nilpotency_class})


def document_of_linfty(s: LInftyStructure) -> InputDocument:
    taylor = {}
    for k, m in s.taylor.items():
        pw = symmetric_power(shift_space(s.v, 1), k)
        for posn, word in enumerate(pw.monomials):
            combo = _combo_of_vector(s.v, [
                m.entries.get((j, posn), Fraction(0)) for j in range(s.v.dim)])
            if combo:
                taylor[(k, tuple(s.v.names[l] for l in word))] = combo
    return InputDocument("linfty", {
        "basis": tuple(s.v.basis), "order": s.order, "taylor": taylor})


def document_of_small_extension(e: SmallExtension) -> InputDocument:
    return InputDocument("small_extension", {
        "a": document_of_algebra(e.a),
        "b": document_of_algebra(e.b),
        "alpha": _map_payload(e.alpha.map, e.a.space, e.b.space)})


def document_of_mc_element(space: GradedSpace, vec) -> InputDocument:
    return InputDocument("mc_element", {
        "element": _combo_of_vector(space, vec)})


def document_of_quasismooth(r: QuasismoothTrunc) -> InputDocument:
    d = {}
    for k, m in r.components.items():
        for i in range(r.v.dim):
            combo = _combo_of_vector(r.powers[k].space, m.column(i))
            if combo:
                d[(k, r.v.names[i])] = combo
    return InputDocument("quasismooth", {
        "basis": tuple(r.v.basis), "order": r.order, "d": d})
