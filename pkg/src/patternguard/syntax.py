"""Text form of skeletons.

    skeleton  := base | "Base{" base? "}" | align | recursive
    align     := "Align{" item ("," item)* "}"
    item      := quoted            (a delimiter)
               | skeleton
    recursive := "Recursive{" skeleton "}[" quoted "]" count?
    count     := "{" INT "}" | "{" INT "," INT? "}"
    base      := atom (WS atom)*
    atom      := quoted | "<" (LABEL | quoted) ">" rep? | "Enum{" quoted ("," quoted)* "}"
    rep       := "+" | "{" INT "}" | "{" INT "," INT? "}"

Inside ``Align`` a lone quoted string is a delimiter, so a Base holding a
single literal is written ``Base{"..."}``.
"""

from __future__ import annotations

from .dsl import (
    ANY_COUNT,
    Align,
    Base,
    ClassAtom,
    Count,
    Delim,
    EnumAtom,
    Literal,
    Pattern,
    Recursive,
    Rep,
    Skeleton,
    _quote,
    render_atom,
    render_count,
)


class PatternSyntaxError(ValueError):
    def __init__(self, message: str, text: str, offset: int):
        self.offset = offset
        self.line = text.count("\n", 0, offset) + 1
        self.column = offset - (text.rfind("\n", 0, offset) + 1) + 1
        self.message = message
        super().__init__(f"line {self.line}, column {self.column}: {message}")


def _render_base(b: Base, in_align: bool) -> str:
    atoms = b.pattern.atoms
    if not atoms or (in_align and len(atoms) == 1 and isinstance(atoms[0], Literal)):
        return "Base{" + " ".join(render_atom(a) for a in atoms) + "}"
    return " ".join(render_atom(a) for a in atoms)


def serialize(k: Skeleton, _in_align: bool = False) -> str:
    if isinstance(k, Base):
        return _render_base(k, _in_align)
    if isinstance(k, Recursive):
        return f"Recursive{{{serialize(k.body)}}}[{_quote(k.sep)}]{render_count(k.count)}"
    parts = [_quote(c.text) if isinstance(c, Delim) else serialize(c, True) for c in k.children]
    return "Align{" + ", ".join(parts) + "}"


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.i = 0

    def error(self, msg: str, at=None):
        raise PatternSyntaxError(msg, self.text, self.i if at is None else at)

    def ws(self):
        t = self.text
        while self.i < len(t) and t[self.i].isspace():
            self.i += 1

    def peek(self, s: str) -> bool:
        return self.text.startswith(s, self.i)

    def expect(self, s: str):
        self.ws()
        if not self.peek(s):
            self.error(f"expected {s!r}")
        self.i += len(s)

    def at_end(self) -> bool:
        self.ws()
        return self.i >= len(self.text)

    def quoted(self) -> str:
        self.ws()
        t = self.text
        if not self.peek('"'):
            self.error("expected a quoted string")
        start = self.i
        self.i += 1
        out = []
        while True:
            if self.i >= len(t):
                self.error("unterminated string", start)
            c = t[self.i]
            if c == '"':
                self.i += 1
                return "".join(out)
            if c == "\\":
                if self.i + 1 >= len(t):
                    self.error("dangling escape")
                e = t[self.i + 1]
                if e == "u":
                    hexpart = t[self.i + 2:self.i + 6]
                    try:
                        out.append(chr(int(hexpart, 16)))
                    except ValueError:
                        self.error("bad \\u escape")
                    self.i += 6
                    continue
                out.append({"n": "\n", "t": "\t", "r": "\r"}.get(e, e))
                self.i += 2
                continue
            out.append(c)
            self.i += 1

    def integer(self) -> int:
        self.ws()
        t = self.text
        start = self.i
        while self.i < len(t) and t[self.i].isdigit():
            self.i += 1
        if start == self.i:
            self.error("expected an integer")
        return int(t[start:self.i])

    def bounds(self):
        """``{n}`` | ``{lo,}`` | ``{lo,hi}`` after the opening brace was seen."""
        lo = self.integer()
        self.ws()
        if self.peek("}"):
            self.i += 1
            return lo, lo
        self.expect(",")
        self.ws()
        if self.peek("}"):
            self.i += 1
            return lo, None
        hi = self.integer()
        self.expect("}")
        return lo, hi

    def rep(self) -> Rep:
        if self.peek("+"):
            self.i += 1
            return Rep()
        if self.peek("{"):
            at = self.i
            self.i += 1
            lo, hi = self.bounds()
            try:
                return Rep(lo, hi)
            except ValueError as e:
                self.error(str(e), at)
        return Rep.exactly(1)

    def atom(self):
        self.ws()
        at = self.i
        if self.peek('"'):
            text = self.quoted()
            if not text:
                self.error("empty literal", at)
            return Literal(text)
        if self.peek("Enum{"):
            self.i += 5
            members = [self.quoted()]
            self.ws()
            while self.peek(","):
                self.i += 1
                members.append(self.quoted())
                self.ws()
            self.expect("}")
            try:
                return EnumAtom(tuple(members))
            except ValueError as e:
                self.error(str(e), at)
        if self.peek("<"):
            self.i += 1
            self.ws()
            if self.peek('"'):
                label = self.quoted()
                if len(label) != 1:
                    self.error("quoted class label must be a single character", at)
            else:
                start = self.i
                t = self.text
                while self.i < len(t) and (t[self.i].isalnum() or t[self.i] == "_"):
                    self.i += 1
                label = t[start:self.i]
                if len(label) < 2:
                    self.error("expected a class label")
            self.expect(">")
            return ClassAtom(label, self.rep())
        self.error("expected an atom")

    def starts_atom(self) -> bool:
        self.ws()
        return self.peek('"') or self.peek("<") or self.peek("Enum{")

    def base_atoms(self) -> list:
        atoms = [self.atom()]
        while self.starts_atom():
            atoms.append(self.atom())
        return atoms

    def skeleton(self, in_align: bool = False):
        self.ws()
        at = self.i
        if self.peek("Align{"):
            self.i += 6
            items = [self.item()]
            self.ws()
            while self.peek(","):
                self.i += 1
                items.append(self.item())
                self.ws()
            self.expect("}")
            try:
                return Align(tuple(items))
            except ValueError as e:
                self.error(str(e), at)
        if self.peek("Recursive{"):
            self.i += 10
            body = self.skeleton()
            self.expect("}")
            self.expect("[")
            sep = self.quoted()
            self.expect("]")
            count = ANY_COUNT
            if self.peek("{"):
                cat = self.i
                self.i += 1
                lo, hi = self.bounds()
                try:
                    count = Count(lo, hi)
                except ValueError as e:
                    self.error(str(e), cat)
            if not sep:
                self.error("empty separator", at)
            return Recursive(body, sep, count)
        if self.peek("Base{"):
            self.i += 5
            self.ws()
            atoms = [] if self.peek("}") else self.base_atoms()
            self.expect("}")
            return Base(Pattern(tuple(atoms)))
        if self.starts_atom():
            return Base(Pattern(tuple(self.base_atoms())))
        self.error("expected a skeleton")

    def item(self):
        self.ws()
        if self.peek('"'):
            save = self.i
            text = self.quoted()
            self.ws()
            if self.peek(",") or self.peek("}"):
                if not text:
                    self.error("empty delimiter", save)
                return Delim(text)
            self.i = save
        return self.skeleton(in_align=True)


def parse(text: str) -> Skeleton:
    p = _Parser(text)
    k = p.skeleton()
    if not p.at_end():
        p.error("unexpected trailing text")
    return k


serialize_pattern = serialize
parse_pattern = parse
