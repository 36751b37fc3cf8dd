"""First-order terms, formulas and sequents over three variable classes.

Free existential variables are written ``x^e``, free universal variables
``x^a`` and bound variables are bare identifiers.  Every other bare
identifier is a signature symbol (a constant when it has no arguments).

Connectives, by increasing binding strength::

    all x. A    ex x. A    A -> B    A | B    A & B    ~A    s = t

Quantifiers extend as far to the right as possible, ``->`` associates to
the right and is read as ``~A | B``.
"""

from __future__ import annotations

import enum
import re
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from typing import Union

__all__ = [
    "Kind", "Var", "App", "Term", "Atom", "Not", "And", "Or", "Forall",
    "Exists", "Formula", "Sequent", "Signature", "Substitution",
    "SyntaxError_", "ParseError", "WellFormednessError",
    "gvar", "dvar", "parse_term", "parse_formula", "parse_sequent",
    "format_term", "format_formula", "format_sequent", "conjugate",
    "free_vars", "gamma_vars", "delta_vars", "apply_subst", "rename",
    "instantiate_quantifier", "check_formula", "signature_of", "subformulas",
]


class Kind(enum.Enum):
    GAMMA = "e"
    DELTA = "a"
    BOUND = "b"


@dataclass(frozen=True)
class Var:
    name: str
    kind: Kind

    def __str__(self) -> str:
        return format_term(self)

    def sort_key(self) -> tuple[str, str]:
        return (self.kind.value, self.name)

    def __lt__(self, other: Var) -> bool:
        return self.sort_key() < other.sort_key()


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple[Term, ...] = ()

    def __str__(self) -> str:
        return format_term(self)


Term = Union[Var, App]


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Not:
    body: Formula

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class And:
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Or:
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Forall:
    var: str
    body: Formula

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Exists:
    var: str
    body: Formula

    def __str__(self) -> str:
        return format_formula(self)


Formula = Union[Atom, Not, And, Or, Forall, Exists]
Quantified = (Forall, Exists)

# A sequent is a tuple of formulas with disjunctive reading.
Sequent = tuple


def gvar(name: str) -> Var:
    return Var(name, Kind.GAMMA)


def dvar(name: str) -> Var:
    return Var(name, Kind.DELTA)


class SyntaxError_(ValueError):
    """Base class for malformed syntax."""


class ParseError(SyntaxError_):
    def __init__(self, message: str, pos: int | None = None, text: str = ""):
        self.pos = pos
        self.text = text
        where = f" at position {pos}" if pos is not None else ""
        super().__init__(f"{message}{where}")


class WellFormednessError(SyntaxError_):
    pass


# ---------------------------------------------------------------- signature


@dataclass(frozen=True)
class Signature:
    functions: Mapping[str, int] = field(default_factory=dict)
    predicates: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "functions", dict(self.functions))
        object.__setattr__(self, "predicates", dict(self.predicates))

    def __hash__(self):
        return hash((tuple(sorted(self.functions.items())),
                     tuple(sorted(self.predicates.items()))))

    def merge(self, other: Signature) -> Signature:
        fns = dict(self.functions)
        preds = dict(self.predicates)
        for table, extra, what in ((fns, other.functions, "function"),
                                   (preds, other.predicates, "predicate")):
            for name, arity in extra.items():
                if table.get(name, arity) != arity:
                    raise WellFormednessError(
                        f"{what} symbol {name!r} used with arities "
                        f"{table[name]} and {arity}")
                table[name] = arity
        return Signature(fns, preds)

    def symbols(self) -> set[str]:
        return set(self.functions) | set(self.predicates)


def signature_of(*items) -> Signature:
    """Collect the function and predicate symbols occurring in ``items``."""
    fns: dict[str, int] = {}
    preds: dict[str, int] = {}

    def note(table, name, arity, what):
        if table.get(name, arity) != arity:
            raise WellFormednessError(
                f"{what} symbol {name!r} used with arities {table[name]} and {arity}")
        table[name] = arity

    def term(t):
        if isinstance(t, App):
            note(fns, t.fn, len(t.args), "function")
            for a in t.args:
                term(a)

    def walk(x):
        if isinstance(x, (Var, App)):
            term(x)
        elif isinstance(x, Atom):
            note(preds, x.pred, len(x.args), "predicate")
            for a in x.args:
                term(a)
        elif isinstance(x, Not):
            walk(x.body)
        elif isinstance(x, (And, Or)):
            walk(x.left)
            walk(x.right)
        elif isinstance(x, Quantified):
            walk(x.body)
        elif isinstance(x, Mapping):
            for v in x.values():
                walk(v)
        elif isinstance(x, Iterable) and not isinstance(x, str):
            for y in x:
                walk(y)
        else:
            raise TypeError(f"cannot collect symbols of {type(x).__name__}")

    for item in items:
        walk(item)
    return Signature(fns, preds)


# ---------------------------------------------------------------- printing

_PREC_OR, _PREC_AND, _PREC_UNARY = 1, 2, 3


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        if t.kind is Kind.GAMMA:
            return f"{t.name}^e"
        if t.kind is Kind.DELTA:
            return f"{t.name}^a"
        return t.name
    if not t.args:
        return t.fn
    return f"{t.fn}({', '.join(format_term(a) for a in t.args)})"


def _prec(f: Formula) -> int:
    if isinstance(f, Or):
        return _PREC_OR
    if isinstance(f, And):
        return _PREC_AND
    return _PREC_UNARY


def _operand(f: Formula, min_prec: int) -> str:
    text = format_formula(f)
    # a bare quantifier would swallow everything to its right
    if isinstance(f, Quantified) or _prec(f) < min_prec:
        return f"({text})"
    return text


def format_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        if f.pred == "=" and len(f.args) == 2:
            return f"{format_term(f.args[0])} = {format_term(f.args[1])}"
        if not f.args:
            return f.pred
        return f"{f.pred}({', '.join(format_term(a) for a in f.args)})"
    if isinstance(f, Not):
        return "~" + _operand(f.body, _PREC_UNARY)
    if isinstance(f, And):
        return f"{_operand(f.left, _PREC_AND)} & {_operand(f.right, _PREC_UNARY)}"
    if isinstance(f, Or):
        return f"{_operand(f.left, _PREC_OR)} | {_operand(f.right, _PREC_AND)}"
    if isinstance(f, Forall):
        return f"all {f.var}. {format_formula(f.body)}"
    if isinstance(f, Exists):
        return f"ex {f.var}. {format_formula(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


def format_sequent(s: Iterable[Formula]) -> str:
    return ", ".join(format_formula(f) for f in s)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<var>[A-Za-z0-9_']+\^[ea])
  | (?P<name>[A-Za-z0-9_']+)
  | (?P<punct>[~&|().,=])
""", re.VERBOSE)

_KEYWORDS = {"all", "ex"}


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            tok = m.group()
            if kind == "name" and tok in _KEYWORDS:
                kind = tok
            elif kind in ("punct", "arrow"):
                kind = tok
            toks.append(_Tok(kind, tok, pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.bound: list[str] = []

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message: str, tok: _Tok | None = None):
        tok = tok or self.tok
        return ParseError(message, tok.pos, self.text)

    def take(self, kind: str) -> _Tok:
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {kind!r}, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def at(self, *kinds: str) -> bool:
        return self.tok.kind in kinds

    # formula := quant | implication
    def formula(self) -> Formula:
        if self.at("all", "ex"):
            return self.quant()
        left = self.disj()
        if self.at("->"):
            self.take("->")
            right = self.formula()
            return Or(conjugate(left), right)
        return left

    def quant(self) -> Formula:
        q = self.take(self.tok.kind)
        name_tok = self.take("name")
        name = name_tok.text
        if name in self.bound:
            raise self.error(f"re-quantification of {name!r}", name_tok)
        self.take(".")
        self.bound.append(name)
        try:
            body = self.formula()
        finally:
            self.bound.pop()
        return Forall(name, body) if q.kind == "all" else Exists(name, body)

    def disj(self) -> Formula:
        f = self.conj()
        while self.at("|"):
            self.take("|")
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.at("&"):
            self.take("&")
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        if self.at("~"):
            self.take("~")
            return Not(self.unary())
        if self.at("all", "ex"):
            return self.quant()
        if self.at("("):
            self.take("(")
            f = self.formula()
            self.take(")")
            return f
        return self.atom()

    def atom(self) -> Formula:
        start = self.tok
        t = self.term()
        if self.at("="):
            self.take("=")
            return Atom("=", (t, self.term()))
        if isinstance(t, Var):
            raise self.error("a variable is not a formula", start)
        return Atom(t.fn, t.args)

    def term(self) -> Term:
        tok = self.tok
        if tok.kind == "var":
            self.i += 1
            name, kind = tok.text[:-2], tok.text[-1]
            return Var(name, Kind(kind))
        if tok.kind != "name":
            raise self.error(f"expected a term, found {tok.text or 'end of input'!r}")
        self.i += 1
        if self.at("("):
            self.take("(")
            args = [self.term()]
            while self.at(","):
                self.take(",")
                args.append(self.term())
            self.take(")")
            return App(tok.text, tuple(args))
        if tok.text in self.bound:
            return Var(tok.text, Kind.BOUND)
        return App(tok.text, ())


def _binds(f: Formula, name: str) -> bool:
    return any(isinstance(g, Quantified) and g.var == name for g in subformulas(f))


def _finish(p: _Parser, f, sig: Signature | None):
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    for g in (f if isinstance(f, tuple) else (f,)):
        check_formula(g)
    used = signature_of(f)
    if sig is not None:
        for table, known, what in ((used.functions, sig.functions, "function"),
                                   (used.predicates, sig.predicates, "predicate")):
            for name, arity in table.items():
                if what == "predicate" and name == "=":
                    continue
                if name not in known:
                    raise WellFormednessError(f"unknown {what} symbol {name!r}")
                if known[name] != arity:
                    raise WellFormednessError(
                        f"arity mismatch for {name!r}: expected {known[name]}, got {arity}")
    return f


def parse_formula(text: str, sig: Signature | None = None) -> Formula:
    """Parse one formula; ``sig`` (when given) must declare every symbol."""
    if not text.strip():
        raise ParseError("empty input", 0, text)
    p = _Parser(text)
    return _finish(p, p.formula(), sig)


def parse_sequent(text: str, sig: Signature | None = None) -> Sequent:
    """Parse a comma separated list of formulas."""
    if not text.strip():
        raise ParseError("empty input", 0, text)
    p = _Parser(text)
    fs = [p.formula()]
    while p.at(","):
        p.take(",")
        fs.append(p.formula())
    return _finish(p, tuple(fs), sig)


def parse_problems(text: str) -> dict[str, Sequent]:
    """Problem file contents: ``name : formula[, formula ...]`` per line, ``#`` comments."""
    out: dict[str, Sequent] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, body = line.partition(":")
        name = name.strip()
        if not sep or not re.fullmatch(r"[A-Za-z_][\w'\-]*", name):
            raise ParseError(f"line {lineno}: expected 'name : formula'")
        if name in out:
            raise ParseError(f"line {lineno}: duplicate problem {name!r}")
        try:
            out[name] = parse_sequent(body)
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
    return out


def format_problems(problems: Mapping[str, Sequent]) -> str:
    return "".join(f"{name} : {format_sequent(s)}\n" for name, s in problems.items())


def parse_term(text: str) -> Term:
    if not text.strip():
        raise ParseError("empty input", 0, text)
    p = _Parser(text)
    t = p.term()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return t


# ---------------------------------------------------------------- traversal


def subformulas(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, Not):
            stack.append(g.body)
        elif isinstance(g, (And, Or)):
            stack.extend((g.right, g.left))
        elif isinstance(g, Quantified):
            stack.append(g.body)


def _term_vars(t: Term, out: set[Var]) -> None:
    if isinstance(t, Var):
        out.add(t)
    else:
        for a in t.args:
            _term_vars(a, out)


def _all_vars(x, out: set[Var]) -> None:
    if isinstance(x, (Var, App)):
        _term_vars(x, out)
    elif isinstance(x, Atom):
        for a in x.args:
            _term_vars(a, out)
    elif isinstance(x, Not):
        _all_vars(x.body, out)
    elif isinstance(x, (And, Or)):
        _all_vars(x.left, out)
        _all_vars(x.right, out)
    elif isinstance(x, Quantified):
        _all_vars(x.body, out)
    elif isinstance(x, Mapping):
        for k, v in x.items():
            _all_vars(k, out)
            _all_vars(v, out)
    elif isinstance(x, Iterable) and not isinstance(x, str):
        for y in x:
            _all_vars(y, out)
    else:
        raise TypeError(f"cannot collect variables of {type(x).__name__}")


def free_vars(item) -> tuple[frozenset[Var], frozenset[Var]]:
    """Return ``(gamma, delta)``: the free variables of ``item`` by kind.

    ``item`` may be a term, formula, sequent or any nested collection of them.
    """
    out: set[Var] = set()
    _all_vars(item, out)
    gamma = frozenset(v for v in out if v.kind is Kind.GAMMA)
    delta = frozenset(v for v in out if v.kind is Kind.DELTA)
    return gamma, delta


def gamma_vars(item) -> frozenset[Var]:
    return free_vars(item)[0]


def delta_vars(item) -> frozenset[Var]:
    return free_vars(item)[1]


def check_formula(f: Formula) -> None:
    """Raise WellFormednessError unless ``f`` satisfies the binding discipline."""

    def term(t: Term, scope: tuple[str, ...]):
        if isinstance(t, Var):
            if t.kind is Kind.BOUND and t.name not in scope:
                raise WellFormednessError(f"bound variable {t.name!r} outside its binder")
        else:
            if t.fn in scope:
                raise WellFormednessError(f"symbol {t.fn!r} clashes with a bound variable")
            for a in t.args:
                term(a, scope)

    def walk(g: Formula, scope: tuple[str, ...]):
        if isinstance(g, Atom):
            for a in g.args:
                term(a, scope)
        elif isinstance(g, Not):
            walk(g.body, scope)
        elif isinstance(g, (And, Or)):
            walk(g.left, scope)
            walk(g.right, scope)
        elif isinstance(g, Quantified):
            if g.var in scope or _binds(g.body, g.var):
                raise WellFormednessError(f"re-quantification of {g.var!r}")
            walk(g.body, scope + (g.var,))
        else:
            raise WellFormednessError(f"not a formula: {g!r}")

    walk(f, ())


# ---------------------------------------------------------------- substitution


class Substitution(Mapping):
    """Finite map from free existential variables to terms; identity elsewhere."""

    __slots__ = ("_map",)

    def __init__(self, mapping: Mapping[Var, Term] | Iterable[tuple[Var, Term]] = ()):
        items = dict(mapping)
        for k, v in items.items():
            if not isinstance(k, Var) or k.kind is not Kind.GAMMA:
                raise WellFormednessError(f"substitution domain must be existential variables, got {k}")
            if any(x.kind is Kind.BOUND for x in _vars_of(v)):
                raise WellFormednessError(f"bound variable in substitution image {format_term(v)}")
        self._map = {k: v for k, v in items.items() if v != k}

    def __getitem__(self, key: Var) -> Term:
        return self._map[key]

    def __iter__(self):
        return iter(sorted(self._map))

    def __len__(self) -> int:
        return len(self._map)

    def __hash__(self):
        return hash(frozenset(self._map.items()))

    def __eq__(self, other):
        if isinstance(other, Substitution):
            return self._map == other._map
        if isinstance(other, Mapping):
            return self._map == dict(other)
        return NotImplemented

    def __repr__(self) -> str:
        return f"Substitution({self})"

    def __str__(self) -> str:
        body = ", ".join(f"{format_term(k)} -> {format_term(v)}" for k, v in self.items())
        return "{" + body + "}"

    def image(self, x: Var) -> Term:
        return self._map.get(x, x)

    def then(self, other: Substitution) -> Substitution:
        """Apply ``self`` first, then ``other``."""
        combined = {k: rename(v, other) for k, v in self._map.items()}
        for k, v in other.items():
            combined.setdefault(k, v)
        return Substitution(combined)


def _vars_of(t: Term) -> set[Var]:
    out: set[Var] = set()
    _term_vars(t, out)
    return out


def _rename_term(t: Term, m: Mapping[Var, Term]) -> Term:
    if isinstance(t, Var):
        return m.get(t, t)
    if not t.args:
        return t
    return App(t.fn, tuple(_rename_term(a, m) for a in t.args))


def rename(item, mapping: Mapping[Var, Term]):
    """Replace free variables of any kind according to ``mapping``."""
    if not mapping:
        return item
    if isinstance(item, (Var, App)):
        return _rename_term(item, mapping)
    if isinstance(item, Atom):
        return Atom(item.pred, tuple(_rename_term(a, mapping) for a in item.args))
    if isinstance(item, Not):
        return Not(rename(item.body, mapping))
    if isinstance(item, And):
        return And(rename(item.left, mapping), rename(item.right, mapping))
    if isinstance(item, Or):
        return Or(rename(item.left, mapping), rename(item.right, mapping))
    if isinstance(item, Forall):
        return Forall(item.var, rename(item.body, mapping))
    if isinstance(item, Exists):
        return Exists(item.var, rename(item.body, mapping))
    if isinstance(item, tuple):
        return tuple(rename(x, mapping) for x in item)
    if isinstance(item, frozenset):
        return frozenset(rename(x, mapping) for x in item)
    if isinstance(item, (list, set)):
        return type(item)(rename(x, mapping) for x in item)
    raise TypeError(f"cannot substitute into {type(item).__name__}")


def apply_subst(item, sigma: Mapping[Var, Term]):
    """Apply a substitution of existential variables to ``item``."""
    if not isinstance(sigma, Substitution):
        sigma = Substitution(sigma)
    return rename(item, sigma)


def conjugate(f: Formula) -> Formula:
    return f.body if isinstance(f, Not) else Not(f)


def instantiate_quantifier(f: Formula, v: Var) -> Formula:
    """Strip the outer quantifier of ``f`` and put ``v`` for its variable."""
    if not isinstance(f, Quantified):
        raise WellFormednessError(f"not a quantified formula: {format_formula(f)}")
    if v.kind is Kind.BOUND:
        raise WellFormednessError("cannot instantiate with a bound variable")
    out: set[Var] = set()
    _all_vars(f, out)
    if v in out:
        raise WellFormednessError(f"{format_term(v)} already occurs in {format_formula(f)}")
    return rename(f.body, {Var(f.var, Kind.BOUND): v})
