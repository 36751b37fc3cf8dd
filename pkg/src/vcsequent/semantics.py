"""Finite-model oracle for validity, reduction and their strong versions.

Everything here is brute force over a finite structure.  Two evaluators
are kept side by side: :func:`evaluate` is a plain recursive Tarski
evaluator, and :func:`truth_table` computes the value of a set of
sequents for every assignment of a variable carrier at once with numpy.
The validity checks use the second one; the tests cross-check them.

Existential valuations are handled in two ways.  :func:`enumerate_valuations`
lists every admissible pair of a semantic relation and lookup tables, each
exactly once.  The validity checks instead work on the set of *functions*
``pi -> epsilon(e)(pi)`` realised by admissible valuations, which is much
smaller because a table that ignores some of its inputs is the same
function as a table with fewer inputs.
"""

from __future__ import annotations

import itertools
import re
import string
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import relations as rl
from .choice import ChoiceCondition
from .syntax import (And, App, Atom, Exists, Forall, Formula, Kind, Not, Or,
                     Quantified, Signature, Term, Var, format_term, free_vars)

DEFAULT_CAP = 10**6


class SemanticsError(ValueError):
    pass


class EnumerationLimit(SemanticsError):
    """The requested enumeration would exceed the configured capacity."""


# ---------------------------------------------------------------- structures


def element_names(n: int) -> tuple[str, ...]:
    letters = string.ascii_lowercase
    return tuple(letters[i] if i < len(letters) else f"e{i}" for i in range(n))


class Structure:
    """A finite first-order structure with elements ``0 .. n-1``.

    ``functions`` maps a symbol to an integer array of shape ``(n,) * arity``,
    ``predicates`` maps a symbol to a boolean array of the same shape.
    Equality is the identity unless ``=`` is interpreted explicitly.
    """

    __slots__ = ("names", "functions", "predicates", "_key")

    def __init__(self, names: Iterable[str], functions: Mapping[str, np.ndarray] | None = None,
                 predicates: Mapping[str, np.ndarray] | None = None):
        self.names = tuple(names)
        if not self.names:
            raise SemanticsError("universe must not be empty")
        if len(set(self.names)) != len(self.names):
            raise SemanticsError("duplicate element names")
        n = len(self.names)
        self.functions = {}
        self.predicates = {}
        for name, table in (functions or {}).items():
            arr = np.asarray(table, dtype=np.int64)
            if arr.shape != (n,) * arr.ndim or arr.size and (arr.min() < 0 or arr.max() >= n):
                raise SemanticsError(f"bad table for function {name!r}")
            arr.setflags(write=False)
            self.functions[name] = arr
        for name, table in (predicates or {}).items():
            arr = np.asarray(table, dtype=bool)
            if arr.shape != (n,) * arr.ndim:
                raise SemanticsError(f"bad table for predicate {name!r}")
            arr.setflags(write=False)
            self.predicates[name] = arr
        self._key = (self.names,
                     tuple(sorted((k, v.ndim, v.tobytes()) for k, v in self.functions.items())),
                     tuple(sorted((k, v.ndim, v.tobytes()) for k, v in self.predicates.items())))

    @property
    def size(self) -> int:
        return len(self.names)

    def __eq__(self, other):
        return isinstance(other, Structure) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Structure({format_structure(self)!r})"

    def function(self, name: str, arity: int) -> np.ndarray:
        try:
            table = self.functions[name]
        except KeyError:
            raise SemanticsError(f"function symbol {name!r} is not interpreted") from None
        if table.ndim != arity:
            raise SemanticsError(f"function {name!r} has arity {table.ndim}, used with {arity}")
        return table

    def predicate(self, name: str, arity: int) -> np.ndarray:
        if name == "=" and name not in self.predicates:
            return np.eye(self.size, dtype=bool)
        try:
            table = self.predicates[name]
        except KeyError:
            raise SemanticsError(f"predicate symbol {name!r} is not interpreted") from None
        if table.ndim != arity:
            raise SemanticsError(f"predicate {name!r} has arity {table.ndim}, used with {arity}")
        return table

    def covers(self, sig: Signature) -> bool:
        return (all(self.functions.get(f) is not None and self.functions[f].ndim == k
                    for f, k in sig.functions.items())
                and all(p == "=" or (p in self.predicates and self.predicates[p].ndim == k)
                        for p, k in sig.predicates.items()))


def _tuple_text(names, tup) -> str:
    if len(tup) == 1:
        return names[tup[0]]
    return "(" + ",".join(names[i] for i in tup) + ")"


def format_structure(st: Structure) -> str:
    names = st.names
    parts = ["universe " + " ".join(names)]
    for p, table in sorted(st.predicates.items()):
        if table.ndim == 0:
            parts.append(f"{p} = {'true' if table[()] else 'false'}")
        elif table.ndim == 2 and np.array_equal(table, np.eye(st.size, dtype=bool)):
            parts.append(f"{p} = id")
        else:
            members = [_tuple_text(names, t) for t in zip(*np.nonzero(table))]
            parts.append(f"{p} = {{{', '.join(members)}}}")
    for f, table in sorted(st.functions.items()):
        if table.ndim == 0:
            parts.append(f"{f} = {names[int(table[()])]}")
        else:
            entries = [f"{f}({','.join(names[i] for i in idx)})={names[int(table[idx])]}"
                       for idx in itertools.product(range(st.size), repeat=table.ndim)]
            parts.append(" ".join(entries))
    return "; ".join(parts)


_ENTRY = re.compile(r"([A-Za-z0-9_']+)\(([^()]*)\)\s*=\s*([A-Za-z0-9_']+)")


def parse_structure(text: str) -> Structure:
    """Read ``universe a b; P = {a}; Q = id; f(a)=b f(b)=a; c = a; R = true``."""
    stmts = [s.strip() for s in re.split(r"[;\n]", text) if s.strip() and not s.strip().startswith("#")]
    if not stmts or not stmts[0].startswith("universe"):
        raise SemanticsError("structure must start with 'universe'")
    names = stmts[0].split()[1:]
    st0 = Structure(names)  # validates the universe
    index = {name: i for i, name in enumerate(names)}
    n = len(names)

    def elem(tok: str) -> int:
        tok = tok.strip()
        if tok not in index:
            raise SemanticsError(f"unknown element {tok!r}")
        return index[tok]

    preds: dict[str, np.ndarray] = {}
    fn_entries: dict[str, dict[tuple, int]] = {}
    consts: dict[str, int] = {}
    for stmt in stmts[1:]:
        if _ENTRY.match(stmt):
            pos = 0
            for m in _ENTRY.finditer(stmt):
                if stmt[pos:m.start()].strip():
                    raise SemanticsError(f"cannot read {stmt!r}")
                pos = m.end()
                args = tuple(elem(a) for a in m.group(2).split(","))
                fn_entries.setdefault(m.group(1), {})[args] = elem(m.group(3))
            if stmt[pos:].strip():
                raise SemanticsError(f"cannot read {stmt!r}")
            continue
        if "=" not in stmt:
            raise SemanticsError(f"cannot read {stmt!r}")
        name, rhs = (s.strip() for s in stmt.split("=", 1))
        if rhs == "id":
            preds[name] = np.eye(n, dtype=bool)
        elif rhs in ("true", "false"):
            preds[name] = np.array(rhs == "true")
        elif rhs.startswith("{") and rhs.endswith("}"):
            body = rhs[1:-1].strip()
            tuples = []
            for m in re.finditer(r"\(([^()]*)\)|([A-Za-z0-9_']+)", body):
                items = m.group(1).split(",") if m.group(1) is not None else [m.group(2)]
                tuples.append(tuple(elem(i) for i in items))
            arities = {len(t) for t in tuples}
            if len(arities) > 1:
                raise SemanticsError(f"mixed arities in {name!r}")
            arity = arities.pop() if arities else 1
            table = np.zeros((n,) * arity, dtype=bool)
            for t in tuples:
                table[t] = True
            preds[name] = table
        else:
            consts[name] = elem(rhs)
    funcs: dict[str, np.ndarray] = {c: np.array(v) for c, v in consts.items()}
    for f, entries in fn_entries.items():
        arity = len(next(iter(entries)))
        if any(len(k) != arity for k in entries):
            raise SemanticsError(f"mixed arities for function {f!r}")
        if len(entries) != n ** arity:
            raise SemanticsError(f"function {f!r} is not total")
        table = np.zeros((n,) * arity, dtype=np.int64)
        for k, v in entries.items():
            table[k] = v
        funcs[f] = table
    return Structure(st0.names, funcs, preds)


def _subsets_by_size(items: list) -> Iterator[tuple]:
    for k in range(len(items) + 1):
        yield from itertools.combinations(items, k)


def enumerate_structures(sig: Signature, size: int) -> Iterator[Structure]:
    """All structures of the given size interpreting ``sig``.

    Order: predicates by name, then functions by name, the first symbol
    varying slowest.  A predicate runs through its extensions by
    cardinality, then lexicographically; a function through its tables
    lexicographically.
    """
    n = size
    names = element_names(n)
    preds = sorted((p, k) for p, k in sig.predicates.items() if p != "=")
    funcs = sorted(sig.functions.items())
    choices = []
    for _, k in preds:
        cells = list(itertools.product(range(n), repeat=k))
        choices.append(list(_subsets_by_size(cells)))
    for _, k in funcs:
        choices.append(list(itertools.product(range(n), repeat=n ** k)))
    for combo in itertools.product(*choices):
        ptabs, ftabs = {}, {}
        for (p, k), ext in zip(preds, combo):
            table = np.zeros((n,) * k, dtype=bool)
            for cell in ext:
                table[cell] = True
            ptabs[p] = table
        for (f, k), values in zip(funcs, combo[len(preds):]):
            ftabs[f] = np.array(values, dtype=np.int64).reshape((n,) * k)
        yield Structure(names, ftabs, ptabs)


def all_structures(sig: Signature, max_size: int, min_size: int = 1) -> Iterator[Structure]:
    for n in range(min_size, max_size + 1):
        yield from enumerate_structures(sig, n)


# ---------------------------------------------------------------- scalar evaluation


@dataclass(frozen=True)
class EvalContext:
    structure: Structure
    delta: Mapping[Var, int]
    gamma: Mapping[Var, int]

    def value(self, v: Var) -> int:
        table = self.gamma if v.kind is Kind.GAMMA else self.delta
        try:
            return table[v]
        except KeyError:
            raise SemanticsError(f"no value for free variable {format_term(v)}") from None

    def override(self, y: Var, value: int) -> EvalContext:
        return EvalContext(self.structure, {**self.delta, y: value}, self.gamma)


def _eval_term(t: Term, ctx: EvalContext, bound: dict[str, int]) -> int:
    if isinstance(t, Var):
        if t.kind is Kind.BOUND:
            return bound[t.name]
        return ctx.value(t)
    args = tuple(_eval_term(a, ctx, bound) for a in t.args)
    return int(ctx.structure.function(t.fn, len(args))[args])


def _eval_formula(f: Formula, ctx: EvalContext, bound: dict[str, int]) -> bool:
    if isinstance(f, Atom):
        args = tuple(_eval_term(a, ctx, bound) for a in f.args)
        return bool(ctx.structure.predicate(f.pred, len(args))[args])
    if isinstance(f, Not):
        return not _eval_formula(f.body, ctx, bound)
    if isinstance(f, And):
        return _eval_formula(f.left, ctx, bound) and _eval_formula(f.right, ctx, bound)
    if isinstance(f, Or):
        return _eval_formula(f.left, ctx, bound) or _eval_formula(f.right, ctx, bound)
    if isinstance(f, Quantified):
        test = all if isinstance(f, Forall) else any
        return test(_eval_formula(f.body, ctx, {**bound, f.var: d})
                    for d in range(ctx.structure.size))
    raise TypeError(f"not a formula: {f!r}")


def evaluate(item, ctx: EvalContext):
    """Value of a term, truth of a formula, of a sequent (tuple, read as a
    disjunction) or of a set of sequents (any other collection, read as a
    conjunction)."""
    if isinstance(item, (Var, App)):
        return _eval_term(item, ctx, {})
    if isinstance(item, (Atom, Not, And, Or, Forall, Exists)):
        return _eval_formula(item, ctx, {})
    if isinstance(item, tuple):
        return any(_eval_formula(f, ctx, {}) for f in item)
    return all(evaluate(tuple(s), ctx) for s in item)


# ---------------------------------------------------------------- vectorized evaluation


def _term_array(t: Term, st: Structure, axes: dict, bound: dict, ndim: int):
    if isinstance(t, Var):
        ax = bound[t.name] if t.kind is Kind.BOUND else axes.get(t)
        if ax is None:
            raise SemanticsError(f"no value for free variable {format_term(t)}")
        shape = [1] * ndim
        shape[ax] = st.size
        return np.arange(st.size).reshape(shape)
    args = tuple(_term_array(a, st, axes, bound, ndim) for a in t.args)
    table = st.function(t.fn, len(args))
    return table[args] if args else table[()]


def _formula_array(f: Formula, st: Structure, axes: dict, bound: dict, depth: int, ndim: int):
    if isinstance(f, Atom):
        args = tuple(_term_array(a, st, axes, bound, ndim) for a in f.args)
        table = st.predicate(f.pred, len(args))
        return table[args] if args else table[()]
    if isinstance(f, Not):
        return ~_formula_array(f.body, st, axes, bound, depth, ndim)
    if isinstance(f, And):
        return (_formula_array(f.left, st, axes, bound, depth, ndim)
                & _formula_array(f.right, st, axes, bound, depth, ndim))
    if isinstance(f, Or):
        return (_formula_array(f.left, st, axes, bound, depth, ndim)
                | _formula_array(f.right, st, axes, bound, depth, ndim))
    if isinstance(f, Quantified):
        ax = len(axes) + depth
        body = _formula_array(f.body, st, axes, {**bound, f.var: ax}, depth + 1, ndim)
        body = np.asarray(body)
        if body.ndim < ndim:
            body = body.reshape(body.shape + (1,) * (ndim - body.ndim))
        reduce = np.all if isinstance(f, Forall) else np.any
        return reduce(body, axis=ax, keepdims=True)
    raise TypeError(f"not a formula: {f!r}")


def _nesting(f: Formula) -> int:
    if isinstance(f, Atom):
        return 0
    if isinstance(f, Not):
        return _nesting(f.body)
    if isinstance(f, (And, Or)):
        return max(_nesting(f.left), _nesting(f.right))
    return 1 + _nesting(f.body)


@lru_cache(maxsize=200_000)
def _formula_table(f: Formula, st: Structure, gammas: tuple, deltas: tuple) -> np.ndarray:
    free = gammas + deltas
    axes = {v: i for i, v in enumerate(free)}
    ndim = len(free) + _nesting(f)
    if ndim > 32:
        raise EnumerationLimit("too many variables for the vectorized evaluator")
    n = st.size
    out = np.asarray(_formula_array(f, st, axes, {}, 0, ndim))
    if out.ndim < ndim:
        out = out.reshape(out.shape + (1,) * (ndim - out.ndim))
    out = np.broadcast_to(out, (n,) * len(free) + (1,) * (ndim - len(free)))
    out = out.reshape(n ** len(gammas), n ** len(deltas))
    out.setflags(write=False)
    return out


def _as_goals(goals) -> tuple[tuple, ...]:
    """A set of sequents; a bare tuple of formulas counts as one sequent."""
    if isinstance(goals, tuple) and goals and not isinstance(goals[0], (tuple, list)):
        return (goals,)
    return tuple(tuple(s) for s in goals)


def truth_table(goals, st: Structure, gammas: tuple, deltas: tuple) -> np.ndarray:
    """Boolean array ``T[g, p]``: the goals hold under existential assignment
    code ``g`` and universal assignment code ``p`` (row-major in carrier order)."""
    n = st.size
    out = np.ones((n ** len(gammas), n ** len(deltas)), dtype=bool)
    for seq in _as_goals(goals):
        row = np.zeros_like(out)
        for f in seq:
            row |= _formula_table(f, st, tuple(gammas), tuple(deltas))
        out &= row
    return out


# ---------------------------------------------------------------- existential valuations


@dataclass(frozen=True)
class ExistentialValuation:
    relation: frozenset                      # S_e: pairs (y, x)
    tables: Mapping[Var, Mapping[tuple, int]]

    def reads(self, x: Var) -> tuple[Var, ...]:
        return tuple(sorted(rl.preimage(self.relation, {x})))

    def describe(self, names: tuple[str, ...]) -> str:
        parts = []
        for x in sorted(self.tables):
            reads = self.reads(x)
            rows = ", ".join(
                ("(" + ",".join(names[i] for i in k) + ")" if reads else "()") + f"->{names[v]}"
                for k, v in sorted(self.tables[x].items()))
            label = ",".join(map(str, reads))
            parts.append(f"{x}[{label}]: {rows}")
        return "; ".join(parts)


def apply_epsilon(e: ExistentialValuation, pi: Mapping[Var, int]) -> dict[Var, int]:
    return {x: table[tuple(pi[y] for y in e.reads(x))] for x, table in e.tables.items()}


def _admissible(s: frozenset, r: frozenset, strong: bool) -> bool:
    sr = rl.compose(s, r)
    return rl.is_acyclic(sr) if strong else rl.is_irreflexive(sr)


def admissible_relations(gammas, deltas, r, strong: bool, limit: int = 20) -> list[frozenset]:
    """Every admissible semantic relation over the carriers."""
    pairs = [(y, x) for x in gammas for y in deltas]
    if len(pairs) > limit:
        raise EnumerationLimit(f"{len(pairs)} candidate dependency pairs")
    r = frozenset(r)
    out = []
    for bits in range(1 << len(pairs)):
        s = frozenset(p for i, p in enumerate(pairs) if bits >> i & 1)
        if _admissible(s, r, strong):
            out.append(s)
    return out


def maximal_relations(gammas, deltas, r, strong: bool) -> list[frozenset]:
    r = frozenset(r)
    if not strong:
        # a single maximum: read everything not forbidden
        return [frozenset((y, x) for x in gammas for y in deltas if (x, y) not in r)]
    pairs = [(y, x) for x in gammas for y in deltas if (x, y) not in r]
    found = admissible_relations(gammas, deltas, r, True)
    return [s for s in found
            if all(p in s or not _admissible(s | {p}, r, True) for p in pairs)]


def _count(read_sets, n: int) -> int:
    total = 1
    for reads in read_sets:
        total *= n ** (n ** len(reads))
    return total


def enumerate_valuations(gammas, deltas, r, strong: bool, st: Structure,
                         cap: int = DEFAULT_CAP) -> Iterator[ExistentialValuation]:
    """Every admissible valuation over the carriers, each exactly once."""
    gammas, deltas = tuple(sorted(gammas)), tuple(sorted(deltas))
    n = st.size
    relations = admissible_relations(gammas, deltas, frozenset(r), strong)
    total = sum(_count([rl.preimage(s, {x}) for x in gammas], n) for s in relations)
    if total > cap:
        raise EnumerationLimit(f"{total} valuations exceed the cap of {cap}")
    for s in relations:
        per_x = []
        for x in gammas:
            reads = tuple(sorted(rl.preimage(s, {x})))
            keys = list(itertools.product(range(n), repeat=len(reads)))
            per_x.append([dict(zip(keys, vals))
                          for vals in itertools.product(range(n), repeat=len(keys))])
        for tables in itertools.product(*per_x):
            yield ExistentialValuation(s, dict(zip(gammas, tables)))


def _digits(codes: np.ndarray, width: int, n: int) -> np.ndarray:
    """Split assignment codes into per-variable values (most significant first)."""
    out = np.empty(codes.shape + (width,), dtype=np.int64)
    rest = codes.copy()
    for i in range(width - 1, -1, -1):
        out[..., i] = rest % n
        rest //= n
    return out


@lru_cache(maxsize=4096)
def _epsilon_space(gammas: tuple, deltas: tuple, r: frozenset, strong: bool, n: int,
                   cap: int) -> np.ndarray:
    """Rows ``E[k, p]``: existential assignment code chosen under ``p``, one
    row per distinct function realised by an admissible valuation."""
    n_pi = n ** len(deltas)
    pi_vals = _digits(np.arange(n_pi), len(deltas), n)
    blocks = []
    budget = 0
    for s in maximal_relations(gammas, deltas, r, strong):
        read_sets = [tuple(i for i, y in enumerate(deltas) if (y, x) in s) for x in gammas]
        budget += _count(read_sets, n)
        if budget > cap:
            raise EnumerationLimit(f"more than {cap} existential valuations")
        block = np.zeros((1, n_pi), dtype=np.int64)
        for reads in read_sets:
            k = len(reads)
            idx = np.zeros(n_pi, dtype=np.int64)
            for i in reads:
                idx = idx * n + pi_vals[:, i]
            tables = _digits(np.arange(n ** (n ** k)), n ** k, n)  # (functions, inputs)
            values = tables[:, idx]                                 # (functions, n_pi)
            block = (block[:, None, :] * n + values[None, :, :]).reshape(-1, n_pi)
        blocks.append(block)
    space = np.unique(np.concatenate(blocks), axis=0) if len(blocks) > 1 else blocks[0]
    space.setflags(write=False)
    return space


@dataclass(frozen=True)
class Carrier:
    gammas: tuple
    deltas: tuple

    @classmethod
    def of(cls, *items, extra=()) -> Carrier:
        gs, ds = free_vars([*items, *extra])
        return cls(tuple(sorted(gs)), tuple(sorted(ds)))

    def restrict(self, r) -> frozenset:
        g, d = set(self.gammas), set(self.deltas)
        return frozenset((x, y) for x, y in r if x in g and y in d)


def _choice_items(cc: ChoiceCondition | None):
    if not cc:
        return []
    return [list(cc.entries.keys()), list(cc.entries.values())]


class _Problem:
    """Shared precomputation for one structure, carrier, condition and mode."""

    def __init__(self, st: Structure, carrier: Carrier, r, strong: bool,
                 cc: ChoiceCondition | None = None, cap: int = DEFAULT_CAP):
        self.st, self.carrier, self.strong = st, carrier, strong
        self.r = carrier.restrict(r)
        self.space = _epsilon_space(carrier.gammas, carrier.deltas, self.r, strong, st.size, cap)
        self.n_pi = st.size ** len(carrier.deltas)
        self.cc = cc
        self._compat = None

    def holds(self, goals) -> np.ndarray:
        """``V[k, p]``: the goals hold under function ``k`` and ``p``."""
        t = truth_table(goals, self.st, self.carrier.gammas, self.carrier.deltas)
        return t[self.space, np.arange(self.n_pi)]

    def compatible(self) -> np.ndarray:
        if self._compat is None:
            n = self.st.size
            ok = np.ones(self.space.shape, dtype=bool)
            if self.cc:
                deltas = self.carrier.deltas
                pi_vals = _digits(np.arange(self.n_pi), len(deltas), n)
                for y, b in self.cc.entries.items():
                    i = deltas.index(y)
                    weight = n ** (len(deltas) - 1 - i)
                    base = np.arange(self.n_pi) - pi_vals[:, i] * weight
                    moved = base[:, None] + np.arange(n)[None, :] * weight   # (p, eta)
                    v = self.holds(((b,),))
                    ok &= ~v | v[:, moved].all(axis=2)
            self._compat = ok
        return self._compat

    def dependencies(self, k: int) -> frozenset:
        """The smallest semantic relation realising row ``k``."""
        g, d = self.carrier.gammas, self.carrier.deltas
        n = self.st.size
        vals = _digits(self.space[k], len(g), n)  # (p, |g|)
        out = set()
        for j, x in enumerate(g):
            cube = vals[:, j].reshape((n,) * len(d)) if d else vals[:, j]
            for i, y in enumerate(d):
                if np.any(cube != cube.take([0], axis=i)):
                    out.add((y, x))
        return frozenset(out)

    def valuation(self, k: int) -> ExistentialValuation:
        s = self.dependencies(k)
        g, d = self.carrier.gammas, self.carrier.deltas
        n = self.st.size
        vals = _digits(self.space[k], len(g), n)
        pi_vals = _digits(np.arange(self.n_pi), len(d), n)
        tables = {}
        for j, x in enumerate(g):
            reads = [d.index(y) for y in sorted(rl.preimage(s, {x}))]
            tables[x] = {tuple(int(pi_vals[p, i]) for i in reads): int(vals[p, j])
                         for p in range(self.n_pi)}
        return ExistentialValuation(s, tables)


def _setup(st, goals_list, r, strong, cc=None, extra=(), cap=DEFAULT_CAP) -> _Problem:
    carrier = Carrier.of(*(_as_goals(g) for g in goals_list), *_choice_items(cc), extra=extra)
    return _Problem(st, carrier, r, strong, cc, cap)


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: ExistentialValuation | None = None
    failing_pi: dict | None = None
    cycle: list | None = None

    def __bool__(self) -> bool:
        return self.holds


def _pi_dict(prob: _Problem, p: int) -> dict:
    d = prob.carrier.deltas
    vals = _digits(np.array([p]), len(d), prob.st.size)[0]
    return dict(zip(d, map(int, vals)))


def check_valid(goals, r, st: Structure, *, strong: bool = False,
                cc: ChoiceCondition | None = None, extra=(), cap: int = DEFAULT_CAP) -> Verdict:
    """(Strong) validity with a witness valuation, or the failure explanation.

    In the strong case without a witness, a weakly admissible witness (if
    any) is reported through ``cycle``: the cycle of its relation composed
    with ``r``.
    """
    prob = _setup(st, [goals], r, strong, cc if strong else None, extra, cap)
    ok = prob.holds(goals)
    if strong:
        ok = ok | ~prob.compatible()
    good = np.flatnonzero(ok.all(axis=1))
    if good.size:
        return Verdict(True, witness=prob.valuation(int(good[0])))
    cycle = None
    if strong:
        weak = _setup(st, [goals], r, False, None, extra, cap)
        wgood = np.flatnonzero(weak.holds(goals).all(axis=1))
        if wgood.size:
            s = weak.dependencies(int(wgood[0]))
            cycle = rl.find_cycle(rl.compose(s, weak.r))
    return Verdict(False, cycle=cycle)


def is_r_valid(goals, r, st: Structure, extra=(), cap: int = DEFAULT_CAP) -> bool:
    prob = _setup(st, [goals], r, False, None, extra, cap)
    return bool(prob.holds(goals).all(axis=1).any())


def is_strong_valid(goals, r, cc: ChoiceCondition | None, st: Structure, extra=(),
                    cap: int = DEFAULT_CAP) -> bool:
    prob = _setup(st, [goals], r, True, cc, extra, cap)
    return bool((prob.holds(goals) | ~prob.compatible()).all(axis=1).any())


def reduces(g0, g1, r, st: Structure, extra=(), cap: int = DEFAULT_CAP) -> bool:
    prob = _setup(st, [g0, g1], r, False, None, extra, cap)
    v1 = prob.holds(g1).all(axis=1)
    v0 = prob.holds(g0).all(axis=1)
    return bool(np.all(~v1 | v0))


def strong_reduces(g0, g1, r, cc: ChoiceCondition | None, st: Structure, extra=(),
                   cap: int = DEFAULT_CAP) -> bool:
    prob = _setup(st, [g0, g1], r, True, cc, extra, cap)
    ok = ~prob.compatible() | ~prob.holds(g1) | prob.holds(g0)
    return bool(ok.all())


def reduction_counterexample(g0, g1, r, st: Structure, *, strong: bool = False,
                             cc: ChoiceCondition | None = None, extra=(),
                             cap: int = DEFAULT_CAP) -> Verdict:
    """Like (strong_)reduces, but reports a falsifying valuation and ``pi``."""
    prob = _setup(st, [g0, g1], r, strong, cc if strong else None, extra, cap)
    h0, h1 = prob.holds(g0), prob.holds(g1)
    if strong:
        bad = prob.compatible() & h1 & ~h0
        hits = np.argwhere(bad)
        if not hits.size:
            return Verdict(True)
        k, p = map(int, hits[0])
        return Verdict(False, witness=prob.valuation(k), failing_pi=_pi_dict(prob, p))
    bad = h1.all(axis=1) & ~h0.all(axis=1)
    ks = np.flatnonzero(bad)
    if not ks.size:
        return Verdict(True)
    k = int(ks[0])
    p = int(np.flatnonzero(~h0[k])[0])
    return Verdict(False, witness=prob.valuation(k), failing_pi=_pi_dict(prob, p))


# ---------------------------------------------------------------- reference definitions


def _context(st: Structure, e: ExistentialValuation, pi: Mapping[Var, int]) -> EvalContext:
    return EvalContext(st, dict(pi), apply_epsilon(e, pi))


def is_compatible(pi: Mapping[Var, int], e: ExistentialValuation,
                  cc: ChoiceCondition | None, st: Structure) -> bool:
    """Direct reading of compatibility; ``pi`` must cover every variable read."""
    if not cc:
        return True
    for y, b in cc.entries.items():
        if not evaluate(b, _context(st, e, pi)):
            continue
        for eta in range(st.size):
            moved = {**pi, y: eta}
            if not evaluate(b, _context(st, e, moved)):
                return False
    return True


def reference_checks(goals_list, r, st: Structure, strong: bool,
                     cc: ChoiceCondition | None = None) -> dict:
    """Slow, literal versions of the validity notions, for cross-checking.

    Returns a dict with keys ``valid`` (one entry per goal set) and
    ``reduces`` (first goal set against the second, when two are given).
    """
    # lists, so that evaluate reads each goal set as a conjunction of sequents
    goals_list = [list(_as_goals(g)) for g in goals_list]
    carrier = Carrier.of(*goals_list, *_choice_items(cc if strong else None))
    r = carrier.restrict(r)
    pis = [dict(zip(carrier.deltas, vals))
           for vals in itertools.product(range(st.size), repeat=len(carrier.deltas))]
    valid = [False] * len(goals_list)
    red = True
    for e in enumerate_valuations(carrier.gammas, carrier.deltas, r, strong, st):
        per = []
        for goals in goals_list:
            ok_all = True
            flags = []
            for pi in pis:
                ok = evaluate(goals, _context(st, e, pi))
                if strong and not is_compatible(pi, e, cc, st):
                    ok = True
                flags.append(ok)
                ok_all &= ok
            per.append((ok_all, flags))
        for i, (ok_all, _) in enumerate(per):
            valid[i] |= ok_all
        if len(per) == 2:
            if strong:
                red &= all(f0 or not f1 for f0, f1 in zip(per[0][1], per[1][1]))
            else:
                red &= per[0][0] or not per[1][0]
    return {"valid": valid, "reduces": red if len(goals_list) == 2 else None}
