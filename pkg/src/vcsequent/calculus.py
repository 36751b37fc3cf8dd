"""Proof forests and the three kinds of proof steps.

A forest only changes through :func:`hypothesize`, :func:`expand` and
:func:`instantiate`; each returns a new forest and leaves the old one
untouched, so an earlier snapshot can always be resumed.  In weak mode the
global state is a variable condition; in strong mode it is a variable
condition plus a choice-condition.

Every step is also appended to the forest's trace, one line per step::

    mode strong
    hyp liberalized
    expand 0#0 delta_all 1 y^a
    inst {x^e -> y^a}
    qed 0
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace

from . import relations as rl
from .choice import ChoiceCondition, StrongState, extended_strong_update
from .syntax import (And, Exists, Forall, Formula, Kind, Not, Or, ParseError,
                     Sequent, Substitution, Var, WellFormednessError,
                     apply_subst, conjugate, format_formula, format_sequent,
                     format_term, free_vars, instantiate_quantifier,
                     parse_sequent, parse_term, rename)
from .varcond import InadmissibleSubstitution, as_subst, check_varcond, weak_update

WEAK, STRONG = "weak", "strong"

RULES = {
    "alpha_or": "alpha", "alpha_nand": "alpha", "alpha_notnot": "alpha",
    "beta_and": "beta", "beta_nor": "beta",
    "gamma_ex": "gamma", "gamma_nall": "gamma",
    "delta_all": "delta", "delta_nex": "delta",
}


class ProofError(ValueError):
    pass


# ---------------------------------------------------------------- trees


@dataclass(frozen=True)
class Node:
    label: Sequent
    children: tuple[Node, ...] | None = None  # None marks a leaf

    @property
    def is_leaf(self) -> bool:
        return self.children is None


def leaves(t: Node) -> list[tuple[tuple[int, ...], Node]]:
    """Leaves with their paths, in depth-first left-to-right order."""
    out = []
    stack = [((), t)]
    while stack:
        path, node = stack.pop()
        if node.is_leaf:
            out.append((path, node))
        else:
            for i in range(len(node.children) - 1, -1, -1):
                stack.append((path + (i,), node.children[i]))
    return out


def _replace_at(t: Node, path: tuple[int, ...], new: Node) -> Node:
    if not path:
        return new
    kids = list(t.children)
    kids[path[0]] = _replace_at(kids[path[0]], path[1:], new)
    return Node(t.label, tuple(kids))


def _map_labels(t: Node, fn) -> Node:
    if t.is_leaf:
        return Node(fn(t.label))
    return Node(fn(t.label), tuple(_map_labels(c, fn) for c in t.children))


def open_sequents(t: Node) -> list[Sequent]:
    return [node.label for _, node in leaves(t)]


def is_axiom(s: Sequent) -> bool:
    """Some member's conjugate is also a member."""
    members = set(s)
    return any(conjugate(f) in members for f in s)


def is_closed(t: Node) -> bool:
    return all(is_axiom(s) for s in open_sequents(t))


def tree_size(t: Node) -> int:
    return 1 + (sum(tree_size(c) for c in t.children) if t.children else 0)


# ---------------------------------------------------------------- forests


@dataclass(frozen=True)
class RuleInstance:
    tree: int
    leaf: int
    rule: str
    index: int
    var: Var | None = None
    flavor: str | None = None  # "weak" or "liberalized" for delta rules

    def __post_init__(self):
        if self.rule not in RULES:
            raise ProofError(f"unknown rule {self.rule!r}")
        if self.flavor not in (None, "weak", "liberalized"):
            raise ProofError(f"unknown delta flavor {self.flavor!r}")


@dataclass(frozen=True)
class ProofForest:
    mode: str = WEAK
    entries: tuple[tuple[Sequent, Node], ...] = ()
    r: frozenset = frozenset()
    choice: ChoiceCondition = field(default_factory=ChoiceCondition)
    used: frozenset = frozenset()   # every free variable ever seen
    trace: tuple[str, ...] = ()

    def __post_init__(self):
        if self.mode not in (WEAK, STRONG):
            raise ProofError(f"unknown mode {self.mode!r}")

    @property
    def state(self) -> StrongState:
        return StrongState(self.r, self.choice)

    def tree(self, i: int) -> Node:
        try:
            return self.entries[i][1]
        except IndexError:
            raise ProofError(f"no tree {i}") from None

    def leaf(self, tree: int, leaf: int) -> tuple[tuple[int, ...], Node]:
        ls = leaves(self.tree(tree))
        if not 0 <= leaf < len(ls):
            raise ProofError(f"tree {tree} has no leaf {leaf}")
        return ls[leaf]

    def open_leaves(self) -> list[tuple[int, int, Sequent]]:
        """``(tree, leaf, sequent)`` for every leaf that is not an axiom."""
        return [(i, j, node.label)
                for i, (_, t) in enumerate(self.entries)
                for j, (_, node) in enumerate(leaves(t))
                if not is_axiom(node.label)]

    def all_closed(self) -> bool:
        return all(is_closed(t) for _, t in self.entries)

    def show(self) -> str:
        lines = [f"mode {self.mode}"]
        for i, (root, t) in enumerate(self.entries):
            lines.append(f"tree {i}: {format_sequent(root)}")
            for j, (_, node) in enumerate(leaves(t)):
                mark = "*" if is_axiom(node.label) else " "
                lines.append(f"  {mark} {i}#{j}: {format_sequent(node.label)}")
        lines.append("R = " + format_relation(self.r))
        if self.mode == STRONG:
            lines.extend("  " + ln for ln in self.choice.lines())
            lines.append("< = " + format_relation(self.choice.order))
        return "\n".join(lines)

    def with_trace(self, line: str, **changes) -> ProofForest:
        return replace(self, trace=self.trace + (line,), **changes)


def format_relation(r: Iterable[tuple[Var, Var]]) -> str:
    return "{" + ", ".join(f"({format_term(a)}, {format_term(b)})" for a, b in sorted(r)) + "}"


def new_forest(mode: str = WEAK) -> ProofForest:
    return ProofForest(mode=mode, trace=(f"mode {mode}",))


def _dedup(entries) -> tuple:
    seen, out = set(), []
    for e in entries:
        if e not in seen:
            seen.add(e)
            out.append(e)
    return tuple(out)


def _vars_of(*items) -> frozenset:
    gs, ds = free_vars(list(items))
    return gs | ds


def hypothesize(forest: ProofForest, s: Sequent, r_extra: Iterable = (),
                name: str | None = None) -> ProofForest:
    s = tuple(s)
    r_extra = check_varcond(r_extra)
    if forest.mode == STRONG:
        r_new = forest.r | r_extra
        bad = rl.compose(r_extra, forest.choice.ordering()) - r_new
        if bad:
            raise ProofError(f"hypothesis condition violates R'' . < <= R': {format_relation(bad)}")
    label = name if name else f"[{format_sequent(s)}]"
    line = f"hyp {label}" + (f" R {format_relation(r_extra)}" if r_extra else "")
    entries = _dedup(forest.entries + ((s, Node(s)),))
    return forest.with_trace(line, entries=entries, r=forest.r | r_extra,
                             used=forest.used | _vars_of(s, list(r_extra)))


def fresh_var(forest: ProofForest, base: str, kind: Kind, avoid: Iterable[Var] = ()) -> Var:
    taken = set(forest.used) | set(avoid) | set(forest.choice.entries)
    taken |= rl.field_of(forest.choice.order)
    cand = Var(base, kind)
    i = 0
    while cand in taken:
        i += 1
        cand = Var(f"{base}{i}", kind)
    return cand


def _pattern(rule: str, f: Formula) -> bool:
    if rule == "alpha_or":
        return isinstance(f, Or)
    if rule == "alpha_nand":
        return isinstance(f, Not) and isinstance(f.body, And)
    if rule == "alpha_notnot":
        return isinstance(f, Not) and isinstance(f.body, Not)
    if rule == "beta_and":
        return isinstance(f, And)
    if rule == "beta_nor":
        return isinstance(f, Not) and isinstance(f.body, Or)
    if rule == "gamma_ex":
        return isinstance(f, Exists)
    if rule == "gamma_nall":
        return isinstance(f, Not) and isinstance(f.body, Forall)
    if rule == "delta_all":
        return isinstance(f, Forall)
    if rule == "delta_nex":
        return isinstance(f, Not) and isinstance(f.body, Exists)
    return False


def rule_for(f: Formula) -> str | None:
    """The rule whose pattern ``f`` matches, if any (atoms and negated atoms have none)."""
    for rule in RULES:
        if _pattern(rule, f):
            return rule
    return None


def expand(forest: ProofForest, ri: RuleInstance) -> ProofForest:
    path, leaf = forest.leaf(ri.tree, ri.leaf)
    s = leaf.label
    if not 0 <= ri.index < len(s):
        raise ProofError(f"leaf {ri.tree}#{ri.leaf} has no formula {ri.index}")
    f = s[ri.index]
    if not _pattern(ri.rule, f):
        raise ProofError(f"{ri.rule} does not apply to {format_formula(f)}")
    rest = s[:ri.index] + s[ri.index + 1:]
    family = RULES[ri.rule]
    if ri.flavor is not None:
        wanted = "weak" if forest.mode == WEAK else "liberalized"
        if family != "delta" or ri.flavor != wanted:
            raise ProofError(f"{ri.flavor} delta step is not available in {forest.mode} mode")
    r_new, choice, introduced = forest.r, forest.choice, None

    if family == "alpha":
        if ri.rule == "alpha_or":
            children = [(f.left, f.right) + rest]
        elif ri.rule == "alpha_nand":
            children = [(conjugate(f.body.left), conjugate(f.body.right)) + rest]
        else:
            children = [(f.body.body,) + rest]
    elif family == "beta":
        a, b = (f.left, f.right) if ri.rule == "beta_and" else (f.body.left, f.body.right)
        if ri.rule == "beta_nor":
            a, b = conjugate(a), conjugate(b)
        children = [(a,) + rest, (b,) + rest]
    else:
        q = f if ri.rule in ("gamma_ex", "delta_all") else f.body
        kind = Kind.GAMMA if family == "gamma" else Kind.DELTA
        x = ri.var if ri.var is not None else fresh_var(forest, q.var, kind)
        if x.kind is not kind:
            raise ProofError(f"{ri.rule} needs a {'existential' if kind is Kind.GAMMA else 'universal'} variable")
        gs, ds = free_vars(s)
        if family == "gamma":
            if x in gs:
                raise ProofError(f"{format_term(x)} is not fresh for this sequent")
        elif x in ds:
            raise ProofError(f"{format_term(x)} is not fresh for this sequent")
        inst = instantiate_quantifier(q, x)
        if q is not f:
            inst = conjugate(inst)
        if family == "gamma":
            children = [(inst,) + s]
        else:
            children = [(inst,) + rest]
            if forest.mode == WEAK:
                r_new = forest.r | frozenset((u, x) for u in gs)
            else:
                if x in choice.entries or x in rl.domain(choice.order):
                    raise ProofError(f"{format_term(x)} is already constrained by the choice-condition")
                ga, da = free_vars(q)
                older = set(ga) | rl.preimage(forest.r, da)
                r_new = forest.r | frozenset((u, x) for u in older)
                below = set(da) | rl.preimage(choice.ordering(), da)
                choice = ChoiceCondition({**choice.entries, x: inst},
                                         choice.order | frozenset((z, x) for z in below))
        introduced = x

    kids = tuple(Node(c) for c in _dedup(tuple(children)))
    root, t = forest.entries[ri.tree]
    t2 = _replace_at(t, path, Node(s, kids))
    entries = list(forest.entries)
    entries[ri.tree] = (root, t2)
    var_text = format_term(introduced) if introduced is not None else "-"
    line = f"expand {ri.tree}#{ri.leaf} {ri.rule} {ri.index} {var_text}"
    used = forest.used | ({introduced} if introduced is not None else set())
    return forest.with_trace(line, entries=_dedup(entries), r=r_new, choice=choice, used=used)


def instantiate(forest: ProofForest, sigma) -> ProofForest:
    sigma = as_subst(sigma)
    if forest.mode == WEAK:
        r_new = weak_update(sigma, forest.r)
        choice = forest.choice
    else:
        st = extended_strong_update(sigma, forest.state)
        r_new, choice = st.r, st.choice
    entries = _dedup((apply_subst(root, sigma), _map_labels(t, lambda s: apply_subst(s, sigma)))
                     for root, t in forest.entries)
    used = forest.used | _vars_of(list(sigma.values()))
    return forest.with_trace(f"inst {sigma}", entries=entries, r=r_new, choice=choice, used=used)


def qed(forest: ProofForest, tree: int) -> ProofForest:
    t = forest.tree(tree)
    if not is_closed(t):
        raise ProofError(f"tree {tree} is not closed")
    return forest.with_trace(f"qed {tree}")


def externalize_choices(root: Sequent, state: StrongState,
                        varsigma: Mapping[Var, Var]) -> tuple[Sequent, frozenset]:
    """Replace chosen universal variables of ``root`` by fresh existential ones.

    Returns the renamed root and the variable condition under which it is
    valid with an empty choice-condition.
    """
    root = tuple(root)
    cc = state.choice
    gs, ds = free_vars(root)
    expected = set(ds) & set(cc.entries)
    if set(varsigma) != expected:
        raise ProofError("the renaming must cover exactly the chosen universal variables of the root")
    targets = list(varsigma.values())
    if len(set(targets)) != len(targets):
        raise ProofError("the renaming is not injective")
    for w in targets:
        if w.kind is not Kind.GAMMA or w in gs:
            raise ProofError(f"{format_term(w)} is not a fresh existential variable")
    ran = set(targets)
    less = cc.ordering()
    r_new = {(x, y) for x, y in state.r if x not in ran}
    for y, w in varsigma.items():
        r_new |= {(w, z) for z in rl.image(less, {y})}
    new_root = rename(root, dict(varsigma))
    mentioned = set(free_vars(new_root)[0]) | rl.domain(r_new) | ran
    r_new |= {(x, y) for x in mentioned for y in cc.entries}
    return new_root, frozenset(r_new)


# ---------------------------------------------------------------- traces


def parse_substitution(text: str) -> Substitution:
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise ParseError("substitution must be written {x^e -> t, ...}", 0, text)
    body = text[1:-1]
    items, depth, cur = [], 0, ""
    for ch in body:
        if ch == "," and depth == 0:
            items.append(cur)
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    if cur.strip():
        items.append(cur)
    mapping = {}
    for item in items:
        if "->" not in item:
            raise ParseError(f"missing '->' in {item.strip()!r}", 0, text)
        lhs, rhs = item.split("->", 1)
        x = parse_term(lhs)
        if not isinstance(x, Var) or x.kind is not Kind.GAMMA:
            raise ParseError(f"{lhs.strip()!r} is not an existential variable", 0, text)
        mapping[x] = parse_term(rhs)
    return Substitution(mapping)


def parse_relation(text: str) -> frozenset:
    pairs = re.findall(r"\(\s*([^(),]+?)\s*,\s*([^(),]+?)\s*\)", text)
    return frozenset((parse_term(a), parse_term(b)) for a, b in pairs)


_EXPAND = re.compile(r"expand\s+(\d+)#(\d+)\s+(\w+)\s+(\d+)\s+(\S+)$")


class ReplayError(ProofError):
    def __init__(self, step: int, line: str, reason: str):
        self.step, self.line = step, line
        super().__init__(f"step {step} ({line!r}): {reason}")


def apply_line(forest: ProofForest | None, line: str,
               problems: Mapping[str, Sequent] = {}) -> ProofForest:
    """Execute one trace line; ``forest`` is None before the ``mode`` line."""
    line = line.strip()
    if line.startswith("mode"):
        mode = line.split()[1] if len(line.split()) > 1 else ""
        if forest is not None and forest.entries:
            raise ProofError("mode must come first")
        return new_forest(mode)
    if forest is None:
        forest = new_forest(WEAK)
    if line.startswith("hyp "):
        rest = line[4:].strip()
        r_extra = frozenset()
        if " R {" in rest:
            rest, rel_text = rest.split(" R {", 1)
            r_extra = parse_relation("{" + rel_text)
        if rest.startswith("["):
            if not rest.endswith("]"):
                raise ProofError("unterminated hypothesis")
            return hypothesize(forest, parse_sequent(rest[1:-1]), r_extra)
        if rest not in problems:
            raise ProofError(f"unknown problem {rest!r}")
        return hypothesize(forest, problems[rest], r_extra, name=rest)
    if line.startswith("expand"):
        m = _EXPAND.match(line)
        if not m:
            raise ProofError("malformed expand line")
        var = None if m.group(5) == "-" else parse_term(m.group(5))
        if var is not None and not isinstance(var, Var):
            raise ProofError("the introduced variable must be a variable")
        ri = RuleInstance(int(m.group(1)), int(m.group(2)), m.group(3), int(m.group(4)), var)
        return expand(forest, ri)
    if line.startswith("inst"):
        return instantiate(forest, parse_substitution(line[4:]))
    if line.startswith("qed"):
        return qed(forest, int(line.split()[1]))
    raise ProofError(f"unknown step {line!r}")


def replay(lines: Iterable[str], problems: Mapping[str, Sequent] = {}) -> ProofForest:
    forest = None
    for i, line in enumerate(lines, 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            forest = apply_line(forest, line, problems)
        except (ProofError, WellFormednessError, ParseError,
                InadmissibleSubstitution, ValueError) as exc:
            if isinstance(exc, ReplayError):
                raise
            raise ReplayError(i, line.strip(), str(exc)) from exc
    return forest if forest is not None else new_forest(WEAK)
