"""Command line front end.

    vcsequent prove problems/liberalized.p --mode strong --gamma 1
    vcsequent replay proof.trace problems/liberalized.p
    vcsequent oracle valid --goal "x^e = y^a" --all-sizes 3
    vcsequent repl problems/nested.p nested --mode strong
    vcsequent selftest --seed 7

Exit codes: 0 proved / holds, 1 unproven / fails / not closed, 2 error,
3 the oracle disagrees with a proof (a kernel bug).  Every run ends with a
``RESULT:`` line.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import acceptance
from . import calculus as calc
from . import semantics as sem
from .calculus import ProofError, ReplayError, RuleInstance
from .choice import ChoiceCondition, violations
from .prover import SearchLimits, close_attempt, countermodel, extract_answers, search
from .syntax import (ParseError, WellFormednessError, format_sequent,
                     format_term, parse_formula, parse_problems, parse_sequent,
                     parse_term, signature_of)
from .varcond import InadmissibleSubstitution

OK, FAILED, ERROR, DISAGREE = 0, 1, 2, 3

INPUT_ERRORS = (OSError, ParseError, WellFormednessError, ProofError,
                InadmissibleSubstitution, sem.SemanticsError, ValueError)


class UsageError(Exception):
    pass


def _result(word: str, code: int) -> int:
    print(f"RESULT: {word}")
    return code


def load_problems(path: str) -> dict:
    problems = parse_problems(Path(path).read_text(encoding="utf-8"))
    if not problems:
        raise UsageError(f"{path}: no problems")
    return problems


def _select(problems: dict, name: str | None) -> dict:
    if name is None:
        return problems
    if name not in problems:
        raise UsageError(f"unknown problem {name!r}; known: {', '.join(problems)}")
    return {name: problems[name]}


# ---------------------------------------------------------------- prove


def _oracle_disagreements(s, result, max_size: int) -> list[str]:
    """Structures (size <= max_size) where a proved problem is not valid."""
    forest = result.forest
    strong = forest.mode == calc.STRONG
    sig = signature_of(s, *(root for root, _ in forest.entries), *forest.choice.entries.values())
    bad = []
    for st in sem.all_structures(sig, max_size):
        goals = (tuple(s),)
        if strong:
            ok = sem.is_strong_valid(goals, forest.r, forest.choice, st)
        else:
            ok = sem.is_r_valid(goals, forest.r, st)
        if not ok:
            bad.append(sem.format_structure(st))
    return bad


def cmd_prove(args) -> int:
    everything = load_problems(args.file)
    problems = _select(everything, args.name)
    if args.emit_proof and len(problems) > 1:
        raise UsageError("--emit-proof needs a single problem name")
    limits = SearchLimits(args.gamma, args.budget)
    code = OK
    traces = []
    for name, s in problems.items():
        res = search(s, args.mode, limits, name=name)
        print(f"problem {name}: {format_sequent(s)}")
        if not res.proved:
            print(f"  unproven: {res.reason}")
            cm = countermodel(s, max_size=args.countermodel_size)
            if cm is not None:
                print(f"  countermodel: {sem.format_structure(cm)}")
            else:
                print(f"  no countermodel up to size {args.countermodel_size}")
            code = max(code, FAILED)
            continue
        print(f"  proved in {args.mode} mode, gamma multiplicity {res.multiplicity}")
        print(f"  sigma = {res.sigma}")
        if args.verbose:
            print("  " + res.forest.show().replace("\n", "\n  "))
        try:
            replayed = calc.replay(res.trace, everything)
            if not replayed.all_closed():
                raise ProofError("replayed forest is not closed")
        except ProofError as exc:
            print(f"  kernel bug: the emitted trace does not replay: {exc}")
            code = DISAGREE
            continue
        if args.answers or args.query:
            answers, report = res.answers, res.choice_report
            if args.query:
                answers, report = extract_answers(res, {parse_term(q) for q in args.query})
            if not answers:
                print("  answers: none (no free existential variables)")
            for x, t in answers.items():
                print(f"  answer {format_term(x)} = {format_term(t)}")
            for line in report:
                print(f"    {line}")
        if args.check_sizes:
            bad = _oracle_disagreements(s, res, args.check_sizes)
            if bad:
                print(f"  kernel bug: not valid in {bad[0]}")
                code = DISAGREE
            else:
                print(f"  oracle agrees on all structures up to size {args.check_sizes}")
        traces.append(res.trace)
    if args.emit_proof and traces:
        Path(args.emit_proof).write_text("\n".join(traces[0]) + "\n", encoding="utf-8")
        print(f"trace written to {args.emit_proof}")
    word = {OK: "proved", FAILED: "unproven", DISAGREE: "error"}[code]
    return _result(word, code)


# ---------------------------------------------------------------- replay


def cmd_replay(args) -> int:
    problems = load_problems(args.problems)
    lines = Path(args.trace).read_text(encoding="utf-8").splitlines()
    try:
        forest = calc.replay(lines, problems)
    except ReplayError as exc:
        print(f"rejected at step {exc.step}: {exc.line}")
        cause = exc.__cause__
        print(f"  {cause if cause is not None else exc}")
        cycle = getattr(cause, "cycle", None)
        if cycle:
            print("  cycle: " + " -> ".join(format_term(v) for v in cycle))
        return _result("error", ERROR)
    print(forest.show())
    if not forest.entries:
        print("nothing was hypothesized")
        return _result("unproven", FAILED)
    if forest.all_closed():
        print("all trees closed")
        return _result("proved", OK)
    print(f"{len(forest.open_leaves())} open leaves")
    return _result("unproven", FAILED)


# ---------------------------------------------------------------- oracle


def _read_structures(text_or_path: str) -> list[sem.Structure]:
    p = Path(text_or_path)
    text = p.read_text(encoding="utf-8") if p.is_file() else text_or_path
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(sem.parse_structure(line))
    if not out:
        raise UsageError("no structure given")
    return out


def _choice(args) -> ChoiceCondition:
    entries = {}
    for item in args.choose:
        var, sep, body = item.partition(":")
        if not sep:
            raise UsageError(f"--choose expects 'y^a : formula', got {item!r}")
        y = parse_term(var)
        entries[y] = parse_formula(body)
    order = set()
    for item in args.order:
        left, sep, right = item.partition("<")
        if not sep:
            raise UsageError(f"--order expects 'z^a < y^a', got {item!r}")
        order.add((parse_term(left), parse_term(right)))
    cc = ChoiceCondition(entries, order)
    return cc


def cmd_oracle(args) -> int:
    goals = [parse_sequent(g) for g in args.goal]
    if not goals:
        raise UsageError("at least one --goal is required")
    to = [parse_sequent(g) for g in args.to]
    reducing = args.query in ("reduces", "strong-reduces")
    if reducing and not to:
        raise UsageError(f"{args.query} needs at least one --to sequent")
    strong = args.query.startswith("strong")
    r = calc.parse_relation(args.R) if args.R else frozenset()
    cc = _choice(args)
    if strong:
        bad = violations(cc, r)
        if bad:
            raise UsageError("not a choice-condition: " + "; ".join(bad))
    elif cc:
        raise UsageError("--choose/--order only apply to strong queries")

    if args.structure:
        structures = _read_structures(args.structure)
    else:
        sig = signature_of(*goals, *to, *cc.entries.values())
        structures = sem.all_structures(sig, args.all_sizes, args.min_size)
    all_hold = True
    for st in structures:
        if reducing:
            v = sem.reduction_counterexample(goals, to, r, st, strong=strong, cc=cc, cap=args.cap)
        else:
            v = sem.check_valid(goals, r, st, strong=strong, cc=cc, cap=args.cap)
        all_hold &= v.holds
        print(f"[{sem.format_structure(st)}] {str(v.holds).lower()}")
        if v.witness is not None and v.witness.tables:
            label = "counter-valuation" if reducing else "witness"
            print(f"    {label}: {v.witness.describe(st.names)}")
        if v.failing_pi:
            shown = ", ".join(f"{format_term(y)}={st.names[i]}" for y, i in sorted(v.failing_pi.items()))
            print(f"    failing pi: {shown}")
        if v.cycle:
            print("    weak witness blocked by cycle: " + " -> ".join(format_term(x) for x in v.cycle))
    return _result("true" if all_hold else "false", OK if all_hold else FAILED)


# ---------------------------------------------------------------- repl


REPL_HELP = """\
commands:
  show                         print the forest, R and (strong mode) C and <
  alpha|beta|gamma|delta L I [v]
                               expand formula I of leaf L ("T#L" or just L for tree 0)
  inst {x^e -> t, ...}         apply a substitution to the whole forest
  close                        find a closing substitution, apply it, finish closed trees
  hyp NAME | hyp [sequent]     add another tree
  undo                         drop the last step
  save PATH                    write the trace
  help, quit"""


class Session:
    def __init__(self, forest: calc.ProofForest, problems: dict, out=sys.stdout):
        self.history = [forest]
        self.problems = problems
        self.out = out

    @property
    def forest(self) -> calc.ProofForest:
        return self.history[-1]

    def say(self, text: str) -> None:
        print(text, file=self.out)

    def push(self, forest: calc.ProofForest) -> None:
        self.history.append(forest)
        self.say(forest.show())

    def step(self, family: str, words: list[str]) -> None:
        if len(words) not in (2, 3):
            raise UsageError(f"usage: {family} LEAF INDEX [VAR]")
        tree, _, leaf = words[0].rpartition("#")
        tree, leaf, idx = int(tree or 0), int(leaf), int(words[1])
        _, node = self.forest.leaf(tree, leaf)
        if not 0 <= idx < len(node.label):
            raise ProofError(f"leaf has no formula {idx}")
        rule = calc.rule_for(node.label[idx])
        if rule is None or calc.RULES[rule] != family:
            raise ProofError(f"formula {idx} is not a {family} formula")
        var = parse_term(words[2]) if len(words) == 3 else None
        self.push(calc.expand(self.forest, RuleInstance(tree, leaf, rule, idx, var)))

    def close(self) -> None:
        forest = self.forest
        if forest.open_leaves():
            sigma = close_attempt(forest)
            if sigma is None:
                raise ProofError("no admissible substitution closes every open leaf")
            if sigma:
                forest = calc.instantiate(forest, sigma)
        for i, (_, t) in enumerate(forest.entries):
            if calc.is_closed(t):
                forest = calc.qed(forest, i)
        self.push(forest)

    def handle(self, line: str) -> bool:
        """Run one command; False means quit."""
        words = line.split()
        if not words or words[0].startswith("#"):
            return True
        cmd = words[0]
        if cmd in ("quit", "exit"):
            return False
        if cmd == "help":
            self.say(REPL_HELP)
        elif cmd == "show":
            self.say(self.forest.show())
        elif cmd == "undo":
            if len(self.history) == 1:
                self.say("nothing to undo")
            else:
                self.history.pop()
                self.say(self.forest.show())
        elif cmd == "save":
            if len(words) != 2:
                raise UsageError("usage: save PATH")
            Path(words[1]).write_text("\n".join(self.forest.trace) + "\n", encoding="utf-8")
            self.say(f"saved {len(self.forest.trace)} lines to {words[1]}")
        elif cmd == "close":
            self.close()
        elif cmd in ("alpha", "beta", "gamma", "delta"):
            self.step(cmd, words[1:])
        elif cmd in ("inst", "hyp", "expand", "qed"):
            self.push(calc.apply_line(self.forest, line, self.problems))
        else:
            raise UsageError(f"unknown command {cmd!r}; try help")
        return True

    def run(self, lines) -> None:
        for line in lines:
            try:
                if not self.handle(line):
                    break
            except InadmissibleSubstitution as exc:
                self.say(f"error: {exc}")
                if exc.cycle:
                    self.say("  cycle: " + " -> ".join(format_term(v) for v in exc.cycle))
            except (UsageError, *INPUT_ERRORS) as exc:
                self.say(f"error: {exc}")


def cmd_repl(args) -> int:
    problems = load_problems(args.file)
    _select(problems, args.name)
    forest = calc.hypothesize(calc.new_forest(args.mode), problems[args.name], name=args.name)
    session = Session(forest, problems)
    session.say(session.forest.show())
    interactive = sys.stdin.isatty()

    def lines():
        while True:
            if interactive:
                print("> ", end="", flush=True)
            line = sys.stdin.readline()
            if not line:
                return
            yield line.strip()

    session.run(lines())
    if session.forest.all_closed():
        return _result("proved", OK)
    return _result("unproven", FAILED)


# ---------------------------------------------------------------- selftest


def cmd_selftest(args) -> int:
    ok = True
    for res in acceptance.run_all(args.seed, args.runs, args.instances):
        print(res.line(), flush=True)
        ok &= res.passed
    return _result("true" if ok else "false", OK if ok else FAILED)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vcsequent", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prove", help="search for a proof")
    p.add_argument("file")
    p.add_argument("name", nargs="?", help="problem name (default: all problems in the file)")
    p.add_argument("--mode", choices=(calc.WEAK, calc.STRONG), default=calc.STRONG)
    p.add_argument("--gamma", type=int, default=2, help="gamma multiplicity")
    p.add_argument("--budget", type=int, default=20_000, help="node budget")
    p.add_argument("--emit-proof", metavar="PATH")
    p.add_argument("--answers", action="store_true", help="report bindings of free existential variables")
    p.add_argument("--query", action="append", default=[], metavar="VAR",
                   help="report the binding of this existential variable (repeatable)")
    p.add_argument("--check-sizes", type=int, default=0, metavar="M",
                   help="cross-check proofs on all structures up to size M")
    p.add_argument("--countermodel-size", type=int, default=2, metavar="N")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("replay", help="re-verify a proof trace")
    p.add_argument("trace")
    p.add_argument("problems")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("oracle", help="finite-model checks")
    p.add_argument("query", choices=("valid", "strong-valid", "reduces", "strong-reduces"))
    p.add_argument("--goal", action="append", default=[], help="a sequent of the goal set (repeatable)")
    p.add_argument("--to", action="append", default=[], help="a sequent of the reduced set (repeatable)")
    p.add_argument("--R", default="", help='variable condition, e.g. "{(x^e, y^a)}"')
    p.add_argument("--choose", action="append", default=[], help='choice entry "y^a : formula"')
    p.add_argument("--order", action="append", default=[], help='ordering pair "z^a < y^a"')
    g = p.add_mutually_exclusive_group()
    g.add_argument("--structure", help="structure text or a file with one structure per line")
    g.add_argument("--all-sizes", type=int, default=2, metavar="M")
    p.add_argument("--min-size", type=int, default=1)
    p.add_argument("--cap", type=int, default=sem.DEFAULT_CAP, help="enumeration guard")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("repl", help="step a proof by hand (commands on stdin)")
    p.add_argument("file")
    p.add_argument("name")
    p.add_argument("--mode", choices=(calc.WEAK, calc.STRONG), default=calc.STRONG)
    p.set_defaults(func=cmd_repl)

    p = sub.add_parser("selftest", help="run the acceptance criteria")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--runs", type=int, default=None, help="random kernel runs")
    p.add_argument("--instances", type=int, default=None, help="random lemma instances")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, *INPUT_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _result("error", ERROR)


if __name__ == "__main__":
    sys.exit(main())
