"""Scenario files (``.qpd``): states, measurement scripts, families, queries.

Grammar, one statement per line (newlines inside brackets are ignored and
``#`` starts a comment)::

    state <name> { <label>: <amp> @ <eigenvalue>; ... }
    measure <id> on <state> [at <id>:<label>] (seed <n> | force <label>)
    family <name> = [<state>, ...]
    query <name> = <formula> [in <family>]
    verify <state>
    grade <id>
    axioms

    <amp>     ::= [-] num [(+|-) num i] | [-] num i
    <formula> ::= atom(<label>) | det(<label>) | abs(<label>)
                | not <formula> | pos <formula> | nec <formula> | ( <formula> )

:func:`parse` normalizes every state (recording a warning when the squared
norm was not already 1) and resolves all names; :func:`round_trip` prints
the canonical text for a scenario.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .modal import Abs, Atom, Det, Formula, Necessarily, Not, Possibly
from .rng import MASK64
from .state import Amplitude, EigenBranch, WaveFunction, normalize

__all__ = [
    "MAX_DEPTH",
    "Token",
    "ScenarioError",
    "ParseError",
    "ResolveError",
    "DepthExceeded",
    "MeasureStep",
    "FamilyDecl",
    "FormulaQuery",
    "VerifyQuery",
    "GradeQuery",
    "AxiomsQuery",
    "Query",
    "Scenario",
    "tokenize",
    "parse",
    "parse_formula",
    "round_trip",
    "format_formula",
]

MAX_DEPTH = 256


# -- errors -------------------------------------------------------------------------


class ScenarioError(Exception):
    """An error tied to one token of the source text (1-based line/column)."""

    def __init__(self, message: str, token: "Token"):
        self.message = message
        self.token = token
        self.line = token.line
        self.column = token.column
        super().__init__(f"line {self.line}, column {self.column}: {message}")


class ParseError(ScenarioError):
    def __init__(self, message: str, token: "Token", expected=()):
        self.expected = frozenset(expected)
        if self.expected:
            message = f"{message}; expected one of: {', '.join(sorted(self.expected))}"
        super().__init__(message, token)


class DepthExceeded(ParseError):
    pass


class ResolveError(ScenarioError):
    pass


# -- lexer ------------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT NUMBER IMAG PUNCT NEWLINE EOF
    text: str
    line: int
    column: int
    offset: int

    def describe(self) -> str:
        if self.kind == "EOF":
            return "end of input"
        if self.kind == "NEWLINE":
            return "end of line"
        return repr(self.text)


_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_TOKEN_RE = re.compile(
    rf"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<imag>{_NUM}i(?!\w))
  | (?P<number>{_NUM}(?![\w.]))
  | (?P<ident>[^\W\d]\w*)
  | (?P<punct>[{{}};:@\[\],=()+\-])
    """,
    re.VERBOSE,
)
_OPEN, _CLOSE = "{[(", "}])"


def tokenize(text: str) -> Iterator[Token]:
    line, line_start, depth = 1, 0, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            # Grab the whole run of junk so the error names a full token.
            end = pos + 1
            while end < len(text) and not text[end].isspace() and _TOKEN_RE.match(text, end) is None:
                end += 1
            raise ParseError("unexpected character", Token("ERROR", text[pos:end], line, col, pos))
        kind = m.lastgroup
        tok_text = m.group()
        if kind == "newline":
            if depth == 0:
                yield Token("NEWLINE", tok_text, line, col, pos)
            line += 1
            line_start = m.end()
        elif kind == "punct":
            if tok_text in _OPEN:
                depth += 1
            elif tok_text in _CLOSE:
                depth = max(0, depth - 1)
            yield Token("PUNCT", tok_text, line, col, pos)
        elif kind not in ("ws", "comment"):
            yield Token(kind.upper(), tok_text, line, col, pos)
        pos = m.end()
    yield Token("EOF", "", line, pos - line_start + 1, pos)


# -- scenario model -------------------------------------------------------------


@dataclass(frozen=True)
class MeasureStep:
    id: str
    state: str
    attach: Optional[tuple[str, str]] = None
    seed: Optional[int] = None
    force: Optional[str] = None


@dataclass(frozen=True)
class FamilyDecl:
    name: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class FormulaQuery:
    name: str
    formula: Formula
    family: Optional[str] = None


@dataclass(frozen=True)
class VerifyQuery:
    state: str


@dataclass(frozen=True)
class GradeQuery:
    measurement: str


@dataclass(frozen=True)
class AxiomsQuery:
    pass


Query = Union[FormulaQuery, VerifyQuery, GradeQuery, AxiomsQuery]


@dataclass(frozen=True)
class Scenario:
    states: tuple[WaveFunction, ...] = ()
    script: tuple[MeasureStep, ...] = ()
    families: tuple[FamilyDecl, ...] = ()
    queries: tuple[Query, ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def state(self, name: str) -> WaveFunction:
        for wf in self.states:
            if wf.observable_name == name:
                return wf
        raise KeyError(name)

    def family(self, name: str) -> FamilyDecl:
        for fam in self.families:
            if fam.name == name:
                return fam
        raise KeyError(name)

    def step(self, measurement_id: str) -> MeasureStep:
        for s in self.script:
            if s.id == measurement_id:
                return s
        raise KeyError(measurement_id)


# -- parser ---------------------------------------------------------------------------

_LEAF_KEYWORDS = {"atom": Atom, "det": Det, "abs": Abs}
_PREFIX_KEYWORDS = {"not": Not, "pos": Possibly, "nec": Necessarily}


class _Parser:
    def __init__(self, text: str):
        self.tokens = list(tokenize(text))
        self.i = 0
        # Source positions for name resolution, keyed by (kind, name).
        self.where: dict[tuple, Token] = {}

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "EOF":
            self.i += 1
        return t

    def fail(self, expected, what: str = "unexpected token") -> ParseError:
        return ParseError(f"{what} {self.tok.describe()}", self.tok, expected)

    def punct(self, ch: str) -> Token:
        if self.tok.kind == "PUNCT" and self.tok.text == ch:
            return self.advance()
        raise self.fail({repr(ch)})

    def at_punct(self, ch: str) -> bool:
        return self.tok.kind == "PUNCT" and self.tok.text == ch

    def keyword(self, word: str) -> Token:
        if self.tok.kind == "IDENT" and self.tok.text == word:
            return self.advance()
        raise self.fail({repr(word)})

    def at_keyword(self, word: str) -> bool:
        return self.tok.kind == "IDENT" and self.tok.text == word

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind == "IDENT":
            return self.advance()
        raise self.fail({what})

    def end_statement(self) -> None:
        if self.tok.kind in ("NEWLINE", "EOF"):
            self.advance()
            return
        raise self.fail({"end of line"})

    def number(self) -> float:
        sign = 1.0
        if self.at_punct("-"):
            self.advance()
            sign = -1.0
        if self.tok.kind != "NUMBER":
            raise self.fail({"number"})
        return sign * float(self.advance().text)

    def amplitude(self) -> Amplitude:
        sign = 1.0
        if self.at_punct("-"):
            self.advance()
            sign = -1.0
        if self.tok.kind == "IMAG":
            return Amplitude(0.0, sign * float(self.advance().text[:-1]))
        if self.tok.kind != "NUMBER":
            raise self.fail({"number", "imaginary number"})
        re_part = sign * float(self.advance().text)
        im_part = 0.0
        if self.at_punct("+") or self.at_punct("-"):
            im_sign = 1.0 if self.advance().text == "+" else -1.0
            if self.tok.kind != "IMAG":
                raise self.fail({"imaginary number"})
            im_part = im_sign * float(self.advance().text[:-1])
        return Amplitude(re_part, im_part)

    # statements
    def scenario(self) -> tuple[list, list, list, list, list]:
        states, script, families, queries, warnings = [], [], [], [], []
        while self.tok.kind != "EOF":
            if self.tok.kind == "NEWLINE":
                self.advance()
                continue
            head = self.tok
            if head.kind != "IDENT":
                raise self.fail(_STATEMENTS, "expected a statement, got")
            word = head.text
            if word == "state":
                wf, warn = self.state_decl()
                states.append(wf)
                if warn:
                    warnings.append(warn)
            elif word == "measure":
                script.append(self.measure())
            elif word == "family":
                families.append(self.family())
            elif word == "query":
                queries.append(self.query())
            elif word == "verify":
                self.advance()
                name = self.ident("state name")
                self.where[("verify", len(queries))] = name
                queries.append(VerifyQuery(name.text))
            elif word == "grade":
                self.advance()
                mid = self.ident("measurement id")
                self.where[("grade", len(queries))] = mid
                queries.append(GradeQuery(mid.text))
            elif word == "axioms":
                self.advance()
                queries.append(AxiomsQuery())
            else:
                raise self.fail(_STATEMENTS, "unknown statement")
            self.end_statement()
        return states, script, families, queries, warnings

    def state_decl(self) -> tuple[WaveFunction, Optional[str]]:
        self.keyword("state")
        name = self.ident("state name")
        self.where[("state", name.text)] = name
        self.punct("{")
        branches = []
        seen: set[str] = set()
        while True:
            label = self.ident("label")
            if label.text in seen:
                raise ResolveError(f"duplicate label {label.text!r} in state {name.text!r}", label)
            seen.add(label.text)
            self.punct(":")
            amp = self.amplitude()
            self.punct("@")
            eigenvalue = self.number()
            branches.append(EigenBranch(label.text, amp, eigenvalue))
            if self.at_punct(";"):
                self.advance()
                if self.at_punct("}"):
                    break
                continue
            if self.at_punct("}"):
                break
            raise self.fail({"';'", "'}'"})
        self.punct("}")
        raw = WaveFunction(name.text, tuple(branches))
        total = raw.total_probability()
        if total <= 0.0:
            raise ResolveError(f"state {name.text!r} has only zero amplitudes", name)
        wf = normalize(raw)
        warning = None
        if wf is not raw:
            warning = f"line {name.line}: state {name.text!r} normalized (squared norm was {total!r})"
        return wf, warning

    def measure(self) -> MeasureStep:
        self.keyword("measure")
        mid = self.ident("measurement id")
        self.keyword("on")
        state = self.ident("state name")
        attach = None
        if self.at_keyword("at"):
            self.advance()
            at_id = self.ident("measurement id")
            self.punct(":")
            at_label = self.ident("label")
            attach = (at_id.text, at_label.text)
            self.where[("attach", mid.text)] = at_id
            self.where[("attach_label", mid.text)] = at_label
        self.where[("measure", mid.text)] = mid
        self.where[("measure_state", mid.text)] = state
        if self.at_keyword("seed"):
            self.advance()
            tok = self.tok
            if tok.kind != "NUMBER" or not tok.text.isdigit():
                raise self.fail({"unsigned integer seed"})
            seed = int(self.advance().text)
            if seed > MASK64:
                raise ParseError("seed does not fit in 64 bits", tok, {"unsigned 64-bit integer"})
            return MeasureStep(mid.text, state.text, attach, seed=seed)
        if self.at_keyword("force"):
            self.advance()
            label = self.ident("label")
            self.where[("force", mid.text)] = label
            return MeasureStep(mid.text, state.text, attach, force=label.text)
        raise self.fail({"'seed'", "'force'"} | ({"'at'"} if attach is None else set()))

    def family(self) -> FamilyDecl:
        self.keyword("family")
        name = self.ident("family name")
        self.where[("family", name.text)] = name
        self.punct("=")
        self.punct("[")
        members = []
        while True:
            m = self.ident("state name")
            self.where[("member", name.text, len(members))] = m
            members.append(m.text)
            if self.at_punct(","):
                self.advance()
                continue
            break
        self.punct("]")
        return FamilyDecl(name.text, tuple(members))

    def query(self) -> FormulaQuery:
        self.keyword("query")
        name = self.ident("query name")
        self.punct("=")
        f, leaf_tok = self.formula()
        self.where[("query", name.text)] = name
        self.where[("query_atom", name.text)] = leaf_tok
        family = None
        if self.at_keyword("in"):
            self.advance()
            fam = self.ident("family name")
            self.where[("query_family", name.text)] = fam
            family = fam.text
        return FormulaQuery(name.text, f, family)

    def formula(self) -> tuple[Formula, Token]:
        # Only prefix operators and parentheses, so an explicit stack suffices.
        stack: list[object] = []
        while True:
            t = self.tok
            if t.kind == "IDENT" and t.text in _PREFIX_KEYWORDS:
                stack.append(_PREFIX_KEYWORDS[t.text])
            elif self.at_punct("("):
                stack.append("(")
            else:
                break
            if len(stack) > MAX_DEPTH:
                raise DepthExceeded(f"formula nesting exceeds {MAX_DEPTH} levels at", t)
            self.advance()
        t = self.tok
        if not (t.kind == "IDENT" and t.text in _LEAF_KEYWORDS):
            raise self.fail(_FORMULA_START, "expected a formula, got")
        self.advance()
        self.punct("(")
        label = self.ident("label")
        self.punct(")")
        f: Formula = _LEAF_KEYWORDS[t.text](label.text)
        for op in reversed(stack):
            if op == "(":
                self.punct(")")
            else:
                f = op(f)
        return f, label


_STATEMENTS = {"'state'", "'measure'", "'family'", "'query'", "'verify'", "'grade'", "'axioms'"}
_FORMULA_START = {"'atom'", "'det'", "'abs'", "'not'", "'pos'", "'nec'", "'('"}


def _resolve(p: _Parser, states, script, families, queries) -> None:
    state_map: dict[str, WaveFunction] = {}
    for wf in states:
        if wf.observable_name in state_map:
            raise ResolveError(f"duplicate state {wf.observable_name!r}", p.where[("state", wf.observable_name)])
        state_map[wf.observable_name] = wf

    steps: dict[str, MeasureStep] = {}
    for step in script:
        if step.id in steps:
            raise ResolveError(f"duplicate measurement id {step.id!r}", p.where[("measure", step.id)])
        wf = state_map.get(step.state)
        if wf is None:
            raise ResolveError(f"unknown state {step.state!r}", p.where[("measure_state", step.id)])
        if step.attach is not None:
            at_id, at_label = step.attach
            if at_id not in steps:
                raise ResolveError(
                    f"attach point {at_id!r} is not an earlier measurement", p.where[("attach", step.id)]
                )
            if at_label not in state_map[steps[at_id].state]:
                raise ResolveError(
                    f"measurement {at_id!r} has no branch {at_label!r}", p.where[("attach_label", step.id)]
                )
        if step.force is not None and step.force not in wf:
            raise ResolveError(f"state {step.state!r} has no branch {step.force!r}", p.where[("force", step.id)])
        steps[step.id] = step

    fam_map: dict[str, FamilyDecl] = {}
    for fam in families:
        if fam.name in fam_map:
            raise ResolveError(f"duplicate family {fam.name!r}", p.where[("family", fam.name)])
        for i, m in enumerate(fam.members):
            if m not in state_map:
                raise ResolveError(f"unknown state {m!r}", p.where[("member", fam.name, i)])
        fam_map[fam.name] = fam

    query_names: set[str] = set()
    for i, q in enumerate(queries):
        if isinstance(q, VerifyQuery) and q.state not in state_map:
            raise ResolveError(f"unknown state {q.state!r}", p.where[("verify", i)])
        if isinstance(q, GradeQuery) and q.measurement not in steps:
            raise ResolveError(f"unknown measurement {q.measurement!r}", p.where[("grade", i)])
        if isinstance(q, FormulaQuery):
            if q.name in query_names:
                raise ResolveError(f"duplicate query {q.name!r}", p.where[("query", q.name)])
            query_names.add(q.name)
            if q.family is not None and q.family not in fam_map:
                raise ResolveError(f"unknown family {q.family!r}", p.where[("query_family", q.name)])
            members = _query_members(q, families, states)
            vocab = {lab for name in members for lab in state_map[name].labels}
            leaf = q.formula
            while not isinstance(leaf, (Atom, Det, Abs)):
                leaf = leaf.body
            if leaf.label not in vocab:
                raise ResolveError(f"label {leaf.label!r} not in family vocabulary", p.where[("query_atom", q.name)])


def _query_members(q: FormulaQuery, families, states) -> tuple[str, ...]:
    """States a formula query quantifies over.

    The named family, else the first declared family, else every state.
    """
    if q.family is not None:
        return next(f.members for f in families if f.name == q.family)
    if families:
        return families[0].members
    return tuple(wf.observable_name for wf in states)


def query_members(scenario: Scenario, q: FormulaQuery) -> tuple[str, ...]:
    return _query_members(q, scenario.families, scenario.states)


def parse(text: str) -> Scenario:
    p = _Parser(text)
    states, script, families, queries, warnings = p.scenario()
    _resolve(p, states, script, families, queries)
    return Scenario(tuple(states), tuple(script), tuple(families), tuple(queries), tuple(warnings))


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f, _ = p.formula()
    while p.tok.kind == "NEWLINE":
        p.advance()
    if p.tok.kind != "EOF":
        raise p.fail({"end of input"})
    return f


# -- printer ------------------------------------------------------------------------

_IDENT_RE = re.compile(r"[^\W\d]\w*\Z")


def _ident(name: str) -> str:
    if not _IDENT_RE.match(name):
        raise ValueError(f"{name!r} is not a valid scenario identifier")
    return name


def _num(x: float) -> str:
    return repr(float(x))


def _amp(a: Amplitude) -> str:
    out = _num(a.re)
    if a.im != 0.0:
        out += ("+" if a.im > 0 else "-") + _num(abs(a.im)) + "i"
    return out


def format_formula(f: Formula) -> str:
    # Prefix-only grammar: the minimal parenthesization is none at all.
    return str(f)


def round_trip(scenario: Scenario) -> str:
    """Canonical text of ``scenario``: LF endings, one statement per line."""
    lines = []
    for wf in scenario.states:
        body = "; ".join(f"{_ident(b.label)}: {_amp(b.amplitude)} @ {_num(b.eigenvalue)}" for b in wf.branches)
        lines.append(f"state {_ident(wf.observable_name)} {{ {body} }}")
    for s in scenario.script:
        line = f"measure {_ident(s.id)} on {_ident(s.state)}"
        if s.attach is not None:
            line += f" at {_ident(s.attach[0])}:{_ident(s.attach[1])}"
        line += f" seed {int(s.seed)}" if s.seed is not None else f" force {_ident(s.force)}"
        lines.append(line)
    for fam in scenario.families:
        lines.append(f"family {_ident(fam.name)} = [{', '.join(_ident(m) for m in fam.members)}]")
    for q in scenario.queries:
        if isinstance(q, FormulaQuery):
            line = f"query {_ident(q.name)} = {format_formula(q.formula)}"
            if q.family is not None:
                line += f" in {_ident(q.family)}"
        elif isinstance(q, VerifyQuery):
            line = f"verify {_ident(q.state)}"
        elif isinstance(q, GradeQuery):
            line = f"grade {_ident(q.measurement)}"
        else:
            line = "axioms"
        lines.append(line)
    return "\n".join(lines) + "\n"
