"""Constrained intent language: parsing, rendering, and translation.

The grammar (EBNF in docs/grammar.md):

    intent      = verb SP subject [SP "TO" SP target] [SP "FOR" SP application]
                  [SP "AS" SP stakeholder] [SP "WITH" SP clause {"," clause}]
    verb        = "CONNECT" | "MONITOR" | "PROTECT" | "MEASURE" | "INSPECT"
    clause      = kpi comparator NUMBER [unit]
    kpi         = "latency" | "reliability" | "bandwidth" | "devices"
    comparator  = "<=" | ">=" | "<" | ">" | "="
    unit        = "ms" | "%" | "Mbps" | "kbps" | "count"

Keywords are uppercase; identifiers are lowercase kebab-case. Parsing
normalizes clause units (kbps to Mbps, percent to probability) and orders
clauses canonically, so parse(render(ast)) == ast holds for every valid AST.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    ContradictoryClauses,
    IntentSyntaxError,
    UnknownUnitError,
    UntranslatableIntent,
)


class Verb(Enum):
    CONNECT = "CONNECT"
    MONITOR = "MONITOR"
    PROTECT = "PROTECT"
    MEASURE = "MEASURE"
    INSPECT = "INSPECT"


class Application(Enum):
    WAMS = "wams"
    PROTECTION_FLISR = "protection-flisr"
    AMI = "ami"
    REMOTE_INSPECTION = "remote-inspection"


class Stakeholder(Enum):
    DSO = "dso"
    PROSUMER = "prosumer"
    DR_AGGREGATOR = "dr-aggregator"
    CSP = "csp"


class SliceCategory(Enum):
    URLLC = "URLLC"
    EMBB = "eMBB"
    MMTC = "mMTC"


# Canonical clause order and the unit each KPI is normalized to.
KPI_NAMES = ("latency", "reliability", "bandwidth", "devices")
CANONICAL_UNIT = {"latency": "ms", "reliability": "", "bandwidth": "Mbps", "devices": ""}
# Accepted input units per KPI with the factor that converts to canonical.
UNIT_TABLE: dict[str, dict[str, float]] = {
    "latency": {"ms": 1.0},
    "reliability": {"": 1.0, "%": 0.01},
    "bandwidth": {"Mbps": 1.0, "kbps": 0.001},
    "devices": {"": 1.0, "count": 1.0},
}
ALL_UNITS = {"ms", "%", "Mbps", "kbps", "count"}

COMPARATORS = ("<=", ">=", "<", ">", "=")


@dataclass(frozen=True)
class KpiClause:
    kpi: str
    comparator: str
    value: float
    unit: str  # canonical unit after normalization


@dataclass(frozen=True)
class IntentAst:
    verb: Verb
    subject: str
    target: str | None = None
    application: Application | None = None
    kpi_clauses: tuple[KpiClause, ...] = ()
    stakeholder: Stakeholder = Stakeholder.DSO


@dataclass(frozen=True)
class ServiceRequirementSet:
    category: SliceCategory
    latency_bound_ms: float
    reliability: float
    bandwidth_mbps: float
    device_count: int
    endpoints: tuple[str, str | None]
    source_intent: str | None = None


# --- lexer ------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comparator><=|>=|<|>|=)
  | (?P<comma>,)
  | (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<percent>%)
  | (?P<word>[A-Za-z][A-Za-z0-9-]*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # 'word' | 'number' | 'comparator' | 'comma' | 'percent' | 'eof'
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise IntentSyntaxError(pos, ["token"], text[pos])
        kind = m.lastgroup or ""
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("eof", "", len(text)))
    return tokens


class _Parser:
    """Single-pass recursive descent over the token stream."""

    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.cur
        if tok.kind != "eof":
            self.i += 1
        return tok

    def fail(self, expected: list[str]) -> IntentSyntaxError:
        return IntentSyntaxError(self.cur.pos, expected, self.cur.text)

    def expect_word(self, *, expected: list[str]) -> _Token:
        if self.cur.kind != "word":
            raise self.fail(expected)
        return self.advance()

    def parse_intent(self) -> IntentAst:
        verb_tok = self.expect_word(expected=[v.value for v in Verb])
        try:
            verb = Verb(verb_tok.text)
        except ValueError:
            raise IntentSyntaxError(verb_tok.pos, [v.value for v in Verb], verb_tok.text)

        subject = self._identifier("subject")

        target = None
        if self.cur.kind == "word" and self.cur.text == "TO":
            self.advance()
            target = self._identifier("target")

        application = None
        if self.cur.kind == "word" and self.cur.text == "FOR":
            self.advance()
            app_tok = self.expect_word(expected=[a.value for a in Application])
            try:
                application = Application(app_tok.text)
            except ValueError:
                raise IntentSyntaxError(
                    app_tok.pos, [a.value for a in Application], app_tok.text
                )

        stakeholder = Stakeholder.DSO
        if self.cur.kind == "word" and self.cur.text == "AS":
            self.advance()
            st_tok = self.expect_word(expected=[s.value for s in Stakeholder])
            try:
                stakeholder = Stakeholder(st_tok.text)
            except ValueError:
                raise IntentSyntaxError(
                    st_tok.pos, [s.value for s in Stakeholder], st_tok.text
                )

        clauses: list[KpiClause] = []
        if self.cur.kind == "word" and self.cur.text == "WITH":
            self.advance()
            clauses.append(self._clause())
            while self.cur.kind == "comma":
                self.advance()
                clauses.append(self._clause())

        if self.cur.kind != "eof":
            raise self.fail(["TO", "FOR", "AS", "WITH", "end of intent"])

        if verb is Verb.CONNECT and target is None:
            raise IntentSyntaxError(self.cur.pos, ["TO <target>"], self.cur.text)

        seen: set[str] = set()
        for c in clauses:
            if c.kpi in seen:
                raise IntentSyntaxError(
                    self.cur.pos, [f"at most one {c.kpi} clause"], c.kpi
                )
            seen.add(c.kpi)

        ordered = tuple(sorted(clauses, key=lambda c: KPI_NAMES.index(c.kpi)))
        return IntentAst(
            verb=verb,
            subject=subject,
            target=target,
            application=application,
            kpi_clauses=ordered,
            stakeholder=stakeholder,
        )

    def _identifier(self, what: str) -> str:
        tok = self.cur
        if tok.kind != "word" or not re.fullmatch(r"[a-z0-9][a-z0-9-]*", tok.text):
            raise self.fail([f"{what} identifier"])
        self.advance()
        return tok.text

    def _clause(self) -> KpiClause:
        kpi_tok = self.expect_word(expected=list(KPI_NAMES))
        if kpi_tok.text not in KPI_NAMES:
            raise IntentSyntaxError(kpi_tok.pos, list(KPI_NAMES), kpi_tok.text)
        kpi = kpi_tok.text

        if self.cur.kind != "comparator":
            raise self.fail(list(COMPARATORS))
        comparator = self.advance().text

        if self.cur.kind != "number":
            raise self.fail(["number"])
        num_tok = self.advance()
        value = float(num_tok.text)

        unit = ""
        if self.cur.kind == "percent":
            unit = "%"
            unit_pos = self.cur.pos
            self.advance()
        elif self.cur.kind == "word" and self.cur.text not in (
            "TO", "FOR", "AS", "WITH", *KPI_NAMES,
        ):
            unit = self.cur.text
            unit_pos = self.cur.pos
            if unit not in ALL_UNITS:
                raise UnknownUnitError(unit_pos, unit)
            self.advance()
        else:
            unit_pos = self.cur.pos

        factors = UNIT_TABLE[kpi]
        if unit not in factors:
            raise UnknownUnitError(unit_pos, unit or "(none)")
        value = value * factors[unit]
        return KpiClause(kpi=kpi, comparator=comparator, value=value, unit=CANONICAL_UNIT[kpi])


def parse_intent(text: str) -> IntentAst:
    """Parse intent DSL text into a validated AST.

    Raises IntentSyntaxError with the character offset of the offending token,
    or UnknownUnitError for units outside the unit table.
    """
    if not text or not text.strip():
        raise IntentSyntaxError(0, [v.value for v in Verb])
    return _Parser(_tokenize(text)).parse_intent()


def _format_number(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def render(ast: IntentAst) -> str:
    """Canonical text for an AST; parse_intent(render(ast)) == ast."""
    parts = [ast.verb.value, ast.subject]
    if ast.target is not None:
        parts += ["TO", ast.target]
    if ast.application is not None:
        parts += ["FOR", ast.application.value]
    if ast.stakeholder is not Stakeholder.DSO:
        parts += ["AS", ast.stakeholder.value]
    if ast.kpi_clauses:
        clauses = []
        for c in sorted(ast.kpi_clauses, key=lambda c: KPI_NAMES.index(c.kpi)):
            body = f"{c.kpi} {c.comparator} {_format_number(c.value)}"
            if c.unit:
                body += f" {c.unit}"
            clauses.append(body)
        parts += ["WITH", ", ".join(clauses)]
    return " ".join(parts)


# --- translation ------------------------------------------------------------

@dataclass(frozen=True)
class ApplicationDefaults:
    category: SliceCategory
    latency_ms: float
    reliability: float
    bandwidth_mbps: float
    device_count: int


@dataclass(frozen=True)
class InferenceRules:
    """Category inference for intents that carry KPI clauses but no application."""

    urllc_max_latency_ms: float = 50.0
    urllc_min_reliability: float = 0.999
    mmtc_min_devices: int = 1000
    embb_min_bandwidth_mbps: float = 10.0


@dataclass(frozen=True)
class RequirementCatalog:
    """Editable defaults quantifying the qualitative grid workload classes."""

    applications: dict[Application, ApplicationDefaults] = field(default_factory=dict)
    inference: InferenceRules = field(default_factory=InferenceRules)
    fallback_device_count: int = 1

    @classmethod
    def from_document(cls, doc: dict) -> "RequirementCatalog":
        apps = {}
        for key, row in doc.get("applications", {}).items():
            apps[Application(key)] = ApplicationDefaults(
                category=SliceCategory(row["category"]),
                latency_ms=float(row["latency_ms"]),
                reliability=float(row["reliability"]),
                bandwidth_mbps=float(row["bandwidth_mbps"]),
                device_count=int(row["device_count"]),
            )
        inf = doc.get("inference", {})
        return cls(
            applications=apps,
            inference=InferenceRules(
                urllc_max_latency_ms=float(inf.get("urllc_max_latency_ms", 50.0)),
                urllc_min_reliability=float(inf.get("urllc_min_reliability", 0.999)),
                mmtc_min_devices=int(inf.get("mmtc_min_devices", 1000)),
                embb_min_bandwidth_mbps=float(inf.get("embb_min_bandwidth_mbps", 10.0)),
            ),
            fallback_device_count=int(doc.get("fallback_device_count", 1)),
        )


def _check_invariants(
    latency: float, reliability: float, bandwidth: float, devices: int
) -> list[str]:
    violations = []
    if not latency > 0:
        violations.append(f"latency_bound must be > 0, got {latency}")
    if not math.isfinite(latency):
        violations.append("latency_bound must be finite")
    if not 0.0 <= reliability <= 1.0:
        violations.append(f"reliability must be within [0, 1], got {reliability}")
    if not bandwidth > 0:
        violations.append(f"bandwidth must be > 0, got {bandwidth}")
    if devices < 1:
        violations.append(f"device_count must be >= 1, got {devices}")
    return violations


def translate(
    ast: IntentAst,
    catalog: RequirementCatalog,
    intent_id: str | None = None,
) -> ServiceRequirementSet:
    """Turn an AST into concrete service requirements.

    Catalog defaults fill whatever the intent leaves implicit; explicit KPI
    clauses override them. Raises UntranslatableIntent when neither an
    application nor a covering clause set is present, and ContradictoryClauses
    when an override breaks a requirement invariant.
    """
    clauses = {c.kpi: c for c in ast.kpi_clauses}

    # Clause-level contradictions surface before coverage checks.
    early = []
    if "latency" in clauses and not clauses["latency"].value > 0:
        early.append(f"latency_bound must be > 0, got {clauses['latency'].value}")
    if "reliability" in clauses and not 0.0 <= clauses["reliability"].value <= 1.0:
        early.append(f"reliability must be within [0, 1], got {clauses['reliability'].value}")
    if "bandwidth" in clauses and not clauses["bandwidth"].value > 0:
        early.append(f"bandwidth must be > 0, got {clauses['bandwidth'].value}")
    if "devices" in clauses and clauses["devices"].value < 1:
        early.append(f"device_count must be >= 1, got {clauses['devices'].value}")
    if early:
        raise ContradictoryClauses(early)

    if ast.application is not None:
        if ast.application not in catalog.applications:
            raise UntranslatableIntent(
                f"no catalog entry for application {ast.application.value!r}"
            )
        base = catalog.applications[ast.application]
        category = base.category
        latency = base.latency_ms
        reliability = base.reliability
        bandwidth = base.bandwidth_mbps
        devices = base.device_count
    else:
        required = {"latency", "reliability", "bandwidth"}
        missing = required - clauses.keys()
        if missing:
            raise UntranslatableIntent(
                "intent names no application and lacks KPI clauses for: "
                + ", ".join(sorted(missing))
            )
        latency = clauses["latency"].value
        reliability = clauses["reliability"].value
        bandwidth = clauses["bandwidth"].value
        devices = (
            int(clauses["devices"].value)
            if "devices" in clauses
            else catalog.fallback_device_count
        )
        rules = catalog.inference
        if latency <= rules.urllc_max_latency_ms and reliability >= rules.urllc_min_reliability:
            category = SliceCategory.URLLC
        elif devices >= rules.mmtc_min_devices:
            category = SliceCategory.MMTC
        else:
            category = SliceCategory.EMBB

    if "latency" in clauses:
        latency = clauses["latency"].value
    if "reliability" in clauses:
        reliability = clauses["reliability"].value
    if "bandwidth" in clauses:
        bandwidth = clauses["bandwidth"].value
    if "devices" in clauses:
        devices = int(clauses["devices"].value)

    violations = _check_invariants(latency, reliability, bandwidth, devices)
    if violations:
        raise ContradictoryClauses(violations)

    return ServiceRequirementSet(
        category=category,
        latency_bound_ms=latency,
        reliability=reliability,
        bandwidth_mbps=bandwidth,
        device_count=devices,
        endpoints=(ast.subject, ast.target),
        source_intent=intent_id,
    )
