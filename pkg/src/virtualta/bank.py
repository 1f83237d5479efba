"""Competency question bank: canonical questions, variants, phase sets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterator

from .errors import BankLoadError
from .schema import Category, SchemaElement, get_element
from .textutil import normalize_question

PHASE1_GROUP_COUNT = 36
PHASE2_QUESTION_COUNT = 70
EXTRACTION_QUESTION_COUNT = 120

_BANK_FORMAT = "virtualta-question-bank"


class PhaseTag(str, Enum):
    """Membership markers for the evaluation question sets."""

    PHASE1_36 = "PHASE1_36"
    PHASE2_70 = "PHASE2_70"
    EXTRACTION_120 = "EXTRACTION_120"


@dataclass(frozen=True)
class CompetencyQuestion:
    """One canonical question plus its paraphrase variants.

    The canonical wording drives knowledge-model generation.  Variants are
    alternate phrasings students may use; the first variant (when present)
    joins the canonical question in the expanded evaluation set.
    """

    element: SchemaElement
    canonical: str
    variants: tuple[str, ...]
    phase_tags: frozenset[PhaseTag]

    @property
    def category(self) -> Category:
        return self.element.category

    @property
    def phase2_variant(self) -> str | None:
        """Variant included in the 70-question set, if any."""
        return self.variants[0] if self.variants else None

    def all_texts(self) -> tuple[str, ...]:
        return (self.canonical, *self.variants)


@dataclass(frozen=True)
class QuestionBank:
    groups: tuple[CompetencyQuestion, ...]
    _by_normalized: dict[str, CompetencyQuestion] = field(
        repr=False, compare=False, default_factory=dict
    )

    def __post_init__(self) -> None:
        index: dict[str, CompetencyQuestion] = {}
        for group in self.groups:
            for text in group.all_texts():
                index[normalize_question(text)] = group
        object.__setattr__(self, "_by_normalized", index)

    def __iter__(self) -> Iterator[CompetencyQuestion]:
        return iter(self.groups)

    def __len__(self) -> int:
        return len(self.groups)

    def phase1_questions(self) -> list[str]:
        """Canonical questions, one per group, in bank order."""
        return [
            g.canonical for g in self.groups if PhaseTag.PHASE1_36 in g.phase_tags
        ]

    def phase2_questions(self) -> list[str]:
        """Canonical plus first-variant questions, in bank order."""
        out: list[str] = []
        for g in self.groups:
            if PhaseTag.PHASE2_70 not in g.phase_tags:
                continue
            out.append(g.canonical)
            if g.phase2_variant is not None:
                out.append(g.phase2_variant)
        return out

    def all_questions(self) -> list[str]:
        """Every canonical and variant wording, in bank order."""
        out: list[str] = []
        for g in self.groups:
            out.extend(g.all_texts())
        return out

    def group_for(self, question: str) -> CompetencyQuestion | None:
        """Exact lookup by normalized wording, or None."""
        return self._by_normalized.get(normalize_question(question))

    def category_for(self, question: str) -> Category | None:
        group = self.group_for(question)
        return group.category if group else None

    def per_category_counts(self, phase: PhaseTag) -> dict[Category, int]:
        counts = {c: 0 for c in Category}
        for g in self.groups:
            if phase not in g.phase_tags:
                continue
            if phase is PhaseTag.PHASE1_36:
                counts[g.category] += 1
            elif phase is PhaseTag.PHASE2_70:
                counts[g.category] += 1 + (1 if g.variants else 0)
            else:
                counts[g.category] += 1 + len(g.variants)
        return counts


def _require(condition: bool, message: str, line: int | None = None) -> None:
    if not condition:
        raise BankLoadError(message, line=line)


def _parse_group(raw: object, index: int) -> CompetencyQuestion:
    where = f"questions[{index}]"
    _require(isinstance(raw, dict), f"{where}: expected an object")
    assert isinstance(raw, dict)
    for key in ("category", "element", "canonical", "variants", "phase_tags"):
        _require(key in raw, f"{where}: missing key {key!r}")
    try:
        category = Category(raw["category"])
    except ValueError:
        raise BankLoadError(f"{where}: unknown category {raw['category']!r}") from None
    try:
        element = get_element(category, raw["element"])
    except KeyError:
        raise BankLoadError(f"{where}: unknown element {raw['element']!r}") from None
    canonical = raw["canonical"]
    _require(
        isinstance(canonical, str) and canonical.strip() != "",
        f"{where}: canonical must be a non-empty string",
    )
    variants = raw["variants"]
    _require(isinstance(variants, list), f"{where}: variants must be a list")
    for v in variants:
        _require(
            isinstance(v, str) and v.strip() != "",
            f"{where}: variants must be non-empty strings",
        )
    tags: set[PhaseTag] = set()
    for t in raw["phase_tags"]:
        try:
            tags.add(PhaseTag(t))
        except ValueError:
            raise BankLoadError(f"{where}: unknown phase tag {t!r}") from None
    return CompetencyQuestion(
        element=element,
        canonical=canonical,
        variants=tuple(variants),
        phase_tags=frozenset(tags),
    )


def _validate_counts(bank: QuestionBank) -> None:
    n_groups = len(bank.phase1_questions())
    _require(
        n_groups == PHASE1_GROUP_COUNT,
        f"expected {PHASE1_GROUP_COUNT} canonical questions, found {n_groups}",
    )
    n_phase2 = len(bank.phase2_questions())
    _require(
        n_phase2 == PHASE2_QUESTION_COUNT,
        f"expected {PHASE2_QUESTION_COUNT} expanded-set questions, found {n_phase2}",
    )
    n_all = len(bank.all_questions())
    _require(
        n_all == EXTRACTION_QUESTION_COUNT,
        f"expected {EXTRACTION_QUESTION_COUNT} total questions, found {n_all}",
    )
    unaugmented = [g.canonical for g in bank.groups if not g.variants]
    _require(
        len(unaugmented) == 2,
        f"expected exactly 2 questions without variants, found {len(unaugmented)}",
    )


def load_question_bank(
    path: str | Path | None = None, strict: bool | None = None
) -> QuestionBank:
    """Load the bundled bank, or one from ``path``.

    ``strict`` turns on set-size validation (36/70/120 and the
    two-unaugmented rule).  Defaults to strict for the bundled bank and
    lenient for external files.
    """
    if strict is None:
        strict = path is None
    if path is None:
        source = resources.files("virtualta.data").joinpath("question_bank.json")
        text = source.read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BankLoadError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    _require(isinstance(payload, dict), "bank file must contain a JSON object")
    _require(
        payload.get("format") == _BANK_FORMAT,
        f"unrecognized bank format {payload.get('format')!r}",
    )
    raw_questions = payload.get("questions")
    _require(isinstance(raw_questions, list), "questions must be a list")

    groups = [_parse_group(raw, i) for i, raw in enumerate(raw_questions)]

    seen: dict[str, str] = {}
    for i, group in enumerate(groups):
        for text in group.all_texts():
            key = normalize_question(text)
            _require(key != "", f"questions[{i}]: blank question {text!r}")
            if key in seen:
                raise BankLoadError(
                    f"questions[{i}]: {text!r} duplicates {seen[key]!r}"
                )
            seen[key] = text

    bank = QuestionBank(groups=tuple(groups))
    if strict:
        _validate_counts(bank)
    return bank
