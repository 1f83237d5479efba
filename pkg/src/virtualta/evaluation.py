"""Evaluation harness: phase runs, graded-file ingestion, metrics, reports.

Phase 1 asks the 36 canonical questions against each raw syllabus and
writes one placeholder template per file for grading.  Phase 2 asks the
70-question expanded set against published (human-corrected) models.
Metrics follow the multiclass micro-averaged precision/recall/f1
definitions, with PARTIAL grades tracked separately and assignable to
either side.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .bank import QuestionBank
from .errors import EmptySyllabusError, EvaluationError
from .gateway import LanguageModelGateway
from .generate import generate_draft_model
from .ingest import DocumentChunk, SyllabusDocument, chunk_document
from .model import (
    NOT_FOUND_TEXT,
    PLACEHOLDER,
    KnowledgeEntry,
    KnowledgeModel,
    Verdict,
    parse_entry_line,
    serialize_model_jsonl,
)
from .qa import QAEngine, Question
from .registry import PublishedModel
from .schema import Category
from .textutil import normalize_question

# Display names as they appear in the published tables.
CATEGORY_LABELS: dict[Category, str] = {
    Category.COURSE_INFORMATION: "Course Information",
    Category.FACULTY_INFORMATION: "Faculty Information",
    Category.TA_INFORMATION: "TA information",
    Category.COURSE_GOALS: "Course Goals",
    Category.COURSE_CALENDAR: "Course Calendar",
    Category.ATTENDANCE: "Attendance",
    Category.GRADING: "Grading",
    Category.INSTRUCTIONAL_MATERIALS: "Instructional Materials",
    Category.POLICIES: "Policies",
}


class ReportFormat(str, Enum):
    TEXT_TABLE = "text"
    CSV = "csv"
    JSON = "json"


@dataclass(frozen=True)
class GradedRecord:
    question: str
    answer: str
    grade: Verdict
    category: Category
    source_file: str = ""


@dataclass(frozen=True)
class ConfusionTally:
    """Counts for the micro-averaged metrics.

    ``partial`` is kept out of tp/fp/fn here; compute_prf assigns it to
    one side depending on the include_partial mode.  Every graded record
    lands in exactly one of the four buckets.
    """

    n: int
    tp: int
    fp: int
    fn: int
    partial: int


@dataclass(frozen=True)
class PRFResult:
    precision: float
    recall: float
    f1: float
    degenerate: bool = False


@dataclass(frozen=True)
class AccuracyRow:
    question_count: int
    accuracy: float
    accuracy_with_partial: float


@dataclass(frozen=True)
class EvaluationReport:
    per_category: dict[Category, AccuracyRow]
    overall: AccuracyRow
    macro_overall: AccuracyRow | None
    prf_without_partial: PRFResult
    prf_with_partial: PRFResult
    corpus_files: tuple[str, ...]


def build_tally(records: Sequence[GradedRecord]) -> ConfusionTally:
    """Classify each graded record once.

    TRUE is a true positive.  FALSE splits on whether an answer was
    actually emitted: a wrong answer is a false positive, a not-found
    sentinel is a false negative (the information existed, the system
    declined).  PARTIAL is tracked separately.
    """
    tp = fp = fn = partial = 0
    for r in records:
        if r.grade is Verdict.TRUE:
            tp += 1
        elif r.grade is Verdict.PARTIAL:
            partial += 1
        elif r.answer == NOT_FOUND_TEXT:
            fn += 1
        else:
            fp += 1
    n = len({normalize_question(r.question) for r in records})
    return ConfusionTally(n=n, tp=tp, fp=fp, fn=fn, partial=partial)


def compute_prf(tally: ConfusionTally, include_partial: bool) -> PRFResult:
    """Micro-averaged precision/recall/f1 over the summed counts.

    include_partial moves the PARTIAL bucket into TP; otherwise it counts
    as FP (an answer was emitted but judged not fully correct).
    """
    tp = tally.tp + (tally.partial if include_partial else 0)
    fp = tally.fp + (0 if include_partial else tally.partial)
    fn = tally.fn
    if tp + fp + fn == 0:
        raise EvaluationError("empty tally: no classified records")
    degenerate = False
    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        precision, degenerate = 0.0, True
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        recall, degenerate = 0.0, True
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1, degenerate = 0.0, True
    return PRFResult(precision=precision, recall=recall, f1=f1, degenerate=degenerate)


def _accuracy(records: Sequence[GradedRecord], include_partial: bool) -> float:
    correct = sum(
        1
        for r in records
        if r.grade is Verdict.TRUE or (include_partial and r.grade is Verdict.PARTIAL)
    )
    return correct / len(records)


def compute_accuracy(
    records: Sequence[GradedRecord], include_partial: bool
) -> tuple[dict[Category, float], float]:
    """Per-category and pooled overall accuracy in one mode."""
    if not records:
        raise EvaluationError("no graded records")
    per: dict[Category, float] = {}
    for category in Category:
        subset = [r for r in records if r.category is category]
        if subset:
            per[category] = _accuracy(subset, include_partial)
    return per, _accuracy(records, include_partial)


def _accuracy_row(records: Sequence[GradedRecord]) -> AccuracyRow:
    return AccuracyRow(
        question_count=len(records),
        accuracy=_accuracy(records, include_partial=False),
        accuracy_with_partial=_accuracy(records, include_partial=True),
    )


def build_report(records: Sequence[GradedRecord]) -> EvaluationReport:
    if not records:
        raise EvaluationError("no graded records")
    per_category: dict[Category, AccuracyRow] = {}
    for category in Category:
        subset = [r for r in records if r.category is category]
        if subset:
            per_category[category] = _accuracy_row(subset)

    files = sorted({r.source_file for r in records if r.source_file})
    macro: AccuracyRow | None = None
    if files:
        by_file = [[r for r in records if r.source_file == f] for f in files]
        macro = AccuracyRow(
            question_count=len(records),
            accuracy=sum(_accuracy(g, False) for g in by_file) / len(by_file),
            accuracy_with_partial=sum(_accuracy(g, True) for g in by_file) / len(by_file),
        )

    tally = build_tally(records)
    return EvaluationReport(
        per_category=per_category,
        overall=_accuracy_row(list(records)),
        macro_overall=macro,
        prf_without_partial=compute_prf(tally, include_partial=False),
        prf_with_partial=compute_prf(tally, include_partial=True),
        corpus_files=tuple(files),
    )


# -- rendering ---------------------------------------------------------------


def _pct(value: float) -> str:
    return f"{value * 100:.1f}%"


def _report_dict(report: EvaluationReport) -> dict:
    def row(r: AccuracyRow | None) -> dict | None:
        if r is None:
            return None
        return {
            "question_count": r.question_count,
            "accuracy": r.accuracy,
            "accuracy_with_partial": r.accuracy_with_partial,
        }

    def prf(p: PRFResult) -> dict:
        return {
            "precision": p.precision,
            "recall": p.recall,
            "f1": p.f1,
            "degenerate": p.degenerate,
        }

    return {
        "per_category": {
            c.value: row(report.per_category.get(c)) for c in Category
        },
        "overall": row(report.overall),
        "macro_overall": row(report.macro_overall),
        "prf_without_partial": prf(report.prf_without_partial),
        "prf_with_partial": prf(report.prf_with_partial),
        "corpus_files": list(report.corpus_files),
    }


def _render_text(report: EvaluationReport, golden: Mapping | None) -> str:
    lines: list[str] = []
    header = f"{'Category':<26}{'Questions':>10}{'Accuracy':>12}{'With partial':>14}"
    lines.append(header)
    lines.append("-" * len(header))
    for category in Category:
        row = report.per_category.get(category)
        label = CATEGORY_LABELS[category]
        if row is None:
            lines.append(f"{label:<26}{0:>10}{'-':>12}{'-':>14}")
        else:
            lines.append(
                f"{label:<26}{row.question_count:>10}"
                f"{_pct(row.accuracy):>12}{_pct(row.accuracy_with_partial):>14}"
            )
    o = report.overall
    lines.append(
        f"{'Overall':<26}{o.question_count:>10}{_pct(o.accuracy):>12}{_pct(o.accuracy_with_partial):>14}"
    )
    if report.macro_overall is not None:
        m = report.macro_overall
        lines.append(
            f"{'Overall (per-file macro)':<26}{m.question_count:>10}"
            f"{_pct(m.accuracy):>12}{_pct(m.accuracy_with_partial):>14}"
        )
    lines.append("")
    lines.append(f"{'Performance metrics':<26}{'Without Partial':>16}{'Includes Partial':>18}")
    wo, wi = report.prf_without_partial, report.prf_with_partial
    lines.append(f"{'Recall':<26}{wo.recall:>16.2f}{wi.recall:>18.2f}")
    lines.append(f"{'Precision':<26}{wo.precision:>16.2f}{wi.precision:>18.2f}")
    lines.append(f"{'f1-score':<26}{wo.f1:>16.2f}{wi.f1:>18.2f}")
    if wo.degenerate or wi.degenerate:
        lines.append("(degenerate: some denominators were zero and reported as 0)")

    if golden is not None:
        lines.append("")
        lines.append("Published reference (display only, not a target):")
        g_overall = golden.get("overall", {})
        lines.append(
            f"{'Overall':<26}{g_overall.get('question_count', '-'):>10}"
            f"{_pct(g_overall['accuracy']):>12}{_pct(g_overall['accuracy_with_partial']):>14}"
        )
        for mode in ("prf_without_partial", "prf_with_partial"):
            g = golden.get(mode)
            if g:
                lines.append(
                    f"{mode:<26}P={g['precision']:.2f} R={g['recall']:.2f} F1={g['f1']:.2f}"
                )
    return "\n".join(lines) + "\n"


def _render_csv(report: EvaluationReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["category", "question_count", "accuracy", "accuracy_with_partial"])
    for category in Category:
        row = report.per_category.get(category)
        if row is None:
            writer.writerow([CATEGORY_LABELS[category], 0, "", ""])
        else:
            writer.writerow(
                [
                    CATEGORY_LABELS[category],
                    row.question_count,
                    repr(row.accuracy),
                    repr(row.accuracy_with_partial),
                ]
            )
    o = report.overall
    writer.writerow(["Overall", o.question_count, repr(o.accuracy), repr(o.accuracy_with_partial)])
    if report.macro_overall is not None:
        m = report.macro_overall
        writer.writerow(
            ["Overall (per-file macro)", m.question_count, repr(m.accuracy), repr(m.accuracy_with_partial)]
        )
    writer.writerow([])
    writer.writerow(["metric", "without_partial", "includes_partial"])
    wo, wi = report.prf_without_partial, report.prf_with_partial
    writer.writerow(["recall", repr(wo.recall), repr(wi.recall)])
    writer.writerow(["precision", repr(wo.precision), repr(wi.precision)])
    writer.writerow(["f1", repr(wo.f1), repr(wi.f1)])
    return buf.getvalue()


def render_report(
    report: EvaluationReport,
    fmt: ReportFormat = ReportFormat.TEXT_TABLE,
    golden: Mapping | None = None,
) -> str:
    if fmt is ReportFormat.JSON:
        payload: dict = _report_dict(report)
        if golden is not None:
            payload = {"report": payload, "golden_reference": dict(golden)}
        return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
    if fmt is ReportFormat.CSV:
        return _render_csv(report)
    return _render_text(report, golden)


# -- graded-file ingestion ----------------------------------------------------


def ingest_graded(
    files: Iterable[str | Path], bank: QuestionBank
) -> list[GradedRecord]:
    """Read graded JSONL files into records, categorized via the bank.

    A lingering placeholder or an unknown question is an error naming the
    file and line; grading must be complete before metrics make sense.
    """
    records: list[GradedRecord] = []
    for path in files:
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            entry = parse_entry_line(line, lineno)
            if entry.verification is None:
                raise EvaluationError(f"{path.name}: line {lineno} ungraded")
            category = bank.category_for(entry.question)
            if category is None:
                raise EvaluationError(
                    f"{path.name}: line {lineno}: question not in bank: {entry.question!r}"
                )
            records.append(
                GradedRecord(
                    question=entry.question,
                    answer=entry.answer,
                    grade=entry.verification,
                    category=category,
                    source_file=path.name,
                )
            )
    return records


# -- phase runs ----------------------------------------------------------------


@dataclass(frozen=True)
class RunSummary:
    written: tuple[tuple[str, str], ...]  # (source label, output filename)
    skipped: tuple[tuple[str, str], ...]  # (source label, reason)


def _stem_for(doc_label: str, taken: set[str]) -> str:
    stem = Path(doc_label).stem or "course"
    candidate, i = stem, 1
    while candidate in taken:
        i += 1
        candidate = f"{stem}-{i}"
    taken.add(candidate)
    return candidate


def _write_manifest(out_dir: Path, name: str, payload: dict) -> None:
    # No timestamps anywhere: re-runs over the same corpus must be
    # byte-identical.
    (out_dir / name).write_text(
        json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def _phase1_one(
    doc: SyllabusDocument,
    bank: QuestionBank,
    gateway: LanguageModelGateway,
    max_chars: int,
    top_k: int,
) -> tuple[str, KnowledgeModel | None, str | None]:
    label = doc.source_name or doc.course_id
    try:
        chunks = chunk_document(doc, max_chars)
    except EmptySyllabusError as exc:
        return label, None, str(exc)
    return label, generate_draft_model(chunks, bank, gateway, top_k=top_k), None


def run_phase1(
    corpus: Sequence[SyllabusDocument],
    bank: QuestionBank,
    gateway: LanguageModelGateway,
    out_dir: str | Path,
    *,
    max_chars: int = 200,
    top_k: int = 3,
    jobs: int = 1,
) -> RunSummary:
    """Generate one placeholder draft template per syllabus.

    ``jobs`` > 1 generates drafts concurrently; outputs and the manifest
    keep corpus order either way.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[tuple[str, str]] = []
    skipped: list[tuple[str, str]] = []
    manifest_files = []
    taken: set[str] = set()
    worker = lambda doc: _phase1_one(doc, bank, gateway, max_chars, top_k)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(worker, corpus))
    else:
        results = [worker(doc) for doc in corpus]
    for doc, (label, model, error) in zip(corpus, results):
        if model is None:
            skipped.append((label, error or "unusable syllabus"))
            continue
        stem = _stem_for(label, taken)
        filename = f"{stem}.phase1.jsonl"
        (out / filename).write_text(serialize_model_jsonl(model), encoding="utf-8")
        written.append((label, filename))
        manifest_files.append(
            {
                "source": label,
                "sha256": hashlib.sha256(doc.raw_text.encode("utf-8")).hexdigest(),
                "output": filename,
                "entries": len(model),
            }
        )
    _write_manifest(
        out,
        "manifest.phase1.json",
        {"phase": 1, "files": manifest_files, "skipped": [list(s) for s in skipped]},
    )
    return RunSummary(written=tuple(written), skipped=tuple(skipped))


@dataclass(frozen=True)
class Phase2Course:
    """One course ready for the question-answering phase."""

    stem: str
    published: PublishedModel
    chunks: tuple[DocumentChunk, ...] = ()


def run_phase2(
    courses: Sequence[Phase2Course],
    bank: QuestionBank,
    gateway: LanguageModelGateway,
    out_dir: str | Path,
    *,
    jobs: int = 1,
) -> RunSummary:
    """Answer the 70-question set against each published model."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    engine = QAEngine(gateway, bank, cache_capacity=0)

    def one(course: Phase2Course) -> list[KnowledgeEntry]:
        entries: list[KnowledgeEntry] = []
        for question_text in bank.phase2_questions():
            answer = engine.answer_question(
                Question(text=question_text, course_id=course.stem),
                course.published,
                course.chunks,
            )
            entries.append(KnowledgeEntry(question=question_text, answer=answer.text))
        return entries

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            all_entries = list(pool.map(one, courses))
    else:
        all_entries = [one(course) for course in courses]

    written: list[tuple[str, str]] = []
    manifest_files = []
    taken: set[str] = set()
    for course, entries in zip(courses, all_entries):
        stem = _stem_for(course.stem, taken)
        filename = f"{stem}.phase2.jsonl"
        (out / filename).write_text(
            serialize_model_jsonl(KnowledgeModel(entries=tuple(entries))),
            encoding="utf-8",
        )
        written.append((course.stem, filename))
        manifest_files.append(
            {
                "source": course.stem,
                "model_version": course.published.version,
                "output": filename,
                "entries": len(entries),
            }
        )
    _write_manifest(
        out,
        "manifest.phase2.json",
        {"phase": 2, "files": manifest_files, "skipped": []},
    )
    return RunSummary(written=tuple(written), skipped=())
