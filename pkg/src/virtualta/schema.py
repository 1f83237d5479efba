"""The syllabus knowledge schema: nine categories and their elements.

This is the fixed vocabulary the whole system is organized around; every
competency question and every knowledge-model entry points at one
(category, element) pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Category(str, Enum):
    COURSE_INFORMATION = "CourseInformation"
    FACULTY_INFORMATION = "FacultyInformation"
    TA_INFORMATION = "TAInformation"
    COURSE_GOALS = "CourseGoals"
    COURSE_CALENDAR = "CourseCalendar"
    ATTENDANCE = "Attendance"
    GRADING = "Grading"
    INSTRUCTIONAL_MATERIALS = "InstructionalMaterials"
    POLICIES = "Policies"


@dataclass(frozen=True)
class SchemaElement:
    """One row of the syllabus schema."""

    category: Category
    element_key: str

    def __str__(self) -> str:  # pragma: no cover - debugging aid
        return f"{self.category.value}/{self.element_key}"


def _rows() -> list[tuple[Category, str]]:
    return [
        (Category.COURSE_INFORMATION, "Course Name"),
        (Category.COURSE_INFORMATION, "Course Number"),
        (Category.COURSE_INFORMATION, "Credit Hours"),
        (Category.COURSE_INFORMATION, "Location and Class Times"),
        (Category.COURSE_INFORMATION, "Prerequisites/Co-requisites"),
        (Category.FACULTY_INFORMATION, "Name"),
        (Category.FACULTY_INFORMATION, "Contact Information"),
        (Category.FACULTY_INFORMATION, "Office Location"),
        (Category.FACULTY_INFORMATION, "Office Hours"),
        (Category.TA_INFORMATION, "Name"),
        (Category.TA_INFORMATION, "Contact Information"),
        (Category.TA_INFORMATION, "Office Location"),
        (Category.TA_INFORMATION, "Office Hours"),
        (Category.COURSE_GOALS, "Course Objectives"),
        (Category.COURSE_GOALS, "Expectations from the course"),
        (Category.COURSE_CALENDAR, "Due dates"),
        (Category.COURSE_CALENDAR, "Assignment dates"),
        (Category.COURSE_CALENDAR, "Assignment Submission"),
        (Category.ATTENDANCE, "Attendance policy"),
        (Category.ATTENDANCE, "Expected Classroom behavior"),
        (Category.GRADING, "Grading Criteria"),
        (Category.GRADING, "Tentative Exam Schedule"),
        (Category.INSTRUCTIONAL_MATERIALS, "Textbooks"),
        (Category.INSTRUCTIONAL_MATERIALS, "Other required materials for the course"),
        (Category.POLICIES, "Late Assignments"),
        (Category.POLICIES, "Academic Dishonesty"),
        (Category.POLICIES, "Disability Statement"),
        (Category.POLICIES, "Freedom of Speech"),
        (Category.POLICIES, "Makeup Policy"),
        (Category.POLICIES, "Mental Health Resources"),
        (Category.POLICIES, "Absences for Religious Holy Days"),
    ]


SYLLABUS_SCHEMA: tuple[SchemaElement, ...] = tuple(SchemaElement(c, k) for c, k in _rows())

_BY_PAIR = {(e.category, e.element_key): e for e in SYLLABUS_SCHEMA}


def get_element(category: Category, element_key: str) -> SchemaElement:
    """Look up a schema element; raises KeyError for unknown pairs."""
    return _BY_PAIR[(category, element_key)]


def elements_for(category: Category) -> list[SchemaElement]:
    return [e for e in SYLLABUS_SCHEMA if e.category == category]
