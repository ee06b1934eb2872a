"""Positive/negative labels from the change kind of a TODO comment's line."""
from __future__ import annotations

import enum

from todomine.diff import LineKind


class Label(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    DISCARD = "discard"


_LABELS = {
    # the change removed the TODO: its task is taken to be done
    LineKind.REMOVED: Label.POSITIVE,
    # the TODO survives an unrelated change
    LineKind.EQUAL: Label.NEGATIVE,
    # a newly introduced TODO says nothing about obsolescence
    LineKind.ADDED: Label.DISCARD,
}


def scope_kind(span) -> LineKind:
    """Kind of the line that carries the ``todo`` token within a TODO span."""
    if not span.is_todo or span.token_line_index is None:
        raise ValueError("scope_kind needs a TODO span")
    return span.line_kinds[span.line_indices.index(span.token_line_index)]


def label_triple(scope: LineKind) -> Label:
    return _LABELS[scope]
