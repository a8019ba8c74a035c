"""Prompt construction and response parsing for query decoupling.

Two reasoning protocols rewrite a user query before frame scoring: one
extracts a concrete object list, the other reduces the query to a single
frame-level question. Responses follow a small wire grammar: a
``NO_DECOUPLE`` sentinel declines decoupling, an entity response ends with
a bracketed comma-separated list, an event response ends with a question
line.
"""

from __future__ import annotations

import re
from typing import List, Optional

from .errors import EmptyQueryError, UnparseableResponseError
from .model import STRATEGY_ENTITY, STRATEGY_EVENT, DecoupledQuery

NO_DECOUPLE = "NO_DECOUPLE"

_SCORING_TEMPLATE = (
    "Question: Does this frame contain any information to answer the given query: {query}?\n"
    "A. Yes. B. No.\n"
    "Answer the letter directly."
)

_ENTITY_SCORING_TEMPLATE = (
    "Question: Does the frame contain any objects of the following list: {object_list}?\n"
    "A. Yes. B. No.\n"
    "Answer the letter directly."
)

_ENTITY_DECOUPLE_TEMPLATE = """\
You are given a user query about a video. Rewrite it as a list of concrete
physical objects that a single frame could be checked for.

Work through three steps:
Step 1. Assess whether entity decoupling is necessary for this query. If it
cannot be grounded in concrete physical objects (for example, a pure
summarization request), reply with the single line {sentinel} and stop.
Step 2. Transform the query into a structured object list holding the
physical entities it mentions or implies.
Step 3. Refine the list by eliminating abstract concepts, keeping only
things that can be seen.

Example:
Query: "What color is the shirt of the person playing guitar?"
Step 1: decoupling helps. Step 2: [person, shirt, guitar, color]
Step 3: drop "color" (abstract).
Final answer: [person, shirt, guitar]

Example:
Query: "Summarize the main idea of this video."
Step 1: nothing concrete to look for.
Final answer: {sentinel}

Now decouple this query.
Query: "{query}"
End your reply with the final object list in square brackets, or {sentinel}."""

_EVENT_DECOUPLE_TEMPLATE = """\
You are given a user query about a video. Rewrite it as one simple, direct
question that can be answered by looking at a single frame.

Work through three steps:
Step 1. Analyze the type of the original question (what, who, how, where,
when, why).
Step 2. Identify the key elements to focus on: objects, actions, states,
and scenes.
Step 3. Formulate a simple, direct question asking whether a frame contains
these key elements. If no frame-level question makes sense, reply with the
single line {sentinel} instead.

Example:
Query: "Why does the chef turn off the stove near the end?"
Step 1: a "why" question. Step 2: chef, stove, the turning-off action.
Step 3: Does this frame show a chef turning off a stove?
Final answer: Does this frame show a chef turning off a stove?

Now decouple this query.
Query: "{query}"
End your reply with the final question on its own line, or {sentinel}."""

_BRACKET_RE = re.compile(r"\[([^\[\]]*)\]")
_SENTINEL_RE = re.compile(rf"\b{NO_DECOUPLE}\b")


def build_decouple_prompt(query: str, strategy: str) -> str:
    """Instantiate the reasoning prompt for ``strategy`` with ``query``."""
    if not query or not query.strip():
        raise EmptyQueryError("query must be non-empty")
    if strategy == STRATEGY_ENTITY:
        template = _ENTITY_DECOUPLE_TEMPLATE
    elif strategy == STRATEGY_EVENT:
        template = _EVENT_DECOUPLE_TEMPLATE
    else:
        raise ValueError(f"no decouple prompt for strategy {strategy!r}")
    return template.format(query=query, sentinel=NO_DECOUPLE)


def _extract_object_list(response: str) -> Optional[List[str]]:
    matches = _BRACKET_RE.findall(response)
    if not matches:
        return None
    items: List[str] = []
    for raw in matches[-1].split(","):
        item = raw.strip()
        if item and item not in items:
            items.append(item)
    return items or None


def _extract_question(response: str) -> Optional[str]:
    for line in reversed(response.splitlines()):
        line = line.strip()
        if line.endswith("?"):
            line = re.sub(r"^(final answer|question)\s*:\s*", "", line, flags=re.I)
            return line.strip() or None
    return None


def parse_decouple_response(response: str, source_query: str = "") -> DecoupledQuery:
    """Parse a decoupling reply into a DecoupledQuery.

    The sentinel wins over everything; otherwise the last bracketed list is
    an entity decoupling and the last question line an event decoupling.
    Raises unparseable-response when none applies; callers degrade to the
    direct strategy.
    """
    if _SENTINEL_RE.search(response):
        return DecoupledQuery.direct(source_query)
    objects = _extract_object_list(response)
    if objects is not None:
        return DecoupledQuery(
            strategy=STRATEGY_ENTITY,
            source_query=source_query,
            object_list=tuple(objects),
        )
    question = _extract_question(response)
    if question is not None:
        return DecoupledQuery(
            strategy=STRATEGY_EVENT,
            source_query=source_query,
            event_question=question,
        )
    raise UnparseableResponseError(
        "response has no sentinel, object list, or question line"
    )


def build_frame_scoring_prompt(dq: DecoupledQuery) -> str:
    """Binary-choice scoring prompt for one frame under ``dq``."""
    if dq.strategy == STRATEGY_ENTITY:
        rendered = ", ".join(dq.object_list)
        return _ENTITY_SCORING_TEMPLATE.format(object_list=rendered)
    if dq.strategy == STRATEGY_EVENT:
        return _SCORING_TEMPLATE.format(query=dq.event_question)
    return _SCORING_TEMPLATE.format(query=dq.source_query)
