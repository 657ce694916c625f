"""Extraction of domain selections and function calls from model output.

Both extractors are total: malformed output degrades to "nothing found"
plus warnings, never to an exception.
"""

from __future__ import annotations

import json
import re
from typing import Any

from src.constants import DOMAIN_CLOSE, DOMAIN_OPEN, FUNCTION_CALL_CLOSE, FUNCTION_CALL_OPEN
from src.core.dialogue import FunctionCall
from src.parsing.outcome import ParseOutcome, ParseWarning, WarningKind

_TRAILING_COMMA_RE = re.compile(r",\s*([}\]])")

_FAILED = object()


def extract_domain(text: str, warnings: list[ParseWarning] | None = None) -> str | None:
    """Return the trimmed content of the first ``<domain>...</domain>`` span.

    Without a closing tag the first whitespace-delimited word after the
    opening tag is taken and a ``missing_close_tag`` warning is appended to
    ``warnings``.
    """
    start = text.find(DOMAIN_OPEN)
    if start < 0:
        return None
    body_start = start + len(DOMAIN_OPEN)
    end = text.find(DOMAIN_CLOSE, body_start)
    if end >= 0:
        return text[body_start:end].strip() or None

    if warnings is not None:
        warnings.append(ParseWarning(WarningKind.MISSING_CLOSE_TAG, DOMAIN_CLOSE))
    words = text[body_start:].split(maxsplit=1)
    if not words:
        return None
    return words[0].split("<", 1)[0] or None


def extract_function_call(text: str) -> ParseOutcome:
    """Locate the first ``<function_call>`` span and parse its JSON body.

    The payload may be ``{"function": name, "arguments": {...}}`` or the
    single-key form ``{name: {...}}``. The response is the input with the
    call span removed. When no call can be recovered the response is the
    whole input.
    """
    start = text.find(FUNCTION_CALL_OPEN)
    if start < 0:
        return ParseOutcome(call=None, response=text)

    warnings: list[ParseWarning] = []
    body_start = start + len(FUNCTION_CALL_OPEN)
    close = text.find(FUNCTION_CALL_CLOSE, body_start)
    next_open = text.find(FUNCTION_CALL_OPEN, body_start)

    if close >= 0 and (next_open < 0 or close < next_open):
        span_end = close + len(FUNCTION_CALL_CLOSE)
        payload = _decode(text[body_start:close], warnings)
    else:
        warnings.append(ParseWarning(WarningKind.MISSING_CLOSE_TAG, FUNCTION_CALL_CLOSE))
        limit = next_open if next_open >= 0 else len(text)
        region = text[body_start:limit]
        brace = region.find("{")
        if brace < 0:
            span_end = limit
            payload = _decode("", warnings)
        else:
            end = _balanced_end(region, brace)
            if end is None:
                span_end = limit
                payload = _decode(region[brace:], warnings)
            else:
                span_end = body_start + end
                payload = _decode(region[brace:end], warnings)

    call = _to_call(payload, warnings)
    if call is None:
        return ParseOutcome(call=None, response=text, warnings=tuple(warnings))

    before = text[:start].strip()
    after = text[span_end:].strip()
    response = " ".join(part for part in (before, after) if part)
    return ParseOutcome(call=call, response=response, warnings=tuple(warnings))


def _loads(text: str) -> Any:
    try:
        return json.loads(text)
    except (ValueError, RecursionError):
        return _FAILED


def _decode(body: str, warnings: list[ParseWarning]) -> Any:
    stripped = body.strip()
    if not stripped:
        warnings.append(ParseWarning(WarningKind.EMPTY_CALL, "empty payload"))
        return _FAILED

    value = _loads(stripped)
    if value is not _FAILED:
        return value

    brace = stripped.find("{")
    if brace < 0:
        warnings.append(ParseWarning(WarningKind.EMPTY_CALL, "payload is not JSON"))
        return _FAILED

    end = _balanced_end(stripped, brace)
    if end is not None:
        value = _loads(stripped[brace:end])
        if value is not _FAILED:
            warnings.append(ParseWarning(WarningKind.REPAIRED_JSON, "stripped surrounding text"))
            return value
        candidate = stripped[brace:end]
    else:
        candidate = stripped[brace:]

    value = _loads(_repair(candidate))
    if value is not _FAILED:
        warnings.append(ParseWarning(WarningKind.REPAIRED_JSON, "balanced braces"))
        return value

    warnings.append(ParseWarning(WarningKind.EMPTY_CALL, "unparseable JSON payload"))
    return _FAILED


def _balanced_end(text: str, start: int) -> int | None:
    """Index just past the brace closing the one at ``start``, or None."""
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return i + 1
    return None


def _repair(candidate: str) -> str:
    """Drop trailing commas, cut stray closers and close what is left open."""
    text = _TRAILING_COMMA_RE.sub(r"\1", candidate)
    stack: list[str] = []
    in_string = False
    escaped = False
    cut = len(text)
    for i, ch in enumerate(text):
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch in "{[":
            stack.append("}" if ch == "{" else "]")
        elif ch in "}]":
            if stack and stack[-1] == ch:
                stack.pop()
            else:
                cut = i
                break
    text = text[:cut]
    if in_string:
        text += '"'
    text = text.rstrip().rstrip(",")
    return text + "".join(reversed(stack))


def _to_call(payload: Any, warnings: list[ParseWarning]) -> FunctionCall | None:
    if payload is _FAILED:
        return None
    if not isinstance(payload, dict) or not payload:
        warnings.append(ParseWarning(WarningKind.EMPTY_CALL, "payload is not a call object"))
        return None

    if "function" in payload or "name" in payload:
        name = payload.get("function", payload.get("name"))
        arguments = payload.get("arguments", payload.get("parameters", {}))
        if isinstance(arguments, str):
            decoded = _loads(arguments)
            arguments = decoded if isinstance(decoded, dict) else {}
    elif len(payload) == 1 and isinstance(next(iter(payload.values())), dict):
        name, arguments = next(iter(payload.items()))
    else:
        warnings.append(ParseWarning(WarningKind.EMPTY_CALL, "no function name"))
        return None

    if not isinstance(name, str) or not name.strip():
        warnings.append(ParseWarning(WarningKind.EMPTY_CALL, "no function name"))
        return None
    if not isinstance(arguments, dict):
        arguments = {}
    return FunctionCall(function=name.strip(), arguments=_scalar_arguments(arguments))


def _scalar_arguments(arguments: dict[Any, Any]) -> dict[str, str]:
    result: dict[str, str] = {}
    for key, value in arguments.items():
        if isinstance(value, list):
            value = next((v for v in value if not isinstance(v, (list, dict))), None)
        if value is None or isinstance(value, dict):
            continue
        if isinstance(value, bool):
            result[str(key)] = "yes" if value else "no"
        else:
            result[str(key)] = str(value)
    return result
