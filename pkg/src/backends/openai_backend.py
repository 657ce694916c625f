"""Backend for any OpenAI-compatible chat or raw completion endpoint."""

from __future__ import annotations

import logging
import time
from collections.abc import Callable
from typing import Any

import openai

from src.backends.base import CompletionRequest, CompletionResult, FinishReason
from src.constants import BACKOFF_BASE_SECONDS, DEFAULT_TIMEOUT_SECONDS, MAX_ATTEMPTS
from src.exceptions import BackendError, ProtocolError, RetryableBackendError

log = logging.getLogger(__name__)

_RETRYABLE = (openai.APIConnectionError, openai.RateLimitError, openai.InternalServerError)


class OpenAIBackend:
    """Talks to ``/chat/completions``, or ``/completions`` in raw mode.

    Transport errors and HTTP 429/5xx are retried with exponential backoff;
    other 4xx responses and malformed payloads fail immediately.
    """

    def __init__(
        self,
        *,
        base_url: str | None,
        api_key: str,
        raw_completion: bool = False,
        timeout: float = DEFAULT_TIMEOUT_SECONDS,
        max_attempts: int = MAX_ATTEMPTS,
        sleep: Callable[[float], None] = time.sleep,
        client: Any = None,
    ) -> None:
        self._client = client or openai.OpenAI(
            base_url=base_url, api_key=api_key, timeout=timeout, max_retries=0
        )
        self._raw = raw_completion
        self._max_attempts = max_attempts
        self._sleep = sleep

    def complete(self, request: CompletionRequest) -> CompletionResult:
        """Raises:
        RetryableBackendError: If transport failures outlast the retry budget.
        ProtocolError: If the server answers with a malformed payload.
        BackendError: On non-retryable HTTP errors.
        """
        for attempt in range(1, self._max_attempts + 1):
            try:
                response = self._send(request)
            except _RETRYABLE as exc:
                if attempt == self._max_attempts:
                    raise RetryableBackendError(str(exc), attempt) from exc
                delay = BACKOFF_BASE_SECONDS * 2 ** (attempt - 1)
                log.warning(
                    "[RETRY] %s stage: attempt %d/%d failed (%s); retrying in %.1fs",
                    request.stage or "completion",
                    attempt,
                    self._max_attempts,
                    exc,
                    delay,
                )
                self._sleep(delay)
                continue
            except openai.APIStatusError as exc:
                raise BackendError(f"HTTP {exc.status_code}: {exc.message}") from exc
            return self._result(response)
        raise RetryableBackendError("no attempts made", 0)

    def _send(self, request: CompletionRequest) -> Any:
        params = request.params
        kwargs: dict[str, Any] = {
            "model": request.model_id,
            "temperature": params.temperature,
            "top_p": params.top_p,
            "max_tokens": params.max_tokens,
        }
        if params.stop_sequences:
            kwargs["stop"] = list(params.stop_sequences)
        if self._raw:
            if request.prompt is None:
                raise BackendError("Raw completion mode needs a templated prompt")
            return self._client.completions.create(prompt=request.prompt, **kwargs)
        return self._client.chat.completions.create(
            messages=[message.to_dict() for message in request.messages], **kwargs
        )

    def _result(self, response: Any) -> CompletionResult:
        try:
            choice = response.choices[0]
            text = choice.text if self._raw else choice.message.content
            finish = getattr(choice, "finish_reason", None)
        except (AttributeError, IndexError, TypeError) as exc:
            raise ProtocolError(f"Malformed completion payload: {exc}") from exc
        if not isinstance(text, str):
            raise ProtocolError("Completion payload has no text content")

        usage = None
        raw_usage = getattr(response, "usage", None)
        if raw_usage is not None:
            usage = {
                "prompt_tokens": int(getattr(raw_usage, "prompt_tokens", 0) or 0),
                "completion_tokens": int(getattr(raw_usage, "completion_tokens", 0) or 0),
            }
        reason = FinishReason.LENGTH if finish == "length" else FinishReason.STOP
        return CompletionResult(text=text, finish_reason=reason, usage=usage)
