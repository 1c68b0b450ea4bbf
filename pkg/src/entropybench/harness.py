"""HTTP client for prompting chat-completion endpoints and recording transcripts.

The harness only *collects*: every analysis step runs offline on stored
transcripts, so the scoring pipeline never needs network access.  Requests
use the common chat-completion wire shape::

    POST {base_url}/chat/completions
    {"model": ..., "messages": [{"role", "content"}...],
     "temperature": ..., "tools": [...]?}

Credentials come exclusively from the ENTROPYBENCH_API_KEY environment
variable; they are never read from config files and never written into
transcripts.
"""

from __future__ import annotations

import json
import os
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import httpx

from .sources import SampleSource, draw_integers, extract_integers

__all__ = [
    "API_KEY_ENV",
    "INTEGER_PROMPT",
    "SHUFFLE_PROMPT",
    "SYSTEM_PROMPT",
    "RNG_TOOL_NAME",
    "HarnessError",
    "MissingCredentialsError",
    "AuthenticationError",
    "Endpoint",
    "PromptConfig",
    "Transcript",
    "ChatClient",
    "request_integers",
    "request_shuffles",
    "run_tool_loop",
    "extract_shuffle_rows",
    "load_transcript",
]

API_KEY_ENV = "ENTROPYBENCH_API_KEY"

INTEGER_PROMPT = (
    "Can you please create {count} random positive integers in decimal format, "
    "the highest of which is {max}."
)
SHUFFLE_PROMPT = (
    "Shuffle a deck of {n} cards labeled 0 through {n_minus_1}. Repeat the "
    "shuffle {trials} times and output every resulting ordering on its own "
    "line as comma-separated labels. Output plain text only; the output must "
    "not be code."
)
SYSTEM_PROMPT = (
    "You are a true random number generator. You will be asked to generate "
    "random numbers in JSON format. Do not give any code or ideas. Only the answer."
)

RNG_TOOL_NAME = "random_int"
# Minimal function-call schema served by the harness-side generator.
RNG_TOOL_SCHEMA = {
    "type": "function",
    "function": {
        "name": RNG_TOOL_NAME,
        "description": "Draw uniformly distributed random integers.",
        "parameters": {
            "type": "object",
            "properties": {
                "min": {"type": "integer"},
                "max": {"type": "integer"},
                "count": {"type": "integer"},
            },
            "required": ["min", "max", "count"],
        },
    },
}


class HarnessError(RuntimeError):
    """Request-level failure after retries were exhausted."""


class MissingCredentialsError(HarnessError):
    """ENTROPYBENCH_API_KEY is not set."""


class AuthenticationError(HarnessError):
    """The endpoint rejected the supplied credentials."""


@dataclass(frozen=True)
class Endpoint:
    base_url: str
    model: str


@dataclass(frozen=True)
class PromptConfig:
    """What to ask, how to thread the session, and sampling parameters."""

    endpoint: Endpoint
    user_prompt: Optional[str] = None  # template override; None uses the task default
    system_prompt: Optional[str] = SYSTEM_PROMPT
    session_mode: str = "continued"  # "fresh" | "continued"
    tool_mode: str = "none"  # "none" | "rng_tool"
    temperature: float = 0.0
    max_tokens: Optional[int] = None
    batch_size: int = 500  # values requested per exchange in continued mode
    extra_rounds: int = 3  # retry budget beyond the minimum round count

    def __post_init__(self) -> None:
        if self.session_mode not in ("fresh", "continued"):
            raise ValueError(f"unknown session mode {self.session_mode!r}")
        if self.tool_mode not in ("none", "rng_tool"):
            raise ValueError(f"unknown tool mode {self.tool_mode!r}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


class Transcript:
    """Append-only record of exchanges and tool traffic for one session.

    Sealed on save: a transcript that has been serialized can no longer be
    mutated, so stored recordings replay identically forever.
    """

    def __init__(self, source_label: str) -> None:
        self.source_label = source_label
        self.exchanges: list[dict] = []
        self.tool_calls: list[dict] = []
        self.flags: dict = {}
        self._sealed = False

    def _check_mutable(self) -> None:
        if self._sealed:
            raise ValueError("transcript is sealed; no further mutation allowed")

    def append_exchange(self, request: dict, response: dict) -> None:
        self._check_mutable()
        self.exchanges.append(
            {"request": request, "response": response, "timestamp": time.time()}
        )

    def append_tool_call(self, record: dict) -> None:
        self._check_mutable()
        self.tool_calls.append(dict(record, timestamp=time.time()))

    def set_flag(self, name: str, value) -> None:
        self._check_mutable()
        self.flags[name] = value

    @property
    def sealed(self) -> bool:
        return self._sealed

    def response_texts(self) -> list[str]:
        """Assistant message contents, in order (tool traffic excluded)."""
        texts = []
        for ex in self.exchanges:
            message = (ex["response"].get("choices") or [{}])[0].get("message", {})
            content = message.get("content")
            if content:
                texts.append(content)
        return texts

    def all_text(self) -> str:
        return "\n".join(self.response_texts())

    def tool_served_values(self) -> list[int]:
        """All values served to the model by the harness-side generator."""
        out: list[int] = []
        for record in self.tool_calls:
            out.extend(record.get("served", []))
        return out

    def save(self, path: str | Path) -> None:
        """Write JSON-lines (one event per line) and seal the transcript."""
        lines = [json.dumps({"type": "header", "source_label": self.source_label,
                             "flags": self.flags}, sort_keys=True)]
        for ex in self.exchanges:
            lines.append(json.dumps(dict(ex, type="exchange"), sort_keys=True))
        for record in self.tool_calls:
            lines.append(json.dumps(dict(record, type="tool_call"), sort_keys=True))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
        self._sealed = True


def load_transcript(path: str | Path) -> Transcript:
    """Reload a stored transcript; the result arrives sealed."""
    transcript: Optional[Transcript] = None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        event = json.loads(line)
        kind = event.pop("type")
        if kind == "header":
            transcript = Transcript(event["source_label"])
            transcript.flags = event.get("flags", {})
        elif transcript is None:
            raise ValueError(f"{path}: transcript does not start with a header line")
        elif kind == "exchange":
            transcript.exchanges.append(event)
        elif kind == "tool_call":
            transcript.tool_calls.append(event)
        else:
            raise ValueError(f"{path}: unknown transcript event type {kind!r}")
    if transcript is None:
        raise ValueError(f"{path}: empty transcript file")
    transcript._sealed = True
    return transcript


class ChatClient:
    """Minimal chat-completion client with retry, backoff, and pacing."""

    def __init__(
        self,
        endpoint: Endpoint,
        transport: Optional[httpx.BaseTransport] = None,
        timeout: float = 60.0,
        min_request_interval: float = 1.0,
        max_retries: int = 3,
        backoff_base: float = 0.5,
    ) -> None:
        api_key = os.environ.get(API_KEY_ENV, "")
        if not api_key:
            raise MissingCredentialsError(
                f"set {API_KEY_ENV} in the environment before issuing requests"
            )
        self.endpoint = endpoint
        self.min_request_interval = min_request_interval
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self._last_request = 0.0
        self._http = httpx.Client(
            base_url=endpoint.base_url.rstrip("/"),
            headers={"Authorization": f"Bearer {api_key}"},
            timeout=timeout,
            transport=transport,
        )

    def close(self) -> None:
        self._http.close()

    def _pace(self) -> None:
        wait = self.min_request_interval - (time.monotonic() - self._last_request)
        if wait > 0:
            time.sleep(wait)
        self._last_request = time.monotonic()

    def chat(
        self,
        messages: Sequence[dict],
        temperature: float = 0.0,
        max_tokens: Optional[int] = None,
        tools: Optional[list[dict]] = None,
    ) -> tuple[dict, dict]:
        """POST one completion request; returns (request_payload, response_json)."""
        payload: dict = {
            "model": self.endpoint.model,
            "messages": list(messages),
            "temperature": temperature,
        }
        if max_tokens is not None:
            payload["max_tokens"] = max_tokens
        if tools:
            payload["tools"] = tools
        last_error: Optional[Exception] = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_base * 2 ** (attempt - 1))
            self._pace()
            try:
                response = self._http.post("/chat/completions", json=payload)
            except httpx.TransportError as exc:
                last_error = exc
                continue
            if response.status_code in (401, 403):
                raise AuthenticationError(
                    f"endpoint rejected credentials (HTTP {response.status_code})"
                )
            if response.status_code == 429 or response.status_code >= 500:
                last_error = HarnessError(f"HTTP {response.status_code}: {response.text[:200]}")
                continue
            if response.status_code != 200:
                raise HarnessError(f"HTTP {response.status_code}: {response.text[:200]}")
            return payload, response.json()
        raise HarnessError(f"request failed after {self.max_retries + 1} attempts: {last_error}")


def _base_messages(config: PromptConfig) -> list[dict]:
    if config.system_prompt:
        return [{"role": "system", "content": config.system_prompt}]
    return []


def _assistant_message(response: dict) -> dict:
    choices = response.get("choices") or []
    if not choices:
        raise HarnessError("response carried no choices")
    return choices[0].get("message") or {}


def request_integers(
    config: PromptConfig,
    count: int,
    upper: int,
    client: Optional[ChatClient] = None,
    **client_kwargs,
) -> Transcript:
    """Prompt for ``count`` integers in [0, upper], paginating as needed.

    In continued mode the conversation is threaded and batches of at most
    ``config.batch_size`` values are requested until the count is covered or
    the retry budget runs out; a shortfall leaves the transcript flagged
    partial rather than raising.
    """
    own_client = client is None
    client = client or ChatClient(config.endpoint, **client_kwargs)
    template = config.user_prompt or INTEGER_PROMPT
    transcript = Transcript(source_label=f"{config.endpoint.model}:integers")
    history = _base_messages(config)
    collected = 0
    max_rounds = -(-count // config.batch_size) + config.extra_rounds
    try:
        for _ in range(max_rounds):
            if collected >= count:
                break
            want = min(config.batch_size, count - collected)
            user = {"role": "user", "content": template.format(count=want, max=upper)}
            if config.session_mode == "continued":
                messages = history + [user]
            else:
                messages = _base_messages(config) + [user]
            payload, response = client.chat(
                messages, temperature=config.temperature, max_tokens=config.max_tokens
            )
            transcript.append_exchange(payload, response)
            message = _assistant_message(response)
            values, _ = extract_integers(message.get("content") or "", upper)
            collected += len(values)
            if config.session_mode == "continued":
                history = messages + [
                    {"role": "assistant", "content": message.get("content") or ""}
                ]
    finally:
        if own_client:
            client.close()
    if collected < count:
        transcript.set_flag("partial", True)
        transcript.set_flag("shortfall", count - collected)
    return transcript


def extract_shuffle_rows(text: str, n: int) -> list[list[int]]:
    """Parse deck orderings out of response text, one candidate per line.

    Lines whose digit runs do not form exactly ``n`` values are ignored here;
    permutation validation happens later at ingestion.
    """
    rows = []
    for line in text.splitlines():
        values = [int(tok) for tok in re.findall(r"\d+", line)]
        if len(values) == n:
            rows.append(values)
    return rows


def request_shuffles(
    config: PromptConfig,
    n: int,
    trials: int,
    client: Optional[ChatClient] = None,
    **client_kwargs,
) -> Transcript:
    """Prompt for ``trials`` orderings of ``n`` labeled cards.

    The prompt explicitly forbids code output; batches continue in continued
    mode until enough parseable orderings arrived or the budget is spent.
    """
    if n < 3:
        raise ValueError(f"card count must be >= 3, got {n}")
    own_client = client is None
    client = client or ChatClient(config.endpoint, **client_kwargs)
    template = config.user_prompt or SHUFFLE_PROMPT
    transcript = Transcript(source_label=f"{config.endpoint.model}:shuffles")
    history = _base_messages(config)
    batch_trials = max(1, config.batch_size // n)
    collected = 0
    max_rounds = -(-trials // batch_trials) + config.extra_rounds
    try:
        for _ in range(max_rounds):
            if collected >= trials:
                break
            want = min(batch_trials, trials - collected)
            user = {
                "role": "user",
                "content": template.format(n=n, n_minus_1=n - 1, trials=want),
            }
            if config.session_mode == "continued":
                messages = history + [user]
            else:
                messages = _base_messages(config) + [user]
            payload, response = client.chat(
                messages, temperature=config.temperature, max_tokens=config.max_tokens
            )
            transcript.append_exchange(payload, response)
            message = _assistant_message(response)
            collected += len(extract_shuffle_rows(message.get("content") or "", n))
            if config.session_mode == "continued":
                history = messages + [
                    {"role": "assistant", "content": message.get("content") or ""}
                ]
    finally:
        if own_client:
            client.close()
    if collected < trials:
        transcript.set_flag("partial", True)
        transcript.set_flag("shortfall", trials - collected)
    return transcript


def _serve_tool_call(tool_source: SampleSource, arguments: dict) -> list[int]:
    lo = int(arguments["min"])
    hi = int(arguments["max"])
    count = int(arguments["count"])
    if hi < lo:
        raise ValueError(f"tool call range [{lo}, {hi}] is empty")
    if hi == lo:
        return [lo] * count
    sample = draw_integers(tool_source, count, hi - lo)
    return [int(v) + lo for v in sample.values.tolist()]


def run_tool_loop(
    config: PromptConfig,
    count: int,
    upper: int,
    tool_source: SampleSource,
    client: Optional[ChatClient] = None,
    max_iterations: int = 20,
    **client_kwargs,
) -> Transcript:
    """Function-calling workflow: the model delegates drawing to a local generator.

    Whenever the model emits a ``random_int`` tool call, the harness serves
    values from ``tool_source``, feeds them back, and continues until a
    final text response arrives.  Tool traffic is recorded separately from
    the exchanges so scoring can distinguish model-authored from tool-served
    numbers.  Malformed tool payloads and runaway loops abort gracefully
    with an ``aborted`` flag instead of raising.
    """
    if config.tool_mode != "rng_tool":
        raise ValueError("run_tool_loop requires tool_mode='rng_tool'")
    own_client = client is None
    client = client or ChatClient(config.endpoint, **client_kwargs)
    template = config.user_prompt or INTEGER_PROMPT
    transcript = Transcript(source_label=f"{config.endpoint.model}:tool-loop")
    messages = _base_messages(config) + [
        {"role": "user", "content": template.format(count=count, max=upper)}
    ]
    try:
        for _ in range(max_iterations):
            payload, response = client.chat(
                messages,
                temperature=config.temperature,
                max_tokens=config.max_tokens,
                tools=[RNG_TOOL_SCHEMA],
            )
            transcript.append_exchange(payload, response)
            message = _assistant_message(response)
            tool_calls = message.get("tool_calls") or []
            if not tool_calls:
                return transcript
            messages = list(messages) + [message]
            for call in tool_calls:
                function = call.get("function") or {}
                try:
                    arguments = json.loads(function.get("arguments") or "")
                    served = _serve_tool_call(tool_source, arguments)
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    transcript.append_tool_call(
                        {"name": function.get("name"), "error": str(exc), "served": []}
                    )
                    transcript.set_flag("aborted", f"malformed tool call: {exc}")
                    return transcript
                transcript.append_tool_call(
                    {"name": function.get("name"), "arguments": arguments, "served": served}
                )
                messages.append(
                    {
                        "role": "tool",
                        "tool_call_id": call.get("id"),
                        "content": json.dumps(served),
                    }
                )
        transcript.set_flag("aborted", f"tool loop exceeded {max_iterations} iterations")
        return transcript
    finally:
        if own_client:
            client.close()
