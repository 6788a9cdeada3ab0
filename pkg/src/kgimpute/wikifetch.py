"""Grounding-corpus assembly from public wiki REST endpoints.

Every fetched word lands in an on-disk cache (JSON-lines, one file per
initial letter), so a warm cache rebuilds the corpus byte-for-byte with
zero network calls. Endpoint base URLs are configuration, not
hardcoded hosts; tests run entirely against stub transports.
"""

from __future__ import annotations

import html
import json
import logging
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import quote

import requests

logger = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_NOT_FOUND = "not_found"
STATUS_ERROR = "error"

_TAG_RE = re.compile(r"<[^>]+>")
_WS_RE = re.compile(r"\s+")


@dataclass
class FetchCacheEntry:
    word: str
    fetched_at: float
    summary_text: str
    definition_text: str
    status: str
    resolved_title: str | None = None

    def as_dict(self) -> dict:
        return {
            "word": self.word,
            "fetched_at": self.fetched_at,
            "summary_text": self.summary_text,
            "definition_text": self.definition_text,
            "status": self.status,
            "resolved_title": self.resolved_title,
        }


@dataclass
class FetchConfig:
    summary_url: str = "https://en.wikipedia.org/api/rest_v1/page/summary/{title}"
    definition_url: str = "https://en.wiktionary.org/api/rest_v1/page/definition/{term}"
    search_url: str = "https://en.wikipedia.org/w/rest.php/v1/search/page?q={query}&limit=1"
    language: str = "en"
    max_rps: float = 2.0
    timeout: float = 15.0
    user_agent: str = "kgimpute/0.1 (grounding-corpus builder)"


class RateLimiter:
    """Spaces calls at least 1/max_rps apart; clock and sleep injectable."""

    def __init__(self, max_rps: float, clock=time.monotonic, sleep=time.sleep):
        self.min_interval = 1.0 / max_rps if max_rps > 0 else 0.0
        self._clock = clock
        self._sleep = sleep
        self._last: float | None = None

    def wait(self) -> None:
        if self.min_interval <= 0:
            return
        if self._last is not None:
            remaining = self._last + self.min_interval - self._clock()
            if remaining > 0:
                self._sleep(remaining)
        self._last = self._clock()


def _normalize(word: str) -> str:
    return word.strip().lower()


class FetchCache:
    """JSON-lines cache, one file per initial letter of the normalized word."""

    def __init__(self, cache_dir):
        self.cache_dir = Path(cache_dir)
        self._buckets: dict[str, dict[str, FetchCacheEntry]] = {}

    def _bucket_name(self, key: str) -> str:
        first = key[:1]
        return first if first.isascii() and first.isalpha() else "_other"

    def _bucket(self, key: str) -> dict[str, FetchCacheEntry]:
        name = self._bucket_name(key)
        if name not in self._buckets:
            entries: dict[str, FetchCacheEntry] = {}
            path = self.cache_dir / f"{name}.jsonl"
            if path.exists():
                with open(path, encoding="utf-8") as fh:
                    for line in fh:
                        if not line.strip():
                            continue
                        row = json.loads(line)
                        entries[_normalize(row["word"])] = FetchCacheEntry(**row)
            self._buckets[name] = entries
        return self._buckets[name]

    def get(self, word: str) -> FetchCacheEntry | None:
        return self._bucket(_normalize(word)).get(_normalize(word))

    def put(self, entry: FetchCacheEntry) -> None:
        key = _normalize(entry.word)
        self._bucket(key)[key] = entry
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        path = self.cache_dir / f"{self._bucket_name(key)}.jsonl"
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry.as_dict(), sort_keys=True) + "\n")


def _strip_html(text: str) -> str:
    return _WS_RE.sub(" ", html.unescape(_TAG_RE.sub(" ", text))).strip()


class FetchClient:
    """Cached, rate-limited client for the summary and definition endpoints."""

    def __init__(
        self,
        cache_dir,
        config: FetchConfig | None = None,
        offline: bool = False,
        session=None,
        clock=time.monotonic,
        sleep=time.sleep,
        wall_clock=time.time,
    ):
        self.config = config or FetchConfig()
        self.cache = FetchCache(cache_dir)
        self.offline = offline
        self.session = session if session is not None else requests.Session()
        self.limiter = RateLimiter(self.config.max_rps, clock=clock, sleep=sleep)
        self._wall_clock = wall_clock

    def _get(self, url: str):
        self.limiter.wait()
        return self.session.get(
            url,
            headers={"User-Agent": self.config.user_agent},
            timeout=self.config.timeout)

    def _fetch_summary(self, word: str) -> tuple[str, str | None]:
        """Summary extract via exact title, falling back to the top search hit."""
        resp = self._get(self.config.summary_url.format(title=quote(word, safe="")))
        if resp.status_code == 200:
            return _strip_html(resp.json().get("extract") or ""), None
        if resp.status_code != 404:
            raise requests.HTTPError(f"summary endpoint returned {resp.status_code}")
        resp = self._get(self.config.search_url.format(query=quote(word, safe="")))
        if resp.status_code != 200:
            return "", None
        pages = resp.json().get("pages") or []
        if not pages:
            return "", None
        title = pages[0].get("title") or pages[0].get("key") or ""
        if not title:
            return "", None
        resp = self._get(self.config.summary_url.format(title=quote(title, safe="")))
        if resp.status_code == 200:
            return _strip_html(resp.json().get("extract") or ""), title
        return "", None

    def _fetch_definition(self, word: str) -> str:
        resp = self._get(self.config.definition_url.format(term=quote(word, safe="")))
        if resp.status_code == 404:
            return ""
        if resp.status_code != 200:
            raise requests.HTTPError(f"definition endpoint returned {resp.status_code}")
        senses = resp.json().get(self.config.language) or []
        parts = []
        for group in senses:
            for sense in group.get("definitions") or []:
                text = _strip_html(sense.get("definition") or "")
                if text:
                    parts.append(text)
        return " ".join(parts)

    def fetch_word(self, word: str) -> FetchCacheEntry:
        """Return the cached entry or fetch one; never raises on batch use.

        Transient failures produce status="error" entries that are NOT
        cached, so a later run retries them. Offline misses are errors
        without any network access.
        """
        cached = self.cache.get(word)
        if cached is not None:
            return cached
        if self.offline:
            return FetchCacheEntry(
                word=word, fetched_at=self._wall_clock(), summary_text="",
                definition_text="", status=STATUS_ERROR)
        try:
            summary, resolved = self._fetch_summary(word)
            definition = self._fetch_definition(word)
        except (requests.RequestException, ValueError, OSError) as exc:
            logger.warning("fetch failed for %r: %s", word, exc)
            return FetchCacheEntry(
                word=word, fetched_at=self._wall_clock(), summary_text="",
                definition_text="", status=STATUS_ERROR)
        status = STATUS_OK if (summary or definition) else STATUS_NOT_FOUND
        entry = FetchCacheEntry(
            word=word, fetched_at=self._wall_clock(), summary_text=summary,
            definition_text=definition, status=status, resolved_title=resolved)
        self.cache.put(entry)
        return entry


def _sanitize(text: str) -> str:
    return _WS_RE.sub(" ", text).strip()


def build_corpus(words, cache_dir, out, offline: bool = False,
                 config: FetchConfig | None = None,
                 client: FetchClient | None = None) -> dict[str, int]:
    """Write a grounding TSV for all fetchable words; returns status counts.

    Output rows follow the input word order, only ok entries are
    written, and tabs/newlines inside texts become single spaces.
    """
    if client is None:
        client = FetchClient(cache_dir, config=config, offline=offline)
    counts = {STATUS_OK: 0, STATUS_NOT_FOUND: 0, STATUS_ERROR: 0}
    rows = []
    for word in words:
        entry = client.fetch_word(word)
        counts[entry.status] += 1
        if entry.status == STATUS_OK:
            rows.append((word, _sanitize(entry.summary_text),
                         _sanitize(entry.definition_text)))
    with open(out, "w", encoding="utf-8") as fh:
        for word, summary, definition in rows:
            fh.write(f"{word}\t{summary}\t{definition}\n")
    return counts
