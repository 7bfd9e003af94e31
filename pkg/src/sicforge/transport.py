"""Page fetchers. Parsers never touch the network; they receive page text
from a PageFetcher, which is either live HTTP or a fixture directory."""

from __future__ import annotations

import hashlib
import logging
import os
import time
from pathlib import Path
from typing import Protocol

from .errors import FetchError

log = logging.getLogger(__name__)

DEFAULT_RATE_MS = 150
DEFAULT_RETRIES = 3
FALLBACK_NAME = "_default.html"
INDEX_NAME = "index.tsv"


class PageFetcher(Protocol):
    def fetch(self, url: str) -> str: ...


def url_key(url: str) -> str:
    return hashlib.sha256(url.encode("utf-8")).hexdigest()[:24]


class HttpFetcher:
    """requests-backed fetcher with a minimum request interval and a retry
    budget with exponential backoff on non-200 responses."""

    def __init__(self, user_agent: str, rate_ms: int = DEFAULT_RATE_MS, retries: int = DEFAULT_RETRIES,
                 backoff: float = 0.5, timeout: float = 30.0, session=None):
        if not user_agent:
            raise ValueError("a User-Agent is required for live fetching (set SICFORGE_USER_AGENT)")
        import requests

        self.session = session or requests.Session()
        self.session.headers["User-Agent"] = user_agent
        self.interval = rate_ms / 1000.0
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout
        self._last = 0.0
        self.requests_made = 0

    def _wait(self):
        delay = self._last + self.interval - time.monotonic()
        if delay > 0:
            time.sleep(delay)
        self._last = time.monotonic()

    def fetch(self, url: str) -> str:
        status: int | str | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            self._wait()
            self.requests_made += 1
            try:
                resp = self.session.get(url, timeout=self.timeout)
            except Exception as exc:  # connection errors are retried like bad statuses
                status = type(exc).__name__
                continue
            if resp.status_code == 200:
                return resp.text
            status = resp.status_code
            log.warning("%s http status = %s", url, status)
        raise FetchError(url, status)


class FixtureFetcher:
    """Resolves URLs to files named by a stable hash of the URL.

    If the directory holds `_default.html`, unknown URLs resolve to it;
    otherwise they raise FetchError (status 404).
    """

    def __init__(self, directory: str | os.PathLike):
        self.directory = Path(directory)
        if not self.directory.is_dir():
            raise FetchError(str(directory), "missing", "fixture directory not found")
        self.requested: list[str] = []

    def path_for(self, url: str) -> Path:
        return self.directory / f"{url_key(url)}.html"

    def fetch(self, url: str) -> str:
        self.requested.append(url)
        path = self.path_for(url)
        if not path.exists():
            path = self.directory / FALLBACK_NAME
            if not path.exists():
                raise FetchError(url, 404, "no fixture")
        return path.read_text(encoding="utf-8")


class RecordingFetcher:
    """Wraps another fetcher and stores every page into a fixture directory."""

    def __init__(self, inner: PageFetcher, directory: str | os.PathLike):
        self.inner = inner
        self.store = FixtureStore(directory)

    def fetch(self, url: str) -> str:
        text = self.inner.fetch(url)
        self.store.save(url, text)
        return text


class FixtureStore:
    def __init__(self, directory: str | os.PathLike):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def save(self, url: str, text: str) -> Path:
        path = self.directory / f"{url_key(url)}.html"
        path.write_text(text, encoding="utf-8")
        index = self.directory / INDEX_NAME
        entries = {}
        if index.exists():
            for line in index.read_text(encoding="utf-8").splitlines():
                name, _, u = line.partition("\t")
                entries[u] = name
        entries[url] = path.name
        index.write_text("".join(f"{n}\t{u}\n" for u, n in sorted(entries.items())), encoding="utf-8")
        return path

    def save_default(self, text: str) -> Path:
        path = self.directory / FALLBACK_NAME
        path.write_text(text, encoding="utf-8")
        return path
