"""Polite HTTP access: one request in flight per host, a minimum delay
between requests to the same host, and bounded retries with exponential
backoff."""

from __future__ import annotations

import logging
import threading
import time
from collections import defaultdict
from urllib.parse import urlsplit

import httpx

from .errors import TransportError

logger = logging.getLogger(__name__)

RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


class HostThrottle:
    """Serializes requests per host and spaces them by ``delay`` seconds."""

    def __init__(self, delay: float = 0.2, clock=time.monotonic, sleep=time.sleep):
        self.delay = delay
        self._clock = clock
        self._sleep = sleep
        self._locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._last: dict[str, float] = {}
        self._guard = threading.Lock()

    def _lock_for(self, host):
        with self._guard:
            return self._locks[host]

    def run(self, host, fn):
        with self._lock_for(host):
            last = self._last.get(host)
            if last is not None:
                wait = self.delay - (self._clock() - last)
                if wait > 0:
                    self._sleep(wait)
            try:
                return fn()
            finally:
                self._last[host] = self._clock()


# One throttle per process so every component shares the per-host limit.
GLOBAL_THROTTLE = HostThrottle()


class PoliteClient:
    def __init__(
        self,
        *,
        throttle: HostThrottle | None = None,
        retries: int = 3,
        backoff: float = 0.5,
        timeout: float = 30.0,
        transport: httpx.BaseTransport | None = None,
        user_agent: str = "editnews/0.1",
        sleep=time.sleep,
    ):
        self.throttle = throttle if throttle is not None else GLOBAL_THROTTLE
        self.retries = retries
        self.backoff = backoff
        self._sleep = sleep
        self._http = httpx.Client(
            timeout=timeout,
            transport=transport,
            headers={"User-Agent": user_agent},
            follow_redirects=True,
        )

    def close(self):
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def request(self, method, url, **kwargs) -> httpx.Response:
        """Send a request, retrying transient failures.

        Non-retryable 4xx responses are returned to the caller untouched so
        that e.g. a 404 can be interpreted as "unknown page".
        """
        host = urlsplit(url).netloc
        last_status = None
        attempts = self.retries + 1
        for attempt in range(attempts):
            try:
                response = self.throttle.run(
                    host, lambda: self._http.request(method, url, **kwargs)
                )
            except httpx.TransportError as exc:
                logger.warning("request to %s failed: %s", url, exc)
                last_status = None
            else:
                if response.status_code not in RETRYABLE_STATUS:
                    return response
                last_status = response.status_code
                logger.warning("request to %s returned %s", url, last_status)
            if attempt < attempts - 1:
                self._sleep(self.backoff * 2**attempt)
        raise TransportError(
            f"giving up after {attempts} attempts", status=last_status, url=url
        )

    def get(self, url, **kwargs):
        return self.request("GET", url, **kwargs)

    def post(self, url, **kwargs):
        return self.request("POST", url, **kwargs)

    def get_json(self, url, **kwargs):
        response = self.get(url, **kwargs)
        if response.status_code >= 400:
            raise TransportError("HTTP error", status=response.status_code, url=url)
        return response.json()
