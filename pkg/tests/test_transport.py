import threading

import httpx
import pytest

from editnews.errors import TransportError
from editnews.transport import HostThrottle, PoliteClient


class FakeClock:
    def __init__(self):
        self.now = 0.0
        self.sleeps = []

    def __call__(self):
        return self.now

    def sleep(self, s):
        self.sleeps.append(s)
        self.now += s


def test_throttle_spaces_same_host_only():
    clock = FakeClock()
    t = HostThrottle(delay=0.2, clock=clock, sleep=clock.sleep)
    t.run("a", lambda: None)
    t.run("b", lambda: None)
    t.run("a", lambda: None)
    assert clock.sleeps == [pytest.approx(0.2)]


def test_throttle_one_in_flight_per_host():
    t = HostThrottle(delay=0)
    active, peak, guard = [0], [0], threading.Lock()

    def work():
        with guard:
            active[0] += 1
            peak[0] = max(peak[0], active[0])
        threading.Event().wait(0.01)
        with guard:
            active[0] -= 1

    threads = [threading.Thread(target=t.run, args=("h", work)) for _ in range(6)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert peak[0] == 1


def _client(handler, retries=3):
    sleeps = []
    c = PoliteClient(
        throttle=HostThrottle(delay=0), retries=retries, backoff=0.5,
        transport=httpx.MockTransport(handler), sleep=sleeps.append,
    )
    return c, sleeps


def test_retries_then_succeeds():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(503) if len(calls) < 3 else httpx.Response(200, json={"ok": 1})

    c, sleeps = _client(handler)
    assert c.get_json("https://x.test/") == {"ok": 1}
    assert sleeps == [0.5, 1.0]


def test_gives_up_with_last_status():
    c, sleeps = _client(lambda r: httpx.Response(502))
    with pytest.raises(TransportError) as info:
        c.get("https://x.test/")
    assert info.value.status == 502
    assert sleeps == [0.5, 1.0, 2.0]


def test_connection_errors_retry():
    def handler(request):
        raise httpx.ConnectError("refused")

    c, _ = _client(handler, retries=1)
    with pytest.raises(TransportError) as info:
        c.get("https://x.test/")
    assert info.value.status is None


def test_client_errors_not_retried():
    calls = []
    c, sleeps = _client(lambda r: calls.append(1) or httpx.Response(404))
    assert c.get("https://x.test/").status_code == 404
    assert len(calls) == 1 and sleeps == []
