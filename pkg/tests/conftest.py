import socket
from collections import defaultdict

import numpy as np
import pytest

from chaospeech.errors import TransportError
from chaospeech.transport import FramePacket, GroupConfig, MulticastReceiver, MulticastSender

LOOPBACK = "127.0.0.1"

_criteria = {}
_outcomes = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    rep = (yield).get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    _criteria[n] = title
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
        _outcomes[n].append((item.name, rep.outcome, rep.duration, detail))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_criteria):
        runs = _outcomes[n]
        ok = bool(runs) and all(o == "passed" for _, o, _, _ in runs)
        verdict = "PASS" if ok else ("SKIP" if runs and all(o == "skipped" for _, o, _, _ in runs) else "FAIL")
        secs = sum(d for _, _, d, _ in runs)
        details = " | ".join(d for *_, d in runs if d)
        tr.write_line(f"[{verdict}] criterion {n:>2}: {_criteria[n]} ({secs:.2f} s){'  -- ' + details if details else ''}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def free_udp_port() -> int:
    with socket.socket(socket.AF_INET, socket.SOCK_DGRAM) as s:
        s.bind(("", 0))
        return s.getsockname()[1]


@pytest.fixture
def loopback_group():
    """A group config on a fresh port, skipped when loopback multicast is unavailable."""
    cfg = GroupConfig("224.0.1.0", free_udp_port(), interface=LOOPBACK)
    try:
        with MulticastReceiver(cfg) as rx, MulticastSender(cfg) as tx:
            tx.send_frame(FramePacket(0, 1, b"probe"))
            rx.recv_frame(1.0)
    except (TransportError, TimeoutError) as exc:
        pytest.skip(f"loopback multicast unavailable: {exc}")
    return GroupConfig("224.0.1.0", free_udp_port(), interface=LOOPBACK)
