from __future__ import annotations

import ipaddress
import random
import socket
import time

import pytest

from raspagent import chemio, forcefield
from raspagent.crews import TeamConfig

# Non-loopback connection attempts and name lookups are recorded here and refused.
NETWORK_ATTEMPTS: list[object] = []
# One pass/fail line per acceptance criterion, printed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []
SUITE_BUDGET_S = 120.0

_real_connect = socket.socket.connect
_real_connect_ex = socket.socket.connect_ex
_real_getaddrinfo = socket.getaddrinfo
_started = time.perf_counter()


def _is_loopback(address) -> bool:
    if isinstance(address, (str, bytes)):
        return True  # unix domain socket
    host = address[0]
    if host in ("localhost", ""):
        return True
    try:
        return ipaddress.ip_address(host).is_loopback
    except ValueError:
        return False


def _guarded(real):
    def connect(self, address):
        if not _is_loopback(address):
            NETWORK_ATTEMPTS.append(address)
            raise OSError(f"network access blocked in tests: {address!r}")
        return real(self, address)

    return connect


def _getaddrinfo(host, *args, **kwargs):
    if not _is_loopback((host.decode() if isinstance(host, bytes) else host or "",)):
        NETWORK_ATTEMPTS.append(host)
        raise OSError(f"name lookup blocked in tests: {host!r}")
    return _real_getaddrinfo(host, *args, **kwargs)


@pytest.fixture(autouse=True, scope="session")
def no_network():
    socket.socket.connect = _guarded(_real_connect)
    socket.socket.connect_ex = _guarded(_real_connect_ex)
    socket.getaddrinfo = _getaddrinfo
    yield NETWORK_ATTEMPTS
    socket.socket.connect = _real_connect
    socket.socket.connect_ex = _real_connect_ex
    socket.getaddrinfo = _real_getaddrinfo


def suite_elapsed() -> float:
    return time.perf_counter() - _started


def pytest_sessionfinish(session, exitstatus):
    problems = []
    if suite_elapsed() > SUITE_BUDGET_S:
        problems.append(f"suite took {suite_elapsed():.1f}s (budget {SUITE_BUDGET_S:.0f}s)")
    if NETWORK_ATTEMPTS:
        problems.append(f"network attempts: {NETWORK_ATTEMPTS!r}")
    for problem in problems:
        ACCEPTANCE_LINES.append(f"FAIL session: {problem}")
    if problems and exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
    terminalreporter.write_line(f"suite runtime {suite_elapsed():.1f}s, network attempts {len(NETWORK_ATTEMPTS)}")


@pytest.fixture(scope="session")
def config() -> TeamConfig:
    return TeamConfig()


@pytest.fixture(scope="session")
def zeolite_bundle(config):
    lib = config.library_roots[-1]
    return forcefield.combine_force_fields(
        forcefield.load_bundle(lib / "zeolite_framework"), [forcefield.load_bundle(lib / "trappe_adsorbates")]
    )


@pytest.fixture(scope="session")
def mfi(config):
    return chemio.read_cif(config.structures_root / "MFI_SI.cif")


def synthetic_structure(rng: random.Random, name: str, n_si: int = 2) -> chemio.CrystalStructure:
    """A small all-silica cell; one in three is triclinic."""
    lengths = [rng.uniform(8.0, 30.0) for _ in range(3)]
    if rng.random() < 1 / 3:
        angles = [rng.uniform(75.0, 105.0) for _ in range(3)]
    else:
        angles = [90.0, 90.0, 90.0]
    sites = []
    for k in range(n_si):
        sites.append(chemio.AtomSite(f"Si{k + 1}", "Si", rng.random(), rng.random(), rng.random()))
        for j in range(2):
            sites.append(chemio.AtomSite(f"O{2 * k + j + 1}", "O", rng.random(), rng.random(), rng.random()))
    return chemio.CrystalStructure(name, chemio.LatticeParameters(*lengths, *angles), tuple(sites))


@pytest.fixture(scope="session")
def synthetic_structures() -> list[chemio.CrystalStructure]:
    rng = random.Random(500)
    return [synthetic_structure(rng, f"SYN{i:03d}") for i in range(500)]
