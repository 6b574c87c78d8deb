import json
import random
from pathlib import Path

import pytest

from ethacct.account import rehydrate
from ethacct.chainstub import ChainState
from ethacct.chainstub.node import NodeService
from ethacct.ecdsa import PrivateKey
from ethacct.gateway import LoopbackLink, GatewaySession, RetryPolicy, TxTemplate

GOLDEN = Path(__file__).parent / "golden"
RECIPIENT = bytes.fromhex("35" * 20)


def load_golden(name):
    return json.loads((GOLDEN / name).read_text())


@pytest.fixture
def rng():
    return random.Random(0xE7E155)


@pytest.fixture
def eip155():
    return load_golden("eip155.json")


@pytest.fixture
def chain():
    return ChainState(chain_id=3)


@pytest.fixture
def make_session(chain):
    """Factory for a gateway session wired to ``chain`` through a loopback link."""

    def _make(d=0xC0FFEE, fund=None, fault=None, template=None, retry=None):
        account = rehydrate(PrivateKey(d))
        if fund:
            chain.faucet(account.address, fund)
        node = NodeService(chain)
        link = LoopbackLink(node, fault=fault)
        session = GatewaySession(
            account,
            link,
            template or TxTemplate(to=RECIPIENT, chain_id=chain.chain_id),
            retry or RetryPolicy(timeout_s=2.0, retries=3, backoff_s=0.0),
            sleep=lambda _s: None,
        )
        return session

    return _make


# --- acceptance summary ----------------------------------------------------

_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))
    elif report.when == "setup" and report.outcome != "passed" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{mark}] {name}")
