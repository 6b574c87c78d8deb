import random

import pytest
from hypothesis import given, settings, strategies as st

from ethacct.account import rehydrate
from ethacct.chainstub import ChainState, TxStatus
from ethacct.chainstub.node import NodeService
from ethacct.ecdsa import PrivateKey
from ethacct.gateway import (
    BootstrapError,
    GatewayError,
    GatewaySession,
    LoopbackLink,
    QueueLink,
    RetryPolicy,
    TxTemplate,
    bootstrap_nonce,
    data_gas,
    run_stream,
    submit_one,
)
from ethacct.gateway.config import ConfigError, config_from_text, load_config
from ethacct.gateway.frames import Ack, Frame, MsgType, SubmitRaw, decode_message
from ethacct.transaction import LegacyTransaction, sign_transaction

from conftest import RECIPIENT

ETH = 10**18


def _payloads(n, size=8, seed=1):
    rng = random.Random(seed)
    return [bytes(rng.randrange(1, 256) for _ in range(size)) for _ in range(n)]


def _sender_nonces(chain, addr):
    return [e.tx.body.nonce for e in chain.log if e.sender == addr]


def _decoded_trace(link):
    out = []
    for direction, data in link.trace:
        try:
            out.append((direction, decode_message(Frame.decode(data)), data))
        except ValueError:
            out.append((direction, None, data))
    return out


def test_data_gas():
    assert data_gas(b"") == 0
    assert data_gas(b"\x00\x00") == 8
    assert data_gas(b"\x01\x00\xff") == 36


def test_template_build():
    tpl = TxTemplate(to=RECIPIENT)
    tx = tpl.build(4, b"\x01\x00")
    assert tx.gas_limit == 21000 + 20
    assert TxTemplate(to=RECIPIENT, data_surcharge=False).build(0, b"\x01").gas_limit == 21000


def test_retry_backoff_is_linear():
    r = RetryPolicy(backoff_s=0.1)
    assert [r.backoff(a) for a in (1, 2, 3)] == pytest.approx([0.1, 0.2, 0.3])


def test_bootstrap_fresh_account(make_session):
    s = make_session()
    assert bootstrap_nonce(s) == 0
    assert s.bootstrapped


def test_bootstrap_existing_nonce(chain, make_session):
    s = make_session(fund=ETH)
    key = s.account.secret
    for n in range(3):
        chain.submit_raw(sign_transaction(LegacyTransaction(n, 1, 21000, RECIPIENT, 0, b"", 3), key))
    assert bootstrap_nonce(s) == 3
    assert s.account.next_nonce == 3


def test_bootstrap_timeout(make_session):
    s = make_session(fault=lambda d, b: None)
    with pytest.raises(BootstrapError):
        bootstrap_nonce(s)
    assert not s.bootstrapped
    assert s.retransmits == 3


def test_submit_requires_bootstrap(make_session):
    with pytest.raises(GatewayError):
        submit_one(make_session(fund=ETH), b"x")


def test_happy_stream(chain, make_session):
    s = make_session(fund=ETH)
    bootstrap_nonce(s)
    rep = run_stream(s, _payloads(20))
    assert rep.completed and rep.error is None
    assert rep.accepted == 20
    assert rep.accepted_nonces == list(range(20))
    assert _sender_nonces(chain, s.account.address) == list(range(20))
    assert s.account.next_nonce == chain.get_transaction_count(s.account.address) == 20
    assert rep.latency.trials == 20
    assert [e.tx.body.data for e in chain.log] == _payloads(20)


def test_nonce_only_advances_on_accept(chain, make_session):
    s = make_session(fund=21000 * 20 * 10**9 - 1)
    bootstrap_nonce(s)
    ack = submit_one(s, b"")
    assert ack.status == TxStatus.INSUFFICIENT_BALANCE
    assert s.account.next_nonce == 0


def test_stall_without_refill_aborts(chain, make_session):
    s = make_session()
    bootstrap_nonce(s)
    rep = run_stream(s, _payloads(3), max_stalls=2)
    assert not rep.completed
    assert rep.next_index == 0
    assert rep.resubmissions == 3
    assert "balance" in rep.error


def test_stall_then_refill(chain, make_session):
    s = make_session()
    bootstrap_nonce(s)
    stalls = []

    def refill(session, ack):
        stalls.append(ack.nonce)
        if len(stalls) == 2:
            chain.faucet(session.account.address, ETH)

    rep = run_stream(s, _payloads(5), on_stall=refill)
    assert rep.completed
    assert stalls == [0, 0]
    assert _sender_nonces(chain, s.account.address) == list(range(5))


def test_external_desync_resyncs(chain, make_session):
    s = make_session(fund=ETH)
    bootstrap_nonce(s)
    rep = run_stream(s, _payloads(3, seed=2))
    # another signer with the same key consumes nonces 3 and 4 behind the gateway's back
    for n in (3, 4):
        chain.submit_raw(sign_transaction(LegacyTransaction(n, 1, 21000, RECIPIENT, 0, b"ext", 3), s.account.secret))
    rep = run_stream(s, _payloads(4, seed=3))
    assert rep.completed
    assert rep.resyncs == 1
    assert rep.acks[0].status == TxStatus.NONCE_TOO_LOW
    assert rep.accepted_nonces == [5, 6, 7, 8]
    assert _sender_nonces(chain, s.account.address) == list(range(9))


def test_gateway_ahead_of_chain_resyncs(chain, make_session):
    s = make_session(fund=ETH)
    bootstrap_nonce(s)
    s.account.next_nonce = 2  # stale persisted nonce from a chain that was reset
    rep = run_stream(s, _payloads(3))
    assert rep.completed
    assert rep.acks[0].status == TxStatus.NONCE_TOO_HIGH_PENDING
    # the orphaned nonce-2 tx is in the pool; after resync the stream fills 0, 1 and drains it
    assert chain.get_transaction_count(s.account.address) >= 3
    assert _sender_nonces(chain, s.account.address) == sorted(_sender_nonces(chain, s.account.address))


def test_invalid_signature_aborts(chain, make_session):
    s = make_session(fund=ETH, template=TxTemplate(to=RECIPIENT, chain_id=1))
    bootstrap_nonce(s)
    rep = run_stream(s, _payloads(2))
    assert rep.error == "transaction rejected: INVALID_SIGNATURE"
    assert rep.accepted == 0


def _corrupt_nth(direction, msg_type, which):
    seen = {"n": 0}

    def fault(d, data):
        if d == direction and data[1] == msg_type:
            seen["n"] += 1
            if seen["n"] in which:
                bad = bytearray(data)
                bad[-1] ^= 0x5A
                return bytes(bad)
        return data

    return fault


def test_corrupted_ack_is_retransmitted_not_double_spent(chain, make_session):
    s = make_session(fund=ETH, fault=_corrupt_nth("rx", MsgType.ACK, {1, 4}))
    bootstrap_nonce(s)
    rep = run_stream(s, _payloads(5))
    assert rep.completed
    assert rep.retransmits == 2
    assert s.crc_failures == 2
    assert _sender_nonces(chain, s.account.address) == list(range(5))
    # each retransmit carries exactly the same bytes as the original
    subs = [data for d, m, data in _decoded_trace(s.link) if d == "tx" and isinstance(m, SubmitRaw)]
    assert len(subs) == 7
    assert subs[0] == subs[1]


def test_corrupted_submit_is_dropped_by_node(chain, make_session):
    s = make_session(fund=ETH, fault=_corrupt_nth("tx", MsgType.SUBMIT_RAW, {1, 2}))
    bootstrap_nonce(s)
    rep = run_stream(s, _payloads(2))
    assert rep.completed
    assert rep.retransmits == 2
    assert s.link.node.dropped_frames == 2
    assert _sender_nonces(chain, s.account.address) == [0, 1]


def test_link_down_stops_stream(chain, make_session):
    state = {"up": True}
    s = make_session(fund=ETH, fault=lambda d, b: b if state["up"] else None)
    bootstrap_nonce(s)
    state["up"] = False
    rep = run_stream(s, _payloads(2))
    assert not rep.completed
    assert rep.next_index == 0
    assert "no Ack" in rep.error
    assert not s.in_flight


def test_one_in_flight_trace_invariant(chain, make_session):
    rng = random.Random(9)

    def flaky(d, data):
        r = rng.random()
        if r < 0.1:
            return None
        if r < 0.2:
            bad = bytearray(data)
            bad[rng.randrange(1, len(bad))] ^= 0xFF
            return bytes(bad)
        return data

    s = make_session(fund=ETH, fault=flaky, retry=RetryPolicy(timeout_s=1, retries=10, backoff_s=0))
    bootstrap_nonce(s)
    rep = run_stream(s, _payloads(30), max_resyncs=10)
    assert rep.completed, rep.error
    # a new SubmitRaw never appears until the previous one has been acked
    outstanding = None
    for d, msg, data in _decoded_trace(s.link):
        if d == "tx" and isinstance(msg, SubmitRaw):
            assert outstanding is None or outstanding == data
            outstanding = data
        elif d == "rx" and isinstance(msg, Ack):
            outstanding = None
    assert _sender_nonces(chain, s.account.address) == list(range(30))


@given(st.lists(st.sampled_from(["send", "refill", "drop"]), min_size=1, max_size=12))
@settings(max_examples=20, deadline=None)
def test_gap_free_property(script):
    chain = ChainState(chain_id=3)
    account = rehydrate(PrivateKey(0xFACE))
    dropping = {"on": False}
    link = LoopbackLink(NodeService(chain), fault=lambda d, b: None if dropping["on"] else b)
    s = GatewaySession(account, link, TxTemplate(to=RECIPIENT), RetryPolicy(1, 1, 0), sleep=lambda _s: None)
    bootstrap_nonce(s)
    for step in script:
        if step == "refill":
            chain.faucet(account.address, 21000 * 20 * 10**9 * 2)
        dropping["on"] = step == "drop"
        run_stream(s, [b"\x01"], max_stalls=0)
        dropping["on"] = False
        nonces = _sender_nonces(chain, account.address)
        assert nonces == list(range(len(nonces)))
        assert account.next_nonce == len(nonces)


def test_queue_link_threaded(chain):
    account = rehydrate(PrivateKey(0x51))
    chain.faucet(account.address, ETH)
    link = QueueLink()
    stop = link.start_node(NodeService(chain))
    try:
        s = GatewaySession(account, link, TxTemplate(to=RECIPIENT), RetryPolicy(2.0, 3, 0.0))
        bootstrap_nonce(s)
        rep = run_stream(s, _payloads(10))
    finally:
        stop()
    assert rep.completed
    assert _sender_nonces(chain, account.address) == list(range(10))


def test_loopback_delay(make_session):
    s = make_session(fund=ETH)
    s.link.delay = 0.01
    bootstrap_nonce(s)
    rep = run_stream(s, _payloads(2))
    assert rep.completed
    assert rep.latency.min >= 10_000_000


# --- config -------------------------------------------------------------------


CONFIG = """
# gateway settings
chain_id = 5
recipient = 0x3535353535353535353535353535353535353535
gas_price = 0x10
value = 7   # wei
data_surcharge = no
timeout_ms = 500
retries = 5
backoff_ms = 20
"""


def test_config_parse(tmp_path):
    tpl, retry = config_from_text(CONFIG)
    assert tpl.chain_id == 5 and tpl.gas_price == 16 and tpl.value == 7
    assert tpl.to == RECIPIENT
    assert not tpl.data_surcharge
    assert retry == RetryPolicy(0.5, 5, 0.02)
    path = tmp_path / "gw.conf"
    path.write_text(CONFIG)
    assert load_config(path) == (tpl, retry)


def test_config_defaults():
    tpl, retry = config_from_text("recipient = " + "35" * 20)
    assert tpl.chain_id == 3 and tpl.gas_limit == 21000 and tpl.data_surcharge
    assert retry == RetryPolicy()


@pytest.mark.parametrize(
    "text",
    ["chain_id = 3", "recipient = 0x12", "recipient=" + "35" * 20 + "\nbogus = 1", "recipient=" + "35" * 20 + "\nretries = -1", "recipient=" + "35" * 20 + "\nretries = many", "just words"],
)
def test_config_errors(text):
    with pytest.raises(ConfigError):
        config_from_text(text)
