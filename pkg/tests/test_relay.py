import json
import urllib.request

import pytest

from ethacct.account import derive_address, rehydrate
from ethacct.chainstub import ChainState, RelayBackend, RelayError, RpcRelay, TxStatus, relay_submit
from ethacct.chainstub.node import NodeService
from ethacct.chainstub.relay import classify_node_error
from ethacct.chainstub.rpcserver import serve_in_thread
from ethacct.ecdsa import PrivateKey
from ethacct.gateway import GatewaySession, LoopbackLink, RetryPolicy, TxTemplate, bootstrap_nonce, run_stream
from ethacct.transaction import LegacyTransaction, decode_raw, sign_transaction

from conftest import RECIPIENT

KEY = PrivateKey(0xD00D)
ADDR = derive_address(KEY.public_key())


@pytest.fixture
def node():
    state = ChainState(chain_id=3)
    server, url = serve_in_thread(state)
    yield state, url
    server.shutdown()
    server.server_close()


def _raw(nonce, chain_id=3):
    return sign_transaction(LegacyTransaction(nonce, 10**9, 21000, RECIPIENT, 1, b"", chain_id), KEY)


def test_send_returns_hash(node):
    state, url = node
    state.faucet(ADDR, 10**18)
    raw = _raw(0)
    tx_hash = relay_submit(url, "0x" + raw.hex())
    assert tx_hash == "0x" + decode_raw(raw).hash.hex()
    relay = RpcRelay(url)
    assert relay.get_transaction_count(ADDR) == 1
    assert relay.get_balance(RECIPIENT) == 1


def test_node_error_propagates_verbatim(node):
    _, url = node
    with pytest.raises(RelayError) as info:
        relay_submit(url, "0xzz")
    assert info.value.code == -32602
    with pytest.raises(RelayError) as info:
        RpcRelay(url).send_raw_transaction(_raw(0))
    assert info.value.message.startswith("insufficient funds")
    assert info.value.code == -32000


def test_unknown_method(node):
    _, url = node
    with pytest.raises(RelayError) as info:
        RpcRelay(url).call("eth_mine", [])
    assert info.value.code == -32601
    assert RpcRelay(url).call("eth_chainId", []) == "0x3"


def test_pending_tag_counts_queued(node):
    state, url = node
    state.faucet(ADDR, 10**18)
    relay = RpcRelay(url)
    relay.send_raw_transaction(_raw(1))  # queued: nonce gap
    assert relay.get_transaction_count(ADDR, "latest") == 0
    assert relay.get_transaction_count(ADDR, "pending") == 0
    relay.send_raw_transaction(_raw(0))
    assert relay.get_transaction_count(ADDR, "latest") == 2


def test_parse_error(node):
    _, url = node
    req = urllib.request.Request(url, data=b"{not json", method="POST")
    with urllib.request.urlopen(req) as resp:
        assert json.loads(resp.read())["error"]["code"] == -32700


def test_transport_error():
    with pytest.raises(RelayError) as info:
        RpcRelay("http://127.0.0.1:9", timeout=1).call("eth_chainId", [])
    assert info.value.code is None


@pytest.mark.parametrize(
    "message, status",
    [
        ("nonce too low", TxStatus.NONCE_TOO_LOW),
        ("already known", TxStatus.NONCE_TOO_LOW),
        ("insufficient funds for gas * price + value", TxStatus.INSUFFICIENT_BALANCE),
        ("txpool is full", TxStatus.POOL_FULL),
        ("invalid sender", TxStatus.INVALID_SIGNATURE),
    ],
)
def test_classify(message, status):
    assert classify_node_error(message) == status


def test_relay_backend_rejections(node):
    state, url = node
    backend = RelayBackend(RpcRelay(url))
    r = backend.submit_raw(_raw(0))
    assert r.status == TxStatus.INSUFFICIENT_BALANCE
    assert r.consumed_nonce == 0
    assert backend.last_error.code == -32000
    assert backend.submit_raw(_raw(0, chain_id=1)).status == TxStatus.INVALID_SIGNATURE


def test_relay_backend_transport_failure_raises():
    backend = RelayBackend(RpcRelay("http://127.0.0.1:9", timeout=1))
    with pytest.raises(RelayError):
        backend.submit_raw(_raw(0))


def test_gateway_through_relay(node):
    state, url = node
    account = rehydrate(KEY)
    state.faucet(account.address, 10**18)
    link = LoopbackLink(NodeService(RelayBackend(RpcRelay(url))))
    s = GatewaySession(account, link, TxTemplate(to=RECIPIENT), RetryPolicy(2.0, 3, 0.0), sleep=lambda _s: None)
    bootstrap_nonce(s)
    rep = run_stream(s, [b"a", b"bb", b"ccc"])
    assert rep.completed
    assert [e.tx.body.nonce for e in state.log] == [0, 1, 2]
    assert state.get_transaction_count(account.address) == 3
