"""Command-line entry point.

stdout carries only the artifact (one value per line, or one JSON object
with ``--format json``); diagnostics go to stderr. Exit codes: 0 success,
1 usage error, 2 domain error (bad key, malformed transaction, ...).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import bench
from .account import Address, account_footprint, derive_address, load_account, rehydrate, save_account
from .chainstub import ChainState, RelayBackend, RelayError, RpcRelay
from .chainstub.node import NodeService
from .chainstub.rpcserver import make_server
from .ecdsa import PrivateKey, keygen
from .gateway.config import load_config
from .gateway.link import LoopbackLink
from .gateway.session import GatewayError, GatewaySession, bootstrap_nonce, run_stream
from .rlp import rlp_decode, rlp_encode
from .transaction import LegacyTransaction, decode_raw, recover_sender, sign_transaction

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2

log = logging.getLogger("ethacct")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_hex(text: str) -> bytes:
    text = text.strip()
    if text[:2].lower() == "0x":
        text = text[2:]
    try:
        return bytes.fromhex(text)
    except ValueError:
        raise ValueError(f"invalid hex input: {text[:20]!r}") from None


def hex0x(data: bytes) -> str:
    return "0x" + bytes(data).hex()


def _emit(args, value, obj: Optional[dict] = None) -> None:
    if args.format == "json":
        print(json.dumps(obj if obj is not None else {"result": value}))
    else:
        print(value)


def _read_input(arg: Optional[str]) -> str:
    if arg is not None and arg != "-":
        return arg
    return sys.stdin.read()


def _load_key(path: str) -> PrivateKey:
    return load_account(path)[0].secret


# --- rlp items <-> json -----------------------------------------------------


def _item_to_json(item):
    if isinstance(item, list):
        return [_item_to_json(x) for x in item]
    return hex0x(item)


def _item_from_json(obj):
    if isinstance(obj, list):
        return [_item_from_json(x) for x in obj]
    if isinstance(obj, str):
        return parse_hex(obj)
    raise ValueError("RLP JSON items must be hex strings or lists")


# --- commands ---------------------------------------------------------------


def cmd_keygen(args) -> int:
    sk, pub = keygen()
    addr = derive_address(pub)
    if args.out:
        Path(args.out).write_text(sk.to_hex() + "\n")
        print(f"wrote private key to {args.out}", file=sys.stderr)
        _emit(args, addr.hex0x(), {"address": addr.hex0x(), "key_file": args.out})
    else:
        _emit(args, sk.to_hex(), {"private_key": sk.to_hex(), "address": addr.hex0x()})
    return EXIT_OK


def cmd_address(args) -> int:
    state, _ = load_account(args.key)
    _emit(args, state.address.hex0x(), {"address": state.address.hex0x(), "public_key": hex0x(state.public.to_bytes())})
    return EXIT_OK


def cmd_sign_tx(args) -> int:
    key = _load_key(args.key)
    tx = LegacyTransaction(
        nonce=args.nonce,
        gas_price=args.gas_price,
        gas_limit=args.gas_limit,
        to=parse_hex(args.to) if args.to else b"",
        value=args.value,
        data=parse_hex(args.data) if args.data else b"",
        chain_id=args.chain_id,
    )
    raw = sign_transaction(tx, key)
    _emit(args, hex0x(raw), {"raw": hex0x(raw), "sender": rehydrate(key).address.hex0x()})
    return EXIT_OK


def _stx_json(stx) -> dict:
    b = stx.body
    return {
        "nonce": b.nonce,
        "gas_price": b.gas_price,
        "gas_limit": b.gas_limit,
        "to": hex0x(b.to) if b.to else None,
        "value": b.value,
        "data": hex0x(b.data),
        "chain_id": b.chain_id,
        "v": stx.v,
        "r": hex(stx.r),
        "s": hex(stx.s),
        "hash": hex0x(stx.hash),
    }


def cmd_decode_tx(args) -> int:
    stx = decode_raw(parse_hex(_read_input(args.raw)))
    print(json.dumps(_stx_json(stx)))
    return EXIT_OK


def cmd_recover_sender(args) -> int:
    stx = decode_raw(parse_hex(_read_input(args.raw)))
    addr = recover_sender(stx)
    _emit(args, addr.hex0x(), {"sender": addr.hex0x()})
    return EXIT_OK


def cmd_rlp(args) -> int:
    text = _read_input(args.input)
    if args.action == "encode":
        encoded = rlp_encode(_item_from_json(json.loads(text)))
        _emit(args, hex0x(encoded))
    else:
        item = _item_to_json(rlp_decode(parse_hex(text)))
        print(json.dumps(item))
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if args.op == "tx-phases":
        pb = bench.phase_breakdown(args.trials, seed=args.seed, warmup=args.warmup)
        if args.format == "json":
            print(json.dumps({"trials": pb.trials, "mean_ns": pb.mean_ns, "percent": pb.percent}))
        elif args.format == "csv":
            print("phase,step,mean_ns,percent")
            for p in bench.PHASES:
                print(f"{p},{bench.PHASE_NAMES[p]},{pb.mean_ns[p]:.1f},{pb.percent[p]:.4f}")
        else:
            sys.stdout.write(bench.format_phases(pb))
        return EXIT_OK
    rows = bench.run_ops([args.op], args.trials, seed=args.seed, warmup=args.warmup)
    if args.format == "csv":
        sys.stdout.write(bench.format_csv(rows))
    elif args.format == "json":
        print(json.dumps({op: bench.stats_dict(st) for op, st in rows.items()}))
    else:
        sys.stdout.write(bench.format_table(rows, args.freq_hz))
    return EXIT_OK


def _read_payloads(path: str) -> List[bytes]:
    lines = Path(path).read_text().splitlines()
    return [parse_hex(ln) for ln in lines if ln.strip()]


def cmd_gateway(args) -> int:
    account, has_nonce = load_account(args.account)
    template, retry = load_config(args.config)
    payloads = _read_payloads(args.payloads)
    if args.rpc:
        backend = RelayBackend(RpcRelay(args.rpc))
    else:
        backend = ChainState(chain_id=template.chain_id)
        backend.faucet(account.address, args.fund)
    link = LoopbackLink(NodeService(backend))
    session = GatewaySession(account, link, template, retry)
    nonce = bootstrap_nonce(session)
    if has_nonce:
        log.info("stored nonce replaced by chain nonce %d", nonce)
    report = run_stream(session, payloads, max_stalls=args.max_stalls)
    if args.save_nonce:
        save_account(account, args.account)
    summary = {
        "accepted": report.accepted,
        "payloads": len(payloads),
        "completed": report.completed,
        "next_nonce": account.next_nonce,
        "resubmissions": report.resubmissions,
        "retransmits": report.retransmits,
        "error": report.error,
        "acks": [{"status": a.status.name.lower(), "nonce": a.nonce} for a in report.acks],
    }
    if report.latency:
        summary["latency_ns"] = bench.stats_dict(report.latency)
    if args.format == "json":
        print(json.dumps(summary))
    else:
        for a in report.acks:
            print(f"{a.nonce} {a.status.name.lower()}")
    if report.error:
        print(f"stream stopped: {report.error}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_chain(args) -> int:
    if args.action == "serve":
        state = ChainState(chain_id=args.chain_id)
        for entry in args.fund or []:
            addr, _, amount = entry.partition("=")
            state.faucet(Address.from_hex(addr), int(amount, 0))
        server = make_server(state, args.host, args.port)
        h, p = server.server_address[:2]
        print(f"http://{h}:{p}", flush=True)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
        return EXIT_OK
    if not args.rpc:
        raise UsageError("--rpc is required")
    relay = RpcRelay(args.rpc)
    if args.action == "send":
        _emit(args, relay.send_raw_transaction(_read_input(args.value).strip()))
    elif args.action == "nonce":
        _emit(args, relay.get_transaction_count(Address.from_hex(args.value), args.block or "pending"))
    elif args.action == "balance":
        _emit(args, relay.get_balance(Address.from_hex(args.value), args.block or "latest"))
    return EXIT_OK


def cmd_storage(args) -> int:
    est = bench.estimate_node_storage(args.blocks, args.header_bytes, args.interval)
    obj = {
        "total_header_bytes": est.total_header_bytes,
        "daily_blocks": est.daily_blocks,
        "daily_header_bytes": est.daily_header_bytes,
        "account_full_bytes": account_footprint("full"),
        "account_reduced_bytes": account_footprint("reduced"),
    }
    if args.format == "json":
        print(json.dumps(obj))
    else:
        for k, v in obj.items():
            print(f"{k} {v:.2f}" if isinstance(v, float) else f"{k} {v}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="ethacct", description="Ethereum account and raw-transaction toolkit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("keygen", parents=[common], help="generate a private key")
    p.add_argument("--out", help="write the key file here and print the address")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("address", parents=[common], help="address of a key file")
    p.add_argument("--key", required=True)
    p.set_defaults(func=cmd_address)

    p = sub.add_parser("sign-tx", parents=[common], help="build and sign a legacy EIP-155 transaction")
    p.add_argument("--key", required=True)
    p.add_argument("--nonce", type=int, required=True)
    p.add_argument("--gas-price", type=int, required=True)
    p.add_argument("--gas-limit", type=int, required=True)
    p.add_argument("--to", default="")
    p.add_argument("--value", type=int, default=0)
    p.add_argument("--data", default="")
    p.add_argument("--chain-id", type=int, required=True)
    p.set_defaults(func=cmd_sign_tx)

    for name, func, help_ in (
        ("decode-tx", cmd_decode_tx, "decode a raw transaction to JSON"),
        ("recover-sender", cmd_recover_sender, "recover the sender address of a raw transaction"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("raw", nargs="?", help="0x-hex raw transaction (default: stdin)")
        p.set_defaults(func=func)

    p = sub.add_parser("rlp", parents=[common], help="RLP encode (JSON in) or decode (hex in)")
    p.add_argument("action", choices=("encode", "decode"))
    p.add_argument("input", nargs="?", help="input value (default: stdin)")
    p.set_defaults(func=cmd_rlp)

    bench_common = _Parser(add_help=False)
    bench_common.add_argument("-v", "--verbose", action="store_true")
    p = sub.add_parser("bench", parents=[bench_common], help="timing benchmarks")
    p.add_argument("--op", choices=("keygen", "sign", "verify", "tx-phases"), required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--warmup", type=int, default=bench.DEFAULT_WARMUP)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--freq-hz", type=float, help="report equivalent Mcycles at this clock")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gateway", parents=[common], help="run the device gateway protocol")
    p.add_argument("action", choices=("run",))
    p.add_argument("--account", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--payloads", required=True, help="newline-delimited hex payloads")
    p.add_argument("--rpc", help="JSON-RPC node URL (default: in-process chain stub)")
    p.add_argument("--fund", type=int, default=10**18, help="stub faucet amount in wei")
    p.add_argument("--max-stalls", type=int, default=3)
    p.add_argument("--save-nonce", action="store_true", help="write the final nonce back to the account file")
    p.set_defaults(func=cmd_gateway)

    p = sub.add_parser("chain", parents=[common], help="JSON-RPC relay and dev node")
    p.add_argument("action", choices=("send", "nonce", "balance", "serve"))
    p.add_argument("value", nargs="?", help="raw tx hex (send) or address (nonce, balance)")
    p.add_argument("--rpc")
    p.add_argument("--block")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8545)
    p.add_argument("--chain-id", type=int, default=3)
    p.add_argument("--fund", action="append", metavar="ADDR=WEI")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("storage", parents=[common], help="light-node header storage estimate")
    p.add_argument("--blocks", type=int, default=14_497_082)
    p.add_argument("--header-bytes", type=float, default=500)
    p.add_argument("--interval", type=float, default=13.2)
    p.set_defaults(func=cmd_storage)

    return parser


def dispatch(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ZeroDivisionError, GatewayError, RelayError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
