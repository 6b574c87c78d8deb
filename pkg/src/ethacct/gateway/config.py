"""Gateway configuration file.

Plain ``key = value`` lines; blank lines and ``#`` comments are ignored.
Recognized keys (all optional except ``recipient``)::

    chain_id       = 3
    recipient      = 0x3535353535353535353535353535353535353535
    gas_price      = 20000000000
    gas_limit      = 21000        # base; calldata gas is added per payload
    value          = 0
    data_surcharge = true
    timeout_ms     = 2000
    retries        = 3
    backoff_ms     = 100
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Tuple, Union

from ..account import Address
from .session import RetryPolicy, TxTemplate

_INT_KEYS = ("chain_id", "gas_price", "gas_limit", "value", "timeout_ms", "retries", "backoff_ms")
_KNOWN = set(_INT_KEYS) | {"recipient", "data_surcharge"}


class ConfigError(ValueError):
    pass


def parse_config_text(text: str) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def config_from_text(text: str) -> Tuple[TxTemplate, RetryPolicy]:
    raw = parse_config_text(text)
    if "recipient" not in raw:
        raise ConfigError("missing required key 'recipient'")
    ints = {}
    for key in _INT_KEYS:
        if key in raw:
            try:
                ints[key] = int(raw[key], 0)
            except ValueError:
                raise ConfigError(f"{key} must be an integer, got {raw[key]!r}") from None
            if ints[key] < 0:
                raise ConfigError(f"{key} must be non-negative")
    try:
        to = Address.from_hex(raw["recipient"])
    except ValueError as exc:
        raise ConfigError(f"bad recipient: {exc}") from None
    surcharge = raw.get("data_surcharge", "true").lower() in ("1", "true", "yes", "on")
    template = TxTemplate(
        to=bytes(to),
        chain_id=ints.get("chain_id", 3),
        gas_price=ints.get("gas_price", 20 * 10**9),
        gas_limit=ints.get("gas_limit", 21000),
        value=ints.get("value", 0),
        data_surcharge=surcharge,
    )
    retry = RetryPolicy(
        timeout_s=ints.get("timeout_ms", 2000) / 1000,
        retries=ints.get("retries", 3),
        backoff_s=ints.get("backoff_ms", 100) / 1000,
    )
    return template, retry


def load_config(path: Union[str, Path]) -> Tuple[TxTemplate, RetryPolicy]:
    return config_from_text(Path(path).read_text())
