"""Device-side gateway: framing, links and the nonce-synchronizing session."""

from .frames import Ack, Frame, FrameError, CrcError, MsgType, NonceQuery, NonceReply, SubmitRaw
from .link import LoopbackLink, QueueLink, SerialLink
from .session import (
    BootstrapError,
    GatewayError,
    GatewaySession,
    LinkTimeout,
    RetryPolicy,
    StreamReport,
    TxTemplate,
    bootstrap_nonce,
    data_gas,
    run_stream,
    submit_one,
)
