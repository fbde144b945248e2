from acp._acp import (
    canonical_encode,
    check_message_order,
    discover,
    match_score,
    public_key,
    replay,
    replay_file,
    run_scenario,
    sign_envelope,
    verify_anchor,
    verify_envelope,
)
from acp.errors import AcpError

__all__ = [
    "AcpError",
    "canonical_encode",
    "check_message_order",
    "discover",
    "match_score",
    "public_key",
    "replay",
    "replay_file",
    "run_scenario",
    "sign_envelope",
    "verify_anchor",
    "verify_envelope",
]
