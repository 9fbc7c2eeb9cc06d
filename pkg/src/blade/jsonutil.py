"""Canonical JSON emission shared by the CLI and the HTTP service.

Both surfaces must emit byte-identical documents for the same payload, so the
one formatting decision lives here: compact separators, UTF-8 as-is, reject
NaN/Infinity, trailing newline.
"""

from __future__ import annotations

import json


def canonical_json(payload) -> str:
    return json.dumps(payload, ensure_ascii=False, allow_nan=False, separators=(",", ":")) + "\n"
