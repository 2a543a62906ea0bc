"""Shared float formatting so every output file is byte-stable."""

import math

SIG_DIGITS = 9


def fmt_float(x):
    """Render ``x`` with 9 significant digits; infinity becomes ``inf``."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        return "0"
    return format(x, f".{SIG_DIGITS}g")


def json_float(x):
    """JSON-safe value: rounded float, or the string ``"inf"``."""
    x = float(x)
    if math.isinf(x):
        return "inf"
    return float(format(x, f".{SIG_DIGITS}g"))


def parse_float(token):
    token = str(token).strip()
    if token.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    return float(token)
