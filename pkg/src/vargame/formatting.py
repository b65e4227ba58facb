"""Deterministic float rendering for CSV and JSON outputs."""


def fmt(x) -> str:
    """Shortest round-trip text of ``x`` after rounding to 12 significant digits."""
    x = float(x)
    if x != x or x in (float("inf"), float("-inf")):
        return repr(x)
    r = float(format(x, ".12g"))
    if r == 0.0:
        return "0"
    return repr(r)


def rounded(x) -> float:
    return float(format(float(x), ".12g"))
