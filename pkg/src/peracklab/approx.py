"""Effective gain of splitting one EWMA decay into n smaller per-ACK decays.

n decays of ``1/(nG)`` each shrink a value by ``(1 - 1/(nG))**n``. The
effective reciprocal gain ``G'`` is the single decay with the same effect:
``1 - 1/G' = (1 - 1/(nG))**n``.
"""

import math
from typing import Iterable, List, Tuple

LARGE_N = 10**6


def effective_gain_numeric(G: float, n: int) -> float:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n * G <= 1:
        raise ValueError(f"n*G must exceed 1 (got n={n}, G={G})")
    if n == 1:
        return float(G)
    # 1 - (1 - x)**n evaluated as -expm1(n * log1p(-x))
    return -1.0 / math.expm1(n * math.log1p(-1.0 / (n * G)))


def effective_gain_closed_form(G: float) -> Tuple[float, float]:
    """Large-n approximation ``(2G**2 / (2G - 1), G / (2G - 1))``."""
    if G <= 0.5:
        raise ValueError(f"G must exceed 0.5, got {G}")
    return 2 * G * G / (2 * G - 1), G / (2 * G - 1)


def fig4_table(G_values: Iterable[float], n_values: Iterable[int]) -> List[Tuple[float, int, float]]:
    """Rows of ``(G, n, G' - G)``."""
    n_values = list(n_values)
    return [(G, n, effective_gain_numeric(G, n) - G) for G in G_values for n in n_values]


def fig4_csv(rows) -> str:
    lines = ["G,n,gprime_minus_g"]
    lines += [f"{G:g},{n},{d:.6g}" for G, n, d in rows]
    return "\n".join(lines) + "\n"
