"""Clebsch-Gordan coefficients (Condon-Shortley phase) from Racah's closed-form sum."""

from __future__ import annotations

from math import factorial, sqrt


def _twice(x) -> int:
    t = round(2 * float(x))
    if abs(2 * float(x) - t) > 1e-9:
        raise ValueError(f"{x!r} is not an integer or half-integer")
    return t


def clebsch_gordan(j1, m1, j2, m2, j, m) -> float:
    """``<j1 m1; j2 m2 | j m>``; zero whenever a selection rule fails."""
    tj1, tm1, tj2, tm2, tj, tm = (_twice(x) for x in (j1, m1, j2, m2, j, m))
    if min(tj1, tj2, tj) < 0:
        return 0.0
    if tm1 + tm2 != tm:
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tm) > tj:
        return 0.0
    # j_i and m_i must share integer/half-integer character
    if (tj1 - tm1) % 2 or (tj2 - tm2) % 2 or (tj - tm) % 2:
        return 0.0
    if tj > tj1 + tj2 or tj < abs(tj1 - tj2) or (tj1 + tj2 + tj) % 2:
        return 0.0

    def f(t2: int) -> int:
        return factorial(t2 // 2)

    pre = (tj + 1) * f(tj + tj1 - tj2) * f(tj - tj1 + tj2) * f(tj1 + tj2 - tj) / f(tj1 + tj2 + tj + 2)
    pre *= f(tj + tm) * f(tj - tm) * f(tj1 - tm1) * f(tj1 + tm1) * f(tj2 - tm2) * f(tj2 + tm2)
    # integer bounds, in units of 1 (not doubled)
    k_min = max(0, (tj2 - tj - tm1) // 2, (tj1 - tj + tm2) // 2)
    k_max = min((tj1 + tj2 - tj) // 2, (tj1 - tm1) // 2, (tj2 + tm2) // 2)
    total = 0.0
    for k in range(k_min, k_max + 1):
        den = (
            factorial(k)
            * f(tj1 + tj2 - tj - 2 * k)
            * f(tj1 - tm1 - 2 * k)
            * f(tj2 + tm2 - 2 * k)
            * f(tj - tj2 + tm1 + 2 * k)
            * f(tj - tj1 - tm2 + 2 * k)
        )
        total += (-1) ** k / den
    return sqrt(pre) * total
