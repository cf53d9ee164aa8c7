"""Independent reference implementations used to freeze expected values.

Deliberately written without importing the code under test (plain
Python, raw-moment formulas, explicit enumeration) so they stay
independent of the paths they check.
"""

from __future__ import annotations

import itertools
import math


def pearson_raw_moments(xs, ys) -> float:
    """Pearson r via the raw-moment formula n*Sxy - Sx*Sy over sqrt(...)."""
    n = len(xs)
    sx = sum(xs)
    sy = sum(ys)
    sxy = sum(x * y for x, y in zip(xs, ys))
    sxx = sum(x * x for x in xs)
    syy = sum(y * y for y in ys)
    return (n * sxy - sx * sy) / math.sqrt((n * sxx - sx * sx) * (n * syy - sy * sy))


def midranks(values) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        average = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = average
        i = j + 1
    return ranks


def ranksum_exact_p(a, b) -> float:
    """Two-sided exact p by enumerating every group assignment."""
    pooled = list(a) + list(b)
    ranks = midranks(pooled)
    n1 = len(a)
    total = len(pooled)
    statistic = sum(ranks[:n1])
    mean = n1 * (total + 1) / 2
    observed = abs(statistic - mean)
    hits = 0
    count = 0
    for combo in itertools.combinations(range(total), n1):
        count += 1
        if abs(sum(ranks[i] for i in combo) - mean) >= observed - 1e-9:
            hits += 1
    return hits / count


def classify_contingency(universe, stores, fulfilled) -> tuple[int, int, int, int]:
    """Per-site classification into the four 2x2 cells."""
    a = b = c = d = 0
    for site in universe:
        has_store = site in stores
        is_fulfilled = site in fulfilled
        if has_store and is_fulfilled:
            a += 1
        elif has_store:
            b += 1
        elif is_fulfilled:
            c += 1
        else:
            d += 1
    return a, b, c, d


def weighted_mean(weights, values) -> float:
    return sum(w * v for w, v in zip(weights, values)) / sum(weights)


def predicates_satisfiable(p1, p2) -> bool:
    """Dense scan for a value satisfying both threshold predicates.

    For interval-shaped predicates any nonempty intersection contains a
    threshold endpoint, a point within 0.5 of one, a midpoint between two
    endpoints, or an extreme of an unbounded ray, all of which the scan
    covers.
    """
    candidates: set[float] = {-1e18, 1e18}
    for predicate in (p1, p2):
        if predicate.threshold is not None:
            endpoints = [predicate.threshold]
        else:
            endpoints = list(predicate.bounds)
        for t in endpoints:
            candidates.update({t - 1.0, t - 0.5, t, t + 0.5, t + 1.0})
    ordered = sorted(candidates)
    for low, high in zip(ordered, ordered[1:]):
        candidates.add((low + high) / 2)
    return any(p1.test(v) and p2.test(v) for v in candidates)
