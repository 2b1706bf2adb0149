"""Exact Shapley-value attribution by full coalition enumeration.

Missing-feature semantics: a single background vector (typically the
per-feature training means). v(S) evaluates the predictor on a mixed
vector taking coalition members from the instance and the rest from the
background. Attributions therefore depend on the background choice.

Each of the 2^|F| coalition values is evaluated exactly once, and the
weighted sums are accumulated in exact rational arithmetic (weights
|S|!(|F|-|S|-1)!/|F|! are rationals, float predictor outputs convert to
rationals losslessly), so the efficiency/dummy/symmetry axioms hold to
the last bit rather than to a tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .errors import EmptyInput, LengthMismatch, TooManyFeatures

MAX_FEATURES = 14  # 2^14 coalition evaluations is the enumeration budget


@dataclass(frozen=True, eq=False)
class Attribution:
    names: tuple[str, ...]
    values: np.ndarray  # shapley value per feature, target units
    base: float  # prediction with every feature at background
    full: float  # prediction on the instance

    def by_name(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self.names, self.values)}


@dataclass(frozen=True, eq=False)
class ShapSummary:
    names: tuple[str, ...]
    mean_abs: np.ndarray
    ranking: tuple[str, ...]  # descending mean |shapley|, ties by name


def _coalition_values(predictor, instance: np.ndarray, background: np.ndarray) -> list[float]:
    n = instance.size
    values = []
    for mask in range(1 << n):
        mixed = background.copy()
        for i in range(n):
            if mask >> i & 1:
                mixed[i] = instance[i]
        values.append(float(predictor(mixed)))
    return values


def shapley_exact(predictor, instance, background, names=None) -> Attribution:
    """Exact Shapley attribution of predictor(instance) - predictor(background).

    phi_i = sum over S not containing i of
            |S|! (|F|-|S|-1)! / |F|! * (v(S+{i}) - v(S)).
    """
    instance = np.asarray(instance, dtype=float)
    background = np.asarray(background, dtype=float)
    if instance.shape != background.shape or instance.ndim != 1:
        raise LengthMismatch("instance and background must be equal-length vectors")
    n = instance.size
    if n == 0:
        raise EmptyInput("no features to attribute")
    if n > MAX_FEATURES:
        raise TooManyFeatures(
            f"{n} features exceeds the exact-enumeration budget of {MAX_FEATURES}; "
            "reduce the feature set"
        )
    if names is None:
        names = tuple(f"feature_{i}" for i in range(n))
    names = tuple(names)
    if len(names) != n:
        raise LengthMismatch("feature name count does not match vector length")

    values = _coalition_values(predictor, instance, background)
    fact = [factorial(k) for k in range(n + 1)]
    total = Fraction(fact[n])

    phi = np.empty(n)
    popcount = [bin(m).count("1") for m in range(1 << n)]
    for i in range(n):
        bit = 1 << i
        acc = Fraction(0)
        for mask in range(1 << n):
            if mask & bit:
                continue
            s = popcount[mask]
            delta = values[mask | bit] - values[mask]
            if delta != 0.0:
                acc += Fraction(delta) * fact[s] * fact[n - 1 - s]
        phi[i] = float(acc / total)

    return Attribution(names=names, values=phi, base=values[0], full=values[(1 << n) - 1])


def summarize_attributions(attributions) -> ShapSummary:
    """Aggregate per-instance attributions into the global mean-|value|
    ranking (descending, ties alphabetical)."""
    attributions = list(attributions)
    if not attributions:
        raise EmptyInput("no attributions to summarize")
    names = attributions[0].names
    for attr in attributions[1:]:
        if attr.names != names:
            raise LengthMismatch("attributions cover different feature sets")
    mean_abs = np.mean([np.abs(a.values) for a in attributions], axis=0)
    order = sorted(range(len(names)), key=lambda i: (-mean_abs[i], names[i]))
    return ShapSummary(
        names=names,
        mean_abs=mean_abs,
        ranking=tuple(names[i] for i in order),
    )


def shap_summary(predictor, instances, background, names=None) -> ShapSummary:
    """Mean |shapley value| per feature over a dataset of instances,
    ranked descending (ties alphabetical)."""
    instances = np.asarray(instances, dtype=float)
    if instances.ndim == 1:
        instances = instances[None, :]
    if instances.shape[0] == 0:
        raise EmptyInput("no instances to summarize")
    attributions = [shapley_exact(predictor, row, background, names) for row in instances]
    return summarize_attributions(attributions)
