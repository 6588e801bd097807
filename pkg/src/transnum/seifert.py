"""Euler number of Seifert data and the fiber-detecting class on H_1.

Input is orientable-base Seifert data (g; (alpha_1, beta_1), ..., (alpha_n,
beta_n)), all alpha_j nonzero. With A = prod alpha_j, the abelianized
fundamental group relations

    alpha_j q_j + beta_j h = 0        (convention "h-positive", q^a h^b = 1)
    alpha_j q_j - beta_j h = 0        (convention "h-negative", q^a = h^b)
    q_1 + ... + q_n = 0               (surface relation; commutators die)

admit the assignment phi(h) = A, phi(q_j) = -+ A beta_j / alpha_j exactly
when the Euler number e = -sum beta_j/alpha_j vanishes: the long relation
sums to +- A e. All arithmetic is exact (Fractions in, ints out: alpha_j
divides A so each phi(q_j) is an integer).

The two relation conventions appear in the literature with opposite signs;
the constructor figures out which sign verifies under the one you ask for
(or picks h-positive by default) and says so in the result.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import NonzeroEulerNumber, TransnumError, ValidationError

__all__ = [
    "SeifertData",
    "RelationConvention",
    "FiberClassHomomorphism",
    "euler_number",
    "construct_h1_class",
    "verify_homomorphism",
    "parse_seifert_text",
    "format_seifert_text",
    "random_zero_euler_data",
    "EULER_CONVENTION",
]

# recorded in every report: e = -(beta_1/alpha_1 + ... + beta_n/alpha_n)
EULER_CONVENTION = "e = -sum(beta_j/alpha_j)"


class RelationConvention(enum.Enum):
    H_POSITIVE = "h-positive"  # q_j^{alpha_j} h^{beta_j} = 1
    H_NEGATIVE = "h-negative"  # q_j^{alpha_j} = h^{beta_j}


@dataclass(frozen=True)
class SeifertData:
    genus: int
    pairs: tuple

    def __post_init__(self):
        if not isinstance(self.genus, int) or isinstance(self.genus, bool):
            raise ValidationError("genus must be an integer")
        if self.genus < 0:
            raise ValidationError(
                "negative genus (non-orientable base) is not supported here"
            )
        pairs = tuple((int(a), int(b)) for a, b in self.pairs)
        if not pairs:
            raise ValidationError("need at least one (alpha, beta) pair")
        for a, _ in pairs:
            if a == 0:
                raise ValidationError("every alpha_j must be nonzero")
        object.__setattr__(self, "pairs", pairs)


def euler_number(data: SeifertData) -> Fraction:
    return -sum((Fraction(b, a) for a, b in data.pairs), Fraction(0))


@dataclass(frozen=True)
class FiberClassHomomorphism:
    """phi on H_1 generators: surface generators go to 0, q_j to values_q[j],
    the fiber class h to value_h (= prod alpha_j, never zero)."""

    values_q: tuple
    value_h: int
    values_ab: tuple
    convention: RelationConvention
    data: SeifertData


def _relation_residuals(data: SeifertData, phi: FiberClassHomomorphism):
    sign = 1 if phi.convention is RelationConvention.H_POSITIVE else -1
    per_pair = tuple(
        Fraction(a) * q + sign * Fraction(b) * phi.value_h
        for (a, b), q in zip(data.pairs, phi.values_q)
    )
    long_rel = sum((Fraction(q) for q in phi.values_q), Fraction(0))
    return per_pair, long_rel


def construct_h1_class(
    data: SeifertData, convention: Optional[RelationConvention] = None
) -> FiberClassHomomorphism:
    """Build phi; refuses data whose Euler number is nonzero (with the sum)."""
    e = euler_number(data)
    if e != 0:
        raise NonzeroEulerNumber(e)
    total = 1
    for a, _ in data.pairs:
        total *= a
    conventions = [convention] if convention is not None else [RelationConvention.H_POSITIVE]
    last_error = None
    for conv in conventions:
        # under q^a h^b = 1 the verifying sign is -, under q^a = h^b it is +
        sign = -1 if conv is RelationConvention.H_POSITIVE else 1
        values_q = []
        ok = True
        for a, b in data.pairs:
            q = Fraction(sign * total * b, a)
            if q.denominator != 1:
                ok = False
                break
            values_q.append(int(q))
        if not ok:
            last_error = "phi(q_j) not integral"
            continue
        phi = FiberClassHomomorphism(
            values_q=tuple(values_q),
            value_h=total,
            values_ab=(0,) * (2 * data.genus),
            convention=conv,
            data=data,
        )
        per_pair, long_rel = _relation_residuals(data, phi)
        if all(r == 0 for r in per_pair) and long_rel == 0:
            return phi
        last_error = f"residuals {per_pair}, {long_rel}"
    raise TransnumError(
        f"no verified sign assignment for {data} (should not happen when e=0): {last_error}"
    )


def verify_homomorphism(data: SeifertData, phi: FiberClassHomomorphism) -> dict:
    """Exact residual of every relation; all values must be 0."""
    if len(phi.values_q) != len(data.pairs):
        raise ValidationError("phi and data have different numbers of pairs")
    per_pair, long_rel = _relation_residuals(data, phi)
    return {
        "exceptional": per_pair,
        "long_relation": long_rel,
        "surface_generators": tuple(Fraction(v) for v in phi.values_ab),
        "centrality": Fraction(0),  # abelian target, nothing to check
    }


# --- text format -----------------------------------------------------------

_PAIR_RE = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


def parse_seifert_text(text: str) -> SeifertData:
    """Two keys, '#' comments:

        genus = 0
        pairs = (2, 1) (3, 1) (6, 1) (1, -1)
    """
    genus = None
    pairs = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"bad line in Seifert data: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "genus":
            try:
                genus = int(value)
            except ValueError as exc:
                raise ValidationError(f"genus must be an integer, got {value!r}") from exc
        elif key == "pairs":
            found = _PAIR_RE.findall(value)
            leftover = _PAIR_RE.sub("", value).strip()
            if not found or leftover:
                raise ValidationError(f"could not parse pairs from {value!r}")
            pairs = tuple((int(a), int(b)) for a, b in found)
        else:
            raise ValidationError(f"unknown key {key!r} in Seifert data")
    if genus is None or pairs is None:
        raise ValidationError("Seifert data needs both 'genus' and 'pairs'")
    return SeifertData(genus=genus, pairs=pairs)


def format_seifert_text(data: SeifertData) -> str:
    pairs = " ".join(f"({a}, {b})" for a, b in data.pairs)
    return f"genus = {data.genus}\npairs = {pairs}\n"


def random_zero_euler_data(rng, max_extra: int = 3) -> SeifertData:
    """Random data with Euler number exactly zero.

    Mix of mirrored pairs (alpha, b), (alpha, -b) and alpha-multiple pairs
    closed off by a single (1, -sum) pair; genus 0..3."""
    genus = int(rng.integers(0, 4))
    pairs = []
    for _ in range(int(rng.integers(1, max_extra + 1))):
        a = int(rng.integers(2, 7))
        b = int(rng.integers(-3, 4))
        pairs.append((a, b))
        pairs.append((a, -b))
    if rng.integers(0, 2):
        total = 0
        for _ in range(int(rng.integers(1, max_extra + 1))):
            a = int(rng.integers(2, 5))
            m = int(rng.integers(-2, 3))
            pairs.append((a, m * a))  # contributes the integer m
            total += m
        pairs.append((1, -total))
    order = rng.permutation(len(pairs))
    return SeifertData(genus=genus, pairs=tuple(pairs[i] for i in order))
