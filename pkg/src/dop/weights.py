"""Semiclassical weights on the lattice of non-negative integers.

A weight is fixed by the Pearson pair

    theta(z) = z (z + b_1 - 1) ... (z + b_N - 1),
    sigma(z) = eta (z + a_1) ... (z + a_M),

through ``theta(k+1) w(k+1) = sigma(k) w(k)`` and ``w(0) = 1``, i.e.

    w(k) = (a_1)_k ... (a_M)_k eta^k / (k! (b_1)_k ... (b_N)_k).
"""
from __future__ import annotations

from contextlib import nullcontext
from dataclasses import dataclass
from fractions import Fraction
from math import prod
from typing import Iterator, Sequence

from mpmath import mp, mpf

from ._linalg import poly_mul
from .errors import DivergentWeight, DomainError
from .precision import to_fraction, to_mpf


@dataclass(frozen=True)
class ParameterSet:
    """Exact Pearson data ``(a; b; eta)``."""

    a: tuple[Fraction, ...]
    b: tuple[Fraction, ...]
    eta: Fraction

    @classmethod
    def of(cls, a=(), b=(), eta=1) -> "ParameterSet":
        params = cls(tuple(to_fraction(x) for x in a),
                     tuple(to_fraction(x) for x in b),
                     to_fraction(eta))
        params.validate()
        return params

    def validate(self) -> None:
        for i, ai in enumerate(self.a, 1):
            if ai <= 0:
                raise DomainError(f"a_{i} = {ai} must be positive")
        for j, bj in enumerate(self.b, 1):
            if bj <= 0:
                raise DomainError(f"b_{j} = {bj} must be positive")
        if self.eta <= 0:
            raise DomainError(f"eta = {self.eta} must be positive")
        if self.M > self.N + 1:
            raise DivergentWeight(
                f"M = {self.M} > N + 1 = {self.N + 1}: moment series diverges")
        if self.M == self.N + 1 and self.eta >= 1:
            raise DivergentWeight(
                f"M = N + 1 requires 0 < eta < 1, got eta = {self.eta}")

    @property
    def M(self) -> int:
        return len(self.a)

    @property
    def N(self) -> int:
        return len(self.b)

    @property
    def kappa(self) -> Fraction:
        """``prod(a) / prod(b)``; 1 for empty lists."""
        return Fraction(prod(self.a, start=Fraction(1)), prod(self.b, start=Fraction(1)))

    @property
    def upsilon(self) -> Fraction:
        """``eta prod(a - 1) / prod(b - 1)``, the total-shift Geronimus constant."""
        den = prod((bj - 1 for bj in self.b), start=Fraction(1))
        if den == 0:
            raise DomainError("upsilon undefined: some b_j equals 1")
        return self.eta * prod((ai - 1 for ai in self.a), start=Fraction(1)) / den

    def as_dict(self) -> dict:
        return {"a": [str(x) for x in self.a], "b": [str(x) for x in self.b],
                "eta": str(self.eta)}

    def __str__(self) -> str:
        fmt = lambda xs: ",".join(str(x) for x in xs)  # noqa: E731
        return f"a=({fmt(self.a)}) b=({fmt(self.b)}) eta={self.eta}"


@dataclass(frozen=True)
class PearsonWeight:
    """Weight together with the expanded Pearson polynomials.

    ``theta_coeffs`` and ``sigma_coeffs`` are exact ascending coefficient
    tuples: theta is monic of degree N+1 with zero constant term, sigma has
    degree M and leading coefficient eta.
    """

    params: ParameterSet
    theta_coeffs: tuple[Fraction, ...]
    sigma_coeffs: tuple[Fraction, ...]

    @property
    def M(self) -> int:
        return self.params.M

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def band(self) -> int:
        """``N + M + 2``: the number of diagonals of the structure matrix."""
        return self.params.N + self.params.M + 2


def make_weight(a: Sequence = (), b: Sequence = (), eta=1) -> PearsonWeight:
    """Build a Pearson weight; raises DomainError / DivergentWeight."""
    params = ParameterSet.of(a, b, eta)
    return _from_params(params)


def _from_params(params: ParameterSet) -> PearsonWeight:
    theta = [Fraction(0), Fraction(1)]
    for bj in params.b:
        theta = poly_mul(theta, [bj - 1, Fraction(1)])
    sigma = [params.eta]
    for ai in params.a:
        sigma = poly_mul(sigma, [ai, Fraction(1)])
    return PearsonWeight(params, tuple(theta), tuple(sigma))


def weight_ratio(w: PearsonWeight, k) -> mpf:
    """``w(k+1)/w(k) = sigma(k)/theta(k+1)`` at the ambient precision."""
    k = mpf(k)
    num = to_mpf(w.params.eta)
    for ai in w.params.a:
        num *= k + to_mpf(ai)
    den = k + 1
    for bj in w.params.b:
        den *= k + to_mpf(bj)
    return num / den


def iter_weight(w: PearsonWeight) -> Iterator[mpf]:
    """Yield ``w(0), w(1), ...`` at the ambient precision via the Pearson ratio."""
    a = [to_mpf(x) for x in w.params.a]
    b = [to_mpf(x) for x in w.params.b]
    eta = to_mpf(w.params.eta)
    value = mp.one
    k = 0
    while True:
        yield value
        num = eta
        for ai in a:
            num *= k + ai
        den = mpf(k + 1)
        for bj in b:
            den *= k + bj
        value = value * num / den
        k += 1


def eval_weight(w: PearsonWeight, k: int, prec: int) -> mpf:
    """``w(k)`` by running products of the Pearson ratio (no Gamma calls)."""
    if k < 0 or int(k) != k:
        raise DomainError(f"k = {k} is not a non-negative integer")
    k = int(k)
    with mp.workprec(prec + 32 + k.bit_length()):
        value = mp.one
        for j in range(k):
            value *= weight_ratio(w, j)
    with mp.workprec(prec):
        return +value


def eval_theta_sigma(w: PearsonWeight, z, prec: int | None = None) -> tuple[mpf, mpf]:
    """``(theta(z), sigma(z))`` from the factored root forms."""
    ctx = mp.workprec(prec) if prec is not None else nullcontext()
    with ctx:
        z = mpf(z)
        theta = z
        for bj in w.params.b:
            theta *= z + to_mpf(bj) - 1
        sigma = to_mpf(w.params.eta)
        for ai in w.params.a:
            sigma *= z + to_mpf(ai)
        return theta, sigma


def pearson_residual(w: PearsonWeight, k: int, prec: int, values=None) -> mpf:
    """``theta(k+1) w(k+1) - sigma(k) w(k)``.

    ``values`` optionally supplies the pair ``(w(k), w(k+1))`` so that a
    tampered table can be checked.
    """
    if values is None:
        values = (eval_weight(w, k, prec), eval_weight(w, k + 1, prec))
    wk, wk1 = values
    with mp.workprec(prec):
        theta1, _ = eval_theta_sigma(w, k + 1)
        _, sigma0 = eval_theta_sigma(w, k)
        return theta1 * wk1 - sigma0 * wk


@dataclass(frozen=True)
class ShiftSpec:
    """A contiguous parameter shift.

    ``kind`` is ``"a"`` (a_i -> a_i + 1), ``"b"`` (b_j -> b_j - 1) or
    ``"total"`` (every a_i and b_j raised by one); ``inverse`` reverses it.
    Indices are 1-based.
    """

    kind: str
    index: int | None = None
    inverse: bool = False

    def __post_init__(self):
        if self.kind not in ("a", "b", "total"):
            raise ValueError(f"unknown shift kind {self.kind!r}")
        if self.kind == "total" and self.index is not None:
            raise ValueError("the total shift takes no index")
        if self.kind != "total" and (self.index is None or self.index < 1):
            raise ValueError("parameter shifts need a 1-based index")

    @classmethod
    def it(cls, i: int, inverse: bool = False) -> "ShiftSpec":
        return cls("a", i, inverse)

    @classmethod
    def tj(cls, j: int, inverse: bool = False) -> "ShiftSpec":
        return cls("b", j, inverse)

    @classmethod
    def total(cls, inverse: bool = False) -> "ShiftSpec":
        return cls("total", None, inverse)

    def inverted(self) -> "ShiftSpec":
        return ShiftSpec(self.kind, self.index, not self.inverse)

    def label(self) -> str:
        base = {"a": f"IT{self.index}", "b": f"TJ{self.index}", "total": "T"}[self.kind]
        return base + ("^-1" if self.inverse else "")


def all_shifts(w: PearsonWeight, inverse: bool = False) -> list[ShiftSpec]:
    """Every single-parameter shift plus the total shift for ``w``."""
    out = [ShiftSpec.it(i, inverse) for i in range(1, w.M + 1)]
    out += [ShiftSpec.tj(j, inverse) for j in range(1, w.N + 1)]
    out.append(ShiftSpec.total(inverse))
    return out


def shifted_params(params: ParameterSet, s: ShiftSpec) -> ParameterSet:
    step = -1 if s.inverse else 1
    a, b = list(params.a), list(params.b)
    if s.kind == "a":
        if s.index > len(a):
            raise DomainError(f"shift index {s.index} > M = {len(a)}")
        a[s.index - 1] += step
    elif s.kind == "b":
        if s.index > len(b):
            raise DomainError(f"shift index {s.index} > N = {len(b)}")
        b[s.index - 1] -= step
    else:
        a = [x + step for x in a]
        b = [x + step for x in b]
    out = ParameterSet(tuple(a), tuple(b), params.eta)
    try:
        out.validate()
    except DomainError as exc:
        raise DomainError(f"{s.label()} leaves the admissible domain: {exc}") from None
    return out


def shift_params(w: PearsonWeight, s: ShiftSpec) -> PearsonWeight:
    """Apply a contiguous shift; constants are recomputed from the new data."""
    return _from_params(shifted_params(w.params, s))


def christoffel_constant(params: ParameterSet, s: ShiftSpec) -> Fraction:
    """Constant ``c`` with ``c * (T w)(k) = (k - root) w(k)`` for a forward shift.

    ``a_i`` for IT_i, ``b_j - 1`` for TJ_j and ``eta * kappa`` for the total
    shift, where ``eta kappa T w(k) = (k + 1) w(k + 1)``.
    """
    if s.inverse:
        raise ValueError("christoffel_constant expects a forward shift")
    if s.kind == "a":
        return params.a[s.index - 1]
    if s.kind == "b":
        return params.b[s.index - 1] - 1
    return params.eta * params.kappa


def christoffel_root(params: ParameterSet, s: ShiftSpec) -> Fraction:
    """Zero of the Christoffel factor: ``-a_i``, ``1 - b_j`` or ``0`` (total)."""
    if s.kind == "a":
        return -params.a[s.index - 1]
    if s.kind == "b":
        return 1 - params.b[s.index - 1]
    return Fraction(0)


def geronimus_constant(params: ParameterSet, s: ShiftSpec) -> Fraction:
    """Constant of the massless Geronimus step ``s`` (an inverse shift).

    ``a_i - 1`` for IT_i^-1, ``b_j`` for TJ_j^-1 and upsilon for T^-1.
    """
    if not s.inverse:
        raise ValueError("geronimus_constant expects an inverse shift")
    if s.kind == "a":
        return params.a[s.index - 1] - 1
    if s.kind == "b":
        return params.b[s.index - 1]
    return params.upsilon


def geronimus_point(params: ParameterSet, s: ShiftSpec) -> Fraction:
    """Pole of the Geronimus factor: ``1 - a_i``, ``-b_j`` or ``-1`` (total)."""
    if s.kind == "a":
        return 1 - params.a[s.index - 1]
    if s.kind == "b":
        return -params.b[s.index - 1]
    return Fraction(-1)

