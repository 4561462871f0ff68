"""
lti_core.py
===========

Rational-function building blocks for continuous-time SISO systems.

The module provides:

* :class:`Polynomial`: real coefficients in descending powers of ``s``.
* :class:`TransferFunction`: ``num/den`` with a monic denominator.
* :class:`PidGains`: the non-negative decision vector ``(kp, ki, kd)``.
* :class:`StateSpace`: controllable canonical realization with feedthrough.
* Transfer-function algebra (:func:`pid_tf`, :func:`series`,
  :func:`unity_feedback`), realization (:func:`tf_to_ss`), root finding
  (:func:`roots`), stability classification (:func:`is_stable`) and the DC
  gain (:func:`dc_gain`).

All objects are immutable once built and every operation is a pure function,
so they can be shared freely between threads.  No pole-zero cancellation is
ever performed.

Example usage::

    from pidmatch.lti_core import PidGains, TransferFunction, closed_loop, is_stable

    plant = TransferFunction.from_coeffs([1], [1, 3, 3, 1])
    loop = closed_loop(plant, PidGains(2.8653, 1.1718, 2.6221))
    print(is_stable(loop).stable)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Tuple

import numpy as np

from .errors import DegreeZero, DomainError, ImproperClosedLoop, IndeterminateGain

# |max Re(p)| below this is reported as numerically undecidable.
MARGINAL_TOL = 1e-7


def _trim(coeffs: Iterable[float]) -> Tuple[float, ...]:
    values = tuple(float(c) for c in coeffs)
    if not values:
        raise DomainError('A polynomial needs at least one coefficient')
    if not all(math.isfinite(c) for c in values):
        raise DomainError(f'Polynomial coefficients must be finite, got {values}')
    for i, c in enumerate(values):
        if c != 0.0:
            return values[i:]
    return (0.0,)


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial in ``s``, coefficients in descending powers.

    ``coeffs[0]`` is the leading coefficient.  Leading zeros are trimmed on
    construction, so the leading coefficient is nonzero unless the polynomial
    is the zero polynomial ``(0.0,)``.
    """

    coeffs: Tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, 'coeffs', _trim(self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    def __call__(self, s: complex) -> complex:
        return np.polyval(self.coeffs, s)

    def __add__(self, other: Polynomial) -> Polynomial:
        return poly_arith(self, other, 'add')

    def __mul__(self, other: Polynomial) -> Polynomial:
        return poly_arith(self, other, 'mul')

    def scaled(self, factor: float) -> Polynomial:
        return Polynomial(tuple(c * factor for c in self.coeffs))


def poly_arith(a: Polynomial, b: Polynomial, op: str) -> Polynomial:
    """Add or multiply two polynomials (``op`` is ``'add'`` or ``'mul'``)."""
    if op == 'add':
        out = np.polyadd(a.as_array(), b.as_array())
    elif op == 'mul':
        out = np.polymul(a.as_array(), b.as_array())
    else:
        raise DomainError(f"Unknown polynomial operation {op!r}; use 'add' or 'mul'")
    return Polynomial(tuple(np.atleast_1d(out)))


@dataclass(frozen=True)
class TransferFunction:
    """Rational transfer function ``num(s) / den(s)``.

    The denominator is normalized to monic on construction (the numerator is
    scaled by the same factor), which makes equality canonical.  Improper
    functions can be built (a PID with derivative action is one); operations
    that need properness check it themselves.

    Parameters
    ----------
    num : Polynomial
        Numerator polynomial.
    den : Polynomial
        Denominator polynomial, not the zero polynomial.
    """

    num: Polynomial
    den: Polynomial

    def __post_init__(self) -> None:
        if self.den.is_zero:
            raise DomainError('Transfer function denominator is the zero polynomial')
        lead = self.den.coeffs[0]
        if lead != 1.0:
            object.__setattr__(self, 'num', self.num.scaled(1.0 / lead))
            object.__setattr__(self, 'den', self.den.scaled(1.0 / lead))

    @classmethod
    def from_coeffs(cls, num: Sequence[float], den: Sequence[float]) -> TransferFunction:
        return cls(Polynomial(tuple(num)), Polynomial(tuple(den)))

    @property
    def order(self) -> int:
        return self.den.degree

    @property
    def relative_degree(self) -> int:
        if self.num.is_zero:
            return self.den.degree
        return self.den.degree - self.num.degree

    @property
    def is_proper(self) -> bool:
        return self.num.is_zero or self.num.degree <= self.den.degree

    @property
    def is_biproper(self) -> bool:
        return not self.num.is_zero and self.num.degree == self.den.degree

    def __str__(self) -> str:
        return f'({_format_poly(self.num)}) / ({_format_poly(self.den)})'


def _format_poly(p: Polynomial) -> str:
    terms = []
    for power, c in zip(range(p.degree, -1, -1), p.coeffs):
        if c == 0.0 and p.degree > 0:
            continue
        if power == 0:
            terms.append(f'{c:g}')
        elif power == 1:
            terms.append(f'{c:g}s')
        else:
            terms.append(f'{c:g}s^{power}')
    return ' + '.join(terms)


@dataclass(frozen=True)
class PidGains:
    """Parallel, unfiltered PID gains; all components finite and >= 0."""

    kp: float
    ki: float
    kd: float = 0.0

    def __post_init__(self) -> None:
        for name in ('kp', 'ki', 'kd'):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0.0:
                raise DomainError(f'PID gain {name} must be finite and non-negative, got {value}')
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, x: Sequence[float]) -> PidGains:
        values = [float(v) for v in x]
        if len(values) == 2:
            values.append(0.0)
        return cls(*values)

    def as_array(self) -> np.ndarray:
        return np.array([self.kp, self.ki, self.kd], dtype=float)


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Continuous-time single-input single-output state-space model.

    ``A`` is n×n, ``B`` n×1, ``C`` 1×n and ``D`` the scalar feedthrough;
    ``D`` is nonzero exactly when the source transfer function is biproper.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: float
    order: int = field(init=False)

    def __post_init__(self) -> None:
        n = self.A.shape[0]
        if self.A.shape != (n, n) or self.B.shape != (n, 1) or self.C.shape != (1, n):
            raise DomainError(
                f'Inconsistent state-space shapes A{self.A.shape} B{self.B.shape} C{self.C.shape}'
            )
        object.__setattr__(self, 'order', n)


@dataclass(frozen=True)
class StabilityVerdict:
    """Pole-based stability classification of a transfer function."""

    stable: bool
    poles: Tuple[complex, ...]
    max_real_part: float
    marginal: bool


def pid_tf(g: PidGains) -> TransferFunction:
    """Return the unfiltered PID ``(kd s^2 + kp s + ki) / s``.

    The shape degrades with the active terms: ``(kp s + ki)/s`` when
    ``kd = 0`` and the pure gain ``kp/1`` when ``kd = ki = 0``.
    """
    if g.kd == 0.0 and g.ki == 0.0:
        return TransferFunction(Polynomial((g.kp,)), Polynomial((1.0,)))
    if g.kd == 0.0:
        return TransferFunction(Polynomial((g.kp, g.ki)), Polynomial((1.0, 0.0)))
    return TransferFunction(Polynomial((g.kd, g.kp, g.ki)), Polynomial((1.0, 0.0)))


def series(a: TransferFunction, b: TransferFunction) -> TransferFunction:
    """Cascade ``a`` and ``b``; no cancellation of common factors."""
    return TransferFunction(a.num * b.num, a.den * b.den)


def unity_feedback(loop: TransferFunction) -> TransferFunction:
    """Close ``loop`` with unit negative feedback: ``T = L.num / (L.den + L.num)``.

    Raises
    ------
    ImproperClosedLoop
        If the loop gain is improper or the closed loop would be improper.
    """
    if not loop.is_proper:
        raise ImproperClosedLoop(
            f'Loop gain {loop} is improper (numerator degree {loop.num.degree} > '
            f'denominator degree {loop.den.degree}); an unfiltered derivative needs a plant '
            'of relative degree >= 1, use pi_only for this plant'
        )
    den = loop.den + loop.num
    if den.is_zero or (not loop.num.is_zero and den.degree < loop.num.degree):
        raise ImproperClosedLoop(f'Closing the loop around {loop} leaves an improper closed loop')
    return TransferFunction(loop.num, den)


def closed_loop(plant: TransferFunction, g: PidGains) -> TransferFunction:
    """Unity-feedback closed loop of ``plant`` under the PID ``g``."""
    return unity_feedback(series(pid_tf(g), plant))


def tf_to_ss(tf: TransferFunction) -> StateSpace:
    """Controllable canonical realization of a proper transfer function.

    For a biproper ``tf`` the feedthrough ``D`` is split off by polynomial
    division first and the strictly proper remainder is realized.
    """
    if not tf.is_proper:
        raise DomainError(f'Cannot realize improper transfer function {tf}')
    n = tf.den.degree
    den = tf.den.as_array()
    num = np.zeros(n + 1)
    num[n + 1 - len(tf.num.coeffs):] = tf.num.coeffs
    # den is monic, so the quotient of the division is num[0]
    d = float(num[0])
    remainder = num - d * den
    if n == 0:
        return StateSpace(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), d)
    a = np.zeros((n, n))
    a[:-1, 1:] = np.eye(n - 1)
    a[-1, :] = -den[1:][::-1]
    b = np.zeros((n, 1))
    b[-1, 0] = 1.0
    c = remainder[1:][::-1].reshape(1, n)
    return StateSpace(a, b, c, d)


def roots(p: Polynomial) -> Tuple[complex, ...]:
    """All complex roots of ``p`` with multiplicity (companion-matrix eigenvalues)."""
    if p.degree < 1:
        raise DegreeZero(f'Constant polynomial {p.coeffs} has no roots')
    return tuple(complex(r) for r in np.roots(p.as_array()))


def is_stable(tf: TransferFunction) -> StabilityVerdict:
    """Classify ``tf`` by its poles: stable iff every pole has Re(p) < 0.

    A constant transfer function is vacuously stable with no poles.
    """
    if tf.den.degree == 0:
        return StabilityVerdict(stable=True, poles=(), max_real_part=-math.inf, marginal=False)
    poles = roots(tf.den)
    max_re = max(p.real for p in poles)
    return StabilityVerdict(
        stable=max_re < 0.0,
        poles=poles,
        max_real_part=max_re,
        marginal=abs(max_re) < MARGINAL_TOL,
    )


def dc_gain(tf: TransferFunction) -> float:
    """Value of ``tf`` at ``s = 0``; ``±math.inf`` for a pole at the origin.

    Raises
    ------
    IndeterminateGain
        When both ``num(0)`` and ``den(0)`` vanish.
    """
    if tf.num.is_zero:
        return 0.0
    num0 = tf.num.coeffs[-1]
    den0 = tf.den.coeffs[-1]
    if den0 == 0.0:
        if num0 == 0.0:
            raise IndeterminateGain(f'dc_gain of {tf} is 0/0; simplify the common factor s first')
        return math.copysign(math.inf, num0)
    return num0 / den0
