"""
Principal-value and oscillatory integrals over a spectral density.

Every integral has the form

    I = P.V. int J(w) T((w - pole) t) / (w - pole)^p dw

with T one of sin, 1 - cos or 1. Work is done in the shifted variable
y = w - pole. Around the pole a symmetric window [-eps, eps] is split into the
Taylor part of J, which is integrated analytically with the sine integral, and a
smooth remainder. Everything else goes to QUADPACK with its sin/cos weights, so
the cost does not grow with the number of oscillations.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple, Union

from scipy import special
from scipy.integrate import quad

from .errors import ParameterError, QuadratureError
from .spectral import SpectralDensity, TABULATED

logger = logging.getLogger(__name__)

DEFAULT_REL_TOL = 1e-6
MAX_SUBDIVISIONS = 500
TAIL_CUTOFFS = 40.0
TAIL_OSCILLATIONS = 50.0

SINE = 'sin'
VERSINE = 'one_minus_cos'
UNITY = 'one'

KERNELS = {
    'sinc': (SINE, 1),
    'sinc_squared_over_square': (VERSINE, 2),
    'sine_over_square': (SINE, 2),
    'rational': (UNITY, 1),
    'versine_over_linear': (VERSINE, 1),
}

Weight = Union[SpectralDensity, Callable[[float], float]]


@dataclass(frozen=True)
class PVIntegralSpec:
    """
    One principal-value integral.

    Args:
        weight: spectral density or explicit weight function of w
        kernel: key of KERNELS
        pole: pole location; negative values lie outside the domain
        time: t >= 0
        upper: explicit upper limit, defaults to max(40 cutoff, pole + 50/t)
        scale: cutoff of an explicit weight function
    """
    weight: Weight
    kernel: str
    pole: float
    time: float
    upper: Optional[float] = None
    scale: Optional[float] = None

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ParameterError(f"unknown kernel '{self.kernel}'")
        if self.time < 0:
            raise ParameterError("time must be non-negative")
        if not isinstance(self.weight, SpectralDensity) and self.scale is None:
            raise ParameterError("an explicit weight function needs a frequency scale")
        if self.upper is not None and self.upper < 10.0 * self.cutoff:
            raise ParameterError(f"upper limit {self.upper} is below ten cut-off frequencies")

    @property
    def cutoff(self) -> float:
        if self.scale is not None:
            return self.scale
        return self.weight.scale

    @property
    def domain(self) -> Tuple[float, float]:
        lower, upper = 0.0, self.upper
        if upper is None:
            upper = TAIL_CUTOFFS * self.cutoff
            if self.time > 0:
                upper = max(upper, self.pole + TAIL_OSCILLATIONS / self.time)
        if isinstance(self.weight, SpectralDensity) and self.weight.kind == TABULATED:
            lower, top = self.weight.support
            upper = min(upper, top)
        return lower, upper


@dataclass
class QuadratureResult:
    value: float
    error_estimate: float
    subdivisions: int
    converged: bool

    def __float__(self):
        return self.value


class _Accumulator:
    """Sums quad pieces and their diagnostics"""

    def __init__(self, rel_tol: float):
        self.rel_tol = rel_tol
        self.value = 0.0
        self.error = 0.0
        self.magnitude = 0.0
        self.subdivisions = 0
        self.failures: List[str] = []

    def add(self, func, a: float, b: float, sign: float = 1.0, **options) -> None:
        if b <= a:
            return
        out = quad(func, a, b, full_output=1, epsabs=1e-15, epsrel=self.rel_tol,
                   limit=MAX_SUBDIVISIONS, **options)
        value, error, info = out[0], out[1], out[2]
        if len(out) > 3:
            self.failures.append(f"[{a:.4g}, {b:.4g}] {options.get('weight', 'plain')}: {out[3]}")
        if isinstance(info, dict):
            self.subdivisions += int(info.get('last', 0))
        self.value += sign * value
        self.error += abs(error)
        self.magnitude += abs(value)

    def constant(self, value: float) -> None:
        self.value += value
        self.magnitude += abs(value)

    def result(self, tail: float = 0.0) -> QuadratureResult:
        error = self.error + tail
        tolerance = self.rel_tol * max(abs(self.value), self.magnitude) + 1e-13
        converged = not self.failures and error <= tolerance
        return QuadratureResult(self.value, error, self.subdivisions, converged)


def _weight_function(weight: Weight, lower: float) -> Callable[[float], float]:
    if not isinstance(weight, SpectralDensity):
        return lambda w: float(weight(max(w, lower)))
    if weight.kind == TABULATED:
        return lambda w: float(weight(max(w, lower)))
    coupling, cutoff, exponent = weight.coupling, weight.cutoff, weight.exponent
    # fast scalar path for the closed forms
    return lambda w: coupling * max(w, 0.0) ** exponent * math.exp(-w / cutoff)


def _taylor_coefficients(weight: Weight, func: Callable[[float], float], pole: float,
                         eps: float) -> Tuple[float, float, float]:
    """J, J' and J''/2 at the pole"""
    if isinstance(weight, SpectralDensity) and weight.kind != TABULATED:
        return (func(pole), float(weight.derivative(pole)),
                0.5 * float(weight.second_derivative(pole)))
    step = 1e-3 * eps
    left, centre, right = func(pole - step), func(pole), func(pole + step)
    return centre, (right - left) / (2 * step), 0.5 * (right - 2 * centre + left) / step ** 2


def _singular_part(trig: str, power: int, coeffs, eps: float, t: float) -> float:
    """Window integral of the Taylor polynomial of J against the kernel"""
    x = eps * t
    si, _ = special.sici(x)
    if trig == SINE:
        # odd powers of y vanish over the symmetric window
        return 2.0 * si * (coeffs[0] if power == 1 else coeffs[1])
    if trig == VERSINE and power == 2:
        return coeffs[0] * 2.0 * t * (si - (1.0 - math.cos(x)) / x)
    return 0.0


def _tail_bound(func: Callable[[float], float], upper: float, pole: float, power: int,
                cutoff: float, trig: str) -> float:
    reach = 2.0 if trig == VERSINE else 1.0
    return reach * func(upper) * cutoff / (upper - pole) ** power


def _add_trig(acc: _Accumulator, func, a: float, b: float, trig: str, t: float) -> None:
    if trig == SINE:
        acc.add(func, a, b, weight='sin', wvar=t)
    elif trig == VERSINE:
        acc.add(func, a, b)
        acc.add(func, a, b, sign=-1.0, weight='cos', wvar=t)
    else:
        acc.add(func, a, b)


def pv_integrate(spec: PVIntegralSpec, rel_tol: float = DEFAULT_REL_TOL) -> QuadratureResult:
    """
    Evaluate one principal-value integral.

    Raises:
        ParameterError: tolerance out of range or pole on the domain boundary
        QuadratureError: QUADPACK did not reach the tolerance; the partial
            result is attached
    """
    if not 1e-12 < rel_tol < 1e-2:
        raise ParameterError(f"rel_tol must lie in (1e-12, 1e-2), got {rel_tol}")
    trig, power = KERNELS[spec.kernel]
    t, pole = spec.time, spec.pole
    lower, upper = spec.domain
    if t == 0 and trig != UNITY:
        return QuadratureResult(0.0, 0.0, 0, True)
    if isinstance(spec.weight, SpectralDensity) and spec.weight.is_zero:
        return QuadratureResult(0.0, 0.0, 0, True)
    for edge in (lower, upper):
        if abs(pole - edge) <= 1e-12 * max(1.0, abs(edge)):
            raise ParameterError(f"pole {pole} lies on the domain boundary {edge}")

    func = _weight_function(spec.weight, lower)
    acc = _Accumulator(rel_tol)

    def shifted(y):
        return func(pole + y) / y ** power

    if not lower < pole < upper:
        _add_trig(acc, shifted, lower - pole, upper - pole, trig, t)
    else:
        eps = 0.5 * min(abs(pole), spec.cutoff, pole - lower, upper - pole)
        coeffs = _taylor_coefficients(spec.weight, func, pole, eps)
        tiny = 1e-4 * eps

        def remainder(y):
            if abs(y) < tiny:
                return coeffs[1] + coeffs[2] * y if power == 1 else coeffs[2]
            polynomial = coeffs[0] if power == 1 else coeffs[0] + coeffs[1] * y
            return (func(pole + y) - polynomial) / y ** power

        if trig == UNITY:
            acc.add(func, pole - eps, pole + eps, weight='cauchy', wvar=pole)
        else:
            if t > 0:
                acc.constant(_singular_part(trig, power, coeffs, eps, t))
            _add_trig(acc, remainder, -eps, eps, trig, t)
        _add_trig(acc, shifted, lower - pole, -eps, trig, t)
        _add_trig(acc, shifted, eps, upper - pole, trig, t)

    tail = 0.0
    if not (isinstance(spec.weight, SpectralDensity) and spec.weight.kind == TABULATED):
        tail = _tail_bound(func, upper, pole, power, spec.cutoff, trig)
    result = acc.result(tail)
    logger.debug("pv %s pole=%.6g t=%.6g -> %.10g (err %.2g, %d panels)", spec.kernel, pole, t,
                 result.value, result.error_estimate, result.subdivisions)
    if not result.converged:
        raise QuadratureError(
            f"{spec.kernel} integral at pole={pole:.6g}, t={t:.6g} did not converge "
            f"(error {result.error_estimate:.3g}); " + "; ".join(acc.failures), result)
    return result


def sinc_squared_integral(density: Weight, pole: float, t: float,
                          rel_tol: float = DEFAULT_REL_TOL, **options) -> float:
    """int J(w) (1 - cos((w - pole) t)) / (w - pole)^2 dw, which tends to pi t J(pole)"""
    return pv_integrate(PVIntegralSpec(density, 'sinc_squared_over_square', pole, t, **options),
                        rel_tol).value


def sine_over_square_integral(density: Weight, pole: float, t: float,
                              rel_tol: float = DEFAULT_REL_TOL, **options) -> float:
    """P.V. int J(w) sin((w - pole) t) / (w - pole)^2 dw"""
    return pv_integrate(PVIntegralSpec(density, 'sine_over_square', pole, t, **options),
                        rel_tol).value


def sinc_integral(density: Weight, pole: float, t: float,
                  rel_tol: float = DEFAULT_REL_TOL, **options) -> float:
    return pv_integrate(PVIntegralSpec(density, 'sinc', pole, t, **options), rel_tol).value


def versine_integral(density: Weight, pole: float, t: float,
                     rel_tol: float = DEFAULT_REL_TOL, **options) -> float:
    """int J(w) (1 - cos((w - pole) t)) / (w - pole) dw"""
    return pv_integrate(PVIntegralSpec(density, 'versine_over_linear', pole, t, **options),
                        rel_tol).value


def principal_value(density: Weight, pole: float, rel_tol: float = DEFAULT_REL_TOL,
                    **options) -> float:
    """P.V. int J(w) / (w - pole) dw"""
    return pv_integrate(PVIntegralSpec(density, 'rational', pole, 0.0, **options), rel_tol).value
