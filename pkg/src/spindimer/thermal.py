"""Gibbs state of the dimer, built from the closed-form matrix elements or from the spectrum."""
import math
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveTemperature, NumericalGuard
from .model import BASIS_LABELS, DEGENERATE_ETA, analytic_spectrum, eta_terms, zeeman_fields


def inverse_temperature(T):
    """beta = 1/T in active units; ``T = inf`` gives beta = 0."""
    T = float(T)
    if not T > 0:
        raise NonPositiveTemperature(f"temperature must be > 0, got {T}")
    return 0.0 if math.isinf(T) else 1.0 / T


@dataclass(frozen=True)
class ThermalState:
    rho: np.ndarray
    log_z: float
    beta: float
    params: object
    T: float

    @property
    def Z(self):
        # inf when the partition function exceeds the double range (deep low T)
        return math.exp(self.log_z) if self.log_z < 709.0 else math.inf

    @property
    def purity(self):
        return float(np.sum(np.abs(self.rho) ** 2))

    def to_json(self):
        return {
            "basis": list(BASIS_LABELS),
            "rho": [[[float(z.real), float(z.imag)] for z in row] for row in self.rho],
            "Z": self.Z,
            "log_Z": self.log_z,
            "beta": self.beta,
            "T": self.T,
            "purity": self.purity,
            "params": self.params.to_config(),
        }


def _boltzmann_exponents(p, beta):
    """The six exponents -beta*E_i grouped as in the partition-function sum."""
    z = zeeman_fields(p)
    J, D, h2 = p.J, p.D, z.h2
    eta_m, eta_p, _, _ = eta_terms(p)
    a1 = -beta * (J + 2 * D) / 2
    x1 = beta * (z.h1 + 2 * h2) / 2
    b = beta * (J - 2 * D) / 4
    c = beta * h2 / 2
    return np.array([
        a1 + x1, a1 - x1,
        b + c + beta * eta_m / 4, b + c - beta * eta_m / 4,
        b - c + beta * eta_p / 4, b - c - beta * eta_p / 4,
    ])


def log_partition_function(p, T):
    expo = _boltzmann_exponents(p, inverse_temperature(T))
    top = expo.max()
    return float(top + math.log(np.sum(np.exp(expo - top))))


def partition_function(p, T):
    """Partition function in the closed cosh form, evaluated literally.

    Raises NumericalGuard when an exponential would overflow; use
    :func:`log_partition_function` at very low temperature.
    """
    beta = inverse_temperature(T)
    z = zeeman_fields(p)
    J, D, h1, h2 = p.J, p.D, z.h1, z.h2
    eta_m, eta_p, _, _ = eta_terms(p)
    try:
        value = 2.0 * (
            math.exp(-beta * (J + 2 * D) / 2) * math.cosh(beta * (h1 + 2 * h2) / 2)
            + math.exp(beta * (J - 2 * D) / 4) * (
                math.exp(beta * h2 / 2) * math.cosh(beta * eta_m / 4)
                + math.exp(-beta * h2 / 2) * math.cosh(beta * eta_p / 4)
            )
        )
    except OverflowError:
        raise NumericalGuard(f"partition function overflows at T={T}") from None
    if not math.isfinite(value):
        raise NumericalGuard(f"partition function overflows at T={T}")
    return value


def _cosh_sinh_over_z(a, y, log_z):
    """``(e^a cosh y / Z, e^a sinh y / Z)`` without forming e^a or Z."""
    up = math.exp(a + y - log_z)
    down = math.exp(a - y - log_z)
    return 0.5 * (up + down), 0.5 * (up - down)


def gibbs_state_analytic(p, T):
    """Thermal density matrix filled from the closed-form element expressions.

    Every listed element already carries the single 1/Z factor. Exponentials are
    combined with -ln Z before evaluation, so nothing overflows at low T.
    """
    beta = inverse_temperature(T)
    log_z = log_partition_function(p, T)
    z = zeeman_fields(p)
    J, D, h1, h2 = p.J, p.D, z.h1, z.h2
    eta_m, eta_p, k_m, k_p = eta_terms(p)

    r_m = 0.0 if eta_m < DEGENERATE_ETA else k_m / eta_m
    r_p = 0.0 if eta_p < DEGENERATE_ETA else k_p / eta_p
    x_m = 0.0 if eta_m < DEGENERATE_ETA else math.sqrt(8.0) * J * p.delta / eta_m
    x_p = 0.0 if eta_p < DEGENERATE_ETA else math.sqrt(8.0) * J * p.delta / eta_p

    ch_m, sh_m = _cosh_sinh_over_z(beta / 4 * (J - 2 * D + 2 * h2), beta * eta_m / 4, log_z)
    ch_p, sh_p = _cosh_sinh_over_z(beta / 4 * (J - 2 * D - 2 * h2), beta * eta_p / 4, log_z)

    rho = np.zeros((6, 6), dtype=complex)
    rho[0, 0] = math.exp(-beta / 2 * (J + 2 * D - (h1 + 2 * h2)) - log_z)
    rho[5, 5] = math.exp(-beta / 2 * (J + 2 * D + (h1 + 2 * h2)) - log_z)
    rho[1, 1] = ch_m - r_m * sh_m
    rho[3, 3] = ch_m + r_m * sh_m
    rho[2, 2] = ch_p + r_p * sh_p
    rho[4, 4] = ch_p - r_p * sh_p
    rho[1, 3] = rho[3, 1] = -x_m * sh_m
    rho[2, 4] = rho[4, 2] = -x_p * sh_p
    if not np.all(np.isfinite(rho)):
        raise NumericalGuard(f"non-finite density matrix at T={T}")
    return ThermalState(rho, log_z, beta, p, float(T))


def gibbs_state_spectral(p, T):
    """Thermal state as the Boltzmann-weighted sum of analytic eigenprojectors."""
    beta = inverse_temperature(T)
    spec = analytic_spectrum(p)
    expo = -beta * spec.energies
    top = expo.max()
    w = np.exp(expo - top)
    total = w.sum()
    v = spec.vectors
    rho = (v * (w / total)) @ v.conj().T
    return ThermalState(rho, float(top + math.log(total)), beta, p, float(T))
