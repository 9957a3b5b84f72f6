"""Cross-check suites: analytic against numeric, closed formulas against the definitions."""
from dataclasses import dataclass

import numpy as np

from .linalg import hermitian_eig
from .measures import (
    bloch_decomposition,
    brute_force_measurement_oracle,
    f_min,
    f_min_closed_form,
    hs_min,
    hs_min_closed_form,
)
from .model import DimerParams, analytic_spectrum, build_hamiltonian
from .thermal import gibbs_state_analytic, gibbs_state_spectral, partition_function


def random_params(rng, zero_field=False, equal_g=False):
    """Random dimensionless parameters: J in [0.1, 2], Delta in [0, 2], D/J in [-2, 2],
    g in [1.8, 2.4], mu_B B in [0, 3]."""
    J = rng.uniform(0.1, 2.0)
    g1 = rng.uniform(1.8, 2.4)
    g2 = g1 if equal_g else rng.uniform(1.8, 2.4)
    return DimerParams(
        J=J,
        delta=rng.uniform(0.0, 2.0),
        D=rng.uniform(-2.0, 2.0) * J,
        g1=g1,
        g2=g2,
        B=0.0 if zero_field else rng.uniform(0.0, 3.0),
    )


def random_temperature(rng, lo=0.05, hi=5.0):
    return rng.uniform(lo, hi)


@dataclass
class SuiteResult:
    name: str
    passed: int
    total: int
    worst: float
    tol: float

    @property
    def ok(self):
        return self.passed == self.total

    def line(self):
        flag = "PASS" if self.ok else "FAIL"
        return f"{flag} {self.name}: {self.passed}/{self.total} within {self.tol:g} (worst {self.worst:.3e})"


def _suite(name, tol, errors):
    errors = list(errors)
    return SuiteResult(name, sum(e <= tol for e in errors), len(errors), max(errors, default=0.0), tol)


def spectrum_suite(draws=1000, seed=0, tol=1e-10):
    rng = np.random.default_rng(seed)

    def err(p):
        numeric = hermitian_eig(build_hamiltonian(p)).eigenvalues
        return float(np.max(np.abs(np.sort(analytic_spectrum(p).energies) - numeric)))

    return _suite("spectrum analytic vs Jacobi", tol, (err(random_params(rng)) for _ in range(draws)))


def gibbs_suite(draws=1000, seed=1, tol=1e-10):
    rng = np.random.default_rng(seed)
    rho_err, z_err = [], []
    for _ in range(draws):
        p, T = random_params(rng), random_temperature(rng)
        a = gibbs_state_analytic(p, T)
        s = gibbs_state_spectral(p, T)
        rho_err.append(float(np.max(np.abs(a.rho - s.rho))))
        z_sum = float(np.sum(np.exp(-analytic_spectrum(p).energies / T)))
        z_err.append(abs(partition_function(p, T) - z_sum) / z_sum)
    return [
        _suite("Gibbs matrix elements vs spectral sum", tol, rho_err),
        _suite("partition function closed form vs spectral sum (relative)", tol, z_err),
    ]


def random_x_nonzero_states(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        p, T = random_params(rng), random_temperature(rng)
        rho = gibbs_state_analytic(p, T).rho
        if bloch_decomposition(rho).x_norm > 1e-6:
            out.append(rho)
    return out


def random_x_zero_states(count, seed):
    rng = np.random.default_rng(seed)
    return [
        gibbs_state_analytic(random_params(rng, zero_field=True), random_temperature(rng)).rho
        for _ in range(count)
    ]


def closed_form_suites(nonzero=200, zero=50, seed=2, grid=(720, 360), tol=1e-10, oracle_tol=1e-6):
    xs = random_x_nonzero_states(nonzero, seed)
    zs = random_x_zero_states(zero, seed + 1)
    results = [
        _suite("HS-MIN closed form vs definition (x != 0)", tol,
               (abs(hs_min_closed_form(r) - hs_min(r)) for r in xs)),
        _suite("F-MIN closed form vs definition (x != 0)", tol,
               (abs(f_min_closed_form(r) - f_min(r)) for r in xs)),
    ]
    hs_err, f_err, f_def_err = [], [], []
    for r in zs:
        hs_err.append(abs(hs_min_closed_form(r) - brute_force_measurement_oracle(r, "hs", grid)))
        f_oracle = 1.0 - brute_force_measurement_oracle(r, "fid", grid)
        f_err.append(abs(f_min_closed_form(r) - f_oracle))
        f_def_err.append(abs(f_min(r) - f_oracle))
    results += [
        _suite("HS-MIN eigenvalue branch vs grid oracle (x = 0)", oracle_tol, hs_err),
        _suite("F-MIN eigenvalue branch vs grid oracle (x = 0)", oracle_tol, f_err),
        _suite("F-MIN definition vs grid oracle (x = 0)", oracle_tol, f_def_err),
    ]
    return results


def gamma_convention_check(count=100, seed=4, tol=1e-10):
    """Does Gamma = gamma / sqrt(Tr rho^2) reproduce 1 - F from the definition?

    Checks random x != 0 states plus zero-field (x = 0) states under both readings of
    the eigenvalue branch. Returns {reading: SuiteResult}.
    """
    xs = random_x_nonzero_states(count, seed)
    zs = random_x_zero_states(count, seed + 1)
    return {
        "x_nonzero": _suite("Gamma convention, x != 0", tol, (abs(f_min_closed_form(r) - f_min(r)) for r in xs)),
        "x_zero_qubit_block": _suite("Gamma convention, x = 0, 3x3 qubit block", 1e-9,
                                     (abs(f_min_closed_form(r) - f_min(r)) for r in zs)),
        "x_zero_full": _suite("Gamma convention, x = 0, full 4x4", 1e-9,
                              (abs(f_min_closed_form(r, x_zero_block="full") - f_min(r)) for r in zs)),
    }


def run_all(draws=1000, oracle_states=20, grid=(360, 180)):
    results = [spectrum_suite(draws)]
    results += gibbs_suite(draws)
    results += closed_form_suites(nonzero=max(1, draws // 5), zero=oracle_states, grid=grid)
    return results
