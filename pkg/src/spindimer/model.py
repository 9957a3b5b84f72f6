"""Mixed spin-(1/2, 1) Heisenberg dimer: parameters, Hamiltonian and exact spectrum.

Basis order (qubit index major, qutrit minor, ``m = +1, 0, -1``)::

    0 |+1/2, +1>   1 |+1/2, 0>   2 |+1/2, -1>
    3 |-1/2, +1>   4 |-1/2, 0>   5 |-1/2, -1>

In this order the Hamiltonian has diagonal ``(A-, B-, C+, C-, B+, A+)`` and the
exchange term ``nu = J*Delta/sqrt(2)`` couples states (1, 3) and (2, 4).

Energies live in one "active" unit: multiples of an arbitrary energy scale in
dimensionless mode (``k_B = mu_B = 1``), Kelvin (``E / k_B``) in physical mode.
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ValidationError
from .linalg import kron

K_B = 1.380649e-23  # J/K
MU_B = 9.2740100783e-24  # J/T
DEGENERATE_ETA = 1e-12

BASIS_LABELS = (
    "|+1/2,+1>",
    "|+1/2,0>",
    "|+1/2,-1>",
    "|-1/2,+1>",
    "|-1/2,0>",
    "|-1/2,-1>",
)


@dataclass(frozen=True)
class UnitSystem:
    mode: str = "dimensionless"
    k_b: float = K_B
    mu_b: float = MU_B

    def __post_init__(self):
        if self.mode not in ("dimensionless", "physical"):
            raise ValidationError(f"unknown unit mode {self.mode!r}")

    @property
    def field_to_energy(self):
        """Zeeman energy per unit g-factor per unit field, in active energy units.

        Physical mode: mu_B / k_B in K/T. Dimensionless mode: 1.
        """
        if self.mode == "physical":
            return self.mu_b / self.k_b
        return 1.0

    @property
    def energy_label(self):
        return "K" if self.mode == "physical" else "J"


DIMENSIONLESS = UnitSystem("dimensionless")
PHYSICAL = UnitSystem("physical")


@dataclass(frozen=True)
class DimerParams:
    """Couplings of the dimer Hamiltonian.

    ``J`` and ``D`` are in active energy units (Kelvin in physical mode) and ``B``
    in field units (Tesla in physical mode, ``mu_B B`` in units of energy otherwise).
    """

    J: float = 1.0
    delta: float = 1.0
    D: float = 0.0
    g1: float = 2.0
    g2: float = 2.0
    B: float = 0.0
    units: UnitSystem = field(default=DIMENSIONLESS)

    def __post_init__(self):
        for name in ("J", "delta", "D", "g1", "g2", "B"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value!r}")
        if self.g1 <= 0 or self.g2 <= 0:
            raise ValidationError("Lande factors must be positive")
        if self.J == 0:
            raise ValidationError("J must be nonzero")

    def with_(self, **changes):
        return replace(self, **changes)

    @classmethod
    def cuni(cls, B=0.0, D=0.0, delta=1.0):
        """Parameters reported for the CuNi complex: J/k_B = 141 K, g = 2.20, 2.29."""
        return cls(J=141.0, delta=delta, D=D, g1=2.20, g2=2.29, B=B, units=PHYSICAL)

    def to_config(self):
        """Flat key-value form used by config files and JSON output."""
        out = {"units": self.units.mode}
        if self.units.mode == "physical":
            out["j_over_kb_kelvin"] = self.J
            out["d_over_kb_kelvin"] = self.D
        else:
            out["j"] = self.J
            out["d_over_j"] = self.D / self.J
        out.update(delta=self.delta, g1=self.g1, g2=self.g2, b=self.B)
        return out

    @classmethod
    def from_config(cls, cfg):
        cfg = dict(cfg)
        mode = cfg.pop("units", None)
        physical_keys = {"j_over_kb_kelvin", "d_over_kb_kelvin"} & cfg.keys()
        dimless_keys = {"j", "d_over_j"} & cfg.keys()
        if physical_keys and dimless_keys:
            raise ValidationError("both physical and dimensionless unit keys given")
        if mode is None:
            mode = "physical" if physical_keys else "dimensionless"
        if mode == "physical" and dimless_keys or mode == "dimensionless" and physical_keys:
            raise ValidationError(f"keys {sorted(physical_keys | dimless_keys)} do not match units={mode}")
        units = UnitSystem(mode)
        try:
            if mode == "physical":
                J = float(cfg.pop("j_over_kb_kelvin", 141.0))
                D = float(cfg.pop("d_over_kb_kelvin", 0.0))
            else:
                J = float(cfg.pop("j", 1.0))
                D = float(cfg.pop("d_over_j", 0.0)) * J
            kwargs = {k: float(cfg.pop(key)) for k, key in
                      (("delta", "delta"), ("g1", "g1"), ("g2", "g2"), ("B", "b")) if key in cfg}
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"non-numeric model value: {exc}") from None
        if cfg:
            raise ValidationError(f"unknown model keys: {sorted(cfg)}")
        return cls(J=J, D=D, units=units, **kwargs)


@dataclass(frozen=True)
class ZeemanFields:
    h1: float
    h2: float


def zeeman_fields(p):
    """Site Zeeman energies ``h_i = g_i mu_B B`` in active energy units."""
    scale = p.units.field_to_energy * p.B
    return ZeemanFields(p.g1 * scale, p.g2 * scale)


def build_hamiltonian(p):
    """6x6 Hamiltonian matrix assembled element by element."""
    z = zeeman_fields(p)
    J, D, h1, h2 = p.J, p.D, z.h1, z.h2
    a_minus = 0.5 * (J + 2 * D - (h1 + 2 * h2))
    a_plus = 0.5 * (J + 2 * D + (h1 + 2 * h2))
    b_minus, b_plus = -0.5 * h1, 0.5 * h1
    c_plus = -0.5 * (J - 2 * D + (h1 - 2 * h2))
    c_minus = -0.5 * (J - 2 * D - (h1 - 2 * h2))
    nu = J * p.delta / math.sqrt(2.0)
    h = np.diag([a_minus, b_minus, c_plus, c_minus, b_plus, a_plus]).astype(complex)
    h[1, 3] = h[3, 1] = nu
    h[2, 4] = h[4, 2] = nu
    return h


def spin_operators():
    """(S^x, S^y, S^z) for spin 1/2 and (Sigma^x, Sigma^y, Sigma^z) for spin 1."""
    s = (
        np.array([[0, 1], [1, 0]], dtype=complex) / 2,
        np.array([[0, -1j], [1j, 0]], dtype=complex) / 2,
        np.array([[1, 0], [0, -1]], dtype=complex) / 2,
    )
    r = 1 / math.sqrt(2.0)
    sig = (
        np.array([[0, r, 0], [r, 0, r], [0, r, 0]], dtype=complex),
        np.array([[0, -1j * r, 0], [1j * r, 0, -1j * r], [0, 1j * r, 0]], dtype=complex),
        np.diag([1.0, 0.0, -1.0]).astype(complex),
    )
    return s, sig


def hamiltonian_from_spins(p):
    """Same Hamiltonian built from spin operators and tensor products (independent route)."""
    (sx, sy, sz), (tx, ty, tz) = spin_operators()
    i2, i3 = np.eye(2), np.eye(3)
    z = zeeman_fields(p)
    return (
        p.J * (p.delta * (kron(sx, tx) + kron(sy, ty)) + kron(sz, tz))
        + p.D * kron(i2, tz @ tz)
        - z.h1 * kron(sz, i3)
        - z.h2 * kron(i2, tz)
    )


@dataclass(frozen=True)
class AnalyticSpectrum:
    energies: np.ndarray  # E1..E6, fixed labeling order (not sorted)
    vectors: np.ndarray  # columns phi1..phi6
    eta_plus: float
    eta_minus: float
    c1_plus: float
    c1_minus: float
    c2_plus: float
    c2_minus: float
    degenerate_minus: bool = False
    degenerate_plus: bool = False

    @property
    def degenerate_branch(self):
        return self.degenerate_minus or self.degenerate_plus


def _mixing(ratio, degenerate):
    if degenerate:
        return math.sqrt(0.5), math.sqrt(0.5)
    # clip guards against |ratio| = 1 + eps
    plus = math.sqrt(max(0.0, 0.5 * (1.0 + ratio)))
    minus = math.sqrt(max(0.0, 0.5 * (1.0 - ratio)))
    return plus, minus


def eta_terms(p):
    """(eta_minus, eta_plus, k_minus, k_plus) with ``k = (J - 2D -+ 2(h1 - h2))``."""
    z = zeeman_fields(p)
    J, D = p.J, p.D
    k_minus = J - 2 * D - 2 * (z.h1 - z.h2)
    k_plus = J - 2 * D + 2 * (z.h1 - z.h2)
    exch = 8.0 * (J * p.delta) ** 2
    return math.sqrt(k_minus ** 2 + exch), math.sqrt(k_plus ** 2 + exch), k_minus, k_plus


def analytic_spectrum(p):
    """Closed-form eigenpairs.

    The two-level blocks {1, 3} and {2, 4} carry the exchange mixing. When an eta
    vanishes the block is already diagonal and degenerate, so equal-weight vectors are
    returned instead of the 0/0 mixing formula.
    """
    z = zeeman_fields(p)
    J, D, h1, h2 = p.J, p.D, z.h1, z.h2
    eta_m, eta_p, k_m, k_p = eta_terms(p)
    deg_m = eta_m < DEGENERATE_ETA
    deg_p = eta_p < DEGENERATE_ETA
    c1p, c1m = _mixing(0.0 if deg_m else k_m / eta_m, deg_m)
    c2p, c2m = _mixing(0.0 if deg_p else k_p / eta_p, deg_p)

    energies = np.array([
        0.5 * (J + 2 * D - (h1 + 2 * h2)),
        0.5 * (J + 2 * D + (h1 + 2 * h2)),
        -0.25 * (J - 2 * D + 2 * h2) - 0.25 * eta_m,
        -0.25 * (J - 2 * D + 2 * h2) + 0.25 * eta_m,
        -0.25 * (J - 2 * D - 2 * h2) - 0.25 * eta_p,
        -0.25 * (J - 2 * D - 2 * h2) + 0.25 * eta_p,
    ])
    # sign of the exchange element fixes the relative phase within each block
    s = -1.0 if J * p.delta < 0 else 1.0
    v = np.zeros((6, 6), dtype=complex)
    v[0, 0] = 1.0
    v[5, 1] = 1.0
    v[1, 2], v[3, 2] = c1m, -s * c1p
    v[1, 3], v[3, 3] = c1p, s * c1m
    v[2, 4], v[4, 4] = c2p, -s * c2m
    v[2, 5], v[4, 5] = c2m, s * c2p
    return AnalyticSpectrum(energies, v, eta_p, eta_m, c1p, c1m, c2p, c2m, deg_m, deg_p)
