"""Measurement-induced nonlocality (Hilbert-Schmidt and fidelity based) and negativity
for qubit-qutrit states.

Measurements always act on the qubit. Shipped values come from the definition:
apply the locally invariant measurement and compare states. The closed formulas
are kept as cross-checks.

Operator bases are orthonormal under ``Tr(A B)``:
``{I, sx, sy, sz}/sqrt(2)`` on the qubit, ``{I/sqrt(3), lambda_1..8/sqrt(2)}`` on the
qutrit. ``gamma[i, j] = Tr(rho X_i (x) Y_j)``; the correlation block ``T`` is
``gamma[1:, 1:]`` in that same scaling (i.e. ``Tr(rho s_i (x) lambda_j) / 2``).
"""
import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .errors import NotAState
from .linalg import (
    check_hermitian,
    dagger,
    hermitian_eig,
    hs_norm_sq,
    kron,
    partial_trace,
    partial_transpose_qubit,
    trace_norm,
)

X_ZERO_TOL = 1e-9
TRACE_TOL = 1e-10
NEGATIVITY_FLOOR = -1e-12
DEFAULT_GRID = (360, 180)
MEASURES = ("hs_min", "f_min", "negativity")

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def gell_mann():
    """The eight Gell-Mann matrices in the usual order (lambda_1 .. lambda_8)."""
    mats = []
    for j, k in ((0, 1), (0, 2), (1, 2)):
        sym = np.zeros((3, 3), dtype=complex)
        sym[j, k] = sym[k, j] = 1
        anti = np.zeros((3, 3), dtype=complex)
        anti[j, k], anti[k, j] = -1j, 1j
        mats += [sym, anti]
    l3 = np.diag([1, -1, 0]).astype(complex)
    l8 = np.diag([1, 1, -2]).astype(complex) / math.sqrt(3)
    return (mats[0], mats[1], l3, mats[2], mats[3], mats[4], mats[5], l8)


@lru_cache(maxsize=None)
def _qubit_basis():
    return tuple(m / math.sqrt(2) for m in (np.eye(2, dtype=complex),) + PAULI)


def operator_basis_qubit():
    """Four Hermitian 2x2 matrices with ``Tr(X_i X_j) = delta_ij``; X_0 = I/sqrt(2)."""
    return [m.copy() for m in _qubit_basis()]


@lru_cache(maxsize=None)
def _qutrit_basis():
    return (np.eye(3, dtype=complex) / math.sqrt(3),) + tuple(m / math.sqrt(2) for m in gell_mann())


def operator_basis_qutrit():
    """Nine Hermitian 3x3 matrices with ``Tr(Y_i Y_j) = delta_ij``; Y_0 = I/sqrt(3)."""
    return [m.copy() for m in _qutrit_basis()]


@lru_cache(maxsize=None)
def _product_basis():
    xs, ys = _qubit_basis(), _qutrit_basis()
    out = np.empty((4, 9, 6, 6), dtype=complex)
    for i, xi in enumerate(xs):
        for j, yj in enumerate(ys):
            out[i, j] = kron(xi, yj)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _sandwiches():
    """Stack of sigma_a (x) I, a = x, y, z."""
    big = np.stack([kron(s, np.eye(3)) for s in PAULI])
    big.setflags(write=False)
    return big


def validate_state(rho, trace_tol=TRACE_TOL):
    r = np.asarray(rho, dtype=complex)
    if r.shape != (6, 6):
        raise NotAState(f"expected a 6x6 density matrix, got shape {r.shape}")
    try:
        check_hermitian(r)
    except Exception as exc:
        raise NotAState(str(exc)) from None
    tr = np.trace(r)
    if abs(tr - 1.0) > trace_tol:
        raise NotAState(f"trace is {tr.real:.12g}, expected 1")
    return r


@dataclass(frozen=True)
class BlochDecomposition:
    x: np.ndarray  # Tr(rho s_i (x) I)
    y: np.ndarray  # Tr(rho I (x) lambda_j)
    T: np.ndarray  # 3x8, orthonormal-basis scaling
    gamma: np.ndarray  # 4x9

    def reconstruct(self):
        return np.einsum("ij,ijab->ab", self.gamma, _product_basis())

    @property
    def x_norm(self):
        return float(np.linalg.norm(self.x))


def bloch_decomposition(rho):
    r = validate_state(rho)
    # Tr(rho P) = sum_ab rho_ba P_ab
    gamma = np.einsum("ijab,ba->ij", _product_basis(), r).real
    x = gamma[1:, 0] * math.sqrt(6)
    y = gamma[0, 1:] * 2.0
    return BlochDecomposition(x, y, gamma[1:, 1:].copy(), gamma)


@dataclass(frozen=True)
class ProjectiveMeasurement:
    """Two-outcome von Neumann measurement on the qubit along unit vector ``n``."""

    n: tuple

    def __post_init__(self):
        v = np.asarray(self.n, dtype=float)
        norm = np.linalg.norm(v)
        if not norm > 0:
            raise ValueError("measurement direction must be nonzero")
        object.__setattr__(self, "n", tuple(float(c) for c in v / norm))

    @classmethod
    def from_angles(cls, theta, phi):
        return cls((math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)))

    @property
    def projectors(self):
        ns = sum(c * s for c, s in zip(self.n, PAULI))
        eye = np.eye(2, dtype=complex)
        return (eye + ns) / 2, (eye - ns) / 2


@dataclass(frozen=True)
class MeasurementFamily:
    """Locally invariant measurements: a single one, or every direction when x = 0."""

    branch: str  # "x_nonzero" or "x_zero"
    measurement: ProjectiveMeasurement = None

    @property
    def is_unique(self):
        return self.branch == "x_nonzero"


def locally_invariant_measurements(rho, tol=X_ZERO_TOL):
    x = bloch_decomposition(rho).x
    norm = np.linalg.norm(x)
    if norm > tol:
        return MeasurementFamily("x_nonzero", ProjectiveMeasurement(tuple(x / norm)))
    return MeasurementFamily("x_zero")


def apply_measurement(rho, m):
    r = np.asarray(rho, dtype=complex)
    out = np.zeros_like(r)
    for proj in m.projectors:
        big = kron(proj, np.eye(3))
        out += big @ r @ big
    return out


def _measurement_kernel(rho):
    """``M[ab] = (s_a (x) I) rho (s_b (x) I)`` flattened to 9x36."""
    big = _sandwiches()
    return np.einsum("aij,jk,bkl->abil", big, rho, big).reshape(9, 36)


def _measured_batch(rho, dirs, kernel=None):
    """Post-measurement states for many directions at once: ``(rho + S rho S)/2``, S = n.sigma (x) I."""
    if kernel is None:
        kernel = _measurement_kernel(rho)
    outer = (dirs[:, :, None] * dirs[:, None, :]).reshape(-1, 9)
    srs = (outer.astype(complex) @ kernel).reshape(-1, 6, 6)
    return 0.5 * (rho[None] + srs)


def _hs_objective(rho, dirs, kernel=None):
    diff = rho[None] - _measured_batch(rho, dirs, kernel)
    return np.sum(diff.real ** 2 + diff.imag ** 2, axis=(1, 2))


def _fid_objective(rho, dirs, kernel=None):
    post = _measured_batch(rho, dirs, kernel)
    overlap = (post.reshape(-1, 36) @ rho.T.reshape(36)).real
    pur_post = np.sum(post.real ** 2 + post.imag ** 2, axis=(1, 2))
    return overlap ** 2 / (hs_norm_sq(rho) * pur_post)


def _angles_to_dir(theta, phi):
    return np.array([[math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]])


def _directions(thetas, phis):
    th, ph = np.meshgrid(thetas, phis, indexing="ij")
    return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)


def _min_eigvec(sym):
    es = hermitian_eig(sym)
    return es.eigenvalues[0], np.real(es.eigenvectors[:, 0])


def hs_min(rho, tol=X_ZERO_TOL):
    """Hilbert-Schmidt MIN, max ||rho - Pi(rho)||_2^2 over locally invariant measurements.

    With a nondegenerate marginal the invariant measurement is unique. Otherwise the
    disturbance is a quadratic form in the measurement direction, maximized by the
    least eigenvector of T T^t; the measurement is then applied there.
    """
    fam = locally_invariant_measurements(rho, tol)
    r = np.asarray(rho, dtype=complex)
    if fam.is_unique:
        m = fam.measurement
    else:
        t = bloch_decomposition(r).T
        _, n = _min_eigvec(t @ t.T)
        m = ProjectiveMeasurement(tuple(n))
    return hs_norm_sq(r - apply_measurement(r, m))


def hs_min_closed_form(rho, tol=X_ZERO_TOL):
    bd = bloch_decomposition(rho)
    tt = bd.T @ bd.T.T
    if bd.x_norm > tol:
        x = bd.x
        return float(np.trace(tt) - x @ tt @ x / (x @ x))
    lam, _ = _min_eigvec(tt)
    return float(np.trace(tt) - lam)


def fidelity(rho, sigma):
    """Trace-product fidelity Tr(rho sigma)^2 / (Tr rho^2 Tr sigma^2)."""
    a = validate_state(rho)
    b = validate_state(sigma)
    overlap = float(np.sum(a * b.T).real)
    value = overlap ** 2 / (hs_norm_sq(a) * hs_norm_sq(b))
    return min(max(value, 0.0), 1.0)


def _refine_min(func, theta0, phi0):
    # stop on function spread only: minimizers can form a whole circle of directions
    res = minimize(
        lambda a: func(a[0], a[1]),
        np.array([theta0, phi0]),
        method="Nelder-Mead",
        options={"xatol": np.inf, "fatol": 1e-16, "maxiter": 2000,
                 "initial_simplex": [[theta0, phi0], [theta0 + 0.05, phi0], [theta0, phi0 + 0.05]]},
    )
    return min(float(res.fun), func(theta0, phi0))


def f_min(rho, tol=X_ZERO_TOL, grid=(24, 12)):
    """Fidelity-based MIN, 1 - min F(rho, Pi(rho)) over locally invariant measurements.

    For x = 0 every qubit direction is admissible: a coarse (phi, theta) grid locates
    the basin and Nelder-Mead in (theta, phi) polishes it.
    """
    fam = locally_invariant_measurements(rho, tol)
    r = np.asarray(rho, dtype=complex)
    if fam.is_unique:
        return max(0.0, 1.0 - fidelity(r, apply_measurement(r, fam.measurement)))
    n_phi, n_theta = grid
    thetas = np.linspace(0, math.pi, n_theta)
    phis = np.linspace(0, 2 * math.pi, n_phi, endpoint=False)
    kernel = _measurement_kernel(r)
    vals = _fid_objective(r, _directions(thetas, phis).reshape(-1, 3), kernel)
    k = int(np.argmin(vals))
    best = _refine_min(
        lambda th, ph: float(_fid_objective(r, _angles_to_dir(th, ph), kernel)[0]),
        thetas[k // n_phi], phis[k % n_phi],
    )
    return min(max(0.0, 1.0 - best), 1.0)


def f_min_closed_form(rho, tol=X_ZERO_TOL, x_zero_block="qubit"):
    """Closed formula for fidelity-based MIN with Gamma = gamma / sqrt(Tr rho^2).

    ``x_zero_block`` picks how the x = 0 eigenvalue branch reads Gamma Gamma^t:
    "qubit" uses the 3x3 block of the traceless qubit rows, "full" the whole 4x4 matrix.
    """
    bd = bloch_decomposition(rho)
    g = bd.gamma / math.sqrt(hs_norm_sq(rho))
    gg = g @ g.T
    if bd.x_norm > tol:
        n = bd.x / bd.x_norm
        a = np.array([np.r_[1.0, n], np.r_[1.0, -n]]) / math.sqrt(2)
        return float(np.trace(gg) - np.trace(a @ gg @ a.T))
    block = gg if x_zero_block == "full" else gg[1:, 1:]
    tau, _ = _min_eigvec(block)
    return float(np.trace(block) - tau)


def negativity(rho):
    r = validate_state(rho)
    value = 0.5 * (trace_norm(partial_transpose_qubit(r)) - 1.0)
    if value > NEGATIVITY_FLOOR:
        value = max(value, 0.0)
    return value


def _golden_max(func, lo, hi, iters=40):
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = func(d)
    return (c, fc) if fc > fd else (d, fd)


def brute_force_measurement_oracle(rho, objective="hs", grid=(720, 360), passes=24,
                                   tol=X_ZERO_TOL, return_trace=False, chunk=20000):
    """Extremize the measurement objective by exhaustive search.

    ``objective="hs"`` maximizes ||rho - Pi(rho)||_2^2, ``"fid"`` minimizes
    F(rho, Pi(rho)). ``grid`` is (phi points, theta points). The best grid point is
    polished by alternating golden-section searches in theta and phi whose bracket
    halves every pass. ``trace`` records the running optimum after the grid and
    after each pass.
    """
    r = validate_state(rho)
    sign = 1.0 if objective == "hs" else -1.0
    func = _hs_objective if objective == "hs" else _fid_objective
    fam = locally_invariant_measurements(r, tol)
    if fam.is_unique:
        value = float(func(r, np.asarray(fam.measurement.n)[None])[0])
        return (value, [value]) if return_trace else value

    n_phi, n_theta = grid
    thetas = np.linspace(0, math.pi, n_theta)
    phis = np.linspace(0, 2 * math.pi, n_phi, endpoint=False)
    dirs = _directions(thetas, phis).reshape(-1, 3)
    kernel = _measurement_kernel(r)
    scores = np.concatenate([sign * func(r, dirs[i:i + chunk], kernel) for i in range(0, len(dirs), chunk)])
    k = int(np.argmax(scores))
    theta, phi = thetas[k // n_phi], phis[k % n_phi]
    best = float(scores[k])
    trace = [sign * best]

    def score(th, ph):
        return sign * float(func(r, _angles_to_dir(th, ph), kernel)[0])

    h_theta = math.pi / (n_theta - 1)
    h_phi = 2 * math.pi / n_phi
    for _ in range(passes):
        th, val = _golden_max(lambda t: score(t, phi), theta - h_theta, theta + h_theta)
        if val > best:
            theta, best = th, val
        ph, val = _golden_max(lambda p: score(theta, p), phi - h_phi, phi + h_phi)
        if val > best:
            phi, best = ph, val
        trace.append(sign * best)
        h_theta /= 2
        h_phi /= 2
    value = sign * best
    return (value, trace) if return_trace else value


@dataclass
class MeasureReport:
    hs_min: float = None
    f_min: float = None
    negativity: float = None
    purity: float = None
    marginal_bloch_norm: float = None
    branch: str = None

    def to_json(self):
        return asdict(self)


def evaluate(rho, measures=MEASURES, tol=X_ZERO_TOL):
    """MeasureReport for a state; measures not requested stay None."""
    r = validate_state(rho)
    bd = bloch_decomposition(r)
    rep = MeasureReport(
        purity=hs_norm_sq(r),
        marginal_bloch_norm=bd.x_norm,
        branch="x_nonzero" if bd.x_norm > tol else "x_zero",
    )
    if "hs_min" in measures:
        rep.hs_min = hs_min(r, tol)
    if "f_min" in measures:
        rep.f_min = f_min(r, tol)
    if "negativity" in measures:
        rep.negativity = negativity(r)
    return rep


def qubit_marginal(rho):
    return partial_trace(rho, "qutrit")


def local_unitary(rho, ua, ub):
    u = kron(ua, ub)
    return u @ np.asarray(rho, dtype=complex) @ dagger(u)
