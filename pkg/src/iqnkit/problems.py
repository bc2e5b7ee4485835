"""Synthetic black-box fixed-point operators.

A :class:`FixedPointProblem` plays the role of the composite solver call
``x~ = H(x)`` of a partitioned simulation: ``H(x) = A x + c_t`` for the
affine kind and ``A x + c_t + eps * tanh(x)`` for the perturbed kind, with a
forcing ``c_t`` per time step.  The generators build ``A = Q D Q^T`` from a
sign-alternating spectrum whose negative extreme mimics the added-mass
instability: plain fixed-point iteration diverges once its magnitude
exceeds one.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from iqnkit.errors import DimensionMismatch

AFFINE = "affine"
NONLINEAR = "nonlinear"
# positive eigenvalues stay below one so that relaxation can converge at all
POSITIVE_CAP = 0.8


class DenseLinearPart:
    def __init__(self, A):
        A = np.array(A, dtype=float, ndmin=2)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        self.A = A
        self.m = A.shape[0]
        shifted = np.eye(self.m) - A
        with warnings.catch_warnings():
            # singularity is reported below with a clearer message
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            self._lu = scipy.linalg.lu_factor(shifted)
        if np.min(np.abs(np.diag(self._lu[0]))) <= 1e-13 * max(1.0, np.abs(shifted).max()):
            raise ValueError("I - A is singular; the fixed point is not unique")
        self.spectral_radius = float(np.max(np.abs(np.linalg.eigvals(A))))

    def matvec(self, x):
        return self.A @ x

    def solve_shifted(self, c):
        return scipy.linalg.lu_solve(self._lu, c)

    def dense(self):
        return self.A.copy()


class ReflectedSpectrum:
    """``A = Q diag(d) Q^T`` with ``Q`` a product of Householder reflections.

    Applying ``A`` or ``(I - A)^{-1}`` costs O(m * len(reflectors)), which
    keeps large interface dimensions cheap to evaluate.
    """

    def __init__(self, d, reflectors):
        self.d = np.asarray(d, dtype=float)
        self.reflectors = np.asarray(reflectors, dtype=float)
        self.m = self.d.size
        if np.any(self.d == 1.0):
            raise ValueError("an eigenvalue equal to one makes I - A singular")
        self.spectral_radius = float(np.max(np.abs(self.d)))

    def _q(self, x):
        for v in self.reflectors[::-1]:
            x = x - 2.0 * v * (v @ x)
        return x

    def _qt(self, x):
        for v in self.reflectors:
            x = x - 2.0 * v * (v @ x)
        return x

    def matvec(self, x):
        return self._q(self.d * self._qt(x))

    def solve_shifted(self, c):
        return self._q(self._qt(c) / (1.0 - self.d))

    def dense(self):
        Q = np.column_stack([self._q(e) for e in np.eye(self.m)])
        return (Q * self.d) @ Q.T


@dataclass(frozen=True, eq=False)
class FixedPointProblem:
    m: int
    kind: str
    linear: object
    c_schedule: tuple
    epsilon_nl: float = 0.0
    seed: object = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in (AFFINE, NONLINEAR):
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.epsilon_nl < 0:
            raise ValueError("epsilon_nl must be non-negative")
        if not self.c_schedule:
            raise ValueError("the forcing schedule needs at least one step")
        for c in self.c_schedule:
            if c.shape != (self.m,):
                raise DimensionMismatch(f"forcing of shape {c.shape} for m={self.m}")

    @property
    def n_steps(self):
        return len(self.c_schedule)

    @property
    def spectral_radius(self):
        return self.linear.spectral_radius

    @property
    def A(self):
        return self.linear.dense()

    def apply(self, step, x):
        """One evaluation of the black-box operator for time step ``step``."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.m,):
            raise DimensionMismatch(f"x of shape {x.shape} for m={self.m}")
        y = self.linear.matvec(x) + self.c_schedule[step]
        if self.kind == NONLINEAR and self.epsilon_nl != 0.0:
            y = y + self.epsilon_nl * np.tanh(x)
        return y

    def exact_solution(self, step):
        """``(I - A)^{-1} c_t`` for affine problems, None otherwise."""
        if self.kind == NONLINEAR and self.epsilon_nl != 0.0:
            return None
        return self.linear.solve_shifted(self.c_schedule[step])


def affine_problem(A, forcing, epsilon_nl=0.0, seed=None):
    """Problem from an explicit matrix; ``forcing`` is one vector or a list
    of per-step vectors."""
    linear = DenseLinearPart(A)
    forcing = np.asarray(forcing, dtype=float)
    if forcing.ndim == 1:
        forcing = forcing[None, :]
    kind = NONLINEAR if epsilon_nl else AFFINE
    schedule = tuple(np.array(c) for c in forcing)
    params = {"generator": "explicit", "matrix": linear.A.tolist(), "forcing": forcing.tolist()}
    return FixedPointProblem(linear.m, kind, linear, schedule, float(epsilon_nl), seed, params)


def added_mass_spectrum(m, rho_spectral, n_levels=None):
    """Sign-alternating eigenvalues, most negative ``-rho_spectral``.

    Magnitudes fall linearly from 1 to 0.1 (relative) over ``n_levels``
    distinct values that repeat cyclically over the ``m`` entries.
    """
    if m < 1:
        raise ValueError("m must be positive")
    if rho_spectral <= 0:
        raise ValueError("rho_spectral must be positive")
    n_levels = m if n_levels is None else min(int(n_levels), m)
    if n_levels < 1:
        raise ValueError("n_levels must be positive")
    scale = np.linspace(1.0, 0.1, n_levels)
    levels = np.where(
        np.arange(n_levels) % 2 == 0,
        -rho_spectral * scale,
        min(rho_spectral, POSITIVE_CAP) * scale,
    )
    return levels[np.arange(m) % n_levels]


def _random_reflectors(rng, m, n_reflectors):
    n = min(m, 16) if n_reflectors is None else int(n_reflectors)
    V = rng.standard_normal((n, m))
    return V / np.linalg.norm(V, axis=1, keepdims=True)


def _unit(rng, m):
    v = rng.standard_normal(m)
    return v / np.linalg.norm(v)


def make_added_mass_surrogate(m, rho_spectral, seed=0, n_steps=1, n_levels=None,
                              n_reflectors=None, epsilon_nl=0.0):
    """Random ``A = Q D Q^T`` with spectral radius ``rho_spectral``.

    The forcing drifts smoothly, ``c_t = c_1 + 0.5 sin(2 pi t / n_steps) c_2``,
    with unit vectors ``c_1, c_2``.
    """
    rng = np.random.default_rng(seed)
    d = added_mass_spectrum(m, rho_spectral, n_levels)
    linear = ReflectedSpectrum(d, _random_reflectors(rng, m, n_reflectors))
    c1, c2 = _unit(rng, m), _unit(rng, m)
    schedule = tuple(c1 + 0.5 * np.sin(2 * np.pi * t / n_steps) * c2 for t in range(n_steps))
    params = {
        "generator": "added_mass", "m": m, "rho_spectral": rho_spectral, "seed": seed,
        "n_steps": n_steps, "n_levels": n_levels, "n_reflectors": n_reflectors,
        "epsilon_nl": epsilon_nl,
    }
    kind = NONLINEAR if epsilon_nl else AFFINE
    return FixedPointProblem(m, kind, linear, schedule, float(epsilon_nl), seed, params)


def pulse_amplitude(t, n_steps):
    """A single sine-squared bump over the first quarter of the steps."""
    width = max(1, -(-n_steps // 4))
    if t >= width:
        return 0.0
    return float(np.sin(np.pi * (t + 1) / (width + 1)) ** 2)


def make_pulse_sequence(m, n_steps, seed=0, rho_spectral=1.2, n_levels=None,
                        n_reflectors=None, epsilon_nl=0.0):
    """Fixed operator with forcing ``g(t) c`` that peaks early and then vanishes."""
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    rng = np.random.default_rng(seed)
    d = added_mass_spectrum(m, rho_spectral, n_levels)
    linear = ReflectedSpectrum(d, _random_reflectors(rng, m, n_reflectors))
    c = _unit(rng, m)
    schedule = tuple(pulse_amplitude(t, n_steps) * c for t in range(n_steps))
    params = {
        "generator": "pulse", "m": m, "rho_spectral": rho_spectral, "seed": seed,
        "n_steps": n_steps, "n_levels": n_levels, "n_reflectors": n_reflectors,
        "epsilon_nl": epsilon_nl,
    }
    kind = NONLINEAR if epsilon_nl else AFFINE
    return FixedPointProblem(m, kind, linear, schedule, float(epsilon_nl), seed, params)


def problem_from_params(params):
    """Rebuild a problem from its ``params`` mapping."""
    params = dict(params)
    generator = params.pop("generator")
    if generator == "explicit":
        return affine_problem(params["matrix"], params["forcing"], params.get("epsilon_nl", 0.0))
    if generator == "added_mass":
        return make_added_mass_surrogate(**params)
    if generator == "pulse":
        return make_pulse_sequence(**params)
    raise ValueError(f"unknown problem generator {generator!r}")
