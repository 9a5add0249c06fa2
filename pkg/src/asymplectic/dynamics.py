"""Hamiltonian vector fields, the strong-Hamiltonianity classifier, numerical
integration and conservation diagnostics.

In action-angle coordinates the Hamiltonian vector field of g(a, alpha) is

    X^a = -dg/dalpha,      X^alpha = dg/da + A dg/dalpha

so the equations of motion of k(a) + eps f(a, alpha) read

    adot = -eps df/dalpha,
    alphadot = dk/da + eps df/da + eps A df/dalpha.

Angles are integrated on the universal cover; they are reduced mod 2 pi only
when a trajectory is exported.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .compilekit import FieldTable, compile_field, compile_scalar
from .errors import (
    DimensionMismatchError,
    DomainExitError,
    IntegrationError,
    StepSizeUnderflowError,
)
from .fourier import (
    FourierSeries,
    MultiIndex,
    differentiate_action,
    differentiate_angle,
)
from .integrator import (
    STATUS_DOMAIN_EXIT,
    STATUS_MAX_STEPS,
    STATUS_OK,
    STATUS_UNDERFLOW,
    run_field,
)
from .poly import ActionPolynomial, as_fraction
from .structure import CTensorField, StructureMatrixField

Box = tuple[tuple[Fraction, Fraction], ...]


def make_box(intervals) -> Box:
    out = []
    for lo, hi in intervals:
        lo = as_fraction(lo)
        hi = as_fraction(hi)
        if not lo < hi:
            raise ValueError(f"degenerate interval [{lo}, {hi}]")
        out.append((lo, hi))
    return tuple(out)


def box_array(box: Box) -> np.ndarray:
    return np.array([[float(lo), float(hi)] for lo, hi in box])


def box_center(box: Box) -> tuple[Fraction, ...]:
    return tuple((lo + hi) / 2 for lo, hi in box)


@dataclass(frozen=True)
class SystemDefinition:
    """A nearly-integrable system k(a) + eps f(a, alpha) with structure matrix A."""

    n: int
    k: ActionPolynomial
    f: FourierSeries
    A: StructureMatrixField
    epsilon: Fraction
    domain: Box

    def __post_init__(self):
        if not (self.k.n == self.f.n == self.A.n == self.n):
            raise DimensionMismatchError("system components disagree on dimension")
        if len(self.domain) != self.n:
            raise DimensionMismatchError("domain box dimension mismatch")
        object.__setattr__(self, "epsilon", as_fraction(self.epsilon))
        object.__setattr__(self, "domain", make_box(self.domain))

    def frequency_map(self) -> tuple[ActionPolynomial, ...]:
        """omega = grad k, one polynomial per action."""
        return self.k.gradient()

    def hamiltonian(self) -> FourierSeries:
        return FourierSeries.from_polynomial(self.k) + self.f * self.epsilon

    def with_epsilon(self, epsilon) -> "SystemDefinition":
        return replace(self, epsilon=as_fraction(epsilon))

    def vector_field(self) -> "VectorFieldSpec":
        field = hamiltonian_vector_field(self.hamiltonian(), self.A)
        return replace(field, domain=self.domain)

    def omega_at(self, a) -> np.ndarray:
        return np.array([p(a) for p in self.frequency_map()])


@dataclass(frozen=True)
class VectorFieldSpec:
    """Symbolic vector field with exact Fourier-series components."""

    n: int
    action: tuple[FourierSeries, ...]
    angle: tuple[FourierSeries, ...]
    hamiltonian: FourierSeries | None = None
    domain: Box | None = None

    def __post_init__(self):
        if len(self.action) != self.n or len(self.angle) != self.n:
            raise DimensionMismatchError("component count must equal n")

    @cached_property
    def compiled(self) -> FieldTable:
        return compile_field(list(self.action) + list(self.angle), self.n)

    @cached_property
    def compiled_hamiltonian(self) -> FieldTable | None:
        if self.hamiltonian is None:
            return None
        return compile_scalar(self.hamiltonian, self.n)

    def __call__(self, state) -> np.ndarray:
        """Numeric rates (adot, alphadot) at a state (a, alpha)."""
        x = as_state(state, self.n)
        out = np.empty(2 * self.n)
        table = self.compiled
        from .compilekit import eval_state

        eval_state(*table.arrays, self.n, x, out)
        return out

    def energy(self, state) -> float:
        if self.hamiltonian is None:
            raise ValueError("field carries no Hamiltonian")
        x = as_state(state, self.n)
        table = self.compiled_hamiltonian
        return float(table.evaluate(x[: self.n], x[self.n :])[0])


@dataclass(frozen=True)
class IntegratorStats:
    naccept: int
    nreject: int
    nfev: int
    rtol: float
    atol: float


@dataclass(frozen=True)
class TrajectoryRecord:
    """Uniformly sampled orbit with energy diagnostics.

    Sample times are strictly increasing; backward runs are stored reversed.
    Angles are reduced to [0, 2 pi) here, while the integration itself works
    on the universal cover.
    """

    times: np.ndarray
    actions: np.ndarray
    angles: np.ndarray
    energies: np.ndarray | None
    stats: IntegratorStats

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")

    @property
    def n(self) -> int:
        return self.actions.shape[1]

    def state(self, index: int) -> np.ndarray:
        return np.concatenate([self.actions[index], self.angles[index]])

    def to_csv(self, path) -> None:
        """CSV export: t,a1..an,alpha1..alphan,energy with 17 significant digits."""
        n = self.n
        header = (
            ["t"]
            + [f"a{i + 1}" for i in range(n)]
            + [f"alpha{i + 1}" for i in range(n)]
            + ["energy"]
        )
        close = False
        if hasattr(path, "write"):
            handle = path
        else:
            handle = open(path, "w")
            close = True
        try:
            handle.write(",".join(header) + "\n")
            for i, t in enumerate(self.times):
                row = [t, *self.actions[i], *self.angles[i]]
                energy = self.energies[i] if self.energies is not None else float("nan")
                row.append(energy)
                handle.write(",".join(f"{v:.17g}" for v in row) + "\n")
        finally:
            if close:
                handle.close()


def as_state(state, n: int) -> np.ndarray:
    """Coerce a state given as (a, alpha) pair or flat length-2n vector."""
    if isinstance(state, (tuple, list)) and len(state) == 2:
        a, alpha = state
        a = np.asarray(a, float)
        alpha = np.asarray(alpha, float)
        if a.shape == (n,) and alpha.shape == (n,):
            return np.concatenate([a, alpha])
    x = np.asarray(state, float).ravel()
    if x.shape != (2 * n,):
        raise DimensionMismatchError(f"state must have 2n = {2 * n} components")
    return x


def hamiltonian_vector_field(g: FourierSeries, A: StructureMatrixField) -> VectorFieldSpec:
    """X^a = -dg/dalpha, X^alpha = dg/da + A dg/dalpha, as exact series."""
    if g.n != A.n:
        raise DimensionMismatchError("Hamiltonian and structure dimension mismatch")
    n = g.n
    dalpha = [differentiate_angle(g, i) for i in range(n)]
    action = tuple(-dalpha[i] for i in range(n))
    angle = []
    for i in range(n):
        comp = differentiate_action(g, i)
        for j in range(n):
            entry = A.entry(i, j)
            if entry.is_zero or dalpha[j].is_zero:
                continue
            comp = comp + dalpha[j] * entry
        angle.append(comp)
    return VectorFieldSpec(n=n, action=action, angle=tuple(angle), hamiltonian=g)


def divergence(field: VectorFieldSpec) -> FourierSeries:
    """Exact series sum_i (dX^a_i/da_i + dX^alpha_i/dalpha_i)."""
    n = field.n
    out = FourierSeries.zero(n)
    for i in range(n):
        out = out + differentiate_action(field.action[i], i)
        out = out + differentiate_angle(field.angle[i], i)
    return out


@dataclass(frozen=True)
class Witness:
    """One violation of the strong-Hamiltonianity condition.

    `offending` is the complex polynomial pair C_ij. nu * ghat_nu that failed
    to vanish identically.
    """

    i: int
    j: int
    nu: MultiIndex
    offending: tuple[ActionPolynomial, ActionPolynomial]


@dataclass(frozen=True)
class StrongHamiltonianVerdict:
    verdict: bool
    witnesses: tuple[Witness, ...]

    def __post_init__(self):
        assert self.verdict == (not self.witnesses)

    def __bool__(self):
        return self.verdict


def is_strongly_hamiltonian(g: FourierSeries, C: CTensorField) -> StrongHamiltonianVerdict:
    """Test sum_k C_ijk nu_k ghat_nu = 0 as polynomial identities.

    Checks every stored harmonic against every ordered pair i < j and returns
    all violations as witnesses.
    """
    if g.n != C.n:
        raise DimensionMismatchError("series and tensor dimension mismatch")
    n = g.n
    witnesses = []
    for nu, (re, im) in g.sorted_items():
        if all(v == 0 for v in nu):
            continue
        for i in range(n):
            for j in range(i + 1, n):
                contraction = ActionPolynomial.zero(n)
                for k in range(n):
                    if nu[k] == 0:
                        continue
                    p = C.entry(i, j, k)
                    if not p.is_zero:
                        contraction = contraction + p * nu[k]
                if contraction.is_zero:
                    continue
                off_re = contraction * re
                off_im = contraction * im
                if not (off_re.is_zero and off_im.is_zero):
                    witnesses.append(Witness(i, j, nu, (off_re, off_im)))
    return StrongHamiltonianVerdict(verdict=not witnesses, witnesses=tuple(witnesses))


def integrate(field: VectorFieldSpec, x0, t_end: float, rtol: float = 1e-10,
              atol: float = 1e-12, sample_count: int = 1000,
              domain: Box | None = None, max_steps: int = 1_000_000_000) -> TrajectoryRecord:
    """Adaptive high-order integration with uniform output samples.

    `t_end` may be negative (backward integration).  Raises DomainExitError or
    StepSizeUnderflowError on failure, with the failure time attached.
    """
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    if sample_count < 2:
        raise ValueError("need at least two samples")
    n = field.n
    x = as_state(x0, n)
    box = domain if domain is not None else field.domain
    box_arr = box_array(box) if box is not None else None
    sample_ts = np.linspace(0.0, float(t_end), sample_count)
    outcome = run_field(
        field.compiled, x, 0.0, float(t_end), rtol, atol,
        sample_ts=sample_ts, box=box_arr, max_steps=max_steps,
    )
    if outcome.status == STATUS_UNDERFLOW:
        raise StepSizeUnderflowError(outcome.t_final, outcome.y_final)
    if outcome.status == STATUS_DOMAIN_EXIT:
        raise DomainExitError(outcome.t_final, outcome.y_final)
    if outcome.status == STATUS_MAX_STEPS:
        raise IntegrationError(f"step budget exhausted at t = {outcome.t_final:.6g}")
    assert outcome.status == STATUS_OK

    samples = outcome.samples
    times = sample_ts
    if t_end < 0:  # store backward runs in increasing time order
        times = times[::-1].copy()
        samples = samples[::-1].copy()
    actions = samples[:, :n].copy()
    angles = np.mod(samples[:, n:], 2.0 * np.pi)

    energies = None
    table = field.compiled_hamiltonian
    if table is not None:
        energies = np.array(
            [table.evaluate(samples[i, :n], samples[i, n:])[0] for i in range(samples.shape[0])]
        )
    stats = IntegratorStats(
        naccept=outcome.naccept,
        nreject=outcome.nreject,
        nfev=outcome.nfev,
        rtol=rtol,
        atol=atol,
    )
    return TrajectoryRecord(times=times, actions=actions, angles=angles,
                            energies=energies, stats=stats)


def energy_drift(record: TrajectoryRecord) -> float:
    """max_t |E_t - E_0| over the record samples."""
    if record.energies is None:
        raise ValueError("record carries no energy samples")
    if record.energies.shape[0] < 2:
        raise ValueError("need at least two samples")
    return float(np.max(np.abs(record.energies - record.energies[0])))
