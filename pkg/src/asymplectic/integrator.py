"""Adaptive embedded Runge-Kutta integration of compiled fields.

The stepper is the Dormand-Prince 8(5,3) pair with the combined 5th/3rd order
error estimate, mirroring Hairer's dop853 step control.  It runs entirely
inside numba, so long sweeps (horizons ~ epsilon^{-c2}) stay affordable.

Two run modes share the driver:
  * plain: state is (a, alpha) in R^{2n}; supports uniform sampling, action
    drift tracking and domain-box exit detection.
  * augmented: state is (x, J) with J the (2n)x(2n) variational matrix,
    integrated alongside via Jdot = DF(x) J; used for generator flows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ._dop853_tableau import A, B, C, E3, E5, N_STAGES
from .compilekit import FieldTable, eval_components

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_DOMAIN_EXIT = 2
STATUS_MAX_STEPS = 3

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_ERROR_EXPONENT = -1.0 / 8.0


@njit(cache=True)
def _rhs(mode, n,
         fc, fnu, fno, fncre, fncim, fnexp, fdo, fdc, fdexp,
         jc, jnu, jno, jncre, jncim, jnexp, jdo, jdc, jdexp,
         y, out):
    twon = 2 * n
    eval_components(fc, fnu, fno, fncre, fncim, fnexp, fdo, fdc, fdexp,
                    y[:n], y[n:twon], out[:twon])
    if mode == 1:
        jac = np.empty(twon * twon)
        eval_components(jc, jnu, jno, jncre, jncim, jnexp, jdo, jdc, jdexp,
                        y[:n], y[n:twon], jac)
        for i in range(twon):
            for j in range(twon):
                acc = 0.0
                for k in range(twon):
                    acc += jac[i * twon + k] * y[twon + k * twon + j]
                out[twon + i * twon + j] = acc
    return out


@njit(cache=True)
def _drive(mode, n,
           fc, fnu, fno, fncre, fncim, fnexp, fdo, fdc, fdexp,
           jc, jnu, jno, jncre, jncim, jnexp, jdo, jdc, jdexp,
           y0, t0, t1, rtol, atol,
           sample_ts, samples_out,
           box_lo, box_hi, use_box,
           track_drift, max_steps):
    m = y0.shape[0]
    y = y0.copy()
    t = t0
    direction = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)

    nfev = 0
    naccept = 0
    nreject = 0
    max_drift2 = 0.0

    nsamples = sample_ts.shape[0]
    sample_idx = 0

    K = np.empty((N_STAGES + 1, m))
    ytmp = np.empty(m)
    ynew = np.empty(m)
    fnew = np.empty(m)

    def _t_tol(tt):
        return 1e-12 * max(1.0, abs(tt))

    # record samples that coincide with the start time
    while sample_idx < nsamples and abs(sample_ts[sample_idx] - t) <= _t_tol(t):
        for i in range(m):
            samples_out[sample_idx, i] = y[i]
        sample_idx += 1

    if span == 0.0:
        return STATUS_OK, t, y, naccept, nreject, nfev, 0.0

    _rhs(mode, n, fc, fnu, fno, fncre, fncim, fnexp, fdo, fdc, fdexp,
         jc, jnu, jno, jncre, jncim, jnexp, jdo, jdc, jdexp, y, K[0])
    nfev += 1

    # initial step size (Hairer's heuristic)
    d0 = 0.0
    d1 = 0.0
    for i in range(m):
        sc = atol + rtol * abs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (K[0, i] / sc) ** 2
    d0 = np.sqrt(d0 / m)
    d1 = np.sqrt(d1 / m)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, span)
    for i in range(m):
        ytmp[i] = y[i] + h0 * direction * K[0, i]
    _rhs(mode, n, fc, fnu, fno, fncre, fncim, fnexp, fdo, fdc, fdexp,
         jc, jnu, jno, jncre, jncim, jnexp, jdo, jdc, jdexp, ytmp, fnew)
    nfev += 1
    d2 = 0.0
    for i in range(m):
        sc = atol + rtol * abs(y[i])
        d2 += ((fnew[i] - K[0, i]) / sc) ** 2
    d2 = np.sqrt(d2 / m) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 8.0)
    h_opt = min(100.0 * h0, h1, span)

    steps = 0
    just_rejected = False
    while True:
        if steps >= max_steps:
            return STATUS_MAX_STEPS, t, y, naccept, nreject, nfev, np.sqrt(max_drift2)
        steps += 1

        remaining = abs(t1 - t)
        if remaining <= _t_tol(t):
            return STATUS_OK, t, y, naccept, nreject, nfev, np.sqrt(max_drift2)

        h_abs = min(h_opt, remaining)
        capped = h_abs < h_opt
        if sample_idx < nsamples:
            to_sample = abs(sample_ts[sample_idx] - t)
            if to_sample < h_abs:
                h_abs = to_sample
                capped = True
        if h_abs < 1e-14 * max(1.0, abs(t)):
            return STATUS_UNDERFLOW, t, y, naccept, nreject, nfev, np.sqrt(max_drift2)
        h = h_abs * direction

        # stages
        for s in range(1, N_STAGES):
            for i in range(m):
                acc = 0.0
                for q in range(s):
                    aq = A[s, q]
                    if aq != 0.0:
                        acc += aq * K[q, i]
                ytmp[i] = y[i] + h * acc
            _rhs(mode, n, fc, fnu, fno, fncre, fncim, fnexp, fdo, fdc, fdexp,
                 jc, jnu, jno, jncre, jncim, jnexp, jdo, jdc, jdexp, ytmp, K[s])
        for i in range(m):
            acc = 0.0
            for s in range(N_STAGES):
                bs = B[s]
                if bs != 0.0:
                    acc += bs * K[s, i]
            ynew[i] = y[i] + h * acc
        _rhs(mode, n, fc, fnu, fno, fncre, fncim, fnexp, fdo, fdc, fdexp,
             jc, jnu, jno, jncre, jncim, jnexp, jdo, jdc, jdexp, ynew, K[N_STAGES])
        nfev += N_STAGES

        # combined 5th/3rd order error estimate
        err5n2 = 0.0
        err3n2 = 0.0
        for i in range(m):
            e5 = 0.0
            e3 = 0.0
            for s in range(N_STAGES + 1):
                e5 += E5[s] * K[s, i]
                e3 += E3[s] * K[s, i]
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            e5 /= sc
            e3 /= sc
            err5n2 += e5 * e5
            err3n2 += e3 * e3
        denom = err5n2 + 0.01 * err3n2
        if denom > 0.0:
            error_norm = h_abs * err5n2 / np.sqrt(denom * m)
        else:
            error_norm = 0.0

        if error_norm < 1.0:
            if use_box:
                # locate a box crossing by linear interpolation inside the step
                theta = 2.0
                for i in range(n):
                    lo = box_lo[i]
                    hi = box_hi[i]
                    if ynew[i] < lo or ynew[i] > hi:
                        bound = lo if ynew[i] < lo else hi
                        denom_i = ynew[i] - y[i]
                        frac = 1.0 if denom_i == 0.0 else (bound - y[i]) / denom_i
                        if frac < theta:
                            theta = frac
                if theta <= 1.0:
                    theta = min(max(theta, 0.0), 1.0)
                    for i in range(m):
                        y[i] = y[i] + theta * (ynew[i] - y[i])
                    t_exit = t + theta * h
                    return (STATUS_DOMAIN_EXIT, t_exit, y, naccept, nreject,
                            nfev, np.sqrt(max_drift2))
            t = t + h
            for i in range(m):
                y[i] = ynew[i]
                K[0, i] = K[N_STAGES, i]
            naccept += 1

            if track_drift:
                d = 0.0
                for i in range(n):
                    d += (y[i] - y0[i]) ** 2
                if d > max_drift2:
                    max_drift2 = d
            while sample_idx < nsamples and abs(sample_ts[sample_idx] - t) <= _t_tol(t):
                for i in range(m):
                    samples_out[sample_idx, i] = y[i]
                sample_idx += 1

            if error_norm == 0.0:
                factor = _MAX_FACTOR
            else:
                factor = min(_MAX_FACTOR, _SAFETY * error_norm ** _ERROR_EXPONENT)
            if just_rejected:
                factor = min(factor, 1.0)
            just_rejected = False
            if capped:
                h_opt = max(h_opt, h_abs * factor)
            else:
                h_opt = h_abs * factor
        else:
            nreject += 1
            just_rejected = True
            h_opt = h_abs * max(_MIN_FACTOR, _SAFETY * error_norm ** _ERROR_EXPONENT)


_EMPTY_TABLE_CACHE: dict[int, FieldTable] = {}


def _empty_table(n: int) -> FieldTable:
    table = _EMPTY_TABLE_CACHE.get(n)
    if table is None:
        from .compilekit import compile_field

        table = compile_field([], n)
        _EMPTY_TABLE_CACHE[n] = table
    return table


@dataclass
class RunOutcome:
    status: int
    t_final: float
    y_final: np.ndarray
    samples: np.ndarray | None
    naccept: int
    nreject: int
    nfev: int
    max_drift: float

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


def run_field(field: FieldTable, x0, t0: float, t1: float, rtol: float, atol: float,
              sample_ts=None, box=None, track_drift: bool = False,
              max_steps: int = 1_000_000_000, jacobian: FieldTable | None = None,
              y_extra=None) -> RunOutcome:
    """Integrate a compiled field (optionally augmented with its variational flow).

    `sample_ts` must be monotone in the direction of integration and include
    only times inside [t0, t1].  `box` is an (n, 2) array of action bounds; a
    crossing terminates the run with STATUS_DOMAIN_EXIT.
    """
    n = field.n
    x0 = np.asarray(x0, float)
    mode = 0
    jac = jacobian if jacobian is not None else _empty_table(n)
    y0 = x0
    if jacobian is not None:
        mode = 1
        if y_extra is None:
            y_extra = np.eye(2 * n).ravel()
        y0 = np.concatenate([x0, np.asarray(y_extra, float)])

    if sample_ts is None:
        sample_ts = np.empty(0)
    else:
        sample_ts = np.asarray(sample_ts, float)
    samples = np.full((sample_ts.shape[0], y0.shape[0]), np.nan)

    if box is None:
        use_box = False
        box_lo = np.empty(0)
        box_hi = np.empty(0)
    else:
        use_box = True
        box_arr = np.asarray(box, float)
        box_lo = np.ascontiguousarray(box_arr[:, 0])
        box_hi = np.ascontiguousarray(box_arr[:, 1])

    status, t_final, y_final, naccept, nreject, nfev, max_drift = _drive(
        mode, n, *field.arrays, *jac.arrays,
        y0, float(t0), float(t1), float(rtol), float(atol),
        sample_ts, samples, box_lo, box_hi, use_box,
        track_drift, max_steps,
    )
    return RunOutcome(
        status=status,
        t_final=t_final,
        y_final=y_final,
        samples=samples if sample_ts.shape[0] else None,
        naccept=naccept,
        nreject=nreject,
        nfev=nfev,
        max_drift=max_drift,
    )
