"""Independent checks: serial-training reference, exact coarse propagator,
finite-difference gradients, and the verification suite behind ``verify``."""

import hashlib
import time
from dataclasses import dataclass

import numpy as np

from . import mgrit
from .network import (XOR_TOPOLOGY, flatten, gradient_direction, init_weights, loss,
                      mean_abs_error, phi_step, unflatten, xor_dataset)
from .rng import XorShift64Star
from .schedules import AlphaSchedule, TrainingPolicy, batch_at, get_preset


@dataclass
class EquivalenceResult:
    max_abs_diff: float
    at_step: int
    passed: bool
    tolerance: float


def _compare(a, b, tolerance, steps=None):
    diff = np.abs(np.asarray(a) - np.asarray(b)).max(axis=1)
    k = int(np.argmax(diff))
    at = int(steps[k]) if steps is not None else k
    worst = float(diff[k])
    return EquivalenceResult(worst, at, worst <= tolerance, tolerance)


def classic_xor_train(syn0, syn1, X, y, iterations, alpha=1.0, report_every=10000, log=None):
    """The classic three-layer XOR loop, transcribed line for line.

    Kept free of the library's network code on purpose.  ``log`` receives
    ``(j, mean_abs_error)`` every ``report_every`` steps.
    """
    def nonlin(x, deriv=False):
        if deriv:
            return x * (1 - x)
        return 1 / (1 + np.exp(-x))

    syn0 = np.array(syn0, dtype=np.float64)
    syn1 = np.array(syn1, dtype=np.float64)
    for j in range(iterations):
        l0 = X
        l1 = nonlin(np.dot(l0, syn0))
        l2 = nonlin(np.dot(l1, syn1))
        l2_error = y - l2
        if log is not None and j % report_every == 0:
            log(j, float(np.mean(np.abs(l2_error))))
        l2_delta = l2_error * nonlin(l2, deriv=True)
        l1_error = l2_delta.dot(syn1.T)
        l1_delta = l1_error * nonlin(l1, deriv=True)
        syn1 += alpha * l1.T.dot(l2_delta)
        syn0 += alpha * l0.T.dot(l1_delta)
    return syn0, syn1


def iterate_training(topology, dataset, alpha, n_steps, w0, policy="batch"):
    """Yield ``(i, w_i)`` for i = 0..n_steps of plain sequential training."""
    pol = TrainingPolicy(policy, dataset)
    w = np.array(w0, dtype=np.float64)
    yield 0, w
    for i in range(n_steps):
        w = phi_step(topology, w, batch_at(pol, 0, i), alpha)
        yield i + 1, w


def sequential_reference(topology, dataset, alpha, n_steps, seed=1, policy="batch",
                         init="uniform", w0=None):
    """Weights after 0..n_steps plain training steps, shape (n_steps+1, s)."""
    if w0 is None:
        w0 = init_weights(topology, seed, init)
    traj = np.empty((n_steps + 1, topology.weight_count))
    for i, w in iterate_training(topology, dataset, alpha, n_steps, w0, policy):
        traj[i] = w
    return traj


def check_mgrit_equivalence(report, reference, tolerance=1e-6):
    if not report.converged:
        raise ValueError("refusing to compare a solve that did not converge")
    return _compare(report.solution, reference, tolerance)


def exactness_check(n0, m, topology, dataset, alpha, seed=1, policy="batch",
                    mode="exact_composition", tolerance=1e-10, init="uniform"):
    """One two-level iteration; C-point error against serial training.

    With ``mode="exact_composition"`` the coarse step is ``m`` fine steps, so
    a single iteration must land on the serial solution.  ``rediscretized``
    is the same check with the ordinary coarse step, for contrast.
    """
    pol = TrainingPolicy(policy, dataset)
    h = mgrit.build_hierarchy(topology, pol, n0, m, max_coarse=n0,
                              alpha_schedule=AlphaSchedule("constant", alpha),
                              cycle="two-level", coarse_propagator_mode=mode)
    w0 = init_weights(topology, seed, init)
    mgrit.initialize(h, w0)
    mgrit.run_cycle(h)
    ref = sequential_reference(topology, dataset, alpha, n0, w0=w0, policy=policy)
    cidx = h.levels[0].c_points()
    return _compare(h.levels[0].w[cidx], ref[cidx], tolerance, steps=cidx)


@dataclass
class GradientCheckResult:
    max_rel_error: float
    passed: bool
    tolerance: float
    draws: int


def finite_difference_direction(topology, w, batch, step=1e-6):
    """Central differences of ``-E`` in every weight."""
    w = np.array(w, dtype=np.float64)
    out = np.empty_like(w)
    for j in range(w.shape[0]):
        wp = w.copy()
        wm = w.copy()
        wp[j] += step
        wm[j] -= step
        out[j] = -(loss(topology, wp, batch) - loss(topology, wm, batch)) / (2 * step)
    return out


def gradient_check(topology, batch, draws=100, seed=12345, step=1e-6, tolerance=1e-6,
                   perturbation=0.0):
    """Backprop against finite differences on random weight draws.

    ``perturbation`` is added to every backprop component; it exists so the
    check can be shown to fail on a corrupted gradient.
    """
    rng = XorShift64Star(seed)
    worst = 0.0
    for _ in range(draws):
        w = rng.uniform(-1.0, 1.0, topology.weight_count)
        g = gradient_direction(topology, w, batch) + perturbation
        fd = finite_difference_direction(topology, w, batch, step)
        rel = np.abs(g - fd) / np.maximum(1.0, np.abs(g))
        worst = max(worst, float(rel.max()))
    return GradientCheckResult(worst, worst <= tolerance, tolerance, draws)


def residual_history_hash(report):
    h = hashlib.sha256()
    for r in report.residual_norms:
        h.update(np.float64(r).tobytes())
    return h.hexdigest()


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _timed(name, fn):
    t0 = time.perf_counter()
    passed, detail = fn()
    return CheckResult(name, passed, detail, time.perf_counter() - t0)


def verification_suite(seed=1, gradient_perturbation=0.0, serial_steps=60000):
    """Run every oracle check; returns a list of CheckResult."""
    topo, data = XOR_TOPOLOGY, xor_dataset()
    batch = data.batch()
    results = []

    def grad():
        res = gradient_check(topo, batch, perturbation=gradient_perturbation)
        return res.passed, "max rel err %.3e (tol %.0e, %d draws)" % (
            res.max_rel_error, res.tolerance, res.draws)

    def classic():
        w0 = init_weights(topo, seed)
        syn0, syn1 = (m.copy() for m in unflatten(topo, w0))
        ref = flatten(classic_xor_train(syn0, syn1, data.X, data.Y, 1000))
        ours = sequential_reference(topo, data, 1.0, 1000, w0=w0)[-1]
        diff = float(np.abs(ref - ours).max())
        return diff <= 1e-12, "max diff vs transcribed loop after 1000 steps %.3e" % diff

    def serial():
        w = sequential_reference(topo, data, 1.0, serial_steps, seed=seed)[-1]
        err = mean_abs_error(topo, w, batch)
        return err < 0.01, "mean abs error after %d steps %.5f" % (serial_steps, err)

    def exact():
        worst = 0.0
        ok = True
        for n0, m in ((8, 2), (16, 2), (16, 4), (64, 4)):
            res = exactness_check(n0, m, topo, data, 1.0, seed=seed)
            worst = max(worst, res.max_abs_diff)
            ok = ok and res.passed
        return ok, "worst C-point diff %.3e (tol 1e-10)" % worst

    def equivalence():
        preset = get_preset("solver1")
        h = mgrit.build_hierarchy(topo, TrainingPolicy("batch", data), 100, preset.m, 10,
                                  preset.schedule, "two-level", "fcf")
        rep = mgrit.solve(h, mgrit.SolverParams(seed=seed))
        if not rep.converged:
            return False, "solver1 two-level N0=100 did not converge"
        ref = sequential_reference(topo, data, 1.0, 100, seed=seed)
        res = check_mgrit_equivalence(rep, ref, 1e-6)
        return res.passed, "max diff %.3e at step %d (%d iterations)" % (
            res.max_abs_diff, res.at_step, rep.iterations)

    def determinism():
        preset = get_preset("solver1")
        hashes = []
        for workers in (1, 4):
            h = mgrit.build_hierarchy(topo, TrainingPolicy("batch", data), 200, preset.m, 10,
                                      preset.schedule, "v", "fcf", workers=workers)
            hashes.append(residual_history_hash(mgrit.solve(h, mgrit.SolverParams(seed=seed))))
        return hashes[0] == hashes[1], "residual history sha256 %s / %s" % (
            hashes[0][:12], hashes[1][:12])

    for name, fn in (("gradient", grad), ("classic-loop", classic), ("serial-training", serial),
                     ("exactness", exact), ("equivalence", equivalence),
                     ("determinism", determinism)):
        results.append(_timed(name, fn))
    return results
