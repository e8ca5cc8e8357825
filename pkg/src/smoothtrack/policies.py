"""Online decision policies and the simulation loop.

The loop drives a strict two-phase protocol per slot: observe(tau_t, f_t),
act(), then reveal(u_t).  The hidden target is only handed over in the
reveal phase, so a policy cannot peek at it before committing; the single
exception is the informed greedy benchmark, which is explicitly semi-online
and runs with ``relaxed_revelation=True``.

Policies:

* ``iga``   informed greedy: per-slot argmin with the true hidden target.
* ``best``  blind; replays the informed chain from revealed targets and
  solves the perturbation-free argmin on the informed history.
* ``naive`` blind greedy on its own history (ablation baseline).
* ``pga``   fully trusts a prediction stream of the hidden target.
* ``cort``  clips the prediction to a trust ball of radius theta*D_t
  around the blind action, with D updated from realized errors.

``run_*`` wrappers dispatch to the compiled/NumPy chains for quadratic
perturbations and to the reference policy classes otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionError, ProtocolError
from .model import (Array, FunctionSpec, HistoryBuffer, Instance,
                    ProblemParams, RunResult, trajectory_cost)
from .solvers import DEFAULT_SETTINGS, SolverSettings, StepProblem, per_step_argmin


@dataclass
class Observation:
    """Pre-action information for one slot.  ``hidden_target`` raises unless
    the loop runs in relaxed-revelation mode."""

    t: int
    tau: Array
    f: FunctionSpec
    _pre_revealed: Array | None = None

    @property
    def hidden_target(self) -> Array:
        if self._pre_revealed is None:
            raise ProtocolError(
                f"hidden target for slot {self.t} is not available before acting")
        return self._pre_revealed


class Policy:
    name = "policy"
    needs_hidden_target = False

    def observe(self, obs: Observation) -> None:
        raise NotImplementedError

    def act(self) -> Array:
        raise NotImplementedError

    def reveal(self, u: Array) -> None:
        pass

    def diagnostics(self) -> dict:
        return {}


def simulate(policy: Policy, instance: Instance, *,
             relaxed_revelation: bool = False) -> RunResult:
    """Run a policy over an instance under the revelation protocol.

    Emitting an action outside the domain box raises ProtocolError naming
    the slot.  Costs are evaluated on the recorded trajectory.
    """
    T, d = instance.T, instance.d
    domain = instance.params.domain
    actions = np.empty((T, d))
    for t in range(T):
        obs = Observation(
            t=t + 1, tau=instance.tau[t], f=instance.function_at(t),
            _pre_revealed=instance.u[t] if relaxed_revelation else None)
        policy.observe(obs)
        x = np.asarray(policy.act(), dtype=np.float64).reshape(-1)
        if x.shape != (d,):
            raise DimensionError(
                f"policy {policy.name!r} returned shape {x.shape}, expected ({d},)")
        if domain is not None and not domain.contains(x):
            raise ProtocolError(
                f"policy {policy.name!r} left the action domain at slot {t + 1}")
        actions[t] = x
        policy.reveal(instance.u[t])
    result = trajectory_cost(instance, actions, algorithm=policy.name)
    result.extras.update(policy.diagnostics())
    return result


class _InformedReplay:
    """Reconstruction of the informed chain, advanced one slot behind.

    After u_t is revealed the informed action for slot t is exactly
    computable; the replay stores it so blind policies can anchor on the
    informed history and previous action."""

    def __init__(self, params: ProblemParams, settings: SolverSettings):
        self.params = params
        self.settings = settings
        self.hist = HistoryBuffer(params.w, params.d)
        self.actions: list[Array] = []

    def advance(self, obs: Observation, u: Array) -> None:
        prob = StepProblem(params=self.params, h=self.hist.sum(),
                           z=self.hist.prev, tau=obs.tau, f=obs.f, u=u)
        x = per_step_argmin(prob, self.settings)
        self.hist.push(x)
        self.actions.append(x)


class InformedGreedyPolicy(Policy):
    name = "iga"
    needs_hidden_target = True

    def __init__(self, params: ProblemParams,
                 settings: SolverSettings = DEFAULT_SETTINGS):
        self.params = params
        self.settings = settings
        self.hist = HistoryBuffer(params.w, params.d)
        self._obs: Observation | None = None

    def observe(self, obs: Observation) -> None:
        self._obs = obs

    def act(self) -> Array:
        obs = self._obs
        prob = StepProblem(params=self.params, h=self.hist.sum(),
                           z=self.hist.prev, tau=obs.tau, f=obs.f,
                           u=obs.hidden_target)
        x = per_step_argmin(prob, self.settings)
        self.hist.push(x)
        return x


class BestPolicy(Policy):
    name = "best"

    def __init__(self, params: ProblemParams,
                 settings: SolverSettings = DEFAULT_SETTINGS):
        self.params = params
        self.settings = settings
        self.replay = _InformedReplay(params, settings)
        self._obs: Observation | None = None

    def observe(self, obs: Observation) -> None:
        self._obs = obs

    def act(self) -> Array:
        prob = StepProblem(params=self.params, h=self.replay.hist.sum(),
                           z=self.replay.hist.prev, tau=self._obs.tau)
        return per_step_argmin(prob, self.settings)

    def reveal(self, u: Array) -> None:
        self.replay.advance(self._obs, u)

    def diagnostics(self) -> dict:
        return {"informed_actions": np.asarray(self.replay.actions)}


class NaiveGreedyPolicy(Policy):
    """Blind greedy on its own history; no informed replay."""

    name = "naive"

    def __init__(self, params: ProblemParams,
                 settings: SolverSettings = DEFAULT_SETTINGS):
        self.params = params
        self.settings = settings
        self.hist = HistoryBuffer(params.w, params.d)
        self._obs: Observation | None = None

    def observe(self, obs: Observation) -> None:
        self._obs = obs

    def act(self) -> Array:
        prob = StepProblem(params=self.params, h=self.hist.sum(),
                           z=self.hist.prev, tau=self._obs.tau)
        x = per_step_argmin(prob, self.settings)
        self.hist.push(x)
        return x


class PredictionGreedyPolicy(Policy):
    name = "pga"

    def __init__(self, params: ProblemParams, predictions: Array,
                 settings: SolverSettings = DEFAULT_SETTINGS):
        self.params = params
        self.settings = settings
        self.predictions = np.atleast_2d(np.asarray(predictions, dtype=np.float64))
        self.hist = HistoryBuffer(params.w, params.d)
        self._obs: Observation | None = None

    def observe(self, obs: Observation) -> None:
        self._obs = obs

    def act(self) -> Array:
        obs = self._obs
        prob = StepProblem(params=self.params, h=self.hist.sum(),
                           z=self.hist.prev, tau=obs.tau, f=obs.f,
                           u=self.predictions[obs.t - 1])
        x = per_step_argmin(prob, self.settings)
        self.hist.push(x)
        return x


@dataclass
class CortState:
    """Trust radius for clipping predictions around the blind action."""

    theta: float
    d_sq: float = 0.0

    def __post_init__(self):
        if self.theta < 0:
            raise ValueError("theta must be nonnegative")

    @property
    def radius(self) -> float:
        return self.theta * math.sqrt(max(self.d_sq, 0.0))

    def clip(self, u_hat: Array, x: Array) -> tuple[Array, bool]:
        """Pull u_hat into the ball of radius theta*D around x.  Returns the
        clipped target and whether the clip branch was taken."""
        gap = u_hat - x
        dist = float(np.linalg.norm(gap))
        r = self.radius
        if dist >= r:
            if dist > 0.0:
                return x + (r / dist) * gap, True
            return x.copy(), True
        return np.asarray(u_hat, dtype=np.float64).copy(), False

    def absorb(self, u: Array, x: Array, u_tilde: Array) -> None:
        """Grow the radius from the realized gap; at theta = 0 the clipped
        term is identically zero (the clip pins u_tilde to x)."""
        sub = 0.0
        if self.theta > 0.0:
            pull = u_tilde - x
            sub = float(np.dot(pull, pull)) / (self.theta * self.theta)
        err = u - x
        self.d_sq = self.d_sq + float(np.dot(err, err)) - sub


class CortPolicy(Policy):
    name = "cort"

    def __init__(self, params: ProblemParams, predictions: Array, theta: float,
                 settings: SolverSettings = DEFAULT_SETTINGS):
        self.params = params
        self.settings = settings
        self.predictions = np.atleast_2d(np.asarray(predictions, dtype=np.float64))
        self.state = CortState(theta)
        self.replay = _InformedReplay(params, settings)
        self._obs: Observation | None = None
        self._pending: tuple[Array, Array] | None = None
        self._diag: dict[str, list] = {k: [] for k in
                                       ("best_actions", "u_tilde", "d_sq",
                                        "clip_active")}

    def observe(self, obs: Observation) -> None:
        self._obs = obs

    def act(self) -> Array:
        obs = self._obs
        h = self.replay.hist.sum()
        z = self.replay.hist.prev
        x_blind = per_step_argmin(
            StepProblem(params=self.params, h=h, z=z, tau=obs.tau), self.settings)
        u_tilde, clipped = self.state.clip(self.predictions[obs.t - 1], x_blind)
        x = per_step_argmin(
            StepProblem(params=self.params, h=h, z=z, tau=obs.tau, f=obs.f,
                        u=u_tilde), self.settings)
        self._diag["best_actions"].append(x_blind)
        self._diag["u_tilde"].append(u_tilde)
        self._diag["d_sq"].append(self.state.d_sq)
        self._diag["clip_active"].append(clipped)
        self._pending = (x_blind, u_tilde)
        return x

    def reveal(self, u: Array) -> None:
        x_blind, u_tilde = self._pending
        self.state.absorb(u, x_blind, u_tilde)
        self.replay.advance(self._obs, u)

    def diagnostics(self) -> dict:
        return {
            "theta": self.state.theta,
            "best_actions": np.asarray(self._diag["best_actions"]),
            "informed_actions": np.asarray(self.replay.actions),
            "u_tilde": np.asarray(self._diag["u_tilde"]),
            "d_sq": np.asarray(self._diag["d_sq"] + [self.state.d_sq]),
            "clip_active": np.asarray(self._diag["clip_active"], dtype=bool),
        }


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------

def _coerce_predictions(instance: Instance, predictions) -> Array:
    u_hat = getattr(predictions, "u_hat", predictions)
    u_hat = np.atleast_2d(np.asarray(u_hat, dtype=np.float64))
    if u_hat.shape != (instance.T, instance.d):
        raise DimensionError(
            f"predictions must have shape ({instance.T}, {instance.d}), "
            f"got {u_hat.shape}")
    return u_hat


def run_iga(instance: Instance, settings: SolverSettings = DEFAULT_SETTINGS,
            *, reference: bool = False) -> RunResult:
    """Informed greedy benchmark (semi-online: sees u_t before acting)."""
    if not reference and kernels.chain_eligible(instance):
        kappa, w, lam2, lo, hi = kernels.chain_args(instance)
        X = kernels.greedy_chain(instance.tau, instance.u, kappa, w, lam2, lo, hi)
        return trajectory_cost(instance, X, algorithm="iga")
    return simulate(InformedGreedyPolicy(instance.params, settings), instance,
                    relaxed_revelation=True)


def run_best(instance: Instance, settings: SolverSettings = DEFAULT_SETTINGS,
             *, reference: bool = False) -> RunResult:
    if not reference and kernels.chain_eligible(instance):
        kappa, w, lam2, lo, hi = kernels.chain_args(instance)
        Xb, Xi = kernels.best_chain(instance.tau, instance.u, kappa, w, lam2, lo, hi)
        result = trajectory_cost(instance, Xb, algorithm="best")
        result.extras["informed_actions"] = Xi
        return result
    return simulate(BestPolicy(instance.params, settings), instance)


def run_naive_greedy(instance: Instance,
                     settings: SolverSettings = DEFAULT_SETTINGS,
                     *, reference: bool = False) -> RunResult:
    if not reference and kernels.chain_eligible(instance):
        _, w, lam2, lo, hi = kernels.chain_args(instance)
        X = kernels.greedy_chain(instance.tau, instance.u, 0.0, w, lam2, lo, hi)
        return trajectory_cost(instance, X, algorithm="naive")
    return simulate(NaiveGreedyPolicy(instance.params, settings), instance)


def run_pga(instance: Instance, predictions,
            settings: SolverSettings = DEFAULT_SETTINGS,
            *, reference: bool = False) -> RunResult:
    u_hat = _coerce_predictions(instance, predictions)
    if not reference and kernels.chain_eligible(instance):
        kappa, w, lam2, lo, hi = kernels.chain_args(instance)
        X = kernels.greedy_chain(instance.tau, u_hat, kappa, w, lam2, lo, hi)
        return trajectory_cost(instance, X, algorithm="pga")
    return simulate(PredictionGreedyPolicy(instance.params, u_hat, settings),
                    instance)


def run_cort(instance: Instance, predictions, theta: float,
             settings: SolverSettings = DEFAULT_SETTINGS,
             *, reference: bool = False) -> RunResult:
    """Trust-clipped prediction policy; extras carry the blind/informed
    actions, clipped targets, D^2 series and clip flags."""
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    u_hat = _coerce_predictions(instance, predictions)
    if not reference and kernels.chain_eligible(instance):
        kappa, w, lam2, lo, hi = kernels.chain_args(instance)
        X, Xb, Xi, Ut, d_sq, clipped = kernels.cort_chain(
            instance.tau, instance.u, u_hat, float(theta), kappa, w, lam2, lo, hi)
        result = trajectory_cost(instance, X, algorithm="cort")
        result.extras.update(theta=float(theta), best_actions=Xb,
                             informed_actions=Xi, u_tilde=Ut, d_sq=d_sq,
                             clip_active=clipped)
        return result
    return simulate(CortPolicy(instance.params, u_hat, theta, settings), instance)
