"""Per-subject maximum-likelihood estimation of nudge parameters.

The likelihood of a subject's final decisions is evaluated under the
frozen posterior ensemble; shift vectors are optimized through smooth
unconstrained reparameterizations (free signed scale, softplus
magnitudes, sigmoid attention weight) by multi-restart Adam.  Gradients
are analytic, exact for the frozen-sample objective.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import Adam, derive_seed, sigmoid, softplus, softplus_inverse
from .core import PopulationPosterior, WeightVector
from .errors import ConfigurationError, UsageError
from .nudge import NudgeParams, SignedSharedSignVector
from .records import BehaviorRecord, Treatment

__all__ = [
    "FitConfig",
    "NudgeFitResult",
    "NudgeObjective",
    "fit_nudge",
    "fit_nudge_deterministic_ablation",
]

# A fit counts as converged when the final gradient is this small (mean-NLL
# scale) and no trial probability sits on the clip boundary.
_GRADIENT_TOL = 1e-2


@dataclass(frozen=True)
class FitConfig:
    """Settings for the nudge-parameter MLE."""

    learning_rate: float = 0.05
    iterations: int = 500
    seed: int = 0
    ensemble_size: int = 1000
    restarts: int = 4
    clip_eps: float = 1e-6
    l2_penalty: float = 0.0

    def __post_init__(self):
        if min(self.learning_rate, self.iterations, self.ensemble_size,
               self.clip_eps) <= 0:
            raise ConfigurationError("fit settings must be positive")
        if self.restarts < 1:
            raise ConfigurationError("restarts must be >= 1")
        if self.l2_penalty < 0:
            raise ConfigurationError("l2_penalty must be nonnegative")


@dataclass(frozen=True)
class NudgeFitResult:
    params: NudgeParams
    train_nll: float
    converged: bool
    restart_index: int
    theta: np.ndarray


class NudgeObjective:
    """Mean negative log-likelihood of one subject's trials, with gradient.

    Precomputes everything that depends only on the trials and the frozen
    ensemble (base logits, per-trial conditioning weights, masked response
    means), so each evaluation touches a single (S, T) nonlinearity at
    most.  ``theta`` layouts:

    * immediate    — [scale, raw_magnitudes x n]
    * delayed      — [scale_affirm, raw_affirm x n, scale_contra, raw_contra x n]
    * explanation  — [raw_attention]
    """

    def __init__(self, trials: list[BehaviorRecord], ensemble: np.ndarray,
                 treatment: Treatment, clip_eps: float = 1e-6,
                 l2_penalty: float = 0.0):
        if not trials:
            raise UsageError("at least one training trial is required")
        self.treatment = Treatment(treatment)
        if self.treatment == Treatment.INDEPENDENT:
            raise UsageError("independent treatment has no nudge parameters to fit")
        subjects = {t.subject_id for t in trials}
        if len(subjects) != 1:
            raise UsageError(f"trials span multiple subjects: {sorted(subjects)}")
        for t in trials:
            if t.treatment != self.treatment:
                raise UsageError(
                    f"trial treatment {t.treatment.value!r} does not match "
                    f"{self.treatment.value!r}"
                )
        self.n = trials[0].n_features
        self.clip_eps = float(clip_eps)
        self.l2_penalty = float(l2_penalty)

        self.features = np.stack([t.features for t in trials])           # (T, n)
        features_bias = np.hstack([self.features,
                                   np.ones((len(trials), 1))])           # (T, n+1)
        self.final = np.asarray([t.final_decision for t in trials], dtype=float)
        base = ensemble @ features_bias.T                                # (S, T)

        if self.treatment == Treatment.IMMEDIATE:
            rec = np.asarray([t.ai_recommendation for t in trials], dtype=float)
            conf = np.asarray([t.ai_confidence for t in trials])
            self.direction = (2.0 * rec - 1.0) * conf                    # (T,)
            self.base = base
        elif self.treatment == Treatment.DELAYED:
            rec = np.asarray([t.ai_recommendation for t in trials])
            initial = np.asarray([t.initial_decision for t in trials])
            self.direction = 2.0 * rec.astype(float) - 1.0
            self.affirms = rec == initial                                # (T,)
            consistent = (sigmoid(base) >= 0.5) == initial[None, :].astype(bool)
            counts = consistent.sum(axis=0)
            fallback = counts == 0
            if np.any(fallback):
                consistent[:, fallback] = True
                counts = consistent.sum(axis=0)
            self.member_weight = consistent / counts                     # (S, T)
            self.base = base
        else:
            mask = np.stack([t.explanation_mask for t in trials]).astype(float)
            focused = np.hstack([mask * self.features,
                                 np.ones((len(trials), 1))])
            ignored = np.hstack([(1.0 - mask) * self.features,
                                 np.ones((len(trials), 1))])
            self.mean_focused = sigmoid(ensemble @ focused.T).mean(axis=0)   # (T,)
            self.mean_ignored = sigmoid(ensemble @ ignored.T).mean(axis=0)   # (T,)

    @property
    def n_params(self) -> int:
        if self.treatment == Treatment.IMMEDIATE:
            return 1 + self.n
        if self.treatment == Treatment.DELAYED:
            return 2 * (1 + self.n)
        return 1

    # -- parameterization -------------------------------------------------

    def params_from_theta(self, theta: np.ndarray) -> NudgeParams:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ConfigurationError(f"theta must have shape ({self.n_params},)")
        if self.treatment == Treatment.IMMEDIATE:
            return NudgeParams.for_immediate(self._vector(theta))
        if self.treatment == Treatment.DELAYED:
            half = 1 + self.n
            return NudgeParams.for_delayed(
                self._vector(theta[:half]), self._vector(theta[half:])
            )
        return NudgeParams.for_explanation(float(sigmoid(theta[0])))

    @staticmethod
    def _vector(block: np.ndarray) -> SignedSharedSignVector:
        return SignedSharedSignVector(scale=float(block[0]),
                                      magnitudes=softplus(block[1:]))

    def initial_theta(self, restart: int, seed: int) -> np.ndarray:
        """Restart 0 starts near zero nudge; restart 1 flips the scale sign;
        later restarts are random."""
        if self.treatment == Treatment.EXPLANATION:
            fixed = [0.0, 1.5, -1.5]
            if restart < len(fixed):
                return np.array([fixed[restart]])
            rng = np.random.default_rng(derive_seed(seed, "init", restart))
            return rng.normal(0.0, 1.5, size=1)
        if restart in (0, 1):
            scale = 0.5 if restart == 0 else -0.5
            small = float(softplus_inverse(0.02))
            block = np.concatenate([[scale], np.full(self.n, small)])
        else:
            rng = np.random.default_rng(derive_seed(seed, "init", restart))
            if self.treatment == Treatment.DELAYED:
                return np.concatenate([
                    rng.normal(0.0, 1.5, size=1), rng.normal(-1.0, 1.0, size=self.n),
                    rng.normal(0.0, 1.5, size=1), rng.normal(-1.0, 1.0, size=self.n),
                ])
            return np.concatenate([
                rng.normal(0.0, 1.5, size=1), rng.normal(-1.0, 1.0, size=self.n),
            ])
        if self.treatment == Treatment.DELAYED:
            return np.concatenate([block, block])
        return block

    # -- objective ---------------------------------------------------------

    def probabilities(self, theta: np.ndarray) -> np.ndarray:
        """Unclipped per-trial probabilities of a final decision of 1."""
        return self._forward(np.asarray(theta, dtype=float))[0]

    def value_and_gradient(
        self, theta: np.ndarray, include_penalty: bool = True
    ) -> tuple[float, np.ndarray]:
        """Mean NLL of the final decisions and its exact gradient in theta."""
        theta = np.asarray(theta, dtype=float)
        probs, backward = self._forward(theta)
        eps = self.clip_eps
        clipped = np.clip(probs, eps, 1.0 - eps)
        n_trials = probs.size
        value = -float(np.mean(
            self.final * np.log(clipped) + (1.0 - self.final) * np.log1p(-clipped)
        ))
        interior = (probs > eps) & (probs < 1.0 - eps)
        dvalue_dp = np.where(
            interior,
            (clipped - self.final) / (clipped * (1.0 - clipped)) / n_trials,
            0.0,
        )
        grad = backward(dvalue_dp)
        if include_penalty and self.l2_penalty > 0.0:
            value_pen, grad_pen = self._penalty(theta)
            value += value_pen
            grad = grad + grad_pen
        return value, grad

    def clipping_active(self, theta: np.ndarray) -> bool:
        probs = self.probabilities(theta)
        return bool(np.any((probs <= self.clip_eps)
                           | (probs >= 1.0 - self.clip_eps)))

    def _forward(self, theta):
        if self.treatment == Treatment.EXPLANATION:
            attention = float(sigmoid(theta[0]))
            probs = (attention * self.mean_focused
                     + (1.0 - attention) * self.mean_ignored)

            def backward(dvalue_dp):
                d_attention = float(
                    np.sum(dvalue_dp * (self.mean_focused - self.mean_ignored))
                )
                return np.array([d_attention * attention * (1.0 - attention)])

            return probs, backward

        if self.treatment == Treatment.IMMEDIATE:
            delta = theta[0] * softplus(theta[1:])
            shift = self.direction * (self.features @ delta)             # (T,)
            logits = self.base + shift[None, :]
            member_probs = sigmoid(logits)
            probs = member_probs.mean(axis=0)

            def backward(dvalue_dp):
                slope = (member_probs * (1.0 - member_probs)).mean(axis=0)
                dshift = dvalue_dp * slope * self.direction              # (T,)
                ddelta = dshift @ self.features                          # (n,)
                mags = softplus(theta[1:])
                dscale = float(ddelta @ mags)
                dmags = theta[0] * ddelta * sigmoid(theta[1:])
                return np.concatenate([[dscale], dmags])

            return probs, backward

        # delayed: branch-dependent shift, conditioning weights per trial
        half = 1 + self.n
        delta_affirm = theta[0] * softplus(theta[1:half])
        delta_contra = theta[half] * softplus(theta[half + 1:])
        scores = np.where(self.affirms,
                          self.features @ delta_affirm,
                          self.features @ delta_contra)
        shift = self.direction * scores
        logits = self.base + shift[None, :]
        member_probs = sigmoid(logits)
        probs = np.sum(self.member_weight * member_probs, axis=0)

        def backward(dvalue_dp):
            slope = np.sum(
                self.member_weight * member_probs * (1.0 - member_probs), axis=0
            )
            dshift = dvalue_dp * slope * self.direction                  # (T,)
            grad = np.empty(self.n_params)
            for offset, selector, block in (
                (0, self.affirms, theta[:half]),
                (half, ~self.affirms, theta[half:]),
            ):
                ddelta = (dshift * selector) @ self.features
                mags = softplus(block[1:])
                grad[offset] = float(ddelta @ mags)
                grad[offset + 1: offset + half] = (
                    block[0] * ddelta * sigmoid(block[1:])
                )
            return grad

        return probs, backward

    def _penalty(self, theta):
        grad = np.zeros_like(theta)
        if self.treatment == Treatment.EXPLANATION:
            value = 0.5 * self.l2_penalty * float(theta[0] ** 2)
            grad[0] = self.l2_penalty * theta[0]
            return value, grad
        value = 0.0
        blocks = ([theta] if self.treatment == Treatment.IMMEDIATE
                  else [theta[: 1 + self.n], theta[1 + self.n:]])
        offset = 0
        for block in blocks:
            mags = softplus(block[1:])
            delta = block[0] * mags
            value += 0.5 * self.l2_penalty * float(delta @ delta)
            ddelta = self.l2_penalty * delta
            grad[offset] = float(ddelta @ mags)
            grad[offset + 1: offset + 1 + self.n] = (
                block[0] * ddelta * sigmoid(block[1:])
            )
            offset += 1 + self.n
        return value, grad


def _minimize(objective: NudgeObjective, config: FitConfig):
    """Multi-restart Adam; returns (value, theta, restart_index) of the best
    iterate ever visited (so the result is never worse than any start)."""
    best_value, best_theta, best_restart = np.inf, None, 0
    switch = int(0.8 * config.iterations)
    for restart in range(config.restarts):
        theta = objective.initial_theta(restart, config.seed)
        optimizer = Adam(theta.size, config.learning_rate)
        for iteration in range(config.iterations + 1):
            value, grad = objective.value_and_gradient(theta)
            if not np.isfinite(value):
                break
            if value < best_value:
                best_value, best_theta, best_restart = value, theta.copy(), restart
            if iteration == config.iterations:
                break
            # final 20% of iterations runs at a tenth of the step size
            optimizer.learning_rate = (
                config.learning_rate if iteration < switch
                else 0.1 * config.learning_rate
            )
            theta = optimizer.step(theta, grad)
    if best_theta is None:
        raise UsageError("no finite objective value reached from any restart")
    return best_value, best_theta, best_restart


def _fit(subject_trials, ensemble, treatment, config) -> NudgeFitResult:
    objective = NudgeObjective(
        subject_trials, ensemble, treatment, config.clip_eps, config.l2_penalty
    )
    _, best_theta, best_restart = _minimize(objective, config)
    train_nll, grad = objective.value_and_gradient(best_theta, include_penalty=False)
    converged = (float(np.max(np.abs(grad))) <= _GRADIENT_TOL
                 and not objective.clipping_active(best_theta))
    return NudgeFitResult(
        params=objective.params_from_theta(best_theta),
        train_nll=float(train_nll),
        converged=bool(converged),
        restart_index=int(best_restart),
        theta=best_theta,
    )


def fit_nudge(
    subject_trials: list[BehaviorRecord],
    posterior: PopulationPosterior,
    treatment: Treatment,
    config: FitConfig = FitConfig(),
) -> NudgeFitResult:
    """Maximum-likelihood nudge parameters for one subject's training trials.

    Deterministic given (trials, posterior, config).  ``converged`` is
    False when the gradient has not leveled off or the likelihood pushed
    probabilities onto the clip boundary (degenerate data).
    """
    return _fit(subject_trials, posterior.ensemble[: config.ensemble_size],
                treatment, config)


def fit_nudge_deterministic_ablation(
    subject_trials: list[BehaviorRecord],
    point_model: WeightVector,
    treatment: Treatment,
    config: FitConfig = FitConfig(),
) -> NudgeFitResult:
    """The same MLE with the ensemble collapsed onto one point model.

    Only defined for the delayed treatment (the ablation's setting); all
    expectations reduce to single evaluations at ``point_model``.
    """
    if Treatment(treatment) != Treatment.DELAYED:
        raise UsageError("the deterministic ablation applies to the delayed treatment")
    return _fit(subject_trials, point_model.augmented()[None, :], treatment, config)
