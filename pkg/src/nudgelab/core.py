"""Independent human decision model.

A logistic response over normalized task features, a diagonal-Gaussian
population posterior over the response weights fitted by stochastic
variational inference, Monte-Carlo ensemble prediction, and filtering of
the ensemble on an observed decision.

Conventions used throughout the package:

* weight vectors carry an explicit intercept; posterior arrays have
  length ``n_features + 1`` with the intercept in the LAST coordinate,
  implemented as a constant pseudo-feature of 1;
* a probability of exactly 0.5 maps to decision 1 (single tie rule for
  every thresholding site in the package);
* every stochastic routine takes an explicit seed and is bitwise
  reproducible given it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._util import Adam, bernoulli_loglik, derive_seed, sigmoid
from .errors import ConfigurationError, DomainError, NumericError, UsageError

__all__ = [
    "TaskInstance",
    "WeightVector",
    "PopulationPosterior",
    "FilteredEnsemble",
    "PopulationFitConfig",
    "logistic_response",
    "gaussian_kl",
    "elbo_and_gradient",
    "fit_population",
    "predict_independent",
    "condition_on_decision",
]

# Variance assigned to coordinates pinned to zero (intercept in
# no-intercept mode): keeps "strictly positive variance" invariants while
# making sampled values negligible.
PINNED_VARIANCE = 1e-18


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TaskInstance:
    """One decision task: normalized features and an optional true label."""

    features: np.ndarray
    label: int | None = None

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        if feats.ndim != 1 or feats.size == 0:
            raise ConfigurationError("task features must be a nonempty 1-D vector")
        if not np.all(np.isfinite(feats)):
            raise ConfigurationError("task features must be finite")
        if np.any(feats < 0.0) or np.any(feats > 1.0):
            raise ConfigurationError("task features must lie in [0, 1]")
        if self.label is not None and self.label not in (0, 1):
            raise ConfigurationError("task label must be 0 or 1")
        object.__setattr__(self, "features", _frozen_array(feats))

    @property
    def n_features(self) -> int:
        return self.features.size


@dataclass(frozen=True)
class WeightVector:
    """Decision weights plus intercept for the logistic response."""

    weights: np.ndarray
    bias: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1:
            raise ConfigurationError("weights must be a 1-D vector")
        if not (np.all(np.isfinite(w)) and np.isfinite(self.bias)):
            raise ConfigurationError("weights and bias must be finite")
        object.__setattr__(self, "weights", _frozen_array(w))
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def n_features(self) -> int:
        return self.weights.size

    def augmented(self) -> np.ndarray:
        """Weights with the intercept appended as the last coordinate."""
        return np.append(self.weights, self.bias)


def augment_features(task: TaskInstance) -> np.ndarray:
    """Feature vector with the constant pseudo-feature 1 appended."""
    return np.append(task.features, 1.0)


@dataclass(frozen=True)
class PopulationPosterior:
    """Diagonal Gaussian over decision weights plus a frozen draw ensemble.

    ``mean`` and ``variance`` have length ``n_features + 1`` (intercept
    last).  ``ensemble`` is an (S, n_features + 1) matrix whose rows are
    weight draws; it is frozen at construction and reused verbatim by
    every predictor so that all downstream expectations are deterministic.
    """

    mean: np.ndarray
    variance: np.ndarray
    ensemble: np.ndarray
    seed: int

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        var = np.asarray(self.variance, dtype=float)
        ens = np.asarray(self.ensemble, dtype=float)
        if mean.ndim != 1 or mean.size < 2:
            raise ConfigurationError("posterior mean must be 1-D with length >= 2")
        if var.shape != mean.shape:
            raise ConfigurationError("posterior variance must match mean shape")
        if np.any(var <= 0.0):
            raise DomainError("posterior variances must be strictly positive")
        if ens.ndim != 2 or ens.shape[0] < 1 or ens.shape[1] != mean.size:
            raise ConfigurationError("ensemble must be (S, dim) with S >= 1")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(var))
                and np.all(np.isfinite(ens))):
            raise ConfigurationError("posterior arrays must be finite")
        object.__setattr__(self, "mean", _frozen_array(mean))
        object.__setattr__(self, "variance", _frozen_array(var))
        object.__setattr__(self, "ensemble", _frozen_array(ens))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def from_moments(cls, mean, variance, size: int, seed: int) -> "PopulationPosterior":
        """Draw a fresh S-member ensemble from N(mean, diag(variance))."""
        mean = np.asarray(mean, dtype=float)
        variance = np.asarray(variance, dtype=float)
        if size < 1:
            raise ConfigurationError("ensemble size must be >= 1")
        if np.any(variance <= 0.0):
            raise DomainError("variances must be strictly positive")
        rng = np.random.default_rng(seed)
        draws = mean + np.sqrt(variance) * rng.standard_normal((size, mean.size))
        return cls(mean=mean, variance=variance, ensemble=draws, seed=seed)

    @classmethod
    def point(cls, model: WeightVector) -> "PopulationPosterior":
        """Zero-variance collapse onto a single weight vector.

        The singleton ensemble equals the mean exactly (the variance -> 0
        limit of a draw); used by the deterministic-model ablation.
        """
        mean = model.augmented()
        variance = np.full(mean.size, PINNED_VARIANCE)
        return cls(mean=mean, variance=variance, ensemble=mean[None, :], seed=0)

    @property
    def n_features(self) -> int:
        return self.mean.size - 1

    @property
    def ensemble_size(self) -> int:
        return self.ensemble.shape[0]


@dataclass(frozen=True)
class FilteredEnsemble:
    """Subset of a posterior ensemble consistent with an observed decision."""

    members: np.ndarray
    source_size: int
    fallback_used: bool

    def __post_init__(self):
        members = np.asarray(self.members, dtype=float)
        if members.ndim != 2 or members.shape[0] < 1:
            raise ConfigurationError("filtered ensemble must be nonempty")
        object.__setattr__(self, "members", _frozen_array(members))

    @property
    def size(self) -> int:
        return self.members.shape[0]


@dataclass(frozen=True)
class PopulationFitConfig:
    """Settings for the variational population fit."""

    learning_rate: float = 0.01
    iterations: int = 2000
    seed: int = 0
    train_samples: int = 64
    ensemble_size: int = 1000
    prior_variance: float = 1.0
    include_bias: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0 or self.iterations <= 0:
            raise ConfigurationError("learning rate and iterations must be positive")
        if self.train_samples <= 0 or self.ensemble_size <= 0:
            raise ConfigurationError("sample counts must be positive")
        if self.prior_variance <= 0:
            raise ConfigurationError("prior variance must be positive")


def logistic_response(task: TaskInstance, w: WeightVector) -> float:
    """Probability of deciding 1: sigmoid(w . x + bias)."""
    if task.n_features != w.n_features:
        raise ConfigurationError(
            f"task has {task.n_features} features but weights expect {w.n_features}"
        )
    return float(sigmoid(float(w.weights @ task.features) + w.bias))


def gaussian_kl(posterior: PopulationPosterior, prior_variance: float = 1.0) -> float:
    """Closed-form KL from the diagonal posterior to the isotropic zero-mean prior.

    KL(N(mu, diag(v)) || N(0, pv*I)) summed over coordinates; nonnegative,
    and zero exactly when mu = 0 and v = pv.
    """
    if prior_variance <= 0:
        raise DomainError("prior variance must be strictly positive")
    mu = posterior.mean
    var = posterior.variance
    ratio = var / prior_variance
    return float(0.5 * np.sum(ratio + mu * mu / prior_variance - 1.0 - np.log(ratio)))


def elbo_and_gradient(mean, log_std, features_bias, labels, noise, prior_variance):
    """Frozen-sample ELBO of the diagonal-Gaussian logistic model, with gradient.

    The posterior is parameterized as N(mean, diag(exp(2*log_std))) and the
    expectation is taken over the fixed reparameterization draws
    ``weights = mean + exp(log_std) * noise``.  Because ``noise`` is frozen,
    the value is a deterministic, differentiable function of (mean, log_std)
    and the returned gradient is exact for it.

    Parameters
    ----------
    mean, log_std : (d,) arrays of variational parameters.
    features_bias : (N, d) design matrix with the pseudo-feature column.
    labels : (N,) array of 0/1 independent decisions.
    noise : (S, d) frozen standard-normal draws.
    prior_variance : scalar variance of the zero-mean isotropic prior.

    Returns
    -------
    (elbo, grad_mean, grad_log_std)
    """
    mean = np.asarray(mean, dtype=float)
    log_std = np.asarray(log_std, dtype=float)
    std = np.exp(log_std)
    weights = mean[None, :] + std[None, :] * noise        # (S, d)
    logits = weights @ features_bias.T                    # (S, N)
    loglik = float(np.mean(np.sum(bernoulli_loglik(labels[None, :], logits), axis=1)))

    var = std * std
    ratio = var / prior_variance
    kl = 0.5 * np.sum(ratio + mean * mean / prior_variance - 1.0 - np.log(ratio))

    residual = labels[None, :] - sigmoid(logits)          # (S, N)
    per_draw = residual @ features_bias                   # (S, d)
    grad_mean = per_draw.mean(axis=0) - mean / prior_variance
    grad_std = (per_draw * noise).mean(axis=0) - (std / prior_variance - 1.0 / std)
    grad_log_std = grad_std * std
    return float(loglik - kl), grad_mean, grad_log_std


def fit_population(
    data: Sequence[tuple[TaskInstance, int]],
    config: PopulationFitConfig = PopulationFitConfig(),
) -> PopulationPosterior:
    """Fit the population posterior to independent decisions by maximizing the ELBO.

    Runs adaptive per-coordinate gradient ascent (Adam) on (mean, log_std)
    with common random numbers frozen for the whole run, and returns the
    best iterate seen, so the returned ELBO is never below the initial one.
    The prediction ensemble is drawn from the fitted moments using
    ``config.seed``.
    """
    if len(data) == 0:
        raise UsageError("fit_population requires at least one observation")
    n = data[0][0].n_features
    for task, label in data:
        if task.n_features != n:
            raise ConfigurationError("all tasks must share one dimensionality")
        if label not in (0, 1):
            raise UsageError("independent decisions must be 0 or 1")

    dim = n + 1
    features_bias = np.stack([augment_features(task) for task, _ in data])
    labels = np.asarray([label for _, label in data], dtype=float)

    noise_rng = np.random.default_rng(derive_seed(config.seed, "elbo-noise"))
    noise = noise_rng.standard_normal((config.train_samples, dim))
    if not config.include_bias:
        # Pinned intercept: zero mean, negligible variance, no noise, no updates.
        noise[:, -1] = 0.0

    mean = np.zeros(dim)
    log_std = np.full(dim, np.log(0.3))
    if not config.include_bias:
        log_std[-1] = 0.5 * np.log(PINNED_VARIANCE)

    theta = np.concatenate([mean, log_std])
    optimizer = Adam(theta.size, config.learning_rate)
    best_theta = theta.copy()
    best_elbo = -np.inf

    for iteration in range(config.iterations + 1):
        mean, log_std = theta[:dim], theta[dim:]
        elbo, g_mean, g_log_std = elbo_and_gradient(
            mean, log_std, features_bias, labels, noise, config.prior_variance
        )
        if not np.isfinite(elbo):
            raise NumericError(f"ELBO became non-finite at iteration {iteration}")
        if elbo > best_elbo:
            best_elbo = elbo
            best_theta = theta.copy()
        if iteration == config.iterations:
            break
        grad = np.concatenate([g_mean, g_log_std])
        if not config.include_bias:
            grad[dim - 1] = 0.0
            grad[-1] = 0.0
        theta = optimizer.step(theta, -grad)

    mean = best_theta[:dim]
    variance = np.exp(2.0 * best_theta[dim:])
    return PopulationPosterior.from_moments(
        mean, variance, config.ensemble_size, seed=config.seed
    )


def ensemble_probability(members: np.ndarray, task: TaskInstance,
                         shift: float = 0.0) -> float:
    """Mean logistic response of an ensemble, with an optional scalar logit shift."""
    logits = members @ augment_features(task)
    if shift != 0.0:
        logits = logits + shift
    return float(np.mean(sigmoid(logits)))


def predict_independent(posterior: PopulationPosterior,
                        task: TaskInstance) -> tuple[float, int]:
    """Ensemble-average probability of deciding 1, and the thresholded decision."""
    if task.n_features != posterior.n_features:
        raise ConfigurationError(
            f"task has {task.n_features} features but posterior expects "
            f"{posterior.n_features}"
        )
    probability = ensemble_probability(posterior.ensemble, task)
    return probability, int(probability >= 0.5)


def condition_on_decision(posterior: PopulationPosterior, task: TaskInstance,
                          observed: int) -> FilteredEnsemble:
    """Keep the ensemble members whose thresholded response matches ``observed``.

    If no member reproduces the observed decision the full ensemble is
    returned with ``fallback_used`` set, so downstream expectations stay
    well defined.
    """
    if task.n_features != posterior.n_features:
        raise ConfigurationError(
            f"task has {task.n_features} features but posterior expects "
            f"{posterior.n_features}"
        )
    if observed not in (0, 1):
        raise UsageError("observed decision must be 0 or 1")
    probs = sigmoid(posterior.ensemble @ augment_features(task))
    keep = (probs >= 0.5) == bool(observed)
    source = posterior.ensemble_size
    if not np.any(keep):
        return FilteredEnsemble(members=posterior.ensemble, source_size=source,
                                fallback_used=True)
    return FilteredEnsemble(members=posterior.ensemble[keep], source_size=source,
                            fallback_used=False)
