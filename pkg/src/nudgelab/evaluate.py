"""Evaluation protocol: metrics, per-subject splits, baseline, data-efficiency.

Each subject's trials are split into train and test halves per run seed;
the framework fits nudge parameters on the train half and is scored on
the test half, and the per-subject logistic baseline consumes exactly the
same splits so comparisons are paired.  Aggregates are means over
subjects, then over runs.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from ._util import Adam, derive_seed, sigmoid
from .core import PopulationPosterior, WeightVector
from .errors import ConfigurationError, UsageError
from .fitting import FitConfig, fit_nudge, fit_nudge_deterministic_ablation
from .nudge import decision_probability
from .records import BehaviorRecord, Treatment, group_by_subject

__all__ = [
    "SplitPlan",
    "SubjectMetrics",
    "EvalReport",
    "CurvePoint",
    "metrics",
    "split_trials",
    "evaluate_framework",
    "baseline_logistic",
    "learning_curve",
]

UNINFORMATIVE_NLL = float(np.log(2.0))  # constant p=0.5 reference


@dataclass(frozen=True)
class SplitPlan:
    """Train fraction and the seeds of the repeated evaluation runs."""

    train_fraction: float = 0.5
    run_seeds: tuple[int, ...] = (0, 1, 2, 3, 4)

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigurationError("train_fraction must lie in (0, 1)")
        if len(self.run_seeds) < 1:
            raise ConfigurationError("at least one run seed is required")
        object.__setattr__(self, "run_seeds", tuple(int(s) for s in self.run_seeds))


@dataclass(frozen=True)
class SubjectMetrics:
    subject_id: str
    nll: float
    accuracy: float
    f1: float


@dataclass(frozen=True)
class EvalReport:
    treatment: Treatment
    nll: float
    accuracy: float
    f1: float
    n_subjects: int
    n_runs: int
    per_subject: tuple[SubjectMetrics, ...]
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class CurvePoint:
    size: int
    method: str
    run_seed: int
    nll: float
    f1: float


def metrics(predictions, truths, clip_eps: float = 1e-6) -> tuple[float, float, float]:
    """(NLL, accuracy, F1) of (probability, decision) pairs against 0/1 truths.

    F1 uses decision 1 as the positive class; with no positive truths and
    no positive predictions it is 1 by convention.
    """
    predictions = list(predictions)
    truths = list(truths)
    if len(predictions) != len(truths):
        raise UsageError("predictions and truths must have equal length")
    if not predictions:
        raise UsageError("metrics require at least one prediction")
    probs = np.clip([p for p, _ in predictions], clip_eps, 1.0 - clip_eps)
    decisions = np.asarray([d for _, d in predictions])
    y = np.asarray(truths)
    nll = -float(np.mean(y * np.log(probs) + (1 - y) * np.log1p(-probs)))
    accuracy = float(np.mean(decisions == y))
    tp = int(np.sum((decisions == 1) & (y == 1)))
    fp = int(np.sum((decisions == 1) & (y == 0)))
    fn = int(np.sum((decisions == 0) & (y == 1)))
    if tp + fp + fn == 0:
        f1 = 1.0
    else:
        f1 = 2.0 * tp / (2.0 * tp + fp + fn)
    return nll, accuracy, float(f1)


def split_trials(
    trials: list[BehaviorRecord], run_seed: int, train_fraction: float
) -> tuple[list[BehaviorRecord], list[BehaviorRecord]]:
    """Deterministic per-(subject, run) shuffle split; both halves nonempty."""
    ordered = sorted(trials, key=lambda r: r.trial_index)
    subject_id = ordered[0].subject_id
    rng = np.random.default_rng(derive_seed(run_seed, subject_id, "split"))
    perm = rng.permutation(len(ordered))
    n_train = int(round(len(ordered) * train_fraction))
    n_train = max(1, min(len(ordered) - 1, n_train))
    train = [ordered[i] for i in perm[:n_train]]
    test = [ordered[i] for i in perm[n_train:]]
    return train, test


def _single_treatment(dataset) -> Treatment:
    treatments = {rec.treatment for rec in dataset}
    if len(treatments) != 1:
        raise UsageError(
            "evaluate one treatment at a time; got "
            + ", ".join(sorted(t.value for t in treatments))
        )
    return treatments.pop()


def _eligible_groups(dataset):
    groups = group_by_subject(dataset)
    eligible, warnings = {}, []
    for sid, trials in groups.items():
        if len(trials) < 2:
            warnings.append(f"subject {sid} excluded: fewer than 2 trials")
        else:
            eligible[sid] = trials
    if not eligible:
        raise UsageError("no subject has at least 2 trials")
    return eligible, warnings


def _aggregate(cells, treatment, run_seeds, warnings) -> EvalReport:
    """cells: {(run_seed, subject_id): (nll, acc, f1)} -> report."""
    subjects = sorted({sid for _, sid in cells})
    run_means = []
    for run in run_seeds:
        triples = np.array([cells[(run, sid)] for sid in subjects])
        run_means.append(triples.mean(axis=0))
    overall = np.mean(run_means, axis=0)
    per_subject = tuple(
        SubjectMetrics(
            sid,
            *np.mean([cells[(run, sid)] for run in run_seeds], axis=0),
        )
        for sid in subjects
    )
    return EvalReport(
        treatment=treatment,
        nll=float(overall[0]),
        accuracy=float(overall[1]),
        f1=float(overall[2]),
        n_subjects=len(subjects),
        n_runs=len(run_seeds),
        per_subject=per_subject,
        warnings=tuple(warnings),
    )


def _score_framework(test, posterior, params, clip_eps):
    predictions = []
    for rec in test:
        p = decision_probability(rec, posterior, params, clip_eps)
        predictions.append((p, int(p >= 0.5)))
    return metrics(predictions, [rec.final_decision for rec in test], clip_eps)


def evaluate_framework(
    dataset: list[BehaviorRecord],
    posterior: PopulationPosterior,
    plan: SplitPlan = SplitPlan(),
    config: FitConfig = FitConfig(),
    deterministic_ablation: bool = False,
) -> EvalReport:
    """Split/fit/score every subject over every run seed and average.

    With ``deterministic_ablation`` the posterior is collapsed onto its
    mean (delayed treatment only): fitting and scoring both use the single
    point model.
    """
    treatment = _single_treatment(dataset)
    eligible, warnings = _eligible_groups(dataset)
    if deterministic_ablation:
        point = WeightVector(weights=posterior.mean[:-1], bias=posterior.mean[-1])
        score_posterior = PopulationPosterior.point(point)
    else:
        score_posterior = posterior
    cells = {}
    for run in plan.run_seeds:
        for sid, trials in eligible.items():
            train, test = split_trials(trials, run, plan.train_fraction)
            fit_config = dataclasses.replace(
                config, seed=derive_seed(config.seed, run, sid)
            )
            if treatment == Treatment.INDEPENDENT:
                params = None
            elif deterministic_ablation:
                params = fit_nudge_deterministic_ablation(
                    train, point, treatment, fit_config
                ).params
            else:
                params = fit_nudge(train, posterior, treatment, fit_config).params
            cells[(run, sid)] = _score_framework(
                test, score_posterior, params, config.clip_eps
            )
    return _aggregate(cells, treatment, plan.run_seeds, warnings)


# -- per-subject logistic baseline ------------------------------------------


def baseline_features(record: BehaviorRecord) -> np.ndarray:
    """Treatment-specific input row for the supervised baseline."""
    x = record.features
    t = record.treatment
    if t == Treatment.IMMEDIATE:
        return np.concatenate([x, [record.ai_recommendation, record.ai_confidence]])
    if t == Treatment.DELAYED:
        return np.concatenate([x, [record.initial_decision, record.ai_recommendation]])
    if t == Treatment.EXPLANATION:
        return np.concatenate([x, record.explanation_mask.astype(float)])
    return np.asarray(x, dtype=float)


def _fit_logistic(features, labels, l2, learning_rate, iterations):
    """L2-regularized logistic fit by Adam (intercept unpenalized).

    Returns a predict(features) -> probabilities callable.  Single-class
    labels short-circuit to the constant class probability.
    """
    labels = np.asarray(labels, dtype=float)
    if np.all(labels == labels[0]):
        constant = float(labels[0])

        def predict_constant(rows):
            return np.full(np.asarray(rows).shape[0], constant)

        return predict_constant

    design = np.asarray(features, dtype=float)
    theta = np.zeros(design.shape[1] + 1)  # [weights, intercept]
    optimizer = Adam(theta.size, learning_rate)
    for _ in range(iterations):
        logits = design @ theta[:-1] + theta[-1]
        residual = sigmoid(logits) - labels
        grad = np.concatenate([design.T @ residual + l2 * theta[:-1],
                               [residual.sum()]])
        theta = optimizer.step(theta, grad)

    def predict(rows):
        return sigmoid(np.asarray(rows) @ theta[:-1] + theta[-1])

    return predict


def baseline_logistic(
    dataset: list[BehaviorRecord],
    treatment: Treatment,
    plan: SplitPlan = SplitPlan(),
    l2: float = 1.0,
    learning_rate: float = 0.1,
    iterations: int = 1000,
    clip_eps: float = 1e-6,
) -> EvalReport:
    """Per-subject supervised logistic baseline on the same splits."""
    treatment = Treatment(treatment)
    if _single_treatment(dataset) != treatment:
        raise UsageError("dataset treatment does not match the requested treatment")
    eligible, warnings = _eligible_groups(dataset)
    cells = {}
    for run in plan.run_seeds:
        for sid, trials in eligible.items():
            train, test = split_trials(trials, run, plan.train_fraction)
            predict = _fit_logistic(
                [baseline_features(r) for r in train],
                [r.final_decision for r in train],
                l2, learning_rate, iterations,
            )
            probs = np.clip(
                predict([baseline_features(r) for r in test]),
                clip_eps, 1.0 - clip_eps,
            )
            predictions = [(float(p), int(p >= 0.5)) for p in probs]
            cells[(run, sid)] = metrics(
                predictions, [r.final_decision for r in test], clip_eps
            )
    return _aggregate(cells, treatment, plan.run_seeds, warnings)


def learning_curve(
    dataset: list[BehaviorRecord],
    treatment: Treatment,
    posterior: PopulationPosterior,
    train_sizes: list[int],
    plan: SplitPlan = SplitPlan(),
    config: FitConfig = FitConfig(),
    baseline_l2: float = 1.0,
) -> tuple[list[CurvePoint], list[str]]:
    """Test metrics of framework and baseline versus training-set size.

    Per (subject, run) one permutation is drawn; the first ``size`` trials
    train and the remainder tests, so train sets are nested across sizes.
    Sizes a subject cannot support are skipped with a warning.
    """
    treatment = Treatment(treatment)
    if _single_treatment(dataset) != treatment:
        raise UsageError("dataset treatment does not match the requested treatment")
    eligible, warnings = _eligible_groups(dataset)
    rows: list[CurvePoint] = []
    for size in sorted(set(int(s) for s in train_sizes)):
        if size < 1:
            raise UsageError("train sizes must be positive")
        usable = {sid: t for sid, t in eligible.items() if len(t) > size}
        skipped = len(eligible) - len(usable)
        if skipped:
            warnings.append(
                f"train size {size}: skipped {skipped} subject(s) with too few trials"
            )
        if not usable:
            warnings.append(f"train size {size}: skipped entirely")
            continue
        for run in plan.run_seeds:
            frame_cells, base_cells = [], []
            for sid, trials in usable.items():
                ordered = sorted(trials, key=lambda r: r.trial_index)
                rng = np.random.default_rng(derive_seed(run, sid, "curve"))
                perm = rng.permutation(len(ordered))
                train = [ordered[i] for i in perm[:size]]
                test = [ordered[i] for i in perm[size:]]
                fit_config = dataclasses.replace(
                    config, seed=derive_seed(config.seed, run, sid, size)
                )
                params = fit_nudge(train, posterior, treatment, fit_config).params
                frame_cells.append(
                    _score_framework(test, posterior, params, config.clip_eps)
                )
                predict = _fit_logistic(
                    [baseline_features(r) for r in train],
                    [r.final_decision for r in train],
                    baseline_l2, 0.1, 1000,
                )
                probs = np.clip(
                    predict([baseline_features(r) for r in test]),
                    config.clip_eps, 1.0 - config.clip_eps,
                )
                base_cells.append(metrics(
                    [(float(p), int(p >= 0.5)) for p in probs],
                    [r.final_decision for r in test],
                    config.clip_eps,
                ))
            for method, cells in (("framework", frame_cells),
                                  ("logistic_baseline", base_cells)):
                mean = np.mean(cells, axis=0)
                rows.append(CurvePoint(size=size, method=method, run_seed=run,
                                       nll=float(mean[0]), f1=float(mean[2])))
    return rows, warnings
