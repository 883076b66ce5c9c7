"""Regression and severe-drought classification metrics.

Scores binarize at 2.5 (severe = positive class) on both the actual and
predicted side. Precision/recall/F1 fall back to 0 when their
denominator is 0, so a county with no severe activity lands near macro
F1 0.5. Integer-category analysis rounds halves up and clamps to [0, 5].
"""

import csv
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DegenerateVariance, EmptyInput, LengthMismatch


@dataclass(frozen=True)
class EvalConfig:
    severe_threshold: float = 2.5
    n_categories: int = 6  # integer categories 0..5

    def __post_init__(self):
        if not 0.0 < self.severe_threshold < 5.0:
            raise ValueError("severe threshold must be inside (0, 5)")


@dataclass
class RegressionMetrics:
    mse: float
    mae: float


@dataclass
class ClassEntry:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class ClassificationReport:
    negative: ClassEntry  # class 0, non-severe
    positive: ClassEntry  # class 1, severe
    macro_f1: float
    weighted_f1: float


@dataclass
class CategoryAnalysisRow:
    actual_category: int
    over_count: int
    over_pct: float
    under_count: int
    under_pct: float
    total_incorrect: int
    total_actual: int
    accuracy_rate: float
    negative_predictions: int = 0


@dataclass
class CountyMetrics:
    fips: int
    macro_f1: float
    mae: float
    mse: float
    severe_ratio: float
    n_samples: int


@dataclass
class EvaluationReport:
    regression: RegressionMetrics
    classification: ClassificationReport
    categories: list = field(default_factory=list)
    counties: list = field(default_factory=list)


def _check_pair(actual, predicted):
    actual = np.asarray(actual, dtype=np.float64).reshape(-1)
    predicted = np.asarray(predicted, dtype=np.float64).reshape(-1)
    if actual.shape != predicted.shape:
        raise LengthMismatch(f"{actual.shape} vs {predicted.shape}")
    return actual, predicted


def regression_metrics(actual, predicted):
    actual, predicted = _check_pair(actual, predicted)
    if actual.size == 0:
        raise EmptyInput("no values to score")
    diff = predicted - actual
    return RegressionMetrics(mse=float(np.mean(diff * diff)),
                             mae=float(np.mean(np.abs(diff))))


def binarize_severe(scores, config=EvalConfig()):
    """True iff score >= threshold (2.5, USDM D2 and above)."""
    return np.asarray(scores, dtype=np.float64) >= config.severe_threshold


def _prf(tp, fp, fn):
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall else 0.0)
    return precision, recall, f1


def classification_report(actual_bin, predicted_bin):
    actual = np.asarray(actual_bin, dtype=bool).reshape(-1)
    predicted = np.asarray(predicted_bin, dtype=bool).reshape(-1)
    if actual.shape != predicted.shape:
        raise LengthMismatch(f"{actual.shape} vs {predicted.shape}")
    if actual.size == 0:
        raise EmptyInput("no labels")

    tp = int(np.sum(actual & predicted))
    fp = int(np.sum(~actual & predicted))
    fn = int(np.sum(actual & ~predicted))
    tn = int(np.sum(~actual & ~predicted))

    p1, r1, f1_pos = _prf(tp, fp, fn)
    p0, r0, f1_neg = _prf(tn, fn, fp)
    sup0 = tn + fp
    sup1 = tp + fn
    total = sup0 + sup1
    return ClassificationReport(
        negative=ClassEntry(p0, r0, f1_neg, sup0),
        positive=ClassEntry(p1, r1, f1_pos, sup1),
        macro_f1=(f1_neg + f1_pos) / 2.0,
        weighted_f1=(f1_neg * sup0 + f1_pos * sup1) / total,
    )


def round_to_category(scores, config=EvalConfig()):
    """Nearest integer with halves rounding up, clamped to [0, 5]."""
    scores = np.asarray(scores, dtype=np.float64)
    cats = np.floor(scores + 0.5)
    return np.clip(cats, 0, config.n_categories - 1).astype(np.int64)


def category_analysis(actual, predicted, config=EvalConfig()):
    """Per actual integer category: over/under split of wrong predictions.

    Negative raw predictions clamp to category 0 but are counted in the
    row's negative_predictions flag.
    """
    actual, predicted = _check_pair(actual, predicted)
    cat_a = round_to_category(actual, config)
    cat_p = round_to_category(predicted, config)
    rows = []
    for cat in range(config.n_categories):
        sel = cat_a == cat
        total = int(np.sum(sel))
        if total == 0:
            continue
        wrong = sel & (cat_p != cat_a)
        over = int(np.sum(wrong & (cat_p > cat_a)))
        under = int(np.sum(wrong & (cat_p < cat_a)))
        incorrect = over + under
        rows.append(CategoryAnalysisRow(
            actual_category=cat,
            over_count=over,
            over_pct=over / incorrect if incorrect else 0.0,
            under_count=under,
            under_pct=under / incorrect if incorrect else 0.0,
            total_incorrect=incorrect,
            total_actual=total,
            accuracy_rate=1.0 - incorrect / total,
            negative_predictions=int(np.sum(sel & (predicted < 0))),
        ))
    return rows


def _county_row(fips, actual, predicted, config):
    reg = regression_metrics(actual, predicted)
    report = classification_report(binarize_severe(actual, config),
                                   binarize_severe(predicted, config))
    severe = int(np.sum(binarize_severe(actual, config)))
    return CountyMetrics(
        fips=fips,
        macro_f1=report.macro_f1,
        mae=reg.mae,
        mse=reg.mse,
        severe_ratio=severe / actual.size,
        n_samples=int(actual.size),
    )


def per_county_metrics(fips_per_sample, actual, predicted, config=EvalConfig()):
    """County-level metric rows plus a pooled statewide row (fips -1).

    actual/predicted are (S, n) label matrices aligned with
    fips_per_sample; all horizon steps of a county pool together.
    """
    fips_per_sample = np.asarray(fips_per_sample)
    actual = np.asarray(actual, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    rows = []
    for fips in np.unique(fips_per_sample):
        sel = fips_per_sample == fips
        rows.append(_county_row(int(fips), actual[sel].reshape(-1),
                                predicted[sel].reshape(-1), config))
    rows.append(_county_row(-1, actual.reshape(-1), predicted.reshape(-1), config))
    return rows


def severe_ratio_correlation(county_metrics):
    """Pearson r between county macro F1 and county severe ratio."""
    rows = [c for c in county_metrics if c.fips >= 0]
    if len(rows) < 2:
        raise DegenerateVariance("need at least 2 counties")
    f1 = np.asarray([c.macro_f1 for c in rows])
    ratio = np.asarray([c.severe_ratio for c in rows])
    if f1.std() == 0 or ratio.std() == 0:
        raise DegenerateVariance("zero variance in macro F1 or severe ratio")
    f1c = f1 - f1.mean()
    rc = ratio - ratio.mean()
    return float(np.sum(f1c * rc) / np.sqrt(np.sum(f1c * f1c) * np.sum(rc * rc)))


def build_report(fips_per_sample, actual, predicted, config=EvalConfig()):
    """Pooled report over all samples and horizon steps."""
    flat_a = np.asarray(actual, dtype=np.float64).reshape(-1)
    flat_p = np.asarray(predicted, dtype=np.float64).reshape(-1)
    reg = regression_metrics(flat_a, flat_p)
    assert reg.mse >= reg.mae ** 2 - 1e-12, "MSE >= MAE^2 must hold (Jensen)"
    report = EvaluationReport(
        regression=reg,
        classification=classification_report(
            binarize_severe(flat_a, config), binarize_severe(flat_p, config)),
        categories=category_analysis(flat_a, flat_p, config),
        counties=per_county_metrics(fips_per_sample, actual, predicted, config),
    )
    return report


# --- file emission ------------------------------------------------------

def write_report_files(report, out_dir, extra=None):
    """Emit metrics.json plus the three CSV tables into out_dir."""
    out_dir.mkdir(parents=True, exist_ok=True)

    payload = {
        "mse": report.regression.mse,
        "mae": report.regression.mae,
        "macro_f1": report.classification.macro_f1,
        "weighted_f1": report.classification.weighted_f1,
    }
    if extra:
        payload.update(extra)
    with open(out_dir / "metrics.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    with open(out_dir / "classification_report.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "precision", "recall", "f1", "support"])
        for label, entry in (("0", report.classification.negative),
                             ("1", report.classification.positive)):
            writer.writerow([label, entry.precision, entry.recall,
                             entry.f1, entry.support])
        writer.writerow(["macro_f1", report.classification.macro_f1, "", "", ""])
        writer.writerow(["weighted_f1", report.classification.weighted_f1, "", "", ""])

    with open(out_dir / "category_analysis.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(asdict(CategoryAnalysisRow(0, 0, 0, 0, 0, 0, 0, 0))))
        for row in report.categories:
            writer.writerow(list(asdict(row).values()))

    with open(out_dir / "county_metrics.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fips", "macro_f1", "mae", "mse", "severe_ratio",
                         "n_samples"])
        for c in report.counties:
            if c.fips >= 0:
                writer.writerow([c.fips, c.macro_f1, c.mae, c.mse,
                                 c.severe_ratio, c.n_samples])
