"""Scripted desk-scale reruns of the published result tables.

Each runner refits models from a pinned recipe and compares the outcome
against the published reference numbers under explicit tolerance bands:
exact equality where a frozen fixture makes the run deterministic,
intervals where the fold shuffles and search grids behind the reference
numbers are unknown.  Rows marked informational are printed for context
and never gate the outcome.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import (
    Dataset,
    SynthSpec,
    load_csv,
    normalize_minmax,
    synth_generate,
    unseen_label_test_partition,
)
from .errors import IoError
from .kernel import fit_kernel, support_vectors
from .kernels import KernelSpec
from .linear import ConstraintMode, Hyperparameters, fit_linear
from .modelselect import GridSpec, grid_search_cv, ovr_baseline_fit
from .predict import predict_multilabel_matrix

TABLES = ("t3", "t4", "t5", "unseen")

# Pinned recipe for the unseen-label toy.  The training clusters are repo
# constants (see data.py); the fit below reproduces the six-row test table
# exactly, so these values are load-bearing and must not drift.  The long
# iteration budget matters: margin-riding patterns clamp their auxiliaries
# at epsilon and the tail of the descent is slow, but the label table only
# settles near the end of it.
UNSEEN_SEED = 7
UNSEEN_N = 10
UNSEEN_MODE = "sw-hb"
UNSEEN_ALPHA = 1.0
UNSEEN_BETA = 10.0
UNSEEN_MAX_ITERS = 4000
UNSEEN_TOL = 1e-9

# Pinned toy recipes for the two-class table.  Support-vector counts carry
# a +/-3 band per class because the reference extraction rule is unstated.
# Margin-riding patterns only reach score 1 at the end of the slow descent
# tail, so the counts need the deeper budget below, not the fit defaults.
T3_RECIPES = {
    "hourglass": {
        "kernel": {"kind": "gaussian", "sigma": 0.6},
        "alpha": 1.0,
        "beta": 10.0,
        "n_per_cluster": 30,
        "seed": 0,
        "accuracy_ref": 1.0,
        "sv_ref": (9, 10),
        "gating": True,
    },
    "moon": {
        "kernel": {"kind": "gaussian", "sigma": 0.8},
        "alpha": 1.0,
        "beta": 10.0,
        "n_per_cluster": 25,
        "seed": 0,
        "accuracy_ref": 1.0,
        "sv_ref": (4, 6),
        "gating": True,
    },
    "random_two_class": {
        "kernel": {"kind": "linear"},
        "alpha": 1.0,
        "beta": 10.0,
        "n_per_cluster": 20,
        "seed": 0,
        "accuracy_ref": 0.95,
        "sv_ref": (6, 6),
        "gating": False,
    },
}
SV_SLACK = 3
T3_MAX_ITERS = 12000
T3_TOL = 1e-10

# Benchmark bands.  Mean 3-fold accuracy must clear the floor; the
# reference value is shown beside it.  Rows without a floor are context.
# The iris/linear floor is not reachable by this implementation: every
# mode, coefficient sweep, normalization, and fit depth tops out at 0.940
# (verified against the subgradient oracle), so that row fails by design
# rather than having its band quietly widened.
T4_BANDS = {
    ("iris", "linear"): {"ref": 0.987, "floor": 0.95},
    ("iris", "gaussian"): {"ref": 0.987, "floor": 0.95},
    ("wine", "linear"): {"ref": 0.843, "floor": None},
    ("wine", "gaussian"): {"ref": 0.966, "floor": 0.92},
    ("glass", "linear"): {"ref": 0.851, "floor": None},
    ("glass", "gaussian"): {"ref": 0.869, "floor": 0.78},
}
T5_BANDS = {
    "scene": {
        "accuracy": {"ref": 0.652, "lo": 0.60, "hi": 0.70},
        "hamming": {"ref": 0.12, "lo": 0.09, "hi": 0.16},
    },
    "emotions": {
        "accuracy": {"ref": 0.50, "lo": 0.44, "hi": 0.56},
        "hamming": {"ref": 0.255, "lo": None, "hi": None},
    },
}

# Cross-validated benchmark grids, pinned small enough that every table
# finishes well inside the desk-scale budget (each kernel solve is cubic
# in K*(N+1)).
T4_LINEAR_GRID = dict(
    alphas=(0.5, 1.0, 1.5),
    betas=(1.0, 10.0, 100.0),
    gammas=(1.0,),
    sigmas=(1.0,),
    seed=0,
    n_folds=3,
)
T4_GAUSSIAN_GRID = dict(
    alphas=(0.5,),
    betas=(10.0, 100.0),
    gammas=(1.0,),
    sigmas=(0.25, 0.5, 1.0, 2.0),
    kernel_kind="gaussian",
    seed=0,
    n_folds=3,
)
T5_GAUSSIAN_GRID = dict(
    alphas=(0.5,),
    betas=(10.0,),
    gammas=(1.0,),
    sigmas=(1.0, 2.0),
    kernel_kind="gaussian",
    seed=0,
    n_folds=3,
)
# Cap for the larger multilabel set: a seeded subsample keeps the cubic
# kernel solves inside the runtime budget; the band already allows for
# the variance this introduces.
T5_MAX_INSTANCES = 600


@dataclass
class BandRow:
    """One compared quantity: ours versus the reference, with a band."""

    fixture: str
    metric: str
    ours: str
    reference: str
    band: str
    ok: bool
    gating: bool = True

    @property
    def verdict(self) -> str:
        if not self.gating:
            return "info"
        return "ok" if self.ok else "FAIL"


@dataclass
class TableReport:
    """All band rows of one reproduction table plus free-form notes."""

    table: str
    title: str
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.rows if r.gating)

    def as_dict(self) -> dict:
        return {
            "table": self.table,
            "title": self.title,
            "passed": self.passed,
            "rows": [
                {
                    "fixture": r.fixture,
                    "metric": r.metric,
                    "ours": r.ours,
                    "reference": r.reference,
                    "band": r.band,
                    "ok": r.ok,
                    "gating": r.gating,
                    "verdict": r.verdict,
                }
                for r in self.rows
            ],
            "notes": list(self.notes),
        }

    def format_text(self) -> str:
        header = ("fixture", "metric", "ours", "reference", "band", "verdict")
        cells = [header] + [
            (r.fixture, r.metric, r.ours, r.reference, r.band, r.verdict)
            for r in self.rows
        ]
        widths = [max(len(row[j]) for row in cells) for j in range(len(header))]
        lines = [f"table {self.table}: {self.title}"]
        for row in cells:
            lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        for note in self.notes:
            lines.append(f"note: {note}")
        lines.append(f"result: {'pass' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def _bitstring(row) -> str:
    return "[" + ",".join(str(int(v)) for v in row) + "]"


def _training_accuracy(model, dataset: Dataset) -> float:
    scores = model.decision_scores(dataset.features)
    pred = np.argmax(scores, axis=1)
    truth = np.argmax(dataset.labels, axis=1)
    return float(np.mean(pred == truth))


def run_unseen(data_dir=None) -> TableReport:
    """Refit the unseen-label toy and compare the six-row test table."""
    report = TableReport(
        table="unseen",
        title="unseen label set toy, linear soft-w hard-b versus one-vs-rest",
    )
    train = synth_generate(
        SynthSpec("unseen_label_toy", n_per_cluster=UNSEEN_N, seed=UNSEEN_SEED)
    )
    hp = Hyperparameters(
        alpha=UNSEEN_ALPHA,
        beta=UNSEEN_BETA,
        max_iters=UNSEEN_MAX_ITERS,
        tol=UNSEEN_TOL,
    )
    model = fit_linear(train, ConstraintMode.from_token(UNSEEN_MODE), hp)
    test = unseen_label_test_partition()
    pred = predict_multilabel_matrix(model.decision_scores(test.features))
    for i in range(test.n_instances):
        x = test.features[i]
        ours = _bitstring(pred[i])
        ref = _bitstring(test.labels[i])
        report.rows.append(
            BandRow(
                fixture=f"({x[0]:g},{x[1]:g})",
                metric="label set",
                ours=ours,
                reference=ref,
                band="exact",
                ok=ours == ref,
            )
        )

    ovr = ovr_baseline_fit(train, hp)
    seen = np.vstack([train.features, test.features])
    ovr_pred = ovr.predict_multilabel_matrix(seen)
    emitted = bool(np.any((ovr_pred[:, 0] == 0) & (ovr_pred[:, 1] == 1)))
    report.rows.append(
        BandRow(
            fixture="ovr baseline",
            metric="[0,1] emitted",
            ours="yes" if emitted else "no",
            reference="no",
            band="never",
            ok=not emitted,
        )
    )
    for rec in ovr.untrainable:
        report.notes.append(
            f"ovr class {rec.class_index + 1} untrainable ({rec.reason}); "
            "it scores +1 constantly"
        )
    report.notes.append(
        f"recipe: seed={UNSEEN_SEED} n_per_cluster={UNSEEN_N} mode={UNSEEN_MODE} "
        f"alpha={UNSEEN_ALPHA:g} beta={UNSEEN_BETA:g} "
        f"max_iters={UNSEEN_MAX_ITERS} tol={UNSEEN_TOL:g}"
    )
    return report


def run_t3(data_dir=None) -> TableReport:
    """Two-class toys: training accuracy and support-vector counts."""
    report = TableReport(
        table="t3", title="two-class toys, soft-w hard-b, pinned kernels"
    )
    for name, rec in T3_RECIPES.items():
        data = synth_generate(
            SynthSpec(name, n_per_cluster=rec["n_per_cluster"], seed=rec["seed"])
        )
        spec = KernelSpec(**rec["kernel"])
        hp = Hyperparameters(
            alpha=rec["alpha"],
            beta=rec["beta"],
            max_iters=T3_MAX_ITERS,
            tol=T3_TOL,
        )
        model = fit_kernel(data, spec, ConstraintMode("soft", "hard"), hp)
        acc = _training_accuracy(model, data)
        gating = rec["gating"]
        report.rows.append(
            BandRow(
                fixture=f"{name}/{spec.kind}",
                metric="train accuracy",
                ours=_fmt(acc),
                reference=_fmt(rec["accuracy_ref"]),
                band="= 1.000" if gating else "context",
                ok=acc == 1.0 if gating else True,
                gating=gating,
            )
        )
        sv = support_vectors(model, data)
        for k, ref_count in enumerate(rec["sv_ref"]):
            count = int(sv[k].size)
            lo, hi = ref_count - SV_SLACK, ref_count + SV_SLACK
            report.rows.append(
                BandRow(
                    fixture=f"{name}/{spec.kind}",
                    metric=f"sv count c{k + 1}",
                    ours=str(count),
                    reference=str(ref_count),
                    band=f"[{lo}, {hi}]" if gating else "context",
                    ok=lo <= count <= hi if gating else True,
                    gating=gating,
                )
            )
        report.notes.append(
            f"{name}: n_per_cluster={rec['n_per_cluster']} seed={rec['seed']} "
            f"kernel={rec['kernel']} alpha={rec['alpha']:g} beta={rec['beta']:g}"
        )
    return report


def _bundled_multiclass(name: str):
    try:
        from sklearn import datasets as skd
    except ImportError:  # pragma: no cover - optional dependency
        return None
    loader = {"iris": skd.load_iris, "wine": skd.load_wine}.get(name)
    if loader is None:
        return None
    raw = loader()
    labels = np.zeros((raw.target.size, len(raw.target_names)), dtype=np.int64)
    labels[np.arange(raw.target.size), raw.target] = 1
    return Dataset(
        np.asarray(raw.data, dtype=float),
        labels,
        tuple(str(c) for c in raw.target_names),
        tuple(f"f{j + 1}" for j in range(np.asarray(raw.data).shape[1])),
    )


def _load_multiclass(name: str, data_dir) -> Dataset:
    path = Path(data_dir) / f"{name}.csv"
    if path.exists():
        return normalize_minmax(load_csv(path, multiclass_column="class"))
    bundled = _bundled_multiclass(name)
    if bundled is not None:
        return normalize_minmax(bundled)
    raise IoError(
        f"missing dataset file {path}; provide the {name} data as a CSV "
        "with numeric feature columns and a 'class' column"
    )


def _load_multilabel(name: str, data_dir) -> Dataset:
    path = Path(data_dir) / f"{name}.csv"
    if not path.exists():
        raise IoError(
            f"missing dataset file {path}; provide the {name} data as a CSV "
            "with numeric feature columns and one 'label:<name>' column per class"
        )
    return normalize_minmax(load_csv(path))


def run_t4(data_dir="data") -> TableReport:
    """Multiclass benchmarks: 3-fold mean accuracy under pinned grids."""
    report = TableReport(
        table="t4", title="multiclass benchmarks, 3-fold cross validation"
    )
    for name in ("iris", "wine", "glass"):
        try:
            data = _load_multiclass(name, data_dir)
        except IoError as e:
            # a missing benchmark cannot pass its band; report it as a
            # failed comparison instead of aborting the other fixtures
            for kernel_label in ("linear", "gaussian"):
                band = T4_BANDS[(name, kernel_label)]
                gated = band["floor"] is not None
                report.rows.append(
                    BandRow(
                        fixture=f"{name}/{kernel_label}",
                        metric="cv accuracy",
                        ours="no data",
                        reference=_fmt(band["ref"]),
                        band=f">= {band['floor']:g}" if gated else "context",
                        ok=False if gated else True,
                        gating=gated,
                    )
                )
            report.notes.append(str(e))
            continue
        for solver, grid_args in (
            ("linear", T4_LINEAR_GRID),
            ("kernel", T4_GAUSSIAN_GRID),
        ):
            kernel_label = "linear" if solver == "linear" else "gaussian"
            band = T4_BANDS[(name, kernel_label)]
            cv = grid_search_cv(
                data, GridSpec(**grid_args), task="multiclass", solver=solver
            )
            acc = cv.best_mean_accuracy
            floor = band["floor"]
            report.rows.append(
                BandRow(
                    fixture=f"{name}/{kernel_label}",
                    metric="cv accuracy",
                    ours=_fmt(acc),
                    reference=_fmt(band["ref"]),
                    band=f">= {floor:g}" if floor is not None else "context",
                    ok=acc >= floor if floor is not None else True,
                    gating=floor is not None,
                )
            )
            report.notes.append(
                f"{name}/{kernel_label} best tuple: {cv.best_tuple}"
            )
    return report


def run_t5(data_dir="data") -> TableReport:
    """Multilabel benchmarks: 3-fold accuracy and hamming loss bands."""
    report = TableReport(
        table="t5", title="multilabel benchmarks, gaussian kernel, 3-fold"
    )
    for name in ("scene", "emotions"):
        try:
            data = _load_multilabel(name, data_dir)
        except IoError as e:
            for metric, band in T5_BANDS[name].items():
                gated = band["lo"] is not None
                report.rows.append(
                    BandRow(
                        fixture=f"{name}/gaussian",
                        metric=f"cv {metric}",
                        ours="no data",
                        reference=_fmt(band["ref"]),
                        band=f"[{band['lo']:g}, {band['hi']:g}]" if gated else "context",
                        ok=False if gated else True,
                        gating=gated,
                    )
                )
            report.notes.append(str(e))
            continue
        if data.n_instances > T5_MAX_INSTANCES:
            keep = np.sort(
                np.random.default_rng(0).permutation(data.n_instances)[
                    :T5_MAX_INSTANCES
                ]
            )
            data = data.subset(keep)
            report.notes.append(
                f"{name}: subsampled to {T5_MAX_INSTANCES} instances (seed 0) "
                "to keep the cubic kernel solves desk-scale"
            )
        cv = grid_search_cv(
            data, GridSpec(**T5_GAUSSIAN_GRID), task="multilabel", solver="kernel"
        )
        bands = T5_BANDS[name]
        for metric, value in (
            ("accuracy", cv.best_mean_accuracy),
            ("hamming", cv.best_mean_hamming),
        ):
            band = bands[metric]
            gated = band["lo"] is not None
            report.rows.append(
                BandRow(
                    fixture=f"{name}/gaussian",
                    metric=f"cv {metric}",
                    ours=_fmt(value),
                    reference=_fmt(band["ref"]),
                    band=f"[{band['lo']:g}, {band['hi']:g}]" if gated else "context",
                    ok=band["lo"] <= value <= band["hi"] if gated else True,
                    gating=gated,
                )
            )
        report.notes.append(f"{name} best tuple: {cv.best_tuple}")
    return report


_RUNNERS = {
    "unseen": run_unseen,
    "t3": run_t3,
    "t4": run_t4,
    "t5": run_t5,
}


def run_table(table: str, data_dir="data") -> TableReport:
    """Dispatch one reproduction table by its CLI token."""
    if table not in _RUNNERS:
        raise ValueError(f"unknown table {table!r}; choose one of {TABLES}")
    return _RUNNERS[table](data_dir=data_dir)
