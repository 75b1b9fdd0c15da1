"""Geometric-AIC model selection over the plane-group hierarchy.

For a model of multiplicity ``k`` fitted to ``N`` coefficients with sum of
squared residuals ``J`` the criterion is ``G-AIC = J + 2 (N / k) eps2``, where
``eps2`` is the squared generalized noise estimated from the K-L-best model.
Models are compared through ``delta = G-AIC - min``, relative likelihoods
``exp(-delta / 2)`` and their normalized versions, the geometric Akaike
weights.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, asdict
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import HIERARCHY, SELECTABLE, HierarchyGraph, get_group

logger = logging.getLogger(__name__)

DEFAULT_SUBSET = ("p2", "p3", "p6")
PERFECT = 1e-12
INDETERMINATE = "p1"


class DegenerateBaselineError(ZeroDivisionError):
    """The less symmetric model fits perfectly, so ratio tests are undefined."""


def climb_threshold(k_m, k_l, N_m=None, N_l=None) -> float:
    """Upper bound on ``J_m / J_l`` for accepting the more symmetric model."""
    if k_l < 2:
        raise ValueError("the comparison is undefined for k_l = 1")
    ratio = 1.0 if N_m is None or N_l is None else N_m / N_l
    return 1.0 + 2.0 * (k_m - ratio * k_l) / (k_m * (k_l - 1))


def climb_allowed(J_m, J_l, k_m, k_l, N_m=None, N_l=None) -> bool:
    """Whether the supergroup model ``m`` is geometrically preferred over subgroup ``l``.

    With ``N_m == N_l`` (or both omitted) this is ``J_m / J_l < 1 + 2 (k_m - k_l) / (k_m (k_l - 1))``;
    otherwise the model-specific numbers of coefficients enter the threshold.
    """
    threshold = climb_threshold(k_m, k_l, N_m, N_l)
    if J_l < 0 or J_m < 0:
        raise ValueError("sums of squared residuals must be nonnegative")
    if J_l == 0:
        raise DegenerateBaselineError("J_l = 0: the subgroup model fits perfectly")
    return J_m / J_l < threshold


def _allowed(J_m, J_l, k_m, k_l, N_m, N_l) -> bool:
    if J_l <= PERFECT:
        return J_m <= PERFECT
    return climb_allowed(J_m, J_l, k_m, k_l, N_m, N_l)


def estimate_noise(J_best, N, k) -> float:
    """Squared generalized noise ``J / (N - N / k)`` of the K-L-best model."""
    dof = N - N / k
    if dof <= 0:
        raise ValueError("N must exceed N/k")
    return J_best / dof


def gaic(J, N, k, eps2) -> float:
    return J + 2.0 * (N / k) * eps2


def akaike_weights(gaics):
    """Deltas, relative likelihoods and weights (percent) for a set of G-AIC values."""
    g = np.asarray(gaics, dtype=float)
    if g.size == 0:
        raise ValueError("no models to weigh")
    delta = g - g.min()
    lik = np.exp(-delta / 2.0)
    return delta, lik, 100.0 * lik / lik.sum()


def evidence_ratio(gaic_i, gaic_j) -> float:
    """Relative likelihood of model ``i`` over model ``j``."""
    return math.exp(-(gaic_i - gaic_j) / 2.0)


def confidence(J_m, J_l, k_m, k_l):
    """Information content ``K``, its critical value and the confidence in percent.

    Both G-AIC values use the noise estimate of the less symmetric model;
    ``C = 100 (1 - K) / (1 - K_crit)``.
    """
    if J_l <= 0:
        raise DegenerateBaselineError("J_l = 0: confidence is undefined")
    if k_l < 2:
        raise ValueError("confidence is undefined for k_l = 1")
    K = math.sqrt((J_m + 2.0 * J_l * k_l / (k_m * (k_l - 1)))
                  / (J_l * (k_l + 1) / (k_l - 1)))
    K_crit = math.sqrt((k_m * k_l - k_m + 2 * k_l) / (k_m * k_l + k_m))
    return K, K_crit, 100.0 * (1.0 - K) / (1.0 - K_crit)


def _base_noise(J, N, k) -> float:
    return J / (N - N / k)


def find_kl_best(scores: Mapping, graph: HierarchyGraph = HIERARCHY) -> str:
    """Climb the hierarchy from the best-fitting k = 2 or k = 3 model.

    ``scores`` maps group names to ``(J, N)``. The starting node is the
    scored k = 2 or k = 3 model with the smallest implied noise
    ``J / (N - N/k)`` (smallest J, then larger k, on ties). A supergroup is
    reached when at least one of its scored maximal subgroups was reached and
    the ratio test passes against every scored maximal subgroup. The answer
    is the reached node of largest k, ties going to the smaller J.
    """
    base = [g for g in scores if get_group(g).k in (2, 3)]
    if not base:
        return INDETERMINATE
    start = min(base, key=lambda g: (_base_noise(*scores[g], get_group(g).k),
                                     scores[g][0], -get_group(g).k, g))
    reached = {start}
    for name in graph.topological_order():
        if name not in scores or name in reached or get_group(name).k <= 3:
            continue
        subs = [s.name for s in graph.maximal_subgroups(name) if s.name in scores]
        if not any(s in reached for s in subs):
            continue
        J_m, N_m = scores[name]
        k_m = get_group(name).k
        if all(_allowed(J_m, scores[s][0], k_m, get_group(s).k, N_m, scores[s][1]) for s in subs):
            reached.add(name)
    return min(reached, key=lambda g: (-get_group(g).k, scores[g][0]))


@dataclass
class ModelScore:
    group: str
    J: float
    N: int
    k: int
    gaic: float = float("nan")
    delta: float = float("nan")
    likelihood: float = float("nan")
    weight_full: float = float("nan")
    weight_subset: Optional[float] = None
    evidence_best: float = float("nan")
    F_res: Optional[float] = None
    phi_res: Optional[float] = None
    Ao_over_Ae: Optional[float] = None
    J_L: Optional[float] = None


@dataclass
class Confidence:
    subgroup: str
    supergroup: str
    K: float
    K_crit: float
    C: float


@dataclass
class ClassificationReport:
    scores: list
    kl_best: str
    epsilon_sq: float
    crisp_like_suggestion: Optional[str]
    confidences: list = field(default_factory=list)
    subset: tuple = DEFAULT_SUBSET
    best_gaic: Optional[str] = None

    def __getitem__(self, group) -> ModelScore:
        for s in self.scores:
            if s.group == group:
                return s
        raise KeyError(group)

    @property
    def groups(self):
        return [s.group for s in self.scores]

    def weights(self, subset: bool = False) -> dict:
        if subset:
            return {s.group: s.weight_subset for s in self.scores if s.weight_subset is not None}
        return {s.group: s.weight_full for s in self.scores}

    def rows(self) -> list:
        """Report rows with the published table column names."""
        out = []
        for s in self.scores:
            out.append({
                "group": s.group,
                "J_FC": s.J,
                "F_res": s.F_res,
                "phi_res": s.phi_res,
                "crisp_like_suggestion": self.crisp_like_suggestion,
                "kl_best": self.kl_best,
                "G-AIC": s.gaic,
                "G-AW(full)": s.weight_full,
                "G-AW(subset)": s.weight_subset,
                "E_best_j": s.evidence_best,
                "N": s.N,
                "epsilon_sq": self.epsilon_sq,
            })
        return out

    def as_dict(self) -> dict:
        return {
            "kl_best": self.kl_best,
            "epsilon_sq": self.epsilon_sq,
            "crisp_like_suggestion": self.crisp_like_suggestion,
            "subset": list(self.subset),
            "rows": self.rows(),
            "confidences": [asdict(c) for c in self.confidences],
        }


def _unpack(value):
    """Accept ``(J, N)`` tuples or residual records with ``J_FC`` and ``N``."""
    if hasattr(value, "J_FC"):
        return (float(value.J_FC), int(value.N),
                {"F_res": value.F_res, "phi_res": value.phi_res,
                 "Ao_over_Ae": value.Ao_over_Ae, "J_L": value.J_L})
    J, N = value[:2]
    return float(J), int(N), {}


def classify(results: Mapping, subset: Optional[Sequence[str]] = DEFAULT_SUBSET,
             graph: HierarchyGraph = HIERARCHY) -> ClassificationReport:
    """Score every model and assemble the report.

    Parameters
    ----------
    results : mapping
        Group name to ``(J, N)`` or to a residual record carrying ``J_FC``,
        ``N`` and optionally the traditional residuals.
    subset : sequence of str, optional
        Groups whose weights are also renormalized among themselves. Members
        that were not scored are ignored.
    """
    if not results:
        raise ValueError("no models to classify")
    order = [g for g in SELECTABLE if g in results] + [g for g in results if g not in SELECTABLE]
    scores, extras = {}, {}
    for g in order:
        get_group(g)
        J, N, extra = _unpack(results[g])
        scores[g], extras[g] = (J, N), extra

    kl = find_kl_best(scores, graph)
    if kl == INDETERMINATE:
        eps2 = 0.0
    else:
        J_b, N_b = scores[kl]
        eps2 = estimate_noise(J_b, N_b, get_group(kl).k)

    rows = []
    for g in order:
        J, N = scores[g]
        k = get_group(g).k
        rows.append(ModelScore(g, J, N, k, gaic=gaic(J, N, k, eps2), **extras[g]))
    delta, lik, w = akaike_weights([r.gaic for r in rows])
    best = int(np.argmin([r.gaic for r in rows]))
    for r, d, l, wi in zip(rows, delta, lik, w):
        r.delta, r.likelihood, r.weight_full = float(d), float(l), float(wi)
        r.evidence_best = evidence_ratio(rows[best].gaic, r.gaic)

    chosen = tuple(g for g in (subset or ()) if g in scores)
    if chosen:
        _, _, ws = akaike_weights([scores_row.gaic for scores_row in rows if scores_row.group in chosen])
        for r, wi in zip([r for r in rows if r.group in chosen], ws):
            r.weight_subset = float(wi)

    if kl != INDETERMINATE and rows[best].group != kl:
        logger.warning("minimum G-AIC model %s differs from K-L-best %s", rows[best].group, kl)

    phased = [r for r in rows if r.phi_res is not None]
    crisp = None
    if phased:
        crisp = min(phased, key=lambda r: (round(r.phi_res, 9), -r.k)).group

    conf = []
    for sub, sup in graph.edges:
        if sub not in scores or sup not in scores:
            continue
        (J_l, N_l), (J_m, N_m) = scores[sub], scores[sup]
        k_l, k_m = get_group(sub).k, get_group(sup).k
        if k_l < 2 or J_l <= PERFECT or not _allowed(J_m, J_l, k_m, k_l, N_m, N_l):
            continue
        K, K_crit, C = confidence(J_m, J_l, k_m, k_l)
        conf.append(Confidence(sub, sup, K, K_crit, C))

    return ClassificationReport(rows, kl, eps2, crisp, conf, chosen, rows[best].group)
