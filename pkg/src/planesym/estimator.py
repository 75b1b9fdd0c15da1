"""scikit-learn style wrappers around the classification pipeline."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .core import SELECTABLE, get_group
from .pipeline import classify_fcs, classify_image, extract
from .selection import DEFAULT_SUBSET
from .spectrum import DEFAULT_MIN_AMP
from .validation import check_images


class FourierCoefficientExtractor(TransformerMixin, BaseEstimator):
    """Turn square gray images into indexed structure-bearing coefficient sets.

    Parameters
    ----------
    radius_cut : float, optional
        Frequency radius in pixels; defaults to one eighth of the image side.
    min_amp : float
        Peak and coefficient threshold relative to the strongest one.
    """

    def __init__(self, radius_cut=None, min_amp=DEFAULT_MIN_AMP):
        self.radius_cut = radius_cut
        self.min_amp = min_amp

    def fit(self, X=None, y=None):
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        return [extract(img, self.radius_cut, self.min_amp).fcs for img in check_images(X)]


class PlaneSymmetryClassifier(ClassifierMixin, BaseEstimator):
    """Plane-symmetry classifier for noisy periodic images.

    The model has no trainable parameters: ``fit`` only records the label set.
    ``predict`` returns the K-L-best group of each image and
    ``predict_proba`` the geometric Akaike weights over ``groups`` (as
    fractions, columns ordered like ``classes_``).

    Parameters
    ----------
    selection : {"square", "circle"}
        Region shape.
    size : int, optional
        Side of the selection (power of two); defaults to the largest that fits,
        up to 1024.
    radius_cut, min_amp : see :class:`FourierCoefficientExtractor`.
    groups : sequence of str
        Plane-group settings to score.
    subset : sequence of str
        Groups for the renormalized subset weights kept in ``reports_``.

    Attributes
    ----------
    classes_ : ndarray of str
    reports_ : list of ClassificationReport
        Reports from the most recent ``predict``/``predict_proba`` call.
    """

    def __init__(self, selection="square", size=None, radius_cut=None,
                 min_amp=DEFAULT_MIN_AMP, groups=SELECTABLE, subset=DEFAULT_SUBSET):
        self.selection = selection
        self.size = size
        self.radius_cut = radius_cut
        self.min_amp = min_amp
        self.groups = groups
        self.subset = subset

    def fit(self, X=None, y=None):
        for g in self.groups:
            get_group(g)
        self.classes_ = np.array(list(self.groups))
        return self

    def _analyses(self, X):
        check_is_fitted(self, "classes_")
        out = []
        for img in check_images(X):
            out.append(classify_image(img, self.selection, self.size, None, self.radius_cut,
                                      self.min_amp, list(self.classes_), self.subset))
        self.reports_ = [a.report for a in out]
        return out

    def predict(self, X):
        return np.array([a.report.kl_best for a in self._analyses(X)])

    def predict_proba(self, X):
        rows = []
        for a in self._analyses(X):
            w = a.report.weights()
            rows.append([w[g] / 100.0 for g in self.classes_])
        return np.array(rows)

    def predict_fcs(self, fcs_list):
        """Classify already extracted coefficient sets."""
        check_is_fitted(self, "classes_")
        reports = [classify_fcs(f, list(self.classes_), self.subset).report for f in fcs_list]
        self.reports_ = reports
        return np.array([r.kl_best for r in reports])
