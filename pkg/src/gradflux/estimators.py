"""scikit-learn compatible wrappers around the fitting routines.

The functional API in :mod:`gradflux.fitting` and :mod:`gradflux.coherence`
does the work; these classes add ``fit``/``predict``/``get_params`` so the
fits compose with pipelines, ``clone`` and grid searches.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_consistent_length, check_is_fitted

from .circuit import EnergyParams, batch_levels
from .coherence import DecayTrace, fit_echo, fit_t1
from .fitting import (
    PARAM_NAMES,
    FitConfig,
    SpectroscopyDataset,
    fit_lorentzian,
    fit_spectrum,
    lorentzian,
    model_frequencies,
)


def _split_xy(X):
    X = check_array(X, ensure_2d=True, dtype=float)
    if X.shape[1] != 2:
        raise ValueError(f"X must have two columns (b_ext_ut, m), got {X.shape[1]}")
    return X[:, 0], X[:, 1]


class FluxoniumSpectrumFitter(RegressorMixin, BaseEstimator):
    """Joint fit of (E_J, E_C, E_L, A_eff, alpha) to transition frequencies.

    ``X`` has columns (applied field in µT, trapped fluxon number) and ``y`` is
    the measured frequency in GHz. Transition labels default to ``0-1``.

    Parameters
    ----------
    init : dict or None
        Starting point keyed by ``e_j, e_c, e_l, a_eff, alpha``; ``None`` uses
        the built-in heuristic seed.
    f_res_ghz : float or None
        Readout resonator frequency, needed for resonator-mediated labels.
    max_iter, eigen_tol, rel_step :
        Optimizer settings, see :class:`gradflux.fitting.FitConfig`.
    """

    def __init__(self, init=None, f_res_ghz=None, max_iter=200, eigen_tol=1e-10, rel_step=1e-6):
        self.init = init
        self.f_res_ghz = f_res_ghz
        self.max_iter = max_iter
        self.eigen_tol = eigen_tol
        self.rel_step = rel_step

    def fit(self, X, y, sigma=None, transitions=None):
        b, m = _split_xy(X)
        y = check_array(y, ensure_2d=False, dtype=float)
        check_consistent_length(b, y)
        if sigma is None:
            sigma = 1e-3
        n = b.size
        labels = tuple(transitions) if transitions is not None else ("0-1",) * n
        data = SpectroscopyDataset(b, y, sigma, np.round(m).astype(int), labels)
        cfg = FitConfig(self.max_iter, self.eigen_tol, self.rel_step, self.f_res_ghz)
        self.result_ = fit_spectrum(data, seed=self.init, config=cfg)
        est = self.result_.estimates
        self.params_ = EnergyParams(est["e_j"], est["e_c"], est["e_l"])
        self.a_eff_ = est["a_eff"]
        self.alpha_ = est["alpha"]
        self.coef_ = np.array([est[k] for k in PARAM_NAMES])
        self.sigmas_ = dict(self.result_.sigmas)
        self.covariance_ = self.result_.covariance
        self.chi2_ = self.result_.chi2
        self.n_features_in_ = 2
        return self

    def predict(self, X, transitions=None):
        check_is_fitted(self, "coef_")
        b, m = _split_xy(X)
        labels = tuple(transitions) if transitions is not None else ("0-1",) * b.size
        return model_frequencies(self.coef_, b, np.round(m).astype(int), labels, f_res=self.f_res_ghz)


class FluxoniumSpectrum(TransformerMixin, BaseEstimator):
    """Maps total flux offsets (one column, flux quanta) to transition frequencies
    f_01 .. f_0(n_levels-1). Stateless; ``fit`` only records the input width."""

    def __init__(self, e_j=8.8, e_c=4.09, e_l=1.856, n_levels=3, tol=1e-9):
        self.e_j = e_j
        self.e_c = e_c
        self.e_l = e_l
        self.n_levels = n_levels
        self.tol = tol

    def fit(self, X, y=None):
        check_array(X, ensure_2d=True)
        EnergyParams(self.e_j, self.e_c, self.e_l)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, ensure_2d=True, dtype=float)
        levels, *_ = batch_levels(
            EnergyParams(self.e_j, self.e_c, self.e_l), X[:, 0], n_levels=self.n_levels, tol=self.tol
        )
        return levels[:, 1:]


class LorentzianPeakFitter(RegressorMixin, BaseEstimator):
    """Single-line Lorentzian fit; ``X`` is one column of drive frequency."""

    def fit(self, X, y):
        X = check_array(X, ensure_2d=True, dtype=float)
        res = fit_lorentzian(X[:, 0], y)
        self.center_ = res.center
        self.center_sigma_ = res.center_sigma
        self.width_ = res.width
        self.amplitude_ = res.amplitude
        self.offset_ = res.offset
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "center_")
        X = check_array(X, ensure_2d=True, dtype=float)
        return lorentzian(X[:, 0], self.center_, self.width_, self.amplitude_, self.offset_)


class DecayFitter(RegressorMixin, BaseEstimator):
    """Relaxation (``kind='t1'``) or Hahn-echo (``kind='echo'``) decay fit.

    ``X`` is one column of delay times in µs, ``y`` the normalized population.
    """

    def __init__(self, kind="t1", sweet_spot=True):
        self.kind = kind
        self.sweet_spot = sweet_spot

    def fit(self, X, y, sigma=None):
        X = check_array(X, ensure_2d=True, dtype=float)
        trace = DecayTrace(X[:, 0], y, sigma)
        if self.kind == "t1":
            res = fit_t1(trace)
            self.gamma0_, self.gamma_phi_ = 1.0 / res.t1, 0.0
            self.t1_ = res.t1
            self.amplitude_, self.offset_ = res.amplitude, res.offset
            self.t2e_ = None
        elif self.kind == "echo":
            rates = fit_echo(trace, at_sweet_spot=self.sweet_spot)
            self.rates_ = rates
            self.gamma0_, self.gamma_phi_ = rates.gamma0, rates.gamma_phi
            self.amplitude_, self.offset_ = rates.amplitude, rates.offset
            self.t2e_ = rates.t2e
        else:
            raise ValueError(f"kind must be 't1' or 'echo', got {self.kind!r}")
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "gamma0_")
        t = check_array(X, ensure_2d=True, dtype=float)[:, 0]
        return self.amplitude_ * np.exp(-self.gamma0_ * t - (self.gamma_phi_ * t) ** 2) + self.offset_


__all__ = [
    "FluxoniumSpectrumFitter",
    "FluxoniumSpectrum",
    "LorentzianPeakFitter",
    "DecayFitter",
]
