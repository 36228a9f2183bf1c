"""Multiple-regression characterization of unknown-unknown membership.

The least-squares fit goes through a column-pivoted QR decomposition;
rank-deficient designs fail loudly with the dependent columns named, since
coefficient interpretation is the whole point. Tail probabilities for the
t and F statistics are evaluated through the regularized incomplete beta
function (series + Lentz continued fraction, tolerance 1e-10).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import qr as _qr, solve_triangular

from .features import DEMOGRAPHIC_FIELDS, REGISTRY_IDS, StudentFeatureVector
from .grouping import UNKNOWN_UNKNOWN, GroupAssignment

DEFAULT_CLIP = (-10.0, 10.0)
DEFAULT_ALPHA = 0.05
TARGET_MODES = ("binary", "ordinal")

_BETA_TOL = 1e-14
_BETA_MAX_ITER = 500


class CharacterizeError(ValueError):
    pass


class RankDeficientError(CharacterizeError):
    def __init__(self, columns: Sequence[str]):
        super().__init__(f"rank-deficient design; dependent columns: {', '.join(columns)}")
        self.columns = list(columns)


class DegenerateTargetError(CharacterizeError):
    pass


# ---------------------------------------------------------------------------
# tail probabilities


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < 1e-300:
        d = 1e-300
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < 1e-300:
            d = 1e-300
        c = 1.0 + aa / c
        if abs(c) < 1e-300:
            c = 1e-300
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < 1e-300:
            d = 1e-300
        c = 1.0 + aa / c
        if abs(c) < 1e-300:
            c = 1e-300
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_TOL:
            return h
    raise CharacterizeError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) to ~1e-14; the symmetric form keeps the fraction convergent."""
    if a <= 0 or b <= 0:
        raise CharacterizeError("beta parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def t_sf(t: float, df: float) -> float:
    """P(T > t) for Student's t with df degrees of freedom."""
    if df <= 0:
        raise CharacterizeError("degrees of freedom must be positive")
    if t == 0.0:
        return 0.5
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
    return tail if t > 0 else 1.0 - tail


def t_two_sided_p(t: float, df: float) -> float:
    return 2.0 * t_sf(abs(t), df)


def f_sf(f: float, d1: float, d2: float) -> float:
    """P(F > f) for the F distribution with (d1, d2) degrees of freedom."""
    if d1 <= 0 or d2 <= 0:
        raise CharacterizeError("degrees of freedom must be positive")
    if f <= 0.0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))


# ---------------------------------------------------------------------------
# least squares


@dataclass
class RegressionFit:
    """Intercept-first least-squares fit with full inference diagnostics."""

    names: list[str]  # column names, names[0] == "intercept"
    params: np.ndarray
    standard_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    residuals: np.ndarray
    fitted: np.ndarray
    r2: float
    f_stat: float
    f_p: float
    n_obs: int
    df_resid: int
    target_mode: str | None = None
    dropped_columns: list[str] = field(default_factory=list)

    @property
    def gamma0(self) -> float:
        return float(self.params[0])

    @property
    def gammas(self) -> np.ndarray:
        return self.params[1:]

    def to_dict(self) -> dict:
        return {
            "target_mode": self.target_mode,
            "n_obs": self.n_obs,
            "df_resid": self.df_resid,
            "intercept": self.gamma0,
            "r2": self.r2,
            "f_stat": self.f_stat,
            "f_p": self.f_p,
            "dropped_columns": self.dropped_columns,
            "coefficients": [
                {
                    "id": self.names[j],
                    "gamma": float(self.params[j]),
                    "clipped": float(np.clip(self.params[j], *DEFAULT_CLIP)),
                    "se": float(self.standard_errors[j]),
                    "t": float(self.t_stats[j]),
                    "p": float(self.p_values[j]),
                }
                for j in range(1, len(self.names))
            ],
        }


def fit_ols(V: np.ndarray, t: np.ndarray, names: Sequence[str] | None = None) -> RegressionFit:
    """Least squares via column-pivoted QR; column 0 must be the intercept.

    Standard errors come from the unbiased residual variance and the inverse
    normal matrix; p-values are two-sided on n-k degrees of freedom; the F
    statistic tests the null that all non-intercept coefficients are zero.
    """
    V = np.asarray(V, dtype=float)
    t = np.asarray(t, dtype=float).ravel()
    n, k = V.shape
    if t.shape[0] != n:
        raise CharacterizeError("target length does not match design rows")
    if n < k:
        raise CharacterizeError(f"need at least as many rows ({n}) as columns ({k})")
    if names is None:
        names = ["intercept"] + [f"x{j}" for j in range(1, k)]
    names = list(names)
    if len(names) != k:
        raise CharacterizeError("column names do not match design width")

    Q, R, piv = _qr(V, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = max(n, k) * np.finfo(float).eps * (diag[0] if diag.size else 0.0)
    rank = int((diag > tol).sum())
    if rank < k:
        raise RankDeficientError([names[j] for j in sorted(piv[rank:])])

    beta_piv = solve_triangular(R, Q.T @ t)
    beta = np.empty(k)
    beta[piv] = beta_piv

    fitted = V @ beta
    resid = t - fitted
    rss = float(resid @ resid)
    df = n - k

    r_inv = solve_triangular(R, np.eye(k))
    cov_piv = r_inv @ r_inv.T
    cov = np.empty((k, k))
    cov[np.ix_(piv, piv)] = cov_piv

    if df > 0:
        sigma2 = rss / df
        se = np.sqrt(sigma2 * np.diag(cov))
        with np.errstate(divide="ignore", invalid="ignore"):
            t_stats = np.where(se > 0, beta / np.where(se > 0, se, 1.0), np.inf * np.sign(beta))
        p_values = np.array(
            [t_two_sided_p(float(ts), df) if np.isfinite(ts) else 0.0 for ts in t_stats]
        )
    else:
        # exact interpolation: inference undefined, coefficients still valid
        se = np.full(k, np.nan)
        t_stats = np.full(k, np.nan)
        p_values = np.full(k, np.nan)

    constant_target = bool(np.ptp(t) == 0.0)
    tss = 0.0 if constant_target else float(((t - t.mean()) ** 2).sum())
    r2 = 0.0 if constant_target else 1.0 - rss / tss
    k1 = k - 1
    if df <= 0:
        f_stat, f_p = math.nan, math.nan
    elif k1 == 0 or constant_target:
        f_stat, f_p = 0.0, 1.0
    elif rss == 0.0:
        f_stat, f_p = math.inf, 0.0
    else:
        f_stat = ((tss - rss) / k1) / (rss / df)
        f_p = f_sf(f_stat, k1, df)

    return RegressionFit(
        names=names,
        params=beta,
        standard_errors=se,
        t_stats=t_stats,
        p_values=p_values,
        residuals=resid,
        fitted=fitted,
        r2=float(r2),
        f_stat=float(f_stat),
        f_p=float(f_p),
        n_obs=n,
        df_resid=df,
    )


# ---------------------------------------------------------------------------
# unknown-unknown characterization


def build_design(
    vectors: Sequence[StudentFeatureVector],
) -> tuple[np.ndarray, list[str], list[str]]:
    """Intercept + 45 indicators + one-hot demographics (reference dropped).

    Returns (design, column names, user order). Demographic columns only
    appear when every joined student carries that attribute.
    """
    order = sorted(vectors, key=lambda v: v.user_id)
    users = [v.user_id for v in order]
    blocks = [np.ones((len(order), 1)), np.vstack([v.values for v in order])]
    names = ["intercept", *REGISTRY_IDS]
    for attr in DEMOGRAPHIC_FIELDS:
        vals = [
            (v.demographics or {}).get(attr) for v in order
        ]
        if any(val is None for val in vals):
            continue
        cats = sorted(set(vals))
        for cat in cats[1:]:  # first sorted category is the reference
            blocks.append(np.array([[1.0 if val == cat else 0.0] for val in vals]))
            names.append(f"{attr}={cat}")
    return np.hstack(blocks), names, users


def characterize_uu(
    vectors: Sequence[StudentFeatureVector],
    assignments: Sequence[GroupAssignment],
    target_mode: str = "binary",
) -> RegressionFit:
    """Regress group membership on indicators (+ demographics).

    binary target: 1 for unknown unknowns, 0 otherwise (default);
    ordinal target: the group label g in {0, 1, 2}.

    Constant columns carry no information and would make every fit
    rank-deficient, so they are dropped and recorded in the fit; genuine
    linear dependence among the remaining columns still fails loudly.
    """
    if target_mode not in TARGET_MODES:
        raise CharacterizeError(f"target_mode must be one of {TARGET_MODES}")
    group_of = {a.user_id: a.group for a in assignments}
    joined = [v for v in vectors if v.user_id in group_of]
    if len(joined) < 2:
        raise CharacterizeError("fewer than 2 students joined on user_id")
    V, names, users = build_design(joined)
    spans = V.max(axis=0) - V.min(axis=0)
    keep = [0] + [j for j in range(1, V.shape[1]) if spans[j] > 0]
    dropped = [names[j] for j in range(1, V.shape[1]) if spans[j] == 0]
    groups = np.array([group_of[u] for u in users], dtype=float)
    if not (groups == UNKNOWN_UNKNOWN).any():
        raise DegenerateTargetError("degenerate target: no unknown unknowns present")
    target = (groups == UNKNOWN_UNKNOWN).astype(float) if target_mode == "binary" else groups
    if len(np.unique(target)) < 2:
        raise DegenerateTargetError("degenerate target: single-valued")
    fit = fit_ols(V[:, keep], target, names=[names[j] for j in keep])
    fit.target_mode = target_mode
    fit.dropped_columns = dropped
    return fit


@dataclass(frozen=True)
class CoefficientRow:
    id: str
    gamma: float
    clipped: float
    se: float
    t: float
    p: float
    stars: str


def _stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def report_coefficients(
    fit: RegressionFit,
    clip: tuple[float, float] = DEFAULT_CLIP,
    bonferroni: bool = False,
) -> list[CoefficientRow]:
    """Non-intercept coefficients sorted by |gamma| descending, raw values
    retained alongside the clipped ones."""
    lo, hi = clip
    if lo >= hi:
        raise CharacterizeError("empty clip range")
    m = len(fit.names) - 1
    rows = []
    for j in range(1, len(fit.names)):
        p = float(fit.p_values[j])
        p_eff = min(1.0, p * m) if bonferroni else p
        rows.append(
            CoefficientRow(
                id=fit.names[j],
                gamma=float(fit.params[j]),
                clipped=float(np.clip(fit.params[j], lo, hi)),
                se=float(fit.standard_errors[j]),
                t=float(fit.t_stats[j]),
                p=p_eff,
                stars=_stars(p_eff),
            )
        )
    return sorted(rows, key=lambda r: (-abs(r.gamma), r.id))


def write_characterization_json(fit: RegressionFit, dest: str | Path) -> None:
    with open(dest, "w", encoding="utf-8") as fh:
        json.dump(fit.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_characterization_json(source: str | Path) -> dict:
    with open(source, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_characterization_csv(fit: RegressionFit, dest: str | Path) -> None:
    rows = report_coefficients(fit)
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "gamma", "clipped", "se", "t", "p", "stars"])
        for r in rows:
            writer.writerow(
                [r.id, repr(r.gamma), repr(r.clipped), repr(r.se), repr(r.t), repr(r.p), r.stars]
            )
