"""Diagonal-covariance Gaussian mixtures fitted with EM, plus majority-vote
classification over per-frame log-likelihoods."""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import backend
from .errors import ConfigError, FileFormatError
from .weights import GMM_MAGIC, deserialize_container, serialize_container

VARIANCE_FLOOR = 1e-6
CONVERGENCE_TOL = 1e-6  # log-likelihood gain per frame


@dataclass
class GmmModel:
    """One mixture: component weights on the simplex, diagonal Gaussians."""

    weights: np.ndarray    # (K,)
    means: np.ndarray      # (K, D)
    variances: np.ndarray  # (K, D)
    log_likelihoods: list[float] = field(default_factory=list)  # per-iteration avg LL

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    peak = a.max(axis=axis, keepdims=True)
    return (peak + np.log(np.exp(a - peak).sum(axis=axis, keepdims=True))).squeeze(axis)


def component_log_likelihood(gmm: GmmModel, x: np.ndarray) -> np.ndarray:
    """Weighted per-component log densities, (N, K)."""
    logpdf = backend.active().gauss_logpdf(np.ascontiguousarray(x), gmm.means, gmm.variances)
    return logpdf + np.log(np.maximum(gmm.weights, 1e-300))


def log_likelihood(gmm: GmmModel, x: np.ndarray) -> np.ndarray:
    """Per-frame mixture log density, (N,)."""
    return _logsumexp(component_log_likelihood(gmm, x), axis=1)


def gmm_fit(
    x: np.ndarray,
    n_components: int,
    max_iters: int = 200,
    seed: int = 0,
    variance_floor: float = VARIANCE_FLOOR,
    tol: float = CONVERGENCE_TOL,
) -> GmmModel:
    """EM fit. Initial means are random frames, initial variances the global
    per-dimension variance, weights uniform. Stops when the average
    log-likelihood improves by less than tol, or after max_iters."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ConfigError(f"expected (n_frames, dims) data, got shape {x.shape}")
    n, _ = x.shape
    if n_components > n:
        raise ConfigError(f"{n_components} components need at least that many frames, got {n}")
    rng = np.random.default_rng(seed)
    means = x[rng.choice(n, size=n_components, replace=False)].copy()
    global_var = np.maximum(x.var(axis=0), variance_floor)
    gmm = GmmModel(
        weights=np.full(n_components, 1.0 / n_components),
        means=means,
        variances=np.tile(global_var, (n_components, 1)),
    )

    previous = -np.inf
    for _ in range(max_iters):
        joint = component_log_likelihood(gmm, x)          # (N, K)
        frame_ll = _logsumexp(joint, axis=1)
        avg_ll = float(frame_ll.mean())
        gmm.log_likelihoods.append(avg_ll)
        if avg_ll - previous < tol:
            break
        previous = avg_ll

        resp = np.exp(joint - frame_ll[:, None])          # (N, K)
        nk = resp.sum(axis=0)
        safe_nk = np.maximum(nk, 1e-300)
        gmm.weights = nk / n
        gmm.means = (resp.T @ x) / safe_nk[:, None]
        second = (resp.T @ (x * x)) / safe_nk[:, None]
        gmm.variances = np.maximum(second - gmm.means**2, variance_floor)
    return gmm


def gmm_classify(
    models: dict[str, GmmModel] | list[GmmModel],
    frames: np.ndarray,
) -> tuple[int, np.ndarray]:
    """Majority vote over per-frame argmax class; ties broken by summed LL.

    Returns (class index, per-frame log-likelihood matrix (N, n_classes)).
    """
    ordered = list(models.values()) if isinstance(models, dict) else list(models)
    ll = np.stack([log_likelihood(m, frames) for m in ordered], axis=1)
    votes = np.bincount(np.argmax(ll, axis=1), minlength=ll.shape[1])
    best = votes.max()
    tied = np.flatnonzero(votes == best)
    if tied.size == 1:
        return int(tied[0]), ll
    totals = ll.sum(axis=0)
    return int(tied[np.argmax(totals[tied])]), ll


def save_gmms(models: dict[str, GmmModel], path) -> None:
    """Store a named set of mixtures in the shared container format."""
    arrays = {}
    for name, m in models.items():
        arrays[f"{name}.weights"] = m.weights
        arrays[f"{name}.means"] = m.means
        arrays[f"{name}.variances"] = m.variances
    config_text = "\n".join(models.keys()) + "\n"
    Path(path).write_bytes(serialize_container(GMM_MAGIC, config_text, {}, arrays))


def load_gmms(path) -> dict[str, GmmModel]:
    raw = Path(path).read_bytes()
    config_text, _, arrays = deserialize_container(raw, GMM_MAGIC, str(path))
    models = {}
    for name in config_text.split():
        try:
            models[name] = GmmModel(
                weights=arrays[f"{name}.weights"],
                means=arrays[f"{name}.means"],
                variances=arrays[f"{name}.variances"],
            )
        except KeyError as exc:
            raise FileFormatError(f"{path}: missing record for mixture {name!r}") from exc
    return models
