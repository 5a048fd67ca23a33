"""Supervised refinement of cluster centroids.

With the routing fixed, the clustered equalizer output is linear in the
centroids: ``y_hat[n] = sum_k x_S[n, k] w[k]``. Fitting ``w`` to the
transmitted samples is therefore a complex least-squares problem, solved
here with Adam on random subsets of the training windows and early stopping
on the BER of a held-out stretch.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .clustering import ClusteredFilter
from .engine import presum_parallel, window_routing
from .metrics import evaluate_ber
from .signal import SignalBlock

log = logging.getLogger(__name__)


@dataclass
class TrainSet:
    """Pre-summed features and aligned target samples.

    ``features`` has shape ``(pols, n, N_C)`` and ``labels`` ``(pols, n)``;
    output ``n`` lines up with transmitted sample ``n + delay``.
    """

    features: np.ndarray
    labels: np.ndarray
    delay: int = 0
    bits: np.ndarray | None = None
    symbol_offset: int = 0
    sps: int = 2
    pulse: tuple = ("rrc", 0.1)
    meta: dict = field(default_factory=dict)

    @property
    def n_clusters(self) -> int:
        return self.features.shape[-1]

    def __len__(self):
        return self.features.shape[0] * self.features.shape[1]

    def flat(self, start: int = 0, stop: int | None = None):
        X = self.features[:, start:stop].reshape(-1, self.n_clusters)
        y = self.labels[:, start:stop].reshape(-1)
        return X, y

    def predict(self, w, start: int = 0, stop: int | None = None) -> np.ndarray:
        return self.features[:, start:stop] @ np.asarray(w)

    def ber(self, w, start: int = 0, stop: int | None = None, guard: int = 64) -> float:
        if self.bits is None:
            raise ValueError("trainset carries no reference bits")
        y = self.predict(w, start, stop)
        return evaluate_ber(y, self.bits, self.delay + start, self.symbol_offset, self.sps, self.pulse, guard).ber


def _unit_power(x):
    p = np.mean(np.abs(x) ** 2, axis=-1, keepdims=True)
    return x / np.sqrt(np.where(p > 0, p, 1.0))


def build_trainset(rx, tx, cf: ClusteredFilter, bits=None, pulse=("rrc", 0.1)) -> TrainSet:
    """Pre-sum received windows per cluster and pair them with the sent samples.

    ``rx`` and ``tx`` must come from the same link run and have equal
    lengths. Labels are the transmit samples scaled to unit power per
    polarization, delayed by ``(M - 1) // 2`` to match valid-mode outputs.
    """
    rxs = rx.samples if isinstance(rx, SignalBlock) else np.atleast_2d(np.asarray(rx, dtype=complex))
    txs = tx.samples if isinstance(tx, SignalBlock) else np.atleast_2d(np.asarray(tx, dtype=complex))
    if rxs.shape != txs.shape:
        raise ValueError(f"rx {rxs.shape} and tx {txs.shape} are not aligned")
    meta_src = tx.metadata if isinstance(tx, SignalBlock) else {}
    M, n_c = cf.source_filter_len, cf.n_clusters
    delay = (M - 1) // 2
    n_out = rxs.shape[1] - M + 1
    common = dict(
        delay=delay,
        bits=None if bits is None else np.atleast_2d(bits),
        symbol_offset=meta_src.get("symbol_offset", 0),
        sps=meta_src.get("sps", 2),
        pulse=pulse,
    )
    if n_out <= 0:
        return TrainSet(np.zeros((rxs.shape[0], 0, n_c), complex), np.zeros((rxs.shape[0], 0), complex), **common)
    qw = window_routing(cf)
    feats = np.stack([presum_parallel(row, qw, n_out, n_c).presums for row in rxs])
    labels = _unit_power(txs)[:, delay : delay + n_out]
    return TrainSet(feats, labels, **common)


def mse_loss(X, y, w) -> float:
    e = X @ w - y
    return float(np.mean(np.abs(e) ** 2))


def wirtinger_gradient(X, y, w) -> np.ndarray:
    """d loss / d conj(w) for the mean squared error.

    The gradient with respect to the real and imaginary parts, packed as
    ``dL/dRe + 1j dL/dIm``, is twice this value.
    """
    e = X @ w - y
    return X.conj().T @ e / y.size


def least_squares_centroids(ts: TrainSet, start: int = 0, stop: int | None = None) -> np.ndarray:
    X, y = ts.flat(start, stop)
    return np.linalg.lstsq(X, y, rcond=None)[0]


class Adam:
    """Adam on complex parameters, real and imaginary parts moved independently."""

    def __init__(self, lr=1e-5, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = None
        self.v = None
        self.t = 0

    def step(self, w: np.ndarray, grad: np.ndarray) -> np.ndarray:
        g = np.concatenate([grad.real, grad.imag])
        if self.m is None:
            self.m = np.zeros_like(g)
            self.v = np.zeros_like(g)
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * g
        self.v = self.beta2 * self.v + (1 - self.beta2) * g * g
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        upd = self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
        n = w.size
        return w - (upd[:n] + 1j * upd[n:])


def adam_finetune(ts: TrainSet, init_centroids, lr: float = 1e-5, epochs: int = 400, batch: int = 2**16,
                  patience: int = 50, seed: int = 0, minibatch: int = 256, eval_symbols: int = 2**14,
                  metric=None):
    """Refine centroids with Adam and keep the best checkpoint.

    Parameters
    ----------
    ts : TrainSet
        Features and labels; the last ``eval_symbols`` symbols per
        polarization are held out to score each epoch.
    init_centroids : array_like of complex
        Starting point, typically the k-means centroids.
    batch : int
        Training windows drawn (without replacement) per epoch, across both
        polarizations.
    minibatch : int
        Windows per Adam step; an epoch makes ``batch // minibatch`` steps.
    metric : callable, optional
        ``metric(w) -> float`` to minimize for early stopping. Defaults to the
        BER on the held-out stretch, or the held-out MSE when the trainset
        has no reference bits.

    Returns
    -------
    dict
        ``centroids`` (best checkpoint), ``history`` (one dict per epoch with
        ``loss``, ``score`` and ``best``), ``epochs_run`` and ``initial_score``.
    """
    w = np.array(init_centroids, dtype=complex).ravel()
    if len(ts) == 0:
        raise ValueError("empty training set")
    if w.size != ts.n_clusters:
        raise ValueError(f"{w.size} centroids for {ts.n_clusters}-cluster features")
    n = ts.features.shape[1]
    eval_len = min(eval_symbols * ts.sps, n // 4)
    split = n - eval_len
    X, y = ts.flat(0, split)
    if metric is None:
        if ts.bits is not None:
            def metric(v):
                return ts.ber(v, split)
        else:
            Xe, ye = ts.flat(split)

            def metric(v):
                return mse_loss(Xe, ye, v)

    rng = np.random.default_rng(seed)
    opt = Adam(lr)
    per_epoch = min(batch, y.size)
    minibatch = max(1, min(minibatch, per_epoch))
    best_w = w.copy()
    best = initial = metric(w)
    stale = 0
    history = []
    for epoch in range(epochs):
        idx = rng.choice(y.size, size=per_epoch, replace=False)
        for s in range(0, per_epoch - minibatch + 1, minibatch):
            b = idx[s : s + minibatch]
            grad = 2 * wirtinger_gradient(X[b], y[b], w)
            w = opt.step(w, grad)
        score = metric(w)
        if score < best:
            best, best_w, stale = score, w.copy(), 0
        else:
            stale += 1
        history.append({"epoch": epoch + 1, "loss": mse_loss(X[idx], y[idx], w), "score": score, "best": best})
        log.debug("epoch %d loss %.4g score %.4g", epoch + 1, history[-1]["loss"], score)
        if stale >= patience:
            break
    return {"centroids": best_w, "history": history, "epochs_run": len(history), "initial_score": initial}


def gradient_descent(ts: TrainSet, init_centroids, lr: float, steps: int) -> list[float]:
    """Plain full-batch gradient descent; returns the loss before every step and at the end."""
    w = np.array(init_centroids, dtype=complex)
    X, y = ts.flat()
    losses = [mse_loss(X, y, w)]
    for _ in range(steps):
        w = w - lr * 2 * wirtinger_gradient(X, y, w)
        losses.append(mse_loss(X, y, w))
    return losses
