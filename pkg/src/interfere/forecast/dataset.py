"""Sliding-window datasets with an 80/20 chronological split."""

from dataclasses import dataclass

import numpy as np

from ..errors import InputError

TRAIN_FRACTION = 0.8


@dataclass(frozen=True)
class Normalizer:
    mean: float
    std: float

    def normalize(self, x):
        return (np.asarray(x, dtype=float) - self.mean) / self.std

    def denormalize(self, z):
        return np.asarray(z, dtype=float) * self.std + self.mean


@dataclass(frozen=True)
class WindowDataset:
    """Input windows ``series[k:k+W]`` paired with the next value ``series[k+W]``.

    Rows ``[0, split_index)`` are training rows, the rest validation rows.
    The normalizer is fitted on the samples covered by the training rows
    only (``series[:split_index + W]``).
    """

    window: int
    inputs: np.ndarray
    targets: np.ndarray
    split_index: int
    normalizer: Normalizer

    @property
    def n_pairs(self) -> int:
        return len(self.targets)

    @property
    def target_indices(self) -> np.ndarray:
        """Positions of every target in the source series."""
        return np.arange(self.n_pairs) + self.window

    @property
    def validation_indices(self) -> np.ndarray:
        return self.target_indices[self.split_index:]

    def train_arrays(self):
        n = self.normalizer
        return (n.normalize(self.inputs[: self.split_index]),
                n.normalize(self.targets[: self.split_index]))

    def validation_arrays(self):
        n = self.normalizer
        return (n.normalize(self.inputs[self.split_index:]),
                n.normalize(self.targets[self.split_index:]))


def build_dataset(series, window: int) -> WindowDataset:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise InputError("series must be one-dimensional")
    if window < 1:
        raise InputError(f"window must be positive, got {window}")
    if len(x) < window + 5:
        raise InputError(
            f"series of length {len(x)} too short for window {window} "
            f"(need at least {window + 5} samples)"
        )
    if not np.all(np.isfinite(x)):
        raise InputError("series contains non-finite values")

    n_pairs = len(x) - window
    inputs = np.lib.stride_tricks.sliding_window_view(x, window)[:n_pairs].copy()
    targets = x[window:].copy()
    split = int(np.floor(TRAIN_FRACTION * n_pairs))

    train_span = x[: split + window]
    std = float(train_span.std())
    if std < 1e-12:
        std = 1.0
    return WindowDataset(window, inputs, targets, split,
                         Normalizer(float(train_span.mean()), std))
