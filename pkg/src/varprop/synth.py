"""Synthetic pixel-style clustered datasets for desk-scale experiments.

Produces flattened grayscale patches: each class owns a smooth random
prototype image, samples add per-pixel noise, and a small fraction of
samples blend two prototypes.  The blends guarantee the k-NN graph stays
connected across clusters, which is exactly the regime where clamped
harmonic propagation collapses toward a constant at one label per class
while source-term propagation keeps the classes separated.
"""

import numpy as np
from scipy import ndimage

__all__ = ["make_cluster_dataset"]


def _smooth_prototype(rng, side: int) -> np.ndarray:
    coarse = rng.uniform(0.0, 1.0, size=(4, 4))
    img = np.kron(coarse, np.ones((side // 4, side // 4)))
    img = ndimage.uniform_filter(img, size=5, mode="nearest")
    img = ndimage.uniform_filter(img, size=5, mode="nearest")
    return img


def make_cluster_dataset(
    n_samples: int = 2000,
    n_classes: int = 10,
    side: int = 16,
    noise: float = 0.5,
    blend_fraction: float = 0.12,
    seed: int = 20240501,
):
    """Return ``(features, labels)`` with features of shape (n_samples, side*side).

    Pixel values are clipped to [0, 1].  ``noise`` is the per-pixel Gaussian
    sigma; ``blend_fraction`` of the samples mix their own prototype with a
    second one (mixing weight drawn in [0.55, 0.8], so the original class
    stays dominant) to create inter-cluster bridges.
    """
    if side % 4 != 0:
        raise ValueError("side must be a multiple of 4")
    if n_samples % n_classes != 0:
        raise ValueError("n_samples must be divisible by n_classes")
    rng = np.random.Generator(np.random.Philox(seed))
    protos = np.stack([_smooth_prototype(rng, side).ravel() for _ in range(n_classes)])

    per_class = n_samples // n_classes
    labels = np.repeat(np.arange(n_classes), per_class)
    X = protos[labels] + rng.normal(0.0, noise, size=(n_samples, side * side))

    n_blend = int(round(blend_fraction * n_samples))
    if n_blend:
        picks = rng.choice(n_samples, size=n_blend, replace=False)
        partners = rng.integers(0, n_classes - 1, size=n_blend)
        partners = np.where(partners >= labels[picks], partners + 1, partners)
        t = rng.uniform(0.55, 0.8, size=n_blend)
        blended = t[:, None] * protos[labels[picks]] + (1.0 - t[:, None]) * protos[partners]
        X[picks] = blended + rng.normal(0.0, noise, size=(n_blend, side * side))

    np.clip(X, 0.0, 1.0, out=X)
    return X, labels
