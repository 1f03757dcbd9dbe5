import numpy as np

from scene_labeller.core import RgbImage


def flood_fill_components(grid):
    """Independent 4-connected labelling by breadth-first flood fill, raster first-touch ids."""
    grid = np.asarray(grid)
    h, w = grid.shape
    out = -np.ones((h, w), dtype=int)
    next_id = 0
    for sy in range(h):
        for sx in range(w):
            if out[sy, sx] >= 0:
                continue
            out[sy, sx] = next_id
            queue = [(sy, sx)]
            while queue:
                y, x = queue.pop()
                for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                    if 0 <= ny < h and 0 <= nx < w and out[ny, nx] < 0 and grid[ny, nx] == grid[y, x]:
                        out[ny, nx] = next_id
                        queue.append((ny, nx))
            next_id += 1
    return out


def random_image(rng, h, w, levels=256):
    return RgbImage(rng.integers(0, levels, (h, w, 3)))


def brute_force_posteriors(priors, means, variances, x, dps=50):
    """Normalized posteriors by direct high-precision evaluation of Bayes' rule.

    Multiplies Gaussian densities (no logs), then divides by the evidence.
    """
    import mpmath

    with mpmath.workdps(dps):
        joint = []
        for c in range(len(priors)):
            term = mpmath.mpf(priors[c])
            for j in range(len(x)):
                var = mpmath.mpf(variances[c][j])
                diff = mpmath.mpf(x[j]) - mpmath.mpf(means[c][j])
                term *= mpmath.exp(-diff * diff / (2 * var)) / mpmath.sqrt(2 * mpmath.pi * var)
            joint.append(term)
        evidence = mpmath.fsum(joint)
        return [p / evidence for p in joint]


def random_nb_model(rng, n_features, n_classes=5):
    from scene_labeller.classifier import GaussianNbModel

    counts = rng.integers(1, 50, n_classes)
    priors = counts / counts.sum()
    means = rng.normal(0, 1, (n_classes, n_features))
    variances = rng.uniform(0.05, 2.0, (n_classes, n_features))
    return GaussianNbModel(priors, means, variances)


def random_model_file(rng, use_color=None):
    """A structurally valid model with random weights, for persistence tests."""
    from scene_labeller.classifier import GaussianNbModel
    from scene_labeller.model_store import ModelFile
    from scene_labeller.signature import SignatureConfig
    from scene_labeller.vocabulary import Vocabulary

    k = int(rng.integers(1, 70))
    dim = int(rng.integers(1, 130))
    if use_color is None:
        use_color = bool(rng.integers(0, 2))
    cfg = SignatureConfig(vocab_size=k, fuzziness=float(rng.uniform(1.01, 4.0)),
                          normalize_bow=bool(rng.integers(0, 2)), use_color=use_color)
    # wide dynamic range so hex round-trip is actually exercised
    words = rng.normal(0, 1, (k, dim)) * 10.0 ** rng.integers(-30, 30, (k, dim))
    raw = rng.uniform(0.01, 1, 5)
    nb = GaussianNbModel(raw / raw.sum(), rng.normal(0, 1, (5, cfg.dim)) / 3.0,
                         rng.uniform(1e-6, 5, (5, cfg.dim)))
    prov = {"seed": str(int(rng.integers(0, 2**31))), "note": "random model with spaces  inside"}
    return ModelFile(Vocabulary(words), cfg, nb, prov)
