"""
Multiview twin parametric-margin support vector machine toolkit.

Subpackages:
    kernel: kernel functions and (augmented) Gram matrices.
    qp: solvers for the structured dual quadratic programs.
    model: dual assembly, training and classification.
    preprocess: feature scaling and PCA view synthesis.
    data: two-view datasets, manifests, splits and synthetic generators.
    eval: metrics, cross-validated grid search and benchmark runs.
    stats: Friedman, Nemenyi and win-tie-loss model comparison.
    cli: the ``mvtpmsvm`` command line tool and model persistence.
"""

__version__ = "0.1.0"
