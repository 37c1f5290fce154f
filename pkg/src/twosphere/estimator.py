"""scikit-learn compatible wrapper around the singular field.

``SingularFieldModel`` is a stateless transformer in the sklearn sense:
``fit`` ignores its data and precomputes the image series and coefficients
for the configured geometry and background; ``transform`` maps points of
shape (n, 3) in physical coordinates to the singular part of the field
``grad u - grad g`` at those points.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .background import HarmonicPolynomial, parse_polynomial
from .coefficients import coefficient_report
from .geometry import make_config
from .sequences import build_sequence
from .singular import evaluate_batch


class SingularFieldModel(TransformerMixin, BaseEstimator):
    """Singular field of two equal spheres in a harmonic background.

    Parameters
    ----------
    radius : float
        Sphere radius.
    gap : float
        Distance between the spheres.
    background : str or HarmonicPolynomial
        Background potential in physical coordinates, with the gap midpoint
        at the origin and the centers on the x-axis.
    tol : float
        Bound on the omitted tail of the image weights.
    n_max : int
        Number of directly summed terms in the limit coefficient.
    """

    def __init__(self, radius=1.0, gap=1e-3, background="x", tol=1e-10, n_max=10**6):
        self.radius = radius
        self.gap = gap
        self.background = background
        self.tol = tol
        self.n_max = n_max

    def fit(self, X=None, y=None):
        if X is not None:
            check_array(X)
        self.config_ = make_config(self.radius, self.gap)
        H = self.background
        if not isinstance(H, HarmonicPolynomial):
            H = parse_polynomial(str(H))
        self.background_ = H
        # H(X) with X = r x, expressed in the unit-radius frame
        self.frame_background_ = H.substitute_affine(scale=self.radius)
        self.sequence_ = build_sequence(self.config_.delta, self.tol)
        self.coefficients_ = coefficient_report(
            self.sequence_, self.frame_background_, self.n_max
        )
        self.n_features_in_ = 3
        return self

    def _frame_batch(self, X):
        check_is_fitted(self, "sequence_")
        X = check_array(X, dtype=float)
        if X.shape[1] != 3:
            raise ValueError(f"expected points with 3 coordinates, got {X.shape[1]}")
        return evaluate_batch(self.config_, self.sequence_, self.config_.to_frame(X))

    def transform(self, X):
        """Singular field at physical points; shape (n, 3)."""
        batch = self._frame_batch(X)
        G = self.coefficients_.singular_coeff * batch.grad_v
        return self.config_.gradient_from_frame(G)

    def singular_potential(self, X):
        """Singular part ``coeff * v`` of the potential at physical points."""
        batch = self._frame_batch(X)
        return self.coefficients_.singular_coeff * batch.v

    def field_magnitude(self, X):
        return np.linalg.norm(self.transform(X), axis=1)
