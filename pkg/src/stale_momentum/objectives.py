"""Quadratic objectives f(w) = 0.5 ||A w - b||^2 and gradient noise models.

The gradient is linear, grad f(w) = A^T A (w - w_star) with A w_star = b,
which is what lets the exact-expectation machinery commute expectations
through the gradient.  Strong convexity (all eigenvalues of A^T A
positive) is required so convergence rates are well defined.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


class QuadraticObjective:
    """f(w) = 0.5 ||A w - b||^2 with invertible square A."""

    def __init__(self, a_matrix, b):
        a_matrix = np.asarray(a_matrix, dtype=float)
        b = np.asarray(b, dtype=float)
        if a_matrix.ndim != 2 or a_matrix.shape[0] != a_matrix.shape[1]:
            raise DomainError("A must be a square matrix")
        if b.shape != (a_matrix.shape[0],):
            raise DomainError("b must be a vector matching A")
        self.a_matrix = a_matrix
        self.b = b
        self.hessian = a_matrix.T @ a_matrix
        off_diag = self.hessian - np.diag(np.diag(self.hessian))
        self.is_diagonal = not np.any(off_diag)
        if self.is_diagonal:
            self.hessian_diag = np.ascontiguousarray(np.diag(self.hessian))
            eigs = np.sort(self.hessian_diag)
        else:
            self.hessian_diag = None
            eigs = np.linalg.eigvalsh(self.hessian)
        if eigs[0] <= 0:
            raise DomainError(f"A^T A must be positive definite (min eigenvalue {eigs[0]})")
        self.eigenvalues = eigs
        self.w_star = np.linalg.solve(a_matrix, b)
        for arr in (self.a_matrix, self.b, self.hessian, self.eigenvalues, self.w_star):
            arr.flags.writeable = False

    @classmethod
    def from_spectrum(cls, eigenvalues, w_star=None) -> "QuadraticObjective":
        """Diagonal objective with the given eigenvalues of A^T A.

        A = diag(sqrt(eigenvalues)); the minimizer defaults to the origin.
        """
        eigenvalues = np.asarray(eigenvalues, dtype=float)
        if eigenvalues.ndim != 1 or eigenvalues.size == 0:
            raise DomainError("eigenvalues must be a nonempty 1-D sequence")
        if np.any(eigenvalues <= 0):
            raise DomainError("eigenvalues must be positive")
        a = np.diag(np.sqrt(eigenvalues))
        if w_star is None:
            w_star = np.zeros(eigenvalues.size)
        b = a @ np.asarray(w_star, dtype=float)
        return cls(a, b)

    @property
    def dim(self) -> int:
        return self.b.size

    @property
    def condition_number(self) -> float:
        return float(self.eigenvalues[-1] / self.eigenvalues[0])

    def gradient(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        if w.shape != (self.dim,):
            raise DomainError(f"expected a {self.dim}-vector, got shape {w.shape}")
        return self.hessian @ (w - self.w_star)

    def value(self, w) -> float:
        w = np.asarray(w, dtype=float)
        if w.shape != (self.dim,):
            raise DomainError(f"expected a {self.dim}-vector, got shape {w.shape}")
        r = self.a_matrix @ w - self.b
        return 0.5 * float(r @ r)

    def to_dict(self) -> dict:
        if self.is_diagonal:
            return {
                "eigenvalues": self.hessian_diag.tolist(),
                "w_star": self.w_star.tolist(),
            }
        return {"matrix": self.a_matrix.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "QuadraticObjective":
        if "matrix" in data:
            return cls(data["matrix"], data["b"])
        if "eigenvalues" in data:
            return cls.from_spectrum(data["eigenvalues"], w_star=data.get("w_star"))
        raise DomainError("objective JSON needs either 'matrix'+'b' or 'eigenvalues'")

    @classmethod
    def from_json(cls, text: str) -> "QuadraticObjective":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean additive gradient noise; sigma = 0 means noise-free."""

    sigma: float = 0.0

    def __post_init__(self):
        if self.sigma < 0:
            raise DomainError(f"sigma must be >= 0, got {self.sigma}")

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls(0.0)

    @classmethod
    def gaussian(cls, sigma: float) -> "NoiseModel":
        return cls(sigma)

    @property
    def kind(self) -> str:
        return "none" if self.sigma == 0.0 else "gaussian"
