"""Coefficient bundle for the leafwise equation

    -Δu - (β⊤ + Φ) u = Ψ1 u⁻¹ - Ψ2 u⁻³ + Ψ3 u³.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cubic import RegimeTag, classify_regime
from .grid import ScalarField, same_grid

SPECTRAL_CONVENTIONS = ("beta_top_plus_phi", "beta_top")


@dataclass(frozen=True)
class Coefficients:
    beta_top: ScalarField
    psi1: ScalarField
    psi2: ScalarField
    psi3: ScalarField
    phi: ScalarField | float = 0.0

    def __post_init__(self):
        fields = [self.beta_top, self.psi1, self.psi2, self.psi3]
        if isinstance(self.phi, ScalarField):
            fields.append(self.phi)
        same_grid(*fields)

    @classmethod
    def constant(cls, grid, beta, psi1, psi2, psi3, phi=0.0) -> "Coefficients":
        c = ScalarField.constant
        return cls(c(grid, beta), c(grid, psi1), c(grid, psi2), c(grid, psi3), phi)

    @property
    def grid(self):
        return self.beta_top.grid

    @property
    def phi_is_constant(self) -> bool:
        return not isinstance(self.phi, ScalarField) or self.phi.is_constant()

    @property
    def phi_value(self) -> float:
        if isinstance(self.phi, ScalarField):
            return float(self.phi.values[0])
        return float(self.phi)

    @property
    def beta(self) -> ScalarField:
        """Coefficient of u in the evolution: β⊤ + Φ."""
        return self.beta_top + self.phi

    def spectral_beta(self, convention: str = "beta_top_plus_phi") -> ScalarField:
        if convention not in SPECTRAL_CONVENTIONS:
            raise ValueError(f"unknown spectral convention {convention!r}")
        if convention == "beta_top":
            if not self.phi_is_constant:
                raise ValueError("the 'beta_top' convention needs a constant Phi")
            return self.beta_top
        return self.beta

    def with_phi(self, phi) -> "Coefficients":
        return Coefficients(self.beta_top, self.psi1, self.psi2, self.psi3, phi)

    def scaled(self, psi1=1.0, psi2=1.0, psi3=1.0, beta_shift=0.0) -> "Coefficients":
        return Coefficients(self.beta_top + beta_shift, self.psi1 * psi1, self.psi2 * psi2,
                            self.psi3 * psi3, self.phi)

    def regime(self, lambda0: float) -> RegimeTag:
        return classify_regime(self.psi3, self.psi2, -lambda0)

    def arrays(self):
        """Flat (beta, psi1, psi2, psi3) arrays used by the kernels."""
        return (np.ascontiguousarray(self.beta.values), np.ascontiguousarray(self.psi1.values),
                np.ascontiguousarray(self.psi2.values), np.ascontiguousarray(self.psi3.values))
