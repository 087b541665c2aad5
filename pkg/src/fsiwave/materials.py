"""Physical parameters, Hooke-law stress, and PML coefficient fields.

The absorbing layer is realized by per-axis complex stretching functions
``alpha_j(t) = 1 + i*sigma_j(t)`` where ``sigma_j`` ramps from zero at the
inner layer boundary ``|t| = L_j`` to ``sigma0`` at the outer boundary
``|t| = L_j + d_j`` as a power of exponent ``m``.  The stretched Helmholtz
operator uses the diagonal matrix ``A = diag(a2*a3/a1, a1*a3/a2, a1*a2/a3)``
and the scalar ``b = a1*a2*a3``.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PhysicsConfig:
    """Wave and material constants shared by all modules.

    kappa   acoustic wavenumber (1/length)
    omega   angular frequency (1/time)
    lam, mu Lame parameters of the solid (pressure units)
    rho_a   fluid density (mass/volume)
    """

    kappa: float
    omega: float
    lam: float
    mu: float
    rho_a: float = 1.0

    def __post_init__(self):
        for name in ("kappa", "omega", "lam", "mu", "rho_a"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"PhysicsConfig.{name} must be positive")


@dataclass(frozen=True)
class PmlProfile:
    """Absorbing-layer geometry and medium profile.

    L       per-axis half-widths of the inner box B
    d       per-axis layer thicknesses
    sigma0  profile amplitude; 0 disables the layer (alpha_j == 1)
    m       integer ramp exponent, >= 1
    """

    L: tuple
    d: tuple
    sigma0: float
    m: int

    def __post_init__(self):
        object.__setattr__(self, "L", tuple(float(v) for v in self.L))
        object.__setattr__(self, "d", tuple(float(v) for v in self.d))
        if len(self.L) != 3 or len(self.d) != 3:
            raise ValueError("PmlProfile.L and .d must have three entries")
        if any(v <= 0.0 for v in self.L) or any(v <= 0.0 for v in self.d):
            raise ValueError("PmlProfile half-widths and thicknesses must be positive")
        if self.sigma0 < 0.0:
            raise ValueError("PmlProfile.sigma0 must be nonnegative")
        if int(self.m) != self.m or self.m < 1:
            raise ValueError("PmlProfile.m must be an integer >= 1")
        object.__setattr__(self, "m", int(self.m))

    @property
    def outer(self) -> tuple:
        """Per-axis half-widths of the computational box D."""
        return tuple(L + d for L, d in zip(self.L, self.d))

    @property
    def alpha0(self) -> float:
        """Maximum of |alpha_j| on the outer boundary, (1 + sigma0^2)^(1/2)."""
        return float(np.sqrt(1.0 + self.sigma0**2))


def sigma_profile(t, axis: int, profile: PmlProfile):
    """Ramp value sigma_j(t) along the given axis (1-based), zero inside B.

    Accepts scalars or arrays; rejects coordinates outside the computational
    box D.
    """
    if axis not in (1, 2, 3):
        raise ValueError("axis must be 1, 2, or 3")
    L = profile.L[axis - 1]
    d = profile.d[axis - 1]
    at = np.abs(np.asarray(t, dtype=float))
    if np.any(at > L + d + 1e-12 * (L + d)):
        raise ValueError(f"coordinate outside the computational box on axis {axis}")
    ramp = np.clip((at - L) / d, 0.0, None)
    out = profile.sigma0 * ramp**profile.m
    return out if out.ndim else float(out)


def sigma_derivative(t, axis: int, profile: PmlProfile):
    """d sigma_j / dt; one-sided from inside the layer for m = 1 at |t| = L_j."""
    if axis not in (1, 2, 3):
        raise ValueError("axis must be 1, 2, or 3")
    L = profile.L[axis - 1]
    d = profile.d[axis - 1]
    t = np.asarray(t, dtype=float)
    at = np.abs(t)
    ramp = np.clip((at - L) / d, 0.0, None)
    out = profile.sigma0 * profile.m * ramp ** (profile.m - 1) / d * np.sign(t)
    out = np.where(at > L, out, 0.0)
    return out if out.ndim else float(out)


def pml_coefficients(x: np.ndarray, profile: PmlProfile):
    """Diagonal of A and scalar b at points x.

    ``x`` has shape (..., 3); returns ``(A_diag, b)`` with shapes (..., 3)
    and (...,).  Inside the box B this is the identity (A = I, b = 1).
    """
    x = np.asarray(x, dtype=float)
    alpha = np.empty(x.shape, dtype=complex)
    for j in range(3):
        alpha[..., j] = 1.0 + 1j * sigma_profile(x[..., j], j + 1, profile)
    b = alpha[..., 0] * alpha[..., 1] * alpha[..., 2]
    A = np.empty_like(alpha)
    A[..., 0] = alpha[..., 1] * alpha[..., 2] / alpha[..., 0]
    A[..., 1] = alpha[..., 0] * alpha[..., 2] / alpha[..., 1]
    A[..., 2] = alpha[..., 0] * alpha[..., 1] / alpha[..., 2]
    return A, b


def pml_coefficient_derivatives(x: np.ndarray, profile: PmlProfile):
    """Per-axis derivatives dA_jj/dx_j at points x, shape (..., 3).

    Only the same-axis derivatives are needed: with the diagonal stretching,
    dA_jj/dx_j = -A_jj * alpha_j' / alpha_j where alpha_j' = i sigma_j'.
    """
    x = np.asarray(x, dtype=float)
    A, _ = pml_coefficients(x, profile)
    dA = np.empty_like(A)
    for j in range(3):
        alpha_j = 1.0 + 1j * sigma_profile(x[..., j], j + 1, profile)
        dalpha_j = 1j * sigma_derivative(x[..., j], j + 1, profile)
        dA[..., j] = -A[..., j] * dalpha_j / alpha_j
    return dA


def gamma1(profile: PmlProfile) -> float:
    """Decay-rate constant min_j d_j / (sum_j (2 L_j + d_j)^2)^(1/2)."""
    L = np.asarray(profile.L)
    d = np.asarray(profile.d)
    return float(d.min() / np.sqrt(((2.0 * L + d) ** 2).sum()))


def pml_bound(profile: PmlProfile, kappa: float, sigma: float | None = None) -> float:
    """Layer-tuning diagnostic alpha0^3 (1 + kappa L)^3 exp(-gamma1 kappa sigma).

    ``sigma`` defaults to the profile amplitude sigma0.  The value is a
    relative diagnostic (unknown constant taken as 1); compare against a
    budget with :func:`pml_bound_ok`.
    """
    if sigma is None:
        sigma = profile.sigma0
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    L = max(profile.L)
    return float(profile.alpha0**3 * (1.0 + kappa * L) ** 3 * np.exp(-gamma1(profile) * kappa * sigma))


def pml_bound_ok(profile: PmlProfile, kappa: float, sigma: float | None = None, budget: float = 1e-8) -> bool:
    """Whether the tuning diagnostic is below the given budget."""
    return pml_bound(profile, kappa, sigma) < budget


def stress(grad_u: np.ndarray, lam: float, mu: float) -> np.ndarray:
    """Isotropic Hooke law 2*mu*eps + lam*tr(eps)*I from displacement gradients.

    ``grad_u`` may be a single 3x3 matrix or a stack (..., 3, 3); the strain
    is the symmetric part of the gradient.  The output is exactly symmetric.
    """
    g = np.asarray(grad_u)
    eps = 0.5 * (g + np.swapaxes(g, -1, -2))
    tr = np.trace(eps, axis1=-2, axis2=-1)
    out = 2.0 * mu * eps
    idx = np.arange(3)
    out[..., idx, idx] += lam * tr[..., None]
    return out
