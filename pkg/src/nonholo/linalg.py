"""Dense complex linear algebra shared by the rest of the package.

Matrices are plain ``numpy`` arrays. The validating constructors
:func:`hermitian` and :func:`unitary` return read-only complex copies so
values can be shared freely once built.

Conventions
-----------
* Atomic units with hbar = 1: a Hamiltonian ``H`` applied for time ``t``
  evolves by ``exp(-i H t)``.
* Characteristic polynomials are monic, ``P(x) = det(x I - U)``, and are
  returned as ``a[0] ... a[N]`` in ascending powers.
* Eigenphases of unitaries live in ``(-pi, pi]``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

HERMITIAN_RTOL = 1e-12
UNITARY_TOL = 1e-10
PI_NUDGE = 1e-8


class NumericError(ArithmeticError):
    """A decomposition failed or lost more accuracy than allowed."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _square(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def hermitian(m) -> np.ndarray:
    """Validate ``m`` as Hermitian and return a read-only complex copy.

    Raises ``ValueError`` when ``||m - m^dagger||_F > 1e-12 ||m||_F``.
    """
    a = _square(m)
    scale = np.linalg.norm(a)
    err = np.linalg.norm(a - a.conj().T)
    if err > HERMITIAN_RTOL * scale:
        raise ValueError(f"matrix is not Hermitian: ||M - M^H||_F = {err:.3e} (||M||_F = {scale:.3e})")
    return _frozen(a)


def unitary(m) -> np.ndarray:
    """Validate ``m`` as unitary (``||U^H U - I||_F <= 1e-10 N``), return a read-only copy."""
    a = _square(m)
    n = a.shape[0]
    err = np.linalg.norm(a.conj().T @ a - np.eye(n))
    if err > UNITARY_TOL * n:
        raise ValueError(f"matrix is not unitary: ||U^H U - I||_F = {err:.3e}")
    return _frozen(a)


def is_hermitian(m) -> bool:
    try:
        hermitian(m)
    except ValueError:
        return False
    return True


def is_unitary(m) -> bool:
    try:
        unitary(m)
    except ValueError:
        return False
    return True


def eigh_hermitian(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, ascending eigenvalues."""
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(h) if np.all(np.isfinite(h)) else float("inf")
        raise NumericError(
            f"eigh failed to converge on a {h.shape[0]}x{h.shape[0]} matrix "
            f"(2-norm condition {cond:.3e}, max |entry| {np.max(np.abs(h)):.3e})"
        ) from exc
    return w, v


def expm_hermitian(h, t: float) -> np.ndarray:
    """Return ``exp(-i h t)`` via the eigen-decomposition of ``h``.

    Parameters
    ----------
    h : array_like
        Hermitian generator (energy, atomic units).
    t : float
        Duration in atomic units of time.
    """
    if not np.isfinite(t):
        raise ValueError(f"duration must be finite, got {t!r}")
    w, v = eigh_hermitian(np.asarray(h, dtype=complex))
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def char_poly(u, method: str = "faddeev") -> np.ndarray:
    """Coefficients ``a_0 ... a_N`` of the monic ``det(x I - u)``.

    ``method`` is ``"faddeev"`` (Faddeev-LeVerrier recursion, the default)
    or ``"eig"`` (expand the product over eigenvalues).
    """
    a = _square(u)
    n = a.shape[0]
    if method == "eig":
        # np.poly returns descending powers
        return np.poly(np.linalg.eigvals(a)).astype(complex)[::-1].copy()
    if method != "faddeev":
        raise ValueError(f"unknown method {method!r}")
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[n] = 1.0
    m = np.zeros_like(a)
    eye = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        m = a @ m + coeffs[n - k + 1] * eye
        coeffs[n - k] = -np.trace(a @ m) / k
    return coeffs


def char_poly_derivative(u: np.ndarray, du: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Char-poly coefficients of ``u`` and their directional derivatives along ``du``.

    ``du`` may be a stack of shape ``(K, N, N)``; the derivative output then
    has shape ``(K, N + 1)``. Obtained by differentiating the
    Faddeev-LeVerrier recursion term by term.
    """
    a = _square(u)
    n = a.shape[0]
    d = np.asarray(du, dtype=complex)
    single = d.ndim == 2
    if single:
        d = d[None]
    k_dirs = d.shape[0]
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[n] = 1.0
    dcoeffs = np.zeros((k_dirs, n + 1), dtype=complex)
    eye = np.eye(n, dtype=complex)
    m = np.zeros_like(a)
    dm = np.zeros_like(d)
    for k in range(1, n + 1):
        # M_k = U M_{k-1} + c I ;  dM_k = dU M_{k-1} + U dM_{k-1} + dc I
        dm = d @ m + a @ dm + dcoeffs[:, n - k + 1, None, None] * eye
        m = a @ m + coeffs[n - k + 1] * eye
        am = a @ m
        coeffs[n - k] = -np.trace(am) / k
        dcoeffs[:, n - k] = -(np.einsum("kij,ji->k", d, m) + np.einsum("ij,kji->k", a, dm)) / k
    return coeffs, (dcoeffs[0] if single else dcoeffs)


def poly_purity(u) -> float:
    """Sum of squared moduli of the characteristic-polynomial coefficients.

    At least 2 for any unitary; exactly 2 iff ``u`` is, up to a global
    phase, a non-degenerate N-th root of the identity.
    """
    return float(np.sum(np.abs(char_poly(u)) ** 2))


def schur_unitary(u) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and a unitary eigenbasis of a unitary ``u``.

    Uses the complex Schur form, which is diagonal for normal matrices, so
    repeated eigenvalues still get orthonormal eigenvectors.
    """
    a = _square(u)
    t, z = sla.schur(a, output="complex")
    lam = np.diag(t).copy()
    recon = np.linalg.norm((z * lam) @ z.conj().T - a)
    if recon > UNITARY_TOL * max(1.0, np.linalg.norm(a)):
        raise NumericError(f"Schur eigenbasis does not reconstruct the matrix (error {recon:.3e}); input not normal?")
    return lam, z


def principal_phases(lam: np.ndarray) -> np.ndarray:
    """Phases of unit-modulus ``lam`` in ``(-pi, pi]``; values within 1e-8 of -pi map to +pi."""
    phi = np.angle(lam)
    return np.where(phi <= -np.pi + PI_NUDGE, phi + 2 * np.pi, phi)


def unitary_fractional_power(u, n: int) -> np.ndarray:
    """Principal ``n``-th root of a unitary matrix."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    lam, z = schur_unitary(u)
    phi = principal_phases(lam)
    return (z * np.exp(1j * phi / n)) @ z.conj().T


def unitary_power(u, x: float) -> np.ndarray:
    """Principal real power ``u**x`` (used for fractional targets like ``u**(1/n)``)."""
    lam, z = schur_unitary(u)
    phi = principal_phases(lam)
    return (z * np.exp(1j * phi * x)) @ z.conj().T


def logm_unitary(u) -> np.ndarray:
    """Principal logarithm of a unitary; the result is skew-Hermitian."""
    lam, z = schur_unitary(u)
    phi = principal_phases(lam)
    return (z * (1j * phi)) @ z.conj().T


def gate_fidelity(u, v) -> float:
    """Phase-insensitive overlap ``|tr(u^H v)| / N``."""
    a = _square(u)
    b = _square(v)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(min(1.0, abs(np.vdot(a, b)) / a.shape[0]))


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed random unitary (QR of a Ginibre matrix with phase fix)."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Dense random Hermitian matrix; real and imaginary parts of the raw entries uniform on [-scale, scale]."""
    z = rng.uniform(-1.0, 1.0, (n, n)) + 1j * rng.uniform(-1.0, 1.0, (n, n))
    return scale * (z + z.conj().T) / 2
