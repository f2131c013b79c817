"""Four-state model of two dipole-coupled Cs Rydberg atoms in a switched Stark field.

Basis (atom A; atom B)::

    |0> = |24s1/2, mj=1/2 ; 23s1/2, mj=1/2>
    |1> = |23p3/2, mj=3/2 ; 23p3/2, mj=3/2>
    |2> = |23p3/2, mj=3/2 ; 23p3/2, mj=1/2>
    |3> = |23p3/2, mj=1/2 ; 23p3/2, mj=1/2>

The pp states shift linearly with the field with a common slope ``gamma``
and come into resonance with |0> at ``E1``, ``E2`` and ``E3``. Energies are
referenced to |0>. Everything returned is in atomic units; fields are given
in V/cm and converted here.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from nonholo.angular import clebsch_gordan
from nonholo.controllability import HamiltonianPair
from nonholo.linalg import hermitian
from nonholo.units import field_to_au, length_to_au

BASIS_LABELS = (
    "|24s1/2,1/2; 23s1/2,1/2>",
    "|23p3/2,3/2; 23p3/2,3/2>",
    "|23p3/2,3/2; 23p3/2,1/2>",
    "|23p3/2,1/2; 23p3/2,1/2>",
)

# single-atom sublevels: (l, j, mj); the s level is 24s for atom A, 23s for atom B
_ATOM_STATES = (
    (0, 0.5, 0.5),
    (0, 0.5, -0.5),
    (1, 1.5, 1.5),
    (1, 1.5, 0.5),
    (1, 1.5, -0.5),
    (1, 1.5, -1.5),
)
# (atom A index, atom B index) into _ATOM_STATES for each basis state
_PAIR_STATES = ((0, 0), (2, 2), (2, 3), (3, 3))


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class RydbergParams:
    """Geometry, fields and dipole data.

    ``vdd`` (explicit 4x4 matrix, atomic units) takes precedence; otherwise
    the interaction is assembled from the reduced dipole elements ``d_a``
    (24s <-> 23p3/2, atom A) and ``d_b`` (23s <-> 23p3/2, atom B).
    """

    R: float = 2e-7
    theta: float = np.pi / 15
    phi: float = np.pi / 6
    E_a: float = 87.42
    E_b: float = 84.85
    gamma: float = -283.044
    E1: float = 88.8
    E2: float = 84.4
    E3: float = 80.5
    vdd: np.ndarray | None = field(default=None, compare=False)
    d_a: float | None = None
    d_b: float | None = None

    def __post_init__(self):
        if not self.R > 0:
            raise ConfigurationError(f"R must be positive, got {self.R!r}")
        if not self.gamma < 0:
            raise ConfigurationError(f"gamma must be negative (levels fall with field), got {self.gamma!r}")
        if self.E_a == self.E_b:
            raise ConfigurationError("E_a and E_b must differ (a single field gives one generator)")
        if len({self.E1, self.E2, self.E3}) != 3:
            raise ConfigurationError("resonance fields E1, E2, E3 must be pairwise distinct")
        if self.vdd is not None:
            m = np.asarray(self.vdd, dtype=complex)
            if m.shape != (4, 4):
                raise ConfigurationError(f"vdd must be 4x4, got shape {m.shape}")
            try:
                object.__setattr__(self, "vdd", hermitian(m))
            except ValueError as exc:
                raise ConfigurationError(f"vdd: {exc}") from exc

    @property
    def resonances(self) -> tuple[float, float, float]:
        return (self.E1, self.E2, self.E3)

    def with_fields(self, **kw) -> "RydbergParams":
        return replace(self, **kw)


def unit_vector(theta: float, phi: float) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def atom_dipole_operators(d_sp: float) -> np.ndarray:
    """Cartesian dipole matrices ``(d_x, d_y, d_z)`` on one atom's six sublevels.

    Only s <-> p3/2 elements exist. With the Wigner-Eckart convention
    ``<p m'|d_q|s m> = <1/2 m; 1 q|3/2 m'> d_sp / sqrt(4)``.
    """
    n = len(_ATOM_STATES)
    sph = {q: np.zeros((n, n), dtype=complex) for q in (-1, 0, 1)}
    for i, (li, ji, mi) in enumerate(_ATOM_STATES):
        for k, (lk, jk, mk) in enumerate(_ATOM_STATES):
            if li == 1 and lk == 0:
                for q in (-1, 0, 1):
                    c = clebsch_gordan(jk, mk, 1, q, ji, mi)
                    if c:
                        sph[q][i, k] = c * d_sp / np.sqrt(2 * ji + 1)
    # p <- s block only; the s <- p block follows from Hermiticity of d_x, d_y, d_z
    dx = (sph[-1] - sph[1]) / np.sqrt(2)
    dy = 1j * (sph[-1] + sph[1]) / np.sqrt(2)
    dz = sph[0]
    return np.array([m + m.conj().T for m in (dx, dy, dz)])


def assemble_vdd(d_a: float, d_b: float, R: float, theta: float, phi: float) -> np.ndarray:
    """Dipole-dipole coupling projected on the four-state basis (atomic units, R in metres)."""
    da = atom_dipole_operators(d_a)
    db = atom_dipole_operators(d_b)
    nvec = unit_vector(theta, phi)
    tensor = np.eye(3) - 3.0 * np.outer(nvec, nvec)
    full = np.zeros((36, 36), dtype=complex)
    for a in range(3):
        for b in range(3):
            if tensor[a, b] != 0.0:
                full += tensor[a, b] * np.kron(da[a], db[b])
    idx = [ia * 6 + ib for ia, ib in _PAIR_STATES]
    v = full[np.ix_(idx, idx)] / length_to_au(R) ** 3
    return 0.5 * (v + v.conj().T)


def build_vdd(params: RydbergParams) -> np.ndarray:
    if params.vdd is not None:
        return params.vdd
    if params.d_a is None or params.d_b is None:
        raise ConfigurationError("no dipole data: give either vdd or both d_a and d_b")
    return hermitian(assemble_vdd(params.d_a, params.d_b, params.R, params.theta, params.phi))


def stark_diagonal(params: RydbergParams, e_v_per_cm: float) -> np.ndarray:
    """``diag(0, gamma (E - E1), gamma (E - E2), gamma (E - E3))`` in atomic units."""
    e = field_to_au(e_v_per_cm)
    return np.array([0.0] + [params.gamma * (e - field_to_au(ek)) for ek in params.resonances])


def build_hamiltonian(params: RydbergParams, e_v_per_cm: float, include_vdd: bool = True) -> np.ndarray:
    if not np.isfinite(e_v_per_cm):
        raise ValueError(f"field must be finite, got {e_v_per_cm!r}")
    h = np.diag(stark_diagonal(params, e_v_per_cm)).astype(complex)
    if include_vdd:
        h = h + build_vdd(params)
    return hermitian(h)


def hamiltonian_pair(params: RydbergParams) -> HamiltonianPair:
    return HamiltonianPair(build_hamiltonian(params, params.E_a), build_hamiltonian(params, params.E_b))


def cnot_target() -> np.ndarray:
    """Permutation fixing |0>, |1> and swapping |2> <-> |3>."""
    u = np.eye(4, dtype=complex)
    u[[2, 3]] = u[[3, 2]]
    return u


@dataclass
class StarkTable:
    """Level energies (atomic units) along a field grid (V/cm).

    ``bare`` holds the uncoupled levels in basis order (diabatic curves),
    ``bare_sorted`` the same values sorted, ``coupled`` the sorted
    eigenvalues with the dipole-dipole term included.
    """

    fields: np.ndarray
    bare: np.ndarray
    bare_sorted: np.ndarray
    coupled: np.ndarray

    def rows(self):
        for k, e in enumerate(self.fields):
            yield (float(e), *self.bare_sorted[k].tolist(), *self.coupled[k].tolist())


def stark_diagram(params: RydbergParams, e_grid) -> StarkTable:
    grid = np.atleast_1d(np.asarray(e_grid, dtype=float))
    if grid.size == 0:
        raise ValueError("field grid is empty")
    bare = np.array([stark_diagonal(params, e) for e in grid])
    coupled = np.array([np.linalg.eigvalsh(build_hamiltonian(params, e)) for e in grid])
    return StarkTable(grid, bare, np.sort(bare, axis=1), coupled)


def bare_crossings(table: StarkTable) -> list[tuple[int, int, float]]:
    """Fields where two uncoupled levels cross, as ``(i, j, E)`` with linear interpolation on the grid."""
    out = []
    e = table.fields
    n = table.bare.shape[1]
    for i in range(n):
        for j in range(i + 1, n):
            diff = table.bare[:, i] - table.bare[:, j]
            for k in range(len(e) - 1):
                a, b = diff[k], diff[k + 1]
                if a == 0.0:
                    out.append((i, j, float(e[k])))
                elif a * b < 0:
                    out.append((i, j, float(e[k] + (e[k + 1] - e[k]) * a / (a - b))))
            if len(e) and diff[-1] == 0.0:
                out.append((i, j, float(e[-1])))
    return sorted(out, key=lambda c: c[2])
