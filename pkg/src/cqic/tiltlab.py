"""Exact finite-dimensional checks of the tilting/smoothing operator toolkit.

The extended space is H ⊕ (H ⊗ D_1) ⊕ ... ⊕ (H ⊗ D_m): the original space
plus one tensor slot per direction register.  Tilting pushes a fraction of
each unit vector into the direction slots; everything here is small enough
to verify the resulting isometry, trace-norm closeness, smoothing
decomposition, the Hayashi-Nagaoka operator inequality, and square-root
measurements by direct eigensolves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import TILT_DIM_CAP, active_tolerances
from .errors import (DegenerateEnsemble, DimOverflow, DomainError,
                     InvalidOperands, LengthMismatch, NotUnit,
                     NumericalFailure)
from .linalg import eig_hermitian, operator_norm, trace_norm
from .states import DensityOperator


@dataclass(frozen=True)
class TiltSpace:
    """Bookkeeping for one extended space H ⊕ ⊕_s (H ⊗ D_s)."""

    base_dim: int
    aux_dims: tuple[int, ...]
    n: int = 1

    def __post_init__(self):
        object.__setattr__(self, "aux_dims", tuple(int(d) for d in self.aux_dims))
        if self.base_dim < 1 or self.n < 1 or any(d < 1 for d in self.aux_dims):
            raise DomainError("space dimensions must be positive")
        if self.total_dim > TILT_DIM_CAP:
            raise DimOverflow(f"extended dimension {self.total_dim} exceeds {TILT_DIM_CAP}")

    @property
    def total_dim(self) -> int:
        return self.base_dim * (1 + sum(d ** self.n for d in self.aux_dims))

    def slot_offset(self, s: int) -> int:
        return self.base_dim * (1 + sum(d ** self.n for d in self.aux_dims[:s]))


def _unit(vec, what: str) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise NotUnit(f"{what} must be a unit vector")
    return v


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"tilt strength {eta} outside [0, 1]")
    return eta


def embed_vector(h, space: TiltSpace) -> np.ndarray:
    out = np.zeros(space.total_dim, dtype=complex)
    out[:space.base_dim] = np.asarray(h, dtype=complex).reshape(-1)
    return out


def tilt_vector(h, directions, eta: float) -> np.ndarray:
    """Isometric tilt of a unit vector along one direction per aux slot.

    T(|h>) = (|h> + η Σ_s |h>⊗|d_s>) / sqrt(1 + m η²) with m = len(directions);
    the printed one- and two-direction normalizations 1/sqrt(1+η²) and
    1/sqrt(1+2η²) are the m = 1, 2 cases.
    """
    eta = _check_eta(eta)
    hv = _unit(h, "input vector")
    dirs = [_unit(d, f"direction {s}") for s, d in enumerate(directions)]
    space = TiltSpace(hv.size, tuple(d.size for d in dirs))
    out = embed_vector(hv, space)
    for s, d in enumerate(dirs):
        off = space.slot_offset(s)
        out[off:off + hv.size * d.size] = eta * np.kron(hv, d)
    return out / math.sqrt(1.0 + len(dirs) * eta * eta)


def four_user_omega(subset_size: int, eta: float) -> float:
    """Per-subset normalizer 1 + η^{2|S|}."""
    if not 1 <= subset_size <= 4:
        raise DomainError(f"subset size {subset_size} outside 1..4")
    return 1.0 + _check_eta(eta) ** (2 * subset_size)


def printed_omega(eta: float) -> float:
    """The aggregate normalizer polynomial exactly as printed."""
    e2 = _check_eta(eta) ** 2
    return 1.0 + 16.0 * e2 + 36.0 * e2 ** 2 + 16.0 * e2 ** 3


def four_user_tilt_report(h, direction_dim: int, eta: float) -> dict:
    """Aggregate 4-user tilt normalized by the printed Ω(η); norm reported.

    One slot per nonempty proper subset S of the four message indices (14
    slots), each fed the first basis direction and weight η^{|S|}.  The
    exact squared norm before scaling is 1 + 4η² + 6η⁴ + 4η⁶, so the
    printed polynomial over-normalizes; the deviation is reported, never
    asserted away.
    """
    eta = _check_eta(eta)
    hv = _unit(h, "input vector")
    sizes = [len(s) for s in _proper_subsets()]
    space = TiltSpace(hv.size, tuple(direction_dim for _ in sizes))
    out = embed_vector(hv, space)
    d0 = np.zeros(direction_dim, dtype=complex)
    d0[0] = 1.0
    for s, size in enumerate(sizes):
        off = space.slot_offset(s)
        out[off:off + hv.size * direction_dim] = eta ** size * np.kron(hv, d0)
    exact_sq = 1.0 + sum(eta ** (2 * size) for size in sizes)
    scaled = out / math.sqrt(printed_omega(eta))
    return {
        "eta": eta,
        "printed_omega": printed_omega(eta),
        "exact_norm_sq": exact_sq,
        "scaled_norm": float(np.linalg.norm(scaled)),
        "norm_deviation": abs(float(np.linalg.norm(scaled)) - 1.0),
        "per_subset_omega": {str(size): four_user_omega(size, eta)
                             for size in (1, 2, 3)},
    }


def _proper_subsets():
    out = []
    for mask in range(1, 15):
        out.append(tuple(i for i in range(4) if mask >> i & 1))
    return out


@dataclass(frozen=True)
class TiltedState:
    """Density operator on the extended space plus its provenance."""

    operator: np.ndarray
    original: np.ndarray
    directions: tuple[np.ndarray, ...]
    eta: float
    space: TiltSpace = field(compare=False)


def tilt_state(rho, d1, d2, eta: float) -> TiltedState:
    """Tilt each eigenvector of the mixture individually along d1, d2."""
    eta = _check_eta(eta)
    dens = DensityOperator(rho)
    dirs = (_unit(d1, "d1"), _unit(d2, "d2"))
    space = TiltSpace(dens.dim, (dirs[0].size, dirs[1].size))
    tol = active_tolerances()
    out = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    w, v = eig_hermitian(dens.mat)
    for lam, vec in zip(w, v.T):
        if lam < tol.eig_floor:
            continue
        t = tilt_vector(vec, dirs, eta)
        out += lam * np.outer(t, t.conj())
    return TiltedState(out, dens.mat, dirs, eta, space)


def closeness(rho, tilted: TiltedState) -> float:
    """Trace-norm distance between the embedded original and its tilt."""
    space = tilted.space
    emb = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    d = space.base_dim
    emb[:d, :d] = np.asarray(getattr(rho, "mat", rho), dtype=complex)
    return trace_norm(emb - tilted.operator)


def closeness_chain(eta: float) -> tuple[float, float]:
    """The two printed upper bounds (2√(2−2e^{−2η²}), 4η)."""
    eta = _check_eta(eta)
    return 2.0 * math.sqrt(2.0 - 2.0 * math.exp(-2.0 * eta * eta)), 4.0 * eta


def smoothing_residual(rho, aux_dims, eta: float, d2_index: int = 0):
    """Split the direction-averaged tilt into a scaled d2-tilt plus residual.

    Averages the two-direction tilted state exactly over the |D1| basis
    directions, subtracts ((1+η²)/(1+2η²)) times the d2-only tilted state
    embedded in the same extended space, and returns (structured part,
    residual operator norm).  The residual shrinks like η/√|D1|.
    """
    eta = _check_eta(eta)
    dens = DensityOperator(rho)
    dim1, dim2 = (int(d) for d in aux_dims)
    if dim1 < 1 or dim2 < 1:
        raise DomainError("direction-set sizes must be positive")
    if not 0 <= d2_index < dim2:
        raise DomainError(f"d2 index {d2_index} outside range 0..{dim2 - 1}")
    space = TiltSpace(dens.dim, (dim1, dim2))
    d2 = np.zeros(dim2, dtype=complex)
    d2[d2_index] = 1.0

    avg = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    for i in range(dim1):
        d1 = np.zeros(dim1, dtype=complex)
        d1[i] = 1.0
        avg += tilt_state(dens.mat, d1, d2, eta).operator
    avg /= dim1

    # d2-only tilt, embedded with an (empty) D1 slot to match layouts
    tol = active_tolerances()
    single = np.zeros_like(avg)
    w, v = eig_hermitian(dens.mat)
    base = dens.dim
    for lam, vec in zip(w, v.T):
        if lam < tol.eig_floor:
            continue
        t = np.zeros(space.total_dim, dtype=complex)
        t[:base] = vec
        off = space.slot_offset(1)
        t[off:off + base * dim2] = eta * np.kron(vec, d2)
        t /= math.sqrt(1.0 + eta * eta)
        single += lam * np.outer(t, t.conj())

    structured = ((1.0 + eta * eta) / (1.0 + 2.0 * eta * eta)) * single
    return structured, operator_norm(avg - structured)


def four_user_smoothing_report(rho, direction_dim: int, eta: float) -> dict:
    """Residual of averaging the aggregate 4-user tilt over one slot.

    The slot of the first singleton subset is averaged over its basis; the
    remaining 13 slots keep fixed directions.  Reports the measured
    residual norm against both printed constants 3η/√|D| and 21η/√|D|
    without asserting either.
    """
    eta = _check_eta(eta)
    dens = DensityOperator(rho)
    subsets = _proper_subsets()
    sizes = [len(s) for s in subsets]
    space = TiltSpace(dens.dim, tuple(direction_dim for _ in subsets))
    tol = active_tolerances()
    base = dens.dim

    def aggregate(d_first: np.ndarray, include_first: bool) -> np.ndarray:
        norm_sq = 1.0 + sum(eta ** (2 * sz) for s, sz in enumerate(sizes)
                            if include_first or s != 0)
        out = np.zeros((space.total_dim, space.total_dim), dtype=complex)
        w, v = eig_hermitian(dens.mat)
        d0 = np.zeros(direction_dim, dtype=complex)
        d0[0] = 1.0
        for lam, vec in zip(w, v.T):
            if lam < tol.eig_floor:
                continue
            t = np.zeros(space.total_dim, dtype=complex)
            t[:base] = vec
            for s, sz in enumerate(sizes):
                if s == 0 and not include_first:
                    continue
                d = d_first if s == 0 else d0
                off = space.slot_offset(s)
                t[off:off + base * direction_dim] = eta ** sz * np.kron(vec, d)
            t /= math.sqrt(norm_sq)
            out += lam * np.outer(t, t.conj())
        return out

    avg = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    for i in range(direction_dim):
        d = np.zeros(direction_dim, dtype=complex)
        d[i] = 1.0
        avg += aggregate(d, True)
    avg /= direction_dim

    with_first = 1.0 + sum(eta ** (2 * sz) for sz in sizes)
    without_first = with_first - eta ** 2
    structured = (without_first / with_first) * aggregate(
        np.zeros(direction_dim), False)
    measured = operator_norm(avg - structured)
    root = math.sqrt(direction_dim)
    return {
        "eta": eta,
        "direction_dim": direction_dim,
        "measured": measured,
        "bound_3eta": 3.0 * eta / root,
        "bound_21eta": 21.0 * eta / root,
        "within_3eta": bool(measured <= 3.0 * eta / root),
        "within_21eta": bool(measured <= 21.0 * eta / root),
    }


def _hermitian_or_raise(mat, what: str) -> np.ndarray:
    arr = np.asarray(getattr(mat, "mat", mat), dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidOperands(f"{what} must be square, got {arr.shape}")
    if float(np.abs(arr - arr.conj().T).max()) > active_tolerances().herm:
        raise InvalidOperands(f"{what} is not Hermitian")
    return arr


def hayashi_nagaoka_check(s_op, t_op) -> bool:
    """Verify Π − M S M ≼ 2(I−S) + 4T with M the pinv square root of S+T.

    Π is the support projector of S+T.  Requires 0 ≤ S ≤ I and T ≥ 0;
    the difference operator must come out Hermitian to 1e−12 and its
    minimum eigenvalue must clear −1e−9.
    """
    tol = active_tolerances()
    s = _hermitian_or_raise(s_op, "S")
    t = _hermitian_or_raise(t_op, "T")
    if s.shape != t.shape:
        raise InvalidOperands(f"shape mismatch {s.shape} vs {t.shape}")
    sw, _ = eig_hermitian(s)
    if float(sw.min()) < -tol.psd or float(sw.max()) > 1.0 + tol.psd:
        raise InvalidOperands("S must satisfy 0 ≤ S ≤ I")
    tw, _ = eig_hermitian(t)
    if float(tw.min()) < -tol.psd:
        raise InvalidOperands("T must be positive semidefinite")

    w, v = eig_hermitian(s + t)
    support = w > tol.eig_floor
    inv_sqrt = (v[:, support] / np.sqrt(w[support])) @ v[:, support].conj().T
    proj = v[:, support] @ v[:, support].conj().T
    lhs = proj - inv_sqrt @ s @ inv_sqrt
    eye = np.eye(s.shape[0])
    diff = 2.0 * (eye - s) + 4.0 * t - lhs
    if float(np.abs(diff - diff.conj().T).max()) > 1e-12:
        raise NumericalFailure("difference operator lost Hermiticity")
    dw, _ = eig_hermitian((diff + diff.conj().T) / 2.0)
    return bool(float(dw.min()) >= -1e-9)


def tiny_srm(states, priors):
    """Square-root measurement on the joint support of a small ensemble.

    Returns (povm elements, success probability Σ_i p_i tr(μ_i ρ_i)).
    Elements are Θ^{−1/2}-conjugated weighted states with Θ = Σ p_i ρ_i;
    they sum to the support projector of Θ.
    """
    tol = active_tolerances()
    dens = [DensityOperator(s) for s in states]
    if not 1 <= len(dens) <= 16:
        raise DomainError(f"need between 1 and 16 states, got {len(dens)}")
    if any(d.dim > 64 for d in dens) or len({d.dim for d in dens}) != 1:
        raise DomainError("states must share one dimension of at most 64")
    p = np.asarray(priors, dtype=float)
    if p.shape != (len(dens),):
        raise LengthMismatch(f"{len(dens)} states but {p.size} priors")
    if np.any(p < 0.0) or abs(float(p.sum()) - 1.0) > tol.prob:
        raise DomainError("priors must be a probability vector")

    theta = sum(pi * d.mat for pi, d in zip(p, dens))
    w, v = eig_hermitian(theta)
    support = w > tol.eig_floor
    if not support.any():
        raise DegenerateEnsemble("ensemble average has rank zero")
    inv_sqrt = (v[:, support] / np.sqrt(w[support])) @ v[:, support].conj().T
    proj = v[:, support] @ v[:, support].conj().T
    povm = [inv_sqrt @ (pi * d.mat) @ inv_sqrt for pi, d in zip(p, dens)]
    if operator_norm(sum(povm) - proj) > tol.info:
        raise NumericalFailure("square-root measurement is not complete")
    success = sum(pi * float(np.trace(mu @ d.mat).real)
                  for pi, mu, d in zip(p, povm, dens))
    return povm, success
