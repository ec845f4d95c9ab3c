"""Matrix product states over RG-addressed kets.

Site ``a`` (1-based) carries the digit ``i_a``, so ``sites[0]`` is the
finest level.  Every site tensor has shape ``(chi_a, d, chi_{a+1})`` with
open boundaries ``chi_1 = chi_{n+1} = 1``.  The global factor ``scale``
multiplies the contracted chain.

Exact factorization is the usual cascade of Schmidt decompositions
(TT-SVD).  Truncation comes in two flavours: plain SVD truncation, and
alternating least squares (ALS) that minimizes ``|psi - psi~|^2`` one site
at a time starting from the SVD truncation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ResourceError
from .rgmap import AddressScheme, Ket

DEFAULT_RANK_TOL = 1e-12
DEFAULT_MAX_ELEMENTS = 1 << 24


@dataclass
class MPS:
    sites: list
    scheme: AddressScheme
    scale: float = 1.0

    def __post_init__(self):
        self.sites = [np.asarray(s, dtype=np.float64) for s in self.sites]
        self.scale = float(self.scale)
        n, d = self.scheme.n, self.scheme.d
        if len(self.sites) != n:
            raise DomainError(f"expected {n} site tensors, got {len(self.sites)}")
        left = 1
        for a, site in enumerate(self.sites):
            if site.ndim != 3 or site.shape[1] != d:
                raise DomainError(f"site {a + 1} has shape {site.shape}, physical dim must be {d}")
            if site.shape[0] != left:
                raise DomainError(
                    f"bond mismatch at site {a + 1}: left dim {site.shape[0]}, expected {left}"
                )
            left = site.shape[2]
        if left != 1:
            raise DomainError(f"right boundary bond must be 1, got {left}")

    @property
    def bonds(self) -> list[int]:
        """Bond dimensions ``chi_1 .. chi_{n+1}`` (boundaries included)."""
        return [s.shape[0] for s in self.sites] + [1]

    @property
    def inner_bonds(self) -> list[int]:
        """Bond dimensions ``chi_2 .. chi_n``."""
        return [s.shape[0] for s in self.sites[1:]]

    @property
    def max_bond(self) -> int:
        return max(self.bonds)

    def copy(self) -> "MPS":
        return MPS([s.copy() for s in self.sites], self.scheme, self.scale)


@dataclass(frozen=True)
class SchmidtSpectrum:
    cut: int
    values: np.ndarray

    def rank(self, tol: float = DEFAULT_RANK_TOL) -> int:
        return numerical_rank(self.values, tol)


def rank_ceiling(scheme: AddressScheme, a: int) -> int:
    """Largest exact bond dimension ``chi_a``, ``min(d**(a-1), d**(n-a+1))``."""
    return scheme.d ** min(a - 1, scheme.n - a + 1)


def chi_max(scheme: AddressScheme) -> int:
    """Central-cut ceiling ``d**floor(n/2)``."""
    return scheme.d ** (scheme.n // 2)


def numerical_rank(values, tol: float = DEFAULT_RANK_TOL) -> int:
    values = np.asarray(values)
    if values.size == 0 or values[0] <= 0:
        return 0
    return int(np.count_nonzero(values > tol * values[0]))


def site_tensor(ket: Ket) -> np.ndarray:
    """Coefficients as an ``n``-way array with axes ordered ``(i_1, ..., i_n)``."""
    n, d = ket.scheme.n, ket.scheme.d
    return ket.coeffs.reshape((d,) * n).transpose(tuple(range(n - 1, -1, -1)))


def ket_from_site_tensor(tensor, scheme: AddressScheme) -> Ket:
    n = scheme.n
    coeffs = np.asarray(tensor).reshape((scheme.d,) * n).transpose(tuple(range(n - 1, -1, -1)))
    return Ket(scheme, coeffs.reshape(-1))


def product_mps(scheme: AddressScheme, vectors, scale: float = 1.0) -> MPS:
    """All-``chi=1`` MPS from one local vector per site."""
    sites = [np.asarray(v, dtype=np.float64).reshape(1, scheme.d, 1) for v in vectors]
    return MPS(sites, scheme, scale)


def _zero_mps(scheme: AddressScheme) -> MPS:
    v = np.full(scheme.d, 1.0 / np.sqrt(scheme.d))
    return product_mps(scheme, [v] * scheme.n, scale=0.0)


def exact_mps(ket: Ket, rank_tol: float = DEFAULT_RANK_TOL) -> MPS:
    """Exact MPS by successive Schmidt decompositions.

    Sites are left-orthogonal, the chain has unit norm and ``scale`` holds
    the ket norm.  Singular values at or below ``rank_tol`` times the largest
    of each cut are dropped.  A zero ket gives an all-``chi=1`` chain with
    ``scale = 0``.
    """
    scheme = ket.scheme
    n, d = scheme.n, scheme.d
    norm = ket.norm()
    if norm == 0.0:
        return _zero_mps(scheme)

    rest = site_tensor(ket) / norm
    sites = []
    left = 1
    for _ in range(n - 1):
        u, s, vt = np.linalg.svd(rest.reshape(left * d, -1), full_matrices=False)
        keep = max(1, numerical_rank(s, rank_tol))
        sites.append(u[:, :keep].reshape(left, d, keep))
        rest = s[:keep, None] * vt[:keep]
        left = keep
    sites.append(rest.reshape(left, d, 1))
    return MPS(sites, scheme, norm)


def contract(sites, d: int) -> np.ndarray:
    """Contract a chain into a ``(d**n,)`` vector in ``(i_1, ..., i_n)`` C order."""
    psi = np.ones((1, 1))
    for site in sites:
        chi_l, _, chi_r = site.shape
        psi = (psi @ site.reshape(chi_l, d * chi_r)).reshape(-1, chi_r)
    return psi.reshape(-1)


def reconstruct(mps: MPS, max_elements: int = DEFAULT_MAX_ELEMENTS) -> Ket:
    """Dense ket of an MPS, ``scale`` included.

    The output has ``d**n`` entries, so this is meant for boxes; larger
    outputs raise :class:`ResourceError`.
    """
    scheme = mps.scheme
    if scheme.size > max_elements:
        raise ResourceError(
            f"reconstruction needs {scheme.size} coefficients, cap is {max_elements}"
        )
    if mps.scale == 0.0:
        return Ket(scheme, np.zeros(scheme.size))
    flat = contract(mps.sites, scheme.d) * mps.scale
    return ket_from_site_tensor(flat, scheme)


def schmidt_spectrum(ket: Ket, cut: int) -> SchmidtSpectrum:
    """Singular values of the bipartition (sites ``1..cut`` | rest)."""
    n, d = ket.scheme.n, ket.scheme.d
    if not 1 <= cut <= n - 1:
        raise DomainError(f"cut must lie in [1, {n - 1}], got {cut}")
    matrix = site_tensor(ket).reshape(d**cut, d ** (n - cut))
    return SchmidtSpectrum(cut, np.linalg.svd(matrix, compute_uv=False))


def entropy(values) -> float:
    """Von Neumann entropy (bits) of a Schmidt spectrum, ``0 log 0 = 0``."""
    w = np.asarray(values, dtype=np.float64) ** 2
    total = w.sum()
    if total == 0.0:
        return 0.0
    p = w / total
    p = p[p > 0]
    return float(max(0.0, -(p * np.log2(p)).sum()))


def bond_entropies(ket: Ket) -> list[float]:
    """Entropies ``S_a`` for cuts ``a = 1 .. n-1``."""
    return [entropy(schmidt_spectrum(ket, a).values) for a in range(1, ket.scheme.n)]


def _right_orthogonalize(sites: list) -> None:
    # in place; moves the norm into sites[0]
    for a in range(len(sites) - 1, 0, -1):
        chi_l, d, chi_r = sites[a].shape
        q, r = np.linalg.qr(sites[a].reshape(chi_l, d * chi_r).T)
        k = q.shape[1]
        sites[a] = q.T.reshape(k, d, chi_r)
        sites[a - 1] = np.tensordot(sites[a - 1], r.T, axes=(2, 0))


def svd_truncate(mps: MPS, chi: int) -> MPS:
    """Cap every bond at ``chi`` by discarding the smallest Schmidt values.

    The chain is brought to right-canonical form and then swept left to
    right, so each SVD sees the true Schmidt values of the partially
    truncated state.  Output sites are left-orthogonal.
    """
    if int(chi) != chi or chi < 1:
        raise DomainError(f"chi must be an integer >= 1, got {chi}")
    if mps.max_bond <= chi:
        return mps.copy()
    sites = [s.copy() for s in mps.sites]
    _right_orthogonalize(sites)
    for a in range(len(sites) - 1):
        chi_l, d, chi_r = sites[a].shape
        u, s, vt = np.linalg.svd(sites[a].reshape(chi_l * d, chi_r), full_matrices=False)
        keep = min(chi, s.size)
        sites[a] = u[:, :keep].reshape(chi_l, d, keep)
        sites[a + 1] = np.tensordot(s[:keep, None] * vt[:keep], sites[a + 1], axes=(1, 0))
    return MPS(sites, mps.scheme, mps.scale)


@dataclass
class AlsConfig:
    chi_trunc: int
    max_sweeps: int = 50
    rel_tol: float = 1e-8
    pinv_tol: float = 1e-12

    def __post_init__(self):
        if int(self.chi_trunc) != self.chi_trunc or self.chi_trunc < 1:
            raise DomainError(f"chi_trunc must be an integer >= 1, got {self.chi_trunc}")
        if int(self.max_sweeps) != self.max_sweeps or self.max_sweeps < 0:
            raise DomainError(f"max_sweeps must be a non-negative integer, got {self.max_sweeps}")
        if not self.rel_tol > 0 or not self.pinv_tol > 0:
            raise DomainError("tolerances must be positive")


@dataclass
class AlsResult:
    """Outcome of :func:`als_truncate`.

    Objectives are squared distances in the target's own units.
    ``history`` holds the objective after initialization and after every
    local update, in order.
    """

    mps: MPS
    objective: float
    initial_objective: float
    history: list = field(default_factory=list)
    sweeps: int = 0
    converged: bool = False
    stagnated: bool = False


def left_environment(sites, a: int, d: int) -> np.ndarray:
    """Contraction of sites before ``a`` (0-based) as a ``(d**a, chi_a)`` matrix."""
    env = np.ones((1, 1))
    for site in sites[:a]:
        chi_l, _, chi_r = site.shape
        env = (env @ site.reshape(chi_l, d * chi_r)).reshape(-1, chi_r)
    return env


def right_environment(sites, a: int, d: int) -> np.ndarray:
    """Contraction of sites after ``a`` (0-based) as a ``(chi_{a+1}, d**(n-a-1))`` matrix."""
    env = np.ones((1, 1))
    for site in reversed(sites[a + 1:]):
        chi_l, _, chi_r = site.shape
        env = (site.reshape(chi_l * d, chi_r) @ env).reshape(chi_l, -1)
    return env


def als_local_update(left_env, right_env, target_block, pinv_tol: float = 1e-12, current=None):
    """Optimal site tensor given its environment.

    ``target_block`` is the target reshaped to ``(d**(a-1), d, d**(n-a))``.
    The Gram matrix ``B`` over the combined bond index ``(alpha_a,
    alpha_{a+1})`` is the Kronecker product of the left and right
    environment Grams; ``E[i]`` is the target projected on the environment.
    All ``d`` right-hand sides share one eigendecomposition of ``B``, and
    eigenvalues at or below ``pinv_tol`` times the largest are discarded.

    Returns ``(gamma, stagnated)``.  When ``B`` is numerically zero the
    ``current`` tensor is returned unchanged with ``stagnated=True``.
    """
    left_env = np.asarray(left_env, dtype=np.float64)
    right_env = np.asarray(right_env, dtype=np.float64)
    chi_l, chi_r = left_env.shape[1], right_env.shape[0]
    d = target_block.shape[1]

    gram = np.kron(left_env.T @ left_env, right_env @ right_env.T)
    rhs = np.einsum("la,lir,br->iab", left_env, target_block, right_env, optimize=True)
    rhs = rhs.reshape(d, chi_l * chi_r)

    w, v = np.linalg.eigh(gram)
    top = w[-1] if w.size else 0.0
    if not top > np.finfo(np.float64).tiny:
        if current is None:
            current = np.zeros((chi_l, d, chi_r))
        return np.array(current, dtype=np.float64), True
    keep = w > pinv_tol * top
    vk = v[:, keep]
    solution = ((rhs @ vk) / w[keep]) @ vk.T
    return solution.reshape(d, chi_l, chi_r).transpose(1, 0, 2), False


def _distance2(target_flat, sites, d) -> float:
    diff = target_flat - contract(sites, d)
    return float(diff @ diff)


def _shift_center(sites, a: int, rightward: bool) -> None:
    # QR gauge move; leaves the represented state unchanged
    chi_l, d, chi_r = sites[a].shape
    if rightward:
        if chi_l * d < chi_r:
            return
        q, r = np.linalg.qr(sites[a].reshape(chi_l * d, chi_r))
        sites[a] = q.reshape(chi_l, d, chi_r)
        sites[a + 1] = np.tensordot(r, sites[a + 1], axes=(1, 0))
    else:
        if d * chi_r < chi_l:
            return
        q, r = np.linalg.qr(sites[a].reshape(chi_l, d * chi_r).T)
        sites[a] = q.T.reshape(chi_l, d, chi_r)
        sites[a - 1] = np.tensordot(sites[a - 1], r.T, axes=(2, 0))


def als_truncate(target: Ket, config: AlsConfig, max_elements: int = DEFAULT_MAX_ELEMENTS) -> AlsResult:
    """Best MPS with bonds ``<= chi_trunc`` by alternating least squares.

    Starts from ``svd_truncate(exact_mps(target))`` and sweeps the register
    back and forth, re-solving one site at a time.  Each local solve is the
    exact minimizer of the objective given the other sites, so the
    objective never increases; an update that would raise it beyond
    rounding is rejected.  Stops once a full sweep lowers the objective by
    less than ``rel_tol`` relative, or after ``max_sweeps`` sweeps.
    """
    scheme = target.scheme
    n, d = scheme.n, scheme.d
    if scheme.size > max_elements:
        raise ResourceError(f"ALS needs {scheme.size} coefficients, cap is {max_elements}")
    norm = target.norm()
    if norm == 0.0:
        return AlsResult(_zero_mps(scheme), 0.0, 0.0, [0.0], 0, True, False)

    init = svd_truncate(exact_mps(target), config.chi_trunc)
    sites = init.sites
    target_sites = np.ascontiguousarray(site_tensor(target)) / norm
    target_flat = target_sites.reshape(-1)
    norm2 = norm * norm

    obj = _distance2(target_flat, sites, d)
    initial = obj
    history = [obj * norm2]
    floor = (64 * np.finfo(np.float64).eps) ** 2
    converged = obj <= floor
    stagnated = False
    sweeps = 0

    # exact_mps leaves the orthogonality center on the last site
    while not converged and sweeps < config.max_sweeps and n > 1:
        rightward = sweeps % 2 == 1
        order = range(n) if rightward else range(n - 1, -1, -1)
        start = obj
        for a in order:
            left = left_environment(sites, a, d)
            right = right_environment(sites, a, d)
            block = target_sites.reshape(d**a, d, -1)
            gamma, stuck = als_local_update(left, right, block, config.pinv_tol, sites[a])
            stagnated |= stuck
            trial = sites[:a] + [gamma] + sites[a + 1:]
            trial_obj = _distance2(target_flat, trial, d)
            if trial_obj <= obj:
                sites, obj = trial, trial_obj
            history.append(obj * norm2)
            if rightward and a < n - 1:
                _shift_center(sites, a, True)
            elif not rightward and a > 0:
                _shift_center(sites, a, False)
        sweeps += 1
        if obj <= floor or start - obj <= config.rel_tol * start:
            converged = True

    if n == 1:
        converged = True
    mps = MPS(sites, scheme, norm)
    return AlsResult(mps, obj * norm2, initial * norm2, history, sweeps, converged, stagnated)


def objective(target: Ket, mps: MPS) -> float:
    """Squared distance ``|target - reconstruct(mps)|^2``."""
    diff = target.coeffs - reconstruct(mps).coeffs
    return float(diff @ diff)


def parameter_count(mps: MPS, convention: str = "actual") -> int:
    """Number of stored reals.

    ``"actual"`` sums the true tensor sizes; ``"uniform"`` counts
    ``n * d * chi_max**2`` as if every site were ``chi x chi``.
    """
    if convention == "actual":
        return int(sum(s.size for s in mps.sites))
    if convention == "uniform":
        return uniform_parameter_count(mps.scheme.n, mps.scheme.d, mps.max_bond)
    raise DomainError(f"unknown counting convention {convention!r}")


def uniform_parameter_count(n: int, d: int, chi: int) -> int:
    return n * d * chi * chi
