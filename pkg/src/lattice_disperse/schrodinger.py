"""Discrete Schroedinger operators H = Delta + V and the Birman-Schwinger
equation f = K(z) f with K(z) = -q1 (Delta - z)^{-1} q2, V = q1 q2.

Eigenvalues of H are detected on the infinite lattice through K, whose
kernel comes from :mod:`resolvent`; boxed Hamiltonians with Dirichlet
truncation serve as the independent route.

Outside the band the scan uses the real symmetric matrix

    M(lam) = S + D G(lam) D,   D = diag(|V|^{1/2}), S = diag(sign V),

with G(lam) = (Delta - lam)^{-1} on supp(V).  K f = f is equivalent to
M(S f) = 0, and every eigenvalue of M(lam) increases with lam on each side
of the band, so eigenvalues of H are sign changes of the ordered
eigenvalues of M.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.sparse
import scipy.sparse.linalg

from . import constants
from .bessel import tail_radius
from .core.lattice import Box, LatticeSequence, norm
from .core.linalg import hermitian_spectrum, hs_norm, operator_norm
from .resolvent import (DEFAULT_TOL, SpectralPoint, kernel_grid, kernel_values, laplace_resolvent,
                        r0_kernel)
from .verdict import DESCRIPTIVE, FAIL, PASS, SKIPPED, SLACK, VerdictRecord

DENSE_LIMIT = 4000
DETECTION_TOL = 1e-8


class BoundaryPollutionWarning(UserWarning):
    """The potential comes closer to the box boundary than the buffer allows."""


# ---------------------------------------------------------------------------
# potentials

@dataclass(frozen=True)
class Potential:
    """Real finitely supported potential with a declared summability exponent."""
    values: LatticeSequence
    p: float = 1.0

    def __post_init__(self):
        if len(self.values) and np.max(np.abs(self.values.values.imag)) > 0:
            raise ValueError("potential values must be real")

    @property
    def dim(self) -> int:
        return self.values.dim

    @property
    def coords(self) -> np.ndarray:
        return self.values.coords

    @property
    def real(self) -> np.ndarray:
        return self.values.values.real

    def __len__(self) -> int:
        return len(self.values)

    def norm(self, p: float | None = None) -> float:
        return norm(self.values, self.p if p is None else p)

    def sup(self) -> float:
        return float(np.abs(self.real).max()) if len(self) else 0.0

    def translated(self, shift) -> "Potential":
        return Potential(self.values.translated(shift), self.p)

    def scaled(self, g: float) -> "Potential":
        return Potential(self.values.scaled(g), self.p)

    @classmethod
    def zero(cls, dim: int) -> "Potential":
        return cls(LatticeSequence({}, dim=dim))

    @classmethod
    def point(cls, value: float, dim: int, at=None) -> "Potential":
        at = (0,) * dim if at is None else tuple(at)
        return cls(LatticeSequence.delta(at, value))

    @classmethod
    def from_entries(cls, entries, dim: int | None = None, p: float = 1.0) -> "Potential":
        """From a list of ``{"coords": [...], "value": v}``."""
        coords = [list(e["coords"]) for e in entries]
        vals = [float(e["value"]) for e in entries]
        if dim is None:
            if not coords:
                raise ValueError("dimension required for an empty potential")
            dim = len(coords[0])
        return cls(LatticeSequence.from_arrays(np.array(coords, dtype=np.int64).reshape(-1, dim),
                                               vals, dim), p)

    def to_entries(self) -> list[dict]:
        return [{"coords": [int(x) for x in c], "value": float(v)}
                for c, v in zip(self.coords, self.real)]


def load_potential(source) -> Potential:
    """Potential from a JSON file or dict with ``potential`` (entry list),
    optional ``dim`` and ``p``."""
    if isinstance(source, (str, Path)):
        source = json.loads(Path(source).read_text())
    if isinstance(source, list):
        return Potential.from_entries(source)
    return Potential.from_entries(source["potential"], source.get("dim"), source.get("p", 1.0))


def sparse_rho_potential(dim: int, radius: int, spacing: int, g: float = 1.0,
                         theta=None) -> Potential:
    """Sparse potential g theta_n rho_n placed at spacing * n, |n_j| <= radius.

    With an injective placement map the decay along the support can be made
    arbitrarily slow while the l^p norm stays that of rho.
    """
    box = Box(radius, dim)
    pts = box.points()
    rho = np.prod(1.0 / (1.0 + np.abs(pts)), axis=1)
    th = np.ones(len(pts)) if theta is None else np.asarray(theta, dtype=float)
    if np.any(np.abs(th) > 1):
        raise ValueError("|theta| must be <= 1")
    return Potential(LatticeSequence.from_arrays(spacing * pts, g * th * rho, dim))


def factorize(V: Potential, scale: LatticeSequence | None = None
              ) -> tuple[LatticeSequence, LatticeSequence]:
    """q1 = |V|^{1/2} s and q2 = sign(V) |V|^{1/2} / s, so that V = q1 q2.

    ``scale`` (positive on supp V, default 1) selects another admissible
    factorisation.
    """
    a = np.sqrt(np.abs(V.real))
    s = np.ones(len(V))
    if scale is not None:
        s = np.array([scale[tuple(c)].real for c in V.coords])
        if np.any(s <= 0):
            raise ValueError("factorisation scale must be positive on supp V")
    q1 = LatticeSequence.from_arrays(V.coords, a * s, V.dim)
    q2 = LatticeSequence.from_arrays(V.coords, np.sign(V.real) * a / s, V.dim)
    return q1, q2


# ---------------------------------------------------------------------------
# boxed Hamiltonians

def box_laplacian(box: Box) -> scipy.sparse.csr_matrix:
    """Delta on the box with Dirichlet truncation (hops leaving the box dropped)."""
    side = box.side
    hop = scipy.sparse.diags([np.full(side - 1, 0.5), np.full(side - 1, 0.5)], [-1, 1])
    eye = scipy.sparse.identity(side)
    L = scipy.sparse.csr_matrix((len(box), len(box)))
    for ax in range(box.dim):
        factors = [hop if j == ax else eye for j in range(box.dim)]
        term = factors[0]
        for f in factors[1:]:
            term = scipy.sparse.kron(term, f)
        L = L + term
    return L.tocsr()


@dataclass
class Hamiltonian:
    """Boxed H = Delta + V; ``matrix`` is sparse, :meth:`dense` materialises it."""
    box: Box
    potential: Potential
    matrix: scipy.sparse.csr_matrix
    boundary_warning: bool = False

    def dense(self) -> np.ndarray:
        if len(self.box) > DENSE_LIMIT:
            raise MemoryError(f"box with {len(self.box)} sites is too large for a dense matrix")
        return self.matrix.toarray()

    def __len__(self) -> int:
        return len(self.box)


def build_hamiltonian(V: Potential, box: Box, buffer: int | None = None) -> Hamiltonian:
    """Delta + V on ``box``.  A support closer than ``buffer`` (default N/2)
    to the boundary raises a :class:`BoundaryPollutionWarning`."""
    if V.dim != box.dim:
        raise ValueError("potential and box dimensions differ")
    if len(V) and not np.all(box.contains(V.coords)):
        raise ValueError("potential support leaves the box")
    buffer = box.radius // 2 if buffer is None else buffer
    polluted = len(V) > 0 and box.radius - V.values.support_radius() < buffer
    if polluted:
        warnings.warn(f"support radius {V.values.support_radius()} leaves less than {buffer} "
                      f"sites to the boundary of {box}", BoundaryPollutionWarning, stacklevel=2)
    H = box_laplacian(box)
    if len(V):
        diag = np.zeros(len(box))
        diag[box.index(V.coords)] = V.real
        H = (H + scipy.sparse.diags(diag)).tocsr()
    return Hamiltonian(box, V, H, polluted)


def spectrum(H: Hamiltonian) -> tuple[np.ndarray, np.ndarray]:
    """Full eigen-decomposition of a dense-size boxed Hamiltonian."""
    A = H.dense()
    w = hermitian_spectrum(A)
    _, v = scipy.linalg.eigh(A)
    return w, v


def discrete_spectrum(H: Hamiltonian, margin: float = 0.0, k0: int = 6
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of the boxed H outside [-d - margin, d + margin].

    Dense boxes use the full decomposition; larger ones use Lanczos on both
    ends, enlarging the number of requested pairs until the innermost one is
    inside the band (so none outside can be missing).
    """
    d = H.box.dim
    edge = d + margin
    if len(H) <= DENSE_LIMIT:
        w, v = spectrum(H)
        keep = np.abs(w) > edge
        return w[keep], v[:, keep]
    vals, vecs = [], []
    for which, outside in (("SA", lambda x: x < -edge), ("LA", lambda x: x > edge)):
        k = k0
        while True:
            w, v = scipy.sparse.linalg.eigsh(H.matrix, k=k, which=which, tol=1e-13,
                                             v0=np.ones(len(H)), maxiter=100_000)
            if not outside(w).all() or k >= len(H) - 2:
                break
            k = min(2 * k, len(H) - 2)
        keep = outside(w)
        vals.append(w[keep])
        vecs.append(v[:, keep])
    w = np.concatenate(vals)
    v = np.concatenate(vecs, axis=1)
    order = np.argsort(w)
    return w[order], v[:, order]


# ---------------------------------------------------------------------------
# Birman-Schwinger operator

@dataclass
class BSOperator:
    """K(z) = -q1 R0(z) q2 on supp(V); K f = f is the Birman-Schwinger equation."""
    z: SpectralPoint
    coords: np.ndarray
    matrix: np.ndarray
    entry_error: float = 0.0

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix) if self.matrix.size else np.zeros(0, complex)

    def distance_to_one(self) -> float:
        """min |nu - 1| over eigenvalues nu (inf for the empty operator)."""
        ev = self.eigenvalues()
        return float(np.min(np.abs(ev - 1))) if len(ev) else math.inf


def _as_point(z) -> SpectralPoint:
    return z if isinstance(z, SpectralPoint) else SpectralPoint.plus_i0(float(z))


def _differences(coords: np.ndarray) -> np.ndarray:
    d = coords.shape[1]
    return (coords[:, None, :] - coords[None, :, :]).reshape(-1, d)


def bs_operator(V: Potential, z, tol: float = DEFAULT_TOL,
                factors: tuple[LatticeSequence, LatticeSequence] | None = None) -> BSOperator:
    """Matrix -q1(n) r0(n - m, z) q2(m) over supp(V); a float z means lam + i0."""
    z = _as_point(z)
    q1, q2 = factors if factors is not None else factorize(V)
    S = len(V)
    if S == 0:
        return BSOperator(z, V.coords, np.zeros((0, 0), complex))
    vals, errs = kernel_values(_differences(V.coords), z, "full", tol)
    G = vals.reshape(S, S)
    K = -q1.values[:, None] * G * q2.values[None, :]
    scale = np.abs(q1.values)[:, None] * np.abs(q2.values)[None, :]
    return BSOperator(z, V.coords, K, float((errs.reshape(S, S) * scale).max()))


def _green_exterior(V: Potential, lams) -> np.ndarray:
    """Real G(lam) on supp(V) for real lam with |lam| >= d, shape (L, S, S)."""
    S = len(V)
    vals, _ = kernel_grid(_differences(V.coords), lams, 0.0, True, "full")
    return np.moveaxis(vals.real.reshape(S, S, -1), 2, 0)


def exterior_matrix(V: Potential, lam: float) -> np.ndarray:
    """M(lam) = S + D G(lam) D (real symmetric) for |lam| >= d."""
    if abs(lam) < V.dim:
        raise ValueError("the exterior matrix needs |lam| >= d")
    a = np.sqrt(np.abs(V.real))
    G = _green_exterior(V, [lam])[0]
    M = np.diag(np.sign(V.real)) + a[:, None] * G * a[None, :]
    return 0.5 * (M + M.T)


@dataclass
class Detection:
    lam: float
    multiplicity: int
    bracket: tuple[float, float]
    residual: float          # min |nu - 1| over eigenvalues of K(lam)
    certificate: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"lam": self.lam, "multiplicity": self.multiplicity,
                "bracket": list(self.bracket), "residual": self.residual, **self.certificate}


@dataclass
class ScanResult:
    detections: list[Detection]
    interior: list[dict]      # descriptive min |nu - 1| inside the band

    @property
    def count(self) -> int:
        return sum(d.multiplicity for d in self.detections)

    def to_dict(self) -> dict:
        return {"detections": [d.to_dict() for d in self.detections], "interior": self.interior}


def _negative_count(M: np.ndarray) -> int:
    return int(np.sum(np.linalg.eigvalsh(M) < 0))


def bs_scan(V: Potential, lam_grid, detection_tol: float = DETECTION_TOL,
            tol: float = DEFAULT_TOL) -> ScanResult:
    """Birman-Schwinger points of V among the grid intervals.

    Outside the band, intervals where the number of negative eigenvalues of
    M(lam) drops are refined by root finding on the ordered eigenvalue
    paths; each root is certified by min |nu - 1| <= detection_tol for the
    eigenvalues nu of K(lam).  Inside the band min |nu - 1| at lam + i0 is
    recorded descriptively.
    """
    d = V.dim
    if d < 3:
        raise ValueError("the Birman-Schwinger scan needs d >= 3")
    lams = np.unique(np.asarray(lam_grid, dtype=float))
    if len(V) == 0:
        return ScanResult([], [])
    a = np.sqrt(np.abs(V.real))
    sgn = np.diag(np.sign(V.real))

    def M_of(lam):
        return exterior_matrix(V, lam)

    detections: list[Detection] = []
    for side in (lams[lams <= -d], lams[lams >= d]):
        if len(side) < 2:
            continue
        G = _green_exterior(V, side)
        Ms = sgn[None] + a[None, :, None] * G * a[None, None, :]
        counts = [_negative_count(0.5 * (M + M.T)) for M in Ms]
        for i in range(len(side) - 1):
            lo, hi = side[i], side[i + 1]
            drop = counts[i] - counts[i + 1]
            if drop <= 0:
                continue
            roots = []
            for j in range(counts[i + 1], counts[i]):
                def f(lam, j=j):
                    return np.linalg.eigvalsh(M_of(lam))[j]
                flo, fhi = f(lo), f(hi)
                if flo == 0:
                    roots.append(lo)
                    continue
                if fhi == 0 or flo * fhi > 0:
                    roots.append(hi)
                    continue
                roots.append(scipy.optimize.brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps,
                                                   maxiter=200))
            roots.sort()
            groups: list[list[float]] = []
            for r in roots:
                if groups and abs(r - groups[-1][-1]) <= 1e-9 * max(1.0, abs(r)):
                    groups[-1].append(r)
                else:
                    groups.append([r])
            for grp in groups:
                lam = float(np.mean(grp))
                K = bs_operator(V, SpectralPoint.plus_i0(lam), tol)
                res = K.distance_to_one()
                ev_M = np.linalg.eigvalsh(M_of(lam))
                detections.append(Detection(
                    lam, len(grp), (float(lo), float(hi)), res,
                    {"certified": bool(res <= detection_tol),
                     "exterior_eigenvalue": float(np.min(np.abs(ev_M))),
                     "entry_error": K.entry_error}))
    interior = []
    inner = lams[np.abs(lams) < d]
    if len(inner):
        q1, q2 = factorize(V)
        S = len(V)
        vals, _ = kernel_grid(_differences(V.coords), inner, 0.0, True, "full", tol)
        for lam, G in zip(inner, np.moveaxis(vals.reshape(S, S, -1), 2, 0)):
            K = -q1.values[:, None] * G * q2.values[None, :]
            res = float(np.min(np.abs(np.linalg.eigvals(K) - 1)))
            interior.append({"lam": float(lam), "distance_to_one": res,
                             "candidate": bool(res <= detection_tol)})
    return ScanResult(detections, interior)


def default_grid(V: Potential, step: float = 0.05, margin: float = 0.5) -> np.ndarray:
    """Grid covering [-d - ||V||_inf - margin, d + ||V||_inf + margin], which
    contains the spectrum of H, with the band edges as grid points."""
    d = V.dim
    reach = d + V.sup() + margin
    n = int(math.ceil(reach / step))
    grid = np.round(step * np.arange(-n, n + 1), 12)
    return np.unique(np.concatenate([grid, [-d, d]]))


def rank_one_root(g: float, d: int) -> float | None:
    """Root of 1 = g G(0, lam) for V = -g delta_0, via the modified-Bessel
    representation of G.  Below the band for g > 0, above it for g < 0;
    ``None`` when the coupling is subcritical."""
    if g == 0:
        return None
    sign = 1.0 if g > 0 else -1.0
    g = abs(g)
    edge = r0_kernel((0,) * d, SpectralPoint.plus_i0(-d)).value.real
    if g * edge <= 1:
        return None

    def f(lam):
        return 1 - g * laplace_resolvent((0,) * d, lam)

    # G(lam) <= 1/(|lam| - d), so f > 0 at the lower end
    hi = -d - 1e-10
    if f(hi) >= 0:
        return None
    root = scipy.optimize.brentq(f, -d - g - 1.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return sign * root


# ---------------------------------------------------------------------------
# verifiers

def verify_bs_correspondence(V: Potential, box: Box, tol: float = 1e-6,
                             lam_grid=None, slack: float = SLACK) -> VerdictRecord:
    """Round trip between boxed eigenpairs outside the band and Birman-Schwinger solutions.

    Forward: f = q1 g solves K f = f with relative residual <= tol.
    Backward: for each scan detection, g = R0(lam) q2 f built from the null
    vector f of I - K is an eigenvector of the boxed H with relative
    residual <= tol.  The detected multiplicities must match the eigenvalue
    count of the boxed H outside the band.
    """
    d = V.dim
    H = build_hamiltonian(V, box)
    w, vecs = discrete_spectrum(H, margin=1e-9)
    q1, q2 = factorize(V)
    idx = box.index(V.coords) if len(V) else np.zeros(0, int)
    forward = []
    for lam, g in zip(w, vecs.T):
        f = q1.values * g[idx]
        K = bs_operator(V, SpectralPoint.plus_i0(float(lam)))
        nf = np.linalg.norm(f)
        forward.append(float(np.linalg.norm(f - K.matrix @ f) / nf) if nf else math.inf)
    grid = default_grid(V) if lam_grid is None else lam_grid
    scan = bs_scan(V, grid) if len(V) else ScanResult([], [])
    backward = []
    pts = box.points()
    for det in scan.detections:
        K = bs_operator(V, SpectralPoint.plus_i0(det.lam))
        _, s, vh = np.linalg.svd(np.eye(len(V)) - K.matrix)
        for f in vh[len(s) - det.multiplicity:].conj():
            # g(n) = sum_m r0(n - m, lam) q2(m) f(m) on the box
            diff = (pts[:, None, :] - V.coords[None, :, :]).reshape(-1, d)
            r, _ = kernel_values(diff, SpectralPoint.plus_i0(det.lam))
            g = (r.reshape(len(pts), len(V)) @ (q2.values * f)).real
            resid = H.matrix @ g - det.lam * g
            backward.append(float(np.linalg.norm(resid) / np.linalg.norm(g)))
    count_box = len(w)
    mismatch = abs(count_box - scan.count)
    lhs = max(forward + backward + [0.0])
    status = PASS if (mismatch == 0 and lhs <= tol * (1 + slack)) else FAIL
    return VerdictRecord("schrodinger.bs_correspondence",
                         {"dim": d, "support": len(V), "box_radius": box.radius},
                         lhs, tol, status, "bs-correspondence",
                         {"eigenvalues_box": w.tolist(),
                          "detections": [x.to_dict() for x in scan.detections],
                          "forward_residuals": forward, "backward_residuals": backward,
                          "count_box": count_box, "count_scan": scan.count})


def verify_rank_one(g: float, d: int, box: Box, lam_grid=None,
                    slack: float = SLACK) -> list[VerdictRecord]:
    """V = -g delta_0: scan detection against the boxed eigenvalue (relative
    1e-6) and against the scalar root (1e-8)."""
    V = Potential.point(-g, d)
    grid = default_grid(V) if lam_grid is None else lam_grid
    scan = bs_scan(V, grid)
    root = rank_one_root(g, d)
    H = build_hamiltonian(V, box)
    w, _ = discrete_spectrum(H, margin=1e-9)
    params = {"g": g, "d": d, "box_radius": box.radius}
    if root is None:
        lhs = float(len(scan.detections) + len(w))
        status = PASS if lhs == 0 else FAIL
        return [VerdictRecord("schrodinger.rank_one", params, lhs, 0.0, status, "bs-rank-one",
                              {"note": "subcritical coupling: no eigenvalue expected",
                               "detections": [x.lam for x in scan.detections],
                               "eigenvalues_box": w.tolist()})]
    if len(scan.detections) != 1 or len(w) != 1:
        return [VerdictRecord("schrodinger.rank_one", params, math.inf, 0.0, FAIL, "bs-rank-one",
                              {"detections": [x.lam for x in scan.detections],
                               "eigenvalues_box": w.tolist(), "root": root})]
    lam = scan.detections[0].lam
    rel_box = abs(lam - w[0]) / abs(w[0])
    err_root = abs(lam - root)
    return [
        VerdictRecord("schrodinger.rank_one_box", params, rel_box, 1e-6,
                      PASS if rel_box <= 1e-6 else FAIL, "bs-rank-one",
                      {"detection": lam, "box_eigenvalue": float(w[0])}),
        VerdictRecord("schrodinger.rank_one_root", params, err_root, 1e-8,
                      PASS if err_root <= 1e-8 else FAIL, "bs-rank-one",
                      {"detection": lam, "scalar_root": root,
                       "certificate": scan.detections[0].to_dict()}),
    ]


def verify_small_coupling(V: Potential, box: Box | None = None, lam_grid=None,
                          eps: float = 1e-6) -> VerdictRecord:
    """Below the coupling threshold no Birman-Schwinger points and no boxed
    eigenvalues outside [-d - eps, d + eps]."""
    d, p = V.dim, V.p
    threshold = constants.small_coupling_threshold(p, d)
    size = V.norm(p)
    params = {"d": d, "p": p, "norm": size}
    if size >= threshold:
        return VerdictRecord("schrodinger.small_coupling", params, size, threshold, SKIPPED,
                             "bs-small-coupling", {"note": "coupling above the threshold"})
    grid = default_grid(V) if lam_grid is None else lam_grid
    scan = bs_scan(V, grid)
    count = scan.count
    box_count = 0
    if box is not None:
        w, _ = discrete_spectrum(build_hamiltonian(V, box), margin=eps)
        box_count = len(w)
    lhs = float(count + box_count)
    return VerdictRecord("schrodinger.small_coupling", params, lhs, 0.0,
                         PASS if lhs == 0 else FAIL, "bs-small-coupling",
                         {"threshold": threshold, "detections": count, "box_eigenvalues": box_count})


def verify_multiplicity(V: Potential, box: Box, lam_grid=None, cluster: float = 1e-8,
                        kernel_tol: float = 1e-6) -> VerdictRecord:
    """dim ker(H - lam) from the boxed H against dim ker(I - K(lam))."""
    H = build_hamiltonian(V, box)
    w, _ = discrete_spectrum(H, margin=1e-9)
    grid = default_grid(V) if lam_grid is None else lam_grid
    scan = bs_scan(V, grid)
    rows = []
    worst = 0
    for det in scan.detections:
        box_mult = int(np.sum(np.abs(w - det.lam) <= max(cluster, 1e-6 * abs(det.lam))))
        K = bs_operator(V, SpectralPoint.plus_i0(det.lam))
        s = np.linalg.svd(np.eye(len(V)) - K.matrix, compute_uv=False)
        bs_mult = int(np.sum(s <= kernel_tol))
        rows.append({"lam": det.lam, "box": box_mult, "kernel": bs_mult,
                     "scan": det.multiplicity})
        worst = max(worst, abs(box_mult - bs_mult), abs(bs_mult - det.multiplicity))
    return VerdictRecord("schrodinger.multiplicity", {"dim": V.dim, "box_radius": box.radius},
                         float(worst), 0.0, PASS if worst == 0 else FAIL, "bs-multiplicity",
                         {"eigenvalues": rows})


def _box_resolvent_columns(H: Hamiltonian, z: complex, idx: np.ndarray,
                           rtol: float = 1e-13) -> np.ndarray:
    """Columns (H - z)^{-1} e_m of the boxed Hamiltonian for m in ``idx``."""
    A = (H.matrix - z * scipy.sparse.identity(len(H), format="csr")).tocsr()
    if len(H) <= DENSE_LIMIT:
        B = np.zeros((len(H), len(idx)), complex)
        B[idx, np.arange(len(idx))] = 1
        return scipy.linalg.solve(A.toarray(), B)
    cols = []
    for m in idx:
        b = np.zeros(len(H), complex)
        b[m] = 1
        x, info = scipy.sparse.linalg.gmres(A, b, rtol=rtol, atol=0.0, restart=200,
                                            maxiter=2000)
        if info != 0:
            raise ArithmeticError(f"GMRES did not converge (info={info})")
        cols.append(x)
    return np.stack(cols, axis=1)


def verify_resolvent_identity(V: Potential, z: SpectralPoint, box: Box, tol: float = 1e-6,
                              singular: float = 1e10) -> VerdictRecord:
    """Y(z)(I + Y0(z)) = q2 R0(z) q2 in Hilbert-Schmidt norm.

    Y(z) = q2 (H - z)^{-1} q2 comes from the boxed Hamiltonian, Y0(z) =
    q1 R0(z) q2 and the right side from the lattice resolvent kernel.
    """
    if z.is_boundary:
        raise ValueError("the resolvent identity is checked at interior points")
    params = {"dim": V.dim, "support": len(V), "z": z.to_dict(), "box_radius": box.radius}
    if len(V) == 0:
        return VerdictRecord("schrodinger.resolvent_identity", params, 0.0, tol, PASS,
                             "limiting-absorption-identity", {"note": "V = 0"})
    H = build_hamiltonian(V, box)
    q1, q2 = factorize(V)
    idx = box.index(V.coords)
    cols = _box_resolvent_columns(H, z.z, idx)
    Y = q2.values[:, None] * cols[idx] * q2.values[None, :]
    vals, errs = kernel_values(_differences(V.coords), z)
    G = vals.reshape(len(V), len(V))
    Y0 = q1.values[:, None] * G * q2.values[None, :]
    W = q2.values[:, None] * G * q2.values[None, :]
    # max(||I + Y0||, 1) / s_min also flags a 1 x 1 matrix that is nearly zero
    sv = scipy.linalg.svdvals(np.eye(len(V)) + Y0)
    cond = max(sv[0], 1.0) / sv[-1] if sv[-1] > 0 else math.inf
    resid = hs_norm(Y @ (np.eye(len(V)) + Y0) - W)
    details = {"condition_number": float(cond), "hs_norm_rhs": hs_norm(W)}
    if cond > singular:
        details["note"] = "I + Y0(z) numerically singular: near a Birman-Schwinger point"
        return VerdictRecord("schrodinger.resolvent_identity", params, resid, tol, SKIPPED,
                             "limiting-absorption-identity", details)
    return VerdictRecord("schrodinger.resolvent_identity", params, resid, tol,
                         PASS if resid <= tol else FAIL, "limiting-absorption-identity", details)


def causality_radius(T: float, support_radius: int, mass: float = 1e-24) -> int:
    """Box radius needed to evolve a state supported in radius R up to time T.

    Per axis the free kernel carries l^2 mass at most ``mass`` beyond
    ``tail_radius(T, mass)`` (Kapteyn bound), so boundary hops act on
    amplitudes of order sqrt(mass).  For the perturbed evolution this is a
    heuristic: a localised V does not change the propagation speed much.
    """
    return int(support_radius) + tail_radius(T, mass) + 1


def wave_operator_probe(V: Potential, f: LatticeSequence, T_list, box: Box,
                        isometry_tol: float = 1e-6) -> VerdictRecord:
    """W(T) f = e^{iTH} e^{-iT Delta} f on the box along ``T_list``.

    Reports Cauchy increments ||W(T_{k+1}) f - W(T_k) f||, isometry defects
    and intertwining defects ||(H W(T) - W(T) Delta) f||.  Passes when the
    increments do not increase and the isometry defect stays below
    ``isometry_tol``; no rate is asserted.
    """
    T_list = sorted(float(t) for t in T_list)
    radius = max(f.support_radius(), V.values.support_radius() if len(V) else 0)
    if T_list and causality_radius(T_list[-1], radius) > box.radius:
        raise ValueError(f"T={T_list[-1]} needs a box radius of at least "
                         f"{causality_radius(T_list[-1], radius)}; got {box}")
    H = build_hamiltonian(V, box).matrix.astype(complex)
    L = box_laplacian(box).astype(complex)
    x = f.to_dense(box)
    Lx = L @ x
    nf = np.linalg.norm(x)
    states, defects, inter = [], [], []
    for T in T_list:
        Wx = scipy.sparse.linalg.expm_multiply(1j * T * H,
                                               scipy.sparse.linalg.expm_multiply(-1j * T * L, x))
        WLx = scipy.sparse.linalg.expm_multiply(1j * T * H,
                                                scipy.sparse.linalg.expm_multiply(-1j * T * L, Lx))
        states.append(Wx)
        defects.append(float(abs(np.linalg.norm(Wx) - nf)))
        inter.append(float(np.linalg.norm(H @ Wx - WLx)))
    incr = [float(np.linalg.norm(b - a)) for a, b in zip(states[:-1], states[1:])]
    monotone = all(b <= a * (1 + 1e-9) + 1e-14 for a, b in zip(incr[:-1], incr[1:]))
    worst = max(defects) if defects else 0.0
    status = PASS if (monotone and worst <= isometry_tol) else FAIL
    return VerdictRecord("schrodinger.wave_operator", {"dim": V.dim, "T": T_list,
                                                       "box_radius": box.radius},
                         worst, isometry_tol, status, "wave-operator",
                         {"cauchy_increments": incr, "isometry_defects": defects,
                          "intertwining_defects": inter, "increments_decrease": monotone,
                          "intertwining_decrease": all(b <= a for a, b in zip(inter[:-1], inter[1:]))})


def lipschitz_estimate(V: Potential, lam: float, mu: float = 1e-3) -> float:
    """||Y0(lam + i mu) - Y0(lam + i0)|| / mu with Y0 = q1 R0 q2."""
    q1, q2 = factorize(V)
    diffs = _differences(V.coords)
    S = len(V)
    a, _ = kernel_values(diffs, SpectralPoint.plus_i0(lam))
    b, _ = kernel_values(diffs, SpectralPoint(lam, mu))
    D = q1.values[:, None] * (b - a).reshape(S, S) * q2.values[None, :]
    return operator_norm(D) / mu


def verify_finiteness_conditions(V: Potential, lam_grid=None, box: Box | None = None
                                 ) -> VerdictRecord:
    """Scan for Birman-Schwinger points and report their number, with a
    Lipschitz estimate of lam -> Y0(lam + i mu) near each.

    With a box, the number of detections outside the band is compared to
    the number of boxed eigenvalues there (pass/fail); without one the
    record is descriptive.  Points inside the band are reported only.
    """
    d = V.dim
    params = {"dim": d, "p": V.p, "support": len(V)}
    finite_range = constants.admissibility(d).finiteness_p if d >= 3 else None
    applicable = d >= 5 and finite_range is not None and V.p in finite_range
    grid = default_grid(V) if lam_grid is None else lam_grid
    scan = bs_scan(V, grid) if len(V) else ScanResult([], [])
    rows = []
    for det in scan.detections:
        L = lipschitz_estimate(V, det.lam)
        rows.append({**det.to_dict(), "lipschitz_estimate": L, "lipschitz_finite": bool(np.isfinite(L))})
    candidates = [x for x in scan.interior if x["candidate"]]
    details = {"detections": rows, "interior_candidates": candidates, "applicable": applicable,
               "count": scan.count}
    if box is None or not applicable:
        status = DESCRIPTIVE if applicable else SKIPPED
        return VerdictRecord("schrodinger.finiteness", params, float(scan.count), math.inf,
                             status, "finiteness", details)
    w, _ = discrete_spectrum(build_hamiltonian(V, box), margin=1e-9)
    details["box_count"] = len(w)
    details["box_eigenvalues"] = w.tolist()
    lhs = float(abs(len(w) - scan.count))
    return VerdictRecord("schrodinger.finiteness", {**params, "box_radius": box.radius}, lhs, 0.0,
                         PASS if lhs == 0 else FAIL, "finiteness", details)


def embedded_scan(V: Potential, lam_grid, tol: float = DEFAULT_TOL) -> VerdictRecord:
    """Descriptive min |nu - 1| along a grid inside the band."""
    scan = bs_scan(V, [x for x in lam_grid if abs(x) < V.dim], tol=tol)
    worst = min((x["distance_to_one"] for x in scan.interior), default=math.inf)
    return VerdictRecord("schrodinger.embedded_scan", {"dim": V.dim, "points": len(scan.interior)},
                         worst, DETECTION_TOL, DESCRIPTIVE, "embedded-scan",
                         {"interior": scan.interior})
