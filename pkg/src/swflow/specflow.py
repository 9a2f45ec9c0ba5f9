"""Spectral flow of continuous paths of symmetric matrices.

The flow is counted against a line shifted slightly above zero: with a
shift delta > 0 chosen below half the smallest nonzero endpoint
eigenvalue magnitude, SF equals the number of eigenvalues below the line
at the start minus the number below at the end.  Zero endpoint
eigenvalues therefore sit below the counting line: a branch departing
zero upward contributes +1, a branch arriving at zero from above
contributes -1, and branches that keep their sign contribute nothing.
The result is independent of the admissible delta and of the sample
grid, and is additive under direct sums and concatenation.

Crossings of the shifted line are localized by bisection and validated
with the crossing operator (the path derivative compressed to the
numerical kernel); a degenerate crossing triggers a delta halving.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SpectralFlowError",
    "SpectralFlowConfig",
    "HermitianPath",
    "CrossingRecord",
    "SpectralFlowReport",
    "TrackedBranches",
    "realify_matrix",
    "crossing_operator",
    "spectral_flow",
    "sf_direct_sum",
    "sf_concat",
    "track_degenerate_eigenvalue",
]


class SpectralFlowError(RuntimeError):
    """Raised when no admissible shift or refinement resolves the path."""


class _DegenerateCrossing(Exception):
    pass


@dataclass
class SpectralFlowConfig:
    delta_cap: float = 0.5
    max_halvings: int = 20
    kernel_threshold_rel: float = 1e-8
    bisection_tol: float = 1e-10
    fd_step_rel: float = 1e-5
    gap_min: float = 1e-8
    refine_max_depth: int = 80
    endpoint_count_only: bool = False


@dataclass
class CrossingRecord:
    t: float
    kernel_dim: int
    crossing_signature: int
    crossing_det_sign: int


@dataclass
class SpectralFlowReport:
    sf: int
    delta_used: float
    crossings: list
    refinement_depth: int
    method: str = "crossing"


@dataclass
class TrackedBranches:
    t_samples: np.ndarray
    eigenvalues: np.ndarray  # (samples, n), branch j in column j
    eigenvectors: np.ndarray  # (samples, n, n), branch j in [..., j]
    eigenvalue_slopes: np.ndarray  # (n,) ascending
    second_derivatives: np.ndarray  # (n,) curvature of each branch at 0


def realify_matrix(m):
    """Real 2n x 2n matrix of a complex n x n map acting on (Re, Im)."""
    m = np.asarray(m)
    return np.block([[m.real, -m.imag], [m.imag, m.real]])


def _check_symmetric(values, tol=1e-12):
    scale = max(1.0, float(np.abs(values).max(initial=0.0)))
    defect = np.abs(values - np.swapaxes(values, -1, -2)).max(initial=0.0)
    if defect > tol * scale:
        raise ValueError("path samples are not symmetric within tolerance")


class HermitianPath:
    """A sampled path of symmetric matrices on [a, b].

    Values between samples come from the stored callable when available
    and from linear interpolation otherwise; complex Hermitian input is
    converted on ingest to the doubled real symmetric form and flagged.
    The derivative is the stored closure or a central finite difference.
    """

    def __init__(self, t_samples, values, derivative=None, func=None, realified=False):
        t_samples = np.asarray(t_samples, dtype=float)
        if t_samples.ndim != 1 or t_samples.size < 2:
            raise ValueError("need at least two samples")
        if np.any(np.diff(t_samples) <= 0):
            raise ValueError("t_samples must be strictly increasing")
        values = np.asarray(values)
        if np.iscomplexobj(values):
            herm_defect = np.abs(values - np.conj(np.swapaxes(values, -1, -2))).max()
            if herm_defect > 1e-12 * max(1.0, float(np.abs(values).max())):
                raise ValueError("complex samples are not Hermitian")
            values = np.array([realify_matrix(v) for v in values])
            if func is not None:
                raw = func
                func = lambda t: realify_matrix(raw(t))
            if derivative is not None:
                rawd = derivative
                derivative = lambda t: realify_matrix(rawd(t))
            realified = True
        values = values.astype(float)
        _check_symmetric(values)
        if values.shape[0] != t_samples.size:
            raise ValueError("sample count mismatch")
        self.t_samples = t_samples
        self.values = values
        self._derivative = derivative
        self._func = func
        self.realified = realified

    @classmethod
    def from_samples(cls, t_samples, values, derivative=None):
        return cls(t_samples, values, derivative=derivative)

    @classmethod
    def from_callable(cls, func, a, b, num_samples=33, derivative=None):
        grid = np.linspace(a, b, num_samples)
        vals = np.array([func(t) for t in grid])
        return cls(grid, vals, derivative=derivative, func=func)

    @classmethod
    def affine(cls, const, linear, a=0.0, b=1.0):
        const = np.asarray(const)
        linear = np.asarray(linear)
        return cls.from_callable(
            lambda t: const + t * linear,
            a,
            b,
            num_samples=2,
            derivative=lambda t: linear,
        )

    @property
    def a(self):
        return float(self.t_samples[0])

    @property
    def b(self):
        return float(self.t_samples[-1])

    @property
    def n(self):
        return self.values.shape[1]

    def evaluate(self, t):
        if self._func is not None:
            return np.asarray(self._func(t), dtype=float)
        ts = self.t_samples
        t = float(np.clip(t, ts[0], ts[-1]))
        i = int(np.searchsorted(ts, t, side="right")) - 1
        i = min(max(i, 0), ts.size - 2)
        w = (t - ts[i]) / (ts[i + 1] - ts[i])
        return (1.0 - w) * self.values[i] + w * self.values[i + 1]

    def derivative_at(self, t, h=None):
        if self._derivative is not None:
            return np.asarray(self._derivative(t), dtype=float)
        if h is None:
            h = 1e-5 * (self.b - self.a)
        t1 = max(self.a, t - h)
        t2 = min(self.b, t + h)
        return (self.evaluate(t2) - self.evaluate(t1)) / (t2 - t1)


def _count_below(mat, level):
    eigs = np.linalg.eigvalsh(mat)
    return int(np.sum(eigs < level)), eigs


def crossing_operator(path, t, tol):
    """Path derivative compressed to the numerical kernel at time t.

    The kernel collects eigenvectors with |eigenvalue| < tol; the result
    is the k x k symmetric matrix of the compressed derivative (empty
    when the matrix is invertible at t)."""
    mat = path.evaluate(t)
    eigs, vecs = np.linalg.eigh(mat)
    w = vecs[:, np.abs(eigs) < tol]
    c = w.T @ path.derivative_at(t) @ w
    return 0.5 * (c + c.T)


def _signature(eigs, floor):
    return int(np.sum(eigs > floor) - np.sum(eigs < -floor))


def _make_record(path, tstar, net, delta, kernel_floor, cfg):
    shifted = path.evaluate(tstar) - delta * np.eye(path.n)
    eigs, vecs = np.linalg.eigh(shifted)
    mask = np.abs(eigs) < kernel_floor
    k = int(mask.sum())
    if k == 0:
        raise _DegenerateCrossing("no numerical kernel at a located crossing")
    w = vecs[:, mask]
    c = w.T @ path.derivative_at(tstar) @ w
    c = 0.5 * (c + c.T)
    ceigs = np.linalg.eigvalsh(c)
    cnorm = float(np.abs(ceigs).max())
    det = float(np.prod(ceigs))
    if cnorm == 0.0 or abs(det) < 1e-10 * cnorm:
        raise _DegenerateCrossing("crossing operator is numerically singular")
    if _signature(ceigs, 0.0) != net:
        raise _DegenerateCrossing("crossing signature disagrees with the count")
    return CrossingRecord(
        t=float(tstar),
        kernel_dim=k,
        crossing_signature=int(net),
        crossing_det_sign=int(np.sign(det)),
    )


def _flow_with_delta(path, delta, cfg, scale):
    kernel_floor = cfg.kernel_threshold_rel * scale
    na, _ = _count_below(path.values[0], delta)
    nb, _ = _count_below(path.values[-1], delta)
    if cfg.endpoint_count_only:
        return SpectralFlowReport(
            sf=na - nb,
            delta_used=delta,
            crossings=[],
            refinement_depth=0,
            method="endpoint-count",
        )
    ts = path.t_samples
    stack = []
    counts = {}
    for i in range(ts.size - 1):
        l, r = float(ts[i]), float(ts[i + 1])
        for t in (l, r):
            if t not in counts:
                counts[t] = _count_below(path.evaluate(t), delta)
        stack.append((l, r, 0))
    crossings = []
    max_depth = 0
    while stack:
        l, r, depth = stack.pop()
        max_depth = max(max_depth, depth)
        nl, el = counts[l]
        nr, er = counts[r]
        if r - l < cfg.bisection_tol:
            if nl != nr:
                crossings.append(
                    _make_record(path, 0.5 * (l + r), nl - nr, delta, kernel_floor, cfg)
                )
            continue
        if nl == nr:
            gap = min(np.abs(el - delta).min(), np.abs(er - delta).min())
            move = np.linalg.norm(path.evaluate(l) - path.evaluate(r), 2)
            if move < 0.5 * gap:
                continue
        if depth >= cfg.refine_max_depth:
            raise SpectralFlowError("adaptive refinement depth exceeded")
        m = 0.5 * (l + r)
        counts[m] = _count_below(path.evaluate(m), delta)
        stack.append((l, m, depth + 1))
        stack.append((m, r, depth + 1))
    crossings.sort(key=lambda rec: rec.t)
    total = sum(rec.crossing_signature for rec in crossings)
    if total != na - nb:
        raise SpectralFlowError("crossing sum disagrees with endpoint counts")
    return SpectralFlowReport(
        sf=total,
        delta_used=delta,
        crossings=crossings,
        refinement_depth=max_depth,
        method="crossing",
    )


def spectral_flow(path, cfg=None):
    """Spectral flow of a symmetric-matrix path, with crossing records.

    The shift starts at half the smallest nonzero endpoint eigenvalue
    magnitude (capped by cfg.delta_cap) and halves, at most
    cfg.max_halvings times, whenever a located crossing of the shifted
    path is numerically degenerate.  The report's sf always equals the
    sum of recorded crossing signatures; in endpoint-count mode only the
    endpoint eigenvalue counts are used and no crossings are recorded.
    """
    if cfg is None:
        cfg = SpectralFlowConfig()
    scale = max(1.0, float(np.abs(path.values).max(initial=0.0)))
    kernel_floor = cfg.kernel_threshold_rel * scale
    end_eigs = np.concatenate(
        [np.linalg.eigvalsh(path.values[0]), np.linalg.eigvalsh(path.values[-1])]
    )
    mags = np.abs(end_eigs)
    nonzero = mags[mags > kernel_floor]
    delta0 = 0.5 * min(float(nonzero.min()) if nonzero.size else cfg.delta_cap, cfg.delta_cap)
    err = None
    for halving in range(cfg.max_halvings + 1):
        delta = delta0 / 2.0**halving
        try:
            return _flow_with_delta(path, delta, cfg, scale)
        except _DegenerateCrossing as exc:
            err = exc
    raise SpectralFlowError(
        "no admissible shift after %d halvings: %s" % (cfg.max_halvings, err)
    )


def sf_direct_sum(p1, p2, cfg=None):
    """Spectral flow of the block-diagonal join of two paths."""
    if abs(p1.a - p2.a) > 1e-12 or abs(p1.b - p2.b) > 1e-12:
        raise ValueError("direct sum requires a common parameter domain")
    n1, n2 = p1.n, p2.n

    def f(t):
        out = np.zeros((n1 + n2, n1 + n2))
        out[:n1, :n1] = p1.evaluate(t)
        out[n1:, n1:] = p2.evaluate(t)
        return out

    def df(t):
        out = np.zeros((n1 + n2, n1 + n2))
        out[:n1, :n1] = p1.derivative_at(t)
        out[n1:, n1:] = p2.derivative_at(t)
        return out

    num = max(p1.t_samples.size, p2.t_samples.size, 9)
    joined = HermitianPath.from_callable(f, p1.a, p1.b, num_samples=num, derivative=df)
    return spectral_flow(joined, cfg).sf


def sf_concat(p1, p2, cfg=None):
    """Spectral flow of the concatenation (p2 reparametrized after p1)."""
    scale = max(1.0, float(np.abs(p1.values[-1]).max(initial=0.0)))
    if np.abs(p1.values[-1] - p2.values[0]).max(initial=0.0) > 1e-12 * scale:
        raise ValueError("concatenation endpoints do not match")
    offset = p1.b - p2.a
    junction = p1.b

    def f(t):
        return p1.evaluate(t) if t <= junction else p2.evaluate(t - offset)

    def df(t):
        return p1.derivative_at(t) if t <= junction else p2.derivative_at(t - offset)

    grid = np.unique(
        np.concatenate([p1.t_samples, p2.t_samples + offset])
    )
    vals = np.array([f(t) for t in grid])
    joined = HermitianPath(grid, vals, derivative=df, func=f)
    return spectral_flow(joined, cfg).sf


def _match_to_reference(ref_vecs, eigs, vecs):
    """Permute and sign-fix eigenvector columns to follow ref_vecs."""
    n = ref_vecs.shape[1]
    overlap = np.abs(ref_vecs.T @ vecs)
    perm = np.full(n, -1)
    used = set()
    for _ in range(n):
        i, j = np.unravel_index(np.argmax(overlap), overlap.shape)
        perm[i] = j
        used.add(j)
        overlap[i, :] = -1.0
        overlap[:, j] = -1.0
    out_vecs = vecs[:, perm]
    out_eigs = eigs[perm]
    signs = np.sign(np.sum(ref_vecs * out_vecs, axis=0))
    signs[signs == 0] = 1.0
    return out_eigs, out_vecs * signs


def track_degenerate_eigenvalue(path, cfg=None):
    """Branch data of a path vanishing at t = 0 with simple slope matrix.

    Requires A(0) = 0 and pairwise-distinct eigenvalues of A'(0).  The
    scaled family B(t) = A(t)/t (with B(0) = A'(0)) has continuous simple
    branches near 0; branch j (ordered by ascending slope) carries
    eigenvalue t * mu_j(t) and the B-eigenvector.  The curvature of each
    branch at 0 is the central difference of t -> <A'(t) v_j(t), v_j(t)>.
    """
    if cfg is None:
        cfg = SpectralFlowConfig()
    a, b = path.a, path.b
    if not (a < 0.0 < b):
        raise ValueError("domain must contain 0 in its interior")
    scale = max(1.0, float(np.abs(path.values).max(initial=0.0)))
    if np.abs(path.evaluate(0.0)).max(initial=0.0) > 1e-12 * scale:
        raise ValueError("path does not vanish at t = 0")
    b0 = path.derivative_at(0.0)
    b0 = 0.5 * (b0 + b0.T)
    slopes, v0 = np.linalg.eigh(b0)
    if np.min(np.diff(slopes)) <= cfg.gap_min:
        raise ValueError("derivative at 0 has a degenerate spectrum")

    grid = np.unique(np.concatenate([path.t_samples, np.linspace(a, b, 101), [0.0]]))
    tiny = 1e-13 * (b - a)

    def scaled(t):
        if abs(t) < tiny:
            return b0
        m = path.evaluate(t) / t
        return 0.5 * (m + m.T)

    n = path.n
    i0 = int(np.argmin(np.abs(grid)))
    mus = np.zeros((grid.size, n))
    vecs = np.zeros((grid.size, n, n))
    mus[i0], vecs[i0] = slopes, v0
    for direction in (1, -1):
        ref = v0
        i = i0 + direction
        while 0 <= i < grid.size:
            e, v = np.linalg.eigh(scaled(grid[i]))
            mus[i], vecs[i] = _match_to_reference(ref, e, v)
            ref = vecs[i]
            i += direction

    lam = grid[:, None] * mus
    h = 1e-3 * (b - a)
    second = np.zeros(n)
    gplus = gminus = None
    for sgn in (1.0, -1.0):
        t = sgn * h
        e, v = np.linalg.eigh(scaled(t))
        _, v = _match_to_reference(v0, e, v)
        d = path.derivative_at(t)
        g = np.einsum("ij,ik,jk->k", d, v, v)
        if sgn > 0:
            gplus = g
        else:
            gminus = g
    second = (gplus - gminus) / (2.0 * h)
    return TrackedBranches(
        t_samples=grid,
        eigenvalues=lam,
        eigenvectors=vecs,
        eigenvalue_slopes=slopes,
        second_derivatives=second,
    )
