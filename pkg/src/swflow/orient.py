"""Orientation transport along paths of symmetric matrices.

Two independent computations of the transported sign:

* kernel-bundle route: pick a constant stabilizer K so that [T_t K] is
  surjective for every t (certified by eigenvalue-movement bounds and
  adaptive refinement), parallel-transport an orthonormal frame of
  ker [T_t K] along the path by projection plus symmetric
  re-orthonormalization, and compare the projections to the stabilizer
  domain at both ends: the sign is sgn(det A_b * det A_a) where A_t is
  the stabilizer block of the frame (valid when the endpoints are
  invertible, so that the stabilizer block is square and nonsingular);

* flow route: (-1) raised to the spectral flow of the path.

The two routes agree on every continuously differentiable path with
invertible endpoints; the flow route also covers singular endpoints
through the shifted counting line.
"""

from dataclasses import dataclass

import numpy as np

from . import specflow as sfmod

__all__ = [
    "OrientationTransportError",
    "TransportReport",
    "orientation_transport_det",
    "orientation_transport_sf",
    "transport_report",
    "ot_axioms",
]


class OrientationTransportError(RuntimeError):
    """Certification or frame transport failed after refinement."""


@dataclass
class TransportReport:
    eps_det: int
    eps_sf: int
    sf: int
    stabilizer_dim: int


def _kernel_basis(mat, K):
    block = np.hstack([mat, K])
    _, s, vt = np.linalg.svd(block, full_matrices=True)
    rank = int(np.sum(s > 1e-10 * s[0])) if s.size and s[0] > 0 else 0
    return vt[rank:].T


def _margin_and_dirs(mat, K, collect_tol):
    """Smallest singular value of [T K] and near-cokernel directions."""
    block = np.hstack([mat, K])
    u, s, _ = np.linalg.svd(block, full_matrices=True)
    pad = np.zeros(block.shape[0] - s.size)
    s_full = np.concatenate([s, pad])
    margin = float(s_full.min())
    dirs = u[:, s_full < collect_tol]
    return margin, dirs


def _scan_stabilizer(path, K, trigger, collect_tol, cfg):
    """Certify that [T_t K] stays surjective, or return directions to add.

    Returns (certified, new_directions, grid): on success the grid holds
    the refinement points at which margins were checked, dense enough
    that the operator moves by less than half the local margin between
    neighbours."""
    cache = {}

    def probe(t):
        if t not in cache:
            cache[t] = _margin_and_dirs(path.evaluate(t), K, collect_tol)
        return cache[t]

    stack = []
    ts = path.t_samples
    for i in range(ts.size - 1):
        stack.append((float(ts[i]), float(ts[i + 1]), 0))
    for t in ts:
        margin, dirs = probe(float(t))
        if margin < trigger:
            return False, dirs, None
    while stack:
        l, r, depth = stack.pop()
        ml = probe(l)[0]
        mr = probe(r)[0]
        move = np.linalg.norm(path.evaluate(l) - path.evaluate(r), 2)
        if move < 0.5 * min(ml, mr):
            continue
        if depth >= cfg.refine_max_depth:
            raise OrientationTransportError(
                "cannot certify the stabilizer: refinement depth exceeded"
            )
        m = 0.5 * (l + r)
        margin, dirs = probe(m)
        if margin < trigger:
            return False, dirs, None
        stack.append((l, m, depth + 1))
        stack.append((m, r, depth + 1))
    return True, None, np.array(sorted(cache.keys()))


def _orthonormalize(cols):
    if cols.shape[1] == 0:
        return cols
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    rank = int(np.sum(s > 1e-10 * s[0])) if s[0] > 0 else 0
    return u[:, :rank]


def _collect_stabilizer(path, cfg):
    """Constant stabilizer covering every near-singular parameter."""
    n = path.n
    scale = max(1.0, float(np.abs(path.values).max(initial=0.0)))
    trigger = 1e-6 * scale
    collect_tol = 1e-3 * scale
    V = np.zeros((n, 0))
    for _ in range(n + 1):
        certified, dirs, grid = _scan_stabilizer(path, V, trigger, collect_tol, cfg)
        if certified:
            return V, grid
        V = _orthonormalize(np.hstack([V, dirs]))
    # fallback: the full space always stabilizes ([T I] has margin >= 1)
    V = np.eye(n)
    certified, _, grid = _scan_stabilizer(path, V, trigger, collect_tol, cfg)
    if not certified:
        raise OrientationTransportError("full-space stabilizer failed to certify")
    return V, grid


def _transport_frame(path, K, grid, rng, cfg):
    """Parallel-transport a kernel frame along the grid; returns both
    endpoint stabilizer-block determinants."""
    n = path.n
    v = K.shape[1]
    frame = _kernel_basis(path.evaluate(grid[0]), K)
    if frame.shape[1] != v:
        raise OrientationTransportError("kernel dimension is not the stabilizer rank")
    if rng is not None and v > 0:
        q, r = np.linalg.qr(rng.standard_normal((v, v)))
        frame = frame @ q
    det_a = float(np.linalg.det(frame[n:, :])) if v else 1.0

    def advance(frame, t_next, t_cur, depth):
        basis = _kernel_basis(path.evaluate(t_next), K)
        if basis.shape[1] != v:
            raise OrientationTransportError("kernel dimension changed along the path")
        m = basis @ (basis.T @ frame)
        if v == 0:
            return frame
        u, s, wt = np.linalg.svd(m, full_matrices=False)
        if s.min() >= 0.5:
            return u @ wt
        if depth >= cfg.refine_max_depth:
            raise OrientationTransportError(
                "projection between samples is rank-deficient: grid too coarse"
            )
        mid = 0.5 * (t_cur + t_next)
        return advance(advance(frame, mid, t_cur, depth + 1), t_next, mid, depth + 1)

    for i in range(len(grid) - 1):
        frame = advance(frame, float(grid[i + 1]), float(grid[i]), 0)
    det_b = float(np.linalg.det(frame[n:, :])) if v else 1.0
    return det_a, det_b


def _transport_det(path, cfg, rng, extra_directions, full_stabilizer):
    scale = max(1.0, float(np.abs(path.values).max(initial=0.0)))
    floor = cfg.kernel_threshold_rel * scale
    for idx in (0, -1):
        if np.abs(np.linalg.eigvalsh(path.values[idx])).min() < floor:
            raise ValueError("endpoint is singular: kernel-bundle route undefined")
    if full_stabilizer:
        V = np.eye(path.n)
        _, _, grid = _scan_stabilizer(path, V, 1e-6 * scale, 1e-3 * scale, cfg)
    else:
        V, grid = _collect_stabilizer(path, cfg)
    if extra_directions > 0:
        gen = rng if rng is not None else np.random.default_rng(0)
        extra = gen.standard_normal((path.n, extra_directions))
        V = _orthonormalize(np.hstack([V, extra]))
        certified, _, grid = _scan_stabilizer(path, V, 1e-6 * scale, 1e-3 * scale, cfg)
        if not certified:
            raise OrientationTransportError("enlarged stabilizer failed to certify")
    det_a, det_b = _transport_frame(path, V, grid, rng, cfg)
    if abs(det_a) < 1e-12 or abs(det_b) < 1e-12:
        raise OrientationTransportError("stabilizer block is numerically singular")
    return (1 if det_a * det_b > 0 else -1), V.shape[1]


def orientation_transport_det(
    path, cfg=None, rng=None, extra_directions=0, full_stabilizer=False
):
    """Transported orientation sign via the kernel-bundle trivialization.

    Requires invertible endpoints.  The result is independent of the
    stabilizer (enlarge with extra_directions or force the full space
    with full_stabilizer) and of the initial frame (randomized when rng
    is given)."""
    if cfg is None:
        cfg = sfmod.SpectralFlowConfig()
    eps, _ = _transport_det(path, cfg, rng, extra_directions, full_stabilizer)
    return eps


def orientation_transport_sf(path, cfg=None):
    """Transported orientation sign as the parity of the spectral flow."""
    flow = sfmod.spectral_flow(path, cfg).sf
    return 1 if flow % 2 == 0 else -1


def transport_report(path, cfg=None):
    """Run both routes and package the results (endpoints invertible)."""
    if cfg is None:
        cfg = sfmod.SpectralFlowConfig()
    eps_det, vdim = _transport_det(path, cfg, None, 0, False)
    flow = sfmod.spectral_flow(path, cfg).sf
    return TransportReport(
        eps_det=eps_det,
        eps_sf=1 if flow % 2 == 0 else -1,
        sf=flow,
        stabilizer_dim=vdim,
    )


def ot_axioms(p1, p2, homotopy=None, cfg=None):
    """Check multiplicativity under direct sum and concatenation, and
    homotopy invariance of the transported sign.

    Returns a dict with entries "direct_sum", "concat" (None when the
    paths cannot be concatenated) and "homotopy" (None when no homotopy
    is supplied); each entry holds both sides and an "ok" flag."""
    e1 = orientation_transport_sf(p1, cfg)
    e2 = orientation_transport_sf(p2, cfg)
    report = {}
    eps_sum = 1 if sfmod.sf_direct_sum(p1, p2, cfg) % 2 == 0 else -1
    report["direct_sum"] = {"ok": eps_sum == e1 * e2, "lhs": eps_sum, "rhs": e1 * e2}
    report["concat"] = None
    if p1.n == p2.n:
        scale = max(1.0, float(np.abs(p1.values[-1]).max(initial=0.0)))
        if np.abs(p1.values[-1] - p2.values[0]).max(initial=0.0) <= 1e-12 * scale:
            eps_cat = 1 if sfmod.sf_concat(p1, p2, cfg) % 2 == 0 else -1
            report["concat"] = {
                "ok": eps_cat == e1 * e2,
                "lhs": eps_cat,
                "rhs": e1 * e2,
            }
    report["homotopy"] = None
    if homotopy is not None:
        a, b = p1.a, p1.b
        for t in (a, b):
            lo = np.asarray(homotopy(0.0, t), dtype=float)
            hi = np.asarray(homotopy(1.0, t), dtype=float)
            if np.abs(lo - hi).max() > 1e-12 * max(1.0, np.abs(lo).max()):
                raise ValueError("homotopy does not fix the endpoints")
        edges = [
            sfmod.HermitianPath.from_callable(lambda t, s=s: homotopy(s, t), a, b)
            for s in (0.0, 1.0)
        ]
        eps_edges = [orientation_transport_sf(e, cfg) for e in edges]
        report["homotopy"] = {
            "ok": eps_edges[0] == eps_edges[1],
            "lhs": eps_edges[0],
            "rhs": eps_edges[1],
        }
    return report
