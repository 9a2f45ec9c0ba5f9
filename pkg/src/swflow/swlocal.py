"""Local structures of the monopole equations on the truncated torus.

Field representations share the truncation's mode labels:

* spinor fields are complex Fourier coefficient arrays of shape (M, 2),
* imaginary functions i*u and imaginary 1-forms i*g are stored through
  the real coefficients of u and g in the orthonormal trigonometric
  basis (1 at the zero mode, sqrt(2) cos<k,x> at lexicographically
  positive modes, sqrt(2) sin<k,x> at their negatives),
* tangent vectors realify to [Re spinor | Im spinor | 1-form | function]
  blocks so the operators below become real symmetric matrices.

Quadratic expressions are evaluated by exact mode convolution over the
sparse supports.  Value-producing operations raise MarginError when the
true product would leave the truncation; operator assembly instead clips
to the truncation, which is the orthogonal compression and keeps all the
adjointness identities exact.
"""

from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np

from . import clifford3 as cl
from . import orient as omod
from . import specflow as sfmod
from .torus_model import (
    FlatConnection,
    MarginError,
    TorusTruncation,
    TruncatedOperator,
    _star_block,
    _wedge_block,
    fourier_dirac,
)

__all__ = [
    "Configuration",
    "TangentVector",
    "Perturbation",
    "real_to_complex",
    "complex_to_real",
    "realify_spinor",
    "unrealify_spinor",
    "tangent_to_vector",
    "vector_to_tangent",
    "tangent_inner",
    "field_radius",
    "random_configuration",
    "sw_map",
    "sw_map_perturbed",
    "chern_simons_dirac",
    "sw_hessian",
    "extended_hessian",
    "gauge_deriv",
    "gauge_deriv_adjoint",
    "dastq_residual",
    "configuration_sign",
    "signed_count",
    "crossing_coefficient",
    "mode_zero_crossing_family",
    "crossing_matrix_b0",
    "crossing_matrix_b1",
]


# --------------------------------------------------------------- tables

_CACHE = {}


def _tables(trunc):
    tab = _CACHE.get(trunc.cutoff)
    if tab is not None:
        return tab
    m = trunc.mode_count
    modes = trunc.modes
    neg = np.array([trunc.index(-k) for k in modes])
    shift = np.full((m, m), -1, dtype=np.int64)
    for p in range(m):
        for q in range(m):
            idx = trunc.index(modes[p] + modes[q])
            if idx is not None:
                shift[p, q] = idx
    u = np.zeros((m, m), dtype=complex)
    s = 1.0 / np.sqrt(2.0)
    for i, k in enumerate(modes):
        t = tuple(int(v) for v in k)
        if t == (0, 0, 0):
            u[i, i] = 1.0
        elif t > (0, 0, 0):
            u[i, i] = s
            u[i, neg[i]] = -1j * s
        else:
            u[i, neg[i]] = s
            u[i, i] = 1j * s
    star2 = _star_block(2)
    star_d = np.array([star2 @ _wedge_block(k, 1) for k in modes])
    tab = SimpleNamespace(
        u=u, neg=neg, shift=shift, star_d=star_d, star2=star2, first_order=None
    )
    _CACHE[trunc.cutoff] = tab
    return tab


def _r2c_matrix(trunc):
    """Unitary sending trig coefficients to complex Fourier coefficients."""
    return _tables(trunc).u


def real_to_complex(trunc, trig):
    return np.tensordot(_tables(trunc).u, np.asarray(trig, dtype=float), axes=(1, 0))


def complex_to_real(trunc, hat):
    return np.tensordot(_tables(trunc).u.conj().T, np.asarray(hat, dtype=complex), axes=(1, 0)).real


def realify_spinor(psi):
    flat = np.asarray(psi, dtype=complex).reshape(-1)
    return np.concatenate([flat.real, flat.imag])


def unrealify_spinor(vec):
    vec = np.asarray(vec, dtype=float)
    n = vec.size // 2
    return (vec[:n] + 1j * vec[n:]).reshape(-1, 2)


def field_radius(trunc, coeffs):
    """Largest sup-norm of a mode carrying a nonzero coefficient."""
    coeffs = np.asarray(coeffs)
    flat = coeffs.reshape(coeffs.shape[0], -1)
    mask = np.any(flat != 0, axis=1)
    if not np.any(mask):
        return 0
    return int(np.max(np.abs(trunc.modes[mask])))


def _sparse_rows(arr):
    flat = np.asarray(arr).reshape(arr.shape[0], -1)
    return np.nonzero(np.any(flat != 0, axis=1))[0]


# ---------------------------------------------------------------- types


@dataclass
class Configuration:
    """A spinor field together with a connection offset from the flat base.

    The connection is A_base + i alpha_j dx^j + i a_field; the spinor is
    stored as complex Fourier coefficients, the 1-form part as real trig
    coefficients.
    """

    trunc: TorusTruncation
    psi: np.ndarray
    alpha: np.ndarray
    a_field: np.ndarray = None

    def __post_init__(self):
        m = self.trunc.mode_count
        self.psi = np.asarray(self.psi, dtype=complex)
        if self.psi.shape != (m, 2):
            raise ValueError("spinor coefficients must have shape (modes, 2)")
        self.alpha = np.asarray(self.alpha, dtype=float)
        if self.alpha.shape != (3,):
            raise ValueError("holonomy offset must be a real 3-vector")
        if self.a_field is None:
            self.a_field = np.zeros((m, 3))
        else:
            self.a_field = np.asarray(self.a_field, dtype=float)
            if self.a_field.shape != (m, 3):
                raise ValueError("1-form offset must have shape (modes, 3)")

    @property
    def reducible(self):
        return not np.any(self.psi)


@dataclass
class TangentVector:
    """(spinor, imaginary 1-form, optional imaginary function) triple."""

    phi: np.ndarray
    a: np.ndarray
    f: np.ndarray = None

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=complex)
        self.a = np.asarray(self.a, dtype=float)
        if self.f is not None:
            self.f = np.asarray(self.f, dtype=float)


@dataclass
class Perturbation:
    """A closed imaginary 2-form: d(potential) plus a constant harmonic part."""

    trunc: TorusTruncation
    potential: np.ndarray = None
    harmonic: np.ndarray = None

    def __post_init__(self):
        m = self.trunc.mode_count
        if self.potential is None:
            self.potential = np.zeros((m, 3))
        else:
            self.potential = np.asarray(self.potential, dtype=float)
            if self.potential.shape != (m, 3):
                raise ValueError("potential must be a truncated 1-form")
        if self.harmonic is None:
            self.harmonic = np.zeros(3)
        else:
            self.harmonic = np.asarray(self.harmonic, dtype=float)
            if self.harmonic.shape != (3,):
                raise ValueError("harmonic part must be a constant 2-form 3-vector")


def tangent_to_vector(tv):
    parts = [realify_spinor(tv.phi), tv.a.reshape(-1)]
    if tv.f is not None:
        parts.append(tv.f)
    return np.concatenate(parts)


def vector_to_tangent(trunc, vec, has_f):
    m = trunc.mode_count
    phi = unrealify_spinor(vec[: 4 * m])
    a = vec[4 * m : 7 * m].reshape(m, 3)
    f = vec[7 * m :].copy() if has_f else None
    return TangentVector(phi, a, f)


def tangent_inner(t1, t2):
    """Realified L2 pairing of tangent vectors."""
    out = float(np.real(np.sum(t1.phi * np.conj(t2.phi))))
    out += float(t1.a.reshape(-1) @ t2.a.reshape(-1))
    if t1.f is not None and t2.f is not None:
        out += float(t1.f @ t2.f)
    return out


def random_configuration(trunc, rng, radius=None):
    """Random configuration supported on modes of at most half the cutoff.

    The restricted support guarantees all quadratic margins below.
    """
    if radius is None:
        radius = trunc.cutoff // 2
    m = trunc.mode_count
    mask = np.max(np.abs(trunc.modes), axis=1) <= radius
    count = int(mask.sum())
    psi = np.zeros((m, 2), dtype=complex)
    psi[mask] = rng.standard_normal((count, 2)) + 1j * rng.standard_normal((count, 2))
    psi *= rng.uniform(0.5, 1.5) / max(np.linalg.norm(psi), 1e-12)
    a_field = np.zeros((m, 3))
    a_field[mask] = rng.standard_normal((count, 3))
    a_field *= rng.uniform(0.3, 1.0) / max(np.linalg.norm(a_field), 1e-12)
    return Configuration(trunc, psi, rng.uniform(-1.0, 1.0, size=3), a_field)


# ----------------------------------------------------- product kernels


def _mul_form_spinor(trunc, b_hat, psi):
    """Coefficients of (sum_j b_j sigma_j) psi; targets outside are clipped."""
    tab = _tables(trunc)
    out = np.zeros_like(psi)
    sig_psi = np.einsum("jab,mb->jma", cl.PAULI, psi)
    rows = _sparse_rows(psi)
    if rows.size == 0:
        return out
    for q in _sparse_rows(b_hat):
        tgts = tab.shift[rows, q]
        ok = tgts >= 0
        for j in range(3):
            if b_hat[q, j] != 0:
                np.add.at(out, tgts[ok], b_hat[q, j] * sig_psi[j, rows[ok]])
    return out


def _mul_scalar_spinor(trunc, u_hat, psi, factor=1.0):
    tab = _tables(trunc)
    out = np.zeros_like(psi)
    rows = _sparse_rows(psi)
    if rows.size == 0:
        return out
    for q in np.nonzero(u_hat != 0)[0]:
        tgts = tab.shift[rows, q]
        ok = tgts >= 0
        np.add.at(out, tgts[ok], (factor * u_hat[q]) * psi[rows[ok]])
    return out


def _pair_to_form(trunc, psi, phi):
    """Complex coefficients of the real covector field pairing two spinors.

    Pointwise this is the symmetric polarization of the quadratic
    covector: component j equals (1/2) Re <sigma_j psi(x), phi(x)>.
    """
    tab = _tables(trunc)
    m = trunc.mode_count
    sig_psi = np.einsum("jab,mb->jma", cl.PAULI, psi)
    h = np.zeros((m, 3), dtype=complex)
    rows1 = _sparse_rows(psi)
    for k2 in _sparse_rows(phi):
        tgts = tab.shift[rows1, tab.neg[k2]]
        ok = tgts >= 0
        vals = np.einsum("jma,a->mj", sig_psi[:, rows1], np.conj(phi[k2]))
        np.add.at(h, tgts[ok], vals[ok])
    return 0.25 * (h + np.conj(h[tab.neg]))


def _pair_to_scalar(trunc, phi, psi):
    """Complex coefficients of the real function -Im <phi(x), psi(x)>."""
    tab = _tables(trunc)
    w = np.zeros(trunc.mode_count, dtype=complex)
    rows1 = _sparse_rows(phi)
    for k2 in _sparse_rows(psi):
        tgts = tab.shift[rows1, tab.neg[k2]]
        ok = tgts >= 0
        vals = phi[rows1] @ np.conj(psi[k2])
        np.add.at(w, tgts[ok], vals[ok])
    return 0.5j * (w - np.conj(w[tab.neg]))


def _apply_dirac(c, psi):
    tr = c.trunc
    vals = tr.modes + c.alpha / 2.0
    out = np.einsum("mj,jab,mb->ma", vals, cl.PAULI, psi)
    if np.any(c.a_field):
        out = out + 0.5 * _mul_form_spinor(tr, real_to_complex(tr, c.a_field), psi)
    return out


def _star_d(trunc, form_trig):
    tab = _tables(trunc)
    b_hat = real_to_complex(trunc, form_trig)
    return complex_to_real(trunc, np.einsum("mij,mj->mi", tab.star_d, b_hat))


def _codiff(trunc, form_trig):
    b_hat = real_to_complex(trunc, form_trig)
    out = -1j * np.einsum("mj,mj->m", trunc.modes.astype(float), b_hat)
    return complex_to_real(trunc, out)


def _d_scalar(trunc, f_trig):
    hat = real_to_complex(trunc, f_trig)
    return complex_to_real(trunc, 1j * trunc.modes.astype(float) * hat[:, None])


# -------------------------------------------------------------- sw map


def sw_map(c):
    """The monopole map (Dirac of the spinor, half-quadratic minus *curvature)."""
    tr = c.trunc
    r_psi = field_radius(tr, c.psi)
    r_a = field_radius(tr, c.a_field)
    if 2 * r_psi > tr.cutoff:
        raise MarginError("quadratic spinor term leaves the truncation")
    if r_psi + r_a > tr.cutoff:
        raise MarginError("connection-spinor product leaves the truncation")
    phi = _apply_dirac(c, c.psi)
    q_trig = complex_to_real(tr, _pair_to_form(tr, c.psi, c.psi))
    a_out = 0.5 * q_trig - _star_d(tr, c.a_field)
    return TangentVector(phi, a_out)


def _star_eta(pert):
    tr = pert.trunc
    out = _star_d(tr, pert.potential)
    out[tr.index((0, 0, 0))] += _tables(tr).star2 @ pert.harmonic
    return out


def sw_map_perturbed(c, pert):
    """Monopole map shifted by the star of a closed 2-form."""
    out = sw_map(c)
    return TangentVector(out.phi, out.a - _star_eta(pert))


def chern_simons_dirac(c):
    """The action functional whose L2 gradient is the monopole map.

    Both integrals are Parseval sums of truncated coefficients, so no
    margin is needed; the spinor term must be real to 1e-12.
    """
    tr = c.trunc
    dpsi = _apply_dirac(c, c.psi)
    spin = complex(np.sum(c.psi * np.conj(dpsi)))
    if abs(spin.imag) > 1e-12 * max(1.0, abs(spin)):
        raise ArithmeticError("spinor pairing is not real")
    h = c.a_field.copy()
    h[tr.index((0, 0, 0))] += c.alpha
    w = _star_d(tr, h)
    return 0.5 * (spin.real - float(h.reshape(-1) @ w.reshape(-1)))


# -------------------------------------------------------- gauge action


def gauge_deriv(c, f_trig):
    """Derivative of the gauge action at the identity: (-f psi, 2 df)."""
    tr = c.trunc
    f_trig = np.asarray(f_trig, dtype=float)
    if field_radius(tr, f_trig) + field_radius(tr, c.psi) > tr.cutoff:
        raise MarginError("gauge function times spinor leaves the truncation")
    phi = _mul_scalar_spinor(tr, real_to_complex(tr, f_trig), c.psi, factor=-1j)
    return TangentVector(phi, 2.0 * _d_scalar(tr, f_trig))


def gauge_deriv_adjoint(c, tv):
    """Adjoint of the gauge derivative: 2 d* a - i Im <phi, psi>."""
    tr = c.trunc
    if field_radius(tr, tv.phi) + field_radius(tr, c.psi) > tr.cutoff:
        raise MarginError("spinor pairing leaves the truncation")
    v_hat = _pair_to_scalar(tr, tv.phi, c.psi)
    return 2.0 * _codiff(tr, tv.a) + complex_to_real(tr, v_hat)


def dastq_residual(c):
    """Sup-norm coefficient residual of the co-closure identity for q.

    The codifferential of the quadratic covector equals i Im of the
    pairing of the Dirac image with the spinor; both sides are assembled
    independently.
    """
    tr = c.trunc
    r_psi = field_radius(tr, c.psi)
    r_a = field_radius(tr, c.a_field)
    if 2 * r_psi > tr.cutoff or r_psi + r_a > tr.cutoff:
        raise MarginError("quadratic terms leave the truncation")
    g_hat = _pair_to_form(tr, c.psi, c.psi)
    lhs = -1j * np.einsum("mj,mj->m", tr.modes.astype(float), g_hat)
    dpsi = _apply_dirac(c, c.psi)
    rhs = -_pair_to_scalar(tr, dpsi, c.psi)
    return float(np.max(np.abs(lhs - rhs)))


# ------------------------------------------------------------ operators


def _dirac_matrix(c):
    tr = c.trunc
    tab = _tables(tr)
    m = tr.mode_count
    d = fourier_dirac(tr, FlatConnection(c.alpha)).matrix.copy()
    b_hat = real_to_complex(tr, c.a_field)
    all_p = np.arange(m)
    for q in _sparse_rows(b_hat):
        tgts = tab.shift[:, q]
        ok = tgts >= 0
        ps, ts = all_p[ok], tgts[ok]
        for j in range(3):
            if b_hat[q, j] == 0:
                continue
            for s in range(2):
                for s2 in range(2):
                    val = 0.5 * b_hat[q, j] * cl.PAULI[j, s, s2]
                    if val != 0:
                        d[2 * ts + s, 2 * ps + s2] += val
    return d


def _first_order(trunc):
    tab = _tables(trunc)
    if tab.first_order is None:
        m = trunc.mode_count
        u3 = np.kron(tab.u, np.eye(3))
        msd_c = np.zeros((3 * m, 3 * m), dtype=complex)
        d0_c = np.zeros((3 * m, m), dtype=complex)
        cod_c = np.zeros((m, 3 * m), dtype=complex)
        for i, k in enumerate(trunc.modes):
            msd_c[3 * i : 3 * i + 3, 3 * i : 3 * i + 3] = -tab.star_d[i]
            d0_c[3 * i : 3 * i + 3, i] = 1j * k
            cod_c[i, 3 * i : 3 * i + 3] = -1j * k
        tab.first_order = SimpleNamespace(
            minus_star_d=(u3.conj().T @ msd_c @ u3).real,
            d0=(u3.conj().T @ d0_c @ tab.u).real,
            cod1=(tab.u.conj().T @ cod_c @ u3).real,
        )
    return tab.first_order


def _coupling_blocks(trunc, psi):
    """Realified zero-order blocks linear in the background spinor.

    Returns (spinor row from 1-forms, spinor row from functions,
    form row from spinors, function row from spinors); each block is the
    orthogonal compression of the corresponding pointwise product.
    """
    tab = _tables(trunc)
    m = trunc.mode_count
    sig_psi = np.einsum("jab,mb->jma", cl.PAULI, psi)
    nz = _sparse_rows(psi)

    ca = np.zeros((2 * m, 3 * m), dtype=complex)
    cf = np.zeros((2 * m, m), dtype=complex)
    for p in nz:
        tgts = tab.shift[p]
        ok = tgts >= 0
        qs = np.nonzero(ok)[0]
        ts = tgts[ok]
        for s in range(2):
            rows = 2 * ts + s
            for j in range(3):
                ca[rows, 3 * qs + j] += 0.5 * sig_psi[j, p, s]
            cf[rows, qs] += -1j * psi[p, s]
    u3 = np.kron(tab.u, np.eye(3))
    ca_t = ca @ u3
    cf_t = cf @ tab.u
    block_a = np.vstack([ca_t.real, ca_t.imag])
    block_f = np.vstack([cf_t.real, cf_t.imag])

    h = np.zeros((3, m, 4 * m), dtype=complex)
    w = np.zeros((m, 4 * m), dtype=complex)
    cols = np.arange(m)
    for r in nz:
        tgts_q = tab.shift[r, tab.neg]
        ok_q = tgts_q >= 0
        tgts_w = tab.shift[tab.neg[r]]
        ok_w = tgts_w >= 0
        for s in range(2):
            for part, z in ((0, 1.0), (2 * m, 1j)):
                col = part + 2 * cols + s
                for j in range(3):
                    h[j, tgts_q[ok_q], col[ok_q]] += sig_psi[j, r, s] * np.conj(z)
                w[tgts_w[ok_w], col[ok_w]] += z * np.conj(psi[r, s])
    g = 0.25 * (h + np.conj(h[:, tab.neg, :]))
    v_hat = 0.5j * (w - np.conj(w[tab.neg]))
    uh = tab.u.conj().T
    block_q = np.empty((3 * m, 4 * m))
    for j in range(3):
        block_q[j::3] = (uh @ g[j]).real
    block_v = (uh @ v_hat).real
    return block_a, block_f, block_q, block_v


def _assemble_hessian(c, extended):
    tr = c.trunc
    m = tr.mode_count
    fo = _first_order(tr)
    block_a, block_f, block_q, block_v = _coupling_blocks(tr, c.psi)
    n_s, n_a = 4 * m, 3 * m
    size = n_s + n_a + (m if extended else 0)
    h = np.zeros((size, size))
    h[:n_s, :n_s] = sfmod.realify_matrix(_dirac_matrix(c))
    h[:n_s, n_s : n_s + n_a] = block_a
    h[n_s : n_s + n_a, :n_s] = block_q
    h[n_s : n_s + n_a, n_s : n_s + n_a] = fo.minus_star_d
    if extended:
        h[:n_s, n_s + n_a :] = block_f
        h[n_s : n_s + n_a, n_s + n_a :] = 2.0 * fo.d0
        h[n_s + n_a :, :n_s] = block_v
        h[n_s + n_a :, n_s : n_s + n_a] = 2.0 * fo.cod1
    return h


def sw_hessian(c):
    """Realified symmetric derivative of the monopole map at c."""
    return TruncatedOperator(_assemble_hessian(c, extended=False), c.trunc, kind="sw_hessian")


def extended_hessian(c):
    """Hessian extended by the gauge derivative and its adjoint."""
    return TruncatedOperator(_assemble_hessian(c, extended=True), c.trunc, kind="extended_hessian")


# ------------------------------------------------------- sign and count


def configuration_sign(c, base=None, cfg=None):
    """Orientation transport along the spinor-scaling path to c.

    The path t -> extended Hessian of (t psi, A) is affine in t, so the
    transport is the endpoint-count spectral flow parity.  A reducible
    base configuration selects the alternative affine path from the base;
    both routes are computed and must agree.
    """
    if cfg is None:
        cfg = sfmod.SpectralFlowConfig(endpoint_count_only=True)
    tr = c.trunc
    t_end = extended_hessian(c).matrix
    red = Configuration(tr, np.zeros_like(c.psi), c.alpha, c.a_field)
    t0 = extended_hessian(red).matrix
    eps = omod.orientation_transport_sf(sfmod.HermitianPath.affine(t0, t_end - t0), cfg)
    if base is not None:
        if not base.reducible:
            raise ValueError("base configuration must be reducible")
        tb = extended_hessian(base).matrix
        eps_base = omod.orientation_transport_sf(sfmod.HermitianPath.affine(tb, t_end - tb), cfg)
        if eps_base != eps:
            raise RuntimeError("base-point route disagrees with the default route")
    return eps


def signed_count(configs):
    """Sum of configuration signs, cross-checked by the relative form.

    The relative form anchors at the first entry and multiplies its sign
    into the parities of the affine connecting paths; the two expressions
    must produce the same integer.
    """
    configs = list(configs)
    for c in configs:
        if c.reducible:
            raise ValueError("signed counts are defined for irreducible configurations")
    total = sum(configuration_sign(c) for c in configs)
    if configs:
        cfg = sfmod.SpectralFlowConfig(endpoint_count_only=True)
        t_base = extended_hessian(configs[0]).matrix
        rel = 0
        for c in configs:
            t_c = extended_hessian(c).matrix
            sf = sfmod.spectral_flow(sfmod.HermitianPath.affine(t_base, t_c - t_base), cfg).sf
            rel += (-1) ** sf
        rel *= configuration_sign(configs[0])
        if rel != total:
            raise RuntimeError("relative count disagrees with the direct sum")
    return total


# ------------------------------------------------------ crossing algebra


def _check_unit(trunc, psi0):
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (trunc.mode_count, 2):
        raise ValueError("spinor coefficients must have shape (modes, 2)")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-8:
        raise ValueError("spinor must have unit L2 norm")
    return psi0


def crossing_coefficient(trunc, psi0, omega0, crossing_path=None):
    """Half the L2 pairing of the constant covector's Clifford action.

    With a crossing family supplied, the (realified, zero-mode) spinor
    must be an eigenbranch of the family's derivative at the crossing and
    the branch slope must carry the same sign as the coefficient.
    """
    psi0 = _check_unit(trunc, psi0)
    omega0 = np.asarray(omega0, dtype=float)
    kap = 0.5 * float(
        np.real(np.einsum("j,jab,mb,ma->", omega0, cl.PAULI, psi0, np.conj(psi0)))
    )
    if crossing_path is not None:
        i0 = trunc.index((0, 0, 0))
        support = _sparse_rows(psi0)
        if not np.all(support == i0):
            raise ValueError("crossing check requires a zero-mode spinor")
        if crossing_path.n != 4:
            raise ValueError("crossing family must act on the realified zero mode")
        if np.abs(crossing_path.evaluate(0.0)).max() > 1e-10:
            raise ValueError("crossing family must vanish at 0")
        d = crossing_path.derivative_at(0.0)
        b0 = 0.5 * (d + d.T)
        v = np.concatenate([psi0[i0].real, psi0[i0].imag])
        slope = float(v @ b0 @ v)
        resid = np.linalg.norm(b0 @ v - slope * v)
        if resid > 1e-8 * max(1.0, np.linalg.norm(b0)):
            raise ValueError("spinor does not span an eigenbranch of the family")
        if kap != 0.0 and np.sign(slope) != np.sign(kap):
            raise RuntimeError("crossing slope sign disagrees with the coefficient")
    return kap


def mode_zero_crossing_family(omega0, halfwidth=0.25):
    """The level family of the zero mode under a constant covector sweep."""
    block = 0.5 * np.einsum("j,jab->ab", np.asarray(omega0, dtype=float), cl.PAULI)
    lin = sfmod.realify_matrix(block)
    return sfmod.HermitianPath.affine(np.zeros((4, 4)), lin, a=-halfwidth, b=halfwidth)


def crossing_matrix_b0(trunc, psi0):
    """Crossing operator of the degenerate path in the adapted frame."""
    _check_unit(trunc, psi0)
    return np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, -1.0, 0.0]])


def crossing_matrix_b1(trunc, psi0, omega0):
    """Crossing operator in the frame (psi0, i psi0, unit covector, i).

    Determinant is the squared ratio of the coupling to the covector
    norm; a vanishing coupling is degenerate and rejected.
    """
    omega0 = np.asarray(omega0, dtype=float)
    wn = float(np.linalg.norm(omega0))
    if wn == 0.0:
        raise ValueError("covector must be nonzero")
    kt = crossing_coefficient(trunc, psi0, omega0) / wn
    if abs(kt) < 1e-12:
        raise ValueError("degenerate crossing: the coupling vanishes")
    return np.array(
        [
            [0.0, 0.0, kt, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [kt, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
        ]
    )
