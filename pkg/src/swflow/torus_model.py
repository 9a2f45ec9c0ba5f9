"""Model operators on a Fourier-truncated flat 3-torus.

Fields are expanded in plane waves exp(i<k, x>) over integer modes k with
||k||_inf <= cutoff.  Spinors carry two complex components per mode; forms
carry one coefficient per component per mode.  Basis labels order modes
lexicographically with the field component varying fastest, so block
operators are Kronecker products (mode action) x (component action).

Provided operators:

* the flat spin-c Dirac operator twisted by a constant imaginary 1-form
  holonomy, block diagonal with 2x2 mode blocks,
* the truncated de Rham package (exterior derivative, codifferential,
  Hodge star) acting on complex form coefficients,
* one-parameter families: interpolation of holonomies, and an explicit
  diagonal eigenvalue model for a magnetic flux line,
* a residual check for the curvature identity satisfied by the square of
  the perturbed Dirac operator, compared on interior modes where the
  truncation does not clip products.
"""

from dataclasses import dataclass, field

import numpy as np

from . import clifford3 as cl
from . import specflow as sfmod

__all__ = [
    "MarginError",
    "TorusTruncation",
    "FlatConnection",
    "TruncatedOperator",
    "mode_shift_matrix",
    "fourier_dirac",
    "exterior_d",
    "codifferential",
    "hodge",
    "dirac_family_path",
    "magnetic_family_path",
    "weitzenbock_check",
]


class MarginError(ValueError):
    """A field product would leave the truncation, so the value is unreliable."""


class TorusTruncation:
    """Integer Fourier modes of the unit 3-torus with ||k||_inf <= cutoff."""

    def __init__(self, cutoff):
        cutoff = int(cutoff)
        if cutoff < 1:
            raise ValueError("cutoff must be at least 1")
        self.cutoff = cutoff
        rng = range(-cutoff, cutoff + 1)
        self.modes = np.array([(a, b, c) for a in rng for b in rng for c in rng])
        self._index = {tuple(k): i for i, k in enumerate(self.modes)}

    @property
    def mode_count(self):
        return self.modes.shape[0]

    def index(self, k):
        """Position of mode k in the lexicographic ordering, or None."""
        return self._index.get(tuple(int(v) for v in k))


@dataclass(frozen=True)
class FlatConnection:
    """Constant imaginary 1-form holonomy; coefficients are the real 3-vector."""

    alpha: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=float))
        if self.alpha.shape != (3,):
            raise ValueError("holonomy must be a real 3-vector")


@dataclass
class TruncatedOperator:
    """A linear operator between truncated coefficient spaces."""

    matrix: np.ndarray
    trunc: TorusTruncation
    kind: str = field(default="")


def mode_shift_matrix(trunc, q):
    """Matrix of multiplication by exp(i<q, x>) on scalar coefficients.

    Entries land only where both the source and the shifted mode stay
    inside the truncation; everything else is clipped.
    """
    m = trunc.mode_count
    out = np.zeros((m, m))
    q = np.asarray(q, dtype=int)
    for i, k in enumerate(trunc.modes):
        j = trunc.index(k - q)
        if j is not None:
            out[i, j] = 1.0
    return out


def fourier_dirac(trunc, conn):
    """Flat Dirac operator with holonomy: mode block sigma . (k + alpha/2)."""
    m = trunc.mode_count
    vals = trunc.modes + conn.alpha / 2.0
    blocks = np.einsum("mj,jab->mab", vals, cl.PAULI)
    mat = np.zeros((2 * m, 2 * m), dtype=complex)
    for i in range(m):
        mat[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = blocks[i]
    return TruncatedOperator(mat, trunc, kind="dirac")


# ----------------------------------------------------------- de Rham ops


def _per_mode_blocks(trunc, block_of_mode, rows, cols):
    m = trunc.mode_count
    out = np.zeros((rows * m, cols * m), dtype=complex)
    for i, k in enumerate(trunc.modes):
        out[rows * i : rows * (i + 1), cols * i : cols * (i + 1)] = block_of_mode(k)
    return out


def _wedge_block(k, source_degree):
    """Per-mode matrix of (ik) wedge on coefficients of the given degree."""
    ik = 1j * np.asarray(k, dtype=float)
    cols = cl.FORM_DIMS[source_degree]
    rows = cl.FORM_DIMS[source_degree + 1]
    out = np.zeros((rows, cols), dtype=complex)
    for j in range(cols):
        unit = np.zeros(cols)
        unit[j] = 1.0
        wedge = cl.wedge(cl.Form(1, ik), cl.Form(source_degree, unit))
        out[:, j] = wedge.coeffs
    return out


def exterior_d(trunc, degree):
    """Truncated exterior derivative on forms of degree 0 or 1."""
    if degree not in (0, 1):
        raise ValueError("exterior derivative provided for degrees 0 and 1")
    rows = cl.FORM_DIMS[degree + 1]
    cols = cl.FORM_DIMS[degree]
    mat = _per_mode_blocks(trunc, lambda k: _wedge_block(k, degree), rows, cols)
    return TruncatedOperator(mat, trunc, kind=f"d{degree}")


def _exterior_d2(trunc):
    """Degree 2 -> 3 exterior derivative, used by the star route below."""
    return _per_mode_blocks(trunc, lambda k: _wedge_block(k, 2), 1, 3)


def _star_block(degree):
    cols = cl.FORM_DIMS[degree]
    rows = cl.FORM_DIMS[3 - degree]
    out = np.zeros((rows, cols))
    for j in range(cols):
        unit = np.zeros(cols)
        unit[j] = 1.0
        out[:, j] = cl.hodge_star(cl.Form(degree, unit)).coeffs.real
    return out


def hodge(trunc, degree):
    """Truncated Hodge star on forms of the given degree."""
    if degree not in (0, 1, 2, 3):
        raise ValueError("degree must be 0..3")
    block = _star_block(degree)
    mat = np.kron(np.eye(trunc.mode_count), block).astype(complex)
    return TruncatedOperator(mat, trunc, kind=f"star{degree}")


def codifferential(trunc, degree):
    """Adjoint of the exterior derivative, assembled via the star route.

    On 1-forms this is -*d*; on 2-forms the sign flips to +*d*.
    """
    if degree == 1:
        mat = -hodge(trunc, 3).matrix @ _exterior_d2(trunc) @ hodge(trunc, 1).matrix
    elif degree == 2:
        s = hodge(trunc, 2).matrix
        mat = s @ exterior_d(trunc, 1).matrix @ s
    else:
        raise ValueError("codifferential provided for degrees 1 and 2")
    return TruncatedOperator(mat, trunc, kind=f"cod{degree}")


# ------------------------------------------------------------- families


def dirac_family_path(trunc, alpha_start, alpha_end, samples=9):
    """Linear holonomy interpolation as a realified self-adjoint path.

    The derivative in the parameter is the constant Clifford block of
    half the holonomy increment, identical in every mode.
    """
    alpha_start = np.asarray(alpha_start, dtype=float)
    alpha_end = np.asarray(alpha_end, dtype=float)
    beta = alpha_end - alpha_start
    deriv = np.kron(np.eye(trunc.mode_count), 0.5 * cl.clifford_im_matrix(beta))

    def func(t):
        conn = FlatConnection(alpha_start + t * beta)
        return fourier_dirac(trunc, conn).matrix

    return sfmod.HermitianPath.from_callable(
        func, 0.0, 1.0, num_samples=samples, derivative=lambda t: deriv
    )


def magnetic_family_path(flux, depth, samples=17, gapped_levels=2):
    """Diagonal eigenvalue model for one period of a magnetic flux line.

    For flux d != 0 there are |d| identical towers.  Each contributes one
    family of levels -sign(d)(n + r) for integer n in [-depth, depth]
    sweeping down (up) through zero once per period, plus gapped levels
    +-sqrt(2|d|m + (n + r)^2) that never vanish.  Zero flux has no zero
    towers and the family is a constant invertible diagonal.
    """
    flux = int(flux)
    depth = int(depth)
    if depth < 2:
        raise ValueError("depth must be at least 2")
    ns = np.arange(-depth, depth + 1, dtype=float)
    sgn = float(np.sign(flux))
    absd = abs(flux)

    if flux == 0:
        base = np.concatenate(
            [s * np.sqrt(2.0 * m + ns**2) for m in range(1, gapped_levels + 1) for s in (1.0, -1.0)]
        )

        def values(r):
            return np.diag(base)

        def deriv(r):
            return np.zeros((base.size, base.size))

    else:

        def entries(r):
            zero = -sgn * (ns + r)
            gapped = [
                s * np.sqrt(2.0 * absd * m + (ns + r) ** 2)
                for m in range(1, gapped_levels + 1)
                for s in (1.0, -1.0)
            ]
            tower = np.concatenate([zero] + gapped)
            return np.tile(tower, absd)

        def entries_deriv(r):
            zero = np.full(ns.shape, -sgn)
            gapped = [
                s * (ns + r) / np.sqrt(2.0 * absd * m + (ns + r) ** 2)
                for m in range(1, gapped_levels + 1)
                for s in (1.0, -1.0)
            ]
            tower = np.concatenate([zero] + gapped)
            return np.tile(tower, absd)

        def values(r):
            return np.diag(entries(r))

        def deriv(r):
            return np.diag(entries_deriv(r))

    return sfmod.HermitianPath.from_callable(
        values, 0.0, 1.0, num_samples=samples, derivative=deriv
    )


# -------------------------------------------------- curvature identity


def _single_mode_multiplier(trunc, mode, coeff):
    """Multiplication operators for the real functions Re(c_j exp(i<k,x>))."""
    up = mode_shift_matrix(trunc, mode)
    down = mode_shift_matrix(trunc, [-m for m in mode])
    return [0.5 * coeff[j] * up + 0.5 * np.conj(coeff[j]) * down for j in range(3)]


def weitzenbock_check(trunc, conn, mode, coeff):
    """Residual of the curvature identity for the perturbed Dirac square.

    The perturbation is the imaginary 1-form with components
    i Re(coeff_j exp(i<mode, x>)).  Both sides are assembled from scratch:
    the square of the perturbed Dirac operator on one hand, the connection
    Laplacian plus half the Clifford action of the curvature on the other.
    They can only be compared where truncated products are not clipped,
    namely on modes with ||k||_inf <= cutoff - ||mode||_inf; the returned
    value is the largest entry of the difference restricted there.
    """
    mode = np.asarray(mode, dtype=int)
    coeff = np.asarray(coeff, dtype=complex)
    reach = int(np.max(np.abs(mode)))
    interior_cut = trunc.cutoff - reach
    if interior_cut < 0:
        raise MarginError(
            f"perturbation mode reach {reach} exceeds the cutoff {trunc.cutoff}"
        )

    m = trunc.mode_count
    mult = _single_mode_multiplier(trunc, mode, coeff)

    # perturbed Dirac operator and its square
    dirac = fourier_dirac(trunc, conn).matrix.copy()
    for j in range(3):
        dirac += 0.5 * np.kron(mult[j], cl.PAULI[j])
    lhs = dirac @ dirac

    # connection Laplacian: sum over directions of L* L with
    # L_j = d/dx_j + (i alpha_j + i g_j)/2 acting on scalar coefficients
    rhs = np.zeros_like(lhs)
    for j in range(3):
        partial = np.diag(1j * (trunc.modes[:, j] + conn.alpha[j] / 2.0))
        lj = partial + 0.5j * mult[j]
        rhs += np.kron(lj.conj().T @ lj, np.eye(2))

    # half the Clifford action of the curvature of the perturbation
    for j in range(3):
        for l in range(j + 1, 3):
            w = mode[j] * coeff[l] - mode[l] * coeff[j]
            up = mode_shift_matrix(trunc, mode)
            down = mode_shift_matrix(trunc, -mode)
            f_op = (-0.5 * w) * up + (0.5 * np.conj(w)) * down
            rhs += 0.5 * np.kron(f_op, cl.CLIFF[j] @ cl.CLIFF[l])

    inside = np.max(np.abs(trunc.modes), axis=1) <= interior_cut
    keep = np.repeat(inside, 2)
    diff = (lhs - rhs)[np.ix_(keep, keep)]
    return float(np.max(np.abs(diff))) if diff.size else 0.0
