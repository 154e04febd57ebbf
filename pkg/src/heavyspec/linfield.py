"""Linear random fields ``X_it = sum_{k,l} h_kl Z_{i-k, t-l}`` with finite support.

The coefficient array is stored densely over its bounding box
``[k_min, k_max] x [l_min, l_max]``.

Noise-panel convention
----------------------
:func:`simulate_field` draws one panel ``Z`` whose entry ``[r, c]`` is the
noise variable ``Z_{r + row0, c + col0}`` with

    row0 = 1 - max(k_max, 0),    col0 = 1 - max(l_max, 0),

and shape ``(p + max(k_max, 0) - min(k_min, 0), n + s_max + max(l_max, 0) - min(l_min, 0))``.
The panel is filled in C order from a single call to
:func:`heavyspec.rand_heavy.sample`, so a given seed always yields the same
field regardless of how many lags are requested for the same support.
The box always contains the core ``Z_it, i=1..p, t=1..n`` used by
:mod:`heavyspec.approx`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import rand_heavy
from .spectra import sym_eigen

__all__ = [
    "CoeffMatrix",
    "MMatrix",
    "FieldSpec",
    "Panel",
    "FieldSample",
    "MemoryBudgetError",
    "identity_coeffs",
    "ma_example_coeffs",
    "separable_coeffs",
    "m_matrix",
    "sum_squares_m",
    "simulate_field",
    "read_coeffs_csv",
    "write_coeffs_csv",
    "write_panel_csv",
    "read_panel_csv",
]

# largest number of noise entries a single simulate_field call may draw
MAX_ENTRIES = 200_000_000


class MemoryBudgetError(RuntimeError):
    pass


class CoeffMatrix:
    """Finite-support coefficients ``h_kl`` of the linear field.

    Parameters
    ----------
    entries : mapping ``(k, l) -> h``
        Zero entries are dropped; at least one nonzero entry is required.
    """

    def __init__(self, entries):
        items = {(int(k), int(l)): float(h) for (k, l), h in dict(entries).items() if h != 0}
        if not items:
            raise ValueError("coefficient support is empty")
        ks = [k for k, _ in items]
        ls = [l for _, l in items]
        self.k_min, self.k_max = min(ks), max(ks)
        self.l_min, self.l_max = min(ls), max(ls)
        dense = np.zeros((self.k_max - self.k_min + 1, self.l_max - self.l_min + 1))
        for (k, l), h in items.items():
            dense[k - self.k_min, l - self.l_min] = h
        dense.setflags(write=False)
        self.dense = dense
        self._items = items

    @classmethod
    def from_array(cls, array, k0=0, l0=0):
        """Coefficients from a 2-d array whose ``[0, 0]`` entry is ``h_{k0, l0}``."""
        a = np.atleast_2d(np.asarray(array, dtype=float))
        return cls({(k0 + i, l0 + j): a[i, j] for i in range(a.shape[0]) for j in range(a.shape[1])})

    @property
    def support(self):
        return sorted(self._items)

    def items(self):
        return sorted(self._items.items())

    def __getitem__(self, kl):
        return self._items.get(tuple(kl), 0.0)

    def shifted(self, s):
        """``H(s)`` over the bounding box: entry ``[k, l]`` is ``h_{k, l+s}``."""
        out = np.zeros_like(self.dense)
        L = self.dense.shape[1]
        if s < L:
            out[:, : L - s] = self.dense[:, s:]
        return out

    def __repr__(self):
        return f"CoeffMatrix({dict(self.items())})"

    def __eq__(self, other):
        return isinstance(other, CoeffMatrix) and self._items == other._items

    def __hash__(self):
        return hash(tuple(self.items()))


def identity_coeffs():
    """``h_00 = 1``: the field is the noise itself."""
    return CoeffMatrix({(0, 0): 1.0})


def ma_example_coeffs():
    """``X_it = Z_it + Z_{i,t-1} - 2 (Z_{i-1,t} - Z_{i-1,t-1})``; ``M(0)`` has eigenvalues 8 and 2."""
    return CoeffMatrix({(0, 0): 1.0, (0, 1): 1.0, (1, 0): -2.0, (1, 1): 2.0})


def separable_coeffs(theta, c):
    """``h_kl = theta_k * c_l`` for ``k, l >= 0``."""
    theta = np.asarray(theta, dtype=float)
    c = np.asarray(c, dtype=float)
    if theta.ndim != 1 or c.ndim != 1:
        raise ValueError("theta and c must be 1-d sequences")
    if not np.any(theta) or not np.any(c):
        raise ValueError("theta and c need a nonzero entry each")
    return CoeffMatrix.from_array(np.outer(theta, c))


@dataclass(frozen=True)
class MMatrix:
    """``M(s) = H(0) H(s)'`` over rows ``k_min..k_max`` with its singular values."""

    lag: int
    matrix: np.ndarray
    singular_values: np.ndarray
    rank: int
    row_offset: int

    def frobenius_sq(self):
        return float(np.sum(self.matrix**2))


def _rank(values, scale):
    if scale == 0:
        return 0
    return int(np.sum(values > 1e-12 * scale))


def m_matrix(coeffs, s):
    """Build ``M(s)`` with ``(M(s))_ij = sum_l h_il h_{j,l+s}``.

    The singular values are square roots of the eigenvalues of ``M M'``
    obtained with the Jacobi solver.
    """
    s = int(s)
    if s < 0:
        raise ValueError("lag must be nonnegative")
    H = coeffs.dense
    L = H.shape[1]
    if s < L:
        M = H[:, : L - s] @ H[:, s:].T
    else:
        M = np.zeros((H.shape[0], H.shape[0]))
    eig, _ = sym_eigen(M @ M.T)
    v = np.sqrt(np.clip(eig, 0.0, None))
    M.setflags(write=False)
    v.setflags(write=False)
    return MMatrix(s, M, v, _rank(v, v[0] if v.size else 0.0), coeffs.k_min)


def sum_squares_m(coeffs, s0, s1):
    """Descending eigenvalues of ``sum_{s=s0}^{s1} M(s) M(s)'``."""
    if not 0 <= s0 <= s1:
        raise ValueError("need 0 <= s0 <= s1")
    total = 0.0
    for s in range(s0, s1 + 1):
        M = m_matrix(coeffs, s).matrix
        total = total + M @ M.T
    eig, _ = sym_eigen(total)
    return np.clip(eig, 0.0, None)


@dataclass(frozen=True)
class FieldSpec:
    coeffs: CoeffMatrix
    noise: rand_heavy.TailModel
    p: int
    n: int
    s_max: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.p < 1 or self.n < 1:
            raise ValueError("p and n must be >= 1")
        if self.s_max < 0:
            raise ValueError("s_max must be >= 0")


@dataclass(frozen=True)
class Panel:
    """A ``p x n`` data matrix with a role tag (``noise``, ``field`` or ``returns``)."""

    data: np.ndarray
    role: str = "field"
    lag: int = 0
    labels: tuple = field(default=None)

    @property
    def shape(self):
        return self.data.shape


@dataclass(frozen=True)
class FieldSample:
    """One realization: shifted panels ``X_n(0..s_max)`` and the noise core."""

    spec: FieldSpec
    panels: list
    core: np.ndarray
    noise: np.ndarray
    row0: int
    col0: int

    def __getitem__(self, s):
        return self.panels[s]


def _noise_box(coeffs, p, n, s_max):
    top = max(coeffs.k_max, 0)
    bottom = -min(coeffs.k_min, 0)
    left = max(coeffs.l_max, 0)
    right = -min(coeffs.l_min, 0)
    return (p + top + bottom, n + s_max + left + right), 1 - top, 1 - left


def simulate_field(spec, rng=None, max_entries=MAX_ENTRIES):
    """Simulate ``X_n(s)``, ``s = 0..s_max``, from one shared noise panel.

    ``X_n(s)[i-1, t-1] = sum_{(k,l)} h_kl Z_{i-k, t+s-l}`` for ``i = 1..p``,
    ``t = 1..n``. All lags are views into one ``p x (n + s_max)`` array, so
    ``X_n(s)[:, t] == X_n(0)[:, t + s]``.

    ``rng`` overrides ``spec.seed`` when given (a Generator or an int key).
    """
    coeffs, p, n, s_max = spec.coeffs, spec.p, spec.n, spec.s_max
    shape, row0, col0 = _noise_box(coeffs, p, n, s_max)
    if shape[0] * shape[1] > max_entries or p * (n + s_max) > max_entries:
        raise MemoryBudgetError(f"noise panel {shape} exceeds the budget of {max_entries} entries")
    Z = rand_heavy.sample(spec.noise, shape[0] * shape[1], spec.seed if rng is None else rng, shape=shape)
    width = n + s_max
    full = np.zeros((p, width))
    for (k, l), h in coeffs.items():
        # row index i - k for i = 1..p  ->  panel row (1 - k - row0) + (i - 1)
        r = 1 - k - row0
        c = 1 - l - col0
        full += h * Z[r : r + p, c : c + width]
    full.setflags(write=False)
    panels = [Panel(full[:, s : s + n], "field", s) for s in range(s_max + 1)]
    core = Z[1 - row0 : 1 - row0 + p, 1 - col0 : 1 - col0 + n]
    return FieldSample(spec, panels, core, Z, row0, col0)


def simulate_random_coeffs(spec, coeff_hook, rng):
    """Conditional-on-h mode: draw the coefficients with ``coeff_hook(rng)`` then simulate."""
    coeffs = coeff_hook(rng)
    spec = FieldSpec(coeffs, spec.noise, spec.p, spec.n, spec.s_max, spec.seed)
    return simulate_field(spec, rng)


def read_coeffs_csv(path):
    """Read ``k,l,h`` triples (header row optional)."""
    entries = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() == "k":
                continue
            k, l, h = row
            entries[(int(k), int(l))] = float(h)
    return CoeffMatrix(entries)


def write_coeffs_csv(coeffs, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "l", "h"])
        for (k, l), h in coeffs.items():
            w.writerow([k, l, repr(h)])


def write_panel_csv(data, path, s=0):
    """Write a panel: header line ``p,n,s`` then one row per series."""
    data = np.asarray(data)
    with open(path, "w", newline="") as fh:
        fh.write(f"{data.shape[0]},{data.shape[1]},{s}\n")
        for row in data:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_panel_csv(path):
    with open(path) as fh:
        p, n, s = (int(x) for x in fh.readline().split(","))
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape != (p, n):
        raise ValueError(f"panel header says {p}x{n}, body is {data.shape}")
    return data, s
