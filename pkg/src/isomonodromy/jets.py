"""Truncated bivariate power series ("jets") in (z - z0) and (zbar - zbar0),
with the two coordinates treated as independent variables.

A :class:`BiJet` stores coefficients ``c[j, k]`` of ``(z - z0)^j (zbar -
zbar0)^k`` for ``0 <= j <= J``, ``0 <= k <= K`` and is interpreted as a
polynomial: coefficients beyond the truncation are zero, not unknown.
Under that convention sums are exact, products are exact in every stored
coefficient (the Cauchy product is triangular in both indices), and each
z-derivative of a quantity whose true z-degree exceeded J costs one order
of reliability off the top.  Differential-polynomial identities are
therefore checked either on inputs of small enough degree that nothing is
ever truncated, or on the coefficient window left exact by the derivative
depth of the identity.

:class:`MatrixBiJet` is a square matrix of jets sharing one expansion point
and truncation; it supplies the block algebra for flatness computations.
"""
from __future__ import annotations

import numpy as np
from scipy.signal import convolve2d

_SCALAR_TYPES = (int, float, complex, np.number)

__all__ = [
    "BiJet",
    "MatrixBiJet",
    "jet_arithmetic",
    "jet_derive",
    "block_matrix",
]


class BiJet:
    """Truncated power series in two independent coordinates.

    ``BiJet(c, point=(z0, zbar0))`` represents
    ``sum_{j,k} c[j,k] (z - z0)^j (zbar - zbar0)^k``.
    """

    __slots__ = ("coeffs", "point")

    def __init__(self, coeffs, point=(0.0, 0.0)):
        c = np.array(coeffs, dtype=complex)
        if c.ndim != 2:
            raise ValueError("coefficients must form a 2-d array")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        self.coeffs = c
        self.point = (complex(point[0]), complex(point[1]))

    # -- constructors -------------------------------------------------
    @classmethod
    def zeros(cls, orders, point=(0.0, 0.0)) -> "BiJet":
        J, K = orders
        return cls(np.zeros((J + 1, K + 1)), point)

    @classmethod
    def constant(cls, value, orders, point=(0.0, 0.0)) -> "BiJet":
        J, K = orders
        c = np.zeros((J + 1, K + 1), dtype=complex)
        c[0, 0] = value
        return cls(c, point)

    @classmethod
    def coordinate_z(cls, orders, point=(0.0, 0.0)) -> "BiJet":
        """The jet of the coordinate function z itself."""
        J, K = orders
        if J < 1:
            raise ValueError("need J >= 1 for the coordinate jet")
        c = np.zeros((J + 1, K + 1), dtype=complex)
        c[0, 0] = point[0]
        c[1, 0] = 1.0
        return cls(c, point)

    @classmethod
    def coordinate_zbar(cls, orders, point=(0.0, 0.0)) -> "BiJet":
        J, K = orders
        if K < 1:
            raise ValueError("need K >= 1 for the coordinate jet")
        c = np.zeros((J + 1, K + 1), dtype=complex)
        c[0, 0] = point[1]
        c[0, 1] = 1.0
        return cls(c, point)

    @classmethod
    def from_z_polynomial(cls, poly_coeffs, orders, point=(0.0, 0.0)) -> "BiJet":
        """Jet of a z-polynomial given by ascending global coefficients."""
        J, K = orders
        z0 = complex(point[0])
        c = np.zeros((J + 1, K + 1), dtype=complex)
        work = np.asarray(poly_coeffs, dtype=complex)
        fact = 1.0
        for j in range(J + 1):
            if j > 0:
                work = work[1:] * np.arange(1, work.size) if work.size > 1 else np.zeros(0)
                fact *= j
            c[j, 0] = (np.polynomial.polynomial.polyval(z0, work) / fact
                       if work.size else 0.0)
        return cls(c, point)

    # -- basic properties ---------------------------------------------
    @property
    def orders(self) -> tuple[int, int]:
        return self.coeffs.shape[0] - 1, self.coeffs.shape[1] - 1

    @property
    def value(self) -> complex:
        """The value at the expansion point."""
        return complex(self.coeffs[0, 0])

    def max_abs(self, window: tuple[int, int] | None = None) -> float:
        """Max |coefficient|, optionally restricted to j <= w0, k <= w1."""
        c = self.coeffs
        if window is not None:
            c = c[: window[0] + 1, : window[1] + 1]
        return float(np.abs(c).max())

    def _compat(self, other: "BiJet") -> None:
        if self.coeffs.shape != other.coeffs.shape:
            raise ValueError("jets have mismatched truncation orders")
        if self.point != other.point:
            raise ValueError("jets have different expansion points")

    # -- ring operations ----------------------------------------------
    def __add__(self, other):
        if isinstance(other, _SCALAR_TYPES):
            c = self.coeffs.copy()
            c[0, 0] += other
            return BiJet(c, self.point)
        if not isinstance(other, BiJet):
            return NotImplemented
        self._compat(other)
        return BiJet(self.coeffs + other.coeffs, self.point)

    __radd__ = __add__

    def __neg__(self):
        return BiJet(-self.coeffs, self.point)

    def __sub__(self, other):
        return self + (-other if isinstance(other, BiJet) else -complex(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, _SCALAR_TYPES):
            return BiJet(self.coeffs * complex(other), self.point)
        if not isinstance(other, BiJet):
            return NotImplemented
        self._compat(other)
        J, K = self.orders
        # canonical argument order makes commutativity bitwise exact
        a, b = self.coeffs, other.coeffs
        if a.tobytes() > b.tobytes():
            a, b = b, a
        full = convolve2d(a, b)
        return BiJet(full[: J + 1, : K + 1], self.point)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return self * (1.0 / complex(other))
        return self * other.reciprocal()

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = BiJet.constant(1.0, self.orders, self.point)
        for _ in range(n):
            out = out * self
        return out

    # -- calculus -------------------------------------------------------
    def d_z(self) -> "BiJet":
        J, _ = self.orders
        c = np.zeros_like(self.coeffs)
        if J >= 1:
            c[:J, :] = self.coeffs[1:, :] * np.arange(1, J + 1)[:, None]
        return BiJet(c, self.point)

    def d_zbar(self) -> "BiJet":
        _, K = self.orders
        c = np.zeros_like(self.coeffs)
        if K >= 1:
            c[:, :K] = self.coeffs[:, 1:] * np.arange(1, K + 1)[None, :]
        return BiJet(c, self.point)

    def reciprocal(self) -> "BiJet":
        """Truncated 1/self; requires a nonzero value at the point."""
        c0 = self.coeffs[0, 0]
        if abs(c0) <= 1e-12:
            raise ZeroDivisionError("jet value at the expansion point is (near) zero")
        J, K = self.orders
        r = np.zeros((J + 1, K + 1), dtype=complex)
        r[0, 0] = 1.0 / c0
        for j in range(J + 1):
            for k in range(K + 1):
                if j == 0 and k == 0:
                    continue
                acc = 0.0 + 0.0j
                for j2 in range(j + 1):
                    for k2 in range(k + 1):
                        if j2 == j and k2 == k:
                            continue
                        acc += r[j2, k2] * self.coeffs[j - j2, k - k2]
                r[j, k] = -acc / c0
        return BiJet(r, self.point)

    def __repr__(self):
        J, K = self.orders
        return f"BiJet(orders=({J},{K}), point={self.point}, value={self.value:.6g})"


def jet_arithmetic(a: BiJet, b: BiJet, op: str) -> BiJet:
    """Combine two jets: ``op`` is ``"add"`` or ``"mul"``."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown jet operation {op!r}")


def jet_derive(a: BiJet, which: str) -> BiJet:
    """Differentiate a jet: ``which`` is ``"d_z"`` or ``"d_zbar"``."""
    if which == "d_z":
        return a.d_z()
    if which == "d_zbar":
        return a.d_zbar()
    raise ValueError(f"unknown derivative {which!r}")


class MatrixBiJet:
    """Square matrix whose entries are jets at one shared point/truncation."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        if isinstance(entries, np.ndarray) and entries.dtype == object:
            arr = entries.copy()
        else:
            arr = np.empty((len(entries), len(entries[0])), dtype=object)
            for i, row in enumerate(entries):
                for j, e in enumerate(row):
                    arr[i, j] = e
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("matrix of jets must be square")
        ref = arr[0, 0]
        for e in arr.ravel():
            if not isinstance(e, BiJet):
                raise TypeError("matrix entries must be BiJet instances")
            ref._compat(e)
        self.entries = arr

    # -- constructors -------------------------------------------------
    @classmethod
    def zeros(cls, dim, orders, point=(0.0, 0.0)) -> "MatrixBiJet":
        z = BiJet.zeros(orders, point)
        return cls([[z for _ in range(dim)] for _ in range(dim)])

    @classmethod
    def identity(cls, dim, orders, point=(0.0, 0.0)) -> "MatrixBiJet":
        one = BiJet.constant(1.0, orders, point)
        zero = BiJet.zeros(orders, point)
        return cls([[one if i == j else zero for j in range(dim)] for i in range(dim)])

    @classmethod
    def from_constant_matrix(cls, m, orders, point=(0.0, 0.0)) -> "MatrixBiJet":
        m = np.asarray(m, dtype=complex)
        return cls([[BiJet.constant(m[i, j], orders, point) for j in range(m.shape[1])]
                    for i in range(m.shape[0])])

    @classmethod
    def from_scalar_jet(cls, jet: BiJet, dim: int) -> "MatrixBiJet":
        """jet times the identity matrix."""
        zero = BiJet.zeros(jet.orders, jet.point)
        return cls([[jet if i == j else zero for j in range(dim)] for i in range(dim)])

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def orders(self) -> tuple[int, int]:
        return self.entries[0, 0].orders

    @property
    def point(self):
        return self.entries[0, 0].point

    def __getitem__(self, idx) -> BiJet:
        return self.entries[idx]

    # -- algebra --------------------------------------------------------
    def __add__(self, other: "MatrixBiJet") -> "MatrixBiJet":
        return MatrixBiJet(self.entries + other.entries)

    def __sub__(self, other: "MatrixBiJet") -> "MatrixBiJet":
        return MatrixBiJet(self.entries - other.entries)

    def __neg__(self) -> "MatrixBiJet":
        return MatrixBiJet([[-e for e in row] for row in self.entries])

    def __mul__(self, other):
        """Scalar multiplication by a number or a scalar jet."""
        if isinstance(other, (BiJet,) + _SCALAR_TYPES):
            return MatrixBiJet([[e * other for e in row] for row in self.entries])
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other: "MatrixBiJet") -> "MatrixBiJet":
        n = self.dim
        if other.dim != n:
            raise ValueError("matrix dimensions do not match")
        zero = BiJet.zeros(self.orders, self.point)
        out = [[zero for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(n):
                acc = zero
                for k in range(n):
                    acc = acc + self.entries[i, k] * other.entries[k, j]
                out[i][j] = acc
        return MatrixBiJet(out)

    def matrix_power(self, n: int) -> "MatrixBiJet":
        if not isinstance(n, int) or n < 1:
            raise ValueError("matrix power must be a positive integer")
        out = self
        for _ in range(n - 1):
            out = out @ self
        return out

    def commutator(self, other: "MatrixBiJet") -> "MatrixBiJet":
        return self @ other - other @ self

    def d_z(self) -> "MatrixBiJet":
        return MatrixBiJet([[e.d_z() for e in row] for row in self.entries])

    def d_zbar(self) -> "MatrixBiJet":
        return MatrixBiJet([[e.d_zbar() for e in row] for row in self.entries])

    def trace(self) -> BiJet:
        acc = BiJet.zeros(self.orders, self.point)
        for i in range(self.dim):
            acc = acc + self.entries[i, i]
        return acc

    def value(self) -> np.ndarray:
        """Matrix of values at the expansion point."""
        return np.array([[e.value for e in row] for row in self.entries])

    def max_abs(self, window: tuple[int, int] | None = None) -> float:
        return max(e.max_abs(window) for e in self.entries.ravel())

    def __repr__(self):
        return f"MatrixBiJet(dim={self.dim}, orders={self.orders}, point={self.point})"


def block_matrix(blocks) -> MatrixBiJet:
    """Assemble a MatrixBiJet from a 2-d grid of equally-sized MatrixBiJets."""
    rows = []
    for brow in blocks:
        n = brow[0].dim
        for i in range(n):
            row = []
            for blk in brow:
                row.extend(blk.entries[i, :].tolist())
            rows.append(row)
    return MatrixBiJet(rows)
