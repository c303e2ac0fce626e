"""Bundled generating-matrix families.

Two sources: the Hammersley pair (identity + anti-diagonal), generated on
the fly, and Sobol matrices built from the classic Joe-Kuo primitive
polynomials and initial direction numbers, shipped as a data file in the
package (``data/sobol_d8_n16.txt`` in the matrix file format).  Sobol
matrices are upper triangular with unit diagonal, so truncating the
bundled file to the leading n x n block gives the correct n-bit matrix.

Higher-order families are obtained by digit interlacing of an order-1
base net in sigma*d dimensions.
"""

from __future__ import annotations

from importlib import resources

from .errors import DomainError
from .gf2net import DigitalNetSpec, F2Matrix, interlace, read_matrices

# (degree s, polynomial coefficient bits a, initial m values), per dimension
# starting at dimension 2; dimension 1 is the van der Corput identity.
_JOE_KUO_ROWS: dict[int, tuple[int, int, tuple[int, ...]]] = {
    2: (1, 0, (1,)),
    3: (2, 1, (1, 3)),
    4: (3, 1, (1, 3, 1)),
    5: (3, 2, (1, 1, 1)),
    6: (4, 1, (1, 1, 3, 3)),
    7: (4, 4, (1, 3, 5, 13)),
    8: (5, 2, (1, 1, 5, 5, 17)),
}

MAX_SOBOL_DIM = 8
SOBOL_DATA_BITS = 16
_SOBOL_DATA_FILE = "sobol_d8_n16.txt"


def _direction_numbers(s: int, a: int, m_init: tuple[int, ...], n: int) -> list[int]:
    """m_1..m_n via m_k = XOR_i 2^i a_i m_{k-i}  XOR  2^s m_{k-s} XOR m_{k-s}."""
    m = list(m_init)
    for k in range(s, n):
        new = m[k - s] ^ (m[k - s] << s)
        for i in range(1, s):
            if (a >> (s - 1 - i)) & 1:
                new ^= m[k - i] << i
        m.append(new)
    return m[:n]


def sobol_matrix(dim: int, n: int) -> F2Matrix:
    """Generating matrix of the given Sobol coordinate (1-based dimension).

    Column k holds the binary digits of m_k / 2^k, so the matrix is upper
    triangular with ones on the diagonal.
    """
    if dim == 1:
        return F2Matrix.identity(n)
    if dim not in _JOE_KUO_ROWS:
        raise DomainError(f"no direction numbers bundled for dimension {dim}")
    s, a, m_init = _JOE_KUO_ROWS[dim]
    m = _direction_numbers(s, a, m_init, n)
    rows = []
    for r in range(1, n + 1):
        row = 0
        for k in range(r, n + 1):
            if (m[k - 1] >> (k - r)) & 1:
                row |= 1 << (k - 1)
        rows.append(row)
    return F2Matrix(tuple(rows), n)


def generate_sobol_spec(d: int, n: int) -> DigitalNetSpec:
    if not 1 <= d <= MAX_SOBOL_DIM:
        raise DomainError(f"sobol dimension must be in [1, {MAX_SOBOL_DIM}]")
    return DigitalNetSpec(d, n, 1, tuple(sobol_matrix(i, n) for i in range(1, d + 1)))


def _load_sobol_data() -> DigitalNetSpec:
    text = resources.files("disclab").joinpath("data", _SOBOL_DATA_FILE).read_text()
    return read_matrices(text)


def _truncate(mat: F2Matrix, n: int) -> F2Matrix:
    mask = (1 << n) - 1
    return F2Matrix(tuple(r & mask for r in mat.rows[:n]), n)


def sobol_spec(d: int, n: int) -> DigitalNetSpec:
    """Order-1 Sobol net spec from the bundled matrix data file."""
    if not 1 <= d <= MAX_SOBOL_DIM:
        raise DomainError(f"sobol dimension must be in [1, {MAX_SOBOL_DIM}]")
    if not 1 <= n <= SOBOL_DATA_BITS:
        raise DomainError(f"sobol bit depth must be in [1, {SOBOL_DATA_BITS}]")
    full = _load_sobol_data()
    return DigitalNetSpec(d, n, 1, tuple(_truncate(m, n) for m in full.matrices[:d]))


def hammersley_spec(n: int) -> DigitalNetSpec:
    """The 2-dimensional identity + anti-diagonal pair (a (0, n, 2)-net)."""
    return DigitalNetSpec(2, n, 1, (F2Matrix.identity(n), F2Matrix.reversal(n)))


def zero_spec(d: int, n: int, sigma: int = 1) -> DigitalNetSpec:
    return DigitalNetSpec(d, n, sigma, tuple(F2Matrix.zero(sigma * n, n) for _ in range(d)))


def interlaced_sobol_spec(d: int, n: int, sigma: int = 2) -> DigitalNetSpec:
    """Order-sigma net: digit interlacing of the (sigma*d)-dim Sobol net."""
    return interlace(sobol_spec(sigma * d, n), sigma)


def interlaced_hammersley_spec(n: int) -> DigitalNetSpec:
    """Order-2, 1-dimensional interlacing of the Hammersley pair."""
    return interlace(hammersley_spec(n), 2)


BUILTIN_NAMES = ("hammersley", "sobol", "interlaced2", "interlaced2-hammersley", "zero")


def builtin_spec(name: str, n: int, d: int = 2, sigma: int = 1) -> DigitalNetSpec:
    """Resolve a builtin construction name for the CLI."""
    if name == "hammersley":
        return hammersley_spec(n)
    if name == "sobol":
        return sobol_spec(d, n)
    if name == "interlaced2":
        return interlaced_sobol_spec(d, n, 2)
    if name == "interlaced2-hammersley":
        return interlaced_hammersley_spec(n)
    if name == "zero":
        return zero_spec(d, n, sigma)
    raise DomainError(
        f"unknown construction {name!r}; available: {', '.join(BUILTIN_NAMES)}"
    )
