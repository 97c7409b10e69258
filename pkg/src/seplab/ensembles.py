"""Random density matrices.

Two kinds of randomness drive every sampler:

* :class:`Pseudo` is a counter-based generator keyed by ``(seed, stream_id)``;
  its normals are consumed in a fixed order (Ginibre block row-major, complex
  entries as consecutive ``(re, im)`` pairs, quaternion entries as four
  consecutive reals, then the Haar block if any).
* :class:`Quasi` hands out one low-discrepancy point per call; a whole sample
  is built from the coordinates of that single point.

Matrix construction is shared with the compiled block runner in
:mod:`seplab._mc`, so a stream replayed here reproduces the runner's
matrices exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels, _mc
from .errors import InvalidSpec, StreamExhausted, Unsupported
from .matcore import DensityMatrix
from .qrseq import QrState

FIELDS = ("R", "C", "H")
_FIELD_CODE = {"R": _mc.REAL, "C": _mc.COMPLEX, "H": _mc.QUATERNION}
X_STATE_SIZES = (4, 6, 9)


# --------------------------------------------------------------------------
# measure families


@dataclass(frozen=True)
class HS:
    def __str__(self):
        return "hs"


@dataclass(frozen=True)
class Induced:
    k: int

    def __post_init__(self):
        if int(self.k) != self.k:
            raise InvalidSpec(f"induced k must be an integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))

    def __str__(self):
        return f"induced:{self.k}"


@dataclass(frozen=True)
class Bures:
    def __str__(self):
        return "bures"


@dataclass(frozen=True)
class Interpolated:
    """``rho ~ ((1-x) I + x U) A A^H ((1-x) I + x U^H)``; ``x = 1/2`` is Bures."""

    x: float

    def __post_init__(self):
        if not 0.0 <= float(self.x) <= 1.0:
            raise InvalidSpec(f"interpolation parameter must lie in [0, 1], got {self.x}")
        object.__setattr__(self, "x", float(self.x))

    def __str__(self):
        return f"interpolated:{self.x!r}"


Family = HS | Induced | Bures | Interpolated


def parse_family(text: str) -> Family:
    """Parse ``hs``, ``bures``, ``induced:K`` or ``interpolated:X`` (``interp:X``)."""
    name, _, arg = text.strip().lower().partition(":")
    try:
        if name == "hs" and not arg:
            return HS()
        if name == "bures" and not arg:
            return Bures()
        if name == "induced":
            return Induced(int(arg))
        if name in ("interpolated", "interp"):
            return Interpolated(float(Fraction(arg)))
    except ValueError as exc:
        raise InvalidSpec(f"bad measure {text!r}: {exc}") from None
    raise InvalidSpec(f"unknown measure {text!r}")


@dataclass(frozen=True)
class MeasureSpec:
    """Field, bipartite dimensions and measure family of a sampler.

    For the quaternionic field ``dims`` count quaternionic dimensions; the
    emitted matrices are the ``2N x 2N`` complex images.
    """

    field: str
    dims: tuple[int, int]
    family: Family = HS()

    def __post_init__(self):
        if self.field not in FIELDS:
            raise InvalidSpec(f"field must be one of {FIELDS}, got {self.field!r}")
        ma, mb = (int(d) for d in self.dims)
        if ma < 1 or mb < 1:
            raise InvalidSpec(f"dimensions must be positive, got {self.dims}")
        object.__setattr__(self, "dims", (ma, mb))
        if not isinstance(self.family, (HS, Induced, Bures, Interpolated)):
            raise InvalidSpec(f"unknown family {self.family!r}")
        if isinstance(self.family, Induced):
            k = self.family.k
            if k < 1 - self.n or self.n + k < ma:
                raise InvalidSpec(f"induced k={k} needs N + k >= m_A for N={self.n}")
        if self.field == "H":
            if isinstance(self.family, (Bures, Interpolated)) and self.mixes:
                raise Unsupported("quaternionic Haar mixing is not implemented")
            if self.k % 2 != 1:
                raise Unsupported(
                    "quaternionic Ginibre blocks only realise odd det powers; "
                    f"k={self.k} is unavailable")

    @property
    def n(self) -> int:
        return self.dims[0] * self.dims[1]

    @property
    def matrix_size(self) -> int:
        return 2 * self.n if self.field == "H" else self.n

    @property
    def k(self) -> int:
        return self.family.k if isinstance(self.family, Induced) else 0

    @property
    def x(self) -> float:
        if isinstance(self.family, Bures):
            return 0.5
        if isinstance(self.family, Interpolated):
            return self.family.x
        return 0.0

    @property
    def mixes(self) -> bool:
        """True when a Haar unitary enters the construction."""
        return self.x != 0.0

    @property
    def ginibre_cols(self) -> int:
        """Columns of the Ginibre block, in field units.

        An ``N x K`` Wishart matrix has eigenvalue weight
        ``det^((beta/2)(K - N + 1) - 1)``; the column count is chosen so this
        equals ``det^k`` (with ``k = 0`` the flat measure).
        """
        n, k = self.n, self.k
        if self.field == "C":
            return n + k
        if self.field == "R":
            return n + 1 + 2 * k
        return n + (k - 1) // 2


def kernel_params(spec: MeasureSpec, *, quasi=False, coupled=False, x_states=False):
    """Integer parameter vector and mixing weight for :mod:`seplab._mc`."""
    ip = np.zeros(_mc.P_SIZE, dtype=np.int64)
    ma, mb = spec.dims
    ip[_mc.P_SOURCE] = _mc.QUASI if quasi else _mc.PSEUDO
    ip[_mc.P_FIELD] = _FIELD_CODE[spec.field]
    ip[_mc.P_N] = spec.matrix_size
    ip[_mc.P_MA] = ma
    ip[_mc.P_MB] = mb
    ip[_mc.P_COLS] = spec.ginibre_cols
    ip[_mc.P_MIX] = 1 if spec.mixes else 0
    ip[_mc.P_COUPLED] = 1 if coupled else 0
    ip[_mc.P_XSTATE] = 1 if x_states else 0
    ip[_mc.P_XK] = spec.k if x_states else 0
    ip[_mc.P_SPECTRUM] = 1 if spec.field != "H" and 2 in (ma, mb) and spec.n >= 4 else 0
    return ip, spec.x


def normals_per_sample(spec: MeasureSpec) -> int:
    ip, _ = kernel_params(spec)
    return int(_mc.normals_per_sample(ip))


# --------------------------------------------------------------------------
# streams


@dataclass
class Pseudo:
    """Counter-based pseudorandom stream; equal ``(seed, stream_id)`` replay exactly."""

    seed: int
    stream_id: int = 0
    counter: int = 0
    key: int = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 <= self.seed < 2**64 or not 0 <= self.stream_id < 2**64:
            raise InvalidSpec("seed and stream_id must fit in 64 unsigned bits")
        self.key = int(_kernels.stream_key(np.uint64(self.seed), np.uint64(self.stream_id)))

    def normals(self, count: int) -> np.ndarray:
        out = np.empty(count)
        _mc.fill_normals_pseudo(np.uint64(self.key), np.uint64(self.counter), out, count)
        self.counter += count
        return out

    def uniforms(self, count: int) -> np.ndarray:
        key = np.uint64(self.key)
        out = np.array([_kernels.uniform_at(key, np.uint64(self.counter + i)) for i in range(count)])
        self.counter += count
        return out


@dataclass
class Quasi:
    """One quasirandom point per draw, mapped coordinatewise to normals.

    Points with a coordinate exactly 0 (possible only for ``alpha0 = 0``
    at rare indices) have no finite normal image and are skipped; ``skipped``
    counts them.
    """

    state: QrState
    skipped: int = 0

    @property
    def s(self) -> int:
        return self.state.s

    def normals(self, count: int) -> np.ndarray:
        if count > self.s:
            raise StreamExhausted(f"a draw needs {count} coordinates but points have s={self.s}")
        hi, lo, off = self.state.words
        out = np.empty(count)
        while not _mc.fill_normals_quasi(np.uint64(self.state.n), hi, lo, off, out, count):
            self.state.n += 1
            self.skipped += 1
        self.state.n += 1
        return out


RandomStream = Pseudo | Quasi


# --------------------------------------------------------------------------
# samplers


def ginibre(stream: RandomStream, field: str, rows: int, cols: int) -> np.ndarray:
    """Matrix of independent standard normals over the field, as a complex array.

    Quaternionic shapes are in quaternionic units; the result is the
    ``2 rows x 2 cols`` complex image.
    """
    if field not in FIELDS:
        raise InvalidSpec(f"field must be one of {FIELDS}, got {field!r}")
    if rows < 1 or cols < 1:
        raise InvalidSpec("rows and cols must be >= 1")
    per = {"R": 1, "C": 2, "H": 4}[field]
    buf = stream.normals(per * rows * cols)
    scale = 2 if field == "H" else 1
    out = np.empty((scale * rows, scale * cols), dtype=np.complex128)
    _mc.ginibre_from(buf, 0, _FIELD_CODE[field], scale * rows, scale * cols, out)
    return out


def haar_unitary(stream: RandomStream, n: int, field: str = "C") -> np.ndarray:
    """Haar-random unitary (``field="C"``) or orthogonal (``field="R"``) matrix."""
    if n < 1:
        raise InvalidSpec("n must be >= 1")
    if field not in ("R", "C"):
        raise Unsupported("Haar sampling is available for R and C only")
    z = ginibre(stream, field, n, n)
    _mc.orthonormalize_columns(z, n)
    return z


def _check_stream(stream: RandomStream, spec: MeasureSpec) -> None:
    if isinstance(stream, Quasi):
        per = normals_per_sample(spec)
        if per > stream.s:
            raise StreamExhausted(f"{spec} needs {per} coordinates per draw, points have s={stream.s}")


def sample_density(stream: RandomStream, spec: MeasureSpec) -> DensityMatrix:
    ip, x = kernel_params(spec)
    _check_stream(stream, spec)
    buf = stream.normals(int(_mc.normals_per_sample(ip)))
    n = spec.matrix_size
    cols = int(ip[_mc.P_COLS]) * (2 if spec.field == "H" else 1)
    a = np.empty((n, cols), dtype=np.complex128)
    u = np.empty((n, n), dtype=np.complex128)
    m = np.empty((n, cols), dtype=np.complex128)
    rho = np.empty((n, n), dtype=np.complex128)
    _mc.build_density(buf, ip, x, a, u, m, rho)
    return DensityMatrix(rho, _matrix_dims(spec))


def _matrix_dims(spec: MeasureSpec) -> tuple[int, int]:
    ma, mb = spec.dims
    return (ma, 2 * mb) if spec.field == "H" else (ma, mb)


def check_x_spec(spec: MeasureSpec) -> None:
    if spec.field not in ("R", "C") or spec.n not in X_STATE_SIZES:
        raise InvalidSpec(f"X states need field R or C and n in {X_STATE_SIZES}")
    if isinstance(spec.family, (Bures, Interpolated)):
        raise InvalidSpec("X states support the HS and induced families only")
    if spec.k < 0:
        raise InvalidSpec("X-state det weighting needs k >= 0")


def sample_x_state(stream: Pseudo, spec: MeasureSpec) -> DensityMatrix:
    """X state (diagonal plus anti-diagonal) under the flat or det^k-weighted measure."""
    if not isinstance(stream, Pseudo):
        raise Unsupported("X states are sampled from pseudorandom streams only")
    check_x_spec(spec)
    ip, _ = kernel_params(spec, x_states=True)
    n = spec.n
    rho = np.empty((n, n), dtype=np.complex128)
    key = np.uint64(stream.key)
    bound = (1.0 / n) ** n
    while True:
        ctr = _mc.x_state_from(key, np.uint64(stream.counter), ip, rho)
        stream.counter = int(ctr)
        if spec.k == 0:
            break
        w = (_mc.x_state_det(rho, n) / bound) ** spec.k
        u = _kernels.uniform_at(key, np.uint64(stream.counter))
        stream.counter += 1
        if u < w:
            break
    return DensityMatrix(rho, spec.dims)
