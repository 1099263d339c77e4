"""
scalars.py

Arithmetic over the base fields R, C and H behind one interface.

Every element is stored as four real components (s, t, u, v) of
z = s + t i + u j + v k. Components that do not belong to the field are forced
to exact zero, so real and complex arithmetic is the restriction of the
quaternion product. The array functions (``qmul``, ``qconj`` ...) work on any
array whose trailing axis has length 4; ``Scalar`` wraps a single element.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from app.core.errors import UsageError

logger = logging.getLogger(__name__)


class FieldMismatchError(UsageError):
    """Raised when two operands live over different base fields."""


class FieldTag(str, Enum):
    """Base field tag with its real dimension d."""

    REAL = "real"
    COMPLEX = "complex"
    QUATERNION = "quaternion"

    @property
    def d(self) -> int:
        return {"real": 1, "complex": 2, "quaternion": 4}[self.value]

    @classmethod
    def from_group(cls, group: str) -> "FieldTag":
        """Map a CLI group name (so / su / sp) to its base field."""
        try:
            return {"so": cls.REAL, "su": cls.COMPLEX, "sp": cls.QUATERNION}[group.lower()]
        except KeyError as exc:
            raise UsageError(f"Unknown group '{group}'; expected so, su or sp.") from exc

    def project(self, arr: np.ndarray) -> np.ndarray:
        """Return a copy of ``arr`` with the components outside the field zeroed."""
        out = np.array(arr, dtype=float, copy=True)
        out[..., self.d:] = 0.0
        return out


# ── Array-level algebra ──────────────────────────────────────────────


def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of broadcastable (..., 4) arrays."""
    a0, a1, a2, a3 = np.moveaxis(np.asarray(a, dtype=float), -1, 0)
    b0, b1, b2, b3 = np.moveaxis(np.asarray(b, dtype=float), -1, 0)
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def qconj(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out[..., 1:] *= -1.0
    return out


def qabs2(a: np.ndarray) -> np.ndarray:
    return np.sum(np.asarray(a, dtype=float) ** 2, axis=-1)


def qabs(a: np.ndarray) -> np.ndarray:
    return np.sqrt(qabs2(a))


def qinv(a: np.ndarray) -> np.ndarray:
    """Multiplicative inverse conj(a) / |a|^2 (no zero check)."""
    return qconj(a) / qabs2(a)[..., None]


def qre(a: np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=float)[..., 0]


def qim(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out[..., 0] = 0.0
    return out


def qreal(x) -> np.ndarray:
    """Embed real numbers (any shape) as (..., 4) arrays."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape + (4,))
    out[..., 0] = x
    return out


def qmatmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product of (..., p, k, 4) and (..., k, q, 4) quaternion matrices."""
    return qmul(a[..., :, :, None, :], b[..., None, :, :, :]).sum(axis=-3)


def qmatvec(a: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Apply (p, k, 4) matrices to (..., k, 4) vectors."""
    return qmul(a, v[..., None, :, :]).sum(axis=-2)


def qdot(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Sum over the vector axis of conj(z_j) w_j for (..., m, 4) arrays."""
    return qmul(qconj(z), w).sum(axis=-2)


def random_components(rng: np.random.Generator, tag: FieldTag, size=()) -> np.ndarray:
    """Standard Gaussian elements of the field, shape ``size + (4,)``."""
    shape = tuple(np.atleast_1d(size)) if size != () else ()
    return tag.project(rng.standard_normal(shape + (4,)))


def random_imaginary(rng: np.random.Generator, tag: FieldTag, size=()) -> np.ndarray:
    return qim(random_components(rng, tag, size))


# ── Scalar value type ────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class Scalar:
    """A single element of R, C or H."""

    components: np.ndarray
    field: FieldTag = FieldTag.QUATERNION

    def __post_init__(self) -> None:
        comps = np.asarray(self.components, dtype=float).reshape(4)
        object.__setattr__(self, "components", self.field.project(comps))

    @classmethod
    def of(cls, s: float = 0.0, t: float = 0.0, u: float = 0.0, v: float = 0.0,
           field: FieldTag = FieldTag.QUATERNION) -> "Scalar":
        return cls(np.array([s, t, u, v], dtype=float), field)

    @property
    def s(self) -> float:
        return float(self.components[0])

    @property
    def t(self) -> float:
        return float(self.components[1])

    @property
    def u(self) -> float:
        return float(self.components[2])

    @property
    def v(self) -> float:
        return float(self.components[3])

    def _check(self, other: "Scalar") -> None:
        if not isinstance(other, Scalar):
            raise UsageError(f"Expected a Scalar, got {type(other).__name__}.")
        if other.field is not self.field:
            raise FieldMismatchError(
                f"Field mismatch: {self.field.value} vs {other.field.value}."
            )

    def __add__(self, other: "Scalar") -> "Scalar":
        self._check(other)
        return Scalar(self.components + other.components, self.field)

    def __sub__(self, other: "Scalar") -> "Scalar":
        self._check(other)
        return Scalar(self.components - other.components, self.field)

    def __neg__(self) -> "Scalar":
        return Scalar(-self.components, self.field)

    def __mul__(self, other: "Scalar") -> "Scalar":
        return mul(self, other)

    def __truediv__(self, other: float) -> "Scalar":
        return Scalar(self.components / float(other), self.field)

    def __abs__(self) -> float:
        return float(qabs(self.components))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Scalar):
            return NotImplemented
        return other.field is self.field and bool(np.array_equal(self.components, other.components))

    def __hash__(self) -> int:
        return hash((self.field, tuple(self.components)))

    def conj(self) -> "Scalar":
        return Scalar(qconj(self.components), self.field)

    def inverse(self) -> "Scalar":
        if abs(self) == 0.0:
            raise UsageError("Zero has no inverse.")
        return Scalar(qinv(self.components), self.field)


def mul(a: Scalar, b: Scalar) -> Scalar:
    """Quaternion product; raises ``FieldMismatchError`` on mixed fields."""
    a._check(b)
    return Scalar(qmul(a.components, b.components), a.field)


def conj(z: Scalar) -> Scalar:
    return z.conj()


def modulus(z: Scalar) -> float:
    return abs(z)


def re(z: Scalar) -> float:
    return z.s


def im(z: Scalar) -> Scalar:
    return Scalar(qim(z.components), z.field)


ONE = Scalar.of(1.0)
I_UNIT = Scalar.of(0.0, 1.0)
J_UNIT = Scalar.of(0.0, 0.0, 1.0)
K_UNIT = Scalar.of(0.0, 0.0, 0.0, 1.0)
