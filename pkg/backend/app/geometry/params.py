"""
params.py

GroupParams: the base field and rank parameter n of SO_0(n,1), SU(n,1), Sp(n,1).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gamma, pi

from app.core.errors import UsageError
from app.geometry.scalars import FieldTag

_GROUP_NAMES = {FieldTag.REAL: "SO_0", FieldTag.COMPLEX: "SU", FieldTag.QUATERNION: "Sp"}


@dataclass(frozen=True)
class GroupParams:
    """Field tag and n; every derived dimension is a property."""

    field: FieldTag
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise UsageError(f"n must be >= 1, got {self.n}.")
        if self.field is FieldTag.REAL and self.n < 2:
            raise UsageError("SO_0(n,1) needs n >= 2 (boundary sphere dimension >= 1).")

    @classmethod
    def from_group(cls, group: str, n: int) -> "GroupParams":
        return cls(FieldTag.from_group(group), int(n))

    @property
    def d(self) -> int:
        return self.field.d

    @property
    def r(self) -> int:
        """Homogeneous dimension d(n+1) - 2 of V."""
        return self.d * (self.n + 1) - 2

    @property
    def size(self) -> int:
        return self.n + 1

    @property
    def sphere_dim(self) -> int:
        return self.d * self.n - 1

    @property
    def o_dim(self) -> int:
        """Real dimension of the first stratum F^(n-1)."""
        return self.d * (self.n - 1)

    @property
    def z_dim(self) -> int:
        """Real dimension of the centre Im F."""
        return self.d - 1

    @property
    def v_dim(self) -> int:
        return self.o_dim + self.z_dim

    @property
    def sphere_area(self) -> float:
        """Euclidean area of the unit sphere S^(dn-1) in R^(dn)."""
        m = self.d * self.n
        return 2.0 * pi ** (m / 2.0) / gamma(m / 2.0)

    @property
    def group_name(self) -> str:
        return _GROUP_NAMES[self.field]

    @property
    def label(self) -> str:
        return f"{self.group_name}({self.n},1)"

    @property
    def cli_name(self) -> str:
        return {FieldTag.REAL: "so", FieldTag.COMPLEX: "su", FieldTag.QUATERNION: "sp"}[self.field]
