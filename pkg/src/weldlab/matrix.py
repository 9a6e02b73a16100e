"""Dense complex blocks that remember which logical indices they hold."""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch, WindowTooSmall

KINDS = ("Pi", "PiBlock", "Coefficient", "Transition", "SBlock", "Gram")


@dataclass(frozen=True, eq=False)
class IndexedMatrix:
    """Logical entry ``(l, k)`` lives at ``data[l - row_start, k - col_start]``."""

    row_start: int
    col_start: int
    data: np.ndarray
    weight: int = 0
    kind: str = "Coefficient"

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.ndim != 2:
            raise ShapeMismatch("IndexedMatrix data must be two dimensional")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "row_start", int(self.row_start))
        object.__setattr__(self, "col_start", int(self.col_start))
        if self.kind not in KINDS:
            raise ValueError(f"unknown matrix kind {self.kind!r}")

    @property
    def shape(self):
        return self.data.shape

    @property
    def row_end(self):
        """Last logical row index (inclusive)."""
        return self.row_start + self.data.shape[0] - 1

    @property
    def col_end(self):
        return self.col_start + self.data.shape[1] - 1

    @property
    def rows(self):
        return np.arange(self.row_start, self.row_end + 1)

    @property
    def cols(self):
        return np.arange(self.col_start, self.col_end + 1)

    def __getitem__(self, lk):
        l, k = lk
        return self.data[l - self.row_start, k - self.col_start]

    def block(self, r0, r1, c0, c1, kind=None):
        """Sub-block with logical rows r0..r1 and columns c0..c1 (inclusive)."""
        if r0 < self.row_start or r1 > self.row_end or c0 < self.col_start or c1 > self.col_end:
            raise WindowTooSmall(
                f"block rows {r0}..{r1}, cols {c0}..{c1} outside "
                f"{self.row_start}..{self.row_end} x {self.col_start}..{self.col_end}"
            )
        d = self.data[r0 - self.row_start:r1 - self.row_start + 1, c0 - self.col_start:c1 - self.col_start + 1]
        return IndexedMatrix(r0, c0, d, self.weight, kind or self.kind)

    def truncate(self, K, kind=None):
        return self.block(self.row_start, min(K, self.row_end), self.col_start, min(K, self.col_end), kind)

    def with_data(self, data, kind=None):
        return IndexedMatrix(self.row_start, self.col_start, data, self.weight, kind or self.kind)

    @property
    def H(self):
        return IndexedMatrix(self.col_start, self.row_start, self.data.conj().T, self.weight, self.kind)

    @property
    def T(self):
        return IndexedMatrix(self.col_start, self.row_start, self.data.T, self.weight, self.kind)

    def conj(self):
        return self.with_data(self.data.conj())

    def __matmul__(self, other):
        if self.col_start != other.row_start or self.shape[1] != other.shape[0]:
            raise ShapeMismatch(
                f"inner windows differ: cols {self.col_start}..{self.col_end} "
                f"vs rows {other.row_start}..{other.row_end}"
            )
        return IndexedMatrix(self.row_start, other.col_start, self.data @ other.data, self.weight, self.kind)

    def hermitian_defect(self):
        return float(np.abs(self.data - self.data.conj().T).max()) if self.data.size else 0.0

    def to_json(self):
        return {
            "row_start": self.row_start,
            "col_start": self.col_start,
            "weight": self.weight,
            "kind": self.kind,
            "data": np.stack([self.data.real, self.data.imag], axis=-1).tolist(),
        }

    @classmethod
    def from_json(cls, obj):
        arr = np.asarray(obj["data"], dtype=float)
        data = arr[..., 0] + 1j * arr[..., 1] if arr.size else np.zeros((0, 0), complex)
        return cls(obj["row_start"], obj["col_start"], data, obj.get("weight", 0), obj.get("kind", "Coefficient"))


def identity(start, size, weight=0, kind="Coefficient"):
    return IndexedMatrix(start, start, np.eye(size, dtype=complex), weight, kind)


def max_residual(a, b):
    """Largest entry of ``a - b`` over the common logical window."""
    r0, r1 = max(a.row_start, b.row_start), min(a.row_end, b.row_end)
    c0, c1 = max(a.col_start, b.col_start), min(a.col_end, b.col_end)
    if r1 < r0 or c1 < c0:
        return 0.0
    d = a.block(r0, r1, c0, c1).data - b.block(r0, r1, c0, c1).data
    return float(np.abs(d).max())
