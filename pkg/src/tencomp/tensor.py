"""Dense N-order tensor algebra: unfolding, folding, inner products, norms, file I/O.

Conventions used by the whole package:

* Modes are 1-based: mode ``n`` refers to axis ``n - 1`` of the underlying
  ``numpy`` array.
* The canonical flat linearization of a tensor is mode-1-fastest, i.e.
  Fortran order (``ravel(order="F")``).  The on-disk formats and the column
  ordering of every unfolding are derived from this single bijection.
* ``unfold(t, n)`` arranges the mode-``n`` fibers of ``t`` as the columns of
  a ``p_n x prod(other dims)`` matrix.  Column ``j`` holds the fiber whose
  remaining indices are the mode-1-fastest decoding of ``j`` over the
  non-``n`` axes kept in their original order.  ``fold`` inverts this
  exactly (bit for bit).
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "unfold",
    "fold",
    "inner",
    "frobenius_norm",
    "read_tensor",
    "write_tensor",
    "read_tensor_binary",
    "write_tensor_binary",
]

BINARY_MAGIC = b"TLT1"


def _as_tensor(t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if t.ndim < 1:
        raise ValueError("tensors must have at least one mode")
    return t


def _check_mode(mode: int, ndim: int) -> None:
    if not 1 <= mode <= ndim:
        raise ValueError(f"mode {mode} out of range for a {ndim}-order tensor")


def unfold(t, mode: int) -> np.ndarray:
    """Mode-``mode`` matricization of ``t``.

    Returns the ``p_mode x J_mode`` matrix (``J_mode`` is the product of the
    other dimensions) whose columns are the mode-``mode`` fibers, ordered by
    the mode-1-fastest linearization of the remaining indices.
    """
    t = _as_tensor(t)
    _check_mode(mode, t.ndim)
    moved = np.moveaxis(t, mode - 1, 0)
    return np.reshape(moved, (t.shape[mode - 1], -1), order="F")


def fold(mat, mode: int, shape) -> np.ndarray:
    """Inverse of :func:`unfold`: rebuild the tensor of ``shape`` from its
    mode-``mode`` matricization."""
    mat = np.asarray(mat, dtype=np.float64)
    shape = tuple(int(p) for p in shape)
    _check_mode(mode, len(shape))
    p = shape[mode - 1]
    rest = tuple(q for i, q in enumerate(shape) if i != mode - 1)
    j = int(np.prod(rest)) if rest else 1
    if mat.ndim != 2 or mat.shape != (p, j):
        raise ValueError(
            f"matricization of shape {mat.shape} does not match mode {mode} "
            f"of tensor shape {shape} (expected {(p, j)})"
        )
    moved = np.reshape(mat, (p,) + rest, order="F")
    return np.moveaxis(moved, 0, mode - 1)


def inner(a, b) -> float:
    """Scalar product of two tensors of identical shape."""
    a = _as_tensor(a)
    b = _as_tensor(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.dot(a.ravel(order="F"), b.ravel(order="F")))


def frobenius_norm(t) -> float:
    """Euclidean norm of a tensor: sqrt of the sum of squared entries."""
    t = _as_tensor(t)
    f = t.ravel(order="F")
    return float(np.sqrt(np.dot(f, f)))


def write_tensor(path, t) -> None:
    """Write ``t`` in the text format: line 1 is the order N, line 2 the
    dimensions, then one entry per line in the canonical flat order."""
    t = _as_tensor(t)
    with open(path, "w") as fh:
        fh.write(f"{t.ndim}\n")
        fh.write(" ".join(str(p) for p in t.shape) + "\n")
        for v in t.ravel(order="F"):
            fh.write(f"{v!r}\n")


def read_tensor(path) -> np.ndarray:
    """Read a tensor written by :func:`write_tensor`."""
    with open(path) as fh:
        lines = fh.read().split("\n")
    try:
        order = int(lines[0])
        dims = tuple(int(p) for p in lines[1].split())
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: malformed tensor header: {exc}") from exc
    if len(dims) != order or any(p < 1 for p in dims):
        raise ValueError(f"{path}: header declares order {order} but dims {dims}")
    count = int(np.prod(dims))
    values = np.empty(count)
    for i in range(count):
        try:
            values[i] = float(lines[2 + i])
        except (ValueError, IndexError) as exc:
            raise ValueError(f"{path}: line {3 + i}: bad or missing value") from exc
    return values.reshape(dims, order="F")


def write_tensor_binary(path, t) -> None:
    """Binary variant of the text format: magic ``TLT1``, little-endian
    int64 order and dims, then little-endian float64 entries in flat order."""
    t = _as_tensor(t)
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        np.array([t.ndim], dtype="<i8").tofile(fh)
        np.asarray(t.shape, dtype="<i8").tofile(fh)
        t.ravel(order="F").astype("<f8").tofile(fh)


def read_tensor_binary(path) -> np.ndarray:
    """Read a tensor written by :func:`write_tensor_binary`."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != BINARY_MAGIC:
            raise ValueError(f"{path}: bad magic bytes {magic!r}")
        order = int(np.fromfile(fh, dtype="<i8", count=1)[0])
        if order < 1:
            raise ValueError(f"{path}: bad tensor order {order}")
        dims = tuple(int(p) for p in np.fromfile(fh, dtype="<i8", count=order))
        if len(dims) != order or any(p < 1 for p in dims):
            raise ValueError(f"{path}: bad dims {dims}")
        count = int(np.prod(dims))
        values = np.fromfile(fh, dtype="<f8", count=count)
    if values.size != count:
        raise ValueError(f"{path}: expected {count} values, found {values.size}")
    return values.reshape(dims, order="F")
