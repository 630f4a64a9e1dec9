"""Computation records: replayable programs over 2-D float64 tensors.

A :class:`Record` is an ordered list of primitive operations (a Wengert
list) built once and then replayed on bound inputs. All tensors are
two-dimensional, row-major, 64-bit. The primitive set is deliberately
small: matrix multiply, broadcast add/multiply/maximum, sigmoid, tanh,
rectifier, exp, log, column concatenation, and column slicing. Axis
reductions are composed from these (e.g. a row sum is a matmul with a
ones column; a max over columns is a fold of elementwise maxima), which
keeps both interpreters flat and easy to verify.

Records are immutable after :meth:`Record.freeze` and hold no execution
state, so replays of distinct executions may run concurrently.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError

# Opcodes. Values are baked into packed metadata arrays consumed by the
# interpreters; never renumber without recompiling cached kernels.
OP_MATMUL = 0
OP_ADD = 1
OP_MUL = 2
OP_MAXIMUM = 3
OP_SIGMOID = 4
OP_TANH = 5
OP_RELU = 6
OP_EXP = 7
OP_LOG = 8
OP_CONCAT = 9
OP_SLICE = 10

OP_NAMES = {
    OP_MATMUL: "matmul",
    OP_ADD: "add",
    OP_MUL: "mul",
    OP_MAXIMUM: "maximum",
    OP_SIGMOID: "sigmoid",
    OP_TANH: "tanh",
    OP_RELU: "relu",
    OP_EXP: "exp",
    OP_LOG: "log",
    OP_CONCAT: "concat",
    OP_SLICE: "slice",
}

KIND_CONST = 0
KIND_INPUT = 1
KIND_PARAM = 2
KIND_OP = 3


class Slot:
    """Handle to one tensor inside a record."""

    __slots__ = ("record", "index", "shape", "kind", "name")

    def __init__(self, record, index, shape, kind, name):
        self.record = record
        self.index = index
        self.shape = shape
        self.kind = kind
        self.name = name

    def __repr__(self):
        return f"Slot({self.index}, {self.shape}, {self.name or OP_NAMES.get(self.kind, '')})"


def _as_shape(shape) -> tuple[int, int]:
    if len(shape) != 2 or any(int(s) <= 0 for s in shape):
        raise ShapeError(f"tensor shapes must be 2-D with positive dims, got {tuple(shape)}")
    return int(shape[0]), int(shape[1])


def _broadcast_shape(a: tuple[int, int], b: tuple[int, int], opname: str, opidx: int) -> tuple[int, int]:
    rows = a[0] if b[0] in (1, a[0]) else (b[0] if a[0] == 1 else None)
    cols = a[1] if b[1] in (1, a[1]) else (b[1] if a[1] == 1 else None)
    if rows is None or cols is None:
        raise ShapeError(f"op {opidx} ({opname}): shapes {a} and {b} do not broadcast")
    return rows, cols


class Record:
    """A frozen, replayable sequence of primitive tensor operations."""

    def __init__(self):
        self._slots: list[Slot] = []
        self._ops: list[tuple] = []  # (opcode, out_idx, in_indices, p0, p1, tag)
        self._consts: dict[int, np.ndarray] = {}
        self.inputs: dict[str, Slot] = {}
        self.params: dict[str, Slot] = {}
        self.output: Slot | None = None
        self._frozen = False
        self._packed = None

    # -- slot declaration ------------------------------------------------

    def _new_slot(self, shape, kind, name=None) -> Slot:
        if self._frozen:
            raise ShapeError("record is frozen; no further operations may be added")
        slot = Slot(self, len(self._slots), _as_shape(shape), kind, name)
        self._slots.append(slot)
        return slot

    def input(self, name: str, shape) -> Slot:
        """Declare a named input tensor bound at every forward call."""
        if name in self.inputs or name in self.params:
            raise ShapeError(f"duplicate slot name {name!r}")
        slot = self._new_slot(shape, KIND_INPUT, name)
        self.inputs[name] = slot
        return slot

    def param(self, name: str, shape) -> Slot:
        """Declare a named parameter tensor; gradients are reported for these."""
        if name in self.inputs or name in self.params:
            raise ShapeError(f"duplicate slot name {name!r}")
        slot = self._new_slot(shape, KIND_PARAM, name)
        self.params[name] = slot
        return slot

    def const(self, values, name=None) -> Slot:
        """Embed a constant tensor (baked into the record)."""
        arr = np.ascontiguousarray(np.atleast_2d(np.asarray(values, dtype=np.float64)))
        slot = self._new_slot(arr.shape, KIND_CONST, name)
        self._consts[slot.index] = arr
        return slot

    # -- primitive operations ---------------------------------------------

    def _check_owned(self, *slots):
        for s in slots:
            if s.record is not self:
                raise ShapeError("slot belongs to a different record")

    def _emit(self, opcode, out_shape, in_slots, p0=0, p1=0, tag=None) -> Slot:
        self._check_owned(*in_slots)
        out = self._new_slot(out_shape, KIND_OP)
        self._ops.append((opcode, out.index, tuple(s.index for s in in_slots), p0, p1, tag))
        return out

    def matmul(self, a: Slot, b: Slot, tag=None) -> Slot:
        if a.shape[1] != b.shape[0]:
            raise ShapeError(
                f"op {len(self._ops)} (matmul): inner dims differ, {a.shape} @ {b.shape}"
            )
        return self._emit(OP_MATMUL, (a.shape[0], b.shape[1]), (a, b), tag=tag)

    def add(self, a: Slot, b: Slot, tag=None) -> Slot:
        shape = _broadcast_shape(a.shape, b.shape, "add", len(self._ops))
        return self._emit(OP_ADD, shape, (a, b), tag=tag)

    def mul(self, a: Slot, b: Slot, tag=None) -> Slot:
        shape = _broadcast_shape(a.shape, b.shape, "mul", len(self._ops))
        return self._emit(OP_MUL, shape, (a, b), tag=tag)

    def maximum(self, a: Slot, b: Slot, tag=None) -> Slot:
        # Elementwise max; gradient goes to the first argument on ties.
        shape = _broadcast_shape(a.shape, b.shape, "maximum", len(self._ops))
        return self._emit(OP_MAXIMUM, shape, (a, b), tag=tag)

    def sigmoid(self, a: Slot, tag=None) -> Slot:
        return self._emit(OP_SIGMOID, a.shape, (a,), tag=tag)

    def tanh(self, a: Slot, tag=None) -> Slot:
        return self._emit(OP_TANH, a.shape, (a,), tag=tag)

    def relu(self, a: Slot, tag=None) -> Slot:
        return self._emit(OP_RELU, a.shape, (a,), tag=tag)

    def exp(self, a: Slot, tag=None) -> Slot:
        return self._emit(OP_EXP, a.shape, (a,), tag=tag)

    def log(self, a: Slot, tag=None) -> Slot:
        # Domain: strictly positive inputs; callers stabilise beforehand.
        return self._emit(OP_LOG, a.shape, (a,), tag=tag)

    def concat(self, parts, tag=None) -> Slot:
        parts = list(parts)
        if not parts:
            raise ShapeError(f"op {len(self._ops)} (concat): needs at least one part")
        rows = parts[0].shape[0]
        for p in parts:
            if p.shape[0] != rows:
                raise ShapeError(
                    f"op {len(self._ops)} (concat): row counts differ "
                    f"({[p.shape for p in parts]})"
                )
        cols = sum(p.shape[1] for p in parts)
        return self._emit(OP_CONCAT, (rows, cols), parts, tag=tag)

    def slice_cols(self, a: Slot, start: int, stop: int, tag=None) -> Slot:
        if not (0 <= start < stop <= a.shape[1]):
            raise ShapeError(
                f"op {len(self._ops)} (slice): bounds [{start}, {stop}) invalid for {a.shape}"
            )
        return self._emit(OP_SLICE, (a.shape[0], stop - start), (a,), int(start), int(stop), tag)

    # -- convenience compositions -----------------------------------------

    def scale(self, a: Slot, factor: float, tag=None) -> Slot:
        return self.mul(a, self.const([[float(factor)]]), tag=tag)

    def sub(self, a: Slot, b: Slot, tag=None) -> Slot:
        return self.add(a, self.scale(b, -1.0), tag=tag)

    def row_sum(self, a: Slot, tag=None) -> Slot:
        """Sum over columns: (r, c) -> (r, 1), via matmul with a ones column."""
        ones = self.const(np.ones((a.shape[1], 1)))
        return self.matmul(a, ones, tag=tag)

    def row_max(self, a: Slot, tag=None) -> Slot:
        """Max over columns: (r, c) -> (r, 1), as a fold of elementwise maxima."""
        acc = self.slice_cols(a, 0, 1, tag=tag)
        for j in range(1, a.shape[1]):
            acc = self.maximum(acc, self.slice_cols(a, j, j + 1, tag=tag), tag=tag)
        return acc

    # -- finalisation ------------------------------------------------------

    def set_output(self, slot: Slot):
        self._check_owned(slot)
        self.output = slot

    def freeze(self) -> "Record":
        if self.output is None:
            raise ShapeError("record has no output slot")
        self._frozen = True
        self._pack()
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    @property
    def num_ops(self) -> int:
        return len(self._ops)

    @property
    def num_slots(self) -> int:
        return len(self._slots)

    def op_tag(self, op_index: int) -> str:
        tag = self._ops[op_index][5]
        return tag if tag else f"op {op_index} ({OP_NAMES[self._ops[op_index][0]]})"

    def param_shapes(self) -> dict[str, tuple[int, int]]:
        return {name: slot.shape for name, slot in self.params.items()}

    def input_shapes(self) -> dict[str, tuple[int, int]]:
        return {name: slot.shape for name, slot in self.inputs.items()}

    def _pack(self):
        n_ops = len(self._ops)
        code = np.empty(n_ops, dtype=np.int64)
        out = np.empty(n_ops, dtype=np.int64)
        in_start = np.empty(n_ops, dtype=np.int64)
        in_count = np.empty(n_ops, dtype=np.int64)
        p0 = np.empty(n_ops, dtype=np.int64)
        p1 = np.empty(n_ops, dtype=np.int64)
        in_idx: list[int] = []
        for o, (opcode, out_idx, ins, a0, a1, _tag) in enumerate(self._ops):
            code[o] = opcode
            out[o] = out_idx
            in_start[o] = len(in_idx)
            in_count[o] = len(ins)
            in_idx.extend(ins)
            p0[o] = a0
            p1[o] = a1
        rows = np.array([s.shape[0] for s in self._slots], dtype=np.int64)
        cols = np.array([s.shape[1] for s in self._slots], dtype=np.int64)
        sizes = rows * cols
        off = np.zeros(len(self._slots) + 1, dtype=np.int64)
        np.cumsum(sizes, out=off[1:])
        self._packed = {
            "code": code,
            "out": out,
            "in_start": in_start,
            "in_count": in_count,
            "in_idx": np.array(in_idx, dtype=np.int64),
            "p0": p0,
            "p1": p1,
            "off": off,
            "rows": rows,
            "cols": cols,
            "total": int(off[-1]),
        }

    @property
    def packed(self) -> dict:
        if self._packed is None:
            raise ShapeError("record must be frozen before execution")
        return self._packed
