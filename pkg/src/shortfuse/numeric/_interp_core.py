"""Flat interpreters for packed computation records.

The two functions below are written against the numba-supported numpy
subset so that the exact same source runs either as plain Python (the
pure-numpy fallback) or compiled with ``numba.njit`` (the default hot
path). Everything is deliberately inlined: helper calls would break the
dual-compilation property.

Buffer layout: every slot occupies a contiguous span of a single flat
float64 buffer; ``off``/``rows``/``cols`` describe the spans. ``buf``
holds forward values, ``gbuf`` the cotangents accumulated in reverse.
"""

import numpy as np

# Opcode values mirrored from record.py (kept literal for numba).
_MATMUL = 0
_ADD = 1
_MUL = 2
_MAXIMUM = 3
_SIGMOID = 4
_TANH = 5
_RELU = 6
_EXP = 7
_LOG = 8
_CONCAT = 9
_SLICE = 10


def run_forward(code, out, in_start, in_count, in_idx, p0, p1, off, rows, cols, buf):
    n_ops = code.shape[0]
    for o in range(n_ops):
        op = code[o]
        d = out[o]
        dv = buf[off[d]:off[d] + rows[d] * cols[d]].reshape(rows[d], cols[d])
        a = in_idx[in_start[o]]
        av = buf[off[a]:off[a] + rows[a] * cols[a]].reshape(rows[a], cols[a])
        if op == _MATMUL:
            b = in_idx[in_start[o] + 1]
            bv = buf[off[b]:off[b] + rows[b] * cols[b]].reshape(rows[b], cols[b])
            dv[:, :] = np.dot(av, bv)
        elif op == _ADD:
            b = in_idx[in_start[o] + 1]
            bv = buf[off[b]:off[b] + rows[b] * cols[b]].reshape(rows[b], cols[b])
            dv[:, :] = av + bv
        elif op == _MUL:
            b = in_idx[in_start[o] + 1]
            bv = buf[off[b]:off[b] + rows[b] * cols[b]].reshape(rows[b], cols[b])
            dv[:, :] = av * bv
        elif op == _MAXIMUM:
            b = in_idx[in_start[o] + 1]
            bv = buf[off[b]:off[b] + rows[b] * cols[b]].reshape(rows[b], cols[b])
            dv[:, :] = np.maximum(av, bv)
        elif op == _SIGMOID:
            # Stable in both tails: only exp of non-positive arguments.
            e = np.exp(-np.abs(av))
            dv[:, :] = np.where(av >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))
        elif op == _TANH:
            dv[:, :] = np.tanh(av)
        elif op == _RELU:
            dv[:, :] = np.maximum(av, 0.0)
        elif op == _EXP:
            dv[:, :] = np.exp(av)
        elif op == _LOG:
            dv[:, :] = np.log(av)
        elif op == _CONCAT:
            c0 = 0
            for q in range(in_count[o]):
                s = in_idx[in_start[o] + q]
                sv = buf[off[s]:off[s] + rows[s] * cols[s]].reshape(rows[s], cols[s])
                dv[:, c0:c0 + cols[s]] = sv
                c0 += cols[s]
        elif op == _SLICE:
            dv[:, :] = av[:, p0[o]:p1[o]]


def run_backward(code, out, in_start, in_count, in_idx, p0, p1, off, rows, cols, buf, gbuf):
    n_ops = code.shape[0]
    for o in range(n_ops - 1, -1, -1):
        op = code[o]
        d = out[o]
        gd = gbuf[off[d]:off[d] + rows[d] * cols[d]].reshape(rows[d], cols[d])
        dv = buf[off[d]:off[d] + rows[d] * cols[d]].reshape(rows[d], cols[d])
        a = in_idx[in_start[o]]
        av = buf[off[a]:off[a] + rows[a] * cols[a]].reshape(rows[a], cols[a])
        ga = gbuf[off[a]:off[a] + rows[a] * cols[a]].reshape(rows[a], cols[a])
        if op == _MATMUL:
            b = in_idx[in_start[o] + 1]
            bv = buf[off[b]:off[b] + rows[b] * cols[b]].reshape(rows[b], cols[b])
            gb = gbuf[off[b]:off[b] + rows[b] * cols[b]].reshape(rows[b], cols[b])
            ga += np.dot(gd, np.ascontiguousarray(bv.T))
            gb += np.dot(np.ascontiguousarray(av.T), gd)
        elif op == _ADD:
            b = in_idx[in_start[o] + 1]
            gb = gbuf[off[b]:off[b] + rows[b] * cols[b]].reshape(rows[b], cols[b])
            if rows[a] == rows[d] and cols[a] == cols[d]:
                ga += gd
            elif rows[a] == 1 and cols[a] == cols[d]:
                ga[0, :] += np.sum(gd, 0)
            elif rows[a] == rows[d] and cols[a] == 1:
                ga[:, 0] += np.sum(gd, 1)
            else:
                ga[0, 0] += np.sum(gd)
            if rows[b] == rows[d] and cols[b] == cols[d]:
                gb += gd
            elif rows[b] == 1 and cols[b] == cols[d]:
                gb[0, :] += np.sum(gd, 0)
            elif rows[b] == rows[d] and cols[b] == 1:
                gb[:, 0] += np.sum(gd, 1)
            else:
                gb[0, 0] += np.sum(gd)
        elif op == _MUL:
            b = in_idx[in_start[o] + 1]
            bv = buf[off[b]:off[b] + rows[b] * cols[b]].reshape(rows[b], cols[b])
            gb = gbuf[off[b]:off[b] + rows[b] * cols[b]].reshape(rows[b], cols[b])
            ca = gd * bv
            if rows[a] == rows[d] and cols[a] == cols[d]:
                ga += ca
            elif rows[a] == 1 and cols[a] == cols[d]:
                ga[0, :] += np.sum(ca, 0)
            elif rows[a] == rows[d] and cols[a] == 1:
                ga[:, 0] += np.sum(ca, 1)
            else:
                ga[0, 0] += np.sum(ca)
            cb = gd * av
            if rows[b] == rows[d] and cols[b] == cols[d]:
                gb += cb
            elif rows[b] == 1 and cols[b] == cols[d]:
                gb[0, :] += np.sum(cb, 0)
            elif rows[b] == rows[d] and cols[b] == 1:
                gb[:, 0] += np.sum(cb, 1)
            else:
                gb[0, 0] += np.sum(cb)
        elif op == _MAXIMUM:
            # Ties route the gradient to the first argument.
            b = in_idx[in_start[o] + 1]
            bv = buf[off[b]:off[b] + rows[b] * cols[b]].reshape(rows[b], cols[b])
            gb = gbuf[off[b]:off[b] + rows[b] * cols[b]].reshape(rows[b], cols[b])
            wins = (av >= bv).astype(np.float64)
            ca = gd * wins
            if rows[a] == rows[d] and cols[a] == cols[d]:
                ga += ca
            elif rows[a] == 1 and cols[a] == cols[d]:
                ga[0, :] += np.sum(ca, 0)
            elif rows[a] == rows[d] and cols[a] == 1:
                ga[:, 0] += np.sum(ca, 1)
            else:
                ga[0, 0] += np.sum(ca)
            cb = gd * (1.0 - wins)
            if rows[b] == rows[d] and cols[b] == cols[d]:
                gb += cb
            elif rows[b] == 1 and cols[b] == cols[d]:
                gb[0, :] += np.sum(cb, 0)
            elif rows[b] == rows[d] and cols[b] == 1:
                gb[:, 0] += np.sum(cb, 1)
            else:
                gb[0, 0] += np.sum(cb)
        elif op == _SIGMOID:
            ga += gd * dv * (1.0 - dv)
        elif op == _TANH:
            ga += gd * (1.0 - dv * dv)
        elif op == _RELU:
            ga += gd * (av > 0.0).astype(np.float64)
        elif op == _EXP:
            ga += gd * dv
        elif op == _LOG:
            ga += gd / av
        elif op == _CONCAT:
            c0 = 0
            for q in range(in_count[o]):
                s = in_idx[in_start[o] + q]
                gs = gbuf[off[s]:off[s] + rows[s] * cols[s]].reshape(rows[s], cols[s])
                gs += gd[:, c0:c0 + cols[s]]
                c0 += cols[s]
        elif op == _SLICE:
            ga[:, p0[o]:p1[o]] += gd
