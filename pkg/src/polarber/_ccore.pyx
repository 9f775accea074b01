# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled kernels; same API and results as ``polarber._pykernels``."""

from libc.stdint cimport uint8_t, int64_t
from libc.stdlib cimport malloc, free
from libcpp cimport bool as cbool
from libcpp.vector cimport vector

import numpy as np
cimport numpy as cnp

cnp.import_array()

NAME = "compiled"


cdef extern from "gmp.h":
    ctypedef struct __mpz_struct:
        pass
    ctypedef __mpz_struct mpz_t[1]
    void mpz_import(mpz_t rop, size_t count, int order, size_t size, int endian,
                    size_t nails, const void *op)
    void *mpz_export(void *rop, size_t *countp, int order, size_t size, int endian,
                     size_t nails, const mpz_t op)
    size_t mpz_sizeinbase(const mpz_t op, int base)
    int mpz_sgn(const mpz_t op)
    void mpz_init(mpz_t x)
    void mpz_clear(mpz_t x)


cdef extern from "_core/kernels.hpp" namespace "pbk":
    cdef cppclass Z:
        mpz_t v
    ctypedef vector[Z] ZVec
    void c_lattice_step "pbk::lattice_step"(const ZVec& A, const ZVec& B, cbool minus,
                                            ZVec& oA, ZVec& oB) except + nogil
    void c_lattice_leaf_plus "pbk::lattice_leaf_plus"(const ZVec& A, const ZVec& B,
                                                      cbool minus, mpz_t result) except + nogil
    void c_grid_step "pbk::grid_step"(const ZVec& m, const ZVec& t, unsigned K, cbool minus,
                                      cbool down, size_t Q, cbool pin, ZVec& om,
                                      ZVec& ot) except + nogil
    void c_grid_quantize "pbk::grid_quantize"(ZVec& m, ZVec& t, unsigned K, cbool down,
                                              size_t Q, cbool pin) except + nogil
    cdef cppclass SCJob:
        const uint8_t* frozen_mask
        const uint8_t* frozen_vals
        const uint8_t* truth
        cbool genie
        uint8_t* u
        int64_t* errors
    void sc_rec(const SCJob& job, const double* th, size_t n, size_t lo, double* scratch,
                uint8_t* x) nogil


cdef void _to_mpz(object x, mpz_t out) except *:
    if x < 0:
        raise ValueError("kernels take nonnegative integers")
    cdef bytes raw = x.to_bytes((x.bit_length() + 7) // 8, "big")
    mpz_import(out, len(raw), 1, 1, 1, 0, <const char*>raw)


cdef object _from_mpz(const mpz_t x):
    if mpz_sgn(x) == 0:
        return 0
    cdef size_t nbytes = (mpz_sizeinbase(x, 2) + 7) // 8
    cdef bytearray buf = bytearray(nbytes)
    cdef size_t count = 0
    mpz_export(<char*>buf, &count, 1, 1, 1, 0, x)
    return int.from_bytes(buf[:count], "big")


cdef void _fill(object values, ZVec& out) except *:
    out.resize(len(values))
    cdef size_t k = 0
    for x in values:
        _to_mpz(x, out[k].v)
        k += 1


cdef list _drain(ZVec& values):
    return [_from_mpz(values[k].v) for k in range(values.size())]


cdef cbool _is_minus(str op) except *:
    if op == "-":
        return True
    if op == "+":
        return False
    raise ValueError(f"unknown operator {op!r}")


def lattice_step(A, B, str op):
    """Canonical child list of a canonical lattice list."""
    cdef ZVec a, b, oa, ob
    cdef cbool minus = _is_minus(op)
    _fill(A, a)
    _fill(B, b)
    with nogil:
        c_lattice_step(a, b, minus, oa, ob)
    return _drain(oa), _drain(ob)


def lattice_leaf_plus(A, B, str op):
    """Numerator of the M-value after ``op`` then ``+`` over ``(D**2)**2``."""
    cdef ZVec a, b
    cdef cbool minus = _is_minus(op)
    cdef mpz_t res
    _fill(A, a)
    _fill(B, b)
    mpz_init(res)
    try:
        with nogil:
            c_lattice_leaf_plus(a, b, minus, res)
        return _from_mpz(res)
    finally:
        mpz_clear(res)


def grid_step(m, t, unsigned K, str op, cbool down, size_t Q, cbool pin=True):
    """Transform, snap outward, canonicalize and quantize a grid list."""
    cdef ZVec cm, ct, om, ot
    cdef cbool minus = _is_minus(op)
    _fill(m, cm)
    _fill(t, ct)
    with nogil:
        c_grid_step(cm, ct, K, minus, down, Q, pin, om, ot)
    return _drain(om), _drain(ot)


def grid_quantize(m, t, unsigned K, cbool down, size_t Q, cbool pin):
    """Greedy merge on a canonical grid list (degrade if ``down``)."""
    cdef ZVec cm, ct
    _fill(m, cm)
    _fill(t, ct)
    with nogil:
        c_grid_quantize(cm, ct, K, down, Q, pin)
    return _drain(cm), _drain(ct)


def sc_decode_batch(theta, frozen_mask, frozen_vals, truth, cbool genie):
    """Successive-cancellation decoding of a batch of blocks.

    See ``polarber._pykernels.sc_decode_batch`` for the contract.
    """
    cdef cnp.ndarray[double, ndim=2, mode="c"] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef Py_ssize_t T = th.shape[0], N = th.shape[1]
    cdef cnp.ndarray[uint8_t, ndim=1, mode="c"] fm = np.ascontiguousarray(frozen_mask, dtype=np.uint8)
    cdef cnp.ndarray[uint8_t, ndim=2, mode="c"] fv
    cdef cnp.ndarray[uint8_t, ndim=2, mode="c"] tr
    cdef cnp.ndarray[uint8_t, ndim=2, mode="c"] u = np.zeros((T, N), dtype=np.uint8)
    cdef cnp.ndarray[int64_t, ndim=1, mode="c"] errors = np.zeros(N, dtype=np.int64)
    cdef cbool has_fv = frozen_vals is not None
    cdef cbool has_tr = truth is not None
    if genie and not has_tr:
        raise ValueError("genie decoding needs the true bits")
    if fm.shape[0] != N:
        raise ValueError("frozen mask length mismatch")
    fv = np.ascontiguousarray(frozen_vals if has_fv else np.zeros((1, 1)), dtype=np.uint8)
    tr = np.ascontiguousarray(truth if has_tr else np.zeros((1, 1)), dtype=np.uint8)
    if has_fv and (fv.shape[0] != T or fv.shape[1] != N):
        raise ValueError("frozen values shape mismatch")
    if has_tr and (tr.shape[0] != T or tr.shape[1] != N):
        raise ValueError("truth shape mismatch")
    cdef double* scratch = <double*>malloc(2 * N * sizeof(double))
    cdef uint8_t* x = <uint8_t*>malloc(N * sizeof(uint8_t))
    if scratch == NULL or x == NULL:
        free(scratch)
        free(x)
        raise MemoryError()
    cdef SCJob job
    cdef Py_ssize_t r
    job.frozen_mask = &fm[0]
    job.genie = genie
    job.errors = &errors[0]
    try:
        with nogil:
            for r in range(T):
                job.frozen_vals = &fv[r, 0] if has_fv else NULL
                job.truth = &tr[r, 0] if has_tr else NULL
                job.u = &u[r, 0]
                sc_rec(job, &th[r, 0], N, 0, scratch, x)
    finally:
        free(scratch)
        free(x)
    return u, errors
