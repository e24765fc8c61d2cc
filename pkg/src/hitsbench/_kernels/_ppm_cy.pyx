# distutils: language = c++
# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled PPM context model; the hot kernel behind the PPM verifier.

Must stay semantically identical to _ppm_py.ContextModel (method C escapes,
byte alphabet, static scoring). Supports context orders 1..7 so a context
plus its order tag packs into one 64-bit key.
"""

from cython.operator cimport dereference as deref
from libc.math cimport log2
from libc.stdint cimport int64_t, uint64_t
from libcpp.unordered_map cimport unordered_map

ctypedef unordered_map[int, int64_t] SymCounts
ctypedef unordered_map[uint64_t, SymCounts] CountMap
ctypedef unordered_map[uint64_t, int64_t] TotalMap


cdef inline uint64_t _key(const unsigned char* data, Py_ssize_t pos, int k) noexcept nogil:
    cdef uint64_t key = (<uint64_t> k) << 56
    cdef int i
    for i in range(k):
        key |= (<uint64_t> data[pos - k + i]) << (8 * i)
    return key


cdef class ContextModel:
    cdef CountMap counts
    cdef TotalMap totals
    cdef readonly int order

    def __init__(self, bytes text, int order):
        if order < 1 or order > 7:
            raise ValueError(f"compiled kernel supports order in [1, 7], got {order}")
        if len(text) == 0:
            raise ValueError("context text must be nonempty")
        self.order = order
        self._build(text)

    cdef void _build(self, bytes text):
        cdef const unsigned char* data = text
        cdef Py_ssize_t n = len(text)
        cdef Py_ssize_t pos
        cdef int k, kmax, sym
        cdef uint64_t key
        for pos in range(n):
            sym = data[pos]
            kmax = self.order if pos >= self.order else <int> pos
            for k in range(kmax + 1):
                key = _key(data, pos, k)
                self.counts[key][sym] = self.counts[key][sym] + 1
                self.totals[key] = self.totals[key] + 1

    cpdef double score(self, bytes target):
        """Average bits per byte of target under the frozen model."""
        cdef const unsigned char* data = target
        cdef Py_ssize_t n = len(target)
        if n == 0:
            raise ValueError("target text must be nonempty")
        cdef double total_bits = 0.0
        cdef double logp, denom
        cdef Py_ssize_t pos
        cdef int k, kmax, sym
        cdef bint matched
        cdef uint64_t key
        cdef CountMap.iterator it
        cdef SymCounts.iterator sit
        for pos in range(n):
            sym = data[pos]
            logp = 0.0
            matched = False
            kmax = self.order if pos >= self.order else <int> pos
            for k in range(kmax, -1, -1):
                key = _key(data, pos, k)
                it = self.counts.find(key)
                if it == self.counts.end():
                    continue
                denom = <double> (self.totals[key] + <int64_t> deref(it).second.size())
                sit = deref(it).second.find(sym)
                if sit != deref(it).second.end():
                    logp += log2((<double> deref(sit).second) / denom)
                    matched = True
                    break
                logp += log2((<double> deref(it).second.size()) / denom)
            if not matched:
                logp += -8.0  # log2(1/256)
            total_bits -= logp
        return total_bits / n
