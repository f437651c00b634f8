# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Semantics mirror ``_kernels_py`` exactly (bit-identical)."""

import numpy as np
from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free


cdef enum:
    LEAF = -1


cdef inline uint64_t splitmix_next(uint64_t* state) noexcept nogil:
    state[0] += <uint64_t>0x9E3779B97F4A7C15ULL
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef void merge_sort(int64_t* order, int64_t* tmp, const double* key, Py_ssize_t n) noexcept nogil:
    # stable bottom-up merge sort of order[0:n] by key[order[i]]
    cdef Py_ssize_t width = 1, i, lo, mid, hi, a, b, k
    cdef int64_t* src = order
    cdef int64_t* dst = tmp
    cdef int64_t* swap
    while width < n:
        i = 0
        while i < n:
            lo = i
            mid = i + width
            if mid > n:
                mid = n
            hi = i + 2 * width
            if hi > n:
                hi = n
            a = lo
            b = mid
            k = lo
            while a < mid and b < hi:
                if key[src[b]] < key[src[a]]:
                    dst[k] = src[b]
                    b += 1
                else:
                    dst[k] = src[a]
                    a += 1
                k += 1
            while a < mid:
                dst[k] = src[a]
                a += 1
                k += 1
            while b < hi:
                dst[k] = src[b]
                b += 1
                k += 1
            i += 2 * width
        swap = src
        src = dst
        dst = swap
        width *= 2
    if src != order:
        for i in range(n):
            order[i] = src[i]


cdef class _Builder:
    # Every feature keeps its own value-sorted list of sample slots; a split
    # stably partitions all of them, so no sorting happens below the root.
    # Ties stay in slot order, matching a stable argsort of the node's samples.
    cdef const double[:, ::1] X
    cdef const double[::1] y
    cdef int64_t[::1] samples
    cdef int max_depth, min_split, min_leaf, max_features, d
    cdef Py_ssize_t m
    cdef uint64_t state
    cdef list feature, threshold, left, right, value, counts
    cdef double* cbuf
    cdef int64_t* slots      # node's slots in original order, partitioned stably
    cdef int64_t* sorted_    # d arrays of length m, slots sorted by feature value
    cdef int64_t* tmp
    cdef int64_t* perm
    cdef char* goes_left

    def __cinit__(self):
        self.cbuf = NULL
        self.slots = NULL
        self.sorted_ = NULL
        self.tmp = NULL
        self.perm = NULL
        self.goes_left = NULL

    def __dealloc__(self):
        free(self.cbuf)
        free(self.slots)
        free(self.sorted_)
        free(self.tmp)
        free(self.perm)
        free(self.goes_left)

    cdef inline double xval(self, int64_t slot, int f) noexcept nogil:
        return self.X[self.samples[slot], f]

    cdef void presort(self) noexcept nogil:
        cdef Py_ssize_t k, f, m = self.m
        cdef double* key = <double*>malloc(max(m, 1) * sizeof(double))
        for f in range(self.d):
            for k in range(m):
                key[k] = self.X[self.samples[k], f]
                self.sorted_[f * m + k] = k
            merge_sort(self.sorted_ + f * m, self.tmp, key, m)
        free(key)

    cdef void partition(self, int64_t* arr, Py_ssize_t start, Py_ssize_t end) noexcept nogil:
        cdef Py_ssize_t i, nl = 0, j = 0
        cdef int64_t r
        for i in range(start, end):
            r = arr[i]
            if self.goes_left[r]:
                arr[start + nl] = r
                nl += 1
            else:
                self.tmp[j] = r
                j += 1
        for i in range(j):
            arr[start + nl + i] = self.tmp[i]

    cdef int grow(self, Py_ssize_t start, Py_ssize_t end, int depth) except -2:
        cdef Py_ssize_t n = end - start, i, j, p, nf, fi, n_left
        cdef int node = len(self.feature)
        cdef double lo, hi, s, v, yv, best = -np.inf, best_t = 0.0, t, sl, sr, nl, proxy, total, xa, xb
        cdef int best_f = -1, f
        cdef int64_t tmpi
        cdef int64_t* srt

        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)

        lo = self.y[self.samples[self.slots[start]]]
        hi = lo
        s = 0.0
        for i in range(start, end):
            yv = self.y[self.samples[self.slots[i]]]
            s += yv
            if yv < lo:
                lo = yv
            if yv > hi:
                hi = yv
        v = s / n
        if v < lo:
            v = lo
        if v > hi:
            v = hi
        self.value.append(v)
        self.counts.append(n)
        if depth >= self.max_depth or n < self.min_split or n < 2 * self.min_leaf or lo == hi:
            return node

        # feature subset, sorted ascending
        nf = self.d
        for i in range(self.d):
            self.perm[i] = i
        if self.max_features < self.d:
            for i in range(self.max_features):
                j = i + <Py_ssize_t>(splitmix_next(&self.state) % <uint64_t>(self.d - i))
                tmpi = self.perm[i]
                self.perm[i] = self.perm[j]
                self.perm[j] = tmpi
            nf = self.max_features
            for i in range(1, nf):
                tmpi = self.perm[i]
                j = i - 1
                while j >= 0 and self.perm[j] > tmpi:
                    self.perm[j + 1] = self.perm[j]
                    j -= 1
                self.perm[j + 1] = tmpi

        with nogil:
            for fi in range(nf):
                f = <int>self.perm[fi]
                srt = self.sorted_ + f * self.m + start
                s = 0.0
                for i in range(n):
                    s += self.y[self.samples[srt[i]]]
                    self.cbuf[i] = s
                total = self.cbuf[n - 1]
                for p in range(self.min_leaf - 1, n - self.min_leaf):
                    xa = self.xval(srt[p], f)
                    xb = self.xval(srt[p + 1], f)
                    if not (xa < xb):
                        continue
                    nl = <double>(p + 1)
                    sl = self.cbuf[p]
                    sr = total - sl
                    proxy = sl * sl / nl + sr * sr / (n - nl)
                    if proxy > best:
                        best = proxy
                        t = (xa + xb) / 2.0
                        if t == xb:
                            t = xa
                        best_f = f
                        best_t = t
        if best_f < 0:
            return node

        n_left = 0
        for i in range(start, end):
            if self.xval(self.slots[i], best_f) <= best_t:
                self.goes_left[self.slots[i]] = 1
                n_left += 1
            else:
                self.goes_left[self.slots[i]] = 0
        self.partition(self.slots, start, end)
        for f in range(self.d):
            self.partition(self.sorted_ + f * self.m, start, end)

        self.feature[node] = best_f
        self.threshold[node] = best_t
        self.left[node] = self.grow(start, start + n_left, depth + 1)
        self.right[node] = self.grow(start + n_left, end, depth + 1)
        return node


def build_tree(X, y, samples, int max_depth, int min_samples_split, int min_samples_leaf,
               int max_features, seed):
    cdef _Builder b = _Builder()
    cdef Py_ssize_t m, k
    b.X = np.ascontiguousarray(X, dtype=np.float64)
    b.y = np.ascontiguousarray(y, dtype=np.float64)
    b.samples = np.array(samples, dtype=np.int64)
    m = b.samples.shape[0]
    b.m = m
    b.d = b.X.shape[1]
    b.max_depth = max_depth
    b.min_split = min_samples_split
    b.min_leaf = min_samples_leaf
    b.max_features = max_features
    b.state = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    b.feature, b.threshold, b.left, b.right, b.value, b.counts = [], [], [], [], [], []
    b.cbuf = <double*>malloc(max(m, 1) * sizeof(double))
    b.slots = <int64_t*>malloc(max(m, 1) * sizeof(int64_t))
    b.sorted_ = <int64_t*>malloc(max(m * b.d, 1) * sizeof(int64_t))
    b.tmp = <int64_t*>malloc(max(m, b.d, 1) * sizeof(int64_t))
    b.perm = <int64_t*>malloc(max(b.d, 1) * sizeof(int64_t))
    b.goes_left = <char*>malloc(max(m, 1) * sizeof(char))
    if not (b.cbuf and b.slots and b.sorted_ and b.tmp and b.perm and b.goes_left):
        raise MemoryError()
    for k in range(m):
        b.slots[k] = k
    b.presort()
    b.grow(0, m, 0)
    return (
        np.array(b.feature, dtype=np.int32),
        np.array(b.threshold, dtype=np.float64),
        np.array(b.left, dtype=np.int32),
        np.array(b.right, dtype=np.int32),
        np.array(b.value, dtype=np.float64),
        np.array(b.counts, dtype=np.int64),
    )


def predict_sum(X, feature, threshold, left, right, value, offsets):
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const int[::1] fv = np.ascontiguousarray(feature, dtype=np.int32)
    cdef const double[::1] tv = np.ascontiguousarray(threshold, dtype=np.float64)
    cdef const int[::1] lv = np.ascontiguousarray(left, dtype=np.int32)
    cdef const int[::1] rv = np.ascontiguousarray(right, dtype=np.int32)
    cdef const double[::1] vv = np.ascontiguousarray(value, dtype=np.float64)
    cdef const int64_t[::1] ov = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef Py_ssize_t m = Xv.shape[0], n_trees = ov.shape[0] - 1, i, t
    cdef int64_t base, node
    out = np.zeros(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef double acc
    with nogil:
        for i in range(m):
            acc = 0.0
            for t in range(n_trees):
                base = ov[t]
                node = 0
                while fv[base + node] != LEAF:
                    if Xv[i, fv[base + node]] <= tv[base + node]:
                        node = lv[base + node]
                    else:
                        node = rv[base + node]
                acc = acc + vv[base + node]
            o[i] = acc
    return out


def bootstrap_counts(a, b, indices):
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef const int64_t[:, ::1] iv = np.ascontiguousarray(indices, dtype=np.int64)
    cdef Py_ssize_t B = iv.shape[0], n = iv.shape[1], r, k
    cdef double sa, sb
    cdef int64_t gt = 0, lt = 0, tie = 0
    with nogil:
        for r in range(B):
            sa = 0.0
            sb = 0.0
            for k in range(n):
                sa = sa + av[iv[r, k]]
                sb = sb + bv[iv[r, k]]
            if sa > sb:
                gt += 1
            elif sa < sb:
                lt += 1
            else:
                tie += 1
    return int(gt), int(lt), int(tie)
