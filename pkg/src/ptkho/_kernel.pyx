# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""FFTW-backed inner loop for the split-step propagator.

Operates on complex128 arrays in FFT (natural) order: index 0 is m=0.
Coordinate-space tables are rescaled by 1/n once at set_tables time so the
unnormalized FFTW backward/forward round trip comes out normalized, matching
the numpy reference kernel to round-off.
"""

from libc.string cimport memcpy


cdef extern from "fftw3.h" nogil:
    ctypedef double fftw_complex[2]
    ctypedef struct fftw_plan_s:
        pass
    ctypedef fftw_plan_s *fftw_plan
    void *fftw_malloc(size_t n)
    void fftw_free(void *p)
    fftw_plan fftw_plan_dft_1d(int n, fftw_complex *inp, fftw_complex *out,
                               int sign, unsigned flags)
    void fftw_execute(fftw_plan p)
    void fftw_destroy_plan(fftw_plan p)


DEF FFTW_FORWARD = -1
DEF FFTW_BACKWARD = 1
# FFTW_ESTIMATE picks the plan without timing trials, so plan choice (and
# therefore the exact floating-point result) is reproducible run to run.
DEF FFTW_ESTIMATE = 64

name = "fftw"


cdef class SpectralKernel:
    """One planned in-place transform pair plus the four phase tables."""

    cdef Py_ssize_t n
    cdef double complex *buf
    cdef double complex *kick
    cdef double complex *kin_half
    cdef double complex *kin_full
    cdef double complex *pot
    cdef fftw_plan fwd
    cdef fftw_plan bwd
    cdef bint tables_ready

    def __cinit__(self, Py_ssize_t size):
        if size < 2:
            raise ValueError("kernel size must be >= 2")
        self.n = size
        self.buf = <double complex *> fftw_malloc(size * sizeof(double complex))
        self.kick = <double complex *> fftw_malloc(size * sizeof(double complex))
        self.kin_half = <double complex *> fftw_malloc(size * sizeof(double complex))
        self.kin_full = <double complex *> fftw_malloc(size * sizeof(double complex))
        self.pot = <double complex *> fftw_malloc(size * sizeof(double complex))
        if (self.buf == NULL or self.kick == NULL or self.kin_half == NULL
                or self.kin_full == NULL or self.pot == NULL):
            raise MemoryError("fftw_malloc failed")
        # Planning mutates FFTW global state; holding the GIL here serializes
        # concurrent constructions.
        self.fwd = fftw_plan_dft_1d(<int> size, <fftw_complex *> self.buf,
                                    <fftw_complex *> self.buf,
                                    FFTW_FORWARD, FFTW_ESTIMATE)
        self.bwd = fftw_plan_dft_1d(<int> size, <fftw_complex *> self.buf,
                                    <fftw_complex *> self.buf,
                                    FFTW_BACKWARD, FFTW_ESTIMATE)
        if self.fwd == NULL or self.bwd == NULL:
            raise RuntimeError("FFTW planning failed")
        self.tables_ready = False

    def __dealloc__(self):
        if self.fwd != NULL:
            fftw_destroy_plan(self.fwd)
        if self.bwd != NULL:
            fftw_destroy_plan(self.bwd)
        if self.buf != NULL:
            fftw_free(self.buf)
        if self.kick != NULL:
            fftw_free(self.kick)
        if self.kin_half != NULL:
            fftw_free(self.kin_half)
        if self.kin_full != NULL:
            fftw_free(self.kin_full)
        if self.pot != NULL:
            fftw_free(self.pot)

    @property
    def size(self):
        return self.n

    def set_tables(self, double complex[::1] kick, double complex[::1] kin_half,
                   double complex[::1] kin_full, double complex[::1] pot):
        """Load phase tables (FFT order). kick/pot are coordinate-space."""
        cdef Py_ssize_t i
        cdef double inv_n = 1.0 / self.n
        if (kick.shape[0] != self.n or kin_half.shape[0] != self.n
                or kin_full.shape[0] != self.n or pot.shape[0] != self.n):
            raise ValueError("table length does not match kernel size")
        for i in range(self.n):
            self.kick[i] = kick[i] * inv_n
            self.kin_half[i] = kin_half[i]
            self.kin_full[i] = kin_full[i]
            self.pot[i] = pot[i] * inv_n
        self.tables_ready = True

    cdef void _require_state(self, double complex[::1] psi) except *:
        if not self.tables_ready:
            raise RuntimeError("set_tables must be called before applying steps")
        if psi.shape[0] != self.n:
            raise ValueError("state length does not match kernel size")

    def apply_kick(self, double complex[::1] psi):
        """psi <- F[ kick(theta) * F^-1[psi] ], in place."""
        cdef Py_ssize_t i
        self._require_state(psi)
        with nogil:
            memcpy(self.buf, &psi[0], self.n * sizeof(double complex))
            fftw_execute(self.bwd)
            for i in range(self.n):
                self.buf[i] = self.buf[i] * self.kick[i]
            fftw_execute(self.fwd)
            memcpy(&psi[0], self.buf, self.n * sizeof(double complex))

    def apply_harmonic(self, double complex[::1] psi, Py_ssize_t substeps):
        """One full harmonic interval via Strang splitting, in place.

        Half kinetic phases at the ends, with interior half-half pairs merged
        into full steps.
        """
        cdef Py_ssize_t i, s
        self._require_state(psi)
        if substeps < 1:
            raise ValueError("substeps must be >= 1")
        with nogil:
            memcpy(self.buf, &psi[0], self.n * sizeof(double complex))
            for i in range(self.n):
                self.buf[i] = self.buf[i] * self.kin_half[i]
            for s in range(substeps):
                fftw_execute(self.bwd)
                for i in range(self.n):
                    self.buf[i] = self.buf[i] * self.pot[i]
                fftw_execute(self.fwd)
                if s < substeps - 1:
                    for i in range(self.n):
                        self.buf[i] = self.buf[i] * self.kin_full[i]
                else:
                    for i in range(self.n):
                        self.buf[i] = self.buf[i] * self.kin_half[i]
            memcpy(&psi[0], self.buf, self.n * sizeof(double complex))
