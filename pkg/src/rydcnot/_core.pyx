# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled propagation kernels for the two-atom, nine-level joint space.

Joint basis index is 3*(control level) + (target level) with levels ordered
(qubit 0, qubit 1, Rydberg).  All kernels apply exp(-i H t) to a state
vector by dense Hermitian eigendecomposition (LAPACK zheevd); for square
pulses this is exact, and at dimension nine it beats any time stepper.
"""

from libc.math cimport cos, sin

from scipy.linalg.cython_lapack cimport zheevd

DEF N = 9


cdef int _expm_apply(double complex* a, double t,
                     double complex* psi, double complex* out) nogil:
    """out = exp(-i a t) psi for column-major Hermitian a (destroyed)."""
    cdef double w[N]
    cdef double complex work[256]
    cdef double rwork[512]
    cdef int iwork[96]
    cdef int n = N, lda = N, lwork = 256, lrwork = 512, liwork = 96, info = 0
    cdef int i, k
    cdef double complex c
    cdef double ph

    zheevd('V', 'L', &n, a, &lda, w, work, &lwork, rwork, &lrwork,
           iwork, &liwork, &info)
    if info != 0:
        return info

    cdef double complex proj[N]
    for k in range(N):
        c = 0
        for i in range(N):
            c = c + a[k * N + i].conjugate() * psi[i]
        ph = w[k] * t
        proj[k] = c * (cos(ph) - 1j * sin(ph))
    for i in range(N):
        c = 0
        for k in range(N):
            c = c + a[k * N + i] * proj[k]
        out[i] = c
    return 0


def expm_apply(double complex[:, ::1] h, double t,
               double complex[::1] psi, double complex[::1] out):
    """Apply exp(-i h t) to psi, writing the result into out.

    h must be Hermitian; only its lower triangle is read.
    """
    cdef double complex a[N * N]
    cdef int i, j, info
    for j in range(N):
        for i in range(j, N):
            a[i + N * j] = h[i, j]
    info = _expm_apply(a, t, &psi[0], &out[0])
    if info != 0:
        raise RuntimeError(f"zheevd failed with info={info}")


def apply_rydberg(double complex[::1] psi, double complex[::1] out,
                  double om_c, double om_t, double det_c, double det_t,
                  double blockade, double stark_c, double stark_t,
                  double t):
    """Square pulse on the qubit-1 <-> Rydberg transition of either atom.

    om_c/om_t couple atom levels 1<->2 with strength om/2; det_c/det_t sit
    on each atom's Rydberg projector, blockade on the doubly excited state,
    and stark_c/stark_t are diagonal energies on each atom's qubit-0 level
    (the differential light shift seen by the undriven ground state).
    """
    cdef double complex a[N * N]
    cdef int i, k, info
    for i in range(N * N):
        a[i] = 0
    for k in range(3):
        # control coupling: (1,k) <-> (2,k), lower triangle entry
        a[(6 + k) + N * (3 + k)] = 0.5 * om_c
        # target coupling: (k,1) <-> (k,2)
        a[(3 * k + 2) + N * (3 * k + 1)] = 0.5 * om_t
    for k in range(3):
        a[(6 + k) * (N + 1)] = a[(6 + k) * (N + 1)] + det_c      # control in r
        a[(3 * k + 2) * (N + 1)] = a[(3 * k + 2) * (N + 1)] + det_t
        a[k * (N + 1)] = a[k * (N + 1)] + stark_c                 # control in 0
        a[(3 * k) * (N + 1)] = a[(3 * k) * (N + 1)] + stark_t     # target in 0
    a[8 * (N + 1)] = a[8 * (N + 1)] + blockade
    info = _expm_apply(a, t, &psi[0], &out[0])
    if info != 0:
        raise RuntimeError(f"zheevd failed with info={info}")


def apply_ground(double complex[::1] psi, double complex[::1] out,
                 double om_c, double om_t, double ph_c, double ph_t,
                 double t):
    """Square pulse on the qubit 0 <-> 1 transition of either atom.

    The off-diagonal is (om/2) e^{i phase} on <0|H|1>, so a pi/2 pulse at
    phase 0 maps |1> to (|1> - i|0>)/sqrt(2).
    """
    cdef double complex a[N * N]
    cdef double complex cc, ct
    cdef int i, k, info
    for i in range(N * N):
        a[i] = 0
    # lower triangle holds <1|H|0> = (om/2) e^{-i phase}
    cc = 0.5 * om_c * (cos(ph_c) - 1j * sin(ph_c))
    ct = 0.5 * om_t * (cos(ph_t) - 1j * sin(ph_t))
    for k in range(3):
        a[(3 + k) + N * k] = cc
        a[(3 * k + 1) + N * (3 * k)] = ct
    info = _expm_apply(a, t, &psi[0], &out[0])
    if info != 0:
        raise RuntimeError(f"zheevd failed with info={info}")
