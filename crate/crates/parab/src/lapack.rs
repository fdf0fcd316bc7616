//! Minimal LAPACK bindings for the plain-binary64 numeric steps (collocation
//! solves and midpoint-matrix diagonalization). Nothing rigorous happens
//! here; every output is re-verified by interval arithmetic downstream.

use num_complex::Complex64;

use crate::{Error, Result};

extern "C" {
    fn zgesv_(
        n: *const i32,
        nrhs: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        ipiv: *mut i32,
        b: *mut Complex64,
        ldb: *const i32,
        info: *mut i32,
    );
    fn zgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        w: *mut Complex64,
        vl: *mut Complex64,
        ldvl: *const i32,
        vr: *mut Complex64,
        ldvr: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
}

/// Solve A X = B with A n×n column-major (destroyed) and B n×nrhs
/// column-major (overwritten by the solution). `domain` only labels errors.
pub(crate) fn solve_in_place(
    a: &mut [Complex64],
    b: &mut [Complex64],
    n: usize,
    domain: usize,
) -> Result<()> {
    assert_eq!(a.len(), n * n);
    assert!(!b.is_empty() && b.len() % n == 0);
    let nrhs = (b.len() / n) as i32;
    let ni = n as i32;
    let mut ipiv = vec![0i32; n];
    let mut info = 0i32;
    unsafe {
        zgesv_(
            &ni,
            &nrhs,
            a.as_mut_ptr(),
            &ni,
            ipiv.as_mut_ptr(),
            b.as_mut_ptr(),
            &ni,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::SolverFailure {
            domain,
            reason: format!("dense linear solve failed (zgesv info = {info})"),
        });
    }
    Ok(())
}

/// Eigen-decomposition of a general complex matrix (row-major input).
/// Returns the eigenvalues and the right eigenvectors as a column-major
/// matrix whose j-th column is the eigenvector of w\[j\].
pub(crate) fn eigen(
    a_row_major: &[Complex64],
    n: usize,
    domain: usize,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    assert_eq!(a_row_major.len(), n * n);
    let ni = n as i32;
    // Transpose to column-major.
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in 0..n {
            a[c * n + r] = a_row_major[r * n + c];
        }
    }
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut vr = vec![Complex64::new(0.0, 0.0); n * n];
    let mut rwork = vec![0.0f64; 2 * n];
    let mut info = 0i32;
    let (jobvl, jobvr) = (b'N', b'V');
    // Workspace query, then the real call.
    let mut work_len = -1i32;
    let mut probe = [Complex64::new(0.0, 0.0)];
    unsafe {
        zgeev_(
            &jobvl,
            &jobvr,
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            vr.as_mut_ptr(),
            &ni,
            probe.as_mut_ptr(),
            &work_len,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Diagonalization {
            domain,
            reason: format!("zgeev workspace query failed ({info})"),
        });
    }
    work_len = probe[0].re as i32;
    let mut work = vec![Complex64::new(0.0, 0.0); work_len.max(1) as usize];
    unsafe {
        zgeev_(
            &jobvl,
            &jobvr,
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            vr.as_mut_ptr(),
            &ni,
            work.as_mut_ptr(),
            &work_len,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Diagonalization {
            domain,
            reason: format!("zgeev failed (info = {info})"),
        });
    }
    Ok((w, vr))
}
