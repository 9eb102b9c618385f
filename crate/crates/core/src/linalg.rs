//! Thin safe wrappers over `matrixmultiply` for contiguous row-major buffers.

use num_complex::Complex64;

/// `C = A B` with `A` (m×k), `B` (k×n), all row-major.
pub fn dgemm(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * n];
    dgemm_into(1.0, a, false, b, false, 0.0, &mut c, m, k, n);
    c
}

/// `C = alpha op(A) op(B) + beta C` where `op` optionally transposes. The
/// shapes `m, k, n` refer to `op(A)` (m×k) and `op(B)` (k×n); buffers are
/// row-major in their stored (untransposed) layout.
#[allow(clippy::too_many_arguments)]
pub fn dgemm_into(
    alpha: f64,
    a: &[f64],
    a_t: bool,
    b: &[f64],
    b_t: bool,
    beta: f64,
    c: &mut [f64],
    m: usize,
    k: usize,
    n: usize,
) {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), k * n);
    assert_eq!(c.len(), m * n);
    let (rsa, csa) = if a_t { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_t { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: the strides describe exactly the asserted buffer extents.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Complex `C = A B`, all row-major.
pub fn zgemm(a: &[Complex64], b: &[Complex64], m: usize, k: usize, n: usize) -> Vec<Complex64> {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), k * n);
    let mut c = vec![Complex64::new(0.0, 0.0); m * n];
    // SAFETY: Complex64 is repr(C) { re, im }, layout-identical to [f64; 2];
    // strides match the asserted extents.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr().cast(),
            k as isize,
            1,
            b.as_ptr().cast(),
            n as isize,
            1,
            [0.0, 0.0],
            c.as_mut_ptr().cast(),
            n as isize,
            1,
        );
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_products() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]; // 2x3
        let b = [1.0, 0.0, 0.0, 1.0, 1.0, 1.0]; // 3x2
        assert_eq!(dgemm(&a, &b, 2, 3, 2), vec![4.0, 5.0, 10.0, 11.0]);
        // A^T (3x2) * [1,1]^T-ish 2x1
        let mut c = vec![0.0; 3];
        dgemm_into(1.0, &a, true, &[1.0, 1.0], false, 0.0, &mut c, 3, 2, 1);
        assert_eq!(c, vec![5.0, 7.0, 9.0]);
        let i = Complex64::new(0.0, 1.0);
        let z = zgemm(&[i, Complex64::new(1.0, 0.0)], &[i, i], 1, 2, 1);
        assert_eq!(z[0], Complex64::new(-1.0, 1.0));
    }
}
