//! Dense `C = A·B + beta·C` for the jet passes.
//!
//! When `B` has unit column stride and the CPU has AVX-512, an 8×16
//! register-blocked kernel runs directly on the operands: `A` is read through
//! broadcasts at any stride and ragged edges use masked loads and stores.
//! Each entry of `C` then accumulates its `k` products in index order. Other
//! layouts go to `matrixmultiply`, which packs strided `B` more cheaply.

/// `C = A·B + beta·C`; `C` is row-major with row stride `rsc`. `beta = 0`
/// overwrites `C` without reading it.
#[allow(clippy::too_many_arguments)]
pub(super) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    rsa: usize,
    csa: usize,
    b: &[f64],
    rsb: usize,
    csb: usize,
    beta: f64,
    c: &mut [f64],
    rsc: usize,
) {
    if m == 0 || n == 0 {
        return;
    }
    assert!(k == 0 || (m - 1) * rsa + (k - 1) * csa < a.len());
    assert!(k == 0 || (k - 1) * rsb + (n - 1) * csb < b.len());
    assert!((m - 1) * rsc + (n - 1) < c.len());

    #[cfg(target_arch = "x86_64")]
    if (csb == 1 || n == 1) && std::arch::is_x86_feature_detected!("avx512f") {
        // SAFETY: feature detected above; the asserts bound every index.
        unsafe { avx512::gemm(m, k, n, a.as_ptr(), rsa, csa, b.as_ptr(), rsb, beta, c.as_mut_ptr(), rsc) };
        return;
    }

    // SAFETY: the asserts above bound every index the kernel touches.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            rsc as isize,
            1,
        );
    }
}

#[cfg(target_arch = "x86_64")]
mod avx512 {
    use std::arch::x86_64::*;

    const MR: usize = 8;
    const NR: usize = 16;

    fn mask(w: usize) -> __mmask8 {
        ((1u16 << w.min(8)) - 1) as __mmask8
    }

    /// Row-major `B` with row stride `rsb`.
    #[allow(clippy::too_many_arguments)]
    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        a: *const f64,
        rsa: usize,
        csa: usize,
        b: *const f64,
        rsb: usize,
        beta: f64,
        c: *mut f64,
        rsc: usize,
    ) {
        let mut j0 = 0;
        while j0 < n {
            let w = (n - j0).min(NR);
            let (m0, m1) = (mask(w), mask(w.saturating_sub(8)));
            let bj = b.wrapping_add(j0);
            let cj = c.wrapping_add(j0);
            let mut i0 = 0;
            macro_rules! rows {
                ($r:literal) => {
                    if w > 8 {
                        block::<$r, 2>(
                            k,
                            a.wrapping_add(i0 * rsa),
                            rsa,
                            csa,
                            bj,
                            rsb,
                            m0,
                            m1,
                            beta,
                            cj.wrapping_add(i0 * rsc),
                            rsc,
                        )
                    } else {
                        block::<$r, 1>(
                            k,
                            a.wrapping_add(i0 * rsa),
                            rsa,
                            csa,
                            bj,
                            rsb,
                            m0,
                            m1,
                            beta,
                            cj.wrapping_add(i0 * rsc),
                            rsc,
                        )
                    }
                };
            }
            while i0 + MR <= m {
                rows!(8);
                i0 += MR;
            }
            match m - i0 {
                0 => {}
                1 => rows!(1),
                2 => rows!(2),
                3 => rows!(3),
                4 => rows!(4),
                5 => rows!(5),
                6 => rows!(6),
                _ => rows!(7),
            }
            j0 += NR;
        }
    }

    /// `R` rows by `NV` vectors of eight columns.
    #[allow(clippy::too_many_arguments)]
    #[inline]
    #[target_feature(enable = "avx512f")]
    unsafe fn block<const R: usize, const NV: usize>(
        k: usize,
        a: *const f64,
        rsa: usize,
        csa: usize,
        b: *const f64,
        rsb: usize,
        m0: __mmask8,
        m1: __mmask8,
        beta: f64,
        c: *mut f64,
        rsc: usize,
    ) {
        let masks = [m0, m1];
        let mut acc = [[_mm512_setzero_pd(); NV]; R];
        for p in 0..k {
            let bp = b.wrapping_add(p * rsb);
            let mut bv = [_mm512_setzero_pd(); NV];
            for (v, slot) in bv.iter_mut().enumerate() {
                *slot = _mm512_maskz_loadu_pd(masks[v], bp.wrapping_add(8 * v));
            }
            let ap = a.wrapping_add(p * csa);
            for (r, row) in acc.iter_mut().enumerate() {
                let av = _mm512_set1_pd(*ap.add(r * rsa));
                for v in 0..NV {
                    row[v] = _mm512_fmadd_pd(av, bv[v], row[v]);
                }
            }
        }
        let bb = _mm512_set1_pd(beta);
        for (r, row) in acc.iter().enumerate() {
            let cr = c.wrapping_add(r * rsc);
            for v in 0..NV {
                let ptr = cr.wrapping_add(8 * v);
                let out = if beta == 0.0 {
                    row[v]
                } else {
                    _mm512_fmadd_pd(bb, _mm512_maskz_loadu_pd(masks[v], ptr), row[v])
                };
                _mm512_mask_storeu_pd(ptr, masks[v], out);
            }
        }
    }
}
