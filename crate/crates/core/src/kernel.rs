//! Cache-blocked word matrix product.
//!
//! All packed variants reduce to `C = A * B` over `u64` words where the exact
//! result is known to fit (or only its low bits matter), so the kernel uses
//! wrapping arithmetic and no reductions.

use crate::par::Exec;

/// Tile edge for the i, l and j loops.
pub const BLOCK: usize = 64;

/// Row-major `m x k` times `k x n`, wrapping modulo `2^64`.
pub fn gemm_wrapping(a: &[u64], b: &[u64], m: usize, k: usize, n: usize, exec: Exec) -> Vec<u64> {
    assert_eq!(a.len(), m * k, "left operand shape");
    assert_eq!(b.len(), k * n, "right operand shape");
    let mut c = vec![0u64; m * n];
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    exec.for_each_chunk_mut(&mut c, BLOCK * n, |blk, c_rows| {
        let i0 = blk * BLOCK;
        for l0 in (0..k).step_by(BLOCK) {
            let l1 = (l0 + BLOCK).min(k);
            for j0 in (0..n).step_by(BLOCK) {
                let j1 = (j0 + BLOCK).min(n);
                for (ii, c_row) in c_rows.chunks_mut(n).enumerate() {
                    let a_row = &a[(i0 + ii) * k..(i0 + ii + 1) * k];
                    let c_seg = &mut c_row[j0..j1];
                    for (l, &x) in a_row.iter().enumerate().take(l1).skip(l0) {
                        if x == 0 {
                            continue;
                        }
                        let b_seg = &b[l * n + j0..l * n + j1];
                        for (cv, &bv) in c_seg.iter_mut().zip(b_seg) {
                            *cv = cv.wrapping_add(x.wrapping_mul(bv));
                        }
                    }
                }
            }
        }
    });
    c
}
