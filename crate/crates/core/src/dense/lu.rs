//! LU factorization with partial (row) pivoting.
//!
//! The one-shot factorization is blocked right-looking: each panel of
//! [`PANEL`] columns is factored with rank-1 updates, then the trailing
//! matrix is updated with a triangular solve and a single product. Pivot
//! choices are made column by column, so any blocking (including the
//! incremental [`BlockedLu`]) selects the same rows.

use crate::error::{Error, Result};

use super::blas::{self, gemm_acc, triangular_solve, Diag, Op, Side, Uplo};
use super::{DenseMatrix, Permutation};

const PANEL: usize = 32;

/// `P A = L U` for an `m x k` matrix with `m >= k`.
#[derive(Clone, Debug)]
pub struct LuFactors {
    /// Unit lower-trapezoidal, `m x k`.
    pub l: DenseMatrix,
    /// Upper triangular, `k x k`.
    pub u: DenseMatrix,
    /// `perm[i]` is the original row placed at position `i`.
    pub perm: Permutation,
}

impl LuFactors {
    pub fn rank(&self) -> usize {
        self.u.rows()
    }

    pub fn product(&self) -> DenseMatrix {
        blas::matmul(&self.l, &self.u).expect("factor shapes agree")
    }

    /// `|| A(perm, 0..k) - L U ||_F`
    pub fn residual(&self, a: &DenseMatrix) -> Result<f64> {
        let pa = self.perm.apply_rows(&a.columns(0..self.rank()))?;
        pa.distance(&self.product())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ZeroPivot {
    /// Stop at the first all-zero pivot column.
    Stop,
    /// Record it and move on without eliminating (LAPACK `getrf` semantics).
    Skip,
}

struct InPlace {
    swaps: Vec<usize>,
    first_zero: Option<usize>,
    factored: usize,
}

/// Factors `buf` (column-major, `m x n`, leading dimension `m`) in place.
fn factor_in_place(buf: &mut [f64], m: usize, n: usize, policy: ZeroPivot) -> InPlace {
    let ld = m;
    let kmax = m.min(n);
    let mut swaps = Vec::with_capacity(kmax);
    let mut first_zero = None;

    let mut j0 = 0;
    while j0 < kmax {
        let jb = PANEL.min(kmax - j0);
        let jend = j0 + jb;

        // Panel: columns j0..jend, rank-1 updates restricted to the panel.
        let mut stopped_at = None;
        for j in j0..jend {
            let col = &buf[j * ld..(j + 1) * ld];
            let mut p = j;
            let mut best = col[j].abs();
            for (i, v) in col.iter().enumerate().skip(j + 1) {
                // strict comparison: the lowest index wins ties
                if v.abs() > best {
                    best = v.abs();
                    p = i;
                }
            }
            if best == 0.0 {
                first_zero.get_or_insert(j);
                if policy == ZeroPivot::Stop {
                    stopped_at = Some(j);
                    break;
                }
                swaps.push(j);
                continue;
            }
            swaps.push(p);
            if p != j {
                for c in j0..jend {
                    buf.swap(j + c * ld, p + c * ld);
                }
            }
            let (left, right) = buf.split_at_mut((j + 1) * ld);
            let lcol = &mut left[j * ld..];
            let pivot = lcol[j];
            let inv = 1.0 / pivot;
            for v in &mut lcol[j + 1..m] {
                *v *= inv;
            }
            let lcol = &lcol[j + 1..m];
            for c in (j + 1)..jend {
                let cc = &mut right[(c - j - 1) * ld..(c - j) * ld];
                let ujc = cc[j];
                if ujc != 0.0 {
                    for (a, &l) in cc[j + 1..m].iter_mut().zip(lcol) {
                        *a -= l * ujc;
                    }
                }
            }
        }

        let done = stopped_at.unwrap_or(jend);
        // Apply this panel's interchanges to the columns left of the panel.
        for j in j0..done {
            let p = swaps[j];
            if p != j {
                for c in 0..j0 {
                    buf.swap(j + c * ld, p + c * ld);
                }
            }
        }
        if let Some(j) = stopped_at {
            return InPlace {
                swaps,
                first_zero,
                factored: j,
            };
        }
        if jend < n {
            // ... and to the columns right of it.
            for j in j0..jend {
                let p = swaps[j];
                if p != j {
                    for c in jend..n {
                        buf.swap(j + c * ld, p + c * ld);
                    }
                }
            }
            let (left, right) = buf.split_at_mut(jend * ld);
            let ncols = n - jend;
            // U12 <- L11^{-1} A12 (unit lower, forward substitution)
            for c in 0..ncols {
                let cc = &mut right[c * ld..(c + 1) * ld];
                for j in j0..jend {
                    let x = cc[j];
                    if x != 0.0 {
                        let lcol = &left[j * ld + j + 1..j * ld + jend];
                        for (a, &l) in cc[j + 1..jend].iter_mut().zip(lcol) {
                            *a -= l * x;
                        }
                    }
                }
            }
            // A22 <- A22 - L21 U12
            if jend < m {
                let mut u12 = Vec::with_capacity(jb * ncols);
                for c in 0..ncols {
                    u12.extend_from_slice(&right[c * ld + j0..c * ld + jend]);
                }
                blas::gemm_sub_block(
                    m - jend,
                    ncols,
                    jb,
                    &left[j0 * ld + jend..],
                    ld,
                    &u12,
                    jb,
                    &mut right[jend..],
                    ld,
                );
            }
        }
        j0 = jend;
    }
    InPlace {
        swaps,
        first_zero,
        factored: kmax,
    }
}

fn extract(buf: &[f64], m: usize, k: usize, swaps: &[usize]) -> LuFactors {
    let l = DenseMatrix::from_fn(m, k, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => 0.0,
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Greater => buf[i + j * m],
    });
    let u = DenseMatrix::from_fn(k, k, |i, j| if i <= j { buf[i + j * m] } else { 0.0 });
    LuFactors {
        l,
        u,
        perm: Permutation::from_swaps(swaps, m),
    }
}

fn check_input(a: &DenseMatrix) -> Result<()> {
    if a.rows() < a.cols() {
        return Err(Error::contract(format!(
            "lupp needs rows >= cols, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::contract("lupp input has non-finite entries"));
    }
    Ok(())
}

/// LU with partial pivoting of all columns of `a` (`rows >= cols`).
///
/// Fails with [`Error::RankDeficient`] at the first step whose pivot
/// candidates are all exactly zero.
pub fn lupp(a: &DenseMatrix) -> Result<LuFactors> {
    let (lu, zero) = lupp_partial(a)?;
    match zero {
        Some(step) => Err(Error::RankDeficient { step }),
        None => Ok(lu),
    }
}

/// Like [`lupp`], but on a zero pivot column returns the factorization of
/// the leading columns that succeeded together with the failing step.
pub fn lupp_partial(a: &DenseMatrix) -> Result<(LuFactors, Option<usize>)> {
    check_input(a)?;
    let (m, n) = a.shape();
    let mut buf = a.as_slice().to_vec();
    let out = factor_in_place(&mut buf, m, n, ZeroPivot::Stop);
    let lu = extract(&buf, m, out.factored, &out.swaps);
    Ok((lu, out.first_zero))
}

/// Factors every column, leaving a zero on the diagonal of `U` where a
/// pivot column was identically zero.
pub fn lupp_allow_singular(a: &DenseMatrix) -> Result<LuFactors> {
    check_input(a)?;
    let (m, n) = a.shape();
    let mut buf = a.as_slice().to_vec();
    let out = factor_in_place(&mut buf, m, n, ZeroPivot::Skip);
    Ok(extract(&buf, m, out.factored, &out.swaps))
}

/// `max|U| / max|A|`
pub fn growth_factor(a: &DenseMatrix, lu: &LuFactors) -> f64 {
    lu.u.max_abs() / a.max_abs()
}

/// Schur complement of a new block of sample columns against the current
/// factorization.
#[derive(Clone, Debug)]
pub struct SchurBlock {
    /// `L1^{-1} (P Y)(0..k, :)`
    pub u2: DenseMatrix,
    /// `(P Y)(k.., :) - L2 U2`
    pub s: DenseMatrix,
}

impl SchurBlock {
    pub fn norm(&self) -> f64 {
        self.s.frobenius_norm()
    }
}

/// Result of absorbing a Schur block into a [`BlockedLu`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Absorbed {
    /// Columns actually added to the factorization.
    pub added: usize,
    /// Global elimination step of the zero pivot that cut the block short.
    pub zero_pivot: Option<usize>,
}

/// Partially pivoted LU of a sample matrix that grows by column blocks.
///
/// Maintains `Y(perm, :) = [L1; L2] U1` for the accumulated sample `Y`.
/// `L` is kept as one `m x k` matrix whose first `k` rows are `L1`.
#[derive(Clone, Debug)]
pub struct BlockedLu {
    l: DenseMatrix,
    u: DenseMatrix,
    perm: Permutation,
    sample: DenseMatrix,
}

impl BlockedLu {
    pub fn new(m: usize) -> Self {
        BlockedLu {
            l: DenseMatrix::zeros(m, 0),
            u: DenseMatrix::zeros(0, 0),
            perm: Permutation::identity(m),
            sample: DenseMatrix::zeros(m, 0),
        }
    }

    pub fn rows(&self) -> usize {
        self.l.rows()
    }

    pub fn rank(&self) -> usize {
        self.u.rows()
    }

    pub fn l(&self) -> &DenseMatrix {
        &self.l
    }

    pub fn l1(&self) -> DenseMatrix {
        let k = self.rank();
        self.l.block(0..k, 0..k)
    }

    pub fn l2(&self) -> DenseMatrix {
        let k = self.rank();
        self.l.block(k..self.rows(), 0..k)
    }

    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn sample(&self) -> &DenseMatrix {
        &self.sample
    }

    /// Row indices of the first `rank()` pivots.
    pub fn pivot_rows(&self) -> &[usize] {
        &self.perm.as_slice()[..self.rank()]
    }

    pub fn to_factors(&self) -> LuFactors {
        LuFactors {
            l: self.l.clone(),
            u: self.u.clone(),
            perm: self.perm.clone(),
        }
    }

    /// Schur complement of `y` (an `m x b` sample block) with respect to the
    /// current factorization. Does not modify the state.
    pub fn schur(&self, y: &DenseMatrix) -> Result<SchurBlock> {
        let m = self.rows();
        if y.rows() != m {
            return Err(Error::dims(
                "schur",
                format!("sample block has {} rows, state has {m}", y.rows()),
            ));
        }
        let k = self.rank();
        let py = self.perm.apply_rows(y)?;
        let top = py.block(0..k, 0..y.cols());
        let mut s = py.block(k..m, 0..y.cols());
        let u2 = triangular_solve(&self.l1(), &top, Side::Left, Uplo::Lower, Op::NoTrans, Diag::Unit)?;
        gemm_acc(-1.0, &self.l2(), Op::NoTrans, &u2, Op::NoTrans, 1.0, &mut s)?;
        Ok(SchurBlock { u2, s })
    }

    /// Extends the factorization by the columns of `y`, producing exactly
    /// the pivots that one-shot [`lupp`] of `[sample | y]` would.
    ///
    /// Returns the Frobenius norm of the Schur block. On a zero pivot the
    /// state is left untouched and [`Error::RankDeficient`] is returned.
    pub fn extend(&mut self, y: &DenseMatrix) -> Result<f64> {
        let schur = self.schur(y)?;
        let norm = schur.norm();
        let (lu, zero) = self.factor_schur(&schur)?;
        if let Some(step) = zero {
            return Err(Error::RankDeficient {
                step: self.rank() + step,
            });
        }
        self.commit(&schur, lu, y);
        Ok(norm)
    }

    /// Absorbs a previously computed Schur block for `y`, truncating at the
    /// first zero pivot instead of failing.
    pub fn absorb(&mut self, schur: &SchurBlock, y: &DenseMatrix) -> Result<Absorbed> {
        if schur.s.cols() != y.cols() || schur.u2.rows() != self.rank() {
            return Err(Error::dims(
                "absorb",
                "Schur block does not belong to this state and sample",
            ));
        }
        let (lu, zero) = self.factor_schur(schur)?;
        let added = lu.rank();
        let zero_pivot = zero.map(|z| self.rank() + z);
        self.commit(schur, lu, y);
        Ok(Absorbed { added, zero_pivot })
    }

    fn factor_schur(&self, schur: &SchurBlock) -> Result<(LuFactors, Option<usize>)> {
        if schur.s.rows() < schur.s.cols() {
            return Err(Error::contract(format!(
                "cannot extend rank {} by {} columns with only {} rows",
                self.rank(),
                schur.s.cols(),
                self.rows()
            )));
        }
        lupp_partial(&schur.s)
    }

    fn commit(&mut self, schur: &SchurBlock, lu: LuFactors, y: &DenseMatrix) {
        let m = self.rows();
        let k = self.rank();
        let j = lu.rank();

        self.perm.compose_trailing(k, &lu.perm);
        let inner = lu.perm.as_slice();
        let mut tmp = vec![0.0; m - k];
        for c in 0..k {
            let col = self.l.col_mut(c);
            for (t, &p) in tmp.iter_mut().zip(inner) {
                *t = col[k + p];
            }
            col[k..].copy_from_slice(&tmp);
        }
        let mut new_l = DenseMatrix::zeros(m, j);
        new_l.set_block(k, 0, &lu.l);
        self.l.append_cols(&new_l).expect("row counts agree");

        let mut u = DenseMatrix::zeros(k + j, k + j);
        u.set_block(0, 0, &self.u);
        u.set_block(0, k, &schur.u2.columns(0..j));
        u.set_block(k, k, &lu.u);
        self.u = u;

        self.sample
            .append_cols(&y.columns(0..j))
            .expect("row counts agree");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo_random(m: usize, n: usize, seed: u64) -> DenseMatrix {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        DenseMatrix::from_fn(m, n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn identity_factors_trivially() {
        let lu = lupp(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(lu.l, DenseMatrix::identity(3));
        assert_eq!(lu.u, DenseMatrix::identity(3));
        assert_eq!(lu.perm, Permutation::identity(3));
    }

    #[test]
    fn two_by_two_by_hand() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        let lu = lupp(&a).unwrap();
        assert_eq!(lu.perm.as_slice(), &[1, 0]);
        assert_eq!(lu.l[(1, 0)], 1.0 / 3.0);
        assert_eq!(lu.l[(0, 0)], 1.0);
        assert_eq!(lu.l[(0, 1)], 0.0);
        assert_eq!(lu.u[(0, 0)], 3.0);
        assert_eq!(lu.u[(0, 1)], 4.0);
        assert_eq!(lu.u[(1, 0)], 0.0);
        assert!((lu.u[(1, 1)] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn duplicated_column_is_rank_deficient() {
        // Columns 0 and 2 coincide; the remainder has full rank.
        let a = DenseMatrix::from_rows(&[
            [1.0, 2.0, 1.0],
            [0.0, 1.0, 0.0],
            [3.0, 0.0, 3.0],
            [1.0, 1.0, 1.0],
        ]);
        let err = lupp(&a).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { step: 2 }));
        let (partial, zero) = lupp_partial(&a).unwrap();
        assert_eq!(zero, Some(2));
        assert_eq!(partial.rank(), 2);
        assert!(partial.residual(&a).unwrap() < 1e-14);
    }

    #[test]
    fn singular_policy_keeps_going() {
        let a = DenseMatrix::from_rows(&[[0.0, 1.0], [0.0, 2.0], [0.0, 3.0]]);
        let lu = lupp_allow_singular(&a).unwrap();
        assert_eq!(lu.u[(0, 0)], 0.0);
        assert!(lu.residual(&a).unwrap() < 1e-15);
    }

    #[test]
    fn rejects_wide_input() {
        assert!(matches!(
            lupp(&DenseMatrix::zeros(2, 3)),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn blocked_panels_match_tall_reconstruction() {
        // wider than one panel to exercise the trailing update
        let a = pseudo_random(150, 90, 7);
        let lu = lupp(&a).unwrap();
        assert!(lu.residual(&a).unwrap() <= 1e-12 * a.frobenius_norm() * 150.0);
        for j in 0..90 {
            for i in (j + 1)..150 {
                assert!(lu.l[(i, j)].abs() <= 1.0 + 16.0 * f64::EPSILON);
            }
        }
    }

    #[test]
    fn empty_state_extend_equals_lupp() {
        let y = pseudo_random(20, 5, 3);
        let mut st = BlockedLu::new(20);
        st.extend(&y).unwrap();
        let lu = lupp(&y).unwrap();
        assert_eq!(st.perm(), &lu.perm);
        assert_eq!(st.l(), &lu.l);
        assert_eq!(st.u(), &lu.u);
    }

    #[test]
    fn two_blocks_match_one_shot() {
        let y = pseudo_random(64, 8, 11);
        let mut st = BlockedLu::new(64);
        st.extend(&y.columns(0..4)).unwrap();
        st.extend(&y.columns(4..8)).unwrap();
        let lu = lupp(&y).unwrap();
        assert_eq!(st.perm(), &lu.perm);
        assert!(st.l().distance(&lu.l).unwrap() <= 1e-12 * lu.l.frobenius_norm());
        assert!(st.u().distance(&lu.u).unwrap() <= 1e-12 * lu.u.frobenius_norm());
        assert_eq!(st.sample(), &y);
    }

    #[test]
    fn absorb_truncates_at_zero_pivot() {
        let mut y = pseudo_random(10, 4, 5);
        // an exactly zero column leaves an exactly zero Schur column
        y.col_mut(3).fill(0.0);
        let mut st = BlockedLu::new(10);
        st.extend(&y.columns(0..2)).unwrap();
        let block = y.columns(2..4);
        let mut strict = st.clone();
        assert!(matches!(
            strict.extend(&block),
            Err(Error::RankDeficient { step: 3 })
        ));
        assert_eq!(strict.rank(), 2);
        let schur = st.schur(&block).unwrap();
        let out = st.absorb(&schur, &block).unwrap();
        assert_eq!(out, Absorbed { added: 1, zero_pivot: Some(3) });
        assert_eq!(st.rank(), 3);
    }
}
