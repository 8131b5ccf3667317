use rand::Rng;
use rand_distr::StandardNormal;

use crate::dense::{matmul, qr_unpivoted, DenseMatrix};
use crate::error::{Error, Result};
use crate::sketch::RngStream;

/// Matrix with known singular values.
#[derive(Clone, Debug)]
pub struct Generated {
    pub a: DenseMatrix,
    pub sigma: Vec<f64>,
}

/// `m x n` matrix with orthonormal columns drawn from the Haar measure:
/// QR of a Gaussian matrix with the signs of `diag(R)` folded into `Q`.
pub fn haar_columns(m: usize, n: usize, rng: &RngStream) -> Result<DenseMatrix> {
    if n > m {
        return Err(Error::contract(format!("Haar basis needs m >= n, got {m}x{n}")));
    }
    let mut r = rng.rng();
    let data = (0..m * n).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
    let g = DenseMatrix::from_col_major(m, n, data)?;
    let f = qr_unpivoted(&g);
    let mut q = f.q;
    for j in 0..n {
        if f.r[(j, j)] < 0.0 {
            q.col_mut(j).iter_mut().for_each(|v| *v = -*v);
        }
    }
    Ok(q)
}

/// `d_i = beta^{(i-1)/(n-1)}`, `i = 1..n`; exactly 1 and `beta` at the ends.
pub fn fast_decay_spectrum(n: usize, beta: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i == 0 {
                1.0
            } else if i + 1 == n {
                beta
            } else {
                beta.powf(i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

/// `A = U diag(d) V^T` with Haar `U` (`m x n`), `V` (`n x n`) and the
/// geometric spectrum of [`fast_decay_spectrum`].
pub fn gen_fast_decay(m: usize, n: usize, beta: f64, rng: &RngStream) -> Result<Generated> {
    if m < n || n == 0 {
        return Err(Error::contract(format!("fast decay needs m >= n >= 1, got {m}x{n}")));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::contract(format!("fast decay needs 0 < beta <= 1, got {beta}")));
    }
    let sigma = fast_decay_spectrum(n, beta);
    let mut u = haar_columns(m, n, &rng.fork(0))?;
    let v = haar_columns(n, n, &rng.fork(1))?;
    for (j, &s) in sigma.iter().enumerate() {
        u.col_mut(j).iter_mut().for_each(|x| *x *= s);
    }
    let a = matmul(&u, &v.transpose())?;
    Ok(Generated { a, sigma })
}

/// Kahan matrix `diag(1, z, .., z^{n-1}) K` where `K` is unit upper
/// triangular with `-phi` above the diagonal and `z^2 + phi^2 = 1`.
pub fn gen_kahan(n: usize, zeta: f64) -> Result<DenseMatrix> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::contract(format!("Kahan needs 0 < zeta < 1, got {zeta}")));
    }
    let phi = (1.0 - zeta * zeta).sqrt();
    let scale: Vec<f64> = (0..n).map(|i| zeta.powi(i as i32)).collect();
    Ok(DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => scale[i],
        std::cmp::Ordering::Less => -scale[i] * phi,
        std::cmp::Ordering::Greater => 0.0,
    }))
}

/// Worst case for partial pivoting growth: unit diagonal, `-1` strictly
/// below it, last column all ones. Every pivot search ties, so no rows
/// move, and the last column of `U` doubles at each step to `2^{n-1}`.
pub fn gen_chan(n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, j| {
        if j + 1 == n || i == j {
            1.0
        } else if i > j {
            -1.0
        } else {
            0.0
        }
    })
}

/// Unit lower triangular with `-1` strictly below the diagonal.
pub fn gen_chan_lower(n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Greater => -1.0,
        std::cmp::Ordering::Less => 0.0,
    })
}

/// `G1 G2` with Gaussian `m x r` and `r x n` factors: rank exactly `r`
/// with probability one.
pub fn gen_exact_rank(m: usize, n: usize, r: usize, rng: &RngStream) -> Result<DenseMatrix> {
    if r > m.min(n) {
        return Err(Error::contract(format!("rank {r} exceeds min({m}, {n})")));
    }
    let mut g = rng.rng();
    let mut draw = |rows: usize, cols: usize| {
        let data = (0..rows * cols).map(|_| g.sample::<f64, _>(StandardNormal)).collect();
        DenseMatrix::from_col_major(rows, cols, data)
    };
    let left = draw(m, r)?;
    let right = draw(r, n)?;
    matmul(&left, &right)
}

/// `m x n` standard Gaussian matrix.
pub fn gen_gaussian(m: usize, n: usize, rng: &RngStream) -> DenseMatrix {
    let mut g = rng.rng();
    let data = (0..m * n).map(|_| g.sample::<f64, _>(StandardNormal)).collect();
    DenseMatrix::from_col_major(m, n, data).expect("length matches shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{gemm, Op};

    #[test]
    fn kahan_small_case() {
        let z: f64 = 0.99;
        let phi = (1.0 - z * z).sqrt();
        assert!((phi - 0.141_067_359_796_658_8).abs() < 1e-15);
        let a = gen_kahan(3, z).unwrap();
        assert_eq!(a[(0, 0)], 1.0);
        assert_eq!(a[(2, 2)], z * z);
        assert_eq!(a[(0, 1)], -phi);
        assert_eq!(a[(0, 2)], -phi);
        assert_eq!(a[(1, 2)], -z * phi);
        assert_eq!(a[(2, 0)], 0.0);
    }

    #[test]
    fn chan_shapes() {
        let c = gen_chan(3);
        assert_eq!(c, DenseMatrix::from_rows(&[[1.0, 0.0, 1.0], [-1.0, 1.0, 1.0], [-1.0, -1.0, 1.0]]));
        assert_eq!(gen_chan_lower(2), DenseMatrix::from_rows(&[[1.0, 0.0], [-1.0, 1.0]]));
        assert_eq!(gen_chan(1), DenseMatrix::identity(1));
    }

    #[test]
    fn haar_columns_are_orthonormal() {
        let q = haar_columns(20, 7, &RngStream::new(3, 0)).unwrap();
        let g = gemm(&q, Op::Trans, &q, Op::NoTrans).unwrap();
        assert!(g.distance(&DenseMatrix::identity(7)).unwrap() < 1e-13);
    }

    #[test]
    fn spectrum_endpoints_exact() {
        let d = fast_decay_spectrum(50, 1e-16);
        assert_eq!(d[0], 1.0);
        assert_eq!(d[49], 1e-16);
        assert!(d.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(fast_decay_spectrum(1, 0.5), vec![1.0]);
        assert!(gen_fast_decay(3, 4, 0.5, &RngStream::new(0, 0)).is_err());
        assert!(gen_fast_decay(4, 4, 0.0, &RngStream::new(0, 0)).is_err());
    }
}
