//! Dense continuous-time Lyapunov solver (Bartels-Stewart on the real Schur
//! form) and diagonal balancing.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::models::HURWITZ_MARGIN;

/// Residual tolerance relative to `max(1, |Q|_max)`.
pub const LYAPUNOV_RTOL: f64 = 1e-8;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 10_000;

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// `|X A + A^T X + Q|_max`.
pub fn lyapunov_residual(x: &DMatrix<f64>, a: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    let xa = x * a;
    max_abs(&(&xa + xa.transpose() + q))
}

/// Solves `X A + A^T X + Q = 0` for Hurwitz `A` and symmetric `Q`.
///
/// The returned `X` is exactly symmetric. Fails with `NotHurwitz` when an
/// eigenvalue of `A` has real part `>= -1e-9`, and with `Convergence` when
/// the residual exceeds `1e-8 * max(1, |Q|_max)`.
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || q.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, Q is {}x{}",
            a.nrows(),
            a.ncols(),
            q.nrows(),
            q.ncols()
        )));
    }
    let q_scale = max_abs(q).max(1.0);
    if max_abs(&(q - q.transpose())) > 1e-12 * q_scale {
        return Err(Error::InvalidParameter("Q must be symmetric".into()));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }

    let (basis, t) = a
        .clone()
        .try_schur(SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or(Error::SchurFailed)?
        .unpack();
    let blocks = diagonal_blocks(&t);

    let max_real = blocks
        .iter()
        .flat_map(|&(s, len)| {
            t.view((s, s), (len, len))
                .into_owned()
                .complex_eigenvalues()
                .iter()
                .map(|z| z.re)
                .collect::<Vec<_>>()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    if max_real >= -HURWITZ_MARGIN {
        return Err(Error::NotHurwitz { max_real });
    }

    // With A = U T U^T and X = U Y U^T: T^T Y + Y T = -U^T Q U.
    let rhs = -(basis.transpose() * q * &basis);
    let y = solve_quasi_triangular(&t, &rhs, &blocks)?;
    let x = &basis * y * basis.transpose();
    let x = (&x + x.transpose()) * 0.5;

    let residual = lyapunov_residual(&x, a, q);
    let tolerance = LYAPUNOV_RTOL * q_scale;
    if !(residual <= tolerance) {
        return Err(Error::Convergence {
            residual,
            tolerance,
        });
    }
    Ok(x)
}

/// `(start, size)` of the diagonal blocks of a quasi-upper-triangular matrix.
fn diagonal_blocks(t: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let n = t.nrows();
    let scale = max_abs(t).max(f64::MIN_POSITIVE);
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 0..n {
        let coupled = i + 1 < n && t[(i + 1, i)].abs() > 1e-14 * scale;
        if !coupled {
            blocks.push((start, i + 1 - start));
            start = i + 1;
        }
    }
    blocks
}

/// Block back-substitution for `T^T Y + Y T = F` with `T` quasi-upper-triangular.
fn solve_quasi_triangular(
    t: &DMatrix<f64>,
    f: &DMatrix<f64>,
    blocks: &[(usize, usize)],
) -> Result<DMatrix<f64>> {
    let n = t.nrows();
    let mut y = DMatrix::<f64>::zeros(n, n);
    for &(cj, qj) in blocks {
        // Contributions from already solved block columns: F_{:,J} - Y_{:,<J} T_{<J,J}.
        let mut g = f.columns(cj, qj).into_owned();
        if cj > 0 {
            g -= y.columns(0, cj) * t.view((0, cj), (cj, qj));
        }
        for &(ri, pi) in blocks {
            let mut rhs = g.rows(ri, pi).into_owned();
            if ri > 0 {
                rhs -= t.view((0, ri), (ri, pi)).transpose() * y.view((0, cj), (ri, qj));
            }
            let t_ii = t.view((ri, ri), (pi, pi)).into_owned();
            let t_jj = t.view((cj, cj), (qj, qj)).into_owned();
            let block = solve_small_sylvester(&t_ii, &t_jj, &rhs)?;
            y.view_mut((ri, cj), (pi, qj)).copy_from(&block);
        }
    }
    Ok(y)
}

/// `T_ii^T Z + Z T_jj = R` through its Kronecker form.
fn solve_small_sylvester(
    t_ii: &DMatrix<f64>,
    t_jj: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let (p, q) = r.shape();
    if p == 1 && q == 1 {
        let denom = t_ii[(0, 0)] + t_jj[(0, 0)];
        return Ok(DMatrix::from_element(1, 1, r[(0, 0)] / denom));
    }
    let mut sys = DMatrix::<f64>::zeros(p * q, p * q);
    // vec(T_ii^T Z) = (I_q kron T_ii^T) vec Z; vec(Z T_jj) = (T_jj^T kron I_p) vec Z.
    for col in 0..q {
        for i in 0..p {
            for k in 0..p {
                sys[(col * p + i, col * p + k)] += t_ii[(k, i)];
            }
        }
    }
    for col in 0..q {
        for k in 0..q {
            for i in 0..p {
                sys[(col * p + i, k * p + i)] += t_jj[(k, col)];
            }
        }
    }
    let rhs = DVector::from_column_slice(r.as_slice());
    let z = sys.lu().solve(&rhs).ok_or(Error::SchurFailed)?;
    Ok(DMatrix::from_column_slice(p, q, z.as_slice()))
}

/// Diagonal power-of-two balancing: returns `d` such that
/// `D^{-1} A D` (with `D = diag(d)`) has comparable row and column norms.
pub fn balance(a: &DMatrix<f64>) -> DVector<f64> {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let mut work = a.clone();
    let mut d = DVector::from_element(n, 1.0);
    for _sweep in 0..100 {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += work[(j, i)].abs();
                    r += work[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                d[i] *= f;
                for j in 0..n {
                    work[(i, j)] /= f;
                    work[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scalar() {
        let x = solve_lyapunov(
            &DMatrix::from_element(1, 1, -1.0),
            &DMatrix::from_element(1, 1, 1.0),
        )
        .unwrap();
        assert!((x[(0, 0)] - 0.5).abs() < 1e-15);
        let x = solve_lyapunov(
            &DMatrix::from_element(1, 1, -4.0),
            &DMatrix::from_element(1, 1, 2.0),
        )
        .unwrap();
        assert!((x[(0, 0)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn negative_identity() {
        let n = 6;
        let x =
            solve_lyapunov(&-DMatrix::identity(n, n), &(DMatrix::identity(n, n) * 2.0)).unwrap();
        assert!((x - DMatrix::identity(n, n)).amax() < 1e-14);
    }

    #[test]
    fn unstable_is_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(matches!(
            solve_lyapunov(&a, &DMatrix::identity(2, 2)),
            Err(Error::NotHurwitz { .. })
        ));
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, -1.0]);
        assert!(matches!(
            solve_lyapunov(&a, &DMatrix::identity(2, 2)),
            Err(Error::NotHurwitz { .. })
        ));
    }

    #[test]
    fn asymmetric_q_is_rejected() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(solve_lyapunov(&-DMatrix::identity(2, 2), &q).is_err());
    }

    #[test]
    fn oscillatory_two_by_two_matches_kronecker_solve() {
        let a = DMatrix::from_row_slice(2, 2, &[-0.1, 2.0, -3.0, -0.2]);
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]);
        let x = solve_lyapunov(&a, &q).unwrap();
        // oracle: (I kron A^T + A^T kron I) vec X = -vec Q
        let at = a.transpose();
        let i2 = DMatrix::<f64>::identity(2, 2);
        let kron = i2.kronecker(&at) + at.kronecker(&i2);
        let vx = kron
            .lu()
            .solve(&-DVector::from_column_slice(q.as_slice()))
            .unwrap();
        for (got, want) in x.iter().zip(vx.iter()) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    fn random_stable(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        // shift by the spectral abscissa bound to make it Hurwitz
        let shift = m.iter().map(|v: &f64| v.abs()).sum::<f64>() / n as f64;
        m - DMatrix::identity(n, n) * (shift + 0.1)
    }

    #[test]
    fn random_stable_residual_and_structure() {
        for seed in 0..5 {
            let a = random_stable(8, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let c = DMatrix::from_fn(3, 8, |_, _| rng.random_range(-1.0..1.0));
            let q = c.transpose() * &c;
            let x = solve_lyapunov(&a, &q).unwrap();
            assert!(lyapunov_residual(&x, &a, &q) <= 1e-8 * max_abs(&q).max(1.0));
            assert!((&x - x.transpose()).amax() <= 1e-12);
            let min_eig = x.clone().symmetric_eigenvalues().min();
            assert!(min_eig >= -1e-10);
        }
    }

    #[test]
    fn balancing_is_a_power_of_two_similarity() {
        let a = DMatrix::from_row_slice(3, 3, &[-1.0, 1e6, 0.0, 1e-6, -2.0, 1.0, 0.0, 3.0, -1e3]);
        let d = balance(&a);
        for v in d.iter() {
            assert_eq!(v.log2().fract(), 0.0);
        }
        let dm = DMatrix::from_diagonal(&d);
        let dinv = DMatrix::from_diagonal(&d.map(|x| 1.0 / x));
        let ab = &dinv * &a * &dm;
        assert!(max_abs(&ab) < max_abs(&a));
        let ev = |m: &DMatrix<f64>| {
            let mut v: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.re).collect();
            v.sort_by(|a, b| a.total_cmp(b));
            v
        };
        for (x, y) in ev(&a).iter().zip(ev(&ab)) {
            assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }
}
