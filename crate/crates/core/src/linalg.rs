//! Dense complex linear algebra used throughout the crate.
//!
//! Thin wrappers over `nalgebra` factorizations (SVD, Hermitian eigen,
//! Schur, LU, Padé exponential) plus the matrix functions that are not
//! available there: the principal logarithm, logarithms of unitaries and
//! Hermitian functional calculus.

use nalgebra::{Complex, DMatrix, DVector, Schur};

use crate::error::{KreinError, Result};

pub type C64 = Complex<f64>;
pub type Mat = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn eye(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> Mat {
    Mat::zeros(rows, cols)
}

/// Builds a complex matrix from real row-major entries.
pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> Mat {
    assert_eq!(data.len(), rows * cols);
    Mat::from_fn(rows, cols, |i, j| r(data[i * cols + j]))
}

pub fn is_finite(a: &Mat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn to_faer(a: &Mat) -> faer::Mat<C64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(a: faer::MatRef<'_, C64>) -> Mat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Thin SVD with singular values sorted in decreasing order.
///
/// Returns `(u, s, v)` with `a = u diag(s) v*`, `u` m×r, `v` n×r,
/// r = min(m, n).
pub fn svd(a: &Mat) -> (Mat, Vec<f64>, Mat) {
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return (zeros(m, 0), Vec::new(), zeros(n, 0));
    }
    let svd = to_faer(a).thin_svd().expect("SVD did not converge");
    let s = svd.S().column_vector();
    let values = (0..k).map(|i| s[i].re).collect();
    (from_faer(svd.U()), values, from_faer(svd.V()))
}

pub fn singular_values(a: &Mat) -> Vec<f64> {
    let (m, n) = a.shape();
    if m.min(n) == 0 {
        return Vec::new();
    }
    to_faer(a).singular_values().expect("SVD did not converge")
}

/// Operator 2-norm (largest singular value); zero for empty matrices.
pub fn op_norm(a: &Mat) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

pub fn smallest_singular_value(a: &Mat) -> f64 {
    singular_values(a).last().copied().unwrap_or(f64::INFINITY)
}

/// Orthonormal basis of the column space, keeping singular values above
/// `threshold`.
pub fn column_space(a: &Mat, threshold: f64) -> Mat {
    let (u, s, _) = svd(a);
    let rank = s.iter().filter(|&&x| x > threshold).count();
    u.columns(0, rank).into_owned()
}

pub fn rank(a: &Mat, threshold: f64) -> usize {
    singular_values(a).iter().filter(|&&x| x > threshold).count()
}

/// Orthonormal basis of the right null space `{y : a y = 0}`.
pub fn null_space(a: &Mat, threshold: f64) -> Mat {
    let (m, n) = a.shape();
    if n == 0 {
        return zeros(0, 0);
    }
    if m == 0 {
        return eye(n);
    }
    // pad with zero rows so the thin SVD returns a full n×n right factor
    let padded = if m < n {
        let mut p = zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let (_, s, v) = svd(&padded);
    let rank = s.iter().filter(|&&x| x > threshold).count();
    v.columns(rank, n - rank).into_owned()
}

/// Orthonormal basis of the Hilbert orthogonal complement of the span of
/// the orthonormal columns of `b` inside ℂⁿ.
pub fn orth_complement(b: &Mat) -> Mat {
    let n = b.nrows();
    if b.ncols() == 0 {
        return eye(n);
    }
    null_space(&b.adjoint(), 0.5)
}

/// Orthogonal projection onto the span of orthonormal columns.
pub fn orth_projector(basis: &Mat) -> Mat {
    basis * basis.adjoint()
}

/// Hermitian eigendecomposition, eigenvalues ascending.
pub fn herm_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let h = (a + a.adjoint()) * r(0.5);
    let eig = to_faer(&h)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigensolver did not converge");
    let s = eig.S().column_vector();
    ((0..n).map(|i| s[i].re).collect(), from_faer(eig.U()))
}

/// `f(A)` for Hermitian `A` through its spectral decomposition.
pub fn herm_map(a: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let (vals, vecs) = herm_eigen(a);
    let d = DVector::from_iterator(vals.len(), vals.iter().map(|&x| r(f(x))));
    &vecs * Mat::from_diagonal(&d) * vecs.adjoint()
}

pub fn inverse(a: &Mat, what: &'static str) -> Result<Mat> {
    if a.nrows() != a.ncols() {
        return Err(KreinError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.nrows() == 0 {
        return Ok(zeros(0, 0));
    }
    let inv = a.clone().lu().try_inverse().ok_or(KreinError::Singular(what))?;
    if !is_finite(&inv) {
        return Err(KreinError::Singular(what));
    }
    Ok(inv)
}

/// Moore–Penrose pseudo-inverse with singular-value cut at `threshold`.
pub fn pinv(a: &Mat, threshold: f64) -> Mat {
    let (u, s, v) = svd(a);
    let mut out = zeros(a.ncols(), a.nrows());
    for (j, &sj) in s.iter().enumerate() {
        if sj > threshold {
            out += v.column(j) * u.column(j).adjoint() * r(1.0 / sj);
        }
    }
    out
}

/// Matrix exponential (scaling and squaring with Padé approximants).
pub fn expm(a: &Mat) -> Mat {
    if a.nrows() == 0 {
        return zeros(0, 0);
    }
    a.exp()
}

/// Complex Schur form `A = Z T Z*`. The QR iteration occasionally stalls on
/// matrices with clustered spectra, so failed attempts are retried on a
/// fixed unitary rotation of `A` with a looser deflation tolerance.
fn schur(a: &Mat) -> Result<(Mat, Mat)> {
    let n = a.nrows();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for (attempt, eps) in [1.0, 8.0, 64.0, 512.0].into_iter().enumerate() {
        let w = if attempt == 0 {
            eye(n)
        } else {
            let h = Mat::from_fn(n, n, |i, j| {
                let x = ((i * 7 + j * 3 + attempt) as f64).sin();
                let y = ((i * 5 + j * 11 + 2 * attempt) as f64).cos();
                c(x, y)
            });
            expm(&((&h - h.adjoint()) * r(0.5)))
        };
        let rotated = w.adjoint() * a * &w;
        if let Some(s) = Schur::try_new(rotated, eps * f64::EPSILON, 10_000) {
            let (z, t) = s.unpack();
            let z = w * z;
            if (&z * &t * z.adjoint() - a).norm() <= 1e-12 * scale {
                return Ok((z, t));
            }
        }
    }
    Err(KreinError::Numerical("Schur decomposition did not converge"))
}

/// Principal square root of an upper triangular matrix (Björck–Hammarling
/// recurrence). Diagonal entries use the principal complex square root.
fn sqrt_upper(t: &Mat) -> Mat {
    let n = t.nrows();
    let mut s = zeros(n, n);
    for j in 0..n {
        s[(j, j)] = t[(j, j)].sqrt();
        for i in (0..j).rev() {
            let mut acc = t[(i, j)];
            for k in (i + 1)..j {
                acc -= s[(i, k)] * s[(k, j)];
            }
            s[(i, j)] = acc / (s[(i, i)] + s[(j, j)]);
        }
    }
    s
}

/// Gauss–Legendre nodes and weights on [0, 1], 10 points.
fn gauss_legendre_unit() -> [(f64, f64); 10] {
    const X: [f64; 5] = [
        0.148_874_338_981_631_2,
        0.433_395_394_129_247_2,
        0.679_409_568_299_024_4,
        0.865_063_366_688_984_5,
        0.973_906_528_517_171_7,
    ];
    const W: [f64; 5] = [
        0.295_524_224_714_752_9,
        0.269_266_719_309_996_4,
        0.219_086_362_515_982,
        0.149_451_349_150_580_6,
        0.066_671_344_308_688_1,
    ];
    let mut out = [(0.0, 0.0); 10];
    for i in 0..5 {
        out[2 * i] = (0.5 * (1.0 - X[i]), 0.5 * W[i]);
        out[2 * i + 1] = (0.5 * (1.0 + X[i]), 0.5 * W[i]);
    }
    out
}

/// Principal matrix logarithm by Schur reduction and inverse scaling and
/// squaring.
///
/// The triangular factor is square-rooted until it is within 0.25 of the
/// identity, then `log(I + X) = ∫₀¹ X (I + sX)⁻¹ ds` is evaluated with
/// 10-point Gauss–Legendre quadrature (the diagonal [10/10] Padé
/// approximant). Fails if the spectrum touches the closed negative real
/// axis.
pub fn logm_principal(a: &Mat) -> Result<Mat> {
    let n = a.nrows();
    if n == 0 {
        return Ok(zeros(0, 0));
    }
    let (z, mut t) = schur(a)?;
    for i in 0..n {
        let lambda = t[(i, i)];
        if lambda.norm() == 0.0 || (lambda.im.abs() <= f64::EPSILON * lambda.norm() && lambda.re < 0.0)
        {
            return Err(KreinError::Numerical(
                "principal logarithm undefined: eigenvalue on the closed negative real axis",
            ));
        }
    }
    let id = eye(n);
    let mut squarings = 0;
    while (&t - &id).lp_norm(1) > 0.25 {
        if squarings >= 64 {
            return Err(KreinError::Numerical("logarithm: square-root iteration stalled"));
        }
        t = sqrt_upper(&t);
        squarings += 1;
    }
    let x = &t - &id;
    let mut log = zeros(n, n);
    for (node, weight) in gauss_legendre_unit() {
        let m = &id + &x * r(node);
        let solved = m
            .lu()
            .solve(&x)
            .ok_or(KreinError::Numerical("logarithm: singular quadrature system"))?;
        log += solved * r(weight);
    }
    let scale = r(2f64.powi(squarings));
    Ok(&z * log * z.adjoint() * scale)
}

/// Antihermitian logarithm of a unitary matrix: eigen-phases are taken in
/// (−π, π], so an eigenvalue at −1 maps to phase π.
pub fn log_unitary(v: &Mat) -> Result<Mat> {
    let n = v.nrows();
    if n == 0 {
        return Ok(zeros(0, 0));
    }
    let (z, t) = schur(v)?;
    let phases = DVector::from_iterator(
        n,
        (0..n).map(|i| {
            let lambda = t[(i, i)];
            let mut theta = lambda.im.atan2(lambda.re);
            if theta <= -std::f64::consts::PI + 1e-15 {
                theta = std::f64::consts::PI;
            }
            c(0.0, theta)
        }),
    );
    Ok(&z * Mat::from_diagonal(&phases) * z.adjoint())
}

/// Unitary factor of the polar decomposition `S = U |S|` (equivalently
/// `U = |S*|⁻¹ S` for invertible `S`).
pub fn polar_unitary(s: &Mat) -> Mat {
    let (u, _, v) = svd(s);
    u * v.adjoint()
}

/// Principal angles (radians, ascending) between the spans of two
/// orthonormal bases.
pub fn principal_angles(a: &Mat, b: &Mat) -> Vec<f64> {
    let cross = a.adjoint() * b;
    let mut angles: Vec<f64> = singular_values(&cross)
        .into_iter()
        .map(|s| s.clamp(0.0, 1.0).acos())
        .collect();
    angles.sort_by(|x, y| x.total_cmp(y));
    angles
}

/// Gap between the spans of two orthonormal bases: ‖P_a − P_b‖. Equals the
/// sine of the largest principal angle when dimensions agree, and 1 when
/// they differ.
pub fn subspace_gap(a: &Mat, b: &Mat) -> f64 {
    op_norm(&(orth_projector(a) - orth_projector(b)))
}

/// Horizontal concatenation `[a b]`.
pub fn hcat(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, seed: u64) -> Mat {
        // small deterministic LCG, enough for unit tests of the wrappers
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        Mat::from_fn(n, n, |_, _| c(next(), next()))
    }

    #[test]
    fn svd_of_rank_deficient_idempotent_complement() {
        // I − Q for a conjugated neutral projection; a case where a naive
        // bidiagonal SVD loses three digits
        let d = [
            (0.5876911359874198, -0.17157212005857933),
            (-0.22904290313473827, 0.2879988723178232),
            (-0.5090929029481094, 0.275070917810905),
            (-0.05487366027956265, -0.008676898514148657),
            (0.9807359548972, 0.0415255280886912),
            (-0.053503069090066746, 0.048159128677880136),
            (-0.3541887252481911, -0.2776190659736876),
            (-0.2999583549292866, 0.21800105540480816),
            (0.4315729091153794, 0.13004659196988816),
        ];
        let a = Mat::from_fn(3, 3, |i, j| c(d[3 * j + i].0, d[3 * j + i].1));
        let (u, s, v) = svd(&a);
        let diag = Mat::from_diagonal(&DVector::from_iterator(3, s.iter().map(|&x| r(x))));
        assert!(op_norm(&(&u * diag * v.adjoint() - &a)) < 1e-13);
        assert!(s[2] < 1e-14);
    }

    #[test]
    fn svd_sorted_and_reconstructs() {
        let a = sample(5, 1);
        let (u, s, v) = svd(&a);
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        let d = Mat::from_diagonal(&DVector::from_iterator(5, s.iter().map(|&x| r(x))));
        assert!(op_norm(&(&u * d * v.adjoint() - &a)) < 1e-13);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let a = from_real_rows(1, 3, &[1.0, 1.0, 0.0]);
        let ns = null_space(&a, 1e-12);
        assert_eq!(ns.ncols(), 2);
        assert!(op_norm(&(&a * &ns)) < 1e-14);
    }

    #[test]
    fn log_inverts_exp_near_identity() {
        let x = sample(4, 7) * r(0.4);
        let u = expm(&x);
        let l = logm_principal(&u).unwrap();
        assert!(op_norm(&(l - x)) < 1e-12);
    }

    #[test]
    fn log_needs_several_square_roots() {
        // eigenvalues far from 1 exercise the square-root loop
        let d = DVector::from_vec(vec![c(0.1, 0.0), c(3.0, 2.0), c(-1.0, 0.5)]);
        let a = Mat::from_diagonal(&d);
        let l = logm_principal(&a).unwrap();
        for i in 0..3 {
            assert!((l[(i, i)] - d[i].ln()).norm() < 1e-12);
        }
        assert!(op_norm(&(expm(&l) - a)) < 1e-12);
    }

    #[test]
    fn log_rejects_negative_axis() {
        let a = from_real_rows(2, 2, &[-1.0, 0.0, 0.0, 2.0]);
        assert!(logm_principal(&a).is_err());
    }

    #[test]
    fn unitary_log_phase_convention() {
        let d = DVector::from_vec(vec![r(-1.0), c(0.0, 1.0)]);
        let l = log_unitary(&Mat::from_diagonal(&d)).unwrap();
        assert!((l[(0, 0)] - c(0.0, std::f64::consts::PI)).norm() < 1e-14);
        assert!((l[(1, 1)] - c(0.0, std::f64::consts::FRAC_PI_2)).norm() < 1e-14);
    }

    #[test]
    fn polar_factor_is_unitary() {
        let a = sample(4, 3);
        let u = polar_unitary(&a);
        assert!(op_norm(&(u.adjoint() * &u - eye(4))) < 1e-13);
    }
}
