//! The J-unitary group: block construction from an angular operator,
//! logarithms near the identity and a path to the identity.

use crate::error::{KreinError, Result};
use crate::krein::KreinFrame;
use crate::linalg::{self, op_norm, Mat};

/// A certified J-unitary operator, `‖U*JU − J‖ ≤ tol·max(1, ‖U‖²)`.
#[derive(Debug, Clone)]
pub struct JUnitary {
    u: Mat,
    frame: KreinFrame,
}

impl JUnitary {
    pub fn new(frame: KreinFrame, u: Mat) -> Result<Self> {
        frame.check_square(&u)?;
        let norm = op_norm(&u);
        let residual = frame.j_unitarity_residual(&u);
        let bound = frame.tol * (norm * norm).max(1.0);
        if residual > bound {
            return Err(KreinError::Residual {
                what: "J-unitarity",
                residual,
                bound,
            });
        }
        Ok(JUnitary { u, frame })
    }

    pub fn identity(frame: KreinFrame) -> Self {
        JUnitary {
            u: linalg::eye(frame.n()),
            frame,
        }
    }

    pub fn matrix(&self) -> &Mat {
        &self.u
    }

    pub fn into_matrix(self) -> Mat {
        self.u
    }

    pub fn frame(&self) -> &KreinFrame {
        &self.frame
    }

    /// `U^# = U⁻¹`.
    pub fn inverse(&self) -> Mat {
        self.frame.sharp(&self.u)
    }

    pub fn residual(&self) -> f64 {
        self.frame.j_unitarity_residual(&self.u)
    }

    /// `U T U^#`.
    pub fn conjugate(&self, t: &Mat) -> Mat {
        &self.u * t * self.inverse()
    }

    pub fn compose(&self, other: &JUnitary) -> Result<JUnitary> {
        JUnitary::new(self.frame, &self.u * &other.u)
    }
}

fn check_unitary(v: &Mat, size: usize, tol: f64, what: &'static str) -> Result<()> {
    if v.shape() != (size, size) {
        return Err(KreinError::dim(format!("{size}x{size}"), format!("{}x{}", v.nrows(), v.ncols())));
    }
    if !linalg::is_finite(v) {
        return Err(KreinError::NonFinite);
    }
    let residual = op_norm(&(v.adjoint() * v - linalg::eye(size)));
    if residual > tol {
        return Err(KreinError::Residual {
            what,
            residual,
            bound: tol,
        });
    }
    Ok(())
}

/// ```text
///   U = ⎡ (I − K*K)^{-1/2} V₊    K*(I − KK*)^{-1/2} V₋ ⎤
///       ⎣ K(I − K*K)^{-1/2} V₊   (I − KK*)^{-1/2} V₋   ⎦
/// ```
///
/// `K : H₊ → H₋` is q×p with `‖K‖ < 1`; `V₊`, `V₋` are unitary.
pub fn ando_block_unitary(frame: KreinFrame, k: &Mat, v_plus: &Mat, v_minus: &Mat) -> Result<JUnitary> {
    let (p, q) = (frame.p, frame.q);
    if k.shape() != (q, p) {
        return Err(KreinError::dim(format!("{q}x{p}"), format!("{}x{}", k.nrows(), k.ncols())));
    }
    if !linalg::is_finite(k) {
        return Err(KreinError::NonFinite);
    }
    let k_norm = op_norm(k);
    if k_norm >= 1.0 {
        return Err(KreinError::OutOfRange {
            what: "angular operator norm",
            distance: k_norm,
            limit: 1.0,
        });
    }
    check_unitary(v_plus, p, frame.tol, "unitarity of V+")?;
    check_unitary(v_minus, q, frame.tol, "unitarity of V-")?;

    let k_star = k.adjoint();
    let inv_sqrt = |x: f64| 1.0 / x.max(f64::MIN_POSITIVE).sqrt();
    let dp = linalg::herm_map(&(linalg::eye(p) - &k_star * k), inv_sqrt);
    let dm = linalg::herm_map(&(linalg::eye(q) - k * &k_star), inv_sqrt);

    let mut u = linalg::zeros(p + q, p + q);
    u.view_mut((0, 0), (p, p)).copy_from(&(&dp * v_plus));
    u.view_mut((0, p), (p, q)).copy_from(&(&k_star * &dm * v_minus));
    u.view_mut((p, 0), (q, p)).copy_from(&(k * &dp * v_plus));
    u.view_mut((p, p), (q, q)).copy_from(&(&dm * v_minus));
    JUnitary::new(frame, u)
}

/// Inverse of [`ando_block_unitary`]: `K = U₂₁U₁₁⁻¹`,
/// `V₊ = (I − K*K)^{1/2} U₁₁`, `V₋ = (I − KK*)^{1/2} U₂₂`.
pub fn angular_of_image(u: &JUnitary) -> Result<(Mat, Mat, Mat)> {
    let frame = u.frame();
    let (p, q) = (frame.p, frame.q);
    let m = u.matrix();
    let u11 = m.view((0, 0), (p, p)).into_owned();
    let u21 = m.view((p, 0), (q, p)).into_owned();
    let u22 = m.view((p, p), (q, q)).into_owned();
    // U₁₁*U₁₁ = I + U₂₁*U₂₁, so U₁₁ is invertible
    let k = &u21 * linalg::inverse(&u11, "upper-left block of a J-unitary")?;
    let sqrt = |x: f64| x.max(0.0).sqrt();
    let v_plus = linalg::herm_map(&(linalg::eye(p) - k.adjoint() * &k), sqrt) * &u11;
    let v_minus = linalg::herm_map(&(linalg::eye(q) - &k * k.adjoint()), sqrt) * &u22;
    Ok((k, v_plus, v_minus))
}

/// Principal logarithm of a J-unitary with `‖U − I‖ < 1`; the result is
/// J-antihermitian.
pub fn log_near_identity(u: &JUnitary) -> Result<Mat> {
    let frame = u.frame();
    let id = linalg::eye(frame.n());
    let distance = op_norm(&(u.matrix() - &id));
    if distance >= 1.0 {
        return Err(KreinError::OutOfRange {
            what: "log near identity: ‖U − I‖",
            distance,
            limit: 1.0,
        });
    }
    let x = linalg::logm_principal(u.matrix())?;
    let scale = op_norm(&x).max(1.0);
    let bound = 10.0 * frame.tol * scale;
    let antihermitian = op_norm(&(&x + frame.sharp(&x)));
    if antihermitian > bound {
        return Err(KreinError::Residual {
            what: "J-antihermitian logarithm",
            residual: antihermitian,
            bound,
        });
    }
    let round_trip = op_norm(&(linalg::expm(&x) - u.matrix()));
    if round_trip > bound {
        return Err(KreinError::Residual {
            what: "exp(log U) = U",
            residual: round_trip,
            bound,
        });
    }
    Ok(x)
}

pub fn is_antihermitian(frame: &KreinFrame, x: &Mat) -> Result<()> {
    frame.check_square(x)?;
    let residual = op_norm(&(x + frame.sharp(x)));
    let bound = frame.tol * op_norm(x).max(1.0);
    if residual > bound {
        return Err(KreinError::Residual {
            what: "J-antihermitian generator",
            residual,
            bound,
        });
    }
    Ok(())
}

/// `e^X` for J-antihermitian `X`.
pub fn exp_antihermitian(frame: KreinFrame, x: &Mat) -> Result<JUnitary> {
    is_antihermitian(&frame, x)?;
    JUnitary::new(frame, linalg::expm(x))
}

/// The curve `γ(t)` obtained by replacing `(K, V₊, V₋)` of `U` with
/// `(tK, e^{tX₊}, e^{tX₋})`, where `X±` are antihermitian logs of `V±`.
#[derive(Debug, Clone)]
pub struct UnitaryPath {
    frame: KreinFrame,
    k: Mat,
    x_plus: Mat,
    x_minus: Mat,
}

impl UnitaryPath {
    pub fn new(u: &JUnitary) -> Result<Self> {
        let (k, v_plus, v_minus) = angular_of_image(u)?;
        Ok(UnitaryPath {
            frame: *u.frame(),
            k,
            x_plus: linalg::log_unitary(&v_plus)?,
            x_minus: linalg::log_unitary(&v_minus)?,
        })
    }

    pub fn at(&self, t: f64) -> Result<JUnitary> {
        if !(0.0..=1.0).contains(&t) {
            return Err(KreinError::Parameter(format!("path parameter {t} outside [0, 1]")));
        }
        let s = linalg::r(t);
        ando_block_unitary(
            self.frame,
            &(&self.k * s),
            &linalg::expm(&(&self.x_plus * s)),
            &linalg::expm(&(&self.x_minus * s)),
        )
    }
}

pub fn connectivity_path(u: &JUnitary, t: f64) -> Result<JUnitary> {
    UnitaryPath::new(u)?.at(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, from_real_rows, r};

    fn frame(p: usize, q: usize) -> KreinFrame {
        KreinFrame::new(p, q).unwrap()
    }

    fn close(a: &Mat, b: &Mat, eps: f64) -> bool {
        op_norm(&(a - b)) <= eps
    }

    #[test]
    fn ando_examples() {
        let f = frame(1, 1);
        let one = linalg::eye(1);
        let u = ando_block_unitary(f, &linalg::zeros(1, 1), &one, &one).unwrap();
        assert!(close(u.matrix(), &linalg::eye(2), 1e-15));

        let k = from_real_rows(1, 1, &[0.5]);
        let u = ando_block_unitary(f, &k, &one, &one).unwrap();
        let expected = from_real_rows(2, 2, &[1.0, 0.5, 0.5, 1.0]) * r(1.0 / 0.75f64.sqrt());
        assert!(close(u.matrix(), &expected, 1e-14));

        let f = frame(2, 1);
        let vp = linalg::eye(2) * c(0.0, 1.0);
        let u = ando_block_unitary(f, &linalg::zeros(1, 2), &vp, &one).unwrap();
        let mut expected = linalg::eye(3);
        expected[(0, 0)] = c(0.0, 1.0);
        expected[(1, 1)] = c(0.0, 1.0);
        assert!(close(u.matrix(), &expected, 1e-15));
    }

    #[test]
    fn ando_rejects_bad_inputs() {
        let f = frame(1, 1);
        let one = linalg::eye(1);
        assert!(matches!(
            ando_block_unitary(f, &from_real_rows(1, 1, &[1.0]), &one, &one),
            Err(KreinError::OutOfRange { .. })
        ));
        assert!(ando_block_unitary(f, &linalg::zeros(1, 1), &(&one * r(2.0)), &one).is_err());
    }

    #[test]
    fn image_of_identity_and_phase() {
        let f = frame(2, 2);
        let (k, vp, vm) = angular_of_image(&JUnitary::identity(f)).unwrap();
        assert!(op_norm(&k) == 0.0);
        assert!(close(&vp, &linalg::eye(2), 1e-15));
        assert!(close(&vm, &linalg::eye(2), 1e-15));

        let phase = c(0.3f64.cos(), 0.3f64.sin());
        let mut d = linalg::eye(4);
        d[(0, 0)] = phase;
        d[(1, 1)] = phase;
        let (k, vp, _) = angular_of_image(&JUnitary::new(f, d).unwrap()).unwrap();
        assert!(op_norm(&k) < 1e-15);
        assert!(close(&vp, &(linalg::eye(2) * phase), 1e-15));
    }

    #[test]
    fn angular_round_trip() {
        let f = frame(2, 1);
        let k = from_real_rows(1, 2, &[0.3, -0.4]) * c(0.6, 0.8);
        let theta = 0.7f64;
        let vp = Mat::from_row_slice(
            2,
            2,
            &[r(theta.cos()), r(-theta.sin()), r(theta.sin()), r(theta.cos())],
        );
        let vm = Mat::from_element(1, 1, c(0.0, -1.0));
        let u = ando_block_unitary(f, &k, &vp, &vm).unwrap();
        let (k2, vp2, vm2) = angular_of_image(&u).unwrap();
        assert!(close(&k, &k2, 1e-13));
        assert!(close(&vp, &vp2, 1e-13));
        assert!(close(&vm, &vm2, 1e-13));
    }

    #[test]
    fn exp_examples() {
        let f = frame(1, 1);
        assert!(close(
            exp_antihermitian(f, &linalg::zeros(2, 2)).unwrap().matrix(),
            &linalg::eye(2),
            1e-15
        ));
        let t = 0.8f64;
        let x = from_real_rows(2, 2, &[0.0, t, t, 0.0]);
        let expected = from_real_rows(2, 2, &[t.cosh(), t.sinh(), t.sinh(), t.cosh()]);
        assert!(close(exp_antihermitian(f, &x).unwrap().matrix(), &expected, 1e-14));

        let s = 0.4;
        let x = f.j() * c(0.0, s);
        let u = exp_antihermitian(f, &x).unwrap();
        assert!((u.matrix()[(0, 0)] - c(s.cos(), s.sin())).norm() < 1e-15);
        assert!((u.matrix()[(1, 1)] - c(s.cos(), -s.sin())).norm() < 1e-15);

        let hermitian = from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(exp_antihermitian(f, &hermitian).is_err());
    }

    #[test]
    fn log_examples() {
        let f = frame(1, 1);
        let x = log_near_identity(&JUnitary::identity(f)).unwrap();
        assert!(op_norm(&x) < 1e-15);

        let x = from_real_rows(2, 2, &[0.0, 0.2, 0.2, 0.0]) + f.j() * c(0.0, 0.1);
        let u = exp_antihermitian(f, &x).unwrap();
        assert!(close(&log_near_identity(&u).unwrap(), &x, 1e-12));

        // boost with ‖U − I‖ = 1.5
        let x = from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]) * r(1.5f64.ln_1p());
        let u = exp_antihermitian(f, &x).unwrap();
        assert!((op_norm(&(u.matrix() - linalg::eye(2))) - 1.5).abs() < 1e-12);
        assert!(matches!(
            log_near_identity(&u),
            Err(KreinError::OutOfRange { .. })
        ));
    }

    #[test]
    fn path_endpoints() {
        let f = frame(2, 1);
        let k = from_real_rows(1, 2, &[0.5, 0.2]);
        let vp = from_real_rows(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let vm = Mat::from_element(1, 1, r(-1.0));
        let u = ando_block_unitary(f, &k, &vp, &vm).unwrap();
        let path = UnitaryPath::new(&u).unwrap();
        assert!(close(path.at(0.0).unwrap().matrix(), &linalg::eye(3), 1e-14));
        assert!(close(path.at(1.0).unwrap().matrix(), u.matrix(), 1e-13));
        for i in 0..=10 {
            let g = path.at(i as f64 / 10.0).unwrap();
            assert!(g.residual() < 1e-13);
        }
        assert!(path.at(1.5).is_err());

        let id = JUnitary::identity(f);
        assert!(close(connectivity_path(&id, 0.4).unwrap().matrix(), &linalg::eye(3), 1e-15));
    }
}
