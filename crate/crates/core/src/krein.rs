//! The fundamental symmetry, the indefinite form and the J-adjoint.

use serde::{Deserialize, Serialize};

use crate::error::{KreinError, Result};
use crate::linalg::{self, op_norm, C64, Mat};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Floor for the relative rank threshold; see [`KreinFrame::rank_threshold`].
pub const RANK_FLOOR: f64 = 1e-10;

/// A finite-dimensional Krein space ℂⁿ with `J = diag(I_p, −I_q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KreinFrame {
    pub p: usize,
    pub q: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Overrides the relative rank threshold used for numerical ranks,
    /// kernels and Gram inertia.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl KreinFrame {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        Self::with_tol(p, q, DEFAULT_TOL)
    }

    pub fn with_tol(p: usize, q: usize, tol: f64) -> Result<Self> {
        let frame = KreinFrame {
            p,
            q,
            tol,
            rank_tol: None,
        };
        frame.validate()?;
        Ok(frame)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p + self.q == 0 {
            return Err(KreinError::InvalidFrame("dimension must be positive".into()));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(KreinError::InvalidFrame(format!("tolerance {} must be positive", self.tol)));
        }
        if let Some(rt) = self.rank_tol {
            if !(rt.is_finite() && rt > 0.0) {
                return Err(KreinError::InvalidFrame(format!("rank_tol {rt} must be positive")));
            }
        }
        Ok(())
    }

    /// Builds a frame from an arbitrary symmetry `S = S* = S⁻¹` and returns
    /// the unitary `W` with `W* S W = diag(I_p, −I_q)`.
    pub fn from_symmetry(s: &Mat, tol: f64) -> Result<(Self, Mat)> {
        let n = s.nrows();
        if s.ncols() != n {
            return Err(KreinError::NotSquare {
                rows: n,
                cols: s.ncols(),
            });
        }
        let herm = op_norm(&(s - s.adjoint()));
        if herm > tol {
            return Err(KreinError::Residual {
                what: "symmetry selfadjointness",
                residual: herm,
                bound: tol,
            });
        }
        let inv = op_norm(&(s * s - linalg::eye(n)));
        if inv > tol {
            return Err(KreinError::Residual {
                what: "symmetry involution",
                residual: inv,
                bound: tol,
            });
        }
        let (vals, vecs) = linalg::herm_eigen(s);
        let q = vals.iter().filter(|&&v| v < 0.0).count();
        let p = n - q;
        // ascending order puts the −1 eigenvectors first; reverse the blocks
        let w = Mat::from_fn(n, n, |i, j| {
            if j < p {
                vecs[(i, q + j)]
            } else {
                vecs[(i, j - p)]
            }
        });
        Ok((KreinFrame::with_tol(p, q, tol)?, w))
    }

    pub fn n(&self) -> usize {
        self.p + self.q
    }

    fn sign(&self, i: usize) -> f64 {
        if i < self.p {
            1.0
        } else {
            -1.0
        }
    }

    pub fn j(&self) -> Mat {
        Mat::from_fn(self.n(), self.n(), |i, k| {
            if i == k {
                linalg::r(self.sign(i))
            } else {
                linalg::ZERO
            }
        })
    }

    /// Orthogonal projection onto H₊.
    pub fn p_plus(&self) -> Mat {
        Mat::from_fn(self.n(), self.n(), |i, k| {
            if i == k && i < self.p {
                linalg::ONE
            } else {
                linalg::ZERO
            }
        })
    }

    /// Orthogonal projection onto H₋.
    pub fn p_minus(&self) -> Mat {
        Mat::from_fn(self.n(), self.n(), |i, k| {
            if i == k && i >= self.p {
                linalg::ONE
            } else {
                linalg::ZERO
            }
        })
    }

    /// Absolute threshold for numerical rank decisions on a matrix whose
    /// natural scale is `scale`.
    pub fn rank_threshold(&self, scale: f64) -> f64 {
        let rel = self
            .rank_tol
            .unwrap_or_else(|| (self.n() as f64 * f64::EPSILON).max(RANK_FLOOR));
        rel * scale.max(1.0)
    }

    pub fn check_square(&self, t: &Mat) -> Result<()> {
        if t.nrows() != t.ncols() {
            return Err(KreinError::NotSquare {
                rows: t.nrows(),
                cols: t.ncols(),
            });
        }
        if t.nrows() != self.n() {
            return Err(KreinError::dim(
                format!("{0}x{0}", self.n()),
                format!("{}x{}", t.nrows(), t.ncols()),
            ));
        }
        if !linalg::is_finite(t) {
            return Err(KreinError::NonFinite);
        }
        Ok(())
    }

    /// `J T` (rows of `T` with sign flips).
    pub fn j_left(&self, t: &Mat) -> Mat {
        Mat::from_fn(t.nrows(), t.ncols(), |i, k| t[(i, k)] * self.sign(i))
    }

    /// `T J` (columns of `T` with sign flips).
    pub fn j_right(&self, t: &Mat) -> Mat {
        Mat::from_fn(t.nrows(), t.ncols(), |i, k| t[(i, k)] * self.sign(k))
    }

    /// `T^# = J T* J`; exact sign bookkeeping, no rounding.
    pub fn j_adjoint(&self, t: &Mat) -> Result<Mat> {
        self.check_square(t)?;
        Ok(self.sharp(t))
    }

    /// Unchecked J-adjoint for internal use on operators already known to
    /// be n×n.
    pub(crate) fn sharp(&self, t: &Mat) -> Mat {
        debug_assert_eq!(t.shape(), (self.n(), self.n()));
        Mat::from_fn(t.nrows(), t.ncols(), |i, k| {
            t[(k, i)].conj() * (self.sign(i) * self.sign(k))
        })
    }

    /// `[f, g] = ⟨Jf, g⟩`, linear in `f`, conjugate-linear in `g`.
    pub fn j_inner(&self, f: &[C64], g: &[C64]) -> Result<C64> {
        if f.len() != self.n() || g.len() != self.n() {
            return Err(KreinError::dim(
                self.n(),
                format!("({}, {})", f.len(), g.len()),
            ));
        }
        Ok(f.iter()
            .zip(g)
            .enumerate()
            .map(|(i, (a, b))| a * b.conj() * self.sign(i))
            .sum())
    }

    /// Gram matrix `A* J B` of the indefinite form between column sets.
    pub fn gram(&self, a: &Mat, b: &Mat) -> Mat {
        a.adjoint() * self.j_left(b)
    }

    /// `‖U* J U − J‖`.
    pub fn j_unitarity_residual(&self, u: &Mat) -> f64 {
        op_norm(&(u.adjoint() * self.j_left(u) - self.j()))
    }

    pub fn classify(&self, t: &Mat) -> Result<Classification> {
        self.check_square(t)?;
        let n = self.n();
        let id = linalg::eye(n);
        let ts = self.sharp(t);
        let bound = self.tol * op_norm(t).max(1.0);
        let projection = op_norm(&(t * t - t));
        let selfadjoint = op_norm(&(&ts - t));
        let antihermitian = op_norm(&(&ts + t));
        let unitary = op_norm(&(t * &ts - &id)).max(op_norm(&(&ts * t - &id)));
        let normality = op_norm(&(t * &ts - &ts * t));
        Ok(Classification {
            is_projection: projection <= bound,
            is_j_selfadjoint: selfadjoint <= bound,
            is_j_antihermitian: antihermitian <= bound,
            is_j_unitary: unitary <= bound,
            is_j_normal_projection: projection <= bound && normality <= bound,
            residuals: ClassificationResiduals {
                projection,
                j_selfadjoint: selfadjoint,
                j_antihermitian: antihermitian,
                j_unitary: unitary,
                j_normality: normality,
                bound,
            },
        })
    }

    /// Splits `X = X_s + X_a` into J-selfadjoint and J-antihermitian parts.
    pub fn hermitian_split(&self, x: &Mat) -> Result<(Mat, Mat)> {
        let xs = self.j_adjoint(x)?;
        let half = linalg::r(0.5);
        Ok(((x + &xs) * half, (x - &xs) * half))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassificationResiduals {
    pub projection: f64,
    pub j_selfadjoint: f64,
    pub j_antihermitian: f64,
    pub j_unitary: f64,
    pub j_normality: f64,
    /// The bound `tol · max(1, ‖T‖)` every residual is compared against.
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub is_projection: bool,
    pub is_j_selfadjoint: bool,
    pub is_j_antihermitian: bool,
    pub is_j_unitary: bool,
    pub is_j_normal_projection: bool,
    pub residuals: ClassificationResiduals,
}
