//! Subspaces of a Krein frame: J-orthogonal companions, isotropic parts,
//! inertia indices and angular operators.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{KreinError, Result};
use crate::krein::KreinFrame;
use crate::linalg::{self, op_norm, Mat};

/// Column span of an n×k matrix with Hilbert-orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Mat,
    frame: KreinFrame,
}

/// Positive, negative and isotropic inertia of the form restricted to a
/// subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub kp: usize,
    pub km: usize,
    pub k0: usize,
}

/// The five indices `(κ₊, κ₋, κ₀, cκ₊, cκ₋)` classifying a subspace up to
/// J-unitary equivalence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignatureProfile {
    pub kp: usize,
    pub km: usize,
    pub k0: usize,
    pub ckp: usize,
    pub ckm: usize,
}

impl SignatureProfile {
    pub fn new(kp: usize, km: usize, k0: usize, ckp: usize, ckm: usize) -> Self {
        SignatureProfile { kp, km, k0, ckp, ckm }
    }

    /// Whether some J-normal projection in a `(p, q)` frame has this
    /// profile: the three regular blocks must exhaust the inertia of J.
    pub fn is_feasible(&self, p: usize, q: usize) -> bool {
        self.kp + self.k0 + self.ckp == p && self.km + self.k0 + self.ckm == q
    }

    /// All feasible profiles of a `(p, q)` frame, in lexicographic order.
    pub fn enumerate(p: usize, q: usize) -> Vec<SignatureProfile> {
        let mut out = Vec::new();
        for k0 in 0..=p.min(q) {
            for kp in 0..=(p - k0) {
                for km in 0..=(q - k0) {
                    out.push(SignatureProfile::new(kp, km, k0, p - k0 - kp, q - k0 - km));
                }
            }
        }
        out.sort();
        out
    }
}

impl fmt::Display for SignatureProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {}, {})",
            self.kp, self.km, self.k0, self.ckp, self.ckm
        )
    }
}

impl Subspace {
    /// Span of the columns of an arbitrary n×m matrix.
    pub fn span(frame: KreinFrame, spanning: &Mat) -> Result<Self> {
        if spanning.nrows() != frame.n() {
            return Err(KreinError::dim(
                format!("{} rows", frame.n()),
                format!("{} rows", spanning.nrows()),
            ));
        }
        if !linalg::is_finite(spanning) {
            return Err(KreinError::NonFinite);
        }
        let threshold = frame.rank_threshold(op_norm(spanning));
        Ok(Subspace {
            basis: linalg::column_space(spanning, threshold),
            frame,
        })
    }

    /// Wraps a basis that is already orthonormal, checking `B*B = I`.
    pub fn from_orthonormal(frame: KreinFrame, basis: Mat) -> Result<Self> {
        if basis.nrows() != frame.n() {
            return Err(KreinError::dim(
                format!("{} rows", frame.n()),
                format!("{} rows", basis.nrows()),
            ));
        }
        if !linalg::is_finite(&basis) {
            return Err(KreinError::NonFinite);
        }
        let residual = op_norm(&(basis.adjoint() * &basis - linalg::eye(basis.ncols())));
        if residual > frame.tol {
            return Err(KreinError::Residual {
                what: "basis orthonormality",
                residual,
                bound: frame.tol,
            });
        }
        Ok(Subspace { basis, frame })
    }

    pub fn zero(frame: KreinFrame) -> Self {
        Subspace {
            basis: linalg::zeros(frame.n(), 0),
            frame,
        }
    }

    pub fn full(frame: KreinFrame) -> Self {
        Subspace {
            basis: linalg::eye(frame.n()),
            frame,
        }
    }

    /// H₊ = span of the first p coordinate axes.
    pub fn positive_axis(frame: KreinFrame) -> Self {
        Subspace {
            basis: linalg::eye(frame.n()).columns(0, frame.p).into_owned(),
            frame,
        }
    }

    pub fn negative_axis(frame: KreinFrame) -> Self {
        Subspace {
            basis: linalg::eye(frame.n()).columns(frame.p, frame.q).into_owned(),
            frame,
        }
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn frame(&self) -> &KreinFrame {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn projector(&self) -> Mat {
        linalg::orth_projector(&self.basis)
    }

    /// Compressed Gram matrix `B* J B`.
    pub fn gram(&self) -> Mat {
        self.frame.gram(&self.basis, &self.basis)
    }

    /// Image under an operator.
    pub fn image(&self, t: &Mat) -> Result<Subspace> {
        self.frame.check_square(t)?;
        Subspace::span(self.frame, &(t * &self.basis))
    }

    pub fn principal_angles(&self, other: &Subspace) -> Vec<f64> {
        linalg::principal_angles(&self.basis, &other.basis)
    }

    /// Equal dimension and every principal angle below `√tol`.
    pub fn same_as(&self, other: &Subspace) -> bool {
        self.dim() == other.dim()
            && self
                .principal_angles(other)
                .last()
                .is_none_or(|&a| a <= self.frame.tol.sqrt())
    }

    /// ‖P_S − P_T‖ for the orthogonal projections.
    pub fn gap(&self, other: &Subspace) -> f64 {
        linalg::subspace_gap(&self.basis, &other.basis)
    }

    /// Whether `v` lies in the span, up to `tol·‖v‖`.
    pub fn contains_all(&self, vectors: &Mat) -> bool {
        let residual = vectors - self.projector() * vectors;
        op_norm(&residual) <= self.frame.tol * op_norm(vectors).max(1.0)
    }

    /// Smallest subspace containing both.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        Subspace::span(self.frame, &linalg::hcat(&self.basis, &other.basis))
    }

    /// `S^{[⊥]} = J(S^⊥)`.
    pub fn j_companion(&self) -> Subspace {
        let perp = linalg::orth_complement(&self.basis);
        Subspace {
            basis: self.frame.j_left(&perp),
            frame: self.frame,
        }
    }

    /// Hilbert orthogonal complement `S^⊥`.
    pub fn orth_complement(&self) -> Subspace {
        Subspace {
            basis: linalg::orth_complement(&self.basis),
            frame: self.frame,
        }
    }

    /// Eigen-split of the compressed Gram into (nondegenerate, kernel)
    /// coefficient blocks plus the positive/negative counts.
    fn gram_split(&self) -> (Mat, Mat, usize, usize) {
        let k = self.dim();
        if k == 0 {
            return (linalg::zeros(0, 0), linalg::zeros(0, 0), 0, 0);
        }
        let (vals, vecs) = linalg::herm_eigen(&self.gram());
        let tau = self.frame.rank_threshold(1.0);
        let kernel: Vec<usize> = (0..k).filter(|&i| vals[i].abs() <= tau).collect();
        let regular: Vec<usize> = (0..k).filter(|&i| vals[i].abs() > tau).collect();
        let kp = vals.iter().filter(|&&v| v > tau).count();
        let km = vals.iter().filter(|&&v| v < -tau).count();
        let pick = |idx: &[usize]| Mat::from_fn(k, idx.len(), |i, j| vecs[(i, idx[j])]);
        (pick(&regular), pick(&kernel), kp, km)
    }

    /// `S° = S ∩ S^{[⊥]}`, the kernel of the compressed Gram pushed into S.
    pub fn isotropic_part(&self) -> Subspace {
        let (_, kernel, _, _) = self.gram_split();
        Subspace {
            basis: &self.basis * kernel,
            frame: self.frame,
        }
    }

    pub fn signature(&self) -> Signature {
        let (_, kernel, kp, km) = self.gram_split();
        Signature {
            kp,
            km,
            k0: kernel.ncols(),
        }
    }

    /// `(cκ₊, cκ₋)`: positive and negative inertia of `S^{[⊥]}`.
    pub fn cosignature(&self) -> (usize, usize) {
        let s = self.j_companion().signature();
        (s.kp, s.km)
    }

    pub fn profile(&self) -> SignatureProfile {
        let s = self.signature();
        let (ckp, ckm) = self.cosignature();
        SignatureProfile::new(s.kp, s.km, s.k0, ckp, ckm)
    }

    pub fn is_regular(&self) -> bool {
        self.signature().k0 == 0
    }

    /// Always true in finite dimension, where `S + S^{[⊥]}` is closed.
    pub fn is_pseudo_regular(&self) -> bool {
        true
    }

    /// Every nonzero vector has zero J-norm.
    pub fn is_neutral(&self) -> bool {
        op_norm(&self.gram()) <= self.frame.rank_threshold(1.0)
    }

    /// The regular part `M = S ⊖ S°`, so that `S = M [∔] S°`.
    pub fn regular_complement(&self) -> Result<Subspace> {
        let (regular, kernel, _, _) = self.gram_split();
        let m = Subspace {
            basis: &self.basis * regular,
            frame: self.frame,
        };
        let iso = &self.basis * kernel;
        if !m.is_regular() {
            return Err(KreinError::Numerical("regular complement is degenerate"));
        }
        let cross = op_norm(&self.frame.gram(&m.basis, &iso));
        if cross > self.frame.tol {
            return Err(KreinError::Residual {
                what: "regular complement J-orthogonality",
                residual: cross,
                bound: self.frame.tol,
            });
        }
        if m.dim() + iso.ncols() != self.dim() {
            return Err(KreinError::Numerical("regular complement does not span"));
        }
        Ok(m)
    }

    /// J-orthonormal basis `(C₊, C₋)` of a regular subspace:
    /// `C₊*JC₊ = I`, `C₋*JC₋ = −I`, `C₊*JC₋ = 0`.
    pub fn j_orthonormal_basis(&self) -> Result<(Mat, Mat)> {
        if !self.is_regular() {
            return Err(KreinError::Subspace("regular"));
        }
        let (vals, vecs) = linalg::herm_eigen(&self.gram());
        let scaled = |idx: Vec<usize>| {
            Mat::from_fn(self.basis.nrows(), idx.len(), |i, j| {
                let col = idx[j];
                let v: linalg::C64 = (0..vals.len())
                    .map(|k| self.basis[(i, k)] * vecs[(k, col)])
                    .sum();
                v * (1.0 / vals[col].abs().sqrt())
            })
        };
        // eigenvalues ascend: negatives first
        let neg: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] < 0.0).collect();
        let pos: Vec<usize> = (0..vals.len()).rev().filter(|&i| vals[i] > 0.0).collect();
        Ok((scaled(pos), scaled(neg)))
    }

    /// Angular operator `K : P₊(S) → H₋` of a J-positive subspace, returned
    /// as a q×p matrix acting on H₊ (zero on `H₊ ⊖ P₊(S)`).
    pub fn angular_operator(&self) -> Result<Mat> {
        let sig = self.signature();
        if sig.km != 0 || sig.k0 != 0 {
            return Err(KreinError::Subspace("J-positive"));
        }
        let (p, q) = (self.frame.p, self.frame.q);
        let top = self.basis.rows(0, p).into_owned();
        let bottom = self.basis.rows(p, q).into_owned();
        let threshold = self.frame.rank_threshold(1.0);
        if linalg::rank(&top, threshold) < self.dim() {
            return Err(KreinError::Subspace("injectively projected onto H+"));
        }
        let k = bottom * linalg::pinv(&top, threshold);
        let norm = op_norm(&k);
        if norm > 1.0 + self.frame.tol {
            return Err(KreinError::Residual {
                what: "angular operator contraction",
                residual: norm,
                bound: 1.0,
            });
        }
        Ok(k)
    }
}
