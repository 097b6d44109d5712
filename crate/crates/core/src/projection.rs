//! J-normal projections and their canonical `Q = E + P` decomposition.
//!
//! For a J-normal projection `Q` the three operators
//! `E = QQ^#`, `P = Q(I − Q^#)` and `F = (I − Q)(I − Q)^#` satisfy
//! `Q = E + P`, `I − Q = F + P^#`, `PP^# = P^#P = 0`, and split the space
//! into the J-orthogonal sum `R(E) [∔] R(P + P^#) [∔] R(F)`.

use serde::Serialize;

use crate::error::{KreinError, Result};
use crate::krein::KreinFrame;
use crate::linalg::{self, op_norm, r, Mat};
use crate::subspace::{SignatureProfile, Subspace};

/// A validated J-normal idempotent together with its `E`, `P`, `F` parts.
#[derive(Debug, Clone)]
pub struct NormalProjection {
    q: Mat,
    frame: KreinFrame,
    e: Mat,
    p: Mat,
    f: Mat,
    norm: f64,
}

impl NormalProjection {
    pub fn new(frame: KreinFrame, q: Mat) -> Result<Self> {
        frame.check_square(&q)?;
        let norm = op_norm(&q);
        let bound = frame.tol * (norm * norm).max(1.0);
        let idem = op_norm(&(&q * &q - &q));
        if idem > bound {
            return Err(KreinError::Residual {
                what: "idempotency",
                residual: idem,
                bound,
            });
        }
        let qs = frame.sharp(&q);
        let normality = op_norm(&(&q * &qs - &qs * &q));
        if normality > bound {
            return Err(KreinError::Residual {
                what: "J-normality",
                residual: normality,
                bound,
            });
        }
        let id = linalg::eye(frame.n());
        let e = &q * &qs;
        let p = &q * (&id - &qs);
        let iq = &id - &q;
        let f = &iq * frame.sharp(&iq);
        Ok(NormalProjection {
            q,
            frame,
            e,
            p,
            f,
            norm,
        })
    }

    pub fn q(&self) -> &Mat {
        &self.q
    }

    pub fn frame(&self) -> &KreinFrame {
        &self.frame
    }

    /// `E = QQ^#`, the J-selfadjoint part.
    pub fn e(&self) -> &Mat {
        &self.e
    }

    /// `P = Q(I − Q^#)`, the neutral part.
    pub fn p(&self) -> &Mat {
        &self.p
    }

    /// `F = (I − Q)(I − Q)^#`.
    pub fn f(&self) -> &Mat {
        &self.f
    }

    pub fn p_sharp(&self) -> Mat {
        self.frame.sharp(&self.p)
    }

    pub fn q_sharp(&self) -> Mat {
        self.frame.sharp(&self.q)
    }

    /// `P + P^#`, the J-selfadjoint projection onto `R(Q)° ∔ N(Q)°`.
    pub fn neutral_block(&self) -> Mat {
        &self.p + self.p_sharp()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    fn threshold(&self) -> f64 {
        self.frame.rank_threshold(self.norm)
    }

    pub fn range(&self) -> Subspace {
        subspace_of(&self.frame, &self.q, self.threshold())
    }

    pub fn kernel(&self) -> Subspace {
        let iq = linalg::eye(self.frame.n()) - &self.q;
        subspace_of(&self.frame, &iq, self.threshold())
    }

    /// `R(Q)° = R(P)`.
    pub fn range_isotropic(&self) -> Subspace {
        subspace_of(&self.frame, &self.p, self.threshold())
    }

    /// `N(Q)° = R(P^#)`.
    pub fn kernel_isotropic(&self) -> Subspace {
        subspace_of(&self.frame, &self.p_sharp(), self.threshold())
    }

    /// The deck `R(QQ^#)`.
    pub fn regular_part(&self) -> Subspace {
        subspace_of(&self.frame, &self.e, self.threshold())
    }

    pub fn conjugate(&self, u: &Mat) -> Result<NormalProjection> {
        self.frame.check_square(u)?;
        NormalProjection::new(self.frame, u * &self.q * self.frame.sharp(u))
    }

    /// Returns the cached triple and certifies every algebraic identity
    /// relating it to `Q`, plus the three-block J-orthogonal splitting.
    pub fn decompose(&self) -> Result<NormalDecomposition> {
        let frame = &self.frame;
        let n = frame.n();
        let id = linalg::eye(n);
        let ps = self.p_sharp();
        let es = frame.sharp(&self.e);
        let identities = [
            op_norm(&(&self.q - &self.e - &self.p)),
            op_norm(&(&id - &self.q - &self.f - &ps)),
            op_norm(&(&self.p * &ps)),
            op_norm(&(&ps * &self.p)),
            op_norm(&(&es - &self.e)),
            op_norm(&(&self.e * &self.e - &self.e)),
            op_norm(&(&self.e * &self.p)),
            op_norm(&(&self.p * &self.e)),
            op_norm(&(&self.e * &ps)),
            op_norm(&(&ps * &self.e)),
            op_norm(&(&self.f * &self.p)),
            op_norm(&(&self.p * &self.f)),
            op_norm(&(&self.f * &ps)),
            op_norm(&(&ps * &self.f)),
        ];
        let identity_residual = identities.iter().copied().fold(0.0, f64::max);

        let threshold = self.threshold();
        let g = &self.p + &ps;
        let blocks = [
            linalg::column_space(&self.e, threshold),
            linalg::column_space(&g, threshold),
            linalg::column_space(&self.f, threshold),
        ];
        let ranks = [blocks[0].ncols(), blocks[1].ncols(), blocks[2].ncols()];
        let mut cross_gram: f64 = 0.0;
        for i in 0..3 {
            for j in (i + 1)..3 {
                cross_gram = cross_gram.max(op_norm(&frame.gram(&blocks[i], &blocks[j])));
            }
        }
        let bound = frame.tol * (self.norm * self.norm).max(1.0);
        if identity_residual > bound {
            return Err(KreinError::Residual {
                what: "E+P decomposition identities",
                residual: identity_residual,
                bound,
            });
        }
        if ranks.iter().sum::<usize>() != n {
            return Err(KreinError::Numerical("three-block splitting ranks do not sum to n"));
        }
        if cross_gram > bound {
            return Err(KreinError::Residual {
                what: "three-block J-orthogonality",
                residual: cross_gram,
                bound,
            });
        }
        Ok(NormalDecomposition {
            e: self.e.clone(),
            p: self.p.clone(),
            f: self.f.clone(),
            identity_residual,
            block_ranks: ranks,
            cross_gram,
        })
    }

    /// `(κ₊, κ₋, κ₀)` of `R(Q)` and `(cκ₊, cκ₋) = (κ₊, κ₋)` of `N(Q)`.
    pub fn signature_profile(&self) -> SignatureProfile {
        let range = self.range().signature();
        let kernel = self.kernel().signature();
        SignatureProfile::new(range.kp, range.km, range.k0, kernel.kp, kernel.km)
    }
}

fn subspace_of(frame: &KreinFrame, t: &Mat, threshold: f64) -> Subspace {
    Subspace::from_orthonormal(*frame, linalg::column_space(t, threshold))
        .expect("column space basis is orthonormal")
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalDecomposition {
    #[serde(skip)]
    pub e: Mat,
    #[serde(skip)]
    pub p: Mat,
    #[serde(skip)]
    pub f: Mat,
    /// Largest residual over `Q = E+P`, `I−Q = F+P^#`, `PP^# = P^#P = 0`,
    /// `E^# = E = E²` and the eight vanishing cross products.
    pub identity_residual: f64,
    /// Ranks of `R(E)`, `R(P+P^#)`, `R(F)`.
    pub block_ranks: [usize; 3],
    /// Largest compressed cross Gram between the three blocks.
    pub cross_gram: f64,
}

/// The unique J-selfadjoint projection onto a regular subspace,
/// `E = B (B*JB)⁻¹ B* J`.
pub fn selfadjoint_projection_onto(s: &Subspace) -> Result<Mat> {
    if !s.is_regular() {
        return Err(KreinError::Subspace("regular"));
    }
    let frame = s.frame();
    let b = s.basis();
    let g_inv = linalg::inverse(&s.gram(), "compressed Gram")?;
    Ok(b * g_inv * frame.j_right(&b.adjoint()))
}

/// The projection onto `S` along `T^{[⊥]}` for a neutral dual pair.
pub fn neutral_pair_projection(s: &Subspace, t: &Subspace) -> Result<Mat> {
    let frame = s.frame();
    if s.frame() != t.frame() {
        return Err(KreinError::dim(format!("{:?}", s.frame()), format!("{:?}", t.frame())));
    }
    if !s.is_neutral() || !t.is_neutral() {
        return Err(KreinError::NotDualPair("both subspaces must be neutral"));
    }
    if s.dim() != t.dim() {
        return Err(KreinError::NotDualPair("dimensions differ"));
    }
    let pairing = frame.gram(t.basis(), s.basis());
    if linalg::smallest_singular_value(&pairing) <= frame.rank_threshold(1.0) {
        return Err(KreinError::NotDualPair("S ∔ T^[⊥] is not the whole space"));
    }
    let inv = linalg::inverse(&pairing, "neutral pairing")?;
    let p = s.basis() * inv * frame.j_right(&t.basis().adjoint());
    let ps = frame.sharp(&p);
    let norm = op_norm(&p);
    let residual = op_norm(&(&p * &ps)).max(op_norm(&(&ps * &p)));
    let bound = frame.tol * (norm * norm).max(1.0);
    if residual > bound {
        return Err(KreinError::Residual {
            what: "neutral projection PP^# = P^#P = 0",
            residual,
            bound,
        });
    }
    Ok(p)
}

/// Block bookkeeping for the orthogonal splitting
/// `H = S° ⊕ (S ⊖ S°) ⊕ S^⊥` of a pseudo-regular subspace `S`, and the
/// blocks of J in it:
///
/// ```text
///       ⎡ 0   0   a ⎤
///   J = ⎢ 0   b   c ⎥
///       ⎣ a*  c*  d ⎦
/// ```
#[derive(Debug, Clone)]
pub struct RangeBlocks {
    pub frame: KreinFrame,
    /// Orthonormal bases of `S°`, `S ⊖ S°`, `S^⊥`.
    pub iso: Mat,
    pub regular: Mat,
    pub perp: Mat,
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
}

impl RangeBlocks {
    pub fn new(s: &Subspace) -> Result<Self> {
        let frame = *s.frame();
        let iso = s.isotropic_part().basis().clone();
        let regular = s.regular_complement()?.basis().clone();
        let perp = s.orth_complement().basis().clone();
        let a = frame.gram(&iso, &perp);
        let b = frame.gram(&regular, &regular);
        let c = frame.gram(&regular, &perp);
        let d = frame.gram(&perp, &perp);
        Ok(RangeBlocks {
            frame,
            iso,
            regular,
            perp,
            a,
            b,
            c,
            d,
        })
    }

    pub fn unitary(&self) -> Mat {
        linalg::hcat(&linalg::hcat(&self.iso, &self.regular), &self.perp)
    }

    pub fn iso_dim(&self) -> usize {
        self.iso.ncols()
    }

    pub fn regular_dim(&self) -> usize {
        self.regular.ncols()
    }

    pub fn perp_dim(&self) -> usize {
        self.perp.ncols()
    }

    /// Assembles `[[I, 0, X], [0, I, Y], [0, 0, 0]]` in ambient coordinates.
    fn assemble(&self, x: &Mat, y: &Mat) -> Mat {
        let (k0, k2, k3) = (self.iso_dim(), self.regular_dim(), self.perp_dim());
        let n = k0 + k2 + k3;
        let mut blocks = linalg::zeros(n, n);
        blocks
            .view_mut((0, 0), (k0 + k2, k0 + k2))
            .copy_from(&linalg::eye(k0 + k2));
        blocks.view_mut((0, k0 + k2), (k0, k3)).copy_from(x);
        blocks.view_mut((k0, k0 + k2), (k2, k3)).copy_from(y);
        let w = self.unitary();
        &w * blocks * w.adjoint()
    }
}

/// Checks that `m` is a regular complement of `S°` inside `S`.
pub(crate) fn check_complement(s: &Subspace, m: &Subspace) -> Result<()> {
    let k0 = s.isotropic_part().dim();
    if m.dim() + k0 != s.dim() {
        return Err(KreinError::Subspace("a complement of the isotropic part (dimension)"));
    }
    if !s.contains_all(m.basis()) {
        return Err(KreinError::Subspace("contained in the range"));
    }
    if !m.is_regular() {
        return Err(KreinError::Subspace("regular"));
    }
    Ok(())
}

/// The J-normal projection onto `S` with regular part `M`, parametrised by
/// an antihermitian `A` on `S°` and `B : S^⊥ → S°` vanishing on `J(S°)`.
///
/// `A` and `B` are given as ambient n×n operators supported on the named
/// subspaces (`A = P_{S°} A P_{S°}`, `B = P_{S°} B P_{S^⊥}`). The block
/// formula, in the splitting of [`RangeBlocks`], is
///
/// ```text
///   X = (A + Re(B c* b r a*) − ½(B d B* + a r* b³ r a*)) a + B + a r*(c + b r)
///   Y = b⁻¹ c + r
///   Q = [[I, 0, X], [0, I, Y], [0, 0, 0]]
/// ```
///
/// with `r = P_{S⊖S°} E_M` restricted to `J(S°)` (zero on
/// `S^⊥ ⊖ J(S°)`) and `Re(T) = (T + T*)/2`.
pub fn normal_family_member(
    s: &Subspace,
    m: &Subspace,
    a_param: &Mat,
    b_param: &Mat,
) -> Result<NormalProjection> {
    let frame = *s.frame();
    frame.check_square(a_param)?;
    frame.check_square(b_param)?;
    check_complement(s, m)?;
    let blocks = RangeBlocks::new(s)?;
    let tol = frame.tol;

    let p_iso = linalg::orth_projector(&blocks.iso);
    let p_perp = linalg::orth_projector(&blocks.perp);
    let a_scale = op_norm(a_param).max(1.0);
    if op_norm(&(a_param - &p_iso * a_param * &p_iso)) > tol * a_scale {
        return Err(KreinError::Parameter("A must act on the isotropic part".into()));
    }
    if op_norm(&(a_param + a_param.adjoint())) > tol * a_scale {
        return Err(KreinError::Parameter("A must be antihermitian".into()));
    }
    let b_scale = op_norm(b_param).max(1.0);
    if op_norm(&(b_param - &p_iso * b_param * &p_perp)) > tol * b_scale {
        return Err(KreinError::Parameter("B must map S^perp into the isotropic part".into()));
    }
    if op_norm(&(b_param * frame.j_left(&blocks.iso))) > tol * b_scale {
        return Err(KreinError::Parameter("J(S°) must lie in the kernel of B".into()));
    }

    let a_c = blocks.iso.adjoint() * a_param * &blocks.iso;
    let b_c = blocks.iso.adjoint() * b_param * &blocks.perp;
    let (a, b, c, d) = (&blocks.a, &blocks.b, &blocks.c, &blocks.d);
    let a_star = a.adjoint();

    let e_m = selfadjoint_projection_onto(m)?;
    // a*a is the projection onto J(S°) in S^⊥ coordinates
    let r_c = blocks.regular.adjoint() * &e_m * &blocks.perp * (&a_star * a);
    let r_star = r_c.adjoint();
    let b_inv = linalg::inverse(b, "regular block of J")?;

    let t = &b_c * c.adjoint() * b * &r_c * &a_star;
    let re_t = (&t + t.adjoint()) * r(0.5);
    let correction = (&b_c * d * b_c.adjoint() + a * &r_star * b * b * b * &r_c * &a_star) * r(0.5);
    let x = (&a_c + re_t - correction) * a + &b_c + a * &r_star * (c + b * &r_c);
    let y = &b_inv * c + &r_c;

    let q = NormalProjection::new(frame, blocks.assemble(&x, &y))?;
    if !q.range().same_as(s) {
        return Err(KreinError::Numerical("family member: range differs from S"));
    }
    if !q.regular_part().same_as(m) {
        return Err(KreinError::Numerical("family member: regular part differs from M"));
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;

    fn frame(p: usize, q: usize) -> KreinFrame {
        KreinFrame::new(p, q).unwrap()
    }

    fn half_ones() -> Mat {
        from_real_rows(2, 2, &[0.5, 0.5, 0.5, 0.5])
    }

    fn degenerate_plane() -> Subspace {
        Subspace::span(frame(2, 1), &from_real_rows(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 1.0])).unwrap()
    }

    #[test]
    fn rejects_non_normal_idempotent() {
        // projection onto e1 along (1,1): idempotent but not J-normal
        let q = from_real_rows(2, 2, &[1.0, -1.0, 0.0, 0.0]);
        assert!(matches!(
            NormalProjection::new(frame(1, 1), q),
            Err(KreinError::Residual { what: "J-normality", .. })
        ));
        assert!(NormalProjection::new(frame(1, 1), linalg::eye(2) * r(2.0)).is_err());
    }

    #[test]
    fn decompose_selfadjoint() {
        let f = frame(2, 1);
        let e0 = from_real_rows(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let q = NormalProjection::new(f, e0.clone()).unwrap();
        let d = q.decompose().unwrap();
        assert!(op_norm(&(&d.e - &e0)) < 1e-15);
        assert!(op_norm(&d.p) < 1e-15);
        assert!(op_norm(&(&d.f - (linalg::eye(3) - &e0))) < 1e-15);
        assert_eq!(d.block_ranks, [1, 0, 2]);
    }

    #[test]
    fn decompose_neutral() {
        let q = NormalProjection::new(frame(1, 1), half_ones()).unwrap();
        let d = q.decompose().unwrap();
        assert!(op_norm(&d.e) < 1e-15);
        assert!(op_norm(&(&d.p - half_ones())) < 1e-15);
        assert!(op_norm(&d.f) < 1e-15);
        assert_eq!(d.block_ranks, [0, 2, 0]);
    }

    #[test]
    fn decompose_identity() {
        let q = NormalProjection::new(frame(2, 2), linalg::eye(4)).unwrap();
        let d = q.decompose().unwrap();
        assert!(op_norm(&(&d.e - linalg::eye(4))) < 1e-15);
        assert_eq!(d.block_ranks, [4, 0, 0]);
    }

    #[test]
    fn selfadjoint_projection_examples() {
        let f = frame(1, 1);
        let e = selfadjoint_projection_onto(&Subspace::positive_axis(f)).unwrap();
        assert!(op_norm(&(e - f.p_plus())) < 1e-15);

        let s = Subspace::span(f, &from_real_rows(2, 1, &[1.0, 0.5])).unwrap();
        let e = selfadjoint_projection_onto(&s).unwrap();
        let expected = from_real_rows(2, 2, &[1.0, -0.5, 0.5, -0.25]) * r(1.0 / 0.75);
        assert!(op_norm(&(e - expected)) < 1e-14);

        let e = selfadjoint_projection_onto(&Subspace::full(f)).unwrap();
        assert!(op_norm(&(e - linalg::eye(2))) < 1e-15);
    }

    #[test]
    fn selfadjoint_projection_needs_regular() {
        let s = Subspace::span(frame(1, 1), &from_real_rows(2, 1, &[1.0, 1.0])).unwrap();
        assert!(matches!(
            selfadjoint_projection_onto(&s),
            Err(KreinError::Subspace("regular"))
        ));
    }

    #[test]
    fn neutral_pair_examples() {
        let f = frame(1, 1);
        let s = Subspace::span(f, &from_real_rows(2, 1, &[1.0, 1.0])).unwrap();
        let t = Subspace::span(f, &from_real_rows(2, 1, &[1.0, -1.0])).unwrap();
        let p = neutral_pair_projection(&s, &t).unwrap();
        assert!(op_norm(&(p - half_ones())) < 1e-15);

        let z = neutral_pair_projection(&Subspace::zero(f), &Subspace::zero(f)).unwrap();
        assert!(op_norm(&z) == 0.0);

        assert!(matches!(
            neutral_pair_projection(&s, &s),
            Err(KreinError::NotDualPair(_))
        ));
    }

    #[test]
    fn profile_examples() {
        let f = frame(2, 2);
        assert_eq!(
            NormalProjection::new(f, linalg::eye(4)).unwrap().signature_profile(),
            SignatureProfile::new(2, 2, 0, 0, 0)
        );
        assert_eq!(
            NormalProjection::new(f, f.p_plus()).unwrap().signature_profile(),
            SignatureProfile::new(2, 0, 0, 0, 2)
        );
        assert_eq!(
            NormalProjection::new(frame(1, 1), half_ones())
                .unwrap()
                .signature_profile(),
            SignatureProfile::new(0, 0, 1, 0, 0)
        );
    }

    #[test]
    fn family_member_regular_range_is_selfadjoint_projection() {
        let f = frame(2, 1);
        let s = Subspace::span(f, &from_real_rows(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.3])).unwrap();
        assert!(s.is_regular());
        let z = linalg::zeros(3, 3);
        let q = normal_family_member(&s, &s, &z, &z).unwrap();
        let e = selfadjoint_projection_onto(&s).unwrap();
        assert!(op_norm(&(q.q() - e)) < 1e-13);
    }

    #[test]
    fn family_member_identity() {
        let f = frame(1, 2);
        let full = Subspace::full(f);
        let z = linalg::zeros(3, 3);
        let q = normal_family_member(&full, &full, &z, &z).unwrap();
        assert!(op_norm(&(q.q() - linalg::eye(3))) < 1e-14);
    }

    #[test]
    fn family_member_degenerate_plane() {
        let s = degenerate_plane();
        let m = Subspace::span(*s.frame(), &from_real_rows(3, 1, &[1.0, 0.0, 0.0])).unwrap();
        let z = linalg::zeros(3, 3);
        let q = normal_family_member(&s, &m, &z, &z).unwrap();
        assert!(q.range().same_as(&s));
        assert!(q.regular_part().same_as(&m));
        assert!(s.frame().classify(q.q()).unwrap().is_j_normal_projection);
    }

    #[test]
    fn family_member_rejects_bad_parameters() {
        let s = degenerate_plane();
        let f = *s.frame();
        let m = Subspace::span(f, &from_real_rows(3, 1, &[1.0, 0.0, 0.0])).unwrap();
        let z = linalg::zeros(3, 3);
        // hermitian (not antihermitian) A on S°
        let iso = s.isotropic_part();
        let a = iso.projector();
        assert!(matches!(
            normal_family_member(&s, &m, &a, &z),
            Err(KreinError::Parameter(_))
        ));
        // M not inside S
        let bad = Subspace::span(f, &from_real_rows(3, 1, &[0.0, 1.0, 0.0])).unwrap();
        assert!(normal_family_member(&s, &bad, &z, &z).is_err());
    }
}
