//! The family `Q_S` of J-normal projections with a fixed pseudo-regular
//! range `S`, its decks `Q_{S,M}`, a global cross section and the covering
//! map onto the base deck.

use serde::Serialize;

use crate::error::{KreinError, Result};
use crate::krein::KreinFrame;
use crate::linalg::{self, op_norm, Mat};
use crate::orbit::{conjugation_residual, NeutralAnchor};
use crate::projection::{check_complement, normal_family_member, selfadjoint_projection_onto, NormalProjection};
use crate::subspace::Subspace;
use crate::unitary::JUnitary;

/// The projection, inside `R ∔ S₀`, onto `R` along `S₀`:
/// `P_R (P_R + P_{S₀})⁻¹` with the inverse taken on the sum. The ambient
/// matrix returned is zero on the orthogonal complement of the sum.
pub fn oblique_projection(e_range: &Subspace, s0: &Subspace) -> Result<Mat> {
    let frame = e_range.frame();
    let sum = e_range.sum(s0)?;
    if sum.dim() != e_range.dim() + s0.dim() {
        return Err(KreinError::Subspace("a direct sum (ranges intersect)"));
    }
    let w = sum.basis();
    let a = w.adjoint() * e_range.projector() * w;
    let b = w.adjoint() * s0.projector() * w;
    let inv = linalg::inverse(&(&a + b), "P_R + P_S0 on the sum")?;
    let p = w * a * inv * w.adjoint();

    let norm = op_norm(&p);
    let bound = frame.tol * (norm * norm).max(1.0);
    let residual = op_norm(&(&p * &p - &p))
        .max(op_norm(&(&p * e_range.basis() - e_range.basis())))
        .max(op_norm(&(&p * s0.basis())));
    if residual > bound {
        return Err(KreinError::Residual {
            what: "oblique projection range/kernel",
            residual,
            bound,
        });
    }
    Ok(p)
}

/// `P_{M₂//S₀}` restricted to `M₁` (returned as `P_{M₂//S₀} P_{M₁}`), a
/// J-isometric isomorphism `M₁ → M₂` when `M₁ [∔] S₀ = M₂ [∔] S₀`.
pub fn restricted_isomorphism(m1: &Subspace, m2: &Subspace, s0: &Subspace) -> Result<Mat> {
    let frame = m1.frame();
    let span1 = m1.sum(s0)?;
    let span2 = m2.sum(s0)?;
    if span1.dim() != m1.dim() + s0.dim() || span2.dim() != m2.dim() + s0.dim() || !span1.same_as(&span2) {
        return Err(KreinError::Subspace("a complement of S0 in a common span"));
    }
    let p = oblique_projection(m2, s0)?;
    let t = &p * m1.projector();
    let image = &t * m1.basis();
    let residual = op_norm(&(frame.gram(&image, &image) - m1.gram()));
    let bound = frame.tol * op_norm(&p).powi(2).max(1.0);
    if residual > bound {
        return Err(KreinError::Residual {
            what: "restricted isomorphism J-isometry",
            residual,
            bound,
        });
    }
    if linalg::rank(&image, frame.rank_threshold(1.0)) < m1.dim() {
        return Err(KreinError::Numerical("restricted isomorphism is not injective"));
    }
    Ok(t)
}

/// `d(M, N) = ‖E_M − E_N‖` for regular subspaces.
pub fn deck_distance(m: &Subspace, n: &Subspace) -> Result<f64> {
    Ok(op_norm(&(selfadjoint_projection_onto(m)? - selfadjoint_projection_onto(n)?)))
}

/// `Q_S` for a pseudo-regular `S = M₀ [∔] S°`, with base point
/// `Q₀ = g(M₀)` and a neutral-link anchor fixed at `Q₀`.
#[derive(Debug, Clone)]
pub struct FixedRangeFamily {
    frame: KreinFrame,
    s: Subspace,
    s_iso: Subspace,
    m0: Subspace,
    q0: NormalProjection,
    anchor: NeutralAnchor,
}

#[derive(Debug, Clone)]
pub struct CoveringImage {
    /// `r(Q) ∈ Q_{S,M₀}`.
    pub image: NormalProjection,
    /// The deck `M` of `Q`.
    pub deck: Subspace,
    /// `s(g(M)) = U(Q₀, g(M))`.
    pub section: JUnitary,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoveringResiduals {
    /// `‖f(r(Q)) − Q‖`.
    pub f_after_r: f64,
    /// `‖r(f(Q')) − Q'‖` for `Q' = r(Q)`.
    pub r_after_f: f64,
    /// Distance from `r(Q)` to the value obtained through
    /// `Ad_{s^#}(U) Q₀`, `U = U(g(M), Q)`.
    pub ad_form: f64,
}

impl FixedRangeFamily {
    /// Family over `s` with base deck `m0`, defaulting to `S ⊖ S°`.
    pub fn new(s: Subspace, m0: Option<Subspace>) -> Result<Self> {
        let frame = *s.frame();
        let s_iso = s.isotropic_part();
        let m0 = match m0 {
            Some(m) => m,
            None => s.regular_complement()?,
        };
        let zero = linalg::zeros(frame.n(), frame.n());
        let q0 = normal_family_member(&s, &m0, &zero, &zero)?;
        let anchor = NeutralAnchor::new(&q0)?;
        Ok(FixedRangeFamily {
            frame,
            s,
            s_iso,
            m0,
            q0,
            anchor,
        })
    }

    /// The family through a given projection, with its deck as base deck.
    /// The base point is `g(M₀)`, which need not equal `q`.
    pub fn through(q: &NormalProjection) -> Result<Self> {
        FixedRangeFamily::new(q.range(), Some(q.regular_part()))
    }

    pub fn frame(&self) -> &KreinFrame {
        &self.frame
    }

    pub fn range(&self) -> &Subspace {
        &self.s
    }

    pub fn isotropic(&self) -> &Subspace {
        &self.s_iso
    }

    pub fn base_deck(&self) -> &Subspace {
        &self.m0
    }

    pub fn base_point(&self) -> &NormalProjection {
        &self.q0
    }

    fn check_member(&self, q: &NormalProjection) -> Result<()> {
        if q.frame().p != self.frame.p || q.frame().q != self.frame.q {
            return Err(KreinError::dim(
                format!("frame ({}, {})", self.frame.p, self.frame.q),
                format!("frame ({}, {})", q.frame().p, q.frame().q),
            ));
        }
        if !q.range().same_as(&self.s) {
            return Err(KreinError::Subspace("the range of the family"));
        }
        Ok(())
    }

    /// `M = R(QQ^#)`.
    pub fn deck_of(&self, q: &NormalProjection) -> Result<Subspace> {
        self.check_member(q)?;
        let m = q.regular_part();
        check_complement(&self.s, &m)?;
        Ok(m)
    }

    /// `g(M)`: the member of `Q_{S,M}` with `A = B = 0`.
    pub fn deck_selection(&self, m: &Subspace) -> Result<NormalProjection> {
        let zero = linalg::zeros(self.frame.n(), self.frame.n());
        normal_family_member(&self.s, m, &zero, &zero)
    }

    /// `U(Q₁, Q₂) = P_{R(E₂)//S°} E₁ + P_{R(F₂)//S°} F₁ + V(Q₂) V(Q₁)^# (P₁ + P₁^#)`,
    /// a J-unitary with `U(S) = S` and `U Q₁ U^# = Q₂`. The oblique
    /// projections act inside `S` and `S^{[⊥]}` respectively.
    pub fn global_connector(&self, q1: &NormalProjection, q2: &NormalProjection) -> Result<JUnitary> {
        self.check_member(q1)?;
        self.check_member(q2)?;
        let frame = self.frame;
        let range_of = |m: &Mat| {
            Subspace::from_orthonormal(frame, linalg::column_space(m, frame.rank_threshold(op_norm(m))))
        };
        let e_part = oblique_projection(&range_of(q2.e())?, &self.s_iso)? * q1.e();
        let f_part = oblique_projection(&range_of(q2.f())?, &self.s_iso)? * q1.f();
        let v1 = self.anchor.link_unchecked(q1)?;
        let v2 = self.anchor.link_unchecked(q2)?;
        let u = e_part + f_part + v2 * frame.sharp(&v1) * q1.neutral_block();
        let u = JUnitary::new(frame, u)?;

        let scale = op_norm(u.matrix()).powi(2).max(1.0) * q1.norm().max(q2.norm());
        let residual = conjugation_residual(&u, q1.q(), q2.q());
        if residual > frame.tol * scale {
            return Err(KreinError::Residual {
                what: "global connector U Q1 U^# = Q2",
                residual,
                bound: frame.tol * scale,
            });
        }
        let moved = self.s.image(u.matrix())?;
        if !moved.same_as(&self.s) {
            return Err(KreinError::Numerical("global connector does not leave S invariant"));
        }
        Ok(u)
    }

    /// The global section `s(Q') = U(Q₀, Q')`.
    pub fn section(&self, q: &NormalProjection) -> Result<JUnitary> {
        self.global_connector(&self.q0, q)
    }

    /// `r(Q) = s(g(M))^# Q s(g(M))` with `M` the deck of `Q`.
    pub fn covering_map(&self, q: &NormalProjection) -> Result<CoveringImage> {
        let deck = self.deck_of(q)?;
        let g = self.deck_selection(&deck)?;
        let section = self.section(&g)?;
        let image = NormalProjection::new(self.frame, section.inverse() * q.q() * section.matrix())?;
        Ok(CoveringImage {
            image,
            deck,
            section,
        })
    }

    /// `f(Q') = s(g(M)) Q' s(g(M))^#`, the inverse of `r` on the deck `M`.
    pub fn covering_inverse(&self, m: &Subspace, q_base: &NormalProjection) -> Result<NormalProjection> {
        let g = self.deck_selection(m)?;
        let section = self.section(&g)?;
        q_base.conjugate(section.matrix())
    }

    /// Round-trip and consistency residuals of the covering map at `q`.
    pub fn covering_residuals(&self, q: &NormalProjection) -> Result<(CoveringImage, CoveringResiduals)> {
        let cover = self.covering_map(q)?;
        let back = cover.section.conjugate(cover.image.q());
        let f_after_r = op_norm(&(back - q.q()));

        let forward = NormalProjection::new(self.frame, cover.section.conjugate(cover.image.q()))?;
        let again = self.covering_map(&forward)?;
        let r_after_f = op_norm(&(again.image.q() - cover.image.q()));

        let g = self.deck_selection(&cover.deck)?;
        let u = self.global_connector(&g, q)?;
        let ad = cover.section.inverse() * u.matrix() * cover.section.matrix();
        let via_ad = &ad * self.q0.q() * self.frame.sharp(&ad);
        let ad_form = op_norm(&(via_ad - cover.image.q()));
        Ok((
            cover,
            CoveringResiduals {
                f_after_r,
                r_after_f,
                ad_form,
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, from_real_rows, r};
    use crate::projection::neutral_pair_projection;

    fn frame(p: usize, q: usize) -> KreinFrame {
        KreinFrame::new(p, q).unwrap()
    }

    fn span(f: KreinFrame, rows: usize, cols: usize, data: &[f64]) -> Subspace {
        Subspace::span(f, &from_real_rows(rows, cols, data)).unwrap()
    }

    fn degenerate_plane() -> Subspace {
        span(frame(2, 1), 3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 1.0])
    }

    fn tilted_deck(t: f64) -> Subspace {
        span(frame(2, 1), 3, 1, &[1.0, t, t])
    }

    fn neutral_q(phi: f64) -> NormalProjection {
        let f = frame(1, 1);
        let s = Subspace::span(f, &Mat::from_column_slice(2, 1, &[r(1.0), r(1.0)])).unwrap();
        let t = Subspace::span(f, &Mat::from_column_slice(2, 1, &[r(1.0), -c(phi.cos(), phi.sin())])).unwrap();
        NormalProjection::new(f, neutral_pair_projection(&s, &t).unwrap()).unwrap()
    }

    #[test]
    fn oblique_examples() {
        let f = frame(2, 1);
        let e = span(f, 3, 1, &[1.0, 0.0, 0.0]);
        let p = oblique_projection(&e, &Subspace::zero(f)).unwrap();
        assert!(op_norm(&(p - e.projector())) < 1e-15);

        let s = degenerate_plane();
        let iso = s.isotropic_part();
        let p = oblique_projection(&e, &iso).unwrap();
        let u = iso.basis().clone();
        let basis = linalg::hcat(e.basis(), &u);
        let coords = basis.adjoint() * &p * &basis;
        let expected = from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(op_norm(&(coords - expected)) < 1e-14);

        let p = oblique_projection(&s, &Subspace::zero(f)).unwrap();
        assert!(op_norm(&(p - s.projector())) < 1e-14);

        assert!(oblique_projection(&s, &iso).is_err());
    }

    #[test]
    fn restricted_isomorphism_examples() {
        let s = degenerate_plane();
        let f = *s.frame();
        let iso = s.isotropic_part();
        let m1 = tilted_deck(0.0);
        let w = restricted_isomorphism(&m1, &m1, &iso).unwrap();
        assert!(op_norm(&(&w * m1.basis() - m1.basis())) < 1e-14);

        let hp = Subspace::positive_axis(f);
        let w = restricted_isomorphism(&hp, &hp, &Subspace::zero(f)).unwrap();
        assert!(op_norm(&(w - hp.projector())) < 1e-14);

        let m2 = tilted_deck(0.2);
        let w = restricted_isomorphism(&m1, &m2, &iso).unwrap();
        let image = &w * m1.basis();
        assert!(op_norm(&(f.gram(&image, &image) - m1.gram())) <= 1e-9);
        assert!(m2.contains_all(&image));

        let outside = span(f, 3, 1, &[0.0, 0.0, 1.0]);
        assert!(restricted_isomorphism(&m1, &outside, &iso).is_err());
    }

    #[test]
    fn deck_examples() {
        let f = frame(2, 1);
        let regular = span(f, 3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.3]);
        let fam = FixedRangeFamily::new(regular.clone(), None).unwrap();
        assert!(fam.deck_of(fam.base_point()).unwrap().same_as(&regular));

        let q = neutral_q(0.0);
        let fam = FixedRangeFamily::new(q.range(), None).unwrap();
        assert_eq!(fam.deck_of(&q).unwrap().dim(), 0);

        let fam = FixedRangeFamily::new(degenerate_plane(), None).unwrap();
        let m = tilted_deck(0.1);
        let g = fam.deck_selection(&m).unwrap();
        assert!(fam.deck_of(&g).unwrap().same_as(&m));
    }

    #[test]
    fn deck_selection_examples() {
        let f = frame(2, 1);
        let regular = span(f, 3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.3]);
        let fam = FixedRangeFamily::new(regular.clone(), None).unwrap();
        let g = fam.deck_selection(&regular).unwrap();
        let e = selfadjoint_projection_onto(&regular).unwrap();
        assert!(op_norm(&(g.q() - e)) < 1e-13);

        let fam = FixedRangeFamily::new(degenerate_plane(), None).unwrap();
        let g = fam.deck_selection(&tilted_deck(0.0)).unwrap();
        assert!(g.range().same_as(fam.range()));
        assert!(g.regular_part().same_as(&tilted_deck(0.0)));

        // nearby decks give nearby selections
        let m = tilted_deck(0.1);
        let gm = fam.deck_selection(&m).unwrap();
        for k in 1..5 {
            let eps = 10f64.powi(-k - 1);
            let n = tilted_deck(0.1 + eps);
            let gn = fam.deck_selection(&n).unwrap();
            let d = deck_distance(&m, &n).unwrap();
            assert!(op_norm(&(gm.q() - gn.q())) <= 10.0 * d);
        }
    }

    #[test]
    fn global_connector_neutral_line() {
        let q1 = neutral_q(0.3);
        let q2 = neutral_q(1.2);
        let fam = FixedRangeFamily::new(q1.range(), None).unwrap();
        let u = fam.global_connector(&q1, &q2).unwrap();
        assert!(conjugation_residual(&u, q1.q(), q2.q()) <= 1e-7);
        let u = fam.global_connector(&q1, &q1).unwrap();
        assert!(conjugation_residual(&u, q1.q(), q1.q()) <= 1e-9);
    }

    #[test]
    fn global_connector_regular_range_is_trivial() {
        let f = frame(2, 1);
        let regular = span(f, 3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.3]);
        let fam = FixedRangeFamily::new(regular, None).unwrap();
        let q0 = fam.base_point().clone();
        let u = fam.global_connector(&q0, &q0).unwrap();
        assert!(op_norm(&(u.matrix() - linalg::eye(3))) < 1e-12);
    }

    #[test]
    fn global_connector_rejects_foreign_range() {
        let fam = FixedRangeFamily::new(degenerate_plane(), None).unwrap();
        let f = frame(2, 1);
        let other = NormalProjection::new(f, f.p_plus()).unwrap();
        assert!(matches!(
            fam.global_connector(fam.base_point(), &other),
            Err(KreinError::Subspace(_))
        ));
    }

    #[test]
    fn covering_examples() {
        let f = frame(2, 1);
        let regular = span(f, 3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.3]);
        let fam = FixedRangeFamily::new(regular, None).unwrap();
        let cover = fam.covering_map(fam.base_point()).unwrap();
        assert!(op_norm(&(cover.image.q() - fam.base_point().q())) < 1e-12);

        let fam = FixedRangeFamily::new(degenerate_plane(), None).unwrap();
        let (cover, res) = fam.covering_residuals(fam.base_point()).unwrap();
        assert!(cover.image.regular_part().same_as(fam.base_deck()));
        assert!(res.f_after_r < 1e-9 && res.r_after_f < 1e-9 && res.ad_form < 1e-9, "{res:?}");

        let q = fam.deck_selection(&tilted_deck(0.4)).unwrap();
        let (cover, res) = fam.covering_residuals(&q).unwrap();
        assert!(cover.image.regular_part().same_as(fam.base_deck()));
        assert!(res.f_after_r < 1e-9 && res.r_after_f < 1e-9 && res.ad_form < 1e-9, "{res:?}");
    }
}
