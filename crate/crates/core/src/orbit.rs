//! Orbits of J-normal projections under the J-unitary group: local cross
//! sections, the neutral link between isotropic parts, orbit
//! classification and tangent-space splittings.

use serde::Serialize;

use crate::error::{KreinError, Result};
use crate::krein::KreinFrame;
use crate::linalg::{self, op_norm, r, Mat};
use crate::projection::{neutral_pair_projection, NormalProjection};
use crate::subspace::Subspace;
use crate::unitary::{is_antihermitian, JUnitary, UnitaryPath};

fn check_idempotent(frame: &KreinFrame, e: &Mat, what: &'static str) -> Result<()> {
    frame.check_square(e)?;
    let norm = op_norm(e);
    let residual = op_norm(&(e * e - e));
    let bound = frame.tol * (norm * norm).max(1.0);
    if residual > bound {
        return Err(KreinError::Residual {
            what,
            residual,
            bound,
        });
    }
    Ok(())
}

fn check_orthogonal_projection(frame: &KreinFrame, p: &Mat) -> Result<()> {
    check_idempotent(frame, p, "idempotency of orthogonal projection")?;
    let residual = op_norm(&(p - p.adjoint()));
    if residual > frame.tol {
        return Err(KreinError::Residual {
            what: "hermiticity of orthogonal projection",
            residual,
            bound: frame.tol,
        });
    }
    Ok(())
}

fn check_selfadjoint_projection(frame: &KreinFrame, e: &Mat) -> Result<()> {
    check_idempotent(frame, e, "idempotency of J-selfadjoint projection")?;
    let residual = op_norm(&(frame.sharp(e) - e));
    let bound = frame.tol * op_norm(e).max(1.0);
    if residual > bound {
        return Err(KreinError::Residual {
            what: "J-selfadjointness of projection",
            residual,
            bound,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KatoGap {
    /// `‖P_{R(E₁)} − P_{R(E₂)}‖`.
    pub gap: f64,
    /// `‖E₁ − E₂‖`.
    pub bound: f64,
}

/// Compares the gap between the ranges of two idempotents with the
/// distance between the idempotents themselves.
pub fn kato_gap(frame: &KreinFrame, e1: &Mat, e2: &Mat) -> Result<KatoGap> {
    check_idempotent(frame, e1, "idempotency of E1")?;
    check_idempotent(frame, e2, "idempotency of E2")?;
    let b1 = linalg::column_space(e1, frame.rank_threshold(op_norm(e1)));
    let b2 = linalg::column_space(e2, frame.rank_threshold(op_norm(e2)));
    let gap = linalg::subspace_gap(&b1, &b2);
    let bound = op_norm(&(e1 - e2));
    if gap > bound + frame.tol {
        return Err(KreinError::Residual {
            what: "range gap bounded by idempotent distance",
            residual: gap,
            bound,
        });
    }
    Ok(KatoGap { gap, bound })
}

/// Unitary part of `S = PP₀ + (I − P)(I − P₀)`, which carries `R(P₀)`
/// onto `R(P)`.
pub fn unitary_polar_section(frame: &KreinFrame, p: &Mat, p0: &Mat) -> Result<Mat> {
    check_orthogonal_projection(frame, p)?;
    check_orthogonal_projection(frame, p0)?;
    let distance = op_norm(&(p - p0));
    if distance >= 1.0 {
        return Err(KreinError::OutOfRange {
            what: "polar section: ‖P − P0‖",
            distance,
            limit: 1.0,
        });
    }
    let id = linalg::eye(frame.n());
    let s = p * p0 + (&id - p) * (&id - p0);
    let u = linalg::polar_unitary(&s);
    let residual = op_norm(&(&u * p0 * u.adjoint() - p));
    if residual > frame.tol {
        return Err(KreinError::Residual {
            what: "polar section U P0 U* = P",
            residual,
            bound: frame.tol,
        });
    }
    Ok(u)
}

/// `W = exp(½ log(R_E R_{E₀}))` with `R = 2E − I`; `W E₀ W^# = E`.
pub fn selfadjoint_section(frame: &KreinFrame, e0: &Mat, e: &Mat) -> Result<JUnitary> {
    check_selfadjoint_projection(frame, e0)?;
    check_selfadjoint_projection(frame, e)?;
    let id = linalg::eye(frame.n());
    let r_e = e * r(2.0) - &id;
    let r_e0 = e0 * r(2.0) - &id;
    let g = &r_e * &r_e0;
    let distance = op_norm(&(&g - &id));
    if distance >= 1.0 {
        return Err(KreinError::OutOfRange {
            what: "selfadjoint section: ‖R_E R_E0 − I‖",
            distance,
            limit: 1.0,
        });
    }
    let x = linalg::logm_principal(&g)? * r(0.5);
    let scale = op_norm(&x).max(1.0);
    let bound = 10.0 * frame.tol * scale;
    let antihermitian = op_norm(&(&x + frame.sharp(&x)));
    let diagonal = op_norm(&(e0 * &x * e0)).max(op_norm(&((&id - e0) * &x * (&id - e0))));
    for (what, residual) in [
        ("J-antihermitian section generator", antihermitian),
        ("co-diagonal section generator", diagonal),
    ] {
        if residual > bound {
            return Err(KreinError::Residual {
                what,
                residual,
                bound,
            });
        }
    }
    let w = JUnitary::new(*frame, linalg::expm(&x))?;
    let residual = op_norm(&(w.conjugate(e0) - e));
    let bound = frame.tol * op_norm(w.matrix()).powi(2).max(1.0);
    if residual > bound {
        return Err(KreinError::Residual {
            what: "selfadjoint section W E0 W^# = E",
            residual,
            bound,
        });
    }
    Ok(w)
}

/// `t_j = P^# J s_j`, where `P` projects onto `S` along `T^{[⊥]}`; the
/// result satisfies `[s_i, t_j] = δ_ij`.
pub fn biorthogonal_basis(s: &Subspace, t: &Subspace, s_basis: &Mat) -> Result<Mat> {
    let frame = s.frame();
    if s_basis.nrows() != frame.n() || s_basis.ncols() != s.dim() {
        return Err(KreinError::dim(
            format!("{}x{}", frame.n(), s.dim()),
            format!("{}x{}", s_basis.nrows(), s_basis.ncols()),
        ));
    }
    let orthonormality = op_norm(&(s_basis.adjoint() * s_basis - linalg::eye(s.dim())));
    if orthonormality > frame.tol || !s.contains_all(s_basis) {
        return Err(KreinError::Parameter("s_basis must be an orthonormal basis of S".into()));
    }
    let p = neutral_pair_projection(s, t)?;
    let t_basis = frame.sharp(&p) * frame.j_left(s_basis);
    check_biorthogonal(frame, s_basis, &t_basis)?;
    Ok(t_basis)
}

fn check_biorthogonal(frame: &KreinFrame, s_basis: &Mat, t_basis: &Mat) -> Result<()> {
    let k = s_basis.ncols();
    // entry (j, i) is [s_i, t_j]
    let pairing = frame.gram(t_basis, s_basis);
    let residual = op_norm(&(pairing - linalg::eye(k)));
    let bound = frame.tol * op_norm(t_basis).max(1.0);
    if residual > bound {
        return Err(KreinError::Residual {
            what: "biorthogonality [s_i, t_j] = δ_ij",
            residual,
            bound,
        });
    }
    if linalg::rank(t_basis, frame.rank_threshold(1.0)) < k {
        return Err(KreinError::Numerical("biorthogonal basis is rank deficient"));
    }
    Ok(())
}

/// Condition number of the columns of a basis (ratio of extreme singular
/// values); 1 for an empty basis.
pub fn basis_condition(basis: &Mat) -> f64 {
    let sv = linalg::singular_values(basis);
    match (sv.first(), sv.last()) {
        (Some(hi), Some(lo)) => hi / lo,
        _ => 1.0,
    }
}

/// Fixed reference data for the neutral link at `Q₀`: an SVD-derived
/// orthonormal basis `s⁰` of `R(Q₀)°` and its biorthogonal partner
/// `t⁰ = P₀^# J s⁰` in `N(Q₀)°`.
#[derive(Debug, Clone)]
pub(crate) struct NeutralAnchor {
    frame: KreinFrame,
    q0: Mat,
    p0_orth: Mat,
    s0: Mat,
    t0: Mat,
    limit: f64,
}

impl NeutralAnchor {
    pub(crate) fn new(q0: &NormalProjection) -> Result<Self> {
        let frame = *q0.frame();
        let s0 = q0.range_isotropic().basis().clone();
        let t0 = frame.sharp(q0.p()) * frame.j_left(&s0);
        check_biorthogonal(&frame, &s0, &t0)?;
        Ok(NeutralAnchor {
            frame,
            q0: q0.q().clone(),
            p0_orth: linalg::orth_projector(&s0),
            limit: 1.0 / (2.0 * (1.0 + q0.norm())),
            s0,
            t0,
        })
    }

    pub(crate) fn dim(&self) -> usize {
        self.s0.ncols()
    }

    /// `V(Q) = [s_Q t_Q] [t⁰ s⁰]* J`: sends `s⁰ᵢ ↦ s_{Q,i}`, `t⁰ᵢ ↦ t_{Q,i}`
    /// and vanishes on the J-orthogonal complement of `R(P₀ + P₀^#)`.
    /// `s_Q` is `s⁰` carried by the polar section onto `R(P)`, or `s⁰`
    /// itself when `R(P) = R(P₀)`.
    pub(crate) fn link_unchecked(&self, q: &NormalProjection) -> Result<Mat> {
        let frame = &self.frame;
        let iso = q.range_isotropic();
        if iso.dim() != self.dim() {
            return Err(KreinError::dim(
                format!("isotropic dimension {}", self.dim()),
                format!("isotropic dimension {}", iso.dim()),
            ));
        }
        let s_q = if self.dim() == 0 {
            self.s0.clone()
        } else {
            let u = unitary_polar_section(frame, &iso.projector(), &self.p0_orth)?;
            u * &self.s0
        };
        let t_q = frame.sharp(q.p()) * frame.j_left(&s_q);
        check_biorthogonal(frame, &s_q, &t_q)?;
        let image = linalg::hcat(&s_q, &t_q);
        let coords = linalg::hcat(&self.t0, &self.s0);
        Ok(frame.j_right(&(image * coords.adjoint())))
    }

    pub(crate) fn link(&self, q: &NormalProjection) -> Result<Mat> {
        let distance = op_norm(&(q.q() - &self.q0));
        if distance >= self.limit {
            return Err(KreinError::OutOfRange {
                what: "neutral link: ‖Q − Q0‖",
                distance,
                limit: self.limit,
            });
        }
        self.link_unchecked(q)
    }
}

/// J-isometric map from `R(Q₀)° ∔ N(Q₀)°` onto `R(Q)° ∔ N(Q)°`, zero on the
/// J-orthogonal complement. Requires `‖Q − Q₀‖ < 1/(2(1 + ‖Q₀‖))`.
pub fn neutral_link(q0: &NormalProjection, q: &NormalProjection) -> Result<Mat> {
    same_frame(q0, q)?;
    NeutralAnchor::new(q0)?.link(q)
}

fn same_frame(a: &NormalProjection, b: &NormalProjection) -> Result<()> {
    if a.frame().p != b.frame().p || a.frame().q != b.frame().q {
        return Err(KreinError::dim(
            format!("frame ({}, {})", a.frame().p, a.frame().q),
            format!("frame ({}, {})", b.frame().p, b.frame().q),
        ));
    }
    Ok(())
}

/// Largest `2^{-k}` not exceeding `1/(2(1 + 2‖E₀‖))`, so that
/// `‖E − E₀‖ < ρ` forces `‖R_E R_{E₀} − I‖ < 1`.
fn sub_radius(norm: f64) -> f64 {
    let target = 1.0 / (2.0 * (1.0 + 2.0 * norm));
    2f64.powi(target.log2().floor() as i32)
}

/// Base point of the local cross section, with its radii.
#[derive(Debug, Clone)]
pub struct OrbitSectionContext {
    q0: NormalProjection,
    r_e0: f64,
    r_f0: f64,
    radius: f64,
    anchor: NeutralAnchor,
}

impl OrbitSectionContext {
    pub fn new(q0: NormalProjection) -> Result<Self> {
        let r_e0 = sub_radius(op_norm(q0.e()));
        let r_f0 = sub_radius(op_norm(q0.f()));
        let scale = 1.0 + 2.0 * q0.norm();
        let radius = (r_e0 / scale).min(r_f0 / scale).min(1.0 / scale);
        let anchor = NeutralAnchor::new(&q0)?;
        Ok(OrbitSectionContext {
            q0,
            r_e0,
            r_f0,
            radius,
            anchor,
        })
    }

    pub fn q0(&self) -> &NormalProjection {
        &self.q0
    }

    /// `r_{Q₀}`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn sub_radii(&self) -> (f64, f64) {
        (self.r_e0, self.r_f0)
    }

    /// `s(Q) = E s₁(E) E₀ + F s₂(F) F₀ + (P + P^#) V(Q) (P₀ + P₀^#)`.
    pub fn section(&self, q: &NormalProjection) -> Result<JUnitary> {
        same_frame(&self.q0, q)?;
        let frame = *self.q0.frame();
        let distance = op_norm(&(q.q() - self.q0.q()));
        if distance >= self.radius {
            return Err(KreinError::OutOfRange {
                what: "orbit section: ‖Q − Q0‖",
                distance,
                limit: self.radius,
            });
        }
        let q0 = &self.q0;
        let s1 = selfadjoint_section(&frame, q0.e(), q.e())?;
        let s2 = selfadjoint_section(&frame, q0.f(), q.f())?;
        let v = self.anchor.link(q)?;
        let s = q.e() * s1.matrix() * q0.e()
            + q.f() * s2.matrix() * q0.f()
            + q.neutral_block() * v * q0.neutral_block();
        let u = JUnitary::new(frame, s)?;
        let residual = conjugation_residual(&u, q0.q(), q.q());
        let bound = frame.tol * op_norm(u.matrix()).powi(2).max(1.0) * q.norm().max(1.0);
        if residual > bound {
            return Err(KreinError::Residual {
                what: "section conjugation s(Q) Q0 s(Q)^# = Q",
                residual,
                bound,
            });
        }
        Ok(u)
    }

    pub fn neutral_link(&self, q: &NormalProjection) -> Result<Mat> {
        same_frame(&self.q0, q)?;
        self.anchor.link(q)
    }
}

pub fn orbit_section(ctx: &OrbitSectionContext, q: &NormalProjection) -> Result<JUnitary> {
    ctx.section(q)
}

/// `‖U Q₁ U^# − Q₂‖`.
pub fn conjugation_residual(u: &JUnitary, q1: &Mat, q2: &Mat) -> f64 {
    op_norm(&(u.conjugate(q1) - q2))
}

/// Two J-normal projections lie in one orbit exactly when their five
/// inertia indices agree.
pub fn same_orbit(q1: &NormalProjection, q2: &NormalProjection) -> bool {
    q1.frame().p == q2.frame().p
        && q1.frame().q == q2.frame().q
        && q1.signature_profile() == q2.signature_profile()
}

/// `𝒫(h(X))` with `h(X) = (X − X^#)/2` and
/// `𝒫(Y) = E₀YE₀ + P₀YP₀ + P₀^#YP₀^# + F₀YF₀`.
pub fn commutant_projection(q0: &NormalProjection, x: &Mat) -> Result<Mat> {
    let frame = q0.frame();
    frame.check_square(x)?;
    let h = (x - frame.sharp(x)) * r(0.5);
    let ps = q0.p_sharp();
    Ok(q0.e() * &h * q0.e() + q0.p() * &h * q0.p() + &ps * &h * &ps + q0.f() * &h * q0.f())
}

/// A tangent vector `XQ − QX` to the orbit at `Q`, with its generator.
#[derive(Debug, Clone)]
pub struct TangentVector {
    pub base: NormalProjection,
    pub generator: Mat,
    pub value: Mat,
}

impl TangentVector {
    pub fn new(base: NormalProjection, generator: Mat) -> Result<Self> {
        is_antihermitian(base.frame(), &generator)?;
        let value = &generator * base.q() - base.q() * &generator;
        Ok(TangentVector {
            base,
            generator,
            value,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TangentSplitResiduals {
    pub a0_cubed: f64,
    pub r0_idempotent: f64,
    pub r0_sum: f64,
    pub a0_r0: f64,
    pub r0_sharp_a0: f64,
    pub reconstruction: f64,
}

/// Splitting of a tangent vector `T = XQ₀ − Q₀X` into its J-selfadjoint
/// part `T_s = [X, E₀ + ½(P₀ + P₀^#)]` and J-antihermitian part
/// `T_a = ½[X, A₀]`, `A₀ = P₀ − P₀^#`.
///
/// `T_s` is split against the three-block decomposition over `R(E₀)`,
/// `R(P₀ + P₀^#)`, `R(F₀)`: `ls_part` is its off-diagonal part and
/// `ls_complement` the block-diagonal remainder. `T_a` is split the same
/// way over `R(R₀)`, `R(R₀^#)`, `R(I − A₀²)` with `R₀ = ½(A₀² + A₀)`.
/// For genuine tangent vectors both complements vanish.
#[derive(Debug, Clone)]
pub struct TangentSplit {
    pub tangent: Mat,
    pub ls_part: Mat,
    pub la_part: Mat,
    pub ls_complement: Mat,
    pub la_complement: Mat,
    pub a0: Mat,
    pub r0: Mat,
    pub residuals: TangentSplitResiduals,
}

pub fn tangent_split(q0: &NormalProjection, x: &Mat) -> Result<TangentSplit> {
    let frame = q0.frame();
    is_antihermitian(frame, x)?;
    let n = frame.n();
    let id = linalg::eye(n);
    let tangent = x * q0.q() - q0.q() * x;
    let (ts, ta) = frame.hermitian_split(&tangent)?;

    let g0 = q0.neutral_block();
    let ls_complement = q0.e() * &ts * q0.e() + &g0 * &ts * &g0 + q0.f() * &ts * q0.f();
    let ls_part = &ts - &ls_complement;

    let a0 = q0.p() - q0.p_sharp();
    let a0_sq = &a0 * &a0;
    let r0 = (&a0_sq + &a0) * r(0.5);
    let r0s = frame.sharp(&r0);
    let nn = &id - &a0_sq;
    let la_complement = &r0 * &ta * &r0 + &r0s * &ta * &r0s + &nn * &ta * &nn;
    let la_part = &ta - &la_complement;

    let residuals = TangentSplitResiduals {
        a0_cubed: op_norm(&(&a0_sq * &a0 - &a0)),
        r0_idempotent: op_norm(&(&r0 * &r0 - &r0)),
        r0_sum: op_norm(&(&r0 + &r0s - &a0_sq)),
        a0_r0: op_norm(&(&a0 * &r0 - &r0)),
        r0_sharp_a0: op_norm(&(-(&r0s * &a0) - &r0s)),
        reconstruction: op_norm(&(&ls_part + &ls_complement + &la_part + &la_complement - &tangent)),
    };
    let bound = frame.tol * q0.norm().powi(3).max(1.0);
    for (what, value) in [
        ("A0^3 = A0", residuals.a0_cubed),
        ("R0^2 = R0", residuals.r0_idempotent),
        ("R0 + R0^# = A0^2", residuals.r0_sum),
        ("A0 R0 = R0", residuals.a0_r0),
        ("-R0^# A0 = R0^#", residuals.r0_sharp_a0),
    ] {
        if value > bound {
            return Err(KreinError::Residual {
                what,
                residual: value,
                bound,
            });
        }
    }
    Ok(TangentSplit {
        tangent,
        ls_part,
        la_part,
        ls_complement,
        la_complement,
        a0,
        r0,
        residuals,
    })
}

/// Derivative of `Q ↦ QQ^#` along `t ↦ e^{tX} Q e^{−tX}` at `t = 0`:
/// `(XQ − QX)Q^# + Q(XQ^# − Q^#X)`.
pub fn submersion_differential(q: &NormalProjection, x: &Mat) -> Result<Mat> {
    is_antihermitian(q.frame(), x)?;
    let qs = q.q_sharp();
    Ok((x * q.q() - q.q() * x) * &qs + q.q() * (x * &qs - &qs * x))
}

/// Discrepancy between [`submersion_differential`] and a central
/// difference of step `h`, relative to `max(‖D‖, ‖X‖·max(1, ‖Q‖²))` so that
/// vanishing derivatives (e.g. neutral `Q`, where `QQ^# = 0`) stay
/// meaningful.
pub fn submersion_fd_residual(q: &NormalProjection, x: &Mat, h: f64) -> Result<f64> {
    let d = submersion_differential(q, x)?;
    let frame = q.frame();
    let image = |t: f64| {
        let u = linalg::expm(&(x * r(t)));
        let moved = &u * q.q() * frame.sharp(&u);
        &moved * frame.sharp(&moved)
    };
    let fd = (image(h) - image(-h)) * r(0.5 / h);
    let scale = op_norm(&d).max(op_norm(x) * q.norm().powi(2).max(1.0));
    Ok(op_norm(&(&d - fd)) / scale.max(f64::MIN_POSITIVE))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConnectStep {
    pub t: f64,
    pub distance: f64,
    pub radius: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Connection {
    pub unitary: JUnitary,
    pub residual: f64,
    pub steps: Vec<ConnectStep>,
}

const MAX_CONNECT_STEPS: usize = 4096;
const MIN_CONNECT_STEP: f64 = 1e-7;

/// J-orthonormal basis adapted to `Q`: the positive and negative parts of
/// `R(E)`, then `(s ± t)/√2` for a biorthogonal pair spanning
/// `R(P + P^#)`, then `R(F)`. Columns are ordered positives first within
/// each block; returns the basis and the signs `[c_i, c_i]`.
fn adapted_basis(q: &NormalProjection) -> Result<(Mat, Vec<f64>)> {
    let frame = *q.frame();
    let (ep, em) = q.regular_part().j_orthonormal_basis()?;
    let f_range = Subspace::from_orthonormal(
        frame,
        linalg::column_space(q.f(), frame.rank_threshold(op_norm(q.f()))),
    )?;
    let (fp, fm) = f_range.j_orthonormal_basis()?;
    let s = q.range_isotropic().basis().clone();
    let t = frame.sharp(q.p()) * frame.j_left(&s);
    let h = r(std::f64::consts::FRAC_1_SQRT_2);
    let np = (&s + &t) * h;
    let nm = (&s - &t) * h;
    let mut basis = linalg::zeros(frame.n(), 0);
    let mut signs = Vec::new();
    for (block, sign) in [(&ep, 1.0), (&em, -1.0), (&np, 1.0), (&nm, -1.0), (&fp, 1.0), (&fm, -1.0)] {
        basis = linalg::hcat(&basis, block);
        signs.extend(std::iter::repeat_n(sign, block.ncols()));
    }
    if basis.ncols() != frame.n() {
        return Err(KreinError::Numerical("adapted basis does not span the space"));
    }
    Ok((basis, signs))
}

/// A J-unitary `W` with `W Q₁ W^# = Q₂`, built by matching adapted
/// J-orthonormal bases block by block.
pub fn frame_connector(q1: &NormalProjection, q2: &NormalProjection) -> Result<JUnitary> {
    same_frame(q1, q2)?;
    if !same_orbit(q1, q2) {
        return Err(KreinError::Infeasible(format!(
            "profiles differ: {} vs {}",
            q1.signature_profile(),
            q2.signature_profile()
        )));
    }
    let frame = *q1.frame();
    let (c1, signs) = adapted_basis(q1)?;
    let (c2, _) = adapted_basis(q2)?;
    // C₁⁻¹ = D C₁* J with D the sign pattern
    let d = Mat::from_diagonal(&nalgebra::DVector::from_iterator(
        signs.len(),
        signs.iter().map(|&s| r(s)),
    ));
    let c1_inv = d * frame.j_right(&c1.adjoint());
    JUnitary::new(frame, c2 * c1_inv)
}

/// Connects `Q₁` to `Q₂` in one orbit by composing local sections.
///
/// Inside the radius of `Q₁` a single section is used. Otherwise a
/// J-unitary `W` with `WQ₁W^# = Q₂` is built from adapted bases and its
/// path `γ_W(t)` to the identity supplies intermediate points
/// `γ_W(t)Q₁γ_W(t)^#`; each step is a local section based at the previous
/// point, with the step halved whenever the next point leaves the radius.
pub fn connect(q1: &NormalProjection, q2: &NormalProjection) -> Result<Connection> {
    same_frame(q1, q2)?;
    if !same_orbit(q1, q2) {
        return Err(KreinError::Infeasible(format!(
            "different orbits: {} vs {}",
            q1.signature_profile(),
            q2.signature_profile()
        )));
    }
    let frame = *q1.frame();
    let ctx = OrbitSectionContext::new(q1.clone())?;
    let distance = op_norm(&(q2.q() - q1.q()));
    if distance < ctx.radius() {
        let u = ctx.section(q2)?;
        let residual = conjugation_residual(&u, q1.q(), q2.q());
        return Ok(Connection {
            steps: vec![ConnectStep {
                t: 1.0,
                distance,
                radius: ctx.radius(),
                residual,
            }],
            unitary: u,
            residual,
        });
    }

    let w = frame_connector(q1, q2)?;
    let path = UnitaryPath::new(&w)?;
    let point = |t: f64| -> Result<NormalProjection> {
        if t >= 1.0 {
            return Ok(q2.clone());
        }
        q1.conjugate(path.at(t)?.matrix())
    };

    let mut acc = JUnitary::identity(frame);
    let mut ctx = ctx;
    let mut t = 0.0;
    let mut step: f64 = 1.0;
    let mut steps = Vec::new();
    while t < 1.0 {
        if steps.len() >= MAX_CONNECT_STEPS {
            return Err(KreinError::Numerical("connect: step budget exhausted"));
        }
        let next_t = (t + step).min(1.0);
        let next = point(next_t)?;
        let distance = op_norm(&(next.q() - ctx.q0().q()));
        if distance >= ctx.radius() {
            step *= 0.5;
            if step < MIN_CONNECT_STEP {
                return Err(KreinError::Numerical("connect: step size underflow"));
            }
            continue;
        }
        let s = ctx.section(&next)?;
        let residual = conjugation_residual(&s, ctx.q0().q(), next.q());
        steps.push(ConnectStep {
            t: next_t,
            distance,
            radius: ctx.radius(),
            residual,
        });
        acc = JUnitary::new(frame, s.matrix() * acc.matrix())?;
        t = next_t;
        ctx = OrbitSectionContext::new(next)?;
        step *= 2.0;
    }
    let residual = conjugation_residual(&acc, q1.q(), q2.q());
    Ok(Connection {
        unitary: acc,
        residual,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, from_real_rows};
    use crate::projection::selfadjoint_projection_onto;

    fn frame(p: usize, q: usize) -> KreinFrame {
        KreinFrame::new(p, q).unwrap()
    }

    fn half_ones() -> Mat {
        from_real_rows(2, 2, &[0.5, 0.5, 0.5, 0.5])
    }

    fn line(f: KreinFrame, v: &[linalg::C64]) -> Subspace {
        Subspace::span(f, &Mat::from_column_slice(v.len(), 1, v)).unwrap()
    }

    /// Projection onto span{(1,1)} along span{(1, e^{iφ})} in (1,1).
    fn neutral_q(phi: f64) -> NormalProjection {
        let f = frame(1, 1);
        let s = line(f, &[r(1.0), r(1.0)]);
        // T^{[⊥]} = span{(1, e^{iφ})} for T = span{(1, −e^{iφ})}
        let t = line(f, &[r(1.0), -c(phi.cos(), phi.sin())]);
        NormalProjection::new(f, neutral_pair_projection(&s, &t).unwrap()).unwrap()
    }

    #[test]
    fn kato_examples() {
        let f = frame(1, 1);
        let e1 = from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let g = kato_gap(&f, &e1, &e1).unwrap();
        assert_eq!((g.gap, g.bound), (0.0, 0.0));
        let g = kato_gap(&f, &e1, &half_ones()).unwrap();
        assert!((g.gap - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        assert!(g.gap <= g.bound + 1e-10);
        let z = linalg::zeros(2, 2);
        let g = kato_gap(&f, &z, &z).unwrap();
        assert_eq!((g.gap, g.bound), (0.0, 0.0));
        assert!(kato_gap(&f, &(&e1 * r(2.0)), &e1).is_err());
    }

    #[test]
    fn polar_section_examples() {
        let f = frame(1, 1);
        let p0 = from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let u = unitary_polar_section(&f, &p0, &p0).unwrap();
        assert!(op_norm(&(u - linalg::eye(2))) < 1e-15);

        let th = 0.1f64;
        let v = from_real_rows(2, 1, &[th.cos(), th.sin()]);
        let p = &v * v.adjoint();
        let u = unitary_polar_section(&f, &p, &p0).unwrap();
        let rot = from_real_rows(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        assert!(op_norm(&(&u - rot)) < 1e-14);
        assert!(op_norm(&(&u * &p0 * u.adjoint() - p)) < 1e-14);

        let p1 = from_real_rows(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            unitary_polar_section(&f, &p1, &p0),
            Err(KreinError::OutOfRange { .. })
        ));
    }

    #[test]
    fn selfadjoint_section_examples() {
        let f = frame(1, 1);
        let e0 = from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let w = selfadjoint_section(&f, &e0, &e0).unwrap();
        assert!(op_norm(&(w.matrix() - linalg::eye(2))) < 1e-14);

        let e = selfadjoint_projection_onto(&line(f, &[r(1.0), r(0.1)])).unwrap();
        let w = selfadjoint_section(&f, &e0, &e).unwrap();
        assert!(op_norm(&(w.conjugate(&e0) - &e)) <= 1e-8);

        let far = selfadjoint_projection_onto(&line(f, &[r(1.0), r(0.9)])).unwrap();
        assert!(matches!(
            selfadjoint_section(&f, &e0, &far),
            Err(KreinError::OutOfRange { .. })
        ));
    }

    #[test]
    fn biorthogonal_examples() {
        let f = frame(1, 1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = line(f, &[r(1.0), r(1.0)]);
        let t = line(f, &[r(1.0), r(-1.0)]);
        let s1 = from_real_rows(2, 1, &[h, h]);
        let t1 = biorthogonal_basis(&s, &t, &s1).unwrap();
        assert!(op_norm(&(t1 - from_real_rows(2, 1, &[h, -h]))) < 1e-15);

        let z = Subspace::zero(f);
        assert_eq!(biorthogonal_basis(&z, &z, &linalg::zeros(2, 0)).unwrap().ncols(), 0);
    }

    #[test]
    fn biorthogonal_basis_follows_permutation() {
        let f = frame(2, 2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = Subspace::span(
            f,
            &from_real_rows(4, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0]),
        )
        .unwrap();
        let t = Subspace::span(
            f,
            &from_real_rows(4, 2, &[1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0]),
        )
        .unwrap();
        let sb = from_real_rows(4, 2, &[h, 0.0, 0.0, h, h, 0.0, 0.0, h]);
        let swapped = from_real_rows(4, 2, &[0.0, h, h, 0.0, 0.0, h, h, 0.0]);
        let tb = biorthogonal_basis(&s, &t, &sb).unwrap();
        let tw = biorthogonal_basis(&s, &t, &swapped).unwrap();
        assert!((tb.column(0) - tw.column(1)).norm() < 1e-14);
        assert!((tb.column(1) - tw.column(0)).norm() < 1e-14);
    }

    #[test]
    fn neutral_link_examples() {
        let q0 = neutral_q(0.0);
        assert!(op_norm(&(q0.q() - half_ones())) < 1e-15);
        let v = neutral_link(&q0, &q0).unwrap();
        assert!(op_norm(&(v - linalg::eye(2))) < 1e-14);

        let q = neutral_q(0.05);
        let v = neutral_link(&q0, &q).unwrap();
        let f = q0.frame();
        let basis = linalg::eye(2);
        let moved = &v * &basis;
        assert!(op_norm(&(f.gram(&moved, &moved) - f.gram(&basis, &basis))) <= 1e-8);

        // the opposite kernel direction is too far from Q0
        let far = {
            let s = line(*f, &[r(1.0), r(1.0)]);
            let t = line(*f, &[r(1.0), c(0.05f64.cos(), 0.05f64.sin())]);
            NormalProjection::new(*f, neutral_pair_projection(&s, &t).unwrap()).unwrap()
        };
        assert!(matches!(neutral_link(&q0, &far), Err(KreinError::OutOfRange { .. })));

        let f = frame(2, 1);
        let e0 = NormalProjection::new(f, f.p_plus()).unwrap();
        assert!(op_norm(&neutral_link(&e0, &e0).unwrap()) == 0.0);
    }

    #[test]
    fn section_at_base_point() {
        let ctx = OrbitSectionContext::new(neutral_q(0.0)).unwrap();
        let u = ctx.section(ctx.q0()).unwrap();
        assert!(conjugation_residual(&u, ctx.q0().q(), ctx.q0().q()) < 1e-12);
        assert!(ctx.radius() > 0.0);
        // E0 = F0 = 0 up to rounding, so the radii sit at 1/4 or 1/2
        let (re, rf) = ctx.sub_radii();
        assert!((0.25..=0.5).contains(&re) && (0.25..=0.5).contains(&rf));
    }

    #[test]
    fn section_reproduces_small_conjugation() {
        let f = frame(1, 1);
        let ctx = OrbitSectionContext::new(neutral_q(0.0)).unwrap();
        let x = from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]) * r(1e-3) + f.j() * c(0.0, 2e-3);
        let u = crate::unitary::exp_antihermitian(f, &x).unwrap();
        let q = ctx.q0().conjugate(u.matrix()).unwrap();
        let s = ctx.section(&q).unwrap();
        assert!(conjugation_residual(&s, ctx.q0().q(), q.q()) < 1e-7);
        assert!(s.residual() < 1e-8);

        let far = NormalProjection::new(f, f.p_plus()).unwrap();
        let ctx = OrbitSectionContext::new(far).unwrap();
        let other = NormalProjection::new(f, f.p_minus()).unwrap();
        assert!(ctx.section(&other).is_err());
    }

    #[test]
    fn orbit_classification_examples() {
        let f = frame(1, 1);
        let id = NormalProjection::new(f, linalg::eye(2)).unwrap();
        let plus = NormalProjection::new(f, f.p_plus()).unwrap();
        assert!(!same_orbit(&id, &plus));
        assert!(same_orbit(&plus, &plus));
        let u = crate::unitary::exp_antihermitian(f, &from_real_rows(2, 2, &[0.0, 0.7, 0.7, 0.0])).unwrap();
        assert!(same_orbit(&plus, &plus.conjugate(u.matrix()).unwrap()));
    }

    #[test]
    fn commutant_examples() {
        let f = frame(1, 1);
        let id = NormalProjection::new(f, linalg::eye(2)).unwrap();
        let x = Mat::from_row_slice(2, 2, &[c(0.3, 0.1), c(-1.0, 0.5), c(0.2, 0.0), c(0.0, 0.7)]);
        let h = (&x - f.j_adjoint(&x).unwrap()) * r(0.5);
        assert!(op_norm(&(commutant_projection(&id, &x).unwrap() - &h)) < 1e-15);

        let q0 = neutral_q(0.0);
        let y = commutant_projection(&q0, &x).unwrap();
        assert!(op_norm(&(&y * q0.q() - q0.q() * &y)) < 1e-10);
        let yy = commutant_projection(&q0, &y).unwrap();
        assert!(op_norm(&(yy - &y)) < 1e-14);
        // fixed points: u_J ∩ commutant
        let z = f.j() * c(0.0, 0.4);
        let fixed = commutant_projection(&id, &z).unwrap();
        assert!(op_norm(&(fixed - z)) < 1e-15);
    }

    #[test]
    fn tangent_split_examples() {
        let f = frame(1, 1);
        let q0 = neutral_q(0.0);
        let x = from_real_rows(2, 2, &[0.0, 0.4, 0.4, 0.0]) + f.j() * c(0.0, 0.3);
        let split = tangent_split(&q0, &x).unwrap();
        let res = &split.residuals;
        for v in [res.a0_cubed, res.r0_idempotent, res.r0_sum, res.a0_r0, res.r0_sharp_a0, res.reconstruction] {
            assert!(v < 1e-10, "{res:?}");
        }
        assert!(op_norm(&split.ls_complement) < 1e-12);
        assert!(op_norm(&split.la_complement) < 1e-12);

        let commuting = f.j() * c(0.0, 0.3);
        let id = NormalProjection::new(f, linalg::eye(2)).unwrap();
        let split = tangent_split(&id, &commuting).unwrap();
        assert!(op_norm(&split.tangent) == 0.0);

        let e0 = NormalProjection::new(f, f.p_plus()).unwrap();
        let split = tangent_split(&e0, &x).unwrap();
        assert!(op_norm(&split.a0) == 0.0);
        assert!(op_norm(&split.la_part) == 0.0);

        assert!(tangent_split(&q0, &linalg::eye(2)).is_err());
    }

    #[test]
    fn submersion_examples() {
        let q = neutral_q(0.3);
        assert!(submersion_fd_residual(&q, &from_real_rows(2, 2, &[0.0, 0.4, 0.4, 0.0]), 1e-5).unwrap() < 1e-6);
        let f = frame(2, 1);
        let q = NormalProjection::new(f, f.p_plus()).unwrap();
        let z = linalg::zeros(3, 3);
        assert!(op_norm(&submersion_differential(&q, &z).unwrap()) == 0.0);
        let x = from_real_rows(3, 3, &[0.0, 0.0, 0.4, 0.0, 0.0, -0.2, 0.4, -0.2, 0.0]) + f.j() * c(0.0, 0.3);
        let d = submersion_differential(&q, &x).unwrap();
        assert!(op_norm(&d) > 0.1);
        assert!(submersion_fd_residual(&q, &x, 1e-5).unwrap() < 1e-6);
        let tv = TangentVector::new(q.clone(), x.clone()).unwrap();
        assert!(op_norm(&(tv.value - (&x * q.q() - q.q() * &x))) == 0.0);
    }

    #[test]
    fn connect_far_points() {
        let q1 = neutral_q(0.0);
        let q2 = neutral_q(2.0);
        let conn = connect(&q1, &q2).unwrap();
        assert!(conn.residual < 1e-6, "{}", conn.residual);
        assert!(conn.steps.len() > 1);

        let f = frame(1, 1);
        let plus = NormalProjection::new(f, f.p_plus()).unwrap();
        assert!(matches!(connect(&q1, &plus), Err(KreinError::Infeasible(_))));
    }

    #[test]
    fn frame_connector_matches_blocks() {
        let f = frame(2, 1);
        let q1 = NormalProjection::new(f, f.p_plus()).unwrap();
        let u = crate::unitary::ando_block_unitary(
            f,
            &from_real_rows(1, 2, &[0.6, 0.2]),
            &linalg::eye(2),
            &linalg::eye(1),
        )
        .unwrap();
        let q2 = q1.conjugate(u.matrix()).unwrap();
        let w = frame_connector(&q1, &q2).unwrap();
        assert!(conjugation_residual(&w, q1.q(), q2.q()) < 1e-12);
    }
}
