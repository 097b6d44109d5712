//! Seeded generators of test instances with prescribed invariants.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded with the 32-byte
//! key `seed.to_le_bytes() ‖ 0²⁴` and with `stream` selecting an
//! independent stream. Uniforms are `(next_u64 >> 11)·2⁻⁵³`; standard
//! normals use one Box–Muller draw per pair of uniforms,
//! `√(−2 ln(1 − u₁))·cos(2πu₂)`; complex normals are `(x + iy)/√2`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{KreinError, Result};
use crate::fixed_range::FixedRangeFamily;
use crate::krein::KreinFrame;
use crate::linalg::{self, c, op_norm, r, Mat};
use crate::orbit::OrbitSectionContext;
use crate::projection::NormalProjection;
use crate::subspace::{Signature, SignatureProfile, Subspace};
use crate::unitary::{ando_block_unitary, JUnitary};

/// Norm of the angular operator of the J-unitary used to move canonical
/// instances.
pub const CONJUGATION_SPREAD: f64 = 0.5;

/// Deterministic stream of uniforms and normals.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream);
        Stream { rng }
    }

    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn complex_normal(&mut self) -> linalg::C64 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let re = self.normal();
        let im = self.normal();
        c(re * h, im * h)
    }

    /// Entries filled column by column.
    pub fn gaussian(&mut self, rows: usize, cols: usize) -> Mat {
        let mut m = linalg::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = self.complex_normal();
            }
        }
        m
    }

    /// Index in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n.saturating_sub(1))
    }

    pub fn unitary(&mut self, n: usize) -> Mat {
        haar_unitary(&self.gaussian(n, n))
    }

    /// J-antihermitian matrix of unit operator norm (zero if the draw
    /// vanishes).
    pub fn antihermitian(&mut self, frame: &KreinFrame) -> Mat {
        let g = self.gaussian(frame.n(), frame.n());
        let x = (&g - frame.sharp(&g)) * r(0.5);
        let norm = op_norm(&x);
        if norm > 0.0 {
            x * r(1.0 / norm)
        } else {
            x
        }
    }
}

/// Unitary factor of a QR factorisation with the phases of `diag(R)`
/// moved into `Q`.
fn haar_unitary(g: &Mat) -> Mat {
    let n = g.nrows();
    if n == 0 {
        return linalg::zeros(0, 0);
    }
    let qr = g.clone().qr();
    let q = qr.q();
    let rr = qr.r();
    let mut out = q;
    for j in 0..n {
        let d = rr[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
        for i in 0..n {
            out[(i, j)] *= phase;
        }
    }
    out
}

fn stream_for(seed: u64, tag: u64) -> Stream {
    Stream::new(seed, tag)
}

const TAG_UNITARY: u64 = 1;
const TAG_PERTURB: u64 = 2;
const TAG_PAIR: u64 = 3;
const TAG_FAMILY: u64 = 4;
const TAG_IDEMPOTENT: u64 = 5;

/// `ando_block_unitary` with `‖K‖ = spread` and Haar-like `V±`.
pub fn random_j_unitary(frame: KreinFrame, seed: u64, spread: f64) -> Result<JUnitary> {
    if !(0.0..1.0).contains(&spread) {
        return Err(KreinError::Parameter(format!("spread {spread} outside [0, 1)")));
    }
    let mut rng = stream_for(seed, TAG_UNITARY);
    j_unitary_from(&mut rng, frame, spread)
}

fn j_unitary_from(rng: &mut Stream, frame: KreinFrame, spread: f64) -> Result<JUnitary> {
    let g = rng.gaussian(frame.q, frame.p);
    let norm = op_norm(&g);
    let k = if norm > 0.0 { g * r(spread / norm) } else { g };
    let v_plus = rng.unitary(frame.p);
    let v_minus = rng.unitary(frame.q);
    ando_block_unitary(frame, &k, &v_plus, &v_minus)
}

fn check_signature(frame: &KreinFrame, kp: usize, km: usize, k0: usize) -> Result<()> {
    if kp + k0 > frame.p || km + k0 > frame.q {
        return Err(KreinError::Infeasible(format!(
            "signature ({kp}, {km}, {k0}) does not fit frame ({}, {})",
            frame.p, frame.q
        )));
    }
    Ok(())
}

/// Canonical columns: `e₁..e_kp`, `f₁..f_km`, then `(e + f)/√2` pairs on
/// the next `k0` axes of each sign. Returns the columns and the neutral
/// partners `(e − f)/√2`.
fn canonical_columns(frame: &KreinFrame, kp: usize, km: usize, k0: usize) -> (Mat, Mat, Mat) {
    let n = frame.n();
    let p = frame.p;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut regular = linalg::zeros(n, kp + km);
    for i in 0..kp {
        regular[(i, i)] = linalg::ONE;
    }
    for i in 0..km {
        regular[(p + i, kp + i)] = linalg::ONE;
    }
    let mut s = linalg::zeros(n, k0);
    let mut t = linalg::zeros(n, k0);
    for i in 0..k0 {
        s[(kp + i, i)] = r(h);
        s[(p + km + i, i)] = r(h);
        t[(kp + i, i)] = r(h);
        t[(p + km + i, i)] = r(-h);
    }
    (regular, s, t)
}

/// A subspace with signature `(kp, km, k0)`: canonical axes and neutral
/// diagonals moved by a random J-unitary.
pub fn random_pseudo_regular(frame: KreinFrame, seed: u64, signature: Signature) -> Result<Subspace> {
    let Signature { kp, km, k0 } = signature;
    check_signature(&frame, kp, km, k0)?;
    let (regular, s, _) = canonical_columns(&frame, kp, km, k0);
    let u = random_j_unitary(frame, seed, CONJUGATION_SPREAD)?;
    let out = Subspace::span(frame, &(u.matrix() * linalg::hcat(&regular, &s)))?;
    if out.signature() != signature {
        return Err(KreinError::Numerical("generated subspace lost its signature"));
    }
    Ok(out)
}

/// The canonical representative of a five-index class: `E` onto the
/// first `kp` positive and `km` negative axes, `P = Σ s tᵢ* J` over `k0`
/// neutral pairs, and the remaining axes left to `F`.
pub fn canonical_normal_projection(frame: KreinFrame, profile: SignatureProfile) -> Result<NormalProjection> {
    if !profile.is_feasible(frame.p, frame.q) {
        return Err(KreinError::Infeasible(format!(
            "profile {profile} is not feasible for frame ({}, {})",
            frame.p, frame.q
        )));
    }
    let (regular, s, t) = canonical_columns(&frame, profile.kp, profile.km, profile.k0);
    let e = &regular * regular.adjoint();
    let p = frame.j_right(&(&s * t.adjoint()));
    NormalProjection::new(frame, e + p)
}

/// A J-unitary conjugate of the canonical representative of `profile`.
pub fn random_normal_projection(frame: KreinFrame, seed: u64, profile: SignatureProfile) -> Result<NormalProjection> {
    let base = canonical_normal_projection(frame, profile)?;
    let u = random_j_unitary(frame, seed, CONJUGATION_SPREAD)?;
    let q = base.conjugate(u.matrix())?;
    if q.signature_profile() != profile {
        return Err(KreinError::Numerical("generated projection lost its profile"));
    }
    Ok(q)
}

/// `Q = e^{sX} Q₀ e^{−sX}` with random unit `X ∈ u_J` and `s` halved from
/// 1 until `‖Q − Q₀‖ ≤ fraction·r_{Q₀}`.
pub fn perturb_within_radius(q0: &NormalProjection, seed: u64, fraction: f64) -> Result<NormalProjection> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(KreinError::Parameter(format!("fraction {fraction} outside (0, 1)")));
    }
    let frame = *q0.frame();
    let radius = OrbitSectionContext::new(q0.clone())?.radius();
    let mut rng = stream_for(seed, TAG_PERTURB);
    let x = rng.antihermitian(&frame);
    let mut s = 1.0;
    for _ in 0..200 {
        let u = linalg::expm(&(&x * r(s)));
        let q = q0.conjugate(&u)?;
        if op_norm(&(q.q() - q0.q())) <= fraction * radius {
            return Ok(q);
        }
        s *= 0.5;
    }
    Err(KreinError::Numerical("perturbation did not shrink into the radius"))
}

/// A random neutral dual pair `(S, T)` of dimension `k`, with an
/// orthonormal basis of `S`.
pub fn random_neutral_pair(frame: KreinFrame, seed: u64, k: usize) -> Result<(Subspace, Subspace, Mat)> {
    check_signature(&frame, 0, 0, k)?;
    let (_, s, t) = canonical_columns(&frame, 0, 0, k);
    let mut rng = stream_for(seed, TAG_PAIR);
    let u = j_unitary_from(&mut rng, frame, CONJUGATION_SPREAD)?;
    let s_sub = Subspace::span(frame, &(u.matrix() * s))?;
    // T starts as the exact partner of S and is tilted by e^{0.3X}; the
    // tilt is dropped if it would spoil the pairing
    let tilt = linalg::expm(&(rng.antihermitian(&frame) * r(0.3)));
    let tilted = Subspace::span(frame, &(u.matrix() * &tilt * &t))?;
    let pairing = frame.gram(tilted.basis(), s_sub.basis());
    let t_sub = if linalg::smallest_singular_value(&pairing) > 1e-2 {
        tilted
    } else {
        Subspace::span(frame, &(u.matrix() * t))?
    };
    let mix = rng.unitary(k);
    let s_basis = s_sub.basis() * mix;
    Ok((s_sub, t_sub, s_basis))
}

/// A random member of `Q_S` built by the block formula with random
/// admissible deck `M`, antihermitian `A` on `S°` and `B : S^⊥ → S°`
/// vanishing on `J(S°)`.
pub fn random_family_member(family: &FixedRangeFamily, seed: u64, scale: f64) -> Result<NormalProjection> {
    let (a, b, m) = random_family_parameters(family, seed, scale)?;
    crate::projection::normal_family_member(family.range(), &m, &a, &b)
}

pub fn random_family_parameters(family: &FixedRangeFamily, seed: u64, scale: f64) -> Result<(Mat, Mat, Subspace)> {
    let frame = *family.frame();
    let mut rng = stream_for(seed, TAG_FAMILY);
    let z = family.isotropic().basis().clone();
    let k0 = z.ncols();
    let m0 = family.base_deck().basis().clone();

    let h = rng.gaussian(k0, k0);
    let a = &z * ((&h - h.adjoint()) * r(0.5 * scale)) * z.adjoint();

    let perp = family.range().orth_complement();
    let j_iso = Subspace::span(frame, &frame.j_left(&z))?;
    let perp_off = Subspace::span(frame, &(perp.projector() - j_iso.projector()))?;
    let cmat = rng.gaussian(k0, perp_off.dim());
    let b = &z * (cmat * r(scale)) * perp_off.basis().adjoint();

    let w = rng.gaussian(k0, m0.ncols());
    let m = Subspace::span(frame, &(&m0 + &z * (w * r(scale))))?;
    Ok((a, b, m))
}

/// Random idempotent of rank `k`: `A diag(I_k, 0) A⁻¹` with `A = I + G/‖G‖·spread`.
pub fn random_idempotent(n: usize, k: usize, seed: u64, spread: f64) -> Result<Mat> {
    let mut rng = stream_for(seed, TAG_IDEMPOTENT);
    let g = rng.gaussian(n, n);
    let norm = op_norm(&g).max(f64::MIN_POSITIVE);
    let a = linalg::eye(n) + g * r(spread / norm);
    let inv = linalg::inverse(&a, "idempotent conjugator")?;
    let mut d = linalg::zeros(n, n);
    for i in 0..k.min(n) {
        d[(i, i)] = linalg::ONE;
    }
    Ok(&a * d * inv)
}
