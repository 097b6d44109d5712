//! The acceptance suite: ten criteria, each a batch of seeded random
//! instances checked against fixed tolerances. Used by the `selftest`
//! command and by the `acceptance` test target.

use std::time::Instant;

use serde::Serialize;

use crate::error::{KreinError, Result};
use crate::fixed_range::{oblique_projection, FixedRangeFamily};
use crate::generate::{
    perturb_within_radius, random_family_member, random_family_parameters, random_idempotent, random_j_unitary,
    random_neutral_pair, random_normal_projection, random_pseudo_regular, Stream,
};
use crate::krein::KreinFrame;
use crate::linalg::{self, op_norm, r, Mat};
use crate::orbit::{
    biorthogonal_basis, basis_condition, commutant_projection, conjugation_residual, connect, kato_gap, same_orbit,
    submersion_fd_residual, tangent_split, OrbitSectionContext,
};
use crate::projection::NormalProjection;
use crate::subspace::{Signature, SignatureProfile, Subspace};
use crate::unitary::{angular_of_image, ando_block_unitary, exp_antihermitian, log_near_identity, UnitaryPath};

/// Frames of the decomposition corpus.
pub const CORPUS_FRAMES: [(usize, usize); 4] = [(1, 1), (2, 1), (2, 2), (3, 3)];

const MAX_FAILURE_NOTES: usize = 5;

#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub name: &'static str,
    pub worst: f64,
    pub bound: f64,
    pub count: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub cases: usize,
    pub checks: Vec<CheckSummary>,
    pub errors: usize,
    pub notes: Vec<String>,
    pub seconds: f64,
    pub time_limit: Option<f64>,
    pub passed: bool,
}

impl CriterionReport {
    /// One line: id, verdict, worst value per check and the runtime.
    pub fn summary_line(&self) -> String {
        let checks: Vec<String> = self
            .checks
            .iter()
            .map(|c| format!("{} {:.2e}<={:.0e}", c.name, c.worst, c.bound))
            .collect();
        let time = match self.time_limit {
            Some(limit) => format!("{:.2}s (limit {limit}s)", self.seconds),
            None => format!("{:.2}s", self.seconds),
        };
        format!(
            "criterion {:>2} {} {}: {} cases, {} errors; {}; {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.cases,
            self.errors,
            checks.join(", "),
            time
        )
    }
}

struct Tally {
    id: u32,
    title: &'static str,
    cases: usize,
    checks: Vec<CheckSummary>,
    errors: usize,
    notes: Vec<String>,
    start: Instant,
    time_limit: Option<f64>,
}

impl Tally {
    fn new(id: u32, title: &'static str, time_limit: Option<f64>) -> Self {
        Tally {
            id,
            title,
            cases: 0,
            checks: Vec::new(),
            errors: 0,
            notes: Vec::new(),
            start: Instant::now(),
            time_limit,
        }
    }

    fn record(&mut self, name: &'static str, value: f64, bound: f64) {
        let ok = value <= bound;
        let entry = match self.checks.iter_mut().find(|c| c.name == name) {
            Some(c) => c,
            None => {
                self.checks.push(CheckSummary {
                    name,
                    worst: 0.0,
                    bound,
                    count: 0,
                    passed: true,
                });
                self.checks.last_mut().unwrap()
            }
        };
        entry.count += 1;
        if value.is_nan() || value > entry.worst {
            entry.worst = value;
        }
        if !ok {
            entry.passed = false;
            if self.notes.len() < MAX_FAILURE_NOTES {
                self.notes.push(format!("case {}: {name} = {value:.3e} > {bound:.0e}", self.cases));
            }
        }
    }

    fn flag(&mut self, name: &'static str, ok: bool) {
        self.record(name, if ok { 0.0 } else { 1.0 }, 0.0);
    }

    fn error(&mut self, context: &str, e: &KreinError) {
        self.errors += 1;
        if self.notes.len() < MAX_FAILURE_NOTES {
            self.notes.push(format!("case {}: {context}: {e}", self.cases));
        }
    }

    /// Runs one case, counting an error return as a failure.
    fn case(&mut self, context: &str, f: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = f(self) {
            self.error(context, &e);
        }
        self.cases += 1;
    }

    fn finish(self) -> CriterionReport {
        let seconds = self.start.elapsed().as_secs_f64();
        let in_time = self.time_limit.is_none_or(|limit| seconds < limit);
        let passed = self.errors == 0 && self.cases > 0 && self.checks.iter().all(|c| c.passed) && in_time;
        CriterionReport {
            id: self.id,
            title: self.title,
            cases: self.cases,
            checks: self.checks,
            errors: self.errors,
            notes: self.notes,
            seconds,
            time_limit: self.time_limit,
            passed,
        }
    }
}

/// Case seeds: disjoint per criterion, reproducible per base seed.
fn seed_for(base: u64, criterion: u64, i: u64) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (criterion << 40) ^ i
}

/// Parameter stream of a criterion (tags above those of the generators).
fn params(base: u64, criterion: u64) -> Stream {
    Stream::new(base, 100 + criterion)
}

fn frame(p: usize, q: usize) -> KreinFrame {
    KreinFrame::new(p, q).expect("positive dimension")
}

fn rel(residual: f64, scale: f64) -> f64 {
    residual / scale.max(1.0)
}

/// All (frame, profile) pairs of the corpus frames.
pub fn corpus_classes() -> Vec<(KreinFrame, SignatureProfile)> {
    CORPUS_FRAMES
        .iter()
        .flat_map(|&(p, q)| SignatureProfile::enumerate(p, q).into_iter().map(move |pr| (frame(p, q), pr)))
        .collect()
}

/// The decomposition corpus: `size` projections cycling through every
/// feasible profile of the corpus frames.
pub fn corpus(seed: u64, size: usize) -> Vec<(KreinFrame, SignatureProfile, u64)> {
    let classes = corpus_classes();
    (0..size)
        .map(|i| {
            let (f, pr) = classes[i % classes.len()];
            (f, pr, seed_for(seed, 0, i as u64))
        })
        .collect()
}

pub fn decomposition_identities(seed: u64) -> CriterionReport {
    let mut t = Tally::new(1, "decomposition identities", Some(5.0));
    for (f, profile, s) in corpus(seed, 500) {
        t.case("decomposition", |t| {
            let q = random_normal_projection(f, s, profile)?;
            let (e, p, fm) = (q.e(), q.p(), q.f());
            let ps = q.p_sharp();
            let nq = q.norm();
            let n2 = |a: &Mat, b: &Mat| op_norm(a) * op_norm(b);
            t.record("Q=E+P", rel(op_norm(&(q.q() - e - p)), nq * nq), 1e-8);
            let pps = op_norm(&(p * &ps)).max(op_norm(&(&ps * p)));
            t.record("PP#=P#P=0", rel(pps, n2(p, &ps)), 1e-8);
            t.record("E#=E", rel(op_norm(&(f.sharp(e) - e)), op_norm(e)), 1e-8);
            t.record("E=E^2", rel(op_norm(&(e * e - e)), n2(e, e)), 1e-8);
            let mut cross: f64 = 0.0;
            for (x, y) in [
                (e, p),
                (p, e),
                (e, &ps),
                (&ps, e),
                (fm, p),
                (p, fm),
                (fm, &ps),
                (&ps, fm),
            ] {
                cross = cross.max(rel(op_norm(&(x * y)), n2(x, y)));
            }
            t.record("cross products", cross, 1e-8);
            Ok(())
        });
    }
    t.finish()
}

pub fn three_block_splitting(seed: u64) -> CriterionReport {
    let mut t = Tally::new(2, "three-block J-orthogonal splitting", None);
    for (f, profile, s) in corpus(seed, 500) {
        t.case("splitting", |t| {
            let q = random_normal_projection(f, s, profile)?;
            let g = q.neutral_block();
            let bases: Vec<Mat> = [q.e(), &g, q.f()]
                .into_iter()
                .map(|x| linalg::column_space(x, f.rank_threshold(op_norm(x))))
                .collect();
            let total: usize = bases.iter().map(|b| b.ncols()).sum();
            t.flag("rank sum = n", total == f.n());
            t.flag("dim R(P+P#) = 2k0", bases[1].ncols() == 2 * profile.k0);
            let mut gram: f64 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        gram = gram.max(op_norm(&f.gram(&bases[i], &bases[j])));
                    }
                }
            }
            t.record("cross Gram", gram, 1e-8);
            Ok(())
        });
    }
    t.finish()
}

const PAIR_FRAMES: [(usize, usize); 6] = [(1, 1), (2, 1), (2, 2), (3, 2), (3, 3), (6, 6)];

pub fn biorthogonality(seed: u64) -> CriterionReport {
    let mut t = Tally::new(3, "biorthogonal bases of neutral dual pairs", None);
    let mut rng = params(seed, 3);
    for i in 0..200u64 {
        let (p, q) = PAIR_FRAMES[i as usize % PAIR_FRAMES.len()];
        let k = 1 + rng.below(p.min(q));
        t.case("neutral pair", |t| {
            let f = frame(p, q);
            let (s, tt, s_basis) = random_neutral_pair(f, seed_for(seed, 3, i), k)?;
            let t_basis = biorthogonal_basis(&s, &tt, &s_basis)?;
            let pairing = f.gram(&t_basis, &s_basis);
            t.record("[s_i,t_j]=delta_ij", op_norm(&(pairing - linalg::eye(k))), 1e-8);
            let outside = op_norm(&(&t_basis - tt.projector() * &t_basis));
            t.record("t_j in T", rel(outside, op_norm(&t_basis)), 1e-8);
            t.flag("condition finite", basis_condition(&t_basis).is_finite());
            Ok(())
        });
    }
    t.finish()
}

pub fn local_section(seed: u64) -> CriterionReport {
    let mut t = Tally::new(4, "local cross section", Some(20.0));
    let mut rng = params(seed, 4);
    let bases: Vec<(KreinFrame, SignatureProfile)> = corpus_classes()
        .into_iter()
        .filter(|(f, _)| f.n() <= 4)
        .collect();
    for (b, &(f, profile)) in bases.iter().enumerate() {
        let q0 = match random_normal_projection(f, seed_for(seed, 4, b as u64), profile)
            .and_then(|q0| OrbitSectionContext::new(q0.clone()).map(|ctx| (q0, ctx)))
        {
            Ok(x) => x,
            Err(e) => {
                t.error("base point", &e);
                continue;
            }
        };
        let (q0, ctx) = q0;
        for i in 0..100u64 {
            let fraction = 0.02 + 0.96 * rng.uniform();
            t.case("section", |t| {
                let q = perturb_within_radius(&q0, seed_for(seed, 4, (b as u64) << 16 | i), fraction)?;
                let s = ctx.section(&q)?;
                t.record("conjugation", conjugation_residual(&s, q0.q(), q.q()), 1e-6);
                let sm = s.matrix();
                t.record("s*Js=J", op_norm(&(sm.adjoint() * f.j_left(sm) - f.j())), 1e-8);
                Ok(())
            });
        }
    }
    t.finish()
}

pub fn orbit_classification(seed: u64) -> CriterionReport {
    let mut t = Tally::new(5, "orbit classification", None);
    let mut rng = params(seed, 5);
    for (i, (f, profile, s)) in corpus(seed_for(seed, 5, 0), 200).into_iter().enumerate() {
        let spread = 0.9 * rng.uniform();
        t.case("conjugate profile", |t| {
            let q = random_normal_projection(f, s, profile)?;
            let u = random_j_unitary(f, seed_for(seed, 5, i as u64), spread)?;
            let moved = q.conjugate(u.matrix())?;
            t.flag("conjugates share profile", moved.signature_profile() == q.signature_profile());
            Ok(())
        });
    }

    let f = frame(2, 2);
    let profiles = SignatureProfile::enumerate(2, 2);
    let reps: Vec<Result<(NormalProjection, NormalProjection)>> = profiles
        .iter()
        .enumerate()
        .map(|(k, &pr)| {
            let a = random_normal_projection(f, seed_for(seed, 5, 1000 + 2 * k as u64), pr)?;
            let b = random_normal_projection(f, seed_for(seed, 5, 1001 + 2 * k as u64), pr)?;
            Ok((a, b))
        })
        .collect();
    for i in 0..reps.len() {
        for j in (i + 1)..reps.len() {
            if let (Ok((a, _)), Ok((b, _))) = (&reps[i], &reps[j]) {
                t.case("distinct profiles", |t| {
                    t.flag("distinct profiles not equivalent", !same_orbit(a, b));
                    Ok(())
                });
            }
        }
    }
    for rep in &reps {
        t.case("connector", |t| {
            let (a, b) = rep.as_ref().map_err(Clone::clone)?;
            t.flag("same profile equivalent", same_orbit(a, b));
            let c = connect(a, b)?;
            t.record("connector residual", c.residual, 1e-6);
            Ok(())
        });
    }
    t.finish()
}

const GROUP_FRAMES: [(usize, usize); 7] = [(1, 1), (2, 1), (1, 2), (2, 2), (3, 2), (3, 3), (6, 6)];

pub fn unitary_group(seed: u64) -> CriterionReport {
    let mut t = Tally::new(6, "J-unitary group: blocks, path, logarithm", None);
    let mut rng = params(seed, 6);
    for i in 0..200u64 {
        let (p, q) = GROUP_FRAMES[i as usize % GROUP_FRAMES.len()];
        let f = frame(p, q);
        let spread = 0.95 * rng.uniform();
        t.case("random J-unitary", |t| {
            let u = random_j_unitary(f, seed_for(seed, 6, i), spread)?;
            let um = u.matrix();
            let nu = op_norm(um);
            let (k, vp, vm) = angular_of_image(&u)?;
            let rebuilt = ando_block_unitary(f, &k, &vp, &vm)?;
            let (k2, vp2, vm2) = angular_of_image(&rebuilt)?;
            let blocks = op_norm(&(&k2 - &k)).max(op_norm(&(&vp2 - &vp))).max(op_norm(&(&vm2 - &vm)));
            t.record("U round trip", rel(op_norm(&(rebuilt.matrix() - um)), nu), 1e-8);
            t.record("(K,V+,V-) round trip", blocks, 1e-8);

            let path = UnitaryPath::new(&u)?;
            t.record("gamma(0)=I", op_norm(&(path.at(0.0)?.matrix() - linalg::eye(f.n()))), 1e-8);
            t.record("gamma(1)=U", rel(op_norm(&(path.at(1.0)?.matrix() - um)), nu), 1e-8);
            let mut worst: f64 = 0.0;
            for j in 0..50 {
                let g = path.at(j as f64 / 49.0)?;
                let ng = op_norm(g.matrix());
                worst = worst.max(rel(g.residual(), ng * ng));
            }
            t.record("gamma(t) J-unitary", worst, 1e-8);
            Ok(())
        });
        t.case("logarithm near identity", |t| {
            let x = rng.antihermitian(&f);
            let mut s = 2.0 * rng.uniform() + 1e-3;
            let mut u = exp_antihermitian(f, &(&x * r(s)))?;
            while op_norm(&(u.matrix() - linalg::eye(f.n()))) > 0.9 {
                s *= 0.5;
                u = exp_antihermitian(f, &(&x * r(s)))?;
            }
            let l = log_near_identity(&u)?;
            let nl = op_norm(&l);
            t.record("log J-antihermitian", rel(op_norm(&(&l + f.sharp(&l))), nl), 1e-9);
            t.record("exp(log U)=U", op_norm(&(linalg::expm(&l) - u.matrix())), 1e-8);
            Ok(())
        });
    }
    t.finish()
}

pub fn kato_bound(seed: u64) -> CriterionReport {
    let mut t = Tally::new(7, "gap between ranges of idempotents", None);
    let mut rng = params(seed, 7);
    for i in 0..500u64 {
        let n = 2 + rng.below(11);
        let k = 1 + rng.below(n - 1);
        let near = i % 2 == 0;
        let eps = 10f64.powf(-4.0 * rng.uniform());
        let f = frame(n - n / 2, n / 2);
        t.case("idempotent pair", |t| {
            let e1 = random_idempotent(n, k, seed_for(seed, 7, 2 * i), 0.8)?;
            let e2 = if near {
                let a = linalg::eye(n) + rng.gaussian(n, n) * r(eps / (n as f64));
                let inv = linalg::inverse(&a, "perturbation")?;
                &a * &e1 * inv
            } else {
                random_idempotent(n, k, seed_for(seed, 7, 2 * i + 1), 0.8)?
            };
            let g = match kato_gap(&f, &e1, &e2) {
                Ok(g) => g.gap - g.bound,
                Err(KreinError::Residual { residual, bound, .. }) => residual - bound,
                Err(e) => return Err(e),
            };
            t.record("gap - bound", g.max(0.0), 1e-10);
            Ok(())
        });
    }
    t.finish()
}

pub fn tangent_machinery(seed: u64) -> CriterionReport {
    let mut t = Tally::new(8, "tangent machinery", None);
    let mut rng = params(seed, 8);
    for (f, profile, s) in corpus(seed_for(seed, 8, 0), 100) {
        t.case("tangent", |t| {
            let q0 = random_normal_projection(f, s, profile)?;
            let nq = q0.norm();
            let x = rng.gaussian(f.n(), f.n());
            let cx = commutant_projection(&q0, &x)?;
            let ccx = commutant_projection(&q0, &cx)?;
            let nc = op_norm(&cx);
            t.record("commutant idempotent", rel(op_norm(&(&ccx - &cx)), nc * nq.powi(4)), 1e-9);
            t.record("commutes with Q0", rel(op_norm(&(&cx * q0.q() - q0.q() * &cx)), nc * nq), 1e-9);
            t.record("in u_J", rel(op_norm(&(&cx + f.sharp(&cx))), nc), 1e-9);

            let xa = rng.antihermitian(&f);
            let split = tangent_split(&q0, &xa)?;
            let na = op_norm(&split.a0);
            let res = &split.residuals;
            t.record("A0^3=A0", rel(res.a0_cubed, na.powi(3)), 1e-10);
            t.record("R0^2=R0", rel(res.r0_idempotent, na.powi(4)), 1e-10);
            t.record("R0+R0#=A0^2", rel(res.r0_sum, na * na), 1e-10);
            let comp = op_norm(&split.ls_complement).max(op_norm(&split.la_complement));
            t.record("tangent complements vanish", rel(comp, op_norm(&xa) * nq.powi(5)), 1e-9);

            let fd = submersion_fd_residual(&q0, &xa, 1e-4)?;
            t.record("submersion FD (relative)", fd, 1e-6);
            Ok(())
        });
    }
    t.finish()
}

const FAMILY_CLASSES: [(usize, usize, Signature); 8] = [
    (1, 1, Signature { kp: 0, km: 0, k0: 1 }),
    (2, 1, Signature { kp: 1, km: 0, k0: 1 }),
    (2, 2, Signature { kp: 0, km: 1, k0: 1 }),
    (2, 2, Signature { kp: 0, km: 0, k0: 2 }),
    (3, 2, Signature { kp: 1, km: 1, k0: 1 }),
    (3, 3, Signature { kp: 1, km: 0, k0: 2 }),
    (3, 3, Signature { kp: 2, km: 1, k0: 1 }),
    (4, 3, Signature { kp: 1, km: 1, k0: 2 }),
];

/// `[B_M 0] [B_M B_0]⁺`: the oblique projection onto `M` along `S₀`,
/// solved directly from coordinates in the combined basis.
fn oblique_by_coordinates(m: &Subspace, s0: &Subspace) -> Result<Mat> {
    let w = linalg::hcat(m.basis(), s0.basis());
    let gram = linalg::inverse(&(w.adjoint() * &w), "combined basis Gram")?;
    let coords = gram * w.adjoint();
    Ok(m.basis() * coords.rows(0, m.dim()))
}

pub fn fixed_range_suite(seed: u64) -> CriterionReport {
    let mut t = Tally::new(9, "fixed-range family and covering map", None);
    let mut rng = params(seed, 9);
    let families: Vec<Result<FixedRangeFamily>> = FAMILY_CLASSES
        .iter()
        .enumerate()
        .map(|(i, &(p, q, sig))| {
            let s = random_pseudo_regular(frame(p, q), seed_for(seed, 9, i as u64), sig)?;
            FixedRangeFamily::new(s, None)
        })
        .collect();
    for i in 0..100u64 {
        let family = &families[i as usize % families.len()];
        let scale = 0.1 + 0.9 * rng.uniform();
        t.case("family pair", |t| {
            let family = family.as_ref().map_err(Clone::clone)?;
            let (_, _, m) = random_family_parameters(family, seed_for(seed, 9, 1000 + i), scale)?;
            let direct = oblique_by_coordinates(&m, family.isotropic())?;
            let formula = oblique_projection(&m, family.isotropic())?;
            t.record("oblique formula", rel(op_norm(&(&formula - &direct)), op_norm(&direct)), 1e-9);

            let q1 = random_family_member(family, seed_for(seed, 9, 2000 + i), scale)?;
            let q2 = random_family_member(family, seed_for(seed, 9, 3000 + i), scale)?;
            let u = family.global_connector(&q1, &q2)?;
            t.record("connector transitivity", conjugation_residual(&u, q1.q(), q2.q()), 1e-6);

            let (_, res) = family.covering_residuals(&q1)?;
            t.record("f(r(Q))=Q", res.f_after_r, 1e-6);
            t.record("r(f(Q'))=Q'", res.r_after_f, 1e-6);

            let selected = family.deck_selection(&m)?;
            let deck = family.deck_of(&selected)?;
            let angle = deck.principal_angles(&m).into_iter().fold(0.0, f64::max);
            t.flag("deck dimension", deck.dim() == m.dim());
            t.record("deck_of(deck_selection(M))=M", angle, 1e-6);
            Ok(())
        });
    }
    t.finish()
}

/// Bitwise equality of two matrices.
fn identical(a: &Mat, b: &Mat) -> bool {
    a.shape() == b.shape()
        && a.iter()
            .zip(b.iter())
            .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits())
}

fn reproducible(seed: u64) -> Result<bool> {
    let f = frame(3, 2);
    let profile = SignatureProfile::new(1, 0, 1, 1, 1);
    let twice = |g: &dyn Fn() -> Result<Mat>| -> Result<bool> { Ok(identical(&g()?, &g()?)) };
    let mut ok = twice(&|| Ok(random_j_unitary(f, seed, 0.7)?.into_matrix()))?;
    ok &= twice(&|| Ok(random_pseudo_regular(f, seed, Signature { kp: 1, km: 1, k0: 1 })?.basis().clone()))?;
    ok &= twice(&|| Ok(random_normal_projection(f, seed, profile)?.q().clone()))?;
    ok &= twice(&|| {
        let q0 = random_normal_projection(f, seed, profile)?;
        Ok(perturb_within_radius(&q0, seed, 0.5)?.q().clone())
    })?;
    ok &= twice(&|| Ok(random_neutral_pair(f, seed, 2)?.2))?;
    ok &= twice(&|| random_idempotent(5, 2, seed, 0.5))?;
    let differs = !identical(
        random_j_unitary(f, seed, 0.7)?.matrix(),
        random_j_unitary(f, seed.wrapping_add(1), 0.7)?.matrix(),
    );
    Ok(ok && differs)
}

fn runtime_and_reproducibility(seed: u64, earlier: &[CriterionReport]) -> CriterionReport {
    let mut t = Tally::new(10, "total runtime and reproducibility", None);
    t.case("reproducibility", |t| {
        t.flag("bitwise reproducible per seed", reproducible(seed)?);
        Ok(())
    });
    let total: f64 = earlier.iter().map(|c| c.seconds).sum::<f64>() + t.start.elapsed().as_secs_f64();
    t.record("total seconds", total, 60.0);
    t.finish()
}

pub type CriterionFn = fn(u64) -> CriterionReport;

/// Criteria 1 to 9 in order; criterion 10 is assembled from their timings.
pub const CRITERIA: [CriterionFn; 9] = [
    decomposition_identities,
    three_block_splitting,
    biorthogonality,
    local_section,
    orbit_classification,
    unitary_group,
    kato_bound,
    tangent_machinery,
    fixed_range_suite,
];

/// Runs every criterion sequentially, calling `progress` after each.
pub fn run_all(seed: u64, mut progress: impl FnMut(&CriterionReport)) -> Vec<CriterionReport> {
    let mut out = Vec::with_capacity(10);
    for criterion in CRITERIA {
        let report = criterion(seed);
        progress(&report);
        out.push(report);
    }
    let last = runtime_and_reproducibility(seed, &out);
    progress(&last);
    out.push(last);
    out
}

/// Like [`run_all`] but runs criteria 1 to 9 on separate threads. The
/// per-criterion timings then overlap, so the total is the wall clock.
pub fn run_all_parallel(seed: u64) -> Vec<CriterionReport> {
    let start = Instant::now();
    let mut out: Vec<CriterionReport> = std::thread::scope(|scope| {
        let handles: Vec<_> = CRITERIA.iter().map(|&c| scope.spawn(move || c(seed))).collect();
        handles.into_iter().map(|h| h.join().expect("criterion thread panicked")).collect()
    });
    let mut last = runtime_and_reproducibility(seed, &[]);
    let wall = start.elapsed().as_secs_f64();
    if let Some(check) = last.checks.iter_mut().find(|c| c.name == "total seconds") {
        check.worst = wall;
        check.passed = wall <= check.bound;
    }
    last.passed = last.errors == 0 && last.checks.iter().all(|c| c.passed);
    out.push(last);
    out
}
