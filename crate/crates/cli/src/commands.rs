use std::path::Path;

use krein_kit::acceptance;
use krein_kit::fixed_range::{deck_distance, FixedRangeFamily};
use krein_kit::generate::{
    perturb_within_radius, random_family_member, random_j_unitary, random_normal_projection, random_pseudo_regular,
};
use krein_kit::io::{subspace_json, FamilyJson, OperatorJson};
use krein_kit::linalg::{self, op_norm};
use krein_kit::orbit::{conjugation_residual, connect, OrbitSectionContext};
use krein_kit::unitary::{log_near_identity, UnitaryPath};
use krein_kit::{JUnitary, KreinFrame, NormalProjection, Signature, SignatureProfile, Subspace};
use serde_json::json;

use crate::report::{load_operator, matrix, parse, read_json, unwrap_report, CliError, Report};
use crate::{Cli, Command, GenKind};

/// Residual bound for sections, connectors and covering round trips.
const SECTION_BOUND: f64 = 1e-6;

type Res<T> = Result<T, CliError>;

struct Frames<'a> {
    cli: &'a Cli,
}

impl Frames<'_> {
    fn with_tol(&self, mut f: KreinFrame) -> Res<KreinFrame> {
        if let Some(tol) = self.cli.tol {
            f.tol = tol;
        }
        f.validate()?;
        Ok(f)
    }

    /// The frame from `--frame` or `--pq`, if any.
    fn explicit(&self) -> Res<Option<KreinFrame>> {
        let f = match (&self.cli.frame, self.cli.pq) {
            (Some(path), _) => Some(parse::<KreinFrame>(unwrap_report(read_json(path)?, "frame"), "frame", path)?),
            (None, Some((p, q))) => Some(KreinFrame::new(p, q)?),
            (None, None) => None,
        };
        f.map(|f| self.with_tol(f)).transpose()
    }

    fn required(&self) -> Res<KreinFrame> {
        self.explicit()?
            .ok_or_else(|| CliError::Input("a frame is required: pass --frame FILE or --pq P,Q".into()))
    }

    fn for_operator(&self, op: &OperatorJson) -> Res<KreinFrame> {
        let f = op.resolve_frame(self.explicit()?)?;
        self.with_tol(f)
    }
}

fn load_square(frames: &Frames, path: &Path, key: &str, rep: &mut Report) -> Res<(KreinFrame, linalg::Mat)> {
    let op = load_operator(path)?;
    rep.input_file(key, path, json!(op));
    let f = frames.for_operator(&op)?;
    let m = op.to_mat()?;
    f.check_square(&m)?;
    Ok((f, m))
}

fn load_projection(frames: &Frames, path: &Path, key: &str, rep: &mut Report) -> Res<NormalProjection> {
    let (f, m) = load_square(frames, path, key, rep)?;
    Ok(NormalProjection::new(f, m)?)
}

fn load_family(frames: &Frames, path: &Path, rep: &mut Report) -> Res<FixedRangeFamily> {
    let mut file: FamilyJson = parse(unwrap_report(read_json(path)?, "family"), "family", path)?;
    if let Some(f) = frames.explicit()? {
        file.frame = f;
    } else {
        file.frame = frames.with_tol(file.frame)?;
    }
    rep.input_file("family", path, json!(file));
    let (s, m0) = file.subspaces()?;
    Ok(FixedRangeFamily::new(s, m0)?)
}

fn operator_out(m: &linalg::Mat, f: KreinFrame) -> serde_json::Value {
    json!(OperatorJson::from_mat(m).with_frame(f))
}

fn finish_checks(rep: &Report) -> Res<()> {
    if rep.all_checks_pass() {
        Ok(())
    } else {
        let failed: Vec<&String> = rep.checks.iter().filter(|(_, v)| v == &&json!(false)).map(|(k, _)| k).collect();
        Err(CliError::Precondition(format!("checks failed: {failed:?}")))
    }
}

pub fn run(cli: &Cli, rep: &mut Report) -> Res<()> {
    let frames = Frames { cli };
    match &cli.command {
        Command::Classify { operator } => {
            let (f, m) = load_square(&frames, operator, "operator", rep)?;
            rep.input("frame", json!(f));
            let c = f.classify(&m)?;
            rep.output("is_projection", c.is_projection);
            rep.output("is_j_selfadjoint", c.is_j_selfadjoint);
            rep.output("is_j_antihermitian", c.is_j_antihermitian);
            rep.output("is_j_unitary", c.is_j_unitary);
            rep.output("is_j_normal_projection", c.is_j_normal_projection);
            let r = c.residuals;
            rep.residual("projection", r.projection);
            rep.residual("j_selfadjoint", r.j_selfadjoint);
            rep.residual("j_antihermitian", r.j_antihermitian);
            rep.residual("j_unitary", r.j_unitary);
            rep.residual("j_normality", r.j_normality);
            rep.residual("bound", r.bound);
            Ok(())
        }
        Command::Decompose { q } => {
            let q = load_projection(&frames, q, "q", rep)?;
            let f = *q.frame();
            rep.input("frame", json!(f));
            let d = q.decompose()?;
            rep.output("e", matrix(&d.e));
            rep.output("p", matrix(&d.p));
            rep.output("f", matrix(&d.f));
            rep.output("p_sharp", matrix(&q.p_sharp()));
            rep.output("block_ranks", json!(d.block_ranks));
            rep.output("profile", json!(q.signature_profile()));
            let split = op_norm(&(q.q() - &d.e - &d.p));
            rep.residual("q_minus_e_minus_p", split);
            rep.residual("identities", d.identity_residual);
            rep.residual("cross_gram", d.cross_gram);
            let bound = f.tol * q.norm().powi(2).max(1.0);
            rep.check("identities", d.identity_residual.max(split) <= bound);
            rep.check("rank_sum_is_n", d.block_ranks.iter().sum::<usize>() == f.n());
            finish_checks(rep)
        }
        Command::Signature { subspace } => {
            let op = load_operator(subspace)?;
            rep.input_file("subspace", subspace, json!(op));
            let f = frames.for_operator(&op)?;
            rep.input("frame", json!(f));
            let s = Subspace::span(f, &op.to_mat()?)?;
            rep.output("dim", s.dim());
            rep.output("signature", json!(s.signature()));
            rep.output("cosignature", json!(s.cosignature()));
            rep.output("profile", json!(s.profile()));
            rep.output("is_regular", s.is_regular());
            rep.output("is_pseudo_regular", s.is_pseudo_regular());
            rep.output("is_neutral", s.is_neutral());
            rep.output("isotropic_part", json!(subspace_json(&s.isotropic_part())));
            rep.output("j_companion", json!(subspace_json(&s.j_companion())));
            if s.is_pseudo_regular() {
                rep.output("regular_complement", json!(subspace_json(&s.regular_complement()?)));
            }
            if let Ok(k) = s.angular_operator() {
                rep.output("angular_operator", matrix(&k));
            }
            Ok(())
        }
        Command::Profile { q } => {
            let q = load_projection(&frames, q, "q", rep)?;
            rep.input("frame", json!(q.frame()));
            let profile = q.signature_profile();
            rep.output("profile", json!(profile));
            rep.output("range_signature", json!(q.range().signature()));
            rep.output("isotropic_dim", q.range_isotropic().dim());
            let f = q.frame();
            rep.check("feasible", profile.is_feasible(f.p, f.q));
            finish_checks(rep)
        }
        Command::Section { q0, q } => {
            let q0 = load_projection(&frames, q0, "q0", rep)?;
            let q = load_projection(&frames, q, "q", rep)?;
            let ctx = OrbitSectionContext::new(q0.clone())?;
            let (r_e0, r_f0) = ctx.sub_radii();
            rep.output("radius", ctx.radius());
            rep.output("sub_radii", json!({"r_e0": r_e0, "r_f0": r_f0}));
            rep.output("distance", op_norm(&(q.q() - q0.q())));
            let s = ctx.section(&q)?;
            rep.output("unitary", operator_out(s.matrix(), *s.frame()));
            let residual = conjugation_residual(&s, q0.q(), q.q());
            rep.residual("conjugation", residual);
            rep.residual("j_unitarity", s.residual());
            rep.check("conjugation", residual <= SECTION_BOUND);
            finish_checks(rep)
        }
        Command::Connect { q0, q } => {
            let q0 = load_projection(&frames, q0, "q0", rep)?;
            let q = load_projection(&frames, q, "q", rep)?;
            let c = connect(&q0, &q)?;
            rep.output("unitary", operator_out(c.unitary.matrix(), *c.unitary.frame()));
            rep.output("steps", json!(c.steps));
            rep.residual("conjugation", c.residual);
            rep.residual("j_unitarity", c.unitary.residual());
            rep.check("conjugation", c.residual <= SECTION_BOUND);
            finish_checks(rep)
        }
        Command::Curve { unitary, samples } => {
            let (f, m) = load_square(&frames, unitary, "unitary", rep)?;
            rep.input("samples", *samples);
            if *samples < 2 {
                return Err(CliError::Input("--samples must be at least 2".into()));
            }
            let u = JUnitary::new(f, m)?;
            let path = UnitaryPath::new(&u)?;
            let mut out = Vec::with_capacity(*samples);
            let mut worst: f64 = 0.0;
            for i in 0..*samples {
                let t = i as f64 / (*samples - 1) as f64;
                let g = path.at(t)?;
                worst = worst.max(g.residual());
                out.push(json!({"t": t, "matrix": OperatorJson::from_mat(g.matrix()), "j_unitarity": g.residual()}));
            }
            let start = op_norm(&(path.at(0.0)?.matrix() - linalg::eye(f.n())));
            let end = op_norm(&(path.at(1.0)?.matrix() - u.matrix()));
            rep.output("samples", out);
            rep.residual("start_is_identity", start);
            rep.residual("end_is_u", end);
            rep.residual("worst_j_unitarity", worst);
            let bound = f.tol * op_norm(u.matrix()).powi(2).max(1.0);
            rep.check("endpoints", start.max(end) <= bound);
            finish_checks(rep)
        }
        Command::Log { unitary } => {
            let (f, m) = load_square(&frames, unitary, "unitary", rep)?;
            let u = JUnitary::new(f, m)?;
            rep.output("distance_to_identity", op_norm(&(u.matrix() - linalg::eye(f.n()))));
            let x = log_near_identity(&u)?;
            rep.output("generator", matrix(&x));
            let anti = op_norm(&(&x + f.j_adjoint(&x)?));
            let round = op_norm(&(linalg::expm(&x) - u.matrix()));
            rep.residual("j_antihermitian", anti);
            rep.residual("exp_log", round);
            rep.check("j_antihermitian", anti <= f.tol * op_norm(&x).max(1.0));
            rep.check("exp_log", round <= f.tol * op_norm(u.matrix()).max(1.0));
            finish_checks(rep)
        }
        Command::Deck { family, q, m } => {
            let family = load_family(&frames, family, rep)?;
            let f = *family.frame();
            if let Some(q) = q {
                let q = load_projection(&frames, q, "q", rep)?;
                let deck = family.deck_of(&q)?;
                rep.output("deck", json!(subspace_json(&deck)));
                rep.output("distance_to_base_deck", deck_distance(&deck, family.base_deck())?);
            } else if let Some(path) = m {
                let op = load_operator(path)?;
                rep.input_file("m", path, json!(op));
                let m = Subspace::span(f, &op.to_mat()?)?;
                let selected = family.deck_selection(&m)?;
                rep.output("operator", operator_out(selected.q(), f));
                let back = family.deck_of(&selected)?;
                let angle = back.principal_angles(&m).into_iter().fold(0.0, f64::max);
                rep.residual("deck_round_trip_angle", angle);
                rep.check("deck_round_trip", back.dim() == m.dim() && angle <= f.tol.sqrt());
            }
            finish_checks(rep)
        }
        Command::Covering { family, q } => {
            let family = load_family(&frames, family, rep)?;
            let q = load_projection(&frames, q, "q", rep)?;
            let (image, res) = family.covering_residuals(&q)?;
            let f = *family.frame();
            rep.output("image", operator_out(image.image.q(), f));
            rep.output("deck", json!(subspace_json(&image.deck)));
            rep.output("section", operator_out(image.section.matrix(), f));
            rep.residual("f_after_r", res.f_after_r);
            rep.residual("r_after_f", res.r_after_f);
            rep.residual("ad_form", res.ad_form);
            rep.check("f_after_r", res.f_after_r <= SECTION_BOUND);
            rep.check("r_after_f", res.r_after_f <= SECTION_BOUND);
            finish_checks(rep)
        }
        Command::Gen { kind } => generate(&frames, kind, rep),
        Command::Selftest { parallel } => {
            rep.input("seed", cli.seed);
            rep.input("parallel", *parallel);
            let reports = if *parallel {
                acceptance::run_all_parallel(cli.seed)
            } else {
                acceptance::run_all(cli.seed, |_| {})
            };
            for r in &reports {
                rep.check(&format!("criterion_{}", r.id), r.passed);
            }
            rep.output("criteria", json!(reports));
            finish_checks(rep)
        }
    }
}

fn generate(frames: &Frames, kind: &GenKind, rep: &mut Report) -> Res<()> {
    let seed = frames.cli.seed;
    rep.input("seed", seed);
    match kind {
        GenKind::Unitary { spread } => {
            let f = frames.required()?;
            rep.input("frame", json!(f));
            rep.input("spread", *spread);
            let u = random_j_unitary(f, seed, *spread)?;
            rep.output("operator", operator_out(u.matrix(), f));
            rep.residual("j_unitarity", u.residual());
        }
        GenKind::Subspace { signature } => {
            let f = frames.required()?;
            rep.input("frame", json!(f));
            let sig = Signature {
                kp: signature.0[0],
                km: signature.0[1],
                k0: signature.0[2],
            };
            rep.input("signature", json!(sig));
            let s = random_pseudo_regular(f, seed, sig)?;
            rep.output("operator", json!(subspace_json(&s).with_frame(f)));
            rep.output("signature", json!(s.signature()));
        }
        GenKind::Projection { profile } => {
            let f = frames.required()?;
            rep.input("frame", json!(f));
            let pr = SignatureProfile::new(profile.0[0], profile.0[1], profile.0[2], profile.0[3], profile.0[4]);
            rep.input("profile", json!(pr));
            let q = random_normal_projection(f, seed, pr)?;
            rep.output("operator", operator_out(q.q(), f));
            rep.output("profile", json!(q.signature_profile()));
        }
        GenKind::Perturb { q0, fraction } => {
            let q0 = load_projection(frames, q0, "q0", rep)?;
            rep.input("fraction", *fraction);
            let q = perturb_within_radius(&q0, seed, *fraction)?;
            let radius = OrbitSectionContext::new(q0.clone())?.radius();
            rep.output("operator", operator_out(q.q(), *q.frame()));
            rep.output("distance", op_norm(&(q.q() - q0.q())));
            rep.output("radius", radius);
        }
        GenKind::Family { signature } => {
            let f = frames.required()?;
            rep.input("frame", json!(f));
            let sig = Signature {
                kp: signature.0[0],
                km: signature.0[1],
                k0: signature.0[2],
            };
            rep.input("signature", json!(sig));
            let s = random_pseudo_regular(f, seed, sig)?;
            let family = FixedRangeFamily::new(s.clone(), None)?;
            let file = FamilyJson {
                frame: f,
                range: subspace_json(&s),
                deck: Some(subspace_json(family.base_deck())),
            };
            rep.output("family", json!(file));
            let member = random_family_member(&family, seed, 0.5)?;
            rep.output("operator", operator_out(member.q(), f));
        }
    }
    Ok(())
}
