use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use chansteer::assemblage::{canonicalize_pure, pure_lhs_decide, verify_ns, Assemblage, LhsVerdict, NoLhsReason, PureAssemblage};
use chansteer::certify::{decomposition_analysis, inflexibility_structural_check, ConstraintMode, Verdict};
use chansteer::chanasm::{
    chanasm_from_realization, to_choi_assemblage, verify_asym_ns, verify_asym_ns_choi, verify_ns_channel, ChannelAssemblage,
};
use chansteer::linalg::Ket;
use chansteer::quantum::{verify_cptp, Povm, State};
use chansteer::security::{correlations, eavesdropper_pinning, perfect_key_check};
use chansteer::{Error, Tolerances};

use crate::doc::{from_cmatrix, parse, ChannelAssemblageDoc, DocError, Document, Payload};
use crate::fixtures;
use crate::report::{Report, Status};

/// Deviation allowed when comparing recomputed values with bundled ones.
pub const REPRODUCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum VerifyMode {
    Ns,
    Cptp,
    Asym,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExtremalityMode {
    Full,
    Asym,
}

impl ExtremalityMode {
    fn constraint_mode(self) -> ConstraintMode {
        match self {
            ExtremalityMode::Full => ConstraintMode::FullNs,
            ExtremalityMode::Asym => ConstraintMode::AsymNs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Target {
    Example1,
    AsymNonextremal,
    Appendix,
    Key,
}

fn lib(e: Error) -> DocError {
    DocError::Invalid { message: e.to_string() }
}

fn mismatch(doc: &Document, expected: &str) -> DocError {
    DocError::KindMismatch { found: doc.kind().name().into(), expected: expected.into() }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library reports serialize")
}

/// Run `body`, turning input problems into an `INPUT_ERROR` report.
fn run(command: &str, tol: Tolerances, body: impl FnOnce() -> Result<(Status, Value), DocError>) -> Report {
    match body() {
        Ok((status, details)) => Report::new(command, status, details, tol),
        Err(e) => Report::input_error(command, &e, tol),
    }
}

pub fn load(path: &Path) -> Result<Document, DocError> {
    let bytes = std::fs::read(path).map_err(|e| DocError::Invalid { message: format!("cannot read {}: {e}", path.display()) })?;
    parse(&bytes)
}

fn channel_assemblage_of(doc: &Document, tol: &Tolerances) -> Result<Option<ChannelAssemblage>, DocError> {
    match &doc.payload {
        Payload::ChannelAssemblage(c) => Ok(Some(c.to_channel_assemblage(tol)?)),
        Payload::Realization(r) => Ok(Some(chanasm_from_realization(&r.to_realization(tol)?, tol).map_err(lib)?)),
        _ => Ok(None),
    }
}

/// The state assemblage analysed by the certificate commands: the document
/// itself, or the Choi family of a channel assemblage.
pub fn choi_family_of(doc: &Document, tol: &Tolerances) -> Result<Assemblage, DocError> {
    if let Payload::Assemblage(a) = &doc.payload {
        return a.to_assemblage(tol);
    }
    match channel_assemblage_of(doc, tol)? {
        Some(l) => to_choi_assemblage(&l, tol).map_err(lib),
        None => Err(mismatch(doc, "assemblage, channel_assemblage or realization")),
    }
}

fn pure_of(doc: &Document, tol: &Tolerances) -> Result<PureAssemblage, DocError> {
    canonicalize_pure(&choi_family_of(doc, tol)?, tol).map_err(lib)
}

pub fn verify(doc: &Document, mode: VerifyMode, tol: Tolerances) -> Report {
    run("verify", tol, || {
        let t = tol.abs_tol;
        match (mode, &doc.payload) {
            (VerifyMode::Ns, Payload::Assemblage(a)) => {
                let r = verify_ns(&a.to_assemblage(&tol)?, t);
                Ok((Status::from_pass(r.pass), to_value(&r)))
            }
            (VerifyMode::Ns, Payload::ChannelAssemblage(_) | Payload::Realization(_)) => {
                let l = channel_assemblage_of(doc, &tol)?.expect("channel kinds");
                let r = verify_ns_channel(&l, t);
                Ok((Status::from_pass(r.pass), to_value(&r)))
            }
            (VerifyMode::Cptp, Payload::Channel(c)) => {
                let r = verify_cptp(&c.to_choi()?, t);
                Ok((Status::from_pass(r.is_channel()), to_value(&r)))
            }
            (VerifyMode::Cptp, Payload::Realization(r)) => {
                let r = verify_cptp(&r.channel.to_choi()?, t);
                Ok((Status::from_pass(r.is_channel()), to_value(&r)))
            }
            (VerifyMode::Asym, Payload::Assemblage(a)) => {
                if a.trusted_dims.len() != 2 {
                    return Err(DocError::Invalid {
                        message: "asymmetric check of a state assemblage needs trusted_dims [d_out, d_in]".into(),
                    });
                }
                let r = verify_asym_ns_choi(&a.to_assemblage(&tol)?, a.trusted_dims[0], t).map_err(lib)?;
                Ok((Status::from_pass(r.pass), to_value(&r)))
            }
            (VerifyMode::Asym, Payload::ChannelAssemblage(_) | Payload::Realization(_)) => {
                let l = channel_assemblage_of(doc, &tol)?.expect("channel kinds");
                let r = verify_asym_ns(&l, t).map_err(lib)?;
                Ok((Status::from_pass(r.pass), to_value(&r)))
            }
            (VerifyMode::Ns, _) => Err(mismatch(doc, "assemblage, channel_assemblage or realization")),
            (VerifyMode::Cptp, _) => Err(mismatch(doc, "channel or realization")),
            (VerifyMode::Asym, _) => Err(mismatch(doc, "assemblage, channel_assemblage or realization")),
        }
    })
}

/// The Choi form of a channel, or the channel assemblage of a realization.
pub fn choi(doc: &Document, tol: Tolerances) -> (Report, Option<Document>) {
    let mut out = None;
    let report = run("choi", tol, || {
        let produced = match &doc.payload {
            Payload::Channel(c) => Document::new(Payload::Channel(crate::doc::ChannelDoc::from_choi(&c.to_choi()?))),
            Payload::Realization(_) => {
                let l = channel_assemblage_of(doc, &tol)?.expect("realization");
                Document::new(Payload::ChannelAssemblage(ChannelAssemblageDoc::from_channel_assemblage(&l)))
            }
            _ => return Err(mismatch(doc, "channel or realization")),
        };
        let details = json!({ "document": produced.to_envelope() });
        out = Some(produced);
        Ok((Status::Pass, details))
    });
    (report, out)
}

fn structural_value(p: &PureAssemblage, tol: &Tolerances) -> Value {
    match inflexibility_structural_check(p, tol.abs_tol) {
        Ok(Some((x, y))) => json!({ "applicable": true, "settings": [x, y] }),
        Ok(None) => json!({ "applicable": true, "settings": null }),
        Err(e) => json!({ "applicable": false, "reason": e.to_string() }),
    }
}

/// Decomposition analysis; the verdict lives inside the certificate and the
/// status only says whether the analysis ran.
pub fn extremality(doc: &Document, mode: ExtremalityMode, certificate: Option<&Path>, tol: Tolerances) -> Report {
    run("extremality", tol, || {
        let p = pure_of(doc, &tol)?;
        let cert = decomposition_analysis(&p, mode.constraint_mode(), &tol).map_err(lib)?;
        let cert_json = to_value(&cert);
        if let Some(path) = certificate {
            let text = serde_json::to_string_pretty(&cert_json).expect("certificate serializes");
            std::fs::write(path, text + "\n")
                .map_err(|e| DocError::Invalid { message: format!("cannot write {}: {e}", path.display()) })?;
        }
        let mut details = json!({ "certificate": cert_json });
        if mode == ExtremalityMode::Full {
            details["structural_check"] = structural_value(&p, &tol);
        }
        Ok((Status::Pass, details))
    })
}

fn state_value(s: &State) -> Value {
    json!({ "dims": s.dims(), "matrix": from_cmatrix(s.op().matrix()) })
}

pub fn lhs(doc: &Document, tol: Tolerances) -> Report {
    run("lhs", tol, || {
        let p = pure_of(doc, &tol)?;
        Ok(match pure_lhs_decide(&p, &tol) {
            LhsVerdict::Lhs(m) => {
                let model = json!({
                    "weights": m.weights(),
                    "states": m.states().iter().map(state_value).collect::<Vec<_>>(),
                    "responses": to_value(&m.responses()),
                });
                (Status::Pass, json!({ "verdict": "LHS", "model": model }))
            }
            LhsVerdict::NoLhs(reason) => {
                let status = match reason {
                    NoLhsReason::NotConverged { .. } => Status::Inconclusive,
                    _ => Status::Fail,
                };
                (status, json!({ "verdict": "NO_LHS", "reason": to_value(&reason) }))
            }
        })
    })
}

fn computational_basis(d: usize) -> Povm {
    let basis: Vec<Ket> = (0..d).map(|i| Ket::basis(&[d], &[i])).collect();
    Povm::projective(&[basis], 1e-12).expect("orthonormal basis")
}

/// Perfect-key test at `(x*, y*)` together with the pinning certificate.
pub fn security_cert(
    doc: &Document,
    x_star: usize,
    y_star: usize,
    rho: Option<&Document>,
    charlie: Option<&Document>,
    tol: Tolerances,
) -> Report {
    run("security-cert", tol, || {
        let l = channel_assemblage_of(doc, &tol)?.ok_or_else(|| mismatch(doc, "channel_assemblage or realization"))?;
        let rho = match rho.map(|d| &d.payload) {
            Some(Payload::State(s)) => s.to_state(&tol)?,
            Some(_) => return Err(mismatch(rho.expect("some"), "state")),
            None => State::pure(&Ket::basis(&[l.d_in()], &[0])).map_err(lib)?,
        };
        let charlie = match charlie.map(|d| &d.payload) {
            Some(Payload::Povm(m)) => m.to_povm(&tol)?,
            Some(_) => return Err(mismatch(charlie.expect("some"), "povm")),
            None => computational_basis(l.d_out()),
        };
        let table = correlations(&l, &rho, &charlie).map_err(lib)?;
        let key = perfect_key_check(&table, x_star, y_star, tol.abs_tol);
        let p = canonicalize_pure(&to_choi_assemblage(&l, &tol).map_err(lib)?, &tol).map_err(lib)?;
        let pinning = eavesdropper_pinning(&p, x_star, y_star, &tol).map_err(lib)?;
        let details = json!({
            "perfect_key": key,
            "correlations": to_value(&table),
            "pinning": to_value(&pinning),
        });
        Ok((Status::from_pass(key && pinning.certified), details))
    })
}

fn bundled(name: &str, text: &str) -> Result<Document, DocError> {
    parse(text.as_bytes()).map_err(|e| DocError::Invalid { message: format!("bundled fixture {name}: {e}") })
}

fn bundled_assemblage(name: &str, text: &str, tol: &Tolerances) -> Result<Assemblage, DocError> {
    match bundled(name, text)?.payload {
        Payload::Assemblage(a) => a.to_assemblage(tol),
        other => Err(DocError::Invalid { message: format!("bundled fixture {name} has kind {}", other.kind().name()) }),
    }
}

fn reproduce_example1(tol: &Tolerances) -> Result<(Status, Value), DocError> {
    let doc = bundled("example1", fixtures::EXAMPLE1)?;
    let l = channel_assemblage_of(&doc, tol)?.expect("realization");
    let got = to_choi_assemblage(&l, tol).map_err(lib)?;
    let want = bundled_assemblage("example1_expected", fixtures::EXAMPLE1_EXPECTED, tol)?;
    let dev = got.max_member_diff(&want).map_err(lib)?;
    let ns = verify_ns_channel(&l, tol.abs_tol);
    let pass = dev < REPRODUCE_TOL && ns.pass;
    Ok((
        Status::from_pass(pass),
        json!({ "max_matrix_deviation": dev, "ns_pass": ns.pass, "tp_deviation": ns.tp_deviation }),
    ))
}

fn reproduce_asym(tol: &Tolerances) -> Result<(Status, Value), DocError> {
    let reference = bundled_assemblage("example1_expected", fixtures::EXAMPLE1_EXPECTED, tol)?;
    let s1 = bundled_assemblage("example1_split_1", fixtures::EXAMPLE1_SPLIT_1, tol)?;
    let s2 = bundled_assemblage("example1_split_2", fixtures::EXAMPLE1_SPLIT_2, tol)?;
    let mut components = Vec::new();
    let mut components_ok = true;
    for s in [&s1, &s2] {
        let asym = verify_asym_ns_choi(s, 2, tol.abs_tol).map_err(lib)?;
        let full = verify_ns(s, tol.abs_tol);
        components_ok &= asym.pass && s.normalization_deviation() < REPRODUCE_TOL;
        components.push(json!({
            "asym_pass": asym.pass,
            "full_ns_pass": full.pass,
            "full_ns_max_deviation": full.max_deviation,
        }));
    }
    let average_dev = reference
        .members()
        .iter()
        .zip(s1.members().iter().zip(s2.members()))
        .map(|(r, (a, b))| r.max_abs_diff(&(a + b).scale(0.5)))
        .fold(0.0, f64::max);
    let p = canonicalize_pure(&reference, tol).map_err(lib)?;
    let cert = decomposition_analysis(&p, ConstraintMode::AsymNs, tol).map_err(lib)?;
    let key_pinned = p
        .scenario()
        .positions()
        .filter(|pos| pos.x == [0, 0])
        .all(|pos| cert.is_pinned(&pos));
    let pass = components_ok && average_dev < REPRODUCE_TOL && cert.verdict == Verdict::NonUnique && key_pinned;
    Ok((
        Status::from_pass(pass),
        json!({
            "components": components,
            "average_deviation": average_dev,
            "verdict": to_value(&cert.verdict),
            "rank": cert.rank,
            "nullity": cert.nullity,
            "setting_00_pinned": key_pinned,
            "witness_pair": to_value(&cert.witness_pair),
        }),
    ))
}

fn reproduce_appendix(tol: &Tolerances) -> Result<(Status, Value), DocError> {
    let doc = bundled("appendix", fixtures::APPENDIX)?;
    let got = choi_family_of(&doc, tol)?;
    let want = bundled_assemblage("appendix_expected", fixtures::APPENDIX_EXPECTED, tol)?;
    let dev = got.max_member_diff(&want).map_err(lib)?;
    let p = canonicalize_pure(&got, tol).map_err(lib)?;
    let cert = decomposition_analysis(&p, ConstraintMode::AsymNs, tol).map_err(lib)?;
    let ratio_dev = cert.recovered_ratio.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    let pass = dev < REPRODUCE_TOL && cert.verdict == Verdict::UniqueExtreme && ratio_dev < REPRODUCE_TOL;
    Ok((
        Status::from_pass(pass),
        json!({
            "max_matrix_deviation": dev,
            "verdict": to_value(&cert.verdict),
            "nullity": cert.nullity,
            "recovered_ratio": cert.recovered_ratio,
            "max_ratio_deviation": ratio_dev,
        }),
    ))
}

fn reproduce_key(tol: &Tolerances) -> Result<(Status, Value), DocError> {
    let doc = bundled("example1", fixtures::EXAMPLE1)?;
    let l = channel_assemblage_of(&doc, tol)?.expect("realization");
    let rho = State::pure(&Ket::basis(&[2], &[0])).map_err(lib)?;
    let z = computational_basis(2);
    let charlie = Povm::new(vec![z.effects()[0].clone(), z.effects()[0].clone()], 1e-12).map_err(lib)?;
    let table = correlations(&l, &rho, &charlie).map_err(lib)?;
    let mut probs = Vec::new();
    let mut dev: f64 = 0.0;
    for zs in 0..2 {
        let p000 = table.get([0, 0, 0], [0, 0, zs]);
        let p111 = table.get([1, 1, 1], [0, 0, zs]);
        dev = dev.max((p000 - 0.5).abs()).max((p111 - 0.5).abs());
        probs.push(json!({ "z": zs, "p000": p000, "p111": p111 }));
    }
    let key = perfect_key_check(&table, 0, 0, REPRODUCE_TOL);
    let pass = key && dev < REPRODUCE_TOL;
    Ok((Status::from_pass(pass), json!({ "probabilities": probs, "max_deviation": dev, "perfect_key": key })))
}

pub fn reproduce(target: Target, tol: Tolerances) -> Report {
    run("reproduce", tol, || {
        let (status, mut details) = match target {
            Target::Example1 => reproduce_example1(&tol),
            Target::AsymNonextremal => reproduce_asym(&tol),
            Target::Appendix => reproduce_appendix(&tol),
            Target::Key => reproduce_key(&tol),
        }?;
        let name = match target {
            Target::Example1 => "example1",
            Target::AsymNonextremal => "asym-nonextremal",
            Target::Appendix => "appendix",
            Target::Key => "key",
        };
        details["target"] = Value::String(name.into());
        Ok((status, details))
    })
}

/// Document for each bundled fixture, by file name.
pub fn bundled_documents() -> Vec<(&'static str, &'static str)> {
    vec![
        ("example1.json", fixtures::EXAMPLE1),
        ("example1_expected.json", fixtures::EXAMPLE1_EXPECTED),
        ("example1_split_1.json", fixtures::EXAMPLE1_SPLIT_1),
        ("example1_split_2.json", fixtures::EXAMPLE1_SPLIT_2),
        ("appendix.json", fixtures::APPENDIX),
        ("appendix_expected.json", fixtures::APPENDIX_EXPECTED),
    ]
}
