//! Bundled documents for the reproduction targets.
//!
//! The JSON files are generated from the library fixtures by [`generate`];
//! the `fixtures` test checks that they stay in sync.

use chansteer::assemblage::Assemblage;
use chansteer::fixtures as lib;
use chansteer::linalg::CMatrix;
use chansteer::quantum::ChoiOp;
use chansteer::Tolerances;

use crate::doc::{from_cmatrix, AssemblageDoc, ChannelDoc, Document, Payload, PovmDoc, RealizationDoc, StateDoc};

pub const EXAMPLE1: &str = include_str!("../fixtures/example1.json");
pub const EXAMPLE1_EXPECTED: &str = include_str!("../fixtures/example1_expected.json");
pub const EXAMPLE1_SPLIT_1: &str = include_str!("../fixtures/example1_split_1.json");
pub const EXAMPLE1_SPLIT_2: &str = include_str!("../fixtures/example1_split_2.json");
pub const APPENDIX: &str = include_str!("../fixtures/appendix.json");
pub const APPENDIX_EXPECTED: &str = include_str!("../fixtures/appendix_expected.json");

/// `id_A (x) CNOT_{BC}` as a single Kraus operator.
fn controlled_x_kraus() -> ChannelDoc {
    let id = CMatrix::identity(2, 2);
    let u = id.kronecker(&lib::cnot());
    ChannelDoc { out_dims: vec![2, 2, 2], in_dims: vec![2, 2, 2], choi: None, kraus: Some(vec![from_cmatrix(&u)]) }
}

fn realization(r: &chansteer::chanasm::ChannelRealization) -> RealizationDoc {
    RealizationDoc {
        rho: StateDoc::from_state(&r.rho),
        povms: r.povms.iter().map(PovmDoc::from_povm).collect(),
        channel: controlled_x_kraus(),
    }
}

fn assemblage(s: &Assemblage) -> Document {
    Document::new(Payload::Assemblage(AssemblageDoc::from_assemblage(s)))
}

/// Every bundled document keyed by file name.
pub fn generate() -> Vec<(&'static str, Document)> {
    let tol = Tolerances::default();
    let (s1, s2) = lib::example1_asym_split(&tol).expect("valid split");
    vec![
        (
            "example1.json",
            Document::new(Payload::Realization(realization(&lib::example1_realization())))
                .with_description("Maximally entangled A B, CNOT from B onto C, Z/X measurements on A and B"),
        ),
        (
            "example1_expected.json",
            assemblage(&lib::example1_expected(&tol).expect("valid table"))
                .with_description("Choi members of the controlled-X channel assemblage on C~ C"),
        ),
        (
            "example1_split_1.json",
            assemblage(&s1).with_description("Asymmetric component with (b, c, e, f) = (3/2, 1/2, 1/2, 3/2)"),
        ),
        (
            "example1_split_2.json",
            assemblage(&s2).with_description("Asymmetric component with (b, c, e, f) = (1/2, 3/2, 3/2, 1/2)"),
        ),
        (
            "appendix.json",
            Document::new(Payload::Realization(realization(&lib::appendix_realization())))
                .with_description("Controlled-X circuit with gamma/delta and alpha/beta at setting 0, +/- at setting 1"),
        ),
        (
            "appendix_expected.json",
            assemblage(&lib::appendix_assemblage(&lib::appendix_realized_kets(), &tol).expect("valid table")).with_description(
                "Sixteen rank-one members |phi_i><phi_i|; entries 6 and 7 as produced by the circuit",
            ),
        ),
    ]
}

/// Whether the Kraus fixture and the library channel agree.
pub fn channel_matches_library(tol: f64) -> bool {
    let ours = controlled_x_kraus().to_choi().expect("valid channel");
    let theirs: &ChoiOp = &lib::example1_realization().channel;
    ours.op().max_abs_diff(theirs.op()) < tol
}
