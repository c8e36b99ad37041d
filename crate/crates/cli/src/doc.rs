//! JSON documents: schema types, parsing with located errors, and conversion
//! to library objects.
//!
//! Complex numbers are `[re, im]` pairs and matrices are arrays of rows.

use schemars::JsonSchema;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use chansteer::assemblage::{Assemblage, Scenario};
use chansteer::chanasm::{ChannelAssemblage, ChannelRealization};
use chansteer::linalg::{CMatrix, Op, C64};
use chansteer::quantum::{ChoiOp, Povm, State};
use chansteer::Tolerances;

pub const VERSION: u32 = 1;

pub type Complex = [f64; 2];
pub type Matrix = Vec<Vec<Complex>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    State,
    Povm,
    Channel,
    Assemblage,
    ChannelAssemblage,
    Realization,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::State => "state",
            Kind::Povm => "povm",
            Kind::Channel => "channel",
            Kind::Assemblage => "assemblage",
            Kind::ChannelAssemblage => "channel_assemblage",
            Kind::Realization => "realization",
        }
    }
}

/// Density operator on subsystems of the given dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct StateDoc {
    pub dims: Vec<usize>,
    pub matrix: Matrix,
}

/// One measurement per setting; `effects[x][a]` is a `dim x dim` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PovmDoc {
    pub dim: usize,
    pub effects: Vec<Vec<Matrix>>,
}

/// Linear map given by exactly one of a Choi matrix (output factors first,
/// normalized to unit trace for channels) or Kraus operators (`out x in`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ChannelDoc {
    pub out_dims: Vec<usize>,
    pub in_dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choi: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<Matrix>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct MemberDoc {
    pub a: Vec<usize>,
    pub x: Vec<usize>,
    pub matrix: Matrix,
}

/// Every position `(a|x)` of the scenario listed once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct AssemblageDoc {
    pub settings: Vec<usize>,
    pub outcomes: Vec<usize>,
    pub trusted_dims: Vec<usize>,
    pub members: Vec<MemberDoc>,
}

/// Members are Choi matrices on `out (x) in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ChannelAssemblageDoc {
    pub settings: Vec<usize>,
    pub outcomes: Vec<usize>,
    pub out_dims: Vec<usize>,
    pub in_dims: Vec<usize>,
    pub members: Vec<MemberDoc>,
}

/// State of the untrusted systems, their measurements, and a channel on
/// `A_1 .. A_n C -> A_1 .. A_n C~`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RealizationDoc {
    pub rho: StateDoc,
    pub povms: Vec<PovmDoc>,
    pub channel: ChannelDoc,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    State(StateDoc),
    Povm(PovmDoc),
    Channel(ChannelDoc),
    Assemblage(AssemblageDoc),
    ChannelAssemblage(ChannelAssemblageDoc),
    Realization(RealizationDoc),
}

impl Payload {
    pub fn kind(&self) -> Kind {
        match self {
            Payload::State(_) => Kind::State,
            Payload::Povm(_) => Kind::Povm,
            Payload::Channel(_) => Kind::Channel,
            Payload::Assemblage(_) => Kind::Assemblage,
            Payload::ChannelAssemblage(_) => Kind::ChannelAssemblage,
            Payload::Realization(_) => Kind::Realization,
        }
    }
}

/// Envelope as it appears on disk. `payload` is checked against `kind` in a
/// second pass so that schema errors carry the full path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub kind: Kind,
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub payload: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub version: u32,
    pub description: Option<String>,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error, Serialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum DocError {
    #[error("input is not UTF-8 (byte offset {offset})")]
    Encoding { offset: usize },
    #[error("malformed JSON at line {line}, column {column} (byte offset {offset}): {message}")]
    Syntax { line: usize, column: usize, offset: usize, message: String },
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("dimension inconsistency at {path}: {message}")]
    Dimension { path: String, message: String },
    #[error("document of kind {found} cannot be used here (expected {expected})")]
    KindMismatch { found: String, expected: String },
    #[error("invalid input: {message}")]
    Invalid { message: String },
}

fn dim_err(path: impl Into<String>, message: impl Into<String>) -> DocError {
    DocError::Dimension { path: path.into(), message: message.into() }
}

/// Byte offset of a 1-based line/column position.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

fn from_value<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T, DocError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { prefix.to_string() } else { format!("{prefix}.{inner}") };
        DocError::Schema { path, message: e.into_inner().to_string() }
    })
}

pub fn parse(bytes: &[u8]) -> Result<Document, DocError> {
    let text = std::str::from_utf8(bytes).map_err(|e| DocError::Encoding { offset: e.valid_up_to() })?;
    let value: Value = serde_json::from_str(text).map_err(|e| DocError::Syntax {
        line: e.line(),
        column: e.column(),
        offset: if e.is_eof() { text.len() } else { byte_offset(text, e.line(), e.column()) },
        message: e.to_string(),
    })?;
    let env: Envelope = from_value(value, "$")?;
    if env.version != VERSION {
        return Err(DocError::Schema { path: "$.version".into(), message: format!("unsupported version {}", env.version) });
    }
    let p = "$.payload";
    let payload = match env.kind {
        Kind::State => Payload::State(from_value(env.payload, p)?),
        Kind::Povm => Payload::Povm(from_value(env.payload, p)?),
        Kind::Channel => Payload::Channel(from_value(env.payload, p)?),
        Kind::Assemblage => Payload::Assemblage(from_value(env.payload, p)?),
        Kind::ChannelAssemblage => Payload::ChannelAssemblage(from_value(env.payload, p)?),
        Kind::Realization => Payload::Realization(from_value(env.payload, p)?),
    };
    let doc = Document { version: env.version, description: env.description, payload };
    doc.check_dims()?;
    Ok(doc)
}

impl Document {
    pub fn new(payload: Payload) -> Self {
        Document { version: VERSION, description: None, payload }
    }

    pub fn with_description(mut self, text: &str) -> Self {
        self.description = Some(text.to_string());
        self
    }

    pub fn kind(&self) -> Kind {
        self.payload.kind()
    }

    pub fn to_envelope(&self) -> Envelope {
        let payload = match &self.payload {
            Payload::State(p) => serde_json::to_value(p),
            Payload::Povm(p) => serde_json::to_value(p),
            Payload::Channel(p) => serde_json::to_value(p),
            Payload::Assemblage(p) => serde_json::to_value(p),
            Payload::ChannelAssemblage(p) => serde_json::to_value(p),
            Payload::Realization(p) => serde_json::to_value(p),
        }
        .expect("payload types serialize");
        Envelope { kind: self.kind(), version: self.version, description: self.description.clone(), payload }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_envelope()).expect("envelope serializes")
    }

    /// Shape and finiteness checks that need no numerical tolerance.
    pub fn check_dims(&self) -> Result<(), DocError> {
        let p = "$.payload";
        match &self.payload {
            Payload::State(s) => check_state(s, p),
            Payload::Povm(m) => check_povm(m, p),
            Payload::Channel(c) => check_channel(c, p),
            Payload::Assemblage(a) => {
                check_members(&a.settings, &a.outcomes, &a.members, side(&a.trusted_dims, &format!("{p}.trusted_dims"))?, p)
            }
            Payload::ChannelAssemblage(c) => {
                let d = side(&c.out_dims, &format!("{p}.out_dims"))? * side(&c.in_dims, &format!("{p}.in_dims"))?;
                check_members(&c.settings, &c.outcomes, &c.members, d, p)
            }
            Payload::Realization(r) => {
                check_state(&r.rho, &format!("{p}.rho"))?;
                for (i, m) in r.povms.iter().enumerate() {
                    check_povm(m, &format!("{p}.povms[{i}]"))?;
                }
                check_channel(&r.channel, &format!("{p}.channel"))?;
                let n = r.povms.len();
                if r.rho.dims.len() != n {
                    return Err(dim_err(format!("{p}.rho.dims"), format!("{} factors for {n} measured parties", r.rho.dims.len())));
                }
                for (i, m) in r.povms.iter().enumerate() {
                    if m.dim != r.rho.dims[i] {
                        return Err(dim_err(format!("{p}.povms[{i}].dim"), format!("{} but rho factor {i} has {}", m.dim, r.rho.dims[i])));
                    }
                }
                let ch = &r.channel;
                if ch.in_dims.len() != n + 1 || ch.out_dims.len() != n + 1 || ch.in_dims[..n] != r.rho.dims[..] || ch.out_dims[..n] != r.rho.dims[..] {
                    return Err(dim_err(
                        format!("{p}.channel"),
                        format!("channel must map {:?} + [C] to {:?} + [C~]", r.rho.dims, r.rho.dims),
                    ));
                }
                Ok(())
            }
        }
    }
}

fn side(dims: &[usize], path: &str) -> Result<usize, DocError> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(dim_err(path, format!("invalid dimensions {dims:?}")));
    }
    Ok(dims.iter().product())
}

fn check_matrix(m: &Matrix, rows: usize, cols: usize, path: &str) -> Result<(), DocError> {
    if m.len() != rows {
        return Err(dim_err(path, format!("expected {rows} rows, got {}", m.len())));
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != cols {
            return Err(dim_err(format!("{path}[{i}]"), format!("expected {cols} entries, got {}", row.len())));
        }
        if let Some(j) = row.iter().position(|z| !(z[0].is_finite() && z[1].is_finite())) {
            return Err(DocError::Schema { path: format!("{path}[{i}][{j}]"), message: "non-finite entry".into() });
        }
    }
    Ok(())
}

fn check_state(s: &StateDoc, path: &str) -> Result<(), DocError> {
    let d = side(&s.dims, &format!("{path}.dims"))?;
    check_matrix(&s.matrix, d, d, &format!("{path}.matrix"))
}

fn check_povm(m: &PovmDoc, path: &str) -> Result<(), DocError> {
    if m.dim == 0 || m.effects.is_empty() {
        return Err(dim_err(path, "needs a positive dimension and at least one setting"));
    }
    let k = m.effects[0].len();
    for (x, setting) in m.effects.iter().enumerate() {
        if setting.len() != k || k == 0 {
            return Err(dim_err(format!("{path}.effects[{x}]"), format!("expected {k} outcomes, got {}", setting.len())));
        }
        for (a, e) in setting.iter().enumerate() {
            check_matrix(e, m.dim, m.dim, &format!("{path}.effects[{x}][{a}]"))?;
        }
    }
    Ok(())
}

fn check_channel(c: &ChannelDoc, path: &str) -> Result<(), DocError> {
    let dout = side(&c.out_dims, &format!("{path}.out_dims"))?;
    let din = side(&c.in_dims, &format!("{path}.in_dims"))?;
    match (&c.choi, &c.kraus) {
        (Some(j), None) => check_matrix(j, dout * din, dout * din, &format!("{path}.choi")),
        (None, Some(ks)) if !ks.is_empty() => {
            for (i, k) in ks.iter().enumerate() {
                check_matrix(k, dout, din, &format!("{path}.kraus[{i}]"))?;
            }
            Ok(())
        }
        _ => Err(DocError::Schema { path: path.into(), message: "give exactly one of `choi` or a nonempty `kraus`".into() }),
    }
}

fn check_members(settings: &[usize], outcomes: &[usize], members: &[MemberDoc], d: usize, path: &str) -> Result<(), DocError> {
    let sc = Scenario::new(settings.to_vec(), outcomes.to_vec()).map_err(|e| dim_err(format!("{path}.settings"), e.to_string()))?;
    let mut seen = vec![false; sc.position_count()];
    for (i, m) in members.iter().enumerate() {
        let mp = format!("{path}.members[{i}]");
        if !sc.contains(&m.a, &m.x) {
            return Err(dim_err(&mp, format!("position a={:?} x={:?} is outside the scenario", m.a, m.x)));
        }
        let idx = sc.index(&m.a, &m.x);
        if std::mem::replace(&mut seen[idx], true) {
            return Err(dim_err(&mp, format!("position {} listed twice", sc.position(idx))));
        }
        check_matrix(&m.matrix, d, d, &format!("{mp}.matrix"))?;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(dim_err(format!("{path}.members"), format!("position {} is missing", sc.position(missing))));
    }
    Ok(())
}

pub fn to_cmatrix(m: &Matrix) -> CMatrix {
    let cols = m.first().map_or(0, Vec::len);
    CMatrix::from_fn(m.len(), cols, |i, j| C64::new(m[i][j][0], m[i][j][1]))
}

pub fn from_cmatrix(m: &CMatrix) -> Matrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn invalid(e: chansteer::Error) -> DocError {
    DocError::Invalid { message: e.to_string() }
}

fn op(dims: &[usize], m: &Matrix) -> Result<Op, DocError> {
    Op::new(dims.to_vec(), to_cmatrix(m)).map_err(invalid)
}

impl StateDoc {
    pub fn to_state(&self, tol: &Tolerances) -> Result<State, DocError> {
        State::new(op(&self.dims, &self.matrix)?, tol.abs_tol).map_err(invalid)
    }

    pub fn from_state(s: &State) -> Self {
        StateDoc { dims: s.dims().to_vec(), matrix: from_cmatrix(s.op().matrix()) }
    }
}

impl PovmDoc {
    pub fn to_povm(&self, tol: &Tolerances) -> Result<Povm, DocError> {
        let effects = self
            .effects
            .iter()
            .map(|s| s.iter().map(|e| op(&[self.dim], e)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Povm::new(effects, tol.abs_tol).map_err(invalid)
    }

    pub fn from_povm(p: &Povm) -> Self {
        PovmDoc {
            dim: p.dim(),
            effects: p.effects().iter().map(|s| s.iter().map(|e| from_cmatrix(e.matrix())).collect()).collect(),
        }
    }
}

impl ChannelDoc {
    /// The Choi matrix. Kraus input is not required to be complete, so that
    /// non-channels can still be inspected.
    pub fn to_choi(&self) -> Result<ChoiOp, DocError> {
        match (&self.choi, &self.kraus) {
            (Some(j), _) => ChoiOp::new(self.out_dims.clone(), self.in_dims.clone(), to_cmatrix(j)).map_err(invalid),
            (None, Some(ks)) => {
                let ks: Vec<CMatrix> = ks.iter().map(to_cmatrix).collect();
                let dout: usize = self.out_dims.iter().product();
                let choi = ChoiOp::from_map(&self.in_dims, |x| {
                    let mut acc = CMatrix::zeros(dout, dout);
                    for k in &ks {
                        acc += k * x.matrix() * k.adjoint();
                    }
                    Op::new(self.out_dims.clone(), acc)
                })
                .map_err(invalid)?;
                Ok(choi)
            }
            (None, None) => Err(DocError::Schema { path: "$.payload".into(), message: "channel has neither choi nor kraus".into() }),
        }
    }

    pub fn from_choi(c: &ChoiOp) -> Self {
        ChannelDoc {
            out_dims: c.out_dims().to_vec(),
            in_dims: c.in_dims().to_vec(),
            choi: Some(from_cmatrix(c.op().matrix())),
            kraus: None,
        }
    }
}

fn members_of(sc: &Scenario, members: &[MemberDoc], dims: &[usize]) -> Result<Vec<Op>, DocError> {
    let mut out = vec![None; sc.position_count()];
    for m in members {
        out[sc.index(&m.a, &m.x)] = Some(op(dims, &m.matrix)?);
    }
    Ok(out.into_iter().map(|m| m.expect("completeness checked on parse")).collect())
}

fn member_docs<'a>(sc: &Scenario, ops: impl Iterator<Item = &'a Op>) -> Vec<MemberDoc> {
    ops.enumerate()
        .map(|(i, o)| {
            let pos = sc.position(i);
            MemberDoc { a: pos.a, x: pos.x, matrix: from_cmatrix(o.matrix()) }
        })
        .collect()
}

impl AssemblageDoc {
    pub fn to_assemblage(&self, tol: &Tolerances) -> Result<Assemblage, DocError> {
        let sc = Scenario::new(self.settings.clone(), self.outcomes.clone()).map_err(invalid)?;
        let members = members_of(&sc, &self.members, &self.trusted_dims)?;
        Assemblage::new(sc, self.trusted_dims.clone(), members, tol).map_err(invalid)
    }

    pub fn from_assemblage(s: &Assemblage) -> Self {
        let sc = s.scenario();
        AssemblageDoc {
            settings: sc.settings().to_vec(),
            outcomes: sc.outcomes().to_vec(),
            trusted_dims: s.trusted_dims().to_vec(),
            members: member_docs(sc, s.members().iter()),
        }
    }
}

impl ChannelAssemblageDoc {
    pub fn to_channel_assemblage(&self, tol: &Tolerances) -> Result<ChannelAssemblage, DocError> {
        let sc = Scenario::new(self.settings.clone(), self.outcomes.clone()).map_err(invalid)?;
        let mut dims = self.out_dims.clone();
        dims.extend_from_slice(&self.in_dims);
        let members = members_of(&sc, &self.members, &dims)?
            .into_iter()
            .map(|o| ChoiOp::from_op(self.out_dims.clone(), self.in_dims.clone(), o))
            .collect::<Result<Vec<_>, _>>()
            .map_err(invalid)?;
        ChannelAssemblage::new(sc, members, tol).map_err(invalid)
    }

    pub fn from_channel_assemblage(l: &ChannelAssemblage) -> Self {
        let sc = l.scenario();
        ChannelAssemblageDoc {
            settings: sc.settings().to_vec(),
            outcomes: sc.outcomes().to_vec(),
            out_dims: l.out_dims().to_vec(),
            in_dims: l.in_dims().to_vec(),
            members: member_docs(sc, l.members().iter().map(ChoiOp::op)),
        }
    }
}

impl RealizationDoc {
    pub fn to_realization(&self, tol: &Tolerances) -> Result<ChannelRealization, DocError> {
        Ok(ChannelRealization {
            rho: self.rho.to_state(tol)?,
            povms: self.povms.iter().map(|p| p.to_povm(tol)).collect::<Result<_, _>>()?,
            channel: self.channel.to_choi()?,
        })
    }

    pub fn from_realization(r: &ChannelRealization) -> Self {
        RealizationDoc {
            rho: StateDoc::from_state(&r.rho),
            povms: r.povms.iter().map(PovmDoc::from_povm).collect(),
            channel: ChannelDoc::from_choi(&r.channel),
        }
    }
}

/// JSON Schema of the envelope and of every payload kind.
pub fn schema() -> Value {
    serde_json::json!({
        "document": schemars::schema_for!(Envelope),
        "payloads": {
            "state": schemars::schema_for!(StateDoc),
            "povm": schemars::schema_for!(PovmDoc),
            "channel": schemars::schema_for!(ChannelDoc),
            "assemblage": schemars::schema_for!(AssemblageDoc),
            "channel_assemblage": schemars::schema_for!(ChannelAssemblageDoc),
            "realization": schemars::schema_for!(RealizationDoc),
        }
    })
}
