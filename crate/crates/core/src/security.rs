//! Key correlations obtained from a channel assemblage and the certificate that
//! an eavesdropper cannot bias the key members.
//!
//! An attack that correlates an eavesdropper with the untrusted devices splits
//! the assemblage into a convex combination of asymmetric no-signaling
//! assemblages, one per eavesdropper outcome. If every member at the key
//! settings is identical in all such decompositions, the attack leaves the key
//! statistics untouched. That is decided by the pinned coordinates of the
//! asymmetric decomposition analysis.

use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::assemblage::{Position, PureAssemblage, PureMember};
use crate::certify::{decomposition_analysis, ConstraintMode, ExtremalityCertificate};
use crate::chanasm::ChannelAssemblage;
use crate::error::{Error, Result};
use crate::quantum::{apply_choi, Povm, State};
use crate::tolerance::Tolerances;

/// Table indexed `[x][y][z][a][b][c]`.
pub type Nested = Vec<NestedSetting>;
/// One `[y][z][a][b][c]` slice of [`Nested`].
pub type NestedSetting = Vec<Vec<Vec<Vec<Vec<f64>>>>>;

/// `p(a, b, c | x, y, z)` for two untrusted parties and a trusted measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    /// Setting counts `(m_x, m_y, m_z)`.
    settings: [usize; 3],
    /// Outcome counts `(k_a, k_b, k_c)`.
    outcomes: [usize; 3],
    p: Vec<f64>,
}

impl CorrelationTable {
    pub fn from_fn(settings: [usize; 3], outcomes: [usize; 3], mut f: impl FnMut([usize; 3], [usize; 3]) -> f64) -> Self {
        let mut p = Vec::with_capacity(settings.iter().product::<usize>() * outcomes.iter().product::<usize>());
        for x in 0..settings[0] {
            for y in 0..settings[1] {
                for z in 0..settings[2] {
                    for a in 0..outcomes[0] {
                        for b in 0..outcomes[1] {
                            for c in 0..outcomes[2] {
                                p.push(f([a, b, c], [x, y, z]));
                            }
                        }
                    }
                }
            }
        }
        CorrelationTable { settings, outcomes, p }
    }

    /// Nested `[x][y][z][a][b][c]` arrays, as produced by serialization.
    pub fn from_nested(nested: &[NestedSetting]) -> Result<Self> {
        let err = || Error::InvalidModel("correlation table is not rectangular".into());
        let mx = nested.len();
        let my = nested.first().ok_or_else(err)?.len();
        let mz = nested[0].first().ok_or_else(err)?.len();
        let ka = nested[0][0].first().ok_or_else(err)?.len();
        let kb = nested[0][0][0].first().ok_or_else(err)?.len();
        let kc = nested[0][0][0][0].first().ok_or_else(err)?.len();
        let mut p = Vec::new();
        for by_x in nested {
            if by_x.len() != my {
                return Err(err());
            }
            for by_y in by_x {
                if by_y.len() != mz {
                    return Err(err());
                }
                for by_z in by_y {
                    if by_z.len() != ka {
                        return Err(err());
                    }
                    for by_a in by_z {
                        if by_a.len() != kb {
                            return Err(err());
                        }
                        for by_b in by_a {
                            if by_b.len() != kc {
                                return Err(err());
                            }
                            p.extend_from_slice(by_b);
                        }
                    }
                }
            }
        }
        if kc == 0 || p.iter().any(|v| !v.is_finite()) {
            return Err(err());
        }
        Ok(CorrelationTable { settings: [mx, my, mz], outcomes: [ka, kb, kc], p })
    }

    pub fn settings(&self) -> [usize; 3] {
        self.settings
    }

    pub fn outcomes(&self) -> [usize; 3] {
        self.outcomes
    }

    fn offset(&self, o: [usize; 3], s: [usize; 3]) -> usize {
        let [_, my, mz] = self.settings;
        let [ka, kb, kc] = self.outcomes;
        (((((s[0] * my + s[1]) * mz + s[2]) * ka + o[0]) * kb + o[1]) * kc) + o[2]
    }

    /// `p(a, b, c | x, y, z)` with `o = [a, b, c]`, `s = [x, y, z]`.
    pub fn get(&self, o: [usize; 3], s: [usize; 3]) -> f64 {
        self.p[self.offset(o, s)]
    }

    /// `(1 - v) * self + v * uniform`.
    pub fn with_white_noise(&self, v: f64) -> Self {
        let u = 1.0 / self.outcomes.iter().product::<usize>() as f64;
        CorrelationTable { settings: self.settings, outcomes: self.outcomes, p: self.p.iter().map(|p| (1.0 - v) * p + v * u).collect() }
    }

    /// `max_s |sum_o p(o|s) - 1|`.
    pub fn normalization_deviation(&self) -> f64 {
        let block: usize = self.outcomes.iter().product();
        self.p.chunks(block).map(|c| (c.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.p.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn nested(&self) -> Nested {
        let [mx, my, mz] = self.settings;
        let [ka, kb, kc] = self.outcomes;
        (0..mx)
            .map(|x| {
                (0..my)
                    .map(|y| {
                        (0..mz)
                            .map(|z| {
                                (0..ka)
                                    .map(|a| (0..kb).map(|b| (0..kc).map(|c| self.get([a, b, c], [x, y, z])).collect()).collect())
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }
}

impl Serialize for CorrelationTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let nested = self.nested();
        let mut seq = s.serialize_seq(Some(nested.len()))?;
        for e in &nested {
            seq.serialize_element(e)?;
        }
        seq.end()
    }
}

/// `p(a,b,c|x,y,z) = Tr(M_{c|z} Lambda_{ab|xy}(rho))`.
pub fn correlations(l: &ChannelAssemblage, rho: &State, charlie: &Povm) -> Result<CorrelationTable> {
    let sc = l.scenario();
    if sc.parties() != 2 {
        return Err(Error::InvalidScenario(format!("key correlations need two parties, got {}", sc.parties())));
    }
    if rho.op().dim() != l.d_in() || charlie.dim() != l.d_out() {
        return Err(Error::DimensionMismatch(format!(
            "assemblage maps {} -> {}, state has dimension {} and measurement {}",
            l.d_in(),
            l.d_out(),
            rho.op().dim(),
            charlie.dim()
        )));
    }
    let rho_in = rho.op().clone().with_dims(l.in_dims().to_vec())?;
    let images = l.members().iter().map(|m| apply_choi(m, &rho_in)).collect::<Result<Vec<_>>>()?;
    let settings = [sc.settings()[0], sc.settings()[1], charlie.settings()];
    let outcomes = [sc.outcomes()[0], sc.outcomes()[1], charlie.outcomes()];
    Ok(CorrelationTable::from_fn(settings, outcomes, |[a, b, c], [x, y, z]| {
        let out = &images[sc.index(&[a, b], &[x, y])];
        let e = charlie.effect(z, c);
        e.matrix().transpose().component_mul(out.matrix()).sum().re
    }))
}

/// Whether the outcomes at `(x*, y*)` form a perfect shared bit for every `z`:
/// `p(000) = p(111) = 1/2` and every other outcome vanishes.
///
/// Tables with non-binary outcomes never qualify.
pub fn perfect_key_check(t: &CorrelationTable, x_star: usize, y_star: usize, tol: f64) -> bool {
    if t.outcomes != [2, 2, 2] || x_star >= t.settings[0] || y_star >= t.settings[1] {
        return false;
    }
    (0..t.settings[2]).all(|z| {
        (0..8).all(|o| {
            let o = [o >> 2 & 1, o >> 1 & 1, o & 1];
            let target = if o == [0, 0, 0] || o == [1, 1, 1] { 0.5 } else { 0.0 };
            (t.get(o, [x_star, y_star, z]) - target).abs() <= tol
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberStatus {
    /// Zero in the reference, hence zero in every decomposition.
    Zero,
    /// Coefficient fixed by the constraints.
    Pinned,
    /// Some null direction moves this coefficient.
    Free,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PinnedMember {
    pub position: Position,
    pub status: MemberStatus,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PinningCertificate {
    pub target: (usize, usize),
    pub certified: bool,
    pub members: Vec<PinnedMember>,
    pub analysis: ExtremalityCertificate,
}

/// Certify that every member at `(x*, y*)` is the same in all asymmetric
/// no-signaling decompositions of `p`.
pub fn eavesdropper_pinning(p: &PureAssemblage, x_star: usize, y_star: usize, tol: &Tolerances) -> Result<PinningCertificate> {
    let sc = p.scenario();
    if sc.parties() != 2 {
        return Err(Error::ModeMismatch(format!("pinning needs two parties, got {}", sc.parties())));
    }
    if x_star >= sc.settings()[0] || y_star >= sc.settings()[1] {
        return Err(Error::InvalidScenario(format!("key settings ({x_star},{y_star}) out of range")));
    }
    let analysis = decomposition_analysis(p, ConstraintMode::AsymNs, tol)?;
    let mut members = Vec::new();
    for a in 0..sc.outcomes()[0] {
        for b in 0..sc.outcomes()[1] {
            let position = Position::new(vec![a, b], vec![x_star, y_star]);
            let status = match p.member(&position.a, &position.x) {
                PureMember::Zero => MemberStatus::Zero,
                PureMember::Pure { .. } if analysis.is_pinned(&position) => MemberStatus::Pinned,
                PureMember::Pure { .. } => MemberStatus::Free,
            };
            members.push(PinnedMember { position, status });
        }
    }
    let certified = members.iter().all(|m| m.status != MemberStatus::Free);
    Ok(PinningCertificate { target: (x_star, y_star), certified, members, analysis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemblage::Scenario;
    use crate::linalg::Ket;
    use crate::quantum::ChoiOp;

    #[test]
    fn identity_singleton_reproduces_born_rule() {
        let tol = Tolerances::default();
        let sc = Scenario::uniform(2, 1, 1).unwrap();
        let l = ChannelAssemblage::new(sc, vec![ChoiOp::identity(2)], &tol).unwrap();
        let rho = State::pure(&Ket::basis(&[2], &[0])).unwrap();
        let s = 0.5f64.sqrt();
        let m = Povm::projective(
            &[
                vec![Ket::basis(&[2], &[0]), Ket::basis(&[2], &[1])],
                vec![Ket::from_real(vec![2], &[s, s]).unwrap(), Ket::from_real(vec![2], &[s, -s]).unwrap()],
            ],
            1e-12,
        )
        .unwrap();
        let t = correlations(&l, &rho, &m).unwrap();
        assert!((t.get([0, 0, 0], [0, 0, 0]) - 1.0).abs() < 1e-12);
        assert!(t.get([0, 0, 1], [0, 0, 0]).abs() < 1e-12);
        assert!((t.get([0, 0, 1], [0, 0, 1]) - 0.5).abs() < 1e-12);
        assert!(t.normalization_deviation() < 1e-12);
        assert!(!perfect_key_check(&t, 0, 0, 1e-9));
    }

    #[test]
    fn nested_round_trip() {
        let t = CorrelationTable::from_fn([1, 2, 1], [2, 2, 2], |o, s| (o[0] + 2 * o[1] + 4 * o[2] + 8 * s[1]) as f64);
        let back = CorrelationTable::from_nested(&t.nested()).unwrap();
        assert_eq!(back, t);
        assert_eq!(t.get([1, 0, 1], [0, 1, 0]), 13.0);
        assert!(CorrelationTable::from_nested(&[]).is_err());
    }

    #[test]
    fn perfect_key_shape() {
        let key = CorrelationTable::from_fn([1, 1, 2], [2, 2, 2], |o, _| if o[0] == o[1] && o[1] == o[2] { 0.5 } else { 0.0 });
        assert!(perfect_key_check(&key, 0, 0, 1e-9));
        assert!(!perfect_key_check(&key.with_white_noise(0.1), 0, 0, 1e-9));
        let det = CorrelationTable::from_fn([1, 1, 1], [2, 2, 2], |o, _| if o == [0, 0, 0] { 1.0 } else { 0.0 });
        assert!(!perfect_key_check(&det, 0, 0, 1e-9));
        assert!(!perfect_key_check(&key, 1, 0, 1e-9));
    }
}
