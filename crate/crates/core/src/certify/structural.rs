use crate::assemblage::{PureAssemblage, PureMember};
use crate::error::{Error, Result};
use crate::linalg::Ket;

/// Sufficient condition for inflexibility in the two-party, two-setting,
/// two-outcome scenario.
///
/// Returns the first `(y1, y2)`, scanning `y1` then `y2`, for which each of
/// `{sigma_{0 a2|y1 x2}}`, `{sigma_{1 a2|y1 x2}}` and `{sigma_{a1 0|x1 y2}}`
/// consists of nonzero members that are pairwise non-proportional.
///
/// "Different" is read within each set only; members of different sets may
/// coincide.
pub fn inflexibility_structural_check(p: &PureAssemblage, overlap_tol: f64) -> Result<Option<(usize, usize)>> {
    let sc = p.scenario();
    if sc.settings() != [2, 2] || sc.outcomes() != [2, 2] {
        return Err(Error::ModeMismatch(format!(
            "structural check needs two parties with two settings and two outcomes each, got {:?}/{:?}",
            sc.settings(),
            sc.outcomes()
        )));
    }
    let m = |a1: usize, a2: usize, x1: usize, x2: usize| p.member(&[a1, a2], &[x1, x2]);
    for y1 in 0..2 {
        for y2 in 0..2 {
            let s0: Vec<_> = pairs().map(|(a2, x2)| m(0, a2, y1, x2)).collect();
            let s1: Vec<_> = pairs().map(|(a2, x2)| m(1, a2, y1, x2)).collect();
            let s2: Vec<_> = pairs().map(|(a1, x1)| m(a1, 0, x1, y2)).collect();
            if [s0, s1, s2].iter().all(|s| distinct(s, overlap_tol)) {
                return Ok(Some((y1, y2)));
            }
        }
    }
    Ok(None)
}

fn pairs() -> impl Iterator<Item = (usize, usize)> {
    (0..2).flat_map(|x| (0..2).map(move |a| (a, x)))
}

fn distinct(set: &[&PureMember], overlap_tol: f64) -> bool {
    let kets: Option<Vec<&Ket>> = set.iter().map(|m| m.ket()).collect();
    let Some(kets) = kets else { return false };
    kets.iter()
        .enumerate()
        .all(|(i, k)| kets[i + 1..].iter().all(|l| 1.0 - k.inner(l).norm() > overlap_tol))
}
