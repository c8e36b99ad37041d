use nalgebra::{DMatrix, DVector};

use super::ConstraintMode;
use crate::assemblage::{Position, PureAssemblage, PureMember};
use crate::error::{Error, Result};
use crate::linalg::{partial_trace, real_vectorize, Op};

/// `A c = b` over the coefficients of the nonzero members.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub mode: ConstraintMode,
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    /// Position of each column.
    pub variables: Vec<Position>,
    /// Coefficients of the reference assemblage (its member traces).
    pub reference: DVector<f64>,
}

impl LinearSystem {
    /// `max |A c - b|`.
    pub fn residual(&self, c: &DVector<f64>) -> f64 {
        (&self.matrix * c - &self.rhs).amax()
    }

    pub fn column_of(&self, pos: &Position) -> Option<usize> {
        self.variables.iter().position(|v| v == pos)
    }
}

/// Accumulates rows; each operator row is a linear combination of the
/// unit-trace supports, flattened with `real_vectorize`.
struct Rows<'a> {
    supports: &'a [Option<Op>],
    column: &'a [Option<usize>],
    ncols: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl Rows<'_> {
    /// Rows of `sum_k s_k F(rho_{i_k}) = target` where `F` maps a support to an operator.
    fn operator_eq(&mut self, terms: &[(usize, f64)], f: impl Fn(&Op) -> Op, target: Option<&Op>) {
        let mut block: Option<DMatrix<f64>> = None;
        for &(idx, sign) in terms {
            let (Some(op), Some(col)) = (&self.supports[idx], self.column[idx]) else { continue };
            let v = real_vectorize(&f(op));
            let b = block.get_or_insert_with(|| DMatrix::zeros(v.len(), self.ncols));
            for r in 0..v.len() {
                b[(r, col)] += sign * v[r];
            }
        }
        let len = match (&block, target) {
            (Some(b), _) => b.nrows(),
            (None, Some(t)) => real_vectorize(t).len(),
            (None, None) => return,
        };
        let block = block.unwrap_or_else(|| DMatrix::zeros(len, self.ncols));
        let t = target.map(real_vectorize).unwrap_or_else(|| DVector::zeros(len));
        for r in 0..len {
            self.rows.push(block.row(r).iter().copied().collect());
            self.rhs.push(t[r]);
        }
    }

    fn scalar_eq(&mut self, terms: &[usize], value: f64) {
        let mut row = vec![0.0; self.ncols];
        for &idx in terms {
            if let Some(col) = self.column[idx] {
                row[col] += 1.0;
            }
        }
        self.rows.push(row);
        self.rhs.push(value);
    }
}

/// Linear constraints satisfied by the coefficient vector of every member of
/// the mode's convex set supported on the same rank-one operators as `p`.
pub fn build_constraint_system(p: &PureAssemblage, mode: ConstraintMode) -> Result<LinearSystem> {
    let sc = p.scenario();
    let supports: Vec<Option<Op>> = p
        .members()
        .iter()
        .map(|m| match m {
            PureMember::Zero => None,
            PureMember::Pure { ket, .. } => Some(ket.projector().with_dims(p.trusted_dims().to_vec()).expect("ket dims")),
        })
        .collect();
    let mut column = vec![None; supports.len()];
    let mut variables = Vec::new();
    let mut reference = Vec::new();
    for (i, m) in p.members().iter().enumerate() {
        if !m.is_zero() {
            column[i] = Some(variables.len());
            variables.push(sc.position(i));
            reference.push(m.weight());
        }
    }
    let mut rows = Rows { supports: &supports, column: &column, ncols: variables.len(), rows: Vec::new(), rhs: Vec::new() };
    match mode {
        ConstraintMode::FullNs => full_ns_rows(p, &mut rows),
        ConstraintMode::AsymNs => asym_rows(p, &mut rows)?,
    }
    let nrows = rows.rows.len();
    let ncols = variables.len();
    let matrix = DMatrix::from_fn(nrows, ncols, |r, c| rows.rows[r][c]);
    Ok(LinearSystem { mode, matrix, rhs: DVector::from_vec(rows.rhs), variables, reference: DVector::from_vec(reference) })
}

fn full_ns_rows(p: &PureAssemblage, rows: &mut Rows<'_>) {
    let sc = p.scenario();
    let n = sc.parties();
    let xs = sc.setting_vectors();
    let avs = sc.outcome_vectors();
    let id = |o: &Op| o.clone();
    for mask in 1..(1usize << n) - 1 {
        let kept: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        // Group settings by their restriction to `kept`; the first in each
        // group (lexicographic) is the anchor.
        for x_anchor in xs.iter().filter(|x| (0..n).all(|i| kept.contains(&i) || x[i] == 0)) {
            let partners: Vec<&Vec<usize>> =
                xs.iter().filter(|x| kept.iter().all(|&i| x[i] == x_anchor[i]) && *x != x_anchor).collect();
            if partners.is_empty() {
                continue;
            }
            let mut seen = Vec::new();
            for a in &avs {
                let a_i: Vec<usize> = kept.iter().map(|&i| a[i]).collect();
                if seen.contains(&a_i) {
                    continue;
                }
                seen.push(a_i.clone());
                let matching: Vec<&Vec<usize>> =
                    avs.iter().filter(|b| kept.iter().zip(&a_i).all(|(&i, &v)| b[i] == v)).collect();
                for x in &partners {
                    let mut terms: Vec<(usize, f64)> = matching.iter().map(|b| (sc.index(b, x), 1.0)).collect();
                    terms.extend(matching.iter().map(|b| (sc.index(b, x_anchor), -1.0)));
                    rows.operator_eq(&terms, id, None);
                }
            }
        }
    }
    for x in &xs[1..] {
        let mut terms: Vec<(usize, f64)> = avs.iter().map(|a| (sc.index(a, x), 1.0)).collect();
        terms.extend(avs.iter().map(|a| (sc.index(a, &xs[0]), -1.0)));
        rows.operator_eq(&terms, id, None);
    }
    for x in &xs {
        let idx: Vec<usize> = avs.iter().map(|a| sc.index(a, x)).collect();
        rows.scalar_eq(&idx, 1.0);
    }
}

fn asym_rows(p: &PureAssemblage, rows: &mut Rows<'_>) -> Result<()> {
    let sc = p.scenario();
    if sc.parties() != 2 {
        return Err(Error::ModeMismatch(format!("asymmetric constraints need two parties, got {}", sc.parties())));
    }
    let dims = p.trusted_dims();
    if dims.len() != 2 {
        return Err(Error::ModeMismatch(format!("asymmetric constraints need a trusted space C~ (x) C, got factors {dims:?}")));
    }
    let d_c = dims[1];
    let tr_out = |o: &Op| partial_trace(o, &[1]).expect("two factors");
    let id = |o: &Op| o.clone();
    let (mx, my) = (sc.settings()[0], sc.settings()[1]);
    let (ka, kb) = (sc.outcomes()[0], sc.outcomes()[1]);
    let at = |a: usize, b: usize, x: usize, y: usize| sc.index(&[a, b], &[x, y]);

    for y in 0..my {
        for b in 0..kb {
            for x in 1..mx {
                let terms: Vec<(usize, f64)> =
                    (0..ka).map(|a| (at(a, b, x, y), 1.0)).chain((0..ka).map(|a| (at(a, b, 0, y), -1.0))).collect();
                rows.operator_eq(&terms, id, None);
            }
        }
    }
    for x in 0..mx {
        for a in 0..ka {
            for y in 1..my {
                let terms: Vec<(usize, f64)> =
                    (0..kb).map(|b| (at(a, b, x, y), 1.0)).chain((0..kb).map(|b| (at(a, b, x, 0), -1.0))).collect();
                rows.operator_eq(&terms, tr_out, None);
            }
        }
    }
    let all = |x: usize, y: usize| -> Vec<usize> { (0..ka).flat_map(|a| (0..kb).map(move |b| (a, b))).map(|(a, b)| at(a, b, x, y)).collect() };
    for x in 0..mx {
        for y in 0..my {
            if (x, y) == (0, 0) {
                continue;
            }
            let terms: Vec<(usize, f64)> =
                all(x, y).into_iter().map(|i| (i, 1.0)).chain(all(0, 0).into_iter().map(|i| (i, -1.0))).collect();
            rows.operator_eq(&terms, id, None);
        }
    }
    let terms: Vec<(usize, f64)> = all(0, 0).into_iter().map(|i| (i, 1.0)).collect();
    rows.operator_eq(&terms, tr_out, Some(&Op::maximally_mixed(&[d_c])));
    Ok(())
}
