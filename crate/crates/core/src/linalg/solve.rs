use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Orthonormal kernel basis together with the numerical rank that produced it.
#[derive(Debug, Clone)]
pub struct Nullspace {
    pub rank: usize,
    /// Largest singular value of the input (0 for an empty or zero matrix).
    pub sigma_max: f64,
    /// One basis vector per entry, each of length `ncols`.
    pub basis: Vec<DVector<f64>>,
}

impl Nullspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Kernel of `m`: right singular vectors whose singular value is at most
/// `rel_tol * sigma_max`.
///
/// Each basis vector is sign-normalized so that its largest-magnitude entry is
/// positive.
pub fn nullspace(m: &DMatrix<f64>, rel_tol: f64) -> Nullspace {
    let ncols = m.ncols();
    if ncols == 0 {
        return Nullspace { rank: 0, sigma_max: 0.0, basis: Vec::new() };
    }
    // Thin SVD only yields min(rows, cols) right vectors; pad so every column
    // direction is represented.
    let padded = if m.nrows() < ncols {
        let mut p = DMatrix::zeros(ncols, ncols);
        p.view_mut((0, 0), (m.nrows(), ncols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let threshold = rel_tol * sigma_max;

    let mut rank = 0;
    let mut basis = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if sigma_max > 0.0 && s > threshold {
            rank += 1;
        } else {
            let mut v: DVector<f64> = v_t.row(i).transpose();
            let pivot = v.iter().copied().fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
            if pivot < 0.0 {
                v = -v;
            }
            basis.push(v);
        }
    }
    Nullspace { rank, sigma_max, basis }
}

/// Least-squares solution of minimal norm.
pub fn lstsq(m: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> DVector<f64> {
    if m.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = (rel_tol * smax).max(f64::MIN_POSITIVE);
    svd.solve(b, eps).expect("SVD computed with both factors")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NnlsStatus {
    Converged,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    /// Euclidean norm of `m x - b`.
    pub residual: f64,
    pub status: NnlsStatus,
    pub iterations: usize,
}

/// Lawson-Hanson active-set nonnegative least squares:
/// minimize `|m x - b|` subject to `x >= 0`.
///
/// `tol` is the dual-feasibility threshold, relative to `|m|_F * |b|`.
pub fn nnls(m: &DMatrix<f64>, b: &DVector<f64>, tol: f64) -> NnlsSolution {
    let n = m.ncols();
    assert_eq!(m.nrows(), b.len(), "nnls: rhs length does not match rows");
    let mut x = DVector::zeros(n);
    if n == 0 {
        return NnlsSolution { x, residual: b.norm(), status: NnlsStatus::Converged, iterations: 0 };
    }
    let scale = (m.norm() * b.norm()).max(f64::MIN_POSITIVE);
    let dual_tol = tol * scale;
    let max_iter = 30 * (n + 1);

    let mut passive = vec![false; n];
    let mut iterations = 0;
    let mut status = NnlsStatus::Converged;

    'outer: loop {
        let w = m.transpose() * (b - m * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > dual_tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;

        loop {
            iterations += 1;
            if iterations > max_iter {
                status = NnlsStatus::IterationLimit;
                break 'outer;
            }
            let z = solve_passive(m, b, &passive);
            let infeasible: Vec<usize> = (0..n).filter(|&i| passive[i] && z[i] <= 0.0).collect();
            if infeasible.is_empty() {
                x = z;
                break;
            }
            let alpha = infeasible
                .iter()
                .map(|&i| x[i] / (x[i] - z[i]))
                .fold(f64::INFINITY, f64::min)
                .clamp(0.0, 1.0);
            x += (&z - &x) * alpha;
            for i in 0..n {
                if passive[i] && x[i] <= 1e-14 * (1.0 + x.amax()) {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    let residual = (m * &x - b).norm();
    NnlsSolution { x, residual, status, iterations }
}

fn solve_passive(m: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let sub = DMatrix::from_fn(m.nrows(), cols.len(), |r, k| m[(r, cols[k])]);
    let zs = lstsq(&sub, b, 1e-12);
    let mut z = DVector::zeros(passive.len());
    for (k, &col) in cols.iter().enumerate() {
        z[col] = zs[k];
    }
    z
}
