use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::features::FeatureSet;
use crate::error::{Error, Result};
use crate::model::ProbVec;

/// Relative singular-value cut-off of the numerical rank, scaled by
/// `max(rows, cols) * sigma_1`.
pub const RANK_RTOL: f64 = 1e-10;

/// Stacked transition features `F`, one row `phi_p(s' | s, a)` per triple.
///
/// Only the rows that are not identically zero are stored (at most `d` per
/// `(s, a)`); the remaining rows of the full `|S|^2 |A| x d` matrix are zero
/// and change neither its singular values nor its row space. Stored rows
/// are in lexicographic `(s, a, s')` order.
#[derive(Debug, Clone)]
pub struct InfoMatrix {
    rows: Vec<(usize, usize, usize)>,
    matrix: DMatrix<f64>,
    total_rows: usize,
    singular_values: Vec<f64>,
    right_vectors: DMatrix<f64>,
    rank: usize,
}

impl InfoMatrix {
    /// Row labels `(s, a, s')` of the stored (non-zero) rows.
    pub fn rows(&self) -> &[(usize, usize, usize)] {
        &self.rows
    }
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
    /// Row count of the full matrix, `|S|^2 |A|`.
    pub fn total_rows(&self) -> usize {
        self.total_rows
    }
    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }
    /// Singular values, descending.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Row `(s, a, s')` of the full matrix (zero if not stored).
    pub fn row(&self, s: usize, a: usize, s_next: usize) -> Vec<f64> {
        match self.rows.binary_search(&(s, a, s_next)) {
            Ok(i) => self.matrix.row(i).iter().copied().collect(),
            Err(_) => vec![0.0; self.cols()],
        }
    }

    /// CSV dump: one line per stored row (`s,a,s_next,xi_0..`), then the
    /// singular values and the rank.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        let mut header = String::from("s,a,s_next");
        for j in 0..self.cols() {
            header.push_str(&format!(",xi_{j}"));
        }
        writeln!(out, "{header}").map_err(io)?;
        for (i, (s, a, sn)) in self.rows.iter().enumerate() {
            let entries: Vec<String> = self.matrix.row(i).iter().map(|x| format!("{x}")).collect();
            writeln!(out, "{s},{a},{sn},{}", entries.join(",")).map_err(io)?;
        }
        let sv: Vec<String> = self.singular_values.iter().map(|x| format!("{x:e}")).collect();
        writeln!(out, "singular_values,,,{}", sv.join(",")).map_err(io)?;
        writeln!(out, "rank,,,{}", self.rank).map_err(io)?;
        out.flush().map_err(io)
    }
}

/// Numerical rank of descending singular values `sv` of a `rows x cols` matrix.
pub fn numerical_rank(sv: &[f64], rows: usize, cols: usize) -> usize {
    let Some(&top) = sv.first() else { return 0 };
    let threshold = rows.max(cols) as f64 * top * RANK_RTOL;
    sv.iter().filter(|&&x| x > threshold).count()
}

/// Assembles `F` from `features` and computes its SVD and rank.
pub fn build_info_matrix(features: &FeatureSet) -> InfoMatrix {
    let d = features.dim();
    let mut rows = Vec::new();
    let mut data = Vec::new();
    for s in 0..features.n_states() {
        for a in 0..features.n_actions() {
            let targets = features.symbol_targets(s, a);
            for s_next in features.support(s, a) {
                rows.push((s, a, s_next));
                data.extend(targets.iter().map(|&n| if n == s_next { 1.0 } else { 0.0 }));
            }
        }
    }
    let matrix = DMatrix::from_row_slice(rows.len(), d, &data);
    let total_rows = features.n_states() * features.n_states() * features.n_actions();
    let (singular_values, right_vectors) = right_svd(&matrix);
    let rank = numerical_rank(&singular_values, total_rows, d);
    InfoMatrix {
        rows,
        matrix,
        total_rows,
        singular_values,
        right_vectors,
        rank,
    }
}

/// Singular values (descending, one per column) and the matching right
/// singular vectors as columns of a `ncols x ncols` matrix.
///
/// The vectors are the eigenvectors of `m^T m`; each singular value is then
/// `|m v|`, which keeps null directions at rounding level instead of its
/// square root. `DMatrix::svd` is avoided: on some rank-one inputs (e.g. a
/// 4x6 block of ones) it returns a wrong factorisation.
pub(crate) fn right_svd(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = (m.transpose() * m).symmetric_eigen();
    let mut pairs: Vec<(f64, usize)> = (0..m.ncols())
        .map(|i| ((m * eig.eigenvectors.column(i)).norm(), i))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let sv = pairs.iter().map(|p| p.0).collect();
    let vecs = DMatrix::from_fn(m.ncols(), m.ncols(), |r, c| eig.eigenvectors[(r, pairs[c].1)]);
    (sv, vecs)
}

/// Projection of the features onto the `r`-dimensional row space of `F`.
///
/// `projector` holds orthonormal right singular vectors as columns (`d x r`);
/// the reduced feature of a row is `phi . projector` and the reduced
/// parameter is `projector^T p`. Because every feature row lies in the span,
/// `reduced_phi . (projector^T p) = phi . p` exactly.
#[derive(Debug, Clone)]
pub struct RankReduction {
    projector: DMatrix<f64>,
    rank_of_f: usize,
}

/// Keeps the leading `rank` right singular vectors of `info`.
pub fn rank_reduce(info: &InfoMatrix) -> RankReduction {
    let r = info.rank;
    RankReduction {
        projector: info.right_vectors.columns(0, r).into_owned(),
        rank_of_f: r,
    }
}

impl RankReduction {
    /// Reduced dimension (may exceed the rank of `F` after
    /// [`RankReduction::covering_rewards`]).
    pub fn dim(&self) -> usize {
        self.projector.ncols()
    }

    pub fn rank_of_info_matrix(&self) -> usize {
        self.rank_of_f
    }

    pub fn projector(&self) -> &DMatrix<f64> {
        &self.projector
    }

    /// `out = projector^T phi`.
    #[inline]
    pub fn project(&self, phi: &[f64], out: &mut [f64]) {
        let d = self.projector.nrows();
        for (k, o) in out.iter_mut().enumerate() {
            let col = &self.projector.as_slice()[k * d..(k + 1) * d];
            *o = col.iter().zip(phi).map(|(x, y)| x * y).sum();
        }
    }

    pub fn reduced_phi(&self, features: &FeatureSet, s: usize, a: usize, s_next: usize) -> DVector<f64> {
        let phi = features.phi_p(s, a, s_next);
        let mut out = vec![0.0; self.dim()];
        self.project(&phi, &mut out);
        DVector::from_vec(out)
    }

    /// Reduced parameter `projector^T p`.
    pub fn reduced_parameter(&self, p: &ProbVec) -> DVector<f64> {
        let mut out = vec![0.0; self.dim()];
        self.project(p.as_slice(), &mut out);
        DVector::from_vec(out)
    }

    /// Extends the basis so that every reward feature `phi_r(s, a)` also lies
    /// in its span. Needed when rewards are learned through the same reduced
    /// parameter and `phi_r` leaves the row space of `F`.
    pub fn covering_rewards(&self, features: &FeatureSet) -> RankReduction {
        let d = features.dim();
        let mut residuals = Vec::new();
        let mut count = 0;
        let mut coords = vec![0.0; self.dim()];
        for s in 0..features.n_states() {
            for a in 0..features.n_actions() {
                let phi = features.phi_r(s, a);
                self.project(phi, &mut coords);
                let back = &self.projector * DVector::from_column_slice(&coords);
                residuals.extend(phi.iter().zip(back.iter()).map(|(x, y)| x - y));
                count += 1;
            }
        }
        let res = DMatrix::from_row_slice(count, d, &residuals);
        let (sv, vecs) = right_svd(&res);
        // Absolute cut-off: residuals of in-span rows are pure rounding noise.
        let extra = sv.iter().filter(|&&x| x > 1e-9 * (count.max(d) as f64).sqrt()).count();
        if extra == 0 {
            return self.clone();
        }
        let mut projector = DMatrix::zeros(d, self.dim() + extra);
        projector.columns_mut(0, self.dim()).copy_from(&self.projector);
        projector
            .columns_mut(self.dim(), extra)
            .copy_from(&vecs.columns(0, extra));
        RankReduction {
            projector,
            rank_of_f: self.rank_of_f,
        }
    }
}
