//! Penalty matrices `D`: difference operators, graph incidence matrices, the sparse-fused stack
//! and custom triplet input, plus row-subset products and null-space bases of `D_{−B}`.
//!
//! All indices are 0-based. File formats use 1-based indices and are converted in `io`.

use std::collections::VecDeque;

use sprs::{CsMat, TriMat};

use crate::dense::Matrix;
use crate::error::{Error, Result};

pub type SparseMatrix = CsMat<f64>;

#[derive(Clone, Debug, PartialEq)]
pub enum PenaltySpec {
    /// `(k+1)`-st order differences on `p` equally spaced positions.
    TrendFilter { order: usize, p: usize },
    /// Oriented incidence matrix of a graph; edges are stored with `i < j`.
    FusedGraph {
        p: usize,
        edges: Vec<(usize, usize)>,
    },
    /// Incidence matrix stacked over `α·I`.
    SparseFusedGraph {
        p: usize,
        edges: Vec<(usize, usize)>,
        alpha: f64,
    },
    Custom {
        m: usize,
        p: usize,
        triplets: Vec<(usize, usize, f64)>,
    },
}

fn normalize_edges(p: usize, edges: &[(usize, usize)]) -> Result<Vec<(usize, usize)>> {
    edges
        .iter()
        .enumerate()
        .map(|(l, &(i, j))| {
            if i == j {
                Err(Error::input(format!("edge {l} is a self-loop at node {i}")))
            } else if i >= p || j >= p {
                Err(Error::input(format!(
                    "edge {l} = ({i}, {j}) has an endpoint outside 0..{p}"
                )))
            } else {
                Ok((i.min(j), i.max(j)))
            }
        })
        .collect()
}

impl PenaltySpec {
    pub fn trend_filter(order: usize, p: usize) -> Self {
        PenaltySpec::TrendFilter { order, p }
    }

    pub fn fused(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Ok(PenaltySpec::FusedGraph {
            p,
            edges: normalize_edges(p, edges)?,
        })
    }

    /// Chain graph `0–1–…–(p−1)`, the 1d fused lasso.
    pub fn chain(p: usize) -> Self {
        PenaltySpec::FusedGraph {
            p,
            edges: (1..p).map(|i| (i - 1, i)).collect(),
        }
    }

    pub fn sparse_fused(p: usize, edges: &[(usize, usize)], alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::input(format!("alpha must be positive, got {alpha}")));
        }
        Ok(PenaltySpec::SparseFusedGraph {
            p,
            edges: normalize_edges(p, edges)?,
            alpha,
        })
    }

    pub fn custom(m: usize, p: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        for (t, &(r, c, v)) in triplets.iter().enumerate() {
            if r >= m || c >= p {
                return Err(Error::input(format!(
                    "triplet {t} = ({r}, {c}) lies outside a {m}x{p} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::input(format!("triplet {t} has a non-finite value")));
            }
        }
        Ok(PenaltySpec::Custom {
            m,
            p,
            triplets: triplets.to_vec(),
        })
    }

    /// Number of columns of `D` (the primal dimension).
    pub fn p(&self) -> usize {
        match *self {
            PenaltySpec::TrendFilter { p, .. }
            | PenaltySpec::FusedGraph { p, .. }
            | PenaltySpec::SparseFusedGraph { p, .. }
            | PenaltySpec::Custom { p, .. } => p,
        }
    }

    /// Number of rows of `D` (the dual dimension).
    pub fn m(&self) -> usize {
        match self {
            PenaltySpec::TrendFilter { order, p } => p.saturating_sub(order + 1),
            PenaltySpec::FusedGraph { edges, .. } => edges.len(),
            PenaltySpec::SparseFusedGraph { edges, p, .. } => edges.len() + p,
            PenaltySpec::Custom { m, .. } => *m,
        }
    }

    pub fn edges(&self) -> Option<&[(usize, usize)]> {
        match self {
            PenaltySpec::FusedGraph { edges, .. } | PenaltySpec::SparseFusedGraph { edges, .. } => {
                Some(edges)
            }
            _ => None,
        }
    }

    pub fn matrix(&self) -> SparseMatrix {
        match self {
            PenaltySpec::TrendFilter { order, p } => build_diff_operator(*order, *p),
            PenaltySpec::FusedGraph { p, edges } => incidence_unchecked(*p, edges, None),
            PenaltySpec::SparseFusedGraph { p, edges, alpha } => {
                incidence_unchecked(*p, edges, Some(*alpha))
            }
            PenaltySpec::Custom { m, p, triplets } => {
                let mut t = TriMat::new((*m, *p));
                for &(r, c, v) in triplets {
                    t.add_triplet(r, c, v);
                }
                t.to_csr()
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients of one row of `D^(k+1)`: entry `j` sits `j` columns right of the diagonal.
pub fn diff_coefficients(k: usize) -> Vec<f64> {
    (0..=k + 1)
        .map(|j| {
            let sign = if (k + 1 - j) % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(k + 1, j).round()
        })
        .collect()
}

/// `D^(k+1)`, of shape `(p−k−1)×p`; empty when `p ≤ k+1`.
pub fn build_diff_operator(k: usize, p: usize) -> SparseMatrix {
    let m = p.saturating_sub(k + 1);
    let coef = diff_coefficients(k);
    let mut t = TriMat::with_capacity((m, p), m * (k + 2));
    for i in 0..m {
        for (j, &c) in coef.iter().enumerate() {
            t.add_triplet(i, i + j, c);
        }
    }
    t.to_csr()
}

/// Oriented incidence matrix: row `ℓ` has `−1` at `min(i, j)` and `+1` at `max(i, j)`.
pub fn build_incidence(p: usize, edges: &[(usize, usize)]) -> Result<SparseMatrix> {
    Ok(incidence_unchecked(p, &normalize_edges(p, edges)?, None))
}

fn incidence_unchecked(p: usize, edges: &[(usize, usize)], alpha: Option<f64>) -> SparseMatrix {
    let m = edges.len() + alpha.map_or(0, |_| p);
    let mut t = TriMat::with_capacity((m, p), 2 * edges.len() + p);
    for (l, &(i, j)) in edges.iter().enumerate() {
        t.add_triplet(l, i, -1.0);
        t.add_triplet(l, j, 1.0);
    }
    if let Some(a) = alpha {
        for i in 0..p {
            t.add_triplet(edges.len() + i, i, a);
        }
    }
    t.to_csr()
}

pub fn to_dense(d: &SparseMatrix) -> Matrix {
    let mut out = Matrix::zeros(d.rows(), d.cols());
    for (i, row) in d.outer_iterator().enumerate() {
        for (j, &v) in row.iter() {
            out[(i, j)] += v;
        }
    }
    out
}

pub fn from_dense(a: &Matrix) -> SparseMatrix {
    let mut t = TriMat::new(a.shape());
    for i in 0..a.rows() {
        for (j, &v) in a.row(i).iter().enumerate() {
            if v != 0.0 {
                t.add_triplet(i, j, v);
            }
        }
    }
    t.to_csr()
}

/// `D_S x` for the rows `S`.
pub fn mul_rows(d: &SparseMatrix, rows: &[usize], x: &[f64]) -> Vec<f64> {
    rows.iter()
        .map(|&r| {
            d.outer_view(r)
                .map_or(0.0, |row| row.iter().map(|(j, &v)| v * x[j]).sum())
        })
        .collect()
}

/// `D_Sᵀ u` for the rows `S`, with `u` aligned to `S`.
pub fn tr_mul_rows(d: &SparseMatrix, rows: &[usize], u: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; d.cols()];
    for (&r, &ur) in rows.iter().zip(u) {
        if ur == 0.0 {
            continue;
        }
        if let Some(row) = d.outer_view(r) {
            for (j, &v) in row.iter() {
                out[j] += v * ur;
            }
        }
    }
    out
}

/// Boundary set `B` (sorted, distinct) with aligned signs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundaryPartition {
    pub indices: Vec<usize>,
    pub signs: Vec<f64>,
}

impl BoundaryPartition {
    pub fn new(indices: Vec<usize>, signs: Vec<f64>) -> Result<Self> {
        if indices.len() != signs.len() {
            return Err(Error::dim(format!(
                "{} boundary indices but {} signs",
                indices.len(),
                signs.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input("boundary indices must be strictly increasing"));
        }
        if signs.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(Error::input("boundary signs must be +1 or -1"));
        }
        Ok(BoundaryPartition { indices, signs })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Inserts `i` with `sign`, keeping the order.
    pub fn insert(&mut self, i: usize, sign: f64) {
        if let Err(pos) = self.indices.binary_search(&i) {
            self.indices.insert(pos, i);
            self.signs.insert(pos, sign);
        }
    }

    /// Removes `i` and returns its sign.
    pub fn remove(&mut self, i: usize) -> Option<f64> {
        let pos = self.indices.binary_search(&i).ok()?;
        self.indices.remove(pos);
        Some(self.signs.remove(pos))
    }

    /// Rows of `D` outside the boundary, in increasing order.
    pub fn interior(&self, m: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(m - self.len());
        let mut b = self.indices.iter().peekable();
        for i in 0..m {
            if b.peek() == Some(&&i) {
                b.next();
            } else {
                out.push(i);
            }
        }
        out
    }

    /// For the sparse-fused stack with `num_edges` edge rows: `(B₁, B₂)` with `B₂` as node indices.
    pub fn split(&self, num_edges: usize) -> (Vec<usize>, Vec<usize>) {
        let cut = self.indices.partition_point(|&i| i < num_edges);
        (
            self.indices[..cut].to_vec(),
            self.indices[cut..].iter().map(|&i| i - num_edges).collect(),
        )
    }
}

/// Connected components of the graph on `p` nodes using the edges with `active[ℓ]`, each sorted,
/// listed by smallest node.
pub fn connected_components(
    p: usize,
    edges: &[(usize, usize)],
    active: &[bool],
) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); p];
    for (l, &(i, j)) in edges.iter().enumerate() {
        if active[l] {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    let mut seen = vec![false; p];
    let mut comps = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..p {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        queue.push_back(s);
        let mut comp = Vec::new();
        while let Some(u) = queue.pop_front() {
            comp.push(u);
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Columns spanning `null(D_{−B})`, kept integer-valued.
///
/// Trend filtering gets the polynomial basis `v_0..v_k` plus one truncated `v_k` per boundary
/// row; graphs get component indicators (for the sparse-fused stack, only components whose
/// nodes all lie in `B₂`).
pub fn null_basis(spec: &PenaltySpec, b: &BoundaryPartition) -> Result<Matrix> {
    let p = spec.p();
    if let Some(&last) = b.indices.last() {
        if last >= spec.m() {
            return Err(Error::input(format!(
                "boundary row {last} out of range for {} rows",
                spec.m()
            )));
        }
    }
    match spec {
        PenaltySpec::TrendFilter { order: k, .. } => {
            let k = *k;
            let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k + 1 + b.len());
            cols.push(vec![1.0; p]);
            for j in 1..=k {
                let mut acc = 0.0;
                let v = cols[j - 1].iter().map(|&x| {
                    acc += x;
                    acc
                });
                cols.push(v.collect());
            }
            if p < k + 1 {
                // Fewer positions than polynomial degrees of freedom: the null space is all of R^p.
                return Ok(Matrix::identity(p));
            }
            let vk = cols[k].clone();
            for &row in &b.indices {
                let start = row + k + 1;
                let mut h = vec![0.0; p];
                for i in start..p {
                    h[i] = vk[i - start];
                }
                cols.push(h);
            }
            Ok(Matrix::from_columns(&cols, p))
        }
        PenaltySpec::FusedGraph { edges, .. } => {
            let mut active = vec![true; edges.len()];
            for &i in &b.indices {
                active[i] = false;
            }
            let comps = connected_components(p, edges, &active);
            Ok(indicator_columns(p, comps.iter()))
        }
        PenaltySpec::SparseFusedGraph { edges, .. } => {
            let (b1, b2) = b.split(edges.len());
            let mut active = vec![true; edges.len()];
            for &i in &b1 {
                active[i] = false;
            }
            let mut on_boundary = vec![false; p];
            for &i in &b2 {
                on_boundary[i] = true;
            }
            let comps = connected_components(p, edges, &active);
            Ok(indicator_columns(
                p,
                comps.iter().filter(|c| c.iter().all(|&i| on_boundary[i])),
            ))
        }
        PenaltySpec::Custom { .. } => Err(Error::Unsupported(
            "null basis of a custom penalty matrix".into(),
        )),
    }
}

fn indicator_columns<'a>(p: usize, comps: impl Iterator<Item = &'a Vec<usize>>) -> Matrix {
    let cols: Vec<Vec<f64>> = comps
        .map(|c| {
            let mut v = vec![0.0; p];
            for &i in c {
                v[i] = 1.0;
            }
            v
        })
        .collect();
    Matrix::from_columns(&cols, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::oracle_rank;
    use proptest::prelude::*;

    fn rows_of(d: &SparseMatrix) -> Vec<Vec<f64>> {
        let m = to_dense(d);
        (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
    }

    #[test]
    fn first_differences() {
        assert_eq!(
            rows_of(&build_diff_operator(0, 4)),
            vec![
                vec![-1.0, 1.0, 0.0, 0.0],
                vec![0.0, -1.0, 1.0, 0.0],
                vec![0.0, 0.0, -1.0, 1.0]
            ]
        );
        assert_eq!(rows_of(&build_diff_operator(0, 2)), vec![vec![-1.0, 1.0]]);
        assert_eq!(build_diff_operator(2, 3).rows(), 0);
    }

    #[test]
    fn second_differences_are_a_product() {
        let d2 = to_dense(&build_diff_operator(1, 4));
        assert_eq!(d2.row(0), &[1.0, -2.0, 1.0, 0.0]);
        assert_eq!(d2.row(1), &[0.0, 1.0, -2.0, 1.0]);
        for k in 1..5 {
            let p = 9;
            let prod = to_dense(&build_diff_operator(0, p - k))
                .matmul(&to_dense(&build_diff_operator(k - 1, p)));
            assert_eq!(prod, to_dense(&build_diff_operator(k, p)));
        }
    }

    #[test]
    fn incidence_examples() {
        let d = build_incidence(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(to_dense(&d), to_dense(&build_diff_operator(0, 3)));
        let d = build_incidence(2, &[]).unwrap();
        assert_eq!(d.shape(), (0, 2));
        assert_eq!(
            rows_of(&build_incidence(3, &[(2, 0)]).unwrap()),
            vec![vec![-1.0, 0.0, 1.0]]
        );
        assert!(build_incidence(3, &[(1, 1)]).is_err());
        assert!(build_incidence(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn sparse_fused_stack() {
        let spec = PenaltySpec::sparse_fused(3, &[(0, 1), (1, 2)], 0.5).unwrap();
        let d = to_dense(&spec.matrix());
        assert_eq!(d.shape(), (5, 3));
        assert_eq!(d.row(3), &[0.0, 0.5, 0.0]);
        assert!(PenaltySpec::sparse_fused(3, &[], 0.0).is_err());
    }

    #[test]
    fn trend_filter_null_basis_examples() {
        let spec = PenaltySpec::trend_filter(1, 4);
        let h = null_basis(&spec, &BoundaryPartition::empty()).unwrap();
        assert_eq!(h.column(0), vec![1.0; 4]);
        assert_eq!(h.column(1), vec![1.0, 2.0, 3.0, 4.0]);
        let b = BoundaryPartition::new(vec![0], vec![1.0]).unwrap();
        let h = null_basis(&spec, &b).unwrap();
        assert_eq!(h.cols(), 3);
        assert_eq!(h.column(2), vec![0.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn fused_null_basis_two_components() {
        let spec = PenaltySpec::fused(4, &[(0, 1), (2, 3)]).unwrap();
        let h = null_basis(&spec, &BoundaryPartition::empty()).unwrap();
        assert_eq!(h.column(0), vec![1.0, 1.0, 0.0, 0.0]);
        assert_eq!(h.column(1), vec![0.0, 0.0, 1.0, 1.0]);
        let custom = PenaltySpec::custom(1, 2, &[(0, 0, 1.0)]).unwrap();
        assert!(matches!(
            null_basis(&custom, &BoundaryPartition::empty()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn boundary_partition_bookkeeping() {
        let mut b = BoundaryPartition::empty();
        b.insert(4, -1.0);
        b.insert(1, 1.0);
        b.insert(7, 1.0);
        assert_eq!(b.indices, vec![1, 4, 7]);
        assert_eq!(b.signs, vec![1.0, -1.0, 1.0]);
        assert_eq!(b.interior(8), vec![0, 2, 3, 5, 6]);
        assert_eq!(b.split(5), (vec![1, 4], vec![2]));
        assert_eq!(b.remove(4), Some(-1.0));
        assert!(BoundaryPartition::new(vec![2, 1], vec![1.0, 1.0]).is_err());
    }

    fn random_spec(kind: u8, p: usize, seed: u64) -> PenaltySpec {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for i in 0..p {
            for j in i + 1..p {
                if rng.gen_bool(2.5 / p as f64) {
                    edges.push((i, j));
                }
            }
        }
        match kind {
            0 => PenaltySpec::trend_filter(rng.gen_range(0..4), p),
            1 => PenaltySpec::fused(p, &edges).unwrap(),
            _ => PenaltySpec::sparse_fused(p, &edges, 0.7).unwrap(),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn null_basis_annihilated_and_full_dimension(
            kind in 0u8..3, p in 5usize..30, seed in any::<u64>(), mask in any::<u64>()
        ) {
            let spec = random_spec(kind, p, seed);
            let m = spec.m();
            let mut b = BoundaryPartition::empty();
            for i in 0..m {
                if (mask >> (i % 64)) & 1 == 1 && (i / 64) % 2 == 0 {
                    b.insert(i, if i % 3 == 0 { -1.0 } else { 1.0 });
                }
            }
            let h = null_basis(&spec, &b).unwrap();
            let d = to_dense(&spec.matrix());
            let interior = b.interior(m);
            let dsub = Matrix::from_rows(
                &interior.iter().map(|&i| d.row(i).to_vec()).collect::<Vec<_>>(), p);
            prop_assert_eq!(dsub.matmul(&h).max_abs(), 0.0);
            prop_assert_eq!(oracle_rank(&h), h.cols());
            prop_assert_eq!(p - oracle_rank(&dsub), h.cols());
        }

        #[test]
        fn difference_rows_sum_to_zero(k in 0usize..6, p in 0usize..20) {
            let d = build_diff_operator(k, p);
            for row in d.outer_iterator() {
                prop_assert_eq!(row.iter().map(|(_, &v)| v).sum::<f64>(), 0.0);
            }
        }
    }
}
