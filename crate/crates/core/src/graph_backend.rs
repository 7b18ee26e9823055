//! Fused lasso and sparse fused lasso with `X = I`.
//!
//! `null(D_{−B})` is spanned by indicators of connected components of `G_{−B}`, so projecting
//! onto it is a componentwise mean. Minimum-norm solutions come from `â = D_{−B} z` with
//! `D_{−B}ᵀD_{−B} z = (I − P_null) r`, a block-diagonal Laplacian system solved one component
//! at a time after dropping the highest-numbered node.

use std::collections::VecDeque;

use sprs::TriMat;
use sprs_ldl::{Ldl, LdlNumeric};

use crate::dense::norm2;
use crate::error::{Error, Result};
use crate::operators::{BoundaryPartition, PenaltySpec};
use crate::path::InteriorSolver;

/// Connected components of the graph restricted to its active edges, maintained under edge
/// insertions and deletions.
#[derive(Clone, Debug)]
pub struct ComponentLabeling {
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<(usize, usize)>>,
    active: Vec<bool>,
    labels: Vec<usize>,
    members: Vec<Vec<usize>>,
    free_ids: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeAction {
    Add,
    Remove,
}

impl ComponentLabeling {
    /// Labeling of the graph with every edge active.
    pub fn new(p: usize, edges: &[(usize, usize)]) -> Self {
        Self::with_active(p, edges, &vec![true; edges.len()])
    }

    pub fn with_active(p: usize, edges: &[(usize, usize)], active: &[bool]) -> Self {
        let mut adj = vec![Vec::new(); p];
        for (l, &(i, j)) in edges.iter().enumerate() {
            adj[i].push((j, l));
            adj[j].push((i, l));
        }
        let comps = crate::operators::connected_components(p, edges, active);
        let mut labels = vec![0; p];
        for (c, nodes) in comps.iter().enumerate() {
            for &i in nodes {
                labels[i] = c;
            }
        }
        ComponentLabeling {
            edges: edges.to_vec(),
            adj,
            active: active.to_vec(),
            labels,
            members: comps,
            free_ids: Vec::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn count(&self) -> usize {
        self.members.len() - self.free_ids.len()
    }

    pub fn is_active(&self, e: usize) -> bool {
        self.active[e]
    }

    /// Components as sorted node lists, ordered by smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self
            .members
            .iter()
            .filter(|c| !c.is_empty())
            .map(|c| {
                let mut c = c.clone();
                c.sort_unstable();
                c
            })
            .collect();
        out.sort_unstable_by_key(|c| c[0]);
        out
    }

    /// Deactivates edge `e`. Returns whether its component split.
    pub fn remove_edge(&mut self, e: usize) -> bool {
        if !self.active[e] {
            return false;
        }
        self.active[e] = false;
        let (u, v) = self.edges[e];
        let mut seen = vec![u];
        let mut queue = VecDeque::from([u]);
        let mut mark = std::collections::HashSet::from([u]);
        while let Some(x) = queue.pop_front() {
            for &(w, l) in &self.adj[x] {
                if self.active[l] && mark.insert(w) {
                    if w == v {
                        return false;
                    }
                    seen.push(w);
                    queue.push_back(w);
                }
            }
        }
        let old = self.labels[u];
        let id = self.free_ids.pop().unwrap_or_else(|| {
            self.members.push(Vec::new());
            self.members.len() - 1
        });
        for &x in &seen {
            self.labels[x] = id;
        }
        self.members[old].retain(|x| !mark.contains(x));
        self.members[id] = seen;
        true
    }

    /// Activates edge `e`. Returns whether two components merged.
    pub fn add_edge(&mut self, e: usize) -> bool {
        if self.active[e] {
            return false;
        }
        self.active[e] = true;
        let (u, v) = self.edges[e];
        let (lu, lv) = (self.labels[u], self.labels[v]);
        if lu == lv {
            return false;
        }
        let (keep, gone) = if self.members[lu].len() >= self.members[lv].len() {
            (lu, lv)
        } else {
            (lv, lu)
        };
        let moved = std::mem::take(&mut self.members[gone]);
        for &x in &moved {
            self.labels[x] = keep;
        }
        self.members[keep].extend(moved);
        self.free_ids.push(gone);
        true
    }

    /// Active edges inside a component, as `(u, v)` pairs seen from both ends.
    fn active_neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[u]
            .iter()
            .filter(|&&(_, l)| self.active[l])
            .map(|&(w, _)| w)
    }
}

pub fn components_update(labeling: &mut ComponentLabeling, e: usize, action: EdgeAction) -> bool {
    match action {
        EdgeAction::Add => labeling.add_edge(e),
        EdgeAction::Remove => labeling.remove_edge(e),
    }
}

/// Whether every node of `comp` lies in `free_nodes` (always true without a node set).
fn is_free(comp: &[usize], free_nodes: Option<&[bool]>) -> bool {
    free_nodes.map_or(true, |f| comp.iter().all(|&i| f[i]))
}

/// Projection onto `null(D_{−B})`: componentwise means, with components that contain a node
/// outside `free_nodes` mapped to zero (the sparse-fused rule).
pub fn project_null(
    labeling: &ComponentLabeling,
    x: &[f64],
    free_nodes: Option<&[bool]>,
) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for comp in labeling.members.iter().filter(|c| !c.is_empty()) {
        if !is_free(comp, free_nodes) {
            continue;
        }
        let mean = comp.iter().map(|&i| x[i]).sum::<f64>() / comp.len() as f64;
        for &i in comp {
            out[i] = mean;
        }
    }
    out
}

enum Block {
    /// Free singleton: the reduced system is empty and the solution is zero.
    Empty,
    /// One unknown: degree plus shift.
    Scalar(f64),
    Ldl(LdlNumeric<f64, usize>),
}

struct ComponentFactor {
    nodes: Vec<usize>,
    /// Free components drop their last (highest-numbered) node.
    reduced: bool,
    block: Block,
}

/// Factorization of `L_{G−B₁} + α²·diag(1[i ∉ B₂])`, one block per component.
pub struct LaplacianFactor {
    p: usize,
    comps: Vec<ComponentFactor>,
}

impl LaplacianFactor {
    /// Plain graph Laplacian of the active edges.
    pub fn new(labeling: &ComponentLabeling) -> Result<Self> {
        Self::build(labeling, None)
    }

    /// Shifted Laplacian for the sparse-fused stack: `α²` on every node with `!free_nodes[i]`.
    pub fn with_shift(
        labeling: &ComponentLabeling,
        alpha: f64,
        free_nodes: &[bool],
    ) -> Result<Self> {
        Self::build(labeling, Some((alpha, free_nodes)))
    }

    fn build(labeling: &ComponentLabeling, shift: Option<(f64, &[bool])>) -> Result<Self> {
        let p = labeling.num_nodes();
        let mut local = vec![usize::MAX; p];
        let mut comps = Vec::with_capacity(labeling.count());
        for nodes in labeling.components() {
            let free = is_free(&nodes, shift.map(|s| s.1));
            let size = if free { nodes.len() - 1 } else { nodes.len() };
            for (k, &i) in nodes[..size].iter().enumerate() {
                local[i] = k;
            }
            let block = if size == 0 {
                Block::Empty
            } else if size == 1 {
                // The 1×1 block is the degree (plus shift) of the kept node.
                let u = nodes[0];
                let mut deg = labeling.active_neighbors(u).count() as f64;
                if let Some((alpha, f)) = shift {
                    if !f[u] {
                        deg += alpha * alpha;
                    }
                }
                Block::Scalar(deg)
            } else {
                let mut t = TriMat::new((size, size));
                for &u in &nodes[..size] {
                    let lu = local[u];
                    let mut deg = 0.0;
                    for w in labeling.active_neighbors(u) {
                        deg += 1.0;
                        // The dropped node has no local index.
                        if local[w] != usize::MAX {
                            t.add_triplet(lu, local[w], -1.0);
                        }
                    }
                    if let Some((alpha, f)) = shift {
                        if !f[u] {
                            deg += alpha * alpha;
                        }
                    }
                    t.add_triplet(lu, lu, deg);
                }
                let mat = t.to_csc();
                let ldl = Ldl::new()
                    .fill_in_reduction(sprs::FillInReduction::ReverseCuthillMcKee)
                    .check_symmetry(sprs::SymmetryCheck::DontCheckSymmetry)
                    .numeric(mat.view())
                    .map_err(|e| {
                        Error::numerical(format!("Laplacian block factorization failed: {e}"))
                    })?;
                if ldl.d().iter().any(|&d| !(d > 0.0)) {
                    return Err(Error::numerical("Laplacian block is not positive definite"));
                }
                Block::Ldl(ldl)
            };
            for &i in &nodes[..size] {
                local[i] = usize::MAX;
            }
            comps.push(ComponentFactor {
                nodes,
                reduced: free,
                block,
            });
        }
        Ok(LaplacianFactor { p, comps })
    }

    /// `x` with `Lx = b`; on free components `b` must have zero mean and the dropped node is 0.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.p {
            return Err(Error::dim(format!(
                "right-hand side of length {} for {} nodes",
                b.len(),
                self.p
            )));
        }
        let bnorm = norm2(b);
        for c in self.comps.iter().filter(|c| c.reduced) {
            let mean = c.nodes.iter().map(|&i| b[i]).sum::<f64>() / c.nodes.len() as f64;
            if mean.abs() > 1e-9 * bnorm {
                return Err(Error::Contract(format!(
                    "right-hand side has mean {mean:e} on a component; it is not in the \
                     column space of the Laplacian"
                )));
            }
        }
        Ok(self.solve_projected(b))
    }

    // No mean check: the caller already projected `b`, and what is left of the mean is
    // round-off relative to the original vector, which can dwarf the projected one.
    fn solve_projected(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.p];
        for c in &self.comps {
            let size = if c.reduced {
                c.nodes.len() - 1
            } else {
                c.nodes.len()
            };
            match &c.block {
                Block::Empty => {}
                Block::Scalar(d) => x[c.nodes[0]] = b[c.nodes[0]] / d,
                Block::Ldl(f) => {
                    let rhs: Vec<f64> = c.nodes[..size].iter().map(|&i| b[i]).collect();
                    let sol = f.solve(&rhs);
                    for (&i, v) in c.nodes[..size].iter().zip(sol) {
                        x[i] = v;
                    }
                }
            }
        }
        x
    }
}

/// Solves the Laplacian system of the active edges for a right-hand side in its column space.
pub fn laplacian_solve(labeling: &ComponentLabeling, b: &[f64]) -> Result<Vec<f64>> {
    LaplacianFactor::new(labeling)?.solve(b)
}

/// [`InteriorSolver`] for the fused lasso (`alpha = None`) and sparse fused lasso.
#[derive(Clone, Debug)]
pub struct GraphSolver {
    p: usize,
    edges: Vec<(usize, usize)>,
    alpha: Option<f64>,
    labeling: ComponentLabeling,
    node_boundary: Vec<bool>,
}

impl GraphSolver {
    pub fn new(spec: &PenaltySpec) -> Result<Self> {
        let (p, edges, alpha) = match spec {
            PenaltySpec::FusedGraph { p, edges } => (*p, edges.clone(), None),
            PenaltySpec::SparseFusedGraph { p, edges, alpha } => (*p, edges.clone(), Some(*alpha)),
            _ => {
                return Err(Error::Unsupported(
                    "graph backend needs a fused or sparse fused penalty".into(),
                ))
            }
        };
        Ok(GraphSolver {
            labeling: ComponentLabeling::new(p, &edges),
            node_boundary: vec![false; p],
            p,
            edges,
            alpha,
        })
    }

    pub fn labeling(&self) -> &ComponentLabeling {
        &self.labeling
    }

    fn free_nodes(&self) -> Option<&[bool]> {
        self.alpha.map(|_| self.node_boundary.as_slice())
    }

    fn check_row(&self, i: usize) -> Result<()> {
        if i >= self.num_dual() {
            Err(Error::input(format!(
                "row {i} out of range for {} penalty rows",
                self.num_dual()
            )))
        } else {
            Ok(())
        }
    }

    /// `D_{−B} z` in increasing row order.
    fn apply_interior(&self, z: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_dual());
        for (l, &(i, j)) in self.edges.iter().enumerate() {
            if self.labeling.is_active(l) {
                out.push(z[j] - z[i]);
            }
        }
        if let Some(a) = self.alpha {
            for i in 0..self.p {
                if !self.node_boundary[i] {
                    out.push(a * z[i]);
                }
            }
        }
        out
    }
}

impl InteriorSolver for GraphSolver {
    fn num_dual(&self) -> usize {
        self.edges.len() + self.alpha.map_or(0, |_| self.p)
    }

    fn num_primal(&self) -> usize {
        self.p
    }

    fn add_boundary(&mut self, i: usize) -> Result<()> {
        self.check_row(i)?;
        if i < self.edges.len() {
            self.labeling.remove_edge(i);
        } else {
            self.node_boundary[i - self.edges.len()] = true;
        }
        Ok(())
    }

    fn remove_boundary(&mut self, i: usize) -> Result<()> {
        self.check_row(i)?;
        if i < self.edges.len() {
            self.labeling.add_edge(i);
        } else {
            self.node_boundary[i - self.edges.len()] = false;
        }
        Ok(())
    }

    fn solve(&mut self, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let factor = match self.alpha {
            None => LaplacianFactor::new(&self.labeling)?,
            Some(a) => LaplacianFactor::with_shift(&self.labeling, a, &self.node_boundary)?,
        };
        rhs.iter()
            .map(|r| {
                if r.len() != self.p {
                    return Err(Error::dim(format!(
                        "right-hand side of length {} for p = {}",
                        r.len(),
                        self.p
                    )));
                }
                let proj = project_null(&self.labeling, r, self.free_nodes());
                let centered: Vec<f64> = r.iter().zip(&proj).map(|(a, b)| a - b).collect();
                let z = factor.solve_projected(&centered);
                Ok(self.apply_interior(&z))
            })
            .collect()
    }

    fn nullity(&self) -> usize {
        let free = self.free_nodes();
        self.labeling
            .members
            .iter()
            .filter(|c| !c.is_empty() && is_free(c, free))
            .count()
    }
}

/// `(â, b̂)` for a fused or sparse fused penalty at boundary `b`.
pub fn fused_step_quantities(
    y: &[f64],
    spec: &PenaltySpec,
    b: &BoundaryPartition,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut solver = GraphSolver::new(spec)?;
    if y.len() != solver.p {
        return Err(Error::dim(format!(
            "y has length {} but the graph has {} nodes",
            y.len(),
            solver.p
        )));
    }
    for &i in &b.indices {
        solver.add_boundary(i)?;
    }
    let dbs = crate::operators::tr_mul_rows(&spec.matrix(), &b.indices, &b.signs);
    let mut out = solver.solve(&[y.to_vec(), dbs])?;
    let bhat = out.pop().unwrap();
    let ahat = out.pop().unwrap();
    Ok((ahat, bhat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::Matrix;
    use crate::operators::to_dense;
    use crate::test_support::{max_diff, oracle_min_norm};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph(rng: &mut ChaCha8Rng, p: usize, density: f64) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for i in 0..p {
            for j in i + 1..p {
                if rng.gen_bool(density) {
                    edges.push((i, j));
                }
            }
        }
        edges
    }

    fn random_connected(rng: &mut ChaCha8Rng, p: usize) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = (1..p).map(|i| (rng.gen_range(0..i), i)).collect();
        for _ in 0..p {
            let (i, j) = (rng.gen_range(0..p), rng.gen_range(0..p));
            if i != j {
                edges.push((i.min(j), i.max(j)));
            }
        }
        edges
    }

    fn laplacian(p: usize, edges: &[(usize, usize)]) -> Matrix {
        let d = to_dense(&crate::operators::build_incidence(p, edges).unwrap());
        d.transpose().matmul(&d)
    }

    #[test]
    fn component_updates() {
        let mut lab = ComponentLabeling::new(3, &[(0, 1), (1, 2)]);
        assert!(components_update(&mut lab, 0, EdgeAction::Remove));
        assert_eq!(lab.components(), vec![vec![0], vec![1, 2]]);

        let mut lab = ComponentLabeling::new(3, &[(0, 1), (1, 2), (0, 2)]);
        assert!(!components_update(&mut lab, 0, EdgeAction::Remove));
        assert_eq!(lab.count(), 1);

        let mut lab = ComponentLabeling::with_active(2, &[(0, 1)], &[false]);
        assert_eq!(lab.count(), 2);
        assert!(components_update(&mut lab, 0, EdgeAction::Add));
        assert_eq!(lab.components(), vec![vec![0, 1]]);
    }

    #[test]
    fn projections() {
        let lab = ComponentLabeling::new(4, &[(0, 1)]);
        assert_eq!(
            project_null(&lab, &[1.0, 3.0, 5.0, 7.0], None),
            vec![2.0, 2.0, 5.0, 7.0]
        );
        let lab = ComponentLabeling::new(3, &[(0, 1), (1, 2)]);
        assert_eq!(project_null(&lab, &[1.0, 2.0, 6.0], None), vec![3.0; 3]);
        let lab = ComponentLabeling::new(3, &[(0, 1)]);
        let free = [true, true, false];
        assert_eq!(
            project_null(&lab, &[1.0, 3.0, 9.0], Some(&free)),
            vec![2.0, 2.0, 0.0]
        );
    }

    #[test]
    fn chain_laplacian_solve() {
        let lab = ComponentLabeling::new(3, &[(0, 1), (1, 2)]);
        let x = laplacian_solve(&lab, &[1.0, 0.0, -1.0]).unwrap();
        assert!(max_diff(&x, &[2.0, 1.0, 0.0]) < 1e-14);
        assert_eq!(laplacian_solve(&lab, &[0.0; 3]).unwrap(), vec![0.0; 3]);
        assert!(matches!(
            laplacian_solve(&lab, &[1.0, 0.0, 0.0]),
            Err(Error::Contract(_))
        ));

        let lab = ComponentLabeling::new(5, &[(0, 1), (2, 3), (3, 4)]);
        let x = laplacian_solve(&lab, &[0.0, 0.0, 1.0, 1.0, -2.0]).unwrap();
        assert_eq!(&x[..2], &[0.0, 0.0]);
    }

    #[test]
    fn fused_worked_instance_and_full_boundary() {
        let spec = PenaltySpec::chain(3);
        let (a, b) =
            fused_step_quantities(&[0.0, 1.0, 3.0], &spec, &BoundaryPartition::empty()).unwrap();
        assert!(max_diff(&a, &[4.0 / 3.0, 5.0 / 3.0]) < 1e-14);
        assert!(max_diff(&b, &[0.0, 0.0]) < 1e-15);
        let all = BoundaryPartition::new(vec![0, 1], vec![1.0, -1.0]).unwrap();
        let (a, b) = fused_step_quantities(&[0.0, 1.0, 3.0], &spec, &all).unwrap();
        assert!(a.is_empty() && b.is_empty());
    }

    #[test]
    fn sparse_fused_without_boundary_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let p = 8;
            let edges = random_graph(&mut rng, p, 0.3);
            let spec = PenaltySpec::sparse_fused(p, &edges, 0.5).unwrap();
            let y: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (a, _) = fused_step_quantities(&y, &spec, &BoundaryPartition::empty()).unwrap();
            let mut shifted = laplacian(p, &edges);
            for i in 0..p {
                shifted[(i, i)] += 0.25;
            }
            let z = crate::dense::cholesky_solve(&shifted, &y).unwrap();
            let d = to_dense(&spec.matrix());
            assert!(max_diff(&a, &d.mul_vec(&z)) < 1e-12);
        }
    }

    #[test]
    fn reduction_index_does_not_change_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = 12;
        let edges = random_connected(&mut rng, p);
        let l = laplacian(p, &edges);
        let b = l.mul_vec(&(0..p).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
        let x_last = laplacian_solve(&ComponentLabeling::new(p, &edges), &b).unwrap();
        // Dropping the first node instead: relabel nodes in reverse so it becomes the last.
        let rev: Vec<(usize, usize)> = edges.iter().map(|&(i, j)| (p - 1 - j, p - 1 - i)).collect();
        let brev: Vec<f64> = b.iter().rev().copied().collect();
        let x_first: Vec<f64> = laplacian_solve(&ComponentLabeling::new(p, &rev), &brev)
            .unwrap()
            .into_iter()
            .rev()
            .collect();
        assert!(max_diff(&l.mul_vec(&x_last), &l.mul_vec(&x_first)) < 1e-10);
        let centered = |x: &[f64]| {
            let m = x.iter().sum::<f64>() / x.len() as f64;
            x.iter().map(|v| v - m).collect::<Vec<_>>()
        };
        assert!(max_diff(&centered(&x_last), &centered(&x_first)) < 1e-10);
    }

    #[test]
    fn labeling_survives_random_updates() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let p = 40;
        let edges = random_graph(&mut rng, p, 0.08);
        let mut lab = ComponentLabeling::new(p, &edges);
        let mut active = vec![true; edges.len()];
        for _ in 0..1000 {
            let e = rng.gen_range(0..edges.len());
            if active[e] {
                lab.remove_edge(e);
            } else {
                lab.add_edge(e);
            }
            active[e] = !active[e];
            let fresh = crate::operators::connected_components(p, &edges, &active);
            assert_eq!(lab.components(), fresh);
            for c in &fresh {
                assert!(c.iter().all(|&i| lab.label(i) == lab.label(c[0])));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn reduced_laplacian_solve_has_small_residual(seed in any::<u64>(), p in 2usize..100) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let edges = random_connected(&mut rng, p);
            let l = laplacian(p, &edges);
            let b = l.mul_vec(&(0..p).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
            let x = laplacian_solve(&ComponentLabeling::new(p, &edges), &b).unwrap();
            let r: Vec<f64> = l.mul_vec(&x).iter().zip(&b).map(|(a, c)| a - c).collect();
            prop_assert!(norm2(&r) <= 1e-10 * norm2(&b).max(1e-300));
        }

        #[test]
        fn projection_is_idempotent(seed in any::<u64>(), p in 1usize..30) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let edges = random_graph(&mut rng, p, 0.1);
            let lab = ComponentLabeling::new(p, &edges);
            let x: Vec<f64> = (0..p).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let once = project_null(&lab, &x, None);
            let twice = project_null(&lab, &once, None);
            prop_assert!(max_diff(&twice, &once) <= 1e-14 * 5.0 * p as f64);
        }

        #[test]
        fn graph_interior_solve_matches_min_norm_oracle(
            seed in any::<u64>(), p in 2usize..25, sparse in any::<bool>()
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let edges = random_graph(&mut rng, p, 0.2);
            let spec = if sparse {
                PenaltySpec::sparse_fused(p, &edges, 0.5).unwrap()
            } else {
                PenaltySpec::fused(p, &edges).unwrap()
            };
            let m = spec.m();
            let mut b = BoundaryPartition::empty();
            for i in 0..m {
                if rng.gen_bool(0.4) {
                    b.insert(i, if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
                }
            }
            let y: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (a, bh) = fused_step_quantities(&y, &spec, &b).unwrap();
            let d = to_dense(&spec.matrix());
            let interior = b.interior(m);
            let sub = Matrix::from_rows(
                &interior.iter().map(|&i| d.row(i).to_vec()).collect::<Vec<_>>(), p);
            let dbs = crate::operators::tr_mul_rows(&spec.matrix(), &b.indices, &b.signs);
            prop_assert!(max_diff(&a, &oracle_min_norm(&sub.transpose(), &y)) <= 1e-8);
            prop_assert!(max_diff(&bh, &oracle_min_norm(&sub.transpose(), &dbs)) <= 1e-8);
        }
    }
}
