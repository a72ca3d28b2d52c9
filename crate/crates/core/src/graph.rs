//! The full configuration, its orthogonality graph, the relation check,
//! deformations and exports.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::indexset::{enumerate_l, relation_holds, Group, Point, PointSet, RayLabel, RelationParams};
use crate::params::{validate_parameters, ParameterSet};
use crate::rays::{DenseRay, FactoredRay, QubitBasisFamily, RaySystem, DENSE_MAX_POINTS};
use crate::report::ValidationReport;

/// Largest ray count for which [`find_isomorphism`] runs.
pub const ISOMORPHISM_MAX_RAYS: usize = 80;
/// Default decision threshold: an edge iff `|⟨a,b⟩| < ORTHOGONALITY_EPS`.
pub const ORTHOGONALITY_EPS: f64 = 1e-9;
/// Upper end of the guard band `(ε, AMBIGUITY_UPPER)`.
pub const AMBIGUITY_UPPER: f64 = 1e-6;
/// Dense cross-check runs up to this dimension.
pub const DENSE_CHECK_MAX_DIM: usize = 128;
/// Agreement required between the dense and factored overlaps.
pub const PATH_TOL: f64 = 1e-10;

/// All rays for one parameter set, in label order: `Ψ⁰, …, Ψ^{N−2}, Ψ*`, then
/// `F`; ascending `φ` inside each group. Each group is a designated basis.
#[derive(Debug, Clone)]
pub struct Configuration {
    system: RaySystem,
    labels: Vec<RayLabel>,
    bases: Vec<Vec<usize>>,
}

/// Validates `params`, then builds every ray label and designated basis.
pub fn build_configuration(
    ps: &PointSet,
    relation: RelationParams,
    params: &ParameterSet,
    bases: Option<QubitBasisFamily>,
) -> Result<Configuration> {
    let report = validate_parameters(ps, params);
    if !report.passed {
        return Err(Error::InvalidParameters(report.summary()));
    }
    let system = match bases {
        Some(b) => RaySystem::with_bases(ps, relation, params, b)?,
        None => RaySystem::new(ps, relation, params)?,
    };
    Configuration::from_system(system)
}

impl Configuration {
    /// No parameter validation; used for negative tests and fault injection.
    pub fn from_system(system: RaySystem) -> Result<Self> {
        let ps = *system.point_set();
        let p = *system.relation();
        let mut groups: Vec<Group> = (0..ps.ring_size()).map(|l| Group::Singleton(Point(l))).collect();
        groups.push(Group::Singleton(ps.star()));
        groups.push(Group::Full);
        let mut labels = Vec::new();
        let mut bases = Vec::new();
        for g in groups {
            let start = labels.len();
            for phi in enumerate_l(&ps, ps.group_mask(g), &p)? {
                labels.push(RayLabel { group: g, phi });
            }
            bases.push((start..labels.len()).collect());
        }
        Ok(Self { system, labels, bases })
    }

    pub fn system(&self) -> &RaySystem {
        &self.system
    }

    pub fn point_set(&self) -> &PointSet {
        self.system.point_set()
    }

    pub fn labels(&self) -> &[RayLabel] {
        &self.labels
    }

    pub fn designated_bases(&self) -> &[Vec<usize>] {
        &self.bases
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `2^(N−1)`.
    pub fn dimension(&self) -> usize {
        1 << self.point_set().ring_size()
    }

    pub fn factored_rays(&self) -> Result<Vec<FactoredRay>> {
        self.labels.par_iter().map(|l| self.system.factored(l)).collect()
    }

    pub fn dense_rays(&self) -> Result<Vec<DenseRay>> {
        self.labels.par_iter().map(|l| self.system.dense(l)).collect()
    }

    /// Pairwise overlaps inside each designated basis, via the factored path.
    pub fn check_designated_bases(&self) -> Result<ValidationReport> {
        let rays = self.factored_rays()?;
        let mut report = ValidationReport::new();
        let mut worst = 0.0f64;
        for (b, members) in self.bases.iter().enumerate() {
            if members.len() != self.dimension() {
                report.push("basis-size", &[b, members.len()], members.len() as f64);
            }
            for (x, &i) in members.iter().enumerate() {
                for &j in &members[x + 1..] {
                    let v = self.system.overlap(&rays[i], &rays[j]).norm();
                    worst = worst.max(v);
                    if v >= PATH_TOL {
                        report.push("basis-orthogonality", &[b, i, j], v);
                    }
                }
            }
        }
        report.metric("basis-max-overlap", worst);
        Ok(report)
    }
}

/// Symmetric, irreflexive adjacency where an edge means orthogonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalityGraph {
    order: usize,
    words: usize,
    rows: Vec<u64>,
    epsilon_bits: u64,
    ambiguous_pairs: Vec<(usize, usize)>,
}

impl OrthogonalityGraph {
    pub fn empty(order: usize, epsilon: f64) -> Self {
        let words = order.div_ceil(64);
        Self { order, words, rows: vec![0; order * words], epsilon_bits: epsilon.to_bits(), ambiguous_pairs: Vec::new() }
    }

    pub fn from_edges(order: usize, epsilon: f64, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(order, epsilon);
        for &(i, j) in edges {
            if i >= order || j >= order || i == j {
                return Err(Error::Malformed(format!("bad edge ({i}, {j}) for {order} vertices")));
            }
            g.set_edge(i, j, true);
        }
        Ok(g)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn epsilon(&self) -> f64 {
        f64::from_bits(self.epsilon_bits)
    }

    pub fn ambiguous_pairs(&self) -> &[(usize, usize)] {
        &self.ambiguous_pairs
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// Sets both directions. Loops are refused.
    pub fn set_edge(&mut self, i: usize, j: usize, on: bool) {
        assert_ne!(i, j, "orthogonality graph is irreflexive");
        for (a, b) in [(i, j), (j, i)] {
            let w = &mut self.rows[a * self.words + b / 64];
            if on {
                *w |= 1 << (b % 64);
            } else {
                *w &= !(1 << (b % 64));
            }
        }
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.order).filter(move |&j| self.is_edge(i, j))
    }

    pub fn degree(&self, i: usize) -> usize {
        self.rows[i * self.words..(i + 1) * self.words].iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Edges `(i, j)` with `i < j`, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.order).flat_map(|i| (i + 1..self.order).filter(move |&j| self.is_edge(i, j)).map(move |j| (i, j))).collect()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.order).map(|i| self.degree(i)).sum::<usize>() / 2
    }

    pub fn check_invariants(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        for i in 0..self.order {
            if self.is_edge(i, i) {
                report.push("irreflexive", &[i], 1.0);
            }
            for j in i + 1..self.order {
                if self.is_edge(i, j) != self.is_edge(j, i) {
                    report.push("symmetric", &[i, j], 1.0);
                }
            }
        }
        for &(i, j) in &self.ambiguous_pairs {
            report.push("ambiguous", &[i, j], 1.0);
        }
        report
    }
}

/// Whether the pair scan also materializes state vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DenseCheck {
    /// Only while the dimension is at most [`DENSE_CHECK_MAX_DIM`].
    #[default]
    Auto,
    Always,
    Never,
}

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub epsilon: f64,
    pub dense: DenseCheck,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { epsilon: ORTHOGONALITY_EPS, dense: DenseCheck::Auto }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanStats {
    pub pairs: u64,
    pub max_orthogonal_overlap: f64,
    pub min_nonorthogonal_overlap: f64,
    /// `None` when the dense cross-check was skipped.
    pub max_path_deviation: Option<f64>,
}

/// Orthogonality graph through the factored path, with default options.
pub fn orthogonality_graph(config: &Configuration, epsilon: f64) -> Result<OrthogonalityGraph> {
    scan(config, &ScanOptions { epsilon, ..ScanOptions::default() }).map(|(g, _)| g)
}

struct RowScan {
    edges: Vec<usize>,
    ambiguous: Option<(usize, f64)>,
    mismatch: Option<(usize, f64, f64)>,
    max_orth: f64,
    min_non: f64,
    max_dev: f64,
}

/// Full pair scan. Aborts on the first (lowest index) ambiguous overlap or
/// path mismatch.
pub fn scan(config: &Configuration, opts: &ScanOptions) -> Result<(OrthogonalityGraph, ScanStats)> {
    let n = config.len();
    let dense_on = match opts.dense {
        DenseCheck::Never => false,
        DenseCheck::Auto => config.dimension() <= DENSE_CHECK_MAX_DIM && config.point_set().n_points() <= DENSE_MAX_POINTS,
        DenseCheck::Always => true,
    };
    let factored = config.factored_rays()?;
    let dense = if dense_on { Some(config.dense_rays()?) } else { None };
    let sys = config.system();
    let rows: Vec<RowScan> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = RowScan {
                edges: Vec::new(),
                ambiguous: None,
                mismatch: None,
                max_orth: 0.0,
                min_non: f64::INFINITY,
                max_dev: 0.0,
            };
            for j in i + 1..n {
                let f = sys.overlap(&factored[i], &factored[j]);
                if let Some(d) = &dense {
                    let v: Complex64 = d[i].inner(&d[j]);
                    let dev = (v - f).norm();
                    row.max_dev = row.max_dev.max(dev);
                    if dev > PATH_TOL && row.mismatch.is_none() {
                        row.mismatch = Some((j, v.norm(), f.norm()));
                    }
                }
                let a = f.norm();
                if a < opts.epsilon {
                    row.edges.push(j);
                    row.max_orth = row.max_orth.max(a);
                } else {
                    row.min_non = row.min_non.min(a);
                    if a < AMBIGUITY_UPPER && row.ambiguous.is_none() {
                        row.ambiguous = Some((j, a));
                    }
                }
            }
            row
        })
        .collect();

    let mut graph = OrthogonalityGraph::empty(n, opts.epsilon);
    let mut stats = ScanStats {
        pairs: (n as u64) * (n as u64).saturating_sub(1) / 2,
        max_orthogonal_overlap: 0.0,
        min_nonorthogonal_overlap: f64::INFINITY,
        max_path_deviation: dense.as_ref().map(|_| 0.0),
    };
    for (i, row) in rows.into_iter().enumerate() {
        if let Some((j, dense, factored)) = row.mismatch {
            return Err(Error::PathMismatch { a: i, b: j, dense, factored });
        }
        if let Some((j, value)) = row.ambiguous {
            return Err(Error::AmbiguousOverlap { a: i, b: j, value });
        }
        for j in row.edges {
            graph.set_edge(i, j, true);
        }
        stats.max_orthogonal_overlap = stats.max_orthogonal_overlap.max(row.max_orth);
        stats.min_nonorthogonal_overlap = stats.min_nonorthogonal_overlap.min(row.min_non);
        if let Some(d) = stats.max_path_deviation.as_mut() {
            *d = d.max(row.max_dev);
        }
    }
    Ok((graph, stats))
}

/// Every designated basis must be a clique of size `d` that no outside vertex
/// extends.
pub fn check_basis_cliques(graph: &OrthogonalityGraph, bases: &[Vec<usize>], d: usize) -> ValidationReport {
    let mut report = ValidationReport::new();
    for (b, members) in bases.iter().enumerate() {
        if members.len() != d {
            report.push("clique-size", &[b], members.len() as f64);
        }
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                if !graph.is_edge(i, j) {
                    report.push("clique-edge", &[b, i, j], 0.0);
                }
            }
        }
        for v in (0..graph.order()).filter(|v| !members.contains(v)) {
            if members.iter().all(|&i| graph.is_edge(v, i)) {
                report.push("clique-maximal", &[b, v], 0.0);
            }
        }
    }
    report
}

/// Non-orthogonal ⇒ `relation_holds`; within one group, non-orthogonal ⇔
/// same label.
pub fn check_relation_consistency(
    graph: &OrthogonalityGraph,
    labels: &[RayLabel],
    ps: &PointSet,
    p: &RelationParams,
) -> ValidationReport {
    let n = labels.len();
    let rows: Vec<ValidationReport> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut r = ValidationReport::new();
            for j in i + 1..n {
                let (a, b) = (&labels[i], &labels[j]);
                let non_orth = !graph.is_edge(i, j);
                if non_orth && !relation_holds(ps, p, a, b) {
                    r.push("non-orthogonal-implies-relation", &[i, j], 1.0);
                }
                if a.group == b.group && non_orth != (a.phi == b.phi) {
                    r.push("same-group-biconditional", &[i, j], 1.0);
                }
            }
            r
        })
        .collect();
    let mut report = ValidationReport::new();
    for r in rows {
        report.merge(r);
    }
    report.metric("pairs", (n * n.saturating_sub(1) / 2) as f64);
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeformationWitness {
    pub bijection: Vec<usize>,
    pub verified: bool,
    pub mismatched_pairs: usize,
    pub first_mismatch: Option<(usize, usize)>,
}

/// Compares `a` and `b` under `bijection` (vertex `i` of `a` ↦ `bijection[i]`
/// of `b`).
pub fn compare_graphs(a: &OrthogonalityGraph, b: &OrthogonalityGraph, bijection: &[usize]) -> Result<DeformationWitness> {
    if a.order() != b.order() {
        return Err(Error::RayCountMismatch(a.order(), b.order()));
    }
    check_bijection(bijection, a.order())?;
    let mut mismatched = 0;
    let mut first = None;
    for i in 0..a.order() {
        for j in i + 1..a.order() {
            if a.is_edge(i, j) != b.is_edge(bijection[i], bijection[j]) {
                mismatched += 1;
                first.get_or_insert((i, j));
            }
        }
    }
    Ok(DeformationWitness { bijection: bijection.to_vec(), verified: mismatched == 0, mismatched_pairs: mismatched, first_mismatch: first })
}

fn check_bijection(bijection: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if bijection.len() != n {
        return Err(Error::Malformed(format!("bijection has {} entries for {n} rays", bijection.len())));
    }
    for &v in bijection {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(Error::Malformed("map is not a bijection".into()));
        }
    }
    Ok(())
}

/// Builds both graphs and compares them. Without a bijection the label
/// identity is used, which requires both configurations to share labels.
pub fn verify_deformation(a: &Configuration, b: &Configuration, bijection: Option<&[usize]>) -> Result<DeformationWitness> {
    if a.len() != b.len() {
        return Err(Error::RayCountMismatch(a.len(), b.len()));
    }
    let identity: Vec<usize>;
    let map = match bijection {
        Some(m) => m,
        None => {
            if a.labels() != b.labels() {
                return Err(Error::Malformed("label schemes differ; pass an explicit bijection".into()));
            }
            identity = (0..a.len()).collect();
            &identity
        }
    };
    let ga = orthogonality_graph(a, ORTHOGONALITY_EPS)?;
    let gb = orthogonality_graph(b, ORTHOGONALITY_EPS)?;
    compare_graphs(&ga, &gb, map)
}

/// Backtracking isomorphism search for small graphs. Returns a map from the
/// vertices of `a` onto those of `b`.
pub fn find_isomorphism(a: &OrthogonalityGraph, b: &OrthogonalityGraph) -> Result<Option<Vec<usize>>> {
    let n = a.order();
    if n > ISOMORPHISM_MAX_RAYS || b.order() > ISOMORPHISM_MAX_RAYS {
        return Err(Error::IsomorphismTooLarge(n.max(b.order())));
    }
    if n != b.order() || a.edge_count() != b.edge_count() {
        return Ok(None);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(a.degree(v)));
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn go(
        depth: usize,
        order: &[usize],
        a: &OrthogonalityGraph,
        b: &OrthogonalityGraph,
        map: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        let Some(&v) = order.get(depth) else { return true };
        for w in 0..b.order() {
            if used[w] || a.degree(v) != b.degree(w) {
                continue;
            }
            let consistent = order[..depth].iter().all(|&u| a.is_edge(u, v) == b.is_edge(map[u], w));
            if consistent {
                map[v] = w;
                used[w] = true;
                if go(depth + 1, order, a, b, map, used) {
                    return true;
                }
                used[w] = false;
            }
        }
        map[v] = usize::MAX;
        false
    }
    Ok(go(0, &order, a, b, &mut map, &mut used).then_some(map))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    DimacsClique,
    EdgeList,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "dimacs-clique" | "dimacs" => Ok(Self::DimacsClique),
            "edge-list" => Ok(Self::EdgeList),
            other => Err(Error::Malformed(format!("unknown export format {other:?}"))),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Json => "json",
            Self::DimacsClique => "dimacs-clique",
            Self::EdgeList => "edge-list",
        })
    }
}

/// The JSON export document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub nodes: Vec<String>,
    pub edges: Vec<[usize; 2]>,
    pub bases: Vec<Vec<usize>>,
}

impl GraphDocument {
    pub fn new(graph: &OrthogonalityGraph, config: &Configuration) -> Self {
        let ps = config.point_set();
        Self {
            nodes: config.labels().iter().map(|l| l.render(ps)).collect(),
            edges: graph.edges().into_iter().map(|(i, j)| [i, j]).collect(),
            bases: config.designated_bases().to_vec(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_graph(&self) -> Result<OrthogonalityGraph> {
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        OrthogonalityGraph::from_edges(self.nodes.len(), ORTHOGONALITY_EPS, &edges)
    }
}

/// Byte-deterministic export; LF line endings, no floating point.
pub fn export_graph(graph: &OrthogonalityGraph, config: &Configuration, format: ExportFormat) -> String {
    match format {
        ExportFormat::Json => {
            let mut s = serde_json::to_string(&GraphDocument::new(graph, config)).expect("document serializes");
            s.push('\n');
            s
        }
        ExportFormat::DimacsClique => {
            let edges = graph.edges();
            let mut s = format!("p edge {} {}\n", graph.order(), edges.len());
            for (i, j) in edges {
                s.push_str(&format!("e {} {}\n", i + 1, j + 1));
            }
            s
        }
        ExportFormat::EdgeList => graph.edges().into_iter().map(|(i, j)| format!("{i} {j}\n")).collect(),
    }
}

/// SHA-256 over the rendered labels and the edge list, as lowercase hex.
pub fn configuration_digest(graph: &OrthogonalityGraph, config: &Configuration) -> String {
    let mut h = Sha256::new();
    let ps = config.point_set();
    for l in config.labels() {
        h.update(l.render(ps).as_bytes());
        h.update(b"\n");
    }
    for (i, j) in graph.edges() {
        h.update(format!("{i} {j}\n").as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
