//! Bicolorability: a search over red choices in the designated bases, and a
//! GF(2) parity certificate over the same constraints.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::OrthogonalityGraph;
use crate::indexset::{PointSet, RelationParams};

/// Largest assignment count the exhaustive mode accepts.
pub const EXHAUSTIVE_CAP: u128 = 1_000_000;
/// Default node budget of the backtracking mode.
pub const DEFAULT_NODE_LIMIT: u64 = 1 << 32;

/// One red ray per designated basis, by ray index; all other rays are blue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub red_choice: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_visited: u64,
    pub wall_notes: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Certificate {
    ColoringFound { coloring: Coloring, stats: SearchStats },
    ExhaustedNoColoring { stats: SearchStats },
    /// Row ids whose sum is `0 = 1`.
    Gf2Infeasible { trace: Vec<usize>, stats: SearchStats },
    Gf2Feasible { witness: Vec<u8>, stats: SearchStats },
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::ColoringFound { .. } => "ColoringFound",
            Self::ExhaustedNoColoring { .. } => "ExhaustedNoColoring",
            Self::Gf2Infeasible { .. } => "Gf2Infeasible",
            Self::Gf2Feasible { .. } => "Gf2Feasible",
        }
    }

    pub fn stats(&self) -> &SearchStats {
        match self {
            Self::ColoringFound { stats, .. }
            | Self::ExhaustedNoColoring { stats }
            | Self::Gf2Infeasible { stats, .. }
            | Self::Gf2Feasible { stats, .. } => stats,
        }
    }

    /// `true` when the certificate says no bicoloring exists.
    pub fn is_obstruction(&self) -> bool {
        matches!(self, Self::ExhaustedNoColoring { .. } | Self::Gf2Infeasible { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Backtracking,
}

impl FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Self::Exhaustive),
            "backtracking" => Ok(Self::Backtracking),
            other => Err(Error::Malformed(format!("unknown search mode {other:?}"))),
        }
    }
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exhaustive => "exhaustive",
            Self::Backtracking => "backtracking",
        })
    }
}

/// Red rays pairwise non-orthogonal, one red per basis.
pub fn verify_coloring(graph: &OrthogonalityGraph, bases: &[Vec<usize>], coloring: &Coloring) -> bool {
    let reds = &coloring.red_choice;
    if reds.len() != bases.len() || reds.iter().zip(bases).any(|(r, b)| !b.contains(r)) {
        return false;
    }
    reds.iter().enumerate().all(|(x, &a)| reds[x + 1..].iter().all(|&b| a != b && !graph.is_edge(a, b)))
}

/// Also requires a red ray inside every clique of `extra`.
pub fn verify_coloring_with_cliques(
    graph: &OrthogonalityGraph,
    bases: &[Vec<usize>],
    extra: &[Vec<usize>],
    coloring: &Coloring,
) -> bool {
    verify_coloring(graph, bases, coloring)
        && extra.iter().all(|c| c.iter().any(|r| coloring.red_choice.contains(r)))
}

fn check_bases(graph: &OrthogonalityGraph, bases: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; graph.order()];
    for b in bases {
        if b.is_empty() {
            return Err(Error::Malformed("empty designated basis".into()));
        }
        for &r in b {
            if r >= graph.order() || std::mem::replace(&mut seen[r], true) {
                return Err(Error::Malformed(format!("ray {r} is out of range or in two bases")));
            }
        }
    }
    Ok(())
}

/// Searches one red per basis with red rays pairwise non-adjacent. The
/// graph is the only input; no parity knowledge is used.
pub fn search_bicoloring(
    graph: &OrthogonalityGraph,
    bases: &[Vec<usize>],
    mode: SearchMode,
    limit: u64,
) -> Result<Certificate> {
    check_bases(graph, bases)?;
    match mode {
        SearchMode::Exhaustive => exhaustive(graph, bases),
        SearchMode::Backtracking => Backtracker::new(graph, bases, limit).run(),
    }
}

fn exhaustive(graph: &OrthogonalityGraph, bases: &[Vec<usize>]) -> Result<Certificate> {
    let total: u128 = bases.iter().map(|b| b.len() as u128).product();
    if total > EXHAUSTIVE_CAP {
        return Err(Error::ExhaustiveTooLarge(total));
    }
    let rest: Vec<&Vec<usize>> = bases.iter().skip(1).collect();
    let inner: u64 = rest.iter().map(|b| b.len() as u64).product();
    // Partition on the red of the first basis; each part enumerates the rest
    // in mixed radix and keeps its first solution.
    let found: Vec<Option<Vec<usize>>> = bases[0]
        .par_iter()
        .map(|&first| {
            let mut hit = None;
            let mut reds = vec![first; bases.len()];
            for code in 0..inner {
                let mut c = code;
                for (x, b) in rest.iter().enumerate().rev() {
                    reds[x + 1] = b[(c % b.len() as u64) as usize];
                    c /= b.len() as u64;
                }
                let ok = (0..reds.len()).all(|x| (x + 1..reds.len()).all(|y| !graph.is_edge(reds[x], reds[y])));
                if ok && hit.is_none() {
                    hit = Some(reds.clone());
                }
            }
            hit
        })
        .collect();
    let stats = SearchStats {
        nodes_visited: total as u64,
        wall_notes: format!("exhaustive over {total} assignments"),
    };
    Ok(match found.into_iter().flatten().next() {
        Some(red_choice) => Certificate::ColoringFound { coloring: Coloring { red_choice }, stats },
        None => Certificate::ExhaustedNoColoring { stats },
    })
}

/// Depth-first search with bitset domains and forward checking. The next
/// basis is the one with the fewest live candidates; ties go to the basis
/// with fewer non-orthogonal partners, then to the lower index.
struct Backtracker<'a> {
    bases: &'a [Vec<usize>],
    words: Vec<usize>,
    /// `compat[r][c]`: members of basis `c` not orthogonal to ray `r`.
    compat: Vec<Vec<Vec<u64>>>,
    basis_of: Vec<(usize, usize)>,
    rank: Vec<usize>,
    limit: u64,
    nodes: u64,
}

impl<'a> Backtracker<'a> {
    fn new(graph: &OrthogonalityGraph, bases: &'a [Vec<usize>], limit: u64) -> Self {
        let words: Vec<usize> = bases.iter().map(|b| b.len().div_ceil(64)).collect();
        let mut basis_of = vec![(usize::MAX, 0); graph.order()];
        for (c, b) in bases.iter().enumerate() {
            for (pos, &r) in b.iter().enumerate() {
                basis_of[r] = (c, pos);
            }
        }
        let compat: Vec<Vec<Vec<u64>>> = (0..graph.order())
            .into_par_iter()
            .map(|r| {
                bases
                    .iter()
                    .enumerate()
                    .map(|(c, b)| {
                        let mut bits = vec![0u64; words[c]];
                        for (pos, &s) in b.iter().enumerate() {
                            if s != r && !graph.is_edge(r, s) {
                                bits[pos / 64] |= 1 << (pos % 64);
                            }
                        }
                        bits
                    })
                    .collect()
            })
            .collect();
        let partners: Vec<usize> = (0..bases.len())
            .map(|c| {
                bases[c]
                    .iter()
                    .map(|&r| {
                        (0..bases.len())
                            .filter(|&o| o != c)
                            .map(|o| compat[r][o].iter().map(|w| w.count_ones() as usize).sum::<usize>())
                            .sum::<usize>()
                    })
                    .sum()
            })
            .collect();
        let mut order: Vec<usize> = (0..bases.len()).collect();
        order.sort_by_key(|&c| (partners[c], c));
        let mut rank = vec![0; bases.len()];
        for (i, &c) in order.iter().enumerate() {
            rank[c] = i;
        }
        Self { bases, words, compat, basis_of, rank, limit, nodes: 0 }
    }

    fn run(mut self) -> Result<Certificate> {
        let domains: Vec<Vec<u64>> = self
            .bases
            .iter()
            .enumerate()
            .map(|(c, b)| {
                let mut bits = vec![0u64; self.words[c]];
                for pos in 0..b.len() {
                    bits[pos / 64] |= 1 << (pos % 64);
                }
                bits
            })
            .collect();
        let mut reds = vec![usize::MAX; self.bases.len()];
        let found = self.descend(&domains, &mut reds)?;
        let stats = SearchStats {
            nodes_visited: self.nodes,
            wall_notes: format!("backtracking with forward checking, limit {}", self.limit),
        };
        Ok(if found {
            Certificate::ColoringFound { coloring: Coloring { red_choice: reds }, stats }
        } else {
            Certificate::ExhaustedNoColoring { stats }
        })
    }

    fn descend(&mut self, domains: &[Vec<u64>], reds: &mut [usize]) -> Result<bool> {
        let next = (0..self.bases.len())
            .filter(|&c| reds[c] == usize::MAX)
            .min_by_key(|&c| (count(&domains[c]), self.rank[c]));
        let Some(c) = next else { return Ok(true) };
        for pos in members(&domains[c]) {
            self.nodes += 1;
            if self.nodes > self.limit {
                return Err(Error::SearchBudgetExceeded(self.limit));
            }
            let r = self.bases[c][pos];
            debug_assert_eq!(self.basis_of[r], (c, pos));
            let mut next_domains = domains.to_vec();
            let mut dead = false;
            for o in (0..self.bases.len()).filter(|&o| reds[o] == usize::MAX && o != c) {
                for (w, m) in next_domains[o].iter_mut().zip(&self.compat[r][o]) {
                    *w &= m;
                }
                if count(&next_domains[o]) == 0 {
                    dead = true;
                    break;
                }
            }
            if dead {
                continue;
            }
            reds[c] = r;
            if self.descend(&next_domains, reds)? {
                return Ok(true);
            }
            reds[c] = usize::MAX;
        }
        Ok(false)
    }
}

fn count(bits: &[u64]) -> u32 {
    bits.iter().map(|w| w.count_ones()).sum()
}

fn members(bits: &[u64]) -> impl Iterator<Item = usize> + '_ {
    bits.iter().enumerate().flat_map(|(i, &w)| (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| i * 64 + b))
}

/// An affine equation over GF(2): `Σ coeffs · vars = constant`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gf2Row {
    pub id: usize,
    pub description: String,
    pub coeffs: Vec<u64>,
    pub constant: u8,
}

impl Gf2Row {
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        members(&self.coeffs)
    }
}

/// Parity constraints forced on a bicoloring: `σ_v` is the index of the red
/// ray in `A_v`, `π̂` that of the red ray in `Â`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gf2System {
    pub n_points: usize,
    pub num_vars: usize,
    pub rows: Vec<Gf2Row>,
}

impl Gf2System {
    pub fn sigma_var(&self, v: usize, z: usize) -> usize {
        v * self.n_points + z
    }

    pub fn pi_var(&self, z: usize) -> usize {
        self.n_points * self.n_points + z
    }

    pub fn var_name(&self, idx: usize) -> String {
        let n = self.n_points;
        let point = |p: usize| if p == n - 1 { "*".to_string() } else { p.to_string() };
        if idx < n * n {
            format!("sigma_{}({})", point(idx / n), point(idx % n))
        } else {
            format!("pihat({})", point(idx - n * n))
        }
    }

    fn words(&self) -> usize {
        self.num_vars.div_ceil(64)
    }

    /// XOR of the cited rows, as `(coeffs, constant)`.
    pub fn combine(&self, ids: &[usize]) -> (Vec<u64>, u8) {
        let mut coeffs = vec![0u64; self.words()];
        let mut constant = 0u8;
        for &id in ids {
            let row = &self.rows[id];
            for (a, b) in coeffs.iter_mut().zip(&row.coeffs) {
                *a ^= b;
            }
            constant ^= row.constant;
        }
        (coeffs, constant)
    }

    /// Rows violated by `assignment` (one bit per variable).
    pub fn violated_rows(&self, assignment: &[u8]) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|row| {
                let lhs = row.support().fold(0u8, |acc, v| acc ^ (assignment[v] & 1));
                lhs != row.constant
            })
            .map(|row| row.id)
            .collect()
    }

    /// Every row of the pair and sum families plus the `Σ π̂` row: the
    /// combination whose sum collapses to `0 = p₀` when `4 | N`.
    pub fn obstruction_rows(&self) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| r.description.starts_with("pair") || r.description.starts_with("sum") || r.description.starts_with("pihat"))
            .map(|r| r.id)
            .collect()
    }
}

/// Rows in stable id order: pairs `v < v₁`, then one sum row per `v`, then
/// `σ_v(v) = p₁` per `v`, then `Σ π̂ = p_{N mod 4}`.
pub fn build_gf2_system(ps: &PointSet, p: &RelationParams) -> Gf2System {
    let n = ps.n_points();
    let num_vars = n * n + n;
    let mut sys = Gf2System { n_points: n, num_vars, rows: Vec::new() };
    let words = sys.words();
    let name = |v: usize| if v == n - 1 { "*".to_string() } else { v.to_string() };
    let push = |sys: &mut Gf2System, vars: &[usize], constant: u8, description: String| {
        let mut coeffs = vec![0u64; words];
        for &v in vars {
            coeffs[v / 64] ^= 1 << (v % 64);
        }
        let id = sys.rows.len();
        sys.rows.push(Gf2Row { id, description, coeffs, constant });
    };
    let p2 = p.for_cardinality(2);
    for v in 0..n {
        for w in v + 1..n {
            let vars = [sys.sigma_var(v, w), sys.sigma_var(w, v)];
            push(&mut sys, &vars, p2, format!("pair {},{}", name(v), name(w)));
        }
    }
    let sum_constant = p.for_cardinality(n) ^ p.for_cardinality(n - 1);
    for v in 0..n {
        let mut vars: Vec<usize> = (0..n).filter(|&z| z != v).map(|z| sys.sigma_var(v, z)).collect();
        vars.push(sys.pi_var(v));
        push(&mut sys, &vars, sum_constant, format!("sum {}", name(v)));
    }
    for v in 0..n {
        let vars = [sys.sigma_var(v, v)];
        push(&mut sys, &vars, p.for_cardinality(1), format!("member {}", name(v)));
    }
    let vars: Vec<usize> = (0..n).map(|z| sys.pi_var(z)).collect();
    push(&mut sys, &vars, p.for_cardinality(n), "pihat membership".into());
    sys
}

/// Gaussian elimination keeping, for every reduced row, the set of original
/// rows it is the sum of.
pub fn gf2_certify(system: &Gf2System) -> Certificate {
    let words = system.words();
    let rwords = system.rows.len().div_ceil(64);
    // (coeffs, constant, provenance, pivot)
    let mut pivots: Vec<(Vec<u64>, u8, Vec<u64>, usize)> = Vec::new();
    for (processed, row) in system.rows.iter().enumerate() {
        let mut coeffs = row.coeffs.clone();
        let mut constant = row.constant;
        let mut prov = vec![0u64; rwords];
        prov[row.id / 64] |= 1 << (row.id % 64);
        for (pc, pk, pp, col) in &pivots {
            if coeffs[col / 64] >> (col % 64) & 1 == 1 {
                xor(&mut coeffs, pc);
                xor(&mut prov, pp);
                constant ^= pk;
            }
        }
        let lead = members(&coeffs).next();
        match lead {
            Some(col) => {
                // Keep the basis fully reduced so back substitution is trivial.
                for (pc, pk, pp, _) in pivots.iter_mut() {
                    if pc[col / 64] >> (col % 64) & 1 == 1 {
                        xor(pc, &coeffs);
                        xor(pp, &prov);
                        *pk ^= constant;
                    }
                }
                pivots.push((coeffs, constant, prov, col));
            }
            None if constant == 1 => {
                return Certificate::Gf2Infeasible {
                    trace: members(&prov).collect(),
                    stats: SearchStats {
                        nodes_visited: processed as u64 + 1,
                        wall_notes: format!("inconsistency after {} of {} rows", processed + 1, system.rows.len()),
                    },
                };
            }
            None => {}
        }
    }
    debug_assert!(pivots.iter().all(|(c, ..)| c.len() == words));
    let mut witness = vec![0u8; system.num_vars];
    for (coeffs, constant, _, col) in &pivots {
        debug_assert!(members(coeffs).filter(|&v| v != *col).all(|v| pivots.iter().all(|p| p.3 != v)));
        witness[*col] = *constant;
    }
    Certificate::Gf2Feasible {
        witness,
        stats: SearchStats {
            nodes_visited: system.rows.len() as u64,
            wall_notes: format!("rank {} over {} variables, free variables set to 0", pivots.len(), system.num_vars),
        },
    }
}

fn xor(a: &mut [u64], b: &[u64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x ^= y;
    }
}

/// The cited rows must sum to `0 = 1`.
pub fn verify_trace(system: &Gf2System, trace: &[usize]) -> bool {
    if trace.iter().any(|&id| id >= system.rows.len()) {
        return false;
    }
    let (coeffs, constant) = system.combine(trace);
    coeffs.iter().all(|&w| w == 0) && constant == 1
}

/// Substitution into every row.
pub fn verify_witness(system: &Gf2System, witness: &[u8]) -> bool {
    witness.len() == system.num_vars && system.violated_rows(witness).is_empty()
}

/// Checks either kind of GF(2) certificate against its system.
pub fn verify_certificate(system: &Gf2System, cert: &Certificate) -> bool {
    match cert {
        Certificate::Gf2Infeasible { trace, .. } => verify_trace(system, trace),
        Certificate::Gf2Feasible { witness, .. } => verify_witness(system, witness),
        _ => false,
    }
}
