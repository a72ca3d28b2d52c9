use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::indexset::{Group, Point, PointSet, RayLabel, RelationParams};
use crate::params::{derive_x, derive_yz, ParameterSet, XTable, YzTables};

use super::bases::{dot, qubit_norm, QubitBasisFamily, Qubit};
use super::coefficients::CoefficientTable;

/// Largest `N` for which state vectors in `(C²)^{⊗(N−1)}` are materialized.
pub const DENSE_MAX_POINTS: usize = 8;

/// Everything needed to realize rays for one parameter set: derived tables,
/// the qubit bases and the coefficient table of the `F` rays.
#[derive(Debug, Clone)]
pub struct RaySystem {
    ps: PointSet,
    relation: RelationParams,
    params: ParameterSet,
    x: XTable,
    yz: YzTables,
    bases: QubitBasisFamily,
    table: CoefficientTable,
}

impl RaySystem {
    /// Standard `φ` bases and the general coefficient table.
    pub fn new(ps: &PointSet, relation: RelationParams, params: &ParameterSet) -> Result<Self> {
        let x = derive_x(ps, params)?;
        let bases = QubitBasisFamily::standard(ps, &x)?;
        Self::with_bases(ps, relation, params, bases)
    }

    pub fn with_bases(
        ps: &PointSet,
        relation: RelationParams,
        params: &ParameterSet,
        bases: QubitBasisFamily,
    ) -> Result<Self> {
        if params.n_points() != ps.n_points() {
            return Err(Error::Malformed(format!(
                "parameter set is for N = {}, point set has N = {}",
                params.n_points(),
                ps.n_points()
            )));
        }
        if bases.ring_size() != ps.ring_size() {
            return Err(Error::Malformed("basis family size does not match N".into()));
        }
        let x = derive_x(ps, params)?;
        let yz = derive_yz(ps, params, &x);
        let table = CoefficientTable::general(ps, &yz);
        Ok(Self { ps: *ps, relation, params: params.clone(), x, yz, bases, table })
    }

    /// Replaces the coefficient table, e.g. by the all-ones sign table.
    pub fn with_table(mut self, table: CoefficientTable) -> Self {
        assert_eq!(table.ring_size(), self.ps.ring_size());
        self.table = table;
        self
    }

    pub fn point_set(&self) -> &PointSet {
        &self.ps
    }

    pub fn relation(&self) -> &RelationParams {
        &self.relation
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn x(&self) -> &XTable {
        &self.x
    }

    pub fn yz(&self) -> &YzTables {
        &self.yz
    }

    pub fn bases(&self) -> &QubitBasisFamily {
        &self.bases
    }

    pub fn table(&self) -> &CoefficientTable {
        &self.table
    }

    /// Tensor factors of a product ray, slot `s` at index `s`; `None` for `F`.
    pub fn slots(&self, label: &RayLabel) -> Result<Option<Vec<Qubit>>> {
        let ps = &self.ps;
        RayLabel::new(ps, &self.relation, label.group, label.phi)?;
        let m = ps.ring_size();
        let bit = |k: usize| ((label.phi.0 >> k) & 1) as usize;
        let mut slots: Vec<Option<Qubit>> = vec![None; m];
        let mut place = |slot: usize, q: Qubit| {
            assert!(slots[slot].is_none(), "slot {slot} assigned twice");
            slots[slot] = Some(q);
        };
        match label.group {
            Group::Full => return Ok(None),
            Group::Singleton(p) if ps.is_star(p) => {
                for k in 0..m {
                    place(ps.ring(2 * k as i64), self.bases.phi(k, bit(k)));
                }
            }
            Group::Singleton(Point(l)) => {
                place(ps.ring(2 * l as i64), self.bases.phi(l, bit(ps.star().0)));
                for j in (0..m).filter(|&j| j != l) {
                    place(ps.ring((l + j) as i64), self.bases.psi(ps, l, j, bit(j)));
                }
            }
        }
        Ok(Some(slots.into_iter().map(|s| s.expect("every slot assigned")).collect()))
    }

    /// Unit state vector of a ray; only for `N ≤ 8`.
    pub fn dense(&self, label: &RayLabel) -> Result<DenseRay> {
        if self.ps.n_points() > DENSE_MAX_POINTS {
            return Err(Error::DenseTooLarge(self.ps.n_points()));
        }
        let m = self.ps.ring_size();
        let mut amplitudes = match self.slots(label)? {
            Some(slots) => product_state(&slots),
            None => {
                let pi = label.phi.ring_bits(&self.ps);
                let mut acc = vec![Complex64::new(0.0, 0.0); 1 << m];
                for (xi, &a) in self.table.row(pi).iter().enumerate() {
                    if a == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut slots = vec![[Complex64::new(0.0, 0.0); 2]; m];
                    for k in 0..m {
                        slots[self.ps.ring(2 * k as i64)] = self.bases.phi(k, (xi >> k) & 1);
                    }
                    for (t, v) in acc.iter_mut().zip(product_state(&slots)) {
                        *t += a * v;
                    }
                }
                acc
            }
        };
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(DenseRay { label: *label, amplitudes })
    }

    /// Per-ray data for the factored inner product.
    pub fn factored(&self, label: &RayLabel) -> Result<FactoredRay> {
        let m = self.ps.ring_size();
        Ok(match self.slots(label)? {
            Some(slots) => {
                let norm = slots.iter().map(qubit_norm).product();
                let coords: Vec<[Complex64; 2]> = (0..m)
                    .map(|k| {
                        let s = &slots[self.ps.ring(2 * k as i64)];
                        [dot(s, &self.bases.phi(k, 0)), dot(s, &self.bases.phi(k, 1))]
                    })
                    .collect();
                let zero = Complex64::new(0.0, 0.0);
                let mut support = Some((0u64, 0u64));
                for (k, c) in coords.iter().enumerate() {
                    support = match (support, c[0] == zero, c[1] == zero) {
                        (None, ..) | (_, true, true) => None,
                        (Some((free, fixed)), false, false) => Some((free | 1 << k, fixed)),
                        (Some((free, fixed)), true, false) => Some((free, fixed | 1 << k)),
                        (Some(s), false, true) => Some(s),
                    };
                }
                FactoredRay::Product { slots, coords, support, norm }
            }
            None => {
                let pi = label.phi.ring_bits(&self.ps);
                let g = self.f_gram_raw(pi, pi);
                FactoredRay::Entangled { pi_ring: pi, norm: g.re.sqrt() }
            }
        })
    }

    /// Unnormalized `⟨F_π, F_π'⟩` for the unnormalized sums over `ξ`.
    fn f_gram_raw(&self, pi: u64, pj: u64) -> Complex64 {
        let a = self.table.row(pi);
        let b = self.table.row(pj);
        if self.bases.is_orthonormal() {
            return a.iter().zip(b).map(|(u, v)| u.conj() * v).sum();
        }
        let mut w = b.to_vec();
        for k in 0..self.ps.ring_size() {
            let g = self.bases.phi_gram(k);
            let step = 1usize << k;
            for idx in (0..w.len()).filter(|i| i & step == 0) {
                let (v0, v1) = (w[idx], w[idx | step]);
                w[idx] = g[0][0] * v0 + g[0][1] * v1;
                w[idx | step] = g[1][0] * v0 + g[1][1] * v1;
            }
        }
        a.iter().zip(&w).map(|(u, v)| u.conj() * v).sum()
    }

    /// Normalized `⟨a, b⟩` without materializing state vectors.
    pub fn overlap(&self, a: &FactoredRay, b: &FactoredRay) -> Complex64 {
        match (a, b) {
            (FactoredRay::Product { slots: sa, norm: na, .. }, FactoredRay::Product { slots: sb, norm: nb, .. }) => {
                let v: Complex64 = sa.iter().zip(sb).map(|(x, y)| dot(x, y)).product();
                v / (na * nb)
            }
            (FactoredRay::Product { coords, support, norm: np, .. }, FactoredRay::Entangled { pi_ring, norm: nf }) => {
                let Some((free, fixed)) = *support else {
                    return Complex64::new(0.0, 0.0);
                };
                let row = self.table.row(*pi_ring);
                let mut sum = Complex64::new(0.0, 0.0);
                // Walk the submasks of `free`; coordinates outside it are pinned.
                let mut sub = 0u64;
                loop {
                    let xi = (sub | fixed) as usize;
                    let mut t = row[xi];
                    if t != Complex64::new(0.0, 0.0) {
                        for (k, ck) in coords.iter().enumerate() {
                            t *= ck[(xi >> k) & 1];
                        }
                        sum += t;
                    }
                    if sub == free {
                        break;
                    }
                    sub = (sub.wrapping_sub(free)) & free;
                }
                sum / (np * nf)
            }
            (FactoredRay::Entangled { .. }, FactoredRay::Product { .. }) => self.overlap(b, a).conj(),
            (FactoredRay::Entangled { pi_ring: pa, norm: na }, FactoredRay::Entangled { pi_ring: pb, norm: nb }) => {
                self.f_gram_raw(*pa, *pb) / (na * nb)
            }
        }
    }

    pub fn inner_product_factored(&self, a: &RayLabel, b: &RayLabel) -> Result<Complex64> {
        Ok(self.overlap(&self.factored(a)?, &self.factored(b)?))
    }

    pub fn inner_product_dense(&self, a: &RayLabel, b: &RayLabel) -> Result<Complex64> {
        Ok(self.dense(a)?.inner(&self.dense(b)?))
    }
}

/// `⊗_s slots[s]`, slot `s` on bit `s` of the index.
pub fn product_state(slots: &[Qubit]) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(1.0, 0.0)];
    for (s, q) in slots.iter().enumerate() {
        let mut next = vec![Complex64::new(0.0, 0.0); v.len() * 2];
        for (idx, a) in v.iter().enumerate() {
            next[idx] = a * q[0];
            next[idx | (1 << s)] = a * q[1];
        }
        v = next;
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseRay {
    pub label: RayLabel,
    pub amplitudes: Vec<Complex64>,
}

impl DenseRay {
    pub fn inner(&self, other: &DenseRay) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FactoredRay {
    /// `coords[k][α] = ⟨slot 2k, φ[k]_α⟩`. `support` is `(free, fixed)`:
    /// bits of `ξ` where both coordinates are nonzero, and the forced value of
    /// the others; `None` if some slot is orthogonal to both `φ[k]_α`.
    Product { slots: Vec<Qubit>, coords: Vec<[Complex64; 2]>, support: Option<(u64, u64)>, norm: f64 },
    Entangled { pi_ring: u64, norm: f64 },
}
