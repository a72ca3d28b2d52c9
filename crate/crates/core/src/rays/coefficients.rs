use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::indexset::PointSet;
use crate::params::{XTable, YzTables};
use crate::report::ValidationReport;

/// Residual tolerance of the reduced linear system.
pub const REDUCED_SYSTEM_TOL: f64 = 1e-10;
/// Entry tolerance of the block Gram matrices.
pub const UNITARITY_TOL: f64 = 1e-9;

fn parity(bits: u64) -> u32 {
    bits.count_ones() & 1
}

/// Closed form valid for the all-ones parameter set: zero across parity
/// blocks, otherwise `(−1)^{d/2}` with `d` the Hamming distance.
pub fn sign_coefficient(pi_ring: u64, xi_ring: u64) -> i8 {
    let d = (pi_ring ^ xi_ring).count_ones();
    if d % 2 == 1 {
        0
    } else if (d / 2).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// A labelling of the zero set `α` of `ξ`: the distinguished element `α₀` and
/// the pairs `(α₋ₘ, αₘ)` for `m = 1, …, s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Numbering {
    pub alpha0: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl Numbering {
    /// `α` ascending; `α₀` is the smallest, then `(α₋₁, α₁), (α₋₂, α₂), …`.
    pub fn canonical(ps: &PointSet, xi_ring: u64) -> Self {
        let alpha: Vec<usize> = (0..ps.ring_size()).filter(|&k| xi_ring >> k & 1 == 0).collect();
        Self::from_sequence(&alpha)
    }

    /// First element is `α₀`, the rest pair off in order.
    pub fn from_sequence(seq: &[usize]) -> Self {
        Self { alpha0: seq[0], pairs: seq[1..].chunks(2).map(|c| (c[0], c[1])).collect() }
    }

    /// The numbering must cover the zero set of `ξ` exactly once.
    pub fn check(&self, ps: &PointSet, xi_ring: u64) -> Result<()> {
        let mut seen = 0u64;
        for k in std::iter::once(self.alpha0).chain(self.pairs.iter().flat_map(|&(a, b)| [a, b])) {
            if k >= ps.ring_size() || seen >> k & 1 == 1 {
                return Err(Error::Malformed(format!("numbering repeats or overflows at {k}")));
            }
            seen |= 1 << k;
        }
        if seen != !xi_ring & ps.ring_mask() {
            return Err(Error::Malformed("numbering does not cover the zero set of xi".into()));
        }
        Ok(())
    }
}

/// `A(ξ)` for `|ξ| = 0` from the closed product formula, under an explicit
/// numbering of the zero set. `y` is passed as a function so the conjugated
/// tables used for `π ≠ 0` need not be materialized.
pub fn base_coefficient_with<Y>(ps: &PointSet, y: &Y, xi_ring: u64, numbering: &Numbering) -> Complex64
where
    Y: Fn(usize, usize) -> Complex64,
{
    let m = ps.ring_size();
    let one = Complex64::new(1.0, 0.0);
    if xi_ring & ps.ring_mask() == 0 {
        return one;
    }
    let alpha: Vec<usize> = (0..m).filter(|&k| xi_ring >> k & 1 == 0).collect();
    let beta: Vec<usize> = (0..m).filter(|&k| xi_ring >> k & 1 == 1).collect();
    let minus = |i: usize| numbering.pairs[i].0;
    let plus = |i: usize| numbering.pairs[i].1;
    let s = numbering.pairs.len();

    let mut num = one;
    let mut den = one;
    for a in 0..s {
        for b in a + 1..s {
            let (am, ap, bm, bp) = (minus(a), plus(a), minus(b), plus(b));
            num *= sq(y(bp, ap)) * sq(y(bm, ap));
            den *= sq(y(bp, am)) * sq(y(bm, am));
        }
    }
    for a in 0..s {
        let (am, ap) = (minus(a), plus(a));
        for &k in &alpha {
            num *= y(k, am);
            den *= y(k, ap);
        }
        for &k in &beta {
            num *= y(k, ap);
            den *= y(k, am);
        }
        num = -num;
        den *= sq(y(ap, am));
    }
    let mut a0 = -one;
    for k in 0..m {
        a0 *= y(k, numbering.alpha0);
    }
    num / den * a0
}

fn sq(z: Complex64) -> Complex64 {
    z * z
}

/// `A(ξ)` for `|ξ| = 0` under the canonical numbering.
pub fn base_coefficient(ps: &PointSet, yz: &YzTables, xi_ring: u64) -> Complex64 {
    base_coefficient_with(ps, &|k, j| yz.y(k, j), xi_ring, &Numbering::canonical(ps, xi_ring))
}

/// `A_π(ξ)`: zero across parity blocks, otherwise `A(ξ + π)` with
/// `y(k, ·)` conjugated wherever `π(k) = 1`.
pub fn coefficient(ps: &PointSet, yz: &YzTables, pi_ring: u64, xi_ring: u64) -> Complex64 {
    if parity(pi_ring) != parity(xi_ring) {
        return Complex64::new(0.0, 0.0);
    }
    let shifted = (xi_ring ^ pi_ring) & ps.ring_mask();
    let y = |k: usize, j: usize| {
        let v = yz.y(k, j);
        if pi_ring >> k & 1 == 1 {
            v.conj()
        } else {
            v
        }
    };
    base_coefficient_with(ps, &y, shifted, &Numbering::canonical(ps, shifted))
}

/// All coefficients `A_π(ξ)` for ring restrictions `π, ξ ∈ {0,1}^{N−1}`,
/// stored densely at `π · 2^{N−1} + ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    ring_size: usize,
    data: Vec<Complex64>,
}

impl CoefficientTable {
    pub fn from_fn<F>(ps: &PointSet, f: F) -> Self
    where
        F: Fn(u64, u64) -> Complex64 + Sync,
    {
        let m = ps.ring_size();
        let side = 1usize << m;
        let data = (0..side)
            .into_par_iter()
            .flat_map_iter(|pi| {
                let f = &f;
                (0..side).map(move |xi| f(pi as u64, xi as u64))
            })
            .collect();
        Self { ring_size: m, data }
    }

    pub fn sign_table(ps: &PointSet) -> Self {
        Self::from_fn(ps, |pi, xi| Complex64::new(sign_coefficient(pi, xi) as f64, 0.0))
    }

    pub fn general(ps: &PointSet, yz: &YzTables) -> Self {
        Self::from_fn(ps, |pi, xi| coefficient(ps, yz, pi, xi))
    }

    pub fn ring_size(&self) -> usize {
        self.ring_size
    }

    pub fn get(&self, pi_ring: u64, xi_ring: u64) -> Complex64 {
        self.data[((pi_ring as usize) << self.ring_size) | xi_ring as usize]
    }

    /// The coefficient vector of one `F_π`, indexed by `ξ`.
    pub fn row(&self, pi_ring: u64) -> &[Complex64] {
        let side = 1usize << self.ring_size;
        let start = (pi_ring as usize) * side;
        &self.data[start..start + side]
    }
}

/// Checks, for every `l`, `π` and `ξ` with `|ξ| = |π|`,
/// `(Π_{k≠l, ξ_π(k)=0} x'_{l,2k−l}) A_π(ξ) + (−1)^{ξ_π(l)} (Π_{k≠l, ξ_π(k)=1} x'_{l,2k−l}) A_π(ξ^l) = 0`
/// where `ξ_π = ξ + π`, `x'` is `x` conjugated at every `k` with `π(k) = 1`,
/// and `ξ^l` flips every ring coordinate except `l`.
pub fn verify_reduced_system(ps: &PointSet, x: &XTable, table: &CoefficientTable) -> ValidationReport {
    let m = ps.ring_size();
    let side = 1u64 << m;
    let chunks: Vec<ValidationReport> = (0..m)
        .into_par_iter()
        .map(|l| {
            let mut report = ValidationReport::new();
            let mut worst = 0.0f64;
            for pi in 0..side {
                for xi in (0..side).filter(|&xi| parity(xi) == parity(pi)) {
                    let xi_pi = xi ^ pi;
                    let mut p0 = Complex64::new(1.0, 0.0);
                    let mut p1 = Complex64::new(1.0, 0.0);
                    for k in (0..m).filter(|&k| k != l) {
                        let mut v = x.get(l, ps.reflect(k, l));
                        if pi >> k & 1 == 1 {
                            v = v.conj();
                        }
                        if xi_pi >> k & 1 == 0 {
                            p0 *= v;
                        } else {
                            p1 *= v;
                        }
                    }
                    let flipped = xi ^ (ps.ring_mask() & !(1u64 << l));
                    let sign = if xi_pi >> l & 1 == 1 { -1.0 } else { 1.0 };
                    let r = (p0 * table.get(pi, xi) + p1 * table.get(pi, flipped) * sign).norm();
                    worst = worst.max(r);
                    if r > REDUCED_SYSTEM_TOL {
                        report.push("reduced-system", &[l, pi as usize, xi as usize], r);
                    }
                }
            }
            report.metric("reduced-system-max-residual", worst);
            report
        })
        .collect();
    let mut report = ValidationReport::new();
    let mut worst = 0.0f64;
    for mut c in chunks {
        worst = c.metrics.iter().map(|(_, v)| *v).fold(worst, f64::max);
        c.metrics.clear();
        report.merge(c);
    }
    report.metric("reduced-system-max-residual", worst);
    report
}

/// Within each parity block, `Σ_ξ conj(A_π(ξ)) A_π'(ξ) = 2^{N−2} δ_{ππ'}`.
pub fn check_unitarity(ps: &PointSet, table: &CoefficientTable) -> ValidationReport {
    let m = ps.ring_size();
    let side = 1u64 << m;
    let scale = (1u64 << (m - 1)) as f64;
    let deviations: Vec<(u64, u64, f64)> = (0..side)
        .into_par_iter()
        .flat_map_iter(|pi| {
            let row_a = table.row(pi);
            (pi..side).filter(move |&pj| parity(pj) == parity(pi)).map(move |pj| {
                let row_b = table.row(pj);
                let g: Complex64 = row_a.iter().zip(row_b).map(|(a, b)| a.conj() * b).sum();
                let target = if pi == pj { scale } else { 0.0 };
                (pi, pj, (g - target).norm())
            })
        })
        .collect();
    let mut report = ValidationReport::new();
    let mut worst = 0.0f64;
    for (pi, pj, d) in deviations {
        worst = worst.max(d);
        if d > UNITARITY_TOL {
            report.push("unitarity", &[pi as usize, pj as usize], d);
        }
    }
    report.metric("unitarity-max-deviation", worst);
    report
}
