use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indexset::PointSet;
use crate::params::{Square, XTable};

/// A vector in `C²`.
pub type Qubit = [Complex64; 2];

/// Orthonormality tolerance for basis files.
pub const BASIS_LOAD_TOL: f64 = 1e-9;
/// Tolerance on `|x| = 1` when building a u-matrix.
pub const U_INPUT_TOL: f64 = 1e-9;
/// Unitarity tolerance asserted on every constructed u-matrix.
pub const U_UNITARITY_TOL: f64 = 1e-12;

/// `⟨a, b⟩`, conjugate-linear in `a`.
pub fn dot(a: &Qubit, b: &Qubit) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

pub fn qubit_norm(a: &Qubit) -> f64 {
    (a[0].norm_sqr() + a[1].norm_sqr()).sqrt()
}

/// Overlap matrix between the φ and ψ bases of one edge:
/// `u[α][β] = (ψ_β, φ_α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UMatrix(pub [[Complex64; 2]; 2]);

impl UMatrix {
    pub fn entry(&self, alpha: usize, beta: usize) -> Complex64 {
        self.0[alpha][beta]
    }

    /// `max |u u† − I|` over entries.
    pub fn unitarity_defect(&self) -> f64 {
        let u = &self.0;
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                let v = u[r][0] * u[c][0].conj() + u[r][1] * u[c][1].conj();
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((v - target).norm());
            }
        }
        worst
    }
}

/// `(1/√2) [[1, x], [x*, −1]]` for `|x| = 1`.
pub fn build_u(x: Complex64) -> Result<UMatrix> {
    if !x.norm().is_finite() || (x.norm() - 1.0).abs() > U_INPUT_TOL {
        return Err(Error::NonUnitModulus { re: x.re, im: x.im });
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let u = UMatrix([
        [Complex64::new(s, 0.0), x * s],
        [x.conj() * s, Complex64::new(-s, 0.0)],
    ]);
    debug_assert!(u.unitarity_defect() < U_UNITARITY_TOL);
    if u.unitarity_defect() > U_UNITARITY_TOL {
        return Err(Error::NonUnitModulus { re: x.re, im: x.im });
    }
    Ok(u)
}

/// The φ basis for every star edge `{∗, k}` and, through the u-matrices, the ψ
/// basis for every ring edge `{l, j}`.
#[derive(Debug, Clone)]
pub struct QubitBasisFamily {
    phi: Vec<[Qubit; 2]>,
    u: Square<UMatrix>,
    orthonormal: bool,
}

impl QubitBasisFamily {
    /// Standard basis of `C²` for every `k`.
    pub fn standard(ps: &PointSet, x: &XTable) -> Result<Self> {
        let e = |i: usize| {
            let mut q = [Complex64::new(0.0, 0.0); 2];
            q[i] = Complex64::new(1.0, 0.0);
            q
        };
        Self::new(ps, vec![[e(0), e(1)]; ps.ring_size()], x)
    }

    /// Checks that each `φ[k]` pair is orthonormal within [`BASIS_LOAD_TOL`].
    pub fn new(ps: &PointSet, phi: Vec<[Qubit; 2]>, x: &XTable) -> Result<Self> {
        for (k, pair) in phi.iter().enumerate() {
            let defect = orthonormality_defect(pair);
            if defect > BASIS_LOAD_TOL {
                return Err(Error::Malformed(format!(
                    "phi basis {k} is not orthonormal (defect {defect:e})"
                )));
            }
        }
        let mut family = Self::new_unchecked(ps, phi, x)?;
        family.orthonormal = true;
        Ok(family)
    }

    /// Skips the orthonormality check on `φ`. Configurations built this way
    /// need not have orthonormal designated bases; the inner-product routines
    /// stay exact for them, which is what fault-injection tests rely on.
    pub fn new_unchecked(ps: &PointSet, phi: Vec<[Qubit; 2]>, x: &XTable) -> Result<Self> {
        let m = ps.ring_size();
        if phi.len() != m {
            return Err(Error::Malformed(format!("expected {m} phi bases, got {}", phi.len())));
        }
        let mut u = Square::filled(m, UMatrix([[Complex64::new(0.0, 0.0); 2]; 2]));
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    u.set(i, j, build_u(x.get(i, j))?);
                }
            }
        }
        let orthonormal = phi.iter().all(|p| orthonormality_defect(p) <= BASIS_LOAD_TOL);
        Ok(Self { phi, u, orthonormal })
    }

    pub fn is_orthonormal(&self) -> bool {
        self.orthonormal
    }

    pub fn ring_size(&self) -> usize {
        self.phi.len()
    }

    pub fn phi(&self, k: usize, alpha: usize) -> Qubit {
        self.phi[k][alpha]
    }

    pub fn u(&self, i: usize, j: usize) -> UMatrix {
        debug_assert_ne!(i, j);
        self.u.get(i, j)
    }

    /// `ψ[{l, j}]_β = Σ_α conj(u[l,j]_{αβ}) φ[(l+j)/2]_α`.
    pub fn psi(&self, ps: &PointSet, l: usize, j: usize, beta: usize) -> Qubit {
        let k = ps.half(l + j);
        let u = self.u(l, j);
        let (c0, c1) = (u.entry(0, beta).conj(), u.entry(1, beta).conj());
        let (p0, p1) = (self.phi[k][0], self.phi[k][1]);
        [c0 * p0[0] + c1 * p1[0], c0 * p0[1] + c1 * p1[1]]
    }

    /// Gram matrix `⟨φ[k]_α, φ[k]_β⟩`.
    pub fn phi_gram(&self, k: usize) -> [[Complex64; 2]; 2] {
        let p = &self.phi[k];
        [[dot(&p[0], &p[0]), dot(&p[0], &p[1])], [dot(&p[1], &p[0]), dot(&p[1], &p[1])]]
    }

    pub fn to_file(&self) -> BasisFile {
        BasisFile(
            self.phi
                .iter()
                .map(|pair| pair.map(|v| v.map(|c| [c.re, c.im])))
                .collect(),
        )
    }

    pub fn phi_from_file(file: &BasisFile) -> Vec<[Qubit; 2]> {
        file.0
            .iter()
            .map(|m| m.map(|row| row.map(|[re, im]| Complex64::new(re, im))))
            .collect()
    }

    pub fn load(ps: &PointSet, x: &XTable, path: &Path) -> Result<Self> {
        let file: BasisFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::new(ps, Self::phi_from_file(&file), x)
    }
}

/// `N−1` matrices of shape 2×2; row `α` of matrix `k` is `φ[k]_α`, each entry
/// `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BasisFile(pub Vec<[[[f64; 2]; 2]; 2]>);

fn orthonormality_defect(pair: &[Qubit; 2]) -> f64 {
    let mut worst = 0.0f64;
    for a in 0..2 {
        for b in 0..2 {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot(&pair[a], &pair[b]) - target).norm());
        }
    }
    worst
}
