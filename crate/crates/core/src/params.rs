//! Deformation parameters `(λ, μ, κ)`, the derived tables `x`, `y`, `z`, and
//! the solvability checks that gate ray construction.
//!
//! `μ` is stored as a power of `i` and `κ` as a sign, so every condition on `z`
//! is checked in exact integer arithmetic modulo 4. Only `λ` is floating point.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indexset::PointSet;
use crate::report::ValidationReport;

/// Tolerance on `|λ| = 1` for values already stored in a parameter set.
pub const LAMBDA_TOL: f64 = 1e-12;
/// Inputs farther than this from the unit circle are rejected on load.
pub const LAMBDA_LOAD_TOL: f64 = 1e-9;
/// Tolerance for the floating-point identities on `x` and `y`.
pub const TABLE_TOL: f64 = 1e-12;

/// `i^k` for `k` taken modulo 4, exactly.
pub fn i_pow(k: u8) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Puts a value onto the unit circle. Values whose squared modulus already
/// rounds to one are returned untouched so repeated load/save cycles are
/// stable; values farther than [`LAMBDA_LOAD_TOL`] are rejected.
pub fn unit_normalize(z: Complex64) -> Result<Complex64> {
    let n2 = z.norm_sqr();
    if !n2.is_finite() {
        return Err(Error::NonUnitModulus { re: z.re, im: z.im });
    }
    if (n2 - 1.0).abs() <= 4.0 * f64::EPSILON {
        return Ok(z);
    }
    let n = n2.sqrt();
    if (n - 1.0).abs() > LAMBDA_LOAD_TOL {
        return Err(Error::NonUnitModulus { re: z.re, im: z.im });
    }
    Ok(z / n)
}

/// A square table over `Z/(N-1) × Z/(N-1)`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Square<T> {
    size: usize,
    data: Vec<T>,
}

impl<T: Copy> Square<T> {
    pub fn filled(size: usize, value: T) -> Self {
        Self { size, data: vec![value; size * size] }
    }

    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                data.push(f(i, j));
            }
        }
        Self { size, data }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.size + j] = value;
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.size.max(1)).map(|r| r.to_vec()).collect()
    }
}

/// The knobs of the family: `λ` on the unit circle, `μ` a fourth root of unity
/// (stored as a power of `i`), `κ` a sign.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    n_points: usize,
    lambda: Vec<Complex64>,
    mu: Square<u8>,
    kappa: Square<i8>,
}

impl ParameterSet {
    /// Assembles a parameter set. Entry-level encodings are checked here
    /// (`λ` near the circle, `μ ∈ 0..4`, `κ = ±1`); structural conditions such as
    /// symmetry are left to [`validate_parameters`] so that every violation can
    /// be reported at once.
    pub fn new(n_points: usize, lambda: Vec<Complex64>, mu: Square<u8>, kappa: Square<i8>) -> Result<Self> {
        let m = n_points.checked_sub(1).ok_or_else(|| Error::Malformed("N must be positive".into()))?;
        if lambda.len() != m || mu.size() != m || kappa.size() != m {
            return Err(Error::Malformed(format!(
                "expected lambda of length {m} and {m}x{m} mu/kappa tables"
            )));
        }
        let lambda = lambda.into_iter().map(unit_normalize).collect::<Result<Vec<_>>>()?;
        if let Some(bad) = mu.data.iter().find(|&&v| v > 3) {
            return Err(Error::Malformed(format!("mu entry {bad} is not a power of i in 0..=3")));
        }
        if let Some(bad) = kappa.data.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::Malformed(format!("kappa entry {bad} is not ±1")));
        }
        Ok(Self { n_points, lambda, mu, kappa })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn lambda(&self, k: usize) -> Complex64 {
        self.lambda[k]
    }

    pub fn lambdas(&self) -> &[Complex64] {
        &self.lambda
    }

    /// `μ(i, j)` as a power of `i`.
    pub fn mu(&self, i: usize, j: usize) -> u8 {
        self.mu.get(i, j)
    }

    pub fn kappa(&self, i: usize, j: usize) -> i8 {
        self.kappa.get(i, j)
    }

    /// `κ(i, j)` as a power of `i` (0 or 2).
    pub fn kappa_pow(&self, i: usize, j: usize) -> u8 {
        if self.kappa.get(i, j) < 0 {
            2
        } else {
            0
        }
    }

    pub fn mu_table(&self) -> &Square<u8> {
        &self.mu
    }

    pub fn kappa_table(&self) -> &Square<i8> {
        &self.kappa
    }

    /// Same `μ`, `κ` with a different `λ`.
    pub fn with_lambda(&self, lambda: Vec<Complex64>) -> Result<Self> {
        Self::new(self.n_points, lambda, self.mu.clone(), self.kappa.clone())
    }

    /// Whether `μ` and `κ` agree with another set (the discrete part of `x`).
    pub fn same_discrete_part(&self, other: &ParameterSet) -> bool {
        self.n_points == other.n_points && self.mu == other.mu && self.kappa == other.kappa
    }

    /// `z(k, j) = κ(2k − j, j) μ(k, j)` as a power of `i`; `z(k, k) = 1`.
    pub fn z_pow(&self, ps: &PointSet, k: usize, j: usize) -> u8 {
        if k == j {
            return 0;
        }
        (self.kappa_pow(ps.reflect(k, j), j) + self.mu(k, j)) % 4
    }

    pub fn to_file(&self) -> ParameterFile {
        ParameterFile {
            n: self.n_points,
            lambda: self.lambda.iter().map(|z| [z.re, z.im]).collect(),
            mu: self.mu.rows().into_iter().map(|r| r.into_iter().map(i64::from).collect()).collect(),
            kappa: self.kappa.rows().into_iter().map(|r| r.into_iter().map(i64::from).collect()).collect(),
        }
    }

    pub fn from_file(file: &ParameterFile) -> Result<Self> {
        let m = file.n.checked_sub(1).ok_or_else(|| Error::Malformed("N must be positive".into()))?;
        let square = |name: &str, rows: &[Vec<i64>]| -> Result<Vec<i64>> {
            if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                return Err(Error::Malformed(format!("{name} must be a {m}x{m} table")));
            }
            Ok(rows.iter().flatten().copied().collect())
        };
        let mu = square("mu", &file.mu)?
            .into_iter()
            .map(|v| u8::try_from(v).ok().filter(|v| *v < 4).ok_or_else(|| Error::Malformed(format!("mu entry {v} not in 0..=3"))))
            .collect::<Result<Vec<_>>>()?;
        let kappa = square("kappa", &file.kappa)?
            .into_iter()
            .map(|v| match v {
                1 => Ok(1i8),
                -1 => Ok(-1i8),
                _ => Err(Error::Malformed(format!("kappa entry {v} is not ±1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let lambda = file.lambda.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        Self::new(file.n, lambda, Square { size: m, data: mu }, Square { size: m, data: kappa })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("parameter file serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// On-disk layout of a parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub lambda: Vec<[f64; 2]>,
    pub mu: Vec<Vec<i64>>,
    pub kappa: Vec<Vec<i64>>,
}

/// `λ ≡ 1, μ ≡ 1, κ ≡ 1`.
pub fn all_ones_parameters(ps: &PointSet) -> ParameterSet {
    let m = ps.ring_size();
    ParameterSet::new(
        ps.n_points(),
        vec![Complex64::new(1.0, 0.0); m],
        Square::filled(m, 0),
        Square::filled(m, 1),
    )
    .expect("all-ones parameters are well formed")
}

/// Circular distance between two ring elements.
pub fn chord_length(ps: &PointSet, i: usize, j: usize) -> usize {
    let m = ps.ring_size();
    let d = (i + m - j) % m;
    d.min(m - d)
}

/// Seeded random parameters: `λ` uniform on the circle, one `μ` per chord
/// length, and an arbitrary symmetric `κ`. Always passes validation.
pub fn random_parameters(ps: &PointSet, seed: u64) -> ParameterSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = ps.ring_size();
    let lambda = (0..m)
        .map(|_| {
            let theta: f64 = rng.gen_range(0.0..2.0 * PI);
            unit_normalize(Complex64::from_polar(1.0, theta)).expect("polar form is on the circle")
        })
        .collect();
    let class_values: Vec<u8> = (0..=m / 2).map(|_| rng.gen_range(0..4u8)).collect();
    let mu = Square::from_fn(m, |i, j| if i == j { 0 } else { class_values[chord_length(ps, i, j)] });
    let mut kappa = Square::filled(m, 1i8);
    for i in 0..m {
        for j in i + 1..m {
            let s = if rng.gen_bool(0.5) { 1 } else { -1 };
            kappa.set(i, j, s);
            kappa.set(j, i, s);
        }
    }
    ParameterSet::new(ps.n_points(), lambda, mu, kappa).expect("random parameters are well formed")
}

/// `x_{i,j}` for `i ≠ j`; the diagonal holds the formal value 1.
#[derive(Debug, Clone, PartialEq)]
pub struct XTable(pub Square<Complex64>);

impl XTable {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0.get(i, j)
    }
}

/// `x_{i,j} = κ(i,j) λ((i+j)/2) μ((i+j)/2, j)`, checked for `x_{i,j} = x_{j,i}`.
pub fn derive_x(ps: &PointSet, params: &ParameterSet) -> Result<XTable> {
    let m = ps.ring_size();
    let table = Square::from_fn(m, |i, j| {
        if i == j {
            return Complex64::new(1.0, 0.0);
        }
        let k = ps.half(i + j);
        params.lambda(k) * i_pow(params.kappa_pow(i, j) + params.mu(k, j))
    });
    for i in 0..m {
        for j in i + 1..m {
            let deviation = (table.get(i, j) - table.get(j, i)).norm();
            if deviation > TABLE_TOL {
                return Err(Error::SymmetryViolation { i, j, deviation });
            }
        }
    }
    Ok(XTable(table))
}

/// `y(k, j) = x_{j, 2k−j}` and `z(k, j)` (power of `i`), both 1 on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct YzTables {
    pub y: Square<Complex64>,
    pub z: Square<u8>,
}

impl YzTables {
    pub fn y(&self, k: usize, j: usize) -> Complex64 {
        self.y.get(k, j)
    }

    pub fn z(&self, k: usize, j: usize) -> u8 {
        self.z.get(k, j)
    }

    /// `max |y(k,j) − λ(k) z(k,j)|` over `k ≠ j`.
    pub fn factorization_residual(&self, params: &ParameterSet) -> f64 {
        let m = self.y.size();
        let mut worst = 0.0f64;
        for k in 0..m {
            for j in 0..m {
                if k != j {
                    let r = (self.y(k, j) - params.lambda(k) * i_pow(self.z(k, j))).norm();
                    worst = worst.max(r);
                }
            }
        }
        worst
    }
}

pub fn derive_yz(ps: &PointSet, params: &ParameterSet, x: &XTable) -> YzTables {
    let m = ps.ring_size();
    let y = Square::from_fn(m, |k, j| if k == j { Complex64::new(1.0, 0.0) } else { x.get(j, ps.reflect(k, j)) });
    let z = Square::from_fn(m, |k, j| params.z_pow(ps, k, j));
    YzTables { y, z }
}

/// Every solvability condition, in a fixed order. Never fails early: all
/// violations are collected.
pub fn validate_parameters(ps: &PointSet, params: &ParameterSet) -> ValidationReport {
    let mut report = ValidationReport::new();
    let m = ps.ring_size();
    if params.n_points() != ps.n_points() {
        report.push("point-count", &[params.n_points(), ps.n_points()], params.n_points() as f64);
        return report;
    }

    let mut worst_lambda = 0.0f64;
    for k in 0..m {
        let dev = (params.lambda(k).norm() - 1.0).abs();
        worst_lambda = worst_lambda.max(dev);
        if dev > LAMBDA_TOL {
            report.push("lambda-unit", &[k], dev);
        }
    }
    report.metric("lambda-unit", worst_lambda);

    for i in 0..m {
        for j in 0..m {
            if params.mu(i, j) > 3 {
                report.push("mu-fourth-root", &[i, j], params.mu(i, j) as f64);
            }
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            if params.mu(i, j) != params.mu(j, i) {
                report.push("mu-symmetry", &[i, j], quarter_turns(params.mu(i, j), params.mu(j, i)));
            }
        }
    }
    for k in 0..m {
        for d in 1..m {
            let plus = (k + d) % m;
            let minus = (k + m - d) % m;
            if params.mu(k, plus) != params.mu(k, minus) {
                report.push("mu-chord", &[k, d], quarter_turns(params.mu(k, plus), params.mu(k, minus)));
            }
        }
    }
    for i in 0..m {
        for j in 0..m {
            let s = params.kappa(i, j);
            if s != 1 && s != -1 {
                report.push("kappa-sign", &[i, j], s as f64);
            } else if j > i && s != params.kappa(j, i) {
                report.push("kappa-symmetry", &[i, j], 2.0);
            }
        }
    }

    let z = |k: usize, j: usize| params.z_pow(ps, k, j);
    let z2 = |k: usize, j: usize| (2 * z(k, j)) % 4;

    // z⁴ = 1 is exact: z is a sum of powers of i reduced mod 4, and the μ and κ
    // encodings were range-checked above.
    for i in 0..m {
        for j in i + 1..m {
            if z2(i, j) != z2(j, i) {
                report.push("z2-symmetry", &[i, j], quarter_turns(z2(i, j), z2(j, i)));
            }
        }
    }

    // Global product over ordered pairs with an odd representative of j − k.
    let (mut forward, mut backward) = (0u32, 0u32);
    for k in 0..m {
        for j in 0..m {
            if k != j && ((j + m - k) % m) % 2 == 1 {
                forward += z(k, j) as u32;
                backward += z(j, k) as u32;
            }
        }
    }
    if forward % 4 != backward % 4 {
        report.push("z-product", &[], quarter_turns((forward % 4) as u8, (backward % 4) as u8));
    }

    for i in 0..m {
        for j in i + 1..m {
            let (mut a, mut b) = (0u32, 0u32);
            for k in (0..m).filter(|&k| k != i && k != j) {
                a += z2(k, i) as u32;
                b += z2(k, j) as u32;
            }
            if a % 4 != b % 4 {
                report.push("z2-row-product", &[i, j], quarter_turns((a % 4) as u8, (b % 4) as u8));
            }
        }
    }

    let zeta = |i: usize, j: usize| if i == j { 0 } else { (z2(i, j) + z2(j, i)) % 4 };
    for p in 0..m {
        for q in 0..m {
            for r in 0..m {
                let total = zeta(p, q) + zeta(q, r) + zeta(r, p);
                if total % 4 != 0 {
                    report.push("zeta-cocycle", &[p, q, r], (total % 4) as f64);
                }
            }
        }
    }

    if report.passed {
        match derive_x(ps, params) {
            Ok(x) => {
                let yz = derive_yz(ps, params, &x);
                let residual = yz.factorization_residual(params);
                report.metric("y-factorization", residual);
                if residual > TABLE_TOL {
                    report.push("y-factorization", &[], residual);
                }
            }
            Err(Error::SymmetryViolation { i, j, deviation }) => report.push("x-symmetry", &[i, j], deviation),
            Err(e) => report.push(&format!("x-derivation: {e}"), &[], f64::NAN),
        }
    }
    report
}

/// Distance between two powers of `i`, in quarter turns (0, 1 or 2).
fn quarter_turns(a: u8, b: u8) -> f64 {
    let d = (a as i32 - b as i32).rem_euclid(4);
    d.min(4 - d) as f64
}
