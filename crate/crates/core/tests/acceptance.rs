//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! runs without the test harness so the lines always reach stdout.

use std::time::{Duration, Instant};

use nbrays::colorability::{
    build_gf2_system, gf2_certify, search_bicoloring, Certificate, Gf2System, SearchMode,
};
use nbrays::graph::{
    build_configuration, check_relation_consistency, export_graph, scan, Configuration, DenseCheck, ExportFormat,
    OrthogonalityGraph, ScanOptions, ORTHOGONALITY_EPS,
};
use nbrays::indexset::{PointSet, RelationParams};
use nbrays::params::{
    all_ones_parameters, chord_length, derive_x, derive_yz, random_parameters, validate_parameters, ParameterSet,
    Square,
};
use nbrays::rays::{
    base_coefficient, base_coefficient_with, check_unitarity, coefficient, verify_reduced_system, CoefficientTable,
    Numbering,
};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn canonical() -> RelationParams {
    RelationParams::canonical()
}

fn point_set(n: usize) -> PointSet {
    PointSet::new(n, false).unwrap()
}

fn configuration(ps: &PointSet, params: &ParameterSet) -> Configuration {
    build_configuration(ps, canonical(), params, None).unwrap()
}

fn within(label: &str, elapsed: Duration, limit: Duration) -> std::result::Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("{label} took {elapsed:?}, limit {limit:?}"))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let ps = point_set(4);
    let t = Instant::now();
    let config = configuration(&ps, &all_ones_parameters(&ps));
    let report = config.check_designated_bases().map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    ensure(config.len() == 40, || format!("{} rays", config.len()))?;
    ensure(config.dimension() == 8, || format!("dimension {}", config.dimension()))?;
    let bases = config.designated_bases();
    ensure(bases.len() == 5 && bases.iter().all(|b| b.len() == 8), || "designated bases are not 5 x 8".into())?;
    let worst = report.metrics.iter().find(|(k, _)| k == "basis-max-overlap").map(|m| m.1).unwrap_or(f64::NAN);
    ensure(worst < 1e-10, || format!("basis overlap {worst:e}"))?;
    within("build", elapsed, Duration::from_secs(1))?;
    Ok(format!("40 rays, d=8, 5 bases, max in-basis overlap {worst:.1e}, {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for n in [4, 8] {
        let ps = point_set(n);
        let mut tables = vec![CoefficientTable::sign_table(&ps)];
        for seed in std::iter::once(None).chain((0..20).map(Some)) {
            let params = seed.map_or_else(|| all_ones_parameters(&ps), |s| random_parameters(&ps, 1000 + s));
            let x = derive_x(&ps, &params).map_err(|e| e.to_string())?;
            tables.push(CoefficientTable::general(&ps, &derive_yz(&ps, &params, &x)));
        }
        for table in &tables {
            let report = check_unitarity(&ps, table);
            let dev = report.metrics.iter().find(|(k, _)| k == "unitarity-max-deviation").unwrap().1;
            worst = worst.max(dev);
            ensure(report.passed && dev <= 1e-9, || format!("N={n}: {}", report.summary()))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} tables, Gram = 2^(N-2) I, max deviation {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    for n in [4, 8] {
        let ps = point_set(n);
        let x = derive_x(&ps, &all_ones_parameters(&ps)).map_err(|e| e.to_string())?;
        let t = Instant::now();
        let report = verify_reduced_system(&ps, &x, &CoefficientTable::sign_table(&ps));
        ensure(report.passed, || format!("N={n}: {}", report.summary()))?;
        within(&format!("N={n} check"), t.elapsed(), Duration::from_secs(10))?;
    }
    let ps6 = PointSet::new(6, true).map_err(|e| e.to_string())?;
    let x6 = derive_x(&ps6, &all_ones_parameters(&ps6)).map_err(|e| e.to_string())?;
    let r6 = verify_reduced_system(&ps6, &x6, &CoefficientTable::sign_table(&ps6));
    ensure(!r6.passed, || "N=6 unexpectedly satisfies the reduced system".into())?;
    Ok(format!("N=4, 8 pass; N=6 fails with {} violations", r6.violation_count))
}

fn criterion_4() -> Outcome {
    let ps = point_set(4);
    let mut nodes = 0;
    for seed in std::iter::once(None).chain((0..5).map(Some)) {
        let params = seed.map_or_else(|| all_ones_parameters(&ps), |s| random_parameters(&ps, 2000 + s));
        let config = configuration(&ps, &params);
        let (graph, _) = scan(&config, &ScanOptions { epsilon: ORTHOGONALITY_EPS, dense: DenseCheck::Never })
            .map_err(|e| e.to_string())?;
        let t = Instant::now();
        let cert = search_bicoloring(&graph, config.designated_bases(), SearchMode::Exhaustive, 0)
            .map_err(|e| e.to_string())?;
        within("exhaustive search", t.elapsed(), Duration::from_secs(5))?;
        ensure(matches!(cert, Certificate::ExhaustedNoColoring { .. }), || format!("seed {seed:?}: {}", cert.kind()))?;
        nodes = cert.stats().nodes_visited;
        ensure(nodes == 32768, || format!("visited {nodes} assignments"))?;
    }
    Ok(format!("all-ones and 5 seeds: 0 colorings among {nodes} assignments each"))
}

/// XORs the rows named by `trace` and returns the combined coefficients and constant.
fn substitute_trace(sys: &Gf2System, trace: &[usize]) -> (Vec<u8>, u8) {
    let mut coeffs = vec![0u8; sys.num_vars];
    let mut constant = 0u8;
    for &id in trace {
        let row = sys.rows.iter().find(|r| r.id == id).expect("trace names an existing row");
        for v in row.support() {
            coeffs[v] ^= 1;
        }
        constant ^= row.constant;
    }
    (coeffs, constant)
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    for n in [4, 8, 12] {
        let ps = point_set(n);
        for p0 in [1u8, 0] {
            let p = RelationParams::new(p0, 0, 0, 0);
            let t = Instant::now();
            let sys = build_gf2_system(&ps, &p);
            let cert = gf2_certify(&sys);
            within(&format!("N={n} certificate"), t.elapsed(), Duration::from_secs(1))?;
            match (p0, &cert) {
                (1, Certificate::Gf2Infeasible { trace, .. }) => {
                    let (coeffs, constant) = substitute_trace(&sys, trace);
                    ensure(coeffs.iter().all(|&c| c == 0) && constant == 1, || format!("N={n}: trace does not give 0 = 1"))?;
                    notes.push(format!("N={n} trace of {} rows", trace.len()));
                }
                (0, Certificate::Gf2Feasible { witness, .. }) => {
                    for row in &sys.rows {
                        let lhs = row.support().fold(0u8, |acc, v| acc ^ witness[v]);
                        ensure(lhs == row.constant, || format!("N={n}: witness breaks {}", row.description))?;
                    }
                }
                _ => return Err(format!("N={n}, p0={p0}: got {}", cert.kind())),
            }
        }
    }
    Ok(format!("{}; p0=0 witnesses check", notes.join(", ")))
}

fn criterion_6() -> Outcome {
    let mut parts = Vec::new();
    for (n, dense, limit) in [(4, DenseCheck::Always, 60), (8, DenseCheck::Never, 300)] {
        let ps = point_set(n);
        let config = configuration(&ps, &random_parameters(&ps, 3));
        let t = Instant::now();
        let (graph, stats) =
            scan(&config, &ScanOptions { epsilon: ORTHOGONALITY_EPS, dense }).map_err(|e| e.to_string())?;
        within(&format!("N={n} scan"), t.elapsed(), Duration::from_secs(limit))?;
        ensure(graph.ambiguous_pairs().is_empty(), || format!("N={n}: ambiguous overlaps"))?;
        let report = check_relation_consistency(&graph, config.labels(), &ps, &canonical());
        ensure(report.passed, || format!("N={n}: {}", report.summary()))?;
        parts.push(format!("N={n} {} pairs", stats.pairs));
    }
    Ok(format!("{}; no violations, no ambiguous overlaps", parts.join(", ")))
}

fn graph_of(config: &Configuration) -> Result<OrthogonalityGraph, String> {
    scan(config, &ScanOptions { epsilon: ORTHOGONALITY_EPS, dense: DenseCheck::Never })
        .map(|(g, _)| g)
        .map_err(|e| e.to_string())
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut pairs = 0;
    for n in [4, 8] {
        let ps = point_set(n);
        for round in 0..20 {
            let base = random_parameters(&ps, 3000 + round);
            let mut draw = || -> Vec<Complex64> {
                (0..ps.ring_size()).map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))).collect()
            };
            let a = base.with_lambda(draw()).map_err(|e| e.to_string())?;
            let b = base.with_lambda(draw()).map_err(|e| e.to_string())?;
            let (ca, cb) = (configuration(&ps, &a), configuration(&ps, &b));
            let (ga, gb) = (graph_of(&ca)?, graph_of(&cb)?);
            let same = export_graph(&ga, &ca, ExportFormat::Json) == export_graph(&gb, &cb, ExportFormat::Json);
            ensure(same, || format!("N={n}, round {round}: graphs differ"))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} lambda pairs give byte-identical graphs"))
}

fn criterion_8() -> Outcome {
    let ps = point_set(4);
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let config = configuration(&ps, &random_parameters(&ps, 4000 + seed));
        let (_, stats) = scan(&config, &ScanOptions { epsilon: ORTHOGONALITY_EPS, dense: DenseCheck::Always })
            .map_err(|e| e.to_string())?;
        let dev = stats.max_path_deviation.ok_or("dense path was not run")?;
        worst = worst.max(dev);
        ensure(dev <= 1e-10, || format!("seed {seed}: deviation {dev:e}"))?;
    }
    Ok(format!("5 seeds, 780 pairs each, max deviation {worst:.1e}"))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in [4, 8] {
        let ps = point_set(n);
        let m = ps.ring_size();
        let params = random_parameters(&ps, 5000 + n as u64);
        let x = derive_x(&ps, &params).map_err(|e| e.to_string())?;
        let yz = derive_yz(&ps, &params, &x);
        for xi in 0..1u64 << m {
            if xi.count_ones() % 2 == 1 {
                let a = coefficient(&ps, &yz, 0, xi);
                ensure(a == Complex64::new(0.0, 0.0), || format!("N={n}: odd xi={xi} is nonzero"))?;
                continue;
            }
            let reference = base_coefficient(&ps, &yz, xi);
            let zeros: Vec<usize> = (0..m).filter(|&k| xi >> k & 1 == 0).collect();
            for _ in 0..10 {
                let mut order = zeros.clone();
                order.shuffle(&mut rng);
                let v = base_coefficient_with(&ps, &|k, j| yz.y(k, j), xi, &Numbering::from_sequence(&order));
                worst = worst.max((v - reference).norm());
                cases += 1;
            }
        }
    }
    ensure(worst < 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("{cases} renumberings, max deviation {worst:.1e}"))
}

/// Classes of off-diagonal cells forced equal by symmetry and by
/// `μ(k, k+d) = μ(k, k−d)`.
fn mu_classes(m: usize) -> Vec<usize> {
    fn find(parent: &mut [usize], a: usize) -> usize {
        let mut r = a;
        while parent[r] != r {
            r = parent[r];
        }
        parent[a] = r;
        r
    }
    let mut parent: Vec<usize> = (0..m * m).collect();
    let mut union = |a: usize, b: usize| {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra.max(rb)] = ra.min(rb);
    };
    for i in 0..m {
        for j in 0..m {
            union(i * m + j, j * m + i);
        }
        for d in 1..m {
            union(i * m + (i + d) % m, i * m + (i + m - d) % m);
        }
    }
    (0..m * m).map(|c| find(&mut parent, c)).collect()
}

fn class_count(m: usize) -> usize {
    let classes = mu_classes(m);
    let mut roots: Vec<usize> = (0..m * m).filter(|c| c / m != c % m).map(|c| classes[c]).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

fn with_mu(ps: &PointSet, mu: Square<u8>, rng: &mut ChaCha8Rng) -> ParameterSet {
    let m = ps.ring_size();
    let lambda = (0..m).map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))).collect();
    let mut kappa = Square::filled(m, 1i8);
    for i in 0..m {
        for j in i + 1..m {
            let s = if rng.gen_bool(0.5) { 1 } else { -1 };
            kappa.set(i, j, s);
            kappa.set(j, i, s);
        }
    }
    ParameterSet::new(ps.n_points(), lambda, mu, kappa).unwrap()
}

fn chord_constant(ps: &PointSet, params: &ParameterSet) -> bool {
    let m = ps.ring_size();
    let mut seen = vec![None; m / 2 + 1];
    for i in 0..m {
        for j in (0..m).filter(|&j| j != i) {
            let slot = &mut seen[chord_length(ps, i, j)];
            match *slot {
                None => *slot = Some(params.mu(i, j)),
                Some(v) if v != params.mu(i, j) => return false,
                _ => {}
            }
        }
    }
    true
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut passing = 0;
    let mut random_passing = 0;
    for n in [4, 8] {
        let ps = point_set(n);
        let m = ps.ring_size();
        ensure(class_count(m) == m / 2, || format!("N={n}: {} classes", class_count(m)))?;
        let classes = mu_classes(m);
        for _ in 0..100 {
            let values: Vec<u8> = (0..m * m).map(|_| rng.gen_range(0..4)).collect();
            let mu = Square::from_fn(m, |i, j| if i == j { 0 } else { values[classes[i * m + j]] });
            let params = with_mu(&ps, mu, &mut rng);
            let report = validate_parameters(&ps, &params);
            ensure(report.passed, || format!("N={n}: class-constant mu rejected: {}", report.summary()))?;
            ensure(chord_constant(&ps, &params), || format!("N={n}: passing mu is not chord-constant"))?;
            passing += 1;
        }
        for _ in 0..1000 {
            let mut mu = Square::filled(m, 0u8);
            for i in 0..m {
                for j in i + 1..m {
                    let v = if rng.gen_bool(0.5) { rng.gen_range(0..4) } else { (chord_length(&ps, i, j) % 4) as u8 };
                    mu.set(i, j, v);
                    mu.set(j, i, v);
                }
            }
            let params = with_mu(&ps, mu, &mut rng);
            if validate_parameters(&ps, &params).passed {
                ensure(chord_constant(&ps, &params), || format!("N={n}: validator accepted a non-chord mu"))?;
                random_passing += 1;
            }
        }
    }
    // With a composite ring the same rules leave more classes than chord lengths.
    let composite = class_count(15);
    ensure(composite > 7, || "composite ring did not split".into())?;
    Ok(format!(
        "{passing} generated and {random_passing} random passing mu are chord-constant; ring of 15 has {composite} classes"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 configuration size and bases", criterion_1),
        ("2 coefficient unitarity", criterion_2),
        ("3 reduced system", criterion_3),
        ("4 no bicoloring (search)", criterion_4),
        ("5 no bicoloring (GF(2))", criterion_5),
        ("6 relation consistency", criterion_6),
        ("7 lambda deformation", criterion_7),
        ("8 factored vs dense", criterion_8),
        ("9 numbering independence", criterion_9),
        ("10 chord-constant mu", criterion_10),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let t = Instant::now();
        let outcome = run();
        let elapsed = t.elapsed();
        match &outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{elapsed:.2?}]"),
            Err(detail) => {
                println!("FAIL criterion {name}: {detail} [{elapsed:.2?}]");
                failed.push(name);
            }
        }
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
