use std::path::Path;

use clap::ValueEnum;
use nbrays::colorability::{
    build_gf2_system, gf2_certify, search_bicoloring, verify_certificate, verify_coloring, Certificate, SearchMode,
};
use nbrays::graph::{
    check_basis_cliques, check_relation_consistency, compare_graphs, configuration_digest, export_graph,
    find_isomorphism, orthogonality_graph, scan, Configuration, ExportFormat, OrthogonalityGraph, ScanOptions,
    ISOMORPHISM_MAX_RAYS, ORTHOGONALITY_EPS,
};
use nbrays::indexset::{PointSet, RelationParams};
use nbrays::params::{all_ones_parameters, derive_x, random_parameters, validate_parameters, ParameterSet};
use nbrays::rays::{check_unitarity, verify_reduced_system, QubitBasisFamily, RaySystem};
use nbrays::Error;
use serde_json::json;

use crate::report::{Failure, RunReport, EXIT_INCONCLUSIVE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Params,
    Unitarity,
    ReducedSystem,
    Relation,
    Bases,
}

impl Check {
    fn name(self) -> &'static str {
        match self {
            Self::Params => "params",
            Self::Unitarity => "unitarity",
            Self::ReducedSystem => "reduced-system",
            Self::Relation => "relation",
            Self::Bases => "bases",
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display())))
}

fn load_params(path: &Path) -> Result<ParameterSet, Failure> {
    ParameterSet::load(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

/// Ray system with the standard or a user-supplied qubit basis. No
/// parameter validation happens here.
fn system(ps: &PointSet, params: &ParameterSet, bases: Option<&Path>) -> Result<RaySystem, Failure> {
    Ok(match bases {
        None => RaySystem::new(ps, RelationParams::canonical(), params)?,
        Some(path) => {
            let x = derive_x(ps, params)?;
            let family = QubitBasisFamily::load(ps, &x, path)?;
            RaySystem::with_bases(ps, RelationParams::canonical(), params, family)?
        }
    })
}

/// Validated configuration; invalid parameters are an input error.
fn configuration(
    report: &mut RunReport,
    params_path: &Path,
    bases: Option<&Path>,
    allow_non_4n: bool,
) -> Result<Configuration, Failure> {
    let params = load_params(params_path)?;
    let ps = PointSet::new(params.n_points(), allow_non_4n)?;
    report.input("params", params_path.display().to_string());
    report.input("N", ps.n_points());
    let validation = validate_parameters(&ps, &params);
    if !validation.passed {
        return Err(Error::InvalidParameters(validation.summary()).into());
    }
    let system = system(&ps, &params, bases)?;
    report.timed("build", || Configuration::from_system(system)).map_err(Failure::from)
}

fn graph(report: &mut RunReport, config: &Configuration) -> Result<OrthogonalityGraph, Failure> {
    let (graph, stats) = report.timed("scan", || scan(config, &ScanOptions::default()))?;
    report.configuration_digest = Some(configuration_digest(&graph, config));
    report.outcome(
        "scan",
        Some(true),
        json!({ "rays": config.len(), "dimension": config.dimension(), "edges": graph.edge_count(), "stats": stats }),
    );
    Ok(graph)
}

pub fn generate(n: usize, seed: Option<u64>, out: &Path, allow_non_4n: bool) -> Result<RunReport, Failure> {
    let mut report = RunReport::new("generate");
    report.input("N", n);
    report.input("seed", seed);
    report.input("out", out.display().to_string());
    let ps = PointSet::new(n, allow_non_4n)?;
    let params = seed.map_or_else(|| all_ones_parameters(&ps), |s| random_parameters(&ps, s));
    report.validation("params", &validate_parameters(&ps, &params));
    write(out, &params.to_json())?;
    Ok(report)
}

pub fn verify(path: &Path, checks: &[Check], bases: Option<&Path>, allow_non_4n: bool) -> Result<RunReport, Failure> {
    let mut report = RunReport::new("verify");
    report.input("params", path.display().to_string());
    report.input("checks", checks.iter().map(|c| c.name()).collect::<Vec<_>>());
    report.input("bases", bases.map(|b| b.display().to_string()));
    let params = load_params(path)?;
    let ps = PointSet::new(params.n_points(), allow_non_4n)?;
    report.input("N", ps.n_points());

    let validation = validate_parameters(&ps, &params);
    if checks.contains(&Check::Params) {
        report.validation("params", &validation);
    }
    let selected = |c: Check| checks.contains(&c);
    let later = [Check::Unitarity, Check::ReducedSystem, Check::Relation, Check::Bases];
    if !validation.passed {
        for c in later.into_iter().filter(|&c| selected(c)) {
            report.outcome(c.name(), None, json!({ "skipped": "parameters failed validation" }));
        }
        report.exit_code = report.exit_code.max(crate::report::EXIT_CHECK_FAILED);
        return Ok(report);
    }

    let system = system(&ps, &params, bases)?;
    if selected(Check::Unitarity) {
        let r = report.timed("unitarity", || check_unitarity(&ps, system.table()));
        report.validation("unitarity", &r);
    }
    if selected(Check::ReducedSystem) {
        let r = report.timed("reduced-system", || verify_reduced_system(&ps, system.x(), system.table()));
        report.validation("reduced-system", &r);
    }
    if selected(Check::Relation) || selected(Check::Bases) {
        let config = report.timed("build", || Configuration::from_system(system))?;
        let graph = graph(&mut report, &config)?;
        if selected(Check::Relation) {
            let r = check_relation_consistency(&graph, config.labels(), &ps, &RelationParams::canonical());
            report.validation("relation", &r);
        }
        if selected(Check::Bases) {
            let mut r = report.timed("bases", || config.check_designated_bases())?;
            r.merge(check_basis_cliques(&graph, config.designated_bases(), config.dimension()));
            report.validation("bases", &r);
        }
    }
    Ok(report)
}

pub fn color(
    path: &Path,
    mode: SearchMode,
    limit: u64,
    out: Option<&Path>,
    bases: Option<&Path>,
    allow_non_4n: bool,
) -> Result<RunReport, Failure> {
    let mut report = RunReport::new("color");
    report.input("mode", mode.to_string());
    report.input("limit", limit);
    let config = configuration(&mut report, path, bases, allow_non_4n)?;
    let graph = graph(&mut report, &config)?;
    let result = report.timed("search", || search_bicoloring(&graph, config.designated_bases(), mode, limit));
    let cert = match result {
        Ok(cert) => cert,
        Err(Error::SearchBudgetExceeded(n)) => {
            report.outcome("search", None, json!({ "inconclusive": format!("budget of {n} nodes exhausted") }));
            report.exit_code = EXIT_INCONCLUSIVE;
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
    };
    if let Certificate::ColoringFound { coloring, .. } = &cert {
        let ok = verify_coloring(&graph, config.designated_bases(), coloring);
        report.outcome("coloring-verified", Some(ok), json!(null));
    }
    if let Some(out) = out {
        write(out, &serde_json::to_string_pretty(&cert).expect("certificate serializes"))?;
    }
    report.outcome("search", Some(true), json!({ "result": cert.kind(), "certificate": cert }));
    Ok(report)
}

fn parse_relation(text: &str) -> Result<RelationParams, Failure> {
    let bits: Vec<u8> = text
        .split(',')
        .map(|t| match t.trim() {
            "0" => Ok(0),
            "1" => Ok(1),
            other => Err(Failure::invalid(format!("relation parameter {other:?} is not 0 or 1"))),
        })
        .collect::<Result<_, _>>()?;
    match bits[..] {
        [a, b, c, d] => Ok(RelationParams::new(a, b, c, d)),
        _ => Err(Failure::invalid(format!("expected four relation parameters, got {}", bits.len()))),
    }
}

pub fn certify(n: usize, p: &str, out: Option<&Path>, allow_non_4n: bool) -> Result<RunReport, Failure> {
    let mut report = RunReport::new("certify");
    report.input("N", n);
    let relation = parse_relation(p)?;
    report.input("p", relation.0);
    let ps = PointSet::new(n, allow_non_4n)?;
    let system = build_gf2_system(&ps, &relation);
    let cert = report.timed("certify", || gf2_certify(&system));
    let checked = verify_certificate(&system, &cert);
    if let Some(out) = out {
        write(out, &serde_json::to_string_pretty(&cert).expect("certificate serializes"))?;
    }
    report.outcome(
        "gf2",
        Some(checked),
        json!({ "result": cert.kind(), "variables": system.num_vars, "rows": system.rows.len(), "certificate": cert }),
    );
    Ok(report)
}

pub fn deform(paths: &[std::path::PathBuf], any: bool, allow_non_4n: bool) -> Result<RunReport, Failure> {
    let mut report = RunReport::new("deform");
    report.input("any", any);
    let [a_path, b_path] = paths else {
        return Err(Failure::invalid(format!("deform takes exactly two --params, got {}", paths.len())));
    };
    report.input("params", [a_path.display().to_string(), b_path.display().to_string()]);
    let (pa, pb) = (load_params(a_path)?, load_params(b_path)?);
    if pa.n_points() != pb.n_points() {
        return Err(Failure::invalid(format!("size mismatch: N = {} vs N = {}", pa.n_points(), pb.n_points())));
    }
    if !any && !pa.same_discrete_part(&pb) {
        return Err(Failure::invalid("mu or kappa differ; pass --any to compare anyway"));
    }
    let build = |p: &ParameterSet| -> Result<(Configuration, OrthogonalityGraph), Failure> {
        let ps = PointSet::new(p.n_points(), allow_non_4n)?;
        let validation = validate_parameters(&ps, p);
        if !validation.passed {
            return Err(Error::InvalidParameters(validation.summary()).into());
        }
        let config = Configuration::from_system(RaySystem::new(&ps, RelationParams::canonical(), p)?)?;
        let graph = orthogonality_graph(&config, ORTHOGONALITY_EPS)?;
        Ok((config, graph))
    };
    let ((ca, ga), (cb, gb)) = report.timed("build", || -> Result<_, Failure> { Ok((build(&pa)?, build(&pb)?)) })?;
    report.input("N", pa.n_points());
    let digest_a = configuration_digest(&ga, &ca);
    let digest_b = configuration_digest(&gb, &cb);
    report.configuration_digest = Some(digest_a.clone());
    let identity: Vec<usize> = (0..ca.len()).collect();
    let witness = compare_graphs(&ga, &gb, &identity)?;
    let mut details = json!({
        "mismatched_pairs": witness.mismatched_pairs,
        "first_mismatch": witness.first_mismatch,
        "digests": [digest_a, digest_b],
    });
    let mut passed = witness.verified;
    if !passed && any && ca.len() <= ISOMORPHISM_MAX_RAYS {
        let iso = report.timed("isomorphism", || find_isomorphism(&ga, &gb))?;
        passed = iso.is_some();
        details["isomorphism"] = json!(iso);
    }
    report.outcome("deformation", Some(passed), details);
    Ok(report)
}

pub fn export(
    path: &Path,
    format: ExportFormat,
    out: &Path,
    dump_rays: Option<&Path>,
    bases: Option<&Path>,
    allow_non_4n: bool,
) -> Result<RunReport, Failure> {
    let mut report = RunReport::new("export");
    report.input("format", format.to_string());
    report.input("out", out.display().to_string());
    let config = configuration(&mut report, path, bases, allow_non_4n)?;
    let graph = graph(&mut report, &config)?;
    write(out, &export_graph(&graph, &config, format))?;
    if let Some(dump) = dump_rays {
        let ps = config.point_set();
        let rays: Vec<_> = config
            .dense_rays()?
            .into_iter()
            .map(|r| {
                let amps: Vec<[f64; 2]> = r.amplitudes.iter().map(|a| [a.re, a.im]).collect();
                json!({ "label": r.label.render(ps), "amplitudes": amps })
            })
            .collect();
        write(dump, &serde_json::to_string(&rays).expect("rays serialize"))?;
        report.input("dump_rays", dump.display().to_string());
    }
    Ok(report)
}
