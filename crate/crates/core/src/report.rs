//! Batch runs behind the `sepfaces` binary and their JSON, CSV and
//! markdown renderings.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

use crate::catalog::{
    boundary_certificate, catalog_row, compose_boundary, delta_simplex, full_boundary_from_pptes, make_named,
    StateName, Verdict,
};
use crate::enumerate::{enumerate_batch, example_pi_polytope};
use crate::error::{Error, Result};
use crate::faces::{
    default_samples, face_dim_hyperplane, real_symmetric_face_dim, subspace_tower, symmetric_face_dim,
    FaceDimReport, HyperplaneSpec,
};
use crate::herm::{eigh, HermOp, TolPolicy};
use crate::multilinear::{sample_product_vector, SystemShape};
use crate::witness::{
    self, analyze_witness, b0_optimality_probe, charpoly_check, cyclic::cyclic_survey, default_b_grid, make_wb,
    non_closedness_demo, seesaw_min, w1_identity_check, BParam, DEFAULT_STARTS, ZERO_SET_STARTS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Md,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Faces,
    Witness,
    Catalog,
    Enumerate,
    Cyclic,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    /// Empty means the command's default list.
    pub shapes: Vec<SystemShape>,
    pub b: Option<BParam>,
    pub grid: bool,
    pub seed: u64,
    pub samples: Option<usize>,
    pub starts: Option<usize>,
    pub trials: Option<usize>,
    pub tol: TolPolicy,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            shapes: Vec::new(),
            b: None,
            grid: false,
            seed: 0,
            samples: None,
            starts: None,
            trials: None,
            tol: TolPolicy::default(),
            format: Format::Json,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.tol.validate()?;
        for (name, v) in [("samples", self.samples), ("starts", self.starts), ("trials", self.trials)] {
            if v == Some(0) {
                return Err(Error::InvalidArgument(format!("--{name} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(title: &str, headers: &[&str]) -> Self {
        Self {
            title: title.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: Command,
    pub config: RunConfig,
    pub passed: bool,
    /// Descriptions of the checks that failed.
    pub failures: Vec<String>,
    pub tables: Vec<Table>,
    pub details: Value,
}

fn mark(ok: bool) -> String {
    if ok { "✓" } else { "✗" }.into()
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

struct Checks(Vec<String>);

impl Checks {
    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.0.push(what.into());
        }
    }
}

fn report(config: &RunConfig, checks: Checks, tables: Vec<Table>, details: Value) -> Report {
    Report {
        command: config.command,
        config: config.clone(),
        passed: checks.0.is_empty(),
        failures: checks.0,
        tables,
        details,
    }
}

pub fn run(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    match config.command {
        Command::Faces => cmd_faces_table(config),
        Command::Witness => cmd_witness(config),
        Command::Catalog => cmd_catalog(config),
        Command::Enumerate => cmd_enumerate(config),
        Command::Cyclic => cmd_cyclic(config),
    }
}

fn shapes_or(config: &RunConfig, default: &[&[usize]]) -> Result<Vec<SystemShape>> {
    if config.shapes.is_empty() {
        default.iter().map(|d| SystemShape::new(d)).collect()
    } else {
        Ok(config.shapes.clone())
    }
}

/// Sampled against closed-form face dimensions for every shape.
pub fn cmd_faces_table(config: &RunConfig) -> Result<Report> {
    let shapes = shapes_or(config, &[&[2, 2], &[2, 3], &[3, 3], &[2, 2, 2]])?;
    let mut checks = Checks(Vec::new());
    let mut rows: Vec<FaceDimReport> = Vec::new();
    let mut towers = Vec::new();
    for shape in &shapes {
        if shape.dim() > 81 {
            return Err(Error::InvalidShape(format!("{shape}: d = {} exceeds 81", shape.dim())));
        }
        let samples = config.samples.unwrap_or_else(|| default_samples(shape));
        let alpha = sample_product_vector(shape, config.seed);
        rows.push(face_dim_hyperplane(&HyperplaneSpec::product(alpha), samples, config.seed, &config.tol)?);
        if shape.parties() == 2 {
            let spec = HyperplaneSpec::schmidt_rank2_canonical(shape)?;
            rows.push(face_dim_hyperplane(&spec, samples, config.seed, &config.tol)?);
        }
        if shape.uniform_local_dim().is_some() {
            rows.push(symmetric_face_dim(shape, config.seed, &config.tol)?);
            rows.push(real_symmetric_face_dim(shape, config.seed, &config.tol)?);
            towers.push(subspace_tower(shape, config.seed, &config.tol)?);
        }
    }

    let mut faces = Table::new(
        "Face dimensions",
        &["shape", "face-kind", "samples", "sampled-dim", "formula-dim", "match"],
    );
    for r in &rows {
        checks.require(r.passed(), format!("{} {}: sampled {} vs {:?}", r.shape, r.kind, r.face_dim, r.formula_dim));
        faces.push(vec![
            r.shape.clone(),
            r.kind.clone(),
            r.samples.to_string(),
            r.face_dim.to_string(),
            r.formula_dim.map_or("-".into(), |f| f.to_string()),
            mark(r.passed()),
        ]);
    }
    let mut subspaces = Table::new("Subspace dimensions", &["shape", "subspace", "measured", "formula", "match"]);
    for t in &towers {
        for (name, c) in [
            ("H", t.h),
            ("H^re", t.h_re),
            ("H_s", t.h_s),
            ("H^Θ", t.h_theta),
            ("H_s^Θ", t.h_s_theta),
            ("H_s^re", t.h_s_re),
        ] {
            checks.require(c.ok(), format!("{} {name}: {} vs {}", t.shape, c.measured, c.formula));
            subspaces.push(vec![
                t.shape.clone(),
                name.into(),
                c.measured.to_string(),
                c.formula.to_string(),
                mark(c.ok()),
            ]);
        }
    }
    let details = json!({ "faces": to_value(&rows), "subspaces": to_value(&towers) });
    Ok(report(config, checks, vec![faces, subspaces], details))
}

fn witness_grid(config: &RunConfig) -> Result<Report> {
    let starts = config.starts.unwrap_or(DEFAULT_STARTS);
    let shape = witness::qutrit_pair();
    let mut checks = Checks(Vec::new());
    let mut table = Table::new(
        "Witness family",
        &["b", "trace", "min-eigenvalue", "seesaw-min", "charpoly-dev", "is-EW"],
    );
    let mut rows = Vec::new();
    for b in default_b_grid() {
        let pt = make_wb(b);
        let eig = eigh(&pt.w)?;
        let ss = seesaw_min(&pt.w, &shape, starts, config.seed)?;
        let dev = charpoly_check(&pt)?;
        let is_ew = witness::ew_verdict(eig.min(), eig.norm(), ss.value);
        let trace = pt.w.trace();
        checks.require(is_ew, format!("b = {b}: not certified as a witness"));
        checks.require(dev <= 1e-9, format!("b = {b}: spectrum off the characteristic roots by {dev:e}"));
        checks.require((trace - 1.0).abs() <= 1e-12, format!("b = {b}: trace {trace}"));
        table.push(vec![
            b.to_string(),
            format!("{trace:.15}"),
            sci(eig.min()),
            sci(ss.value),
            sci(dev),
            mark(is_ew),
        ]);
        rows.push(json!({
            "b": b, "trace": trace, "min_eigenvalue": eig.min(), "seesaw_min": ss.value,
            "charpoly_deviation": dev, "is_ew": is_ew,
        }));
    }
    Ok(report(config, checks, vec![table], json!({ "grid": rows, "starts": starts })))
}

/// Full report for one `W_b`, or the whole grid with `--grid`.
pub fn cmd_witness(config: &RunConfig) -> Result<Report> {
    if config.grid {
        return witness_grid(config);
    }
    let b = config.b.unwrap_or(BParam::Finite(0.5));
    let starts = config.starts.unwrap_or(ZERO_SET_STARTS);
    let shape = witness::qutrit_pair();
    let pt = make_wb(b);
    let analysis = analyze_witness(&pt.w, &shape, starts, config.seed, &config.tol)?;
    let dev = charpoly_check(&pt)?;
    let simplex = delta_simplex(b, &config.tol)?;
    let cert = boundary_certificate(&simplex.barycenter, &pt.w, starts, config.seed, &config.tol)?;
    let clusters = analysis.zero_set.clusters.len();
    let span = analysis.zero_set.span_rank;

    let mut checks = Checks(Vec::new());
    checks.require(analysis.flags.is_ew, "not certified as a witness");
    checks.require(dev <= 1e-9, format!("spectrum off the characteristic roots by {dev:e}"));
    checks.require((pt.w.trace() - 1.0).abs() <= 1e-12, "trace differs from 1");

    let mut extra = serde_json::Map::new();
    let mut summary = Table::new("Witness", &["quantity", "value", "expected", "ok"]);
    let mut row = |name: &str, value: String, expected: String, ok: bool| {
        summary.push(vec![name.into(), value, expected, mark(ok)]);
    };
    row("is-EW", mark(analysis.flags.is_ew), mark(true), analysis.flags.is_ew);
    row("min eigenvalue", sci(analysis.min_eigenvalue), "< 0".into(), analysis.min_eigenvalue < 0.0);
    row(
        "see-saw minimum",
        sci(analysis.min_product_expectation),
        "≥ -1e-8".into(),
        analysis.min_product_expectation >= -1e-8,
    );
    row("charpoly deviation", sci(dev), "≤ 1e-9".into(), dev <= 1e-9);

    let b_one = b.finite() == Some(1.0);
    if b.is_endpoint() {
        let ok = clusters == 7 && span == 7 && simplex.affine_dim == 6;
        checks.require(ok, format!("endpoint zero set: {clusters} clusters, span {span}"));
        row("zero clusters", clusters.to_string(), "7".into(), clusters == 7);
        row("span rank", span.to_string(), "7".into(), span == 7);
        row("spanning", mark(analysis.flags.spanning), mark(false), !analysis.flags.spanning);
        row("Δ affine dim", simplex.affine_dim.to_string(), "6".into(), simplex.affine_dim == 6);
        let probe = b0_optimality_probe()?;
        checks.require(probe.passed, "optimality probe failed");
        row("optimality probe", mark(probe.passed), mark(true), probe.passed);
        extra.insert("optimality_probe".into(), to_value(&probe));
    } else if b_one {
        let diagonal_real = analysis.zero_set.clusters.iter().all(|c| {
            let (x, y) = (c.factor(0), c.factor(1));
            c.is_real(1e-6) && x.dotc(y).norm() > 1.0 - 1e-6
        });
        checks.require(diagonal_real, "a zero cluster is not of the form |x,x⟩ with real x");
        checks.require(!analysis.flags.spanning, "zero set of W₁ spans the whole space");
        row("zero clusters", clusters.to_string(), "-".into(), true);
        row("all clusters |x,x⟩, x real", mark(diagonal_real), mark(true), diagonal_real);
        row("span rank", span.to_string(), "6".into(), span == 6);
        row("spanning", mark(analysis.flags.spanning), mark(false), !analysis.flags.spanning);
        let ident = w1_identity_check(10_000, DEFAULT_STARTS, config.seed)?;
        let demo = non_closedness_demo(8, DEFAULT_STARTS, config.seed, &config.tol)?;
        let ok = ident.product_residual <= 1e-10 && ident.matrix_identity_deviation <= 1e-12;
        checks.require(ok, "W₁ identities off");
        checks.require(demo.passed && demo.w1_minus_p_is_ew, "non-optimality demonstration failed");
        row("W₁ product identity", sci(ident.product_residual), "≤ 1e-10".into(), ident.product_residual <= 1e-10);
        row(
            "W₁ matrix identity",
            sci(ident.matrix_identity_deviation),
            "≤ 1e-12".into(),
            ident.matrix_identity_deviation <= 1e-12,
        );
        row("W₁ − P is EW", mark(demo.w1_minus_p_is_ew), mark(true), demo.w1_minus_p_is_ew);
        extra.insert("w1_identities".into(), to_value(&ident));
        extra.insert("non_closedness".into(), to_value(&demo));
    } else {
        let ok = clusters == 10 && span == 9 && simplex.affine_dim == 9;
        checks.require(ok, format!("zero set: {clusters} clusters, span {span}, Δ dim {}", simplex.affine_dim));
        row("zero clusters", clusters.to_string(), "10".into(), clusters == 10);
        row("span rank", span.to_string(), "9".into(), span == 9);
        row("spanning", mark(analysis.flags.spanning), mark(true), analysis.flags.spanning);
        row("Δ affine dim", simplex.affine_dim.to_string(), "9".into(), simplex.affine_dim == 9);
        let certified = cert.verdict == Verdict::CertifiedBoundary && cert.full;
        checks.require(certified, "barycenter not certified as a full boundary state");
        row("barycenter certified", mark(certified), mark(true), certified);
    }
    let details = json!({
        "b": b,
        "analysis": to_value(&analysis),
        "charpoly_deviation": dev,
        "simplex": { "vertices": simplex.vertices.len(), "span_rank": simplex.span_rank, "affine_dim": simplex.affine_dim },
        "barycenter_certificate": to_value(&cert),
        "extra": Value::Object(extra),
    });
    Ok(report(config, checks, vec![summary], details))
}

/// Named states, the simplex barycenter and states built from it.
pub fn cmd_catalog(config: &RunConfig) -> Result<Report> {
    let pol = &config.tol;
    let mut checks = Checks(Vec::new());
    let mut table = Table::new(
        "Catalog",
        &["state", "shape", "rank", "min Γ rank", "PPT", "full", "separable"],
    );
    let mut rows = Vec::new();
    for name in StateName::ALL {
        let st = make_named(name, &name.default_shape())?;
        let row = catalog_row(&st, pol);
        checks.require(row.ppt.is_ppt && !row.ppt.is_full, format!("{}: PPT {} full {}", row.name, row.ppt.is_ppt, row.ppt.is_full));
        table.push(vec![
            row.name.clone(),
            row.shape.clone(),
            row.rank.to_string(),
            row.min_transposed_rank.to_string(),
            mark(row.ppt.is_ppt),
            mark(row.ppt.is_full),
            row.separable.into(),
        ]);
        rows.push(row);
    }

    let b = config.b.unwrap_or(BParam::Finite(0.5));
    let starts = config.starts.unwrap_or(DEFAULT_STARTS);
    let simplex = delta_simplex(b, pol)?;
    let w = make_wb(b).w;
    let cert = boundary_certificate(&simplex.barycenter, &w, starts, config.seed, pol)?;
    let oracle = |s: &HermOp| s.hs_inner(&w);
    let boundary = full_boundary_from_pptes(&simplex.barycenter, oracle, 1e-12, pol)?;
    let qubits = SystemShape::bipartite(2, 2)?;
    let composed = compose_boundary(&simplex.barycenter, cert.full, &HermOp::identity(&qubits).scale(0.25), pol)?;

    let mut boundary_table = Table::new("Boundary states", &["state", "shape", "tr(Wρ)", "full", "verdict"]);
    let bary_ok = cert.verdict == Verdict::CertifiedBoundary && cert.full;
    let line_ok = boundary.oracle_value.abs() <= 1e-10 && boundary.full;
    checks.require(b.is_endpoint() || bary_ok, "barycenter not certified");
    checks.require(b.is_endpoint() || line_ok, "bisection did not reach a full state on the hyperplane");
    checks.require(b.is_endpoint() || composed.full, "composed state not full");
    boundary_table.push(vec![
        format!("Δ_{b} barycenter"),
        "3x3".into(),
        sci(cert.tr_product),
        mark(cert.full),
        format!("{:?}", cert.verdict),
    ]);
    boundary_table.push(vec![
        format!("bisection t = {:.12}", boundary.t),
        "3x3".into(),
        sci(boundary.oracle_value),
        mark(boundary.full),
        "on hyperplane".into(),
    ]);
    boundary_table.push(vec![
        "barycenter ⊗ I/4".into(),
        composed.op.shape().to_string(),
        "-".into(),
        mark(composed.full),
        format!("{:?}", composed.membership),
    ]);
    let details = json!({
        "states": to_value(&rows),
        "b": b,
        "certificate": to_value(&cert),
        "bisection": { "t": boundary.t, "oracle_value": boundary.oracle_value, "full": boundary.full },
        "composed": { "shape": composed.op.shape(), "rank": composed.rank, "full": composed.full, "membership": composed.membership },
    });
    Ok(report(config, checks, vec![table, boundary_table], details))
}

/// Product-vector counts over random generic subspaces of `2⊗m`.
pub fn cmd_enumerate(config: &RunConfig) -> Result<Report> {
    let shapes = shapes_or(config, &[&[2, 2], &[2, 3], &[2, 4]])?;
    let trials = config.trials.unwrap_or(200);
    let mut checks = Checks(Vec::new());
    let mut table = Table::new(
        "Enumeration",
        &["shape", "trials", "expected", "histogram", "infinite", "max-residual", "ok"],
    );
    let mut pi = Table::new(
        "Polytope of enumerated states",
        &["shape", "vertices", "span-rank", "affine-dim", "dim V", "vector-rank"],
    );
    let mut batches = Vec::new();
    let mut polytopes = Vec::new();
    for shape in &shapes {
        let batch = enumerate_batch(shape, trials, config.seed, &config.tol)?;
        checks.require(batch.passed, format!("{shape}: histogram {:?}", batch.histogram));
        let hist = batch
            .histogram
            .iter()
            .map(|(k, v)| format!("{k}: {v}"))
            .collect::<Vec<_>>()
            .join(", ");
        table.push(vec![
            shape.to_string(),
            trials.to_string(),
            batch.expected.to_string(),
            format!("{{{hist}}}"),
            batch.infinite.to_string(),
            sci(batch.max_residual),
            mark(batch.passed),
        ]);
        let p = example_pi_polytope(shape, config.seed, &config.tol)?;
        checks.require(p.vector_rank == p.lower_bound, format!("{shape}: product vectors do not span V"));
        pi.push(vec![
            shape.to_string(),
            p.vertices.len().to_string(),
            p.span_rank.to_string(),
            p.affine_dim.to_string(),
            p.lower_bound.to_string(),
            p.vector_rank.to_string(),
        ]);
        polytopes.push(json!({
            "shape": shape, "vertices": p.vertices.len(), "span_rank": p.span_rank,
            "affine_dim": p.affine_dim, "dim_v": p.lower_bound, "vector_rank": p.vector_rank,
        }));
        batches.push(batch);
    }
    let details = json!({ "batches": to_value(&batches), "polytopes": polytopes });
    Ok(report(config, checks, vec![table, pi], details))
}

/// Random search for violations of the cyclic inequality.
pub fn cmd_cyclic(config: &RunConfig) -> Result<Report> {
    let trials = config.trials.unwrap_or(100_000);
    let margin_trials = config.samples.unwrap_or(10_000);
    let r = cyclic_survey(trials, margin_trials, config.seed)?;
    let mut checks = Checks(Vec::new());
    checks.require(r.min_gap >= -1e-12, format!("minimum gap {:e}", r.min_gap));
    checks.require(r.equality_max_abs_gap <= 1e-10, format!("equality points off by {:e}", r.equality_max_abs_gap));
    checks.require(r.margin_min > 0.0, format!("threshold margin {:e}", r.margin_min));
    let mut table = Table::new("Cyclic inequality", &["quantity", "value"]);
    for (k, v) in [
        ("trials", r.trials.to_string()),
        ("min gap", sci(r.min_gap)),
        ("equality max abs gap", sci(r.equality_max_abs_gap)),
        ("near-locus small gaps", r.near_locus_hits.to_string()),
        ("off-locus small gaps", r.off_locus_small_gaps.to_string()),
        ("flat-band small gaps", r.flat_band_small_gaps.to_string()),
        ("margin trials", r.margin_trials.to_string()),
        ("min relative margin", sci(r.margin_min)),
    ] {
        table.push(vec![k.into(), v]);
    }
    Ok(report(config, checks, vec![table], to_value(&r)))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::new();
            for t in &report.tables {
                let _ = writeln!(s, "# {}", t.title);
                let _ = writeln!(s, "{}", t.headers.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(","));
                for r in &t.rows {
                    let _ = writeln!(s, "{}", r.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(","));
                }
            }
            s
        }
        Format::Md => {
            let mut s = String::new();
            for t in &report.tables {
                let _ = writeln!(s, "## {}\n", t.title);
                let _ = writeln!(s, "| {} |", t.headers.join(" | "));
                let _ = writeln!(s, "|{}", "---|".repeat(t.headers.len()));
                for r in &t.rows {
                    let _ = writeln!(s, "| {} |", r.join(" | "));
                }
                s.push('\n');
            }
            let _ = writeln!(s, "**{}**", if report.passed { "PASS" } else { "FAIL" });
            for f in &report.failures {
                let _ = writeln!(s, "- {f}");
            }
            s
        }
    }
}
