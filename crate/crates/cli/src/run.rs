//! Command dispatch: manifest + flags in, report (+ optional CSV table) out.

use std::time::Instant;

use clap::ValueEnum;
use crhull_core::certify::{kallin, psi_field};
use crhull_core::hull::{MAX_ITER, STEP_TOL, GAP_TOL};
use crhull_core::normalform::{DEGENERACY_TOL, OFF_LOCUS_TOL};
use crhull_core::singular::{JACOBIAN_TOL, NEWTON_MAX_ITER, PARABOLIC_BAND, RESIDUAL_TOL};
use crhull_core::{
    certify_flat, certify_radius, classify_at, forward_check, hull_scan, jet_at, kallin_check_m2,
    kallin_check_m3, lipschitz_audit, locate_eta, normal_form_threshold, reduce, sample_manifold,
    solve_branch_f, solve_branch_g, trace_locus, Complex64, DiskGrid, Error, FlatCandidates,
    M3Grid, ManifoldSpec, order_two_in_w,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::manifest::Manifest;
use crate::report::{Report, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Classify,
    Locus,
    Normalform,
    CertifyRadius,
    CertifyFlat,
    Branches,
    KallinM2,
    KallinM3,
    HullProbe,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Locus => "locus",
            Command::Normalform => "normalform",
            Command::CertifyRadius => "certify-radius",
            Command::CertifyFlat => "certify-flat",
            Command::Branches => "branches",
            Command::KallinM2 => "kallin-m2",
            Command::KallinM3 => "kallin-m3",
            Command::HullProbe => "hull-probe",
        }
    }

    pub const ALL: [Command; 9] = [
        Command::Classify,
        Command::Locus,
        Command::Normalform,
        Command::CertifyRadius,
        Command::CertifyFlat,
        Command::Branches,
        Command::KallinM2,
        Command::KallinM3,
        Command::HullProbe,
    ];
}

/// Command-line overrides of the manifest's `run` section.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Flags {
    pub grid: Option<[usize; 2]>,
    pub t_grid: Option<usize>,
    pub degree: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub timing: bool,
}

/// Parses `NRxNA`, e.g. `32x64`.
pub fn parse_grid(text: &str) -> Result<[usize; 2], String> {
    let (a, b) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NRxNA, got {text:?}"))?;
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|e| format!("{s:?}: {e}"));
    Ok([parse(a)?, parse(b)?])
}

/// Rows for `--csv`: a header and numeric records.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    /// Leading `t` columns (`t1`, `t2`, ... when there are several), then `rest`.
    fn with_t(arity: usize, rest: &[&str]) -> Self {
        let t = match arity {
            1 => vec!["t".to_string()],
            _ => (1..=arity).map(|j| format!("t{j}")).collect(),
        };
        Self {
            header: t.into_iter().chain(rest.iter().map(|s| s.to_string())).collect(),
            rows: Vec::new(),
        }
    }

    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub csv: Option<CsvTable>,
}

pub const DEFAULT_T_GRID: usize = 21;
pub const DEFAULT_BRANCH_GRID: [usize; 2] = [32, 64];
pub const DEFAULT_HULL_GRID: [usize; 2] = [8, 16];
pub const DEFAULT_DEGREE: usize = 4;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_PAIRS: usize = 10_000;
pub const DEFAULT_M3_T_COUNT: usize = 9;
pub const DEFAULT_M3_UV_COUNT: usize = 32;
pub const DEFAULT_M3_HALF_WIDTH: f64 = 0.02;

struct Ctx<'a> {
    manifest: &'a Manifest,
    spec: ManifoldSpec,
    flags: &'a Flags,
    report: Report,
    csv: Option<CsvTable>,
}

/// Failure inside a command: either the hypotheses of a certificate do not
/// hold (not certified) or the input cannot be processed (invalid input).
enum Stop {
    Refused(String),
    Invalid(String),
}

impl From<Error> for Stop {
    fn from(e: Error) -> Self {
        match e {
            Error::NonHyperbolic { .. } | Error::NotFlat(_) | Error::NotOrderTwoInW(_) => {
                Stop::Refused(e.to_string())
            }
            _ => Stop::Invalid(e.to_string()),
        }
    }
}

type Step<T> = std::result::Result<T, Stop>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report payload serializes")
}

impl<'a> Ctx<'a> {
    fn param<T: Serialize>(&mut self, key: &str, value: T) {
        self.report.parameters.insert(key.to_string(), to_value(&value));
    }

    fn tol(&mut self, key: &str, value: f64) {
        self.report.tolerances.insert(key.to_string(), value);
    }

    fn grid(&self, default: [usize; 2]) -> [usize; 2] {
        self.flags.grid.or(self.manifest.run.grid).unwrap_or(default)
    }

    fn t_grid(&self, default: usize) -> usize {
        self.flags.t_grid.or(self.manifest.run.t_grid).unwrap_or(default)
    }

    fn seed(&self) -> u64 {
        self.flags.seed.or(self.manifest.run.seed).unwrap_or(0)
    }

    fn residual_tol(&self) -> f64 {
        self.flags.tol.or(self.manifest.run.tol).unwrap_or(DEFAULT_TOL)
    }

    fn slice_t(&mut self) -> Step<Vec<f64>> {
        let t = self
            .manifest
            .run
            .t
            .clone()
            .unwrap_or_else(|| vec![0.0; self.spec.t_arity()]);
        if t.len() != self.spec.t_arity() {
            return Err(Stop::Invalid(format!(
                "run.t has {} entries, expected {}",
                t.len(),
                self.spec.t_arity()
            )));
        }
        self.param("t", &t);
        Ok(t)
    }

    fn newton_tolerances(&mut self) {
        self.tol("newton_residual", RESIDUAL_TOL);
        self.tol("newton_jacobian", JACOBIAN_TOL);
        self.tol("newton_max_iter", NEWTON_MAX_ITER as f64);
        self.tol("parabolic_band", PARABOLIC_BAND);
    }

    fn require_surface(&self, what: &str) -> Step<()> {
        if self.spec.n == 2 {
            Ok(())
        } else {
            Err(Stop::Refused(format!(
                "{what} needs a surface (n = 2), manifest has n = {}",
                self.spec.n
            )))
        }
    }

    /// Product grid with `count` points per axis on `[-T, T]`.
    fn t_product_grid(&mut self, count: usize) -> Step<Vec<Vec<f64>>> {
        if count == 0 {
            return Err(Stop::Invalid("t-grid must have at least one point".into()));
        }
        self.param("t_grid", count);
        let t_max = self.spec.domain.t_max;
        let axis: Vec<f64> = if count == 1 {
            vec![0.0]
        } else {
            (0..count)
                .map(|k| -t_max + 2.0 * t_max * k as f64 / (count - 1) as f64)
                .collect()
        };
        let mut grid: Vec<Vec<f64>> = vec![Vec::new()];
        for _ in 0..self.spec.t_arity() {
            grid = grid
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        Ok(grid)
    }

    /// Radius for surface-branch commands: `run.r` if given, else the
    /// certified radius.
    fn branch_radius(&mut self) -> Step<f64> {
        if let Some(r) = self.manifest.run.r {
            self.param("r_source", "manifest");
            return Ok(r);
        }
        let cert = certify_radius(self.spec.gamma, &self.spec.perturbation, self.spec.domain.r_max)?;
        if !cert.certified {
            return Err(Stop::Refused("no certified radius for this perturbation".into()));
        }
        self.param("r_source", "certified");
        Ok(cert.r)
    }

    fn disk(&mut self, radius: f64, default: [usize; 2]) -> Step<DiskGrid> {
        let [nr, na] = self.grid(default);
        self.param("grid", [nr, na]);
        self.param("r", radius);
        Ok(DiskGrid::new(radius, nr, na)?)
    }

    fn classify(&mut self) -> Step<()> {
        self.newton_tolerances();
        self.tol("degeneracy", DEGENERACY_TOL);
        let t = self.slice_t()?;
        let (sol, class) = classify_at(&self.spec, &t)?;
        self.report.result = json!({ "t": t, "eta": sol, "classification": class });
        Ok(())
    }

    fn locus(&mut self) -> Step<()> {
        self.newton_tolerances();
        let count = self.t_grid(DEFAULT_T_GRID);
        let grid = self.t_product_grid(count)?;
        let locus = trace_locus(&self.spec, &grid);
        let mut table = CsvTable::with_t(self.spec.t_arity(), &["re_eta", "im_eta"]);
        for (t, eta) in locus.t_grid.iter().zip(&locus.eta) {
            let mut row = t.clone();
            row.extend([eta.re, eta.im]);
            table.rows.push(row);
        }
        self.csv = Some(table);
        if !locus.all_converged() {
            self.report.verdict = Verdict::NotCertified;
            self.report
                .diagnostics
                .push("continuation failed at one or more grid points".into());
        }
        self.report.result = json!({
            "points": locus.t_grid.len(),
            "all_converged": locus.all_converged(),
            "max_residual": locus.max_residual,
            "locus": locus,
        });
        Ok(())
    }

    fn normalform(&mut self) -> Step<()> {
        self.newton_tolerances();
        self.tol("degeneracy", DEGENERACY_TOL);
        self.tol("off_locus", OFF_LOCUS_TOL);
        let t = self.slice_t()?;
        let sol = locate_eta(&self.spec, &t, Complex64::new(0.0, 0.0))?;
        let form = reduce(&jet_at(&self.spec, &t, sol.eta)?)?;
        let threshold = normal_form_threshold(form.gamma_t).ok();
        self.report.result = json!({
            "t": t,
            "eta": sol,
            "normal_form": form,
            "threshold": threshold,
        });
        Ok(())
    }

    fn certify_radius(&mut self) -> Step<()> {
        self.require_surface("the radius certificate")?;
        self.param("R", self.spec.domain.r_max);
        self.tol("bisection_rel", crhull_core::certify::radius::RADIUS_REL_TOL);
        let cert = certify_radius(self.spec.gamma, &self.spec.perturbation, self.spec.domain.r_max)?;
        self.report.verdict = if cert.certified {
            Verdict::Certified
        } else {
            Verdict::NotCertified
        };
        self.report.result = to_value(&cert);
        Ok(())
    }

    fn certify_flat(&mut self) -> Step<()> {
        self.newton_tolerances();
        self.tol("degeneracy", DEGENERACY_TOL);
        self.tol("off_locus", OFF_LOCUS_TOL);
        let count = self.t_grid(DEFAULT_T_GRID);
        let grid = self.t_product_grid(count)?;
        if !self.spec.flat {
            let mut reasons = vec!["manifold is not flat"];
            if !order_two_in_w(&self.spec.perturbation) {
                reasons.push("F does not vanish to order two in w");
            }
            return Err(Stop::Refused(format!(
                "no certificate applies: {}",
                reasons.join(", ")
            )));
        }
        let candidates = FlatCandidates::for_spec(&self.spec);
        self.param("candidate_depth", FlatCandidates::DEFAULT_DEPTH);
        let cert = certify_flat(&self.spec, &grid, &candidates)?;
        let mut table = CsvTable::with_t(self.spec.t_arity(), &["gamma_t", "margin"]);
        for s in &cert.per_slice {
            let mut row = s.t.clone();
            row.extend([s.gamma_t.unwrap_or(f64::NAN), s.margin.unwrap_or(f64::NAN)]);
            table.rows.push(row);
        }
        self.csv = Some(table);
        self.report.verdict = if cert.certified {
            Verdict::Certified
        } else {
            Verdict::NotCertified
        };
        self.report.diagnostics.extend(cert.diagnostics.iter().cloned());
        self.report.result = to_value(&cert);
        Ok(())
    }

    fn branches(&mut self) -> Step<()> {
        self.require_surface("the branch solvers")?;
        let gamma = self.spec.gamma;
        let r = self.branch_radius()?;
        let grid = self.disk(r, DEFAULT_BRANCH_GRID)?;
        let tol = self.residual_tol();
        self.tol("residual", tol);
        let pairs = self.manifest.run.pairs.unwrap_or(DEFAULT_PAIRS);
        let seed = self.seed();
        self.param("pairs", pairs);
        self.param("seed", seed);
        let f_poly = &self.spec.perturbation;
        let (mut quad, mut forward) = (0.0f64, 0.0f64);
        for &zeta in &grid.points {
            for b in [
                solve_branch_f(gamma, f_poly, &[], zeta)?,
                solve_branch_g(gamma, f_poly, &[], zeta)?,
            ] {
                quad = quad.max(b.residual);
                forward = forward.max(forward_check(gamma, f_poly, &[], &b)?);
            }
        }
        let audit = lipschitz_audit(gamma, f_poly, r, pairs, seed)?;
        let within = quad <= tol && forward <= tol && audit.violations == 0;
        if !within {
            self.report.verdict = Verdict::NotCertified;
            self.report
                .diagnostics
                .push("branch residual or Lipschitz audit outside tolerance".into());
        }
        self.report.result = json!({
            "radius": r,
            "points": grid.len(),
            "max_quadratic_residual": quad,
            "max_forward_residual": forward,
            "lipschitz": audit,
            "within_tolerance": within,
        });
        Ok(())
    }

    fn kallin_m2(&mut self) -> Step<()> {
        self.require_surface("the surface separation check")?;
        let r = self.branch_radius()?;
        let grid = self.disk(r, DEFAULT_BRANCH_GRID)?;
        self.tol("zero_fiber", kallin::ZERO_FIBER_TOL_M2);
        let rep = kallin_check_m2(self.spec.gamma, &self.spec.perturbation, &grid)?;
        let mut table = CsvTable::new(&["re_zeta", "im_zeta", "re_psi_s1", "re_psi_s2"]);
        for s in psi_field(self.spec.gamma, &self.spec.perturbation, &grid)? {
            table.rows.push(vec![s.zeta.re, s.zeta.im, s.psi_s1.re, s.psi_s2.re]);
        }
        self.csv = Some(table);
        if !rep.holds() {
            self.report.verdict = Verdict::NotCertified;
            self.report.diagnostics.push("separation margins not positive on the grid".into());
        }
        self.report.result = to_value(&rep);
        Ok(())
    }

    fn kallin_m3(&mut self) -> Step<()> {
        if self.spec.n != 3 {
            return Err(Stop::Refused(format!(
                "the three-dimensional separation check needs n = 3, manifest has n = {}",
                self.spec.n
            )));
        }
        let t_count = self.t_grid(DEFAULT_M3_T_COUNT);
        let uv_count = self.manifest.run.uv_count.unwrap_or(DEFAULT_M3_UV_COUNT);
        let half_width = self.manifest.run.half_width.unwrap_or(DEFAULT_M3_HALF_WIDTH);
        self.param("t_grid", t_count);
        self.param("uv_count", uv_count);
        self.param("half_width", half_width);
        self.tol("zero_fiber", kallin::ZERO_FIBER_TOL_M3);
        let grid = M3Grid::uniform(self.spec.domain.t_max, t_count, half_width, uv_count)?;
        let rep = kallin_check_m3(&self.spec, &grid)?;
        if !rep.holds() {
            self.report.verdict = Verdict::NotCertified;
            self.report.diagnostics.push("sign contracts fail on the grid".into());
        }
        self.report.result = to_value(&rep);
        Ok(())
    }

    fn hull_probe(&mut self) -> Step<()> {
        let queries: Vec<Vec<Complex64>> = self
            .manifest
            .run
            .queries
            .as_ref()
            .ok_or_else(|| Stop::Invalid("hull-probe needs run.queries".into()))?
            .iter()
            .map(|q| q.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
            .collect();
        let degree = self.flags.degree.or(self.manifest.run.degree).unwrap_or(DEFAULT_DEGREE);
        self.param("degree", degree);
        let r = self.manifest.run.r.unwrap_or(self.spec.domain.r_max);
        let disk = self.disk(r, DEFAULT_HULL_GRID)?;
        let t_count = self.t_grid(5);
        let t_counts = vec![t_count; self.spec.t_arity()];
        if !t_counts.is_empty() {
            self.param("t_grid", t_count);
        }
        self.tol("step_rel", STEP_TOL);
        self.tol("gap_rel", GAP_TOL);
        self.tol("max_iter", MAX_ITER as f64);
        let cloud = sample_manifold(&self.spec, &t_counts, &disk)?
            .with_source(self.report.manifest_fingerprint.clone());
        let mut table = CsvTable::new(&["query", "ratio"]);
        let mut results = Vec::new();
        for (k, (q, res)) in queries.iter().zip(hull_scan(&cloud, &queries, degree)).enumerate() {
            match res {
                Ok(sep) => {
                    table.rows.push(vec![k as f64, sep.ratio]);
                    results.push(json!({
                        "query": q,
                        "ratio": sep.ratio,
                        "witness": sep.is_witness(&cloud),
                        "separation": sep,
                    }));
                }
                Err(e) => {
                    table.rows.push(vec![k as f64, f64::NAN]);
                    results.push(json!({ "query": q, "error": e.to_string() }));
                }
            }
        }
        self.csv = Some(table);
        self.report.verdict = Verdict::EvidenceOnly;
        self.report.result = json!({
            "cloud_points": cloud.len(),
            "source": cloud.source,
            "density": cloud.density,
            "interpretation": "ratio < 1 shows the query is outside the degree-bounded hull of the sampled points only",
            "results": results,
        });
        Ok(())
    }
}

/// Runs `command` on a validated manifest.
pub fn run(command: Command, manifest: &Manifest, flags: &Flags) -> Outcome {
    let start = Instant::now();
    let mut ctx = Ctx {
        manifest,
        spec: manifest.spec(),
        flags,
        report: Report::new(command.name(), manifest.fingerprint()),
        csv: None,
    };
    let step = match command {
        Command::Classify => ctx.classify(),
        Command::Locus => ctx.locus(),
        Command::Normalform => ctx.normalform(),
        Command::CertifyRadius => ctx.certify_radius(),
        Command::CertifyFlat => ctx.certify_flat(),
        Command::Branches => ctx.branches(),
        Command::KallinM2 => ctx.kallin_m2(),
        Command::KallinM3 => ctx.kallin_m3(),
        Command::HullProbe => ctx.hull_probe(),
    };
    match step {
        Ok(()) => {}
        Err(Stop::Refused(msg)) => {
            ctx.report.verdict = Verdict::NotCertified;
            ctx.report.diagnostics.push(msg);
        }
        Err(Stop::Invalid(msg)) => {
            ctx.report.verdict = Verdict::InvalidInput;
            ctx.report.diagnostics.push(msg);
        }
    }
    if command == Command::HullProbe && ctx.report.verdict != Verdict::InvalidInput {
        ctx.report.verdict = Verdict::EvidenceOnly;
    }
    if flags.timing {
        ctx.report.timing = Some(start.elapsed().as_secs_f64());
    }
    Outcome {
        report: ctx.report,
        csv: ctx.csv,
    }
}

/// Report for a manifest that failed to parse.
pub fn invalid_manifest_report(command: Command, raw: &str, messages: Vec<String>) -> Report {
    let mut report = Report::new(command.name(), crate::manifest::sha256_hex(raw.as_bytes()));
    report.verdict = Verdict::InvalidInput;
    report.diagnostics = messages;
    report
}
