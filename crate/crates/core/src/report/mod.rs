//! Run configuration and the end-to-end pipeline report: net, thickness
//! check, nerve, generators, verification, rank certificate and the final
//! rank-versus-volume inequality.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{
    ball_volume, degree_cap, packing_cap, paper_constant_c, theorem_check, TheoremCheck,
};
use crate::cover::{
    build_nerve, build_net_with, distinct_generators, extract_generators, rank_bound_certificate,
    render_svg, verify_generators, GeneratorCheck, NerveComplex, Net, NetOptions, NetStats,
    RankCertificate,
};
use crate::geometry::{Isometry, Model};
use crate::lattice::{bundled, LatticeError, LatticeSpec};
use crate::lemma_lab::TrialReport;
use crate::morse::{min_nontrivial_displacement, thickness_ceiling, Derived, MorseConfig};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Everything a pipeline run depends on. Missing fields in a config file
/// take the defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Bundled lattice name; ignored when `spec` is set.
    pub lattice: String,
    /// Path to a lattice spec JSON file.
    pub spec: Option<PathBuf>,
    pub epsilon_g: Option<f64>,
    pub m_g: Option<u32>,
    pub nu: Option<u32>,
    pub alpha: Option<f64>,
    pub probes: usize,
    pub seed: u64,
    pub budget: Option<usize>,
    pub verify_radius: f64,
    pub verify_depth: usize,
    pub out: Option<PathBuf>,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lattice: "modular".into(),
            spec: None,
            epsilon_g: None,
            m_g: None,
            nu: None,
            alpha: None,
            probes: NetOptions::default().probes,
            seed: NetOptions::default().seed,
            budget: None,
            verify_radius: 2.0,
            verify_depth: 12,
            out: None,
            svg: false,
        }
    }
}

impl RunConfig {
    pub fn resolve_lattice(&self) -> Result<LatticeSpec, LatticeError> {
        match &self.spec {
            Some(path) => LatticeSpec::from_path(path),
            None => bundled(&self.lattice),
        }
    }

    /// Model defaults with this run's overrides applied.
    pub fn morse_config(&self, model: Model) -> MorseConfig {
        let mut cfg = MorseConfig::defaults(model);
        if let Some(v) = self.epsilon_g {
            cfg.epsilon_g = v;
        }
        if let Some(v) = self.m_g {
            cfg.m_g = v;
        }
        if let Some(v) = self.nu {
            cfg.nu = v;
        }
        if let Some(v) = self.budget {
            cfg.budget = v;
        }
        cfg.alpha_override = self.alpha;
        cfg
    }

    pub fn net_options(&self) -> NetOptions {
        NetOptions {
            probes: self.probes,
            seed: self.seed,
            ..NetOptions::default()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeInfo {
    pub name: String,
    pub model: Model,
    pub generators: Vec<String>,
    pub covolume: Option<f64>,
    pub known_rank: Option<u32>,
}

/// Constants fixed by the configuration alone.
#[derive(Clone, Debug, Serialize)]
pub struct DerivedConstants {
    #[serde(flatten)]
    pub morse: Derived,
    /// `C = v(2.5α) / (2 v(α/2)²)`.
    pub c: Option<f64>,
    pub v_half_alpha: Option<f64>,
    pub v_two_and_half_alpha: Option<f64>,
    pub degree_cap: Option<f64>,
    pub packing_cap: Option<f64>,
    pub edge_cap: Option<f64>,
    /// Height above which the cusp at `∞` is thin.
    pub thickness_ceiling: Option<f64>,
}

impl DerivedConstants {
    pub fn new(l: &LatticeSpec, cfg: &MorseConfig) -> Self {
        let alpha = cfg.alpha();
        let vol = l.known_covolume.as_ref().map(|c| c.value);
        let c = paper_constant_c(l.model, alpha).ok();
        Self {
            morse: cfg.derived(),
            c,
            v_half_alpha: ball_volume(l.model, 0.5 * alpha).ok(),
            v_two_and_half_alpha: ball_volume(l.model, 2.5 * alpha).ok(),
            degree_cap: degree_cap(l.model, alpha).ok(),
            packing_cap: vol.and_then(|v| packing_cap(l.model, alpha, v).ok()),
            edge_cap: vol.zip(c).map(|(v, c)| v * c),
            thickness_ceiling: thickness_ceiling(l, cfg),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NetSummary {
    pub size: usize,
    pub alpha: f64,
    pub ceiling: f64,
    pub coverage_certificate: f64,
    pub stats: NetStats,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThickSummary {
    /// `ε / μ`: every nontrivial element should move each net point this far.
    pub required: f64,
    pub min_displacement: f64,
    pub worst_point: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NerveSummary {
    pub vertices: usize,
    pub edges: usize,
    pub pairs: usize,
    pub max_degree: usize,
    pub components: usize,
    pub tree_edges: usize,
    pub threshold: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorSummary {
    /// One per non-tree edge.
    pub count: usize,
    pub distinct: Vec<Isometry>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Stages {
    pub net: Option<NetSummary>,
    pub thick: Option<ThickSummary>,
    pub nerve: Option<NerveSummary>,
    pub generators: Option<GeneratorSummary>,
    pub verification: Option<GeneratorCheck>,
    pub certificate: Option<RankCertificate>,
    pub theorem: Option<TheoremCheck>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

/// Flag names, in report order.
pub const FLAGS: [&str; 9] = [
    "coverage",
    "thick",
    "nerve_connected",
    "net_size",
    "degree",
    "edge_count",
    "generator_count",
    "generators_verified",
    "theorem",
];

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: RunConfig,
    pub lattice: Option<LatticeInfo>,
    pub derived: Option<DerivedConstants>,
    pub stages: Stages,
    pub flags: BTreeMap<String, bool>,
    pub errors: Vec<StageError>,
    pub pass: bool,
    /// Seconds per stage; the only field that varies between identical runs.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report with timings cleared, for comparing runs.
    pub fn without_timings(&self) -> Report {
        Report {
            timings: BTreeMap::new(),
            ..self.clone()
        }
    }
}

/// Outputs of a pipeline run kept in memory for callers that need more than
/// the report (tests, SVG rendering).
pub struct PipelineRun {
    pub report: Report,
    pub lattice: Option<LatticeSpec>,
    pub morse: Option<MorseConfig>,
    pub net: Option<Net>,
    pub nerve: Option<NerveComplex>,
    pub generators: Vec<Isometry>,
}

impl PipelineRun {
    pub fn svg(&self) -> Option<String> {
        render_svg(
            self.lattice.as_ref()?,
            self.net.as_ref()?,
            self.nerve.as_ref(),
        )
    }
}

struct Recorder {
    flags: BTreeMap<String, bool>,
    errors: Vec<StageError>,
    timings: BTreeMap<String, f64>,
}

impl Recorder {
    fn stage<T, E: std::fmt::Display>(
        &mut self,
        name: &str,
        f: impl FnOnce() -> Result<T, E>,
    ) -> Option<T> {
        let start = Instant::now();
        let out = f();
        self.timings
            .insert(name.to_string(), start.elapsed().as_secs_f64());
        match out {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(StageError {
                    stage: name.to_string(),
                    message: e.to_string(),
                });
                None
            }
        }
    }

    fn flag(&mut self, name: &str, value: bool) {
        debug_assert!(FLAGS.contains(&name));
        self.flags.insert(name.to_string(), value);
    }
}

/// Orbit radius searched for short elements; wide enough that the reported
/// minimum is an actual displacement rather than a bound.
const THICK_SEARCH_RADIUS: f64 = 1.0;

/// Smallest nontrivial displacement over the net points.
fn thick_summary(
    l: &LatticeSpec,
    net: &Net,
    cfg: &MorseConfig,
) -> Result<ThickSummary, crate::morse::MorseError> {
    let required = cfg.epsilon() / cfg.mu() as f64;
    let mut min = f64::INFINITY;
    let mut worst = None;
    for (i, p) in net.points.iter().enumerate() {
        let d = min_nontrivial_displacement(l, p, THICK_SEARCH_RADIUS.max(required), cfg)?;
        if d < min {
            min = d;
            worst = Some(i);
        }
    }
    Ok(ThickSummary {
        required,
        min_displacement: min,
        worst_point: worst,
    })
}

/// Runs every stage, recording the first failure of each and skipping the
/// stages that depend on it. Never panics on bad input.
pub fn run_pipeline(config: &RunConfig) -> PipelineRun {
    let mut rec = Recorder {
        flags: BTreeMap::new(),
        errors: Vec::new(),
        timings: BTreeMap::new(),
    };
    for f in FLAGS {
        rec.flag(f, false);
    }
    let mut stages = Stages::default();
    let mut run = PipelineRun {
        report: Report {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            config: config.clone(),
            lattice: None,
            derived: None,
            stages: Stages::default(),
            flags: BTreeMap::new(),
            errors: Vec::new(),
            pass: false,
            timings: BTreeMap::new(),
        },
        lattice: None,
        morse: None,
        net: None,
        nerve: None,
        generators: Vec::new(),
    };

    let body = |rec: &mut Recorder, stages: &mut Stages, run: &mut PipelineRun| -> Option<()> {
        let l = rec.stage("lattice", || config.resolve_lattice())?;
        let cfg = config.morse_config(l.model);
        run.report.lattice = Some(LatticeInfo {
            name: l.name.clone(),
            model: l.model,
            generators: l.generator_names(),
            covolume: l.known_covolume.as_ref().map(|c| c.value),
            known_rank: l.known_rank,
        });
        rec.stage("config", || cfg.validate())?;
        run.report.derived = Some(DerivedConstants::new(&l, &cfg));

        let net = rec.stage("net", || build_net_with(&l, &cfg, &config.net_options()))?;
        rec.flag("coverage", net.coverage_certificate == 1.0);
        stages.net = Some(NetSummary {
            size: net.points.len(),
            alpha: net.alpha,
            ceiling: net.ceiling,
            coverage_certificate: net.coverage_certificate,
            stats: net.stats.clone(),
        });
        if let Some(t) = rec.stage("thick", || thick_summary(&l, &net, &cfg)) {
            rec.flag("thick", t.min_displacement >= t.required - 1e-9);
            stages.thick = Some(t);
        }

        let nerve = rec.stage("nerve", || build_nerve(&l, &net));
        run.lattice = Some(l.clone());
        run.morse = Some(cfg.clone());
        let Some(nerve) = nerve else {
            run.net = Some(net);
            return None;
        };
        rec.flag("nerve_connected", nerve.components == 1);
        stages.nerve = Some(NerveSummary {
            vertices: nerve.vertices,
            edges: nerve.edges.len(),
            pairs: nerve.pairs,
            max_degree: nerve.max_degree,
            components: nerve.components,
            tree_edges: nerve.tree.len(),
            threshold: nerve.threshold,
        });

        if let Some(cert) = rec.stage("certificate", || {
            rank_bound_certificate(&l, &net, &nerve, &cfg)
        }) {
            rec.flag("net_size", cert.net_ok == Some(true));
            rec.flag("degree", cert.degree_ok);
            rec.flag("edge_count", cert.edges_ok == Some(true));
            rec.flag("generator_count", cert.generator_count_ok);
            stages.certificate = Some(cert);
        }
        if let Some(t) = rec.stage("theorem", || {
            theorem_check(&l, nerve.edges.len() as u64, &cfg)
        }) {
            rec.flag("theorem", t.pass);
            stages.theorem = Some(t);
        }

        let gens = rec.stage("generators", || extract_generators(&nerve));
        run.net = Some(net);
        let gens = gens?;
        let distinct = distinct_generators(&gens);
        stages.generators = Some(GeneratorSummary {
            count: gens.len(),
            distinct: distinct.clone(),
        });
        run.nerve = Some(nerve);
        let budget = cfg.budget;
        let check = if distinct.is_empty() {
            // the trivial group generates the orbit ball only when it is trivial
            rec.stage("verification", || {
                verify_generators(
                    &l,
                    &[Isometry::identity(l.model)],
                    config.verify_radius,
                    config.verify_depth,
                    budget,
                )
            })
        } else {
            rec.stage("verification", || {
                verify_generators(
                    &l,
                    &distinct,
                    config.verify_radius,
                    config.verify_depth,
                    budget,
                )
            })
        };
        run.generators = distinct;
        if let Some(check) = check {
            rec.flag("generators_verified", check.pass);
            stages.verification = Some(check);
        }
        Some(())
    };
    let _ = body(&mut rec, &mut stages, &mut run);

    let pass = rec.errors.is_empty() && rec.flags.values().all(|&v| v);
    run.report.stages = stages;
    run.report.flags = rec.flags;
    run.report.errors = rec.errors;
    run.report.timings = rec.timings;
    run.report.pass = pass;
    run
}

/// Writes `report.json` (and `region.svg` when requested and available)
/// into `dir`, returning the paths written.
pub fn write_outputs(
    run: &PipelineRun,
    dir: &std::path::Path,
    svg: bool,
) -> Result<Vec<PathBuf>, ReportError> {
    let io = |path: &std::path::Path| {
        let path = path.to_path_buf();
        move |source| ReportError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    let json = dir.join("report.json");
    std::fs::write(&json, run.report.to_json() + "\n").map_err(io(&json))?;
    written.push(json);
    if svg {
        if let Some(s) = run.svg() {
            let path = dir.join("region.svg");
            std::fs::write(&path, s).map_err(io(&path))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Lemma-suite summary document.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaSummary {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: crate::lemma_lab::TrialConfig,
    pub checks: Vec<TrialReport>,
    pub pass: bool,
}

impl LemmaSummary {
    pub fn new(config: crate::lemma_lab::TrialConfig, checks: Vec<TrialReport>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            config,
            checks,
            pass,
        }
    }
}
