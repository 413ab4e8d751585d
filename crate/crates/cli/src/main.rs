use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use thicknet::constants::{
    ball_volume, degree_cap, known_covolume, packing_cap, paper_constant_c, theorem_check,
};
use thicknet::cover::{build_nerve, build_net_with};
use thicknet::geometry::{classify_strict, Isometry, Model, Point};
use thicknet::lemma_lab::{self, TrialConfig};
use thicknet::morse::{flow_to_sublevel, settle_to_zero, sigma_set, PsiEvaluator};
use thicknet::report::{run_pipeline, write_outputs, DerivedConstants, LemmaSummary, RunConfig};

#[derive(Parser)]
#[command(
    name = "thicknet",
    version,
    about = "Thick-part nets, nerves and rank certificates for hyperbolic lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a 2×2 matrix given as four entries (`a b c d`, complex as `1+2i`).
    Classify {
        #[arg(num_args = 4, allow_hyphen_values = true, required = true)]
        entries: Vec<String>,
    },
    /// Evaluate ψ, its gradient and the short-element set at a point.
    Psi {
        #[command(flatten)]
        run: RunArgs,
        /// Point coordinates: `x,h` in H², `x1,x2,t` in H³.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<f64>,
    },
    /// Flow a point into the thick part.
    Flow {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<f64>,
    },
    /// Build the α-net of the thick part.
    Net {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Build the net and its nerve.
    Nerve {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Full pipeline with the rank certificate; exit code 0 iff every flag passes.
    Pipeline {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Randomized lemma checks.
    Lemmas {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = TrialConfig::default().seed)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModelArg::H2)]
        model: ModelArg,
        #[arg(long, value_enum, default_value_t = CheckArg::All)]
        check: CheckArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ball volumes, caps and the rank constant for a model and α.
    Constants {
        #[arg(long, value_enum, default_value_t = ModelArg::H2)]
        model: ModelArg,
        #[arg(long)]
        alpha: Option<f64>,
        /// Also report the covolume arithmetic for this lattice.
        #[arg(long)]
        lattice: Option<String>,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lattice: Option<String>,
    /// Lattice spec JSON file.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "epsilon-g")]
    epsilon_g: Option<f64>,
    #[arg(long = "m-g")]
    m_g: Option<u32>,
    #[arg(long)]
    nu: Option<u32>,
    #[arg(long)]
    probes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG of the region (H² only).
    #[arg(long)]
    svg: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    #[value(name = "H2", alias = "h2")]
    H2,
    #[value(name = "H3", alias = "h3")]
    H3,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::H2 => Model::H2,
            ModelArg::H3 => Model::H3,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum CheckArg {
    All,
    Projection,
    Ray,
    Commuting,
    MinPower,
    Codim,
}

type CliResult = Result<bool, String>;

impl RunArgs {
    fn config(&self) -> Result<RunConfig, String> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = &self.lattice {
            c.lattice = v.clone();
            c.spec = None;
        }
        if self.spec.is_some() {
            c.spec = self.spec.clone();
        }
        c.alpha = self.alpha.or(c.alpha);
        c.epsilon_g = self.epsilon_g.or(c.epsilon_g);
        c.m_g = self.m_g.or(c.m_g);
        c.nu = self.nu.or(c.nu);
        if let Some(v) = self.probes {
            c.probes = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        c.svg |= self.svg;
        Ok(c)
    }
}

fn emit(text: &str) {
    use std::io::Write;
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn print(v: &Value) {
    emit(&serde_json::to_string_pretty(v).expect("json value"));
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn parse_entry(s: &str) -> Result<Complex64, String> {
    Complex64::from_str(s).map_err(|_| format!("cannot parse matrix entry `{s}`"))
}

fn cmd_classify(entries: &[String]) -> CliResult {
    let m: Vec<Complex64> = entries
        .iter()
        .map(|s| parse_entry(s))
        .collect::<Result<_, _>>()?;
    let model = if m.iter().all(|z| z.im == 0.0) {
        Model::H2
    } else {
        Model::H3
    };
    let g = Isometry::from_entries(model, [m[0], m[1], m[2], m[3]]).map_err(|e| e.to_string())?;
    let c = classify_strict(&g).map_err(|e| e.to_string())?;
    print(&json!({ "model": model, "matrix": g, "class": c }));
    Ok(true)
}

fn point_arg(coords: &[f64]) -> Result<Point, String> {
    Point::from_coords(coords).map_err(|e| e.to_string())
}

fn cmd_psi(run: &RunArgs, coords: &[f64]) -> CliResult {
    let c = run.config()?;
    let l = c.resolve_lattice().map_err(|e| e.to_string())?;
    let cfg = c.morse_config(l.model);
    cfg.validate().map_err(|e| e.to_string())?;
    let x = point_arg(coords)?;
    let mut ev = PsiEvaluator::new(&l, &cfg);
    let v = ev.eval(&x, true).map_err(|e| e.to_string())?;
    let sigma = sigma_set(&l, &x, &cfg).map_err(|e| e.to_string())?;
    print(&json!({
        "lattice": l.name,
        "point": x.coords(),
        "psi": v.psi,
        "grad": v.grad,
        "grad_norm": v.grad.norm_at(&x),
        "terms": v.terms,
        "sigma": sigma,
        "thick": v.psi == 0.0,
    }));
    Ok(true)
}

fn cmd_flow(run: &RunArgs, coords: &[f64]) -> CliResult {
    let c = run.config()?;
    let l = c.resolve_lattice().map_err(|e| e.to_string())?;
    let cfg = c.morse_config(l.model);
    cfg.validate().map_err(|e| e.to_string())?;
    let x = point_arg(coords)?;
    let mut ev = PsiEvaluator::new(&l, &cfg);
    let out = flow_to_sublevel(&mut ev, &x, cfg.delta_floor).map_err(|e| e.to_string())?;
    let settled = settle_to_zero(&mut ev, &out.point).map_err(|e| e.to_string())?;
    let reduced = l.reduce(&settled);
    let decreasing = out.psi_trace.windows(2).all(|w| w[1] < w[0]);
    print(&json!({
        "lattice": l.name,
        "start": x.coords(),
        "end": settled.coords(),
        "reduced": reduced.point.coords(),
        "iterations": out.iterations,
        "backtracks": out.backtracks,
        "psi_start": out.psi_trace.first(),
        "psi_end": ev.psi(&settled).ok(),
        "strictly_decreasing": decreasing,
    }));
    Ok(true)
}

fn write_json(dir: &Option<PathBuf>, name: &str, v: &Value) -> Result<(), String> {
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        let path = dir.join(name);
        let text = serde_json::to_string_pretty(v).expect("json value") + "\n";
        std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(())
}

fn cmd_net(run: &RunArgs, with_nerve: bool) -> CliResult {
    let c = run.config()?;
    let l = c.resolve_lattice().map_err(|e| e.to_string())?;
    let cfg = c.morse_config(l.model);
    let net = build_net_with(&l, &cfg, &c.net_options()).map_err(|e| e.to_string())?;
    let mut doc = json!({
        "lattice": l.name,
        "derived": DerivedConstants::new(&l, &cfg),
        "net": {
            "size": net.points.len(),
            "coverage_certificate": net.coverage_certificate,
            "stats": net.stats,
            "points": net.points.iter().map(|p| p.coords()).collect::<Vec<_>>(),
        },
    });
    let mut nerve = None;
    if with_nerve {
        let n = build_nerve(&l, &net).map_err(|e| e.to_string())?;
        doc["nerve"] = json!({
            "vertices": n.vertices,
            "edges": n.edges.len(),
            "pairs": n.pairs,
            "max_degree": n.max_degree,
            "components": n.components,
            "generators": n.generators.len(),
            "edge_list": n.edges.iter().map(|e| json!([e.i, e.j, e.dist])).collect::<Vec<_>>(),
        });
        nerve = Some(n);
    }
    let name = if with_nerve { "nerve.json" } else { "net.json" };
    write_json(&c.out, name, &doc)?;
    if c.svg {
        if let (Some(dir), Some(svg)) = (
            &c.out,
            thicknet::cover::render_svg(&l, &net, nerve.as_ref()),
        ) {
            let path = dir.join("region.svg");
            std::fs::write(&path, svg).map_err(|e| format!("{}: {e}", path.display()))?;
        }
    }
    if c.out.is_none() {
        print(&doc);
    } else {
        // summary only; the full document went to the output directory
        let mut short = doc.clone();
        short["net"]["points"] = Value::Null;
        if let Some(n) = short.get_mut("nerve") {
            n["edge_list"] = Value::Null;
        }
        print(&short);
    }
    Ok(true)
}

fn cmd_pipeline(run: &RunArgs) -> CliResult {
    let c = run.config()?;
    let result = run_pipeline(&c);
    if let Some(dir) = &c.out {
        write_outputs(&result, dir, c.svg).map_err(|e| e.to_string())?;
    }
    emit(&result.report.to_json());
    Ok(result.report.pass)
}

fn cmd_lemmas(
    trials: usize,
    seed: u64,
    model: Model,
    check: CheckArg,
    out: &Option<PathBuf>,
) -> CliResult {
    let cfg = TrialConfig {
        trials,
        seed,
        ..TrialConfig::with_model(model)
    };
    let err = |e: lemma_lab::LemmaError| e.to_string();
    let reports = match check {
        CheckArg::All => lemma_lab::run_all(&cfg).map_err(err)?,
        CheckArg::Projection => vec![lemma_lab::check_projection_claim(&cfg).map_err(err)?],
        CheckArg::Ray => vec![lemma_lab::check_ray_lemma(&cfg).map_err(err)?],
        CheckArg::Commuting => vec![lemma_lab::check_commuting_sublevels(&cfg).map_err(err)?],
        CheckArg::MinPower => vec![lemma_lab::check_min_power(&cfg).map_err(err)?],
        CheckArg::Codim => vec![lemma_lab::check_codim_h3(&cfg).map_err(err)?],
    };
    let summary = LemmaSummary::new(cfg, reports);
    let doc = to_value(&summary);
    write_json(out, "lemmas.json", &doc)?;
    print(&doc);
    Ok(summary.pass)
}

fn cmd_constants(model: Model, alpha: Option<f64>, lattice: &Option<String>) -> CliResult {
    let morse = thicknet::morse::MorseConfig::defaults(model);
    let alpha = alpha.unwrap_or(morse.alpha());
    let err = |e: thicknet::constants::ConstantsError| e.to_string();
    let mut doc = json!({
        "model": model,
        "alpha": alpha,
        "v_half_alpha": ball_volume(model, 0.5 * alpha).map_err(err)?,
        "v_two_and_half_alpha": ball_volume(model, 2.5 * alpha).map_err(err)?,
        "c": paper_constant_c(model, alpha).map_err(err)?,
        "degree_cap": degree_cap(model, alpha).map_err(err)?,
    });
    let mut pass = true;
    if let Some(name) = lattice {
        let l = thicknet::lattice::bundled(name).map_err(|e| e.to_string())?;
        if l.model != model {
            return Err(format!(
                "lattice `{name}` lives in {:?}; pass --model {:?}",
                l.model, l.model
            ));
        }
        let cfg = thicknet::morse::MorseConfig {
            alpha_override: Some(alpha),
            ..morse
        };
        let vol = known_covolume(&l).map_err(err)?;
        let c = paper_constant_c(model, alpha).map_err(err)?;
        doc["lattice"] = json!({
            "name": l.name,
            "covolume": vol,
            "packing_cap": packing_cap(model, alpha, vol).map_err(err)?,
            "c_vol": c * vol,
            "kazhdan_margulis": 2.0 / c <= vol,
            "rank_bound_at_known_rank": l.known_rank.map(|r| theorem_check(&l, r as u64, &cfg).map(|t| t.pass)).transpose().map_err(err)?,
        });
        pass = 2.0 / c <= vol;
    }
    print(&doc);
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Classify { entries } => cmd_classify(entries),
        Command::Psi { run, point } => cmd_psi(run, point),
        Command::Flow { run, point } => cmd_flow(run, point),
        Command::Net { run } => cmd_net(run, false),
        Command::Nerve { run } => cmd_net(run, true),
        Command::Pipeline { run } => cmd_pipeline(run),
        Command::Lemmas {
            trials,
            seed,
            model,
            check,
            out,
        } => cmd_lemmas(*trials, *seed, (*model).into(), *check, out),
        Command::Constants {
            model,
            alpha,
            lattice,
        } => cmd_constants((*model).into(), *alpha, lattice),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
