use std::io::Read;
use std::path::Path;

use lov_core::analysis::{check_axiom, default_cutoff, equiv, AxiomId, EquivConfig, EquivVerdict};
use lov_core::dsl::{parse_any, print_dsl, to_json};
use lov_core::euler::{solve_e2_lhs, solve_e2_rhs, solve_e3};
use lov_core::fock::parse_occupation;
use lov_core::rewrite::{normalize_with, ranking, NormalizeOptions, Normalized};
use lov_core::synthesis::{synthesize_triangle, triangle_to_circuit};
use lov_core::{eval_circuit, random_unitary, Circuit, EvalConfig, FockVector, UnitaryMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Command, Emit, GlobalArgs};
use crate::error::{CliError, CoreResult};

/// Axiom residuals above this fail `check-axioms`.
const AXIOM_TOLERANCE: f64 = 1e-9;
/// Photon bound of `check-axioms` when none is given.
const AXIOM_CUTOFF: u32 = 4;

/// Settings shared by every subcommand, after flags and environment.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub angle_eps: f64,
    pub amp_eps: f64,
    pub prune_eps: f64,
    pub cutoff: Option<u32>,
    pub step_limit: usize,
    pub seed: u64,
}

impl CliConfig {
    pub fn from_args(g: &GlobalArgs) -> Result<Self, CliError> {
        let eval = EvalConfig::default();
        let cfg = CliConfig {
            angle_eps: g.angle_eps.unwrap_or(lov_core::rewrite::ANGLE_EPS),
            amp_eps: g.amp_eps.unwrap_or(lov_core::rewrite::AMP_EPS),
            prune_eps: g.prune_eps.unwrap_or(eval.prune_eps),
            cutoff: g.cutoff,
            step_limit: g.step_limit.unwrap_or(lov_core::rewrite::DEFAULT_STEP_LIMIT),
            seed: g.seed,
        };
        for (name, v) in [
            ("angle-eps", cfg.angle_eps),
            ("amp-eps", cfg.amp_eps),
            ("prune-eps", cfg.prune_eps),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!("--{name} must be positive, got {v}")));
            }
        }
        Ok(cfg)
    }

    fn normalize_options(&self) -> NormalizeOptions {
        NormalizeOptions {
            step_limit: self.step_limit,
            check_steps: false,
        }
    }
}

/// What a subcommand produced.
pub struct Outcome {
    pub text: String,
    pub json: Value,
    /// `false` for a negative verdict, which exits with 1.
    pub positive: bool,
}

impl Outcome {
    fn ok(text: String, json: Value) -> Self {
        Outcome {
            text,
            json,
            positive: true,
        }
    }
}

pub fn read_input(path: &Path) -> Result<String, CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io)
    }
}

fn load_circuit(path: &Path) -> Result<Circuit, CliError> {
    parse_any(&read_input(path)?).core()
}

fn load_matrix(path: &Path) -> Result<UnitaryMatrix, CliError> {
    serde_json::from_str(&read_input(path)?)
        .map_err(|e| CliError::Usage(format!("{}: not a JSON matrix: {e}", path.display())))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("plain data serializes")
}

fn pretty<T: Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("plain data serializes")
}

pub fn run(command: &Command, cfg: &CliConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Eval { file, input, state } => eval(file, input.as_deref(), state.as_deref(), cfg),
        Command::Normalize { file, trace } => normalize(file, *trace, cfg),
        Command::Equiv { left, right } => equivalence(left, right, cfg),
        Command::Synth { file, random, emit } => synth(file.as_deref(), *random, *emit, cfg),
        Command::Euler2 { file } => euler2(file),
        Command::Euler3 { file } => euler3(file),
        Command::CheckAxioms { instances, only } => check_axioms(*instances, only, cfg),
        Command::Rank { file } => rank(file),
        Command::Fmt { file, to } => fmt(file, *to),
    }
}

fn eval(file: &Path, input: Option<&str>, state: Option<&str>, cfg: &CliConfig) -> Result<Outcome, CliError> {
    let c = load_circuit(file)?;
    let v = match (input, state) {
        (Some(occ), None) => FockVector::basis(parse_occupation(occ).map_err(CliError::Usage)?),
        (None, Some(text)) => FockVector::parse_text(c.n_in(), text).map_err(CliError::Usage)?,
        (None, None) if c.n_in() == 0 => FockVector::vacuum(0),
        _ => return Err(CliError::Usage("eval needs --input or --state".into())),
    };
    if v.modes() != c.n_in() {
        return Err(CliError::Usage(format!(
            "input has {} modes but the circuit takes {}",
            v.modes(),
            c.n_in()
        )));
    }
    let eval_cfg = EvalConfig {
        prune_eps: cfg.prune_eps,
        max_photons: cfg.cutoff,
    };
    let out = eval_circuit(&c, &v, &eval_cfg).core()?;
    let p = out.norm_sqr();
    Ok(Outcome::ok(
        format!("output: {out}\nnorm_sqr: {p:.17}\n"),
        json!({ "output": to_value(&out), "text": out.to_string(), "norm_sqr": p }),
    ))
}

fn normalize(file: &Path, trace: bool, cfg: &CliConfig) -> Result<Outcome, CliError> {
    let c = load_circuit(file)?;
    let mut steps = Vec::new();
    let nf = normalize_with(&c, &cfg.normalize_options(), |s| {
        if trace {
            steps.push(s.to_string());
        }
    })
    .core()?;
    let mut text = String::new();
    for s in &steps {
        text.push_str(s);
        text.push('\n');
    }
    let json = match &nf {
        Normalized::Zero(z) => {
            text.push_str(&format!("zero {} -> {}\n", z.n, z.m));
            json!({ "kind": "zero", "n": z.n, "m": z.m })
        }
        Normalized::Normal(n) => {
            let g = n.detector();
            text.push_str(&format!(
                "normal {} -> {} n_aux={} m_aux={}\nT: {}\nf: {}\nK: {:?}\ng: {}\n",
                n.n,
                n.m,
                n.n_aux,
                n.m_aux,
                serde_json::to_string(&n.triangle).expect("grid serializes"),
                n.f,
                n.k_set(),
                g
            ));
            json!({
                "kind": "normal",
                "n": n.n,
                "m": n.m,
                "n_aux": n.n_aux,
                "m_aux": n.m_aux,
                "triangle": to_value(&n.triangle),
                "f": n.f.to_string(),
                "k": n.k_set(),
                "g": g.to_string(),
            })
        }
    };
    let mut json = json;
    if trace {
        json["trace"] = to_value(&steps);
    }
    Ok(Outcome::ok(text, json))
}

fn equivalence(left: &Path, right: &Path, cfg: &CliConfig) -> Result<Outcome, CliError> {
    let a = load_circuit(left)?;
    let b = load_circuit(right)?;
    let cutoff = cfg.cutoff.unwrap_or_else(|| default_cutoff(&a).max(default_cutoff(&b)));
    let ecfg = EquivConfig {
        cutoff,
        step_limit: cfg.step_limit,
        angle_eps: cfg.angle_eps,
        amp_eps: cfg.amp_eps,
    };
    let v = equiv(&a, &b, &ecfg).core()?;
    let text = match &v {
        EquivVerdict::EquivalentNf => "equivalent: normal forms agree\n".to_string(),
        EquivVerdict::NumericAgreement { cutoff } => {
            format!("equivalent: step limit reached, no difference up to {cutoff} photons\n")
        }
        EquivVerdict::DistinctNf { component, witness } => match witness {
            Some(m) => format!(
                "distinct: normal forms differ in {component}; input {} differs by {:.3e}\n",
                m.input, m.delta
            ),
            None => format!("distinct: normal forms differ in {component}; no witness up to {cutoff} photons\n"),
        },
        EquivVerdict::NumericMismatch(m) => {
            format!(
                "distinct: step limit reached; input {} differs by {:.3e}\n",
                m.input, m.delta
            )
        }
    };
    Ok(Outcome {
        text,
        json: to_value(&v),
        positive: v.is_equivalent(),
    })
}

fn synth(file: Option<&Path>, random: Option<usize>, emit: Emit, cfg: &CliConfig) -> Result<Outcome, CliError> {
    let u = match (file, random) {
        (_, Some(0)) => return Err(CliError::Usage("--random needs a positive size".into())),
        (_, Some(n)) => random_unitary(n, cfg.seed),
        (Some(f), None) => load_matrix(f)?,
        (None, None) => return Err(CliError::Usage("synth needs a matrix file or --random".into())),
    };
    let t = synthesize_triangle(&u).core()?;
    let c = triangle_to_circuit(&t).core()?;
    let dsl = print_dsl(&c);
    let text = match emit {
        Emit::Dsl => dsl.clone(),
        Emit::Json => pretty(&t) + "\n",
    };
    Ok(Outcome::ok(text, json!({ "triangle": to_value(&t), "circuit": dsl })))
}

fn euler2(file: &Path) -> Result<Outcome, CliError> {
    let u = load_matrix(file)?;
    let v = json!({ "lhs": to_value(&solve_e2_lhs(&u).core()?), "rhs": to_value(&solve_e2_rhs(&u).core()?) });
    Ok(Outcome::ok(pretty(&v) + "\n", v))
}

fn euler3(file: &Path) -> Result<Outcome, CliError> {
    let r = load_matrix(file)?;
    let (l, rr) = solve_e3(&r).core()?;
    let v = json!({ "lhs": to_value(&l), "rhs": to_value(&rr) });
    Ok(Outcome::ok(pretty(&v) + "\n", v))
}

#[derive(Serialize)]
struct AxiomRow {
    axiom: &'static str,
    instances: usize,
    max_residual: f64,
    pass: bool,
}

fn check_axioms(instances: usize, only: &[String], cfg: &CliConfig) -> Result<Outcome, CliError> {
    let ids: Vec<AxiomId> = if only.is_empty() {
        AxiomId::ALL.to_vec()
    } else {
        only.iter()
            .map(|n| AxiomId::from_name(n).ok_or_else(|| CliError::Usage(format!("unknown axiom `{n}`"))))
            .collect::<Result<_, _>>()?
    };
    let cutoff = cfg.cutoff.unwrap_or(AXIOM_CUTOFF);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    for id in ids {
        let mut worst = 0.0f64;
        for _ in 0..instances {
            worst = worst.max(check_axiom(id, &mut rng, cutoff).core()?);
        }
        rows.push(AxiomRow {
            axiom: id.name(),
            instances,
            max_residual: worst,
            pass: worst < AXIOM_TOLERANCE,
        });
    }
    let mut text = format!("{:<8} {:>9} {:>14}  status\n", "axiom", "instances", "max_residual");
    for r in &rows {
        let status = if r.pass { "ok" } else { "FAIL" };
        text.push_str(&format!(
            "{:<8} {:>9} {:>14.3e}  {status}\n",
            r.axiom, r.instances, r.max_residual
        ));
    }
    let positive = rows.iter().all(|r| r.pass);
    Ok(Outcome {
        text,
        json: json!({ "cutoff": cutoff, "seed": cfg.seed, "axioms": to_value(&rows) }),
        positive,
    })
}

fn rank(file: &Path) -> Result<Outcome, CliError> {
    let r = ranking(&load_circuit(file)?);
    Ok(Outcome::ok(format!("{r}\n"), to_value(&r)))
}

fn fmt(file: &Path, to: Option<Emit>) -> Result<Outcome, CliError> {
    let text = read_input(file)?;
    let c = parse_any(&text).core()?;
    let is_json = text.trim_start().starts_with('{');
    let target = to.unwrap_or(if is_json { Emit::Dsl } else { Emit::Json });
    let out = match target {
        Emit::Dsl => print_dsl(&c),
        Emit::Json => to_json(&c) + "\n",
    };
    Ok(Outcome::ok(out.clone(), json!({ "text": out })))
}
