//! Command dispatch over germ files and the JSON / text reports.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::classify::{classify, Verdict};
use crate::crit::{critical_locus, critical_tower, CritError, CritTower, TowerOptions};
use crate::field::{CoefficientField, Fp, Rational, Scalar};
use crate::gb::{LocalIdeal, Reducedness};
use crate::germ::GermMap;
use crate::germfile::{read_field, GermFile, GermFileError};
use crate::jetlab::{
    determinacy_probe, exp_derivation, log_automorphism, lift_automorphism, lr_solver, right_solver, JetAutomorphism,
    JetContext, JetDerivation, JetError,
};
use crate::modops::ModError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Crit,
    Disc,
    Tower,
    Classify,
    Image,
    Requiv,
    Lrequiv,
    Lift,
    Exp,
    Probe,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::Crit,
        Command::Disc,
        Command::Tower,
        Command::Classify,
        Command::Image,
        Command::Requiv,
        Command::Lrequiv,
        Command::Lift,
        Command::Exp,
        Command::Probe,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Crit => "crit",
            Command::Disc => "disc",
            Command::Tower => "tower",
            Command::Classify => "classify",
            Command::Image => "image",
            Command::Requiv => "requiv",
            Command::Lrequiv => "lrequiv",
            Command::Lift => "lift",
            Command::Exp => "exp",
            Command::Probe => "probe",
        }
    }

    fn uses_jets(&self) -> bool {
        matches!(self, Command::Requiv | Command::Lrequiv | Command::Lift | Command::Exp | Command::Probe)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL.iter().copied().find(|c| c.name() == s).ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub max_depth: usize,
    pub jet_order: u32,
    pub radical_bound: u32,
    pub minor_guard: usize,
    pub seed: u64,
    pub trials: u32,
    /// Exponents `N` for `probe`.
    pub powers: Vec<u32>,
    /// Record wall time in the report. Off by default so reports stay
    /// byte-identical across runs.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_depth: 5,
            jet_order: 12,
            radical_bound: 8,
            minor_guard: 8,
            seed: 0,
            trials: 100,
            powers: vec![3, 4, 5, 6],
            timing: false,
        }
    }
}

impl RunConfig {
    fn tower_options(&self) -> TowerOptions {
        TowerOptions { max_depth: self.max_depth, radical_bound: self.radical_bound, minor_guard: self.minor_guard, reduce: true }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub field: String,
    pub local_order: &'static str,
    pub max_depth: usize,
    pub jet_order: u32,
    pub radical_bound: u32,
    pub minor_guard: usize,
    pub seed: u64,
    pub trials: u32,
    pub powers: Vec<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub input_sha256: String,
    pub config: ConfigEcho,
    pub result: Value,
    pub caveats: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Parse(#[from] GermFileError),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Guard(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Parse(_) | RunError::Input(_) => 2,
            RunError::Guard(_) => 3,
        }
    }
}

impl From<CritError> for RunError {
    fn from(e: CritError) -> Self {
        match e {
            CritError::Module(ModError::MinorGuard { .. }) => RunError::Guard(e.to_string()),
            other => RunError::Input(other.to_string()),
        }
    }
}

impl From<JetError> for RunError {
    fn from(e: JetError) -> Self {
        match e {
            JetError::Characteristic { .. } => RunError::Guard(format!("{e}; lower --jet-order below the characteristic")),
            JetError::Crit(c) => c.into(),
            other => RunError::Input(other.to_string()),
        }
    }
}

pub fn input_digest(input: &str) -> String {
    hex::encode(Sha256::digest(input.as_bytes()))
}

/// Parses `input`, runs `command` and assembles the report.
pub fn run(command: Command, input: &str, config: &RunConfig) -> Result<Report, RunError> {
    let start = Instant::now();
    let field = read_field(input)?;
    let (result, caveats) = match field {
        CoefficientField::Rationals => run_typed::<Rational>(command, input, config)?,
        CoefficientField::Prime(_) => run_typed::<Fp>(command, input, config)?,
    };
    Ok(Report {
        tool: "critgerm",
        version: env!("CARGO_PKG_VERSION"),
        command: command.name().to_string(),
        input_sha256: input_digest(input),
        config: ConfigEcho {
            field: field.to_string(),
            local_order: "ds",
            max_depth: config.max_depth,
            jet_order: config.jet_order,
            radical_bound: config.radical_bound,
            minor_guard: config.minor_guard,
            seed: config.seed,
            trials: config.trials,
            powers: config.powers.clone(),
        },
        result,
        caveats,
        wall_time_ms: config.timing.then(|| start.elapsed().as_millis() as u64),
    })
}

fn ideal<F: Scalar>(i: &LocalIdeal<F>) -> Value {
    json!(i.generator_strings())
}

fn reducedness_json(r: &Reducedness) -> Value {
    match r {
        Reducedness::Reduced { reason } => json!({ "certified": true, "reason": reason }),
        Reducedness::UnreducedFallback { bound } => json!({ "certified": false, "bound": bound }),
    }
}

fn need_map<F: Scalar>(m: &Option<GermMap<F>>, key: &str) -> Result<GermMap<F>, RunError> {
    m.clone().ok_or_else(|| RunError::Input(format!("this command needs a `{key}` directive")))
}

fn tower_json<F: Scalar>(t: &CritTower<F>, caveats: &mut Vec<String>) -> Value {
    let levels: Vec<Value> = t
        .levels
        .iter()
        .map(|l| {
            if l.image_is_closure && l.index > 0 {
                caveats.push(format!("level {}: discriminant is the closure of a non-finite image", l.index));
            }
            if let Some(Reducedness::UnreducedFallback { bound }) = &l.reducedness {
                caveats.push(format!("level {}: no radical certificate within bound {bound}; ideal carried unreduced", l.index));
            }
            json!({
                "index": l.index,
                "crit": ideal(&l.crit),
                "fitting": l.fitting.as_ref().map(ideal),
                "discriminant": ideal(&l.disc),
                "reducedness": l.reducedness.as_ref().map(reducedness_json),
                "image_is_closure": l.image_is_closure,
            })
        })
        .collect();
    json!({ "levels": levels, "termination": t.termination.to_string() })
}

fn auto_text<F: Scalar>(a: &JetAutomorphism<F>) -> String {
    a.to_string()
}

fn run_typed<F: Scalar>(command: Command, input: &str, config: &RunConfig) -> Result<(Value, Vec<String>), RunError> {
    let file: GermFile<F> = GermFile::parse(input)?;
    let mut caveats = Vec::new();
    if !file.notes.non_minimal_embedding.is_empty() {
        caveats.push(format!(
            "embedding not minimal: generators outside m^2: {}",
            file.notes.non_minimal_embedding.join(", ")
        ));
    }
    if command.uses_jets() {
        caveats.push(format!("jet identities hold modulo terms of degree > {}", config.jet_order));
    }
    let opts = config.tower_options();
    let ctx = || JetContext::new(file.source(), config.jet_order).map_err(RunError::from);
    let result = match command {
        Command::Crit => {
            let f = need_map(&file.map, "map")?;
            let c = critical_locus(&f, &opts)?;
            if let Reducedness::UnreducedFallback { bound } = &c.reducedness {
                if !c.point_target {
                    caveats.push(format!("no radical certificate within bound {bound}; ideal carried unreduced"));
                }
            }
            json!({
                "ideal": ideal(&c.ideal),
                "fitting": ideal(&c.fitting),
                "reducedness": reducedness_json(&c.reducedness),
                "point_target": c.point_target,
            })
        }
        Command::Disc => {
            let f = need_map(&file.map, "map")?;
            let c = critical_locus(&f, &opts)?;
            let img = f.corestrict().image_ideal(Some(&c.ideal));
            if img.closure {
                caveats.push("discriminant is the closure of a non-finite image".into());
            }
            json!({
                "crit": ideal(&c.ideal),
                "discriminant": ideal(&img.ideal),
                "closure": img.closure,
            })
        }
        Command::Tower => {
            let f = need_map(&file.map, "map")?;
            let t = critical_tower(&f, &opts)?;
            tower_json(&t, &mut caveats)
        }
        Command::Classify => {
            let f = need_map(&file.map, "map")?;
            let r = classify(&f, &opts)?;
            if let Verdict::NotWfst { proven: false, .. } = r.verdict {
                caveats.push("depth limit reached: verdict inconclusive".into());
            }
            json!({
                "verdict": r.verdict.to_string(),
                "r": r.verdict.level(),
                "detail": r.verdict,
                "quotient_dims": r.quotient_dims.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
                "tower": tower_json(&r.tower, &mut caveats),
            })
        }
        Command::Image => {
            let f = need_map(&file.map, "map")?;
            let img = f.image_ideal(None);
            let dom = f.is_dominant(config.radical_bound);
            if img.closure {
                caveats.push("image ideal describes the closure of a non-finite image".into());
            }
            json!({ "image": ideal(&img.ideal), "closure": img.closure, "dominant": dom.dominant })
        }
        Command::Requiv | Command::Lrequiv => {
            let f = need_map(&file.map, "map")?;
            let g = need_map(&file.map2, "map2")?;
            let ctx = ctx()?;
            let out = if command == Command::Requiv { right_solver(&f, &g, &ctx) } else { lr_solver(&f, &g, &ctx) };
            match out {
                Ok(eq) => json!({
                    "found": true,
                    "source_automorphism": auto_text(&eq.source),
                    "target_automorphism": auto_text(&eq.target),
                    "steps": eq.steps,
                }),
                Err(JetError::Unsolvable { degree, reason, residual }) => {
                    caveats.push(format!("no equivalence found at jet order {}; this is not a proof of non-equivalence", config.jet_order));
                    json!({
                        "found": false,
                        "failure": { "degree": degree, "reason": reason, "residual": residual },
                    })
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Lift => {
            let ctx = ctx()?;
            let images = file.automorphism.clone().ok_or_else(|| RunError::Input("`lift` needs an `automorphism` directive".into()))?;
            let i = file.lift_ideal.clone().ok_or_else(|| RunError::Input("`lift` needs a `lift_ideal` directive".into()))?;
            let n = file.lift_power.ok_or_else(|| RunError::Input("`lift` needs a `lift_power` directive".into()))?;
            let phi = JetAutomorphism::new(&ctx, images)?;
            let j = &file.source_ideal;
            match lift_automorphism(j, &i, n, &phi, &ctx) {
                Ok(l) => {
                    let ij = i.sum(j);
                    json!({
                        "lifted": true,
                        "map": auto_text(&l.map),
                        "derivation": l.derivation.to_string(),
                        "drops": l.drops,
                        "checks": {
                            "preserves_j": l.map.preserves(j),
                            "preserves_i": l.map.preserves(&ij),
                            "agrees_modulo_i": l.map.agrees_modulo(&phi, &ij),
                        },
                    })
                }
                Err(e @ (JetError::NoAdjustment { .. } | JetError::Verification(_))) => {
                    json!({ "lifted": false, "failure": e.to_string() })
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Exp => {
            let ctx = ctx()?;
            let coeffs = file.derivation.clone().ok_or_else(|| RunError::Input("`exp` needs a `derivation` directive".into()))?;
            let xi = JetDerivation::new(&ctx, coeffs)?;
            let phi = exp_derivation(&xi, &ctx)?;
            let back = log_automorphism(&phi, &ctx)?;
            json!({
                "derivation": xi.to_string(),
                "automorphism": auto_text(&phi),
                "log_roundtrip": back == xi,
            })
        }
        Command::Probe => {
            let f = need_map(&file.map, "map")?;
            let ctx = ctx()?;
            let rows = determinacy_probe(&f, &config.powers, config.trials, config.seed, &ctx)?;
            let fit = critical_locus(&f, &TowerOptions { reduce: false, ..opts })?.fitting;
            json!({ "fitting": ideal(&fit), "rows": rows })
        }
    };
    Ok((result, caveats))
}

impl Report {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Indented `key: value` rendering of the JSON form.
    pub fn to_text(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut out = String::new();
        render(&v, 0, &mut out);
        out
    }
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) if items.iter().all(|x| x.is_string()) => {
            Some(format!("({})", items.iter().filter_map(|x| x.as_str()).collect::<Vec<_>>().join(", ")))
        }
        Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) => {
            Some(format!("[{}]", items.iter().filter_map(scalar_text).collect::<Vec<_>>().join(", ")))
        }
        _ => None,
    }
}

fn render(v: &Value, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match scalar_text(x) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render(x, indent + 2, out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for x in items {
                match scalar_text(x) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}-\n"));
                        render(x, indent + 2, out);
                    }
                }
            }
        }
        other => {
            if let Some(s) = scalar_text(other) {
                out.push_str(&format!("{pad}{s}\n"));
            }
        }
    }
}
