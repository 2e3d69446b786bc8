use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use critgerm::report::{run, Command, RunConfig};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
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

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Crit => Command::Crit,
            Cmd::Disc => Command::Disc,
            Cmd::Tower => Command::Tower,
            Cmd::Classify => Command::Classify,
            Cmd::Image => Command::Image,
            Cmd::Requiv => Command::Requiv,
            Cmd::Lrequiv => Command::Lrequiv,
            Cmd::Lift => Command::Lift,
            Cmd::Exp => Command::Exp,
            Cmd::Probe => Command::Probe,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Critical loci, discriminants, critical towers and jet-level equivalence
/// of polynomial map-germs.
#[derive(Debug, Parser)]
#[command(name = "critgerm", version)]
struct Args {
    command: Cmd,
    /// Germ description file.
    file: PathBuf,
    #[arg(long, default_value_t = 5)]
    max_depth: usize,
    #[arg(long = "jet-order", default_value_t = 12)]
    jet_order: u32,
    #[arg(long, default_value_t = 8)]
    radical_bound: u32,
    #[arg(long, default_value_t = 8)]
    minor_guard: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: u32,
    /// Exponents N for `probe`, e.g. `3-6` or `3,5`.
    #[arg(long, default_value = "3-6", value_parser = parse_powers)]
    powers: Powers,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Debug)]
struct Powers(Vec<u32>);

fn parse_powers(s: &str) -> Result<Powers, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once('-') {
            let a: u32 = a.trim().parse().map_err(|_| format!("bad range `{part}`"))?;
            let b: u32 = b.trim().parse().map_err(|_| format!("bad range `{part}`"))?;
            if a > b {
                return Err(format!("empty range `{part}`"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| format!("bad exponent `{part}`"))?);
        }
    }
    Ok(Powers(out))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let input = match std::fs::read_to_string(&args.file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("critgerm: cannot read {}: {e}", args.file.display());
            return ExitCode::from(2);
        }
    };
    let config = RunConfig {
        max_depth: args.max_depth,
        jet_order: args.jet_order,
        radical_bound: args.radical_bound,
        minor_guard: args.minor_guard,
        seed: args.seed,
        trials: args.trials,
        powers: args.powers.0.clone(),
        timing: args.timing,
    };
    let report = match run(args.command.into(), &input, &config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("critgerm: {}: {e}", args.file.display());
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let text = match args.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("critgerm: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}
