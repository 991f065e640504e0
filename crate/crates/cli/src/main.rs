use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use superbv::atlas::Atlas;
use superbv::bvforms::Truncation;
use superbv::examples::{build_affine, build_example, build_projective, build_super_conic};
use superbv::report::{CheckRecord, Report};
use superbv::suites;

#[derive(Parser, Debug)]
#[command(name = "superbv", version, about = "Exact checks on supermanifolds, their BV total spaces and BV Laplacians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Atlas consistency, the BV total space and the Berezinian square.
    VerifyAtlas(RunConfig),
    /// Atiyah class of the tangent sheaf and its decomposition.
    Atiyah(RunConfig),
    /// Extension class of the cotangent sheaf of the total space.
    Ext(RunConfig),
    /// Identities of the deformed de Rham complex and the BV Laplacian.
    BvCheck(RunConfig),
    /// The super conic end to end.
    ConicDemo(RunConfig),
    /// Every suite on the standard examples.
    All(RunConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExampleName {
    Affine,
    Cp,
    Conic,
}

impl ExampleName {
    fn as_str(self) -> &'static str {
        match self {
            ExampleName::Affine => "affine",
            ExampleName::Cp => "cp",
            ExampleName::Conic => "conic",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug, Clone)]
struct RunConfig {
    /// Built-in example.
    #[arg(long, value_enum)]
    example: Option<ExampleName>,
    /// Dimensions `n m` of the example or of the model space.
    #[arg(long, num_args = 2, value_names = ["N", "M"])]
    dims: Option<Vec<usize>>,
    /// Atlas JSON file, instead of a built-in example.
    #[arg(long, conflicts_with = "example")]
    atlas: Option<PathBuf>,
    /// Largest total p-degree in the truncation window.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    pmax: u32,
    /// Largest degree in the even coordinates in the truncation window.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    xmax: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random samples per randomised check.
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunConfig {
    fn dims(&self) -> Option<(usize, usize)> {
        self.dims.as_ref().map(|d| (d[0], d[1]))
    }

    fn truncation(&self) -> Truncation {
        Truncation { p_max: self.pmax, x_max: self.xmax }
    }

    fn echo(&self, command: &str) -> serde_json::Value {
        json!({
            "command": command,
            "example": self.example.map(ExampleName::as_str),
            "atlas": self.atlas.as_ref().map(|p| p.display().to_string()),
            "dims": self.dims(),
            "pmax": self.pmax,
            "xmax": self.xmax,
            "seed": self.seed,
            "trials": self.trials,
        })
    }

    fn load_atlas(&self) -> Result<Atlas, String> {
        if let Some(path) = &self.atlas {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            return Atlas::from_json_str(&text).map_err(|e| format!("{}: {e}", path.display()));
        }
        let name = self.example.ok_or("give --example or --atlas")?;
        build_example(name.as_str(), self.dims()).map_err(|e| e.to_string())
    }
}

/// Runs a group of checks and stamps each record with the group's wall time.
fn timed(f: impl FnOnce() -> Result<Vec<CheckRecord>, String>) -> Result<Vec<CheckRecord>, String> {
    let start = Instant::now();
    let mut v = f()?;
    let ms = start.elapsed().as_millis() as u64;
    for c in &mut v {
        c.elapsed_ms = Some(ms);
    }
    Ok(v)
}

fn standard_atlases() -> Result<Vec<Atlas>, String> {
    let mut v = vec![build_super_conic(1), build_affine(2, 2), build_projective(2, 0), build_projective(2, 1)];
    for m in 0..=2 {
        v.push(build_projective(1, m));
    }
    v.into_iter().collect::<Result<_, _>>().map_err(|e| e.to_string())
}

fn run(command: &Command) -> Result<(RunConfig, &'static str, Vec<CheckRecord>), String> {
    let err = |e: superbv::Error| e.to_string();
    Ok(match command {
        Command::VerifyAtlas(c) => {
            let atlas = c.load_atlas()?;
            (c.clone(), "verify-atlas", timed(|| Ok(suites::atlas_suite(&atlas)))?)
        }
        Command::Atiyah(c) => {
            let atlas = c.load_atlas()?;
            (c.clone(), "atiyah", timed(|| suites::atiyah_suite(&atlas).map_err(err))?)
        }
        Command::Ext(c) => {
            let atlas = c.load_atlas()?;
            (c.clone(), "ext", timed(|| suites::ext_suite(&atlas).map_err(err))?)
        }
        Command::BvCheck(c) => {
            let (n, m) = c.dims().ok_or("bv-check needs --dims N M")?;
            let checks = timed(|| suites::bv_suite(n, m, c.truncation(), c.seed, c.trials as usize).map_err(err))?;
            (c.clone(), "bv-check", checks)
        }
        Command::ConicDemo(c) => (c.clone(), "conic-demo", timed(|| suites::conic_demo_suite().map_err(err))?),
        Command::All(c) => {
            let mut checks = Vec::new();
            for atlas in standard_atlases()? {
                checks.extend(timed(|| Ok(suites::atlas_suite(&atlas)))?);
                checks.extend(timed(|| suites::atiyah_suite(&atlas).map_err(err))?);
                checks.extend(timed(|| suites::ext_suite(&atlas).map_err(err))?);
            }
            for (n, m) in [(1, 0), (1, 1), (1, 2), (2, 1)] {
                checks.extend(timed(|| suites::bv_suite(n, m, c.truncation(), c.seed, c.trials as usize).map_err(err))?);
            }
            checks.extend(timed(|| suites::conic_demo_suite().map_err(err))?);
            // The conic atlas appears in the demo as well; keep one copy of each name.
            checks.sort_by(|a, b| a.name.cmp(&b.name));
            checks.dedup_by(|a, b| a.name == b.name);
            (c.clone(), "all", checks)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (config, name, checks) = match run(&cli.command) {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("superbv: {msg}");
            return ExitCode::from(2);
        }
    };
    let report = Report::new(config.echo(name), checks);
    let text = match config.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json() + "\n",
    };
    let written = match &config.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(msg) = written {
        eprintln!("superbv: {msg}");
        return ExitCode::from(2);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
