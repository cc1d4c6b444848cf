use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fspectra::scene::{
    builtin_scene_json, identities_by_key, run_scene, thread_cap, SceneConfig, SCENE_REGISTRY,
};

/// Weighted spectral geometry of f-minimal hypersurfaces: batch scene runs,
/// built-in scene listing, and ambient identity checks.
#[derive(Parser)]
#[command(name = "fspectra", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scene from a JSON config file or a built-in scene name.
    Run {
        /// Path to a scene config, or a built-in name from `list-scenes`.
        config: String,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's random seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the built-in scenes.
    ListScenes,
    /// Check the curvature and soliton identities of an ambient space.
    /// Keys: gaussian:3, sphere-cylinder:k=2,j=1,lambda=1,
    /// cpn-cylinder:n=1, hpp-cylinder:p=1.
    Identities {
        ambient: String,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool, Box<dyn std::error::Error>> {
    let threads = thread_cap()?;
    match cli.command {
        Command::Run { config, out, seed } => {
            let text = match builtin_scene_json(&config) {
                Some(text) => text.to_string(),
                None => std::fs::read_to_string(&config)
                    .map_err(|e| format!("cannot read '{config}': {e}"))?,
            };
            let mut cfg = SceneConfig::from_json(&text)?;
            if let Some(seed) = seed {
                cfg.solver.seed = seed;
            }
            eprintln!("running scene '{}' with {threads} thread(s)", cfg.name);
            let report = run_scene(&cfg)?;
            let json = serde_json::to_string_pretty(&report)?;
            match out {
                Some(path) => std::fs::write(&path, json)?,
                None => println!("{json}"),
            }
            for failure in &report.failures {
                eprintln!("check failed: {failure}");
            }
            Ok(report.passed)
        }
        Command::ListScenes => {
            for (name, blurb) in SCENE_REGISTRY {
                println!("{name:<18} {blurb}");
            }
            Ok(true)
        }
        Command::Identities { ambient, samples, seed } => {
            let report = identities_by_key(&ambient, samples, seed)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            for failure in &report.failures {
                eprintln!("check failed: {failure}");
            }
            Ok(report.passed)
        }
    }
}
