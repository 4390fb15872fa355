use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use sdfreg::benchmark::{generate_benchmark, run_benchmark, write_benchmark, BenchmarkSpec};
use sdfreg::core::sampling::CameraPose;
use sdfreg::core::SharedField;
use sdfreg::render::{render_image, RenderOptions};
use sdfreg::substitute::substitute;
use sdfreg::{io, load_scene_config, run_registration, HarnessError, RegistrationConfig, RegistrationReport, Result, THREADS_ENV};

#[derive(Parser)]
#[command(version, about = "Sim(3) registration of signed distance fields")]
struct Cli {
    /// Worker threads; 0 lets rayon decide.
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Register one library object against a scene.
    Register {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        object: String,
        /// Registration config JSON; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Per-iteration trace as CSV.
        #[arg(long)]
        trace_csv: Option<PathBuf>,
        /// Directory for PLY dumps of the final sample sets.
        #[arg(long)]
        ply_dir: Option<PathBuf>,
    },
    /// Generate and run a synthetic benchmark suite.
    Benchmark {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replace a registered object and render the edited scene.
    Substitute {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        replacement: String,
        /// Camera pose JSON.
        #[arg(long)]
        render: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
    },
    /// Render a scene file, a grid file or `library.json#object`.
    Render {
        #[arg(long)]
        field: String,
        #[arg(long)]
        pose: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
    },
}

fn load_pose(path: &Path) -> Result<CameraPose> {
    let pose: CameraPose = io::read_json(path)?;
    pose.validate()
        .map_err(|e| HarnessError::Load(format!("camera pose `{}`: {e}", path.display())))?;
    Ok(pose)
}

fn load_field(spec: &str) -> Result<SharedField> {
    if let Some((lib, name)) = spec.split_once('#') {
        let library = sdfreg::library::load_library(Path::new(lib))?;
        let entry = library
            .get(name)
            .ok_or_else(|| HarnessError::Load(format!("object `{name}` is not in `{lib}`")))?;
        return Ok(entry.field.clone());
    }
    let path = Path::new(spec);
    if path.extension().is_some_and(|e| e == "json") {
        Ok(load_scene_config(path)?.field)
    } else {
        Ok(Arc::new(io::load_grid(path)?))
    }
}

fn run(cli: Cli) -> Result<()> {
    rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global()?;
    match cli.command {
        Command::Register {
            scene,
            object,
            config,
            seed,
            out,
            trace_csv,
            ply_dir,
        } => {
            let scene = load_scene_config(&scene)?;
            let cfg: RegistrationConfig = match config {
                Some(p) => io::read_json(&p)?,
                None => RegistrationConfig::default(),
            };
            let outcome = run_registration(&scene, &object, &cfg, seed)?;
            outcome.report.write(&out)?;
            if let Some(p) = trace_csv {
                io::write_trace_csv(&p, &outcome.trace)?;
            }
            if let Some(dir) = ply_dir {
                io::write_ply(&dir.join("scene_samples.ply"), &outcome.scene_samples.points)?;
                io::write_ply(&dir.join("object_samples.ply"), &outcome.object_samples.points)?;
            }
        }
        Command::Benchmark { spec, seed, out } => {
            let spec: BenchmarkSpec = io::read_json(&spec)?;
            let suite = generate_benchmark(seed, &spec)?;
            let results = run_benchmark(&suite)?;
            write_benchmark(&out, &suite, &results)?;
        }
        Command::Substitute {
            scene,
            report,
            replacement,
            render,
            out,
            width,
            height,
        } => {
            let scene = load_scene_config(&scene)?;
            let report: RegistrationReport = io::read_json(&report)?;
            let edited = substitute(&scene, &report, &replacement)?;
            let img = render_image(&edited, &load_pose(&render)?, width, height, &RenderOptions::default());
            io::atomic_write(&out, &img.to_ppm())?;
        }
        Command::Render {
            field,
            pose,
            out,
            width,
            height,
        } => {
            let f = load_field(&field)?;
            let img = render_image(&*f, &load_pose(&pose)?, width, height, &RenderOptions::default());
            io::atomic_write(&out, &img.to_ppm())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
