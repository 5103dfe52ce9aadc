use std::net::IpAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hueshift_cli::ops::{self, Fig9Params, SizeLimit};
use hueshift_cli::server::{self, ServiceConfig};
use hueshift_core::colorspace::{Jnd, SRgb8};
use hueshift_core::cvd::CvdType;
use hueshift_core::image::FileFormat;
use hueshift_core::naming::{load_dictionary, ColorDictionary};
use hueshift_core::psychophysics::SimulatedObserver;
use hueshift_core::{Error, Result};

/// Rotate colors about the gray axis, simulate dichromacy, name colors and
/// run discrimination analyses.
#[derive(Debug, Parser)]
#[command(name = "hueshift", version)]
struct Cli {
    /// Color dictionary CSV (name,variant,r,g,b) replacing the built-in one.
    #[arg(long, global = true)]
    dictionary: Option<PathBuf>,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rotate every pixel of a PNG or PPM about the gray axis.
    Rotate {
        input: PathBuf,
        output: PathBuf,
        /// Rotation angle in degrees.
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
    },
    /// Render an image as a dichromat would see it.
    Simulate {
        input: PathBuf,
        output: PathBuf,
        /// protan, deutan or tritan.
        #[arg(long)]
        cvd: CvdType,
    },
    /// Print the dictionary name closest to an sRGB color.
    Name {
        r: u8,
        g: u8,
        b: u8,
        /// Also list this many candidates in total, nearest first.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Print the same JSON the service returns.
        #[arg(long)]
        json: bool,
    },
    #[command(subcommand)]
    Analyze(Analyze),
    #[command(subcommand)]
    Study(Study),
    /// Serve the HTTP API and, optionally, the viewer's static files.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        static_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 4096)]
        max_width: u32,
        #[arg(long, default_value_t = 4096)]
        max_height: u32,
    },
}

#[derive(Debug, Subcommand)]
enum Analyze {
    /// Discriminability of adjacent confusion-line pairs over a full turn.
    ///
    /// Writes `pair_index,theta_deg,jnd` CSV and a per-pair JSON summary.
    /// With --out the CSV goes to that path and the summary next to it with
    /// a .json extension; otherwise CSV to stdout and summary to stderr.
    Fig9 {
        #[arg(long, default_value = "136,136,136", value_parser = parse_rgb)]
        base: SRgb8,
        #[arg(long, default_value = "protan")]
        cvd: CvdType,
        /// ΔE76 between neighbouring colors on the line.
        #[arg(long, default_value_t = 5.0)]
        spacing: f64,
        #[arg(long, default_value_t = 13)]
        count: usize,
        /// Angle grid step in degrees.
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a threshold ellipse to a CSV of x,y chromaticities.
    Ellipse {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum Study {
    /// Run the 64-sequence study with a simulated observer.
    ///
    /// Writes per-sequence thresholds as CSV to --out and the ellipse
    /// summaries next to it with a .json extension.
    Run {
        #[arg(long, default_value = "deutan")]
        cvd: CvdType,
        /// Observer threshold in JND.
        #[arg(long, default_value_t = 1.0)]
        tau_jnd: f64,
        /// Probability of answering at random.
        #[arg(long, default_value_t = 0.0)]
        lapse: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_rgb(s: &str) -> std::result::Result<SRgb8, String> {
    ops::parse_rgb(s).map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Image(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))
}

fn named(path: &Path, e: Error) -> Error {
    Error::Image(format!("{}: {e}", path.display()))
}

fn dictionary(path: Option<&Path>) -> Result<ColorDictionary> {
    path.map_or_else(|| Ok(ColorDictionary::builtin()), load_dictionary)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Rotate { input, output, theta } => {
            let format = FileFormat::from_path(&output)?;
            let out = ops::rotate_encoded(&read(&input)?, theta, format, SizeLimit::NONE).map_err(|e| named(&input, e))?;
            write(&output, out)
        }
        Command::Simulate { input, output, cvd } => {
            let format = FileFormat::from_path(&output)?;
            let out = ops::simulate_encoded(&read(&input)?, cvd, format, SizeLimit::NONE).map_err(|e| named(&input, e))?;
            write(&output, out)
        }
        Command::Name { r, g, b, k, json } => {
            let d = dictionary(cli.dictionary.as_deref())?;
            let report = ops::name_report(&d, SRgb8::new(r, g, b), k)?;
            if json {
                print!("{}", ops::to_json(&report));
            } else if k == 1 {
                println!("{}", report.label);
            } else {
                println!("{}\t{:.3}", report.label, report.distance);
                for c in &report.runner_ups {
                    println!("{}\t{:.3}", c.label, c.distance);
                }
            }
            Ok(())
        }
        Command::Analyze(Analyze::Fig9 { base, cvd, spacing, count, step, out }) => {
            let params = Fig9Params { base, cvd, spacing, count, step_deg: step };
            let curves = ops::fig9_curves(&params)?;
            let csv = ops::fig9_csv(&curves)?;
            let summary = ops::to_json(&ops::fig9_summary(&params, &curves)?);
            match out {
                Some(path) => {
                    write(&path, csv)?;
                    write(&path.with_extension("json"), summary)
                }
                None => {
                    print!("{csv}");
                    eprint!("{summary}");
                    Ok(())
                }
            }
        }
        Command::Analyze(Analyze::Ellipse { input, out }) => {
            let file = std::fs::File::open(&input).map_err(|e| Error::Usage(format!("{}: {e}", input.display())))?;
            let report = ops::ellipse_from_csv(file).map_err(|e| Error::Domain(format!("{}: {e}", input.display())))?;
            let json = ops::to_json(&report);
            match out {
                Some(path) => write(&path, json),
                None => {
                    print!("{json}");
                    Ok(())
                }
            }
        }
        Command::Study(Study::Run { cvd, tau_jnd, lapse, out }) => {
            let observer = SimulatedObserver::new(cvd, Jnd(tau_jnd), lapse)?;
            let result = ops::study(&observer, cli.seed)?;
            write(&out, result.csv)?;
            write(&out.with_extension("json"), result.summary_json)
        }
        Command::Serve { bind, port, static_dir, max_width, max_height } => {
            let cfg = ServiceConfig { bind, port, static_dir, dictionary: cli.dictionary, max_width, max_height };
            cfg.validate()?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(server::serve(cfg))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
