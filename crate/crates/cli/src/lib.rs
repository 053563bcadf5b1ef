//! `bpbe` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O error, 3 domain error
//! (dimension mismatch, corrupt stream, bad key file contents, ...).

pub mod image_io;
pub mod keyfile;

use std::fs;
use std::path::{Path, PathBuf};

use bpbe::cipher::{CipherConfig, Step, StepSet};
use bpbe::{codec, jps, keyspace, metrics, BlockSpec, KeyBundle, Mode, RgbImage};
use clap::{Args, Parser, Subcommand, ValueEnum};

use image_io::{read_image, write_atomic, write_image, ImageError};

#[derive(Parser, Debug)]
#[command(
    name = "bpbe",
    version,
    about = "Block-permutation-based image encryption toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derive a key file from a 64-bit hex seed.
    Keygen {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, value_parser = parse_hex_u64)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encrypt an image.
    Encrypt(CipherArgs),
    /// Decrypt an image produced by `encrypt` with the same flags.
    Decrypt(CipherArgs),
    /// Print exact key-space sizes for an image and block size.
    Keyspace {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long)]
        block: usize,
        #[arg(long, value_enum)]
        mode: ModeArg,
    },
    /// Print the 24-bit color entropy of an image.
    Metrics {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Write the hue/saturation histogram as CSV.
    Histogram {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = metrics::DEFAULT_HISTOGRAM_BINS)]
        bins: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the jigsaw-solver attack over several fresh keys.
    Attack {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        block: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Seed for the trial keys (ignored with --keys).
        #[arg(long, value_parser = parse_hex_u64, default_value = "0")]
        seed: u64,
        /// Key file for the first trial; later trials derive from it.
        #[arg(long)]
        keys: Option<PathBuf>,
        /// Crop the input to WIDTHxHEIGHT (top-left) before encrypting.
        #[arg(long, value_parser = parse_dims)]
        crop_to: Option<(usize, usize)>,
        #[arg(long, value_delimiter = ',')]
        steps: Option<Vec<StepArg>>,
        #[arg(long, default_value = "attack.csv")]
        out_csv: PathBuf,
        #[arg(long, default_value = "attack_best.ppm")]
        out_image: PathBuf,
    },
    /// Print the lossless bitrate (bits per pixel); optionally write the stream.
    Compress {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode a stream written by `compress --out`.
    Decompress {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct CipherArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    keys: PathBuf,
    #[arg(long)]
    block: usize,
    /// Drop right/bottom pixels that do not fill a whole block.
    #[arg(long)]
    crop: bool,
    /// Subset of steps to apply (default: all).
    #[arg(long, value_delimiter = ',')]
    steps: Option<Vec<StepArg>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModeArg {
    Conventional,
    Proposed,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Conventional => Mode::Conventional,
            ModeArg::Proposed => Mode::Proposed,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum StepArg {
    Positional,
    RotateFlip,
    Negpos,
    Color,
}

fn step_set(steps: &Option<Vec<StepArg>>) -> StepSet {
    match steps {
        None => StepSet::ALL,
        Some(list) => StepSet::only(
            &list
                .iter()
                .map(|s| match s {
                    StepArg::Positional => Step::Positional,
                    StepArg::RotateFlip => Step::RotateFlip,
                    StepArg::Negpos => Step::NegPos,
                    StepArg::Color => Step::ColorShuffle,
                })
                .collect::<Vec<_>>(),
        ),
    }
}

fn parse_hex_u64(s: &str) -> Result<u64, String> {
    let digits = s.strip_prefix("0x").unwrap_or(s);
    u64::from_str_radix(digits, 16).map_err(|e| format!("invalid hex seed {s:?}: {e}"))
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    Ok((
        w.parse().map_err(|_| format!("bad width in {s:?}"))?,
        h.parse().map_err(|_| format!("bad height in {s:?}"))?,
    ))
}

/// Failure classes, one exit code each.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Domain(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Domain(m) => m,
        }
    }
}

impl From<bpbe::Error> for CliError {
    fn from(e: bpbe::Error) -> Self {
        match e {
            bpbe::Error::InvalidBlockSpec { .. } | bpbe::Error::InvalidArgument(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Domain(e.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<RgbImage, CliError> {
    read_image(path).map_err(|e| match e {
        ImageError::Io(e) => io_err(path)(e),
        ImageError::Format(m) => CliError::Domain(format!("{}: {m}", path.display())),
    })
}

fn save(path: &Path, image: &RgbImage) -> Result<(), CliError> {
    write_image(path, image).map_err(|e| match e {
        ImageError::Io(e) => io_err(path)(e),
        ImageError::Format(m) => CliError::Domain(m),
    })
}

fn save_text(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes()).map_err(io_err(path))
}

fn load_keys(path: &Path) -> Result<KeyBundle, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    keyfile::parse(&text).map_err(|m| CliError::Domain(format!("{}: {m}", path.display())))
}

fn cipher_config(args: &CipherArgs) -> Result<CipherConfig, CliError> {
    Ok(
        CipherConfig::new(BlockSpec::square(args.block)?, load_keys(&args.keys)?)
            .with_steps(step_set(&args.steps))
            .with_crop(args.crop),
    )
}

fn execute(command: Command, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let print = |out: &mut dyn std::io::Write, text: &str| {
        out.write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}")))
    };
    match command {
        Command::Keygen {
            mode,
            seed,
            out: path,
        } => save_text(
            &path,
            &keyfile::to_text(&KeyBundle::from_seed(mode.into(), seed)),
        ),
        Command::Encrypt(args) => {
            let cfg = cipher_config(&args)?;
            save(&args.out, &bpbe::encrypt(&load(&args.input)?, &cfg)?)
        }
        Command::Decrypt(args) => {
            let cfg = cipher_config(&args)?;
            save(&args.out, &bpbe::decrypt(&load(&args.input)?, &cfg)?)
        }
        Command::Keyspace {
            width,
            height,
            block,
            mode,
        } => {
            let blocks = BlockSpec::square(block)?.block_count(width, height);
            let report = keyspace::keyspace(mode.into(), blocks as u64)?;
            print(out, &report.to_string())
        }
        Command::Metrics { input } => {
            let img = load(&input)?;
            print(
                out,
                &format!("metric,value\nentropy24,{:.4}\n", metrics::entropy24(&img)),
            )
        }
        Command::Histogram {
            input,
            bins,
            out: path,
        } => {
            let hist = metrics::hue_sat_histogram(&load(&input)?, bins)?;
            save_text(&path, &hist.to_csv())
        }
        Command::Attack {
            input,
            block,
            trials,
            mode,
            seed,
            keys,
            crop_to,
            steps,
            out_csv,
            out_image,
        } => {
            let mut img = load(&input)?;
            if let Some((w, h)) = crop_to {
                img = img.crop(w, h)?;
            }
            let keys = match keys {
                Some(path) => load_keys(&path)?,
                None => KeyBundle::from_seed(mode.into(), seed),
            };
            let cfg = CipherConfig::new(BlockSpec::square(block)?, keys)
                .with_steps(step_set(&steps))
                .with_crop(true);
            let report = jps::evaluate_attack(&img, &cfg, trials)?;
            let csv = report.to_csv();
            save_text(&out_csv, &csv)?;
            save(&out_image, &report.best_image)?;
            print(out, &csv)
        }
        Command::Compress { input, out: path } => {
            let img = load(&input)?;
            let bytes = codec::encode_image(&img);
            if let Some(path) = path {
                write_atomic(&path, &bytes).map_err(io_err(&path))?;
            }
            print(out, &format!("bpp,{:.4}\n", codec::bitrate(&img)))
        }
        Command::Decompress { input, out: path } => {
            let bytes = fs::read(&input).map_err(io_err(&input))?;
            save(&path, &codec::decode_image(&bytes)?)
        }
    }
}

/// Runs one invocation and returns the process exit code. Diagnostics go
/// to stderr as a single line; results go to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let first = e.to_string();
                    let line = first.lines().next().unwrap_or("usage error");
                    eprintln!("bpbe: {}", line.trim_start_matches("error: "));
                    1
                }
            };
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("bpbe: {}", e.message());
            e.exit_code()
        }
    }
}
