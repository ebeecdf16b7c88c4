//! `floodnet generate|fit|predict|compare|bench`
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use floodnet::analysis::{
    cmd_bench, cmd_compare, cmd_fit, cmd_generate, cmd_predict, FitOptions, ModelKind, SplitSpec,
};
use floodnet::fit::{FitConfig, GainConstraint, GainOrientation};
use floodnet::rnn::RnnTrainConfig;
use floodnet::scenario::PRESETS;
use floodnet::{Error, Result};

#[derive(Parser)]
#[command(
    name = "floodnet",
    version,
    about = "Waterflood connectivity: CRM and linear RNN models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Data CSV (`time,INJ:…,PRD:…[,BHP:…]`).
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Model file: written by `fit` (overrides the default name), read by `predict`.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Kind::Crmp)]
    kind: Kind,
    /// Train/test split: a step index (`90`) or a fraction (`0.75`).
    #[arg(long, global = true, default_value = "0.75")]
    split: String,
    /// Network training epochs.
    #[arg(long, global = true, default_value_t = 500)]
    epochs: usize,
    /// Network lookback TS; each window spans TS + 1 steps.
    #[arg(long, global = true, default_value_t = 10)]
    window: usize,
    /// CRM multi-start count.
    #[arg(long, global = true, default_value_t = 8)]
    starts: usize,
    /// Fit seed; for `generate`, replaces the preset's noise seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Scenario preset (`generate`; restricts `bench` to one preset).
    #[arg(long, global = true)]
    preset: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Constraint::Eq)]
    gain_constraint: Constraint,
    /// Gains sharing the constraint: each injector's row, or each producer's column.
    #[arg(long, global = true, value_enum, default_value_t = Orientation::Injector)]
    gain_orientation: Orientation,
    /// Fit productivity indices when the data carry BHP.
    #[arg(long, global = true, default_value_t = true, action = clap::ArgAction::Set)]
    include_press: bool,
    /// `predict`: half-open step range START:END.
    #[arg(long, global = true)]
    range: Option<String>,
    /// `bench`: repeats per timing (median reported).
    #[arg(long, global = true, default_value_t = 5)]
    repeats: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Write a preset scenario's data CSV and resolved spec JSON.
    Generate,
    /// Fit a model on the training segment; write the model and a report.
    Fit,
    /// Predict rates for a step range with a saved model.
    Predict,
    /// Fit CRMP and the RNN, score both, write a report and a tidy CSV.
    Compare,
    /// Median fit/predict wall times for CRMP and the RNN on the presets.
    Bench,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Crmt,
    Crmp,
    Crmip,
    Rnn,
}

#[derive(Clone, Copy, ValueEnum)]
enum Constraint {
    Eq,
    Ineq,
}

#[derive(Clone, Copy, ValueEnum)]
enum Orientation {
    Injector,
    Producer,
}

impl Cli {
    fn options(&self) -> Result<FitOptions> {
        let seed = self.seed.unwrap_or(0);
        let opts = FitOptions {
            split: self.split.parse::<SplitSpec>()?,
            fit: FitConfig {
                n_starts: self.starts,
                seed,
                gain_constraint: match self.gain_constraint {
                    Constraint::Eq => GainConstraint::Equality,
                    Constraint::Ineq => GainConstraint::Inequality,
                },
                gain_orientation: match self.gain_orientation {
                    Orientation::Injector => GainOrientation::PerInjector,
                    Orientation::Producer => GainOrientation::PerProducer,
                },
                include_press: self.include_press,
                ..FitConfig::default()
            },
            rnn: RnnTrainConfig {
                epochs: self.epochs,
                window: self.window,
                seed,
                ..RnnTrainConfig::default()
            },
        };
        opts.fit.check().map_err(usage)?;
        opts.rnn.check().map_err(usage)?;
        Ok(opts)
    }

    fn data(&self) -> Result<&PathBuf> {
        self.data
            .as_ref()
            .ok_or_else(|| Error::Usage("--data is required".into()))
    }

    fn kind(&self) -> ModelKind {
        match self.kind {
            Kind::Crmt => ModelKind::Crmt,
            Kind::Crmp => ModelKind::Crmp,
            Kind::Crmip => ModelKind::Crmip,
            Kind::Rnn => ModelKind::Rnn,
        }
    }
}

fn usage(e: Error) -> Error {
    Error::Usage(e.to_string())
}

fn run(cli: &Cli) -> Result<()> {
    match cli.command {
        Command::Generate => {
            let preset = cli.preset.as_deref().unwrap_or("streak");
            let out = cmd_generate(preset, cli.seed, &cli.out)?;
            println!("wrote {} and {}", out.data.display(), out.spec.display());
        }
        Command::Fit => {
            let opts = cli.options()?;
            let (model, report, summary) = cmd_fit(cli.kind(), cli.data()?, &opts, &cli.out, cli.model.as_deref())?;
            println!(
                "{} fit on steps [0, {}): final loss {:.6e}, {:.4} s",
                summary.model_kind, summary.split_index, summary.final_loss, summary.wall_time_s
            );
            if let Some(r) = summary.constraint_residual {
                println!("gain constraint residual {r:.3e}");
            }
            println!("wrote {} and {}", model.display(), report.display());
        }
        Command::Predict => {
            let model = cli
                .model
                .as_ref()
                .ok_or_else(|| Error::Usage("--model is required".into()))?;
            let path = cmd_predict(model, cli.data()?, cli.range.as_deref(), &cli.out)?;
            println!("wrote {}", path.display());
        }
        Command::Compare => {
            let opts = cli.options()?;
            let (cmp, report, tidy) = cmd_compare(cli.data()?, &opts, &cli.out)?;
            print!("{}", cmp.report.table());
            println!("wrote {} and {}", report.display(), tidy.display());
        }
        Command::Bench => {
            let opts = cli.options()?;
            let presets: Vec<String> = match &cli.preset {
                Some(p) => vec![p.clone()],
                None => PRESETS.iter().map(|s| s.to_string()).collect(),
            };
            let (report, path) = cmd_bench(&presets, cli.repeats, &opts, &cli.out)?;
            print!("{}", report.table());
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
