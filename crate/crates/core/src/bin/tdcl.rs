use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tdcurriculum::corpus::SynthSpec;
use tdcurriculum::io;
use tdcurriculum::pipeline::{self, ExperimentConfig, SchedulerKind, ScoreInputs, TeacherMetric};
use tdcurriculum::{Error, Result};

/// Transfer-teacher curriculum learning from training dynamics.
#[derive(Parser)]
#[command(name = "tdcl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic corpus as JSONL splits.
    Synth {
        /// JSON synthetic-corpus spec; defaults apply to missing fields.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        train_size: Option<usize>,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a teacher (or compute a heuristic) and write difficulty scores.
    Teacher {
        #[command(flatten)]
        common: Common,
        /// td, cross-review, length, rarity or ppl.
        #[arg(long, default_value = "td")]
        metric: TeacherMetric,
        #[arg(long)]
        teacher_epochs: Option<usize>,
        #[arg(long)]
        num_subsets: Option<usize>,
        #[arg(long)]
        ngram_order: Option<usize>,
    },
    /// Train students under a scheduler for every seed.
    Student {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        curriculum: CurriculumArgs,
        #[arg(long)]
        scheduler: Option<SchedulerKind>,
        /// Difficulty scores file.
        #[arg(long)]
        scores: Option<PathBuf>,
        /// Variability scores used as weights and tie-breaks.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Teacher once, then every listed scheduler, then comparisons.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        curriculum: CurriculumArgs,
        #[arg(long)]
        teacher_epochs: Option<usize>,
        /// Comma-separated scheduler names.
        #[arg(long, value_delimiter = ',', default_value = "random,corr_anneal,conf+var_comp")]
        schedulers: Vec<SchedulerKind>,
    },
    /// Compare two student run directories.
    Compare {
        run_a: PathBuf,
        run_b: PathBuf,
        #[arg(long, default_value_t = tdcurriculum::analysis::DEFAULT_ROUNDS)]
        rounds: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Data map (CSV and SVG) of a teacher's statistics.
    Datamap {
        #[arg(long)]
        td_stats: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Spearman correlations between score files.
    Correlate {
        #[arg(required = true, num_args = 2..)]
        scores: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated seeds, replacing the config's list.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct CurriculumArgs {
    #[arg(long)]
    c0: Option<f64>,
    /// Curriculum length in optimizer steps.
    #[arg(long)]
    duration: Option<usize>,
    /// Random-baseline run log or student directory for the curriculum length.
    #[arg(long)]
    baseline: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(s) = &self.seeds {
            cfg.seeds = s.clone();
        }
        if let Some(v) = self.epochs {
            cfg.train.epochs = v;
        }
        if let Some(v) = self.batch_size {
            cfg.train.batch_size = v;
        }
        if let Some(v) = self.learning_rate {
            cfg.train.learning_rate = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        Ok(cfg)
    }
}

impl CurriculumArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(v) = self.c0 {
            cfg.curriculum.c0 = v;
        }
        if let Some(v) = self.duration {
            cfg.curriculum.duration = Some(v);
        }
        if let Some(v) = &self.baseline {
            cfg.curriculum.baseline = Some(v.clone());
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            spec,
            seed,
            train_size,
            noise,
            out,
        } => {
            let mut s: SynthSpec = match spec {
                Some(p) => io::read_json(&p)?,
                None => SynthSpec::default(),
            };
            if let Some(v) = seed {
                s.seed = v;
            }
            if let Some(v) = train_size {
                s.train_size = v;
            }
            if let Some(v) = noise {
                s.label_noise_fraction = v;
            }
            pipeline::cmd_synth(&s, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Teacher {
            common,
            metric,
            teacher_epochs,
            num_subsets,
            ngram_order,
        } => {
            let mut cfg = common.load()?;
            if teacher_epochs.is_some() {
                cfg.teacher.epochs = teacher_epochs;
            }
            if let Some(v) = num_subsets {
                cfg.cross_review.num_subsets = v;
            }
            if let Some(v) = ngram_order {
                cfg.ngram.order = v;
            }
            let outcome = pipeline::cmd_teacher(&cfg, metric, &common.out)?;
            for p in outcome.td_stats.iter().chain(&outcome.scores) {
                println!("wrote {}", p.display());
            }
        }
        Command::Student {
            common,
            curriculum,
            scheduler,
            scores,
            weights,
        } => {
            let mut cfg = common.load()?;
            curriculum.apply(&mut cfg);
            if let Some(k) = scheduler {
                cfg.scheduler = k;
            }
            let summary = pipeline::cmd_student(&cfg, &ScoreInputs { scores, weights }, &common.out)?;
            for (split, acc) in &summary.accuracy {
                println!("{split}: {:.2} ± {:.2}", 100.0 * acc.mean, 100.0 * acc.std);
            }
        }
        Command::Sweep {
            common,
            curriculum,
            teacher_epochs,
            schedulers,
        } => {
            let mut cfg = common.load()?;
            curriculum.apply(&mut cfg);
            if teacher_epochs.is_some() {
                cfg.teacher.epochs = teacher_epochs;
            }
            let report = pipeline::cmd_sweep(&cfg, &schedulers, &common.out)?;
            print!("{}", report.table());
        }
        Command::Compare {
            run_a,
            run_b,
            rounds,
            out,
        } => {
            let report = pipeline::cmd_compare(&run_a, &run_b, rounds)?;
            io::create_dir(&out)?;
            pipeline::write_compare(&report, &out)?;
            print!("{}", report.table());
        }
        Command::Datamap { td_stats, out } => {
            let (csv, svg) = pipeline::cmd_datamap(&td_stats, &out)?;
            println!("wrote {}\nwrote {}", csv.display(), svg.display());
        }
        Command::Correlate { scores, out } => {
            let report = pipeline::cmd_correlate(&scores, &out)?;
            print!("{}", report.table());
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    if err.is_validation() {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
