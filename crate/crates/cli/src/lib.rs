//! `arena` subcommands. Each command writes its report to the given writer
//! and returns the process exit code.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use arena_core::{
    apply_action, check_goals, init_mission, load_catalog, render_observation, Observation,
    SceneLibrary,
};
use arena_edh::{
    builtin, evaluate_suite, extract_dir, EdhReport, EdhSuite, Model, ProtocolModel, BUILTIN_MODELS,
};
use arena_metrics::{
    emit_leaderboard, format_percent, format_split_table, msr, per_team, rating_msr_correlation,
    read_records, seen_unseen_split,
};
use arena_orchestrator::{serve, Config, Orchestrator};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "arena",
    version,
    about = "Embodied dialog arena: simulator, orchestrator, evaluation and metrics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the session orchestrator HTTP service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Offline execution-from-dialog-history evaluation.
    Edh {
        #[command(subcommand)]
        command: EdhCommand,
    },
    /// Emit the anonymized daily leaderboard.
    Leaderboard {
        #[arg(long)]
        at: NaiveDate,
        #[arg(long)]
        from: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// One team id per line; defaults to the teams present in the records.
        #[arg(long)]
        roster: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Aggregate metrics over a record store.
    Metrics {
        #[command(subcommand)]
        command: MetricsCommand,
    },
    /// Mission catalog tools.
    Missions {
        #[command(subcommand)]
        command: MissionsCommand,
    },
    /// Print a scene's egocentric raster as text.
    Render {
        scene: String,
        #[command(flatten)]
        library: LibraryArgs,
        #[arg(long, default_value_t = 64)]
        width: u32,
        #[arg(long, default_value_t = 36)]
        height: u32,
    },
}

#[derive(Debug, Args)]
pub struct LibraryArgs {
    #[arg(long, default_value = "fixtures/classes.json")]
    pub classes: PathBuf,
    #[arg(long, default_value = "fixtures/scenes")]
    pub scenes: PathBuf,
}

impl LibraryArgs {
    fn load(&self) -> Result<Arc<SceneLibrary>> {
        let lib = SceneLibrary::load(&self.classes, &self.scenes).with_context(|| {
            format!(
                "loading {} and {}",
                self.classes.display(),
                self.scenes.display()
            )
        })?;
        Ok(Arc::new(lib))
    }
}

#[derive(Debug, Subcommand)]
pub enum EdhCommand {
    /// Extract instances from a directory of session logs.
    Extract {
        logs: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        library: LibraryArgs,
    },
    /// Evaluate a model on a suite.
    Run {
        suite: PathBuf,
        #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
        endpoint: Option<String>,
        #[arg(long)]
        builtin: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        library: LibraryArgs,
    },
    /// Print a saved report as a table.
    Report { report: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum MetricsCommand {
    /// Mission success rate overall, per team and by seen/unseen split.
    Msr {
        #[arg(long)]
        from: PathBuf,
    },
    /// Pearson correlation of per-team average rating and MSR.
    Correlation {
        #[arg(long)]
        from: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum MissionsCommand {
    /// Check every mission and run its scripted solution to completion.
    Validate {
        #[arg(long, default_value = "fixtures/missions")]
        catalog: PathBuf,
        #[command(flatten)]
        library: LibraryArgs,
    },
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<ExitCode> {
    match cli.command {
        Command::Serve { config } => serve_cmd(&config),
        Command::Edh { command } => edh(command, out),
        Command::Leaderboard {
            at,
            from,
            seed,
            roster,
            json,
        } => {
            let records =
                read_records(&from).with_context(|| format!("reading {}", from.display()))?;
            let roster = match roster {
                Some(p) => std::fs::read_to_string(&p)?
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(String::from)
                    .collect(),
                None => per_team(&records)
                    .into_iter()
                    .map(|t| t.team_id)
                    .collect::<Vec<_>>(),
            };
            let board = emit_leaderboard(&records, &roster, at, seed);
            let text = if json {
                board.to_json()
            } else {
                board.to_text()
            };
            write!(out, "{text}")?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Metrics { command } => metrics(command, out),
        Command::Missions {
            command: MissionsCommand::Validate { catalog, library },
        } => validate_missions(&catalog, &*library.load()?, out),
        Command::Render {
            scene,
            library,
            width,
            height,
        } => {
            let lib = library.load()?;
            let Some(state) = lib.instantiate(&scene) else {
                bail!("unknown scene {scene}");
            };
            let state = state?;
            write!(out, "{}", ascii(&render_observation(&state, width, height)))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn serve_cmd(path: &Path) -> Result<ExitCode> {
    let config = Config::load(path)?;
    let bind = config.bind.clone();
    let orch = Arc::new(Orchestrator::from_config(config)?);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&bind)
            .await
            .with_context(|| format!("binding {bind}"))?;
        tracing::info!(addr = %listener.local_addr()?, "serving");
        serve(listener, orch, Duration::from_secs(60)).await?;
        Ok::<_, anyhow::Error>(())
    })?;
    Ok(ExitCode::SUCCESS)
}

fn edh(command: EdhCommand, out: &mut dyn Write) -> Result<ExitCode> {
    match command {
        EdhCommand::Extract {
            logs,
            output,
            library,
        } => {
            let suite = extract_dir(&logs, &*library.load()?)?;
            std::fs::write(&output, suite.to_json())?;
            writeln!(
                out,
                "{} instances -> {}",
                suite.instances.len(),
                output.display()
            )?;
        }
        EdhCommand::Run {
            suite,
            endpoint,
            builtin: name,
            output,
            library,
        } => {
            let lib = library.load()?;
            let suite = EdhSuite::load(&suite)?;
            let model: Arc<dyn Model> = match (endpoint, name) {
                (Some(url), _) => Arc::new(ProtocolModel::remote(&url)),
                (None, Some(name)) => builtin(&name, lib.clone())
                    .with_context(|| format!("builtin models: {}", BUILTIN_MODELS.join(", ")))?,
                (None, None) => unreachable!("clap requires one"),
            };
            let report = evaluate_suite(&suite, model.as_ref(), lib.registry().clone())?;
            if let Some(path) = output {
                std::fs::write(path, report.to_json())?;
            }
            write!(out, "{}", report.to_text())?;
        }
        EdhCommand::Report { report } => {
            let report = EdhReport::from_json(&std::fs::read_to_string(&report)?)?;
            write!(out, "{}", report.to_text())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn metrics(command: MetricsCommand, out: &mut dyn Write) -> Result<ExitCode> {
    match command {
        MetricsCommand::Msr { from } => {
            let records = read_records(&from)?;
            writeln!(
                out,
                "overall {} ({} sessions)",
                format_percent(msr(&records)),
                records.len()
            )?;
            for t in per_team(&records) {
                writeln!(
                    out,
                    "{} {} ({} sessions)",
                    t.team_id,
                    format_percent(t.msr),
                    t.n_sessions
                )?;
            }
            write!(
                out,
                "{}",
                format_split_table(&[("All teams", seen_unseen_split(&records))])
            )?;
        }
        MetricsCommand::Correlation { from } => {
            let records = read_records(&from)?;
            writeln!(out, "{:.4}", rating_msr_correlation(&records)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn validate_missions(catalog: &Path, lib: &SceneLibrary, out: &mut dyn Write) -> Result<ExitCode> {
    let missions = load_catalog(catalog, lib)?;
    let mut failed = 0;
    for m in &missions {
        let mut s = init_mission(m, lib)?;
        let mut done = check_goals(&s, m)?.overall;
        for a in &m.scripted_solution {
            if done {
                break;
            }
            s = apply_action(&s, a).0;
            done = check_goals(&s, m)?.overall;
        }
        writeln!(
            out,
            "{} {}",
            if done { "ok  " } else { "FAIL" },
            m.mission_id
        )?;
        failed += usize::from(!done);
    }
    writeln!(out, "{} missions, {failed} failed", missions.len())?;
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

/// One character per cell: `.` for background, then a letter per visible
/// object with a legend below.
pub fn ascii(obs: &Observation) -> String {
    const GLYPHS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
    let glyph = |k: u16| match k {
        0 => '.',
        k => GLYPHS.get(k as usize - 1).map_or('#', |g| *g as char),
    };
    let mut s = String::new();
    for row in obs.cells.chunks(obs.width as usize) {
        s.extend(row.iter().map(|c| glyph(*c)));
        s.push('\n');
    }
    for (k, v) in obs.visible.iter().enumerate() {
        s.push_str(&format!(
            "{} {} {} ({} cells, {} mm)\n",
            glyph(k as u16 + 1),
            v.id,
            v.class,
            v.cells,
            v.depth_mm
        ));
    }
    s
}
