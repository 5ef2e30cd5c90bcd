use clap::{Parser, Subcommand};
use psight_cli::api::{router, AppState};
use psight_cli::commands::{self, id_list, TrainOptions};
use psight_cli::ApiError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "psight", version, about = "Perceptual pattern analysis for SVG charts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Identify and score the perceptual patterns of a chart.
    Assess {
        #[arg(long)]
        svg: PathBuf,
        #[arg(long, env = "PSIGHT_MODEL")]
        model: PathBuf,
        /// Comma separated element ids to leave out of the perception scope.
        #[arg(long, default_value = "")]
        scope_exclude: String,
        /// Write the report here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Train a model on an annotation corpus.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Model config JSON; missing fields take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Train on this leading fraction of the charts only.
        #[arg(long)]
        train_fraction: Option<f64>,
    },
    /// Score model groups against the corpus annotations.
    Evaluate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, env = "PSIGHT_MODEL")]
        model: PathBuf,
        #[arg(long)]
        json: PathBuf,
        /// Score only this trailing fraction of the charts.
        #[arg(long)]
        test_fraction: Option<f64>,
    },
    /// Ranked design suggestions for raising a group's salience.
    Suggest {
        #[arg(long)]
        svg: PathBuf,
        #[arg(long, env = "PSIGHT_MODEL")]
        model: PathBuf,
        /// Comma separated element ids.
        #[arg(long)]
        group: String,
        #[arg(long, default_value = "")]
        scope_exclude: String,
        #[arg(long)]
        json: PathBuf,
    },
    /// Generate a planted-grouping synthetic corpus.
    GenCorpus {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "PSIGHT_MODEL")]
        model: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Static UI assets served at `/`.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        /// Write every revision and report under this directory.
        #[arg(long)]
        session_dir: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), ApiError> {
    match cli.command {
        Command::Assess {
            svg,
            model,
            scope_exclude,
            json,
        } => {
            let report = commands::assess_file(&svg, &model, &id_list(&scope_exclude))?;
            match json {
                Some(path) => commands::write_text(&path, &report),
                None => {
                    print!("{report}");
                    Ok(())
                }
            }
        }
        Command::Train {
            corpus,
            out,
            config,
            seed,
            train_fraction,
        } => {
            let outcome = commands::train_command(&TrainOptions {
                corpus,
                out: out.clone(),
                config,
                seed,
                train_fraction,
            })?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("wrote {} and {}", out.display(), outcome.loss_csv.display());
            Ok(())
        }
        Command::Evaluate {
            corpus,
            model,
            json,
            test_fraction,
        } => commands::write_text(&json, &commands::evaluate_command(&corpus, &model, test_fraction)?),
        Command::Suggest {
            svg,
            model,
            group,
            scope_exclude,
            json,
        } => {
            let text = commands::suggest_command(&svg, &model, &id_list(&group), &id_list(&scope_exclude))?;
            commands::write_text(&json, &text)
        }
        Command::GenCorpus { config, out } => {
            let path = commands::gen_corpus_command(&config, &out)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        Command::Serve {
            model,
            port,
            host,
            static_dir,
            session_dir,
        } => {
            let model = commands::open_model(&model)?;
            let app = router(AppState::new(model, session_dir), static_dir);
            let rt = tokio::runtime::Runtime::new().map_err(|e| ApiError::internal(e.to_string()))?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .map_err(|e| ApiError::internal(format!("cannot bind {host}:{port}")).with_detail(e.to_string()))?;
                eprintln!("listening on http://{}", listener.local_addr().map_err(|e| ApiError::internal(e.to_string()))?);
                axum::serve(listener, app).await.map_err(|e| ApiError::internal(e.to_string()))
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code.exit_code() as u8)
        }
    }
}
