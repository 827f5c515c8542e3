use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use slaiot_core::codec::{self, Format};
use slaiot_core::matcher::Weights;
use slaiot_core::model::SlaDocument;
use slaiot_core::template::template;
use slaiot_core::vocabulary::{load_registry, RegistrySource, VocabularyRegistry};

use crate::api;
use crate::engine::{self, ExitStatus};

#[derive(Debug, Parser)]
#[command(
    name = "slaiot",
    version,
    about = "Write, check, convert and match IoT SLA documents"
)]
pub struct Cli {
    /// Vocabulary registry file (JSON, or the text `default`).
    #[arg(long, global = true, env = "SLA_IOT_REGISTRY", value_name = "PATH")]
    pub registry: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DiagnosticsFormat {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a `.slaiot` or `.sla.json` document.
    Parse {
        file: PathBuf,
        /// Input format; inferred from the extension by default.
        #[arg(long)]
        from: Option<Format>,
        /// `json` prints the diagnostics array to stdout instead.
        #[arg(long, value_enum, default_value = "text")]
        diagnostics: DiagnosticsFormat,
    },
    /// Rewrite a document canonically, in either format.
    Convert {
        file: PathBuf,
        #[arg(long)]
        from: Option<Format>,
        #[arg(long)]
        to: Format,
        /// Output path, or `-` for stdout. Defaults to the input name with
        /// the target extension.
        #[arg(long)]
        out: Option<String>,
    },
    /// Rank offers against a request and print the reports as JSON.
    Match {
        request: PathBuf,
        #[arg(required = true)]
        offers: Vec<PathBuf>,
        /// Lowest acceptable score for the top offer.
        #[arg(long, default_value_t = 0.0)]
        min_score: f64,
        /// Weights of high, medium and low priority constraints.
        #[arg(long, default_value = "3,2,1")]
        weights: Weights,
    },
    /// Print a request skeleton with placeholder SLOs.
    Template {
        #[arg(long)]
        application: Option<String>,
        /// Activity names, comma-separated or repeated.
        #[arg(long, value_delimiter = ',')]
        activities: Vec<String>,
    },
    /// Print the vocabulary registry.
    Vocabulary,
    /// Serve the wizard and the JSON API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory of wizard assets; a built-in page is served otherwise.
        #[arg(long)]
        assets: Option<PathBuf>,
    },
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn fail(&mut self, status: ExitStatus, message: impl std::fmt::Display) -> ExitStatus {
        let _ = writeln!(self.err, "slaiot: {message}");
        status
    }
}

fn registry(path: Option<&Path>) -> Result<VocabularyRegistry, (ExitStatus, String)> {
    let source = match path {
        None => RegistrySource::Default,
        Some(p) => RegistrySource::parse(
            &fs::read_to_string(p)
                .map_err(|e| (ExitStatus::Io, format!("{}: {e}", p.display())))?,
        ),
    };
    load_registry(source).map_err(|e| (ExitStatus::Usage, format!("registry: {e}")))
}

fn read(path: &Path) -> Result<String, (ExitStatus, String)> {
    fs::read_to_string(path).map_err(|e| (ExitStatus::Io, format!("{}: {e}", path.display())))
}

fn format_of(path: &Path, given: Option<Format>) -> Result<Format, (ExitStatus, String)> {
    given.or_else(|| Format::from_path(path)).ok_or_else(|| {
        (
            ExitStatus::Usage,
            format!(
                "{}: cannot tell the format from the extension; pass --from",
                path.display()
            ),
        )
    })
}

/// Reads and validates a document, printing its diagnostics.
fn load(
    path: &Path,
    reg: &VocabularyRegistry,
    io: &mut Io<'_>,
) -> Result<SlaDocument, (ExitStatus, String)> {
    let text = read(path)?;
    let format = format_of(path, None)?;
    let name = path.display().to_string();
    match codec::parse(&text, format, reg) {
        Ok(v) => {
            let _ = io
                .err
                .write_all(engine::diagnostics_text(&name, &v.warnings).as_bytes());
            Ok(v.document)
        }
        Err(d) => {
            let _ = io
                .err
                .write_all(engine::diagnostics_text(&name, &d.0).as_bytes());
            Err((ExitStatus::Failure, format!("{name} is not a valid SLA")))
        }
    }
}

/// Runs a command other than `serve` to completion.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus {
    let mut io = Io { out, err };
    let reg = match registry(cli.registry.as_deref()) {
        Ok(r) => r,
        Err((status, msg)) => return io.fail(status, msg),
    };
    let result = match cli.command {
        Command::Parse {
            file,
            from,
            diagnostics,
        } => parse(&file, from, diagnostics, &reg, &mut io),
        Command::Convert {
            file,
            from,
            to,
            out,
        } => convert(&file, from, to, out, &reg, &mut io),
        Command::Match {
            request,
            offers,
            min_score,
            weights,
        } => matches(&request, &offers, min_score, &weights, &reg, &mut io),
        Command::Template {
            application,
            activities,
        } => template_cmd(application.as_deref(), &activities, &reg, &mut io),
        Command::Vocabulary => io
            .out
            .write_all(reg.to_json().as_bytes())
            .map(|_| ExitStatus::Success)
            .map_err(|e| (ExitStatus::Io, e.to_string())),
        Command::Serve { port, host, assets } => serve(&host, port, assets, reg, &mut io),
    };
    match result {
        Ok(status) => status,
        Err((status, msg)) => io.fail(status, msg),
    }
}

type CmdResult = Result<ExitStatus, (ExitStatus, String)>;

fn io_err(e: io::Error) -> (ExitStatus, String) {
    (ExitStatus::Io, e.to_string())
}

fn parse(
    file: &Path,
    from: Option<Format>,
    diagnostics: DiagnosticsFormat,
    reg: &VocabularyRegistry,
    io: &mut Io<'_>,
) -> CmdResult {
    let text = read(file)?;
    let format = format_of(file, from)?;
    let found = engine::validate(&text, format, reg);
    match diagnostics {
        DiagnosticsFormat::Json => io
            .out
            .write_all(engine::diagnostics_json(&found).as_bytes()),
        DiagnosticsFormat::Text => io
            .err
            .write_all(engine::diagnostics_text(&file.display().to_string(), &found).as_bytes()),
    }
    .map_err(io_err)?;
    Ok(if found.iter().any(|d| d.is_error()) {
        ExitStatus::Failure
    } else {
        ExitStatus::Success
    })
}

/// `dir/name.slaiot` becomes `dir/name.sla.json` and the other way round.
fn default_output(input: &Path, to: Format) -> PathBuf {
    let name = input
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = name
        .strip_suffix(".sla.json")
        .or_else(|| name.strip_suffix(".json"))
        .or_else(|| name.strip_suffix(".slaiot"))
        .unwrap_or(&name);
    input.with_file_name(format!("{stem}.{}", to.extension()))
}

fn convert(
    file: &Path,
    from: Option<Format>,
    to: Format,
    out: Option<String>,
    reg: &VocabularyRegistry,
    io: &mut Io<'_>,
) -> CmdResult {
    let text = read(file)?;
    let from = format_of(file, from)?;
    let printed = match codec::convert(&text, from, to, reg) {
        Ok(p) => p,
        Err(d) => {
            let name = file.display().to_string();
            io.err
                .write_all(engine::diagnostics_text(&name, &d.0).as_bytes())
                .map_err(io_err)?;
            return Ok(ExitStatus::Failure);
        }
    };
    match out.as_deref() {
        Some("-") => io.out.write_all(printed.as_bytes()).map_err(io_err)?,
        Some(path) => {
            fs::write(path, printed).map_err(|e| (ExitStatus::Io, format!("{path}: {e}")))?
        }
        None => {
            let path = default_output(file, to);
            fs::write(&path, printed)
                .map_err(|e| (ExitStatus::Io, format!("{}: {e}", path.display())))?
        }
    }
    Ok(ExitStatus::Success)
}

fn matches(
    request: &Path,
    offers: &[PathBuf],
    min_score: f64,
    weights: &Weights,
    reg: &VocabularyRegistry,
    io: &mut Io<'_>,
) -> CmdResult {
    if !min_score.is_finite() {
        return Err((
            ExitStatus::Usage,
            "--min-score must be a finite number".into(),
        ));
    }
    let request = load(request, reg, io)?;
    let offers = offers
        .iter()
        .map(|p| load(p, reg, io))
        .collect::<Result<Vec<_>, _>>()?;
    let (reports, json) = engine::rank(&request, &offers, reg, weights)
        .map_err(|e| (ExitStatus::Usage, e.to_string()))?;
    io.out.write_all(json.as_bytes()).map_err(io_err)?;
    Ok(if engine::accepted(&reports, min_score) {
        ExitStatus::Success
    } else {
        ExitStatus::Failure
    })
}

fn template_cmd(
    application: Option<&str>,
    activities: &[String],
    reg: &VocabularyRegistry,
    io: &mut Io<'_>,
) -> CmdResult {
    let activities: Vec<String> = activities
        .iter()
        .map(|a| a.trim().to_string())
        .filter(|a| !a.is_empty())
        .collect();
    match template(application, &activities, reg) {
        Ok(t) => {
            io.err
                .write_all(engine::diagnostics_text("template", &t.warnings).as_bytes())
                .map_err(io_err)?;
            io.out.write_all(t.text.as_bytes()).map_err(io_err)?;
            Ok(ExitStatus::Success)
        }
        Err(d) => {
            io.err
                .write_all(engine::diagnostics_text("template", &d.0).as_bytes())
                .map_err(io_err)?;
            Ok(ExitStatus::Failure)
        }
    }
}

fn serve(
    host: &str,
    port: u16,
    assets: Option<PathBuf>,
    reg: VocabularyRegistry,
    io: &mut Io<'_>,
) -> CmdResult {
    let listener = std::net::TcpListener::bind((host, port)).map_err(|e| {
        (
            ExitStatus::Io,
            format!("cannot listen on {host}:{port}: {e}"),
        )
    })?;
    listener.set_nonblocking(true).map_err(io_err)?;
    let addr: SocketAddr = listener.local_addr().map_err(io_err)?;
    writeln!(io.err, "listening on http://{addr}").map_err(io_err)?;
    io.err.flush().map_err(io_err)?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(io_err)?;
    let app = api::router(Arc::new(reg), assets);
    runtime
        .block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener)?;
            axum::serve(listener, app).await
        })
        .map_err(io_err)?;
    Ok(ExitStatus::Success)
}
