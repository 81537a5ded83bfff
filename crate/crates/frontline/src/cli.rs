use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use merodyn::centers::{enumerate_centers, to_record};
use merodyn::koenigs::trace_s_star;
use merodyn::render::{pyramid_overlays, render_tile_with, render_with_workers, TileKey};
use merodyn::{inversion, wire};

use crate::config::{self, CentersJob, ConfigError, PlaneKind, SStarJob, Settings};
use crate::report::point_report;
use crate::service::{self, ServiceConfig};

/// Largest pyramid level the CLI writes in one go (`4^8` tiles).
const CLI_MAX_ZOOM: u32 = 8;

#[derive(Parser, Debug)]
#[command(
    name = "frontline",
    version,
    about = "Render and explore the two-asymptotic-value family"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render the λ-plane at fixed ρ.
    RenderParam(JobArgs),
    /// Render the z-plane of one map.
    RenderDyn(JobArgs),
    /// Write a tile pyramid {z}/{x}/{y}.png for levels 0..=zoom.
    Tiles(JobArgs),
    /// Enumerate virtual centers as line records.
    Centers(JobArgs),
    /// Trace the tie curve S_* as "re,im" lines.
    Sstar(JobArgs),
    /// Print the point report of one parameter as JSON.
    Classify(JobArgs),
    /// Print I(λ).
    Invert(JobArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

/// Job settings. Every flag can also be given in the `--config` file as
/// `key=value`; flags win.
#[derive(Args, Debug, Default)]
struct JobArgs {
    /// Plain-text key=value file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// "re,im"
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<String>,
    /// "re,im"
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Viewport center "re,im".
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    /// Viewport width in plane units.
    #[arg(long)]
    width: Option<String>,
    /// Image width in pixels (and height unless --height-px is given).
    #[arg(long)]
    px: Option<String>,
    #[arg(long)]
    height_px: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    #[arg(long)]
    cycle_window: Option<String>,
    /// classic or dusk
    #[arg(long)]
    palette: Option<String>,
    /// Comma list of centers, sstar, c0, poles, fixed.
    #[arg(long)]
    overlays: Option<String>,
    /// Tiles: highest pyramid level.
    #[arg(long)]
    zoom: Option<String>,
    /// Tiles: parameter (default) or dynamic.
    #[arg(long)]
    plane: Option<String>,
    /// Centers: "re_min,im_min,re_max,im_max".
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    #[arg(long)]
    max_order: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    k_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    k_max: Option<String>,
    /// S_*: number of samples.
    #[arg(long)]
    n: Option<String>,
    /// Output file or directory; stdout for text jobs when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for rendering.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    bind: String,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Semicolon-separated ρ presets, each "re,im".
    #[arg(
        long,
        default_value = "0.6666666666666666,0;-0.6666666666666666,0",
        allow_hyphen_values = true
    )]
    presets: String,
    /// Bounded render queue length.
    #[arg(long, default_value_t = service::DEFAULT_QUEUE)]
    queue: usize,
    /// Optional on-disk tile cache.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

impl JobArgs {
    fn settings(&self) -> Result<Settings, Failure> {
        let mut s = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
                Settings::parse(&text)?
            }
            None => Settings::new(),
        };
        let flags = [
            ("rho", &self.rho),
            ("lambda", &self.lambda),
            ("center", &self.center),
            ("width", &self.width),
            ("px", &self.px),
            ("height-px", &self.height_px),
            ("max-iter", &self.max_iter),
            ("cycle-window", &self.cycle_window),
            ("palette", &self.palette),
            ("overlays", &self.overlays),
            ("zoom", &self.zoom),
            ("plane", &self.plane),
            ("window", &self.window),
            ("max-order", &self.max_order),
            ("k-min", &self.k_min),
            ("k-max", &self.k_max),
            ("n", &self.n),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                s.set(k, v.clone());
            }
        }
        Ok(s)
    }

    fn out(&self, s: &Settings, default: &str) -> PathBuf {
        self.out
            .clone()
            .or_else(|| s.get("out").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(default))
    }

    fn text_out(&self, s: &Settings) -> Option<PathBuf> {
        self.out.clone().or_else(|| s.get("out").map(PathBuf::from))
    }
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

/// Entry point; exit code 0 on success, 2 on configuration errors and 1 on
/// failures while running.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::RenderParam(a) => render(&a, PlaneKind::Parameter, "param.png"),
        Command::RenderDyn(a) => render(&a, PlaneKind::Dynamic, "dyn.png"),
        Command::Tiles(a) => tiles(&a),
        Command::Centers(a) => centers(&a),
        Command::Sstar(a) => sstar(&a),
        Command::Classify(a) => {
            let s = a.settings()?;
            let rho = s.rho()?;
            let report = point_report(rho, s.lambda(rho)?, &s.budget()?)?;
            let json = serde_json::to_string_pretty(&report).map_err(runtime)?;
            emit(a.text_out(&s).as_deref(), &(json + "\n"))
        }
        Command::Invert(a) => {
            let s = a.settings()?;
            let rho = s.rho()?;
            let image =
                inversion(rho, s.lambda(rho)?).map_err(|e| Failure::Config(e.to_string()))?;
            emit(
                a.text_out(&s).as_deref(),
                &(wire::format_complex(image) + "\n"),
            )
        }
        Command::Serve(a) => serve(a),
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write_file(p, text.as_bytes()),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(runtime),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn render(a: &JobArgs, plane: PlaneKind, default_out: &str) -> Result<(), Failure> {
    let s = a.settings()?;
    let spec = config::render_spec(&s, plane)?;
    let out = a.out(&s, default_out);
    let rendered = render_with_workers(&spec, a.workers).map_err(runtime)?;
    write_file(&out, &rendered.image.encode_png().map_err(runtime)?)?;
    let meta = serde_json::to_vec_pretty(&rendered.meta).map_err(runtime)?;
    write_file(&out.with_extension("json"), &meta)?;
    println!(
        "wrote {} ({}x{}, digest {}, {:.0} ms)",
        out.display(),
        spec.width_px,
        spec.height_px,
        &rendered.meta.digest[..16],
        rendered.meta.wall_ms
    );
    Ok(())
}

fn tiles(a: &JobArgs) -> Result<(), Failure> {
    let s = a.settings()?;
    let plane: PlaneKind = s.get("plane").unwrap_or("parameter").parse()?;
    let base = config::tile_base(&s, plane)?;
    let zoom = config::zoom(&s)?;
    if zoom > CLI_MAX_ZOOM {
        return Err(Failure::Config(format!(
            "zoom above {CLI_MAX_ZOOM} for a full pyramid"
        )));
    }
    let dir = a.out(&s, "tiles");
    let overlays = pyramid_overlays(&base);
    let mut count = 0;
    for z in 0..=zoom {
        let n = 1u64 << z;
        for x in 0..n {
            for y in 0..n {
                let key = TileKey::new(&base, z, x, y);
                let tile = render_tile_with(&key, &base, &overlays, a.workers).map_err(runtime)?;
                let path = dir
                    .join(z.to_string())
                    .join(x.to_string())
                    .join(format!("{y}.png"));
                write_file(&path, &tile.encode_png().map_err(runtime)?)?;
                count += 1;
            }
        }
    }
    let meta = serde_json::json!({ "digest": base.digest(), "spec": base, "max_zoom": zoom });
    write_file(
        &dir.join("meta.json"),
        &serde_json::to_vec_pretty(&meta).map_err(runtime)?,
    )?;
    println!("wrote {count} tiles under {}", dir.display());
    Ok(())
}

fn centers(a: &JobArgs) -> Result<(), Failure> {
    let s = a.settings()?;
    let job = CentersJob::from_settings(&s)?;
    let found = enumerate_centers(job.rho, &job.window, &job.options());
    let text: String = found.centers.iter().map(|c| to_record(c) + "\n").collect();
    emit(a.text_out(&s).as_deref(), &text)?;
    if !found.failures.is_empty() {
        eprintln!("{} seeds did not converge", found.failures.len());
    }
    Ok(())
}

fn sstar(a: &JobArgs) -> Result<(), Failure> {
    let s = a.settings()?;
    let job = SStarJob::from_settings(&s)?;
    let pts = trace_s_star(job.rho, job.n).map_err(runtime)?;
    let text: String = pts
        .iter()
        .map(|z| wire::format_complex(*z) + "\n")
        .collect();
    emit(a.text_out(&s).as_deref(), &text)
}

fn serve(a: ServeArgs) -> Result<(), Failure> {
    let presets = a
        .presets
        .split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| Settings::from_pairs([("rho", p)]).rho())
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = ServiceConfig {
        presets,
        queue: a.queue,
        cache_dir: a.cache_dir,
    };
    let addr = format!("{}:{}", a.bind, a.port);
    let rt = tokio::runtime::Runtime::new().map_err(runtime)?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| Failure::Config(format!("{addr}: {e}")))?;
        eprintln!("listening on http://{addr}");
        axum::serve(listener, service::router(cfg))
            .await
            .map_err(runtime)
    })
}
