use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cubios::games::GameKind;
use cubios::geometry::CoreKind;
use cubios::session::{self, parse_script, CheatPolicy, SessionConfig, SessionError};
use cubios::surface::write_net_ppm;
use cubios::verify::{run_suite, Suite};

/// Tools for the simulated cube: headless sessions, self-checks, net
/// renders and the live play server.
#[derive(Parser)]
#[command(name = "cubios", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scripted session headless and print its digest.
    Sim(SimArgs),
    /// Re-run a session log and print its digest.
    Replay {
        #[arg(long)]
        log: PathBuf,
    },
    /// Run a built-in invariant suite.
    Verify {
        #[arg(long)]
        suite: Suite,
        /// Randomized trials; each suite has its own default.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Replay a log to a tick and write the cube net as PPM.
    Render {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value_t = 0)]
        at: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the play protocol over WebSocket plus static UI assets.
    #[cfg(feature = "serve")]
    Serve(ServeArgs),
}

#[derive(Args)]
struct GameArgs {
    #[arg(long)]
    game: GameKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// accept, forfeit or penalize:POINTS[:TICKS]
    #[arg(long, default_value_t = CheatPolicy::Accept)]
    policy: CheatPolicy,
    #[arg(long, default_value_t = 0.0)]
    loss_rate: f64,
    /// Word list for wordmatch; CUBIOS_DICT takes precedence.
    #[arg(long)]
    dictionary: Option<PathBuf>,
    /// Play with no core, so turns are rejected.
    #[arg(long)]
    no_core: bool,
}

impl GameArgs {
    fn config(&self) -> Result<SessionConfig, String> {
        if !(0.0..=1.0).contains(&self.loss_rate) {
            return Err(format!("loss rate {} is outside [0, 1]", self.loss_rate));
        }
        let dictionary = std::env::var_os("CUBIOS_DICT")
            .map(PathBuf::from)
            .or_else(|| self.dictionary.clone());
        let mut c = SessionConfig::new(self.game, self.seed)
            .with_policy(self.policy)
            .with_loss_rate(self.loss_rate);
        if self.no_core {
            c = c.with_core(CoreKind::None);
        }
        c.dictionary_path = dictionary.map(|p| p.to_string_lossy().into_owned());
        Ok(c)
    }
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    game: GameArgs,
    /// Event JSONL; omit for an empty session.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Where to write the session log.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[cfg(feature = "serve")]
#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, default_value_t = 8023)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Directory of built UI assets; a placeholder page is served without it.
    #[arg(long)]
    assets: Option<PathBuf>,
    #[arg(long, default_value_t = cubios::server::TICK_MS, hide = true)]
    tick_ms: u64,
}

enum Failure {
    Io(String),
    Illegal(String),
}

impl From<SessionError> for Failure {
    fn from(e: SessionError) -> Failure {
        match e {
            SessionError::IllegalEvent { .. } => Failure::Illegal(e.to_string()),
            _ => Failure::Io(e.to_string()),
        }
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: &PathBuf, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn sim(args: SimArgs) -> Result<(), Failure> {
    let config = args.game.config().map_err(Failure::Io)?;
    let events = match &args.script {
        Some(p) => {
            parse_script(&read(p)?).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?
        }
        None => Vec::new(),
    };
    let (digest, log) = session::run(config, &events)?;
    if let Some(out) = &args.out {
        write(out, log.as_bytes())?;
    }
    println!("{}", digest.to_json());
    Ok(())
}

fn verify(suite: Suite, budget: Option<u64>) -> Result<(), Failure> {
    match run_suite(suite, budget) {
        Ok(checks) => {
            for c in &checks {
                println!("{c}");
            }
            if suite == Suite::FullEnum {
                println!("{}", cubios::geometry::FULL_STATE_COUNT);
            }
            Ok(())
        }
        Err(f) => {
            println!("{f}");
            Err(Failure::Io(format!("suite {suite} failed")))
        }
    }
}

fn render(log: &PathBuf, at: u64, out: &PathBuf) -> Result<(), Failure> {
    let s = session::state_at(&read(log)?, at).map_err(|e| Failure::Io(e.to_string()))?;
    write(out, &write_net_ppm(&s.field()))
}

#[cfg(feature = "serve")]
fn serve(args: ServeArgs) -> Result<(), Failure> {
    let config = args.game.config().map_err(Failure::Io)?;
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .init();
    let opts = cubios::server::ServeOptions {
        config,
        assets: args.assets,
        tick_ms: args.tick_ms,
    };
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port))
            .await
            .map_err(|e| Failure::Io(format!("bind {}:{}: {e}", args.host, args.port)))?;
        cubios::server::run(listener, opts)
            .await
            .map_err(|e| Failure::Io(e.to_string()))
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Sim(a) => sim(a),
        Command::Replay { log } => read(&log).and_then(|text| {
            println!("{}", session::replay(&text)?.to_json());
            Ok(())
        }),
        Command::Verify { suite, budget } => verify(suite, budget),
        Command::Render { log, at, out } => render(&log, at, &out),
        #[cfg(feature = "serve")]
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Illegal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
