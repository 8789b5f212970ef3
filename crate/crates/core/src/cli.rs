//! Command-line front end.
//!
//! Exit status: 0 when the structures are equivalent or Duplicator wins, 1 when they are
//! separated or Spoiler wins, 2 on usage or input errors.

use std::io::{BufRead, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::backforth::BackForth;
use crate::fo::distinguishing_sentence;
use crate::game::{GamePosition, GameSolver, Move, Player, Side};
use crate::server::{self, ServerConfig};
use crate::structures::{check_signatures, parse_structure, Structure};

pub const EXIT_EQUIVALENT: i32 = 0;
pub const EXIT_SEPARATED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "efgame", version, about = "Ehrenfeucht-Fraisse games on finite structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide n-equivalence and print a separating sentence when it fails.
    Check(PairArgs),
    /// Solve the n-round game and print the winner with the principal variation.
    Solve(PairArgs),
    /// Print only the separating sentence, if any.
    Distinguish(PairArgs),
    /// Play the game against the engine in the terminal.
    Play {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum)]
        role: Role,
    },
    /// Run the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct PairArgs {
    left: PathBuf,
    right: PathBuf,
    #[arg(long)]
    rounds: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Role {
    Spoiler,
    Duplicator,
}

impl From<Role> for Player {
    fn from(r: Role) -> Self {
        match r {
            Role::Spoiler => Player::Spoiler,
            Role::Duplicator => Player::Duplicator,
        }
    }
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, env = "EFGAME_HOST", default_value = "127.0.0.1")]
    host: IpAddr,
    #[arg(long, env = "EFGAME_PORT", default_value_t = 8080)]
    port: u16,
    /// Largest structure accepted by the API.
    #[arg(long, env = "EFGAME_MAX_SIZE", default_value_t = 12)]
    max_size: usize,
    #[arg(long, env = "EFGAME_MAX_ROUNDS", default_value_t = 6)]
    max_rounds: usize,
    /// Idle time after which a session is dropped.
    #[arg(long, env = "EFGAME_TTL_SECS", default_value_t = 1800)]
    ttl_secs: u64,
    /// Longest separating sentence included in responses.
    #[arg(long, env = "EFGAME_MAX_SENTENCE_BYTES", default_value_t = 1 << 20)]
    max_sentence_bytes: usize,
    /// Directory of built client assets served at `/`.
    #[arg(long, env = "EFGAME_UI_DIR")]
    ui_dir: Option<PathBuf>,
}

struct Io<'a> {
    input: &'a mut dyn BufRead,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

/// Runs the command line `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_EQUIVALENT };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let mut io = Io { input, out, err };
    let result = match cli.command {
        Command::Check(pair) => cmd_check(&pair, &mut io),
        Command::Solve(pair) => cmd_solve(&pair, &mut io),
        Command::Distinguish(pair) => cmd_distinguish(&pair, &mut io),
        Command::Play { pair, role } => cmd_play(&pair, role.into(), &mut io),
        Command::Serve(args) => cmd_serve(&args, &mut io),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(io.err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

type CmdResult = Result<i32, String>;

fn load(path: &Path) -> Result<Structure, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_structure(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_pair(pair: &PairArgs) -> Result<(Structure, Structure), String> {
    let (a, b) = (load(&pair.left)?, load(&pair.right)?);
    check_signatures(&a, &b).map_err(|e| format!("{e}: {} and {}", pair.left.display(), pair.right.display()))?;
    Ok((a, b))
}

fn io_err(e: std::io::Error) -> String {
    format!("output failed: {e}")
}

fn cmd_check(pair: &PairArgs, io: &mut Io<'_>) -> CmdResult {
    let (a, b) = load_pair(pair)?;
    let level = BackForth::new(&a, &b)
        .map_err(|e| e.to_string())?
        .separation_level(pair.rounds);
    match level {
        None => {
            writeln!(io.out, "equivalent").map_err(io_err)?;
            Ok(EXIT_EQUIVALENT)
        }
        Some(m) => {
            let phi = distinguishing_sentence(&a, &b, pair.rounds)
                .map_err(|e| e.to_string())?
                .expect("separated structures have a witness");
            writeln!(io.out, "inequivalent at level {m}\n{phi}").map_err(io_err)?;
            Ok(EXIT_SEPARATED)
        }
    }
}

fn cmd_solve(pair: &PairArgs, io: &mut Io<'_>) -> CmdResult {
    let (a, b) = load_pair(pair)?;
    let start = GamePosition::new(a, b, pair.rounds).map_err(|e| e.to_string())?;
    let outcome = GameSolver::for_position(&start).solve(&start);
    writeln!(io.out, "winner: {}", outcome.winner).map_err(io_err)?;
    for (round, plies) in outcome.principal_variation.chunks(2).enumerate() {
        let line: Vec<String> = plies.iter().map(|p| format!("{} {}", p.player, p.mv)).collect();
        writeln!(io.out, "round {}: {}", round + 1, line.join(", ")).map_err(io_err)?;
    }
    Ok(exit_for(outcome.winner))
}

fn cmd_distinguish(pair: &PairArgs, io: &mut Io<'_>) -> CmdResult {
    let (a, b) = load_pair(pair)?;
    match distinguishing_sentence(&a, &b, pair.rounds).map_err(|e| e.to_string())? {
        Some(phi) => {
            writeln!(io.out, "{phi}").map_err(io_err)?;
            Ok(EXIT_SEPARATED)
        }
        None => {
            writeln!(
                io.err,
                "no sentence of rank at most {} separates the structures",
                pair.rounds
            )
            .map_err(io_err)?;
            Ok(EXIT_EQUIVALENT)
        }
    }
}

fn exit_for(winner: Player) -> i32 {
    match winner {
        Player::Duplicator => EXIT_EQUIVALENT,
        Player::Spoiler => EXIT_SEPARATED,
    }
}

fn parse_move(line: &str) -> Option<Move> {
    let mut words = line.split_whitespace();
    let side = match words.next()? {
        "left" | "l" => Side::Left,
        "right" | "r" => Side::Right,
        _ => return None,
    };
    let element = words.next()?.parse().ok()?;
    words.next().is_none().then_some(Move::new(side, element))
}

fn cmd_play(pair: &PairArgs, human: Player, io: &mut Io<'_>) -> CmdResult {
    let (a, b) = load_pair(pair)?;
    if pair.rounds == 0 {
        return Err("--rounds must be at least 1 for play".into());
    }
    let mut pos = GamePosition::new(a, b, pair.rounds).map_err(|e| e.to_string())?;
    let mut solver = GameSolver::for_position(&pos);
    let engine = human.opponent();
    writeln!(
        io.out,
        "{} rounds: you are {human}, the engine is {engine}\nleft: {} (size {}), right: {} (size {})",
        pair.rounds,
        pos.left().name(),
        pos.left().size(),
        pos.right().name(),
        pos.right().size()
    )
    .map_err(io_err)?;

    while let Some(player) = pos.to_move() {
        let mv = if player == human {
            match prompt_move(&pos, io)? {
                Some(mv) => mv,
                None => {
                    writeln!(io.err, "aborted: end of input").map_err(io_err)?;
                    return Ok(EXIT_ERROR);
                }
            }
        } else {
            let mv = solver.best_move(&pos).map_err(|e| e.to_string())?;
            writeln!(io.out, "engine ({engine}): {mv}").map_err(io_err)?;
            mv
        };
        pos = pos.apply_move(mv).map_err(|e| e.to_string())?;
        if pos.pending().is_none() && !pos.history().is_empty() {
            writeln!(io.out, "picks: {}", pos.history()).map_err(io_err)?;
        }
    }

    let winner = pos.terminal_winner().expect("terminal");
    let who = if winner == human { "you" } else { "engine" };
    writeln!(io.out, "winner: {winner} ({who})").map_err(io_err)?;
    if winner == Player::Spoiler {
        if let Some(phi) =
            distinguishing_sentence(pos.left(), pos.right(), pos.rounds_total()).map_err(|e| e.to_string())?
        {
            writeln!(io.out, "distinguishing sentence: {phi}").map_err(io_err)?;
        }
    }
    Ok(exit_for(winner))
}

fn prompt_move(pos: &GamePosition, io: &mut Io<'_>) -> Result<Option<Move>, String> {
    let hint = match pos.pending() {
        None => "`left <element>` or `right <element>`".to_string(),
        Some(p) => format!("`{} <element>` to answer {p}", p.side.other()),
    };
    loop {
        write!(io.out, "round {} ({hint})> ", pos.rounds_done() + 1).map_err(io_err)?;
        io.out.flush().map_err(io_err)?;
        let mut line = String::new();
        if io
            .input
            .read_line(&mut line)
            .map_err(|e| format!("cannot read input: {e}"))?
            == 0
        {
            return Ok(None);
        }
        match parse_move(&line) {
            None => writeln!(io.out, "usage: left <element> | right <element>").map_err(io_err)?,
            Some(mv) if !pos.is_legal(mv) => writeln!(io.out, "illegal move: {mv}").map_err(io_err)?,
            Some(mv) => return Ok(Some(mv)),
        }
    }
}

fn cmd_serve(args: &ServeArgs, io: &mut Io<'_>) -> CmdResult {
    let config = ServerConfig {
        max_size: args.max_size,
        max_rounds: args.max_rounds,
        session_ttl: Duration::from_secs(args.ttl_secs),
        max_sentence_bytes: args.max_sentence_bytes,
        ui_dir: args.ui_dir.clone(),
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| format!("cannot start runtime: {e}"))?;
    runtime.block_on(async {
        let addr = SocketAddr::new(args.host, args.port);
        let (listener, local) = server::bind(addr)
            .await
            .map_err(|e| format!("cannot bind {addr}: {e}"))?;
        writeln!(io.out, "listening on http://{local}").map_err(io_err)?;
        io.out.flush().map_err(io_err)?;
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        server::serve(listener, config, shutdown)
            .await
            .map_err(|e| format!("server failed: {e}"))?;
        Ok(EXIT_EQUIVALENT)
    })
}
