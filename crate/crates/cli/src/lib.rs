//! The `xor-arena` command line.
//!
//! [`run`] parses arguments and returns everything the process would print, so the
//! binary is a thin wrapper and tests can drive commands in-process. Progress of
//! long searches goes straight to standard error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::IsTerminal;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use clap::{ArgGroup, Args, CommandFactory, Parser, Subcommand};
use serde_json::{json, Value};
use xor_arena::classical::{
    classical_bias, classical_corollary_bound, classical_value_binary_with, classical_value_conjunction_with,
    DeterministicStrategy, SearchConfig, DEFAULT_BUDGET,
};
use xor_arena::fl_relax::{sigma, sigma_bar};
use xor_arena::game::{
    catalog, chsh, conjunction, convex_combine, parity_play_probability, watrous, xor_sum_all, AnyGame, BinaryGame,
    XorGame, CATALOG_NAMES,
};
use xor_arena::io::{game_to_json, read_game};
use xor_arena::quantum::{
    quantum_bias, quantum_corollary_bound, verify_certificate, DualCertificate, CERTIFICATE_TOL, MAX_ORDER,
};
use xor_arena::sdp::DEFAULT_TOL;
use xor_arena::simulate::{play_sharded, Arena, PlayableStrategy};
use xor_arena::tsirelson::{strategy_from_vectors, QuantumStrategy};

/// Version tag carried by every JSON output.
pub const SCHEMA: &str = "xor-arena/1";

/// Environment variable overriding the exhaustive search budget.
pub const BUDGET_VAR: &str = "XOR_ARENA_BUDGET";

/// Searches enumerating at least this many strategies report progress.
const PROGRESS_MIN: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandResult {
    /// 0 on success, 1 on a computational failure, 2 on a usage error.
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(name = "xor-arena", version, about = "Values, certificates and simulations of two-player XOR games")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for searches and subset solves; results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// SDP tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classical or quantum value of games or of their conjunction.
    Value(ValueArgs),
    /// Build a new game file from existing games.
    Compose(ComposeArgs),
    /// Values and bounds for the n-fold conjunction of one game.
    Repeat(RepeatArgs),
    /// Solve for the quantum bias and emit a dual certificate.
    Certify(CertifyArgs),
    /// Check a dual certificate against a game.
    Verify(VerifyArgs),
    /// Feige–Lovász relaxations of a game.
    Relax(RelaxArgs),
    /// Play a strategy against the referee.
    Simulate(SimulateArgs),
    /// Built-in demonstrations.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
}

#[derive(Subcommand, Debug)]
enum Demo {
    /// Recompute the classical and quantum values of the CHSH and Watrous examples.
    PaperTable,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("mode").required(true).args(["classical", "quantum"])))]
struct ValueArgs {
    #[arg(long)]
    classical: bool,
    #[arg(long)]
    quantum: bool,
    /// Value of the conjunction of all games instead of each game.
    #[arg(long)]
    conj: bool,
    /// Built-in names (chsh, watrous) or game files; prefix with ./ to force a file.
    #[arg(required = true)]
    games: Vec<String>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("op").required(true).args(["xor", "convex", "transpose"])))]
struct ComposeArgs {
    /// XOR sum of all games.
    #[arg(long)]
    xor: bool,
    /// λ·first + (1−λ)·second.
    #[arg(long, value_name = "LAMBDA")]
    convex: Option<f64>,
    /// Swap the players of a single game.
    #[arg(long)]
    transpose: bool,
    #[arg(required = true)]
    games: Vec<String>,
    /// Output file; the game goes to standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RepeatArgs {
    /// Number of copies.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=16))]
    n: u32,
    game: String,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    game: String,
    /// Certificate file; the certificate goes to standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    game: String,
    certificate: PathBuf,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("relaxation").required(true).args(["sigma", "sigma_bar"])))]
struct RelaxArgs {
    #[arg(long)]
    sigma: bool,
    #[arg(long)]
    sigma_bar: bool,
    game: String,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    game: String,
    /// optimal-classical, optimal-quantum, or a strategy file.
    #[arg(long)]
    strategy: String,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    shards: u64,
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl From<xor_arena::Error> for Failure {
    fn from(e: xor_arena::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Text and JSON renderings of one command's result, plus an exit code.
struct Report {
    text: String,
    json: Value,
    code: i32,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Self { text, json, code: 0 }
    }
}

struct Context {
    tol: f64,
    budget: u128,
    warnings: Vec<String>,
}

pub fn run<I, T>(args: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    CommandResult { code: 0, stdout: e.to_string(), stderr: String::new() }
                }
                _ => {
                    let help = Cli::command().render_help().to_string();
                    CommandResult { code: 2, stdout: String::new(), stderr: format!("{e}\n{help}") }
                }
            };
        }
    };
    let json = cli.json;
    let mut ctx = match context(&cli) {
        Ok(ctx) => ctx,
        Err(f) => return failure(f, Vec::new()),
    };
    let outcome = match cli.threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command, &mut ctx)),
            Err(e) => Err(Failure::Compute(format!("cannot start {n} threads: {e}"))),
        },
        None => dispatch(&cli.command, &mut ctx),
    };
    match outcome {
        Ok(report) => {
            let stdout = if json {
                let mut v = report.json;
                if let Value::Object(map) = &mut v {
                    map.insert("schema".into(), json!(SCHEMA));
                    map.insert("tol".into(), json!(ctx.tol));
                }
                format!("{}\n", serde_json::to_string_pretty(&v).expect("report serializes"))
            } else {
                report.text
            };
            CommandResult { code: report.code, stdout, stderr: render_warnings(&ctx.warnings) }
        }
        Err(f) => failure(f, ctx.warnings),
    }
}

fn render_warnings(warnings: &[String]) -> String {
    warnings.iter().map(|w| format!("warning: {w}\n")).collect()
}

fn failure(f: Failure, warnings: Vec<String>) -> CommandResult {
    let mut stderr = render_warnings(&warnings);
    let code = match f {
        Failure::Usage(msg) => {
            let _ = writeln!(stderr, "error: {msg}\n\nFor more information, try '--help'.");
            2
        }
        Failure::Compute(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
    };
    CommandResult { code, stdout: String::new(), stderr }
}

fn context(cli: &Cli) -> Outcome<Context> {
    if !(cli.tol > 0.0 && cli.tol < 1.0) {
        return Err(Failure::Usage(format!("--tol must lie in (0, 1), got {}", cli.tol)));
    }
    let budget = match std::env::var(BUDGET_VAR) {
        Ok(v) => v
            .trim()
            .parse::<u128>()
            .map_err(|_| Failure::Usage(format!("{BUDGET_VAR}={v} is not a nonnegative integer")))?,
        Err(_) => DEFAULT_BUDGET,
    };
    Ok(Context { tol: cli.tol, budget, warnings: Vec::new() })
}

fn dispatch(cmd: &Command, ctx: &mut Context) -> Outcome<Report> {
    match cmd {
        Command::Value(a) if a.classical => value_classical(a, ctx),
        Command::Value(a) => value_quantum(a, ctx),
        Command::Compose(a) => compose(a, ctx),
        Command::Repeat(a) => repeat(a, ctx),
        Command::Certify(a) => certify(a, ctx),
        Command::Verify(a) => verify(a, ctx),
        Command::Relax(a) => relax(a, ctx),
        Command::Simulate(a) => simulate(a, ctx),
        Command::Demo { which: Demo::PaperTable } => paper_table(ctx),
    }
}

/// Built-in names win over files unless the argument starts with `./`.
fn load(name: &str, ctx: &mut Context) -> Outcome<AnyGame> {
    let game = if !name.starts_with("./") && CATALOG_NAMES.contains(&name) {
        catalog(name)?
    } else {
        read_game(name).map_err(|e| Failure::Compute(format!("cannot load `{name}`: {e}")))?
    };
    if let AnyGame::Xor(g) = &game {
        ctx.warnings.extend(g.diagnostics().into_iter().map(|d| format!("{name}: {d}")));
    }
    Ok(game)
}

fn load_xor(name: &str, ctx: &mut Context) -> Outcome<XorGame> {
    match load(name, ctx)? {
        AnyGame::Xor(g) => Ok(g),
        AnyGame::Binary(_) => Err(Failure::Compute(format!("`{name}` is not an XOR game"))),
    }
}

fn search_config(budget: u128) -> SearchConfig {
    let mut cfg = SearchConfig::with_budget(budget);
    let shown = Arc::new(AtomicU64::new(0));
    let terminal = std::io::stderr().is_terminal();
    cfg.progress = Some(Arc::new(move |done: u64, total: u64| {
        if total < PROGRESS_MIN {
            return;
        }
        let decile = done * 10 / total;
        if shown.fetch_max(decile, Ordering::Relaxed) < decile {
            let end = if !terminal || decile == 10 { "\n" } else { "" };
            eprint!("{}searching: {:3}%{end}", if terminal { "\r" } else { "" }, decile * 10);
        }
    }));
    cfg
}

/// `p/q` with `q ≤ 4096` when `v` is that fraction to rounding accuracy.
fn fraction(v: f64) -> Option<String> {
    (1..=4096u64).find_map(|q| {
        let p = (v * q as f64).round();
        ((v - p / q as f64).abs() <= 1e-12).then(|| format!("{p}/{q}"))
    })
}

fn exact_text(v: f64) -> String {
    match fraction(v) {
        Some(f) => format!("{v:.6} (exact, = {f})"),
        None => format!("{v:.6} (exact)"),
    }
}

fn approx_text(v: f64, tol: f64) -> String {
    format!("{v:.6} ± {tol:.1e}")
}

fn strategy_json(st: &DeterministicStrategy, s: &[String], t: &[String], bits: usize) -> Value {
    st.to_json(s, t, bits)
}

fn value_classical(a: &ValueArgs, ctx: &mut Context) -> Outcome<Report> {
    let games = a.games.iter().map(|n| load(n, ctx)).collect::<Outcome<Vec<_>>>()?;
    let cfg = search_config(ctx.budget);
    let mut text = String::new();
    let mut results = Vec::new();
    if a.conj {
        let label = a.games.join(" ∧ ");
        let xors: Option<Vec<XorGame>> = games.iter().map(|g| g.as_xor().cloned()).collect();
        let (value, witness) = match xors {
            Some(xors) => {
                let c = conjunction(xors)?;
                let (v, w) = classical_value_conjunction_with(&c, &cfg)?;
                let s: Vec<String> = (0..c.s_count()).map(|i| c.s_label(i)).collect();
                let t: Vec<String> = (0..c.t_count()).map(|i| c.t_label(i)).collect();
                (v, strategy_json(&w, &s, &t, c.len()))
            }
            None => {
                let g = games
                    .iter()
                    .map(AnyGame::to_binary)
                    .reduce(|acc, g| acc.conjunction(&g))
                    .expect("at least one game");
                let (v, w) = classical_value_binary_with(&g, &cfg)?;
                (v, strategy_json(&w, g.s_labels(), g.t_labels(), 0))
            }
        };
        let _ = writeln!(text, "{label}: ω_c = {}", exact_text(value));
        results.push(json!({"game": label, "value": value, "strategy": witness}));
    } else {
        for (name, g) in a.games.iter().zip(&games) {
            let (value, bias, witness) = match g {
                AnyGame::Xor(x) => {
                    let (b, w) = classical_bias(x, ctx.budget)?;
                    ((1.0 + b) / 2.0, Some(b), strategy_json(&w, x.s_labels(), x.t_labels(), 1))
                }
                AnyGame::Binary(bg) => {
                    let (v, w) = classical_value_binary_with(bg, &cfg)?;
                    (v, None, strategy_json(&w, bg.s_labels(), bg.t_labels(), 0))
                }
            };
            let _ = write!(text, "{name}: ω_c = {}", exact_text(value));
            if let Some(b) = bias {
                let _ = write!(text, ", ε_c = {}", exact_text(b));
            }
            text.push('\n');
            results.push(json!({"game": name, "value": value, "bias": bias, "strategy": witness}));
        }
    }
    Ok(Report::ok(text, json!({"command": "value", "mode": "classical", "conj": a.conj, "results": results})))
}

fn value_quantum(a: &ValueArgs, ctx: &mut Context) -> Outcome<Report> {
    let mut games = Vec::new();
    for name in &a.games {
        match load(name, ctx)? {
            AnyGame::Xor(g) => games.push(g),
            AnyGame::Binary(_) => {
                return Err(Failure::Compute(format!(
                    "`{name}` is not an XOR game; the quantum value is computed for XOR games only (see `relax`)"
                )))
            }
        }
    }
    let tol = ctx.tol;
    let mut text = String::new();
    let mut results = Vec::new();
    if a.conj {
        let label = a.games.join(" ∧ ");
        let r = quantum_corollary_bound(&games, tol)?;
        let _ = writeln!(text, "{label}: ω_q = {}", approx_text(r.closed_form, tol));
        let _ = writeln!(text, "  subset bound (1/2ⁿ)Σ_M ε_q(⊕_M G_j) = {}", approx_text(r.bound, tol));
        results.push(json!({
            "game": label,
            "value": r.closed_form,
            "subset_bound": r.bound,
            "subset_biases": r.subset_biases,
        }));
    } else {
        for (name, g) in a.games.iter().zip(&games) {
            let r = quantum_bias(g, tol)?;
            let _ = writeln!(
                text,
                "{name}: ω_q = {}, ε_q = {} (certificate {:.6})",
                approx_text(r.value, tol),
                approx_text(r.bias, tol),
                r.certificate.objective
            );
            results.push(json!({
                "game": name,
                "value": r.value,
                "bias": r.bias,
                "certificate_objective": r.certificate.objective,
                "gap": r.gap,
                "dimension": r.vectors.dimension(),
            }));
        }
    }
    Ok(Report::ok(text, json!({"command": "value", "mode": "quantum", "conj": a.conj, "results": results})))
}

fn compose(a: &ComposeArgs, ctx: &mut Context) -> Outcome<Report> {
    let (op, game) = if a.xor {
        let games = a.games.iter().map(|n| load_xor(n, ctx)).collect::<Outcome<Vec<_>>>()?;
        ("xor", AnyGame::Xor(xor_sum_all(&games)))
    } else if let Some(lambda) = a.convex {
        let [g1, g2] = a.games.as_slice() else {
            return Err(Failure::Usage("--convex takes exactly two games".into()));
        };
        let (g1, g2) = (load_xor(g1, ctx)?, load_xor(g2, ctx)?);
        ("convex", AnyGame::Xor(convex_combine(lambda, &g1, &g2)?))
    } else {
        let [g] = a.games.as_slice() else {
            return Err(Failure::Usage("--transpose takes exactly one game".into()));
        };
        let game = match load(g, ctx)? {
            AnyGame::Xor(x) => AnyGame::Xor(x.transpose()),
            AnyGame::Binary(b) => AnyGame::Binary(b.transpose()),
        };
        ("transpose", game)
    };
    let (s, t) = match &game {
        AnyGame::Xor(g) => (g.s_count(), g.t_count()),
        AnyGame::Binary(g) => (g.s_count(), g.t_count()),
    };
    let body = game_to_json(&game);
    match &a.output {
        Some(path) => {
            std::fs::write(path, &body).map_err(|e| Failure::Compute(format!("cannot write {}: {e}", path.display())))?;
            let text = format!("wrote {} ({s}×{t} questions) to {}\n", op, path.display());
            Ok(Report::ok(text, json!({"command": "compose", "op": op, "output": path, "questions": [s, t]})))
        }
        None => {
            let game_value: Value = serde_json::from_str(&body).expect("game JSON parses");
            Ok(Report::ok(format!("{body}\n"), json!({"command": "compose", "op": op, "game": game_value})))
        }
    }
}

fn repeat(a: &RepeatArgs, ctx: &mut Context) -> Outcome<Report> {
    let g = load_xor(&a.game, ctx)?;
    let n = a.n as usize;
    let tol = ctx.tol;
    let copies = vec![g.clone(); n];
    let cfg = search_config(ctx.budget);
    let skipped = |e: xor_arena::Error| -> Outcome<Option<f64>> {
        match e {
            xor_arena::Error::BudgetExceeded { .. } => Ok(None),
            e => Err(e.into()),
        }
    };

    let eps_c = classical_bias(&g, ctx.budget)?.0;
    let omega_c = (1.0 + eps_c) / 2.0;
    let q = quantum_bias(&g, tol)?;
    let product_q = q.value.powi(a.n as i32);
    let exact = match conjunction(copies.clone()).and_then(|c| classical_value_conjunction_with(&c, &cfg)) {
        Ok((v, _)) => Some(v),
        Err(e) => skipped(e)?,
    };
    let classical_bound = match classical_corollary_bound(&copies, ctx.budget) {
        Ok(v) => Some(v),
        Err(e) => skipped(e)?,
    };
    let fits = g.s_count().checked_pow(a.n).zip(g.t_count().checked_pow(a.n)).is_some_and(|(s, t)| s + t <= MAX_ORDER);
    let quantum_bound = if fits { Some(quantum_corollary_bound(&copies, tol)?.bound) } else { None };

    let show = |v: Option<f64>, exact: bool| match v {
        Some(v) if exact => exact_text(v),
        Some(v) => approx_text(v, tol),
        None => "skipped (over budget)".to_string(),
    };
    let mut text = String::new();
    let _ = writeln!(text, "{} ∧ {n} copies", a.game);
    let _ = writeln!(text, "  ω_c(G)                      {}", exact_text(omega_c));
    let _ = writeln!(text, "  ω_q(G)                      {}", approx_text(q.value, tol));
    let _ = writeln!(text, "  ω_c(G)ⁿ (independent play)  {}", exact_text(omega_c.powi(a.n as i32)));
    let _ = writeln!(text, "  ω_c(G^∧n)                   {}", show(exact, true));
    let _ = writeln!(text, "  classical subset bound      {}", show(classical_bound, true));
    let _ = writeln!(text, "  ω_q(G)ⁿ = ω_q(G^∧n)         {}", approx_text(product_q, tol));
    let _ = writeln!(
        text,
        "  quantum subset bound        {}",
        match quantum_bound {
            Some(v) => approx_text(v, tol),
            None => format!("skipped (order above {MAX_ORDER})"),
        }
    );
    let json = json!({
        "command": "repeat",
        "game": a.game,
        "n": n,
        "classical_value": omega_c,
        "quantum_value": q.value,
        "classical_product": omega_c.powi(a.n as i32),
        "classical_conjunction": exact,
        "classical_subset_bound": classical_bound,
        "quantum_product": product_q,
        "quantum_subset_bound": quantum_bound,
    });
    Ok(Report::ok(text, json))
}

fn certify(a: &CertifyArgs, ctx: &mut Context) -> Outcome<Report> {
    let g = load_xor(&a.game, ctx)?;
    let r = quantum_bias(&g, ctx.tol)?;
    let cert = r.certificate.to_json();
    let summary = json!({
        "command": "certify",
        "game": a.game,
        "bias": r.bias,
        "objective": r.certificate.objective,
        "gap": r.gap,
    });
    match &a.output {
        Some(path) => {
            std::fs::write(path, &cert).map_err(|e| Failure::Compute(format!("cannot write {}: {e}", path.display())))?;
            let text = format!(
                "{}: ε_q ≤ {:.9} (strategy reaches {:.9}), certificate written to {}\n",
                a.game,
                r.certificate.objective,
                r.bias,
                path.display()
            );
            let mut json = summary;
            json["output"] = json!(path);
            Ok(Report::ok(text, json))
        }
        None => {
            let mut json = summary;
            json["certificate"] = serde_json::from_str(&cert).expect("certificate JSON parses");
            Ok(Report::ok(format!("{cert}\n"), json))
        }
    }
}

fn verify(a: &VerifyArgs, ctx: &mut Context) -> Outcome<Report> {
    let g = load_xor(&a.game, ctx)?;
    let text = std::fs::read_to_string(&a.certificate)
        .map_err(|e| Failure::Compute(format!("cannot read {}: {e}", a.certificate.display())))?;
    let cert = DualCertificate::from_json(&text)?;
    let check = verify_certificate(&cert, &g, CERTIFICATE_TOL)?;
    let verdict = if check.ok { "valid" } else { "REJECTED" };
    let text = format!(
        "{verdict}: min eigenvalue of Δ(x,y) − B is {:.3e} (threshold −{CERTIFICATE_TOL:.0e}); \
         certified ε_q ≤ {:.9}, ω_q ≤ {:.9}\n",
        check.min_eig,
        check.objective,
        (1.0 + check.objective) / 2.0
    );
    let json = json!({
        "command": "verify",
        "game": a.game,
        "ok": check.ok,
        "min_eig": check.min_eig,
        "plus_min_eig": check.plus_min_eig,
        "objective": check.objective,
        "certificate_tol": CERTIFICATE_TOL,
    });
    Ok(Report { text, json, code: if check.ok { 0 } else { 1 } })
}

fn relax(a: &RelaxArgs, ctx: &mut Context) -> Outcome<Report> {
    let g = load(&a.game, ctx)?.to_binary();
    let (name, r) = if a.sigma { ("sigma", sigma(&g, ctx.tol)?) } else { ("sigma-bar", sigma_bar(&g, ctx.tol)?) };
    let symbol = if a.sigma { "σ" } else { "σ̄" };
    let text = format!(
        "{}: {symbol} = {} (dual bound {:.9}, {} iterations)\n",
        a.game,
        approx_text(r.value, ctx.tol),
        r.dual_bound,
        r.iterations
    );
    let json = json!({"command": "relax", "relaxation": name, "game": a.game, "result": r});
    Ok(Report::ok(text, json))
}

fn playable_from_file(path: &str, game: &AnyGame) -> Outcome<PlayableStrategy> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Compute(format!("cannot read {path}: {e}")))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Compute(format!("{path}: {e}")))?;
    if v.get("dim").is_some() {
        return Ok(PlayableStrategy::quantum(&QuantumStrategy::from_json(&v)?)?);
    }
    let (s, t) = match game {
        AnyGame::Xor(g) => (g.s_labels(), g.t_labels()),
        AnyGame::Binary(g) => (g.s_labels(), g.t_labels()),
    };
    Ok(PlayableStrategy::from(&DeterministicStrategy::from_json(&v, s, t)?))
}

fn simulate(a: &SimulateArgs, ctx: &mut Context) -> Outcome<Report> {
    let game = load(&a.game, ctx)?;
    let strategy = match (a.strategy.as_str(), &game) {
        ("optimal-classical", AnyGame::Xor(g)) => PlayableStrategy::from(&classical_bias(g, ctx.budget)?.1),
        ("optimal-classical", AnyGame::Binary(g)) => {
            PlayableStrategy::from(&classical_value_binary_with(g, &search_config(ctx.budget))?.1)
        }
        ("optimal-quantum", AnyGame::Xor(g)) => {
            PlayableStrategy::quantum(&strategy_from_vectors(&quantum_bias(g, ctx.tol)?.vectors)?)?
        }
        ("optimal-quantum", AnyGame::Binary(_)) => {
            return Err(Failure::Compute("optimal-quantum strategies exist for XOR games only".into()))
        }
        (path, game) => playable_from_file(path, game)?,
    };
    let arena = match &game {
        AnyGame::Xor(g) => Arena::Xor(g),
        AnyGame::Binary(g) => Arena::Binary(g),
    };
    let r = play_sharded(&strategy, arena, a.trials, a.seed, a.shards)?;
    let text = format!(
        "{} with {}: won {}/{} rounds, estimate {:.6} ± {:.6} (1 s.e.), seed {}, {} shard(s)\n",
        a.game, a.strategy, r.wins, r.trials, r.estimate, r.stderr, r.seed, r.shards
    );
    let report = serde_json::to_value(&r).expect("report serializes");
    Ok(Report::ok(text, json!({"command": "simulate", "game": a.game, "strategy": a.strategy, "report": report})))
}

struct Row {
    quantity: &'static str,
    value: f64,
    expected: &'static str,
    target: f64,
    tolerance: f64,
}

fn paper_table(ctx: &mut Context) -> Outcome<Report> {
    let g = chsh();
    let cfg = search_config(ctx.budget);
    let value_of = |b: f64| (1.0 + b) / 2.0;
    let bias = |games: Vec<XorGame>| -> Outcome<f64> { Ok(classical_bias(&xor_sum_all(&games), ctx.budget)?.0) };
    let conj = |n: usize| -> Outcome<f64> {
        Ok(classical_value_conjunction_with(&conjunction(vec![g.clone(); n])?, &cfg)?.0)
    };
    let w = watrous();
    let omega_c = value_of(bias(vec![g.clone()])?);
    let omega_q = quantum_bias(&g, ctx.tol)?.value;
    let quantum_pair = quantum_corollary_bound(&[g.clone(), g.clone()], ctx.tol)?;
    let qv = (1.0 + 0.5f64.sqrt()) / 2.0;
    let exact = 1e-12;
    let rows = vec![
        Row { quantity: "ω_c(CHSH)", value: omega_c, expected: "3/4", target: 0.75, tolerance: exact },
        Row {
            quantity: "parity play on CHSH ⊕ CHSH",
            value: parity_play_probability(omega_c, omega_c)?,
            expected: "5/8",
            target: 0.625,
            tolerance: exact,
        },
        Row {
            quantity: "ω_c(CHSH ⊕ CHSH)",
            value: value_of(bias(vec![g.clone(), g.clone()])?),
            expected: "3/4",
            target: 0.75,
            tolerance: exact,
        },
        Row { quantity: "ω_c(CHSH ∧ CHSH)", value: conj(2)?, expected: "10/16", target: 10.0 / 16.0, tolerance: exact },
        Row {
            quantity: "ε_c(CHSH ⊕ CHSH ⊕ CHSH)",
            value: bias(vec![g.clone(), g.clone(), g.clone()])?,
            expected: "5/16",
            target: 5.0 / 16.0,
            tolerance: exact,
        },
        Row {
            quantity: "ω_c(CHSH ∧ CHSH ∧ CHSH)",
            value: conj(3)?,
            expected: "31/64",
            target: 31.0 / 64.0,
            tolerance: exact,
        },
        Row {
            quantity: "classical subset bound, CHSH ∧ CHSH ∧ CHSH",
            value: classical_corollary_bound(&[g.clone(), g.clone(), g.clone()], ctx.budget)?,
            expected: "34.5/64",
            target: 34.5 / 64.0,
            tolerance: exact,
        },
        Row {
            quantity: "ω_c(Watrous)",
            value: classical_value_binary_with(&w, &cfg)?.0,
            expected: "2/3",
            target: 2.0 / 3.0,
            tolerance: exact,
        },
        Row {
            quantity: "ω_c(Watrous ∧ Watrous)",
            value: classical_value_binary_with(&BinaryGame::conjunction(&w, &w), &cfg)?.0,
            expected: "2/3",
            target: 2.0 / 3.0,
            tolerance: exact,
        },
        Row { quantity: "ω_q(CHSH)", value: omega_q, expected: "(1+1/√2)/2", target: qv, tolerance: 1e-6 },
        Row {
            quantity: "ω_q(CHSH ∧ CHSH)",
            value: quantum_pair.closed_form,
            expected: "((1+1/√2)/2)²",
            target: qv * qv,
            tolerance: 1e-6,
        },
    ];
    let width = rows.iter().map(|r| r.quantity.chars().count()).max().unwrap_or(0);
    let mut text = String::new();
    let _ = writeln!(text, "{:<width$}  {:>12}  {:<14}  match", "quantity", "computed", "expected");
    let mut all = true;
    let mut json_rows = Vec::new();
    for r in &rows {
        let ok = (r.value - r.target).abs() <= r.tolerance;
        all &= ok;
        let pad = width - r.quantity.chars().count();
        let _ = writeln!(
            text,
            "{}{}  {:>12.9}  {:<14}  {}",
            r.quantity,
            " ".repeat(pad),
            r.value,
            r.expected,
            if ok { "yes" } else { "NO" }
        );
        json_rows.push(json!({
            "quantity": r.quantity,
            "value": r.value,
            "expected": r.expected,
            "expected_value": r.target,
            "tolerance": r.tolerance,
            "match": ok,
        }));
    }
    let json = json!({"command": "demo paper-table", "rows": json_rows, "all_match": all});
    Ok(Report { text, json, code: if all { 0 } else { 1 } })
}
