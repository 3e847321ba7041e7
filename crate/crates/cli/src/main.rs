use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ma_plate_cli::{init_threads, run, Command, Overrides};

#[derive(Parser)]
#[command(name = "ma-plate", version, about = "Monge–Ampère constrained plate model")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Minimise the bending energy under det∇²v = f (or ≥ f)
    Solve,
    /// Radial minimiser, energy and multiplier for radial f
    Radial,
    /// Holomorphic solution family for f < 0 with Δlog|f| = 0
    Family,
    /// 3D recovery-sequence energy scaling for a growth preset
    Scaling,
    /// Euler–Lagrange residual of the radial solution
    CheckEl,
    /// Compatibility conditions and lower-bound gap of a growth preset
    CheckCompat,
    /// Flat-metric matching correction z_ε
    Matching,
}

#[derive(Args)]
struct Common {
    /// TOML config with [run], [solver], [scaling], [radial], [family], [matching], [compat]
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// const:<c>, eps_step:<ε>, expr:<expression> or a bare expression in r, x1, x2
    #[arg(long, global = true, allow_hyphen_values = true)]
    f: Option<String>,
    /// <square|disk>:<n>
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// comma-separated thicknesses, e.g. 2^-3,2^-4
    #[arg(long = "h-list", global = true, allow_hyphen_values = true)]
    h_list: Option<String>,
    /// eq | ineq
    #[arg(long, global = true)]
    mode: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// zero | paraboloid | paraboloid-bent | incompatible-B | conformal (optionally preset:<name>)
    #[arg(long, global = true)]
    growth: Option<String>,
    /// auto | radial | default | saddle:<theta>
    #[arg(long, global = true)]
    init: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    let command = match cli.command {
        Cmd::Solve => Command::Solve,
        Cmd::Radial => Command::Radial,
        Cmd::Family => Command::Family,
        Cmd::Scaling => Command::Scaling,
        Cmd::CheckEl => Command::CheckEl,
        Cmd::CheckCompat => Command::CheckCompat,
        Cmd::Matching => Command::Matching,
    };
    let c = cli.common;
    let overrides = Overrides {
        config: c.config,
        f: c.f,
        grid: c.grid,
        gamma: c.gamma,
        h_list: c.h_list,
        mode: c.mode,
        out: c.out,
        seed: c.seed,
        growth: c.growth,
        init: c.init,
    };
    let t = std::time::Instant::now();
    let (code, res) = run(command, &overrides);
    match res {
        Ok(o) => {
            println!("{}", serde_json::to_string_pretty(&o.summary).unwrap_or_default());
            eprintln!("{} finished in {:.2} s", command.name(), t.elapsed().as_secs_f64());
            if !o.converged {
                eprintln!("warning: solver did not converge");
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(code as u8)
}
