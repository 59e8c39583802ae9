use clap::Parser;
use tracing_subscriber::EnvFilter;
use tripcsp_cli::cmd::{self, Cli, Command};
use tripcsp_cli::{router, AppState};

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let out = match &cli.command {
        Command::Plan(a) => cmd::plan(a)?,
        Command::Bench(a) => cmd::bench(a)?,
        Command::Gen(a) => cmd::gen(a)?,
        Command::Replay(a) => cmd::replay_cmd(a)?,
        Command::Serve(a) => {
            let app = router(AppState::new(cmd::load_sandbox(&a.data)?, a.persist.clone()));
            let listener = tokio::net::TcpListener::bind(&a.addr).await?;
            tracing::info!(addr = %a.addr, "serving");
            eprintln!("listening on {}", listener.local_addr()?);
            axum::serve(listener, app).await?;
            return Ok(());
        }
    };
    print!("{out}");
    Ok(())
}
