use clap::Parser;
use ncp::cli::{run, Cli};

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NCP_LOG", "info")).init();
    run(Cli::parse())?;
    Ok(())
}
