use clap::Parser;
use unitrack::cli::{run, Cli};

fn main() -> anyhow::Result<()> {
    run(Cli::parse())?;
    Ok(())
}
