pub mod equilibria;
pub mod reduced;
pub mod simulate;
pub mod streamfield;
pub mod verify;

use anyhow::Result;

use crate::{Cli, Command};

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(args) => simulate::run(&cli, args),
        Command::Equilibria { which } => equilibria::run(&cli, which),
        Command::Reduced { which } => reduced::run(&cli, which),
        Command::Streamfield(args) => streamfield::run(&cli, args),
        Command::Verify(args) => verify::run(&cli, args),
    }
}
