mod commands;
mod output;
mod table;

use clap::{Parser, Subcommand};
use output::Output;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "homoflow", version, about = "Expansions, random expansions and concentration experiments for homogeneous digraphs")]
pub struct Cli {
    /// Emit CSV instead of JSON where the result is tabular.
    #[arg(long, global = true)]
    pub csv: bool,
    /// Also write the result to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate expansions of a structure, or count relative expansions.
    Expand {
        #[arg(long)]
        class: String,
        #[arg(long = "in")]
        input: PathBuf,
        /// A second structure containing the first.
        #[arg(long)]
        relative: Option<PathBuf>,
    },
    /// Decide consistency of random expansions on a fragment.
    Amenable {
        #[arg(long)]
        class: String,
        /// `builtin:<name>` or a JSON file with `structures`.
        #[arg(long)]
        fragment: String,
        #[arg(long)]
        emit_cert: Option<PathBuf>,
    },
    /// Check equality of relative expansion counts up to a bound.
    Density {
        #[arg(long)]
        class: String,
        #[arg(long, default_value_t = 4)]
        bound: usize,
    },
    /// Sampled concentration experiment.
    Qop {
        #[arg(long)]
        sampler: String,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long = "big-m", default_value_t = 2)]
        big_m: usize,
        /// Class sizes of `H`, comma separated.
        #[arg(long, value_delimiter = ',')]
        a: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.05)]
        d: f64,
        #[arg(long, default_value_t = 50)]
        g_expansions: usize,
        /// Structure `H`; defaults to the sampler's standard one.
        #[arg(long)]
        h: Option<PathBuf>,
    },
    /// Girth-4 hypergraph, planted digraph and hyperedge-restricted counts.
    Hypergraph {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `ft-c3`, `gn:<m>` or `none`.
        #[arg(long, default_value = "ft-c3")]
        mode: String,
        /// Structure planted on every hyperedge; defaults to the linear tournament.
        #[arg(long)]
        h: Option<PathBuf>,
        /// Random orders of the planted digraph to test.
        #[arg(long, default_value_t = 20)]
        orders: usize,
        #[arg(long)]
        constant: Option<f64>,
    },
    /// Extend partial isomorphisms, or compare with the density route.
    Hrushovski {
        #[arg(long)]
        class: String,
        /// JSON `{"ambient": .., "maps": [[[x, y], ..], ..]}`; omitted for the sampled report.
        #[arg(long)]
        system: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        bound: usize,
    },
    /// Binary trees and their leaf structures.
    Trees {
        /// count-convex, leaf-structure, minimal-tree, is-nice, nice-family, oh-witness.
        #[arg(long)]
        op: String,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        /// Linear order of the leaves for `oh-witness`, comma separated.
        #[arg(long, value_delimiter = ',')]
        order: Vec<usize>,
    },
    /// Run the full battery and print the summary table.
    Table {
        #[arg(long, default_value_t = 4)]
        bound: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Replay a certificate.
    VerifyCert {
        #[arg(long = "in")]
        input: PathBuf,
        /// Defaults to the class recorded in the certificate.
        #[arg(long)]
        class: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write_stdout(&e.to_string());
                return ExitCode::SUCCESS;
            }
            output::print_error("usage", &e.to_string());
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli.command) {
        Ok(out) => match emit(&cli, &out) {
            Ok(()) => ExitCode::from(out.exit_code),
            Err(e) => {
                output::print_error("io", &e.to_string());
                ExitCode::from(1)
            }
        },
        Err(e) => {
            output::print_error(e.kind(), &e.to_string());
            ExitCode::from(1)
        }
    }
}

fn emit(cli: &Cli, out: &Output) -> std::io::Result<()> {
    let text = out.render(cli.csv);
    if let Some(path) = &cli.out {
        std::fs::write(path, &text)?;
    }
    write_stdout(&text)
}

fn write_stdout(text: &str) -> std::io::Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r,
    }
}
