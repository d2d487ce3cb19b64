//! argv parsing: clap subcommands lowered into one `RunConfig`.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{
    parse_list_usize, parse_maps, parse_seed, parse_window, ChartName, CommandName, LambdaArg,
    MapName, OutputFormat, RunConfig,
};

#[derive(Parser, Debug)]
#[command(
    name = "hsystem",
    version,
    about = "H-system bubbles, their linearized operator, and the co-rotational spectrum"
)]
pub struct Cli {
    /// Load a full run configuration from a TOML file instead of a subcommand
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Bubble profiles, unit-norm identity, and the H-system residual
    Bubble {
        #[arg(long, default_value_t = 1)]
        degree: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Dirichlet energy against the 8·pi·m quantization
    Energy {
        #[arg(long, default_value_t = 1)]
        degree: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The dilation zero mode: profiles, residual, decay constants
    Zeromode {
        #[arg(long, default_value_t = 1)]
        degree: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Coefficients of the reduced radial pair and its sign fixtures
    Reduce {
        #[arg(long, default_value_t = 1)]
        degree: u32,
        /// lambda as decimal or p/q
        #[arg(long, default_value = "0")]
        lambda: String,
        /// chart: r | kelvin
        #[arg(long, default_value = "r")]
        chart: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Single-grid pencil solve and classification table
    Spectrum {
        #[arg(long, default_value_t = 1)]
        degree: u32,
        #[arg(long, default_value_t = 2000)]
        grid: usize,
        /// map: rational | stereographic
        #[arg(long, default_value = "rational")]
        map: String,
        /// eigenvalue window lo:hi
        #[arg(long, default_value = "-30:30", allow_hyphen_values = true)]
        window: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multi-grid, multi-map scan with drift filtering and shooting checks
    Scan {
        #[arg(long, default_value_t = 2)]
        degree: u32,
        /// eigenvalue window lo:hi
        #[arg(long, default_value = "-30:30", allow_hyphen_values = true)]
        window: String,
        /// comma-separated node counts, e.g. 500,1000,2000
        #[arg(long, default_value = "500,1000,2000")]
        grids: String,
        /// comma-separated maps
        #[arg(long, default_value = "rational,stereographic")]
        maps: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// directory for per-mode CSV profile dumps
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        /// write a python plotting script referencing the CSV dumps
        #[arg(long)]
        plot_script: Option<PathBuf>,
    },
    /// Exact-rational recursion engine (degree 1, Kelvin chart)
    Series {
        /// seeds a0,a1,b0,b1 as exact rationals
        #[arg(long, default_value = "0,0,0,0", allow_hyphen_values = true)]
        seed: String,
        /// exact rational lambda (p/q or integer)
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value_t = 50)]
        order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Two-sided shooting mismatch at given (lambda, g0)
    Shoot {
        #[arg(long, default_value_t = 2)]
        degree: u32,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        g0: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn base_config(command: CommandName) -> RunConfig {
    RunConfig {
        command,
        degree: 1,
        lambda: None,
        grid: None,
        grids: None,
        map: None,
        maps: None,
        chart: None,
        window: None,
        seed: None,
        order: None,
        g0: None,
        out: None,
        csv: None,
        csv_dir: None,
        plot_script: None,
        format: OutputFormat::StructuredText,
    }
}

/// Lower parsed argv into the canonical configuration.
pub fn to_run_config(command: Command) -> Result<RunConfig, String> {
    Ok(match command {
        Command::Bubble { degree, out, csv } => RunConfig {
            degree,
            out,
            csv,
            ..base_config(CommandName::Bubble)
        },
        Command::Energy { degree, out } => RunConfig {
            degree,
            out,
            ..base_config(CommandName::Energy)
        },
        Command::Zeromode { degree, out, csv } => RunConfig {
            degree,
            out,
            csv,
            ..base_config(CommandName::Zeromode)
        },
        Command::Reduce {
            degree,
            lambda,
            chart,
            out,
        } => RunConfig {
            degree,
            lambda: Some(LambdaArg(lambda)),
            chart: Some(chart.parse::<ChartName>()?),
            out,
            ..base_config(CommandName::Reduce)
        },
        Command::Spectrum {
            degree,
            grid,
            map,
            window,
            out,
        } => RunConfig {
            degree,
            grid: Some(grid),
            map: Some(map.parse::<MapName>()?),
            window: Some(parse_window(&window)?),
            out,
            ..base_config(CommandName::Spectrum)
        },
        Command::Scan {
            degree,
            window,
            grids,
            maps,
            out,
            csv_dir,
            plot_script,
        } => RunConfig {
            degree,
            window: Some(parse_window(&window)?),
            grids: Some(parse_list_usize(&grids)?),
            maps: Some(parse_maps(&maps)?),
            out,
            csv_dir,
            plot_script,
            ..base_config(CommandName::Scan)
        },
        Command::Series {
            seed,
            lambda,
            order,
            out,
            csv,
        } => RunConfig {
            degree: 1,
            seed: Some(parse_seed(&seed)?),
            lambda: Some(LambdaArg(lambda)),
            order: Some(order),
            out,
            csv,
            format: OutputFormat::Csv,
            ..base_config(CommandName::Series)
        },
        Command::Shoot {
            degree,
            lambda,
            g0,
            out,
        } => RunConfig {
            degree,
            lambda: Some(LambdaArg(lambda)),
            g0: Some(g0),
            out,
            ..base_config(CommandName::Shoot)
        },
    })
}
