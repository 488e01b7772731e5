//! Command-line front end for `regtower`.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod sample;
pub mod verify;

#[derive(Debug, Parser)]
#[command(
    name = "regtower",
    version,
    about = "Strength, partition rank and regularization of systems of forms"
)]
pub struct Cli {
    /// Coefficient field: `Q` or `Fp:<p>`.
    #[arg(long, global = true, default_value = "Q")]
    pub field: String,
    /// Search budget in elementary steps.
    #[arg(long, global = true, env = "REGTOWER_BUDGET", default_value_t = regtower::rank::DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Style {
    Definitional,
    Recursion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CloneMode {
    External,
    Internal,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Multi-homogeneous components of f(x_1 + ... + x_m).
    Taylor {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        m: usize,
    },
    /// The symmetric multilinear form of a form.
    Polarize { file: PathBuf },
    /// Strength of one form, or collective strength of several, modulo an ideal.
    Strength {
        file: PathBuf,
        #[arg(long = "mod")]
        modulus: Option<PathBuf>,
    },
    /// Partition rank of a multilinear form.
    Prank {
        file: PathBuf,
        /// Subsets of the support positions, e.g. `{{1},{1,2}}`.
        #[arg(long)]
        collection: Option<String>,
        #[arg(long = "mod")]
        modulus: Option<PathBuf>,
    },
    /// Birch rank and the resulting interval on absolute strength.
    Brank { file: PathBuf },
    /// Geometric rank of a multilinear form.
    Grank {
        file: PathBuf,
        #[arg(long = "mod")]
        modulus: Option<PathBuf>,
        /// Restrict to one slot (1-based block label).
        #[arg(long)]
        slot: Option<usize>,
    },
    /// Replace a system of forms by a strong tower containing it.
    Regularize {
        file: PathBuf,
        #[arg(long = "C", default_value = "1")]
        c: String,
        #[arg(long = "D", default_value_t = 1)]
        d: u32,
        #[arg(long, default_value_t = 0)]
        r: u64,
        #[arg(long)]
        odd: bool,
        #[arg(long, value_enum, default_value_t = Style::Definitional)]
        style: Style,
        /// Write the resulting tower here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a tower against (A,B,r) thresholds, with A = --C and B = --D.
    Audit {
        file: PathBuf,
        #[arg(long = "C", default_value = "1")]
        c: String,
        #[arg(long = "D", default_value_t = 1)]
        d: u32,
        #[arg(long, default_value_t = 0)]
        r: u64,
        #[arg(long, value_enum, default_value_t = Style::Definitional)]
        style: Style,
        /// The file holds a multilinear tower; partition rank replaces strength.
        #[arg(long)]
        multilinear: bool,
    },
    /// Clone a multilinear tower over a set of blocks.
    Clone {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = CloneMode::External)]
        mode: CloneMode,
        /// Blocks to clone, e.g. `{3}`.
        #[arg(long)]
        blocks: String,
        #[arg(long, default_value_t = 2)]
        m: usize,
    },
    /// Fix the coordinates of some blocks of a multilinear tower.
    Fix {
        file: PathBuf,
        #[arg(long)]
        blocks: String,
        /// One vector per block, blocks separated by `;`, e.g. `1,0;0,1`.
        #[arg(long)]
        point: String,
    },
    /// Compare two collections of subsets, or print the cover relations.
    CompareCollections {
        a: Option<String>,
        b: Option<String>,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long)]
        hasse: bool,
    },
    /// Trace the codimension bound through the regularization constants.
    Bounds {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        s: u64,
        /// Brauer constants phi_2,...,phi_d; `?` leaves one symbolic.
        #[arg(long)]
        phi: Option<String>,
        /// Assign a named constant, e.g. `C_reg=2`.
        #[arg(long = "assign")]
        assign: Vec<String>,
        /// Odd degrees over a number field.
        #[arg(long)]
        odd: bool,
    },
    /// Run invariant suites on seeded random and golden instances.
    Verify {
        #[arg(long = "suite", value_enum)]
        suites: Vec<verify::Suite>,
        #[arg(long)]
        count: Option<usize>,
        /// A JSON profile; flags given explicitly are ignored.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
}
