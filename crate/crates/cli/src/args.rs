use std::path::PathBuf;

use birsym_core::birat::{BlowupCase, SpanField};
use birsym_core::compute::Field;
use birsym_core::Flavor;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "birsym", version, about = "Exact computations with birational and modular symbol groups")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Maximum number of relation rows before elimination.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Maximum dense entries for integer normal forms.
    #[arg(long, global = true, default_value_t = 4_000_000)]
    pub snf_budget: usize,
    /// Seed for prime selection and random sampling.
    #[arg(long, global = true, default_value_t = birsym_core::linalg::primes::DEFAULT_SEED)]
    pub seed: u64,
    /// Comma-separated primes for rational ranks (default: three seeded primes).
    #[arg(long, global = true, value_delimiter = ',')]
    pub primes: Vec<u32>,
    /// Write the JSON report here (`-` for stdout).
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Write the CSV table here (`-` for stdout).
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Progress messages on stderr.
    #[arg(long, short, global = true)]
    pub verbose: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Dimension of a symbol group over Q or F_p.
    Dim(DimArgs),
    /// Dimension of a partial system with a restricted set of relation degrees.
    Partial(DimArgs),
    /// Order of one symbol in the integral group.
    Order(OrderArgs),
    /// Elementary divisors of the integral presentation.
    Torsion(SystemArgs),
    /// Hecke operator: well-definedness check and characteristic polynomial.
    Hecke(HeckeArgs),
    /// The comparison map from B_n to M_n.
    Mu(MuArgs),
    /// Primitive or coprimitive part.
    Primitive(PrimitiveArgs),
    /// Classical Manin symbols for Gamma_1(N).
    Modsym(ModsymArgs),
    /// Blowup invariant of a fixed-locus description.
    Beta(BetaArgs),
    /// Stream a relation matrix in SMS format.
    ExportSms(ExportArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GroupArgs {
    /// Group moduli, e.g. `9` or `2,2`.
    #[arg(long, value_delimiter = ',', required_unless_present = "levels", conflicts_with = "levels")]
    pub group: Vec<u32>,
    /// Range of cyclic levels for a table, e.g. `2-29` or `5,7,11`.
    #[arg(long)]
    pub levels: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct DimArgs {
    #[command(flatten)]
    pub groups: GroupArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "B")]
    pub flavor: Flavor,
    /// Relation degrees k (default: all).
    #[arg(long, value_delimiter = ',')]
    pub kset: Vec<usize>,
    /// `Q`, or a prime field such as `F2`.
    #[arg(long, default_value = "Q")]
    pub field: Field,
}

#[derive(Args, Debug, Clone)]
pub struct SystemArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub group: Vec<u32>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "B")]
    pub flavor: Flavor,
    #[arg(long, value_delimiter = ',')]
    pub kset: Vec<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct OrderArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// The symbol, e.g. `0,0,1`, or `1,0;0,1` for two-factor groups.
    #[arg(long)]
    pub element: String,
}

#[derive(Args, Debug, Clone)]
pub struct HeckeArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub group: Vec<u32>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "M")]
    pub flavor: Flavor,
    #[arg(long)]
    pub ell: u64,
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    /// Prime for the characteristic polynomial (default: first rank prime).
    #[arg(long)]
    pub prime: Option<u32>,
}

#[derive(Args, Debug, Clone)]
pub struct MuArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub group: Vec<u32>,
    #[arg(long)]
    pub n: usize,
    /// Also compute the integral cokernel.
    #[arg(long)]
    pub cokernel: bool,
}

#[derive(Args, Debug, Clone)]
pub struct PrimitiveArgs {
    #[command(flatten)]
    pub groups: GroupArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "Mminus")]
    pub flavor: Flavor,
    /// Compute the coprimitive part (cokernel of the co-multiplications' duals).
    #[arg(long)]
    pub co: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ModsymArgs {
    /// Level N, or a range such as `2-30`.
    #[arg(long)]
    pub level: String,
    /// Also compare with the M-minus symbol group of arity 2.
    #[arg(long)]
    pub compare: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CaseArg {
    I,
    Ii,
    Iii,
}

impl From<CaseArg> for BlowupCase {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::I => BlowupCase::I,
            CaseArg::Ii => BlowupCase::II,
            CaseArg::Iii => BlowupCase::III,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SpanArg {
    Q,
    Z,
}

impl From<SpanArg> for SpanField {
    fn from(s: SpanArg) -> Self {
        match s {
            SpanArg::Q => SpanField::Q,
            SpanArg::Z => SpanField::Z,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct BetaArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub group: Vec<u32>,
    #[arg(long)]
    pub n: usize,
    /// Fixed-locus file: one `label: tuple` line per component.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSON blowup spec whose invariance should be certified.
    #[arg(long)]
    pub blowup: Option<PathBuf>,
    /// Certify this many random blowup specs of each case.
    #[arg(long, default_value_t = 0)]
    pub random: usize,
    /// Restrict random specs to one case.
    #[arg(long, value_enum)]
    pub case: Option<CaseArg>,
    /// Span used for certification.
    #[arg(long, value_enum, default_value = "z")]
    pub span: SpanArg,
}

#[derive(Args, Debug, Clone)]
pub struct ExportArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Keep self-negating M-minus symbols (needed for ranks over F_2).
    #[arg(long)]
    pub keep_self_negating: bool,
    /// SMS output path (`-` for stdout).
    #[arg(long, short)]
    pub output: PathBuf,
    /// Also write the symbol list, one symbol per line.
    #[arg(long)]
    pub symbols: Option<PathBuf>,
}

/// Parses `2-29`, `5,7,11` or a mix such as `2-5,9`.
pub fn parse_levels(s: &str) -> Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u32 = a.trim().parse().map_err(|e| format!("bad level {a:?}: {e}"))?;
                let b: u32 = b.trim().parse().map_err(|e| format!("bad level {b:?}: {e}"))?;
                if a > b {
                    return Err(format!("empty range {part:?}"));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|e| format!("bad level {part:?}: {e}"))?),
        }
    }
    if out.is_empty() {
        return Err("no levels given".into());
    }
    Ok(out)
}

impl GroupArgs {
    pub fn groups(&self) -> Result<Vec<Vec<u32>>, String> {
        match &self.levels {
            Some(l) => Ok(parse_levels(l)?.into_iter().map(|n| vec![n]).collect()),
            None => Ok(vec![self.group.clone()]),
        }
    }
}
