use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "redset", version, about = "Two-sided energy-density bounds for translation-invariant spin chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lower and upper bounds on the energy per bond of one model.
    Bounds(BoundsArgs),
    /// Test whether a two-qubit state admits an (N+1)-site extension with equal marginals.
    Membership(MembershipArgs),
    /// Exact XY energy density on a grid of anisotropies.
    Xy(XyArgs),
    /// Residual of the hypergeometric equation satisfied by the elliptic integral.
    OdeCheck(OdeCheckArgs),
    /// Fit the energy scale of the closed form against ring diagonalization.
    Calibrate(CalibrateArgs),
    /// Search for polynomial relations between an anisotropy and a target function.
    Probe(ProbeArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    /// xy, heisenberg, zz or file.
    #[arg(long, default_value = "zz")]
    pub model: String,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Hamiltonian JSON for `--model file`.
    #[arg(long)]
    pub hamiltonian: Option<PathBuf>,
    /// Open-chain lengths, e.g. `4:12` or `8,12`.
    #[arg(long, default_value = "")]
    pub open_n: String,
    #[arg(long, default_value = "")]
    pub ring_n: String,
    /// Relaxation levels N (extensions to N+1 sites).
    #[arg(long, default_value = "")]
    pub marginal_n: String,
    /// MPS bond dimensions.
    #[arg(long, default_value = "")]
    pub mps_d: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    /// Nelder–Mead iterations per restart.
    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,
    /// Energy resolution of the relaxation emptiness test.
    #[arg(long, default_value_t = 1e-4)]
    pub relaxation_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_feas: f64,
    #[arg(long, default_value_t = 50_000)]
    pub dykstra_max_iter: usize,
    /// Directory receiving the best MPS tensor of each bond dimension as JSON.
    #[arg(long)]
    pub tensor_dir: Option<PathBuf>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MembershipArgs {
    /// Density matrix in the text format (`d M` header, rows of `re+imj`).
    pub state: PathBuf,
    #[arg(long, short = 'n', default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_feas: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub tol_reject: f64,
    #[arg(long, default_value_t = 50_000)]
    pub max_iter: usize,
    /// Where to write the extension when the state is a member.
    #[arg(long)]
    pub witness: Option<PathBuf>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct XyArgs {
    #[arg(long, default_value = "0:1:0.1")]
    pub gamma_grid: String,
    /// Energy scale; fitted by ring diagonalization when omitted.
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct OdeCheckArgs {
    #[arg(long, default_value = "0.05:0.9:0.05")]
    pub m_grid: String,
    #[arg(long, default_value_t = 1e-4)]
    pub step: f64,
    #[arg(long)]
    pub richardson: bool,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CalibrateArgs {
    #[arg(long, default_value = "0,0.5,0.6,0.7,0.8,0.9")]
    pub gammas: String,
    /// Even ring sizes; the two largest enter the extrapolation.
    #[arg(long, default_value = "10,12,14")]
    pub ring_n: String,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ProbeArgs {
    /// eps_paper, eps_calibrated, control_x2, control_sqrt or control_exp.
    #[arg(long, default_value = "eps_paper")]
    pub target: String,
    #[arg(long, default_value_t = 6)]
    pub d_max: usize,
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Scale for eps_calibrated; fitted when omitted.
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}
