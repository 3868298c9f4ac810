//! `rigidcert` — construct orthogonal representations, PSD equilibrium
//! stresses, kernel frameworks, and generic-global-rigidity certificates
//! from graph files; audit variety dimensions; probe the graph
//! realization SDP; and render the `K_{2,2}` sweep.
//!
//! Exit codes: 0 success, 2 verified-negative result (no rigid kernel
//! framework found, failed SDP vote, dimension-audit mismatch), 1 error.

mod artifacts;
mod k22;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use rigidcert_core::{
    certify, gor, lss, rigidity, sdp, superstable, Framework, Graph, SampleConfig,
};

#[derive(Parser)]
#[command(name = "rigidcert", version, about)]
struct Cli {
    /// Numerical tolerance for eigenvalue and residual thresholds
    /// (overrides the RIGIDCERT_TOL environment variable; default 1e-9).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact vertex connectivity of a graph, optionally checked against
    /// a dimension's (d+1)-connectivity requirement.
    Connectivity {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build and validate a general position orthogonal representation.
    Gor {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        retries: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a PSD equilibrium stress matrix of rank n-d-1.
    Stress {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract the kernel framework of a freshly built stress and test
    /// super stability.
    Kernel {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a certificate of generic global rigidity: a framework
    /// both infinitesimally rigid and super stable.
    Certify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        max_attempts: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Numerically audit the dimension formulas for the representation
    /// variety and the stress family.
    AuditDims {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the K_{2,2} reference curve, emitting per-angle kernel
    /// frameworks as JSON and SVG.
    K22Sweep {
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Scaling::Eq5)]
        scaling: Scaling,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Probe the graph realization SDP with repeated seeded runs and
    /// vote on whether the feasible set is a single congruence class.
    SdpProbe {
        /// Instance file (graph + dimension + squared edge lengths).
        #[arg(long, conflicts_with_all = ["graph", "framework"])]
        instance: Option<PathBuf>,
        /// Graph file, paired with --framework, to build an instance
        /// with provenance (enables the warm-started hunt run).
        #[arg(long, requires = "framework")]
        graph: Option<PathBuf>,
        #[arg(long, requires = "graph")]
        framework: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scaling {
    Eq5,
    Eq6,
}

impl Scaling {
    fn name(self) -> &'static str {
        match self {
            Scaling::Eq5 => "eq5",
            Scaling::Eq6 => "eq6",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = resolve_tol(cli.tol);
    match run(cli.command, tol) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn resolve_tol(flag: Option<f64>) -> f64 {
    if let Some(t) = flag {
        return t;
    }
    if let Ok(text) = std::env::var("RIGIDCERT_TOL") {
        if let Ok(t) = text.parse() {
            return t;
        }
        eprintln!("warning: ignoring unparsable RIGIDCERT_TOL={text:?}");
    }
    1e-9
}

fn load_graph(path: &std::path::Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading graph file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing graph file {}", path.display()))
}

fn emit(out: &Option<PathBuf>, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(command: Command, tol: f64) -> Result<u8> {
    match command {
        Command::Connectivity {
            graph,
            dim,
            seed,
            out,
        } => {
            let g = load_graph(&graph)?;
            let connectivity = g.vertex_connectivity();
            let report = artifacts::ConnectivityArtifact {
                command: "connectivity",
                seed: seed.unwrap_or(0),
                tol,
                n: g.n(),
                m: g.m(),
                connectivity,
                d: dim,
                is_d_plus_1_connected: dim.map(|d| connectivity >= d + 1),
            };
            emit(&out, &report)?;
            Ok(0)
        }
        Command::Gor {
            graph,
            dim,
            seed,
            retries,
            out,
        } => {
            let g = load_graph(&graph)?;
            let cfg = SampleConfig::new(seed);
            let rep = gor::build_gor(&g, dim, &cfg, retries)?;
            let validation = gor::validate_gor(&rep, None);
            let artifact = artifacts::GorArtifact {
                command: "gor",
                seed,
                tol,
                graph: g,
                rep: gor::OrthogonalRepJson::from(&rep),
                validation,
            };
            emit(&out, &artifact)?;
            Ok(0)
        }
        Command::Stress {
            graph,
            dim,
            seed,
            out,
        } => {
            let g = load_graph(&graph)?;
            let cfg = SampleConfig::new(seed);
            let rep = gor::build_gor(&g, dim, &cfg, 32)?;
            let phi = lss::find_centering_map(&rep, &cfg, 64)?;
            let stress = lss::lss_stress_matrix(&rep, &phi)?;
            let artifact = artifacts::StressArtifact {
                command: "stress",
                seed,
                tol,
                graph: g,
                rep: gor::OrthogonalRepJson::from(&rep),
                centering: phi.alpha().to_vec(),
                stress: certify::StressMatrixJson::from_stress(
                    &stress.omega,
                    stress.rank(),
                    &stress.psd.eigenvalues,
                    tol,
                ),
            };
            emit(&out, &artifact)?;
            Ok(0)
        }
        Command::Kernel {
            graph,
            dim,
            seed,
            out,
        } => {
            let g = load_graph(&graph)?;
            let cfg = SampleConfig::new(seed);
            let rep = gor::build_gor(&g, dim, &cfg, 32)?;
            let phi = lss::find_centering_map(&rep, &cfg, 64)?;
            let stress = lss::lss_stress_matrix(&rep, &phi)?;
            let framework = superstable::kernel_framework_default(&stress.omega, dim)?;
            let stability = superstable::certify_super_stable(&framework, &stress.omega, Some(tol))?;
            let artifact = artifacts::KernelArtifact {
                command: "kernel",
                seed,
                tol,
                graph: g,
                framework: rigidity::FrameworkJson::from(&framework),
                stress: certify::StressMatrixJson::from_stress(
                    &stress.omega,
                    stress.rank(),
                    &stress.psd.eigenvalues,
                    tol,
                ),
                stability,
            };
            emit(&out, &artifact)?;
            Ok(0)
        }
        Command::Certify {
            graph,
            dim,
            seed,
            max_attempts,
            out,
        } => {
            let g = load_graph(&graph)?;
            let cfg = SampleConfig::new(seed);
            match certify::find_certificate(&g, dim, &cfg, max_attempts) {
                Ok(cert) => {
                    let artifact = artifacts::CertifyArtifact {
                        command: "certify",
                        seed,
                        tol,
                        status: "certificate",
                        certificate: Some(cert.to_bundle()),
                        attempts: cert.attempts_used,
                        diagnostics: Vec::new(),
                    };
                    emit(&out, &artifact)?;
                    Ok(0)
                }
                Err(certify::CertifyError::NoRigidKernelFound {
                    attempts,
                    diagnostics,
                }) => {
                    let artifact = artifacts::CertifyArtifact {
                        command: "certify",
                        seed,
                        tol,
                        status: "no_rigid_kernel_found",
                        certificate: None,
                        attempts,
                        diagnostics,
                    };
                    emit(&out, &artifact)?;
                    Ok(2)
                }
                Err(other) => Err(other.into()),
            }
        }
        Command::AuditDims {
            graph,
            dim,
            seed,
            out,
        } => {
            let g = load_graph(&graph)?;
            let cfg = SampleConfig::new(seed);
            let d_g = gor::audit_gor_dimension(&g, dim, &cfg)?;
            let d_l = lss::audit_lss_dimension(&g, dim, &cfg)?;
            let ok = d_g.agrees() && d_l.agrees();
            let artifact = artifacts::AuditArtifact {
                command: "audit-dims",
                seed,
                tol,
                d_g,
                d_l,
                agrees: ok,
            };
            emit(&out, &artifact)?;
            Ok(if ok { 0 } else { 2 })
        }
        Command::K22Sweep {
            steps,
            scaling,
            out_dir,
            seed,
        } => {
            anyhow::ensure!(steps >= 2, "sweep needs at least 2 steps");
            let sweep = k22::run_sweep(steps, scaling, seed, tol)?;
            std::fs::create_dir_all(&out_dir)
                .with_context(|| format!("creating {}", out_dir.display()))?;
            for frame in &sweep.frames {
                let path = out_dir.join(format!("frame_{:02}.svg", frame.index));
                std::fs::write(&path, svg::render_frame(frame))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            emit(&Some(out_dir.join("sweep.json")), &sweep)?;
            Ok(0)
        }
        Command::SdpProbe {
            instance,
            graph,
            framework,
            runs,
            seed,
            out,
        } => {
            let inst = match (&instance, &graph, &framework) {
                (Some(path), None, None) => {
                    let text = std::fs::read_to_string(path)
                        .with_context(|| format!("reading instance {}", path.display()))?;
                    let json: sdp::InstanceJson = serde_json::from_str(&text)
                        .with_context(|| format!("parsing instance {}", path.display()))?;
                    sdp::RealizationInstance::from_json(&json)?
                }
                (None, Some(gpath), Some(fpath)) => {
                    let g = load_graph(gpath)?;
                    let text = std::fs::read_to_string(fpath)
                        .with_context(|| format!("reading framework {}", fpath.display()))?;
                    let json: rigidity::FrameworkJson = serde_json::from_str(&text)
                        .with_context(|| format!("parsing framework {}", fpath.display()))?;
                    let f = Framework::from_json(g, &json)?;
                    sdp::RealizationInstance::from_framework(&f)?
                }
                _ => anyhow::bail!("pass either --instance or --graph with --framework"),
            };
            let cfg = SampleConfig::new(seed);
            let vote = sdp::sdp_success_vote(&inst, runs, &cfg)?;
            let artifact = artifacts::SdpArtifact::build("sdp-probe", seed, tol, &inst, &vote);
            emit(&out, &artifact)?;
            Ok(if vote.success { 0 } else { 2 })
        }
    }
}
