//! One function per scenario; each returns the bytes to emit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use catalysis::advopt::{advantage_map, write_csv};
use catalysis::catengine::{build_catalyst, effective_output, random_one_way_locc, run_subroutine, CopyLayout};
use catalysis::entmetrics::{max_entangled, phi_plus, singlet_fraction, tele_fidelity};
use catalysis::gencat::{work_report, Observable, WorkReport};
use catalysis::qstate::random::random_density;
use catalysis::qstate::{DensityMatrix, PureState};
use catalysis::smallcat::{optimize_x, small_catalyst, OptimalX, SmallCatReport};
use catalysis::teleporter::{avg_fidelity_mc, McEstimate};

use crate::config::{RunConfig, Scenario, XChoice};
use crate::error::CliError;

const TELEPORT_DIM: usize = 3;

#[derive(Debug, Serialize)]
pub struct TeleportDemo {
    pub scenario: &'static str,
    pub seed: u64,
    pub state: String,
    pub d: usize,
    pub singlet_fraction: f64,
    #[serde(rename = "F_std")]
    pub tele_std: f64,
    pub mc: McEstimate,
    pub within_3_stderr: bool,
}

#[derive(Debug, Serialize)]
pub struct SubroutineRun {
    pub index: usize,
    pub branches: usize,
    pub effective_defect: f64,
    pub catalyst_drift: f64,
    /// `2 * joint_correlation`.
    pub correlation: f64,
    /// `3 * epsilon_iid`.
    pub bound: f64,
    pub bound_satisfied: bool,
}

#[derive(Debug, Serialize)]
pub struct SubroutineVerify {
    pub scenario: &'static str,
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    pub runs: Vec<SubroutineRun>,
    pub max_effective_defect: f64,
    pub max_catalyst_drift: f64,
    pub bound_violations: usize,
}

#[derive(Debug, Serialize)]
pub struct SmallCatalyst {
    pub scenario: &'static str,
    pub x: f64,
    pub f: f64,
    #[serde(rename = "F")]
    pub tele: f64,
    pub catalyst_drift: f64,
    pub optimal: OptimalX,
    pub report: SmallCatReport,
}

#[derive(Debug, Serialize)]
pub struct Ergotropy {
    pub scenario: &'static str,
    pub populations: Vec<f64>,
    pub energies: Vec<f64>,
    pub n: usize,
    /// Collective work per copy exceeds the single-copy ergotropy at some `n`.
    pub activation: bool,
    pub report: WorkReport,
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

fn named_state(name: &str) -> Result<PureState, CliError> {
    match name {
        "singlet-in-qutrit" => Ok(max_entangled(2, TELEPORT_DIM)?),
        "phi-plus" => Ok(phi_plus(TELEPORT_DIM)),
        "product" => Ok(PureState::basis(vec![TELEPORT_DIM, TELEPORT_DIM], &[0, 0])?),
        other => Err(CliError::Usage(format!(
            "unknown state `{other}` (expected singlet-in-qutrit, phi-plus or product)"
        ))),
    }
}

pub fn run(cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
    match &cfg.scenario {
        Scenario::TeleportDemo { state, mc_samples } => {
            let rho = named_state(state)?.projector();
            let f = singlet_fraction(&rho)?;
            let tele_std = tele_fidelity(f, TELEPORT_DIM);
            let mc = avg_fidelity_mc(&rho, *mc_samples, cfg.seed)?;
            json(&TeleportDemo {
                scenario: "teleport-demo",
                seed: cfg.seed,
                state: state.clone(),
                d: TELEPORT_DIM,
                singlet_fraction: f,
                tele_std,
                within_3_stderr: mc.within(tele_std, 3.0),
                mc,
            })
        }
        Scenario::SubroutineVerify { n, d, channels } => json(&subroutine_verify(cfg.seed, *n, *d, *channels)?),
        Scenario::AdvantageMap { resolution, replicate } => {
            let points = advantage_map(*resolution, TELEPORT_DIM)?;
            let mut out = Vec::new();
            write_csv(&points, &mut out, *replicate)?;
            Ok(out)
        }
        Scenario::SmallCatalyst { x } => {
            let optimal = optimize_x();
            let x = match x {
                XChoice::Optimal => optimal.x_star,
                XChoice::Value(v) => *v,
            };
            let report = small_catalyst(x)?;
            json(&SmallCatalyst {
                scenario: "small-catalyst",
                x,
                f: report.singlet_fraction,
                tele: report.tele_fidelity,
                catalyst_drift: report.protocol.catalyst_drift,
                optimal,
                report,
            })
        }
        Scenario::Ergotropy { populations, energies, n } => {
            let rho = DensityMatrix::diagonal(populations, vec![populations.len()])?;
            let h = Observable::hamiltonian(energies);
            let report = work_report(&rho, &h, *n)?;
            let activation = report.per_copy_collective.values().any(|w| *w > report.single_copy + 1e-12);
            json(&Ergotropy {
                scenario: "ergotropy",
                populations: populations.clone(),
                energies: energies.clone(),
                n: *n,
                activation,
                report,
            })
        }
    }
}

/// Random states and one-way LOCC channels on `n` copies of `d x d`; run `k`
/// uses `stream k` of the seeded generator, so runs do not depend on each other.
fn subroutine_verify(seed: u64, n: usize, d: usize, channels: usize) -> Result<SubroutineVerify, CliError> {
    let layout = CopyLayout::bipartite(d, d, n)?;
    let mut runs = Vec::with_capacity(channels);
    for index in 0..channels {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let rho = random_density(&[d, d], d * d, &mut rng)?;
        let branches = 2 + index % 3;
        let e = random_one_way_locc(layout.clone(), branches, &mut rng)?;
        let cat = build_catalyst(&rho, &e, n)?;
        let report = run_subroutine(&rho, &cat, &e)?;
        let oracle = effective_output(&rho, &e)?;
        let correlation = 2.0 * report.joint_correlation.unwrap_or(f64::NAN);
        let bound = 3.0 * report.epsilon_iid.unwrap_or(f64::NAN);
        runs.push(SubroutineRun {
            index,
            branches,
            effective_defect: report.system_out.matrix().max_abs_diff(oracle.matrix()),
            catalyst_drift: report.catalyst_drift,
            correlation,
            bound,
            bound_satisfied: report.bound_3eps_satisfied.unwrap_or(false),
        });
    }
    Ok(SubroutineVerify {
        scenario: "subroutine-verify",
        seed,
        n,
        d,
        max_effective_defect: runs.iter().map(|r| r.effective_defect).fold(0.0, f64::max),
        max_catalyst_drift: runs.iter().map(|r| r.catalyst_drift).fold(0.0, f64::max),
        bound_violations: runs.iter().filter(|r| !r.bound_satisfied).count(),
        runs,
    })
}
