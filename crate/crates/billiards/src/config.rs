//! Run configuration and the JSON data-transfer shapes emitted by the CLI.
//! Every output file embeds the `RunConfig` that produced it, so any number
//! in a report can be traced to the tolerances and seeds behind it.

use serde::{Deserialize, Serialize};

use crate::billiard::{IterateParams, OrbitRecord, Terminal};
use crate::geometry::Point;
use crate::return_map::{Attractor, AttractorCatalog, FixedKind, Provenance};
use crate::skew::ReducedMap;

pub const DEFAULT_EPS: f64 = 1e-9;
pub const DEFAULT_BISECTION_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_STEPS: usize = 100_000;
pub const DEFAULT_PERIOD_CAP: usize = 10_000;

/// Everything needed to reproduce a run: identical config + seed must give
/// byte-identical JSON output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub polygon: String,
    pub rates: Vec<f64>,
    pub eps: f64,
    pub bisection_tol: f64,
    pub max_steps: usize,
    pub period_cap: usize,
    pub rng_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random_seeds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn iterate_params(&self) -> IterateParams {
        IterateParams {
            max_steps: self.max_steps,
            eps: self.eps,
            cycle_tol: self.eps,
            period_cap: self.period_cap,
            ..Default::default()
        }
    }
}

/// Top-level shape of every JSON report.
#[derive(Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub config: RunConfig,
    pub result: T,
}

pub fn point_dto(z: Point) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RotationDto {
    pub num: i64,
    pub den: usize,
}

#[derive(Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TerminalDto {
    Converged {
        period: usize,
        cycle: Vec<[f64; 2]>,
    },
    HitSingular {
        step: usize,
        multiplicity: usize,
    },
    BudgetExhausted,
}

#[derive(Debug, Serialize)]
pub struct OrbitRecordDto {
    pub seed: [f64; 2],
    pub steps: usize,
    pub word: Vec<usize>,
    pub terminal: TerminalDto,
}

impl From<&OrbitRecord> for OrbitRecordDto {
    fn from(rec: &OrbitRecord) -> Self {
        OrbitRecordDto {
            seed: point_dto(rec.seed),
            steps: rec.word.len(),
            word: rec.word.clone(),
            terminal: match &rec.terminal {
                Terminal::Converged { period, cycle } => TerminalDto::Converged {
                    period: *period,
                    cycle: cycle.iter().copied().map(point_dto).collect(),
                },
                Terminal::HitSingular { step, multiplicity } => TerminalDto::HitSingular {
                    step: *step,
                    multiplicity: *multiplicity,
                },
                Terminal::BudgetExhausted => TerminalDto::BudgetExhausted,
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct AttractorDto {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub period: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rotation: Option<RotationDto>,
    pub points: Vec<[f64; 2]>,
    pub word: Vec<usize>,
    /// Lower endpoint of the open rate interval on which the orbit exists
    /// (upper endpoint 1); absent for simulated orbits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exists_above: Option<f64>,
    pub degenerate: bool,
}

impl From<&Attractor> for AttractorDto {
    fn from(o: &Attractor) -> Self {
        let (kind, n) = match (o.provenance, o.kind) {
            (_, Some((FixedKind::Z, n))) => ("Z".to_string(), Some(n)),
            (_, Some((FixedKind::W, n))) | (_, Some((FixedKind::U, n))) => {
                ("W-U".to_string(), Some(n))
            }
            (Provenance::Simulated, None) => ("simulated".to_string(), None),
            (Provenance::ClosedForm, None) => ("closed-form".to_string(), None),
        };
        AttractorDto {
            kind,
            n,
            period: o.period,
            rotation: o.rotation.map(|(num, den)| RotationDto { num, den }),
            points: o.points.iter().copied().map(point_dto).collect(),
            word: o.word.clone(),
            exists_above: o.exists_above,
            degenerate: o.degenerate,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CatalogDto {
    pub orbits: Vec<AttractorDto>,
    pub periods: Vec<usize>,
}

impl From<&AttractorCatalog> for CatalogDto {
    fn from(c: &AttractorCatalog) -> Self {
        CatalogDto {
            orbits: c.orbits.iter().map(AttractorDto::from).collect(),
            periods: c.periods(),
        }
    }
}

/// Affine branch of a reduced map as a 2x2 real matrix plus offset, for
/// external verification of the skew-product factorization.
#[derive(Debug, Serialize)]
pub struct BranchDto {
    pub sigma: usize,
    pub matrix: [[f64; 2]; 2],
    pub offset: [f64; 2],
}

#[derive(Debug, Serialize)]
pub struct ReducedMapDto {
    pub k: usize,
    pub lambda: f64,
    pub center: [f64; 2],
    pub branches: Vec<BranchDto>,
}

pub fn reduced_map_dto(map: &ReducedMap) -> ReducedMapDto {
    ReducedMapDto {
        k: map.k(),
        lambda: map.lambda,
        center: point_dto(map.center),
        branches: map
            .branches
            .iter()
            .map(|b| BranchDto {
                sigma: b.sigma,
                // complex multiplication a+bi as [[a, -b], [b, a]]
                matrix: [[b.mult.re, -b.mult.im], [b.mult.im, b.mult.re]],
                offset: point_dto(b.offset),
            })
            .collect(),
    }
}
