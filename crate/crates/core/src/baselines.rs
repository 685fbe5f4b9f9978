//! Reference schemes compared against the jointly designed movable RIS.
//!
//! Every scheme consumes the same channel draw for a given `(seed, trial)`,
//! so differences between kinds are not masked by channel variance.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::beamforming::HbfSettings;
use crate::channel::{hop_channel, LinkTag, TrialDraw};
use crate::error::{Error, Result};
use crate::optimizer::{
    decode_phase, decode_position, optimize_joint, run_pso, PsoParams, RisProblem,
};
use crate::rng::{self, tag};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    FixedRisOptPhase,
    FixedRisRandomPhase,
    MovableRisRandomPhase,
    MovableRisJoint,
    FdRelay,
    HdRelay,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 6] = [
        BaselineKind::FixedRisOptPhase,
        BaselineKind::FixedRisRandomPhase,
        BaselineKind::MovableRisRandomPhase,
        BaselineKind::MovableRisJoint,
        BaselineKind::FdRelay,
        BaselineKind::HdRelay,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            BaselineKind::FixedRisOptPhase => "fixed_ris_opt_phase",
            BaselineKind::FixedRisRandomPhase => "fixed_ris_random_phase",
            BaselineKind::MovableRisRandomPhase => "movable_ris_random_phase",
            BaselineKind::MovableRisJoint => "movable_ris_joint",
            BaselineKind::FdRelay => "fd_relay",
            BaselineKind::HdRelay => "hd_relay",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown baseline '{s}'")))
    }
}

/// Parses a comma-separated list; `all` selects every kind.
pub fn parse_kinds(list: &str) -> Result<Vec<BaselineKind>> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(BaselineKind::ALL.to_vec());
    }
    let mut kinds = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<BaselineKind>>>()?;
    kinds.sort();
    kinds.dedup();
    if kinds.is_empty() {
        return Err(Error::InvalidConfig("empty baseline list".into()));
    }
    Ok(kinds)
}

/// Rate of one scheme on one trial and the platform point it used.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub rate: f64,
    pub position: Option<(f64, f64)>,
    /// Degraded stream count or regularized rate evaluation.
    pub flagged: bool,
}

/// Seeds for one trial: channel randomness keyed by `seed`, search
/// randomness keyed by `pso_seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeeds {
    pub seed: u64,
    pub pso_seed: u64,
    pub trial: u64,
}

impl TrialSeeds {
    pub fn new(seed: u64, trial: u64) -> Self {
        Self {
            seed,
            pso_seed: seed,
            trial,
        }
    }

    pub fn channel_draw(&self, scenario: &Scenario) -> TrialDraw {
        TrialDraw::sample(scenario, &mut rng::stream(self.seed, &[self.trial, tag::CHANNEL]))
    }

    pub fn random_phases(&self, count: usize) -> Vec<f64> {
        let mut r = rng::stream(self.seed, &[self.trial, tag::RANDOM_PHASES]);
        (0..count).map(|_| TAU * r.random::<f64>()).collect()
    }

    pub fn search_rng(&self, stream_tag: u64) -> rng::SimRng {
        rng::stream(self.pso_seed, &[self.trial, stream_tag])
    }
}

/// RIS at the platform center, with phases either searched by PSO or taken
/// from `random_phases`.
pub fn fixed_ris_rate<R: Rng + ?Sized>(
    problem: &RisProblem<'_>,
    optimize_phase: bool,
    random_phases: &[f64],
    params: &PsoParams,
    rng: &mut R,
) -> Result<TrialOutcome> {
    let g = &problem.scenario.geometry;
    let [x, y, _] = g.platform_center();
    let parked = problem.at_position(x, y)?;
    let phases = if optimize_phase {
        let out = run_pso(problem.num_elements(), params, rng, |p| {
            let phases: Vec<f64> = p.iter().map(|&v| decode_phase(v)).collect();
            parked.rate(&phases)
        });
        out.best_position.iter().map(|&v| decode_phase(v)).collect()
    } else {
        random_phases.to_vec()
    };
    let design = parked.design(&phases);
    Ok(TrialOutcome {
        rate: design.rate.rate,
        position: Some((x, y)),
        flagged: design.flagged(),
    })
}

/// Platform position searched by PSO with the phases held at `phases`.
pub fn movable_random_phase_rate<R: Rng + ?Sized>(
    problem: &RisProblem<'_>,
    phases: &[f64],
    params: &PsoParams,
    rng: &mut R,
) -> Result<TrialOutcome> {
    let g = &problem.scenario.geometry;
    let out = run_pso(2, params, rng, |p| {
        let (x, y) = decode_position(p[0], p[1], g);
        problem
            .at_position(x, y)
            .map(|parked| parked.rate(phases))
            .unwrap_or(f64::NEG_INFINITY)
    });
    let (x, y) = decode_position(out.best_position[0], out.best_position[1], g);
    let design = problem.at_position(x, y)?.design(phases);
    Ok(TrialOutcome {
        rate: design.rate.rate,
        position: Some((x, y)),
        flagged: design.flagged(),
    })
}

/// Joint position and phase design.
pub fn movable_joint_rate<R: Rng + ?Sized>(
    problem: &RisProblem<'_>,
    params: &PsoParams,
    rng: &mut R,
) -> Result<TrialOutcome> {
    let out = optimize_joint(problem, params, rng);
    let design = problem.design_at(&out.state)?;
    Ok(TrialOutcome {
        rate: out.rate,
        position: Some((out.state.x, out.state.y)),
        flagged: design.flagged(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Duplex {
    Full,
    Half,
}

/// Ideal decode-and-forward relay on the platform: receive array sized like
/// the UE array, transmit array sized like the Tx array, same power and noise.
#[derive(Debug, Clone)]
pub struct RelayProblem<'a> {
    pub scenario: &'a Scenario,
    pub draw: &'a TrialDraw,
    hop: HbfSettings,
}

/// Per-hop rates with the relay at one platform point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopRates {
    pub first: f64,
    pub second: f64,
    pub flagged: bool,
}

impl HopRates {
    pub fn full_duplex(&self) -> f64 {
        self.first.min(self.second)
    }
}

impl<'a> RelayProblem<'a> {
    pub fn new(scenario: &'a Scenario, draw: &'a TrialDraw) -> Result<Self> {
        let c = &scenario.config;
        Ok(Self {
            scenario,
            draw,
            hop: HbfSettings::for_arrays(scenario, c.tx_antennas, c.rx_antennas)?,
        })
    }

    pub fn hops_at(&self, x: f64, y: f64) -> Result<HopRates> {
        let c = &self.scenario.config;
        let g = &self.scenario.geometry;
        let relay = g.platform_point(x, y);
        let (h1, _, geo1) = hop_channel(
            self.scenario,
            &self.draw.ti,
            LinkTag::TI,
            (g.tx_position, c.tx_antennas),
            (relay, c.rx_antennas),
        )?;
        let (h2, _, geo2) = hop_channel(
            self.scenario,
            &self.draw.ir,
            LinkTag::IR,
            (relay, c.tx_antennas),
            (g.ue_position, c.rx_antennas),
        )?;
        let rf1 = self.hop.rf_for(geo1.departure, geo1.arrival)?;
        let rf2 = self.hop.rf_for(geo2.departure, geo2.arrival)?;
        let d1 = self.hop.design_for_channel(&rf1, &h1)?;
        let d2 = self.hop.design_for_channel(&rf2, &h2)?;
        Ok(HopRates {
            first: d1.rate.rate,
            second: d2.rate.rate,
            flagged: d1.flagged() || d2.flagged(),
        })
    }

    pub fn full_duplex_at(&self, x: f64, y: f64) -> f64 {
        self.hops_at(x, y)
            .map(|h| h.full_duplex())
            .unwrap_or(f64::NEG_INFINITY)
    }
}

/// Relay position searched by PSO for the full-duplex rate; the half-duplex
/// rate halves the same optimum.
pub fn relay_rate<R: Rng + ?Sized>(
    problem: &RelayProblem<'_>,
    duplex: Duplex,
    params: &PsoParams,
    rng: &mut R,
) -> Result<TrialOutcome> {
    let g = &problem.scenario.geometry;
    let out = run_pso(2, params, rng, |p| {
        let (x, y) = decode_position(p[0], p[1], g);
        problem.full_duplex_at(x, y)
    });
    let (x, y) = decode_position(out.best_position[0], out.best_position[1], g);
    let hops = problem.hops_at(x, y)?;
    let fd = hops.full_duplex();
    Ok(TrialOutcome {
        rate: match duplex {
            Duplex::Full => fd,
            Duplex::Half => 0.5 * fd,
        },
        position: Some((x, y)),
        flagged: hops.flagged,
    })
}

/// Runs one scheme on one trial. The channel draw and random phases depend
/// only on `(seed, trial)`, shared by every kind.
pub fn run_baseline(kind: BaselineKind, scenario: &Scenario, seeds: TrialSeeds) -> Result<TrialOutcome> {
    let draw = seeds.channel_draw(scenario);
    let params = &scenario.config.pso;
    match kind {
        BaselineKind::FdRelay | BaselineKind::HdRelay => {
            let relay = RelayProblem::new(scenario, &draw)?;
            let duplex = if kind == BaselineKind::FdRelay {
                Duplex::Full
            } else {
                Duplex::Half
            };
            relay_rate(&relay, duplex, params, &mut seeds.search_rng(tag::PSO_RELAY))
        }
        _ => {
            let problem = RisProblem::new(scenario, &draw)?;
            let phases = seeds.random_phases(problem.num_elements());
            match kind {
                BaselineKind::FixedRisOptPhase => fixed_ris_rate(
                    &problem,
                    true,
                    &phases,
                    params,
                    &mut seeds.search_rng(tag::PSO_FIXED_PHASE),
                ),
                BaselineKind::FixedRisRandomPhase => {
                    fixed_ris_rate(&problem, false, &phases, params, &mut seeds.search_rng(tag::PSO_FIXED_PHASE))
                }
                BaselineKind::MovableRisRandomPhase => movable_random_phase_rate(
                    &problem,
                    &phases,
                    params,
                    &mut seeds.search_rng(tag::PSO_MOVABLE_POSITION),
                ),
                _ => movable_joint_rate(&problem, params, &mut seeds.search_rng(tag::PSO_JOINT)),
            }
        }
    }
}
