//! Particle-swarm joint design of RIS position and phase shifts.
//!
//! Particles live in the unit hypercube. For the joint problem a particle is
//! `[p_x, p_y, p_phi_1, ..., p_phi_MI]`, decoded affinely onto the platform
//! rectangle and onto `[0, 2 pi)`. The objective is the achievable rate of the
//! hybrid beamforming pipeline with the RIS at the decoded state; the per-trial
//! path gains and angle offsets stay frozen so the objective is deterministic.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::beamforming::{HbfSettings, LinkDesign, RfStages};
use crate::channel::{hop_channel, CMatrix, ChannelRealization, LinkTag, TrialDraw};
use crate::error::{Error, Result};
use crate::scenario::{DeploymentGeometry, Scenario};

/// Upper bound on the number of brute-force evaluations.
pub const MAX_GRID_POINTS: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoParams {
    /// Number of particles `Z`.
    #[serde(rename = "pso_swarm_size")]
    pub swarm_size: usize,
    /// Number of iterations `T`.
    #[serde(rename = "pso_iterations")]
    pub iterations: usize,
    /// Weight of the pull towards the global best (`mu_1`).
    #[serde(rename = "pso_social_weight")]
    pub social_weight: f64,
    /// Weight of the pull towards the personal best (`mu_2`).
    #[serde(rename = "pso_cognitive_weight")]
    pub cognitive_weight: f64,
    /// Inertia `mu_3` at the first iteration, decayed linearly to `inertia_end`.
    #[serde(rename = "pso_inertia_start")]
    pub inertia_start: f64,
    #[serde(rename = "pso_inertia_end")]
    pub inertia_end: f64,
    /// Per-dimension velocity limit as a fraction of the unit range.
    #[serde(rename = "pso_velocity_clamp")]
    pub velocity_clamp: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            swarm_size: 10,
            iterations: 30,
            social_weight: 2.0,
            cognitive_weight: 2.0,
            inertia_start: 0.9,
            inertia_end: 0.4,
            velocity_clamp: 0.2,
        }
    }
}

impl PsoParams {
    pub fn check(&self) -> std::result::Result<(), String> {
        if self.swarm_size == 0 {
            return Err("swarm size must be at least 1".into());
        }
        if self.iterations == 0 {
            return Err("iterations must be at least 1".into());
        }
        if !(self.social_weight > 0.0 && self.cognitive_weight > 0.0) {
            return Err("acceleration weights must be positive".into());
        }
        if !(self.inertia_start.is_finite() && self.inertia_end.is_finite()) {
            return Err("inertia schedule must be finite".into());
        }
        if !(self.velocity_clamp > 0.0 && self.velocity_clamp <= 1.0) {
            return Err("velocity clamp must lie in (0, 1]".into());
        }
        Ok(())
    }

    /// Inertia weight at iteration `t` in `1..=T`.
    pub fn inertia(&self, t: usize) -> f64 {
        if self.iterations <= 1 {
            return self.inertia_start;
        }
        let frac = (t.saturating_sub(1)) as f64 / (self.iterations - 1) as f64;
        self.inertia_start + (self.inertia_end - self.inertia_start) * frac.min(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    pub particles: Vec<Particle>,
    pub best_position: Vec<f64>,
    pub best_value: f64,
    /// Global best value after initialization and after every iteration.
    pub history: Vec<f64>,
}

fn score(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

impl SwarmState {
    /// Zero velocities and uniform positions; personal bests are the starting points.
    pub fn initialize<R, F>(dim: usize, params: &PsoParams, rng: &mut R, fitness: F) -> Self
    where
        R: Rng + ?Sized,
        F: Fn(&[f64]) -> f64,
    {
        let particles: Vec<Particle> = (0..params.swarm_size.max(1))
            .map(|_| {
                let position: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
                let value = score(fitness(&position));
                Particle {
                    velocity: vec![0.0; dim],
                    best_position: position.clone(),
                    position,
                    best_value: value,
                }
            })
            .collect();
        let mut state = Self {
            best_position: particles[0].best_position.clone(),
            best_value: particles[0].best_value,
            particles,
            history: Vec::with_capacity(params.iterations + 1),
        };
        state.update_global_best();
        state.history.push(state.best_value);
        state
    }

    /// Strict improvement only, visiting particles in index order, so ties keep
    /// the earliest iteration and then the lowest index.
    fn update_global_best(&mut self) {
        for p in &self.particles {
            if p.best_value > self.best_value {
                self.best_value = p.best_value;
                self.best_position.clone_from(&p.best_position);
            }
        }
    }

    /// One iteration: velocity and position updates, then personal and global bests.
    pub fn step<R, F>(&mut self, params: &PsoParams, t: usize, rng: &mut R, fitness: F)
    where
        R: Rng + ?Sized,
        F: Fn(&[f64]) -> f64,
    {
        let inertia = params.inertia(t);
        let vmax = params.velocity_clamp;
        for p in &mut self.particles {
            for d in 0..p.position.len() {
                let y1: f64 = rng.random();
                let y2: f64 = rng.random();
                let x = p.position[d];
                let v = params.social_weight * y1 * (self.best_position[d] - x)
                    + params.cognitive_weight * y2 * (p.best_position[d] - x)
                    + inertia * p.velocity[d];
                let v = v.clamp(-vmax, vmax);
                let moved = x + v;
                if (0.0..=1.0).contains(&moved) {
                    p.position[d] = moved;
                    p.velocity[d] = v;
                } else {
                    p.position[d] = moved.clamp(0.0, 1.0);
                    p.velocity[d] = 0.0;
                }
            }
            let value = score(fitness(&p.position));
            if value > p.best_value {
                p.best_value = value;
                p.best_position.clone_from(&p.position);
            }
        }
        self.update_global_best();
        self.history.push(self.best_value);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoOutcome {
    pub best_position: Vec<f64>,
    pub best_value: f64,
    pub history: Vec<f64>,
}

/// Maximizes `fitness` over `[0, 1]^dim`.
pub fn run_pso<R, F>(dim: usize, params: &PsoParams, rng: &mut R, fitness: F) -> PsoOutcome
where
    R: Rng + ?Sized,
    F: Fn(&[f64]) -> f64,
{
    let mut swarm = SwarmState::initialize(dim, params, rng, &fitness);
    for t in 1..=params.iterations {
        swarm.step(params, t, rng, &fitness);
    }
    PsoOutcome {
        best_position: swarm.best_position,
        best_value: swarm.best_value,
        history: swarm.history,
    }
}

/// Platform coordinates and per-element phase shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct RisState {
    pub x: f64,
    pub y: f64,
    pub phases: Vec<f64>,
}

impl RisState {
    pub fn position(&self, geometry: &DeploymentGeometry) -> [f64; 3] {
        geometry.platform_point(self.x, self.y)
    }

    /// Phases in `[0, 2 pi)` and position on the platform.
    pub fn is_feasible(&self, geometry: &DeploymentGeometry) -> bool {
        geometry.contains(self.x, self.y) && self.phases.iter().all(|p| (0.0..TAU).contains(p))
    }
}

/// `[0, 1] -> [0, 2 pi)`, identifying the endpoint with zero.
pub fn decode_phase(p: f64) -> f64 {
    let phi = TAU * p.clamp(0.0, 1.0);
    if phi >= TAU {
        0.0
    } else {
        phi
    }
}

pub fn decode_position(px: f64, py: f64, geometry: &DeploymentGeometry) -> (f64, f64) {
    let [x0, x1] = geometry.platform_x_range;
    let [y0, y1] = geometry.platform_y_range;
    (
        x0 + px.clamp(0.0, 1.0) * (x1 - x0),
        y0 + py.clamp(0.0, 1.0) * (y1 - y0),
    )
}

/// Decodes a joint particle `[p_x, p_y, p_phi...]`.
pub fn decode(particle: &[f64], geometry: &DeploymentGeometry) -> RisState {
    assert!(particle.len() >= 2, "joint particle needs two position entries");
    let (x, y) = decode_position(particle[0], particle[1], geometry);
    RisState {
        x,
        y,
        phases: particle[2..].iter().map(|&p| decode_phase(p)).collect(),
    }
}

/// RIS links with the RIS parked at one position: the phase-independent
/// factors `G2 = F2 H_IR` and `G1 = H_TI F1` are computed once.
#[derive(Debug, Clone)]
pub struct PositionedRis<'a> {
    hbf: &'a HbfSettings,
    pub rf: RfStages,
    g1: CMatrix,
    g2: CMatrix,
}

impl PositionedRis<'_> {
    /// Effective channel `G2 diag(e^{j phi}) G1`.
    pub fn effective(&self, phases: &[f64]) -> CMatrix {
        let mut scaled = self.g2.clone();
        for (mut col, &phi) in scaled.column_iter_mut().zip(phases) {
            col *= Complex64::cis(phi);
        }
        scaled * &self.g1
    }

    pub fn design(&self, phases: &[f64]) -> LinkDesign {
        self.hbf.design(&self.rf, self.effective(phases))
    }

    pub fn rate(&self, phases: &[f64]) -> f64 {
        self.design(phases).rate.rate
    }
}

/// One trial of the RIS link: scenario, frozen randomness and HBF settings.
#[derive(Debug, Clone)]
pub struct RisProblem<'a> {
    pub scenario: &'a Scenario,
    pub draw: &'a TrialDraw,
    pub hbf: HbfSettings,
}

impl<'a> RisProblem<'a> {
    pub fn new(scenario: &'a Scenario, draw: &'a TrialDraw) -> Result<Self> {
        Ok(Self {
            scenario,
            draw,
            hbf: HbfSettings::from_scenario(scenario)?,
        })
    }

    pub fn num_elements(&self) -> usize {
        self.scenario.config.ris_elements.count()
    }

    /// Rebuilds both links and the RF stages for the RIS at `(x, y)`.
    pub fn at_position(&self, x: f64, y: f64) -> Result<PositionedRis<'_>> {
        let c = &self.scenario.config;
        let g = &self.scenario.geometry;
        let ris = g.platform_point(x, y);
        let (h_ti, _, ti_geo) = hop_channel(
            self.scenario,
            &self.draw.ti,
            LinkTag::TI,
            (g.tx_position, c.tx_antennas),
            (ris, c.ris_elements),
        )?;
        let (h_ir, _, ir_geo) = hop_channel(
            self.scenario,
            &self.draw.ir,
            LinkTag::IR,
            (ris, c.ris_elements),
            (g.ue_position, c.rx_antennas),
        )?;
        let rf = self.hbf.rf_for(ti_geo.departure, ir_geo.arrival)?;
        let g1 = h_ti * &rf.f1;
        let g2 = &rf.f2 * h_ir;
        Ok(PositionedRis {
            hbf: &self.hbf,
            rf,
            g1,
            g2,
        })
    }

    pub fn realization(&self, state: &RisState) -> Result<ChannelRealization> {
        ChannelRealization::at(self.scenario, self.draw, state.position(&self.scenario.geometry))
    }

    pub fn design_at(&self, state: &RisState) -> Result<LinkDesign> {
        if state.phases.len() != self.num_elements() {
            return Err(Error::DimensionMismatch(format!(
                "{} phases for {} RIS elements",
                state.phases.len(),
                self.num_elements()
            )));
        }
        Ok(self.at_position(state.x, state.y)?.design(&state.phases))
    }

    pub fn rate_at(&self, state: &RisState) -> Result<f64> {
        Ok(self.design_at(state)?.rate.rate)
    }

    /// Joint objective on a particle; failures score negative infinity.
    pub fn fitness(&self, particle: &[f64]) -> f64 {
        let state = decode(particle, &self.scenario.geometry);
        self.rate_at(&state).unwrap_or(f64::NEG_INFINITY)
    }
}

#[derive(Debug, Clone)]
pub struct JointOutcome {
    pub state: RisState,
    pub rate: f64,
    pub history: Vec<f64>,
}

/// Joint position and phase design over `M_I + 2` dimensions.
pub fn optimize_joint<R: Rng + ?Sized>(
    problem: &RisProblem<'_>,
    params: &PsoParams,
    rng: &mut R,
) -> JointOutcome {
    let dim = problem.num_elements() + 2;
    let out = run_pso(dim, params, rng, |p| problem.fitness(p));
    JointOutcome {
        state: decode(&out.best_position, &problem.scenario.geometry),
        rate: out.best_value,
        history: out.history,
    }
}

fn grid_coordinate(i: usize, steps: usize) -> f64 {
    if steps <= 1 {
        0.5
    } else {
        i as f64 / (steps - 1) as f64
    }
}

/// Exhaustive search over `position_steps^2` platform points (endpoints
/// included) times `phase_steps^M_I` phase vectors `2 pi k / phase_steps`.
pub fn brute_force_joint(
    problem: &RisProblem<'_>,
    position_steps: usize,
    phase_steps: usize,
) -> Result<(RisState, f64)> {
    let m = problem.num_elements();
    let limit = MAX_GRID_POINTS;
    let too_large = || Error::GridTooLarge {
        points: u128::MAX,
        limit,
    };
    let phase_points = (phase_steps as u128)
        .checked_pow(m as u32)
        .ok_or_else(too_large)?;
    let points = (position_steps as u128)
        .checked_mul(position_steps as u128)
        .and_then(|p| p.checked_mul(phase_points))
        .ok_or_else(too_large)?;
    if points > limit || points == 0 {
        return Err(Error::GridTooLarge { points, limit });
    }

    let geometry = &problem.scenario.geometry;
    let mut best: Option<(RisState, f64)> = None;
    let mut digits = vec![0usize; m];
    for ix in 0..position_steps {
        for iy in 0..position_steps {
            let (x, y) = decode_position(
                grid_coordinate(ix, position_steps),
                grid_coordinate(iy, position_steps),
                geometry,
            );
            let parked = problem.at_position(x, y)?;
            digits.iter_mut().for_each(|d| *d = 0);
            loop {
                let phases: Vec<f64> = digits
                    .iter()
                    .map(|&k| TAU * k as f64 / phase_steps as f64)
                    .collect();
                let rate = score(parked.rate(&phases));
                if best.as_ref().is_none_or(|(_, r)| rate > *r) {
                    best = Some((RisState { x, y, phases }, rate));
                }
                // Odometer increment over the phase digits.
                let mut carry = true;
                for d in digits.iter_mut() {
                    *d += 1;
                    if *d < phase_steps {
                        carry = false;
                        break;
                    }
                    *d = 0;
                }
                if carry {
                    break;
                }
            }
        }
    }
    Ok(best.expect("grid has at least one point"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::scenario::ArrayDims;
    use std::f64::consts::PI;

    fn geometry() -> DeploymentGeometry {
        DeploymentGeometry::default()
    }

    #[test]
    fn decode_examples() {
        let g = geometry();
        let s = decode(&[0.0, 0.0, 0.0, 0.0], &g);
        assert_eq!((s.x, s.y), (40.0, 40.0));
        assert_eq!(s.phases, vec![0.0, 0.0]);
        let s = decode(&[0.5, 0.5, 0.5, 0.5, 0.5], &g);
        assert_eq!((s.x, s.y), (55.0, 55.0));
        assert!(s.phases.iter().all(|&p| (p - PI).abs() < 1e-15));
        let s = decode(&[1.0, 0.0, 0.25, 0.75], &g);
        assert_eq!((s.x, s.y), (70.0, 40.0));
        assert!((s.phases[0] - PI / 2.0).abs() < 1e-15);
        assert!((s.phases[1] - 1.5 * PI).abs() < 1e-15);
        assert_eq!(decode_phase(1.0), 0.0);
        assert!(decode(&[1.0, 1.0, 1.0], &g).is_feasible(&g));
    }

    #[test]
    fn inertia_schedule_is_linear() {
        let p = PsoParams::default();
        assert_eq!(p.inertia(1), 0.9);
        assert!((p.inertia(30) - 0.4).abs() < 1e-15);
        assert!((p.inertia(15) - (0.9 - 0.5 * 14.0 / 29.0)).abs() < 1e-15);
    }

    #[test]
    fn defaults_validate() {
        assert!(PsoParams::default().check().is_ok());
        let bad = PsoParams {
            velocity_clamp: 0.0,
            ..PsoParams::default()
        };
        assert!(bad.check().is_err());
    }

    #[test]
    fn swarm_at_global_best_with_zero_velocity_stays() {
        let params = PsoParams::default();
        let point = vec![0.3, 0.7, 0.1];
        let particle = Particle {
            position: point.clone(),
            velocity: vec![0.0; 3],
            best_position: point.clone(),
            best_value: 1.0,
        };
        let mut swarm = SwarmState {
            particles: vec![particle.clone(), particle],
            best_position: point.clone(),
            best_value: 1.0,
            history: vec![1.0],
        };
        let mut r = rng::stream(1, &[0]);
        swarm.step(&params, 1, &mut r, |_| 1.0);
        for p in &swarm.particles {
            assert_eq!(p.position, point);
        }
        assert_eq!(swarm.history, vec![1.0, 1.0]);
    }

    #[test]
    fn negative_sphere_improves_monotonically() {
        let params = PsoParams {
            swarm_size: 1,
            iterations: 40,
            ..PsoParams::default()
        };
        let f = |x: &[f64]| -x.iter().map(|v| (v - 0.5).powi(2)).sum::<f64>();
        let mut r = rng::stream(2, &[0]);
        let out = run_pso(4, &params, &mut r, f);
        assert!(out.history.windows(2).all(|w| w[1] >= w[0]));
        assert!(out.best_value >= out.history[0]);
        assert!(out.best_position.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn pure_drift_is_ballistic_and_clamped() {
        let params = PsoParams {
            swarm_size: 1,
            iterations: 5,
            social_weight: 0.0,
            cognitive_weight: 0.0,
            inertia_start: 1.0,
            inertia_end: 1.0,
            velocity_clamp: 0.2,
        };
        let mut swarm = SwarmState {
            particles: vec![Particle {
                position: vec![0.5, 0.1],
                velocity: vec![0.15, -0.04],
                best_position: vec![0.5, 0.1],
                best_value: 0.0,
            }],
            best_position: vec![0.5, 0.1],
            best_value: 0.0,
            history: vec![0.0],
        };
        let mut r = rng::stream(3, &[0]);
        let mut expect_x = 0.5;
        let mut expect_y = 0.1;
        for t in 1..=5 {
            swarm.step(&params, t, &mut r, |_| 0.0);
            expect_x = f64::min(expect_x + 0.15, 1.0);
            expect_y = f64::max(expect_y - 0.04, 0.0);
            let p = &swarm.particles[0];
            assert!((p.position[0] - expect_x).abs() < 1e-12, "t={t}");
            assert!((p.position[1] - expect_y).abs() < 1e-12, "t={t}");
        }
        // Velocity zeroed on the clamped dimensions.
        assert_eq!(swarm.particles[0].velocity, vec![0.0, 0.0]);
    }

    #[test]
    fn zero_iterations_returns_best_initial_particle() {
        let params = PsoParams {
            iterations: 0,
            ..PsoParams::default()
        };
        let f = |x: &[f64]| x[0];
        let mut r = rng::stream(4, &[0]);
        let out = run_pso(1, &params, &mut r, f);
        let mut r = rng::stream(4, &[0]);
        let best = (0..10).map(|_| r.random::<f64>()).fold(f64::MIN, f64::max);
        assert_eq!(out.best_value, best);
        assert_eq!(out.history.len(), 1);
    }

    #[test]
    fn ties_keep_lowest_index() {
        let params = PsoParams {
            iterations: 0,
            ..PsoParams::default()
        };
        let mut r = rng::stream(5, &[0]);
        let swarm = SwarmState::initialize(2, &params, &mut r, |_| 3.0);
        assert_eq!(swarm.best_position, swarm.particles[0].position);
    }

    #[test]
    fn nan_fitness_never_wins() {
        let params = PsoParams::default();
        let mut r = rng::stream(6, &[0]);
        let out = run_pso(2, &params, &mut r, |x| if x[0] > 0.5 { f64::NAN } else { x[1] });
        assert!(out.best_value.is_finite());
    }

    fn tiny_scenario(m_i: ArrayDims) -> Scenario {
        let mut s = Scenario::default();
        s.config.tx_antennas = ArrayDims::new(2, 2);
        s.config.rx_antennas = ArrayDims::new(2, 2);
        s.config.ris_elements = m_i;
        s
    }

    #[test]
    fn factored_design_matches_composite_channel() {
        let s = Scenario::default();
        let draw = TrialDraw::sample(&s, &mut rng::stream(7, &[0]));
        let problem = RisProblem::new(&s, &draw).unwrap();
        let mut r = rng::stream(7, &[1]);
        let state = RisState {
            x: 47.0,
            y: 61.5,
            phases: (0..64).map(|_| TAU * r.random::<f64>()).collect(),
        };
        let fast = problem.design_at(&state).unwrap();
        let real = problem.realization(&state).unwrap();
        let h = real.composite(&state.phases).unwrap();
        let parked = problem.at_position(state.x, state.y).unwrap();
        let slow = problem.hbf.design_for_channel(&parked.rf, &h).unwrap();
        let diff = (&fast.effective.matrix - &slow.effective.matrix).norm();
        assert!(diff <= 1e-10 * slow.effective.matrix.norm());
        assert!((fast.rate.rate - slow.rate.rate).abs() <= 1e-10 * slow.rate.rate.max(1e-300));
    }

    #[test]
    fn fitness_is_pure_and_two_pi_periodic() {
        let s = tiny_scenario(ArrayDims::new(2, 1));
        let draw = TrialDraw::sample(&s, &mut rng::stream(8, &[0]));
        let problem = RisProblem::new(&s, &draw).unwrap();
        let p = [0.3, 0.8, 0.2, 0.9];
        assert_eq!(problem.fitness(&p), problem.fitness(&p));
        let state = decode(&p, &s.geometry);
        let mut shifted = state.clone();
        shifted.phases[1] += TAU;
        let a = problem.rate_at(&state).unwrap();
        let b = problem.rate_at(&shifted).unwrap();
        assert!((a - b).abs() <= 1e-10 * a);
    }

    #[test]
    fn zero_channel_scores_zero_everywhere() {
        let s = tiny_scenario(ArrayDims::new(2, 1));
        let mut draw = TrialDraw::sample(&s, &mut rng::stream(9, &[0]));
        for p in draw.ti.paths.iter_mut().chain(draw.ir.paths.iter_mut()) {
            p.gain = Complex64::new(0.0, 0.0);
        }
        let problem = RisProblem::new(&s, &draw).unwrap();
        let mut r = rng::stream(9, &[1]);
        for _ in 0..20 {
            let p: Vec<f64> = (0..4).map(|_| r.random()).collect();
            assert_eq!(problem.fitness(&p), 0.0);
        }
    }

    #[test]
    fn single_cell_grid_is_one_evaluation() {
        let s = tiny_scenario(ArrayDims::new(2, 1));
        let draw = TrialDraw::sample(&s, &mut rng::stream(10, &[0]));
        let problem = RisProblem::new(&s, &draw).unwrap();
        let (state, rate) = brute_force_joint(&problem, 1, 1).unwrap();
        assert_eq!((state.x, state.y), (55.0, 55.0));
        assert_eq!(rate, problem.rate_at(&state).unwrap());
    }

    #[test]
    fn brute_force_matches_hand_loop() {
        let s = tiny_scenario(ArrayDims::new(1, 1));
        let draw = TrialDraw::sample(&s, &mut rng::stream(11, &[0]));
        let problem = RisProblem::new(&s, &draw).unwrap();
        let (_, best) = brute_force_joint(&problem, 4, 8).unwrap();
        let mut hand = f64::NEG_INFINITY;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..8 {
                    let state = RisState {
                        x: 40.0 + 10.0 * i as f64,
                        y: 40.0 + 10.0 * j as f64,
                        phases: vec![2.0 * PI * k as f64 / 8.0],
                    };
                    hand = hand.max(problem.rate_at(&state).unwrap());
                }
            }
        }
        assert_eq!(best, hand);
    }

    #[test]
    fn brute_force_refuses_huge_grids() {
        let s = Scenario::default();
        let draw = TrialDraw::sample(&s, &mut rng::stream(12, &[0]));
        let problem = RisProblem::new(&s, &draw).unwrap();
        assert!(matches!(
            brute_force_joint(&problem, 10, 4),
            Err(Error::GridTooLarge { .. })
        ));
    }

    #[test]
    fn brute_force_argmax_beats_random_particles() {
        let s = tiny_scenario(ArrayDims::new(2, 1));
        let draw = TrialDraw::sample(&s, &mut rng::stream(14, &[0]));
        let problem = RisProblem::new(&s, &draw).unwrap();
        let (state, best) = brute_force_joint(&problem, 8, 8).unwrap();
        assert_eq!(problem.rate_at(&state).unwrap(), best);
        let mut r = rng::stream(14, &[1]);
        for _ in 0..100 {
            let p: Vec<f64> = (0..4).map(|_| r.random()).collect();
            assert!(problem.fitness(&p) <= best);
        }
    }

    #[test]
    fn swarm_improves_on_its_start_for_most_seeds() {
        let s = Scenario::default();
        let improved = (0..100u64)
            .filter(|&seed| {
                let draw = TrialDraw::sample(&s, &mut rng::stream(seed, &[0]));
                let problem = RisProblem::new(&s, &draw).unwrap();
                let out = optimize_joint(&problem, &s.config.pso, &mut rng::stream(seed, &[1]));
                out.history[out.history.len() - 1] > out.history[0]
            })
            .count();
        assert!(improved >= 95, "{improved} of 100");
    }

    #[test]
    fn joint_history_is_monotone() {
        let s = tiny_scenario(ArrayDims::new(2, 1));
        let draw = TrialDraw::sample(&s, &mut rng::stream(13, &[0]));
        let problem = RisProblem::new(&s, &draw).unwrap();
        let out = optimize_joint(&problem, &s.config.pso, &mut rng::stream(13, &[1]));
        assert_eq!(out.history.len(), s.config.pso.iterations + 1);
        assert!(out.history.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(out.rate, *out.history.last().unwrap());
        assert!(out.state.is_feasible(&s.geometry));
        assert_eq!(problem.rate_at(&out.state).unwrap(), out.rate);
    }
}
