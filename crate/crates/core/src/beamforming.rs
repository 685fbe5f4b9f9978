//! Angular-based hybrid beamforming.
//!
//! The RF stages are built from quantized angle pairs whose cells cover the
//! AoD/AoA support of the link, which depends only on slowly varying angle
//! statistics. The baseband stages come from the SVD of the reduced effective
//! channel `F2 H F1`.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Cholesky, SymmetricEigen};
use num_complex::Complex64;

use crate::channel::{CMatrix, CVector, Direction};
use crate::error::{Error, Result};
use crate::scenario::{ArrayDims, Scenario};

/// Singular values below `RANK_TOLERANCE * sigma_max` count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;
/// Noise covariance condition number above which the rate is regularized.
pub const MAX_NOISE_CONDITION: f64 = 1e12;
const RIDGE: f64 = 1e-12;
const GEOM_EPS: f64 = 1e-12;
const OVERLAP_SAMPLES: usize = 24;

/// Quantized directional cosines `-1 + (2u - 1) / M` along each axis.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedGrid {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

pub fn build_grid(dims: ArrayDims) -> QuantizedGrid {
    let axis = |m: usize| -> Vec<f64> {
        (1..=m)
            .map(|u| -1.0 + (2 * u - 1) as f64 / m as f64)
            .collect()
    };
    QuantizedGrid {
        x: axis(dims.x),
        y: axis(dims.y),
    }
}

impl QuantizedGrid {
    /// Half widths of the cell owned by each grid pair.
    pub fn half_cell(&self) -> (f64, f64) {
        (1.0 / self.x.len() as f64, 1.0 / self.y.len() as f64)
    }

    pub fn len(&self) -> usize {
        self.x.len() * self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pair at flat index `u * My + k`.
    pub fn pair(&self, index: usize) -> BeamPair {
        let my = self.y.len();
        BeamPair::new(self.x[index / my], self.y[index % my])
    }

    fn cell_of(&self, px: f64, py: f64) -> usize {
        let (hx, hy) = self.half_cell();
        let u = (((px + 1.0) / (2.0 * hx)).floor().max(0.0) as usize).min(self.x.len() - 1);
        let k = (((py + 1.0) / (2.0 * hy)).floor().max(0.0) as usize).min(self.y.len() - 1);
        u * self.y.len() + k
    }
}

/// A quantized beam direction in directional-cosine space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamPair {
    pub lx: f64,
    pub ly: f64,
}

impl BeamPair {
    pub const fn new(lx: f64, ly: f64) -> Self {
        Self { lx, ly }
    }

    pub fn in_unit_disk(&self) -> bool {
        self.lx * self.lx + self.ly * self.ly <= 1.0 + GEOM_EPS
    }
}

/// Directional-cosine region `{sin(theta) (cos psi, sin psi)}` over an
/// elevation interval and an azimuth interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSupport {
    pub elevation: [f64; 2],
    pub azimuth: [f64; 2],
}

/// Annular sector: radius interval and an azimuth wedge narrower than pi.
#[derive(Debug, Clone, Copy)]
struct Sector {
    radius: [f64; 2],
    azimuth: [f64; 2],
}

type Point = (f64, f64);

impl AngleSupport {
    pub fn around(mean: Direction, spread_elev: f64, spread_azim: f64) -> Self {
        Self {
            elevation: [mean.elevation - spread_elev, mean.elevation + spread_elev],
            azimuth: [mean.azimuth - spread_azim, mean.azimuth + spread_azim],
        }
    }

    /// Image of the mean direction.
    pub fn center(&self) -> Point {
        let mid = Direction::new(
            0.5 * (self.elevation[0] + self.elevation[1]),
            0.5 * (self.azimuth[0] + self.azimuth[1]),
        );
        mid.cosines()
    }

    /// Splits the elevation interval where `sin(theta)` changes sign; the
    /// negative part maps to the opposite azimuth.
    fn sectors(&self) -> Vec<Sector> {
        let [a, b] = self.elevation;
        let mut out = Vec::with_capacity(2);
        if b >= 0.0 {
            let p0 = a.max(0.0);
            let (s0, s1) = (p0.sin(), b.sin());
            let hi = if p0 <= FRAC_PI_2 && FRAC_PI_2 <= b {
                1.0
            } else {
                s0.max(s1)
            };
            out.push(Sector {
                radius: [s0.min(s1).max(0.0), hi],
                azimuth: self.azimuth,
            });
        }
        if a < 0.0 {
            let n1 = b.min(0.0);
            out.push(Sector {
                radius: [(-n1).sin(), (-a).sin()],
                azimuth: [self.azimuth[0] + PI, self.azimuth[1] + PI],
            });
        }
        out
    }

    /// Exact test of whether the axis-aligned cell centered at `center` with
    /// half widths `half` touches the support region.
    pub fn intersects_cell(&self, center: Point, half: Point) -> bool {
        self.sectors()
            .iter()
            .any(|s| sector_meets_rect(s, center, half))
    }

    /// Area-weighted samples `(x, y, weight)` of the support region.
    fn samples(&self, n: usize) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let [t0, t1] = self.elevation;
        let [p0, p1] = self.azimuth;
        let dt = (t1 - t0) / n as f64;
        let dp = (p1 - p0) / n as f64;
        (0..n * n).map(move |i| {
            let theta = t0 + ((i / n) as f64 + 0.5) * dt;
            let psi = p0 + ((i % n) as f64 + 0.5) * dp;
            let (x, y) = Direction::new(theta, psi).cosines();
            (x, y, (theta.sin() * theta.cos()).abs() * dt * dp)
        })
    }
}

fn clip(poly: &[Point], normal: Point) -> Vec<Point> {
    let side = |p: &Point| normal.0 * p.0 + normal.1 * p.1;
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let cur = poly[i];
        let next = poly[(i + 1) % poly.len()];
        let (sc, sn) = (side(&cur), side(&next));
        if sc >= -GEOM_EPS {
            out.push(cur);
        }
        if (sc >= -GEOM_EPS) != (sn >= -GEOM_EPS) {
            let t = sc / (sc - sn);
            out.push((cur.0 + t * (next.0 - cur.0), cur.1 + t * (next.1 - cur.1)));
        }
    }
    out
}

fn segment_distance(a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (-(a.0 * dx + a.1 * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a.0 + t * dx).hypot(a.1 + t * dy)
}

fn sector_meets_rect(s: &Sector, c: Point, h: Point) -> bool {
    let rect = [
        (c.0 - h.0, c.1 - h.1),
        (c.0 + h.0, c.1 - h.1),
        (c.0 + h.0, c.1 + h.1),
        (c.0 - h.0, c.1 + h.1),
    ];
    let [a0, a1] = s.azimuth;
    let mid = 0.5 * (a0 + a1);
    // Wedge = left of the a0 ray, right of the a1 ray, in front of the bisector.
    let normals = [
        (-a0.sin(), a0.cos()),
        (a1.sin(), -a1.cos()),
        (mid.cos(), mid.sin()),
    ];
    let mut poly = rect.to_vec();
    for n in normals {
        poly = clip(&poly, n);
        if poly.is_empty() {
            return false;
        }
    }
    let r_max = poly.iter().map(|p| p.0.hypot(p.1)).fold(0.0, f64::max);
    // The wedge apex is the origin, so the clipped polygon holds the origin
    // exactly when the rectangle does.
    let origin_inside = (c.0.abs() <= h.0 + GEOM_EPS) && (c.1.abs() <= h.1 + GEOM_EPS);
    let r_min = if origin_inside {
        0.0
    } else {
        (0..poly.len())
            .map(|i| segment_distance(poly[i], poly[(i + 1) % poly.len()]))
            .fold(f64::INFINITY, f64::min)
    };
    r_min <= s.radius[1] + GEOM_EPS && r_max >= s.radius[0] - GEOM_EPS
}

/// Bounds on the number of RF chains per side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RfChainPolicy {
    pub min: usize,
    pub max: usize,
}

impl RfChainPolicy {
    pub fn from_scenario(s: &Scenario) -> Self {
        let c = &s.config;
        let min = c.num_streams.max(c.min_rf_chains);
        Self {
            min,
            max: c.max_rf_chains.max(min),
        }
    }
}

/// Grid pairs whose cells intersect the support, ordered by descending
/// overlap area and clamped to `[policy.min, policy.max]`.
///
/// Pairs outside the unit disk are not physical directions and never chosen.
/// When too few cells intersect, the pairs closest to the support center fill
/// the deficit.
pub fn select_beams(
    grid: &QuantizedGrid,
    support: &AngleSupport,
    policy: RfChainPolicy,
) -> Vec<BeamPair> {
    let half = grid.half_cell();
    let center = support.center();
    let dist = |p: &BeamPair| (p.lx - center.0).hypot(p.ly - center.1);

    let mut overlap = vec![0.0; grid.len()];
    for (x, y, w) in support.samples(OVERLAP_SAMPLES) {
        overlap[grid.cell_of(x, y)] += w;
    }

    let physical: Vec<usize> = (0..grid.len())
        .filter(|&i| grid.pair(i).in_unit_disk())
        .collect();
    let (mut hits, mut rest): (Vec<usize>, Vec<usize>) =
        physical.into_iter().partition(|&i| {
            let p = grid.pair(i);
            support.intersects_cell((p.lx, p.ly), half)
        });

    hits.sort_by(|&i, &j| {
        overlap[j]
            .partial_cmp(&overlap[i])
            .unwrap_or(Ordering::Equal)
            .then_with(|| dist(&grid.pair(i)).total_cmp(&dist(&grid.pair(j))))
            .then(i.cmp(&j))
    });
    hits.truncate(policy.max);
    if hits.len() < policy.min {
        rest.sort_by(|&i, &j| {
            dist(&grid.pair(i))
                .total_cmp(&dist(&grid.pair(j)))
                .then(i.cmp(&j))
        });
        let need = policy.min - hits.len();
        hits.extend(rest.into_iter().take(need));
    }
    hits.into_iter().map(|i| grid.pair(i)).collect()
}

/// Constant-modulus beam `e^{+j 2 pi d (mx lx + my ly)} / sqrt(M)`.
pub fn beam_vector(beam: BeamPair, dims: ArrayDims, spacing: f64) -> Result<CVector> {
    if !beam.in_unit_disk() {
        return Err(Error::InvalidBeam {
            lx: beam.lx,
            ly: beam.ly,
        });
    }
    let scale = 1.0 / (dims.count() as f64).sqrt();
    let kx = 2.0 * PI * spacing * beam.lx;
    let ky = 2.0 * PI * spacing * beam.ly;
    Ok(CVector::from_fn(dims.count(), |i, _| {
        let (mx, my) = ((i / dims.y) as f64, (i % dims.y) as f64);
        Complex64::from_polar(scale, kx * mx + ky * my)
    }))
}

/// Analog beamformer `F1` (`M1 x N_RF1`) and combiner `F2` (`N_RF2 x M2`).
#[derive(Debug, Clone)]
pub struct RfStages {
    pub f1: CMatrix,
    pub f2: CMatrix,
}

pub fn rf_stages(
    beams_tx: &[BeamPair],
    beams_rx: &[BeamPair],
    tx: ArrayDims,
    rx: ArrayDims,
    spacing: f64,
) -> Result<RfStages> {
    if beams_tx.is_empty() || beams_rx.is_empty() {
        return Err(Error::DimensionMismatch("empty beam list".into()));
    }
    let cols: Vec<CVector> = beams_tx
        .iter()
        .map(|&b| beam_vector(b, tx, spacing))
        .collect::<Result<_>>()?;
    let rows: Vec<CVector> = beams_rx
        .iter()
        .map(|&b| beam_vector(b, rx, spacing))
        .collect::<Result<_>>()?;
    let f1 = CMatrix::from_columns(&cols);
    let f2 = CMatrix::from_fn(rows.len(), rx.count(), |r, c| rows[r][c]);
    Ok(RfStages { f1, f2 })
}

/// Effective channel seen by the baseband stages and its SVD.
///
/// Singular values are sorted non-increasing. Each right singular vector is
/// rotated so its first non-zero entry is real positive, with the matching
/// left vector rotated identically.
#[derive(Debug, Clone)]
pub struct EffectiveChannel {
    pub matrix: CMatrix,
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
    pub rank: usize,
}

impl EffectiveChannel {
    pub fn new(matrix: CMatrix) -> Self {
        let svd = matrix.clone().svd(true, true);
        let u_raw = svd.u.expect("u requested");
        let v_raw = svd.v_t.expect("v requested").adjoint();
        let sv = svd.singular_values;

        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]).then(i.cmp(&j)));

        let mut u = CMatrix::zeros(u_raw.nrows(), order.len());
        let mut v = CMatrix::zeros(v_raw.nrows(), order.len());
        let mut singular_values = Vec::with_capacity(order.len());
        for (dst, &src) in order.iter().enumerate() {
            let vc = v_raw.column(src);
            let scale = vc.norm().max(f64::MIN_POSITIVE);
            let rotation = vc
                .iter()
                .find(|z| z.norm() > 1e-10 * scale)
                .map(|z| z.conj() / z.norm())
                .unwrap_or(Complex64::new(1.0, 0.0));
            v.set_column(dst, &(vc * rotation));
            u.set_column(dst, &(u_raw.column(src) * rotation));
            singular_values.push(sv[src]);
        }

        let top = singular_values.first().copied().unwrap_or(0.0);
        let rank = if top > 0.0 {
            singular_values
                .iter()
                .filter(|&&s| s > top * RANK_TOLERANCE)
                .count()
        } else {
            0
        };
        Self {
            matrix,
            u,
            singular_values,
            v,
            rank,
        }
    }
}

/// `F2 H F1` and its SVD.
pub fn effective_channel(f2: &CMatrix, h: &CMatrix, f1: &CMatrix) -> Result<EffectiveChannel> {
    if f2.ncols() != h.nrows() || h.ncols() != f1.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "F2 {}x{}, H {}x{}, F1 {}x{}",
            f2.nrows(),
            f2.ncols(),
            h.nrows(),
            h.ncols(),
            f1.nrows(),
            f1.ncols()
        )));
    }
    Ok(EffectiveChannel::new(f2 * h * f1))
}

/// Baseband precoder `B1` (`N_RF1 x s`) and combiner `B2` (`s x N_RF2`).
#[derive(Debug, Clone)]
pub struct BasebandStages {
    pub b1: CMatrix,
    pub b2: CMatrix,
    pub streams: usize,
    /// Fewer than the requested streams were supported by the channel rank.
    pub rank_deficient: bool,
}

/// `B1 = sqrt(P_T / s) V_1`, `B2 = U_1^H` over the `s` strongest modes.
///
/// `s = N_S` unless the channel rank is smaller, in which case the trial keeps
/// `rank` streams and is flagged. The transmit power `||F1 B1||_F^2` is then
/// checked against `P_T` and `B1` rescaled if the analog beams are not
/// orthonormal.
pub fn bb_stages(
    eff: &EffectiveChannel,
    f1: &CMatrix,
    transmit_power: f64,
    num_streams: usize,
) -> BasebandStages {
    let available = eff.singular_values.len();
    let rank_deficient = eff.rank < num_streams;
    let streams = if eff.rank == 0 {
        num_streams.min(available)
    } else {
        num_streams.min(eff.rank)
    };
    let v1 = eff.v.columns(0, streams).into_owned();
    let mut b1 = v1 * Complex64::new((transmit_power / streams as f64).sqrt(), 0.0);
    let radiated = (f1 * &b1).norm_squared();
    if radiated > 0.0 && ((radiated - transmit_power) / transmit_power).abs() > 1e-12 {
        b1 *= Complex64::new((transmit_power / radiated).sqrt(), 0.0);
    }
    let b2 = eff.u.columns(0, streams).adjoint();
    BasebandStages {
        b1,
        b2,
        streams,
        rank_deficient,
    }
}

#[derive(Debug, Clone)]
pub struct BeamformerSet {
    pub f1: CMatrix,
    pub b1: CMatrix,
    pub f2: CMatrix,
    pub b2: CMatrix,
}

impl BeamformerSet {
    pub fn new(rf: &RfStages, bb: &BasebandStages) -> Self {
        Self {
            f1: rf.f1.clone(),
            b1: bb.b1.clone(),
            f2: rf.f2.clone(),
            b2: bb.b2.clone(),
        }
    }

    /// `||F1 B1||_F^2`
    pub fn transmit_power(&self) -> f64 {
        (&self.f1 * &self.b1).norm_squared()
    }

    /// Largest deviation of any analog entry from `1/sqrt(M)`.
    pub fn modulus_error(&self) -> f64 {
        let dev = |m: &CMatrix, target: f64| {
            m.iter()
                .map(|z| (z.norm() - target).abs())
                .fold(0.0, f64::max)
        };
        let m1 = self.f1.nrows() as f64;
        let m2 = self.f2.ncols() as f64;
        dev(&self.f1, m1.sqrt().recip()).max(dev(&self.f2, m2.sqrt().recip()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEvaluation {
    /// bps/Hz
    pub rate: f64,
    /// The noise covariance was ill-conditioned and a ridge was added.
    pub regularized: bool,
}

/// `log2 det(I + X X^H)` from the singular values of `X`, accurate at low SNR.
fn log2_det_identity_plus_gram(x: &CMatrix) -> f64 {
    x.singular_values()
        .iter()
        .map(|s| (s * s).ln_1p())
        .sum::<f64>()
        / std::f64::consts::LN_2
}

/// `log2 det(I + W^{-1} B2 Hc B1 B1^H Hc^H B2^H)` with `W = sigma^2 B2 F2 F2^H B2^H`.
pub fn achievable_rate(set: &BeamformerSet, effective: &CMatrix, noise_power: f64) -> RateEvaluation {
    let signal = &set.b2 * effective * &set.b1;
    let f2b = &set.b2 * &set.f2;
    let mut w = (&f2b * f2b.adjoint()) * Complex64::new(noise_power, 0.0);
    let n = w.nrows();
    if n == 0 {
        return RateEvaluation {
            rate: 0.0,
            regularized: false,
        };
    }

    let eig = SymmetricEigen::new(w.clone()).eigenvalues;
    let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let well_conditioned = lo > 0.0 && hi / lo <= MAX_NOISE_CONDITION;

    if well_conditioned {
        if let Some(chol) = Cholesky::new(w.clone()) {
            let whitened = chol
                .l()
                .solve_lower_triangular(&signal)
                .expect("Cholesky factor is non-singular");
            return RateEvaluation {
                rate: log2_det_identity_plus_gram(&whitened),
                regularized: false,
            };
        }
    }

    // Ill-conditioned noise: ridge, then whiten and sum over singular values.
    let ridge = RIDGE * hi.max(noise_power).max(f64::MIN_POSITIVE);
    for i in 0..n {
        w[(i, i)] += Complex64::new(ridge, 0.0);
    }
    let eig = SymmetricEigen::new(w);
    let inv_sqrt = CMatrix::from_diagonal(&eig.eigenvalues.map(|e| {
        Complex64::new(e.max(ridge).sqrt().recip(), 0.0)
    }));
    let w_inv_sqrt = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint();
    let rate = log2_det_identity_plus_gram(&(w_inv_sqrt * signal));
    RateEvaluation {
        rate,
        regularized: true,
    }
}

/// Link-level settings of the hybrid beamforming pipeline.
#[derive(Debug, Clone)]
pub struct HbfSettings {
    pub tx: ArrayDims,
    pub rx: ArrayDims,
    pub spacing: f64,
    pub streams: usize,
    pub policy: RfChainPolicy,
    /// Elevation and azimuth spreads in radians.
    pub spread: [f64; 2],
    pub transmit_power: f64,
    pub noise_power: f64,
    tx_grid: QuantizedGrid,
    rx_grid: QuantizedGrid,
}

/// Beamformers, effective channel and rate of one link design.
#[derive(Debug, Clone)]
pub struct LinkDesign {
    pub beamformers: BeamformerSet,
    pub effective: EffectiveChannel,
    pub rate: RateEvaluation,
    pub streams: usize,
    pub rank_deficient: bool,
}

impl LinkDesign {
    pub fn flagged(&self) -> bool {
        self.rank_deficient || self.rate.regularized
    }
}

impl HbfSettings {
    /// Settings for the Tx and Rx arrays of the scenario.
    pub fn from_scenario(s: &Scenario) -> Result<Self> {
        Self::for_arrays(s, s.config.tx_antennas, s.config.rx_antennas)
    }

    /// Same pipeline with explicit transmit/receive arrays (relay hops).
    pub fn for_arrays(s: &Scenario, tx: ArrayDims, rx: ArrayDims) -> Result<Self> {
        let c = &s.config;
        Ok(Self {
            tx,
            rx,
            spacing: c.element_spacing_wavelengths,
            streams: c.num_streams,
            policy: RfChainPolicy::from_scenario(s),
            spread: c.angular_spread_deg.map(f64::to_radians),
            transmit_power: s.transmit_power_watts(),
            noise_power: s.noise_power()?,
            tx_grid: build_grid(tx),
            rx_grid: build_grid(rx),
        })
    }

    pub fn tx_support(&self, departure: Direction) -> AngleSupport {
        AngleSupport::around(departure, self.spread[0], self.spread[1])
    }

    pub fn rx_support(&self, arrival: Direction) -> AngleSupport {
        AngleSupport::around(arrival, self.spread[0], self.spread[1])
    }

    /// RF stages for a link whose mean AoD at the Tx is `departure` and mean
    /// AoA at the Rx is `arrival`.
    pub fn rf_for(&self, departure: Direction, arrival: Direction) -> Result<RfStages> {
        let beams_tx = select_beams(&self.tx_grid, &self.tx_support(departure), self.policy);
        let beams_rx = select_beams(&self.rx_grid, &self.rx_support(arrival), self.policy);
        rf_stages(&beams_tx, &beams_rx, self.tx, self.rx, self.spacing)
    }

    /// Baseband design and rate for an already reduced effective channel.
    pub fn design(&self, rf: &RfStages, effective: CMatrix) -> LinkDesign {
        let eff = EffectiveChannel::new(effective);
        let bb = bb_stages(&eff, &rf.f1, self.transmit_power, self.streams);
        let beamformers = BeamformerSet::new(rf, &bb);
        let rate = achievable_rate(&beamformers, &eff.matrix, self.noise_power);
        LinkDesign {
            beamformers,
            effective: eff,
            rate,
            streams: bb.streams,
            rank_deficient: bb.rank_deficient,
        }
    }

    /// Full pipeline for a channel matrix `h` (`M_rx x M_tx`).
    pub fn design_for_channel(&self, rf: &RfStages, h: &CMatrix) -> Result<LinkDesign> {
        let eff = effective_channel(&rf.f2, h, &rf.f1)?;
        Ok(self.design(rf, eff.matrix))
    }
}
