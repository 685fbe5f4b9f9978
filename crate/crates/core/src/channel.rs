//! Saleh-Valenzuela channels for the Tx-RIS and RIS-Rx links.
//!
//! Mean angles come from the node geometry, so they change whenever the RIS
//! moves. Per-path angular offsets and complex gains are drawn once per trial
//! ([`LinkDraw`]) and re-applied around the current mean angles.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scenario::{ArrayDims, Scenario};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Elevation (from the array normal) and azimuth, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub elevation: f64,
    pub azimuth: f64,
}

impl Direction {
    pub const fn new(elevation: f64, azimuth: f64) -> Self {
        Self { elevation, azimuth }
    }

    /// Directional cosines `sin(theta) * (cos(psi), sin(psi))`.
    pub fn cosines(&self) -> (f64, f64) {
        let s = self.elevation.sin();
        (s * self.azimuth.cos(), s * self.azimuth.sin())
    }
}

/// Mean departure/arrival directions and length of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub departure: Direction,
    pub arrival: Direction,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkTag {
    /// Transmitter to RIS (or relay).
    TI,
    /// RIS (or relay) to receiver.
    IR,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub gain: Complex64,
    pub departure: Direction,
    pub arrival: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub link: LinkTag,
    pub distance: f64,
    pub paths: Vec<Path>,
}

/// Frozen randomness of one path: complex gain and offsets from the mean angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathDraw {
    pub gain: Complex64,
    pub departure_offset: Direction,
    pub arrival_offset: Direction,
}

/// Frozen randomness of one link for a whole trial.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkDraw {
    pub paths: Vec<PathDraw>,
}

/// Both RIS links of one Monte Carlo trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDraw {
    pub ti: LinkDraw,
    pub ir: LinkDraw,
}

#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// `M_I x M_1`
    pub h_ti: CMatrix,
    /// `M_2 x M_I`
    pub h_ir: CMatrix,
    pub ti_paths: PathSet,
    pub ir_paths: PathSet,
}

/// Unit-norm URA steering vector, x-major Kronecker ordering.
///
/// Entry `(mx, my)` has phase `-2 pi d (mx sin(theta) cos(psi) + my sin(theta) sin(psi))`.
pub fn steering_vector(elevation: f64, azimuth: f64, dims: ArrayDims, spacing: f64) -> CVector {
    let scale = 1.0 / (dims.count() as f64).sqrt();
    unit_steering(Direction::new(elevation, azimuth), dims, spacing).map(|v| v * scale)
}

/// Steering vector with unit-modulus entries (norm `sqrt(M)`).
pub(crate) fn unit_steering(dir: Direction, dims: ArrayDims, spacing: f64) -> CVector {
    let (cx, cy) = dir.cosines();
    let kx = -2.0 * PI * spacing * cx;
    let ky = -2.0 * PI * spacing * cy;
    let row_x: Vec<Complex64> = (0..dims.x).map(|m| Complex64::cis(kx * m as f64)).collect();
    let row_y: Vec<Complex64> = (0..dims.y).map(|m| Complex64::cis(ky * m as f64)).collect();
    CVector::from_fn(dims.count(), |i, _| row_x[i / dims.y] * row_y[i % dims.y])
}

pub fn path_loss_db(carrier_ghz: f64, distance: f64, exponent: f64) -> f64 {
    32.4 + 20.0 * carrier_ghz.log10() + 10.0 * exponent * distance.log10()
}

/// Linear power attenuation `10^((32.4 + 20 log10 f_c + 10 eta log10 tau) / 10)`.
pub fn path_loss_linear(carrier_ghz: f64, distance: f64, exponent: f64) -> f64 {
    10f64.powf(path_loss_db(carrier_ghz, distance, exponent) / 10.0)
}

/// Mean link angles between two horizontal arrays (Tx/UE facing up, RIS facing down).
///
/// Elevation is measured from the vertical array normal, so it is the same at
/// both ends. Departure azimuth points from `a` to `b`; arrival azimuth points
/// from `b` back towards `a`.
pub fn mean_angles_from_geometry(a: [f64; 3], b: [f64; 3]) -> Result<LinkGeometry> {
    let dx = b[0] - a[0];
    let dy = b[1] - a[1];
    let dz = b[2] - a[2];
    let horizontal = dx.hypot(dy);
    let distance = horizontal.hypot(dz);
    if !(distance > 0.0) {
        return Err(Error::DegenerateGeometry(format!(
            "coincident link endpoints at {a:?}"
        )));
    }
    let elevation = horizontal.atan2(dz.abs());
    Ok(LinkGeometry {
        departure: Direction::new(elevation, dy.atan2(dx)),
        arrival: Direction::new(elevation, (-dy).atan2(-dx)),
        distance,
    })
}

impl PathDraw {
    fn sample<R: Rng + ?Sized>(spread_elev: f64, spread_azim: f64, rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let gain = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        let mut offset = |spread: f64| (2.0 * rng.random::<f64>() - 1.0) * spread;
        let departure_offset = Direction::new(offset(spread_elev), offset(spread_azim));
        let arrival_offset = Direction::new(offset(spread_elev), offset(spread_azim));
        Self {
            gain,
            departure_offset,
            arrival_offset,
        }
    }
}

impl LinkDraw {
    /// `num_paths` CN(0,1) gains with angle offsets uniform in `±spread` (radians).
    pub fn sample<R: Rng + ?Sized>(
        num_paths: usize,
        spread_elev: f64,
        spread_azim: f64,
        rng: &mut R,
    ) -> Self {
        let paths = (0..num_paths)
            .map(|_| PathDraw::sample(spread_elev, spread_azim, rng))
            .collect();
        Self { paths }
    }

    /// Places the frozen offsets around the mean angles of `geometry`.
    pub fn realize(&self, geometry: &LinkGeometry, link: LinkTag) -> PathSet {
        let shift = |mean: Direction, off: Direction| {
            Direction::new(mean.elevation + off.elevation, mean.azimuth + off.azimuth)
        };
        let paths = self
            .paths
            .iter()
            .map(|p| Path {
                gain: p.gain,
                departure: shift(geometry.departure, p.departure_offset),
                arrival: shift(geometry.arrival, p.arrival_offset),
            })
            .collect();
        PathSet {
            link,
            distance: geometry.distance,
            paths,
        }
    }
}

impl TrialDraw {
    pub fn sample<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Self {
        let c = &scenario.config;
        let [se, sa] = c.angular_spread_deg.map(f64::to_radians);
        let ti = LinkDraw::sample(c.num_paths, se, sa, rng);
        let ir = LinkDraw::sample(c.num_paths, se, sa, rng);
        Self { ti, ir }
    }
}

/// Draws a fresh path set around the given mean geometry.
pub fn draw_paths<R: Rng + ?Sized>(
    geometry: &LinkGeometry,
    spread_elev: f64,
    spread_azim: f64,
    num_paths: usize,
    link: LinkTag,
    rng: &mut R,
) -> PathSet {
    LinkDraw::sample(num_paths, spread_elev, spread_azim, rng).realize(geometry, link)
}

/// `sum_l z_l a_r a_t^T` with unit-modulus steering vectors and no path loss.
pub fn path_sum(paths: &PathSet, tx: ArrayDims, rx: ArrayDims, spacing: f64) -> CMatrix {
    let mut h = CMatrix::zeros(rx.count(), tx.count());
    for p in &paths.paths {
        let ar = unit_steering(p.arrival, rx, spacing);
        let at = unit_steering(p.departure, tx, spacing);
        let ar = ar * p.gain;
        h.ger(Complex64::new(1.0, 0.0), &ar, &at, Complex64::new(1.0, 0.0));
    }
    h
}

/// Link matrix `H = sum_l z_l / sqrt(PL(tau)) a_r a_t^T`, shape `rx x tx`.
///
/// The steering vectors carry unit-modulus entries, i.e. the norm-1 vectors
/// scaled by `sqrt(M)`, so a single unit-gain path without loss has
/// `||H||_F = sqrt(M_r M_t)`.
pub fn link_channel(
    paths: &PathSet,
    tx: ArrayDims,
    rx: ArrayDims,
    carrier_ghz: f64,
    exponent: f64,
    spacing: f64,
) -> CMatrix {
    let amplitude = path_loss_linear(carrier_ghz, paths.distance, exponent).sqrt().recip();
    path_sum(paths, tx, rx, spacing) * Complex64::new(amplitude, 0.0)
}

/// `H_IR diag(e^{j phi}) H_TI`.
pub fn composite_channel(h_ir: &CMatrix, phases: &[f64], h_ti: &CMatrix) -> Result<CMatrix> {
    if h_ir.ncols() != phases.len() || h_ti.nrows() != phases.len() {
        return Err(Error::DimensionMismatch(format!(
            "H_IR has {} columns, {} phases, H_TI has {} rows",
            h_ir.ncols(),
            phases.len(),
            h_ti.nrows()
        )));
    }
    let mut scaled = h_ir.clone();
    for (mut col, &phi) in scaled.column_iter_mut().zip(phases) {
        col *= Complex64::cis(phi);
    }
    Ok(scaled * h_ti)
}

/// Builds the channel of one hop between two arrays placed at `from` and `to`.
pub fn hop_channel(
    scenario: &Scenario,
    draw: &LinkDraw,
    link: LinkTag,
    from: ([f64; 3], ArrayDims),
    to: ([f64; 3], ArrayDims),
) -> Result<(CMatrix, PathSet, LinkGeometry)> {
    let c = &scenario.config;
    let geometry = mean_angles_from_geometry(from.0, to.0)?;
    let paths = draw.realize(&geometry, link);
    let h = link_channel(
        &paths,
        from.1,
        to.1,
        c.carrier_frequency_ghz,
        c.path_loss_exponent,
        c.element_spacing_wavelengths,
    );
    Ok((h, paths, geometry))
}

impl ChannelRealization {
    /// Channels of both RIS links with the RIS at `ris_position`.
    pub fn at(scenario: &Scenario, draw: &TrialDraw, ris_position: [f64; 3]) -> Result<Self> {
        let c = &scenario.config;
        let g = &scenario.geometry;
        let (h_ti, ti_paths, _) = hop_channel(
            scenario,
            &draw.ti,
            LinkTag::TI,
            (g.tx_position, c.tx_antennas),
            (ris_position, c.ris_elements),
        )?;
        let (h_ir, ir_paths, _) = hop_channel(
            scenario,
            &draw.ir,
            LinkTag::IR,
            (ris_position, c.ris_elements),
            (g.ue_position, c.rx_antennas),
        )?;
        Ok(Self {
            h_ti,
            h_ir,
            ti_paths,
            ir_paths,
        })
    }

    pub fn composite(&self, phases: &[f64]) -> Result<CMatrix> {
        composite_channel(&self.h_ir, phases, &self.h_ti)
    }
}

/// Writes a matrix as text: a `rows cols` header then one `re im` pair per
/// entry in row-major order.
pub fn write_matrix<W: std::io::Write>(out: &mut W, m: &CMatrix) -> std::io::Result<()> {
    writeln!(out, "# complex matrix, row-major, one 're im' pair per line")?;
    writeln!(out, "{} {}", m.nrows(), m.ncols())?;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let v = m[(r, c)];
            writeln!(out, "{:e} {:e}", v.re, v.im)?;
        }
    }
    Ok(())
}

/// Inverse of [`write_matrix`].
pub fn read_matrix(text: &str) -> Result<CMatrix> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let bad = |what: &str| Error::Malformed(format!("matrix file: {what}"));
    let header = lines.next().ok_or_else(|| bad("missing header"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad("header")))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(bad("header"));
    };
    let mut m = CMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let line = lines.next().ok_or_else(|| bad("truncated"))?;
            let mut it = line.split_whitespace().map(str::parse::<f64>);
            match (it.next(), it.next()) {
                (Some(Ok(re)), Some(Ok(im))) => m[(r, c)] = Complex64::new(re, im),
                _ => return Err(bad("entry")),
            }
        }
    }
    Ok(m)
}

/// Numerical rank from singular values, relative tolerance `tol`.
pub fn numerical_rank(m: &CMatrix, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > max * tol).count()
}
