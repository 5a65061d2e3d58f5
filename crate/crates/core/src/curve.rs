//! Closed curves as truncated Fourier series, arc-length reparametrization
//! and the geometric admissibility checks that guard every energy routine.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::fourier::{real_coefficients, PeriodicSeries, Twiddles};
use crate::quad::half_cell_offset;
use crate::vector::{Vector, MAX_DIM};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CurveError {
    #[error("dimension {0} is outside 2..={MAX_DIM}")]
    InvalidDimension(usize),
    #[error("expected {expected} coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
    #[error("curve needs at least one non-constant mode")]
    NoModes,
    #[error("coefficients contain a non-finite value")]
    NonFinite,
    #[error("invalid family parameters: {0}")]
    InvalidFamily(String),
    #[error("curve is not immersed: speed {speed:e} at theta = {theta}")]
    NotImmersed { theta: f64, speed: f64 },
    #[error("curve nearly self-intersects: chord {gap:e} between theta = {theta1} and {theta2}")]
    SelfContact { gap: f64, theta1: f64, theta2: f64 },
    #[error("length quadrature did not settle after {samples} samples")]
    LengthNotConverged { samples: usize },
    #[error("arc-length refit reached residual {residual:e} with {modes} modes (tolerance {tolerance:e})")]
    ReparamNotConverged {
        residual: f64,
        modes: usize,
        tolerance: f64,
    },
    #[error("target length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("grid size {0} is too small")]
    GridTooSmall(usize),
}

/// Position and first two derivatives at one parameter value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub position: Vector,
    pub velocity: Vector,
    pub acceleration: Vector,
}

/// Provenance of a curve: the family it was built from and its parameters.
#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurveMeta {
    pub family: String,
    pub params: BTreeMap<String, f64>,
}

impl CurveMeta {
    pub fn new(family: &str) -> Self {
        Self {
            family: family.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

/// A smooth closed curve parametrized over θ ∈ ℝ/ℤ.
pub trait Curve: Sync {
    fn dimension(&self) -> usize;

    fn jet(&self, theta: f64) -> Jet;

    fn position(&self, theta: f64) -> Vector {
        self.jet(theta).position
    }

    fn velocity(&self, theta: f64) -> Vector {
        self.jet(theta).velocity
    }

    /// `f(θ₁) − f(θ₂)`; implementors may avoid the cancellation of close pairs.
    fn chord(&self, theta1: f64, theta2: f64) -> Vector {
        self.position(theta1) - self.position(theta2)
    }

    fn meta(&self) -> CurveMeta;

    /// The Fourier representation, when the curve is one.
    fn as_closed(&self) -> Option<&ClosedCurve> {
        None
    }
}

/// Truncated Fourier series `f_d(θ) = a₀ + Σₖ aₖ cos 2πkθ + bₖ sin 2πkθ`.
///
/// Coefficients are stored per dimension as `[a₀, a₁, b₁, …, a_K, b_K]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedCurve {
    dim: usize,
    modes: usize,
    coeffs: Vec<f64>,
    meta: CurveMeta,
}

impl ClosedCurve {
    /// Builds a curve and verifies immersion and the chord-gap embeddedness proxy.
    pub fn new(
        dim: usize,
        modes: usize,
        coeffs: Vec<f64>,
        meta: CurveMeta,
    ) -> Result<Self, CurveError> {
        let curve = Self::unchecked(dim, modes, coeffs, meta)?;
        curve.check_admissible()?;
        Ok(curve)
    }

    fn unchecked(
        dim: usize,
        modes: usize,
        coeffs: Vec<f64>,
        meta: CurveMeta,
    ) -> Result<Self, CurveError> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(CurveError::InvalidDimension(dim));
        }
        if modes == 0 {
            return Err(CurveError::NoModes);
        }
        let expected = dim * (2 * modes + 1);
        if coeffs.len() != expected {
            return Err(CurveError::CoefficientCount {
                expected,
                got: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(CurveError::NonFinite);
        }
        Ok(Self {
            dim,
            modes,
            coeffs,
            meta,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// `[a₀, a₁, b₁, …]` of one coordinate.
    pub fn coordinate(&self, d: usize) -> &[f64] {
        let stride = 2 * self.modes + 1;
        &self.coeffs[d * stride..(d + 1) * stride]
    }

    pub fn metadata(&self) -> &CurveMeta {
        &self.meta
    }

    pub fn with_meta(mut self, meta: CurveMeta) -> Self {
        self.meta = meta;
        self
    }

    /// Derivative of order 0, 1 or 2 at θ.
    pub fn evaluate(&self, theta: f64, order: u8) -> Vector {
        let jet = self.jet(theta);
        match order {
            0 => jet.position,
            1 => jet.velocity,
            2 => jet.acceleration,
            _ => panic!("derivative order {order} is not supported"),
        }
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= factor;
        }
        out
    }

    /// Number of check nodes used by the admissibility tests.
    fn check_nodes(&self) -> usize {
        (8 * self.modes).clamp(256, 2048)
    }

    fn check_admissible(&self) -> Result<(), CurveError> {
        let m = self.check_nodes();
        let jets: Vec<Jet> = (0..m).map(|j| self.jet(j as f64 / m as f64)).collect();
        let speeds: Vec<f64> = jets.iter().map(|j| j.velocity.norm()).collect();
        let top = speeds.iter().cloned().fold(0.0, f64::max);
        for (j, &v) in speeds.iter().enumerate() {
            if !(v > 1e-12 * top) {
                return Err(CurveError::NotImmersed {
                    theta: j as f64 / m as f64,
                    speed: v,
                });
            }
        }
        let rough_length: f64 = (0..m)
            .map(|j| jets[j].position.distance(&jets[(j + 1) % m].position))
            .sum();
        let floor = 1e-9 * rough_length;
        for i in 0..m {
            for j in i + 2..m {
                if i == 0 && j == m - 1 {
                    continue;
                }
                let gap = jets[i].position.distance(&jets[j].position);
                if !(gap > floor) {
                    return Err(CurveError::SelfContact {
                        gap,
                        theta1: i as f64 / m as f64,
                        theta2: j as f64 / m as f64,
                    });
                }
            }
        }
        Ok(())
    }
}

impl Curve for ClosedCurve {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn jet(&self, theta: f64) -> Jet {
        let t = theta - libm::floor(theta);
        let stride = 2 * self.modes + 1;
        let mut position = Vector::zeros(self.dim);
        let mut velocity = Vector::zeros(self.dim);
        let mut acceleration = Vector::zeros(self.dim);
        for d in 0..self.dim {
            position[d] = self.coeffs[d * stride];
        }
        let (s1, c1) = libm::sincos(TAU * t);
        let (mut c, mut s) = (1.0, 0.0);
        for k in 1..=self.modes {
            if k % 32 == 1 {
                let phase = k as f64 * t;
                let (sk, ck) = libm::sincos(TAU * (phase - libm::floor(phase)));
                c = ck;
                s = sk;
            } else {
                let next = c * c1 - s * s1;
                s = s * c1 + c * s1;
                c = next;
            }
            let w = TAU * k as f64;
            for d in 0..self.dim {
                let a = self.coeffs[d * stride + 2 * k - 1];
                let b = self.coeffs[d * stride + 2 * k];
                let even = a * c + b * s;
                position[d] += even;
                velocity[d] += w * (b * c - a * s);
                acceleration[d] -= w * w * even;
            }
        }
        Jet {
            position,
            velocity,
            acceleration,
        }
    }

    /// Sums `2 sin(kδ)(b_k cos kσ − a_k sin kσ)` with `δ = π(θ₁ − θ₂)` and
    /// `σ = π(θ₁ + θ₂)`, so close pairs lose no digits to cancellation.
    fn chord(&self, theta1: f64, theta2: f64) -> Vector {
        let t1 = theta1 - libm::floor(theta1);
        let mut gap = theta1 - theta2;
        gap -= libm::round(gap);
        let (delta, sigma) = (PI * gap, PI * (2.0 * t1 - gap));
        let stride = 2 * self.modes + 1;
        let (sd1, cd1) = libm::sincos(delta);
        let (ss1, cs1) = libm::sincos(sigma);
        let (mut sd, mut cd, mut ss, mut cs) = (0.0, 1.0, 0.0, 1.0);
        let mut out = Vector::zeros(self.dim);
        for k in 1..=self.modes {
            if k % 32 == 1 {
                (sd, cd) = libm::sincos(k as f64 * delta);
                (ss, cs) = libm::sincos(k as f64 * sigma);
            } else {
                (sd, cd) = (sd * cd1 + cd * sd1, cd * cd1 - sd * sd1);
                (ss, cs) = (ss * cs1 + cs * ss1, cs * cs1 - ss * ss1);
            }
            for d in 0..self.dim {
                let a = self.coeffs[d * stride + 2 * k - 1];
                let b = self.coeffs[d * stride + 2 * k];
                out[d] += 2.0 * sd * (b * cs - a * ss);
            }
        }
        out
    }

    fn meta(&self) -> CurveMeta {
        self.meta.clone()
    }

    fn as_closed(&self) -> Option<&ClosedCurve> {
        Some(self)
    }
}

/// Named test curves.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "snake_case"))]
pub enum Family {
    /// Unit circle in the first two coordinates.
    Circle,
    /// `(a cos 2πθ, b sin 2πθ)`.
    Ellipse { a: f64, b: f64 },
    /// `(p, q)` torus knot on the torus with radii `major > minor > 0`.
    TorusKnot {
        p: u32,
        q: u32,
        major: f64,
        minor: f64,
    },
    /// Unit circle plus seeded modes 2 to 4 in every coordinate, scaled by `amplitude / k²`.
    PerturbedCircle { seed: u64, amplitude: f64 },
}

impl Family {
    pub fn trefoil() -> Self {
        Family::TorusKnot {
            p: 2,
            q: 3,
            major: 2.0,
            minor: 0.5,
        }
    }

    pub fn cinquefoil() -> Self {
        Family::TorusKnot {
            p: 2,
            q: 5,
            major: 2.0,
            minor: 0.4,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Circle => "circle",
            Family::Ellipse { .. } => "ellipse",
            Family::TorusKnot { .. } => "torus_knot",
            Family::PerturbedCircle { .. } => "perturbed_circle",
        }
    }

    fn meta(&self) -> CurveMeta {
        let meta = CurveMeta::new(self.name());
        match *self {
            Family::Circle => meta,
            Family::Ellipse { a, b } => meta.with("a", a).with("b", b),
            Family::TorusKnot { p, q, major, minor } => meta
                .with("p", p as f64)
                .with("q", q as f64)
                .with("major", major)
                .with("minor", minor),
            Family::PerturbedCircle { seed, amplitude } => {
                meta.with("seed", seed as f64).with("amplitude", amplitude)
            }
        }
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn positive(name: &str, x: f64) -> Result<(), CurveError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(CurveError::InvalidFamily(format!(
            "{name} must be positive, got {x}"
        )))
    }
}

/// Uniform draw in `[-1, 1)` from 53 random bits.
fn symmetric_unit(rng: &mut ChaCha8Rng) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    2.0 * u - 1.0
}

/// Builds the exact Fourier representation of a named family in ℝⁿ.
pub fn make_family(family: &Family, dimension: usize) -> Result<ClosedCurve, CurveError> {
    if !(2..=MAX_DIM).contains(&dimension) {
        return Err(CurveError::InvalidDimension(dimension));
    }
    let (modes, set): (usize, Vec<(usize, usize, bool, f64)>) = match *family {
        Family::Circle => (1, alloc::vec![(0, 1, true, 1.0), (1, 1, false, 1.0)]),
        Family::Ellipse { a, b } => {
            positive("a", a)?;
            positive("b", b)?;
            (1, alloc::vec![(0, 1, true, a), (1, 1, false, b)])
        }
        Family::TorusKnot { p, q, major, minor } => {
            if dimension < 3 {
                return Err(CurveError::InvalidFamily(
                    "torus knots need dimension >= 3".into(),
                ));
            }
            positive("minor", minor)?;
            if !(minor < major) || !major.is_finite() {
                return Err(CurveError::InvalidFamily(format!(
                    "torus radii need 0 < minor < major, got {minor} and {major}"
                )));
            }
            if p == 0 || q == 0 || gcd(p, q) != 1 {
                return Err(CurveError::InvalidFamily(format!(
                    "p = {p} and q = {q} must be coprime and positive"
                )));
            }
            let (p, q) = (p as usize, q as usize);
            // (R + r cos qt)(cos pt, sin pt) expands into modes p and p ± q.
            let mut set = alloc::vec![
                (0, p, true, major),
                (1, p, false, major),
                (0, p + q, true, 0.5 * minor),
                (1, p + q, false, 0.5 * minor),
                (2, q, false, minor),
            ];
            let diff = p.abs_diff(q);
            let sign = if p >= q { 1.0 } else { -1.0 };
            set.push((0, diff, true, 0.5 * minor));
            set.push((1, diff, false, 0.5 * minor * sign));
            (p + q, set)
        }
        Family::PerturbedCircle { seed, amplitude } => {
            if !(amplitude.is_finite() && amplitude >= 0.0) {
                return Err(CurveError::InvalidFamily(format!(
                    "amplitude must be non-negative, got {amplitude}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut set = alloc::vec![(0, 1, true, 1.0), (1, 1, false, 1.0)];
            for k in 2..=4usize {
                let scale = amplitude / (k * k) as f64;
                for d in 0..dimension {
                    set.push((d, k, true, scale * symmetric_unit(&mut rng)));
                    set.push((d, k, false, scale * symmetric_unit(&mut rng)));
                }
            }
            (4, set)
        }
    };
    let stride = 2 * modes + 1;
    let mut coeffs = alloc::vec![0.0; dimension * stride];
    for (d, k, cosine, value) in set {
        // k = 0 only arises for p = q = 1; the sine term vanishes there.
        if k == 0 && !cosine {
            continue;
        }
        let slot = if k == 0 {
            0
        } else if cosine {
            2 * k - 1
        } else {
            2 * k
        };
        coeffs[d * stride + slot] += value;
    }
    ClosedCurve::new(dimension, modes, coeffs, family.meta())
}

/// Periodic rectangle-rule length, doubled until two levels agree to 1e-12.
///
/// Returns the length and the sample count that achieved it.
fn length_with_samples<C: Curve + ?Sized>(curve: &C) -> Result<(f64, usize), CurveError> {
    const CAP: usize = 1 << 22;
    let mut m = 64;
    let mut sum: f64 = (0..m)
        .map(|j| curve.velocity(j as f64 / m as f64).norm())
        .sum();
    loop {
        let mid: f64 = (0..m)
            .map(|j| curve.velocity((j as f64 + 0.5) / m as f64).norm())
            .sum();
        let coarse = sum / m as f64;
        sum += mid;
        m *= 2;
        let fine = sum / m as f64;
        if (fine - coarse).abs() <= 1e-12 * fine.abs() {
            return Ok((fine, m));
        }
        if m >= CAP {
            return Err(CurveError::LengthNotConverged { samples: m });
        }
    }
}

/// Total length `∮‖f′(θ)‖dθ`.
pub fn total_length<C: Curve + ?Sized>(curve: &C) -> Result<f64, CurveError> {
    length_with_samples(curve).map(|(l, _)| l)
}

/// Uniform scaling that brings the total length to `target`.
pub fn rescale_to_length(curve: &ClosedCurve, target: f64) -> Result<ClosedCurve, CurveError> {
    if !(target.is_finite() && target > 0.0) {
        return Err(CurveError::InvalidLength(target));
    }
    let length = total_length(curve)?;
    Ok(curve.scaled(target / length))
}

/// Settings for [`reparametrize_arclength`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReparamOptions {
    /// Maximum relative deviation of the speed from the total length.
    pub tolerance: f64,
    pub initial_modes: usize,
    pub max_modes: usize,
}

impl Default for ReparamOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            initial_modes: 64,
            max_modes: 1024,
        }
    }
}

/// A constant-speed curve: `s = 𝓛θ` is arc length.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcLengthCurve {
    curve: ClosedCurve,
    length: f64,
    speed_residual: f64,
}

impl ArcLengthCurve {
    pub fn curve(&self) -> &ClosedCurve {
        &self.curve
    }

    pub fn into_curve(self) -> ClosedCurve {
        self.curve
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn speed_residual(&self) -> f64 {
        self.speed_residual
    }

    pub fn dimension(&self) -> usize {
        self.curve.dim
    }

    pub fn position(&self, s: f64) -> Vector {
        self.curve.position(s / self.length)
    }

    /// Position and unit tangent at arc length `s`.
    pub fn frame(&self, s: f64) -> (Vector, Vector) {
        let jet = self.curve.jet(s / self.length);
        let tangent = jet.velocity * (1.0 / jet.velocity.norm());
        (jet.position, tangent)
    }

    /// The same curve scaled to total length `target`.
    pub fn rescaled(&self, target: f64) -> Result<Self, CurveError> {
        if !(target.is_finite() && target > 0.0) {
            return Err(CurveError::InvalidLength(target));
        }
        Ok(Self {
            curve: self.curve.scaled(target / self.length),
            length: target,
            speed_residual: self.speed_residual,
        })
    }
}

/// Max relative deviation of `‖f′‖` from `length` at `m` nodes and midpoints.
fn speed_residual(curve: &ClosedCurve, length: f64, m: usize) -> f64 {
    (0..2 * m)
        .map(|j| (curve.velocity(j as f64 / (2 * m) as f64).norm() - length).abs() / length)
        .fold(0.0, f64::max)
}

/// Resamples `curve` to constant speed.
///
/// The cumulative length is the antiderivative of a Fourier fit of the speed;
/// it is inverted at `4K` nodes by safeguarded Newton steps and the samples are
/// refit to `K` modes, doubling `K` until the speed residual meets the tolerance.
pub fn reparametrize_arclength<C: Curve + ?Sized>(
    curve: &C,
    options: &ReparamOptions,
) -> Result<ArcLengthCurve, CurveError> {
    let (length, samples) = length_with_samples(curve)?;
    if let Some(closed) = curve.as_closed() {
        let residual = speed_residual(closed, length, (4 * closed.modes).max(256));
        if residual <= options.tolerance {
            return Ok(ArcLengthCurve {
                curve: closed.clone(),
                length,
                speed_residual: residual,
            });
        }
    }

    let q = (2 * samples).max(1024);
    let table = Twiddles::new(q);
    let speeds: Vec<f64> = (0..q)
        .map(|j| curve.velocity(j as f64 / q as f64).norm())
        .collect();
    let speed = PeriodicSeries::from_samples(&speeds, &table);
    let series_length = speed.mean();

    let dim = curve.dimension();
    let meta = curve.meta();
    let mut modes = options.initial_modes.max(1);
    let mut last_residual = f64::INFINITY;
    while modes <= options.max_modes {
        let m = 4 * modes;
        let thetas = invert_cumulative(&speed, series_length, m);
        let points: Vec<Vector> = thetas.iter().map(|&t| curve.position(t)).collect();
        let twiddles = Twiddles::new(m);
        let mut coeffs = Vec::with_capacity(dim * (2 * modes + 1));
        let mut column = alloc::vec![0.0; m];
        for d in 0..dim {
            for (slot, p) in column.iter_mut().zip(&points) {
                *slot = p[d];
            }
            coeffs.extend(real_coefficients(&column, modes, &twiddles));
        }
        let fitted = ClosedCurve::new(dim, modes, coeffs, meta.clone())?;
        let residual = speed_residual(&fitted, length, m);
        if residual <= options.tolerance {
            return Ok(ArcLengthCurve {
                curve: fitted,
                length,
                speed_residual: residual,
            });
        }
        last_residual = residual;
        modes *= 2;
    }
    Err(CurveError::ReparamNotConverged {
        residual: last_residual,
        modes: modes / 2,
        tolerance: options.tolerance,
    })
}

/// Parameters `θ_j` with cumulative length `j/m` of the total, `j = 0..m`.
fn invert_cumulative(speed: &PeriodicSeries, total: f64, m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(m);
    out.push(0.0);
    let mut theta = 0.0;
    for j in 1..m {
        let target = total * j as f64 / m as f64;
        let (mut lo, mut hi) = (theta, 1.0);
        let (v, s) = speed.value_and_integral(theta);
        let mut x = theta + (target - s) / v;
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        for _ in 0..100 {
            let (v, s) = speed.value_and_integral(x);
            let f = s - target;
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let step = f / v;
            if v > 0.0 && step.abs() <= 1e-15 {
                x -= step;
                break;
            }
            let next = x - step;
            x = if v > 0.0 && next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 1e-15 {
                break;
            }
        }
        theta = x;
        out.push(x);
    }
    out
}

/// Distortion estimate and minimum chord gap of an arc-length curve.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistortionGap {
    /// Grid maximum of `|Δs| / ‖Δf‖`; a lower estimate of the true supremum.
    pub distortion: f64,
    /// Minimum chord over pairs with `|Δs| ≥ 𝓛/N`.
    pub gap: f64,
    pub n: usize,
}

/// Scans the staggered `N × N` grid plus the `N` antipodal pairs `(ih, ih + 𝓛/2)`.
#[allow(clippy::needless_range_loop)]
pub fn distortion_and_gap(curve: &ArcLengthCurve, n: usize) -> Result<DistortionGap, CurveError> {
    if n < 16 {
        return Err(CurveError::GridTooSmall(n));
    }
    let length = curve.length;
    let h = length / n as f64;
    let first: Vec<Vector> = (0..n).map(|i| curve.position(i as f64 * h)).collect();
    let second: Vec<Vector> = (0..n)
        .map(|j| curve.position((j as f64 + 0.5) * h))
        .collect();
    let antipodes: Vec<Vector> = (0..n)
        .map(|i| curve.position(i as f64 * h + 0.5 * length))
        .collect();

    let mut distortion: f64 = 0.0;
    let mut gap = f64::INFINITY;
    let mut worst = (0.0, 0.0);
    let mut visit = |ds: f64, chord: f64, s1: f64, s2: f64| {
        distortion = distortion.max(ds / chord);
        if ds >= h && chord < gap {
            gap = chord;
            worst = (s1, s2);
        }
    };
    for i in 0..n {
        for j in 0..n {
            let ds = 0.5 * h * half_cell_offset(i, j, n).unsigned_abs() as f64;
            visit(
                ds,
                first[i].distance(&second[j]),
                i as f64 * h,
                (j as f64 + 0.5) * h,
            );
        }
        visit(
            0.5 * length,
            first[i].distance(&antipodes[i]),
            i as f64 * h,
            i as f64 * h + 0.5 * length,
        );
    }
    if !(gap >= 1e-9 * length) {
        return Err(CurveError::SelfContact {
            gap,
            theta1: worst.0 / length,
            theta2: worst.1 / length,
        });
    }
    Ok(DistortionGap { distortion, gap, n })
}
