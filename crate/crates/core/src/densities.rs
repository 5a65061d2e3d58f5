//! Pointwise quantities at a pair of curve points: the energy densities, the
//! conformal angle, the log-distortion `X` with its partials, and the
//! cross-ratio density `C` of a general parametrization.
//!
//! The densities are evaluated through projected tangents rather than the
//! textbook quotients, which keeps them accurate when `|Δs|` is small:
//! with `u = Δf/‖Δf‖` and `R` the reflection across `u^⊥`,
//! `1 − cos φ = ‖τ₁ + Rτ₂‖²/2` and `⟨τ₁∧u, τ₂∧u⟩ = (τ₁ − (τ₁·u)u)·(τ₂ − (τ₂·u)u)`.

use alloc::vec::Vec;

use crate::curve::{ArcLengthCurve, Curve, Jet};
use crate::quad::PairGrid;
use crate::vector::Vector;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DensityError {
    #[error("parameters {0} and {1} coincide on the curve")]
    Coincident(f64, f64),
    #[error("derivatives of X are undefined at the antipodal pair ({0}, {1})")]
    Antipodal(f64, f64),
}

/// Representative of `d` modulo `period` in `(−period/2, period/2]`.
pub fn wrap_offset(d: f64, period: f64) -> f64 {
    let r = d - period * libm::round(d / period);
    if r <= -0.5 * period {
        r + period
    } else {
        r
    }
}

/// Geometry of the pair `(f(s₁), f(s₂))` on an arc-length curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairGeometry {
    pub s1: f64,
    pub s2: f64,
    /// `s₁ − s₂` reduced to `(−𝓛/2, 𝓛/2]`.
    pub delta_s: f64,
    /// `f(s₁) − f(s₂)`.
    pub delta_f: Vector,
    pub chord: f64,
    pub chord_sq: f64,
    pub tau1: Vector,
    pub tau2: Vector,
    pub length: f64,
}

impl PairGeometry {
    /// Assembles a pair from precomputed frames; `delta_s` must already be reduced.
    pub fn from_frames(
        s1: f64,
        s2: f64,
        delta_s: f64,
        (p1, tau1): (Vector, Vector),
        (p2, tau2): (Vector, Vector),
        length: f64,
    ) -> Self {
        let delta_f = p1 - p2;
        let chord_sq = delta_f.norm_squared();
        Self {
            s1,
            s2,
            delta_s,
            delta_f,
            chord: libm::sqrt(chord_sq),
            chord_sq,
            tau1,
            tau2,
            length,
        }
    }

    /// Unit chord direction `u`.
    pub fn direction(&self) -> Vector {
        self.delta_f * (1.0 / self.chord)
    }

    /// The same pair with the arguments exchanged.
    pub fn swapped(&self) -> Self {
        let delta_s = if self.delta_s == 0.5 * self.length {
            self.delta_s
        } else {
            -self.delta_s
        };
        Self {
            s1: self.s2,
            s2: self.s1,
            delta_s,
            delta_f: -self.delta_f,
            tau1: self.tau2,
            tau2: self.tau1,
            ..*self
        }
    }

    fn is_antipodal(&self) -> bool {
        (self.delta_s.abs() - 0.5 * self.length).abs() <= 1e-12 * self.length
    }
}

pub fn pair_geometry(
    curve: &ArcLengthCurve,
    s1: f64,
    s2: f64,
) -> Result<PairGeometry, DensityError> {
    let length = curve.length();
    let delta_s = wrap_offset(s1 - s2, length);
    if delta_s.abs() <= 1e-14 * length {
        return Err(DensityError::Coincident(s1, s2));
    }
    let pg = PairGeometry::from_frames(s1, s2, delta_s, curve.frame(s1), curve.frame(s2), length);
    if !(pg.chord > 0.0) {
        return Err(DensityError::Coincident(s1, s2));
    }
    Ok(pg)
}

/// The four energy densities and the conformal angle at a pair.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DensityBundle {
    /// `1/‖Δf‖² − 1/|Δs|²`.
    pub m: f64,
    /// `(1 − cos φ)/‖Δf‖²`.
    pub m0: f64,
    /// `‖τ₁ − τ₂‖²/(2‖Δf‖²)`.
    pub m1: f64,
    /// `2⟨τ₁∧u, τ₂∧u⟩/‖Δf‖²`.
    pub m2: f64,
    pub cos_phi: f64,
}

pub fn density_bundle(pg: &PairGeometry) -> DensityBundle {
    let u = pg.direction();
    let a1 = pg.tau1.dot(&u);
    let a2 = pg.tau2.dot(&u);
    let p1 = pg.tau1.add_scaled(-a1, &u);
    let p2 = pg.tau2.add_scaled(-a2, &u);
    let reflected_sum = (pg.tau1 + pg.tau2).add_scaled(-2.0 * a2, &u);
    let twice_one_minus_cos = reflected_sum.norm_squared();
    let inv = 1.0 / pg.chord_sq;
    DensityBundle {
        m: inv - 1.0 / (pg.delta_s * pg.delta_s),
        m0: 0.5 * twice_one_minus_cos * inv,
        m1: 0.5 * (pg.tau1 - pg.tau2).norm_squared() * inv,
        m2: 2.0 * p1.dot(&p2) * inv,
        cos_phi: (1.0 - 0.5 * twice_one_minus_cos).clamp(-1.0, 1.0),
    }
}

/// `X = log(|Δs|²/‖Δf‖²)` and its partials in `s₁`, `s₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct XBundle {
    pub x: f64,
    pub dx_ds1: f64,
    pub dx_ds2: f64,
    /// Mixed partial `∂²X/∂s₁∂s₂`.
    pub d2x: f64,
    /// `∂X/∂s₂ + 4/Δs`.
    pub y: f64,
}

/// `X` alone; defined at every off-diagonal pair including antipodes.
pub fn x_value(pg: &PairGeometry) -> f64 {
    libm::log(pg.delta_s * pg.delta_s / pg.chord_sq)
}

pub fn x_bundle(pg: &PairGeometry) -> Result<XBundle, DensityError> {
    if pg.is_antipodal() {
        return Err(DensityError::Antipodal(pg.s1, pg.s2));
    }
    let ds = pg.delta_s;
    let inv = 1.0 / pg.chord_sq;
    let t1 = pg.tau1.dot(&pg.delta_f);
    let t2 = pg.tau2.dot(&pg.delta_f);
    let dx_ds1 = 2.0 / ds - 2.0 * t1 * inv;
    let dx_ds2 = -2.0 / ds + 2.0 * t2 * inv;
    let d2x = 2.0 / (ds * ds) + 2.0 * pg.tau1.dot(&pg.tau2) * inv - 4.0 * t1 * t2 * inv * inv;
    Ok(XBundle {
        x: x_value(pg),
        dx_ds1,
        dx_ds2,
        d2x,
        y: dx_ds2 + 4.0 / ds,
    })
}

/// Residuals of the three pointwise identities linking the densities to `X`:
/// `2M = 2M₀ − ∂²X`,
/// `2M₁ = 2M₀ − 2∂²X + ∂₁X∂₂X + (2/Δs)(∂₁X − ∂₂X)`,
/// `2M₂ = 2∂²X − ∂₁X∂₂X − (2/Δs)(∂₁X − ∂₂X)`.
///
/// Each is divided by `1 + 1/‖Δf‖² + 1/Δs²`, the size of the singular terms
/// that cancel on either side.
pub fn x_identity_residuals(pg: &PairGeometry) -> Result<[f64; 3], DensityError> {
    let d = density_bundle(pg);
    let xb = x_bundle(pg)?;
    let ds = pg.delta_s;
    let cross = xb.dx_ds1 * xb.dx_ds2 + 2.0 / ds * (xb.dx_ds1 - xb.dx_ds2);
    let scale = 1.0 + 1.0 / pg.chord_sq + 1.0 / (ds * ds);
    Ok([
        (2.0 * d.m - (2.0 * d.m0 - xb.d2x)).abs() / scale,
        (2.0 * d.m1 - (2.0 * d.m0 - 2.0 * xb.d2x + cross)).abs() / scale,
        (2.0 * d.m2 - (2.0 * xb.d2x - cross)).abs() / scale,
    ])
}

/// `X(s + 𝓛/2, s)`.
pub fn antipodal_x(curve: &ArcLengthCurve, s: f64) -> f64 {
    let half = 0.5 * curve.length();
    let chord_sq = (curve.position(s + half) - curve.position(s)).norm_squared();
    libm::log(half * half / chord_sq)
}

/// Cross-ratio density `C = ‖ḟ(θ₁)‖‖ḟ(θ₂)‖/‖Δf‖²` and derivatives of `log C`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CBundle {
    pub c: f64,
    pub dlogc_dtheta1: f64,
    pub dlogc_dtheta2: f64,
    pub d2logc: f64,
    /// `−∂²log C/(2C)`.
    pub cos_phi_via_c: f64,
}

/// C-calculus from the second-order jets at `θ₁` and `θ₂`.
pub fn c_from_jets(j1: &Jet, j2: &Jet) -> CBundle {
    c_from_parts(j1, j2, &(j1.position - j2.position))
}

/// As [`c_from_jets`] with the chord `Δf` supplied separately.
pub fn c_from_parts(j1: &Jet, j2: &Jet, delta_f: &Vector) -> CBundle {
    let delta_f = *delta_f;
    let inv = 1.0 / delta_f.norm_squared();
    let sp1 = j1.velocity.norm_squared();
    let sp2 = j2.velocity.norm_squared();
    let c = libm::sqrt(sp1 * sp2) * inv;
    let v1f = j1.velocity.dot(&delta_f);
    let v2f = j2.velocity.dot(&delta_f);
    let d2logc = 2.0 * j1.velocity.dot(&j2.velocity) * inv - 4.0 * v1f * v2f * inv * inv;
    CBundle {
        c,
        dlogc_dtheta1: j1.velocity.dot(&j1.acceleration) / sp1 - 2.0 * v1f * inv,
        dlogc_dtheta2: j2.velocity.dot(&j2.acceleration) / sp2 + 2.0 * v2f * inv,
        d2logc,
        cos_phi_via_c: -d2logc / (2.0 * c),
    }
}

pub fn c_bundle<C: Curve + ?Sized>(
    curve: &C,
    theta1: f64,
    theta2: f64,
) -> Result<CBundle, DensityError> {
    let chord = curve.chord(theta1, theta2);
    if wrap_offset(theta1 - theta2, 1.0).abs() <= 1e-14 || !(chord.norm_squared() > 0.0) {
        return Err(DensityError::Coincident(theta1, theta2));
    }
    Ok(c_from_parts(&curve.jet(theta1), &curve.jet(theta2), &chord))
}

/// Positions and unit tangents at both node families of a staggered grid.
pub struct ArcNodes {
    grid: PairGrid,
    first: Vec<(Vector, Vector)>,
    second: Vec<(Vector, Vector)>,
}

impl ArcNodes {
    pub fn new(curve: &ArcLengthCurve, grid: PairGrid) -> Self {
        Self::shifted(curve, grid, 0.0)
    }

    /// Nodes of the shifted curve `s ↦ f(s + shift)`.
    pub fn shifted(curve: &ArcLengthCurve, grid: PairGrid, shift: f64) -> Self {
        let first = (0..grid.n())
            .map(|i| curve.frame(grid.first_node(i) + shift))
            .collect();
        let second = (0..grid.n())
            .map(|j| curve.frame(grid.second_node(j) + shift))
            .collect();
        Self {
            grid,
            first,
            second,
        }
    }

    pub fn grid(&self) -> &PairGrid {
        &self.grid
    }

    /// Pair `(s₁ᵢ, s₂ⱼ)`.
    #[inline]
    pub fn pair(&self, i: usize, j: usize) -> PairGeometry {
        PairGeometry::from_frames(
            self.grid.first_node(i),
            self.grid.second_node(j),
            self.grid.offset(i, j),
            self.first[i],
            self.second[j],
            self.grid.period(),
        )
    }
}

/// Jets at both node families of a staggered grid on θ ∈ ℝ/ℤ.
///
/// Pairs closer than `1/32` take their chord from [`Curve::chord`].
pub struct ThetaNodes<'a, C: Curve + ?Sized> {
    curve: &'a C,
    grid: PairGrid,
    first: Vec<Jet>,
    second: Vec<Jet>,
}

impl<'a, C: Curve + ?Sized> ThetaNodes<'a, C> {
    pub fn new(curve: &'a C, grid: PairGrid) -> Self {
        let first = (0..grid.n())
            .map(|i| curve.jet(grid.first_node(i)))
            .collect();
        let second = (0..grid.n())
            .map(|j| curve.jet(grid.second_node(j)))
            .collect();
        Self {
            curve,
            grid,
            first,
            second,
        }
    }

    pub fn grid(&self) -> &PairGrid {
        &self.grid
    }

    pub fn first(&self, i: usize) -> &Jet {
        &self.first[i]
    }

    pub fn second(&self, j: usize) -> &Jet {
        &self.second[j]
    }

    fn chord(&self, i: usize, j: usize) -> Vector {
        if self.grid.half_cells(i, j).unsigned_abs() as usize * 16 < self.grid.n() {
            self.curve
                .chord(self.grid.first_node(i), self.grid.second_node(j))
        } else {
            self.first[i].position - self.second[j].position
        }
    }

    /// `C` at `(θ₁ᵢ, θ₂ⱼ)`.
    #[inline]
    pub fn c_pair(&self, i: usize, j: usize) -> CBundle {
        c_from_parts(&self.first[i], &self.second[j], &self.chord(i, j))
    }

    /// `C` at `(θ₂ⱼ, θ₁ᵢ)`.
    #[inline]
    pub fn c_pair_swapped(&self, i: usize, j: usize) -> CBundle {
        c_from_parts(&self.second[j], &self.first[i], &-self.chord(i, j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{make_family, reparametrize_arclength, Family, ReparamOptions};
    use core::f64::consts::{PI, TAU};

    fn circle() -> ArcLengthCurve {
        let c = make_family(&Family::Circle, 3).unwrap();
        reparametrize_arclength(&c, &ReparamOptions::default()).unwrap()
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_offset(0.5, 1.0), 0.5);
        assert_eq!(wrap_offset(-0.5, 1.0), 0.5);
        assert!((wrap_offset(0.75, 1.0) + 0.25).abs() < 1e-16);
        assert!((wrap_offset(-3.1, 1.0) + 0.1).abs() < 1e-15);
    }

    #[test]
    fn circle_pair_geometry() {
        let c = circle();
        let pg = pair_geometry(&c, PI + 0.3, 0.3).unwrap();
        assert!((pg.chord - 2.0).abs() < 1e-14 && (pg.delta_s.abs() - PI).abs() < 1e-14);
        let pg = pair_geometry(&c, 1.0 + PI / 2.0, 1.0).unwrap();
        assert!((pg.chord - 2f64.sqrt()).abs() < 1e-14);
        let sw = pair_geometry(&c, 1.0, 1.0 + PI / 2.0).unwrap();
        assert_eq!(sw.delta_f, -pg.delta_f);
        assert!(pair_geometry(&c, 1.0, 1.0 + TAU).is_err());
    }

    #[test]
    fn circle_densities() {
        let c = circle();
        for &u in &[0.01, 0.7, 2.0, PI] {
            let d = density_bundle(&pair_geometry(&c, u + 0.4, 0.4).unwrap());
            assert!((d.m1 - 0.5).abs() < 1e-12, "{d:?}");
            assert!((d.m2 + 0.5).abs() < 1e-12, "{d:?}");
            assert!(d.m0.abs() < 1e-12 && (d.cos_phi - 1.0).abs() < 1e-14);
        }
        let d = density_bundle(&pair_geometry(&c, PI, 0.0).unwrap());
        assert!((d.m - (0.25 - 1.0 / (PI * PI))).abs() < 1e-15);
    }

    #[test]
    fn circle_x_calculus() {
        let c = circle();
        let pg = pair_geometry(&c, PI + 1.0, 1.0).unwrap();
        assert!((x_value(&pg) - libm::log(PI * PI / 4.0)).abs() < 1e-14);
        assert!(matches!(x_bundle(&pg), Err(DensityError::Antipodal(..))));
        assert!((antipodal_x(&c, 2.5) - libm::log(PI * PI / 4.0)).abs() < 1e-14);

        let u = PI / 2.0;
        let xb = x_bundle(&pair_geometry(&c, 0.2 + u, 0.2).unwrap()).unwrap();
        assert!((xb.dx_ds1 - (4.0 / PI - 1.0)).abs() < 1e-13);
        let csc = 1.0 / libm::sin(u / 2.0);
        assert!((xb.d2x - (2.0 / (u * u) - 0.5 * csc * csc)).abs() < 1e-13);
        assert!((xb.y - (xb.dx_ds2 + 4.0 / u)).abs() < 1e-15);
    }

    #[test]
    fn circle_c_calculus() {
        let c = make_family(&Family::Circle, 3).unwrap();
        let cb = c_bundle(&c, 0.6, 0.1).unwrap();
        assert!((cb.c - PI * PI).abs() < 1e-12);
        for &(a, b) in &[(0.3, 0.1), (0.9, 0.05), (0.5, 0.49)] {
            let cb = c_bundle(&c, a, b).unwrap();
            assert!((cb.cos_phi_via_c - 1.0).abs() < 1e-9, "{cb:?}");
        }
        assert!(c_bundle(&c, 0.2, 1.2).is_err());
    }

    #[test]
    fn swap_reverses_pair() {
        let k = make_family(&Family::trefoil(), 3).unwrap();
        let arc = reparametrize_arclength(&k, &ReparamOptions::default()).unwrap();
        let pg = pair_geometry(&arc, 3.0, 11.0).unwrap();
        let sw = pair_geometry(&arc, 11.0, 3.0).unwrap();
        let manual = pg.swapped();
        assert_eq!(manual.delta_f, sw.delta_f);
        assert!((manual.delta_s - sw.delta_s).abs() < 1e-13);
        assert_eq!(manual.tau1, sw.tau1);
    }
}
