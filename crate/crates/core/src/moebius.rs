//! Möbius transformations of ℝⁿ ∪ {∞} and their action on curves.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::curve::{ClosedCurve, Curve, CurveError, CurveMeta, Jet};
use crate::densities::ThetaNodes;
use crate::energy::{energy_report, normalize, EnergyReport};
use crate::fourier::{real_coefficients, Twiddles};
use crate::quad::PairGrid;
use crate::vector::Vector;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MoebiusError {
    #[error("primitive {index} acts in dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("scaling factor must be positive and finite, got {0}")]
    InvalidScaling(f64),
    #[error("inversion radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("matrix deviates from orthogonality by {0:e}")]
    NotOrthogonal(f64),
    #[error("point at distance {distance:e} from an inversion center")]
    NearCenter { distance: f64 },
    #[error("no inversion center at distance {safety} from the curve after {attempts} attempts")]
    SafetyUnreachable { safety: f64, attempts: usize },
    #[error("safety distance must be positive, got {0}")]
    InvalidSafety(f64),
}

/// Points closer than this to an inversion center are rejected.
const POINT_GUARD: f64 = 1e-9;
/// Curves closer than this to an inversion center are rejected.
const CURVE_GUARD: f64 = 1e-6;

/// One generator of the Möbius group.
#[derive(Clone, Debug, PartialEq)]
pub enum Primitive {
    Translation(Vector),
    Scaling(f64),
    /// Row-major `n × n` matrix with `QᵀQ = I`.
    Orthogonal {
        dim: usize,
        matrix: Vec<f64>,
    },
    /// `x ↦ c + r²(x − c)/‖x − c‖²`.
    Inversion {
        center: Vector,
        radius: f64,
    },
}

impl Primitive {
    fn dim(&self) -> Option<usize> {
        match self {
            Primitive::Translation(v) => Some(v.dim()),
            Primitive::Scaling(_) => None,
            Primitive::Orthogonal { dim, .. } => Some(*dim),
            Primitive::Inversion { center, .. } => Some(center.dim()),
        }
    }

    fn validate(&self) -> Result<(), MoebiusError> {
        match self {
            Primitive::Scaling(l) if !(l.is_finite() && *l > 0.0) => {
                Err(MoebiusError::InvalidScaling(*l))
            }
            Primitive::Inversion { radius, .. } if !(radius.is_finite() && *radius > 0.0) => {
                Err(MoebiusError::InvalidRadius(*radius))
            }
            Primitive::Orthogonal { dim, matrix } => {
                let deviation = orthogonality_defect(*dim, matrix);
                if deviation <= 1e-10 {
                    Ok(())
                } else {
                    Err(MoebiusError::NotOrthogonal(deviation))
                }
            }
            _ => Ok(()),
        }
    }

    fn inverse(&self) -> Primitive {
        match self {
            Primitive::Translation(v) => Primitive::Translation(-*v),
            Primitive::Scaling(l) => Primitive::Scaling(1.0 / l),
            Primitive::Orthogonal { dim, matrix } => {
                let n = *dim;
                let mut t = alloc::vec![0.0; n * n];
                for r in 0..n {
                    for c in 0..n {
                        t[c * n + r] = matrix[r * n + c];
                    }
                }
                Primitive::Orthogonal { dim: n, matrix: t }
            }
            Primitive::Inversion { .. } => self.clone(),
        }
    }

    /// Pushes a second-order jet forward.
    fn apply_jet(&self, jet: &Jet) -> Result<Jet, MoebiusError> {
        Ok(match self {
            Primitive::Translation(v) => Jet {
                position: jet.position + *v,
                ..*jet
            },
            Primitive::Scaling(l) => Jet {
                position: jet.position * *l,
                velocity: jet.velocity * *l,
                acceleration: jet.acceleration * *l,
            },
            Primitive::Orthogonal { dim, matrix } => Jet {
                position: mat_vec(*dim, matrix, &jet.position),
                velocity: mat_vec(*dim, matrix, &jet.velocity),
                acceleration: mat_vec(*dim, matrix, &jet.acceleration),
            },
            Primitive::Inversion { center, radius } => {
                let y = jet.position - *center;
                let n2 = y.norm_squared();
                let distance = libm::sqrt(n2);
                if !(distance > POINT_GUARD) {
                    return Err(MoebiusError::NearCenter { distance });
                }
                let r2 = radius * radius;
                let inv2 = 1.0 / n2;
                let differential =
                    |v: &Vector| (*v * inv2).add_scaled(-2.0 * y.dot(v) * inv2 * inv2, &y) * r2;
                let v = jet.velocity;
                let yv = y.dot(&v);
                let hessian = (v * (-4.0 * yv * inv2 * inv2)).add_scaled(
                    -2.0 * v.norm_squared() * inv2 * inv2 + 8.0 * yv * yv * inv2 * inv2 * inv2,
                    &y,
                ) * r2;
                Jet {
                    position: center.add_scaled(r2 * inv2, &y),
                    velocity: differential(&v),
                    acceleration: differential(&jet.acceleration) + hessian,
                }
            }
        })
    }
}

impl Primitive {
    /// Images of `x`, `y` and of `δ = x − y`, the latter without cancellation.
    fn apply_difference(
        &self,
        x: &Vector,
        y: &Vector,
        delta: &Vector,
    ) -> Result<(Vector, Vector, Vector), MoebiusError> {
        Ok(match self {
            Primitive::Translation(v) => (*x + *v, *y + *v, *delta),
            Primitive::Scaling(l) => (*x * *l, *y * *l, *delta * *l),
            Primitive::Orthogonal { dim, matrix } => (
                mat_vec(*dim, matrix, x),
                mat_vec(*dim, matrix, y),
                mat_vec(*dim, matrix, delta),
            ),
            Primitive::Inversion { center, radius } => {
                let (a, b) = (*x - *center, *y - *center);
                let (na, nb) = (a.norm_squared(), b.norm_squared());
                let distance = libm::sqrt(na.min(nb));
                if !(distance > POINT_GUARD) {
                    return Err(MoebiusError::NearCenter { distance });
                }
                let r2 = radius * radius;
                // a/|a|² − b/|b|² = (δ|b|² − b(δ·(a + b)))/(|a|²|b|²)
                let image = (*delta * nb).add_scaled(-delta.dot(&(a + b)), &b) * (r2 / (na * nb));
                (
                    center.add_scaled(r2 / na, &a),
                    center.add_scaled(r2 / nb, &b),
                    image,
                )
            }
        })
    }
}

fn mat_vec(dim: usize, matrix: &[f64], x: &Vector) -> Vector {
    let mut out = Vector::zeros(dim);
    for r in 0..dim {
        out[r] = (0..dim).map(|c| matrix[r * dim + c] * x[c]).sum();
    }
    out
}

/// `max |QᵀQ − I|` entrywise.
pub fn orthogonality_defect(dim: usize, matrix: &[f64]) -> f64 {
    if matrix.len() != dim * dim {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for a in 0..dim {
        for b in 0..dim {
            let dot: f64 = (0..dim)
                .map(|r| matrix[r * dim + a] * matrix[r * dim + b])
                .sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

/// A composition of primitives, applied first to last.
#[derive(Clone, Debug, PartialEq)]
pub struct MoebiusMap {
    dim: usize,
    primitives: Vec<Primitive>,
}

impl MoebiusMap {
    pub fn new(dim: usize, primitives: Vec<Primitive>) -> Result<Self, MoebiusError> {
        for (index, p) in primitives.iter().enumerate() {
            if let Some(found) = p.dim() {
                if found != dim {
                    return Err(MoebiusError::DimensionMismatch {
                        index,
                        expected: dim,
                        found,
                    });
                }
            }
            p.validate()?;
        }
        Ok(Self { dim, primitives })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            primitives: Vec::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    /// `self ∘ inner`: applies `inner` first.
    pub fn compose(&self, inner: &MoebiusMap) -> MoebiusMap {
        let mut primitives = inner.primitives.clone();
        primitives.extend(self.primitives.iter().cloned());
        MoebiusMap {
            dim: self.dim,
            primitives,
        }
    }

    pub fn inverse(&self) -> MoebiusMap {
        MoebiusMap {
            dim: self.dim,
            primitives: self
                .primitives
                .iter()
                .rev()
                .map(Primitive::inverse)
                .collect(),
        }
    }

    pub fn apply_point(&self, x: &Vector) -> Result<Vector, MoebiusError> {
        let zero = Vector::zeros(x.dim());
        let jet = Jet {
            position: *x,
            velocity: zero,
            acceleration: zero,
        };
        self.apply_jet(&jet).map(|j| j.position)
    }

    /// Image of a curve jet: `(T∘f, (T∘f)′, (T∘f)″)`.
    pub fn apply_jet(&self, jet: &Jet) -> Result<Jet, MoebiusError> {
        self.primitives
            .iter()
            .try_fold(*jet, |j, p| p.apply_jet(&j))
    }

    /// `T(x) − T(y)` given `δ = x − y`, accurate when `x` and `y` are close.
    pub fn apply_chord(
        &self,
        x: &Vector,
        y: &Vector,
        delta: &Vector,
    ) -> Result<Vector, MoebiusError> {
        let mut state = (*x, *y, *delta);
        for p in &self.primitives {
            state = p.apply_difference(&state.0, &state.1, &state.2)?;
        }
        Ok(state.2)
    }

    /// Smallest distance from any inversion center to the image of `points`
    /// just before that inversion acts.
    pub fn center_clearance(&self, points: &[Vector]) -> f64 {
        let mut stage: Vec<Vector> = points.to_vec();
        let mut clearance = f64::INFINITY;
        for p in &self.primitives {
            if let Primitive::Inversion { center, .. } = p {
                for x in &stage {
                    clearance = clearance.min(x.distance(center));
                }
            }
            for x in &mut stage {
                let jet = Jet {
                    position: *x,
                    velocity: *x * 0.0,
                    acceleration: *x * 0.0,
                };
                match p.apply_jet(&jet) {
                    Ok(j) => *x = j.position,
                    Err(_) => return 0.0,
                }
            }
        }
        clearance
    }
}

/// Exact image `T∘f` of a Fourier curve, in the same parameter θ.
#[derive(Clone, Debug)]
pub struct MappedCurve {
    base: ClosedCurve,
    map: MoebiusMap,
}

impl MappedCurve {
    /// Fails if the curve passes within `1e-6` of an inversion center.
    pub fn new(base: ClosedCurve, map: MoebiusMap) -> Result<Self, MoebiusError> {
        let m = (8 * base.modes()).clamp(512, 4096);
        let points: Vec<Vector> = (0..m).map(|j| base.position(j as f64 / m as f64)).collect();
        let distance = map.center_clearance(&points);
        if !(distance >= CURVE_GUARD) {
            return Err(MoebiusError::NearCenter { distance });
        }
        Ok(Self { base, map })
    }

    pub fn base(&self) -> &ClosedCurve {
        &self.base
    }

    pub fn map(&self) -> &MoebiusMap {
        &self.map
    }
}

impl Curve for MappedCurve {
    fn dimension(&self) -> usize {
        self.base.dimension()
    }

    fn jet(&self, theta: f64) -> Jet {
        // construction guarantees every node clears the centers
        self.map
            .apply_jet(&self.base.jet(theta))
            .expect("curve clears every inversion center")
    }

    fn chord(&self, theta1: f64, theta2: f64) -> Vector {
        let (x, y) = (self.base.position(theta1), self.base.position(theta2));
        self.map
            .apply_chord(&x, &y, &self.base.chord(theta1, theta2))
            .expect("curve clears every inversion center")
    }

    fn meta(&self) -> CurveMeta {
        let mut meta = self.base.metadata().clone();
        meta.family = alloc::format!("moebius({})", meta.family);
        meta
    }
}

/// Image of `curve` refit to `modes` Fourier modes from `4·modes` samples.
pub fn apply_curve(
    map: &MoebiusMap,
    curve: &ClosedCurve,
    modes: usize,
) -> crate::Result<ClosedCurve> {
    let mapped = MappedCurve::new(curve.clone(), map.clone())?;
    let m = 4 * modes.max(1);
    let table = Twiddles::new(m);
    let points: Vec<Vector> = (0..m)
        .map(|j| mapped.position(j as f64 / m as f64))
        .collect();
    let dim = curve.dimension();
    let mut coeffs = Vec::with_capacity(dim * (2 * modes + 1));
    let mut column = alloc::vec![0.0; m];
    for d in 0..dim {
        for (slot, p) in column.iter_mut().zip(&points) {
            *slot = p[d];
        }
        coeffs.extend(real_coefficients(&column, modes, &table));
    }
    let fitted: Result<ClosedCurve, CurveError> =
        ClosedCurve::new(dim, modes, coeffs, mapped.meta());
    Ok(fitted?)
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Orthogonal matrix from Gram–Schmidt on a random matrix.
fn random_orthogonal(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut columns: Vec<Vector> = Vec::with_capacity(dim);
        let mut degenerate = false;
        for _ in 0..dim {
            let mut v = Vector::zeros(dim);
            for k in 0..dim {
                v[k] = 2.0 * uniform(rng) - 1.0;
            }
            for _ in 0..2 {
                for q in &columns {
                    v = v.add_scaled(-v.dot(q), q);
                }
            }
            let norm = v.norm();
            if norm < 1e-3 {
                degenerate = true;
                break;
            }
            columns.push(v * (1.0 / norm));
        }
        if !degenerate {
            let mut matrix = alloc::vec![0.0; dim * dim];
            for (c, q) in columns.iter().enumerate() {
                for r in 0..dim {
                    matrix[r * dim + c] = q[r];
                }
            }
            return matrix;
        }
    }
}

/// Reproducible translation, rotation, scaling and one inversion whose center
/// keeps distance at least `safety` from the curve at the moment it acts.
///
/// The center is drawn from the bounding box of the scaled curve, enlarged by
/// half its diagonal; the inversion radius equals the achieved clearance so the
/// image keeps a comparable size.
pub fn random_map<C: Curve + ?Sized>(
    seed: u64,
    curve: &C,
    safety: f64,
) -> Result<MoebiusMap, MoebiusError> {
    const ATTEMPTS: usize = 256;
    if !(safety.is_finite() && safety > 0.0) {
        return Err(MoebiusError::InvalidSafety(safety));
    }
    let dim = curve.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shift = Vector::zeros(dim);
    for k in 0..dim {
        shift[k] = 2.0 * uniform(&mut rng) - 1.0;
    }
    let rotation = random_orthogonal(dim, &mut rng);
    let scale = libm::exp((2.0 * uniform(&mut rng) - 1.0) * core::f64::consts::LN_2);
    let similarity = MoebiusMap::new(
        dim,
        alloc::vec![
            Primitive::Translation(shift),
            Primitive::Orthogonal {
                dim,
                matrix: rotation
            },
            Primitive::Scaling(scale),
        ],
    )?;

    let m = 512;
    let points: Vec<Vector> = (0..m)
        .map(|j| similarity.apply_point(&curve.position(j as f64 / m as f64)))
        .collect::<Result<_, _>>()?;
    let mut lo = points[0];
    let mut hi = points[0];
    for p in &points {
        for k in 0..dim {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let margin = 0.5 * (hi - lo).norm();
    for _ in 0..ATTEMPTS {
        let mut center = Vector::zeros(dim);
        for k in 0..dim {
            center[k] = lo[k] - margin + uniform(&mut rng) * (hi[k] - lo[k] + 2.0 * margin);
        }
        let clearance = points
            .iter()
            .map(|p| p.distance(&center))
            .fold(f64::INFINITY, f64::min);
        if clearance >= safety {
            let mut primitives = similarity.primitives;
            primitives.push(Primitive::Inversion {
                center,
                radius: clearance,
            });
            return MoebiusMap::new(dim, primitives);
        }
    }
    Err(MoebiusError::SafetyUnreachable {
        safety,
        attempts: ATTEMPTS,
    })
}

/// Energies before and after a Möbius map, and the pointwise change of `C`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InvarianceReport {
    pub original: EnergyReport,
    pub image: EnergyReport,
    pub delta_e0: f64,
    pub delta_e1: f64,
    pub delta_e2: f64,
    /// `max |C(f) − C(Tf)|` over a staggered grid in θ.
    pub max_c_deviation: f64,
    /// The same maximum relative to `C(f)`.
    pub max_c_relative: f64,
    pub c_grid: usize,
}

/// Compares `curve` with its image under `map`.
///
/// Energies use the arc-length reparametrized images normalized to length
/// 2π; `C` is compared at identical θ-pairs on the unreparametrized image.
pub fn invariance_report(
    curve: &ClosedCurve,
    map: &MoebiusMap,
    n: usize,
) -> crate::Result<InvarianceReport> {
    let mapped = MappedCurve::new(curve.clone(), map.clone())?;
    let original = energy_report(&normalize(curve)?, n)?;
    let image = energy_report(&normalize(&mapped)?, n)?;
    let c_grid = 128;
    let (max_c_deviation, max_c_relative) = c_deviation(curve, &mapped, c_grid)?;
    Ok(InvarianceReport {
        delta_e0: image.e0 - original.e0,
        delta_e1: image.e1 - original.e1,
        delta_e2: image.e2 - original.e2,
        original,
        image,
        max_c_deviation,
        max_c_relative,
        c_grid,
    })
}

/// Absolute and relative maxima of `|C(f) − C(g)|` on the staggered θ-grid.
pub fn c_deviation<A: Curve + ?Sized, B: Curve + ?Sized>(
    f: &A,
    g: &B,
    n: usize,
) -> crate::Result<(f64, f64)> {
    let grid = PairGrid::new(n, 1.0)?;
    let a = ThetaNodes::new(f, grid);
    let b = ThetaNodes::new(g, grid);
    let (mut abs, mut rel) = (0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let ca = a.c_pair(i, j).c;
            let d = (ca - b.c_pair(i, j).c).abs();
            abs = abs.max(d);
            rel = rel.max(d / ca);
        }
    }
    Ok((abs, rel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{make_family, Family};

    fn v(x: &[f64]) -> Vector {
        Vector::from_slice(x)
    }

    #[test]
    fn mapped_chord_is_accurate_for_close_pairs() {
        let c = make_family(&Family::trefoil(), 3).unwrap();
        let map = random_map(2, &c, 0.5).unwrap();
        let g = MappedCurve::new(c, map).unwrap();
        let naive = g.position(0.2) - g.position(0.6);
        assert!((g.chord(0.2, 0.6) - naive).norm() <= 1e-12 * naive.norm());
        let (t, h) = (0.81, 1e-9);
        let exact = g.velocity(t) * ((t + h) - (t - h));
        assert!((g.chord(t + h, t - h) - exact).norm() <= 1e-12 * exact.norm());
    }

    #[test]
    fn unit_inversion() {
        let map = MoebiusMap::new(
            3,
            alloc::vec![Primitive::Inversion {
                center: v(&[0., 0., 0.]),
                radius: 1.0
            }],
        )
        .unwrap();
        assert_eq!(
            map.apply_point(&v(&[2., 0., 0.])).unwrap().as_slice(),
            &[0.5, 0., 0.]
        );
        let twice = map.compose(&map);
        let x = v(&[0.3, -1.2, 2.5]);
        assert!(twice.apply_point(&x).unwrap().distance(&x) < 1e-12);
        assert!(map.apply_point(&v(&[0., 0., 0.])).is_err());
        assert_eq!(MoebiusMap::identity(3).apply_point(&x).unwrap(), x);
    }

    #[test]
    fn validation() {
        assert!(MoebiusMap::new(2, alloc::vec![Primitive::Scaling(-1.0)]).is_err());
        let skew = Primitive::Orthogonal {
            dim: 2,
            matrix: alloc::vec![1.0, 0.1, 0.0, 1.0],
        };
        assert!(matches!(
            MoebiusMap::new(2, alloc::vec![skew]),
            Err(MoebiusError::NotOrthogonal(_))
        ));
        let wrong = Primitive::Translation(v(&[1.0, 2.0]));
        assert!(MoebiusMap::new(3, alloc::vec![wrong]).is_err());
    }

    #[test]
    fn jets_match_finite_differences() {
        let k = make_family(&Family::trefoil(), 3).unwrap();
        let map = random_map(3, &k, 0.5).unwrap();
        let mapped = MappedCurve::new(k, map).unwrap();
        let h = 1e-5;
        for &t in &[0.1, 0.45, 0.8] {
            let jet = mapped.jet(t);
            let p = |s: f64| mapped.position(s);
            let fd1 = (p(t + h) - p(t - h)) * (0.5 / h);
            let fd2 = (p(t + h) - p(t) * 2.0 + p(t - h)) * (1.0 / (h * h));
            let scale = jet.velocity.norm();
            assert!((fd1 - jet.velocity).norm() < 1e-6 * scale, "{t}");
            assert!(
                (fd2 - jet.acceleration).norm() < 1e-3 * jet.acceleration.norm().max(scale),
                "{t}"
            );
        }
    }

    #[test]
    fn random_map_is_reproducible() {
        let c = make_family(&Family::Circle, 3).unwrap();
        let a = random_map(1, &c, 0.5).unwrap();
        let b = random_map(1, &c, 0.5).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            random_map(1, &c, 1e6),
            Err(MoebiusError::SafetyUnreachable { .. })
        ));
        let points: Vec<Vector> = (0..256).map(|j| c.position(j as f64 / 256.0)).collect();
        assert!(a.center_clearance(&points) >= 0.5);
    }

    #[test]
    fn inverse_undoes_map() {
        let k = make_family(&Family::trefoil(), 3).unwrap();
        let map = random_map(9, &k, 0.5).unwrap();
        let x = v(&[0.4, 0.2, -0.3]);
        let back = map
            .inverse()
            .apply_point(&map.apply_point(&x).unwrap())
            .unwrap();
        assert!(back.distance(&x) < 1e-12);
    }
}
