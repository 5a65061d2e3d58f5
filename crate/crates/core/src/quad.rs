//! Deterministic quadrature on the periodic square.
//!
//! Double integrals use a staggered rectangle rule: first-argument nodes sit
//! at `ih`, second-argument nodes at `(j + ½)h`, so every offset is an odd
//! multiple of `h/2` and no cell touches the diagonal or the antipodal set.
//! Sums are reduced pairwise in a fixed tree, first within each row and then
//! across rows, so the result does not depend on how rows are scheduled.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("grid size {0} must be even and at least 32")]
    InvalidGrid(usize),
    #[error("period must be positive and finite, got {0}")]
    InvalidPeriod(f64),
    #[error("non-finite integrand {value} at pair ({s1}, {s2})")]
    NonFinite { s1: f64, s2: f64, value: f64 },
    #[error("a convergence study needs at least three doubling grids")]
    InvalidStudy,
    #[error("the exclusion schedule needs at least two distinct positive widths")]
    InvalidSchedule,
}

/// Offset `s₁ᵢ − s₂ⱼ` in half cells, reduced to `(−N, N]`; always odd.
pub(crate) fn half_cell_offset(i: usize, j: usize, n: usize) -> i64 {
    let n = n as i64;
    let m = (2 * (i as i64 - j as i64) - 1).rem_euclid(2 * n);
    if m > n {
        m - 2 * n
    } else {
        m
    }
}

/// Staggered `N × N` grid on `[0, P)²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairGrid {
    n: usize,
    period: f64,
}

impl PairGrid {
    pub fn new(n: usize, period: f64) -> Result<Self, QuadError> {
        if n < 32 || !n.is_multiple_of(2) {
            return Err(QuadError::InvalidGrid(n));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(QuadError::InvalidPeriod(period));
        }
        Ok(Self { n, period })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    #[inline]
    pub fn first_node(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    #[inline]
    pub fn second_node(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.spacing()
    }

    /// Signed offset in half cells; odd, in `(−N, N)`.
    #[inline]
    pub fn half_cells(&self, i: usize, j: usize) -> i64 {
        half_cell_offset(i, j, self.n)
    }

    /// `s₁ᵢ − s₂ⱼ` reduced to `(−P/2, P/2)`, exact in units of `h/2`.
    #[inline]
    pub fn offset(&self, i: usize, j: usize) -> f64 {
        self.half_cells(i, j) as f64 * 0.5 * self.spacing()
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }
}

/// Cascade summation with a fixed split; deterministic for a given length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        values.iter().sum()
    } else {
        let (a, b) = values.split_at(values.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// Runs `row` for every row index and reduces the `width`-component row sums.
fn reduce_rows<R>(n: usize, width: usize, row: R) -> Result<Vec<f64>, QuadError>
where
    R: Fn(usize) -> Result<Vec<f64>, QuadError> + Sync,
{
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(&row).collect::<Result<_, _>>()?;
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = (0..n).map(&row).collect::<Result<_, _>>()?;

    let mut column = vec![0.0; n];
    Ok((0..width)
        .map(|k| {
            for (slot, r) in column.iter_mut().zip(&rows) {
                *slot = r[k];
            }
            pairwise_sum(&column)
        })
        .collect())
}

/// Weighted sums `h² Σᵢⱼ F_k(i, j)` for `width` components at once.
///
/// `cell(i, j, out)` writes the components for the pair `(s₁ᵢ, s₂ⱼ)`.
pub fn grid_sums<F>(grid: &PairGrid, width: usize, cell: F) -> Result<Vec<f64>, QuadError>
where
    F: Fn(usize, usize, &mut [f64]) + Sync,
{
    let n = grid.n;
    let sums = reduce_rows(n, width, |i| {
        let mut buffer = vec![0.0; width * n];
        let mut out = vec![0.0; width];
        for j in 0..n {
            cell(i, j, &mut out);
            for (k, &v) in out.iter().enumerate() {
                if !v.is_finite() {
                    return Err(QuadError::NonFinite {
                        s1: grid.first_node(i),
                        s2: grid.second_node(j),
                        value: v,
                    });
                }
                buffer[k * n + j] = v;
            }
        }
        Ok((0..width)
            .map(|k| pairwise_sum(&buffer[k * n..(k + 1) * n]))
            .collect())
    })?;
    let area = grid.cell_area();
    Ok(sums.into_iter().map(|s| s * area).collect())
}

/// `K` double integrals of a field given on grid indices.
pub fn integrate_grid<const K: usize, F>(grid: &PairGrid, field: F) -> Result<[f64; K], QuadError>
where
    F: Fn(usize, usize) -> [f64; K] + Sync,
{
    let sums = grid_sums(grid, K, |i, j, out| out.copy_from_slice(&field(i, j)))?;
    let mut result = [0.0; K];
    result.copy_from_slice(&sums);
    Ok(result)
}

/// `∬ field ds₁ds₂` over an arc-length curve on the `N × N` staggered grid.
pub fn integrate_pair<F>(
    field: F,
    curve: &crate::curve::ArcLengthCurve,
    n: usize,
) -> Result<f64, QuadError>
where
    F: Fn(&crate::densities::PairGeometry) -> f64 + Sync,
{
    integrate_pair_many(|pg| [field(pg)], curve, n).map(|[v]| v)
}

/// Several double integrals sharing one pass over the grid.
pub fn integrate_pair_many<const K: usize, F>(
    fields: F,
    curve: &crate::curve::ArcLengthCurve,
    n: usize,
) -> Result<[f64; K], QuadError>
where
    F: Fn(&crate::densities::PairGeometry) -> [f64; K] + Sync,
{
    let grid = PairGrid::new(n, curve.length())?;
    let nodes = crate::densities::ArcNodes::new(curve, grid);
    integrate_grid(&grid, |i, j| fields(&nodes.pair(i, j)))
}

/// `∫₀^P g(s) ds` by the periodic rectangle rule at the `N` midpoints.
pub fn integrate_loop<G: Fn(f64) -> f64>(g: G, period: f64, n: usize) -> f64 {
    let h = period / n as f64;
    let values: Vec<f64> = (0..n).map(|j| g((j as f64 + 0.5) * h)).collect();
    pairwise_sum(&values) * h
}

/// Which argument order a principal-value field is evaluated in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// `F(s₁ᵢ, s₂ⱼ)`.
    Forward,
    /// `F(s₂ⱼ, s₁ᵢ)`.
    Swapped,
}

/// Band-excluded sums and their extrapolation to zero band width.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PvReport {
    pub epsilons: Vec<f64>,
    /// Integral over `|s₁ − s₂| ≥ ε` for each `ε`.
    pub values: Vec<f64>,
    /// Sum over the whole grid (no exclusion).
    pub unexcluded: f64,
    /// Extrapolation of `values` to `ε = 0` in the powers `1, ε, ε³, …`.
    pub extrapolated: f64,
    /// False when the band sums move further apart as `ε` shrinks.
    pub converged: bool,
}

/// Principal value `lim_{ε→0} ∬_{|s₁−s₂|≥ε} F` of the symmetrized field
/// `½(F(s₁,s₂) + F(s₂,s₁))`.
///
/// Band widths are `ε = k h` for each `k` in `schedule`; the excluded set is
/// a union of whole cells (offsets `|Δs| < kh`).
pub fn pv_pair<F>(grid: &PairGrid, schedule: &[usize], field: F) -> Result<PvReport, QuadError>
where
    F: Fn(Orientation, usize, usize) -> f64 + Sync,
{
    let mut ks: Vec<usize> = schedule.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.len() < 2 || ks[0] == 0 || 2 * ks[ks.len() - 1] >= grid.n {
        return Err(QuadError::InvalidSchedule);
    }
    let width = ks.len() + 1;
    let sums = grid_sums(grid, width, |i, j, out| {
        let v = 0.5 * (field(Orientation::Forward, i, j) + field(Orientation::Swapped, i, j));
        let m = grid.half_cells(i, j).unsigned_abs() as usize;
        for (slot, &k) in out.iter_mut().zip(&ks) {
            *slot = if m > 2 * k { v } else { 0.0 };
        }
        out[width - 1] = v;
    })?;
    let epsilons: Vec<f64> = ks.iter().map(|&k| k as f64 * grid.spacing()).collect();
    let values = sums[..ks.len()].to_vec();
    let extrapolated = odd_power_limit(&epsilons, &values);
    let scale = 1.0 + values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let converged = values
        .windows(3)
        .all(|w| (w[0] - w[1]).abs() <= (w[1] - w[2]).abs() + 1e-12 * scale);
    Ok(PvReport {
        epsilons,
        values,
        unexcluded: sums[ks.len()],
        extrapolated,
        converged,
    })
}

/// Value at 0 of the interpolant `c₀ + c₁x + c₃x³ + c₅x⁵ + …` through `(x, y)`.
///
/// A field that is smooth and even across the diagonal loses a band of
/// whole cells whose sum is odd in the band width, so only odd powers enter
/// beyond the constant.
#[allow(clippy::needless_range_loop)]
fn odd_power_limit(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut rows: Vec<Vec<f64>> = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let t = xi / scale;
            let mut row = Vec::with_capacity(n + 1);
            row.push(1.0);
            let mut power = t;
            for _ in 1..n {
                row.push(power);
                power *= t * t;
            }
            row.push(yi);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs()))
            .unwrap_or(col);
        rows.swap(col, pivot);
        for r in col + 1..n {
            let factor = rows[r][col] / rows[col][col];
            for c in col..=n {
                rows[r][c] -= factor * rows[col][c];
            }
        }
    }
    let mut coeffs = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = (r + 1..n).map(|c| rows[r][c] * coeffs[c]).sum();
        coeffs[r] = (rows[r][n] - tail) / rows[r][r];
    }
    coeffs[0]
}

/// Values of an integral on doubling grids and the Richardson limit.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceReport {
    pub grids: Vec<usize>,
    pub values: Vec<f64>,
    /// `values[k+1] − values[k]`.
    pub differences: Vec<f64>,
    /// Observed order from the last three grids; `None` once the differences
    /// reach rounding level and no rate can be read off.
    pub order: Option<f64>,
    pub extrapolated: f64,
}

/// Evaluates `value(N)` on each grid and estimates the order of convergence.
pub fn convergence_study<V, E>(grids: &[usize], value: V) -> Result<ConvergenceReport, E>
where
    V: Fn(usize) -> Result<f64, E>,
    E: From<QuadError>,
{
    if grids.len() < 3 || grids.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(QuadError::InvalidStudy.into());
    }
    let values = grids
        .iter()
        .map(|&n| value(n))
        .collect::<Result<Vec<f64>, E>>()?;
    let differences: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let last = values[values.len() - 1];
    let d_prev = differences[differences.len() - 2];
    let d_last = differences[differences.len() - 1];
    let floor = 1e-13 * (1.0 + last.abs());
    let (order, extrapolated) = if d_last.abs() <= floor || d_prev.abs() <= floor {
        (None, last)
    } else {
        let p = libm::log2((d_prev / d_last).abs());
        let factor = libm::pow(2.0, p) - 1.0;
        let extrapolated = if p > 0.0 && factor.is_finite() {
            last + d_last / factor
        } else {
            last
        };
        (Some(p), extrapolated)
    };
    Ok(ConvergenceReport {
        grids: grids.to_vec(),
        values,
        differences,
        order,
        extrapolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{PI, TAU};

    #[test]
    fn offsets_avoid_singular_sets() {
        let n = 32;
        for i in 0..n {
            for j in 0..n {
                let m = half_cell_offset(i, j, n);
                assert!(m % 2 != 0 && m.abs() < n as i64, "{i} {j} {m}");
                let grid = PairGrid::new(n, 1.0).unwrap();
                let direct =
                    crate::densities::wrap_offset(grid.first_node(i) - grid.second_node(j), 1.0);
                assert!((direct - grid.offset(i, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn grid_validation() {
        assert!(PairGrid::new(30, 1.0).is_err());
        assert!(PairGrid::new(33, 1.0).is_err());
        assert!(PairGrid::new(32, 0.0).is_err());
    }

    #[test]
    fn constant_field_gives_area() {
        let grid = PairGrid::new(64, TAU).unwrap();
        let [v] = integrate_grid(&grid, |_, _| [1.0]).unwrap();
        assert!((v - TAU * TAU).abs() < 1e-12);
    }

    #[test]
    fn non_finite_values_are_reported() {
        let grid = PairGrid::new(32, 1.0).unwrap();
        let err = integrate_grid(&grid, |i, j| {
            [if i == 3 && j == 5 { f64::NAN } else { 0.0 }]
        })
        .unwrap_err();
        match err {
            QuadError::NonFinite { s1, s2, .. } => {
                assert_eq!(s1, 3.0 / 32.0);
                assert_eq!(s2, 5.5 / 32.0);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn loop_rule() {
        assert!((integrate_loop(|_| 3.0, 2.0, 16) - 6.0).abs() < 1e-15);
        assert!(integrate_loop(|s| libm::sin(TAU * s / 5.0), 5.0, 64).abs() < 1e-14);
    }

    #[test]
    fn pairwise_sum_is_exact_on_small_integers() {
        let v: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
    }

    #[test]
    fn odd_power_limit_recovers_model() {
        let x = [0.1, 0.2, 0.4];
        let y: Vec<f64> = x.iter().map(|t| 2.0 - 3.0 * t + 5.0 * t * t * t).collect();
        assert!((odd_power_limit(&x, &y) - 2.0).abs() < 1e-13);
        assert!((odd_power_limit(&x[..2], &[1.0, 1.5]) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn antisymmetric_field_has_zero_principal_value() {
        let grid = PairGrid::new(64, 1.0).unwrap();
        let g = |s: f64| libm::sin(TAU * s) + 0.3 * libm::cos(2.0 * TAU * s);
        let report = pv_pair(&grid, &[1, 2, 4], |o, i, j| {
            let (a, b) = (grid.first_node(i), grid.second_node(j));
            let (x, y) = match o {
                Orientation::Forward => (a, b),
                Orientation::Swapped => (b, a),
            };
            let w = libm::sin(PI * (x - y));
            (g(x) - g(y)) / (w * w)
        })
        .unwrap();
        for v in &report.values {
            assert!(v.abs() < 1e-14, "{report:?}");
        }
        assert!(pv_pair(&grid, &[1], |_, _, _| 0.0).is_err());
    }

    #[test]
    fn smooth_study_reports_no_order() {
        let report = convergence_study::<_, QuadError>(&[32, 64, 128], |n| {
            Ok(integrate_loop(|s| libm::exp(libm::cos(TAU * s)), 1.0, n))
        })
        .unwrap();
        assert_eq!(report.order, None);
        assert!((report.extrapolated - 1.2660658777520082).abs() < 1e-14);
        let bad = convergence_study::<_, QuadError>(&[32, 64, 100], |_| Ok(0.0));
        assert_eq!(bad.unwrap_err(), QuadError::InvalidStudy);
    }

    #[test]
    fn algebraic_study_recovers_order() {
        let report =
            convergence_study::<_, QuadError>(&[8, 16, 32], |n| Ok(1.0 + 1.0 / (n * n) as f64))
                .unwrap();
        assert!((report.order.unwrap() - 2.0).abs() < 1e-10);
        assert!((report.extrapolated - 1.0).abs() < 1e-12);
    }
}
