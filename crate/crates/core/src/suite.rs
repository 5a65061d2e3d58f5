//! The built-in set of test curves.

use alloc::vec::Vec;

use crate::curve::{make_family, ArcLengthCurve, ClosedCurve, Family};
use crate::energy::normalize;
use crate::Result;

/// Families of the suite, in report order, with display names.
pub fn families() -> Vec<(&'static str, Family)> {
    alloc::vec![
        ("circle", Family::Circle),
        ("ellipse(2,1)", Family::Ellipse { a: 2.0, b: 1.0 }),
        ("trefoil", Family::trefoil()),
        ("cinquefoil", Family::cinquefoil()),
        (
            "perturbed_circle",
            Family::PerturbedCircle {
                seed: 7,
                amplitude: 0.05
            }
        ),
    ]
}

/// Suite curves in ℝ³ in their native parametrization.
pub fn curves() -> Result<Vec<(&'static str, ClosedCurve)>> {
    families()
        .into_iter()
        .map(|(name, f)| Ok((name, make_family(&f, 3)?)))
        .collect()
}

/// Suite curves reparametrized by arc length and scaled to length 2π.
pub fn normalized() -> Result<Vec<(&'static str, ArcLengthCurve)>> {
    curves()?
        .into_iter()
        .map(|(name, c)| Ok((name, normalize(&c)?)))
        .collect()
}
