//! JSON file formats for curves and Möbius maps.

use std::collections::BTreeMap;
use std::path::Path;

use moebius_energy::{ClosedCurve, CurveMeta, MoebiusMap, Primitive, Vector};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// On-disk curve: per coordinate `[[a₀], [a₁, b₁], …, [a_K, b_K]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    pub dimension: usize,
    pub modes: usize,
    pub coefficients: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl CurveFile {
    pub fn from_curve(curve: &ClosedCurve) -> Self {
        let dimension = curve.coefficients().len() / (2 * curve.modes() + 1);
        let coefficients = (0..dimension)
            .map(|d| {
                let c = curve.coordinate(d);
                std::iter::once(vec![c[0]])
                    .chain(c[1..].chunks(2).map(<[f64]>::to_vec))
                    .collect()
            })
            .collect();
        let meta = curve.metadata();
        Self {
            dimension,
            modes: curve.modes(),
            coefficients,
            family: meta.family.clone(),
            params: meta.params.clone(),
        }
    }

    /// Checks the nested shape, then builds and validates the curve.
    pub fn to_curve(&self) -> Result<ClosedCurve> {
        if self.coefficients.len() != self.dimension {
            return Err(CliError::Input(format!(
                "curve file: dimension is {} but {} coordinate lists are given",
                self.dimension,
                self.coefficients.len()
            )));
        }
        let mut flat = Vec::with_capacity(self.dimension * (2 * self.modes + 1));
        for (d, coord) in self.coefficients.iter().enumerate() {
            if coord.len() != self.modes + 1 {
                return Err(CliError::Input(format!(
                    "curve file: coordinate {d} has {} mode entries, expected {}",
                    coord.len(),
                    self.modes + 1
                )));
            }
            for (k, entry) in coord.iter().enumerate() {
                let want = if k == 0 { 1 } else { 2 };
                if entry.len() != want {
                    return Err(CliError::Input(format!(
                        "curve file: coordinate {d}, mode {k} has {} values, expected {want}",
                        entry.len()
                    )));
                }
                flat.extend_from_slice(entry);
            }
        }
        let meta = CurveMeta {
            family: self.family.clone(),
            params: self.params.clone(),
        };
        Ok(ClosedCurve::new(self.dimension, self.modes, flat, meta)?)
    }
}

pub fn read_curve(path: &Path) -> Result<ClosedCurve> {
    let text = std::fs::read_to_string(path)?;
    let file: CurveFile = serde_json::from_str(&text)?;
    file.to_curve()
}

pub fn write_curve(path: &Path, curve: &ClosedCurve) -> Result<()> {
    std::fs::write(
        path,
        serde_json::to_string_pretty(&CurveFile::from_curve(curve))?,
    )?;
    Ok(())
}

/// One primitive, applied in list order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PrimitiveFile {
    Translation {
        vector: Vec<f64>,
    },
    Scaling {
        factor: f64,
    },
    /// Rows of an orthogonal matrix.
    Orthogonal {
        matrix: Vec<Vec<f64>>,
    },
    Inversion {
        center: Vec<f64>,
        radius: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub dimension: usize,
    pub primitives: Vec<PrimitiveFile>,
}

fn vector(values: &[f64], dimension: usize, what: &str) -> Result<Vector> {
    if values.len() != dimension {
        return Err(CliError::Input(format!(
            "map file: {what} has {} entries, expected {dimension}",
            values.len()
        )));
    }
    if !(2..=moebius_energy::MAX_DIM).contains(&dimension) {
        return Err(CliError::Input(format!(
            "map file: unsupported dimension {dimension}"
        )));
    }
    Ok(Vector::from_slice(values))
}

impl MapFile {
    pub fn from_map(map: &MoebiusMap) -> Self {
        let dim = map.dimension();
        let primitives = map
            .primitives()
            .iter()
            .map(|p| match p {
                Primitive::Translation(v) => PrimitiveFile::Translation {
                    vector: v.as_slice().to_vec(),
                },
                Primitive::Scaling(l) => PrimitiveFile::Scaling { factor: *l },
                Primitive::Orthogonal { matrix, .. } => PrimitiveFile::Orthogonal {
                    matrix: matrix.chunks(dim).map(<[f64]>::to_vec).collect(),
                },
                Primitive::Inversion { center, radius } => PrimitiveFile::Inversion {
                    center: center.as_slice().to_vec(),
                    radius: *radius,
                },
            })
            .collect();
        Self {
            dimension: dim,
            primitives,
        }
    }

    /// Builds the map; orthogonal blocks are re-verified to `1e-10`.
    pub fn to_map(&self) -> Result<MoebiusMap> {
        let dim = self.dimension;
        let mut primitives = Vec::with_capacity(self.primitives.len());
        for (index, p) in self.primitives.iter().enumerate() {
            primitives.push(match p {
                PrimitiveFile::Translation { vector: v } => {
                    Primitive::Translation(vector(v, dim, "translation")?)
                }
                PrimitiveFile::Scaling { factor } => Primitive::Scaling(*factor),
                PrimitiveFile::Orthogonal { matrix } => {
                    if matrix.len() != dim || matrix.iter().any(|row| row.len() != dim) {
                        return Err(CliError::Input(format!(
                            "map file: primitive {index} is not a {dim}×{dim} matrix"
                        )));
                    }
                    Primitive::Orthogonal {
                        dim,
                        matrix: matrix.concat(),
                    }
                }
                PrimitiveFile::Inversion { center, radius } => Primitive::Inversion {
                    center: vector(center, dim, "inversion center")?,
                    radius: *radius,
                },
            });
        }
        Ok(MoebiusMap::new(dim, primitives)?)
    }
}

pub fn read_map(path: &Path) -> Result<MoebiusMap> {
    let text = std::fs::read_to_string(path)?;
    let file: MapFile = serde_json::from_str(&text)?;
    file.to_map()
}

#[cfg(test)]
mod tests {
    use super::*;
    use moebius_energy::curve::make_family;
    use moebius_energy::Family;

    #[test]
    fn curve_round_trips_through_json() {
        let c = make_family(&Family::trefoil(), 3).unwrap();
        let text = serde_json::to_string(&CurveFile::from_curve(&c)).unwrap();
        let back: CurveFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_curve().unwrap(), c);
    }

    #[test]
    fn ragged_mode_entry_is_rejected() {
        let mut f = CurveFile::from_curve(&make_family(&Family::Circle, 2).unwrap());
        f.coefficients[1][1].push(0.0);
        let err = f.to_curve().unwrap_err();
        assert!(err.to_string().contains("mode 1"));
    }

    #[test]
    fn non_orthogonal_matrix_is_rejected() {
        let f = MapFile {
            dimension: 2,
            primitives: vec![PrimitiveFile::Orthogonal {
                matrix: vec![vec![1.0, 0.1], vec![0.0, 1.0]],
            }],
        };
        assert!(matches!(
            f.to_map(),
            Err(CliError::Core(moebius_energy::Error::Moebius(
                moebius_energy::MoebiusError::NotOrthogonal(_)
            )))
        ));
    }

    #[test]
    fn map_round_trips_through_json() {
        let c = make_family(&Family::trefoil(), 3).unwrap();
        let map = moebius_energy::moebius::random_map(3, &c, 0.5).unwrap();
        let text = serde_json::to_string(&MapFile::from_map(&map)).unwrap();
        let back: MapFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_map().unwrap(), map);
    }
}
