use std::collections::hash_map::DefaultHasher;
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use serde::Serialize;

use super::OracleError;
use crate::model::DimensionlessParams;

/// Seed ratios at or below this use the point-kernel limit on that axis.
pub const SEED_CUTOFF: f64 = 1e-12;

/// Kernel orders with weight `(2 Xi)^m / m!` above this set the grid extent.
const SIGNIFICANT_WEIGHT: f64 = 1e-13;


#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AxisKind {
    /// Seed profile `exp(-ratio x^2 / 4)` on a uniform grid.
    Gaussian { ratio: f64 },
    /// Infinitely wide seed: the axis collapses to one point and every
    /// generator power acts as the identity (odd powers as the parity flip).
    Point,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisGrid {
    pub kind: AxisKind,
    pub points: Vec<f64>,
    /// Quadrature weights including the 1/(2 pi) measure factor.
    pub weights: Vec<f64>,
}

impl AxisGrid {
    /// Uniform symmetric grid on `[-half_width, half_width]`.
    pub fn uniform(n: usize, half_width: f64, ratio: f64) -> Result<Self, OracleError> {
        if n < 2 {
            return Err(OracleError::InvalidGrid(format!("need at least 2 points, got {n}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(OracleError::InvalidGrid(format!("half width must be > 0, got {half_width}")));
        }
        let h = 2.0 * half_width / (n - 1) as f64;
        // Built from both ends so that points[i] == -points[n-1-i] exactly.
        let points: Vec<f64> = (0..n)
            .map(|i| {
                let j = i.min(n - 1 - i) as f64;
                let x = half_width - j * h;
                if 2 * i < n - 1 {
                    -x
                } else if 2 * i == n - 1 {
                    0.0
                } else {
                    x
                }
            })
            .collect();
        let weights = vec![h / (2.0 * PI); n];
        Ok(AxisGrid {
            kind: AxisKind::Gaussian { ratio },
            points,
            weights,
        })
    }

    pub fn point() -> Self {
        AxisGrid {
            kind: AxisKind::Point,
            points: vec![0.0],
            weights: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_point(&self) -> bool {
        matches!(self.kind, AxisKind::Point)
    }

    pub fn half_width(&self) -> f64 {
        self.points.last().copied().unwrap_or(0.0)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Generator factor `sqrt(w_i) sqrt(pi) exp(-(x_i + x_j)^2 / 4) sqrt(w_j)`.
    fn generator(&self) -> DMatrix<f64> {
        closed_form_factor(self, 1)
    }
}

/// Per-axis factor of the closed form `P_m` in weighted form.
pub(super) fn closed_form_factor(axis: &AxisGrid, m: usize) -> DMatrix<f64> {
    debug_assert!(m >= 1);
    let n = axis.len();
    if axis.is_point() {
        return DMatrix::from_element(1, 1, 1.0);
    }
    let mf = m as f64;
    let pref = (PI / mf).sqrt();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let u = if m % 2 == 1 {
                axis.points[i] + axis.points[j]
            } else {
                axis.points[i] - axis.points[j]
            };
            let v = (axis.weights[i] * axis.weights[j]).sqrt() * pref * (-u * u / (4.0 * mf)).exp();
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub n_points: usize,
    /// Half width in units of the widest relevant Gaussian scale.
    pub extent: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_points: 48,
            extent: 5.0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.n_points < 8 {
            return Err(OracleError::InvalidGrid(format!(
                "n_points must be >= 8, got {}",
                self.n_points
            )));
        }
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return Err(OracleError::InvalidGrid(format!(
                "extent must be > 0, got {}",
                self.extent
            )));
        }
        Ok(())
    }
}

/// Three axis grids plus the shared generator and a cache of its powers.
#[derive(Debug)]
pub struct GridSet {
    pub axes: [AxisGrid; 3],
    pub spec: GridSpec,
    fingerprint: u64,
    powers: Mutex<Vec<Arc<Vec<Arc<DMatrix<f64>>>>>>,
}

impl GridSet {
    pub fn new(axes: [AxisGrid; 3], spec: GridSpec) -> Arc<Self> {
        let mut hasher = DefaultHasher::new();
        for axis in &axes {
            axis.is_point().hash(&mut hasher);
            for (x, w) in axis.points.iter().zip(&axis.weights) {
                x.to_bits().hash(&mut hasher);
                w.to_bits().hash(&mut hasher);
            }
        }
        let identity: Vec<_> = axes
            .iter()
            .map(|a| Arc::new(DMatrix::identity(a.len(), a.len())))
            .collect();
        let generator: Vec<_> = axes.iter().map(|a| Arc::new(a.generator())).collect();
        Arc::new(GridSet {
            axes,
            spec,
            fingerprint: hasher.finish(),
            powers: Mutex::new(vec![Arc::new(identity), Arc::new(generator)]),
        })
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn same_as(&self, other: &GridSet) -> bool {
        self.fingerprint == other.fingerprint
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.axes[0].len(), self.axes[1].len(), self.axes[2].len()]
    }

    pub fn total_points(&self) -> usize {
        self.dims().iter().product()
    }

    /// Per-axis factors of the m-th generator power on the grid.
    pub fn power(&self, m: usize) -> Arc<Vec<Arc<DMatrix<f64>>>> {
        let mut cache = self.powers.lock().expect("power cache poisoned");
        while cache.len() <= m {
            let prev = cache.last().expect("cache starts with two entries").clone();
            let next: Vec<_> = prev
                .iter()
                .zip(cache[1].iter())
                .map(|(p, g)| {
                    let prod = p.as_ref() * g.as_ref();
                    // Powers of a symmetric matrix; remove the rounding asymmetry.
                    Arc::new((&prod + prod.transpose()) * 0.5)
                })
                .collect();
            cache.push(Arc::new(next));
        }
        cache[m].clone()
    }
}

/// First order whose series weight `(2 Xi)^m / m!` drops below the cutoff.
pub(super) fn significant_order(xi: f64) -> usize {
    let mut weight = 1.0;
    let mut m = 0;
    while weight >= SIGNIFICANT_WEIGHT && m < 10_000 {
        m += 1;
        weight *= 2.0 * xi / m as f64;
    }
    m
}

/// Grids sized to the seed and to the spread of the significant kernel orders.
///
/// The half width on an axis with seed ratio `r` is
/// `extent * sqrt(2 (1/r + m_sig/2))`.
pub fn build_grids(spec: &GridSpec, params: &DimensionlessParams) -> Result<Arc<GridSet>, OracleError> {
    spec.validate()?;
    let p = params.validate()?;
    let m_sig = significant_order(p.xi) as f64;
    let axis = |ratio: f64| -> Result<AxisGrid, OracleError> {
        if ratio <= SEED_CUTOFF {
            return Ok(AxisGrid::point());
        }
        let scale = (2.0 * (1.0 / ratio + 0.5 * m_sig)).sqrt();
        AxisGrid::uniform(spec.n_points, spec.extent * scale, ratio)
    };
    Ok(GridSet::new([axis(p.nu)?, axis(p.nu)?, axis(p.mu)?], *spec))
}
