use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on `ConfigGrid::total_points`.
pub const DEFAULT_POINT_BUDGET: usize = 1 << 22;

/// One uniformly sampled coordinate: a particle position or the amplitude
/// of the field at one lattice site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub label: String,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl GridAxis {
    pub fn new(label: impl Into<String>, min: f64, max: f64, n: usize) -> Result<Self> {
        let axis = GridAxis { label: label.into(), min, max, n };
        axis.validate()?;
        Ok(axis)
    }

    /// Axis of `n` points centred on `center` with half-width `half_width`.
    pub fn centered(label: impl Into<String>, center: f64, half_width: f64, n: usize) -> Result<Self> {
        Self::new(label, center - half_width, center + half_width, n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 {
            return Err(Error::InvalidGrid(format!("axis `{}` needs at least 8 points, got {}", self.label, self.n)));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.max <= self.min {
            return Err(Error::InvalidGrid(format!(
                "axis `{}` has invalid range [{}, {}]",
                self.label, self.min, self.max
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    #[inline]
    pub fn point(&self, j: usize) -> f64 {
        self.min + j as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }
}

/// Tensor-product grid. Axis order is fixed by the caller: particle axis
/// first, then the field (or mode) amplitude axes in site order. The last
/// axis is contiguous in memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<GridAxis>", into = "Vec<GridAxis>")]
pub struct ConfigGrid {
    axes: Vec<GridAxis>,
    strides: Vec<usize>,
}

impl TryFrom<Vec<GridAxis>> for ConfigGrid {
    type Error = Error;
    fn try_from(axes: Vec<GridAxis>) -> Result<Self> {
        ConfigGrid::new(axes)
    }
}

impl From<ConfigGrid> for Vec<GridAxis> {
    fn from(g: ConfigGrid) -> Self {
        g.axes
    }
}

impl ConfigGrid {
    pub fn new(axes: Vec<GridAxis>) -> Result<Self> {
        Self::with_budget(axes, DEFAULT_POINT_BUDGET)
    }

    pub fn with_budget(axes: Vec<GridAxis>, budget: usize) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one axis".into()));
        }
        for axis in &axes {
            axis.validate()?;
        }
        let points = axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.n));
        match points {
            Some(p) if p <= budget => {}
            Some(p) => return Err(Error::BudgetExceeded { points: p, budget }),
            None => return Err(Error::BudgetExceeded { points: usize::MAX, budget }),
        }
        let mut strides = vec![1usize; axes.len()];
        for k in (0..axes.len() - 1).rev() {
            strides[k] = strides[k + 1] * axes[k + 1].n;
        }
        Ok(ConfigGrid { axes, strides })
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &GridAxis {
        &self.axes[k]
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn total_points(&self) -> usize {
        self.strides[0] * self.axes[0].n
    }

    pub fn stride(&self, k: usize) -> usize {
        self.strides[k]
    }

    /// Quadrature weight of a single grid cell (product of spacings).
    pub fn cell_measure(&self) -> f64 {
        self.axes.iter().map(GridAxis::spacing).product()
    }

    /// Multi-index of a flat index.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for k in 0..self.axes.len() {
            out[k] = flat / self.strides[k];
            flat %= self.strides[k];
        }
    }

    /// Coordinates of the grid point with flat index `flat`.
    pub fn coords(&self, flat: usize, out: &mut [f64]) {
        let mut rem = flat;
        for k in 0..self.axes.len() {
            let j = rem / self.strides[k];
            rem %= self.strides[k];
            out[k] = self.axes[k].point(j);
        }
    }

    /// Samples `f` at every grid point.
    pub fn sample<T, F: FnMut(&[f64]) -> T>(&self, mut f: F) -> Vec<T> {
        let mut x = vec![0.0; self.ndim()];
        (0..self.total_points())
            .map(|j| {
                self.coords(j, &mut x);
                f(&x)
            })
            .collect()
    }

    /// Values of coordinate `k` at every grid point.
    pub fn coordinate(&self, k: usize) -> Vec<f64> {
        self.sample(|x| x[k])
    }

    /// Axis lengths of the flat index range split around axis `k`:
    /// (number of outer blocks, axis length, inner stride).
    pub(crate) fn line_layout(&self, k: usize) -> (usize, usize, usize) {
        let inner = self.strides[k];
        let n = self.axes[k].n;
        let outer = self.total_points() / (n * inner);
        (outer, n, inner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_points() {
        let a = GridAxis::new("x", -1.0, 1.0, 11).unwrap();
        assert!((a.spacing() - 0.2).abs() < 1e-15);
        assert!((a.point(10) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn too_few_points_rejected() {
        assert!(matches!(GridAxis::new("x", 0.0, 1.0, 7), Err(Error::InvalidGrid(_))));
        assert!(GridAxis::new("x", 1.0, 1.0, 16).is_err());
    }

    #[test]
    fn strides_last_axis_contiguous() {
        let g = ConfigGrid::new(vec![
            GridAxis::new("x", 0.0, 1.0, 8).unwrap(),
            GridAxis::new("phi0", 0.0, 1.0, 9).unwrap(),
            GridAxis::new("phi1", 0.0, 1.0, 10).unwrap(),
        ])
        .unwrap();
        assert_eq!(g.total_points(), 720);
        assert_eq!(g.stride(2), 1);
        assert_eq!(g.stride(1), 10);
        assert_eq!(g.stride(0), 90);
        let mut idx = [0; 3];
        g.unravel(90 * 3 + 10 * 4 + 5, &mut idx);
        assert_eq!(idx, [3, 4, 5]);
    }

    #[test]
    fn budget_enforced() {
        let axes = vec![GridAxis::new("x", 0.0, 1.0, 64).unwrap(); 3];
        assert!(matches!(
            ConfigGrid::with_budget(axes, 1000),
            Err(Error::BudgetExceeded { points: 262144, budget: 1000 })
        ));
    }
}
