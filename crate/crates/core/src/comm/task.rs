//! Partial functions and input distributions over dense integer alphabets.

use serde::{Deserialize, Serialize};

use crate::tol;

use super::{CommError, Result};

/// A partial function `f : X × Y → Z ∪ {⊥}` on dense integer alphabets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialFunction {
    x_count: usize,
    y_count: usize,
    z_count: usize,
    /// Row-major `f(x, y)`, `None` for ⊥.
    table: Vec<Option<usize>>,
}

impl PartialFunction {
    pub fn new(
        x_count: usize,
        y_count: usize,
        z_count: usize,
        table: Vec<Option<usize>>,
    ) -> Result<Self> {
        assert_eq!(table.len(), x_count * y_count);
        for x in 0..x_count {
            for y in 0..y_count {
                if let Some(z) = table[x * y_count + y] {
                    if z >= z_count {
                        return Err(CommError::BadTable { x, y, entry: z as i64, z_count });
                    }
                }
            }
        }
        Ok(Self { x_count, y_count, z_count, table })
    }

    pub fn from_fn(
        x_count: usize,
        y_count: usize,
        z_count: usize,
        mut f: impl FnMut(usize, usize) -> Option<usize>,
    ) -> Result<Self> {
        let mut table = Vec::with_capacity(x_count * y_count);
        for x in 0..x_count {
            for y in 0..y_count {
                table.push(f(x, y));
            }
        }
        Self::new(x_count, y_count, z_count, table)
    }

    /// EQUALITY on `{0,1}^n`: `f(x,y) = [x = y]`.
    pub fn equality(n_bits: usize) -> Self {
        let size = 1usize << n_bits;
        Self::from_fn(size, size, 2, |x, y| Some(usize::from(x == y)))
            .expect("equality table is valid")
    }

    pub fn x_count(&self) -> usize {
        self.x_count
    }

    pub fn y_count(&self) -> usize {
        self.y_count
    }

    pub fn z_count(&self) -> usize {
        self.z_count
    }

    pub fn value(&self, x: usize, y: usize) -> Option<usize> {
        self.table[x * self.y_count + y]
    }

    pub fn is_total(&self) -> bool {
        self.table.iter().all(Option::is_some)
    }

    /// `S^y_z = {x | f(x,y) = z}`.
    pub fn class(&self, y: usize, z: usize) -> Vec<usize> {
        (0..self.x_count).filter(|&x| self.value(x, y) == Some(z)).collect()
    }
}

/// Column sparsity `CS(f) = max_y min(|S^y_0|, |S^y_1|)`; binary outputs
/// only.
pub fn column_sparsity(f: &PartialFunction) -> Result<usize> {
    if f.z_count() != 2 {
        return Err(CommError::UnsupportedOutputAlphabet { z_count: f.z_count() });
    }
    let mut best = 0usize;
    for y in 0..f.y_count() {
        let s0 = f.class(y, 0).len();
        let s1 = f.class(y, 1).len();
        best = best.max(s0.min(s1));
    }
    Ok(best)
}

/// A distribution over `X × Y`, with cached marginals and a product flag.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDistribution {
    x_count: usize,
    y_count: usize,
    weights: Vec<f64>,
    product: bool,
    marginal_x: Vec<f64>,
    marginal_y: Vec<f64>,
}

impl InputDistribution {
    pub fn new(x_count: usize, y_count: usize, weights: Vec<f64>) -> Result<Self> {
        assert_eq!(weights.len(), x_count * y_count);
        let sum: f64 = crate::numeric::compensated_sum(weights.iter().copied());
        if weights.iter().any(|&w| w < -tol::CLASSICAL_SUM)
            || (sum - 1.0).abs() > tol::CLASSICAL_SUM
        {
            return Err(CommError::BadWeights { sum });
        }
        let mut marginal_x = vec![0.0; x_count];
        let mut marginal_y = vec![0.0; y_count];
        for x in 0..x_count {
            for y in 0..y_count {
                marginal_x[x] += weights[x * y_count + y];
                marginal_y[y] += weights[x * y_count + y];
            }
        }
        let product = (0..x_count).all(|x| {
            (0..y_count).all(|y| {
                (weights[x * y_count + y] - marginal_x[x] * marginal_y[y]).abs()
                    <= tol::CLASSICAL_SUM
            })
        });
        Ok(Self { x_count, y_count, weights, product, marginal_x, marginal_y })
    }

    /// Exact product distribution `μ_X ⊗ μ_Y`.
    pub fn product_of(mx: &[f64], my: &[f64]) -> Result<Self> {
        let mut weights = Vec::with_capacity(mx.len() * my.len());
        for &wx in mx {
            for &wy in my {
                weights.push(wx * wy);
            }
        }
        Self::new(mx.len(), my.len(), weights)
    }

    pub fn uniform(x_count: usize, y_count: usize) -> Self {
        Self::new(x_count, y_count, vec![1.0 / (x_count * y_count) as f64; x_count * y_count])
            .expect("uniform weights are valid")
    }

    pub fn x_count(&self) -> usize {
        self.x_count
    }

    pub fn y_count(&self) -> usize {
        self.y_count
    }

    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.weights[x * self.y_count + y]
    }

    pub fn is_product(&self) -> bool {
        self.product
    }

    pub fn marginal_x(&self) -> &[f64] {
        &self.marginal_x
    }

    pub fn marginal_y(&self) -> &[f64] {
        &self.marginal_y
    }

    /// Weight the support must avoid: every positive cell must be defined
    /// under `f`.
    pub fn validate_support(&self, f: &PartialFunction) -> Result<()> {
        if self.x_count != f.x_count() || self.y_count != f.y_count() {
            return Err(CommError::AlphabetMismatch {
                what: format!(
                    "distribution {}x{} vs function {}x{}",
                    self.x_count,
                    self.y_count,
                    f.x_count(),
                    f.y_count()
                ),
            });
        }
        for x in 0..self.x_count {
            for y in 0..self.y_count {
                let w = self.weight(x, y);
                if w > tol::CLASSICAL_SUM && f.value(x, y).is_none() {
                    return Err(CommError::SupportViolation { x, y, weight: w });
                }
            }
        }
        Ok(())
    }

    /// Sample a cell via the inverse CDF of the joint weights.
    pub fn sample(&self, u: f64) -> (usize, usize) {
        let mut acc = 0.0;
        for x in 0..self.x_count {
            for y in 0..self.y_count {
                acc += self.weight(x, y);
                if u < acc {
                    return (x, y);
                }
            }
        }
        (self.x_count - 1, self.y_count - 1)
    }

    /// Sample `x` from the X-marginal.
    pub fn sample_x(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (x, &w) in self.marginal_x.iter().enumerate() {
            acc += w;
            if u < acc {
                return x;
            }
        }
        self.x_count - 1
    }
}

/// On-disk task format: `⊥` encoded as -1, weights as a nested table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskFile {
    pub x_count: usize,
    pub y_count: usize,
    pub z_count: usize,
    /// `table[x][y]`, -1 for ⊥.
    pub table: Vec<Vec<i64>>,
    /// `weights[x][y]`.
    pub weights: Vec<Vec<f64>>,
}

impl TaskFile {
    pub fn pack(f: &PartialFunction, dist: &InputDistribution) -> Self {
        let table = (0..f.x_count())
            .map(|x| {
                (0..f.y_count())
                    .map(|y| f.value(x, y).map_or(-1, |z| z as i64))
                    .collect()
            })
            .collect();
        let weights = (0..dist.x_count())
            .map(|x| (0..dist.y_count()).map(|y| dist.weight(x, y)).collect())
            .collect();
        Self {
            x_count: f.x_count(),
            y_count: f.y_count(),
            z_count: f.z_count(),
            table,
            weights,
        }
    }

    pub fn unpack(&self) -> Result<(PartialFunction, InputDistribution)> {
        let mut table = Vec::with_capacity(self.x_count * self.y_count);
        for (x, row) in self.table.iter().enumerate() {
            for (y, &e) in row.iter().enumerate() {
                if e < -1 || e >= self.z_count as i64 {
                    return Err(CommError::BadTable { x, y, entry: e, z_count: self.z_count });
                }
                table.push(if e == -1 { None } else { Some(e as usize) });
            }
        }
        let f = PartialFunction::new(self.x_count, self.y_count, self.z_count, table)?;
        let weights = self.weights.iter().flatten().copied().collect();
        let dist = InputDistribution::new(self.x_count, self.y_count, weights)?;
        dist.validate_support(&f)?;
        Ok((f, dist))
    }
}
