//! Conditional independence tests on binary columns.
//!
//! The default test is the G² likelihood-ratio statistic over the
//! 2 × 2 × 2^|z| contingency table; Pearson's X² is available for
//! cross-checking. Strata with no records are dropped and each non-empty
//! stratum contributes one degree of freedom.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::graph::CausalGraph;
use crate::model::BinaryDataset;

/// Largest conditioning set the contingency counter accepts.
pub const MAX_CONDITIONING: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub independent: bool,
    /// The test had fewer than `min_samples_per_dof` records per degree of
    /// freedom and was reported independent without consulting the p-value.
    pub low_power: bool,
}

/// Anything the PC search can ask "is x independent of y given z?".
pub trait CiTest: Sync {
    fn n_vars(&self) -> usize;
    fn test(&self, x: usize, y: usize, z: &[usize]) -> Result<CiResult>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Statistic {
    #[default]
    GSquared,
    PearsonChiSquared,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiConfig {
    pub alpha: f64,
    pub min_samples_per_dof: f64,
    pub statistic: Statistic,
}

impl Default for CiConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            min_samples_per_dof: 10.0,
            statistic: Statistic::GSquared,
        }
    }
}

impl CiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.min_samples_per_dof >= 0.0 && self.min_samples_per_dof.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "min_samples_per_dof must be a non-negative number, got {}",
                self.min_samples_per_dof
            )));
        }
        Ok(())
    }
}

/// Counts `n[stratum][x][y]`, flattened as `stratum * 4 + x * 2 + y`.
pub fn contingency_counts(data: &BinaryDataset, x: usize, y: usize, z: &[usize]) -> Vec<u64> {
    let mut counts = vec![0u64; 4 << z.len()];
    let xs = data.column(x);
    let ys = data.column(y);
    let zs: Vec<&[u8]> = z.iter().map(|&c| data.column(c)).collect();
    for r in 0..data.n_rows() {
        let mut stratum = 0usize;
        for (bit, col) in zs.iter().enumerate() {
            stratum |= (col[r] as usize) << bit;
        }
        counts[(stratum << 2) | ((xs[r] as usize) << 1) | ys[r] as usize] += 1;
    }
    counts
}

/// Statistic and degrees of freedom from flattened counts.
pub fn statistic_from_counts(counts: &[u64], kind: Statistic) -> (f64, usize) {
    let mut total = 0.0;
    let mut dof = 0;
    for cell in counts.chunks_exact(4) {
        let n = (cell[0] + cell[1] + cell[2] + cell[3]) as f64;
        if n == 0.0 {
            continue;
        }
        dof += 1;
        let row = [(cell[0] + cell[1]) as f64, (cell[2] + cell[3]) as f64];
        let col = [(cell[0] + cell[2]) as f64, (cell[1] + cell[3]) as f64];
        for a in 0..2 {
            for b in 0..2 {
                let observed = cell[a * 2 + b] as f64;
                let expected = row[a] * col[b] / n;
                match kind {
                    Statistic::GSquared => {
                        if observed > 0.0 {
                            total += observed * (observed / expected).ln();
                        }
                    }
                    Statistic::PearsonChiSquared => {
                        if expected > 0.0 {
                            total += (observed - expected).powi(2) / expected;
                        }
                    }
                }
            }
        }
    }
    let stat = match kind {
        Statistic::GSquared => 2.0 * total,
        Statistic::PearsonChiSquared => total,
    };
    (stat.max(0.0), dof)
}

/// Upper tail of the chi-squared distribution.
pub fn chi_squared_sf(statistic: f64, dof: usize) -> f64 {
    if dof == 0 || statistic <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("dof > 0");
    dist.sf(statistic).clamp(0.0, 1.0)
}

/// Data-driven test over a binary dataset.
#[derive(Debug, Clone)]
pub struct ContingencyTest<'a> {
    data: &'a BinaryDataset,
    config: CiConfig,
}

impl<'a> ContingencyTest<'a> {
    pub fn new(data: &'a BinaryDataset, config: CiConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { data, config })
    }

    pub fn config(&self) -> &CiConfig {
        &self.config
    }
}

impl CiTest for ContingencyTest<'_> {
    fn n_vars(&self) -> usize {
        self.data.n_cols()
    }

    fn test(&self, x: usize, y: usize, z: &[usize]) -> Result<CiResult> {
        let schema = self.data.schema();
        schema.check_index(x)?;
        schema.check_index(y)?;
        for &c in z {
            schema.check_index(c)?;
        }
        if x == y {
            return Err(Error::InvalidArgument("x and y must differ".into()));
        }
        if z.contains(&x) || z.contains(&y) {
            return Err(Error::InvalidArgument(
                "conditioning set must not contain x or y".into(),
            ));
        }
        if z.len() > MAX_CONDITIONING {
            return Err(Error::InvalidArgument(format!(
                "conditioning set of size {} exceeds {MAX_CONDITIONING}",
                z.len()
            )));
        }
        // The statistic is symmetric in x and y; fixing the order makes the
        // floating-point summation order symmetric too.
        let (x, y) = if x < y { (x, y) } else { (y, x) };
        let counts = contingency_counts(self.data, x, y, z);
        let (statistic, dof) = statistic_from_counts(&counts, self.config.statistic);
        let p_value = chi_squared_sf(statistic, dof);
        let low_power = (self.data.n_rows() as f64) < self.config.min_samples_per_dof * dof as f64;
        Ok(CiResult {
            statistic,
            dof,
            p_value,
            independent: low_power || p_value > self.config.alpha,
            low_power,
        })
    }
}

/// G² test with the default power guard.
pub fn g_squared_test(
    data: &BinaryDataset,
    x: usize,
    y: usize,
    z: &[usize],
    alpha: f64,
) -> Result<CiResult> {
    ContingencyTest::new(
        data,
        CiConfig {
            alpha,
            ..CiConfig::default()
        },
    )?
    .test(x, y, z)
}

/// Answers independence queries by d-separation in a known DAG. Used to
/// check the search logic separately from sampling error.
#[derive(Debug, Clone)]
pub struct DSeparationOracle<'a> {
    graph: &'a CausalGraph,
}

impl<'a> DSeparationOracle<'a> {
    pub fn new(graph: &'a CausalGraph) -> Result<Self> {
        if !graph.is_dag() {
            return Err(Error::NotADag("d-separation oracle needs a DAG".into()));
        }
        Ok(Self { graph })
    }
}

impl CiTest for DSeparationOracle<'_> {
    fn n_vars(&self) -> usize {
        self.graph.n_nodes()
    }

    fn test(&self, x: usize, y: usize, z: &[usize]) -> Result<CiResult> {
        let schema = self.graph.schema();
        schema.check_index(x)?;
        schema.check_index(y)?;
        let independent = self.graph.d_separated(x, y, z);
        Ok(CiResult {
            statistic: if independent { 0.0 } else { f64::INFINITY },
            dof: 0,
            p_value: if independent { 1.0 } else { 0.0 },
            independent,
            low_power: false,
        })
    }
}
