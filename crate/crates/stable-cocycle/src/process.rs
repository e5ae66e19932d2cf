//! Partial-sum paths W_n(t) = n^{−1/α} S_{⌊nt⌋} and replica ensembles.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cocycle::{band_sums, Band, CocycleModel, CocycleSample};
use crate::error::{invalid, Result};

/// How the centering constant B enters the path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum Centering {
    None,
    /// (j/n)·B added at index j.
    Path(f64),
    /// B added at j = n only.
    Scalar(f64),
}

/// A step path on the grid {j/n}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathGrid {
    pub n: u64,
    pub alpha: f64,
    /// S_0 = 0, S_1, …, S_n.
    pub values: Vec<f64>,
    pub centering: Centering,
}

impl PathGrid {
    pub fn new(alpha: f64, values: Vec<f64>, centering: Centering) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid!("a path needs at least S_0 and S_1"));
        }
        if values[0] != 0.0 {
            return Err(invalid!("paths start at S_0 = 0, got {}", values[0]));
        }
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(invalid!("alpha must lie in (0, 2], got {alpha}"));
        }
        Ok(Self { n: values.len() as u64 - 1, alpha, values, centering })
    }

    /// The path of an observable given by its values ψ(0), …, ψ(n−1).
    pub fn from_observable(alpha: f64, obs: &[f64], centering: Centering) -> Result<Self> {
        let mut values = Vec::with_capacity(obs.len() + 1);
        let mut s = 0.0;
        values.push(0.0);
        for v in obs {
            s += *v;
            values.push(s);
        }
        Self::new(alpha, values, centering)
    }

    /// n^{−1/α}.
    pub fn scale(&self) -> f64 {
        libm::pow(self.n as f64, -1.0 / self.alpha)
    }

    /// Centered partial sum at index j.
    pub fn raw(&self, j: usize) -> f64 {
        let c = match self.centering {
            Centering::None => 0.0,
            Centering::Path(b) => b * j as f64 / self.n as f64,
            Centering::Scalar(b) => {
                if j as u64 == self.n {
                    b
                } else {
                    0.0
                }
            }
        };
        self.values[j] + c
    }

    /// Grid index ⌊nt⌋ for t ∈ [0, 1].
    pub fn index(&self, t: f64) -> usize {
        let j = libm::floor(self.n as f64 * t.clamp(0.0, 1.0)) as usize;
        j.min(self.n as usize)
    }

    /// W(t).
    pub fn at(&self, t: f64) -> f64 {
        self.scale() * self.raw(self.index(t))
    }

    /// W(1).
    pub fn terminal(&self) -> f64 {
        self.scale() * self.raw(self.n as usize)
    }
}

/// Cumulative path of the whole observable: the index-wise sum of the band
/// paths, so band additivity holds exactly.
pub fn partial_sum_path(sample: &CocycleSample, alpha: f64, centering: Centering) -> Result<PathGrid> {
    PathGrid::new(alpha, band_sums(sample).total(), centering)
}

/// Path of one band.
pub fn band_path(sample: &CocycleSample, alpha: f64, band: Band) -> Result<PathGrid> {
    PathGrid::new(alpha, band_sums(sample).band(band).to_vec(), Centering::None)
}

/// sup_t |W(t)|, exact for a step path.
pub fn sup_norm(path: &PathGrid) -> f64 {
    let m = (0..path.values.len()).map(|j| path.raw(j).abs()).fold(0.0, f64::max);
    path.scale() * m
}

fn sup_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// W(t_{i+1}) − W(t_i) for sorted breakpoints in [0, 1].
pub fn increments(path: &PathGrid, breakpoints: &[f64]) -> Result<Vec<f64>> {
    check_breakpoints(breakpoints)?;
    Ok(breakpoints.windows(2).map(|w| path.at(w[1]) - path.at(w[0])).collect())
}

pub(crate) fn check_breakpoints(breakpoints: &[f64]) -> Result<()> {
    if breakpoints.len() < 2 {
        return Err(invalid!("need at least two breakpoints"));
    }
    if breakpoints.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(invalid!("breakpoints must lie in [0, 1]"));
    }
    if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid!("breakpoints must be strictly increasing"));
    }
    Ok(())
}

/// Runs `count` independent jobs. Implementations may run them in any order
/// or in parallel but must return results in index order.
pub trait Executor {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs jobs one after another.
#[derive(Debug, Clone, Copy, Default)]
pub struct SerialExecutor;

impl Executor for SerialExecutor {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}

/// Path functionals of one replica (all already scaled by n^{−1/α}).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaSummary {
    pub replica: u64,
    /// W_n(1), uncentered.
    pub w1: f64,
    pub sup_total: f64,
    pub sup_small: f64,
    pub sup_vs: f64,
    pub sup_ls: f64,
    pub sup_middle: f64,
    pub sup_large: f64,
    /// ‖W^L‖_∞ ≠ 0.
    pub large_nonzero: bool,
    /// W at each configured breakpoint.
    pub marks: Vec<f64>,
    /// n^{−1/α} times the middle-band Σ a·f_k over the window.
    pub middle_direct: f64,
}

/// M replicas of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub seed: u64,
    pub n: u64,
    pub alpha: f64,
    pub breakpoints: Vec<f64>,
    pub replicas: Vec<ReplicaSummary>,
    /// Full paths, when requested.
    pub paths: Option<Vec<PathGrid>>,
}

impl Ensemble {
    pub fn w1(&self) -> Vec<f64> {
        self.replicas.iter().map(|r| r.w1).collect()
    }

    /// Increments between consecutive breakpoints, per replica.
    pub fn increments(&self) -> Vec<Vec<f64>> {
        self.replicas.iter().map(|r| r.marks.windows(2).map(|w| w[1] - w[0]).collect()).collect()
    }
}

/// Summary functionals of one realization.
pub fn summarize(
    sample: &CocycleSample,
    alpha: f64,
    replica: u64,
    breakpoints: &[f64],
) -> Result<(ReplicaSummary, PathGrid)> {
    let bs = band_sums(sample);
    let total = PathGrid::new(alpha, bs.total(), Centering::None)?;
    let scale = total.scale();
    let small = bs.small();
    let sup_large = scale * sup_abs(bs.band(Band::Large));
    let summary = ReplicaSummary {
        replica,
        w1: total.terminal(),
        sup_total: sup_norm(&total),
        sup_small: scale * sup_abs(&small),
        sup_vs: scale * sup_abs(bs.band(Band::VerySmall)),
        sup_ls: scale * sup_abs(bs.band(Band::LargeSmall)),
        sup_middle: scale * sup_abs(bs.band(Band::Middle)),
        sup_large,
        large_nonzero: sup_large != 0.0,
        marks: breakpoints.iter().map(|t| total.at(*t)).collect(),
        middle_direct: scale * sample.middle_direct_sum(),
    };
    Ok((summary, total))
}

/// M independent replicas; replica r is `model.realize(seed, r)`.
pub fn ensemble_run<E: Executor>(
    model: &CocycleModel,
    replicas: usize,
    seed: u64,
    breakpoints: &[f64],
    keep_paths: bool,
    exec: &E,
) -> Result<Ensemble> {
    if replicas == 0 {
        return Err(invalid!("an ensemble needs at least one replica"));
    }
    check_breakpoints(breakpoints)?;
    let alpha = model.config.alpha;
    let results = exec.map(replicas, |r| -> Result<(ReplicaSummary, Option<PathGrid>)> {
        let sample = model.realize(seed, r as u64)?;
        let (s, path) = summarize(&sample, alpha, r as u64, breakpoints)?;
        Ok((s, if keep_paths { Some(path) } else { None }))
    });
    let mut summaries = Vec::with_capacity(replicas);
    let mut paths = Vec::new();
    for r in results {
        let (s, p) = r?;
        summaries.push(s);
        if let Some(p) = p {
            paths.push(p);
        }
    }
    Ok(Ensemble {
        seed,
        n: model.config.n,
        alpha,
        breakpoints: breakpoints.to_vec(),
        replicas: summaries,
        paths: if keep_paths { Some(paths) } else { None },
    })
}
