use serde::Serialize;

use crate::error::Result;
use crate::linalg::{numerical_rank, ToleranceSpec};
use crate::net::{JacobianProbe, Network};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepEntry {
    pub depth: usize,
    pub partial_rank: usize,
    pub probe_size: usize,
    pub epsilon: f64,
}

/// Partial Jacobian ranks at every depth of a network.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankSweepResult {
    pub entries: Vec<SweepEntry>,
}

impl RankSweepResult {
    pub fn ranks(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.partial_rank).collect()
    }

    pub fn is_non_increasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].partial_rank <= w[0].partial_rank)
    }
}

/// Numerical rank of the probed Jacobian columns of `F_k` for `k = 1..L`.
pub fn partial_rank_sweep(
    net: &Network,
    x: &[f64],
    probe: &JacobianProbe,
    tol: ToleranceSpec,
) -> Result<RankSweepResult> {
    tol.validate()?;
    let entries = net
        .probe_jacobians(x, probe)?
        .iter()
        .enumerate()
        .map(|(k, j)| {
            Ok(SweepEntry {
                depth: k + 1,
                partial_rank: numerical_rank(j, tol)?,
                probe_size: probe.len(),
                epsilon: tol.epsilon(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(RankSweepResult { entries })
}
