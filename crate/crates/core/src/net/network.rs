use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::net::activation;
use crate::net::spec::{ActivationKind, Affine, LayerSpec, NetworkSpec, WeightInit};
use crate::rng::GaussianStream;

/// Variance below which layer normalization rejects its input.
pub const LAYER_NORM_MIN_VARIANCE: f64 = 1e-24;

/// A layer with materialized parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Dense { weight: Matrix, bias: Option<Vec<f64>> },
    Activation(ActivationKind),
    LayerNorm { affine: Option<Affine> },
    Residual { body: Vec<Layer> },
}

impl Layer {
    /// Materializes `spec` for inputs of width `in_dim`. Gaussian weights are
    /// drawn from the stream keyed by `(master_seed, seed)`.
    pub fn from_spec(spec: &LayerSpec, in_dim: usize, master_seed: u64) -> Result<Self> {
        spec.output_width(in_dim)?;
        Ok(Self::build(spec, in_dim, master_seed))
    }

    fn build(spec: &LayerSpec, in_dim: usize, master_seed: u64) -> Self {
        match spec {
            LayerSpec::Dense { out_dim, weight_init, bias } => {
                let weight = match weight_init {
                    WeightInit::Gaussian { seed, std } => {
                        GaussianStream::derived(master_seed, *seed).gaussian_matrix(*out_dim, in_dim, *std)
                    }
                    WeightInit::Explicit(w) => w.clone(),
                };
                Layer::Dense { weight, bias: bias.clone() }
            }
            LayerSpec::Activation { function } => Layer::Activation(*function),
            LayerSpec::LayerNorm { affine } => Layer::LayerNorm { affine: affine.clone() },
            LayerSpec::Residual { body } => {
                Layer::Residual { body: body.iter().map(|l| Self::build(l, in_dim, master_seed)).collect() }
            }
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Layer::Dense { weight, bias } => {
                let mut y = weight.matvec(x)?;
                if let Some(b) = bias {
                    for (yi, bi) in y.iter_mut().zip(b) {
                        *yi += bi;
                    }
                }
                Ok(y)
            }
            Layer::Activation(kind) => Ok(x.iter().map(|&v| activation::value(*kind, v)).collect()),
            Layer::LayerNorm { affine } => {
                let (y, _) = normalize(x)?;
                Ok(match affine {
                    Some(a) => y.iter().zip(&a.scale).zip(&a.shift).map(|((v, s), t)| v * s + t).collect(),
                    None => y,
                })
            }
            Layer::Residual { body } => {
                let inner = body.iter().try_fold(x.to_vec(), |h, layer| layer.forward(&h))?;
                Ok(x.iter().zip(inner).map(|(a, b)| a + b).collect())
            }
        }
    }

    /// Applies the Jacobian at `x` to every column of `tangents` (`in_dim x K`).
    pub fn push_tangents(&self, x: &[f64], tangents: &Matrix) -> Result<Matrix> {
        if tangents.rows() != x.len() {
            return Err(Error::Dimension(format!(
                "tangent block has {} rows for an input of width {}",
                tangents.rows(),
                x.len()
            )));
        }
        match self {
            Layer::Dense { weight, .. } => weight.matmul(tangents),
            Layer::Activation(kind) => {
                let mut out = tangents.clone();
                for (i, &xi) in x.iter().enumerate() {
                    let d = activation::derivative(*kind, xi);
                    out.row_mut(i).iter_mut().for_each(|v| *v *= d);
                }
                Ok(out)
            }
            Layer::LayerNorm { affine } => {
                let (y, sigma) = normalize(x)?;
                let n = x.len() as f64;
                let k = tangents.cols();
                let mut col_sums = vec![0.0; k];
                let mut y_proj = vec![0.0; k];
                for (i, &yi) in y.iter().enumerate() {
                    for (j, &t) in tangents.row(i).iter().enumerate() {
                        col_sums[j] += t;
                        y_proj[j] += yi * t;
                    }
                }
                let mut out = tangents.clone();
                for (i, &yi) in y.iter().enumerate() {
                    let s = affine.as_ref().map_or(1.0, |a| a.scale[i]);
                    for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                        *v = s * (*v - col_sums[j] / n - yi * y_proj[j] / n) / sigma;
                    }
                }
                Ok(out)
            }
            Layer::Residual { body } => {
                let mut h = x.to_vec();
                let mut t = tangents.clone();
                for layer in body {
                    t = layer.push_tangents(&h, &t)?;
                    h = layer.forward(&h)?;
                }
                tangents.add(&t)
            }
        }
    }

    /// Exact Jacobian at `x`.
    pub fn jacobian(&self, x: &[f64]) -> Result<Matrix> {
        self.push_tangents(x, &Matrix::identity(x.len()))
    }

    pub fn is_residual(&self) -> bool {
        matches!(self, Layer::Residual { .. })
    }
}

/// Returns the normalized vector and the standard deviation of `x`.
fn normalize(x: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var.is_nan() || var < LAYER_NORM_MIN_VARIANCE {
        return Err(Error::DegenerateInput(format!(
            "layer normalization input has variance {var:e} below {LAYER_NORM_MIN_VARIANCE:e}"
        )));
    }
    let sigma = var.sqrt();
    Ok((x.iter().map(|v| (v - mean) / sigma).collect(), sigma))
}

/// Strictly increasing set of probed input coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JacobianProbe {
    column_indices: Vec<usize>,
}

impl JacobianProbe {
    pub fn new(column_indices: Vec<usize>, input_dim: usize) -> Result<Self> {
        if column_indices.is_empty() {
            return Err(Error::InvalidInput("probe must select at least one column".into()));
        }
        if column_indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("probe indices must be strictly increasing".into()));
        }
        if let Some(&last) = column_indices.last() {
            if last >= input_dim {
                return Err(Error::InvalidInput(format!("probe index {last} outside input width {input_dim}")));
            }
        }
        Ok(Self { column_indices })
    }

    pub fn all(input_dim: usize) -> Self {
        Self { column_indices: (0..input_dim).collect() }
    }

    /// The first `k` coordinates.
    pub fn leading(k: usize, input_dim: usize) -> Result<Self> {
        Self::new((0..k).collect(), input_dim)
    }

    pub fn indices(&self) -> &[usize] {
        &self.column_indices
    }

    pub fn len(&self) -> usize {
        self.column_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.column_indices.is_empty()
    }

    /// The zero-padding embedding `psi`: an `input_dim x K` selection matrix.
    fn embedding(&self, input_dim: usize) -> Matrix {
        let mut m = Matrix::zeros(input_dim, self.len());
        for (k, &j) in self.column_indices.iter().enumerate() {
            m[(j, k)] = 1.0;
        }
        m
    }
}

/// A network with materialized weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input_dim: usize,
    widths: Vec<usize>,
    layers: Vec<Layer>,
}

impl Network {
    pub fn from_spec(spec: &NetworkSpec) -> Result<Self> {
        let widths = spec.widths()?;
        let layers = spec
            .layers
            .iter()
            .zip(&widths)
            .map(|(l, &w)| Layer::build(l, w, spec.master_seed))
            .collect();
        Ok(Self { input_dim: spec.input_dim, widths, layers })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Number of layers `L`.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Layers outside residual blocks. A residual block `x + body(x)` has a
    /// near-identity Jacobian and does not lengthen the chain of rank-reducing factors.
    pub fn effective_depth(&self) -> usize {
        self.layers.iter().filter(|l| !l.is_residual()).count()
    }

    /// `[input_dim, dim F_1, ..., dim F_L]`.
    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Dimension(format!("input has length {}, expected {}", x.len(), self.input_dim)));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("input contains non-finite values".into()));
        }
        Ok(())
    }

    fn check_depth(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.depth() {
            return Err(Error::InvalidInput(format!("depth {k} outside 1..={}", self.depth())));
        }
        Ok(())
    }

    /// Features `F_1(x), ..., F_L(x)`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_input(x)?;
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(self.depth());
        for layer in &self.layers {
            let h = layer.forward(out.last().map_or(x, Vec::as_slice))?;
            out.push(h);
        }
        Ok(out)
    }

    /// `F_k(x)`; `k = 0` returns `x`.
    pub fn forward_to(&self, x: &[f64], k: usize) -> Result<Vec<f64>> {
        self.check_input(x)?;
        if k > self.depth() {
            return Err(Error::InvalidInput(format!("depth {k} outside 0..={}", self.depth())));
        }
        self.layers[..k].iter().try_fold(x.to_vec(), |h, layer| layer.forward(&h))
    }

    /// Jacobian of `F_k` at `x`, shape `dim F_k x input_dim`.
    pub fn jacobian(&self, x: &[f64], k: usize) -> Result<Matrix> {
        self.probe_jacobian(x, &JacobianProbe::all(self.input_dim), k)
    }

    /// Columns `probe` of the Jacobian of `F_k`, propagated through the
    /// zero-padded sub-input only (cost proportional to the probe size).
    pub fn probe_jacobian(&self, x: &[f64], probe: &JacobianProbe, k: usize) -> Result<Matrix> {
        self.check_depth(k)?;
        let mut all = self.probe_jacobians_to(x, probe, k)?;
        Ok(all.pop().expect("k >= 1"))
    }

    /// Probed Jacobians for every depth `1..=L`.
    pub fn probe_jacobians(&self, x: &[f64], probe: &JacobianProbe) -> Result<Vec<Matrix>> {
        self.probe_jacobians_to(x, probe, self.depth())
    }

    fn probe_jacobians_to(&self, x: &[f64], probe: &JacobianProbe, k: usize) -> Result<Vec<Matrix>> {
        self.check_input(x)?;
        if probe.indices().last().is_some_and(|&j| j >= self.input_dim) {
            return Err(Error::InvalidInput("probe does not fit the network input".into()));
        }
        let mut h = x.to_vec();
        let mut t = probe.embedding(self.input_dim);
        let mut out = Vec::with_capacity(k);
        for layer in &self.layers[..k] {
            t = layer.push_tangents(&h, &t)?;
            h = layer.forward(&h)?;
            out.push(t.clone());
        }
        Ok(out)
    }
}

/// Jacobian of `F_k` at `x`; see [`Network::jacobian`].
pub fn network_jacobian(net: &Network, x: &[f64], k: usize) -> Result<Matrix> {
    net.jacobian(x, k)
}

/// Columns `probe` of the Jacobian of `F_k`; see [`Network::probe_jacobian`].
pub fn padded_probe_jacobian(net: &Network, x: &[f64], probe: &JacobianProbe, k: usize) -> Result<Matrix> {
    net.probe_jacobian(x, probe, k)
}

/// Jacobian of a single layer described by `spec`, evaluated at its input `x`.
pub fn layer_jacobian(spec: &LayerSpec, x: &[f64], master_seed: u64) -> Result<Matrix> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("input contains non-finite values".into()));
    }
    Layer::from_spec(spec, x.len(), master_seed)?.jacobian(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn explicit_net(weights: Vec<Matrix>) -> Network {
        let spec = NetworkSpec {
            input_dim: weights[0].cols(),
            master_seed: 0,
            layers: weights.into_iter().map(LayerSpec::explicit_dense).collect(),
        };
        Network::from_spec(&spec).unwrap()
    }

    #[test]
    fn identity_dense_and_relu() {
        let net = explicit_net(vec![Matrix::identity(3)]);
        assert_eq!(net.evaluate(&[1.0, -2.0, 3.5]).unwrap(), vec![vec![1.0, -2.0, 3.5]]);
        let relu = Layer::Activation(ActivationKind::Relu);
        assert_eq!(relu.forward(&[-1.0, 2.0, 0.0]).unwrap(), vec![0.0, 2.0, 0.0]);
        assert_eq!(relu.jacobian(&[-1.0, 2.0, 3.0]).unwrap(), Matrix::from_diag(&[0.0, 1.0, 1.0]));
        assert_eq!(relu.jacobian(&[0.0]).unwrap(), Matrix::from_diag(&[0.0]));
    }

    #[test]
    fn linear_net_jacobian_is_weight_product() {
        let mut g = GaussianStream::new(1);
        let ws: Vec<Matrix> = vec![g.gaussian_matrix(4, 3, 1.0), g.gaussian_matrix(5, 4, 1.0), g.gaussian_matrix(2, 5, 1.0)];
        let net = explicit_net(ws.clone());
        let expected = ws[2].matmul(&ws[1]).unwrap().matmul(&ws[0]).unwrap();
        let j = net.jacobian(&[0.3, -0.1, 2.0], 3).unwrap();
        assert!(j.max_abs_diff(&expected) < 1e-12);
        assert!(net.jacobian(&[0.0; 3], 0).is_err());
        assert!(net.jacobian(&[0.0; 3], 4).is_err());
    }

    #[test]
    fn layer_norm_rejects_constant_input() {
        let ln = Layer::LayerNorm { affine: None };
        assert!(matches!(ln.forward(&[2.0, 2.0, 2.0]), Err(Error::DegenerateInput(_))));
        assert!(matches!(ln.jacobian(&[2.0, 2.0, 2.0]), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn probe_validation() {
        assert!(JacobianProbe::new(vec![], 4).is_err());
        assert!(JacobianProbe::new(vec![1, 1], 4).is_err());
        assert!(JacobianProbe::new(vec![2, 1], 4).is_err());
        assert!(JacobianProbe::new(vec![0, 4], 4).is_err());
        assert_eq!(JacobianProbe::new(vec![0, 3], 4).unwrap().len(), 2);
    }

    #[test]
    fn dimension_mismatch() {
        let net = explicit_net(vec![Matrix::identity(3)]);
        assert!(matches!(net.evaluate(&[1.0, 2.0]), Err(Error::Dimension(_))));
    }
}
