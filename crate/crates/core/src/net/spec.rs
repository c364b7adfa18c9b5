use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Upper bound on any layer width accepted from a specification.
pub const MAX_WIDTH: usize = 1 << 16;

/// Upper bound on the total number of weight entries materialized for one network.
pub const MAX_PARAMETERS: usize = 1 << 24;

/// Declarative description of a layered network `F = f^L o ... o f^1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub master_seed: u64,
    pub layers: Vec<LayerSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LayerSpec {
    /// `x -> W x + b` with `W` of shape `out_dim x in_dim`.
    Dense {
        out_dim: usize,
        weight_init: WeightInit,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bias: Option<Vec<f64>>,
    },
    /// Element-wise nonlinearity.
    Activation { function: ActivationKind },
    /// Normalization to zero mean and unit (biased) variance, optionally followed
    /// by an element-wise affine map.
    LayerNorm {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        affine: Option<Affine>,
    },
    /// `x -> x + body(x)`; the body must preserve width.
    Residual { body: Vec<LayerSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightInit {
    /// I.i.d. `N(0, std^2)` entries from the stream keyed by `(master_seed, seed)`.
    Gaussian { seed: u64, std: f64 },
    Explicit(Matrix),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    Relu,
    Gelu,
    Silu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Affine {
    pub scale: Vec<f64>,
    pub shift: Vec<f64>,
}

impl LayerSpec {
    /// Dense layer with Gaussian weights; the stream key is the layer index by convention.
    pub fn gaussian_dense(out_dim: usize, seed: u64, std: f64) -> Self {
        LayerSpec::Dense { out_dim, weight_init: WeightInit::Gaussian { seed, std }, bias: None }
    }

    pub fn explicit_dense(weight: Matrix) -> Self {
        LayerSpec::Dense { out_dim: weight.rows(), weight_init: WeightInit::Explicit(weight), bias: None }
    }

    pub fn activation(function: ActivationKind) -> Self {
        LayerSpec::Activation { function }
    }

    pub fn layer_norm() -> Self {
        LayerSpec::LayerNorm { affine: None }
    }

    /// Output width for an input of width `in_dim`, validating the layer's own parameters.
    pub fn output_width(&self, in_dim: usize) -> Result<usize> {
        match self {
            LayerSpec::Dense { out_dim, weight_init, bias } => {
                if *out_dim == 0 || *out_dim > MAX_WIDTH {
                    return Err(Error::Dimension(format!("dense out_dim {out_dim} outside 1..={MAX_WIDTH}")));
                }
                match weight_init {
                    WeightInit::Gaussian { std, .. } => {
                        if !(std.is_finite() && *std >= 0.0) {
                            return Err(Error::InvalidInput(format!("weight std must be finite and >= 0, got {std}")));
                        }
                    }
                    WeightInit::Explicit(w) => {
                        if w.shape() != (*out_dim, in_dim) {
                            return Err(Error::Dimension(format!(
                                "explicit weight is {}x{}, expected {out_dim}x{in_dim}",
                                w.rows(),
                                w.cols()
                            )));
                        }
                    }
                }
                if let Some(b) = bias {
                    check_vector("bias", b, *out_dim)?;
                }
                Ok(*out_dim)
            }
            LayerSpec::Activation { .. } => Ok(in_dim),
            LayerSpec::LayerNorm { affine } => {
                if in_dim < 2 {
                    return Err(Error::Dimension("layer normalization needs width >= 2".into()));
                }
                if let Some(a) = affine {
                    check_vector("scale", &a.scale, in_dim)?;
                    check_vector("shift", &a.shift, in_dim)?;
                }
                Ok(in_dim)
            }
            LayerSpec::Residual { body } => {
                let out = body.iter().try_fold(in_dim, |w, layer| layer.output_width(w))?;
                if out != in_dim {
                    return Err(Error::Dimension(format!("residual body maps width {in_dim} to {out}")));
                }
                Ok(in_dim)
            }
        }
    }

    /// Weight entries this layer materializes for an input of width `in_dim`.
    pub(crate) fn parameter_count(&self, in_dim: usize) -> usize {
        match self {
            LayerSpec::Dense { out_dim, .. } => out_dim.saturating_mul(in_dim),
            LayerSpec::Residual { body } => {
                body.iter().map(|l| l.parameter_count(in_dim)).fold(0usize, usize::saturating_add)
            }
            _ => 0,
        }
    }
}

fn check_vector(name: &str, v: &[f64], len: usize) -> Result<()> {
    if v.len() != len {
        return Err(Error::Dimension(format!("{name} has length {}, expected {len}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} contains non-finite values")));
    }
    Ok(())
}

impl NetworkSpec {
    /// Widths `[input_dim, dim F_1, ..., dim F_L]`, validating every layer.
    pub fn widths(&self) -> Result<Vec<usize>> {
        if self.input_dim == 0 || self.input_dim > MAX_WIDTH {
            return Err(Error::Dimension(format!("input_dim {} outside 1..={MAX_WIDTH}", self.input_dim)));
        }
        let mut widths = Vec::with_capacity(self.layers.len() + 1);
        widths.push(self.input_dim);
        let mut params = 0usize;
        for (k, layer) in self.layers.iter().enumerate() {
            let w = *widths.last().expect("non-empty");
            params = params.saturating_add(layer.parameter_count(w));
            if params > MAX_PARAMETERS {
                return Err(Error::InvalidInput(format!("network exceeds {MAX_PARAMETERS} weight entries")));
            }
            let out = layer
                .output_width(w)
                .map_err(|e| Error::Dimension(format!("layer {}: {e}", k + 1)))?;
            widths.push(out);
        }
        Ok(widths)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: NetworkSpec = serde_json::from_str(text)?;
        spec.widths()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// A chain of `depth` square Gaussian dense layers; layer `k` uses stream key `k`.
    pub fn gaussian_linear_chain(width: usize, depth: usize, std: f64, master_seed: u64) -> Self {
        NetworkSpec {
            input_dim: width,
            master_seed,
            layers: (0..depth).map(|k| LayerSpec::gaussian_dense(width, k as u64, std)).collect(),
        }
    }

    /// `depth` blocks of (Gaussian dense, activation) at constant width.
    pub fn gaussian_mlp(width: usize, depth: usize, activation: ActivationKind, master_seed: u64) -> Self {
        let std = 1.0 / (width as f64).sqrt();
        let mut layers = Vec::with_capacity(2 * depth);
        for k in 0..depth {
            layers.push(LayerSpec::gaussian_dense(width, k as u64, std));
            layers.push(LayerSpec::activation(activation));
        }
        NetworkSpec { input_dim: width, master_seed, layers }
    }
}
