use crate::error::{Error, Result};
use crate::net::{Network, NetworkSpec, LayerSpec};

/// A contiguous skip connection adding feature `F_from` to feature `F_to`
/// (`from = 0` denotes the network input).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SkipConnection {
    pub from: usize,
    pub to: usize,
}

/// A plain chain plus one skip connection, evaluated literally.
#[derive(Debug, Clone, PartialEq)]
pub struct SkipNetwork {
    pub network: NetworkSpec,
    pub skip: SkipConnection,
}

impl SkipNetwork {
    fn validate(&self) -> Result<Vec<usize>> {
        let widths = self.network.widths()?;
        let SkipConnection { from, to } = self.skip;
        if from >= to || to > self.network.layers.len() {
            return Err(Error::InvalidInput(format!(
                "skip {from} -> {to} must satisfy from < to <= {}",
                self.network.layers.len()
            )));
        }
        if widths[from] != widths[to] {
            return Err(Error::Dimension(format!(
                "skip joins width {} (F_{from}) to width {} (F_{to})",
                widths[from], widths[to]
            )));
        }
        Ok(widths)
    }

    /// Features `F_1(x), ..., F_L(x)` with `F_from(x)` added to the output of layer `to`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        let net = Network::from_spec(&self.network)?;
        let mut features = Vec::with_capacity(net.depth());
        let mut h = x.to_vec();
        if h.len() != net.input_dim() {
            return Err(Error::Dimension(format!("input has length {}, expected {}", h.len(), net.input_dim())));
        }
        let mut saved = (self.skip.from == 0).then(|| h.clone());
        for (k, layer) in net.layers().iter().enumerate() {
            h = layer.forward(&h)?;
            let depth = k + 1;
            if depth == self.skip.to {
                let s = saved.take().expect("skip source precedes target");
                h.iter_mut().zip(s).for_each(|(a, b)| *a += b);
            }
            if depth == self.skip.from {
                saved = Some(h.clone());
            }
            features.push(h.clone());
        }
        Ok(features)
    }
}

/// Rewrites the skip as a residual block whose body is the skipped span, so the
/// returned network evaluates identically while its effective depth drops by `to - from`.
pub fn flatten_skip(net: &SkipNetwork) -> Result<NetworkSpec> {
    net.validate()?;
    let SkipConnection { from, to } = net.skip;
    let layers = &net.network.layers;
    let mut out = Vec::with_capacity(layers.len() - (to - from) + 1);
    out.extend_from_slice(&layers[..from]);
    out.push(LayerSpec::Residual { body: layers[from..to].to_vec() });
    out.extend_from_slice(&layers[to..]);
    Ok(NetworkSpec { input_dim: net.network.input_dim, master_seed: net.network.master_seed, layers: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::net::ActivationKind;

    #[test]
    fn skip_over_zero_layer_is_identity() {
        let spec = NetworkSpec { input_dim: 3, master_seed: 0, layers: vec![LayerSpec::explicit_dense(Matrix::zeros(3, 3))] };
        let skip = SkipNetwork { network: spec, skip: SkipConnection { from: 0, to: 1 } };
        let flat = Network::from_spec(&flatten_skip(&skip).unwrap()).unwrap();
        let x = [0.5, -1.0, 2.0];
        assert_eq!(flat.evaluate(&x).unwrap(), vec![x.to_vec()]);
        assert_eq!(flat.jacobian(&x, 1).unwrap(), Matrix::identity(3));
        assert_eq!(flat.effective_depth(), 0);
    }

    #[test]
    fn rejects_bad_spans() {
        let spec = NetworkSpec {
            input_dim: 3,
            master_seed: 0,
            layers: vec![LayerSpec::gaussian_dense(2, 0, 1.0), LayerSpec::activation(ActivationKind::Relu)],
        };
        for (from, to) in [(0, 1), (0, 2), (1, 1), (2, 1), (0, 3)] {
            let skip = SkipNetwork { network: spec.clone(), skip: SkipConnection { from, to } };
            assert!(flatten_skip(&skip).is_err(), "{from}->{to}");
        }
        let ok = SkipNetwork { network: spec, skip: SkipConnection { from: 1, to: 2 } };
        assert!(flatten_skip(&ok).is_ok());
    }
}
