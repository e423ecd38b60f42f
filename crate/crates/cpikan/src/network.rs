//! cKAN and MLP architectures, parameter layouts, and forward passes.
//!
//! Forward passes are generic over [`Scalar`], so the same code serves plain
//! evaluation, jet-based input differentiation, and tape-recorded runs for
//! parameter gradients.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::cheb::cheb_jets;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::Scalar;

/// Chebyshev KAN: every edge carries `degree + 1` trainable coefficients,
/// inputs are tanh-normalized before each layer, no biases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CkanArchitecture {
    pub layer_widths: Vec<usize>,
    pub degree: usize,
}

/// Fully connected tanh MLP with biases on every layer, including the output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpArchitecture {
    pub layer_widths: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Architecture {
    Ckan(CkanArchitecture),
    Mlp(MlpArchitecture),
}

fn widths(input_dim: usize, hidden_layers: usize, neurons: usize, output_dim: usize) -> Vec<usize> {
    let mut w = Vec::with_capacity(hidden_layers + 2);
    w.push(input_dim);
    w.extend(std::iter::repeat_n(neurons, hidden_layers));
    w.push(output_dim);
    w
}

impl CkanArchitecture {
    /// Build from the `(N_l, N_n, k)` notation: `hidden_layers` hidden layers of
    /// `neurons` neurons each.
    pub fn new(input_dim: usize, hidden_layers: usize, neurons: usize, degree: usize) -> Self {
        assert!(degree >= 1);
        CkanArchitecture {
            layer_widths: widths(input_dim, hidden_layers, neurons, 1),
            degree,
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_widths
            .windows(2)
            .map(|w| w[0] * w[1])
            .sum::<usize>()
            * (self.degree + 1)
    }

    /// Flat offset of coefficient `degree` on the edge `input -> output` of `layer`.
    pub fn index(&self, layer: usize, input: usize, output: usize, degree: usize) -> usize {
        let k1 = self.degree + 1;
        let layer_offset: usize = self.layer_widths[..=layer]
            .windows(2)
            .map(|w| w[0] * w[1] * k1)
            .sum();
        let n_in = self.layer_widths[layer];
        layer_offset + (output * n_in + input) * k1 + degree
    }
}

impl MlpArchitecture {
    pub fn new(input_dim: usize, hidden_layers: usize, neurons: usize) -> Self {
        MlpArchitecture {
            layer_widths: widths(input_dim, hidden_layers, neurons, 1),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_widths
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    fn layer_offset(&self, layer: usize) -> usize {
        self.layer_widths[..=layer]
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    pub fn weight_index(&self, layer: usize, output: usize, input: usize) -> usize {
        self.layer_offset(layer) + output * self.layer_widths[layer] + input
    }

    pub fn bias_index(&self, layer: usize, output: usize) -> usize {
        let n_in = self.layer_widths[layer];
        self.layer_offset(layer) + self.layer_widths[layer + 1] * n_in + output
    }
}

impl Architecture {
    pub fn layer_widths(&self) -> &[usize] {
        match self {
            Architecture::Ckan(a) => &a.layer_widths,
            Architecture::Mlp(a) => &a.layer_widths,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layer_widths()[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_widths().last().unwrap()
    }

    pub fn parameter_count(&self) -> usize {
        match self {
            Architecture::Ckan(a) => a.parameter_count(),
            Architecture::Mlp(a) => a.parameter_count(),
        }
    }

    /// Forward pass over jets. `params` is the flat parameter vector lifted to
    /// the scalar type `T`; `input` must hold one jet per input coordinate.
    pub fn forward_jets<T: Scalar>(&self, params: &[T], input: &[Jet<T>]) -> Result<Vec<Jet<T>>> {
        if input.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        if params.len() != self.parameter_count() {
            return Err(Error::DimensionMismatch {
                expected: self.parameter_count(),
                got: params.len(),
            });
        }
        match self {
            Architecture::Ckan(a) => Ok(ckan_forward(a, params, input)),
            Architecture::Mlp(a) => Ok(mlp_forward(a, params, input)),
        }
    }

    /// Plain value forward pass.
    pub fn forward(&self, params: &NetworkParams, input: &[f64]) -> Result<Vec<f64>> {
        let jets: Vec<Jet<f64>> = input.iter().map(|&x| Jet::constant(x, 0)).collect();
        let out = self.forward_jets(&params.flat, &jets)?;
        Ok(out.into_iter().map(|j| j.v).collect())
    }
}

fn ckan_forward<T: Scalar>(arch: &CkanArchitecture, params: &[T], input: &[Jet<T>]) -> Vec<Jet<T>> {
    let k1 = arch.degree + 1;
    let mut cur: Vec<Jet<T>> = input.to_vec();
    let mut offset = 0usize;
    for lw in arch.layer_widths.windows(2) {
        let (n_in, n_out) = (lw[0], lw[1]);
        // tanh normalization before every layer, including the raw input.
        let pre: Vec<Jet<T>> = cur.iter().map(|j| j.tanh()).collect();
        let chebs: Vec<Vec<Jet<T>>> = pre.iter().map(|j| cheb_jets(j, arch.degree)).collect();
        let mut next = Vec::with_capacity(n_out);
        for j in 0..n_out {
            let mut coeffs = Vec::with_capacity(n_in * arch.degree);
            let mut vals: Vec<&Jet<T>> = Vec::with_capacity(n_in * arch.degree);
            let mut c0 = Vec::with_capacity(n_in);
            for (i, cheb) in chebs.iter().enumerate() {
                let edge = offset + (j * n_in + i) * k1;
                c0.push(params[edge]);
                for d in 1..=arch.degree {
                    coeffs.push(params[edge + d]);
                    vals.push(&cheb[d - 1]);
                }
            }
            // T_0 == 1 contributes the summed degree-0 coefficients.
            next.push(Jet::dot(&coeffs, &vals).add_value(T::sum(&c0)));
        }
        offset += n_in * n_out * k1;
        cur = next;
    }
    cur
}

fn mlp_forward<T: Scalar>(arch: &MlpArchitecture, params: &[T], input: &[Jet<T>]) -> Vec<Jet<T>> {
    let n_layers = arch.layer_widths.len() - 1;
    let mut cur: Vec<Jet<T>> = input.to_vec();
    let mut offset = 0usize;
    for (l, lw) in arch.layer_widths.windows(2).enumerate() {
        let (n_in, n_out) = (lw[0], lw[1]);
        let bias_base = offset + n_out * n_in;
        let mut next = Vec::with_capacity(n_out);
        let refs: Vec<&Jet<T>> = cur.iter().collect();
        for j in 0..n_out {
            let row = &params[offset + j * n_in..offset + (j + 1) * n_in];
            let mut y = Jet::dot(row, &refs).add_value(params[bias_base + j]);
            if l < n_layers - 1 {
                y = y.tanh();
            }
            next.push(y);
        }
        offset = bias_base + n_out;
        cur = next;
    }
    cur
}

/// Flat, ordered collection of all trainable scalars of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub flat: Vec<f64>,
}

impl NetworkParams {
    pub fn zeros(arch: &Architecture) -> Self {
        NetworkParams {
            flat: vec![0.0; arch.parameter_count()],
        }
    }

    pub fn from_flat(arch: &Architecture, flat: Vec<f64>) -> Result<Self> {
        if flat.len() != arch.parameter_count() {
            return Err(Error::DimensionMismatch {
                expected: arch.parameter_count(),
                got: flat.len(),
            });
        }
        if let Some(bad) = flat.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("parameter value {bad}"),
            });
        }
        Ok(NetworkParams { flat })
    }
}

/// Deterministic parameter initialization.
///
/// cKAN coefficients: i.i.d. normal, mean 0, standard deviation
/// `1 / (n_in * (degree + 1))` per layer. MLP: Glorot-uniform weights, zero biases.
pub fn init_params(arch: &Architecture, seed: u64) -> NetworkParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flat = vec![0.0; arch.parameter_count()];
    match arch {
        Architecture::Ckan(a) => {
            let k1 = a.degree + 1;
            let mut off = 0;
            for lw in a.layer_widths.windows(2) {
                let (n_in, n_out) = (lw[0], lw[1]);
                let std = 1.0 / (n_in * k1) as f64;
                let dist = Normal::new(0.0, std).unwrap();
                for p in flat[off..off + n_in * n_out * k1].iter_mut() {
                    *p = dist.sample(&mut rng);
                }
                off += n_in * n_out * k1;
            }
        }
        Architecture::Mlp(a) => {
            let mut off = 0;
            for lw in a.layer_widths.windows(2) {
                let (n_in, n_out) = (lw[0], lw[1]);
                let limit = (6.0 / (n_in + n_out) as f64).sqrt();
                let dist = Uniform::new_inclusive(-limit, limit).unwrap();
                for p in flat[off..off + n_out * n_in].iter_mut() {
                    *p = dist.sample(&mut rng);
                }
                off += n_out * n_in + n_out; // biases stay zero
            }
        }
    }
    NetworkParams { flat }
}
