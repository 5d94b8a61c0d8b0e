use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::EmbedderConfig;
use crate::dsp::GreySpectrogram;
use crate::error::{Error, Result};

/// Unit-length embedding vector.
pub type Embedding = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerShape {
    /// 3×3 kernel, stride 2, zero padding 1, followed by ReLU.
    Conv {
        in_c: usize,
        out_c: usize,
        in_h: usize,
        in_w: usize,
        out_h: usize,
        out_w: usize,
    },
    Dense {
        input: usize,
        output: usize,
        relu: bool,
    },
}

impl LayerShape {
    pub fn weight_len(&self) -> usize {
        match *self {
            LayerShape::Conv { in_c, out_c, .. } => out_c * in_c * 9,
            LayerShape::Dense { input, output, .. } => output * input,
        }
    }

    pub fn bias_len(&self) -> usize {
        match *self {
            LayerShape::Conv { out_c, .. } => out_c,
            LayerShape::Dense { output, .. } => output,
        }
    }

    pub fn output_len(&self) -> usize {
        match *self {
            LayerShape::Conv {
                out_c,
                out_h,
                out_w,
                ..
            } => out_c * out_h * out_w,
            LayerShape::Dense { output, .. } => output,
        }
    }

    fn fan_in(&self) -> usize {
        match *self {
            LayerShape::Conv { in_c, .. } => in_c * 9,
            LayerShape::Dense { input, .. } => input,
        }
    }
}

fn conv_out(n: usize) -> usize {
    n.div_ceil(2)
}

/// Layer shapes implied by a configuration.
pub(crate) fn architecture(config: &EmbedderConfig) -> Result<Vec<LayerShape>> {
    config.validate()?;
    let (mut h, mut w) = config.input_shape;
    let mut c = 1;
    let mut layers = Vec::with_capacity(config.conv_blocks + config.dense_layers);
    for block in 0..config.conv_blocks {
        let out_c = config.base_channels << block;
        let (out_h, out_w) = (conv_out(h), conv_out(w));
        layers.push(LayerShape::Conv {
            in_c: c,
            out_c,
            in_h: h,
            in_w: w,
            out_h,
            out_w,
        });
        c = out_c;
        h = out_h;
        w = out_w;
    }
    let mut width = c * h * w;
    for i in 0..config.dense_layers {
        let last = i + 1 == config.dense_layers;
        let output = if last {
            config.embedding_dim
        } else {
            config.hidden_width
        };
        layers.push(LayerShape::Dense {
            input: width,
            output,
            relu: !last,
        });
        width = output;
    }
    Ok(layers)
}

/// Flattened network input: pixels scaled to [0, 1].
pub fn network_input(img: &GreySpectrogram) -> Vec<f64> {
    img.pixels.iter().map(|&p| p as f64 / 255.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedderNetwork {
    config: EmbedderConfig,
    layers: Vec<LayerShape>,
    /// `[w0, b0, w1, b1, ...]` in layer order.
    params: Vec<Vec<f64>>,
}

/// Everything the backward pass needs from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// `activations[0]` is the input; `activations[i + 1]` the output of
    /// layer `i` (after ReLU where applicable).
    activations: Vec<Vec<f64>>,
    norm: f64,
    pub embedding: Embedding,
}

impl EmbedderNetwork {
    /// Scaled-uniform initialisation: weights `U(-√(6/fan_in), √(6/fan_in))`,
    /// zero biases, drawn from the config seed.
    pub fn new(config: EmbedderConfig) -> Result<Self> {
        let layers = architecture(&config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut params = Vec::with_capacity(layers.len() * 2);
        for layer in &layers {
            let limit = (6.0 / layer.fan_in() as f64).sqrt();
            params.push(
                (0..layer.weight_len())
                    .map(|_| rng.gen_range(-limit..limit))
                    .collect(),
            );
            params.push(vec![0.0; layer.bias_len()]);
        }
        Ok(Self {
            config,
            layers,
            params,
        })
    }

    pub(crate) fn from_parts(config: EmbedderConfig, params: Vec<Vec<f64>>) -> Result<Self> {
        let layers = architecture(&config)?;
        if params.len() != layers.len() * 2 {
            return Err(Error::Checkpoint(format!(
                "expected {} tensors, found {}",
                layers.len() * 2,
                params.len()
            )));
        }
        for (i, layer) in layers.iter().enumerate() {
            if params[2 * i].len() != layer.weight_len()
                || params[2 * i + 1].len() != layer.bias_len()
            {
                return Err(Error::Checkpoint(format!(
                    "tensor sizes of layer {i} do not match"
                )));
            }
        }
        Ok(Self {
            config,
            layers,
            params,
        })
    }

    pub fn config(&self) -> &EmbedderConfig {
        &self.config
    }

    pub fn layers(&self) -> &[LayerShape] {
        &self.layers
    }

    pub fn params(&self) -> &[Vec<f64>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.params
    }

    pub fn input_len(&self) -> usize {
        self.config.input_shape.0 * self.config.input_shape.1
    }

    pub fn parameter_count(&self) -> usize {
        self.params.iter().map(Vec::len).sum()
    }

    /// A zeroed gradient buffer shaped like the parameters.
    pub fn zero_grads(&self) -> Vec<Vec<f64>> {
        self.params.iter().map(|p| vec![0.0; p.len()]).collect()
    }

    /// Embeds one spectrogram; its dimensions must equal the configured
    /// input shape.
    pub fn forward_embed(&self, img: &GreySpectrogram) -> Result<Embedding> {
        let (rows, cols) = self.config.input_shape;
        if img.rows != rows || img.cols != cols {
            return Err(Error::ShapeMismatch(format!(
                "network expects {rows}x{cols}, got {}x{}",
                img.rows, img.cols
            )));
        }
        Ok(self.forward(&network_input(img))?.embedding)
    }

    pub fn forward(&self, input: &[f64]) -> Result<ForwardTrace> {
        if input.len() != self.input_len() {
            return Err(Error::ShapeMismatch(format!(
                "input of {} values, network expects {}",
                input.len(),
                self.input_len()
            )));
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.to_vec());
        for (i, layer) in self.layers.iter().enumerate() {
            let x = activations.last().expect("input pushed");
            let (w, b) = (&self.params[2 * i], &self.params[2 * i + 1]);
            let y = match *layer {
                LayerShape::Conv { .. } => {
                    let mut y = conv_forward(layer, x, w, b);
                    y.iter_mut().for_each(|v| *v = v.max(0.0));
                    y
                }
                LayerShape::Dense {
                    input,
                    output,
                    relu,
                } => {
                    let mut y = b.clone();
                    for (j, out) in y.iter_mut().enumerate().take(output) {
                        let row = &w[j * input..(j + 1) * input];
                        *out += row.iter().zip(x).map(|(a, c)| a * c).sum::<f64>();
                    }
                    if relu {
                        y.iter_mut().for_each(|v| *v = v.max(0.0));
                    }
                    y
                }
            };
            activations.push(y);
        }
        let z = activations.last().expect("at least one layer");
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let embedding = if norm > 0.0 {
            z.iter().map(|v| v / norm).collect()
        } else {
            // degenerate all-zero output: pick a fixed unit vector
            let mut e = vec![0.0; z.len()];
            e[0] = 1.0;
            e
        };
        Ok(ForwardTrace {
            activations,
            norm,
            embedding,
        })
    }

    /// Accumulates into `grads` the parameter gradient given the loss
    /// gradient with respect to the normalized embedding.
    pub fn backward(
        &self,
        trace: &ForwardTrace,
        grad_embedding: &[f64],
        grads: &mut [Vec<f64>],
    ) -> Result<()> {
        if grad_embedding.len() != trace.embedding.len() {
            return Err(Error::ShapeMismatch("embedding gradient length".into()));
        }
        if trace.norm == 0.0 {
            return Ok(());
        }
        let e = &trace.embedding;
        let dot: f64 = e.iter().zip(grad_embedding).map(|(a, g)| a * g).sum();
        let mut grad: Vec<f64> = grad_embedding
            .iter()
            .zip(e)
            .map(|(g, ei)| (g - ei * dot) / trace.norm)
            .collect();

        for i in (0..self.layers.len()).rev() {
            let layer = self.layers[i];
            let x = &trace.activations[i];
            let y = &trace.activations[i + 1];
            let relu = match layer {
                LayerShape::Conv { .. } => true,
                LayerShape::Dense { relu, .. } => relu,
            };
            if relu {
                grad.iter_mut().zip(y).for_each(|(g, &v)| {
                    if v <= 0.0 {
                        *g = 0.0
                    }
                });
            }
            let need_input = i > 0;
            let (gw, rest) = grads[2 * i..].split_at_mut(1);
            let (gw, gb) = (&mut gw[0], &mut rest[0]);
            grad = match layer {
                LayerShape::Conv { .. } => {
                    conv_backward(&layer, x, &self.params[2 * i], &grad, gw, gb, need_input)
                }
                LayerShape::Dense { input, output, .. } => {
                    let w = &self.params[2 * i];
                    let mut gx = vec![0.0; if need_input { input } else { 0 }];
                    for j in 0..output {
                        let g = grad[j];
                        if g == 0.0 {
                            continue;
                        }
                        gb[j] += g;
                        let gw_row = &mut gw[j * input..(j + 1) * input];
                        gw_row.iter_mut().zip(x).for_each(|(a, &xv)| *a += g * xv);
                        if need_input {
                            let row = &w[j * input..(j + 1) * input];
                            gx.iter_mut().zip(row).for_each(|(a, &wv)| *a += g * wv);
                        }
                    }
                    gx
                }
            };
        }
        Ok(())
    }
}

/// Valid output-column range for kernel column `kx`: input column
/// `2·ox + kx − 1` must lie in `0..in_w`.
#[inline]
fn col_range(kx: usize, in_w: usize, out_w: usize) -> (usize, usize) {
    let lo = usize::from(kx == 0);
    let hi = if in_w >= kx { (in_w - kx) / 2 + 1 } else { 0 }.min(out_w);
    (lo, hi.max(lo))
}

fn conv_forward(layer: &LayerShape, x: &[f64], w: &[f64], b: &[f64]) -> Vec<f64> {
    let LayerShape::Conv {
        in_c,
        out_c,
        in_h,
        in_w,
        out_h,
        out_w,
    } = *layer
    else {
        unreachable!("conv_forward on a dense layer")
    };
    let plane = out_h * out_w;
    let mut y = vec![0.0; out_c * plane];
    for oc in 0..out_c {
        let out = &mut y[oc * plane..(oc + 1) * plane];
        out.fill(b[oc]);
        for ic in 0..in_c {
            let inp = &x[ic * in_h * in_w..(ic + 1) * in_h * in_w];
            for ky in 0..3 {
                for kx in 0..3 {
                    let wv = w[((oc * in_c + ic) * 3 + ky) * 3 + kx];
                    let (lo, hi) = col_range(kx, in_w, out_w);
                    for oy in 0..out_h {
                        let iy = 2 * oy + ky;
                        if iy == 0 || iy > in_h {
                            continue;
                        }
                        let row = &inp[(iy - 1) * in_w..iy * in_w];
                        let orow = &mut out[oy * out_w..(oy + 1) * out_w];
                        for ox in lo..hi {
                            orow[ox] += wv * row[2 * ox + kx - 1];
                        }
                    }
                }
            }
        }
    }
    y
}

fn conv_backward(
    layer: &LayerShape,
    x: &[f64],
    w: &[f64],
    grad_out: &[f64],
    gw: &mut [f64],
    gb: &mut [f64],
    need_input: bool,
) -> Vec<f64> {
    let LayerShape::Conv {
        in_c,
        out_c,
        in_h,
        in_w,
        out_h,
        out_w,
    } = *layer
    else {
        unreachable!("conv_backward on a dense layer")
    };
    let plane = out_h * out_w;
    let mut gx = vec![0.0; if need_input { in_c * in_h * in_w } else { 0 }];
    for oc in 0..out_c {
        let go = &grad_out[oc * plane..(oc + 1) * plane];
        if go.iter().all(|&g| g == 0.0) {
            continue;
        }
        gb[oc] += go.iter().sum::<f64>();
        for ic in 0..in_c {
            let base = ic * in_h * in_w;
            let inp = &x[base..base + in_h * in_w];
            for ky in 0..3 {
                for kx in 0..3 {
                    let widx = ((oc * in_c + ic) * 3 + ky) * 3 + kx;
                    let wv = w[widx];
                    let (lo, hi) = col_range(kx, in_w, out_w);
                    let mut acc = 0.0;
                    for oy in 0..out_h {
                        let iy = 2 * oy + ky;
                        if iy == 0 || iy > in_h {
                            continue;
                        }
                        let row_off = (iy - 1) * in_w;
                        let grow = &go[oy * out_w..(oy + 1) * out_w];
                        let row = &inp[row_off..row_off + in_w];
                        for ox in lo..hi {
                            acc += grow[ox] * row[2 * ox + kx - 1];
                        }
                        if need_input {
                            let gxrow = &mut gx[base + row_off..base + row_off + in_w];
                            for ox in lo..hi {
                                gxrow[2 * ox + kx - 1] += wv * grow[ox];
                            }
                        }
                    }
                    gw[widx] += acc;
                }
            }
        }
    }
    gx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> EmbedderConfig {
        EmbedderConfig {
            conv_blocks: 2,
            dense_layers: 2,
            hidden_width: 6,
            embedding_dim: 4,
            input_shape: (8, 8),
            seed,
            ..Default::default()
        }
    }

    /// Straight-line forward pass written against padded input planes.
    fn oracle_forward(net: &EmbedderNetwork, input: &[f64]) -> Vec<f64> {
        let mut x = input.to_vec();
        for (i, layer) in net.layers().iter().enumerate() {
            let w = &net.params()[2 * i];
            let b = &net.params()[2 * i + 1];
            x = match *layer {
                LayerShape::Conv {
                    in_c,
                    out_c,
                    in_h,
                    in_w,
                    out_h,
                    out_w,
                } => {
                    let ph = in_h + 2;
                    let pw = in_w + 2;
                    let mut padded = vec![0.0; in_c * ph * pw];
                    for c in 0..in_c {
                        for r in 0..in_h {
                            for q in 0..in_w {
                                padded[c * ph * pw + (r + 1) * pw + q + 1] =
                                    x[c * in_h * in_w + r * in_w + q];
                            }
                        }
                    }
                    let mut y = Vec::new();
                    for oc in 0..out_c {
                        for oy in 0..out_h {
                            for ox in 0..out_w {
                                let mut s = b[oc];
                                for ic in 0..in_c {
                                    for ky in 0..3 {
                                        for kx in 0..3 {
                                            s += w[oc * in_c * 9 + ic * 9 + ky * 3 + kx]
                                                * padded[ic * ph * pw
                                                    + (2 * oy + ky) * pw
                                                    + 2 * ox
                                                    + kx];
                                        }
                                    }
                                }
                                y.push(if s > 0.0 { s } else { 0.0 });
                            }
                        }
                    }
                    y
                }
                LayerShape::Dense {
                    input,
                    output,
                    relu,
                } => (0..output)
                    .map(|j| {
                        let mut s = b[j];
                        for k in 0..input {
                            s += w[j * input + k] * x[k];
                        }
                        if relu && s < 0.0 {
                            0.0
                        } else {
                            s
                        }
                    })
                    .collect(),
            };
        }
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter().map(|v| v / n).collect()
    }

    #[test]
    fn same_seed_same_params() {
        let a = EmbedderNetwork::new(small(3)).unwrap();
        let b = EmbedderNetwork::new(small(3)).unwrap();
        assert_eq!(a.params(), b.params());
        let c = EmbedderNetwork::new(small(4)).unwrap();
        assert_ne!(a.params(), c.params());
    }

    #[test]
    fn reference_architecture_accepted() {
        let cfg = EmbedderConfig {
            input_shape: (128, 128),
            ..EmbedderConfig::reference()
        };
        let layers = architecture(&cfg).unwrap();
        assert_eq!(layers.len(), 9);
        assert!(matches!(
            layers[6],
            LayerShape::Conv {
                out_c: 512,
                out_h: 1,
                out_w: 1,
                ..
            }
        ));
        assert!(matches!(
            layers[8],
            LayerShape::Dense {
                output: 56,
                relu: false,
                ..
            }
        ));
    }

    #[test]
    fn spatial_collapse_detected() {
        let cfg = EmbedderConfig {
            conv_blocks: 8,
            input_shape: (64, 64),
            ..Default::default()
        };
        assert!(matches!(
            EmbedderNetwork::new(cfg),
            Err(Error::SpatialCollapse { blocks: 8, .. })
        ));
    }

    #[test]
    fn output_is_unit_and_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for seed in 0..10 {
            let net = EmbedderNetwork::new(small(seed)).unwrap();
            let input: Vec<f64> = (0..64).map(|_| rng.gen::<f64>()).collect();
            let e = net.forward(&input).unwrap().embedding;
            let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9);
            let oracle = oracle_forward(&net, &input);
            for (a, b) in e.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-10);
            }
            assert_eq!(e, net.forward(&input).unwrap().embedding);
        }
    }

    #[test]
    fn odd_sizes_match_oracle() {
        let cfg = EmbedderConfig {
            conv_blocks: 3,
            dense_layers: 1,
            embedding_dim: 3,
            input_shape: (13, 9),
            seed: 5,
            ..Default::default()
        };
        let net = EmbedderNetwork::new(cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let input: Vec<f64> = (0..117).map(|_| rng.gen::<f64>()).collect();
        let e = net.forward(&input).unwrap().embedding;
        let oracle = oracle_forward(&net, &input);
        for (a, b) in e.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let net = EmbedderNetwork::new(small(0)).unwrap();
        let img = GreySpectrogram::new(4, 4, vec![0; 16]).unwrap();
        assert!(matches!(
            net.forward_embed(&img),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(net.forward(&[0.0; 10]).is_err());
    }
}
