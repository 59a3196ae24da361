use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::encode::InputVector;
use super::network::{CNet, Gradients};
use crate::level::TileType;
use crate::scalar::Scalar;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Floor of the relative-error denominator, keeps near-zero gradients from
/// turning roundoff into large relative errors.
pub const RELATIVE_GUARD: f64 = 1e-4;

const SAMPLES_PER_LAYER: usize = 300;

/// Largest relative error between backprop gradients and central finite
/// differences over a fixed sample of parameters.
pub fn gradient_check<T: Scalar>(net: &CNet<T>, x: &InputVector<T>, label: TileType) -> f64 {
    gradient_check_with(net, x, label, |n, x, l| n.gradients(x, l))
}

/// Same as [`gradient_check`] with a caller-supplied analytic gradient.
pub fn gradient_check_with<T, F>(net: &CNet<T>, x: &InputVector<T>, label: TileType, analytic: F) -> f64
where
    T: Scalar,
    F: Fn(&CNet<T>, &InputVector<T>, TileType) -> Gradients<T>,
{
    let grads = analytic(net, x, label);
    let step = T::from_f64_lossy(FD_STEP);
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for i in sampled_params(net, x) {
        let original = probe.param(i);
        *probe.param_mut(i) = original + step;
        let plus = probe.loss(x, label).to_f64_lossy();
        *probe.param_mut(i) = original - step;
        let minus = probe.loss(x, label).to_f64_lossy();
        *probe.param_mut(i) = original;

        let numeric = (plus - minus) / (2.0 * FD_STEP);
        let exact = grads.get(i).to_f64_lossy();
        let denom = exact.abs().max(numeric.abs()).max(RELATIVE_GUARD);
        worst = worst.max((exact - numeric).abs() / denom);
    }
    worst
}

/// All biases, every weight of the output layer, the first-layer weights fed
/// by non-zero inputs, plus a seeded random sample of each weight matrix.
fn sampled_params<T: Scalar>(net: &CNet<T>, x: &InputVector<T>) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6772_6164);
    let mut out = Vec::new();
    let mut offset = 0;
    for (l, layer) in net.layers().iter().enumerate() {
        let n_w = layer.weights().len();
        if l == 0 {
            let active: Vec<usize> = x
                .as_slice()
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(j, _)| j)
                .collect();
            for o in 0..layer.outputs() {
                out.extend(active.iter().map(|j| offset + o * layer.inputs() + j));
            }
        }
        if l == 2 {
            out.extend(offset..offset + n_w);
        } else {
            let k = SAMPLES_PER_LAYER.min(n_w);
            out.extend(sample(&mut rng, n_w, k).into_iter().map(|i| offset + i));
        }
        out.extend(offset + n_w..offset + n_w + layer.biases().len());
        offset += n_w + layer.biases().len();
    }
    out.sort_unstable();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnet::encode::encode_input;
    use crate::cnet::network::CNetConfig;
    use crate::level::SurroundingInfo;

    fn input() -> InputVector<f64> {
        let s = SurroundingInfo {
            center_height: 11,
            neighbors: [2, 2, 5, 0, 7, 0, 8, 9].map(|c| TileType::concrete(c).unwrap()),
        };
        encode_input(&s, 14)
    }

    #[test]
    fn backprop_matches_finite_differences() {
        for seed in 0..3 {
            let net = CNet::<f64>::new(CNetConfig {
                seed,
                ..Default::default()
            });
            let err = gradient_check(&net, &input(), TileType::PIPE_TOP_LEFT);
            assert!(err <= 1e-4, "seed {seed}: {err}");
        }
    }

    #[test]
    fn zero_net_has_no_blowup() {
        let net = CNet::<f64>::zeros(CNetConfig::default());
        let err = gradient_check(&net, &input(), TileType::GROUND);
        assert!(err <= 1e-4, "{err}");
    }

    #[test]
    fn corrupted_layer_two_is_caught() {
        let net = CNet::<f64>::new(CNetConfig {
            seed: 5,
            ..Default::default()
        });
        let err = gradient_check_with(&net, &input(), TileType::EMPTY, |n, x, l| {
            let mut g = n.gradients(x, l);
            for w in g.layers[1].weights.iter_mut() {
                *w *= 1.5;
            }
            g
        });
        assert!(err >= 1e-2, "{err}");
    }
}
