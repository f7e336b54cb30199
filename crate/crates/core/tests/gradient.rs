use archpred_core::mlp::MlpParams;
use archpred_core::rng::seeded;
use proptest::prelude::*;
use rand::Rng;

const H: f64 = 1e-6;

fn close(analytic: f64, numeric: f64) -> bool {
    let diff = (analytic - numeric).abs();
    diff <= 1e-7 || diff <= 1e-4 * analytic.abs().max(numeric.abs())
}

/// Smallest |pre-activation| over hidden units, from an independent forward pass.
fn kink_margin(net: &MlpParams, x: &[f64]) -> f64 {
    let mut h = x.to_vec();
    let mut margin = f64::INFINITY;
    let last = net.depth() - 1;
    for (li, layer) in net.layers().iter().enumerate() {
        let w = &layer.weight;
        let z: Vec<f64> = (0..w.rows())
            .map(|r| w.row(r).iter().zip(&h).map(|(a, b)| a * b).sum::<f64>() + layer.bias[r])
            .collect();
        if li == last {
            break;
        }
        margin = z.iter().fold(margin, |m, v| m.min(v.abs()));
        h = z.into_iter().map(|v| v.max(0.0)).collect();
    }
    margin
}

fn loss(net: &MlpParams, x: &[f64], t: f64) -> f64 {
    let y = net.forward(x).unwrap();
    (y - t) * (y - t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn parameter_and_input_gradients_match_central_differences(
        input_dim in 1usize..6,
        width in 1usize..8,
        depth in 1usize..5,
        seed in any::<u64>(),
        target in -3.0f64..3.0,
    ) {
        let mut rng = seeded(seed);
        let mut net = MlpParams::init(input_dim, width, depth, &mut rng).unwrap();
        for layer in net.layers_mut() {
            for b in layer.bias.iter_mut() {
                *b = rng.gen_range(-0.5..0.5);
            }
        }
        // Finite differences are meaningless across a ReLU kink; redraw until clear of one.
        let x = loop {
            let x: Vec<f64> = (0..input_dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
            if kink_margin(&net, &x) > 1e-3 {
                break x;
            }
        };
        let back = net.backward(&x, target).unwrap();

        for li in 0..net.depth() {
            for wi in 0..net.layers()[li].weight.data().len() {
                let mut plus = net.clone();
                plus.layers_mut()[li].weight.data_mut()[wi] += H;
                let mut minus = net.clone();
                minus.layers_mut()[li].weight.data_mut()[wi] -= H;
                let numeric = (loss(&plus, &x, target) - loss(&minus, &x, target)) / (2.0 * H);
                let analytic = back.grads.layers[li].weight[wi];
                prop_assert!(close(analytic, numeric), "layer {li} weight {wi}: {analytic} vs {numeric}");
            }
            for bi in 0..net.layers()[li].bias.len() {
                let mut plus = net.clone();
                plus.layers_mut()[li].bias[bi] += H;
                let mut minus = net.clone();
                minus.layers_mut()[li].bias[bi] -= H;
                let numeric = (loss(&plus, &x, target) - loss(&minus, &x, target)) / (2.0 * H);
                let analytic = back.grads.layers[li].bias[bi];
                prop_assert!(close(analytic, numeric), "layer {li} bias {bi}: {analytic} vs {numeric}");
            }
        }
        for i in 0..input_dim {
            let mut xp = x.clone();
            xp[i] += H;
            let mut xm = x.clone();
            xm[i] -= H;
            let numeric = (loss(&net, &xp, target) - loss(&net, &xm, target)) / (2.0 * H);
            prop_assert!(close(back.input_grad[i], numeric), "input {i}");
        }
    }
}
