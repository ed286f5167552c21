//! Verifies the analytic head-loss gradient against central finite
//! differences on a randomly drawn batch and reports the worst error.
//!
//!     cargo run --example gradient_check [-- <seed>]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use labelspace::fixtures;
use labelspace::labeling::{make_supervision, Label, LabelStrategy};
use labelspace::loss::{head_loss, head_loss_grad, HeadSample, HeadStagePrediction, LossWeights};
use labelspace::taxonomy::CategoryId;

fn main() {
    let seed = std::env::args().nth(1).map(|s| s.parse().expect("seed is a number")).unwrap_or(17);
    let space = fixtures::small_space();
    let weights = LossWeights::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let samples: Vec<HeadSample> = (0..3)
        .map(|_| {
            let label = if rng.random_bool(0.2) {
                Label::Background
            } else {
                Label::Foreground(CategoryId(rng.random_range(0..space.len()) as u32))
            };
            let strategy =
                LabelStrategy::ALL[rng.random_range(0..LabelStrategy::ALL.len())];
            HeadSample {
                stages: (0..weights.s_head)
                    .map(|_| HeadStagePrediction {
                        pred_deltas: std::array::from_fn(|_| rng.random_range(-2.0..2.0)),
                        cls_logits: (0..space.num_channels())
                            .map(|_| rng.random_range(-4.0..4.0))
                            .collect(),
                    })
                    .collect(),
                gt_deltas: std::array::from_fn(|_| rng.random_range(-2.0..2.0)),
                supervision: make_supervision(&space, strategy, label, space.num_channels())
                    .expect("label is in the space"),
            }
        })
        .collect();

    let analytic = head_loss_grad(&samples, &weights).expect("well-formed batch");

    let h = 1e-5;
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    let mut masked_zero = true;
    for i in 0..samples.len() {
        for s in 0..weights.s_head {
            for coord in 0..4 + space.num_channels() {
                let mut plus = samples.clone();
                let mut minus = samples.clone();
                if coord < 4 {
                    plus[i].stages[s].pred_deltas[coord] += h;
                    minus[i].stages[s].pred_deltas[coord] -= h;
                } else {
                    plus[i].stages[s].cls_logits[coord - 4] += h;
                    minus[i].stages[s].cls_logits[coord - 4] -= h;
                }
                let numeric = (head_loss(&plus, &weights).expect("batch").total
                    - head_loss(&minus, &weights).expect("batch").total)
                    / (2.0 * h);
                let a = if coord < 4 {
                    analytic[i].stages[s].pred_deltas[coord]
                } else {
                    analytic[i].stages[s].cls_logits[coord - 4]
                };
                if coord >= 4 && !samples[i].supervision.mask[coord - 4] {
                    // Suppressed channel: both sides must be exactly zero.
                    masked_zero &= a == 0.0 && numeric == 0.0;
                    continue;
                }
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max(rel);
                checked += 1;
            }
        }
    }

    println!("seed {seed}: {} samples, {} coordinates checked", samples.len(), checked);
    println!("worst relative error vs central differences: {worst:.3e}");
    println!("suppressed channels exactly zero on both sides: {masked_zero}");
}
