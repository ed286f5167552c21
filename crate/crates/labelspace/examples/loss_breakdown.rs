//! Evaluates the full detection loss on a hand-built batch and prints every
//! term, then shows the point of the ignore mask: logits on masked channels
//! cannot move the loss at all.
//!
//!     cargo run --example loss_breakdown

use labelspace::fixtures;
use labelspace::labeling::{make_supervision, Label, LabelStrategy};
use labelspace::loss::{
    evaluate_batch, BoxXywh, HeadSample, HeadStagePrediction, LossWeights, RpnSample,
    RpnStagePrediction,
};

fn main() {
    let space = fixtures::small_space();
    let weights = LossWeights::default();
    let person = space.id_by_name("person").expect("fixture category");
    let strategy = LabelStrategy::OidHierarchyPlusHcls;

    // One positive and one negative RPN proposal, refined over two stages.
    let rpn = vec![
        RpnSample {
            stages: vec![
                RpnStagePrediction {
                    pred_box: BoxXywh::new(12.0, 10.0, 30.0, 42.0),
                    objectness_logit: 1.4,
                },
                RpnStagePrediction {
                    pred_box: BoxXywh::new(10.5, 10.0, 30.0, 40.5),
                    objectness_logit: 2.6,
                },
            ],
            gt_box: BoxXywh::new(10.0, 10.0, 30.0, 40.0),
            is_positive: true,
        },
        RpnSample {
            stages: vec![
                RpnStagePrediction {
                    pred_box: BoxXywh::new(50.0, 50.0, 10.0, 10.0),
                    objectness_logit: -0.8,
                },
                RpnStagePrediction {
                    pred_box: BoxXywh::new(52.0, 50.0, 10.0, 10.0),
                    objectness_logit: -2.1,
                },
            ],
            gt_box: BoxXywh::new(10.0, 10.0, 30.0, 40.0),
            is_positive: false,
        },
    ];

    // One person box and one background sample through the three head stages.
    let channels = space.num_channels();
    let person_spec = make_supervision(&space, strategy, Label::Foreground(person), channels)
        .expect("person is in the space");
    let mut person_logits = vec![-2.0; channels];
    for (channel, &on) in person_spec.targets.iter().enumerate() {
        if on {
            person_logits[channel] = 1.5;
        }
    }
    let head_stage = |logits: &[f64], deltas: [f64; 4]| HeadStagePrediction {
        pred_deltas: deltas,
        cls_logits: logits.to_vec(),
    };
    let background_spec = make_supervision(&space, strategy, Label::Background, channels)
        .expect("channel count matches");
    let mut background_logits = vec![-2.0; channels];
    background_logits[space.background_channel()] = 2.0;
    let head = vec![
        HeadSample {
            stages: vec![
                head_stage(&person_logits, [0.30, -0.10, 0.05, 0.20]),
                head_stage(&person_logits, [0.10, -0.05, 0.02, 0.08]),
                head_stage(&person_logits, [0.02, -0.01, 0.01, 0.02]),
            ],
            gt_deltas: [0.0, 0.0, 0.0, 0.0],
            supervision: person_spec.clone(),
        },
        HeadSample {
            stages: vec![
                head_stage(&background_logits, [0.0; 4]),
                head_stage(&background_logits, [0.0; 4]),
                head_stage(&background_logits, [0.0; 4]),
            ],
            gt_deltas: [0.0, 0.0, 0.0, 0.0],
            supervision: background_spec,
        },
    ];

    let breakdown = evaluate_batch(&rpn, &head, &weights).expect("well-formed batch");
    println!("rpn branch:       {:.6}", breakdown.rpn);
    for (stage, terms) in breakdown.rpn_stages.iter().enumerate() {
        println!("  stage {stage}: box {:.6}  objectness {:.6}", terms.iou, terms.objectness);
    }
    println!("head branch:      {:.6}", breakdown.head);
    for (stage, terms) in breakdown.head_stages.iter().enumerate() {
        println!("  stage {stage}: reg {:.6}  cls {:.6}", terms.reg, terms.cls);
    }
    println!("total (lambda = {}): {:.6}", weights.lambda, breakdown.total);

    // The person row masks its sibling channels. Slamming one of those
    // logits does not change a single bit of the result.
    let masked_channel = person_spec.mask.iter().position(|&m| !m).expect("strategy masks channels");
    let mut tampered = head.clone();
    for stage in &mut tampered[0].stages {
        stage.cls_logits[masked_channel] += 100.0;
    }
    let tampered_breakdown = evaluate_batch(&rpn, &tampered, &weights).expect("well-formed batch");
    println!(
        "\nchannel `{}` is masked for person rows; +100 on its logit keeps the total at {:.6} (bit-identical: {})",
        space.name(labelspace::taxonomy::CategoryId(masked_channel as u32)),
        tampered_breakdown.total,
        tampered_breakdown.total == breakdown.total,
    );
}
