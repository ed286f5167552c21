//! Runs Soft-NMS over a cluster of overlapping detections and scores the
//! survivors with AP50, flat and with hierarchical ground-truth expansion.
//!
//!     cargo run --example soft_nms_ap50

use labelspace::fixtures;
use labelspace::harness::{
    ap50_with, per_category_ap50, soft_nms, ApIntegration, Detection, GroundTruthBox, NmsMode,
    DEFAULT_IOU_THRESHOLD, DEFAULT_SCORE_THRESHOLD,
};
use labelspace::loss::BoxXywh;

fn main() {
    let space = fixtures::small_space();
    let banana = space.id_by_name("banana").expect("fixture category");
    let person = space.id_by_name("person").expect("fixture category");

    // Three near-duplicates on one banana plus one clean person hit.
    let detections = vec![
        det("img-0", 10.0, 10.0, 20.0, 20.0, 0.95, banana.0),
        det("img-0", 12.0, 10.0, 20.0, 20.0, 0.80, banana.0),
        det("img-0", 11.0, 11.0, 20.0, 20.0, 0.60, banana.0),
        det("img-0", 40.0, 40.0, 12.0, 30.0, 0.90, person.0),
    ];

    for mode in [NmsMode::Hard, NmsMode::Linear] {
        let kept = soft_nms(&detections, DEFAULT_IOU_THRESHOLD, DEFAULT_SCORE_THRESHOLD, mode)
            .expect("scores are valid");
        println!("{mode:?}: {} of {} survive", kept.len(), detections.len());
        for d in &kept {
            println!(
                "  {} {:<7} score {:.3} at ({}, {})",
                d.image_id,
                space.name(d.category),
                d.score,
                d.bbox.x,
                d.bbox.y,
            );
        }
    }

    let ground_truth = vec![
        gt("img-0", 10.0, 10.0, 20.0, 20.0, banana.0),
        gt("img-0", 40.0, 40.0, 12.0, 30.0, person.0),
    ];
    let kept = soft_nms(&detections, DEFAULT_IOU_THRESHOLD, DEFAULT_SCORE_THRESHOLD, NmsMode::Linear)
        .expect("scores are valid");

    for hierarchical in [false, true] {
        let mean = ap50_with(&kept, &ground_truth, hierarchical, &space, ApIntegration::Interp101)
            .expect("categories are in the space");
        let per = per_category_ap50(&kept, &ground_truth, hierarchical, &space, ApIntegration::Interp101)
            .expect("categories are in the space");
        let label = if hierarchical { "hierarchical" } else { "flat" };
        println!("\nAP50 ({label}): mean {mean:.4}");
        for (id, ap) in per {
            println!("  {:<7} {ap:.4}", space.name(id));
        }
    }
}

fn det(image: &str, x: f64, y: f64, w: f64, h: f64, score: f64, category: u32) -> Detection {
    Detection {
        image_id: image.to_string(),
        bbox: BoxXywh::new(x, y, w, h),
        score,
        category: labelspace::taxonomy::CategoryId(category),
    }
}

fn gt(image: &str, x: f64, y: f64, w: f64, h: f64, category: u32) -> GroundTruthBox {
    GroundTruthBox {
        image_id: image.to_string(),
        bbox: BoxXywh::new(x, y, w, h),
        category: labelspace::taxonomy::CategoryId(category),
    }
}
