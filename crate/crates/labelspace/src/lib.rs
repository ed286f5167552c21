//! Unified multi-dataset label spaces for object detection.
//!
//! This crate builds a single category vocabulary out of several detection
//! datasets (a COCO-style list, an MVD-style list, and an OID-style semantic
//! hierarchy), completes it with the hierarchy's non-leaf categories, and
//! derives per-annotation supervision for a sigmoid multi-label classifier:
//! which channels are positive, and which channels have their loss suppressed
//! because they duplicate or subsume the ground-truth class in another
//! dataset's vocabulary.
//!
//! On top of the label space the crate provides:
//!
//! - numeric evaluation of the cascaded detection loss (RPN + head stages,
//!   IoU / smooth-L1 / masked per-channel BCE) with analytic gradients and a
//!   finite-difference checker ([`loss`]),
//! - deterministic epoch sampling plans combining dataset repeat ratios with
//!   class-aware round-robin draws ([`sampling`]),
//! - a verification harness: synthetic multi-domain data, a trainable linear
//!   multi-label scorer, Soft-NMS, AP50, and a five-way loss-strategy
//!   comparison ([`harness`]),
//! - parsers and serializers for every on-disk format ([`ingest`]), bundled
//!   fixtures ([`fixtures`]), and a CLI front end ([`cli`]).
//!
//! The runnable programs under `examples/` are the intended tour; each one
//! exercises a single capability end to end.

pub mod cli;
pub mod fixtures;
pub mod harness;
pub mod ingest;
pub mod labeling;
pub mod loss;
pub mod sampling;
pub mod taxonomy;
