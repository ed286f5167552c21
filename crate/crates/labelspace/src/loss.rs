//! Numeric evaluation of the cascaded detection loss.
//!
//! The total loss is `lambda * L_rpn + L_head`. The RPN term averages, over
//! samples and stages, an IoU penalty `alpha * (1 - IoU)` for positive
//! anchors plus a binary cross entropy on objectness. The head term averages
//! `beta * SmoothL1` box regression (positives only) plus the per-channel
//! masked classification loss `(gamma / C) * sum_c mask[c] * BCE(x[c],
//! target[c])`, where the mask realizes loss suppression.
//!
//! All arithmetic is plain `f64`. BCE uses the stable form
//! `max(x, 0) - x * t + ln(1 + e^{-|x|})`. Accumulation order is fixed
//! (stage-major, then sample order), so results are reproducible; a
//! reimplementation that sums in another order agrees to roughly machine
//! epsilon, not bit-for-bit. `total = lambda * rpn + head` is exact by
//! construction because it is computed as written.
//!
//! Analytic gradients are provided for every differentiable piece, and
//! [`grad_check`] compares them against central finite differences, flagging
//! points where one-sided curvature disagrees (a non-smooth point) instead
//! of failing there.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::labeling::SupervisionSpec;

/// Axis-aligned box, top-left origin, `(x, y, w, h)` in pixels.
///
/// Serializes as the 4-element array `[x, y, w, h]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxXywh {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoxXywh {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.w.is_finite() && self.h.is_finite()
    }
}

impl Serialize for BoxXywh {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y, self.w, self.h].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BoxXywh {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [x, y, w, h] = <[f64; 4]>::deserialize(deserializer)?;
        Ok(Self { x, y, w, h })
    }
}

/// The loss constants. Defaults are the configuration the crate documents:
/// `lambda = 0.7`, `alpha = 10`, `beta = 1`, `gamma = 1.5`, two RPN stages,
/// three head stages, smooth-L1 transition at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossWeights {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub s_rpn: usize,
    pub s_head: usize,
    pub smooth_l1_beta: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda: 0.7,
            alpha: 10.0,
            beta: 1.0,
            gamma: 1.5,
            s_rpn: 2,
            s_head: 3,
            smooth_l1_beta: 1.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<(), LossError> {
        let scalars = [
            ("lambda", self.lambda),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("smooth_l1_beta", self.smooth_l1_beta),
        ];
        for (name, value) in scalars {
            if !(value.is_finite() && value > 0.0) {
                return Err(LossError::BadWeights(format!("{name} must be positive, got {value}")));
            }
        }
        if self.s_rpn == 0 || self.s_head == 0 {
            return Err(LossError::BadWeights("stage counts must be at least 1".to_string()));
        }
        Ok(())
    }
}

/// One RPN anchor: a prediction per cascade stage against one ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RpnSample {
    pub stages: Vec<RpnStagePrediction>,
    pub gt_box: BoxXywh,
    /// Objectness ground truth; the IoU term applies only to positives.
    pub is_positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RpnStagePrediction {
    pub pred_box: BoxXywh,
    pub objectness_logit: f64,
}

/// One head proposal: per-stage box deltas and class logits, plus the
/// supervision that encodes its positive and suppressed channels.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadSample {
    pub stages: Vec<HeadStagePrediction>,
    pub gt_deltas: [f64; 4],
    pub supervision: SupervisionSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadStagePrediction {
    pub pred_deltas: [f64; 4],
    pub cls_logits: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RpnStageTerms {
    pub iou: f64,
    pub objectness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RpnLoss {
    pub total: f64,
    pub per_stage: Vec<RpnStageTerms>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct HeadStageTerms {
    pub reg: f64,
    pub cls: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeadLoss {
    pub total: f64,
    pub reg: f64,
    pub cls: f64,
    pub per_stage: Vec<HeadStageTerms>,
}

/// Every term of one batch evaluation. `total = lambda * rpn + head` holds
/// exactly as computed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossBreakdown {
    pub total: f64,
    pub rpn: f64,
    pub head: f64,
    pub head_reg: f64,
    pub head_cls: f64,
    pub rpn_stages: Vec<RpnStageTerms>,
    pub head_stages: Vec<HeadStageTerms>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LossError {
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("binary target must be 0 or 1, got {0}")]
    BadTarget(f64),
    #[error("negative box extent in {0}")]
    NegativeExtent(&'static str),
    #[error("smooth-L1 beta must be positive, got {0}")]
    BadBeta(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("stage count mismatch: expected {expected}, got {got}")]
    StageCountMismatch { expected: usize, got: usize },
    #[error("bad loss weights: {0}")]
    BadWeights(String),
}

/// Numerically stable sigmoid.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Binary cross entropy on a logit, `-[t ln s + (1-t) ln(1-s)]` with
/// `s = sigmoid(logit)`, evaluated as `max(x,0) - x t + ln(1 + e^{-|x|})`.
pub fn bce(logit: f64, target: f64) -> Result<f64, LossError> {
    if !logit.is_finite() {
        return Err(LossError::NonFinite("logit"));
    }
    if target != 0.0 && target != 1.0 {
        return Err(LossError::BadTarget(target));
    }
    Ok(logit.max(0.0) - logit * target + (-logit.abs()).exp().ln_1p())
}

/// `d bce / d logit = sigmoid(logit) - target`.
pub fn bce_grad(logit: f64, target: f64) -> f64 {
    sigmoid(logit) - target
}

/// Smooth L1 on a scalar residual: quadratic below `beta`, linear above.
pub fn smooth_l1(pred: f64, gt: f64, beta: f64) -> Result<f64, LossError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(LossError::BadBeta(beta));
    }
    if !pred.is_finite() || !gt.is_finite() {
        return Err(LossError::NonFinite("smooth-L1 input"));
    }
    let d = (pred - gt).abs();
    Ok(if d < beta { 0.5 * d * d / beta } else { d - 0.5 * beta })
}

/// `d smooth_l1 / d pred`; at the transition the linear branch's slope is
/// used (the derivative is continuous there anyway).
pub fn smooth_l1_grad(pred: f64, gt: f64, beta: f64) -> f64 {
    let r = pred - gt;
    if r.abs() < beta {
        r / beta
    } else {
        r.signum()
    }
}

/// Intersection over union of two boxes; 0 when the union has no area.
pub fn iou(a: &BoxXywh, b: &BoxXywh) -> Result<f64, LossError> {
    if !a.is_finite() || !b.is_finite() {
        return Err(LossError::NonFinite("box"));
    }
    if a.w < 0.0 || a.h < 0.0 {
        return Err(LossError::NegativeExtent("first box"));
    }
    if b.w < 0.0 || b.h < 0.0 {
        return Err(LossError::NegativeExtent("second box"));
    }
    let x1 = a.x.max(b.x);
    let y1 = a.y.max(b.y);
    let x2 = (a.x + a.w).min(b.x + b.w);
    let y2 = (a.y + a.h).min(b.y + b.h);
    let inter = (x2 - x1).max(0.0) * (y2 - y1).max(0.0);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        Ok(0.0)
    } else {
        Ok(inter / union)
    }
}

/// Masked per-channel classification loss:
/// `(gamma / C) * sum_c mask[c] * BCE(logits[c], targets[c])`.
pub fn cls_loss(logits: &[f64], spec: &SupervisionSpec, gamma: f64) -> Result<f64, LossError> {
    if logits.len() != spec.len() {
        return Err(LossError::DimensionMismatch { expected: spec.len(), got: logits.len() });
    }
    let channels = logits.len() as f64;
    let mut sum = 0.0;
    for (c, &logit) in logits.iter().enumerate() {
        if spec.mask[c] {
            sum += bce(logit, if spec.targets[c] { 1.0 } else { 0.0 })?;
        }
    }
    Ok(gamma / channels * sum)
}

/// Gradient of [`cls_loss`] with respect to the logits; exactly zero on
/// suppressed channels.
pub fn cls_loss_grad(
    logits: &[f64],
    spec: &SupervisionSpec,
    gamma: f64,
) -> Result<Vec<f64>, LossError> {
    if logits.len() != spec.len() {
        return Err(LossError::DimensionMismatch { expected: spec.len(), got: logits.len() });
    }
    let channels = logits.len() as f64;
    let scale = gamma / channels;
    let grad = logits
        .iter()
        .enumerate()
        .map(|(c, &logit)| {
            if spec.mask[c] {
                scale * bce_grad(logit, if spec.targets[c] { 1.0 } else { 0.0 })
            } else {
                0.0
            }
        })
        .collect();
    Ok(grad)
}

/// RPN loss over a batch: `(1/N) * sum_i sum_s [alpha * (1 - IoU) + BCE]`,
/// with the IoU term restricted to positive anchors.
pub fn rpn_loss(samples: &[RpnSample], weights: &LossWeights) -> Result<RpnLoss, LossError> {
    weights.validate()?;
    if samples.is_empty() {
        return Ok(RpnLoss { total: 0.0, per_stage: Vec::new() });
    }
    let n = samples.len() as f64;
    let mut per_stage = vec![RpnStageTerms::default(); weights.s_rpn];
    for sample in samples {
        if sample.stages.len() != weights.s_rpn {
            return Err(LossError::StageCountMismatch {
                expected: weights.s_rpn,
                got: sample.stages.len(),
            });
        }
        for (s, stage) in sample.stages.iter().enumerate() {
            if sample.is_positive {
                per_stage[s].iou += weights.alpha * (1.0 - iou(&stage.pred_box, &sample.gt_box)?);
            }
            let target = if sample.is_positive { 1.0 } else { 0.0 };
            per_stage[s].objectness += bce(stage.objectness_logit, target)?;
        }
    }
    for terms in &mut per_stage {
        terms.iou /= n;
        terms.objectness /= n;
    }
    let total = per_stage.iter().map(|t| t.iou + t.objectness).sum();
    Ok(RpnLoss { total, per_stage })
}

/// Head loss over a batch:
/// `(1/N) * sum_i sum_s [beta * sum_k SmoothL1(r_s[k], y_loc[k]) + cls_loss]`,
/// with the regression term restricted to foreground samples.
pub fn head_loss(samples: &[HeadSample], weights: &LossWeights) -> Result<HeadLoss, LossError> {
    weights.validate()?;
    if samples.is_empty() {
        return Ok(HeadLoss { total: 0.0, reg: 0.0, cls: 0.0, per_stage: Vec::new() });
    }
    let n = samples.len() as f64;
    let channels = samples[0].supervision.len();
    let mut per_stage = vec![HeadStageTerms::default(); weights.s_head];
    for sample in samples {
        if sample.stages.len() != weights.s_head {
            return Err(LossError::StageCountMismatch {
                expected: weights.s_head,
                got: sample.stages.len(),
            });
        }
        if sample.supervision.len() != channels {
            return Err(LossError::DimensionMismatch {
                expected: channels,
                got: sample.supervision.len(),
            });
        }
        for (s, stage) in sample.stages.iter().enumerate() {
            if !sample.supervision.is_background() {
                let mut reg = 0.0;
                for k in 0..4 {
                    reg += smooth_l1(stage.pred_deltas[k], sample.gt_deltas[k], weights.smooth_l1_beta)?;
                }
                per_stage[s].reg += weights.beta * reg;
            }
            per_stage[s].cls += cls_loss(&stage.cls_logits, &sample.supervision, weights.gamma)?;
        }
    }
    for terms in &mut per_stage {
        terms.reg /= n;
        terms.cls /= n;
    }
    let reg = per_stage.iter().map(|t| t.reg).sum::<f64>();
    let cls = per_stage.iter().map(|t| t.cls).sum::<f64>();
    Ok(HeadLoss { total: reg + cls, reg, cls, per_stage })
}

/// Per-coordinate gradient of [`head_loss`] with respect to every stage's
/// box deltas and class logits.
pub fn head_loss_grad(
    samples: &[HeadSample],
    weights: &LossWeights,
) -> Result<Vec<HeadSampleGrad>, LossError> {
    weights.validate()?;
    let n = samples.len() as f64;
    let mut out = Vec::with_capacity(samples.len());
    for sample in samples {
        if sample.stages.len() != weights.s_head {
            return Err(LossError::StageCountMismatch {
                expected: weights.s_head,
                got: sample.stages.len(),
            });
        }
        let mut stages = Vec::with_capacity(sample.stages.len());
        for stage in &sample.stages {
            let mut pred_deltas = [0.0; 4];
            if !sample.supervision.is_background() {
                for k in 0..4 {
                    pred_deltas[k] = weights.beta
                        * smooth_l1_grad(
                            stage.pred_deltas[k],
                            sample.gt_deltas[k],
                            weights.smooth_l1_beta,
                        )
                        / n;
                }
            }
            let mut cls_logits = cls_loss_grad(&stage.cls_logits, &sample.supervision, weights.gamma)?;
            for g in &mut cls_logits {
                *g /= n;
            }
            stages.push(HeadStageGrad { pred_deltas, cls_logits });
        }
        out.push(HeadSampleGrad { stages });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadSampleGrad {
    pub stages: Vec<HeadStageGrad>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadStageGrad {
    pub pred_deltas: [f64; 4],
    pub cls_logits: Vec<f64>,
}

/// `lambda * rpn + head`, evaluated exactly as written.
pub fn total_loss(rpn: f64, head: f64, weights: &LossWeights) -> f64 {
    weights.lambda * rpn + head
}

/// Evaluates both branches and assembles the full breakdown.
pub fn evaluate_batch(
    rpn_samples: &[RpnSample],
    head_samples: &[HeadSample],
    weights: &LossWeights,
) -> Result<LossBreakdown, LossError> {
    let rpn = rpn_loss(rpn_samples, weights)?;
    let head = head_loss(head_samples, weights)?;
    Ok(LossBreakdown {
        total: total_loss(rpn.total, head.total, weights),
        rpn: rpn.total,
        head: head.total,
        head_reg: head.reg,
        head_cls: head.cls,
        rpn_stages: rpn.per_stage,
        head_stages: head.per_stage,
    })
}

/// Settings for [`grad_check`]: the central-difference step and the
/// threshold on the one-sided curvature jump above which a coordinate is
/// flagged as non-smooth.
#[derive(Debug, Clone, Copy)]
pub struct GradCheckConfig {
    pub h: f64,
    pub curvature_tol: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self { h: 1e-5, curvature_tol: 0.1 }
    }
}

/// One coordinate of a gradient check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordCheck {
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    /// `|analytic - numeric| / max(|analytic|, |numeric|, 1e-6)`.
    pub rel_error: f64,
    /// True when left and right second differences disagree by more than the
    /// configured tolerance, marking a non-smooth point of the function.
    pub nonsmooth: bool,
}

/// Result of comparing an analytic gradient against central differences.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub coords: Vec<CoordCheck>,
    /// Largest relative error over smooth coordinates.
    pub max_rel_error: f64,
}

impl GradCheck {
    /// Coordinates whose relative error exceeds `tol`, non-smooth ones
    /// included.
    pub fn failures(&self, tol: f64) -> Vec<&CoordCheck> {
        self.coords.iter().filter(|c| c.rel_error > tol).collect()
    }

    /// True when every smooth coordinate meets `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        self.coords.iter().all(|c| c.nonsmooth || c.rel_error <= tol)
    }
}

/// Compares `analytic` against central finite differences of `f` at
/// `params`, coordinate by coordinate.
///
/// Five evaluations per coordinate estimate both the symmetric derivative
/// and the curvature on each side; a curvature jump flags the coordinate as
/// non-smooth rather than failing the check there.
pub fn grad_check<F>(
    f: F,
    params: &[f64],
    analytic: &[f64],
    config: GradCheckConfig,
) -> Result<GradCheck, LossError>
where
    F: Fn(&[f64]) -> Result<f64, LossError>,
{
    if analytic.len() != params.len() {
        return Err(LossError::DimensionMismatch { expected: params.len(), got: analytic.len() });
    }
    let h = config.h;
    if !(h.is_finite() && h > 0.0) {
        return Err(LossError::NonFinite("step size"));
    }
    let mut coords = Vec::with_capacity(params.len());
    let mut max_rel_error: f64 = 0.0;
    let mut point = params.to_vec();
    let f0 = eval_finite(&f, &point)?;
    for index in 0..params.len() {
        let base = params[index];
        let mut at = |offset: f64| -> Result<f64, LossError> {
            point[index] = base + offset;
            let value = eval_finite(&f, &point);
            point[index] = base;
            value
        };
        let f_m2 = at(-2.0 * h)?;
        let f_m1 = at(-h)?;
        let f_p1 = at(h)?;
        let f_p2 = at(2.0 * h)?;
        let numeric = (f_p1 - f_m1) / (2.0 * h);
        let left_curvature = (f0 - 2.0 * f_m1 + f_m2) / (h * h);
        let right_curvature = (f_p2 - 2.0 * f_p1 + f0) / (h * h);
        let nonsmooth = (right_curvature - left_curvature).abs() > config.curvature_tol;
        let a = analytic[index];
        let rel_error = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
        if !nonsmooth {
            max_rel_error = max_rel_error.max(rel_error);
        }
        coords.push(CoordCheck { index, analytic: a, numeric, rel_error, nonsmooth });
    }
    Ok(GradCheck { coords, max_rel_error })
}

fn eval_finite<F>(f: &F, point: &[f64]) -> Result<f64, LossError>
where
    F: Fn(&[f64]) -> Result<f64, LossError>,
{
    let value = f(point)?;
    if !value.is_finite() {
        return Err(LossError::NonFinite("loss evaluation"));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::Label;
    use crate::taxonomy::CategoryId;

    fn spec(targets: &[bool], mask: &[bool]) -> SupervisionSpec {
        SupervisionSpec {
            targets: targets.to_vec(),
            mask: mask.to_vec(),
            label: Label::Foreground(CategoryId(0)),
        }
    }

    #[test]
    fn bce_matches_the_naive_form_on_moderate_logits() {
        for i in -40..=40 {
            let x = i as f64 * 0.25;
            for t in [0.0, 1.0] {
                let naive = -(t * sigmoid(x).ln() + (1.0 - t) * (1.0 - sigmoid(x)).ln());
                let stable = bce(x, t).unwrap();
                // Relative tolerance: the naive form itself drifts once
                // 1 - sigmoid(x) gets small.
                let scale = naive.abs().max(1.0);
                assert!((naive - stable).abs() / scale < 1e-12, "x={x} t={t}: {naive} vs {stable}");
            }
        }
    }

    #[test]
    fn bce_stays_finite_on_extreme_logits() {
        assert_eq!(bce(1000.0, 1.0).unwrap(), 0.0);
        assert_eq!(bce(-1000.0, 0.0).unwrap(), 0.0);
        assert_eq!(bce(-1000.0, 1.0).unwrap(), 1000.0);
        assert_eq!(bce(1000.0, 0.0).unwrap(), 1000.0);
        assert!(bce(f64::NAN, 1.0).is_err());
        assert_eq!(bce(0.0, 0.5), Err(LossError::BadTarget(0.5)));
    }

    #[test]
    fn bce_grad_is_sigmoid_minus_target() {
        assert!((bce_grad(0.0, 1.0) + 0.5).abs() < 1e-15);
        assert!((bce_grad(0.0, 0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn smooth_l1_branches_meet_at_the_transition() {
        let beta = 1.0;
        let at = |d: f64| smooth_l1(d, 0.0, beta).unwrap();
        assert!((at(beta) - 0.5 * beta).abs() < 1e-15);
        assert!((at(beta - 1e-9) - at(beta)).abs() < 1e-8);
        assert_eq!(at(0.0), 0.0);
        assert!((at(0.5) - 0.125).abs() < 1e-15);
        assert!((at(3.0) - 2.5).abs() < 1e-15);
        assert_eq!(smooth_l1(0.0, 0.0, 0.0), Err(LossError::BadBeta(0.0)));
    }

    #[test]
    fn iou_covers_the_standard_cases() {
        let unit = BoxXywh::new(0.0, 0.0, 2.0, 2.0);
        assert_eq!(iou(&unit, &unit).unwrap(), 1.0);
        let shifted = BoxXywh::new(1.0, 1.0, 2.0, 2.0);
        assert!((iou(&unit, &shifted).unwrap() - 1.0 / 7.0).abs() < 1e-15);
        let far = BoxXywh::new(10.0, 10.0, 2.0, 2.0);
        assert_eq!(iou(&unit, &far).unwrap(), 0.0);
        let degenerate = BoxXywh::new(0.0, 0.0, 0.0, 0.0);
        assert_eq!(iou(&degenerate, &degenerate).unwrap(), 0.0);
        let negative = BoxXywh::new(0.0, 0.0, -1.0, 1.0);
        assert_eq!(iou(&negative, &unit), Err(LossError::NegativeExtent("first box")));
    }

    #[test]
    fn cls_loss_skips_masked_channels_entirely() {
        // An absurd logit on a masked channel must not leak into the sum.
        let logits = [0.0, 500.0, -2.0];
        let sup = spec(&[true, false, false], &[true, false, true]);
        let gamma = 1.5;
        let expected = gamma / 3.0 * (bce(0.0, 1.0).unwrap() + bce(-2.0, 0.0).unwrap());
        assert_eq!(cls_loss(&logits, &sup, gamma).unwrap(), expected);
    }

    #[test]
    fn cls_grad_is_bitwise_zero_on_masked_channels() {
        let logits = [0.3, -0.7, 2.0, -4.0];
        let sup = spec(&[true, false, false, false], &[true, false, true, false]);
        let grad = cls_loss_grad(&logits, &sup, 1.5).unwrap();
        assert_eq!(grad[1].to_bits(), 0.0f64.to_bits());
        assert_eq!(grad[3].to_bits(), 0.0f64.to_bits());
        assert_ne!(grad[0], 0.0);
        assert_ne!(grad[2], 0.0);
    }

    #[test]
    fn cls_loss_checks_dimensions() {
        let sup = spec(&[true], &[true]);
        assert_eq!(
            cls_loss(&[0.0, 0.0], &sup, 1.0),
            Err(LossError::DimensionMismatch { expected: 1, got: 2 })
        );
    }

    #[test]
    fn rpn_loss_matches_the_closed_form() {
        let weights = LossWeights::default();
        let gt = BoxXywh::new(0.0, 0.0, 2.0, 2.0);
        let sample = RpnSample {
            stages: vec![
                RpnStagePrediction { pred_box: gt, objectness_logit: 0.0 },
                RpnStagePrediction {
                    pred_box: BoxXywh::new(1.0, 1.0, 2.0, 2.0),
                    objectness_logit: -10.0,
                },
            ],
            gt_box: gt,
            is_positive: true,
        };
        let loss = rpn_loss(&[sample], &weights).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert!((loss.per_stage[0].iou - 0.0).abs() < 1e-15);
        assert!((loss.per_stage[0].objectness - ln2).abs() < 1e-15);
        assert!((loss.per_stage[1].iou - 10.0 * (6.0 / 7.0)).abs() < 1e-12);
        assert!((loss.per_stage[1].objectness - bce(-10.0, 1.0).unwrap()).abs() < 1e-15);
        let expected: f64 = loss.per_stage.iter().map(|t| t.iou + t.objectness).sum();
        assert_eq!(loss.total, expected);
    }

    #[test]
    fn negative_anchors_skip_the_iou_term() {
        let weights = LossWeights::default();
        let gt = BoxXywh::new(0.0, 0.0, 2.0, 2.0);
        let stage = RpnStagePrediction {
            pred_box: BoxXywh::new(30.0, 30.0, 2.0, 2.0),
            objectness_logit: 0.0,
        };
        let sample = RpnSample {
            stages: vec![stage.clone(), stage],
            gt_box: gt,
            is_positive: false,
        };
        let loss = rpn_loss(&[sample], &weights).unwrap();
        for terms in &loss.per_stage {
            assert_eq!(terms.iou, 0.0);
            assert!((terms.objectness - std::f64::consts::LN_2).abs() < 1e-15);
        }
    }

    #[test]
    fn background_samples_skip_the_regression_term() {
        let weights = LossWeights::default();
        let stage = HeadStagePrediction { pred_deltas: [5.0; 4], cls_logits: vec![0.0, 0.0] };
        let background = HeadSample {
            stages: vec![stage.clone(), stage.clone(), stage],
            gt_deltas: [0.0; 4],
            supervision: SupervisionSpec {
                targets: vec![false, true],
                mask: vec![true, true],
                label: Label::Background,
            },
        };
        let loss = head_loss(&[background], &weights).unwrap();
        assert_eq!(loss.reg, 0.0);
        assert!(loss.cls > 0.0);
    }

    #[test]
    fn head_loss_matches_a_hand_rolled_sum() {
        let weights = LossWeights::default();
        let channels = 3;
        let sup = spec(&[true, false, false], &[true, true, false]);
        let stages: Vec<HeadStagePrediction> = (0..weights.s_head)
            .map(|s| HeadStagePrediction {
                pred_deltas: [0.5 * s as f64; 4],
                cls_logits: vec![0.1 * s as f64; channels],
            })
            .collect();
        let sample = HeadSample { stages: stages.clone(), gt_deltas: [0.0; 4], supervision: sup.clone() };
        let loss = head_loss(&[sample], &weights).unwrap();

        let mut reg = 0.0;
        let mut cls = 0.0;
        for stage in &stages {
            for k in 0..4 {
                reg += weights.beta * smooth_l1(stage.pred_deltas[k], 0.0, 1.0).unwrap();
            }
            cls += cls_loss(&stage.cls_logits, &sup, weights.gamma).unwrap();
        }
        assert!((loss.reg - reg).abs() < 1e-12);
        assert!((loss.cls - cls).abs() < 1e-12);
        assert_eq!(loss.total, loss.reg + loss.cls);
    }

    #[test]
    fn empty_batches_cost_nothing() {
        let weights = LossWeights::default();
        assert_eq!(rpn_loss(&[], &weights).unwrap().total, 0.0);
        assert_eq!(head_loss(&[], &weights).unwrap().total, 0.0);
    }

    #[test]
    fn total_is_lambda_rpn_plus_head_exactly() {
        let weights = LossWeights::default();
        let rpn = 0.123456789;
        let head = 9.87654321;
        assert_eq!(
            total_loss(rpn, head, &weights).to_bits(),
            (weights.lambda * rpn + head).to_bits()
        );
    }

    #[test]
    fn stage_count_mismatches_are_rejected() {
        let weights = LossWeights::default();
        let gt = BoxXywh::new(0.0, 0.0, 1.0, 1.0);
        let sample = RpnSample {
            stages: vec![RpnStagePrediction { pred_box: gt, objectness_logit: 0.0 }],
            gt_box: gt,
            is_positive: true,
        };
        assert_eq!(
            rpn_loss(&[sample], &weights),
            Err(LossError::StageCountMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn weights_must_be_positive() {
        let mut weights = LossWeights::default();
        weights.gamma = 0.0;
        assert!(weights.validate().is_err());
        let mut weights = LossWeights::default();
        weights.s_head = 0;
        assert!(weights.validate().is_err());
        assert!(LossWeights::default().validate().is_ok());
    }

    #[test]
    fn grad_check_accepts_analytic_gradients_at_smooth_points() {
        // One positive head sample, full gradient over deltas and logits.
        let weights = LossWeights::default();
        let sup = spec(&[true, false, false], &[true, true, false]);
        let make = |params: &[f64]| HeadSample {
            stages: (0..weights.s_head)
                .map(|s| HeadStagePrediction {
                    pred_deltas: [
                        params[s * 7],
                        params[s * 7 + 1],
                        params[s * 7 + 2],
                        params[s * 7 + 3],
                    ],
                    cls_logits: params[s * 7 + 4..s * 7 + 7].to_vec(),
                })
                .collect(),
            gt_deltas: [0.1, -0.2, 0.3, -0.4],
            supervision: sup.clone(),
        };
        let params: Vec<f64> = (0..21).map(|i| 0.3 + 0.17 * i as f64 % 1.9).collect();
        let grads = head_loss_grad(&[make(&params)], &weights).unwrap();
        let analytic: Vec<f64> = grads[0]
            .stages
            .iter()
            .flat_map(|s| s.pred_deltas.iter().copied().chain(s.cls_logits.iter().copied()))
            .collect();
        let f = |p: &[f64]| head_loss(&[make(p)], &weights).map(|l| l.total);
        let check = grad_check(f, &params, &analytic, GradCheckConfig::default()).unwrap();
        assert!(check.passes(1e-5), "max rel error {}", check.max_rel_error);
        // Masked channels have exactly zero analytic and numeric gradient.
        for s in 0..weights.s_head {
            let masked = s * 7 + 6;
            assert_eq!(analytic[masked], 0.0);
            assert_eq!(check.coords[masked].numeric, 0.0);
        }
    }

    #[test]
    fn grad_check_flags_the_smooth_l1_kink() {
        let f = |p: &[f64]| smooth_l1(p[0], 0.0, 1.0);
        let analytic = [smooth_l1_grad(1.0, 0.0, 1.0)];
        let check = grad_check(f, &[1.0], &analytic, GradCheckConfig::default()).unwrap();
        assert!(check.coords[0].nonsmooth);

        // Away from the kink the same setup is smooth.
        let analytic = [smooth_l1_grad(0.4, 0.0, 1.0)];
        let check = grad_check(f, &[0.4], &analytic, GradCheckConfig::default()).unwrap();
        assert!(!check.coords[0].nonsmooth);
        assert!(check.passes(1e-6));
    }

    #[test]
    fn box_serialization_is_a_flat_array() {
        let b = BoxXywh::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(serde_json::to_string(&b).unwrap(), "[1.0,2.0,3.0,4.0]");
        let parsed: BoxXywh = serde_json::from_str("[1, 2, 3, 4]").unwrap();
        assert_eq!(parsed, b);
    }
}
