//! Reference implementations used as test oracles. Each is written from
//! the behavioural definition, deliberately without calling the library
//! code it checks.
#![allow(dead_code)]

use smart_hands::perception::{BoundingBox, HandState, TickDiagnostics};
use smart_hands::{
    admissible_classes, ClassLabel, Hand, HandLabel, LocationClass, ObjectClass, ProbVector, TickResult,
};

/// Splitmix64: a tiny deterministic generator for building test inputs.
pub struct Gen(u64);

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen(seed)
    }

    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `lo..hi`.
    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.next() % (hi - lo)
    }

    pub fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// A random distribution of length `n`, sometimes one-hot, sometimes
    /// with exact ties.
    pub fn distribution(&mut self, n: usize) -> Vec<f64> {
        match self.range(0, 6) {
            0 => {
                let hot = self.range(0, n as u64) as usize;
                (0..n).map(|i| if i == hot { 1.0 } else { 0.0 }).collect()
            }
            1 => vec![1.0 / n as f64; n],
            _ => {
                let raw: Vec<f64> = (0..n).map(|_| self.unit() + 1e-3).collect();
                let total: f64 = raw.iter().sum();
                raw.iter().map(|r| r / total).collect()
            }
        }
    }
}

// ---------------------------------------------------------------- labels

pub fn first_argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// Label from raw object / location vectors by the two-stage rule.
pub fn two_stage(object: Option<&[f64]>, location: Option<&[f64]>, hand: Hand) -> HandLabel {
    let Some(object) = object else { return HandLabel::Unknown };
    match first_argmax(object) {
        0 => match location {
            Some(loc) => HandLabel::Location(admissible_classes(hand)[first_argmax(loc)]),
            None => HandLabel::Unknown,
        },
        i => HandLabel::Object(ObjectClass::ALL[i]),
    }
}

/// The default distraction predicate as an explicit truth table.
pub fn distracted(left: HandLabel, right: HandLabel) -> bool {
    let holds = |l: HandLabel| matches!(l, HandLabel::Object(_));
    let on_wheel = |l: HandLabel| matches!(l, HandLabel::Location(LocationClass::Wheel) | HandLabel::Unknown);
    holds(left) || holds(right) || (!on_wheel(left) && !on_wheel(right))
}

// ------------------------------------------------------------- smoothing

/// Raw per-hand outputs for one tick: (object vector, location vector).
#[derive(Debug, Clone, PartialEq)]
pub struct RawHand {
    pub object: Option<Vec<f64>>,
    pub location: Option<Vec<f64>>,
}

/// Brute-force window mean, one element at a time: start from the oldest
/// vector and fold each newer one in as `m += (v - m) / k`; renormalize
/// only when the sum strays more than 1e-6 from one.
pub fn window_mean(vectors: &[&Vec<f64>]) -> Option<Vec<f64>> {
    let first = vectors.first()?;
    let mut out = Vec::new();
    for i in 0..first.len() {
        let mut m = vectors[0][i];
        for k in 1..vectors.len() {
            m = m + (vectors[k][i] - m) / (k + 1) as f64;
        }
        out.push(m);
    }
    let mut total = 0.0;
    for x in &out {
        total += x;
    }
    if (total - 1.0).abs() > 1e-6 {
        for x in out.iter_mut() {
            *x /= total;
        }
    }
    Some(out)
}

/// Smoothed (object, location, label) for every tick of one hand.
pub fn smooth_oracle(hand: Hand, ticks: &[RawHand], window: usize) -> Vec<(Option<Vec<f64>>, Option<Vec<f64>>, HandLabel)> {
    (0..ticks.len())
        .map(|t| {
            let lo = (t + 1).saturating_sub(window);
            let objs: Vec<&Vec<f64>> = ticks[lo..=t].iter().filter_map(|h| h.object.as_ref()).collect();
            let locs: Vec<&Vec<f64>> = ticks[lo..=t].iter().filter_map(|h| h.location.as_ref()).collect();
            let o = window_mean(&objs);
            let l = window_mean(&locs);
            let label = two_stage(o.as_deref(), l.as_deref(), hand);
            (o, l, label)
        })
        .collect()
}

/// Random raw outputs for one hand, consistent with the two-stage rule:
/// a location vector is present exactly when the object argmax is None.
pub fn random_raw_hand(g: &mut Gen, hand: Hand) -> RawHand {
    if g.range(0, 12) == 0 {
        return RawHand { object: None, location: None };
    }
    let object = g.distribution(ObjectClass::ALL.len());
    let location = (first_argmax(&object) == 0).then(|| g.distribution(admissible_classes(hand).len()));
    RawHand { object: Some(object), location }
}

pub fn hand_state(hand: Hand, raw: &RawHand) -> HandState {
    let object_probs = raw.object.as_ref().map(|o| ProbVector::from_probs(ObjectClass::ALL, o).unwrap());
    let location_probs = raw.location.as_ref().map(|l| ProbVector::from_probs(admissible_classes(hand), l).unwrap());
    let label = two_stage(raw.object.as_deref(), raw.location.as_deref(), hand);
    HandState { hand, object_probs, location_probs, label }
}

pub fn tick_result(i: u64, left: &RawHand, right: &RawHand) -> TickResult {
    TickResult {
        tick_index: i,
        reference_timestamp_us: i * 33_333,
        left: hand_state(Hand::Left, left),
        right: hand_state(Hand::Right, right),
        diagnostics: TickDiagnostics::default(),
    }
}

/// One-hot raw outputs for a final label.
pub fn one_hot_raw(hand: Hand, label: HandLabel) -> RawHand {
    let hot = |n: usize, i: usize| (0..n).map(|j| if j == i { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
    match label {
        HandLabel::Object(o) => RawHand { object: Some(hot(4, o.ordinal())), location: None },
        HandLabel::Location(l) => {
            let classes = admissible_classes(hand);
            let i = classes.iter().position(|&c| c == l).unwrap();
            RawHand { object: Some(hot(4, 0)), location: Some(hot(classes.len(), i)) }
        }
        HandLabel::Unknown => RawHand { object: None, location: None },
    }
}

// --------------------------------------------------------------- alerting

/// Alert onsets from a per-tick distraction sequence, computed run by run.
///
/// A run of `n` distracted ticks starting at `s` fires at
/// `s + threshold - 1 + k * (cooldown + threshold)` for every `k` that
/// lands inside the run; a clean tick ends the run and resets everything.
pub fn alert_onsets(distraction: &[bool], threshold: u64, cooldown: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 0usize;
    while i < distraction.len() {
        if !distraction[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < distraction.len() && distraction[i] {
            i += 1;
        }
        let len = (i - start) as u64;
        let mut offset = threshold - 1;
        while offset < len {
            out.push(start as u64 + offset);
            offset += cooldown + threshold;
        }
    }
    out
}

// -------------------------------------------------------------- detection

pub fn box_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let w = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let h = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = w * h;
    let area = |x: &BoundingBox| (x.x_max - x.x_min) * (x.y_max - x.y_min);
    let union = area(a) + area(b) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Exhaustive AP@50: for every cut-off rank the matching is rebuilt from
/// scratch on the prefix, and the interpolated precision at each rank is
/// the maximum over all deeper cut-offs.
pub fn ap50_oracle(images: &[(Vec<BoundingBox>, Vec<BoundingBox>)]) -> Option<f64> {
    let total_gt: usize = images.iter().map(|(g, _)| g.len()).sum();
    if total_gt == 0 {
        return None;
    }
    let mut ranked: Vec<(usize, BoundingBox)> =
        images.iter().enumerate().flat_map(|(i, (_, p))| p.iter().map(move |b| (i, *b))).collect();
    // stable: equal confidences keep image-then-prediction order
    ranked.sort_by(|a, b| b.1.confidence.total_cmp(&a.1.confidence));

    let cut = |k: usize| -> (usize, usize) {
        let mut used: Vec<Vec<bool>> = images.iter().map(|(g, _)| vec![false; g.len()]).collect();
        let mut tp = 0;
        for (img, pred) in &ranked[..k] {
            let gts = &images[*img].0;
            let mut best: Option<usize> = None;
            let mut best_iou = 0.0;
            for g in 0..gts.len() {
                let o = box_iou(pred, &gts[g]);
                if !used[*img][g] && o >= 0.5 && (best.is_none() || o > best_iou) {
                    best = Some(g);
                    best_iou = o;
                }
            }
            if let Some(g) = best {
                used[*img][g] = true;
                tp += 1;
            }
        }
        (tp, k - tp)
    };

    let n = ranked.len();
    let points: Vec<(f64, f64)> = (1..=n)
        .map(|k| {
            let (tp, fp) = cut(k);
            (tp as f64 / (tp + fp) as f64, tp as f64 / total_gt as f64)
        })
        .collect();
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for k in 0..n {
        let interp = points[k..].iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        ap += (points[k].1 - prev_recall) * interp;
        prev_recall = points[k].1;
    }
    Some(ap)
}

/// Random image with up to 10 ground-truth and 10 predicted integer boxes;
/// predictions are often jittered copies of ground truth.
pub fn random_image(g: &mut Gen) -> (Vec<BoundingBox>, Vec<BoundingBox>) {
    let rand_box = |g: &mut Gen| {
        let x0 = g.range(0, 90) as f64;
        let y0 = g.range(0, 90) as f64;
        let w = g.range(2, 40) as f64;
        let h = g.range(2, 40) as f64;
        (x0, y0, x0 + w, y0 + h)
    };
    let n_gt = g.range(0, 6) as usize;
    let gts: Vec<BoundingBox> = (0..n_gt)
        .map(|_| {
            let (a, b, c, d) = rand_box(g);
            BoundingBox::new(a, b, c, d, 1.0).unwrap()
        })
        .collect();
    let n_pred = g.range(0, 6) as usize;
    let preds = (0..n_pred)
        .map(|_| {
            // coarse confidences so ties occur
            let conf = g.range(1, 11) as f64 / 10.0;
            if !gts.is_empty() && g.range(0, 3) > 0 {
                let t = gts[g.range(0, gts.len() as u64) as usize];
                let dx = g.range(0, 7) as f64 - 3.0;
                let dy = g.range(0, 7) as f64 - 3.0;
                BoundingBox::new(t.x_min + dx, t.y_min + dy, t.x_max + dx, t.y_max + dy, conf).unwrap()
            } else {
                let (a, b, c, d) = rand_box(g);
                BoundingBox::new(a, b, c, d, conf).unwrap()
            }
        })
        .collect();
    (gts, preds)
}

// ------------------------------------------------------------------ crops

/// Closed-form clamped crop `[cx - r, cx + r) x [cy - r, cy + r)` on the
/// rounded wrist, as `(x0, y0, x1, y1)`, or `None` when nothing is left.
pub fn crop_oracle(wx: f64, wy: f64, r: u32, w: u32, h: u32) -> Option<(u32, u32, u32, u32)> {
    let cx = wx.round() as i64;
    let cy = wy.round() as i64;
    let r = r as i64;
    let clamp = |v: i64, hi: u32| v.clamp(0, hi as i64);
    let (x0, x1) = (clamp(cx - r, w), clamp(cx + r, w));
    let (y0, y1) = (clamp(cy - r, h), clamp(cy + r, h));
    (x0 < x1 && y0 < y1).then_some((x0 as u32, y0 as u32, x1 as u32, y1 as u32))
}
