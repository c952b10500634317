use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vulncand_core::eval::{compute_metrics, ConfusionCounts, MetricsReport};

use crate::Outcome;

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= 1e-12,
        _ => false,
    }
}

fn div(n: u64, d: u64) -> Option<f64> {
    if d == 0 {
        None
    } else {
        Some(n as f64 / d as f64)
    }
}

fn recompute(c: &ConfusionCounts) -> MetricsReport {
    let p = div(c.tp, c.tp + c.fp);
    let fnr = div(c.fn_, c.tp + c.fn_);
    let f1 = match (p, fnr) {
        (Some(p), Some(fnr)) => {
            let r = 1.0 - fnr;
            (p + r > 0.0).then(|| 2.0 * p * r / (p + r))
        }
        _ => None,
    };
    MetricsReport {
        fpr: div(c.fp, c.fp + c.tn),
        fnr,
        accuracy: div(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn_),
        precision: p,
        f1,
    }
}

pub fn run() -> Outcome {
    let worked = compute_metrics(&ConfusionCounts { tp: 8, fn_: 2, fp: 2, tn: 8 });
    let exact = MetricsReport { fpr: Some(0.2), fnr: Some(0.2), accuracy: Some(0.8), precision: Some(0.8), f1: Some(0.8) };
    if worked != exact {
        return Err(format!("worked example gave {worked:?}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut undefined = 0;
    for case in 0..1000 {
        let mut draw = || if rng.gen_bool(0.1) { 0 } else { rng.gen_range(0..500) };
        let c = ConfusionCounts { tp: draw(), fp: draw(), tn: draw(), fn_: draw() };
        let got = compute_metrics(&c);
        let want = recompute(&c);
        let pairs = [
            (got.fpr, want.fpr),
            (got.fnr, want.fnr),
            (got.accuracy, want.accuracy),
            (got.precision, want.precision),
            (got.f1, want.f1),
        ];
        if !pairs.iter().all(|(a, b)| close(*a, *b)) {
            return Err(format!("case {case} {c:?}: {got:?} vs {want:?}"));
        }
        undefined += pairs.iter().filter(|p| p.0.is_none()).count();
        let scaled = compute_metrics(&ConfusionCounts { tp: c.tp * 3, fp: c.fp * 3, tn: c.tn * 3, fn_: c.fn_ * 3 });
        let all = [
            (scaled.fpr, got.fpr),
            (scaled.fnr, got.fnr),
            (scaled.accuracy, got.accuracy),
            (scaled.precision, got.precision),
            (scaled.f1, got.f1),
        ];
        if !all.iter().all(|(a, b)| close(*a, *b)) {
            return Err(format!("case {case}: metrics change under scaling"));
        }
    }
    Ok(format!("worked example exact, 1000 random counts agree ({undefined} undefined values)"))
}
