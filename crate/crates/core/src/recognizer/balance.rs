//! Oversampling of positive training pairs.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{KgError, Result};
use crate::recognizer::features::Dataset;

/// Duplicate positives until `pos / neg >= target_ratio`. The positives are
/// shuffled with `seed` and duplicated round-robin in that order; copies are
/// appended after the original rows. Negatives are never touched.
pub fn balance(data: &Dataset, target_ratio: f64, seed: u64) -> Result<Dataset> {
    let y = data.labels()?;
    let pos: Vec<usize> = (0..y.len()).filter(|i| y[*i]).collect();
    let neg = y.len() - pos.len();
    if pos.is_empty() || neg == 0 {
        return Err(KgError::DegenerateData(format!(
            "balancing needs both classes, got {} positive and {neg} negative",
            pos.len()
        )));
    }
    if !(target_ratio > 0.0) {
        return Err(KgError::config("recognizer.balance_ratio", "must be positive"));
    }
    let needed = (target_ratio * neg as f64).ceil() as usize;
    let mut out = data.clone();
    if pos.len() >= needed {
        return Ok(out);
    }
    let mut order = pos;
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let labels = out.y.as_mut().expect("checked above");
    for k in 0..needed - order.len() {
        let i = order[k % order.len()];
        out.pairs.push(data.pairs[i].clone());
        out.x.push(data.x[i].clone());
        labels.push(true);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::{CandidatePair, PairKind};
    use crate::model::ConceptRef;
    use crate::recognizer::features::Layout;

    fn dataset(pos: usize, neg: usize) -> Dataset {
        let n = pos + neg;
        Dataset {
            layout: Layout::Instance,
            kind: PairKind::EtypeEntity,
            pairs: (0..n)
                .map(|i| CandidatePair::new(ConceptRef::EntityType("T".into()), ConceptRef::Entity(format!("e{i}"))))
                .collect(),
            x: (0..n).map(|i| vec![i as f64, 0.0, 0.0]).collect(),
            y: Some((0..n).map(|i| i < pos).collect()),
        }
    }

    #[test]
    fn five_to_a_hundred() {
        let d = dataset(5, 1000);
        let b = balance(&d, 0.1, 7).unwrap();
        let pos = b.y.as_ref().unwrap().iter().filter(|v| **v).count();
        assert_eq!(pos, 100);
        assert_eq!(&b.x[..d.len()], &d.x[..]);
        assert_eq!(b.len() - pos, 1000);
        // Round-robin: every original positive appears 20 times.
        for i in 0..5 {
            assert_eq!(b.x.iter().filter(|r| r[0] == i as f64).count(), 20);
        }
    }

    #[test]
    fn already_balanced_is_unchanged() {
        let d = dataset(200, 1000);
        assert_eq!(balance(&d, 0.1, 1).unwrap(), d);
    }

    #[test]
    fn single_class_is_degenerate() {
        assert!(matches!(balance(&dataset(0, 10), 0.1, 1), Err(KgError::DegenerateData(_))));
        assert!(matches!(balance(&dataset(3, 0), 0.1, 1), Err(KgError::DegenerateData(_))));
    }

    #[test]
    fn seed_changes_only_the_order() {
        let d = dataset(3, 100);
        let (a, b) = (balance(&d, 0.1, 1).unwrap(), balance(&d, 0.1, 2).unwrap());
        assert_eq!(a.len(), b.len());
        assert_eq!(balance(&d, 0.1, 1).unwrap(), a);
    }
}
