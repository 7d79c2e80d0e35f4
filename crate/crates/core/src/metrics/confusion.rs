/// Binary-classification outcome counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    /// Tallies paired `(truth, predicted)` labels.
    pub fn from_labels<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (bool, bool)>,
    {
        let mut c = Self::default();
        for (truth, pred) in pairs {
            match (truth, pred) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MetricName {
    Accuracy,
    Specificity,
    Precision,
    Recall,
    F1,
}

impl MetricName {
    pub fn as_str(&self) -> &'static str {
        match self {
            MetricName::Accuracy => "accuracy",
            MetricName::Specificity => "specificity",
            MetricName::Precision => "precision",
            MetricName::Recall => "recall",
            MetricName::F1 => "f1",
        }
    }
}

/// Accuracy, specificity, precision, recall and F1.
///
/// A ratio with a zero denominator is reported as 0 and listed in
/// `undefined`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMetrics {
    pub accuracy: f64,
    pub specificity: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub undefined: Vec<MetricName>,
}

pub fn confusion_metrics(c: &ConfusionCounts) -> ConfusionMetrics {
    let mut undefined = Vec::new();
    let mut ratio = |name, num: f64, den: f64| {
        if den == 0.0 {
            undefined.push(name);
            0.0
        } else {
            num / den
        }
    };
    let (tp, fp, tn, fn_) = (c.tp as f64, c.fp as f64, c.tn as f64, c.fn_ as f64);
    let accuracy = ratio(MetricName::Accuracy, tp + tn, c.total() as f64);
    let specificity = ratio(MetricName::Specificity, tn, tn + fp);
    let precision = ratio(MetricName::Precision, tp, tp + fp);
    let recall = ratio(MetricName::Recall, tp, tp + fn_);
    let f1 = ratio(MetricName::F1, 2.0 * precision * recall, precision + recall);
    ConfusionMetrics {
        accuracy,
        specificity,
        precision,
        recall,
        f1,
        undefined,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counts(tp: u64, fp: u64, fn_: u64, tn: u64) -> ConfusionCounts {
        ConfusionCounts { tp, fp, tn, fn_ }
    }

    #[test]
    fn perfect_classifier() {
        let m = confusion_metrics(&counts(10, 0, 0, 10));
        assert_eq!(
            [m.accuracy, m.specificity, m.precision, m.recall, m.f1],
            [1.0; 5]
        );
        assert!(m.undefined.is_empty());
    }

    #[test]
    fn mixed_counts() {
        let m = confusion_metrics(&counts(8, 2, 1, 9));
        // 17/20, 9/11, 8/10, 8/9, 2*(0.8*8/9)/(0.8+8/9) = 16/19
        assert!((m.accuracy - 0.85).abs() < 1e-4);
        assert!((m.precision - 0.8).abs() < 1e-4);
        assert!((m.recall - 0.8889).abs() < 1e-4);
        assert!((m.specificity - 0.8182).abs() < 1e-4);
        assert!((m.f1 - 0.8421).abs() < 1e-4);
        assert!((m.f1 - 16.0 / 19.0).abs() < 1e-12);
    }

    #[test]
    fn zero_over_zero_flagged() {
        let m = confusion_metrics(&counts(0, 0, 5, 5));
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(m.undefined, vec![MetricName::Precision, MetricName::F1]);
        let empty = confusion_metrics(&ConfusionCounts::default());
        assert_eq!(empty.undefined.len(), 5);
    }

    #[test]
    fn from_labels() {
        let c = ConfusionCounts::from_labels([
            (true, true),
            (true, false),
            (false, false),
            (false, true),
        ]);
        assert_eq!(c, counts(1, 1, 1, 1));
    }

    proptest! {
        #[test]
        fn values_in_unit_interval(tp in 0u64..50, fp in 0u64..50, fn_ in 0u64..50, tn in 0u64..50) {
            let m = confusion_metrics(&counts(tp, fp, fn_, tn));
            for v in [m.accuracy, m.specificity, m.precision, m.recall, m.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
