use std::collections::HashMap;

/// Weight with lazily accumulated sum for averaging.
#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    weight: i64,
    total: i64,
    stamp: u64,
}

/// Multiclass averaged perceptron over interned feature ids.
///
/// Training weights are integers so scores are exact and independent of
/// summation order.
#[derive(Debug, Default)]
pub(crate) struct AveragedPerceptron {
    classes: usize,
    weights: Vec<HashMap<u32, Acc>>,
    step: u64,
}

impl AveragedPerceptron {
    pub fn new(classes: usize) -> Self {
        AveragedPerceptron {
            classes,
            weights: Vec::new(),
            step: 0,
        }
    }

    pub fn predict(&self, features: &[u32]) -> usize {
        let mut scores = vec![0i64; self.classes];
        for &f in features {
            if let Some(ws) = self.weights.get(f as usize) {
                for (&class, acc) in ws {
                    scores[class as usize] += acc.weight;
                }
            }
        }
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        best
    }

    /// Advances the clock by one training instance.
    pub fn tick(&mut self) {
        self.step += 1;
    }

    pub fn update(&mut self, features: &[u32], gold: usize, guess: usize) {
        if gold == guess {
            return;
        }
        let step = self.step;
        for &f in features {
            let f = f as usize;
            if f >= self.weights.len() {
                self.weights.resize_with(f + 1, HashMap::new);
            }
            for (class, delta) in [(gold, 1), (guess, -1)] {
                let acc = self.weights[f].entry(class as u32).or_default();
                acc.total += (step - acc.stamp) as i64 * acc.weight;
                acc.stamp = step;
                acc.weight += delta;
            }
        }
    }

    /// Averaged weights per feature id, classes sorted, zeros dropped.
    pub fn averaged(&self) -> Vec<Vec<(u32, f64)>> {
        let step = self.step.max(1);
        self.weights
            .iter()
            .map(|ws| {
                let mut row: Vec<(u32, f64)> = ws
                    .iter()
                    .filter_map(|(&class, acc)| {
                        let total = acc.total + (step - acc.stamp) as i64 * acc.weight;
                        (total != 0).then(|| (class, total as f64 / step as f64))
                    })
                    .collect();
                row.sort_by_key(|&(c, _)| c);
                row
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn learns_separable_problem() {
        let mut p = AveragedPerceptron::new(2);
        let data = [(vec![0u32, 1], 0usize), (vec![0, 2], 1)];
        for _ in 0..5 {
            for (feats, gold) in &data {
                p.tick();
                let guess = p.predict(feats);
                p.update(feats, *gold, guess);
            }
        }
        for (feats, gold) in &data {
            assert_eq!(p.predict(feats), *gold);
        }
        let avg = p.averaged();
        assert!(avg[1].iter().any(|&(c, w)| c == 0 && w > 0.0));
        assert!(avg[2].iter().any(|&(c, w)| c == 1 && w > 0.0));
    }
}
