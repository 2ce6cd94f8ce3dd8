/// Neumaier compensated summation. The result does not depend on how the
/// caller parallelized the production of the terms, only on their order.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
    abs_sum: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += x.abs();
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }

    /// Σ|xᵢ|, used to bound the rounding error of the total.
    pub fn abs_total(&self) -> f64 {
        self.abs_sum
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        let s: CompensatedSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.total(), 2.0);
    }

    #[test]
    fn ascending_and_descending_agree() {
        let terms: Vec<f64> = (1..=100_000).map(|m| 1.0 / (m as f64).powi(2)).collect();
        let up: CompensatedSum = terms.iter().copied().collect();
        let down: CompensatedSum = terms.iter().rev().copied().collect();
        assert!((up.total() - down.total()).abs() <= 4.0 * f64::EPSILON * up.abs_total());
    }
}
