use crate::Result;

/// Anything DE can score a candidate against: a true BBOB problem or a
/// trained surrogate.
pub trait Objective {
    fn dim(&self) -> usize;

    fn evaluate(&mut self, x: &[f64]) -> Result<f64>;

    fn evaluate_batch(&mut self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.evaluate(x)).collect()
    }
}

impl<T: Objective + ?Sized> Objective for &mut T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        (**self).evaluate(x)
    }

    fn evaluate_batch(&mut self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        (**self).evaluate_batch(xs)
    }
}
