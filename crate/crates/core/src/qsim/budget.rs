use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};

/// Counts objective evaluations against a hard budget. Increments are
/// atomic so one counter can be shared between threads.
#[derive(Debug)]
pub struct EvalCounter {
    used: AtomicUsize,
    budget: usize,
}

impl EvalCounter {
    pub fn new(budget: usize) -> Self {
        Self { used: AtomicUsize::new(0), budget }
    }

    pub fn unlimited() -> Self {
        Self::new(usize::MAX)
    }

    pub fn used(&self) -> usize {
        self.used.load(Ordering::SeqCst)
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.used()
    }

    /// Claims one evaluation, failing without side effects once the budget is spent.
    pub fn consume(&self) -> Result<()> {
        self.used
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |u| (u < self.budget).then_some(u + 1))
            .map(|_| ())
            .map_err(|_| Error::BudgetExhausted { budget: self.budget })
    }
}

/// A real-valued objective over flat parameter vectors, to be maximized.
pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
}

/// An objective paired with the counter that pays for its evaluations.
#[derive(Clone, Copy)]
pub struct Evaluator<'a> {
    objective: &'a dyn Objective,
    counter: &'a EvalCounter,
}

impl<'a> Evaluator<'a> {
    pub fn new(objective: &'a dyn Objective, counter: &'a EvalCounter) -> Self {
        Self { objective, counter }
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn counter(&self) -> &'a EvalCounter {
        self.counter
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.objective.dim() {
            return Err(Error::DimensionMismatch { expected: self.objective.dim(), got: x.len() });
        }
        self.counter.consume()?;
        let f = self.objective.value(x);
        if !f.is_finite() {
            return Err(Error::NonFinite(format!("objective value at {x:?}")));
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_of_one() {
        let c = EvalCounter::new(1);
        assert!(c.consume().is_ok());
        assert!(matches!(c.consume(), Err(Error::BudgetExhausted { budget: 1 })));
        assert_eq!(c.used(), 1);
    }

    #[test]
    fn full_budget_is_usable() {
        let c = EvalCounter::new(192);
        for _ in 0..192 {
            c.consume().unwrap();
        }
        assert_eq!(c.used(), 192);
        assert_eq!(c.remaining(), 0);
        assert!(c.consume().is_err());
        assert_eq!(c.used(), 192);
    }

    #[test]
    fn concurrent_consumers_never_overrun() {
        let c = EvalCounter::new(1000);
        std::thread::scope(|s| {
            for _ in 0..4 {
                s.spawn(|| while c.consume().is_ok() {});
            }
        });
        assert_eq!(c.used(), 1000);
    }
}
