use std::f64::consts::PI;

/// Learning-rate schedule over optimizer steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LrSchedule {
    Constant {
        lr: f64,
    },
    /// Cosine annealing from `start` to `end` over `total` steps.
    Cosine {
        start: f64,
        end: f64,
        total: usize,
    },
}

impl LrSchedule {
    pub fn lr_at(&self, step: usize) -> f64 {
        match *self {
            LrSchedule::Constant { lr } => lr,
            LrSchedule::Cosine { start, end, total } => {
                let t = step.min(total) as f64 / total.max(1) as f64;
                end + 0.5 * (start - end) * (1.0 + (PI * t).cos())
            }
        }
    }
}
