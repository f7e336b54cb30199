use alloc::format;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Cosine annealing from `base_lr` down to `min_lr` over `total_epochs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub base_lr: f64,
    pub min_lr: f64,
    pub total_epochs: usize,
}

impl LrSchedule {
    pub fn new(base_lr: f64, min_lr: f64, total_epochs: usize) -> Result<Self> {
        if !(0.0 <= min_lr && min_lr <= base_lr) || !base_lr.is_finite() {
            return Err(Error::Argument(format!(
                "schedule requires 0 <= min_lr <= base_lr, got min_lr={min_lr}, base_lr={base_lr}"
            )));
        }
        if total_epochs == 0 {
            return Err(Error::Argument(
                "schedule requires total_epochs >= 1".into(),
            ));
        }
        Ok(Self {
            base_lr,
            min_lr,
            total_epochs,
        })
    }
}

/// Learning rate at `epoch`, for `0 <= epoch <= total_epochs`.
pub fn cosine_lr(schedule: &LrSchedule, epoch: usize) -> Result<f64> {
    if epoch > schedule.total_epochs {
        return Err(Error::Range {
            context: format!(
                "epoch {epoch} beyond schedule length {}",
                schedule.total_epochs
            ),
        });
    }
    let phase = core::f64::consts::PI * epoch as f64 / schedule.total_epochs as f64;
    let lr =
        schedule.min_lr + (schedule.base_lr - schedule.min_lr) * (1.0 + libm::cos(phase)) / 2.0;
    Ok(lr.max(schedule.min_lr))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_schedule() -> LrSchedule {
        LrSchedule::new(0.004, 0.0, 250).unwrap()
    }

    #[test]
    fn endpoints_and_midpoint() {
        let s = default_schedule();
        assert_eq!(cosine_lr(&s, 0).unwrap(), 0.004);
        assert_eq!(cosine_lr(&s, 250).unwrap(), 0.0);
        assert!((cosine_lr(&s, 125).unwrap() - 0.002).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_epoch() {
        assert!(matches!(
            cosine_lr(&default_schedule(), 251),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn non_increasing() {
        let s = LrSchedule::new(0.01, 0.001, 97).unwrap();
        let lrs: alloc::vec::Vec<f64> = (0..=97).map(|e| cosine_lr(&s, e).unwrap()).collect();
        assert!(lrs.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn invalid_construction() {
        assert!(LrSchedule::new(0.001, 0.01, 10).is_err());
        assert!(LrSchedule::new(0.01, 0.0, 0).is_err());
    }
}
