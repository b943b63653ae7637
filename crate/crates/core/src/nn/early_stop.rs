/// Stops training once the monitored loss has failed to improve on its best
/// value by more than `min_delta` for `patience` consecutive epochs.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    min_delta: f64,
    best: f64,
    wait: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize, min_delta: f64) -> Self {
        Self { patience, min_delta, best: f64::INFINITY, wait: 0 }
    }

    /// Records one epoch's loss; returns true when training should stop.
    pub fn update(&mut self, loss: f64) -> bool {
        if loss < self.best - self.min_delta {
            self.best = loss;
            self.wait = 0;
        } else {
            self.wait += 1;
        }
        self.patience > 0 && self.wait >= self.patience
    }

    pub fn best(&self) -> f64 {
        self.best
    }
}

/// 1-based epoch at which [`EarlyStopping`] fires for `losses`, if it does.
pub fn stopping_epoch(losses: &[f64], patience: usize, min_delta: f64) -> Option<usize> {
    let mut monitor = EarlyStopping::new(patience, min_delta);
    losses.iter().position(|&l| monitor.update(l)).map(|i| i + 1)
}
