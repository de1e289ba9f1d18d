use std::collections::VecDeque;

/// Arrival/departure counters over a sliding window.
///
/// Timestamps must be fed in nondecreasing order.
#[derive(Debug, Clone)]
pub struct LoadEstimator {
    window: f64,
    arrivals: VecDeque<f64>,
    departures: VecDeque<f64>,
}

impl LoadEstimator {
    pub fn new(window: f64) -> Self {
        assert!(window > 0.0, "load window must be positive");
        Self {
            window,
            arrivals: VecDeque::new(),
            departures: VecDeque::new(),
        }
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn record_arrival(&mut self, now: f64) {
        self.arrivals.push_back(now);
        self.prune(now);
    }

    pub fn record_departure(&mut self, now: f64) {
        self.departures.push_back(now);
        self.prune(now);
    }

    /// Packets/s arrived within `(now - window, now]`.
    pub fn arrival_rate(&mut self, now: f64) -> f64 {
        self.prune(now);
        self.arrivals.len() as f64 / self.window
    }

    /// Packets/s sent within `(now - window, now]`.
    pub fn output_rate(&mut self, now: f64) -> f64 {
        self.prune(now);
        self.departures.len() as f64 / self.window
    }

    /// Arrival rate over output rate. Zero when idle, `+inf` when packets
    /// arrive but none leave.
    pub fn measure_load(&mut self, now: f64) -> f64 {
        ratio(self.arrival_rate(now), self.output_rate(now))
    }

    fn prune(&mut self, now: f64) {
        let horizon = now - self.window;
        while self.arrivals.front().is_some_and(|&t| t <= horizon) {
            self.arrivals.pop_front();
        }
        while self.departures.front().is_some_and(|&t| t <= horizon) {
            self.departures.pop_front();
        }
    }
}

pub fn ratio(arrival_rate: f64, output_rate: f64) -> f64 {
    if output_rate > 0.0 {
        arrival_rate / output_rate
    } else if arrival_rate > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}
