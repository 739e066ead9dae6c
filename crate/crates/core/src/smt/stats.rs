use std::collections::BTreeMap;
use std::time::Duration;

use serde::Serialize;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PhaseStats {
    pub count: u64,
    #[serde(serialize_with = "secs")]
    pub time: Duration,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SolverStats {
    pub checks: u64,
    #[serde(rename = "wallTime", serialize_with = "secs")]
    pub wall_time: Duration,
    #[serde(rename = "perPhase")]
    pub per_phase: BTreeMap<String, PhaseStats>,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl SolverStats {
    pub fn record(&mut self, phase: &str, took: Duration) {
        self.checks += 1;
        self.wall_time += took;
        let p = self.per_phase.entry(phase.to_string()).or_default();
        p.count += 1;
        p.time += took;
    }

    pub fn absorb(&mut self, other: &SolverStats) {
        self.checks += other.checks;
        self.wall_time += other.wall_time;
        for (k, v) in &other.per_phase {
            let p = self.per_phase.entry(k.clone()).or_default();
            p.count += v.count;
            p.time += v.time;
        }
    }
}
