//! Epidemic event records and the piecewise-constant state trajectory they
//! induce.
//!
//! Individuals that were never infected are not stored; they are implied by
//! `population - n_cases()`. Case labels in user-facing messages are
//! 1-based, matching the CSV format.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A broken invariant found by [`Outbreak::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Empty,
    LengthMismatch { infections: usize, removals: usize },
    TooManyCases { cases: usize, population: usize },
    NonFinite { label: usize },
    NonPositivePeriod { label: usize },
    NonUniqueInitial { first: usize, second: usize },
    NoInfective { label: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "no cases"),
            Violation::LengthMismatch {
                infections,
                removals,
            } => write!(
                f,
                "{infections} infection times but {removals} removal times"
            ),
            Violation::TooManyCases { cases, population } => {
                write!(f, "{cases} cases exceed population size {population}")
            }
            Violation::NonFinite { label } => write!(f, "case {label} has a non-finite time"),
            Violation::NonPositivePeriod { label } => {
                write!(f, "case {label} is not infected strictly before removal")
            }
            Violation::NonUniqueInitial { first, second } => write!(
                f,
                "cases {first} and {second} share the earliest infection time"
            ),
            Violation::NoInfective { label } => {
                write!(f, "no infective present just before infection of case {label}")
            }
        }
    }
}

/// Complete record of one epidemic with a single initial infective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOutbreak")]
pub struct Outbreak {
    population: usize,
    infection_times: Vec<f64>,
    removal_times: Vec<f64>,
}

#[derive(Deserialize)]
struct RawOutbreak {
    population: usize,
    infection_times: Vec<f64>,
    removal_times: Vec<f64>,
}

impl TryFrom<RawOutbreak> for Outbreak {
    type Error = Error;

    fn try_from(raw: RawOutbreak) -> Result<Self> {
        Outbreak::new(raw.population, raw.infection_times, raw.removal_times)
    }
}

impl Outbreak {
    /// Builds and validates an outbreak.
    pub fn new(population: usize, infection_times: Vec<f64>, removal_times: Vec<f64>) -> Result<Self> {
        let outbreak = Self::from_parts(population, infection_times, removal_times);
        let violations = outbreak.validate();
        if violations.is_empty() {
            Ok(outbreak)
        } else {
            Err(Error::InvalidOutbreak(violations))
        }
    }

    /// Builds an outbreak without checking it. Use [`Outbreak::validate`] to
    /// report problems.
    pub fn from_parts(population: usize, infection_times: Vec<f64>, removal_times: Vec<f64>) -> Self {
        Self {
            population,
            infection_times,
            removal_times,
        }
    }

    pub fn population(&self) -> usize {
        self.population
    }

    /// Initial number of susceptibles, `N - 1`.
    pub fn initial_susceptibles(&self) -> usize {
        self.population.saturating_sub(1)
    }

    pub fn n_cases(&self) -> usize {
        self.removal_times.len()
    }

    pub fn infection_times(&self) -> &[f64] {
        &self.infection_times
    }

    pub fn removal_times(&self) -> &[f64] {
        &self.removal_times
    }

    /// Index (0-based) of the case with the earliest infection time.
    pub fn initial_case(&self) -> usize {
        argmin(&self.infection_times)
    }

    pub fn initial_infection_time(&self) -> f64 {
        self.infection_times[self.initial_case()]
    }

    pub fn final_removal_time(&self) -> f64 {
        self.removal_times
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn infectious_periods(&self) -> impl Iterator<Item = f64> + '_ {
        self.removal_times
            .iter()
            .zip(&self.infection_times)
            .map(|(r, i)| r - i)
    }

    /// Removal times only, as observed in a partially observed outbreak.
    pub fn removals(&self) -> RemovalDataset {
        let mut times = self.removal_times.clone();
        times.sort_by(f64::total_cmp);
        RemovalDataset {
            removal_times: times,
            population: self.population,
            label: "removals of complete outbreak".into(),
        }
    }

    /// Every violated invariant, in a stable order. Empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.removal_times.len();
        if self.infection_times.len() != n {
            out.push(Violation::LengthMismatch {
                infections: self.infection_times.len(),
                removals: n,
            });
            return out;
        }
        if n == 0 {
            out.push(Violation::Empty);
            return out;
        }
        if n > self.population {
            out.push(Violation::TooManyCases {
                cases: n,
                population: self.population,
            });
        }
        let mut finite = true;
        for (j, (&i, &r)) in self.infection_times.iter().zip(&self.removal_times).enumerate() {
            if !i.is_finite() || !r.is_finite() {
                out.push(Violation::NonFinite { label: j + 1 });
                finite = false;
            } else if i >= r {
                out.push(Violation::NonPositivePeriod { label: j + 1 });
            }
        }
        if !finite {
            return out;
        }
        let z = self.initial_case();
        let iz = self.infection_times[z];
        if let Some(k) = (0..n).find(|&k| k != z && self.infection_times[k] == iz) {
            out.push(Violation::NonUniqueInitial {
                first: z.min(k) + 1,
                second: z.max(k) + 1,
            });
        }
        let mut events = Vec::with_capacity(2 * n);
        sorted_events(&self.infection_times, &self.removal_times, &mut events);
        let mut y = 0u32;
        let mut first = true;
        for ev in &events {
            match ev.kind {
                EventKind::Removal => y = y.saturating_sub(1),
                EventKind::Infection => {
                    if y == 0 && !first {
                        out.push(Violation::NoInfective {
                            label: ev.case as usize + 1,
                        });
                    }
                    first = false;
                    y += 1;
                }
            }
        }
        out
    }

    /// Piecewise-constant `(X, Y)` path over `[I_z, max R]`.
    pub fn trajectory(&self) -> Result<Trajectory> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidOutbreak(violations));
        }
        Ok(Trajectory::build(
            self.population,
            &self.infection_times,
            &self.removal_times,
        ))
    }
}

/// Observed removal times of a partially observed outbreak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovalDataset {
    removal_times: Vec<f64>,
    population: usize,
    #[serde(default)]
    label: String,
}

impl RemovalDataset {
    /// Requires sorted, finite times and `population >= removal_times.len() >= 1`.
    pub fn new(removal_times: Vec<f64>, population: usize, label: impl Into<String>) -> Result<Self> {
        if removal_times.is_empty() {
            return Err(Error::InvalidData("no removal times".into()));
        }
        if let Some(j) = removal_times.iter().position(|r| !r.is_finite()) {
            return Err(Error::InvalidData(format!("removal {} is not finite", j + 1)));
        }
        if let Some(j) = removal_times.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidData(format!(
                "removal times not sorted at position {}",
                j + 2
            )));
        }
        if population < removal_times.len() {
            return Err(Error::InvalidData(format!(
                "{} removals exceed population size {population}",
                removal_times.len()
            )));
        }
        Ok(Self {
            removal_times,
            population,
            label: label.into(),
        })
    }

    pub fn from_unsorted(mut removal_times: Vec<f64>, population: usize, label: impl Into<String>) -> Result<Self> {
        removal_times.sort_by(f64::total_cmp);
        Self::new(removal_times, population, label)
    }

    pub fn removal_times(&self) -> &[f64] {
        &self.removal_times
    }

    pub fn population(&self) -> usize {
        self.population
    }

    pub fn n_cases(&self) -> usize {
        self.removal_times.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// One maximal interval on which the state is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub susceptibles: u32,
    pub infectives: u32,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub population: usize,
    pub intervals: Vec<Interval>,
    /// `Y(I_j-)` for every case; zero for the initial case.
    pub infectives_before_infection: Vec<u32>,
    pub initial_case: usize,
}

impl Trajectory {
    pub(crate) fn build(population: usize, infection: &[f64], removal: &[f64]) -> Self {
        let n = removal.len();
        let mut events = Vec::with_capacity(2 * n);
        sorted_events(infection, removal, &mut events);
        let mut intervals = Vec::with_capacity(2 * n);
        let mut before = vec![0u32; n];
        let mut x = population as u32;
        let mut y = 0u32;
        let mut t = events[0].time;
        let mut initial_case = events[0].case as usize;
        for (k, ev) in events.iter().enumerate() {
            if ev.time > t && y > 0 {
                intervals.push(Interval {
                    start: t,
                    end: ev.time,
                    susceptibles: x,
                    infectives: y,
                });
            }
            t = ev.time;
            match ev.kind {
                EventKind::Infection => {
                    if k == 0 {
                        initial_case = ev.case as usize;
                    }
                    before[ev.case as usize] = y;
                    x -= 1;
                    y += 1;
                }
                EventKind::Removal => y -= 1,
            }
        }
        Self {
            population,
            intervals,
            infectives_before_infection: before,
            initial_case,
        }
    }

    pub fn start(&self) -> f64 {
        self.intervals.first().map_or(f64::NAN, |iv| iv.start)
    }

    pub fn end(&self) -> f64 {
        self.intervals.last().map_or(f64::NAN, |iv| iv.end)
    }

    /// `∫ X(t) Y(t) dt` by summing over intervals.
    pub fn integral_xy(&self) -> f64 {
        self.intervals
            .iter()
            .map(|iv| iv.len() * f64::from(iv.susceptibles) * f64::from(iv.infectives))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum EventKind {
    // Removals sort first so that a removal at the same instant as an
    // infection is not counted in Y(I-).
    Removal,
    Infection,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub case: u32,
}

pub(crate) fn sorted_events(infection: &[f64], removal: &[f64], buf: &mut Vec<Event>) {
    buf.clear();
    buf.extend(infection.iter().enumerate().map(|(j, &t)| Event {
        time: t,
        kind: EventKind::Infection,
        case: j as u32,
    }));
    buf.extend(removal.iter().enumerate().map(|(j, &t)| Event {
        time: t,
        kind: EventKind::Removal,
        case: j as u32,
    }));
    buf.sort_unstable_by(|a, b| {
        a.time
            .total_cmp(&b.time)
            .then(a.kind.cmp(&b.kind))
            .then(a.case.cmp(&b.case))
    });
}

pub(crate) fn argmin(xs: &[f64]) -> usize {
    xs.iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(Ordering::Equal))
        .map_or(0, |(j, _)| j)
}
