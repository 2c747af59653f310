//! Process configurations and what each process can see.
//!
//! A configuration is a timestamped list of processes, each with a position
//! and a crash flag. Two processes occupy the same location only when their
//! coordinates are bitwise equal — that exact notion drives visibility:
//! a process standing alone at a location sees every *other* occupied
//! location, while co-located processes are mutually invisible.
//!
//! Occupancy *reporting* is separate and deliberately fuzzier: for metrics
//! and human-facing summaries, positions within a relative tolerance of each
//! other are clustered into one reported location. The engine never feeds
//! clustered data back into the dynamics.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{distance, position_cmp, smallest_enclosing_ball, Ball, GeometryError, Point};
use crate::tolerances::{band, MAX_DIMENSION};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("configuration must contain at least one process")]
    Empty,
    #[error("process {id} has dimension {got}, expected {expected}")]
    MixedDimensions { id: usize, got: usize, expected: usize },
    #[error("dimension {0} exceeds the supported maximum of {MAX_DIMENSION}")]
    DimensionTooLarge(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Index of a process within its configuration. Stable across rounds.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct ProcessId(pub usize);

impl std::fmt::Display for ProcessId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "p{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessRecord {
    pub id: ProcessId,
    pub position: Point,
    #[serde(default)]
    pub crashed: bool,
}

/// A synchronous-round snapshot: every process, plus the round counter.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    time: u64,
    dimension: usize,
    records: Vec<ProcessRecord>,
}

/// Serialization mirror of [`Configuration`]; ids are implicit list indices.
#[derive(Serialize, Deserialize)]
struct ConfigurationWire {
    time: u64,
    dimension: usize,
    processes: Vec<ProcessWire>,
}

#[derive(Serialize, Deserialize)]
struct ProcessWire {
    pos: Point,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    crashed: bool,
}

impl Serialize for Configuration {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ConfigurationWire {
            time: self.time,
            dimension: self.dimension,
            processes: self
                .records
                .iter()
                .map(|r| ProcessWire {
                    pos: r.position.clone(),
                    crashed: r.crashed,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = ConfigurationWire::deserialize(deserializer)?;
        let records = wire
            .processes
            .into_iter()
            .enumerate()
            .map(|(i, p)| ProcessRecord {
                id: ProcessId(i),
                position: p.pos,
                crashed: p.crashed,
            })
            .collect();
        Configuration::with_time(wire.time, records).map_err(serde::de::Error::custom)
    }
}

impl Configuration {
    /// A fresh configuration at time zero. Ids are reassigned to list order.
    pub fn new(positions: Vec<Point>) -> Result<Self, ModelError> {
        let records = positions
            .into_iter()
            .enumerate()
            .map(|(i, position)| ProcessRecord {
                id: ProcessId(i),
                position,
                crashed: false,
            })
            .collect();
        Self::with_time(0, records)
    }

    pub fn with_time(time: u64, records: Vec<ProcessRecord>) -> Result<Self, ModelError> {
        let first = records.first().ok_or(ModelError::Empty)?;
        let dimension = first.position.dimension();
        if dimension > MAX_DIMENSION {
            return Err(ModelError::DimensionTooLarge(dimension));
        }
        for r in &records {
            if r.position.dimension() != dimension {
                return Err(ModelError::MixedDimensions {
                    id: r.id.0,
                    got: r.position.dimension(),
                    expected: dimension,
                });
            }
        }
        Ok(Self {
            time,
            dimension,
            records,
        })
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[ProcessRecord] {
        &self.records
    }

    pub fn record(&self, id: ProcessId) -> &ProcessRecord {
        &self.records[id.0]
    }

    pub fn position(&self, id: ProcessId) -> &Point {
        &self.records[id.0].position
    }

    pub fn ids(&self) -> impl Iterator<Item = ProcessId> + '_ {
        (0..self.records.len()).map(ProcessId)
    }

    /// Successor configuration with the given positions (same crash flags).
    pub fn advanced(&self, new_positions: Vec<Point>) -> Result<Self, ModelError> {
        assert_eq!(new_positions.len(), self.records.len());
        let records = self
            .records
            .iter()
            .zip(new_positions)
            .map(|(r, position)| ProcessRecord {
                id: r.id,
                position,
                crashed: r.crashed,
            })
            .collect();
        Self::with_time(self.time + 1, records)
    }

    /// Copy with the listed processes marked crashed.
    pub fn with_crashed(&self, ids: &[ProcessId]) -> Self {
        let mut records = self.records.clone();
        for id in ids {
            records[id.0].crashed = true;
        }
        Self {
            records,
            ..self.clone()
        }
    }

    /// The exactly-distinct occupied locations, lexicographically sorted.
    pub fn distinct_positions(&self) -> Vec<Point> {
        let mut positions: Vec<Point> = Vec::new();
        for r in &self.records {
            if !positions.contains(&r.position) {
                positions.push(r.position.clone());
            }
        }
        positions.sort_by(position_cmp);
        positions
    }

    /// Largest pairwise distance between processes (0 for a single process).
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0_f64;
        for (i, a) in self.records.iter().enumerate() {
            for b in &self.records[i + 1..] {
                best = best.max(distance(&a.position, &b.position));
            }
        }
        best
    }

    /// Smallest enclosing ball over the raw process positions.
    pub fn enclosing_ball(&self) -> Ball {
        let positions: Vec<Point> = self.records.iter().map(|r| r.position.clone()).collect();
        smallest_enclosing_ball(&positions).expect("configuration is nonempty")
    }

    /// All processes within `eps` of a single point (by enclosing radius).
    pub fn is_gathered(&self, eps: f64) -> bool {
        self.enclosing_ball().radius <= eps
    }

    /// What `subject` sees: its distance to the nearest *other* occupied
    /// location and every process whose location lies within the tie band of
    /// that distance. Co-located processes are invisible to each other, so a
    /// process whose location is occupied only by itself (and co-located
    /// peers) still looks outward. Returns `None` when every process shares
    /// one location (nothing else to see).
    pub fn neighbor_view(&self, subject: ProcessId, eps_tie: f64) -> Option<NeighborView> {
        let own = &self.records[subject.0].position;
        let mut nearest = f64::INFINITY;
        for r in &self.records {
            if r.position == *own {
                continue; // same location: invisible
            }
            let d = distance(own, &r.position);
            if d < nearest {
                nearest = d;
            }
        }
        if !nearest.is_finite() {
            return None;
        }
        let tie = band(eps_tie, nearest);
        let mut candidates: Vec<ProcessId> = self
            .records
            .iter()
            .filter(|r| r.position != *own && distance(own, &r.position) <= nearest + tie)
            .map(|r| r.id)
            .collect();
        candidates.sort_by(|&a, &b| {
            position_cmp(&self.records[a.0].position, &self.records[b.0].position)
                .then(a.0.cmp(&b.0))
        });
        Some(NeighborView {
            subject,
            distance: nearest,
            candidates,
        })
    }
}

/// The closest-neighbor observation of one process for one round.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborView {
    pub subject: ProcessId,
    /// Distance to the nearest distinct occupied location.
    pub distance: f64,
    /// Processes within the tie band of that distance, sorted by
    /// (position, id). Never empty.
    pub candidates: Vec<ProcessId>,
}

impl NeighborView {
    /// Ids of candidates standing at exactly-distinct locations, one
    /// representative per location (the lowest id there), in position order.
    pub fn distinct_candidate_positions(&self, config: &Configuration) -> Vec<ProcessId> {
        let mut reps: Vec<ProcessId> = Vec::new();
        for &c in &self.candidates {
            let pos = config.position(c);
            if !reps.iter().any(|&r| config.position(r) == pos) {
                reps.push(c);
            }
        }
        reps
    }
}

/// One reported location: a representative position and the processes
/// clustered onto it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupancyEntry {
    pub representative: Point,
    pub members: Vec<ProcessId>,
}

/// Clustered occupancy report. Positions within `eps_tie`, relative to the
/// configuration diameter, merge into one entry; the representative is the
/// lexicographically least member position. Order is lexicographic by
/// representative.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Occupancy {
    pub entries: Vec<OccupancyEntry>,
}

impl Occupancy {
    pub fn of(config: &Configuration, eps_tie: f64) -> Self {
        let n = config.len();
        let threshold = band(eps_tie, config.diameter());
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            if parent[i] != i {
                let root = find(parent, parent[i]);
                parent[i] = root;
            }
            parent[i]
        }
        for i in 0..n {
            for j in i + 1..n {
                let d = distance(config.position(ProcessId(i)), config.position(ProcessId(j)));
                if d <= threshold {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri] = rj;
                    }
                }
            }
        }
        let mut groups: Vec<Vec<ProcessId>> = vec![Vec::new(); n];
        for i in 0..n {
            let root = find(&mut parent, i);
            groups[root].push(ProcessId(i));
        }
        let mut entries: Vec<OccupancyEntry> = groups
            .into_iter()
            .filter(|g| !g.is_empty())
            .map(|members| {
                let representative = members
                    .iter()
                    .map(|&m| config.position(m))
                    .min_by(|a, b| position_cmp(a, b))
                    .expect("group is nonempty")
                    .clone();
                OccupancyEntry {
                    representative,
                    members,
                }
            })
            .collect();
        entries.sort_by(|a, b| position_cmp(&a.representative, &b.representative));
        Self { entries }
    }

    pub fn location_count(&self) -> usize {
        self.entries.len()
    }

    /// Smallest and largest distances between reported locations, `None`
    /// when only one location is reported.
    pub fn distance_extremes(&self) -> Option<(f64, f64)> {
        if self.entries.len() < 2 {
            return None;
        }
        let mut min = f64::INFINITY;
        let mut max = 0.0_f64;
        for (i, a) in self.entries.iter().enumerate() {
            for b in &self.entries[i + 1..] {
                let d = distance(&a.representative, &b.representative);
                min = min.min(d);
                max = max.max(d);
            }
        }
        Some((min, max))
    }
}

/// Smallest and largest pairwise distances between *exactly* distinct
/// occupied locations; `None` when all processes share one location.
pub fn distinct_distance_extremes(config: &Configuration) -> Option<(f64, f64)> {
    let positions = config.distinct_positions();
    if positions.len() < 2 {
        return None;
    }
    let mut min = f64::INFINITY;
    let mut max = 0.0_f64;
    for (i, a) in positions.iter().enumerate() {
        for b in &positions[i + 1..] {
            let d = distance(a, b);
            min = min.min(d);
            max = max.max(d);
        }
    }
    Some((min, max))
}

/// Deterministic rank of every process: sort by (position, id), rank by
/// index. Co-located processes get distinct consecutive ranks, so scripts
/// can address each of them individually.
pub fn process_ranks(config: &Configuration) -> Vec<usize> {
    let mut order: Vec<usize> = (0..config.len()).collect();
    order.sort_by(|&a, &b| {
        position_cmp(config.position(ProcessId(a)), config.position(ProcessId(b)))
            .then(a.cmp(&b))
    });
    let mut ranks = vec![0; config.len()];
    for (rank, &idx) in order.iter().enumerate() {
        ranks[idx] = rank;
    }
    ranks
}

/// Total order on process records by (position, id); useful for canonical
/// traversal.
pub fn record_cmp(config: &Configuration, a: ProcessId, b: ProcessId) -> Ordering {
    position_cmp(config.position(a), config.position(b)).then(a.0.cmp(&b.0))
}
