//! Canonical tab-separated input formats.
//!
//! * follow edges: `follower<TAB>followee`, `#` starts a comment line
//! * cascade events: `cascade_id<TAB>user_id<TAB>timestamp`, integer seconds
//!
//! Blank lines are ignored in both. Lines with the wrong number of fields are
//! counted as malformed and skipped, or rejected outright in strict mode.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

/// Parsed records plus the count of malformed lines that were skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<T> {
    pub items: Vec<T>,
    pub malformed_lines: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub user: String,
    pub timestamp: i64,
}

/// All posts/reposts of one tweet or topic, one event per user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeLog {
    id: String,
    events: Vec<Event>,
}

impl CascadeLog {
    /// Keeps each user's earliest event and orders events by
    /// `(timestamp, user)`.
    pub fn new(id: impl Into<String>, events: impl IntoIterator<Item = Event>) -> Self {
        let mut earliest: HashMap<String, i64> = HashMap::new();
        for Event { user, timestamp } in events {
            earliest
                .entry(user)
                .and_modify(|t| *t = (*t).min(timestamp))
                .or_insert(timestamp);
        }
        let mut events: Vec<Event> = earliest
            .into_iter()
            .map(|(user, timestamp)| Event { user, timestamp })
            .collect();
        events.sort_by(|a, b| (a.timestamp, &a.user).cmp(&(b.timestamp, &b.user)));
        CascadeLog {
            id: id.into(),
            events,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn size(&self) -> usize {
        self.events.len()
    }

    pub fn users(&self) -> impl Iterator<Item = &str> {
        self.events.iter().map(|e| e.user.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetStats {
    /// Distinct users over all cascades.
    pub user_count: usize,
    pub link_count: usize,
    pub cascade_count: usize,
    pub mean_cascade_size: f64,
    /// Nodes of the follower network, reported for coverage.
    pub network_node_count: usize,
    /// Cascade users that do not occur in the follower network.
    pub users_missing_from_network: usize,
}

fn split_fields(line: &str) -> Vec<&str> {
    line.trim_end_matches(['\r', '\n']).split('\t').collect()
}

fn reject_or_count(
    strict: bool,
    malformed: &mut usize,
    line_no: usize,
    message: impl FnOnce() -> String,
) -> Result<()> {
    if strict {
        return Err(Error::Parse {
            line: line_no,
            message: message(),
        });
    }
    *malformed += 1;
    Ok(())
}

pub fn load_follow_edges<R: BufRead>(reader: R, strict: bool) -> Result<Loaded<(String, String)>> {
    let mut items = Vec::new();
    let mut malformed = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match split_fields(trimmed).as_slice() {
            [a, b] if !a.is_empty() && !b.is_empty() => {
                items.push((a.to_string(), b.to_string()))
            }
            fields => reject_or_count(strict, &mut malformed, i + 1, || {
                format!("expected follower<TAB>followee, got {} field(s)", fields.len())
            })?,
        }
    }
    if malformed > 0 {
        log::warn!("skipped {malformed} malformed follow-edge line(s)");
    }
    Ok(Loaded {
        items,
        malformed_lines: malformed,
    })
}

/// Groups events by cascade id. Cascades come back sorted by id.
pub fn load_cascades<R: BufRead>(reader: R, strict: bool) -> Result<Loaded<CascadeLog>> {
    let mut groups: BTreeMap<String, Vec<Event>> = BTreeMap::new();
    let mut malformed = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match split_fields(trimmed).as_slice() {
            [cascade, user, ts] if !cascade.is_empty() && !user.is_empty() => {
                let timestamp = ts.trim().parse::<i64>().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("timestamp {ts:?} is not an integer"),
                })?;
                groups.entry(cascade.to_string()).or_default().push(Event {
                    user: user.to_string(),
                    timestamp,
                });
            }
            fields => reject_or_count(strict, &mut malformed, i + 1, || {
                format!(
                    "expected cascade_id<TAB>user_id<TAB>timestamp, got {} field(s)",
                    fields.len()
                )
            })?,
        }
    }
    if malformed > 0 {
        log::warn!("skipped {malformed} malformed cascade line(s)");
    }
    Ok(Loaded {
        items: groups
            .into_iter()
            .map(|(id, events)| CascadeLog::new(id, events))
            .collect(),
        malformed_lines: malformed,
    })
}

pub fn write_follow_edges<W: Write>(mut w: W, edges: &[(String, String)]) -> std::io::Result<()> {
    for (a, b) in edges {
        writeln!(w, "{a}\t{b}")?;
    }
    Ok(())
}

pub fn write_cascades<W: Write>(mut w: W, logs: &[CascadeLog]) -> std::io::Result<()> {
    for log in logs {
        for e in log.events() {
            writeln!(w, "{}\t{}\t{}", log.id(), e.user, e.timestamp)?;
        }
    }
    Ok(())
}

pub fn filter_cascades(mut logs: Vec<CascadeLog>, min_size: usize) -> Vec<CascadeLog> {
    logs.retain(|l| l.size() >= min_size);
    logs
}

pub fn compute_stats(network: &DirectedGraph, logs: &[CascadeLog]) -> DatasetStats {
    let users: HashSet<&str> = logs.iter().flat_map(|l| l.users()).collect();
    let total: usize = logs.iter().map(CascadeLog::size).sum();
    let mean = if logs.is_empty() {
        0.0
    } else {
        total as f64 / logs.len() as f64
    };
    DatasetStats {
        user_count: users.len(),
        link_count: network.edge_count(),
        cascade_count: logs.len(),
        mean_cascade_size: mean,
        network_node_count: network.node_count(),
        users_missing_from_network: users
            .iter()
            .filter(|u| network.node_id(u).is_none())
            .count(),
    }
}
