use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime};

use super::{StateSpace, Trace};
use crate::{Error, Result};

/// Delimiter of the line-oriented trace log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogFormat {
    /// `user_id<TAB>event_name[<TAB>timestamp]`
    #[default]
    Tsv,
    /// `user_id,event_name[,timestamp]`
    Csv,
}

impl LogFormat {
    fn delimiter(self) -> u8 {
        match self {
            LogFormat::Tsv => b'\t',
            LogFormat::Csv => b',',
        }
    }
}

impl FromStr for LogFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(LogFormat::Tsv),
            "csv" => Ok(LogFormat::Csv),
            other => Err(Error::InvalidArgument(format!("unknown log format `{other}`"))),
        }
    }
}

/// What to do with event names that are not in the mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnmappedPolicy {
    #[default]
    Strict,
    Skip,
}

impl FromStr for UnmappedPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(UnmappedPolicy::Strict),
            "skip" => Ok(UnmappedPolicy::Skip),
            other => Err(Error::InvalidArgument(format!("unknown unmapped-event policy `{other}`"))),
        }
    }
}

/// Event name to 1-based action state.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventMapping {
    map: BTreeMap<String, usize>,
}

impl EventMapping {
    pub fn new<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (name, s) in pairs {
            let name = name.into();
            if s == 0 {
                return Err(Error::InvalidArgument(format!(
                    "event `{name}` mapped to the dummy state"
                )));
            }
            map.insert(name, s);
        }
        Ok(Self { map })
    }

    /// Maps every action state's name to its index.
    pub fn from_space(space: &StateSpace) -> Self {
        let map = space
            .action_names()
            .enumerate()
            .map(|(i, name)| (name.to_string(), i + 1))
            .collect();
        Self { map }
    }

    pub fn get(&self, event: &str) -> Option<usize> {
        self.map.get(event).copied()
    }
}

fn parse_timestamp(s: &str) -> bool {
    DateTime::parse_from_rfc3339(s).is_ok()
        || NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f").is_ok()
        || NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S%.f").is_ok()
}

/// Reads a trace log into one [`Trace`] per user.
///
/// Users appear in order of first occurrence and each trace preserves the
/// input order of that user's events. A leading `user_id,event_name` header
/// is skipped. Timestamps are validated but otherwise ignored.
pub fn ingest_traces<R: Read>(
    source: R,
    format: LogFormat,
    mapping: &EventMapping,
    policy: UnmappedPolicy,
) -> Result<Vec<Trace>> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source);

    let mut order: Vec<String> = Vec::new();
    let mut events: HashMap<String, Vec<usize>> = HashMap::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::MalformedLine {
                line,
                msg: e.to_string(),
            }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if first {
            first = false;
            if record.get(0) == Some("user_id") && record.get(1) == Some("event_name") {
                continue;
            }
        }
        if record.len() < 2 || record.len() > 3 {
            return Err(Error::MalformedLine {
                line,
                msg: format!("expected 2 or 3 fields, found {}", record.len()),
            });
        }
        let user = &record[0];
        let event = &record[1];
        if user.is_empty() || event.is_empty() {
            return Err(Error::MalformedLine {
                line,
                msg: "empty user id or event name".into(),
            });
        }
        if let Some(ts) = record.get(2) {
            if !parse_timestamp(ts) {
                return Err(Error::MalformedLine {
                    line,
                    msg: format!("bad timestamp `{ts}`"),
                });
            }
        }
        let state = match (mapping.get(event), policy) {
            (Some(s), _) => s,
            (None, UnmappedPolicy::Skip) => continue,
            (None, UnmappedPolicy::Strict) => {
                return Err(Error::UnmappedEvent {
                    line,
                    event: event.to_string(),
                })
            }
        };
        events
            .entry(user.to_string())
            .or_insert_with(|| {
                order.push(user.to_string());
                Vec::new()
            })
            .push(state);
    }
    order
        .into_iter()
        .map(|user| {
            let ev = events.remove(&user).unwrap_or_default();
            Trace::new(user, ev)
        })
        .collect()
}

/// Writes traces as a log that [`ingest_traces`] reads back: a
/// `user_id`/`event_name` header, then one event per line in trace order.
pub fn write_traces<W: Write>(
    sink: W,
    traces: &[Trace],
    space: &StateSpace,
    format: LogFormat,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(format.delimiter())
        .from_writer(sink);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["user_id", "event_name"]).map_err(io)?;
    for t in traces {
        for &s in t.events() {
            let index = space
                .action_index(s)
                .ok_or_else(|| Error::InvalidArgument(format!("state {s} outside the space")))?;
            let name = space.name(index).expect("index in range");
            w.write_record([t.user_id.as_str(), name]).map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}
