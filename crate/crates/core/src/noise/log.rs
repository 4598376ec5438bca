//! Device timestamp logs.
//!
//! One event per line, comma separated, with a fixed header:
//!
//! ```text
//! node,dir,peer,msg,ticks
//! 4,tx,6,0,1099511527776
//! 6,rx,4,0,512034
//! ```
//!
//! `dir` is `tx` or `rx`, `peer` names the other end of the message, `msg`
//! is the message index shared by the transmission and its receptions, and
//! `ticks` is the raw 40-bit counter value. Events of one node must appear in
//! the order they happened.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::time::{ticks_to_timespan, TimeSpan, TICK_COUNTER_BITS};

pub const LOG_HEADER: &str = "node,dir,peer,msg,ticks";

/// Counter modulus.
pub const WRAP_TICKS: u64 = 1 << TICK_COUNTER_BITS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Tx,
    Rx,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Tx => "tx",
            Direction::Rx => "rx",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEvent {
    pub node: String,
    pub direction: Direction,
    pub peer: String,
    pub message_index: u64,
    pub raw_ticks: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TimestampLog {
    pub events: Vec<LogEvent>,
}

impl TimestampLog {
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((i, line)) => {
                    let line = line?;
                    let t = line.trim();
                    if t.is_empty() || t.starts_with('#') {
                        continue;
                    }
                    break (i + 1, t.to_string());
                }
                None => return Err(Error::LogFormat { line: 0, reason: "empty log".into() }),
            }
        };
        if header.1 != LOG_HEADER {
            return Err(Error::LogFormat {
                line: header.0,
                reason: format!("expected header {LOG_HEADER:?}, found {:?}", header.1),
            });
        }

        let mut events = Vec::new();
        for (i, line) in lines {
            let line = line?;
            let line_no = i + 1;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let bad = |reason: String| Error::LogFormat { line: line_no, reason };
            let fields: Vec<&str> = t.split(',').map(str::trim).collect();
            let [node, dir, peer, msg, ticks] = fields[..] else {
                return Err(bad(format!("expected 5 fields, found {}", fields.len())));
            };
            let direction = match dir {
                "tx" => Direction::Tx,
                "rx" => Direction::Rx,
                other => return Err(bad(format!("direction must be tx or rx, found {other:?}"))),
            };
            let message_index = msg.parse().map_err(|_| bad(format!("bad message index {msg:?}")))?;
            let raw_ticks: u64 = ticks.parse().map_err(|_| bad(format!("bad tick value {ticks:?}")))?;
            if raw_ticks >= WRAP_TICKS {
                return Err(bad(format!("tick value {raw_ticks} exceeds 40 bits")));
            }
            events.push(LogEvent {
                node: node.to_string(),
                direction,
                peer: peer.to_string(),
                message_index,
                raw_ticks,
            });
        }
        Ok(TimestampLog { events })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::parse(std::io::BufReader::new(file))
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{LOG_HEADER}")?;
        for e in &self.events {
            writeln!(w, "{},{},{},{},{}", e.node, e.direction.as_str(), e.peer, e.message_index, e.raw_ticks)?;
        }
        Ok(())
    }
}

/// An event with its counter unwrapped and converted to device time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedEvent {
    pub node: String,
    pub direction: Direction,
    pub peer: String,
    pub message_index: u64,
    pub ticks: u64,
    pub time: TimeSpan,
}

/// Unwraps each node's 40-bit counter into a monotonic series.
///
/// The counter is assumed to have wrapped whenever it runs backwards; the
/// forward gap between consecutive events of a node (modulo 2^40) must stay
/// below half the wrap period, about 8.6 s, or the wrap count is ambiguous.
/// Each node's first event is its time origin offset, i.e. times are the raw
/// first value plus accumulated gaps.
pub fn unwrap_ticks(log: &TimestampLog) -> Result<Vec<TimedEvent>> {
    let mut last: HashMap<&str, u64> = HashMap::new();
    let mut out = Vec::with_capacity(log.events.len());
    for e in &log.events {
        let ticks = match last.get(e.node.as_str()) {
            None => e.raw_ticks,
            Some(&prev) => {
                let gap = (e.raw_ticks + WRAP_TICKS - prev % WRAP_TICKS) % WRAP_TICKS;
                if gap >= WRAP_TICKS / 2 {
                    return Err(Error::WrapAmbiguity { node: e.node.clone(), gap });
                }
                prev + gap
            }
        };
        last.insert(e.node.as_str(), ticks);
        out.push(TimedEvent {
            node: e.node.clone(),
            direction: e.direction,
            peer: e.peer.clone(),
            message_index: e.message_index,
            ticks,
            time: ticks_to_timespan(ticks),
        });
    }
    Ok(out)
}

/// Transmission and reception times of every message on the directed link
/// `tx_node → rx_node`, matched by message index and ordered by it.
pub fn matched_pairs(events: &[TimedEvent], tx_node: &str, rx_node: &str) -> Vec<(TimeSpan, TimeSpan)> {
    let mut tx: HashMap<u64, TimeSpan> = HashMap::new();
    for e in events {
        if e.direction == Direction::Tx && e.node == tx_node && e.peer == rx_node {
            tx.insert(e.message_index, e.time);
        }
    }
    let mut pairs: Vec<(u64, TimeSpan, TimeSpan)> = events
        .iter()
        .filter(|e| e.direction == Direction::Rx && e.node == rx_node && e.peer == tx_node)
        .filter_map(|e| tx.get(&e.message_index).map(|&t| (e.message_index, t, e.time)))
        .collect();
    pairs.sort_by_key(|p| p.0);
    pairs.into_iter().map(|(_, t, r)| (t, r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_of(node_ticks: &[u64]) -> TimestampLog {
        TimestampLog {
            events: node_ticks
                .iter()
                .enumerate()
                .map(|(i, &t)| LogEvent {
                    node: "1".into(),
                    direction: Direction::Tx,
                    peer: "2".into(),
                    message_index: i as u64,
                    raw_ticks: t,
                })
                .collect(),
        }
    }

    fn ticks(events: &[TimedEvent]) -> Vec<u64> {
        events.iter().map(|e| e.ticks).collect()
    }

    #[test]
    fn unwrap_without_wrap() {
        let ev = unwrap_ticks(&log_of(&[100, 200, 300])).unwrap();
        assert_eq!(ticks(&ev), vec![100, 200, 300]);
    }

    #[test]
    fn unwrap_single_wrap() {
        let ev = unwrap_ticks(&log_of(&[WRAP_TICKS - 10, 5])).unwrap();
        assert_eq!(ticks(&ev), vec![WRAP_TICKS - 10, WRAP_TICKS + 5]);
    }

    #[test]
    fn unwrap_rejects_ambiguous_gap() {
        let err = unwrap_ticks(&log_of(&[0, WRAP_TICKS / 2])).unwrap_err();
        assert!(matches!(err, Error::WrapAmbiguity { .. }));
        assert!(unwrap_ticks(&log_of(&[0, WRAP_TICKS / 2 - 1])).is_ok());
    }

    #[test]
    fn unwrap_tracks_nodes_independently() {
        let mut log = log_of(&[WRAP_TICKS - 5, 3]);
        log.events.insert(1, LogEvent { node: "9".into(), raw_ticks: 7, ..log.events[0].clone() });
        let ev = unwrap_ticks(&log).unwrap();
        assert_eq!(ticks(&ev), vec![WRAP_TICKS - 5, 7, WRAP_TICKS + 3]);
    }

    #[test]
    fn parse_and_write() {
        let text = "# comment\nnode,dir,peer,msg,ticks\n4,tx,6,0,100\n6, rx ,4,0,1099511627775\n\n";
        let log = TimestampLog::parse(text.as_bytes()).unwrap();
        assert_eq!(log.events.len(), 2);
        assert_eq!(log.events[1].direction, Direction::Rx);
        assert_eq!(log.events[1].raw_ticks, WRAP_TICKS - 1);

        let mut buf = Vec::new();
        log.write(&mut buf).unwrap();
        assert_eq!(TimestampLog::parse(buf.as_slice()).unwrap(), log);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("node,dir,peer,msg\n", 1),
            ("node,dir,peer,msg,ticks\n4,tx,6,0\n", 2),
            ("node,dir,peer,msg,ticks\n4,tx,6,0,1\n4,up,6,1,2\n", 3),
            ("node,dir,peer,msg,ticks\n4,tx,6,x,1\n", 2),
            ("node,dir,peer,msg,ticks\n4,tx,6,0,1099511627776\n", 2),
        ];
        for (text, line) in cases {
            match TimestampLog::parse(text.as_bytes()) {
                Err(Error::LogFormat { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn pairs_match_by_message_index() {
        let text = "node,dir,peer,msg,ticks\n\
                    a,tx,b,1,1000\n\
                    b,rx,a,1,5000\n\
                    a,tx,b,2,2000\n\
                    a,tx,c,3,2500\n\
                    c,rx,a,3,9000\n\
                    b,rx,a,2,6000\n\
                    b,tx,a,4,7000\n";
        let ev = unwrap_ticks(&TimestampLog::parse(text.as_bytes()).unwrap()).unwrap();
        let pairs = matched_pairs(&ev, "a", "b");
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0], (ticks_to_timespan(1000), ticks_to_timespan(5000)));
        assert_eq!(pairs[1], (ticks_to_timespan(2000), ticks_to_timespan(6000)));
        assert!(matched_pairs(&ev, "b", "a").is_empty());
    }
}
