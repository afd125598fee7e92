use std::fs::File;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RecorderError;
use crate::relay::SessionEvent;
use crate::Millis;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub schema: u32,
    pub session: String,
    pub tick_ms: u64,
    /// [`crate::layout::RenderConfig::fingerprint`] of the live session.
    pub config_hash: String,
}

impl LogHeader {
    pub fn new(session: impl Into<String>, tick_ms: u64, config_hash: impl Into<String>) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            session: session.into(),
            tick_ms,
            config_hash: config_hash.into(),
        }
    }
}

/// One line of the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    /// Milliseconds since the session epoch.
    pub wall_t: Millis,
    /// Arrival order, starting at 0.
    pub seq: u64,
    #[serde(flatten)]
    pub event: SessionEvent,
}

impl EventRecord {
    pub fn kind(&self) -> &'static str {
        match self.event {
            SessionEvent::Join { .. } => "join",
            SessionEvent::Leave { .. } => "leave",
            SessionEvent::Gaze { .. } => "gaze",
            SessionEvent::Audio { .. } => "audio",
            SessionEvent::State { .. } => "state",
            SessionEvent::Observe { .. } => "observe",
        }
    }
}

/// In-memory log.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub header: LogHeader,
    records: Vec<EventRecord>,
}

impl EventLog {
    pub fn new(header: LogHeader) -> Self {
        Self {
            header,
            records: Vec::new(),
        }
    }

    pub fn records(&self) -> &[EventRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last_t(&self) -> Option<Millis> {
        self.records.last().map(|r| r.wall_t)
    }

    pub fn append(&mut self, wall_t: Millis, event: SessionEvent) -> Result<&EventRecord, RecorderError> {
        if let Some(last) = self.last_t() {
            if wall_t < last {
                return Err(RecorderError::TimestampRegression { last, got: wall_t });
            }
        }
        let seq = self.records.len() as u64;
        self.records.push(EventRecord { wall_t, seq, event });
        Ok(self.records.last().expect("just pushed"))
    }

    pub fn extend(&mut self, events: impl IntoIterator<Item = (Millis, SessionEvent)>) -> Result<(), RecorderError> {
        for (t, e) in events {
            self.append(t, e)?;
        }
        Ok(())
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<(), RecorderError> {
        serde_json::to_writer(&mut w, &self.header).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
        for r in &self.records {
            serde_json::to_writer(&mut w, r).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_ndjson(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}

/// Reads a whole log, failing on the first malformed line.
pub fn read_log(r: impl BufRead) -> Result<EventLog, RecorderError> {
    let mut lines = r.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => parse_header(&line?)?,
        None => {
            return Err(RecorderError::Corrupt {
                line: 1,
                reason: "empty log".into(),
            })
        }
    };
    let mut log = EventLog::new(header);
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = parse_record(&line, i + 1)?;
        if let Some(last) = log.last_t() {
            if rec.wall_t < last {
                return Err(RecorderError::Corrupt {
                    line: i + 1,
                    reason: format!("timestamp {} precedes {last}", rec.wall_t),
                });
            }
        }
        log.records.push(rec);
    }
    Ok(log)
}

pub(super) fn parse_header(line: &str) -> Result<LogHeader, RecorderError> {
    let header: LogHeader = serde_json::from_str(line).map_err(|e| RecorderError::Corrupt {
        line: 1,
        reason: format!("bad header: {e}"),
    })?;
    if header.schema != SCHEMA_VERSION {
        return Err(RecorderError::Corrupt {
            line: 1,
            reason: format!("unsupported schema {}", header.schema),
        });
    }
    Ok(header)
}

pub(super) fn parse_record(line: &str, line_no: usize) -> Result<EventRecord, RecorderError> {
    serde_json::from_str(line).map_err(|e| RecorderError::Corrupt {
        line: line_no,
        reason: e.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FsyncPolicy {
    /// Leave durability to the OS.
    Never,
    EveryRecord,
    /// Sync once when the writer is finished.
    #[default]
    OnClose,
}

/// Streams records to a file as they happen.
pub struct LogWriter {
    out: BufWriter<File>,
    policy: FsyncPolicy,
    last_t: Option<Millis>,
    next_seq: u64,
}

impl LogWriter {
    pub fn create(path: impl AsRef<Path>, header: &LogHeader, policy: FsyncPolicy) -> Result<Self, RecorderError> {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut out, header).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
        Ok(Self {
            out,
            policy,
            last_t: None,
            next_seq: 0,
        })
    }

    pub fn append(&mut self, wall_t: Millis, event: SessionEvent) -> Result<(), RecorderError> {
        if let Some(last) = self.last_t {
            if wall_t < last {
                return Err(RecorderError::TimestampRegression { last, got: wall_t });
            }
        }
        let rec = EventRecord {
            wall_t,
            seq: self.next_seq,
            event,
        };
        serde_json::to_writer(&mut self.out, &rec).map_err(std::io::Error::from)?;
        self.out.write_all(b"\n")?;
        self.last_t = Some(wall_t);
        self.next_seq += 1;
        if self.policy == FsyncPolicy::EveryRecord {
            self.out.flush()?;
            self.out.get_ref().sync_data()?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), RecorderError> {
        self.out.flush()?;
        if self.policy != FsyncPolicy::Never {
            self.out.get_ref().sync_all()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::protocol::{EdgeEntry, Role};
    use crate::ClientId;

    fn header() -> LogHeader {
        LogHeader::new("s", 16, "abc")
    }

    fn join(id: &str) -> SessionEvent {
        SessionEvent::Join {
            id: id.into(),
            role: Role::Participant,
        }
    }

    #[test]
    fn append_keeps_order() {
        let mut log = EventLog::new(header());
        log.append(0.0, join("c1")).unwrap();
        assert_eq!(log.len(), 1);
        log.append(5.0, join("c2")).unwrap();
        assert_eq!(log.records()[1].seq, 1);
        assert!(matches!(
            log.append(4.0, join("c3")),
            Err(RecorderError::TimestampRegression { .. })
        ));
        assert_eq!(log.len(), 2);
    }

    #[test]
    fn line_format() {
        let mut log = EventLog::new(header());
        log.append(
            32.0,
            SessionEvent::State {
                tick: 2,
                edges: vec![EdgeEntry {
                    source: "c1".into(),
                    target: None,
                }],
                audio: vec![],
            },
        )
        .unwrap();
        let text = log.to_ndjson();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], r#"{"schema":1,"session":"s","tick_ms":16,"config_hash":"abc"}"#);
        assert_eq!(
            lines[1],
            r#"{"wall_t":32.0,"seq":0,"kind":"state","payload":{"tick":2,"edges":[{"source":"c1","target":null}],"audio":[]}}"#
        );
    }

    #[test]
    fn file_writer_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.ndjson");
        let mut w = LogWriter::create(&path, &header(), FsyncPolicy::EveryRecord).unwrap();
        w.append(0.0, join("c1")).unwrap();
        w.append(1.0, SessionEvent::Leave { id: "c1".into() }).unwrap();
        assert!(w.append(0.5, join("c2")).is_err());
        w.finish().unwrap();
        let log = read_log(std::io::BufReader::new(File::open(&path).unwrap())).unwrap();
        assert_eq!(log.len(), 2);
        assert_eq!(log.records()[1].kind(), "leave");
    }

    #[test]
    fn truncated_line_is_reported() {
        let mut log = EventLog::new(header());
        log.append(0.0, join("c1")).unwrap();
        log.append(1.0, join("c2")).unwrap();
        let text = log.to_ndjson();
        let cut = &text[..text.len() - 10];
        match read_log(cut.as_bytes()) {
            Err(RecorderError::Corrupt { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_log("".as_bytes()), Err(RecorderError::Corrupt { line: 1, .. })));
    }

    fn arb_event() -> impl Strategy<Value = SessionEvent> {
        let id = (1u8..9).prop_map(|i| ClientId::new(format!("c{i}")));
        prop_oneof![
            id.clone().prop_map(|id| SessionEvent::Join { id, role: Role::Participant }),
            id.clone().prop_map(|id| SessionEvent::Leave { id }),
            (any::<u64>(), id.clone(), prop::option::of(id.clone()), 0.0f64..1e7).prop_map(|(seq, source, target, t)| {
                SessionEvent::Gaze { seq, source, target, t }
            }),
            (any::<u64>(), id.clone(), 0.0f64..=1.0).prop_map(|(seq, source, level)| SessionEvent::Audio {
                seq,
                source,
                level
            }),
        ]
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(
            steps in prop::collection::vec((0.0f64..50.0, arb_event()), 0..80)
        ) {
            let mut log = EventLog::new(header());
            let mut t = 0.0;
            for (dt, e) in steps {
                t += dt;
                log.append(t, e).unwrap();
            }
            let text = log.to_ndjson();
            let back = read_log(text.as_bytes()).unwrap();
            prop_assert_eq!(&back, &log);
            prop_assert_eq!(back.to_ndjson(), text);
        }
    }
}
