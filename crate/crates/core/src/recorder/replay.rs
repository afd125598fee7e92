use std::io::BufRead;

use super::log::{parse_header, parse_record};
use super::{EventLog, RecorderError};
use crate::layout::{RenderConfig, RenderFrame, Renderer};
use crate::protocol::Role;
use crate::relay::{snapshot_at, SessionEvent};
use crate::ClientId;

/// Re-renders a recorded session from one participant's point of view.
///
/// Frames come out one per recorded tick in which the viewer was present.
/// A malformed line ends the stream with [`RecorderError::Corrupt`].
pub struct Replay<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
    tick_ms: u64,
    members: Vec<ClientId>,
    renderer: Renderer,
    done: bool,
}

/// Opens a replay over a log reader, checking that `config` matches the one
/// the session was recorded with.
pub fn replay<R: BufRead>(reader: R, viewer: ClientId, config: RenderConfig) -> Result<Replay<R>, RecorderError> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => parse_header(&line?)?,
        None => {
            return Err(RecorderError::Corrupt {
                line: 1,
                reason: "empty log".into(),
            })
        }
    };
    let current = config.fingerprint();
    if header.config_hash != current {
        return Err(RecorderError::ConfigMismatch {
            recorded: header.config_hash,
            current,
        });
    }
    Ok(Replay {
        lines,
        line_no: 1,
        tick_ms: header.tick_ms,
        members: Vec::new(),
        renderer: Renderer::new(viewer, config),
        done: false,
    })
}

/// Replays an in-memory log to completion.
pub fn replay_log(log: &EventLog, viewer: ClientId, config: RenderConfig) -> Result<Vec<RenderFrame>, RecorderError> {
    let text = log.to_ndjson();
    replay(text.as_bytes(), viewer, config)?.collect()
}

impl<R: BufRead> Replay<R> {
    fn apply(&mut self, event: SessionEvent) -> Result<Option<RenderFrame>, RecorderError> {
        match event {
            SessionEvent::Join {
                id,
                role: Role::Participant,
            } => {
                if !self.members.contains(&id) {
                    self.members.push(id);
                }
            }
            SessionEvent::Leave { id } => self.members.retain(|m| m != &id),
            SessionEvent::State { tick, edges, audio } => {
                let snap = snapshot_at(tick, self.tick_ms, &self.members, &edges, &audio);
                return Ok(self.renderer.render(&snap)?);
            }
            _ => {}
        }
        Ok(None)
    }
}

impl<R: BufRead> Iterator for Replay<R> {
    type Item = Result<RenderFrame, RecorderError>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            let result = parse_record(&line, self.line_no).and_then(|rec| self.apply(rec.event));
            match result {
                Ok(Some(frame)) => return Some(Ok(frame)),
                Ok(None) => {}
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            }
        }
        None
    }
}
