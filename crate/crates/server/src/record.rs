use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use futures_util::{SinkExt, StreamExt};
use tokio_tungstenite::tungstenite::Message as Frame;

use gazelink_core::layout::RenderConfig;
use gazelink_core::protocol::{ErrorCode, Message, Role};
use gazelink_core::recorder::{FsyncPolicy, LogHeader, LogWriter};
use gazelink_core::relay::SessionEvent;
use gazelink_core::ClientId;

/// Joins `session` on a running server as its host and records what it sees
/// until the server closes, `duration` elapses or Ctrl-C. Returns the number
/// of records written.
///
/// A host sees state broadcasts rather than raw gaze updates, so gaze records
/// are derived from edge changes between consecutive broadcasts.
pub async fn record(url: &str, session: &str, out: &Path, duration: Option<Duration>) -> anyhow::Result<usize> {
    let (mut ws, _) = tokio_tungstenite::connect_async(url)
        .await
        .with_context(|| format!("connecting to {url}"))?;
    let join = Message::Join {
        session: session.to_string(),
        role: Role::Host,
    };
    ws.send(Frame::text(join.to_json())).await?;

    let start = Instant::now();
    let now = || start.elapsed().as_secs_f64() * 1000.0;
    let mut writer: Option<LogWriter> = None;
    let mut edges: BTreeMap<ClientId, Option<ClientId>> = BTreeMap::new();
    let mut written = 0usize;
    let deadline = async {
        match duration {
            Some(d) => tokio::time::sleep(d).await,
            None => std::future::pending().await,
        }
    };
    tokio::pin!(deadline);

    loop {
        let frame = tokio::select! {
            f = ws.next() => f,
            _ = &mut deadline => break,
            _ = tokio::signal::ctrl_c() => break,
        };
        let text = match frame {
            Some(Ok(Frame::Text(t))) => t,
            Some(Ok(Frame::Close(_))) | None => break,
            Some(Ok(_)) => continue,
            Some(Err(e)) => return Err(e.into()),
        };
        let msg = Message::from_json(text.as_str())?;
        let t = now();
        let mut events = Vec::new();
        match msg {
            Message::Welcome { members, tick_ms, .. } => {
                let header = LogHeader::new(session, tick_ms, RenderConfig::default().fingerprint());
                writer = Some(LogWriter::create(out, &header, FsyncPolicy::OnClose)?);
                events.extend(members.into_iter().map(|id| SessionEvent::Join {
                    id,
                    role: Role::Participant,
                }));
            }
            Message::Error { code, message } => {
                if code == ErrorCode::HostTaken {
                    bail!("session {session} already has a host");
                }
                bail!("server refused: {message}");
            }
            Message::PeerJoined { id } => events.push(SessionEvent::Join {
                id,
                role: Role::Participant,
            }),
            Message::PeerLeft { id } => {
                edges.remove(&id);
                events.push(SessionEvent::Leave { id });
            }
            Message::State { tick, edges: now_edges, audio } => {
                for e in &now_edges {
                    if edges.get(&e.source) != Some(&e.target) {
                        edges.insert(e.source.clone(), e.target.clone());
                        events.push(SessionEvent::Gaze {
                            seq: 0,
                            source: e.source.clone(),
                            target: e.target.clone(),
                            t,
                        });
                    }
                }
                events.push(SessionEvent::State {
                    tick,
                    edges: now_edges,
                    audio,
                });
            }
            _ => {}
        }
        if let Some(w) = writer.as_mut() {
            for e in events {
                w.append(t, e)?;
                written += 1;
            }
        }
    }
    if let Some(w) = writer {
        w.finish()?;
    }
    let _ = ws.close(None).await;
    Ok(written)
}
