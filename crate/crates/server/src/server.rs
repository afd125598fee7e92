use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use futures_util::{SinkExt, StreamExt};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{mpsc, oneshot};
use tokio::time::MissedTickBehavior;
use tokio_tungstenite::tungstenite::Message as Frame;

use gazelink_core::protocol::{ErrorCode, Message, Role};
use gazelink_core::recorder::{FsyncPolicy, LogHeader, LogWriter};
use gazelink_core::relay::{Outgoing, Session, SessionConfig, DEFAULT_CAPACITY, DEFAULT_TICK_MS};
use gazelink_core::ClientId;

/// Messages queued per connection before a tick counts as undeliverable.
const OUTBOUND_QUEUE: usize = 64;

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub tick_ms: u64,
    pub capacity: usize,
    /// Directory receiving one `<session>.ndjson` log per session.
    pub record_dir: Option<PathBuf>,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self {
            tick_ms: DEFAULT_TICK_MS,
            capacity: DEFAULT_CAPACITY,
            record_dir: None,
        }
    }
}

enum Command {
    Join {
        role: Role,
        tx: mpsc::Sender<Message>,
        reply: oneshot::Sender<Result<ClientId, Message>>,
    },
    Inbound {
        id: ClientId,
        msg: Message,
    },
    /// Sends a message to one connection without touching session state.
    Notify {
        id: ClientId,
        msg: Message,
    },
    Leave {
        id: ClientId,
    },
}

struct Hub {
    opts: ServeOptions,
    sessions: Mutex<HashMap<String, mpsc::UnboundedSender<Command>>>,
}

impl Hub {
    fn send(self: &Arc<Self>, session: &str, cmd: Command) {
        let mut map = self.sessions.lock().expect("hub lock");
        let tx = map.entry(session.to_string()).or_insert_with(|| {
            let (tx, rx) = mpsc::unbounded_channel();
            tokio::spawn(run_session(session.to_string(), self.clone(), rx));
            tx
        });
        if tx.send(cmd).is_err() {
            log::error!("session {session} task is gone");
        }
    }
}

/// Accepts connections until the listener fails.
pub async fn serve(listener: TcpListener, opts: ServeOptions) -> anyhow::Result<()> {
    if let Some(dir) = &opts.record_dir {
        std::fs::create_dir_all(dir)?;
    }
    let hub = Arc::new(Hub {
        opts,
        sessions: Mutex::new(HashMap::new()),
    });
    log::info!("listening on {}", listener.local_addr()?);
    loop {
        let (stream, addr) = listener.accept().await?;
        let hub = hub.clone();
        tokio::spawn(async move {
            if let Err(e) = handle_connection(stream, hub).await {
                log::debug!("connection {addr}: {e}");
            }
        });
    }
}

async fn handle_connection(stream: TcpStream, hub: Arc<Hub>) -> anyhow::Result<()> {
    let ws = tokio_tungstenite::accept_async(stream).await?;
    let (mut sink, mut frames) = ws.split();

    let first = loop {
        match frames.next().await {
            Some(Ok(Frame::Text(t))) => break t,
            Some(Ok(Frame::Close(_))) | None => return Ok(()),
            Some(Ok(_)) => continue,
            Some(Err(e)) => return Err(e.into()),
        }
    };
    let (session, role) = match Message::from_json(first.as_str()) {
        Ok(Message::Join { session, role }) => (session, role),
        other => {
            let reason = match other {
                Ok(m) => format!("expected join, got {}", m.kind()),
                Err(e) => e.to_string(),
            };
            sink.send(Frame::text(Message::error(ErrorCode::NotJoined, reason).to_json())).await?;
            sink.close().await?;
            return Ok(());
        }
    };

    let (tx, mut out_rx) = mpsc::channel(OUTBOUND_QUEUE);
    let (reply_tx, reply_rx) = oneshot::channel();
    hub.send(&session, Command::Join { role, tx, reply: reply_tx });
    let id = match reply_rx.await? {
        Ok(id) => id,
        Err(msg) => {
            sink.send(Frame::text(msg.to_json())).await?;
            sink.close().await?;
            return Ok(());
        }
    };
    log::info!("{id} joined session {session} as {role:?}");

    // Ends when the session drops our sender (leave or eviction).
    let writer = tokio::spawn(async move {
        while let Some(msg) = out_rx.recv().await {
            if sink.send(Frame::text(msg.to_json())).await.is_err() {
                return;
            }
        }
        let _ = sink.close().await;
    });

    while let Some(frame) = frames.next().await {
        match frame {
            Ok(Frame::Text(t)) => match Message::from_json(t.as_str()) {
                Ok(msg) => hub.send(&session, Command::Inbound { id: id.clone(), msg }),
                Err(e) => hub.send(
                    &session,
                    Command::Notify {
                        id: id.clone(),
                        msg: Message::error(ErrorCode::BadMessage, e.to_string()),
                    },
                ),
            },
            Ok(Frame::Close(_)) | Err(_) => break,
            Ok(_) => {}
        }
    }
    hub.send(&session, Command::Leave { id: id.clone() });
    let _ = writer.await;
    log::info!("{id} left session {session}");
    Ok(())
}

struct Live {
    session: Session,
    conns: HashMap<ClientId, mpsc::Sender<Message>>,
    writer: Option<LogWriter>,
    start: Instant,
}

impl Live {
    fn now(&self) -> f64 {
        self.start.elapsed().as_secs_f64() * 1000.0
    }

    fn deliver(&mut self, out: Vec<Outgoing>) {
        let mut pending = out;
        while !pending.is_empty() {
            let mut next = Vec::new();
            for o in pending {
                let is_tick = matches!(o.msg, Message::State { .. });
                let ok = self.conns.get(&o.to).is_some_and(|tx| tx.try_send(o.msg).is_ok());
                if is_tick {
                    let now = self.now();
                    next.extend(self.session.report_delivery(&o.to, ok, now));
                    if !self.session.is_connected(&o.to) {
                        self.conns.remove(&o.to);
                    }
                } else if !ok {
                    log::debug!("dropped message for {}", o.to);
                }
            }
            pending = next;
        }
    }

    fn flush_journal(&mut self) {
        let journal = self.session.take_journal();
        if let Some(w) = self.writer.as_mut() {
            for (t, event) in journal {
                if let Err(e) = w.append(t, event) {
                    log::error!("session {}: recording stopped: {e}", self.session.id());
                    self.writer = None;
                    break;
                }
            }
        }
    }

    fn apply(&mut self, cmd: Command) {
        let now = self.now();
        match cmd {
            Command::Join { role, tx, reply } => match self.session.join(role, now) {
                Ok(joined) => {
                    self.conns.insert(joined.id.clone(), tx);
                    self.deliver(joined.out);
                    let _ = reply.send(Ok(joined.id));
                }
                Err(msg) => {
                    let _ = reply.send(Err(msg));
                }
            },
            Command::Inbound { id, msg } => {
                let out = self.session.handle(&id, msg, now);
                self.deliver(out);
            }
            Command::Notify { id, msg } => {
                if let Some(tx) = self.conns.get(&id) {
                    let _ = tx.try_send(msg);
                }
            }
            Command::Leave { id } => {
                self.conns.remove(&id);
                let out = self.session.leave(&id, now);
                self.deliver(out);
            }
        }
    }
}

async fn run_session(name: String, hub: Arc<Hub>, mut rx: mpsc::UnboundedReceiver<Command>) {
    let opts = &hub.opts;
    let session = Session::new(
        name.clone(),
        SessionConfig {
            tick_ms: opts.tick_ms,
            capacity: opts.capacity,
            ..SessionConfig::default()
        },
    );
    let writer = opts.record_dir.as_ref().and_then(|dir| {
        let header = LogHeader::new(name.clone(), opts.tick_ms, session.config().render.fingerprint());
        let path = dir.join(format!("{name}.ndjson"));
        LogWriter::create(&path, &header, FsyncPolicy::OnClose)
            .inspect_err(|e| log::error!("cannot record session {name} to {}: {e}", path.display()))
            .ok()
    });
    let mut live = Live {
        session,
        conns: HashMap::new(),
        writer,
        start: Instant::now(),
    };
    let mut ticker = tokio::time::interval(Duration::from_millis(opts.tick_ms));
    ticker.set_missed_tick_behavior(MissedTickBehavior::Skip);
    log::info!("session {name} opened");

    loop {
        tokio::select! {
            cmd = rx.recv() => match cmd {
                Some(cmd) => live.apply(cmd),
                None => break,
            },
            _ = ticker.tick() => {
                let now = live.now();
                let out = live.session.broadcast_tick(now);
                live.deliver(out);
            }
        }
        live.flush_journal();
        if live.conns.is_empty() {
            // Joins are queued under the hub lock, so nothing can slip in
            // between this check and the removal.
            let mut map = hub.sessions.lock().expect("hub lock");
            match rx.try_recv() {
                Ok(cmd) => {
                    drop(map);
                    live.apply(cmd);
                    live.flush_journal();
                }
                Err(_) => {
                    map.remove(&name);
                    break;
                }
            }
        }
    }
    if let Some(w) = live.writer.take() {
        if let Err(e) = w.finish() {
            log::error!("session {name}: closing log failed: {e}");
        }
    }
    log::info!("session {name} closed");
}
