use std::net::SocketAddr;
use std::time::{Duration, Instant};

use futures_util::{SinkExt, StreamExt};
use tokio::net::{TcpListener, TcpStream};
use tokio_tungstenite::tungstenite::Message as Frame;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

use gazelink::server::{serve, ServeOptions};
use gazelink_core::layout::{LayoutMode, RenderConfig, Renderer};
use gazelink_core::protocol::{ErrorCode, Message, Role};
use gazelink_core::recorder::read_log;
use gazelink_core::relay::snapshot_at;
use gazelink_core::ClientId;

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn start(opts: ServeOptions) -> SocketAddr {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve(listener, opts));
    addr
}

async fn connect(addr: SocketAddr) -> Ws {
    tokio_tungstenite::connect_async(format!("ws://{addr}")).await.unwrap().0
}

async fn send(ws: &mut Ws, msg: &Message) {
    ws.send(Frame::text(msg.to_json())).await.unwrap();
}

async fn recv(ws: &mut Ws) -> Option<Message> {
    loop {
        match tokio::time::timeout(Duration::from_secs(2), ws.next()).await.ok()?? {
            Ok(Frame::Text(t)) => return Some(Message::from_json(t.as_str()).unwrap()),
            Ok(Frame::Close(_)) | Err(_) => return None,
            Ok(_) => {}
        }
    }
}

async fn recv_until(ws: &mut Ws, mut pred: impl FnMut(&Message) -> bool) -> Message {
    loop {
        let m = recv(ws).await.expect("connection stayed open");
        if pred(&m) {
            return m;
        }
    }
}

async fn join(addr: SocketAddr, session: &str, role: Role) -> (Ws, ClientId, Vec<ClientId>) {
    let mut ws = connect(addr).await;
    send(&mut ws, &Message::Join { session: session.into(), role }).await;
    match recv(&mut ws).await {
        Some(Message::Welcome { id, members, tick_ms }) => {
            assert_eq!(tick_ms, 16);
            (ws, id, members)
        }
        other => panic!("expected welcome, got {other:?}"),
    }
}

#[tokio::test]
async fn gaze_reaches_peer_as_glow() {
    let addr = start(ServeOptions::default()).await;
    let (mut a, a_id, _) = join(addr, "room", Role::Participant).await;
    let (mut b, b_id, members) = join(addr, "room", Role::Participant).await;
    assert_eq!(members, vec![a_id.clone(), b_id.clone()]);

    let sent = Instant::now();
    send(
        &mut a,
        &Message::Gaze {
            seq: 1,
            source: a_id.clone(),
            target: Some(b_id.clone()),
            t: 0.0,
        },
    )
    .await;

    let mut renderer = Renderer::new(b_id.clone(), RenderConfig::with_mode(LayoutMode::Directional));
    let mut glow_at = None;
    while glow_at.is_none() {
        if let Message::State { tick, edges, audio } = recv_until(&mut b, |m| matches!(m, Message::State { .. })).await {
            let snap = snapshot_at(tick, 16, &members, &edges, &audio);
            let frame = renderer.render(&snap).unwrap().unwrap();
            if frame.glows.iter().any(|g| g.tile == a_id && g.intensity > 0.0) {
                glow_at = Some(sent.elapsed());
            }
        }
    }
    assert!(glow_at.unwrap() < Duration::from_millis(200), "{glow_at:?}");
}

#[tokio::test]
async fn host_observes_participant_view() {
    let addr = start(ServeOptions::default()).await;
    let (mut a, a_id, _) = join(addr, "obs", Role::Participant).await;
    let (_b, b_id, _) = join(addr, "obs", Role::Participant).await;
    let (mut host, _, members) = join(addr, "obs", Role::Host).await;
    assert_eq!(members.len(), 2, "host is not a member");

    send(&mut host, &Message::Observe { target: Some(a_id.clone()) }).await;
    send(
        &mut a,
        &Message::Gaze {
            seq: 1,
            source: a_id.clone(),
            target: Some(b_id.clone()),
            t: 0.0,
        },
    )
    .await;
    let snap = recv_until(&mut host, |m| match m {
        Message::Snapshot { frame, .. } => !frame.arrows.is_empty(),
        _ => false,
    })
    .await;
    let Message::Snapshot { viewer, frame, .. } = snap else { unreachable!() };
    assert_eq!(viewer, a_id);
    assert_eq!(frame.arrows[0].source, a_id);
    assert_eq!(frame.arrows[0].target, b_id);
}

#[tokio::test]
async fn full_session_and_second_host_are_handled() {
    let addr = start(ServeOptions {
        capacity: 1,
        ..ServeOptions::default()
    })
    .await;
    let (_a, _, _) = join(addr, "tiny", Role::Participant).await;
    let mut late = connect(addr).await;
    send(&mut late, &Message::Join { session: "tiny".into(), role: Role::Participant }).await;
    match recv(&mut late).await {
        Some(Message::Error { code, .. }) => assert_eq!(code, ErrorCode::CapacityExceeded),
        other => panic!("{other:?}"),
    }
    assert!(recv(&mut late).await.is_none(), "connection closed after refusal");

    // Hosts do not take participant slots.
    let (_h, _, _) = join(addr, "tiny", Role::Host).await;
}

#[tokio::test]
async fn non_join_first_message_is_refused() {
    let addr = start(ServeOptions::default()).await;
    let mut ws = connect(addr).await;
    ws.send(Frame::text("{\"kind\":\"observe\",\"target\":null}")).await.unwrap();
    match recv(&mut ws).await {
        Some(Message::Error { code, .. }) => assert_eq!(code, ErrorCode::NotJoined),
        other => panic!("{other:?}"),
    }
}

#[tokio::test]
async fn malformed_message_gets_error_and_connection_survives() {
    let addr = start(ServeOptions::default()).await;
    let (mut a, _, _) = join(addr, "bad", Role::Participant).await;
    a.send(Frame::text("not json")).await.unwrap();
    recv_until(&mut a, |m| matches!(m, Message::Error { code: ErrorCode::BadMessage, .. })).await;
    recv_until(&mut a, |m| matches!(m, Message::State { .. })).await;
}

#[tokio::test]
async fn sessions_are_recorded_and_attachable() {
    let dir = tempfile::tempdir().unwrap();
    let addr = start(ServeOptions {
        record_dir: Some(dir.path().to_path_buf()),
        ..ServeOptions::default()
    })
    .await;
    let (mut a, a_id, _) = join(addr, "rec", Role::Participant).await;
    let (mut b, b_id, _) = join(addr, "rec", Role::Participant).await;

    let attached = dir.path().join("attached.ndjson");
    let recorder = tokio::spawn({
        let attached = attached.clone();
        async move {
            gazelink::record::record(&format!("ws://{addr}"), "rec", &attached, Some(Duration::from_millis(400))).await
        }
    });
    tokio::time::sleep(Duration::from_millis(100)).await;
    send(&mut a, &Message::Gaze { seq: 1, source: a_id.clone(), target: Some(b_id.clone()), t: 0.0 }).await;
    send(&mut b, &Message::Gaze { seq: 1, source: b_id.clone(), target: Some(a_id.clone()), t: 0.0 }).await;
    tokio::time::sleep(Duration::from_millis(150)).await;
    send(&mut a, &Message::Gaze { seq: 2, source: a_id.clone(), target: None, t: 150.0 }).await;
    let written = recorder.await.unwrap().unwrap();
    assert!(written > 0);
    a.close(None).await.unwrap();
    b.close(None).await.unwrap();

    let attached_csv = gazelink::commands::metrics_csv(&attached, false, true).unwrap();
    assert_eq!(attached_csv.lines().count(), 2, "{attached_csv}");

    // The server writes its log when the session empties.
    let server_log = dir.path().join("rec.ndjson");
    let mut log = None;
    for _ in 0..50 {
        tokio::time::sleep(Duration::from_millis(40)).await;
        if let Ok(f) = std::fs::File::open(&server_log) {
            if let Ok(l) = read_log(std::io::BufReader::new(f)) {
                if l.records().iter().filter(|r| r.kind() == "leave").count() >= 3 {
                    log = Some(l);
                    break;
                }
            }
        }
    }
    let log = log.expect("server log complete");
    assert!(log.records().iter().any(|r| r.kind() == "gaze"));
    let csv = gazelink::commands::metrics_csv(&server_log, false, true).unwrap();
    assert_eq!(csv.lines().count(), 2, "one mutual episode: {csv}");
    let mut frames = Vec::new();
    let n = gazelink::commands::replay_to(&server_log, a_id.as_str(), LayoutMode::Directional, &mut frames).unwrap();
    assert!(n > 0);
}
