//! WebSocket relay server and offline tools built on `gazelink-core`.

pub mod commands;
pub mod record;
pub mod server;
