//! Starts the game API on a local port, plays three moves against a copy
//! rival over HTTP and shuts down.
//!
//! ```text
//! cargo run -p rcs-gamesvc --example local_game
//! ```

use rcs_gamesvc::{serve, App, Config};
use serde_json::{json, Value};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};

async fn send(addr: std::net::SocketAddr, method: &str, path: &str, body: Option<Value>) -> std::io::Result<Value> {
    let body = body.map(|b| b.to_string()).unwrap_or_default();
    let mut stream = TcpStream::connect(addr).await?;
    let head = format!(
        "{method} {path} HTTP/1.1\r\nhost: {addr}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n",
        body.len()
    );
    stream.write_all(head.as_bytes()).await?;
    stream.write_all(body.as_bytes()).await?;
    let mut reply = String::new();
    stream.read_to_string(&mut reply).await?;
    let payload = reply.split_once("\r\n\r\n").map(|(_, b)| b).unwrap_or("");
    Ok(serde_json::from_str(payload).unwrap_or(Value::Null))
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let app = App::new(Config::default(), Vec::new());
    let listener = TcpListener::bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?;
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(serve(app, listener, async move {
        stopped.await.ok();
    }));

    let created = send(
        addr,
        "POST",
        "/sessions",
        Some(json!({"domain": {"kind": "torus-grid", "resolution": 12, "dim": 2}, "rival": {"kind": "copy", "schedule": {"kind": "doubling"}}})),
    )
    .await?;
    let id = created["id"].as_str().ok_or("no session id")?.to_string();
    println!("session {id}");
    for site in [0, 78, 6] {
        let hint = send(addr, "GET", &format!("/sessions/{id}/whatif?site={site}"), None).await?;
        let reply = send(addr, "POST", &format!("/sessions/{id}/move"), Some(json!({"site": site}))).await?;
        let num = |v: &Value, key: &str| v[key].as_f64().unwrap_or(f64::NAN);
        println!(
            "site {site:>3}: whatif {:.4}, scored {:.4} vs {:.4}, rival placed {}",
            num(&hint, "ourScore"),
            num(&reply, "ourScore"),
            num(&reply, "rivalScore"),
            reply["rivalMoves"]
        );
    }
    let history = send(addr, "GET", &format!("/sessions/{id}/history"), None).await?;
    println!("{} rounds recorded", history.as_array().map_or(0, Vec::len));

    stop.send(()).ok();
    server.await??;
    Ok(())
}
