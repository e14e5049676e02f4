//! Just enough HTTP/1.1 to tell WebSocket upgrades from static asset
//! requests on the same port, and to answer the latter.

use std::io::{self, Read, Write};
use std::net::TcpStream;
use std::path::{Component, Path, PathBuf};
use std::time::{Duration, Instant};

const MAX_HEAD: usize = 16 * 1024;

/// Page served at `/` when no asset directory is configured.
const BUILTIN_INDEX: &str = "<!doctype html>
<html><head><meta charset=\"utf-8\"><title>tanksworld</title></head>
<body>
<h1>tanksworld session</h1>
<p>This server speaks <code>twp/1</code> over WebSocket on this port.
Start it with <code>--static-dir</code> pointing at the browser client build to play here.</p>
</body></html>
";

#[derive(Debug, PartialEq)]
pub(crate) struct RequestHead {
    pub method: String,
    pub path: String,
    pub upgrade_websocket: bool,
    pub len: usize,
}

/// Wait for a complete request head without consuming it.
pub(crate) fn sniff(stream: &TcpStream, timeout: Duration) -> io::Result<RequestHead> {
    let start = Instant::now();
    let mut buf = vec![0u8; MAX_HEAD];
    loop {
        stream.set_read_timeout(Some(timeout.saturating_sub(start.elapsed()).max(Duration::from_millis(1))))?;
        let n = stream.peek(&mut buf)?;
        if n == 0 {
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "connection closed"));
        }
        if let Some(end) = find_head_end(&buf[..n]) {
            return parse_head(&buf[..end]);
        }
        if n == MAX_HEAD {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "request head too large"));
        }
        if start.elapsed() >= timeout {
            return Err(io::Error::new(io::ErrorKind::TimedOut, "incomplete request head"));
        }
        std::thread::sleep(Duration::from_millis(1));
    }
}

fn find_head_end(b: &[u8]) -> Option<usize> {
    b.windows(4).position(|w| w == b"\r\n\r\n").map(|p| p + 4)
}

fn parse_head(head: &[u8]) -> io::Result<RequestHead> {
    let text = std::str::from_utf8(head).map_err(|_| io::Error::new(io::ErrorKind::InvalidData, "non-utf8 head"))?;
    let mut lines = text.split("\r\n");
    let mut first = lines.next().unwrap_or("").split_whitespace();
    let method = first.next().unwrap_or("").to_string();
    let path = first.next().unwrap_or("/").to_string();
    let upgrade_websocket = lines.any(|l| {
        l.split_once(':').is_some_and(|(k, v)| {
            k.trim().eq_ignore_ascii_case("upgrade") && v.trim().eq_ignore_ascii_case("websocket")
        })
    });
    Ok(RequestHead {
        method,
        path,
        upgrade_websocket,
        len: head.len(),
    })
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).unwrap_or("") {
        "html" | "htm" => "text/html; charset=utf-8",
        "js" | "mjs" => "text/javascript; charset=utf-8",
        "css" => "text/css; charset=utf-8",
        "json" | "map" => "application/json",
        "svg" => "image/svg+xml",
        "png" => "image/png",
        "ico" => "image/x-icon",
        "wasm" => "application/wasm",
        _ => "application/octet-stream",
    }
}

/// Map a URL path into `root`, refusing anything that escapes it.
fn resolve(root: &Path, url_path: &str) -> Option<PathBuf> {
    let clean = url_path.split(['?', '#']).next().unwrap_or("/");
    let rel = clean.trim_start_matches('/');
    let rel = if rel.is_empty() { "index.html" } else { rel };
    let rel = Path::new(rel);
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return None;
    }
    Some(root.join(rel))
}

fn respond(stream: &mut TcpStream, status: &str, ctype: &str, body: &[u8]) -> io::Result<()> {
    write!(
        stream,
        "HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        body.len()
    )?;
    stream.write_all(body)?;
    stream.flush()
}

/// Consume the request head and answer it from `root`.
pub(crate) fn serve_static(mut stream: TcpStream, head: &RequestHead, root: Option<&Path>) -> io::Result<()> {
    let mut sink = vec![0u8; head.len];
    stream.read_exact(&mut sink)?;
    if head.method != "GET" && head.method != "HEAD" {
        return respond(&mut stream, "405 Method Not Allowed", "text/plain", b"method not allowed\n");
    }
    let (status, ctype, body): (&str, &str, Vec<u8>) = match root {
        None if matches!(head.path.as_str(), "/" | "/index.html") => {
            ("200 OK", "text/html; charset=utf-8", BUILTIN_INDEX.as_bytes().to_vec())
        }
        None => ("404 Not Found", "text/plain", b"not found\n".to_vec()),
        Some(root) => match resolve(root, &head.path).map(|p| (std::fs::read(&p), p)) {
            Some((Ok(bytes), p)) => ("200 OK", content_type(&p), bytes),
            Some((Err(_), _)) => ("404 Not Found", "text/plain", b"not found\n".to_vec()),
            None => ("403 Forbidden", "text/plain", b"forbidden\n".to_vec()),
        },
    };
    let body = if head.method == "HEAD" { Vec::new() } else { body };
    respond(&mut stream, status, ctype, &body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_upgrade_header_case_insensitively() {
        let head = b"GET /ws HTTP/1.1\r\nHost: x\r\nUPGRADE: WebSocket\r\nConnection: Upgrade\r\n\r\n";
        let h = parse_head(head).unwrap();
        assert!(h.upgrade_websocket);
        assert_eq!(h.path, "/ws");
        let plain = parse_head(b"GET /app.js HTTP/1.1\r\nHost: x\r\n\r\n").unwrap();
        assert!(!plain.upgrade_websocket);
    }

    #[test]
    fn resolve_refuses_escapes() {
        let root = Path::new("/srv/ui");
        assert_eq!(resolve(root, "/"), Some(root.join("index.html")));
        assert_eq!(resolve(root, "/js/app.js?v=2"), Some(root.join("js/app.js")));
        assert_eq!(resolve(root, "/../etc/passwd"), None);
        assert_eq!(resolve(root, "/a/../../b"), None);
    }
}
