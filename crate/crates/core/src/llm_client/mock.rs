//! In-process mock of a chat-completion endpoint, for tests and demos.
//!
//! Listens on an ephemeral localhost port and answers every POST with a
//! configurable canned response. Shuts down when dropped.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

enum Behavior {
    /// wrap the given text in a well-formed completion response
    CannedText(String),
    /// reply with an HTTP error status and empty JSON body
    Status(u16),
    /// reply 200 with this exact JSON body
    RawJson(String),
    /// echo the request's first message content back as the completion
    EchoPrompt,
}

/// A tiny blocking HTTP/1.1 server speaking just enough of the protocol for
/// the client under test.
pub struct MockLlmServer {
    addr: std::net::SocketAddr,
    requests: Arc<AtomicUsize>,
    shutdown: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl MockLlmServer {
    /// Serve a completion whose text is `text`, for every request.
    pub fn respond_with(text: &str) -> Self {
        Self::start(Behavior::CannedText(text.to_string()))
    }

    /// Serve the given HTTP status for every request.
    pub fn respond_with_status(status: u16) -> Self {
        Self::start(Behavior::Status(status))
    }

    /// Serve exactly this JSON body with status 200.
    pub fn respond_raw_json(body: &str) -> Self {
        Self::start(Behavior::RawJson(body.to_string()))
    }

    /// Echo each request's first message content back as the completion.
    pub fn echo_prompt() -> Self {
        Self::start(Behavior::EchoPrompt)
    }

    fn start(behavior: Behavior) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind mock server");
        let addr = listener.local_addr().expect("local addr");
        let requests = Arc::new(AtomicUsize::new(0));
        let shutdown = Arc::new(AtomicBool::new(false));
        let handle = {
            let requests = Arc::clone(&requests);
            let shutdown = Arc::clone(&shutdown);
            std::thread::spawn(move || {
                for stream in listener.incoming() {
                    if shutdown.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(stream) = stream else { continue };
                    requests.fetch_add(1, Ordering::SeqCst);
                    let _ = handle_connection(stream, &behavior);
                }
            })
        };
        Self {
            addr,
            requests,
            shutdown,
            handle: Some(handle),
        }
    }

    /// Full URL of the mock completion endpoint.
    pub fn endpoint(&self) -> String {
        format!("http://{}/v1/chat/completions", self.addr)
    }

    /// Requests served so far.
    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}

impl Drop for MockLlmServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        // unblock the accept loop
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn handle_connection(mut stream: TcpStream, behavior: &Behavior) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            return Ok(());
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some(value) = line
            .to_ascii_lowercase()
            .strip_prefix("content-length:")
            .map(str::trim)
            .and_then(|v| v.parse::<usize>().ok())
        {
            content_length = value;
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;

    let (status_line, response_body) = match behavior {
        Behavior::CannedText(text) => (
            "HTTP/1.1 200 OK",
            serde_json::json!({
                "choices": [{"message": {"role": "assistant", "content": text}}]
            })
            .to_string(),
        ),
        Behavior::Status(status) => {
            let line: &'static str = match status {
                400 => "HTTP/1.1 400 Bad Request",
                401 => "HTTP/1.1 401 Unauthorized",
                403 => "HTTP/1.1 403 Forbidden",
                429 => "HTTP/1.1 429 Too Many Requests",
                500 => "HTTP/1.1 500 Internal Server Error",
                503 => "HTTP/1.1 503 Service Unavailable",
                _ => "HTTP/1.1 500 Internal Server Error",
            };
            (line, "{}".to_string())
        }
        Behavior::RawJson(json) => ("HTTP/1.1 200 OK", json.clone()),
        Behavior::EchoPrompt => {
            let content = serde_json::from_slice::<serde_json::Value>(&body)
                .ok()
                .and_then(|v| {
                    v.get("messages")?
                        .get(0)?
                        .get("content")?
                        .as_str()
                        .map(str::to_string)
                })
                .unwrap_or_default();
            (
                "HTTP/1.1 200 OK",
                serde_json::json!({
                    "choices": [{"message": {"role": "assistant", "content": content}}]
                })
                .to_string(),
            )
        }
    };

    write!(
        stream,
        "{status_line}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{response_body}",
        response_body.len()
    )?;
    stream.flush()
}
