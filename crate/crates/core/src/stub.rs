//! A small in-process HTTP server speaking the remote backend protocol, for
//! contract tests and offline demos. Also recording wrappers that capture
//! mock-backend traffic as replayable exchanges.

use std::collections::BTreeMap;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::OracleError;
use crate::oracle::{generate_request_body, BackendConfig, OracleBackend, OracleRequest, RawOracleOutput};
use crate::reconcile::{reconcile_request_body, ElementView, Reconciler, Task};

#[derive(Clone, Debug)]
pub struct StubRequest {
    pub method: String,
    pub path: String,
    /// Lowercased names.
    pub headers: BTreeMap<String, String>,
    pub body: String,
}

impl StubRequest {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers.get(&name.to_ascii_lowercase()).map(String::as_str)
    }

    pub fn json(&self) -> Option<Value> {
        serde_json::from_str(&self.body).ok()
    }
}

#[derive(Clone, Debug)]
pub struct StubResponse {
    pub status: u16,
    pub body: String,
    /// Held before writing, to provoke client timeouts.
    pub delay: Option<Duration>,
}

impl StubResponse {
    pub fn json(status: u16, body: &Value) -> Self {
        StubResponse { status, body: body.to_string(), delay: None }
    }

    pub fn ok(body: &Value) -> Self {
        Self::json(200, body)
    }

    pub fn status(status: u16) -> Self {
        Self::json(status, &json!({ "error": reason(status) }))
    }

    pub fn delayed(self, delay: Duration) -> Self {
        StubResponse { delay: Some(delay), ..self }
    }
}

pub type Handler = Arc<dyn Fn(&StubRequest) -> StubResponse + Send + Sync>;

fn reason(status: u16) -> &'static str {
    match status {
        200 => "OK",
        400 => "Bad Request",
        401 => "Unauthorized",
        404 => "Not Found",
        408 => "Request Timeout",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        502 => "Bad Gateway",
        503 => "Service Unavailable",
        _ => "Status",
    }
}

pub struct StubServer {
    addr: SocketAddr,
    shutdown: Arc<AtomicBool>,
    requests: Arc<Mutex<Vec<StubRequest>>>,
    accept_thread: Option<JoinHandle<()>>,
}

impl StubServer {
    /// Binds an ephemeral port on 127.0.0.1 and serves until dropped.
    pub fn start(handler: Handler) -> io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let shutdown = Arc::new(AtomicBool::new(false));
        let requests = Arc::new(Mutex::new(Vec::new()));
        let accept_thread = {
            let shutdown = Arc::clone(&shutdown);
            let requests = Arc::clone(&requests);
            std::thread::spawn(move || {
                while !shutdown.load(Ordering::SeqCst) {
                    match listener.accept() {
                        Ok((stream, _)) => {
                            let handler = Arc::clone(&handler);
                            let requests = Arc::clone(&requests);
                            std::thread::spawn(move || {
                                if let Err(e) = serve(stream, &handler, &requests) {
                                    log::debug!("stub connection ended: {e}");
                                }
                            });
                        }
                        Err(e) if e.kind() == io::ErrorKind::WouldBlock => {
                            std::thread::sleep(Duration::from_millis(2));
                        }
                        Err(e) => log::debug!("stub accept failed: {e}"),
                    }
                }
            })
        };
        Ok(StubServer { addr, shutdown, requests, accept_thread: Some(accept_thread) })
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn requests(&self) -> Vec<StubRequest> {
        self.requests.lock().expect("request log").clone()
    }

    pub fn request_count(&self) -> usize {
        self.requests.lock().expect("request log").len()
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        if let Some(t) = self.accept_thread.take() {
            let _ = t.join();
        }
    }
}

fn serve(stream: TcpStream, handler: &Handler, log: &Mutex<Vec<StubRequest>>) -> io::Result<()> {
    stream.set_nonblocking(false)?;
    stream.set_read_timeout(Some(Duration::from_secs(5)))?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let mut parts = line.split_whitespace();
    let method = parts.next().unwrap_or_default().to_string();
    let path = parts.next().unwrap_or_default().to_string();
    let mut headers = BTreeMap::new();
    loop {
        let mut h = String::new();
        if reader.read_line(&mut h)? == 0 || h.trim().is_empty() {
            break;
        }
        if let Some((k, v)) = h.split_once(':') {
            headers.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
        }
    }
    let len: usize = headers.get("content-length").and_then(|v| v.parse().ok()).unwrap_or(0);
    let mut body = vec![0; len];
    reader.read_exact(&mut body)?;
    let req = StubRequest { method, path, headers, body: String::from_utf8_lossy(&body).into_owned() };
    log.lock().expect("request log").push(req.clone());

    let resp = handler(&req);
    if let Some(d) = resp.delay {
        std::thread::sleep(d);
    }
    let mut stream = stream;
    write!(
        stream,
        "HTTP/1.1 {} {}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
        resp.status,
        reason(resp.status),
        resp.body.len(),
        resp.body
    )?;
    stream.flush()
}

/// Answers with `responses` in order, repeating the last one.
pub fn sequence(responses: Vec<StubResponse>) -> Handler {
    assert!(!responses.is_empty(), "sequence needs at least one response");
    let next = AtomicUsize::new(0);
    Arc::new(move |_| {
        let i = next.fetch_add(1, Ordering::SeqCst).min(responses.len() - 1);
        responses[i].clone()
    })
}

/// Rejects requests without `Authorization: Bearer {token}` with 401.
pub fn require_bearer(token: &str, inner: Handler) -> Handler {
    let expected = format!("Bearer {token}");
    Arc::new(move |req| {
        if req.header("authorization") == Some(expected.as_str()) {
            inner(req)
        } else {
            StubResponse::status(401)
        }
    })
}

/// A recorded request/response pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub path: String,
    pub request: Value,
    pub response: Value,
}

/// Serves recorded exchanges, matching on path and request body; anything
/// unrecorded gets 404.
pub fn replay_handler(exchanges: Vec<Exchange>) -> Handler {
    Arc::new(move |req| {
        let path = req.path.trim_start_matches('/');
        let body = req.json();
        exchanges
            .iter()
            .find(|x| x.path.trim_start_matches('/') == path && Some(&x.request) == body.as_ref())
            .map_or_else(|| StubResponse::status(404), |x| StubResponse::ok(&x.response))
    })
}

/// Wraps a backend and logs each call as the exchange a remote backend
/// configured with `wire` would have made.
pub struct RecordingBackend {
    wire: BackendConfig,
    inner: Arc<dyn OracleBackend>,
    log: Mutex<Vec<Exchange>>,
}

impl RecordingBackend {
    pub fn new(wire: BackendConfig, inner: Arc<dyn OracleBackend>) -> Self {
        RecordingBackend { wire, inner, log: Mutex::new(Vec::new()) }
    }

    pub fn exchanges(&self) -> Vec<Exchange> {
        self.log.lock().expect("exchange log").clone()
    }
}

impl OracleBackend for RecordingBackend {
    fn complete(&self, req: &OracleRequest) -> Result<RawOracleOutput, OracleError> {
        let out = self.inner.complete(req)?;
        self.log.lock().expect("exchange log").push(Exchange {
            path: "generate".into(),
            request: generate_request_body(&self.wire, req),
            response: json!({ "text": out.text }),
        });
        Ok(out)
    }
}

pub struct RecordingReconciler {
    inner: Arc<dyn Reconciler>,
    log: Mutex<Vec<Exchange>>,
}

impl RecordingReconciler {
    pub fn new(inner: Arc<dyn Reconciler>) -> Self {
        RecordingReconciler { inner, log: Mutex::new(Vec::new()) }
    }

    pub fn exchanges(&self) -> Vec<Exchange> {
        self.log.lock().expect("exchange log").clone()
    }
}

impl Reconciler for RecordingReconciler {
    fn label(&self, task: Task, old: &ElementView, new: &ElementView, context: &str) -> Result<u8, OracleError> {
        let label = self.inner.label(task, old, new, context)?;
        self.log.lock().expect("exchange log").push(Exchange {
            path: "reconcile".into(),
            request: reconcile_request_body(task, old, new, context),
            response: json!({ "label": label }),
        });
        Ok(label)
    }
}
