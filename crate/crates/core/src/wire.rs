//! Newline-delimited JSON transport for external recognizers and scorers.
//!
//! A request is one JSON object per line carrying a string `id`; the peer
//! answers each request with exactly one object echoing that id. Responses
//! may arrive in any order. The peer is either a spawned subprocess (talking
//! over its standard streams) or a TCP socket.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WireError {
    #[error("endpoint unreachable: {0}")]
    EndpointUnreachable(String),
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("no response within {0:?}")]
    Timeout(Duration),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "transport", rename_all = "lowercase")]
pub enum Transport {
    /// Spawn `program args...` and talk over stdin/stdout.
    Subprocess {
        program: String,
        #[serde(default)]
        args: Vec<String>,
    },
    Tcp {
        addr: String,
    },
}

fn default_timeout_ms() -> u64 {
    30_000
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Endpoint {
    #[serde(flatten)]
    pub transport: Transport,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

impl Endpoint {
    pub fn tcp(addr: impl Into<String>) -> Self {
        Self { transport: Transport::Tcp { addr: addr.into() }, timeout_ms: default_timeout_ms() }
    }

    pub fn subprocess(program: impl Into<String>, args: Vec<String>) -> Self {
        Self { transport: Transport::Subprocess { program: program.into(), args }, timeout_ms: default_timeout_ms() }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout_ms = timeout.as_millis() as u64;
        self
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }
}

/// One connection to an endpoint. Requests on a connection are serialized by
/// `&mut self`; open several clients for parallelism.
pub struct LineClient {
    writer: Box<dyn Write + Send>,
    lines: Receiver<std::io::Result<String>>,
    child: Option<Child>,
    timeout: Duration,
    next_id: u64,
    stash: HashMap<String, Map<String, Value>>,
}

impl LineClient {
    pub fn connect(endpoint: &Endpoint) -> Result<Self, WireError> {
        let (writer, reader, child): (Box<dyn Write + Send>, Box<dyn Read + Send>, Option<Child>) =
            match &endpoint.transport {
                Transport::Tcp { addr } => {
                    let stream =
                        TcpStream::connect(addr).map_err(|e| WireError::EndpointUnreachable(format!("{addr}: {e}")))?;
                    let read_half = stream.try_clone().map_err(|e| WireError::EndpointUnreachable(e.to_string()))?;
                    (Box::new(stream), Box::new(read_half), None)
                }
                Transport::Subprocess { program, args } => {
                    let mut child = Command::new(program)
                        .args(args)
                        .stdin(Stdio::piped())
                        .stdout(Stdio::piped())
                        .stderr(Stdio::inherit())
                        .spawn()
                        .map_err(|e| WireError::EndpointUnreachable(format!("{program}: {e}")))?;
                    let stdin = child.stdin.take().expect("piped stdin");
                    let stdout = child.stdout.take().expect("piped stdout");
                    (Box::new(stdin), Box::new(stdout), Some(child))
                }
            };

        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(reader).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });

        Ok(Self { writer, lines: rx, child, timeout: endpoint.timeout(), next_id: 0, stash: HashMap::new() })
    }

    /// Send one request; returns the id assigned to it.
    pub fn send(&mut self, mut payload: Map<String, Value>) -> Result<String, WireError> {
        let id = self.next_id.to_string();
        self.next_id += 1;
        payload.insert("id".into(), Value::String(id.clone()));
        let mut line =
            serde_json::to_vec(&Value::Object(payload)).map_err(|e| WireError::ProtocolViolation(e.to_string()))?;
        line.push(b'\n');
        self.writer
            .write_all(&line)
            .and_then(|_| self.writer.flush())
            .map_err(|e| WireError::EndpointUnreachable(e.to_string()))?;
        Ok(id)
    }

    /// Wait for the response carrying `id`, holding on to any others.
    pub fn receive(&mut self, id: &str) -> Result<Map<String, Value>, WireError> {
        self.receive_by(id, Instant::now() + self.timeout)
    }

    fn receive_by(&mut self, id: &str, deadline: Instant) -> Result<Map<String, Value>, WireError> {
        if let Some(found) = self.stash.remove(id) {
            return Ok(found);
        }
        loop {
            let remaining = deadline.saturating_duration_since(Instant::now());
            let line = match self.lines.recv_timeout(remaining) {
                Ok(Ok(line)) => line,
                Ok(Err(e)) => return Err(WireError::EndpointUnreachable(e.to_string())),
                Err(RecvTimeoutError::Timeout) => return Err(WireError::Timeout(self.timeout)),
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(WireError::EndpointUnreachable("connection closed".into()))
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            let value: Value =
                serde_json::from_str(&line).map_err(|e| WireError::ProtocolViolation(format!("invalid JSON: {e}")))?;
            let Value::Object(obj) = value else {
                return Err(WireError::ProtocolViolation("response is not an object".into()));
            };
            let rid = match obj.get("id") {
                Some(Value::String(s)) => s.clone(),
                _ => return Err(WireError::ProtocolViolation("response without string id".into())),
            };
            if rid == id {
                return Ok(obj);
            }
            if self.stash.insert(rid.clone(), obj).is_some() {
                return Err(WireError::ProtocolViolation(format!("duplicate response for id {rid}")));
            }
        }
    }

    pub fn call(&mut self, payload: Map<String, Value>) -> Result<Map<String, Value>, WireError> {
        let id = self.send(payload)?;
        self.receive(&id)
    }

    /// Pipeline several requests and collect responses in request order.
    pub fn call_many(&mut self, payloads: Vec<Map<String, Value>>) -> Result<Vec<Map<String, Value>>, WireError> {
        let ids = payloads.into_iter().map(|p| self.send(p)).collect::<Result<Vec<_>, _>>()?;
        let deadline = Instant::now() + self.timeout;
        ids.iter().map(|id| self.receive_by(id, deadline)).collect()
    }
}

impl Drop for LineClient {
    fn drop(&mut self) {
        if let Some(child) = self.child.as_mut() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}


#[cfg(test)]
mod tests {
    use super::testing::serve;
    use super::*;
    use serde_json::json;

    fn obj(v: Value) -> Map<String, Value> {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn echoes_over_tcp() {
        let addr = serve(|req| Some(json!({"id": req["id"], "echo": req["x"]}).to_string()));
        let mut client = LineClient::connect(&Endpoint::tcp(addr)).unwrap();
        let resp = client.call(obj(json!({"x": 7}))).unwrap();
        assert_eq!(resp["echo"], 7);
    }

    #[test]
    fn out_of_order_responses_are_matched_by_id() {
        // Answer every request with the response to the previous one, then
        // flush the last on a sentinel.
        let held = std::sync::Mutex::new(None::<Value>);
        let addr = serve(move |req| {
            let mut slot = held.lock().unwrap();
            let prev = slot.replace(req.clone());
            match (prev, req["last"].as_bool()) {
                (Some(p), Some(true)) => Some(format!(
                    "{}\n{}",
                    json!({"id": req["id"], "v": req["v"]}),
                    json!({"id": p["id"], "v": p["v"]})
                )),
                _ => None,
            }
        });
        let mut client = LineClient::connect(&Endpoint::tcp(addr)).unwrap();
        let out = client.call_many(vec![obj(json!({"v": 1})), obj(json!({"v": 2, "last": true}))]).unwrap();
        assert_eq!(out[0]["v"], 1);
        assert_eq!(out[1]["v"], 2);
    }

    #[test]
    fn silent_peer_times_out() {
        let addr = serve(|_| None);
        let endpoint = Endpoint::tcp(addr).with_timeout(Duration::from_millis(100));
        let mut client = LineClient::connect(&endpoint).unwrap();
        assert!(matches!(client.call(Map::new()), Err(WireError::Timeout(_))));
    }

    #[test]
    fn garbage_is_a_protocol_violation() {
        let addr = serve(|_| Some("not json".into()));
        let mut client = LineClient::connect(&Endpoint::tcp(addr)).unwrap();
        assert!(matches!(client.call(Map::new()), Err(WireError::ProtocolViolation(_))));
    }

    #[test]
    fn refused_connection_is_unreachable() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        drop(listener);
        assert!(matches!(LineClient::connect(&Endpoint::tcp(addr)), Err(WireError::EndpointUnreachable(_))));
    }

    #[test]
    fn subprocess_transport() {
        let script = r#"while read -r line; do echo '{"id":"0","ok":true}'; done"#;
        let endpoint = Endpoint::subprocess("sh", vec!["-c".into(), script.into()]);
        let mut client = LineClient::connect(&endpoint).unwrap();
        let resp = client.call(Map::new()).unwrap();
        assert_eq!(resp["ok"], true);
    }

    #[test]
    fn missing_program_is_unreachable() {
        let endpoint = Endpoint::subprocess("/definitely/not/here", vec![]);
        assert!(matches!(LineClient::connect(&endpoint), Err(WireError::EndpointUnreachable(_))));
    }

    #[test]
    fn endpoint_config_shape() {
        let ep: Endpoint = toml::from_str("transport = \"tcp\"\naddr = \"127.0.0.1:9\"\n").unwrap();
        assert_eq!(ep, Endpoint::tcp("127.0.0.1:9"));
        let ep: Endpoint = toml::from_str("transport = \"subprocess\"\nprogram = \"ner\"\ntimeout_ms = 5\n").unwrap();
        assert_eq!(ep.timeout(), Duration::from_millis(5));
    }
}
