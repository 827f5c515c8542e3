//! Helpers shared by the CLI test suites and the acceptance report.
#![allow(dead_code)]

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::json;
use slaiot_core::vocabulary::VocabularyRegistry;
use tower::ServiceExt;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(rel: &str) -> String {
    fixtures().join(rel).to_string_lossy().into_owned()
}

pub fn read(rel: &str) -> String {
    fs::read_to_string(fixtures().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn slaiot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slaiot"))
        .args(args)
        .env_remove("SLA_IOT_REGISTRY")
        .output()
        .expect("slaiot runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn app() -> Router {
    slaiot_cli::api::router(Arc::new(VocabularyRegistry::builtin()), None)
}

pub fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .unwrap()
}

/// Sends one request through the router without a socket.
pub async fn call(
    app: Router,
    method: &str,
    uri: &str,
    body: impl Into<String>,
) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .body(Body::from(body.into()))
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

/// A `slaiot serve` child process on an ephemeral port.
pub struct Server {
    pub child: Child,
    pub addr: SocketAddr,
}

impl Server {
    pub fn start(extra: &[&str]) -> Server {
        let mut child = Command::new(env!("CARGO_BIN_EXE_slaiot"))
            .args(["serve", "--port", "0"])
            .args(extra)
            .env_remove("SLA_IOT_REGISTRY")
            .stderr(Stdio::piped())
            .stdout(Stdio::null())
            .spawn()
            .expect("slaiot serve starts");
        let mut line = String::new();
        BufReader::new(child.stderr.take().unwrap())
            .read_line(&mut line)
            .unwrap();
        let addr = line
            .trim()
            .strip_prefix("listening on http://")
            .unwrap_or_else(|| panic!("unexpected banner: {line}"))
            .parse()
            .unwrap();
        Server { child, addr }
    }

    /// One HTTP/1.1 exchange; returns (status, body).
    pub fn request(&self, method: &str, path: &str, body: &str) -> (u16, String) {
        let mut s = TcpStream::connect(self.addr).unwrap();
        write!(
            s,
            "{method} {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\nContent-Length: {}\r\n\r\n{body}",
            body.len()
        )
        .unwrap();
        let mut raw = String::new();
        s.read_to_string(&mut raw).unwrap();
        let (head, rest) = raw.split_once("\r\n\r\n").unwrap();
        let status = head.split(' ').nth(1).unwrap().parse().unwrap();
        let chunked = head
            .to_ascii_lowercase()
            .contains("transfer-encoding: chunked");
        (
            status,
            if chunked {
                dechunk(rest)
            } else {
                rest.to_string()
            },
        )
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn dechunk(mut s: &str) -> String {
    let mut out = String::new();
    while let Some((size, rest)) = s.split_once("\r\n") {
        let n = usize::from_str_radix(size.trim(), 16).unwrap_or(0);
        if n == 0 {
            break;
        }
        out.push_str(&rest[..n]);
        s = &rest[n + 2..];
    }
    out
}

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

/// Exit codes 0 / 1 / 2 / 3 for the documented situations.
pub fn exit_code_contract() -> Result<String, String> {
    let o = slaiot(&["parse", &fixture("corpus/rhms-request.slaiot")]);
    check(
        code(&o) == 0 && o.stdout.is_empty() && o.stderr.is_empty(),
        format!("valid parse: {} {}", code(&o), stderr(&o)),
    )?;

    let o = slaiot(&["parse", &fixture("invalid/cycle.slaiot")]);
    let err = stderr(&o);
    check(
        code(&o) == 1 && err.lines().count() == 1 && err.contains("'a'") && err.contains("'b'"),
        format!("cycle parse: {} {err}", code(&o)),
    )?;

    let o = slaiot(&["parse", &fixture("corpus/no-such-file.slaiot")]);
    check(code(&o) == 3, format!("missing file: {}", code(&o)))?;

    let o = slaiot(&["parse", "--bogus"]);
    check(code(&o) == 2, format!("unknown flag: {}", code(&o)))?;

    let req = fixture("match/request.slaiot");
    let o = slaiot(&["match", &fixture("match/offer-cloudco.slaiot"), &req]);
    check(code(&o) == 2, format!("type mismatch: {}", code(&o)))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let twin = dir.path().join("twin.slaiot");
    fs::write(
        &twin,
        read("match/request.slaiot").replace("type request", "type offer"),
    )
    .map_err(|e| e.to_string())?;
    let o = slaiot(&["match", &req, &twin.to_string_lossy()]);
    check(
        code(&o) == 0 && stdout(&o).contains("\"score\": 1,"),
        format!("identical offer: {} {}", code(&o), stderr(&o)),
    )?;

    let o = slaiot(&["match", &req, &fixture("corpus/minimal-offer.slaiot")]);
    check(code(&o) == 1, format!("empty offer: {}", code(&o)))?;

    let busy = std::net::TcpListener::bind("127.0.0.1:0").map_err(|e| e.to_string())?;
    let port = busy
        .local_addr()
        .map_err(|e| e.to_string())?
        .port()
        .to_string();
    let o = slaiot(&["serve", "--port", &port]);
    check(code(&o) == 3, format!("busy port: {}", code(&o)))?;

    Ok("parse 0/1/3, usage 2, match 0/1/2, busy port 3".into())
}

/// A CLI invocation and the API request that must answer the same bytes.
pub struct Case {
    pub name: &'static str,
    pub args: Vec<String>,
    pub method: &'static str,
    pub uri: String,
    pub body: String,
}

pub fn cases() -> Vec<Case> {
    let validate = |name, rel: &str| Case {
        name,
        args: vec![
            "parse".into(),
            "--diagnostics".into(),
            "json".into(),
            fixture(rel),
        ],
        method: "POST",
        uri: "/api/validate".into(),
        body: read(rel),
    };
    let convert = |name, rel: &str, to: &str| Case {
        name,
        args: vec![
            "convert".into(),
            fixture(rel),
            "--to".into(),
            to.into(),
            "--out".into(),
            "-".into(),
        ],
        method: "POST",
        uri: format!("/api/convert?to={to}"),
        body: read(rel),
    };
    let rank = |name, req: &str, offers: &[&str], weights: &str| {
        let mut args = vec!["match".into(), fixture(req)];
        args.extend(offers.iter().map(|o| fixture(o)));
        args.extend(["--weights".into(), weights.into()]);
        Case {
            name,
            args,
            method: "POST",
            uri: "/api/match".into(),
            body: json!({
                "request": read(req),
                "offers": offers.iter().map(|o| read(o)).collect::<Vec<_>>(),
                "weights": weights,
            })
            .to_string(),
        }
    };
    vec![
        validate("validate rhms request", "corpus/rhms-request.slaiot"),
        validate("validate air quality", "corpus/air-quality.slaiot"),
        validate("validate json cycle", "invalid/cycle.sla.json"),
        validate("validate percentage 120", "invalid/percentage-120.slaiot"),
        validate("validate unknown key", "invalid/unknown-key.sla.json"),
        convert("convert golden to dsl", "golden/rhms.sla.json", "dsl"),
        convert(
            "convert layout variants to json",
            "corpus/layout-variants.slaiot",
            "json",
        ),
        convert(
            "format smart home offer",
            "corpus/smart-home-offer.slaiot",
            "dsl",
        ),
        rank(
            "match three offers",
            "match/request.slaiot",
            &[
                "match/offer-cloudco.slaiot",
                "match/offer-edgenet.slaiot",
                "match/offer-budget.slaiot",
            ],
            "3,2,1",
        ),
        rank(
            "match rhms",
            "corpus/rhms-request.slaiot",
            &["corpus/rhms-offer-cloudco.slaiot"],
            "5,3,1",
        ),
        Case {
            name: "vocabulary",
            args: vec!["vocabulary".into()],
            method: "GET",
            uri: "/api/vocabulary".into(),
            body: String::new(),
        },
    ]
}

/// CLI stdout and API body agree byte for byte on every case.
pub fn api_equivalence() -> Result<String, String> {
    let rt = runtime();
    let mut failures = Vec::new();
    let all = cases();
    for case in &all {
        let args: Vec<&str> = case.args.iter().map(String::as_str).collect();
        let cli = stdout(&slaiot(&args));
        let (status, body) = rt.block_on(call(app(), case.method, &case.uri, case.body.clone()));
        if status != StatusCode::OK {
            failures.push(format!("{}: HTTP {status}: {body}", case.name));
        } else if cli.is_empty() || cli != body {
            failures.push(format!("{}: CLI and API differ", case.name));
        }
    }
    if failures.is_empty() {
        Ok(format!("{} cases byte-identical", all.len()))
    } else {
        Err(failures.join("; "))
    }
}
