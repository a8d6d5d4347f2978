//! Shared integration-test helpers. Not every test binary uses all of them.
#![allow(dead_code)]

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use ecg_beatnet::dataset::PhysicalRecord;
use ecg_beatnet::synth::{balanced_sequence, synth_record, SynthConfig};
use ecg_beatnet::wfdb::AnnotationEvent;

pub const GAIN: f64 = 200.0;
pub const BASELINE: i32 = 1024;

/// Packs samples two at a time into format 212 (frame-interleaved).
pub fn encode_212(signals: &[Vec<i16>]) -> Vec<u8> {
    let n = signals[0].len();
    let mut flat: Vec<i16> = (0..n).flat_map(|t| signals.iter().map(move |s| s[t])).collect();
    if flat.len() % 2 == 1 {
        flat.push(0);
    }
    let mut out = Vec::with_capacity(flat.len() / 2 * 3);
    for p in flat.chunks_exact(2) {
        let (a, b) = (p[0] as u16 & 0x0fff, p[1] as u16 & 0x0fff);
        out.push((a & 0xff) as u8);
        out.push(((a >> 8) as u8) | (((b >> 8) as u8) << 4));
        out.push((b & 0xff) as u8);
    }
    out
}

/// MIT annotation stream: SKIP for long gaps, AUX for notes, and the
/// terminating zero word. Subtype, channel and num are not written.
pub fn encode_annotations(events: &[AnnotationEvent]) -> Vec<u8> {
    let mut out = Vec::new();
    let word = |out: &mut Vec<u8>, code: u16, val: u16| out.extend_from_slice(&((code << 10) | (val & 0x3ff)).to_le_bytes());
    let mut prev = 0u64;
    for e in events {
        let delta = e.sample_index - prev;
        prev = e.sample_index;
        if delta > 1023 {
            word(&mut out, 59, 0);
            let d = delta as u32;
            out.extend_from_slice(&((d >> 16) as u16).to_le_bytes());
            out.extend_from_slice(&((d & 0xffff) as u16).to_le_bytes());
            word(&mut out, e.code as u16, 0);
        } else {
            word(&mut out, e.code as u16, delta as u16);
        }
        if let Some(aux) = &e.aux {
            word(&mut out, 63, aux.len() as u16);
            out.extend_from_slice(aux);
            if aux.len() % 2 == 1 {
                out.push(0);
            }
        }
    }
    out.extend_from_slice(&[0, 0]);
    out
}

/// Writes `<dir>/<name>.{hea,dat,atr}` for a physical-unit record, with
/// MIT-BIH's gain, baseline and resolution.
pub fn write_record(dir: &Path, name: &str, rec: &PhysicalRecord) {
    std::fs::create_dir_all(dir).unwrap();
    let digital: Vec<Vec<i16>> = rec
        .signals
        .iter()
        .map(|s| s.iter().map(|&v| ((v * GAIN).round() as i32 + BASELINE).clamp(-2047, 2047) as i16).collect())
        .collect();
    let n = digital[0].len();
    let leads = ["MLII", "V1", "V2", "V5"];
    let mut hea = format!("{name} {} {} {n}\n", digital.len(), rec.fs);
    for (i, s) in digital.iter().enumerate() {
        let checksum = s.iter().fold(0i16, |a, &v| a.wrapping_add(v));
        hea += &format!("{name}.dat 212 {GAIN} 11 {BASELINE} {} {checksum} 0 {}\n", s[0], leads[i]);
    }
    std::fs::write(dir.join(format!("{name}.hea")), hea).unwrap();
    std::fs::write(dir.join(format!("{name}.dat")), encode_212(&digital)).unwrap();
    std::fs::write(dir.join(format!("{name}.atr")), encode_annotations(&rec.annotations)).unwrap();
}

/// A synthetic two-lead record with `per_class` beats of every class.
pub fn synth_physical(name: &str, per_class: usize, seed: u64) -> PhysicalRecord {
    synth_record(&SynthConfig::default(), name, &balanced_sequence(per_class, seed), seed)
}

pub fn write_synth_records(dir: &Path, names: &[&str], per_class: usize) {
    for (i, n) in names.iter().enumerate() {
        write_record(dir, n, &synth_physical(n, per_class, 100 + i as u64));
    }
}

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ecg-beatnet"));
    c.env_remove("ECG_BEATNET_DATA").env_remove("ECG_BEATNET_BASE_URL");
    c
}

pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Writes a run config into `dir/run.json` and returns its path.
pub fn write_config(dir: &Path, json: &str) -> PathBuf {
    let p = dir.join("run.json");
    std::fs::write(&p, json).unwrap();
    p
}

/// Minimal static HTTP/1.1 file server on a loopback port. Serves files
/// from `root`, 404 for anything else, and counts the requests it answered.
pub struct FileServer {
    pub url: String,
    pub requests: Arc<AtomicUsize>,
    pub served: Arc<Mutex<Vec<String>>>,
}

impl FileServer {
    pub fn start(root: PathBuf) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/mitdb/", listener.local_addr().unwrap());
        let requests = Arc::new(AtomicUsize::new(0));
        let served = Arc::new(Mutex::new(Vec::new()));
        let (req, log) = (requests.clone(), served.clone());
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let (root, req, log) = (root.clone(), req.clone(), log.clone());
                std::thread::spawn(move || {
                    let mut reader = BufReader::new(stream.try_clone().unwrap());
                    let mut line = String::new();
                    if reader.read_line(&mut line).is_err() {
                        return;
                    }
                    loop {
                        let mut h = String::new();
                        if reader.read_line(&mut h).unwrap_or(0) == 0 || h == "\r\n" {
                            break;
                        }
                    }
                    req.fetch_add(1, Ordering::SeqCst);
                    let path = line.split_whitespace().nth(1).unwrap_or("/");
                    let name = path.strip_prefix("/mitdb/").unwrap_or("");
                    let body = (!name.contains('/') && !name.is_empty())
                        .then(|| std::fs::read(root.join(name)).ok())
                        .flatten();
                    match body {
                        Some(b) => {
                            log.lock().unwrap().push(name.to_string());
                            let _ = write!(stream, "HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n", b.len());
                            let _ = stream.write_all(&b);
                        }
                        None => {
                            let _ = write!(stream, "HTTP/1.1 404 Not Found\r\nContent-Length: 0\r\nConnection: close\r\n\r\n");
                        }
                    }
                });
            }
        });
        Self { url, requests, served }
    }

    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}
