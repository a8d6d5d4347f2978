//! The `ecg-beatnet` command line run in-process on synthetic records:
//! segment, train, evaluate and predict.

use std::path::Path;

use ecg_beatnet::cli;
use ecg_beatnet::synth::{balanced_sequence, synth_record, SynthConfig};

fn ecg(args: &[&str]) {
    println!("$ ecg-beatnet {}", args.join(" "));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(std::iter::once("ecg-beatnet").chain(args.iter().copied()), &mut out, &mut err);
    print!("{}", String::from_utf8_lossy(&out));
    eprint!("{}", String::from_utf8_lossy(&err));
    assert_eq!(code, 0, "exit code {code}");
}

fn main() {
    let work = tempfile::tempdir().unwrap();
    let data = work.path().join("data");
    let names = ["900", "901", "902"];
    for (i, n) in names.iter().enumerate() {
        let rec = synth_record(&SynthConfig::default(), n, &balanced_sequence(20, i as u64), i as u64);
        write_wfdb(&data, n, &rec);
    }
    let config = work.path().join("run.json");
    let json = serde_json::json!({
        "data_dir": data,
        "cache_path": work.path().join("beats.ebw"),
        "output_dir": work.path().join("runs"),
        "records": names,
        "optimizer": {"epochs": 15},
    });
    std::fs::write(&config, json.to_string()).unwrap();
    let c = config.to_str().unwrap();

    ecg(&["--config", c, "inspect", "900"]);
    ecg(&["--config", c, "segment"]);
    ecg(&["--config", c, "train"]);
    ecg(&["--config", c, "eval"]);
    ecg(&["--config", c, "--format", "json", "predict", "902"]);
}

/// Minimal WFDB writer: format 212, gain 200, baseline 1024.
fn write_wfdb(dir: &Path, name: &str, rec: &ecg_beatnet::dataset::PhysicalRecord) {
    std::fs::create_dir_all(dir).unwrap();
    let digital: Vec<Vec<i16>> = rec
        .signals
        .iter()
        .map(|s| s.iter().map(|&v| ((v * 200.0).round() as i32 + 1024).clamp(-2047, 2047) as i16).collect())
        .collect();
    let n = digital[0].len();
    let mut hea = format!("{name} {} {} {n}\n", digital.len(), rec.fs);
    for (s, lead) in digital.iter().zip(["MLII", "V1"]) {
        let sum = s.iter().fold(0i16, |a, &v| a.wrapping_add(v));
        hea += &format!("{name}.dat 212 200 11 1024 {} {sum} 0 {lead}\n", s[0]);
    }
    std::fs::write(dir.join(format!("{name}.hea")), hea).unwrap();

    let flat: Vec<u16> = (0..n).flat_map(|t| digital.iter().map(move |s| s[t] as u16 & 0xfff)).collect();
    let mut dat = Vec::new();
    for p in flat.chunks(2) {
        let (a, b) = (p[0], p.get(1).copied().unwrap_or(0));
        dat.extend_from_slice(&[a as u8, ((a >> 8) | ((b >> 8) << 4)) as u8, b as u8]);
    }
    std::fs::write(dir.join(format!("{name}.dat")), dat).unwrap();

    // Annotation words: 6-bit code, 10-bit delta; SKIP (59) for longer gaps.
    let mut atr = Vec::new();
    let mut prev = 0;
    for a in &rec.annotations {
        let delta = a.sample_index - prev;
        prev = a.sample_index;
        if delta > 1023 {
            atr.extend_from_slice(&(59u16 << 10).to_le_bytes());
            atr.extend_from_slice(&((delta >> 16) as u16).to_le_bytes());
            atr.extend_from_slice(&(delta as u16).to_le_bytes());
            atr.extend_from_slice(&((a.code as u16) << 10).to_le_bytes());
        } else {
            atr.extend_from_slice(&(((a.code as u16) << 10) | delta as u16).to_le_bytes());
        }
    }
    atr.extend_from_slice(&[0, 0]);
    std::fs::write(dir.join(format!("{name}.atr")), atr).unwrap();
}
