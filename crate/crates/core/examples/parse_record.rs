//! Reads a WFDB record and summarizes its header, checksums and beats.
//!
//!     cargo run --example parse_record -- data/mitdb 100
//!
//! Without arguments it reads the small synthetic fixture shipped with the
//! tests.

use std::collections::BTreeMap;
use std::path::PathBuf;

use ecg_beatnet::wfdb::{code_mnemonic, map_beat_class, verify_checksums, Record};

fn main() -> ecg_beatnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/wfdb"));
    let name = args.next().unwrap_or_else(|| "syn2".into());

    let rec = Record::load(&dir, &name, "atr")?;
    let h = &rec.header;
    println!("{}: {} signals at {} Hz, {} samples ({:.1} s)", rec.id(), h.n_signals, h.sampling_frequency, h.n_samples, rec.duration_seconds());
    for (s, c) in h.signals.iter().zip(verify_checksums(&rec.signals, h)) {
        let status = if c.passed() { "ok" } else { "MISMATCH" };
        println!("  {:<6} gain {} baseline {} checksum {status}", s.description, s.effective_gain(), s.baseline);
    }

    let phys = rec.physical()?;
    let head: Vec<String> = phys[0].iter().take(5).map(|v| format!("{v:.3}")).collect();
    println!("  first samples of lead 0 (mV): {}", head.join(" "));

    let mut by_code: BTreeMap<&str, usize> = BTreeMap::new();
    let mut beats = [0usize; 5];
    for a in &rec.annotations {
        *by_code.entry(code_mnemonic(a.code).unwrap_or("?")).or_default() += 1;
        if let Some(c) = map_beat_class(a.code) {
            beats[c.index()] += 1;
        }
    }
    println!("annotations by symbol: {by_code:?}");
    println!("beats by class [N, L, R, A, V]: {beats:?}");
    Ok(())
}
