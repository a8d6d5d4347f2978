//! Decoders against dumps produced by independent WFDB readers.

use std::path::{Path, PathBuf};

use ecg_beatnet::wfdb::{verify_checksums, Record};
use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn reference(dir: &Path, name: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{name}.reference.json"))).unwrap();
    // The dumps write unreadable samples as bare NaN, which JSON lacks.
    serde_json::from_str(&text.replace("NaN", "null")).unwrap()
}

fn check_signals(name: &str) {
    let dir = fixtures().join("wfdb");
    let r = reference(&dir, name);
    let header = ecg_beatnet::wfdb::read_header(&dir, name).unwrap();
    let data = ecg_beatnet::wfdb::read_signals(&dir, &header).unwrap();

    assert_eq!(header.record_name, r["record_name"]);
    assert_eq!(header.n_signals as u64, r["n_signals"].as_u64().unwrap());
    assert_eq!(header.sampling_frequency, r["fs"].as_f64().unwrap());
    assert_eq!(header.n_samples as u64, r["n_samples"].as_u64().unwrap());
    for (i, (spec, rs)) in header.signals.iter().zip(r["signals"].as_array().unwrap()).enumerate() {
        assert_eq!(spec.file_name, rs["file_name"], "signal {i}");
        assert_eq!(spec.format_code as u64, rs["format"].as_u64().unwrap());
        assert_eq!(spec.effective_gain(), rs["adc_gain"].as_f64().unwrap());
        assert_eq!(spec.baseline as i64, rs["baseline"].as_i64().unwrap());
        assert_eq!(spec.adc_resolution as u64, rs["adc_res"].as_u64().unwrap());
        assert_eq!(spec.adc_zero as i64, rs["adc_zero"].as_i64().unwrap());
        assert_eq!(spec.initial_value as i64, rs["init_value"].as_i64().unwrap());
        assert_eq!(spec.checksum.map(|c| c as u16 as i64), Some(rs["checksum"].as_i64().unwrap() & 0xffff));
        assert_eq!(spec.description, rs["description"]);
        let all: Vec<i16> = rs["all"].as_array().unwrap().iter().map(|v| v.as_i64().unwrap() as i16).collect();
        assert_eq!(data.samples[i], all, "signal {i} samples");
    }
    assert!(verify_checksums(&data, &header).iter().all(|c| c.passed()));

    let phys = ecg_beatnet::wfdb::to_physical(&data, &header).unwrap();
    for (s, head) in r["physical_head"].as_array().unwrap().iter().enumerate() {
        for (t, v) in head.as_array().unwrap().iter().enumerate() {
            // The reference maps the format's invalid-sample value to NaN;
            // this reader keeps it as an ordinary value.
            match v.as_f64() {
                Some(x) => assert!((phys[s][t] - x).abs() <= 1e-9, "signal {s} sample {t}: {} vs {x}", phys[s][t]),
                None => assert_eq!(data.samples[s][t], -2048),
            }
        }
    }
}

#[test]
fn two_signal_record_matches_reference() {
    check_signals("syn2");
}

#[test]
fn odd_sample_count_single_signal_matches_reference() {
    check_signals("syn1odd");
}

#[test]
fn annotations_match_reference() {
    let dir = fixtures().join("wfdb");
    let r = reference(&dir, "syn2");
    let rec = Record::load(&dir, "syn2", "atr").unwrap();
    let expected = r["annotations"].as_array().unwrap();
    assert_eq!(rec.annotations.len(), expected.len());
    for (a, e) in rec.annotations.iter().zip(expected) {
        assert_eq!(a.sample_index, e["sample"].as_u64().unwrap());
        assert_eq!(a.code as u64, e["code"].as_u64().unwrap());
        assert_eq!(a.subtype as i64, e["subtype"].as_i64().unwrap());
        assert_eq!(a.channel as u64, e["chan"].as_u64().unwrap());
        assert_eq!(a.num as i64, e["num"].as_i64().unwrap());
        let aux = a.aux.as_deref().map(|b| String::from_utf8_lossy(b).into_owned()).unwrap_or_default();
        assert_eq!(aux, e["aux"].as_str().unwrap());
        assert_eq!(ecg_beatnet::wfdb::code_mnemonic(a.code), e["symbol"].as_str());
    }
}

#[test]
fn mitdb_100_head_matches_reference() {
    let dir = fixtures().join("mitdb100-head");
    let r = reference(&dir, "100");
    let header = ecg_beatnet::wfdb::read_header(&dir, "100").unwrap();
    assert_eq!((header.n_signals, header.sampling_frequency, header.n_samples), (2, 360.0, 10));
    assert_eq!(header.signals[0].description, "MLII");
    assert_eq!(header.signals[1].description, "V5");
    assert_eq!(header.signals[0].checksum, Some(-22131));
    assert_eq!(header.signals[1].checksum, Some(20052));
    assert_eq!(header.comments.len(), 2);

    let data = ecg_beatnet::wfdb::read_signals(&dir, &header).unwrap();
    for (s, row) in r["digital"].as_array().unwrap().iter().enumerate() {
        let want: Vec<i16> = row.as_array().unwrap().iter().map(|v| v.as_i64().unwrap() as i16).collect();
        assert_eq!(data.samples[s], want);
    }
    let phys = ecg_beatnet::wfdb::to_physical(&data, &header).unwrap();
    for (t, frame) in r["physical"].as_array().unwrap().iter().enumerate() {
        for (s, v) in frame.as_array().unwrap().iter().enumerate() {
            assert!((phys[s][t] - v.as_f64().unwrap()).abs() <= 1e-12);
        }
    }
}

#[test]
fn missing_annotation_file_names_the_path() {
    let dir = fixtures().join("wfdb");
    let err = Record::load(&dir, "syn1odd", "atr").unwrap_err();
    assert!(matches!(&err, ecg_beatnet::Error::FileNotFound(p) if p.ends_with("syn1odd.atr")), "{err}");
    assert!(err.to_string().contains("syn1odd.atr"));
}
