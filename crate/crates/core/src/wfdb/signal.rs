use super::{RecordHeader, WfdbError};

/// Decoded digital samples, one vector per signal, all of equal length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalData {
    pub n_signals: usize,
    pub n_samples: usize,
    pub samples: Vec<Vec<i16>>,
}

#[inline]
fn sign_extend_12(v: u16) -> i16 {
    ((v << 4) as i16) >> 4
}

/// Decodes a format-212 byte stream.
///
/// Every three bytes hold two 12-bit two's-complement samples; samples are
/// frame-interleaved across signals. `bytes` may be longer than needed
/// (trailing bytes are ignored) but not shorter.
pub fn decode_format212(bytes: &[u8], n_signals: usize, n_samples: usize) -> Result<SignalData, WfdbError> {
    if n_signals == 0 {
        return Err(WfdbError::ShapeMismatch("format 212 needs at least one signal".into()));
    }
    let total = n_signals * n_samples;
    let needed = (total * 3).div_ceil(2);
    if bytes.len() < needed {
        return Err(WfdbError::TruncatedSignalFile {
            needed,
            found: bytes.len(),
        });
    }

    let mut samples = vec![Vec::with_capacity(n_samples); n_signals];
    let mut push = |k: usize, v: i16| samples[k % n_signals].push(v);
    let mut k = 0;
    for chunk in bytes[..needed].chunks(3) {
        let b0 = chunk[0] as u16;
        let b1 = chunk[1] as u16;
        push(k, sign_extend_12(((b1 & 0x0F) << 8) | b0));
        k += 1;
        if k == total {
            break;
        }
        let b2 = chunk[2] as u16;
        push(k, sign_extend_12(((b1 & 0xF0) << 4) | b2));
        k += 1;
    }
    debug_assert_eq!(k, total);

    Ok(SignalData {
        n_signals,
        n_samples,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChecksumCheck {
    pub signal: usize,
    pub computed: i16,
    /// `None` when the header carries no checksum for this signal.
    pub expected: Option<i16>,
}

impl ChecksumCheck {
    pub fn passed(&self) -> bool {
        self.expected.is_none_or(|e| e == self.computed)
    }
}

/// Wrapping 16-bit sum of each signal's samples against the header checksum.
/// Mismatches are reported, never raised.
pub fn verify_checksums(data: &SignalData, header: &RecordHeader) -> Vec<ChecksumCheck> {
    data.samples
        .iter()
        .enumerate()
        .map(|(signal, s)| ChecksumCheck {
            signal,
            computed: s.iter().fold(0i16, |acc, &v| acc.wrapping_add(v)),
            expected: header.signals.get(signal).and_then(|spec| spec.checksum),
        })
        .collect()
}

/// Converts digital samples to millivolts: `(d - baseline) / gain`, with a
/// zero gain replaced by the WFDB default of 200.
pub fn to_physical(data: &SignalData, header: &RecordHeader) -> Result<Vec<Vec<f64>>, WfdbError> {
    if data.n_signals != header.n_signals || data.samples.len() != header.signals.len() {
        return Err(WfdbError::ShapeMismatch(format!(
            "data has {} signals, header declares {}",
            data.n_signals, header.n_signals
        )));
    }
    Ok(data
        .samples
        .iter()
        .zip(&header.signals)
        .map(|(s, spec)| {
            let gain = spec.effective_gain();
            let base = spec.baseline as f64;
            s.iter().map(|&d| (d as f64 - base) / gain).collect()
        })
        .collect())
}
