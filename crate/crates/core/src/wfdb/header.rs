use super::WfdbError;

/// Gain substituted when a header gives an ADC gain of 0 (or none).
pub const DEFAULT_ADC_GAIN: f64 = 200.0;
/// Sampling frequency assumed when the record line omits it.
pub const DEFAULT_SAMPLING_FREQUENCY: f64 = 250.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RecordHeader {
    pub record_name: String,
    pub n_signals: usize,
    /// Hz.
    pub sampling_frequency: f64,
    /// Samples per signal; 0 means unknown.
    pub n_samples: usize,
    pub signals: Vec<SignalSpec>,
    /// `#` info lines, without the leading `#`.
    pub comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub file_name: String,
    pub format_code: u16,
    /// ADC units per physical unit as written in the header (may be 0).
    pub adc_gain: f64,
    pub baseline: i32,
    pub units: String,
    pub adc_resolution: u8,
    pub adc_zero: i32,
    pub initial_value: i32,
    /// 16-bit checksum of all samples; `None` when the header omits it.
    pub checksum: Option<i16>,
    pub block_size: u32,
    pub description: String,
}

impl SignalSpec {
    pub fn effective_gain(&self) -> f64 {
        if self.adc_gain == 0.0 {
            DEFAULT_ADC_GAIN
        } else {
            self.adc_gain
        }
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> WfdbError {
    WfdbError::MalformedHeader {
        line,
        reason: reason.into(),
    }
}

fn number<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, WfdbError> {
    tok.parse()
        .map_err(|_| malformed(line, format!("{what}: expected a number, found {tok:?}")))
}

/// Parses the text of a `.hea` file.
///
/// Comment and blank lines are ignored. Fields after the sample count on the
/// record line (base time and date) and trailing signal-line fields not used
/// here are skipped.
pub fn parse_header(text: &str) -> Result<RecordHeader, WfdbError> {
    let mut comments = Vec::new();
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(c) = t.strip_prefix('#') {
            comments.push(c.trim().to_string());
            continue;
        }
        lines.push((i + 1, t));
    }

    let Some(&(lineno, record_line)) = lines.first() else {
        return Err(malformed(0, "no record line"));
    };
    let toks: Vec<&str> = record_line.split_whitespace().collect();
    if toks.len() < 2 {
        return Err(malformed(lineno, "record line needs at least a name and a signal count"));
    }
    if toks[0].contains('/') {
        return Err(malformed(lineno, "multi-segment records are not supported"));
    }
    let record_name = toks[0].to_string();
    let n_signals: usize = number(toks[1], lineno, "signal count")?;
    if n_signals == 0 {
        return Err(malformed(lineno, "signal count must be positive"));
    }
    let sampling_frequency = match toks.get(2) {
        // "360", "360/360" or "360/360(0)": the base frequency comes first.
        Some(tok) => {
            let base = tok.split(['/', '(']).next().unwrap_or_default();
            number::<f64>(base, lineno, "sampling frequency")?
        }
        None => DEFAULT_SAMPLING_FREQUENCY,
    };
    if !(sampling_frequency > 0.0) || !sampling_frequency.is_finite() {
        return Err(malformed(lineno, "sampling frequency must be positive"));
    }
    let n_samples = match toks.get(3) {
        Some(tok) => number(tok, lineno, "sample count")?,
        None => 0,
    };

    let signal_lines = &lines[1..];
    if signal_lines.len() != n_signals {
        return Err(malformed(
            lineno,
            format!("record line declares {n_signals} signals but {} signal lines follow", signal_lines.len()),
        ));
    }
    let signals = signal_lines
        .iter()
        .map(|&(n, l)| parse_signal_line(n, l))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(RecordHeader {
        record_name,
        n_signals,
        sampling_frequency,
        n_samples,
        signals,
        comments,
    })
}

fn parse_signal_line(lineno: usize, line: &str) -> Result<SignalSpec, WfdbError> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() < 2 {
        return Err(malformed(lineno, "signal line needs at least a file name and a format"));
    }
    let file_name = toks[0].to_string();

    // Format may carry "xN" (samples per frame), ":skew" and "+offset" suffixes.
    let fmt_digits: String = toks[1].chars().take_while(char::is_ascii_digit).collect();
    if fmt_digits.is_empty() {
        return Err(malformed(lineno, format!("format: expected a number, found {:?}", toks[1])));
    }
    let format_code: u16 = number(&fmt_digits, lineno, "format")?;

    let mut adc_gain = 0.0;
    let mut explicit_baseline = None;
    let mut units = String::from("mV");
    if let Some(tok) = toks.get(2) {
        let (gain_part, unit_part) = match tok.split_once('/') {
            Some((g, u)) => (g, Some(u)),
            None => (*tok, None),
        };
        let gain_str = match gain_part.split_once('(') {
            Some((g, rest)) => {
                let b = rest
                    .strip_suffix(')')
                    .ok_or_else(|| malformed(lineno, format!("unterminated baseline in {tok:?}")))?;
                explicit_baseline = Some(number::<i32>(b, lineno, "baseline")?);
                g
            }
            None => gain_part,
        };
        adc_gain = number::<f64>(gain_str, lineno, "ADC gain")?;
        if !adc_gain.is_finite() || adc_gain < 0.0 {
            return Err(malformed(lineno, "ADC gain must be a non-negative number"));
        }
        if let Some(u) = unit_part {
            units = u.to_string();
        }
    }
    let adc_resolution = match toks.get(3) {
        Some(t) => number(t, lineno, "ADC resolution")?,
        None => 12,
    };
    let adc_zero = match toks.get(4) {
        Some(t) => number(t, lineno, "ADC zero")?,
        None => 0,
    };
    let initial_value = match toks.get(5) {
        Some(t) => number(t, lineno, "initial value")?,
        None => adc_zero,
    };
    let checksum = match toks.get(6) {
        Some(t) => {
            // Writers differ on signedness; both denote the same 16 bits.
            let v: i32 = number(t, lineno, "checksum")?;
            if !(-32768..=65535).contains(&v) {
                return Err(malformed(lineno, format!("checksum {v} does not fit in 16 bits")));
            }
            Some(v as u16 as i16)
        }
        None => None,
    };
    let block_size = match toks.get(7) {
        Some(t) => number(t, lineno, "block size")?,
        None => 0,
    };
    let description = toks.get(8..).map(|d| d.join(" ")).unwrap_or_default();

    Ok(SignalSpec {
        file_name,
        format_code,
        adc_gain,
        baseline: explicit_baseline.unwrap_or(adc_zero),
        units,
        adc_resolution,
        adc_zero,
        initial_value,
        checksum,
        block_size,
        description,
    })
}

#[cfg(test)]
pub(crate) fn render_header(h: &RecordHeader) -> String {
    let mut out = format!("{} {} {} {}\n", h.record_name, h.n_signals, h.sampling_frequency, h.n_samples);
    for s in &h.signals {
        out.push_str(&format!(
            "{} {} {}({})/{} {} {} {} {} {} {}\n",
            s.file_name,
            s.format_code,
            s.adc_gain,
            s.baseline,
            s.units,
            s.adc_resolution,
            s.adc_zero,
            s.initial_value,
            s.checksum.unwrap_or(0),
            s.block_size,
            s.description
        ));
    }
    for c in &h.comments {
        out.push_str(&format!("# {c}\n"));
    }
    out
}
