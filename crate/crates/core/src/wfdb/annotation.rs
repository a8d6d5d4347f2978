use super::WfdbError;

/// One labelled event from an MIT-format annotation file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationEvent {
    /// Absolute sample number.
    pub sample_index: u64,
    /// Annotation type (1..=49 for real annotations).
    pub code: u8,
    pub subtype: i8,
    pub channel: u8,
    pub num: i8,
    pub aux: Option<Vec<u8>>,
}

/// Pseudo-annotation codes that modify parser state instead of emitting an
/// event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum PseudoCode {
    Skip = 59,
    Num = 60,
    Sub = 61,
    Chn = 62,
    Aux = 63,
}

fn word_at(bytes: &[u8], offset: usize) -> Result<u16, WfdbError> {
    match bytes.get(offset..offset + 2) {
        Some(w) => Ok(u16::from_le_bytes([w[0], w[1]])),
        None => Err(WfdbError::TruncatedAnnotationFile { offset }),
    }
}

/// Parses a complete MIT-format annotation stream.
///
/// Each 16-bit little-endian word carries a 6-bit code and a 10-bit value.
/// Real codes advance the running time by the value and emit an event;
/// `SKIP` adds a signed 32-bit offset (high word first); `NUM`, `SUB`,
/// `CHN` and `AUX` annotate the preceding event, with `NUM` and `CHN`
/// carrying over to later events until changed. A zero word ends the stream.
pub fn parse_annotations(bytes: &[u8]) -> Result<Vec<AnnotationEvent>, WfdbError> {
    let mut events: Vec<AnnotationEvent> = Vec::new();
    let mut time: i64 = 0;
    let mut channel: u8 = 0;
    let mut num: i8 = 0;
    let mut offset = 0;

    loop {
        let at = offset;
        let word = word_at(bytes, offset)?;
        offset += 2;
        let code = (word >> 10) as u8;
        let value = word & 0x03FF;

        match code {
            0 if value == 0 => break,
            0..=49 => {
                time += value as i64;
                if time < 0 || events.last().is_some_and(|e| (e.sample_index as i64) > time) {
                    return Err(WfdbError::AnnotationOutOfOrder { offset: at, sample: time });
                }
                events.push(AnnotationEvent {
                    sample_index: time as u64,
                    code,
                    subtype: 0,
                    channel,
                    num,
                    aux: None,
                });
            }
            50..=58 => return Err(WfdbError::UnknownPseudoCodeLayout { code, offset: at }),
            59 => {
                let hi = word_at(bytes, offset)? as u32;
                let lo = word_at(bytes, offset + 2)? as u32;
                offset += 4;
                time += ((hi << 16) | lo) as i32 as i64;
            }
            60 => {
                num = value as u8 as i8;
                if let Some(e) = events.last_mut() {
                    e.num = num;
                }
            }
            61 => {
                if let Some(e) = events.last_mut() {
                    e.subtype = value as u8 as i8;
                }
            }
            62 => {
                channel = value as u8;
                if let Some(e) = events.last_mut() {
                    e.channel = channel;
                }
            }
            63 => {
                let len = value as usize;
                let padded = len + (len & 1);
                let data = bytes
                    .get(offset..offset + padded)
                    .ok_or(WfdbError::TruncatedAnnotationFile { offset })?;
                if let Some(e) = events.last_mut() {
                    e.aux = Some(data[..len].to_vec());
                }
                offset += padded;
            }
            _ => unreachable!("6-bit code"),
        }
    }
    Ok(events)
}
