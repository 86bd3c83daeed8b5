//! Length-prefixed binary framing for [`E2Message`].
//!
//! ```text
//! 0      2        3       4                 8
//! +------+--------+-------+-----------------+----------------+
//! | 45 32| version| type  | payload len (BE)| payload ...    |
//! +------+--------+-------+-----------------+----------------+
//! ```
//!
//! Integers are big-endian, floats are IEEE-754 bit patterns (big-endian),
//! strings carry a u16 byte length followed by UTF-8, lists a u16 count.

use thiserror::Error;

use super::message::{ControlStatus, E2Message, HandoverCommand, RanFunction};
use crate::radio::{CellId, MeasurementReport, RsrpEntry, UeId};
use crate::sim::SimTime;

pub const MAGIC: [u8; 2] = [0x45, 0x32];
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 2]),
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown message type 0x{0:02x}")]
    UnknownType(u8),
    #[error("length mismatch: header declares {declared} payload bytes, found {actual}")]
    LengthMismatch { declared: usize, actual: usize },
    #[error("truncated: needed {needed} bytes, {available} available")]
    Truncated { needed: usize, available: usize },
    #[error("string of {0} bytes exceeds 65535")]
    StringTooLong(usize),
    #[error("list of {0} items exceeds 65535")]
    ListTooLong(usize),
    #[error("invalid UTF-8 in string field")]
    InvalidUtf8,
    #[error("invalid value {value} for field {field}")]
    InvalidField { field: &'static str, value: u64 },
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }
    fn bool(&mut self, v: bool) {
        self.u8(v as u8);
    }
    fn count(&mut self, n: usize) -> Result<(), CodecError> {
        let n = u16::try_from(n).map_err(|_| CodecError::ListTooLong(n))?;
        self.u16(n);
        Ok(())
    }
    fn str(&mut self, s: &str) -> Result<(), CodecError> {
        let n = u16::try_from(s.len()).map_err(|_| CodecError::StringTooLong(s.len()))?;
        self.u16(n);
        self.buf.extend_from_slice(s.as_bytes());
        Ok(())
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let available = self.buf.len() - self.pos;
        if n > available {
            return Err(CodecError::Truncated { needed: n, available });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16, CodecError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, CodecError> {
        Ok(f64::from_bits(self.u64()?))
    }
    fn bool(&mut self, field: &'static str) -> Result<bool, CodecError> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(CodecError::InvalidField { field, value: v as u64 }),
        }
    }
    fn str(&mut self) -> Result<String, CodecError> {
        let n = self.u16()? as usize;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| CodecError::InvalidUtf8)
    }
}

fn write_payload(w: &mut Writer, msg: &E2Message) -> Result<(), CodecError> {
    match msg {
        E2Message::E2SetupRequest { node_id, ran_functions } => {
            w.u32(*node_id);
            w.count(ran_functions.len())?;
            for f in ran_functions {
                w.u16(f.id);
                w.str(&f.name)?;
                w.str(&f.description)?;
            }
        }
        E2Message::E2SetupResponse { node_id, accepted } => {
            w.u32(*node_id);
            w.bool(*accepted);
        }
        E2Message::RicSubscriptionRequest { requestor_id, ran_function_id, report_period_ms } => {
            w.u32(*requestor_id);
            w.u16(*ran_function_id);
            w.u32(*report_period_ms);
        }
        E2Message::RicSubscriptionResponse { subscription_id, accepted } => {
            w.u32(*subscription_id);
            w.bool(*accepted);
        }
        E2Message::RicIndication { subscription_id, report } => {
            w.u32(*subscription_id);
            w.u32(report.ue.0);
            w.u64(report.t.as_ms());
            w.u32(report.serving.0);
            w.count(report.entries.len())?;
            for e in &report.entries {
                w.u32(e.cell.0);
                w.f64(e.rsrp_dbm);
            }
            w.f64(report.sinr_db);
            w.u8(report.cqi);
        }
        E2Message::RicControlRequest { node_id, ue_id, control } => {
            w.u32(*node_id);
            w.u32(*ue_id);
            w.u32(control.target_cell.0);
            w.u32(control.ttt_ms);
        }
        E2Message::RicControlAck { status } => w.u8(status.code()),
    }
    Ok(())
}

pub fn encode(msg: &E2Message) -> Result<Vec<u8>, CodecError> {
    let mut w = Writer { buf: Vec::with_capacity(64) };
    w.buf.extend_from_slice(&MAGIC);
    w.u8(VERSION);
    w.u8(msg.type_tag());
    w.u32(0);
    write_payload(&mut w, msg)?;
    let payload_len = w.buf.len() - HEADER_LEN;
    let len = u32::try_from(payload_len).map_err(|_| CodecError::ListTooLong(payload_len))?;
    w.buf[4..8].copy_from_slice(&len.to_be_bytes());
    debug_assert_eq!(u32::from_be_bytes(w.buf[4..8].try_into().unwrap()) as usize, w.buf.len() - HEADER_LEN);
    Ok(w.buf)
}

/// Parses the 8-byte header, returning `(type tag, declared payload length)`.
pub fn decode_header(bytes: &[u8]) -> Result<(u8, usize), CodecError> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 2 && bytes[..2] != MAGIC {
            return Err(CodecError::BadMagic([bytes[0], bytes[1]]));
        }
        return Err(CodecError::Truncated { needed: HEADER_LEN, available: bytes.len() });
    }
    if bytes[..2] != MAGIC {
        return Err(CodecError::BadMagic([bytes[0], bytes[1]]));
    }
    if bytes[2] != VERSION {
        return Err(CodecError::UnsupportedVersion(bytes[2]));
    }
    let tag = bytes[3];
    if !(0x01..=0x07).contains(&tag) {
        return Err(CodecError::UnknownType(tag));
    }
    let len = u32::from_be_bytes(bytes[4..8].try_into().unwrap()) as usize;
    Ok((tag, len))
}

pub fn decode(bytes: &[u8]) -> Result<E2Message, CodecError> {
    let (tag, declared) = decode_header(bytes)?;
    let actual = bytes.len() - HEADER_LEN;
    if actual < declared {
        return Err(CodecError::Truncated { needed: declared, available: actual });
    }
    if actual > declared {
        return Err(CodecError::LengthMismatch { declared, actual });
    }
    let mut r = Reader { buf: &bytes[HEADER_LEN..], pos: 0 };
    let msg = match tag {
        0x01 => {
            let node_id = r.u32()?;
            let n = r.u16()? as usize;
            let mut ran_functions = Vec::with_capacity(n.min(64));
            for _ in 0..n {
                let id = r.u16()?;
                let name = r.str()?;
                let description = r.str()?;
                ran_functions.push(RanFunction { id, name, description });
            }
            E2Message::E2SetupRequest { node_id, ran_functions }
        }
        0x02 => E2Message::E2SetupResponse { node_id: r.u32()?, accepted: r.bool("accepted")? },
        0x03 => E2Message::RicSubscriptionRequest {
            requestor_id: r.u32()?,
            ran_function_id: r.u16()?,
            report_period_ms: r.u32()?,
        },
        0x04 => E2Message::RicSubscriptionResponse { subscription_id: r.u32()?, accepted: r.bool("accepted")? },
        0x05 => {
            let subscription_id = r.u32()?;
            let ue = UeId(r.u32()?);
            let t = SimTime::from_ms(r.u64()?);
            let serving = CellId(r.u32()?);
            let n = r.u16()? as usize;
            let mut entries = Vec::with_capacity(n.min(64));
            for _ in 0..n {
                let cell = CellId(r.u32()?);
                let rsrp_dbm = r.f64()?;
                entries.push(RsrpEntry { cell, rsrp_dbm });
            }
            let sinr_db = r.f64()?;
            let cqi = r.u8()?;
            E2Message::RicIndication {
                subscription_id,
                report: MeasurementReport { ue, t, serving, entries, sinr_db, cqi },
            }
        }
        0x06 => E2Message::RicControlRequest {
            node_id: r.u32()?,
            ue_id: r.u32()?,
            control: HandoverCommand { target_cell: CellId(r.u32()?), ttt_ms: r.u32()? },
        },
        0x07 => {
            let code = r.u8()?;
            let status = ControlStatus::from_code(code)
                .ok_or(CodecError::InvalidField { field: "status", value: code as u64 })?;
            E2Message::RicControlAck { status }
        }
        _ => unreachable!("tag validated in decode_header"),
    };
    if r.pos != declared {
        return Err(CodecError::LengthMismatch { declared, actual: r.pos });
    }
    Ok(msg)
}
