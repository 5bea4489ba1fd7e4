//! Position reports packed into the 32-character SSID of a beacon frame.
//!
//! Wire format: 23 little-endian bytes
//!
//! ```text
//! offset  size  field
//!      0     4  drone_id        u32
//!      4     4  latitude        i32, 1e-7 degree
//!      8     4  longitude       i32, 1e-7 degree
//!     12     2  altitude        i16, decimeters
//!     14     2  velocity_east   i16, cm/s
//!     16     2  velocity_north  i16, cm/s
//!     18     2  velocity_up     i16, cm/s
//!     20     2  timestamp_ms    u16, milliseconds mod 65536
//!     22     1  sequence        u8
//! ```
//!
//! followed by one CRC-8 byte (polynomial 0x07, init 0x00) over those 23
//! bytes. The 24 bytes are base64 encoded with the standard alphabet, which
//! yields exactly 32 printable characters and no padding.

use std::fmt;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SSID_LEN: usize = 32;
pub const BODY_LEN: usize = 23;
pub const FRAME_LEN: usize = BODY_LEN + 1;

pub const LATITUDE_LIMIT: i32 = 900_000_000;
pub const LONGITUDE_LIMIT: i32 = 1_800_000_000;

/// Fixed-point scale of latitude and longitude.
pub const DEGREE_SCALE: f64 = 1e7;

const CRC8: crc::Crc<u8> = crc::Crc::<u8>::new(&crc::CRC_8_SMBUS);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("latitude {0} outside +/-90 degrees")]
    Latitude(i32),
    #[error("longitude {0} outside +/-180 degrees")]
    Longitude(i32),
}

/// Decoding failures. `BadLength` and `BadAlphabet` mean the SSID is not one
/// of ours at all; `CrcMismatch` means it looked like ours but was corrupted.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("bad length: expected {SSID_LEN} characters, got {0}")]
    BadLength(usize),
    #[error("bad alphabet: character {ch:?} at position {position} is not base64")]
    BadAlphabet { position: usize, ch: char },
    #[error("crc mismatch: frame carries {found:#04x}, body hashes to {expected:#04x}")]
    CrcMismatch { expected: u8, found: u8 },
    #[error("decoded report is invalid: {0}")]
    InvalidField(#[from] EncodeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionReport {
    pub drone_id: u32,
    /// 1e-7 degree units.
    pub latitude: i32,
    /// 1e-7 degree units.
    pub longitude: i32,
    /// Decimeters relative to the mission datum.
    pub altitude: i16,
    /// cm/s.
    pub velocity_east: i16,
    /// cm/s.
    pub velocity_north: i16,
    /// cm/s.
    pub velocity_up: i16,
    pub timestamp_ms: u16,
    pub sequence: u8,
}

impl PositionReport {
    pub fn validate(&self) -> Result<(), EncodeError> {
        if !(-LATITUDE_LIMIT..=LATITUDE_LIMIT).contains(&self.latitude) {
            return Err(EncodeError::Latitude(self.latitude));
        }
        if !(-LONGITUDE_LIMIT..=LONGITUDE_LIMIT).contains(&self.longitude) {
            return Err(EncodeError::Longitude(self.longitude));
        }
        Ok(())
    }

    pub fn latitude_deg(&self) -> f64 {
        f64::from(self.latitude) / DEGREE_SCALE
    }

    pub fn longitude_deg(&self) -> f64 {
        f64::from(self.longitude) / DEGREE_SCALE
    }

    /// Degrees to fixed point, rounded to the nearest unit.
    pub fn degrees_to_fixed(deg: f64) -> i32 {
        (deg * DEGREE_SCALE).round() as i32
    }

    fn to_body(self) -> [u8; BODY_LEN] {
        let mut b = [0u8; BODY_LEN];
        b[0..4].copy_from_slice(&self.drone_id.to_le_bytes());
        b[4..8].copy_from_slice(&self.latitude.to_le_bytes());
        b[8..12].copy_from_slice(&self.longitude.to_le_bytes());
        b[12..14].copy_from_slice(&self.altitude.to_le_bytes());
        b[14..16].copy_from_slice(&self.velocity_east.to_le_bytes());
        b[16..18].copy_from_slice(&self.velocity_north.to_le_bytes());
        b[18..20].copy_from_slice(&self.velocity_up.to_le_bytes());
        b[20..22].copy_from_slice(&self.timestamp_ms.to_le_bytes());
        b[22] = self.sequence;
        b
    }

    fn from_body(b: &[u8; BODY_LEN]) -> Self {
        let u32_at = |i: usize| u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]]);
        let i16_at = |i: usize| i16::from_le_bytes([b[i], b[i + 1]]);
        PositionReport {
            drone_id: u32_at(0),
            latitude: u32_at(4) as i32,
            longitude: u32_at(8) as i32,
            altitude: i16_at(12),
            velocity_east: i16_at(14),
            velocity_north: i16_at(16),
            velocity_up: i16_at(18),
            timestamp_ms: u16::from_le_bytes([b[20], b[21]]),
            sequence: b[22],
        }
    }
}

/// A 32-character SSID carrying an encoded [`PositionReport`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BeaconPayload(String);

impl BeaconPayload {
    /// Wraps an SSID after checking its length and alphabet. The CRC is only
    /// checked by [`decode`].
    pub fn parse(ssid: &str) -> Result<Self, DecodeError> {
        let len = ssid.chars().count();
        if len != SSID_LEN {
            return Err(DecodeError::BadLength(len));
        }
        if let Some((position, ch)) = ssid.chars().enumerate().find(|(_, c)| !is_base64_char(*c)) {
            return Err(DecodeError::BadAlphabet { position, ch });
        }
        Ok(BeaconPayload(ssid.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BeaconPayload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn is_base64_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '+' || c == '/'
}

pub fn crc8(bytes: &[u8]) -> u8 {
    CRC8.checksum(bytes)
}

pub fn encode(report: &PositionReport) -> Result<BeaconPayload, EncodeError> {
    report.validate()?;
    let mut frame = [0u8; FRAME_LEN];
    frame[..BODY_LEN].copy_from_slice(&report.to_body());
    frame[BODY_LEN] = crc8(&frame[..BODY_LEN]);
    let text = STANDARD.encode(frame);
    debug_assert_eq!(text.len(), SSID_LEN);
    Ok(BeaconPayload(text))
}

pub fn decode(payload: &BeaconPayload) -> Result<PositionReport, DecodeError> {
    let bytes = STANDARD.decode(payload.as_str()).map_err(|e| match e {
        base64::DecodeError::InvalidByte(position, b) => DecodeError::BadAlphabet { position, ch: char::from(b) },
        _ => DecodeError::BadLength(payload.as_str().len()),
    })?;
    if bytes.len() != FRAME_LEN {
        return Err(DecodeError::BadLength(payload.as_str().len()));
    }
    let mut body = [0u8; BODY_LEN];
    body.copy_from_slice(&bytes[..BODY_LEN]);
    let expected = crc8(&body);
    let found = bytes[BODY_LEN];
    if expected != found {
        return Err(DecodeError::CrcMismatch { expected, found });
    }
    let report = PositionReport::from_body(&body);
    report.validate()?;
    Ok(report)
}

/// Parses and decodes an SSID string in one go.
pub fn decode_ssid(ssid: &str) -> Result<PositionReport, DecodeError> {
    decode(&BeaconPayload::parse(ssid)?)
}
