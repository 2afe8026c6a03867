//! Classic pcap reader: global header, record loop, Ethernet/IPv4/UDP/TCP/DNS
//! field decoding.

use std::fs;
use std::path::Path;

use crate::traffic::{DnsFields, IpFields, RawPacket, TransportFields};

use super::PcapError;

const MAGIC_NATIVE: u32 = 0xa1b2_c3d4;
const MAGIC_SWAPPED: u32 = 0xd4c3_b2a1;
const LINKTYPE_ETHERNET: u32 = 1;
const ETHERTYPE_IPV4: u16 = 0x0800;
pub(crate) const DNS_PORT: u16 = 53;

/// Result of loading a capture: decoded IPv4 packets in capture order plus
/// the count of frames that were skipped (non-IP or undecodable).
#[derive(Debug)]
pub struct LoadedCapture {
    pub packets: Vec<RawPacket>,
    pub skipped_non_ip: usize,
}

/// Parse a classic pcap file into `RawPacket`s.
///
/// Packets come back in capture order with microsecond timestamps. Frames
/// without an IPv4 layer are skipped and counted. `BadMagic` and
/// `TruncatedRecord` abort the load.
pub fn load_pcap(path: &Path) -> Result<LoadedCapture, PcapError> {
    let data = fs::read(path)?;
    parse_pcap(&data)
}

pub(crate) fn parse_pcap(data: &[u8]) -> Result<LoadedCapture, PcapError> {
    if data.len() < 24 {
        let magic = if data.len() >= 4 {
            u32::from_le_bytes([data[0], data[1], data[2], data[3]])
        } else {
            0
        };
        return Err(PcapError::BadMagic(magic));
    }
    let magic = u32::from_le_bytes([data[0], data[1], data[2], data[3]]);
    let big_endian = match magic {
        MAGIC_NATIVE => false,
        MAGIC_SWAPPED => true,
        other => return Err(PcapError::BadMagic(other)),
    };
    let read_u32 = |b: &[u8], off: usize| -> u32 {
        let raw = [b[off], b[off + 1], b[off + 2], b[off + 3]];
        if big_endian {
            u32::from_be_bytes(raw)
        } else {
            u32::from_le_bytes(raw)
        }
    };

    let linktype = read_u32(data, 20);
    if linktype != LINKTYPE_ETHERNET {
        return Err(PcapError::UnsupportedLinkType(linktype));
    }

    let mut packets = Vec::new();
    let mut skipped = 0usize;
    let mut off = 24usize;
    let mut index = 0usize;
    while off < data.len() {
        if data.len() - off < 16 {
            return Err(PcapError::TruncatedRecord {
                index,
                claimed: 16,
                remaining: data.len() - off,
            });
        }
        let ts_sec = read_u32(data, off);
        let ts_usec = read_u32(data, off + 4);
        let incl_len = read_u32(data, off + 8);
        let _orig_len = read_u32(data, off + 12);
        off += 16;
        if (data.len() - off) < incl_len as usize {
            return Err(PcapError::TruncatedRecord {
                index,
                claimed: incl_len,
                remaining: data.len() - off,
            });
        }
        let frame = &data[off..off + incl_len as usize];
        off += incl_len as usize;
        index += 1;

        match decode_frame(ts_sec, ts_usec, frame) {
            Some(pkt) => packets.push(pkt),
            None => skipped += 1,
        }
    }

    Ok(LoadedCapture {
        packets,
        skipped_non_ip: skipped,
    })
}

/// Decode one Ethernet frame into a `RawPacket`. Returns `None` for anything
/// that is not parseable IPv4.
fn decode_frame(ts_sec: u32, ts_usec: u32, frame: &[u8]) -> Option<RawPacket> {
    if frame.len() < 14 {
        return None;
    }
    let ethertype = u16::from_be_bytes([frame[12], frame[13]]);
    if ethertype != ETHERTYPE_IPV4 {
        return None;
    }
    let ip_bytes = &frame[14..];
    if ip_bytes.len() < 20 {
        return None;
    }
    let version = ip_bytes[0] >> 4;
    let ihl = (ip_bytes[0] & 0x0f) as usize * 4;
    if version != 4 || ihl < 20 || ip_bytes.len() < ihl {
        return None;
    }
    let flags_frag = u16::from_be_bytes([ip_bytes[6], ip_bytes[7]]);
    let ip = IpFields {
        version,
        ihl: (ihl / 4) as u8,
        tos: ip_bytes[1],
        len: u16::from_be_bytes([ip_bytes[2], ip_bytes[3]]),
        id: u16::from_be_bytes([ip_bytes[4], ip_bytes[5]]),
        flags: (flags_frag >> 13) as u8,
        frag_off: flags_frag & 0x1fff,
        ttl: ip_bytes[8],
        proto: ip_bytes[9],
        chksum: u16::from_be_bytes([ip_bytes[10], ip_bytes[11]]),
        src: [ip_bytes[12], ip_bytes[13], ip_bytes[14], ip_bytes[15]],
        dst: [ip_bytes[16], ip_bytes[17], ip_bytes[18], ip_bytes[19]],
    };

    let l4 = &ip_bytes[ihl..];
    let (transport, payload) = match ip.proto {
        17 if l4.len() >= 8 => {
            let t = TransportFields::Udp {
                sport: u16::from_be_bytes([l4[0], l4[1]]),
                dport: u16::from_be_bytes([l4[2], l4[3]]),
                len: u16::from_be_bytes([l4[4], l4[5]]),
                chksum: u16::from_be_bytes([l4[6], l4[7]]),
            };
            (t, &l4[8..])
        }
        6 if l4.len() >= 20 => {
            let dataofs = (l4[12] >> 4) as usize * 4;
            let t = TransportFields::Tcp {
                sport: u16::from_be_bytes([l4[0], l4[1]]),
                dport: u16::from_be_bytes([l4[2], l4[3]]),
                seq: u32::from_be_bytes([l4[4], l4[5], l4[6], l4[7]]),
                ack: u32::from_be_bytes([l4[8], l4[9], l4[10], l4[11]]),
                dataofs: l4[12] >> 4,
                reserved: l4[12] & 0x0f,
                flags: l4[13],
                window: u16::from_be_bytes([l4[14], l4[15]]),
                chksum: u16::from_be_bytes([l4[16], l4[17]]),
                urgptr: u16::from_be_bytes([l4[18], l4[19]]),
            };
            let body = if l4.len() >= dataofs && dataofs >= 20 {
                &l4[dataofs..]
            } else {
                &[][..]
            };
            (t, body)
        }
        _ => (TransportFields::Other, &[][..]),
    };

    // DNS detection: UDP port 53 with at least a full DNS header captured.
    let dns = match &transport {
        TransportFields::Udp { sport, dport, .. }
            if (*sport == DNS_PORT || *dport == DNS_PORT) && payload.len() >= 12 =>
        {
            Some(decode_dns_header(payload))
        }
        _ => None,
    };

    Some(RawPacket {
        ts_sec,
        ts_usec,
        frame_len: frame.len() as u32,
        payload_len: payload.len() as u32,
        ip,
        transport,
        dns,
    })
}

fn decode_dns_header(payload: &[u8]) -> DnsFields {
    let flags = u16::from_be_bytes([payload[2], payload[3]]);
    DnsFields {
        id: u16::from_be_bytes([payload[0], payload[1]]),
        qr: ((flags >> 15) & 1) as u8,
        opcode: ((flags >> 11) & 0xf) as u8,
        aa: ((flags >> 10) & 1) as u8,
        tc: ((flags >> 9) & 1) as u8,
        rd: ((flags >> 8) & 1) as u8,
        ra: ((flags >> 7) & 1) as u8,
        z: ((flags >> 4) & 0x7) as u8,
        rcode: (flags & 0xf) as u8,
        qdcount: u16::from_be_bytes([payload[4], payload[5]]),
        ancount: u16::from_be_bytes([payload[6], payload[7]]),
        nscount: u16::from_be_bytes([payload[8], payload[9]]),
        arcount: u16::from_be_bytes([payload[10], payload[11]]),
    }
}
