//! Classic pcap writer (little-endian, linktype Ethernet) plus frame
//! construction helpers for the traffic synthesizer.
//!
//! Synthesized frames carry offload-style zero checksums (as captures taken
//! on a sending host with checksum offload do). That keeps the checksum
//! feature slots low-cardinality instead of near-unique per packet.

use std::io::Write;

use super::PcapError;

/// Streams records into a classic little-endian pcap file.
pub struct PcapWriter<W: Write> {
    out: W,
}

impl<W: Write> PcapWriter<W> {
    pub fn new(mut out: W) -> Result<Self, PcapError> {
        out.write_all(&0xa1b2_c3d4u32.to_le_bytes())?;
        out.write_all(&2u16.to_le_bytes())?; // version major
        out.write_all(&4u16.to_le_bytes())?; // version minor
        out.write_all(&0i32.to_le_bytes())?; // thiszone
        out.write_all(&0u32.to_le_bytes())?; // sigfigs
        out.write_all(&65535u32.to_le_bytes())?; // snaplen
        out.write_all(&1u32.to_le_bytes())?; // linktype Ethernet
        Ok(PcapWriter { out })
    }

    pub fn write_record(&mut self, ts_sec: u32, ts_usec: u32, frame: &[u8]) -> Result<(), PcapError> {
        self.out.write_all(&ts_sec.to_le_bytes())?;
        self.out.write_all(&ts_usec.to_le_bytes())?;
        self.out.write_all(&(frame.len() as u32).to_le_bytes())?;
        self.out.write_all(&(frame.len() as u32).to_le_bytes())?;
        self.out.write_all(frame)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, PcapError> {
        self.out.flush()?;
        Ok(self.out)
    }
}

pub(crate) struct IpParams {
    pub src: [u8; 4],
    pub dst: [u8; 4],
    pub id: u16,
    pub ttl: u8,
    pub proto: u8,
    /// IP total length: header + transport header + payload.
    pub total_len: u16,
}

/// Build a 20-byte IPv4 header (checksum left at the offload value 0).
pub(crate) fn ipv4_header(p: &IpParams) -> [u8; 20] {
    let mut h = [0u8; 20];
    h[0] = 0x45; // version 4, ihl 5
    h[1] = 0;
    h[2..4].copy_from_slice(&p.total_len.to_be_bytes());
    h[4..6].copy_from_slice(&p.id.to_be_bytes());
    h[6..8].copy_from_slice(&0x4000u16.to_be_bytes()); // DF set
    h[8] = p.ttl;
    h[9] = p.proto;
    h[12..16].copy_from_slice(&p.src);
    h[16..20].copy_from_slice(&p.dst);
    h
}

const ETH_HDR: [u8; 14] = [
    0x02, 0x00, 0x00, 0x00, 0x00, 0x01, // dst mac
    0x02, 0x00, 0x00, 0x00, 0x00, 0x02, // src mac
    0x08, 0x00, // IPv4
];

/// Build an Ethernet/IPv4/UDP frame.
pub(crate) fn udp_frame(ip: &IpParams, sport: u16, dport: u16, payload: &[u8]) -> Vec<u8> {
    let udp_len = 8 + payload.len() as u16;
    let mut frame = Vec::with_capacity(14 + 20 + udp_len as usize);
    frame.extend_from_slice(&ETH_HDR);
    frame.extend_from_slice(&ipv4_header(ip));
    frame.extend_from_slice(&sport.to_be_bytes());
    frame.extend_from_slice(&dport.to_be_bytes());
    frame.extend_from_slice(&udp_len.to_be_bytes());
    frame.extend_from_slice(&0u16.to_be_bytes()); // checksum offloaded
    frame.extend_from_slice(payload);
    frame
}

pub(crate) struct TcpParams {
    pub sport: u16,
    pub dport: u16,
    pub seq: u32,
    pub ack: u32,
    pub flags: u8,
    pub window: u16,
    pub urgptr: u16,
}

/// Build an Ethernet/IPv4/TCP frame (20-byte TCP header).
pub(crate) fn tcp_frame(ip: &IpParams, tcp: &TcpParams, payload: &[u8]) -> Vec<u8> {
    let mut frame = Vec::with_capacity(14 + 20 + 20 + payload.len());
    frame.extend_from_slice(&ETH_HDR);
    frame.extend_from_slice(&ipv4_header(ip));
    frame.extend_from_slice(&tcp.sport.to_be_bytes());
    frame.extend_from_slice(&tcp.dport.to_be_bytes());
    frame.extend_from_slice(&tcp.seq.to_be_bytes());
    frame.extend_from_slice(&tcp.ack.to_be_bytes());
    frame.push(5 << 4); // dataofs 5, reserved 0
    frame.push(tcp.flags);
    frame.extend_from_slice(&tcp.window.to_be_bytes());
    frame.extend_from_slice(&0u16.to_be_bytes()); // checksum offloaded
    frame.extend_from_slice(&tcp.urgptr.to_be_bytes());
    frame.extend_from_slice(payload);
    frame
}

/// Build a DNS message: 12-byte header plus a deterministic filler body.
pub(crate) fn dns_payload(
    id: u16,
    response: bool,
    ra: bool,
    ancount: u16,
    total_len: usize,
) -> Vec<u8> {
    assert!(total_len >= 12, "DNS payload needs at least its header");
    let mut p = Vec::with_capacity(total_len);
    p.extend_from_slice(&id.to_be_bytes());
    let mut flags = 0u16;
    if response {
        flags |= 1 << 15; // QR
        flags |= 1 << 10; // AA
    }
    flags |= 1 << 8; // RD
    if ra {
        flags |= 1 << 7; // RA
    }
    p.extend_from_slice(&flags.to_be_bytes());
    p.extend_from_slice(&1u16.to_be_bytes()); // QDCOUNT
    p.extend_from_slice(&ancount.to_be_bytes());
    p.extend_from_slice(&0u16.to_be_bytes()); // NSCOUNT
    p.extend_from_slice(&0u16.to_be_bytes()); // ARCOUNT
    while p.len() < total_len {
        p.push(((p.len() * 37) % 251) as u8);
    }
    p
}
