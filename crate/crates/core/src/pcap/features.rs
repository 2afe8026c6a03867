//! Per-packet feature extraction: the canonical 15-slot vector used by the
//! pipeline, and the wider 42-field candidate row fed to feature selection.

use crate::traffic::{FeatureValue, FeatureVector, RawPacket, TransportFields, NEUTRAL_TEXT};

use super::read::DNS_PORT;

/// Extract the 15 pipeline features from a decoded packet. Absent protocol
/// fields take the neutral value: integer 0, or `"∅"` for address/flag slots.
pub fn extract_features(pkt: &RawPacket) -> FeatureVector {
    let int = FeatureValue::Int;
    let (sport, dport, seq, ack, dataofs, chksum, urgptr) = match &pkt.transport {
        TransportFields::Udp {
            sport,
            dport,
            chksum,
            ..
        } => (
            int(*sport as u64),
            int(*dport as u64),
            int(0),
            int(0),
            int(0),
            int(*chksum as u64),
            int(0),
        ),
        TransportFields::Tcp {
            sport,
            dport,
            seq,
            ack,
            dataofs,
            chksum,
            urgptr,
            ..
        } => (
            int(*sport as u64),
            int(*dport as u64),
            int(*seq as u64),
            int(*ack as u64),
            int(*dataofs as u64),
            int(*chksum as u64),
            int(*urgptr as u64),
        ),
        TransportFields::Other => (int(0), int(0), int(0), int(0), int(0), int(0), int(0)),
    };
    let (dns_id, dns_ra) = match &pkt.dns {
        Some(d) => (int(d.id as u64), int(d.ra as u64)),
        None => (int(0), FeatureValue::text(NEUTRAL_TEXT)),
    };

    FeatureVector {
        slots: [
            FeatureValue::Text(pkt.ip.dst_string()),
            FeatureValue::Text(pkt.ip.src_string()),
            int(pkt.ip.len as u64),
            int(pkt.ip.id as u64),
            int(pkt.ip.flags as u64),
            int(pkt.ip.chksum as u64),
            dns_id,
            dns_ra,
            sport,
            dport,
            seq,
            ack,
            dataofs,
            chksum,
            urgptr,
        ],
        timestamp: pkt.timestamp(),
        dns_present: pkt.dns.is_some(),
        ip_len_bytes: pkt.ip.len as u32,
    }
}

pub const CANDIDATE_COUNT: usize = 42;

/// The full candidate field set the genetic algorithm selects from. The 15
/// canonical slot names are a subset of these.
pub const CANDIDATE_NAMES: [&str; CANDIDATE_COUNT] = [
    "frame_len",
    "ip_version",
    "ip_ihl",
    "ip_tos",
    "ip_len",
    "ip_id",
    "ip_flags",
    "ip_frag_off",
    "ip_ttl",
    "ip_proto",
    "ip_chksum",
    "src_addr",
    "dst_addr",
    "sport",
    "dport",
    "chksum",
    "udp_len",
    "seq",
    "ack",
    "dataofs",
    "tcp_reserved",
    "tcp_flags",
    "tcp_window",
    "urgptr",
    "dns_present",
    "dns_id",
    "dns_qr",
    "dns_opcode",
    "dns_aa",
    "dns_tc",
    "dns_rd",
    "dns_ra",
    "dns_z",
    "dns_rcode",
    "dns_qdcount",
    "dns_ancount",
    "dns_nscount",
    "dns_arcount",
    "payload_len",
    "is_tcp",
    "is_udp",
    "is_dns_port",
];

/// Extract all 42 candidate fields in `CANDIDATE_NAMES` order.
pub fn candidate_features(pkt: &RawPacket) -> Vec<FeatureValue> {
    let int = |v: u64| FeatureValue::Int(v);
    let mut row = Vec::with_capacity(CANDIDATE_COUNT);
    row.push(int(pkt.frame_len as u64));
    row.push(int(pkt.ip.version as u64));
    row.push(int(pkt.ip.ihl as u64));
    row.push(int(pkt.ip.tos as u64));
    row.push(int(pkt.ip.len as u64));
    row.push(int(pkt.ip.id as u64));
    row.push(int(pkt.ip.flags as u64));
    row.push(int(pkt.ip.frag_off as u64));
    row.push(int(pkt.ip.ttl as u64));
    row.push(int(pkt.ip.proto as u64));
    row.push(int(pkt.ip.chksum as u64));
    row.push(FeatureValue::Text(pkt.ip.src_string()));
    row.push(FeatureValue::Text(pkt.ip.dst_string()));

    let (sport, dport) = (pkt.transport.sport(), pkt.transport.dport());
    row.push(int(sport.unwrap_or(0) as u64));
    row.push(int(dport.unwrap_or(0) as u64));
    match &pkt.transport {
        TransportFields::Udp { len, chksum, .. } => {
            row.push(int(*chksum as u64));
            row.push(int(*len as u64));
            for _ in 0..7 {
                row.push(int(0)); // seq..urgptr
            }
        }
        TransportFields::Tcp {
            seq,
            ack,
            dataofs,
            reserved,
            flags,
            window,
            chksum,
            urgptr,
            ..
        } => {
            row.push(int(*chksum as u64));
            row.push(int(0)); // udp_len
            row.push(int(*seq as u64));
            row.push(int(*ack as u64));
            row.push(int(*dataofs as u64));
            row.push(int(*reserved as u64));
            row.push(int(*flags as u64));
            row.push(int(*window as u64));
            row.push(int(*urgptr as u64));
        }
        TransportFields::Other => {
            for _ in 0..9 {
                row.push(int(0));
            }
        }
    }

    row.push(int(pkt.dns.is_some() as u64));
    match &pkt.dns {
        Some(d) => {
            row.push(int(d.id as u64));
            row.push(int(d.qr as u64));
            row.push(int(d.opcode as u64));
            row.push(int(d.aa as u64));
            row.push(int(d.tc as u64));
            row.push(int(d.rd as u64));
            row.push(int(d.ra as u64));
            row.push(int(d.z as u64));
            row.push(int(d.rcode as u64));
            row.push(int(d.qdcount as u64));
            row.push(int(d.ancount as u64));
            row.push(int(d.nscount as u64));
            row.push(int(d.arcount as u64));
        }
        None => {
            row.push(int(0)); // dns_id
            for _ in 0..5 {
                row.push(int(0)); // qr, opcode, aa, tc, rd
            }
            row.push(FeatureValue::text(NEUTRAL_TEXT)); // dns_ra, as in the 15-slot vector
            for _ in 0..6 {
                row.push(int(0)); // z, rcode, qd/an/ns/ar counts
            }
        }
    }

    row.push(int(pkt.payload_len as u64));
    row.push(int(matches!(pkt.transport, TransportFields::Tcp { .. }) as u64));
    row.push(int(matches!(pkt.transport, TransportFields::Udp { .. }) as u64));
    let dns_port = sport == Some(DNS_PORT) || dport == Some(DNS_PORT);
    row.push(int(dns_port as u64));

    debug_assert_eq!(row.len(), CANDIDATE_COUNT);
    row
}
