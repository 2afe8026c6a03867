//! Deterministic synthetic traffic generator: benign TCP/DNS background plus
//! DNS-amplification response bursts aimed at a single victim. Stands in for
//! a captured corpus at desk scale; identical seeds give byte-identical
//! files.
//!
//! Identifier-like fields (IP id, ports, sequence numbers, DNS ids, payload
//! sizes) are drawn from small per-capture pools rather than the full field
//! range. Fully random identifiers would give every packet a unique token
//! and the global min-max normalization would squash the informative slots
//! into a sliver of the range.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::write::{dns_payload, tcp_frame, udp_frame, IpParams, PcapWriter, TcpParams};
use super::PcapError;

/// Knobs for the synthetic capture.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    /// Benign background packets (TCP plus small DNS lookups).
    pub n_benign: usize,
    /// Number of amplification bursts aimed at the victim.
    pub n_attack_bursts: usize,
    /// DNS responses per burst; at least 3 so a burst is labelable.
    pub burst_size: usize,
    /// Seconds each burst spans; must stay inside the labeling window.
    pub burst_span_s: f64,
    /// IP total length of an amplified response, in bytes.
    pub attack_resp_len: u16,
    /// IP total length of a benign DNS response; at most 100 bytes.
    pub benign_dns_len: u16,
    /// Total capture span in seconds.
    pub duration_s: f64,
    /// Fraction of benign packets that are small DNS responses.
    pub benign_dns_frac: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_benign: 1000,
            n_attack_bursts: 8,
            burst_size: 5,
            burst_span_s: 10.0,
            attack_resp_len: 1378,
            benign_dns_len: 78,
            duration_s: 3600.0,
            benign_dns_frac: 0.3,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), PcapError> {
        let fail = |msg: String| Err(PcapError::BadSynthConfig(msg));
        if self.n_attack_bursts > 0 && self.burst_size < 3 {
            return fail(format!("burst_size {} < 3 is not labelable", self.burst_size));
        }
        if !(self.burst_span_s > 0.0 && self.burst_span_s < 30.0) {
            return fail(format!(
                "burst_span_s {} must be positive and inside the 30 s labeling window",
                self.burst_span_s
            ));
        }
        if self.attack_resp_len <= 100 {
            return fail(format!(
                "attack_resp_len {} must exceed the 100-byte label threshold",
                self.attack_resp_len
            ));
        }
        if self.benign_dns_len > 100 || self.benign_dns_len < 40 {
            return fail(format!(
                "benign_dns_len {} must be in [40, 100] (IP+UDP+DNS headers need 40)",
                self.benign_dns_len
            ));
        }
        if !(self.duration_s > self.burst_span_s) {
            return fail(format!(
                "duration_s {} must exceed burst_span_s {}",
                self.duration_s, self.burst_span_s
            ));
        }
        if !(0.0..=1.0).contains(&self.benign_dns_frac) {
            return fail(format!("benign_dns_frac {} outside [0,1]", self.benign_dns_frac));
        }
        if self.n_benign + self.n_attack_bursts * self.burst_size == 0 {
            return fail("config would produce an empty capture".to_string());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthSummary {
    pub written: usize,
    pub attack_packets: usize,
}

// Documentation address ranges (RFC 5737).
const CLIENTS: [u8; 4] = [192, 0, 2, 0]; // 192.0.2.x
const RESOLVERS: [u8; 4] = [198, 51, 100, 0]; // 198.51.100.x
const VICTIM: [u8; 4] = [203, 0, 113, 10];
const WEB_PORTS: [u16; 4] = [80, 443, 22, 8080];

/// Per-capture value pools for identifier-like fields.
struct Pools {
    ephemeral_ports: Vec<u16>,
    ip_ids: Vec<u16>,
    seqs: Vec<u32>,
    acks: Vec<u32>,
    dns_ids: Vec<u16>,
    tcp_payload_lens: Vec<usize>,
    windows: Vec<u16>,
}

impl Pools {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        Pools {
            ephemeral_ports: (0..16).map(|_| rng.gen_range(1024..=65000)).collect(),
            ip_ids: (0..32).map(|_| rng.gen()).collect(),
            seqs: (0..32).map(|_| rng.gen()).collect(),
            acks: (0..32).map(|_| rng.gen()).collect(),
            dns_ids: (0..32).map(|_| rng.gen()).collect(),
            tcp_payload_lens: (0..12).map(|_| rng.gen_range(0..400)).collect(),
            windows: (0..8).map(|_| rng.gen_range(1024..=65000)).collect(),
        }
    }

    fn pick<T: Copy>(pool: &[T], rng: &mut ChaCha8Rng) -> T {
        pool[rng.gen_range(0..pool.len())]
    }
}

enum Scheduled {
    BenignTcp {
        src: [u8; 4],
        dst: [u8; 4],
        sport: u16,
        dport: u16,
        seq: u32,
        ack: u32,
        flags: u8,
        window: u16,
        ip_id: u16,
        payload_len: usize,
    },
    Dns {
        src: [u8; 4],
        dst: [u8; 4],
        dport: u16,
        dns_id: u16,
        ancount: u16,
        ip_id: u16,
        ip_len: u16,
    },
}

struct Event {
    usec: u64,
    order: usize,
    what: Scheduled,
}

/// Write a synthetic classic pcap (little-endian, Ethernet). Returns how many
/// packets were written and how many belong to attack bursts.
pub fn synth_pcap(cfg: &SynthConfig, out: &Path) -> Result<SynthSummary, PcapError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pools = Pools::draw(&mut rng);
    let mut events: Vec<Event> =
        Vec::with_capacity(cfg.n_benign + cfg.n_attack_bursts * cfg.burst_size);

    let mut order = 0usize;
    let mut push = |events: &mut Vec<Event>, t_s: f64, what: Scheduled| {
        let usec = (t_s * 1e6).round() as u64;
        events.push(Event { usec, order, what });
        order += 1;
    };

    for _ in 0..cfg.n_benign {
        let t = rng.gen_range(0.0..cfg.duration_s);
        if rng.gen_bool(cfg.benign_dns_frac) {
            // Small DNS response from a resolver back to a client.
            let mut src = RESOLVERS;
            src[3] = rng.gen_range(1..=8);
            let mut dst = CLIENTS;
            dst[3] = rng.gen_range(1..=32);
            let what = Scheduled::Dns {
                src,
                dst,
                dport: Pools::pick(&pools.ephemeral_ports, &mut rng),
                dns_id: Pools::pick(&pools.dns_ids, &mut rng),
                ancount: rng.gen_range(1..=2),
                ip_id: Pools::pick(&pools.ip_ids, &mut rng),
                ip_len: cfg.benign_dns_len,
            };
            push(&mut events, t, what);
        } else {
            let mut src = CLIENTS;
            src[3] = rng.gen_range(1..=32);
            // The victim is an ordinary server: it sees benign TCP traffic
            // too, so its address alone is not an attack giveaway.
            let dst = if rng.gen_bool(0.15) {
                VICTIM
            } else {
                let mut dst = RESOLVERS;
                dst[3] = rng.gen_range(1..=8);
                dst
            };
            let what = Scheduled::BenignTcp {
                src,
                dst,
                sport: Pools::pick(&pools.ephemeral_ports, &mut rng),
                dport: WEB_PORTS[rng.gen_range(0..WEB_PORTS.len())],
                seq: Pools::pick(&pools.seqs, &mut rng),
                ack: Pools::pick(&pools.acks, &mut rng),
                flags: if rng.gen_bool(0.5) { 0x18 } else { 0x10 }, // PSH|ACK or ACK
                window: Pools::pick(&pools.windows, &mut rng),
                ip_id: Pools::pick(&pools.ip_ids, &mut rng),
                payload_len: Pools::pick(&pools.tcp_payload_lens, &mut rng),
            };
            push(&mut events, t, what);
        }
    }

    let mut attack_packets = 0usize;
    for _ in 0..cfg.n_attack_bursts {
        let t0 = rng.gen_range(0.0..(cfg.duration_s - cfg.burst_span_s));
        for _ in 0..cfg.burst_size {
            let t = t0 + rng.gen_range(0.0..cfg.burst_span_s);
            let mut src = RESOLVERS;
            src[3] = rng.gen_range(1..=8);
            let what = Scheduled::Dns {
                src,
                dst: VICTIM,
                dport: Pools::pick(&pools.ephemeral_ports, &mut rng),
                dns_id: Pools::pick(&pools.dns_ids, &mut rng),
                ancount: rng.gen_range(10..=30),
                ip_id: Pools::pick(&pools.ip_ids, &mut rng),
                ip_len: cfg.attack_resp_len,
            };
            push(&mut events, t, what);
            attack_packets += 1;
        }
    }

    // Capture order is timestamp order; `order` breaks ties deterministically.
    events.sort_by_key(|e| (e.usec, e.order));

    let file = File::create(out)?;
    let mut writer = PcapWriter::new(BufWriter::new(file))?;
    let mut written = 0usize;
    for ev in &events {
        let ts_sec = (ev.usec / 1_000_000) as u32;
        let ts_usec = (ev.usec % 1_000_000) as u32;
        let frame = match &ev.what {
            Scheduled::BenignTcp {
                src,
                dst,
                sport,
                dport,
                seq,
                ack,
                flags,
                window,
                ip_id,
                payload_len,
            } => {
                let payload: Vec<u8> = (0..*payload_len).map(|i| (i % 251) as u8).collect();
                let ip = IpParams {
                    src: *src,
                    dst: *dst,
                    id: *ip_id,
                    ttl: 64,
                    proto: 6,
                    total_len: 40 + *payload_len as u16,
                };
                let tcp = TcpParams {
                    sport: *sport,
                    dport: *dport,
                    seq: *seq,
                    ack: *ack,
                    flags: *flags,
                    window: *window,
                    urgptr: 0,
                };
                tcp_frame(&ip, &tcp, &payload)
            }
            Scheduled::Dns {
                src,
                dst,
                dport,
                dns_id,
                ancount,
                ip_id,
                ip_len,
            } => {
                let dns_len = *ip_len as usize - 28; // minus IP and UDP headers
                let payload = dns_payload(*dns_id, true, true, *ancount, dns_len);
                let ip = IpParams {
                    src: *src,
                    dst: *dst,
                    id: *ip_id,
                    ttl: 64,
                    proto: 17,
                    total_len: *ip_len,
                };
                udp_frame(&ip, 53, *dport, &payload)
            }
        };
        writer.write_record(ts_sec, ts_usec, &frame)?;
        written += 1;
    }
    writer.finish()?;

    Ok(SynthSummary {
        written,
        attack_packets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcap::load_pcap;

    #[test]
    fn counts_forced_by_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.pcap");
        let cfg = SynthConfig {
            n_benign: 0,
            n_attack_bursts: 1,
            burst_size: 3,
            seed: 1,
            ..Default::default()
        };
        let s = synth_pcap(&cfg, &path).unwrap();
        assert_eq!(s.written, 3);
        assert_eq!(s.attack_packets, 3);
    }

    #[test]
    fn same_seed_same_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.pcap");
        let b = dir.path().join("b.pcap");
        let cfg = SynthConfig {
            n_benign: 50,
            n_attack_bursts: 2,
            burst_size: 4,
            seed: 42,
            ..Default::default()
        };
        synth_pcap(&cfg, &a).unwrap();
        synth_pcap(&cfg, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn round_trip_preserves_count_and_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.pcap");
        let cfg = SynthConfig {
            n_benign: 5,
            n_attack_bursts: 0,
            seed: 7,
            ..Default::default()
        };
        let s = synth_pcap(&cfg, &path).unwrap();
        assert_eq!(s.written, 5);
        let cap = load_pcap(&path).unwrap();
        assert_eq!(cap.packets.len(), 5);
        assert_eq!(cap.skipped_non_ip, 0);
        for w in cap.packets.windows(2) {
            assert!(w[0].timestamp() <= w[1].timestamp());
        }
    }

    #[test]
    fn attack_bursts_carry_big_dns_responses() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("atk.pcap");
        let cfg = SynthConfig {
            n_benign: 20,
            n_attack_bursts: 1,
            burst_size: 4,
            seed: 9,
            ..Default::default()
        };
        synth_pcap(&cfg, &path).unwrap();
        let cap = load_pcap(&path).unwrap();
        let big_dns: Vec<_> = cap
            .packets
            .iter()
            .filter(|p| p.dns.is_some() && p.ip.len == 1378)
            .collect();
        assert_eq!(big_dns.len(), 4);
        // All inside the burst span.
        let lo = big_dns.iter().map(|p| p.timestamp()).fold(f64::MAX, f64::min);
        let hi = big_dns.iter().map(|p| p.timestamp()).fold(f64::MIN, f64::max);
        assert!(hi - lo < cfg.burst_span_s);
        for p in big_dns {
            assert_eq!(p.dns.as_ref().unwrap().ra, 1);
        }
    }

    #[test]
    fn identifier_fields_stay_low_cardinality() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pool.pcap");
        let cfg = SynthConfig {
            n_benign: 500,
            n_attack_bursts: 5,
            burst_size: 4,
            seed: 3,
            ..Default::default()
        };
        synth_pcap(&cfg, &path).unwrap();
        let cap = load_pcap(&path).unwrap();
        let distinct_ids: std::collections::HashSet<u16> =
            cap.packets.iter().map(|p| p.ip.id).collect();
        assert!(distinct_ids.len() <= 32, "{} ip ids", distinct_ids.len());
    }
}
