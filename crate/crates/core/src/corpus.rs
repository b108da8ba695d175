//! Deterministic synthetic desk corpus: a 12-host inventory with 40
//! vulnerabilities, 25 signature rules over 10 of them, and a labeled flow
//! set whose attack traffic follows the inventory's reachable paths.
//!
//! The corpus is built so the integration effects are observable at desk
//! scale: rules cover only the high-severity quarter of the vulnerability
//! inventory, attack flows ride an attacker-rooted campaign tree, and a
//! slice of benign traffic mimics attack features on pairs no attack path
//! can reach (the false positives the graph knowledge is able to remove).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::flow::{ClassLabel, Dataset, FlowRecord, Protocol};
use crate::rng::seeded_rng;
use crate::threat::{Host, NetworkInventory, Service, SignatureRule, Vulnerability};

pub const EXTERNAL_IP: &str = "203.0.113.66";

/// Internal hosts by tier: .1-.3 DMZ, .4-.7 application, .8-.11 core.
fn internal_ip(i: usize) -> String {
    format!("10.0.0.{}", i + 1)
}

const N_INTERNAL: usize = 11;
const N_VULNS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub seed: u64,
    pub n_flows: usize,
    pub n_features: usize,
    /// Fraction of flows carrying an attack label.
    pub attack_fraction: f64,
    /// Fraction of benign flows drawn from attack feature profiles on
    /// pairs that no attack path reaches.
    pub noisy_benign_fraction: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            seed: 7,
            n_flows: 20_000,
            n_features: 80,
            attack_fraction: 0.15,
            noisy_benign_fraction: 0.015,
        }
    }
}

impl CorpusConfig {
    pub fn with_seed(seed: u64) -> Self {
        CorpusConfig {
            seed,
            ..CorpusConfig::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeskCorpus {
    pub inventory: NetworkInventory,
    pub rules: Vec<SignatureRule>,
    pub dataset: Dataset,
}

/// One lateral step of the attack campaign: flows src -> dst:port carrying
/// `class` traffic that exploits a ruled vulnerability on the destination.
struct CampaignStep {
    src_idx: usize,
    dst_idx: usize,
    port: u16,
    class: ClassLabel,
}

/// Ruled vulnerability table: (internal host index, service, port, class).
/// These are the 10 high-severity vulnerabilities the rule set covers
/// (25% of the inventory).
const RULED: [(usize, &str, u16, ClassLabel); 10] = [
    (0, "http", 80, ClassLabel::Dos),       // 10.0.0.1
    (1, "ftp", 21, ClassLabel::FtpPatator), // 10.0.0.2
    (1, "ssh", 22, ClassLabel::FtpPatator), // 10.0.0.2
    (3, "http", 80, ClassLabel::Dos),       // 10.0.0.4
    (4, "ftp", 21, ClassLabel::FtpPatator), // 10.0.0.5
    (5, "ssh", 22, ClassLabel::FtpPatator), // 10.0.0.6
    (7, "mysql", 3306, ClassLabel::Dos),    // 10.0.0.8
    (8, "smb", 445, ClassLabel::Dos),       // 10.0.0.9
    (9, "ssh", 22, ClassLabel::FtpPatator), // 10.0.0.10
    (10, "http", 80, ClassLabel::Dos),      // 10.0.0.11
];

/// Signature ids per ruled vulnerability; 25 rules over 10 vulnerabilities
/// (real rule sets carry several signatures per CVE).
const RULE_SIDS: [&[u32]; 10] = [
    &[2001, 2002, 2003, 2008],
    &[1001, 1002, 1003],
    &[1004, 1005],
    &[2004, 2005, 2009],
    &[1006, 1007],
    &[1008, 1009],
    &[4001, 4002, 4006],
    &[4004, 4005],
    &[1010, 1011],
    &[2006, 2007],
];

fn ruled_vuln_id(i: usize) -> String {
    format!("CVE-2017-{}", 1000 + i)
}

fn extra_vuln_id(i: usize) -> String {
    format!("CVE-2017-{}", 2000 + i)
}

/// Destination ports benign traffic uses; disjoint from the ruled service
/// ports so signatures fire on attack traffic only.
const BENIGN_PORTS: [u16; 6] = [443, 53, 8443, 993, 123, 8080];

/// Benign Gaussian profile per informative column: (column index, mean, sd).
/// Attack flows start from this baseline and elevate a small random subset
/// of these columns, so catching most attacks takes a tree deep enough to
/// test many of them, one per level along the all-negative branch.
const INFORMATIVE: [(usize, f64, f64); 20] = [
    (0, 50_000.0, 20_000.0),  // Flow Duration
    (1, 18.0, 8.0),           // Total Fwd Packets
    (2, 16.0, 7.0),           // Total Backward Packets
    (3, 9_000.0, 4_000.0),    // Total Length of Fwd Packets
    (5, 1_200.0, 400.0),      // Fwd Packet Length Max
    (7, 420.0, 150.0),        // Fwd Packet Length Mean
    (9, 1_400.0, 450.0),      // Bwd Packet Length Max
    (11, 500.0, 180.0),       // Bwd Packet Length Mean
    (13, 25_000.0, 10_000.0), // Flow Bytes/s
    (14, 45.0, 18.0),         // Flow Packets/s
    (15, 2_200.0, 900.0),     // Flow IAT Mean
    (17, 9_000.0, 3_000.0),   // Flow IAT Max
    (20, 2_400.0, 1_000.0),   // Fwd IAT Mean
    (25, 2_600.0, 1_100.0),   // Bwd IAT Mean
    (35, 25.0, 10.0),         // Fwd Packets/s
    (39, 480.0, 160.0),       // Packet Length Mean
    (43, 1.2, 0.8),           // SYN Flag Count
    (45, 3.5, 1.5),           // PSH Flag Count
    (46, 12.0, 5.0),          // ACK Flag Count
    (51, 460.0, 160.0),       // Average Packet Size
];

/// Informative columns each attack elevates, and by how many benign sigmas.
/// The pools overlap in the middle so the two attack classes share some
/// telltale columns but differ in magnitude.
const ELEVATED_PER_ATTACK: usize = 2;
const DOS_POOL: std::ops::Range<usize> = 0..12;
const DOS_SHIFT: f64 = 6.0;
const PATATOR_POOL: std::ops::Range<usize> = 8..20;
const PATATOR_SHIFT: f64 = 3.5;

/// (mean, sd) of a Gaussian feature profile.
type Profile = (f64, f64);

/// Down/Up Ratio separates the two attack classes sharply (floods push
/// traffic out, brute forcing pulls responses back) but benign traffic
/// spans the whole range, so on its own it barely helps telling attack
/// from benign: (column, benign, ftp-patator, dos).
const CLASS_SHAPE: (usize, Profile, Profile, Profile) = (50, (5.0, 3.0), (8.0, 0.7), (2.0, 0.7));

pub const FEATURE_NAMES: [&str; 80] = [
    "Flow Duration",
    "Total Fwd Packets",
    "Total Backward Packets",
    "Total Length of Fwd Packets",
    "Total Length of Bwd Packets",
    "Fwd Packet Length Max",
    "Fwd Packet Length Min",
    "Fwd Packet Length Mean",
    "Fwd Packet Length Std",
    "Bwd Packet Length Max",
    "Bwd Packet Length Min",
    "Bwd Packet Length Mean",
    "Bwd Packet Length Std",
    "Flow Bytes/s",
    "Flow Packets/s",
    "Flow IAT Mean",
    "Flow IAT Std",
    "Flow IAT Max",
    "Flow IAT Min",
    "Fwd IAT Total",
    "Fwd IAT Mean",
    "Fwd IAT Std",
    "Fwd IAT Max",
    "Fwd IAT Min",
    "Bwd IAT Total",
    "Bwd IAT Mean",
    "Bwd IAT Std",
    "Bwd IAT Max",
    "Bwd IAT Min",
    "Fwd PSH Flags",
    "Bwd PSH Flags",
    "Fwd URG Flags",
    "Bwd URG Flags",
    "Fwd Header Length",
    "Bwd Header Length",
    "Fwd Packets/s",
    "Bwd Packets/s",
    "Packet Length Min",
    "Packet Length Max",
    "Packet Length Mean",
    "Packet Length Std",
    "Packet Length Variance",
    "FIN Flag Count",
    "SYN Flag Count",
    "RST Flag Count",
    "PSH Flag Count",
    "ACK Flag Count",
    "URG Flag Count",
    "CWE Flag Count",
    "ECE Flag Count",
    "Down/Up Ratio",
    "Average Packet Size",
    "Avg Fwd Segment Size",
    "Avg Bwd Segment Size",
    "Fwd Avg Bytes/Bulk",
    "Fwd Avg Packets/Bulk",
    "Fwd Avg Bulk Rate",
    "Bwd Avg Bytes/Bulk",
    "Bwd Avg Packets/Bulk",
    "Bwd Avg Bulk Rate",
    "Subflow Fwd Packets",
    "Subflow Fwd Bytes",
    "Subflow Bwd Packets",
    "Subflow Bwd Bytes",
    "Init Fwd Win Bytes",
    "Init Bwd Win Bytes",
    "Fwd Act Data Packets",
    "Fwd Seg Size Min",
    "Active Mean",
    "Active Std",
    "Active Max",
    "Active Min",
    "Idle Mean",
    "Idle Std",
    "Idle Max",
    "Idle Min",
    "Fwd Bytes/Bulk Avg",
    "Fwd Packet/Bulk Avg",
    "Bwd Bytes/Bulk Avg",
    "Bwd Packet/Bulk Avg",
];

/// Standard normal draw via Box-Muller; keeps the crate free of a
/// distributions dependency.
fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn build_inventory(rng: &mut ChaCha8Rng) -> NetworkInventory {
    let mut vulnerabilities = Vec::new();
    for (i, (_, service, _, _)) in RULED.iter().enumerate() {
        vulnerabilities.push(Vulnerability {
            id: ruled_vuln_id(i),
            service: service.to_string(),
            cvss_base: 8.0 + rng.gen::<f64>() * 1.8,
            description: format!("remotely exploitable {service} flaw"),
        });
    }
    let local_services = ["http", "dns", "ntp", "ldap", "smtp", "nfs"];
    for i in 0..(N_VULNS - RULED.len()) {
        vulnerabilities.push(Vulnerability {
            id: extra_vuln_id(i),
            service: local_services[i % local_services.len()].to_string(),
            cvss_base: 2.0 + rng.gen::<f64>() * 4.0,
            description: "local or low-impact issue".to_string(),
        });
    }

    let mut hosts = vec![Host {
        ip: EXTERNAL_IP.to_string(),
        services: vec![],
        vulns: vec![],
        external: true,
    }];
    for h in 0..N_INTERNAL {
        let mut vulns: Vec<String> = RULED
            .iter()
            .enumerate()
            .filter(|(_, (host, _, _, _))| *host == h)
            .map(|(i, _)| ruled_vuln_id(i))
            .collect();
        let mut services: Vec<Service> = RULED
            .iter()
            .filter(|(host, _, _, _)| *host == h)
            .map(|(_, name, port, _)| Service {
                name: name.to_string(),
                port: *port,
            })
            .collect();
        services.push(Service {
            name: "https".to_string(),
            port: 443,
        });
        // unruled vulnerabilities round-robin over the internal hosts
        for i in 0..(N_VULNS - RULED.len()) {
            if i % N_INTERNAL == h {
                vulns.push(extra_vuln_id(i));
            }
        }
        hosts.push(Host {
            ip: internal_ip(h),
            services,
            vulns,
            external: false,
        });
    }

    // layered reachability: external -> DMZ -> application -> core, with a
    // few lateral links inside the application and core tiers
    let mut reachability = Vec::new();
    for dmz in 0..3 {
        reachability.push((EXTERNAL_IP.to_string(), internal_ip(dmz)));
    }
    for dmz in 0..3 {
        for app in 3..7 {
            reachability.push((internal_ip(dmz), internal_ip(app)));
        }
    }
    for app in 3..7 {
        for core in 7..11 {
            reachability.push((internal_ip(app), internal_ip(core)));
        }
    }
    for (a, b) in [(3, 4), (4, 5), (5, 6), (7, 8), (8, 9), (9, 10)] {
        reachability.push((internal_ip(a), internal_ip(b)));
    }

    NetworkInventory {
        hosts,
        vulnerabilities,
        reachability,
    }
}

fn build_rules() -> Vec<SignatureRule> {
    let mut rules = Vec::new();
    for (i, (host, service, port, class)) in RULED.iter().enumerate() {
        let dst = internal_ip(*host);
        for (k, &sid) in RULE_SIDS[i].iter().enumerate() {
            rules.push(SignatureRule {
                sid,
                message: format!("ET EXPLOIT {service} attack attempt against {dst} (sig {k})"),
                attack_class: *class,
                vuln_id: ruled_vuln_id(i),
                match_spec: crate::threat::MatchSpec {
                    protocol: Some(Protocol::Tcp),
                    dst_ports: Some((*port, *port)),
                    src_cidr: None,
                    dst_cidr: Some(format!("{dst}/32").parse().expect("static cidr")),
                },
            });
        }
    }
    rules
}

/// Lateral movement along the reachability tiers. The DMZ bursts from the
/// external attacker (web DoS on .1, ftp/ssh brute force on .2) are emitted
/// separately and absorb the remaining attack volume.
fn lateral_steps() -> Vec<CampaignStep> {
    vec![
        CampaignStep {
            src_idx: 0,
            dst_idx: 3,
            port: 80,
            class: ClassLabel::Dos,
        },
        CampaignStep {
            src_idx: 1,
            dst_idx: 4,
            port: 21,
            class: ClassLabel::FtpPatator,
        },
        CampaignStep {
            src_idx: 1,
            dst_idx: 5,
            port: 22,
            class: ClassLabel::FtpPatator,
        },
        CampaignStep {
            src_idx: 3,
            dst_idx: 7,
            port: 3306,
            class: ClassLabel::Dos,
        },
        CampaignStep {
            src_idx: 4,
            dst_idx: 8,
            port: 445,
            class: ClassLabel::Dos,
        },
        CampaignStep {
            src_idx: 4,
            dst_idx: 9,
            port: 22,
            class: ClassLabel::FtpPatator,
        },
        CampaignStep {
            src_idx: 3,
            dst_idx: 10,
            port: 80,
            class: ClassLabel::Dos,
        },
    ]
}

/// Flows per lateral campaign step; small on purpose so early-stage alert
/// logs (limit_alerts) sometimes miss deep steps.
const LATERAL_FLOWS: usize = 4;

struct FeatureGen {
    n_features: usize,
    noise_mean: Vec<f64>,
    noise_sd: Vec<f64>,
}

impl FeatureGen {
    fn new(n_features: usize, rng: &mut ChaCha8Rng) -> FeatureGen {
        let noise_mean = (0..n_features).map(|_| rng.gen::<f64>() * 100.0).collect();
        let noise_sd = (0..n_features)
            .map(|_| 1.0 + rng.gen::<f64>() * 19.0)
            .collect();
        FeatureGen {
            n_features,
            noise_mean,
            noise_sd,
        }
    }

    /// Feature vector drawn from `profile`'s class distributions. The label
    /// on the record may differ (noisy benign traffic).
    fn features(&self, profile: ClassLabel, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_features);
        for j in 0..self.n_features {
            let (mean, sd) = match INFORMATIVE.iter().find(|(idx, ..)| *idx == j) {
                Some((_, mean, sd)) => (*mean, *sd),
                None => (self.noise_mean[j], self.noise_sd[j]),
            };
            v.push(mean + sd * gauss(rng));
        }
        let (shape_col, benign_shape, patator_shape, dos_shape) = CLASS_SHAPE;
        if shape_col < self.n_features {
            let (mean, sd) = match profile {
                ClassLabel::Benign => benign_shape,
                ClassLabel::FtpPatator => patator_shape,
                ClassLabel::Dos => dos_shape,
            };
            v[shape_col] = mean + sd * gauss(rng);
        }
        let (pool, shift) = match profile {
            ClassLabel::Benign => return v,
            ClassLabel::Dos => (DOS_POOL, DOS_SHIFT),
            ClassLabel::FtpPatator => (PATATOR_POOL, PATATOR_SHIFT),
        };
        let mut picks: Vec<usize> = pool.collect();
        for _ in 0..picks.len().saturating_sub(ELEVATED_PER_ATTACK) {
            picks.remove(rng.gen_range(0..picks.len()));
        }
        for p in picks {
            let (col, _, sd) = INFORMATIVE[p];
            if col < self.n_features {
                v[col] += shift * sd;
            }
        }
        v
    }
}

/// Internal (src, dst) pairs connected by the campaign tree (transitively).
/// Benign traffic mostly avoids these routes, so the path feature splits the
/// classes almost cleanly at a single node.
fn campaign_closure() -> std::collections::BTreeSet<(usize, usize)> {
    let steps = lateral_steps();
    let mut closure: std::collections::BTreeSet<(usize, usize)> =
        steps.iter().map(|s| (s.src_idx, s.dst_idx)).collect();
    loop {
        let mut grew = false;
        let pairs: Vec<(usize, usize)> = closure.iter().copied().collect();
        for &(a, b) in &pairs {
            for &(c, d) in &pairs {
                if b == c && closure.insert((a, d)) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    closure
}

/// Reversed-tier (src, dst) pairs: traffic that can never sit on an attack
/// path because reachability only flows outward-in.
fn reversed_pairs() -> Vec<(String, String)> {
    let mut pairs = Vec::new();
    for app in 3..7 {
        for dmz in 0..3 {
            pairs.push((internal_ip(app), internal_ip(dmz)));
        }
    }
    for core in 7..11 {
        for app in 3..7 {
            pairs.push((internal_ip(core), internal_ip(app)));
        }
        for dmz in 0..3 {
            pairs.push((internal_ip(core), internal_ip(dmz)));
        }
    }
    pairs
}

pub fn generate(config: &CorpusConfig) -> DeskCorpus {
    assert!(
        config.n_features >= 60,
        "profiles assume the CIC-style feature layout"
    );
    let mut rng = seeded_rng(config.seed);
    let inventory = build_inventory(&mut rng);
    let rules = build_rules();
    let feature_gen = FeatureGen::new(config.n_features, &mut rng);

    let n_attacks = (config.n_flows as f64 * config.attack_fraction).round() as usize;
    let n_dos = n_attacks * 2 / 3;
    let n_patator = n_attacks - n_dos;
    let n_benign = config.n_flows - n_attacks;
    let n_noisy = (n_benign as f64 * config.noisy_benign_fraction).round() as usize;
    let n_clean = n_benign - n_noisy;

    let mut records: Vec<FlowRecord> = Vec::with_capacity(config.n_flows);
    let mut flow_no = 0usize;

    let mut push_flow = |records: &mut Vec<FlowRecord>,
                         rng: &mut ChaCha8Rng,
                         src: String,
                         dst: String,
                         dst_port: u16,
                         label: ClassLabel,
                         profile: ClassLabel| {
        flow_no += 1;
        records.push(FlowRecord {
            flow_id: format!("flow-{flow_no:06}"),
            src_ip: src,
            dst_ip: dst,
            src_port: rng.gen_range(20_000..60_000),
            dst_port,
            protocol: Protocol::Tcp,
            features: feature_gen.features(profile, rng),
            label,
        });
    };

    // campaign: lateral steps first (fixed small counts), bursts absorb the rest
    let mut dos_left = n_dos;
    let mut patator_left = n_patator;
    for step in &lateral_steps() {
        let src = internal_ip(step.src_idx);
        for _ in 0..LATERAL_FLOWS {
            let left = match step.class {
                ClassLabel::Dos => &mut dos_left,
                _ => &mut patator_left,
            };
            if *left == 0 {
                break;
            }
            *left -= 1;
            push_flow(
                &mut records,
                &mut rng,
                src.clone(),
                internal_ip(step.dst_idx),
                step.port,
                step.class,
                step.class,
            );
        }
    }
    // secondary ssh brute-force burst (about a tenth of the patator volume)
    let ssh_burst = (n_patator / 10).min(patator_left);
    for _ in 0..ssh_burst {
        patator_left -= 1;
        push_flow(
            &mut records,
            &mut rng,
            EXTERNAL_IP.to_string(),
            internal_ip(1),
            22,
            ClassLabel::FtpPatator,
            ClassLabel::FtpPatator,
        );
    }
    for _ in 0..patator_left {
        push_flow(
            &mut records,
            &mut rng,
            EXTERNAL_IP.to_string(),
            internal_ip(1),
            21,
            ClassLabel::FtpPatator,
            ClassLabel::FtpPatator,
        );
    }
    for _ in 0..dos_left {
        push_flow(
            &mut records,
            &mut rng,
            EXTERNAL_IP.to_string(),
            internal_ip(0),
            80,
            ClassLabel::Dos,
            ClassLabel::Dos,
        );
    }

    // benign background between internal hosts on non-ruled ports, mostly
    // off the campaign's routes
    let campaign_pairs = campaign_closure();
    for _ in 0..n_clean {
        let mut pair = (0, 0);
        for _ in 0..3 {
            let src = rng.gen_range(0..N_INTERNAL);
            let mut dst = rng.gen_range(0..N_INTERNAL);
            while dst == src {
                dst = rng.gen_range(0..N_INTERNAL);
            }
            pair = (src, dst);
            if !campaign_pairs.contains(&pair) {
                break;
            }
        }
        let port = BENIGN_PORTS[rng.gen_range(0..BENIGN_PORTS.len())];
        push_flow(
            &mut records,
            &mut rng,
            internal_ip(pair.0),
            internal_ip(pair.1),
            port,
            ClassLabel::Benign,
            ClassLabel::Benign,
        );
    }

    // noisy benign: attack-profile features on reversed-tier pairs
    let reversed = reversed_pairs();
    for _ in 0..n_noisy {
        let (src, dst) = reversed[rng.gen_range(0..reversed.len())].clone();
        let profile = if rng.gen::<f64>() < 2.0 / 3.0 {
            ClassLabel::Dos
        } else {
            ClassLabel::FtpPatator
        };
        let port = BENIGN_PORTS[rng.gen_range(0..BENIGN_PORTS.len())];
        push_flow(
            &mut records,
            &mut rng,
            src,
            dst,
            port,
            ClassLabel::Benign,
            profile,
        );
    }

    crate::rng::seeded_shuffle(&mut records, config.seed ^ 0x5eed_f10e);

    let feature_names = FEATURE_NAMES
        .iter()
        .take(config.n_features)
        .map(|s| s.to_string())
        .collect();
    DeskCorpus {
        inventory,
        rules,
        dataset: Dataset::new(records, feature_names),
    }
}
