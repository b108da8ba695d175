//! Network inventory, vulnerabilities, simplified signature rules, alert
//! generation, and the lifecycle's vulnerability database.
//!
//! Rules match on flow headers only (protocol, destination port range,
//! optional source/destination CIDRs); payload inspection is out of scope.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::net::Ipv4Addr;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{ClassLabel, FlowRecord, Protocol};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Service {
    pub name: String,
    pub port: u16,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Host {
    pub ip: String,
    #[serde(default)]
    pub services: Vec<Service>,
    #[serde(default)]
    pub vulns: Vec<String>,
    /// Hosts reachable from outside the perimeter; these are the default
    /// attacker entry points for path enumeration.
    #[serde(default)]
    pub external: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vulnerability {
    pub id: String,
    pub service: String,
    pub cvss_base: f64,
    #[serde(default)]
    pub description: String,
}

/// Hosts, vulnerability table, and the directed reachability relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkInventory {
    pub hosts: Vec<Host>,
    pub vulnerabilities: Vec<Vulnerability>,
    /// Ordered (src_ip, dst_ip) pairs.
    pub reachability: Vec<(String, String)>,
}

impl NetworkInventory {
    pub fn from_path(path: &Path) -> Result<NetworkInventory> {
        let text = std::fs::read_to_string(path)?;
        let inv: NetworkInventory = serde_json::from_str(&text)?;
        inv.validate()?;
        Ok(inv)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ips = BTreeSet::new();
        for h in &self.hosts {
            if !ips.insert(h.ip.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate host ip {}", h.ip)));
            }
        }
        let table = self.vuln_table();
        for v in self.vulnerabilities.iter() {
            if !(0.0..=10.0).contains(&v.cvss_base) {
                return Err(Error::InvalidConfig(format!(
                    "cvss_base {} out of [0,10] for {}",
                    v.cvss_base, v.id
                )));
            }
        }
        for h in &self.hosts {
            for vid in &h.vulns {
                if !table.contains_key(vid.as_str()) {
                    return Err(Error::UnknownVulnerability(vid.clone()));
                }
            }
        }
        for (s, d) in &self.reachability {
            if !ips.contains(s.as_str()) || !ips.contains(d.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "reachability pair ({s}, {d}) references unknown host"
                )));
            }
        }
        Ok(())
    }

    pub fn vuln_table(&self) -> BTreeMap<&str, &Vulnerability> {
        self.vulnerabilities
            .iter()
            .map(|v| (v.id.as_str(), v))
            .collect()
    }

    pub fn host(&self, ip: &str) -> Option<&Host> {
        self.hosts.iter().find(|h| h.ip == ip)
    }

    /// Hosts flagged `external: true`; the default attacker entry points.
    pub fn external_ips(&self) -> Vec<String> {
        self.hosts
            .iter()
            .filter(|h| h.external)
            .map(|h| h.ip.clone())
            .collect()
    }

    /// All non-external hosts; the default victim set.
    pub fn internal_ips(&self) -> Vec<String> {
        self.hosts
            .iter()
            .filter(|h| !h.external)
            .map(|h| h.ip.clone())
            .collect()
    }

    pub fn reachability_set(&self) -> BTreeSet<(&str, &str)> {
        self.reachability
            .iter()
            .map(|(s, d)| (s.as_str(), d.as_str()))
            .collect()
    }
}

/// IPv4 CIDR block, e.g. "10.0.0.0/24".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cidr {
    addr: u32,
    prefix: u8,
}

impl Cidr {
    pub fn contains(&self, ip: &str) -> bool {
        let Ok(ip) = ip.parse::<Ipv4Addr>() else {
            return false;
        };
        let ip = u32::from(ip);
        let mask = if self.prefix == 0 {
            0
        } else {
            u32::MAX << (32 - self.prefix)
        };
        (ip & mask) == (self.addr & mask)
    }
}

impl FromStr for Cidr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Cidr> {
        let bad = || Error::InvalidConfig(format!("invalid CIDR: {s}"));
        let (addr, prefix) = match s.split_once('/') {
            Some((a, p)) => (a, p.parse::<u8>().map_err(|_| bad())?),
            None => (s, 32),
        };
        if prefix > 32 {
            return Err(bad());
        }
        let addr = addr.parse::<Ipv4Addr>().map_err(|_| bad())?;
        Ok(Cidr {
            addr: u32::from(addr),
            prefix,
        })
    }
}

impl fmt::Display for Cidr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", Ipv4Addr::from(self.addr), self.prefix)
    }
}

impl Serialize for Cidr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Cidr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Cidr, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Header predicate of a simplified signature rule. Every present field must
/// match for the rule to fire.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MatchSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<Protocol>,
    /// Inclusive destination port range [lo, hi].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dst_ports: Option<(u16, u16)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src_cidr: Option<Cidr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dst_cidr: Option<Cidr>,
}

impl MatchSpec {
    pub fn matches(&self, flow: &FlowRecord) -> bool {
        if let Some(p) = self.protocol {
            if flow.protocol != p {
                return false;
            }
        }
        if let Some((lo, hi)) = self.dst_ports {
            if flow.dst_port < lo || flow.dst_port > hi {
                return false;
            }
        }
        if let Some(c) = &self.src_cidr {
            if !c.contains(&flow.src_ip) {
                return false;
            }
        }
        if let Some(c) = &self.dst_cidr {
            if !c.contains(&flow.dst_ip) {
                return false;
            }
        }
        true
    }
}

/// Simplified IDS signature: fires on matching flows and names the
/// vulnerability it evidences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureRule {
    pub sid: u32,
    pub message: String,
    pub attack_class: ClassLabel,
    pub vuln_id: String,
    #[serde(rename = "match")]
    pub match_spec: MatchSpec,
}

/// Load rules from a JSON array, rejecting rules whose vulnerability does not
/// resolve in the inventory or whose class is Benign. Fail fast at load time,
/// not match time.
pub fn load_rules(path: &Path, inventory: &NetworkInventory) -> Result<Vec<SignatureRule>> {
    let text = std::fs::read_to_string(path)?;
    let rules: Vec<SignatureRule> = serde_json::from_str(&text)?;
    validate_rules(&rules, inventory)?;
    Ok(rules)
}

pub fn validate_rules(rules: &[SignatureRule], inventory: &NetworkInventory) -> Result<()> {
    let table = inventory.vuln_table();
    for r in rules {
        if r.attack_class == ClassLabel::Benign {
            return Err(Error::InvalidConfig(format!(
                "rule sid {} has class Benign",
                r.sid
            )));
        }
        if !table.contains_key(r.vuln_id.as_str()) {
            return Err(Error::UnresolvedRule {
                sid: r.sid,
                vuln_id: r.vuln_id.clone(),
            });
        }
    }
    Ok(())
}

/// One rule firing on one flow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alert {
    pub sid: u32,
    pub vuln_id: String,
    pub src_ip: String,
    pub dst_ip: String,
    pub flow_id: String,
}

/// One alert per (rule, flow) pair whose predicate matches, ordered by flow
/// order then sid ascending.
pub fn match_rules(rules: &[SignatureRule], flows: &[FlowRecord]) -> Vec<Alert> {
    let mut by_sid: Vec<&SignatureRule> = rules.iter().collect();
    by_sid.sort_by_key(|r| r.sid);

    let mut alerts = Vec::new();
    for flow in flows {
        for rule in &by_sid {
            if rule.match_spec.matches(flow) {
                alerts.push(Alert {
                    sid: rule.sid,
                    vuln_id: rule.vuln_id.clone(),
                    src_ip: flow.src_ip.clone(),
                    dst_ip: flow.dst_ip.clone(),
                    flow_id: flow.flow_id.clone(),
                });
            }
        }
    }
    alerts
}

/// Keep the first round(fraction * N) alerts of a seeded shuffle. For a fixed
/// seed, growing the fraction only adds alerts (prefixes of one permutation),
/// which models a sparser early-stage alert log.
pub fn limit_alerts(alerts: &[Alert], fraction: f64, seed: u64) -> Vec<Alert> {
    let mut shuffled: Vec<Alert> = alerts.to_vec();
    crate::rng::seeded_shuffle(&mut shuffled, seed);
    let keep = crate::rng::fraction_count(fraction.clamp(0.0, 1.0), shuffled.len());
    shuffled.truncate(keep);
    shuffled
}

pub fn write_alerts_csv<W: Write>(alerts: &[Alert], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["sid", "vuln_id", "src_ip", "dst_ip", "flow_id"])?;
    for a in alerts {
        wtr.write_record([
            a.sid.to_string().as_str(),
            &a.vuln_id,
            &a.src_ip,
            &a.dst_ip,
            &a.flow_id,
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VulnEntry {
    pub vulnerability: Vulnerability,
    pub confirmed: bool,
    /// Iteration of the first confirming alert; never overwritten.
    pub first_seen_iteration: Option<u64>,
}

/// Lifecycle store of known vulnerabilities plus their confirmation status.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VulnDatabase {
    pub entries: BTreeMap<String, VulnEntry>,
}

impl VulnDatabase {
    pub fn from_inventory(inventory: &NetworkInventory) -> VulnDatabase {
        let entries = inventory
            .vulnerabilities
            .iter()
            .map(|v| {
                (
                    v.id.clone(),
                    VulnEntry {
                        vulnerability: v.clone(),
                        confirmed: false,
                        first_seen_iteration: None,
                    },
                )
            })
            .collect();
        VulnDatabase { entries }
    }

    pub fn confirmed_ids(&self) -> BTreeSet<&str> {
        self.entries
            .iter()
            .filter(|(_, e)| e.confirmed)
            .map(|(id, _)| id.as_str())
            .collect()
    }
}

/// Mark every alerted vulnerability confirmed. `first_seen_iteration` is set
/// only on the first confirmation; re-applying the same alerts is a no-op.
pub fn confirm_vulns(db: &VulnDatabase, alerts: &[Alert], iteration: u64) -> Result<VulnDatabase> {
    let mut out = db.clone();
    for alert in alerts {
        let entry = out
            .entries
            .get_mut(&alert.vuln_id)
            .ok_or_else(|| Error::UnknownVulnerability(alert.vuln_id.clone()))?;
        if !entry.confirmed {
            entry.confirmed = true;
            entry.first_seen_iteration = Some(iteration);
        }
    }
    Ok(out)
}
