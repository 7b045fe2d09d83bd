use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::ledger::LedgerEntry;

/// Identity of one run; first line of every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub name: String,
    pub seed: u64,
    pub clock: String,
    pub delivery_mode: String,
    pub start_time: u64,
    pub duration_s: u64,
}

/// Final state of one session.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct SessionOutcome {
    pub run: String,
    pub actor: String,
    pub session: String,
    pub status: String,
    pub total_trust: u64,
    pub created_at: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decided_at: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_s: Option<u64>,
}

/// Everything a scenario run produced, ready to emit as jsonlines or a
/// human summary. Byte-identical across runs of the same seed.
#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub meta: RunMeta,
    pub entries: Vec<LedgerEntry>,
    pub sessions: Vec<SessionOutcome>,
    /// Voucher trust values per device actor, in issuance order.
    pub voucher_trusts: BTreeMap<String, Vec<u8>>,
    pub max_message_bytes: u64,
    /// (reason, count), sorted by count descending then name.
    pub rejection_counts: Vec<(String, u64)>,
    pub assertion_failures: Vec<String>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.assertion_failures.is_empty()
    }

    /// One JSON object per line: meta, every ledger entry, every session,
    /// then a closing summary.
    pub fn to_jsonlines(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let mut push = |record: &str, value: Value| {
            let Value::Object(mut map) = value else {
                unreachable!("report records serialize as maps")
            };
            map.insert("record".into(), Value::from(record));
            out.extend_from_slice(
                serde_json::to_string(&Value::Object(map)).expect("report json").as_bytes(),
            );
            out.push(b'\n');
        };
        push("meta", serde_json::to_value(&self.meta).expect("meta json"));
        for entry in &self.entries {
            push("entry", serde_json::to_value(entry).expect("entry json"));
        }
        for session in &self.sessions {
            push("session", serde_json::to_value(session).expect("session json"));
        }
        let summary = serde_json::json!({
            "sessions_granted": self.count_status("granted"),
            "sessions_denied": self.count_status("denied"),
            "sessions_pending": self.count_status("pending"),
            "max_message_bytes": self.max_message_bytes,
            "rejections": self.rejection_counts.iter().map(|(reason, count)| {
                serde_json::json!({"reason": reason, "count": count})
            }).collect::<Vec<_>>(),
            "voucher_trusts": self.voucher_trusts,
            "assertion_failures": self.assertion_failures,
        });
        push("summary", summary);
        out
    }

    /// Operator-facing digest: grant/deny counts, top rejection reasons,
    /// message budget headroom, assertion verdicts.
    pub fn to_summary_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "scenario {} (seed {}, {} delivery, {} clock)\n",
            self.meta.name, self.meta.seed, self.meta.delivery_mode, self.meta.clock
        ));
        out.push_str(&format!(
            "sessions: {} granted, {} denied, {} pending\n",
            self.count_status("granted"),
            self.count_status("denied"),
            self.count_status("pending"),
        ));
        for s in &self.sessions {
            let when = match s.elapsed_s {
                Some(e) => format!("decided at +{e}s"),
                None => "undecided".into(),
            };
            out.push_str(&format!(
                "  [{}] {}: {}, total {}, {}\n",
                s.run, s.actor, s.status, s.total_trust, when
            ));
        }
        if self.rejection_counts.is_empty() {
            out.push_str("rejections: none\n");
        } else {
            let list: Vec<String> = self
                .rejection_counts
                .iter()
                .map(|(reason, count)| format!("{reason} {count}"))
                .collect();
            out.push_str(&format!("rejections: {}\n", list.join(", ")));
        }
        if !self.voucher_trusts.is_empty() {
            let list: Vec<String> = self
                .voucher_trusts
                .iter()
                .map(|(device, trusts)| format!("{device} {trusts:?}"))
                .collect();
            out.push_str(&format!("vouchers per device: {}\n", list.join(", ")));
        }
        out.push_str(&format!("max message bytes: {}\n", self.max_message_bytes));
        if self.assertion_failures.is_empty() {
            out.push_str("assertions: all passed\n");
        } else {
            out.push_str("assertions FAILED:\n");
            for failure in &self.assertion_failures {
                out.push_str(&format!("  - {failure}\n"));
            }
        }
        out
    }

    fn count_status(&self, status: &str) -> usize {
        self.sessions.iter().filter(|s| s.status == status).count()
    }
}

/// Tally rejection reasons from ledger entries, heaviest first.
pub(crate) fn tally_rejections(entries: &[LedgerEntry]) -> Vec<(String, u64)> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for entry in entries {
        if let Some(reason) = &entry.reason {
            *counts.entry(reason.clone()).or_default() += 1;
        }
    }
    let mut list: Vec<(String, u64)> = counts.into_iter().collect();
    list.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    list
}
