//! CSV series and plain-text summary rendering. All numeric formatting is
//! fixed-precision so identical runs produce byte-identical artifacts.

use crate::mac::{Node, RunMetrics, TriggerLogRow};
use crate::ru::RuAllocation;
use crate::sim::SimTime;

pub fn us(t: SimTime) -> String {
    format!("{:.3}", t.as_us_f64())
}

pub fn opt_ns(t: Option<SimTime>) -> String {
    t.map(|v| v.as_ns().to_string()).unwrap_or_default()
}

/// packet_id, ap, sta, scheme, enqueue_ns, start_ns, end_ns, collided, retries
pub fn packets_csv(label: &str, metrics: &RunMetrics, nodes: &[Node]) -> String {
    let mut out =
        String::from("packet_id,ap,sta,scheme,enqueue_ns,start_ns,end_ns,collided,retries\n");
    for p in &metrics.packets {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            p.id,
            nodes[p.ap].name,
            nodes[p.sta].name,
            label,
            p.enqueue.as_ns(),
            opt_ns(p.start),
            opt_ns(p.end),
            u8::from(p.collided),
            p.retries,
        ));
    }
    out
}

/// t_send_ns, t_deliver_ns, initiator, withdrawn
pub fn trigger_csv(rows: &[TriggerLogRow], name_of: impl Fn(usize) -> String) -> String {
    let mut out = String::from("t_send_ns,t_deliver_ns,initiator,withdrawn\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.t_send.as_ns(),
            r.t_deliver.as_ns(),
            name_of(r.initiator),
            u8::from(r.withdrawn),
        ));
    }
    out
}

#[derive(Debug, Clone)]
pub struct CfoRow {
    pub t_s: f64,
    pub true_offset_hz: f64,
    pub est_hz: f64,
    pub tuning_word: i64,
    pub tuned: bool,
}

/// time_s, true_offset_hz, est_hz, tuning_word, tuned
pub fn cfo_csv(rows: &[CfoRow]) -> String {
    let mut out = String::from("time_s,true_offset_hz,est_hz,tuning_word,tuned\n");
    for r in rows {
        out.push_str(&format!(
            "{:.1},{:.3},{:.2},{},{}\n",
            r.t_s,
            r.true_offset_hz,
            r.est_hz,
            r.tuning_word,
            u8::from(r.tuned),
        ));
    }
    out
}

pub fn cfo_diff_csv(series: &[(f64, f64)]) -> String {
    let mut out = String::from("time_s,diff_hz\n");
    for (t, d) in series {
        out.push_str(&format!("{t:.1},{d:.3}\n"));
    }
    out
}

/// (ap, sta_id, ru_size, ru_index, mcs, n_sym, duration_us) rows plus the
/// padding flag from unequal user durations.
pub fn allocation_lines(alloc: &RuAllocation) -> Vec<String> {
    alloc
        .users
        .iter()
        .map(|u| {
            format!(
                "ap={} sta_id={} ru_size={} ru_index={} mcs={} n_sym={} duration_us={} padded={}",
                u.ap,
                u.sta_id,
                u.ru.size.tones(),
                u.ru.index,
                u.mcs,
                u.n_sym,
                us(alloc.duration()),
                if u.padded { "yes" } else { "no" },
            )
        })
        .collect()
}

/// One verdict in a run report.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckResult {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

pub fn render_checks(checks: &[CheckResult]) -> String {
    let mut out = String::from("\n[checks]\n");
    if checks.is_empty() {
        out.push_str("(none configured)\n");
        return out;
    }
    for c in checks {
        out.push_str(&format!(
            "{} {}: {}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        ));
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    out.push_str(&format!(
        "result: {} ({passed}/{} checks)\n",
        if passed == checks.len() {
            "PASS"
        } else {
            "FAIL"
        },
        checks.len()
    ));
    out
}
