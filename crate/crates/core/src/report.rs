//! Deterministic report emission: number formatting, run manifests, CSV
//! and flat-JSON bodies.
//!
//! Two runs of the same configuration must produce byte-identical bodies
//! (timing lines excluded), so all floats go through one 12-significant-
//! digit formatter and manifests echo parameters in sorted order.

use std::fmt::Write as _;

/// Format with 12 significant digits, plain decimal inside a readable
/// magnitude window, scientific outside it.
pub fn fmt12(x: f64) -> String {
    if x == f64::INFINITY {
        return "inf".into();
    }
    if x == f64::NEG_INFINITY {
        return "-inf".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..12).contains(&mag) {
        let decimals = (11 - mag).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_zeros(&s)
    } else {
        let s = format!("{x:.11e}");
        s.replace("e0", "e").replace("e-0", "e-")
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

/// FNV-1a 64-bit hash, hex-encoded; used to fingerprint configurations.
pub fn fnv1a_hex(data: &[u8]) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in data {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

/// Everything needed to reproduce a run: configuration hash, subcommand,
/// echoed parameters, tool version, and (excluded from determinism
/// comparisons) wall-clock timings.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config_hash: String,
    pub subcommand: String,
    pub params: Vec<(String, String)>,
    pub version: String,
    pub timings_ms: Vec<(String, u128)>,
}

impl RunManifest {
    pub fn new(config_text: &str, subcommand: &str) -> Self {
        RunManifest {
            config_hash: fnv1a_hex(config_text.as_bytes()),
            subcommand: subcommand.to_string(),
            params: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timings_ms: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.params.push((key.to_string(), value.into()));
        self
    }

    pub fn timing(&mut self, label: &str, ms: u128) {
        self.timings_ms.push((label.to_string(), ms));
    }

    /// `# ` comment header for CSV bodies. Timing lines carry their own
    /// marker so determinism checks can drop them.
    pub fn csv_header(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# manifest config_hash = {}", self.config_hash);
        let _ = writeln!(out, "# manifest subcommand = {}", self.subcommand);
        let _ = writeln!(out, "# manifest version = {}", self.version);
        let mut params = self.params.clone();
        params.sort();
        for (k, v) in &params {
            let _ = writeln!(out, "# manifest param {k} = {v}");
        }
        for (label, ms) in &self.timings_ms {
            let _ = writeln!(out, "# timing {label} = {ms} ms");
        }
        out
    }

    /// Flat JSON object fragment (keys `manifest_*`).
    pub fn json_fields(&self) -> Vec<(String, JsonValue)> {
        let mut out = vec![
            (
                "manifest_config_hash".to_string(),
                JsonValue::Str(self.config_hash.clone()),
            ),
            (
                "manifest_subcommand".to_string(),
                JsonValue::Str(self.subcommand.clone()),
            ),
            (
                "manifest_version".to_string(),
                JsonValue::Str(self.version.clone()),
            ),
        ];
        let mut params = self.params.clone();
        params.sort();
        for (k, v) in params {
            out.push((format!("manifest_param_{k}"), JsonValue::Str(v)));
        }
        out
    }
}

/// Minimal JSON scalar/array support for the flat report objects.
#[derive(Debug, Clone)]
pub enum JsonValue {
    Num(f64),
    Str(String),
    Bool(bool),
    Array(Vec<f64>),
}

/// Serialize a flat JSON object with deterministic key order (insertion
/// order, numbers through [`fmt12`]).
pub fn flat_json(fields: &[(String, JsonValue)]) -> String {
    let mut out = String::from("{");
    for (i, (k, v)) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "\n  \"{}\": ", escape(k));
        match v {
            JsonValue::Num(x) => {
                if x.is_finite() {
                    let _ = write!(out, "{}", fmt12(*x));
                } else {
                    let _ = write!(out, "\"{}\"", fmt12(*x));
                }
            }
            JsonValue::Str(s) => {
                let _ = write!(out, "\"{}\"", escape(s));
            }
            JsonValue::Bool(b) => {
                let _ = write!(out, "{b}");
            }
            JsonValue::Array(xs) => {
                let inner: Vec<String> = xs.iter().map(|x| fmt12(*x)).collect();
                let _ = write!(out, "[{}]", inner.join(", "));
            }
        }
    }
    out.push_str("\n}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Assemble a CSV body: manifest header, column row, then data rows.
pub fn csv_body(manifest: &RunManifest, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = manifest.csv_header();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt12_window() {
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(1.0), "1");
        assert_eq!(fmt12(0.25), "0.25");
        assert_eq!(fmt12(std::f64::consts::LN_2), "0.69314718056");
        assert_eq!(fmt12(f64::NEG_INFINITY), "-inf");
        assert!(fmt12(1.5e-7).contains('e'));
        assert_eq!(fmt12(123456.0), "123456");
    }

    #[test]
    fn fmt12_significant_digits() {
        let s = fmt12(0.4812118250596035);
        assert_eq!(s, "0.48121182506");
    }

    #[test]
    fn fnv_hash_stable() {
        assert_eq!(fnv1a_hex(b""), "cbf29ce484222325");
        assert_eq!(fnv1a_hex(b"a"), fnv1a_hex(b"a"));
        assert_ne!(fnv1a_hex(b"a"), fnv1a_hex(b"b"));
    }

    #[test]
    fn manifest_header_sorted_and_timed() {
        let mut m = RunManifest::new("config text", "pressure");
        m.param("zeta", "2");
        m.param("alpha", "1");
        m.timing("total", 12);
        let h = m.csv_header();
        let alpha_pos = h.find("param alpha").unwrap();
        let zeta_pos = h.find("param zeta").unwrap();
        assert!(alpha_pos < zeta_pos);
        assert!(h.contains("# timing total = 12 ms"));
    }

    #[test]
    fn flat_json_shape() {
        let fields = vec![
            ("xi".to_string(), JsonValue::Array(vec![-0.5])),
            ("pressure".to_string(), JsonValue::Num(1.1931471805599453)),
            ("ok".to_string(), JsonValue::Bool(true)),
        ];
        let s = flat_json(&fields);
        assert!(s.contains("\"xi\": [-0.5]"));
        assert!(s.contains("\"pressure\": 1.19314718056"));
        assert!(s.ends_with("}\n"));
    }
}
