use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub const TOOL: &str = "rankscope";

/// Record written next to every output file; replaying it reproduces the output byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Arguments after the program name, without `--out` and `--threads`.
    pub args: Vec<String>,
    /// Fully resolved parameters, including defaults.
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let m: RunManifest = serde_json::from_str(text).map_err(|e| format!("invalid manifest: {e}"))?;
        if m.tool != TOOL {
            return Err(format!("manifest was written by {:?}, not {TOOL}", m.tool));
        }
        if m.args.first() != Some(&m.subcommand) {
            return Err("manifest arguments do not start with its subcommand".into());
        }
        if m.subcommand == "replay" {
            return Err("a manifest cannot replay another manifest".into());
        }
        Ok(m)
    }
}

/// Drops `--out`/`--threads` (and their values) so the remaining arguments
/// describe the computation only.
pub fn strip_run_options(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--" {
            out.push(a.clone());
            out.extend(it.cloned());
            break;
        }
        if a == "--out" || a == "--threads" {
            it.next();
        } else if !(a.starts_with("--out=") || a.starts_with("--threads=")) {
            out.push(a.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn strips_output_and_thread_options() {
        let args = strings(&["--threads", "4", "chain", "--width", "8", "--out=a.csv", "--seed", "3", "--out", "b"]);
        assert_eq!(strip_run_options(&args), strings(&["chain", "--width", "8", "--seed", "3"]));
    }

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(RunManifest::path_for(Path::new("dir/x.csv")), PathBuf::from("dir/x.csv.manifest.json"));
    }

    #[test]
    fn rejects_foreign_manifests() {
        let m = RunManifest {
            tool: TOOL.into(),
            version: "0".into(),
            subcommand: "rank".into(),
            args: strings(&["rank"]),
            params: serde_json::Value::Null,
            seed: None,
            outputs: vec![],
        };
        assert!(RunManifest::from_json(&m.to_json()).is_ok());
        let other = RunManifest { tool: "x".into(), ..m.clone() };
        assert!(RunManifest::from_json(&other.to_json()).is_err());
        let mismatched = RunManifest { args: strings(&["chain"]), ..m };
        assert!(RunManifest::from_json(&mismatched.to_json()).is_err());
    }
}
