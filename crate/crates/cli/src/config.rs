//! `key=value` configuration files merged into the argument list.
//!
//! Each key names a long flag of the selected subcommand (or a global flag).
//! Config entries are spliced in right after the subcommand path, and any key
//! also given on the command line is dropped, so flags override the file.
//! Unknown keys reach the argument parser and are rejected there.

use std::fs;
use std::path::Path;

/// Global flags that take a value.
const GLOBAL_VALUE_FLAGS: &[&str] = &["seed", "threads", "format", "output", "config", "prime-cache"];

/// Subcommands with a second level.
const GROUPS: &[&str] = &["sieve", "series", "oracle", "mc", "nt", "bounds"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigEntry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

pub fn parse_config(text: &str) -> Result<Vec<ConfigEntry>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(format!("config line {}: expected key=value, got {line:?}", i + 1))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            return Err(format!("config line {}: invalid key {k:?}", i + 1));
        }
        if key == "config" {
            return Err(format!("config line {}: nested config files are not supported", i + 1));
        }
        out.push(ConfigEntry { key, value: v.trim().to_string(), line: i + 1 });
    }
    Ok(out)
}

fn flag_name(tok: &str) -> Option<&str> {
    let body = tok.strip_prefix("--")?;
    Some(body.split_once('=').map_or(body, |(k, _)| k))
}

/// Index just past the subcommand path, and the `--config` value if present.
fn scan(args: &[String]) -> (usize, Option<String>) {
    let mut i = 1;
    let mut path_left: Option<usize> = None;
    let mut end = args.len();
    while i < args.len() {
        let tok = &args[i];
        if let Some(name) = flag_name(tok) {
            let takes_value = GLOBAL_VALUE_FLAGS.contains(&name);
            let inline = tok.contains('=');
            i += if takes_value && !inline { 2 } else { 1 };
            continue;
        }
        match path_left {
            None => {
                path_left = Some(if GROUPS.contains(&tok.as_str()) { 1 } else { 0 });
                if path_left == Some(0) {
                    end = i + 1;
                    break;
                }
            }
            Some(1) => {
                end = i + 1;
                break;
            }
            _ => break,
        }
        i += 1;
    }
    (end, find_config(args))
}

fn find_config(args: &[String]) -> Option<String> {
    let mut found = None;
    for (i, tok) in args.iter().enumerate() {
        if tok == "--config" {
            found = args.get(i + 1).cloned();
        } else if let Some(v) = tok.strip_prefix("--config=") {
            found = Some(v.to_string());
        }
    }
    found
}

/// Splices the config file named by `--config` into `args`.
pub fn apply_config(args: Vec<String>) -> Result<Vec<String>, String> {
    let (end, config) = scan(&args);
    let Some(path) = config else {
        return Ok(args);
    };
    let text = fs::read_to_string(Path::new(&path)).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let entries = parse_config(&text)?;
    let given: Vec<&str> = args.iter().filter_map(|a| flag_name(a)).collect();
    let mut out: Vec<String> = args[..end.min(args.len())].to_vec();
    for e in entries {
        if !given.contains(&e.key.as_str()) {
            out.push(format!("--{}={}", e.key, e.value));
        }
    }
    out.extend_from_slice(&args[end.min(args.len())..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn parses_key_values() {
        let e = parse_config("# run\nsigma = 0.75\n\ntrials=10\nprime_cache=/tmp/p\n").unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!((e[0].key.as_str(), e[0].value.as_str()), ("sigma", "0.75"));
        assert_eq!(e[2].key, "prime-cache");
        assert!(parse_config("novalue").is_err());
        assert!(parse_config("config=x").is_err());
    }

    #[test]
    fn finds_subcommand_path() {
        assert_eq!(scan(&argv("rmf-lab mc positivity --sigma 1")).0, 3);
        assert_eq!(scan(&argv("rmf-lab --seed 4 --threads=2 mc positivity")).0, 6);
        assert_eq!(scan(&argv("rmf-lab sample --nmax 5")).0, 2);
        let (_, cfg) = scan(&argv("rmf-lab --config run.cfg bounds kappa"));
        assert_eq!(cfg.as_deref(), Some("run.cfg"));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.cfg");
        fs::write(&p, "sigma=0.6\ntrials=5\n").unwrap();
        let args = argv(&format!("rmf-lab mc positivity --config {} --sigma 0.9", p.display()));
        let merged = apply_config(args).unwrap();
        assert_eq!(merged[3], "--trials=5");
        assert!(!merged.iter().any(|a| a == "--sigma=0.6"));
        assert!(merged.iter().any(|a| a == "0.9"));
    }
}
