//! `key = value` config files.
//!
//! Each non-empty, non-comment line sets one flag of the subcommand being
//! run; keys are flag names without the leading dashes. The entries are
//! spliced in before the user's own flags, so explicit flags win.

use std::fs;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
        let k = k.trim();
        if k.is_empty() || k.starts_with('-') {
            return Err(format!("config line {}: bad key '{k}'", i + 1));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Rewrites `argv` so that entries from `--config FILE` precede the
/// subcommand's own flags. `true`/`false` values toggle switches.
pub fn splice(argv: Vec<String>) -> Result<Vec<String>, String> {
    let mut path = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or("--config needs a file")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = fs::read_to_string(&path).map_err(|e| format!("--config {path}: {e}"))?;
    let mut injected = Vec::new();
    for (k, v) in parse(&text)? {
        match v.as_str() {
            "true" => injected.push(format!("--{k}")),
            "false" => {}
            _ => injected.push(format!("--{k}={v}")),
        }
    }
    // position just after the subcommand name (first non-flag argument)
    let at = rest
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map(|i| i + 2)
        .unwrap_or(rest.len());
    rest.splice(at..at, injected);
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blanks() {
        let kv = parse("# header\nalpha = 0.5\n\nbeta=1 # trailing\n").unwrap();
        assert_eq!(kv, vec![("alpha".into(), "0.5".into()), ("beta".into(), "1".into())]);
        assert!(parse("alpha 0.5").is_err());
        assert!(parse("--alpha = 1").is_err());
    }

    #[test]
    fn splices_after_subcommand() {
        let dir = std::env::temp_dir().join(format!("mtw-config-{}", std::process::id()));
        std::fs::write(&dir, "alpha = 2\ntrace = true\nquiet = false\n").unwrap();
        let argv: Vec<String> = ["mtweight", "--config", dir.to_str().unwrap(), "extremal", "--alpha", "1"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let out = splice(argv).unwrap();
        assert_eq!(out, vec!["mtweight", "extremal", "--alpha=2", "--trace", "--alpha", "1"]);
        std::fs::remove_file(dir).unwrap();
    }
}
