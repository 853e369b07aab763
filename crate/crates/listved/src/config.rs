//! Line-oriented `key = value` configuration text and E_b/N_0 grids.
//!
//! Config files are UTF-8 text: one `key = value` per line, `#` starts a
//! comment, blank lines are ignored, values keep any embedded `=`. Later
//! occurrences of a key override earlier ones; command-line flags override
//! file values.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Malformed { line: usize, detail: String },
    UnknownKey(String),
    BadGrid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Malformed { line, detail } => {
                write!(f, "config line {line}: {detail}")
            }
            ConfigError::UnknownKey(key) => write!(f, "unknown config key {key:?}"),
            ConfigError::BadGrid(detail) => write!(f, "bad ebno grid: {detail}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parsed configuration text, in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pairs: Vec<(String, String)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Malformed {
                line: lineno + 1,
                detail: "expected key = value".to_string(),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Malformed {
                    line: lineno + 1,
                    detail: "empty key".to_string(),
                });
            }
            pairs.push((key.to_string(), value.trim().to_string()));
        }
        Ok(Self { pairs })
    }

    /// Last value set for `key`, if any.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.pairs
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.pairs.iter().map(|(k, _)| k.as_str())
    }

    /// Rejects any key outside `allowed`.
    pub fn validate_keys(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        for (key, _) in &self.pairs {
            if !allowed.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey(key.clone()));
            }
        }
        Ok(())
    }
}

/// Maximum number of points a grid may expand to.
pub const MAX_GRID_POINTS: usize = 10_000;

/// Parses an inclusive `a:b:step` grid, e.g. `3:6:1` gives 3, 4, 5, 6.
pub fn parse_ebno_grid(spec: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(ConfigError::BadGrid(format!(
            "expected a:b:step, got {spec:?}"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| ConfigError::BadGrid(format!("bad number {p:?}")))
        })
        .collect::<Result<_, _>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !start.is_finite() || !stop.is_finite() || !step.is_finite() {
        return Err(ConfigError::BadGrid("non-finite bound".to_string()));
    }
    if step <= 0.0 {
        return Err(ConfigError::BadGrid(format!("step must be > 0, got {step}")));
    }
    if stop < start {
        return Err(ConfigError::BadGrid(format!(
            "empty grid: {start} > {stop}"
        )));
    }
    let count = ((stop - start) / step).floor() as usize + 1;
    if count > MAX_GRID_POINTS {
        return Err(ConfigError::BadGrid(format!(
            "grid has {count} points, limit is {MAX_GRID_POINTS}"
        )));
    }
    // Half-step slop keeps the intended endpoint on the grid despite
    // floating-point accumulation.
    let mut points = Vec::with_capacity(count);
    let mut k = 0usize;
    loop {
        let x = start + k as f64 * step;
        if x > stop + step * 1e-9 {
            break;
        }
        points.push(x);
        k += 1;
    }
    Ok(points)
}
