//! The small spec languages for graphs, marked sets and `γ`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ctqw_core::framework::GammaChoice;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    Johnson { n: usize, k: usize },
    Complete { n: usize },
    CompleteBipartite { a: usize, b: usize },
    Hypercube { d: usize },
    File(PathBuf),
}

fn parse_fields<'a>(body: &'a str, keys: &[&str]) -> Result<Vec<usize>, CliError> {
    let mut values = vec![None; keys.len()];
    for part in body.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("expected key=value, got `{part}`")))?;
        let slot = keys
            .iter()
            .position(|k| *k == key.trim())
            .ok_or_else(|| CliError::Parse(format!("unknown parameter `{key}`")))?;
        let v = value
            .trim()
            .parse()
            .map_err(|_| CliError::Parse(format!("`{value}` is not a nonnegative integer")))?;
        if values[slot].replace(v).is_some() {
            return Err(CliError::Parse(format!("parameter `{key}` given twice")));
        }
    }
    values
        .into_iter()
        .zip(keys)
        .map(|(v, k)| v.ok_or_else(|| CliError::Parse(format!("missing parameter `{k}`"))))
        .collect()
}

impl FromStr for GraphSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let (family, body) = s
            .split_once(':')
            .ok_or_else(|| CliError::Parse(format!("graph spec `{s}` needs the form family:params")))?;
        match family {
            "johnson" => {
                let v = parse_fields(body, &["n", "k"])?;
                Ok(GraphSpec::Johnson { n: v[0], k: v[1] })
            }
            "complete" => Ok(GraphSpec::Complete { n: parse_fields(body, &["n"])?[0] }),
            "complete-bipartite" => {
                let v = parse_fields(body, &["a", "b"])?;
                Ok(GraphSpec::CompleteBipartite { a: v[0], b: v[1] })
            }
            "hypercube" => Ok(GraphSpec::Hypercube { d: parse_fields(body, &["d"])?[0] }),
            "file" if !body.is_empty() => Ok(GraphSpec::File(PathBuf::from(body))),
            _ => Err(CliError::Parse(format!("unknown graph family in `{s}`"))),
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Johnson { n, k } => write!(f, "johnson:n={n},k={k}"),
            GraphSpec::Complete { n } => write!(f, "complete:n={n}"),
            GraphSpec::CompleteBipartite { a, b } => write!(f, "complete-bipartite:a={a},b={b}"),
            GraphSpec::Hypercube { d } => write!(f, "hypercube:d={d}"),
            GraphSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MarkedSpec {
    Indices(Vec<usize>),
    Part(Part),
    AutoDelta(usize),
}

impl FromStr for MarkedSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        if let Some(part) = s.strip_prefix("part:") {
            return match part {
                "left" => Ok(MarkedSpec::Part(Part::Left)),
                "right" => Ok(MarkedSpec::Part(Part::Right)),
                _ => Err(CliError::Parse(format!("part must be left or right, got `{part}`"))),
            };
        }
        if let Some(d) = s.strip_prefix("auto-delta:") {
            return d
                .parse()
                .map(MarkedSpec::AutoDelta)
                .map_err(|_| CliError::Parse(format!("`{d}` is not a distance")));
        }
        s.split(',')
            .map(|x| x.trim().parse().map_err(|_| CliError::Parse(format!("`{x}` is not a vertex index"))))
            .collect::<Result<Vec<_>, _>>()
            .map(MarkedSpec::Indices)
    }
}

impl fmt::Display for MarkedSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkedSpec::Indices(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                f.write_str(&parts.join(","))
            }
            MarkedSpec::Part(Part::Left) => f.write_str("part:left"),
            MarkedSpec::Part(Part::Right) => f.write_str("part:right"),
            MarkedSpec::AutoDelta(d) => write!(f, "auto-delta:{d}"),
        }
    }
}

/// `asymptotic`, `midpoint` or a positive number.
pub fn parse_gamma(s: &str) -> Result<GammaChoice, CliError> {
    match s {
        "asymptotic" => Ok(GammaChoice::Asymptotic),
        "midpoint" => Ok(GammaChoice::Midpoint),
        _ => match s.parse::<f64>() {
            Ok(g) if g.is_finite() && g > 0.0 => Ok(GammaChoice::Fixed(g)),
            _ => Err(CliError::Parse(format!("gamma must be asymptotic, midpoint or a positive number, got `{s}`"))),
        },
    }
}

/// Comma-separated values or `start:stop:count` (inclusive, linear).
pub fn parse_gamma_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Parse(format!("bad gamma grid `{s}`"));
    let mut grid: Vec<f64> = if let [a, b, c] = s.split(':').collect::<Vec<_>>()[..] {
        let (lo, hi): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        let count: usize = c.parse().map_err(|_| bad())?;
        match count {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
        }
    } else {
        s.split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| x.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if grid.is_empty() {
        return Err(CliError::Parse("gamma grid is empty".into()));
    }
    if grid.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(CliError::Parse("gamma values must be positive".into()));
    }
    grid.sort_by(f64::total_cmp);
    if grid.windows(2).any(|w| w[0] == w[1]) {
        return Err(CliError::Parse("gamma grid has repeated values".into()));
    }
    Ok(grid)
}
