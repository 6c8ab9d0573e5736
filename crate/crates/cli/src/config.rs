//! Flat key-value experiment configs.
//!
//! One `key = value` pair per line, `#` starts a comment, repeated keys form
//! grids. Games are named presets (`bg`, `potential`, `beta:<value>`, `qd`)
//! with `qd` taking matrix literals whose rows are `;`-separated:
//!
//! ```text
//! game  = qd
//! a_mat = 1 0; 0 1
//! b_mat = 0.5 0; 0 0.5
//! c_mat = 0.5 0; 0 0.5
//! k     = 5
//! alpha = 0.5
//! alpha = 0.9
//! gamma = 0.1
//! n_outer = 200
//! ```

use lagame_core::games::GameSpec;
use nalgebra::DMatrix;

use crate::error::{CliError, Result};

/// Parsed config: ordered `(key, value)` pairs.
#[derive(Debug, Clone, Default)]
pub struct Config {
    pairs: Vec<(String, String)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            pairs.push((key.trim().to_string(), value.trim().to_string()));
        }
        Ok(Self { pairs })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn all(&self, key: &str) -> Vec<&str> {
        self.pairs
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .collect()
    }

    pub fn one(&self, key: &str) -> Result<Option<&str>> {
        let hits = self.all(key);
        match hits.len() {
            0 => Ok(None),
            1 => Ok(Some(hits[0])),
            n => Err(CliError::config(format!(
                "key `{key}` given {n} times but takes a single value"
            ))),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.pairs.iter().map(|(k, _)| k.as_str())
    }

    /// Rejects keys outside the allowed set.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for key in self.keys() {
            if !allowed.contains(&key) {
                return Err(CliError::config(format!(
                    "unknown config key `{key}` (allowed: {})",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn floats(&self, key: &str) -> Result<Vec<f64>> {
        self.all(key)
            .iter()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| CliError::config(format!("key `{key}`: `{v}` is not a number")))
            })
            .collect()
    }

    pub fn usizes(&self, key: &str) -> Result<Vec<usize>> {
        self.all(key)
            .iter()
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| CliError::config(format!("key `{key}`: `{v}` is not an integer")))
            })
            .collect()
    }

    pub fn one_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.one(key)? {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| CliError::config(format!("key `{key}`: `{v}` is not an integer"))),
        }
    }

    pub fn one_float(&self, key: &str, default: f64) -> Result<f64> {
        match self.one(key)? {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| CliError::config(format!("key `{key}`: `{v}` is not a number"))),
        }
    }

    fn matrix(&self, key: &str) -> Result<Option<DMatrix<f64>>> {
        let Some(text) = self.one(key)? else {
            return Ok(None);
        };
        let rows: Vec<Vec<f64>> = text
            .split(';')
            .map(|row| {
                row.split_whitespace()
                    .map(|v| {
                        v.parse::<f64>().map_err(|_| {
                            CliError::config(format!("key `{key}`: `{v}` is not a number"))
                        })
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let nrows = rows.len();
        if nrows == 0 || rows.iter().any(|r| r.len() != rows[0].len()) {
            return Err(CliError::config(format!("key `{key}`: ragged matrix literal")));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Ok(Some(DMatrix::from_row_slice(nrows, flat.len() / nrows, &flat)))
    }

    /// Builds the game named by `game` (default `bg`).
    pub fn game(&self) -> Result<GameSpec> {
        let name = self.one("game")?.unwrap_or("bg");
        let half_dim = self.one_usize("half_dim", 1)?;
        if half_dim == 0 {
            return Err(CliError::config("half_dim must be at least 1"));
        }
        if let Some(beta) = name.strip_prefix("beta:") {
            let beta: f64 = beta
                .parse()
                .map_err(|_| CliError::config(format!("bad beta value in `{name}`")))?;
            return Ok(GameSpec::beta_game(beta)?);
        }
        match name {
            "bg" => match self.matrix("a_mat")? {
                Some(a) => Ok(GameSpec::bilinear(a)?),
                None => Ok(GameSpec::bilinear_identity(half_dim)),
            },
            "potential" => Ok(GameSpec::potential_identity(half_dim)),
            "qd" => {
                let a = self
                    .matrix("a_mat")?
                    .ok_or_else(|| CliError::config("game `qd` needs a_mat"))?;
                let b = self
                    .matrix("b_mat")?
                    .ok_or_else(|| CliError::config("game `qd` needs b_mat"))?;
                let c = self
                    .matrix("c_mat")?
                    .ok_or_else(|| CliError::config("game `qd` needs c_mat"))?;
                Ok(GameSpec::quadratic(a, b, c)?)
            }
            other => Err(CliError::config(format!(
                "unknown game `{other}` (expected bg, potential, qd, or beta:<value>)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grids_and_comments() {
        let cfg = Config::parse("k = 5 # steps\nalpha = 0.5\nalpha = 0.9\n\n# done\n").unwrap();
        assert_eq!(cfg.usizes("k").unwrap(), vec![5]);
        assert_eq!(cfg.floats("alpha").unwrap(), vec![0.5, 0.9]);
    }

    #[test]
    fn rejects_malformed_lines_and_unknown_keys() {
        assert!(Config::parse("nonsense line").is_err());
        let cfg = Config::parse("foo = 1").unwrap();
        assert!(cfg.check_keys(&["bar"]).is_err());
    }

    #[test]
    fn builds_games_from_presets() {
        let cfg = Config::parse("game = beta:0.25").unwrap();
        let game = cfg.game().unwrap();
        assert_eq!(game.a_mat()[(0, 0)], 0.25);
        let cfg = Config::parse("game = bg\nhalf_dim = 2").unwrap();
        assert_eq!(cfg.game().unwrap().half_dim(), 2);
        let cfg = Config::parse("game = qd\na_mat = 1 0; 0 1\nb_mat = 1 0; 0 1\nc_mat = 1 0; 0 1").unwrap();
        assert_eq!(cfg.game().unwrap().half_dim(), 2);
    }

    #[test]
    fn bad_matrix_literal_is_a_config_error() {
        let cfg = Config::parse("game = qd\na_mat = 1 0; 0\nb_mat = 1\nc_mat = 1").unwrap();
        assert!(matches!(cfg.game(), Err(CliError::Config(_))));
    }
}
