use serde::{Deserialize, Serialize};

use super::PipeNetwork;
use crate::error::{Error, Result};

/// One injection run: `rate` mg/s enter `source` during `[start, start + duration)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionScenario {
    pub source: String,
    /// mg/s
    pub rate: f64,
    /// s
    pub start: f64,
    /// s
    pub duration: f64,
    /// s
    pub timestep: f64,
    pub max_steps: usize,
}

impl InjectionScenario {
    /// Checks the scenario on its own and against `net`.
    pub fn validate(&self, net: &PipeNetwork) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return bad(format!("rate must be positive, got {}", self.rate));
        }
        if !(self.start.is_finite() && self.start >= 0.0) {
            return bad(format!("start must be non-negative, got {}", self.start));
        }
        if !(self.timestep.is_finite() && self.timestep > 0.0) {
            return bad(format!("timestep must be positive, got {}", self.timestep));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        let ratio = self.duration / self.timestep;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return bad(format!(
                "duration {} is not a multiple of timestep {}",
                self.duration, self.timestep
            ));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".into());
        }
        if net.junction_index(&self.source).is_none() {
            return bad(format!("source \"{}\" is not a junction", self.source));
        }
        Ok(())
    }

    /// Whether injection is active during the step starting at `t`.
    pub fn injecting_at(&self, t: f64) -> bool {
        // half-step slack keeps [start, start + duration) exact on the step grid
        let eps = 0.5 * self.timestep;
        t > self.start - eps && t < self.start + self.duration - eps
    }

    /// Stable identifier used for file names and error messages.
    pub fn label(&self) -> String {
        format!("{}_r{}_d{}_s{}", self.source, self.rate, self.duration, self.start)
    }
}

/// Parses the flat `key = value` scenario file.
///
/// Keys: `source`, `rate_mg_s`, `start_s`, `duration_s`, `timestep_s`,
/// `max_steps`. Lines starting with `#` or `;` are comments.
pub fn parse_scenario(text: &str) -> Result<InjectionScenario> {
    let mut source = None;
    let mut rate = None;
    let mut start = None;
    let mut duration = None;
    let mut timestep = None;
    let mut max_steps = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') || content.starts_with(';') {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Syntax {
            line,
            message: "expected key = value".into(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let num = || -> Result<f64> {
            value.parse().map_err(|_| Error::Syntax {
                line,
                message: format!("cannot parse \"{value}\" for {key}"),
            })
        };
        match key {
            "source" => source = Some(value.to_string()),
            "rate_mg_s" => rate = Some(num()?),
            "start_s" => start = Some(num()?),
            "duration_s" => duration = Some(num()?),
            "timestep_s" => timestep = Some(num()?),
            "max_steps" => {
                max_steps = Some(value.parse::<usize>().map_err(|_| Error::Syntax {
                    line,
                    message: format!("max_steps must be a count, got \"{value}\""),
                })?)
            }
            other => {
                return Err(Error::Syntax {
                    line,
                    message: format!("unknown key \"{other}\""),
                })
            }
        }
    }
    let missing = |k: &str| Error::InvalidScenario(format!("missing key {k}"));
    Ok(InjectionScenario {
        source: source.ok_or_else(|| missing("source"))?,
        rate: rate.ok_or_else(|| missing("rate_mg_s"))?,
        start: start.unwrap_or(0.0),
        duration: duration.ok_or_else(|| missing("duration_s"))?,
        timestep: timestep.ok_or_else(|| missing("timestep_s"))?,
        max_steps: max_steps.ok_or_else(|| missing("max_steps"))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_inp;

    fn net() -> PipeNetwork {
        parse_inp("[JUNCTIONS]\nJ1 0.01\n[RESERVOIRS]\nR1 5\n[PIPES]\nP1 R1 J1 100 0.3\n").unwrap()
    }

    #[test]
    fn parses_all_keys() {
        let s = parse_scenario(
            "# run\nsource = J1\nrate_mg_s = 10\nstart_s = 60\nduration_s = 600\ntimestep_s = 60\nmax_steps = 100\n",
        )
        .unwrap();
        assert_eq!(s.source, "J1");
        assert_eq!(s.max_steps, 100);
        s.validate(&net()).unwrap();
    }

    #[test]
    fn rejects_reservoir_source_and_bad_duration() {
        let mut s = InjectionScenario {
            source: "R1".into(),
            rate: 1.0,
            start: 0.0,
            duration: 60.0,
            timestep: 60.0,
            max_steps: 10,
        };
        assert!(s.validate(&net()).is_err());
        s.source = "J1".into();
        s.duration = 90.0;
        assert!(s.validate(&net()).is_err());
        s.duration = 120.0;
        s.validate(&net()).unwrap();
    }

    #[test]
    fn injection_window_is_half_open() {
        let s = InjectionScenario {
            source: "J1".into(),
            rate: 1.0,
            start: 120.0,
            duration: 180.0,
            timestep: 60.0,
            max_steps: 10,
        };
        let active: Vec<bool> = (0..7).map(|k| s.injecting_at(k as f64 * 60.0)).collect();
        assert_eq!(active, vec![false, false, true, true, true, false, false]);
    }

    #[test]
    fn unknown_key_is_syntax_error() {
        assert!(matches!(
            parse_scenario("source = J1\ncolour = red\n"),
            Err(Error::Syntax { line: 2, .. })
        ));
    }
}
