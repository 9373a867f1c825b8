use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hydraulics::solve_flows;
use super::transport::{simulate_transport, DataMatrix};
use crate::error::{Error, Result};
use crate::network::{InjectionScenario, PipeNetwork};

/// Scenario variants applied to every source of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSpec {
    /// mg/s
    pub rates: Vec<f64>,
    /// s
    pub durations: Vec<f64>,
    /// s
    pub starts: Vec<f64>,
    pub timestep: f64,
    pub max_steps: usize,
}

impl VariantSpec {
    /// Every `(source, rate, duration, start)` combination, nested in that order.
    pub fn scenarios(&self, sources: &[String]) -> Vec<InjectionScenario> {
        let mut out = Vec::with_capacity(sources.len() * self.rates.len() * self.durations.len() * self.starts.len());
        for source in sources {
            for &rate in &self.rates {
                for &duration in &self.durations {
                    for &start in &self.starts {
                        out.push(InjectionScenario {
                            source: source.clone(),
                            rate,
                            start,
                            duration,
                            timestep: self.timestep,
                            max_steps: self.max_steps,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Simulates one scenario per combination of source and variant.
///
/// Scenarios run in parallel; the output order is the nesting order of
/// [`VariantSpec::scenarios`].
pub fn run_scenario_sweep(net: &PipeNetwork, sources: &[String], variants: &VariantSpec) -> Result<Vec<DataMatrix>> {
    if sources.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one source".into()));
    }
    if variants.rates.is_empty() || variants.durations.is_empty() || variants.starts.is_empty() {
        return Err(Error::InvalidArgument("every variant list must be non-empty".into()));
    }
    let flows = solve_flows(net)?;
    variants
        .scenarios(sources)
        .par_iter()
        .map(|s| {
            simulate_transport(net, &flows, s).map_err(|e| Error::Scenario {
                scenario: s.label(),
                source: Box::new(e),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_inp;

    fn net() -> PipeNetwork {
        parse_inp(
            "[JUNCTIONS]\nA 0.01\nB 0.02\nC 0.015\n[RESERVOIRS]\nR 42\n[PIPES]\n1 R A 400 0.3\n2 A B 350 0.25\n3 B C 300 0.2\n4 C A 500 0.2\n",
        )
        .unwrap()
    }

    fn spec(rates: Vec<f64>) -> VariantSpec {
        VariantSpec {
            rates,
            durations: vec![100.0],
            starts: vec![0.0],
            timestep: 10.0,
            max_steps: 3000,
        }
    }

    #[test]
    fn cardinality_and_order() {
        let sources: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let out = run_scenario_sweep(&net(), &sources, &spec(vec![1.0, 2.0])).unwrap();
        assert_eq!(out.len(), 6);
        let order: Vec<(String, f64)> = out
            .iter()
            .map(|x| (x.scenario.source.clone(), x.scenario.rate))
            .collect();
        assert_eq!(order[0], ("A".to_string(), 1.0));
        assert_eq!(order[1], ("A".to_string(), 2.0));
        assert_eq!(order[5], ("C".to_string(), 2.0));

        let single = run_scenario_sweep(&net(), &sources[..1], &spec(vec![1.0])).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn doubling_rate_doubles_matrix() {
        let sources = vec!["B".to_string()];
        let out = run_scenario_sweep(&net(), &sources, &spec(vec![1.5, 3.0])).unwrap();
        let (a, b) = (&out[0].values, &out[1].values);
        assert_eq!(a.shape(), b.shape());
        let worst = a
            .iter()
            .zip(b.iter())
            .filter(|(x, _)| **x > 0.0)
            .map(|(x, y)| (y - 2.0 * x).abs() / (2.0 * x))
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn errors_name_the_scenario() {
        let sources = vec!["R".to_string()];
        let err = run_scenario_sweep(&net(), &sources, &spec(vec![1.0])).unwrap_err();
        assert!(err.to_string().contains("R_r1"), "{err}");
    }
}
