//! Anything that produces operators from a spec string: random ensembles,
//! pseudo-random circuits and quantized maps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rmtlab::chaosmaps::MapSpec;
use rmtlab::circuits::{pseudo_random_operator, PseudoRandomSpec};
use rmtlab::ensembles::{EnsembleSpec, RngStream};
use rmtlab::qcore::{matrix_power, Operator};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OperatorSource {
    Ensemble(EnsembleSpec),
    /// `pseudo:n:m`
    Pseudo {
        n_qubits: usize,
        iterations: usize,
    },
    Map(MapSpec),
}

impl OperatorSource {
    pub fn dim(&self) -> usize {
        match self {
            OperatorSource::Ensemble(e) => e.dim(),
            OperatorSource::Pseudo { n_qubits, .. } => 1 << n_qubits,
            OperatorSource::Map(m) => m.dim,
        }
    }

    /// Maps are deterministic and yield one operator regardless of `count`.
    pub fn is_random(&self) -> bool {
        !matches!(self, OperatorSource::Map(_))
    }

    /// Stream tag for draw `k`; the spec string keeps different sources on
    /// different streams under one seed.
    pub fn stream(&self, seed: u64, k: u64) -> RngStream {
        RngStream::derive(seed, &format!("source/{self}"), k)
    }

    pub fn sample(&self, seed: u64, k: u64) -> rmtlab::Result<Operator> {
        let rng = self.stream(seed, k);
        match *self {
            OperatorSource::Ensemble(e) => e.sample(&mut rng.generator()),
            OperatorSource::Pseudo {
                n_qubits,
                iterations,
            } => pseudo_random_operator(&PseudoRandomSpec {
                n_qubits,
                iterations,
                rng,
            }),
            OperatorSource::Map(m) => m.build(),
        }
    }

    /// `count` draws (one for maps), each raised to `power`, in index order.
    pub fn operators(&self, seed: u64, count: usize, power: u32) -> rmtlab::Result<Vec<Operator>> {
        let count = if self.is_random() { count } else { 1 };
        (0..count as u64)
            .into_par_iter()
            .map(|k| {
                let u = self.sample(seed, k)?;
                if power == 1 {
                    Ok(u)
                } else {
                    matrix_power(&u, power)
                }
            })
            .collect()
    }
}

impl fmt::Display for OperatorSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorSource::Ensemble(e) => e.fmt(f),
            OperatorSource::Pseudo {
                n_qubits,
                iterations,
            } => write!(f, "pseudo:{n_qubits}:{iterations}"),
            OperatorSource::Map(m) => m.fmt(f),
        }
    }
}

impl FromStr for OperatorSource {
    type Err = rmtlab::Error;

    fn from_str(s: &str) -> rmtlab::Result<Self> {
        match s.split(':').next().unwrap_or_default() {
            "pseudo" => {
                let p = PseudoRandomSpec::parse(s, RngStream::new(0, 0))?;
                Ok(OperatorSource::Pseudo {
                    n_qubits: p.n_qubits,
                    iterations: p.iterations,
                })
            }
            "sawtooth" | "harper" | "baker" => Ok(OperatorSource::Map(s.parse()?)),
            _ => Ok(OperatorSource::Ensemble(s.parse()?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_family() {
        for s in [
            "gue:4",
            "cue-gue:8",
            "cue-hurwitz:8",
            "interp:8:0.5",
            "cpe:8",
            "pseudo:3:2",
            "sawtooth:8:1.5",
            "harper:8:0.1",
            "baker:8",
        ] {
            let src: OperatorSource = s.parse().unwrap();
            assert_eq!(src.to_string(), s);
            assert_eq!(src.dim(), if s == "gue:4" { 4 } else { 8 });
        }
        assert!("pseudo:1:2".parse::<OperatorSource>().is_err());
        assert!("unknown:4".parse::<OperatorSource>().is_err());
    }

    #[test]
    fn maps_yield_one_operator_and_draws_are_reproducible() {
        let map: OperatorSource = "baker:8".parse().unwrap();
        assert_eq!(map.operators(1, 5, 1).unwrap().len(), 1);
        let src: OperatorSource = "pseudo:3:2".parse().unwrap();
        let a = src.operators(9, 3, 2).unwrap();
        let b = src.operators(9, 3, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
    }
}
