use super::{DistributionSpec, IncrementModel};
use crate::error::{FluctError, Result};

const NAMES: [&str; 5] = ["mm1", "erlang", "uniform", "threshold", "markov"];

/// Names accepted by [`builtin`].
pub fn builtin_names() -> &'static [&'static str] {
    &NAMES
}

/// The reference catalogue, all with `E B < E A`.
///
/// * `mm1`: `B ~ Exp(2)`, `A ~ Exp(1)`
/// * `erlang`: `B ~ Erlang(2, 5)`, `A ~ Exp(1)`
/// * `uniform`: `B ~ Exp(2)`, `A ~ U(0.5, 1.5)`, a product with non-rational `A`-transform
/// * `threshold`: `B ~ Exp(3)` if `A <= 1`, else `Exp(1.5)`; `A ~ Exp(1)`
/// * `markov`: two-state chain, `B_i ~ Exp(4)`, `A_i ~ Exp(1.5)`
pub fn builtin(name: &str) -> Result<IncrementModel> {
    let exp = |rate| DistributionSpec::Exponential { rate };
    match name {
        "mm1" => IncrementModel::product(exp(2.0), exp(1.0)),
        "erlang" => IncrementModel::product(DistributionSpec::Erlang { shape: 2, rate: 5.0 }, exp(1.0)),
        "uniform" => IncrementModel::product(exp(2.0), DistributionSpec::Uniform { low: 0.5, high: 1.5 }),
        "threshold" => IncrementModel::threshold(exp(3.0), exp(1.5), exp(1.0), 1.0),
        "markov" => IncrementModel::markov_modulated(
            vec![1.0, 0.0],
            vec![vec![0.2, 0.3], vec![0.1, 0.4]],
            vec![0.5, 0.5],
            exp(4.0),
            exp(1.5),
        ),
        other => Err(FluctError::InvalidSpec(format!("unknown built-in model `{other}`"))),
    }
}
