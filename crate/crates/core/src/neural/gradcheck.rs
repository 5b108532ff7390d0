//! Central finite-difference verification of analytic gradients.

use serde::Serialize;

use super::{Example, Loss, Network};
use crate::error::{Error, Result};

/// Gradients smaller than this are compared in absolute rather than relative terms.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_tensor: String,
    pub worst_index: usize,
    pub checked: usize,
}

/// Relative error `|a − n| / max(|a|, |n|, REL_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Compares every parameter's analytic gradient of the mean batch loss with
/// `(L(θ+h) − L(θ−h)) / 2h`.
pub fn check_gradients<N: Network>(net: &N, examples: &[Example], loss: Loss, h: f64) -> Result<GradCheckReport> {
    let batch: Vec<&Example> = examples.iter().collect();
    let (_, grads) = net.batch_loss(&batch, loss, true)?;
    let grads = grads.ok_or(Error::EmptyDataset)?;
    let names = net.tensor_names();
    let mut probe = net.clone();
    let mut report = GradCheckReport { max_rel_error: 0.0, worst_tensor: String::new(), worst_index: 0, checked: 0 };
    for (ti, g) in grads.iter().enumerate() {
        for i in 0..g.len() {
            let orig = probe.tensors()[ti].data()[i];
            probe.tensors_mut()[ti].data_mut()[i] = orig + h;
            let (up, _) = probe.batch_loss(&batch, loss, false)?;
            probe.tensors_mut()[ti].data_mut()[i] = orig - h;
            let (down, _) = probe.batch_loss(&batch, loss, false)?;
            probe.tensors_mut()[ti].data_mut()[i] = orig;
            let err = relative_error(g.data()[i], (up - down) / (2.0 * h));
            if !err.is_finite() {
                return Err(Error::NumericalDivergence(format!("gradient check of {}[{i}]", names[ti])));
            }
            if report.checked == 0 || err > report.max_rel_error {
                report.max_rel_error = err;
                report.worst_tensor = names[ti].clone();
                report.worst_index = i;
            }
            report.checked += 1;
        }
    }
    Ok(report)
}

/// Seeded small instance of each trainable architecture with a few random examples.
pub fn standard_suite(seed: u64, h: f64) -> Result<Vec<(String, GradCheckReport)>> {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::{Ffn, FfnConfig, Lstm, LstmConfig, OutputKind, Readout, Target};

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seq = |d: usize, len: usize, rng: &mut ChaCha8Rng| -> Vec<f64> { (0..d * len).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let lstm = |d, h, e, o, kind| LstmConfig { input_dim: d, hidden_dim: h, embedding_dim: e, output_dim: o, output_kind: kind, readout: Readout::FinalState };
    let mut out = Vec::new();

    let expr = Lstm::with_init_scale(lstm(5, 4, 4, 2, OutputKind::SoftmaxClasses), seed, 0.5)?;
    let ex: Vec<Example> = (0..3).map(|i| Example::new(seq(5, 3 + i, &mut rng), 3 + i, Target::Class(i % 2))).collect();
    out.push(("expression lstm".to_string(), check_gradients(&expr, &ex, Loss::CrossEntropy, h)?));

    let emo = Lstm::with_init_scale(lstm(5, 3, 3, 2, OutputKind::LinearRegression), seed + 1, 0.5)?;
    let ex: Vec<Example> = (0..3)
        .map(|i| Example::new(seq(5, 2 + i, &mut rng), 2 + i, Target::Values(vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])))
        .collect();
    out.push(("emotion lstm".to_string(), check_gradients(&emo, &ex, Loss::Mse, h)?));

    let mut cfg = lstm(7, 4, 4, 3, OutputKind::LinearRegression);
    cfg.readout = Readout::PerFrame;
    let inv = Lstm::with_init_scale(cfg, seed + 2, 0.5)?;
    let ex: Vec<Example> = (0..2)
        .map(|i| {
            let len = 3 + i;
            Example::new(seq(7, len, &mut rng), len, Target::Frames((0..3 * len).map(|_| rng.random_range(-1.0..1.0)).collect()))
        })
        .collect();
    out.push(("inversion lstm".to_string(), check_gradients(&inv, &ex, Loss::Mse, h)?));

    let ffn = |d, hidden: Vec<usize>| FfnConfig { input_dim: d, hidden, output_dim: 2, output_kind: OutputKind::SoftmaxClasses };
    let fusion = Ffn::with_init_scale(ffn(6, vec![5]), seed + 3, 0.5)?;
    let ex: Vec<Example> = (0..4).map(|i| Example::new(seq(6, 1, &mut rng), 1, Target::Class(i % 2))).collect();
    out.push(("fusion ffn".to_string(), check_gradients(&fusion, &ex, Loss::CrossEntropy, h)?));

    let bow = Ffn::with_init_scale(ffn(8, vec![4, 4]), seed + 4, 0.5)?;
    let ex: Vec<Example> = (0..4)
        .map(|i| Example::new((0..8).map(|_| rng.random_range(0..3) as f64).collect(), 1, Target::Class(i % 2)))
        .collect();
    out.push(("bow dnn".to_string(), check_gradients(&bow, &ex, Loss::CrossEntropy, h)?));
    Ok(out)
}
