use crate::error::{Error, Result};

/// Generalized advantage estimates and critic targets.
///
/// `dones[t]` marks the last step of an episode; the value after it is
/// taken as zero. Advantages are returned before normalization.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    discount: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rewards.len();
    if n == 0 {
        return Err(Error::Empty("advantage estimation needs at least one transition".into()));
    }
    if values.len() != n || dones.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: values.len().min(dones.len()) });
    }
    if !dones[n - 1] {
        return Err(Error::invalid("batch must end on an episode boundary"));
    }
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    let mut next_value = 0.0;
    for t in (0..n).rev() {
        if dones[t] {
            next_adv = 0.0;
            next_value = 0.0;
        }
        let delta = rewards[t] + discount * next_value - values[t];
        next_adv = delta + discount * lambda * next_adv;
        adv[t] = next_adv;
        next_value = values[t];
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((adv, returns))
}

/// Shifts and scales to zero mean and unit population variance.
pub fn normalize(xs: &mut [f64]) {
    if xs.is_empty() {
        return;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    for x in xs.iter_mut() {
        *x -= mean;
        if std > 0.0 {
            *x /= std;
        }
    }
}
