//! Discrete norms with the 1/N normalization: ||z||_p = (1/N sum |z_i|^p)^(1/p).

pub fn mean(z: &[f64]) -> f64 {
    if z.is_empty() {
        return 0.0;
    }
    z.iter().sum::<f64>() / z.len() as f64
}

pub fn l1(z: &[f64]) -> f64 {
    if z.is_empty() {
        return 0.0;
    }
    z.iter().map(|v| v.abs()).sum::<f64>() / z.len() as f64
}

pub fn l2(z: &[f64]) -> f64 {
    if z.is_empty() {
        return 0.0;
    }
    (z.iter().map(|v| v * v).sum::<f64>() / z.len() as f64).sqrt()
}

pub fn linf(z: &[f64]) -> f64 {
    z.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// z - <z> 1
pub fn remove_mean(z: &[f64]) -> Vec<f64> {
    let m = mean(z);
    z.iter().map(|v| v - m).collect()
}
