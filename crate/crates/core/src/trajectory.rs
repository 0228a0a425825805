use num_complex::Complex64;

/// Time grid with the four zero-photon amplitudes and the field population.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrajectory {
    pub times: Vec<f64>,
    pub amps: Vec<[Complex64; 4]>,
    /// 1 − Σ|A_i|² at each time.
    pub field_prob: Vec<f64>,
}

impl AmplitudeTrajectory {
    pub fn from_amplitudes(times: Vec<f64>, amps: Vec<[Complex64; 4]>) -> Self {
        let field_prob = amps.iter().map(field_probability).collect();
        AmplitudeTrajectory {
            times,
            amps,
            field_prob,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest |A_i^self − A_i^other| over matching time points.
    pub fn max_deviation(&self, other: &AmplitudeTrajectory) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }
}

pub fn field_probability(a: &[Complex64; 4]) -> f64 {
    1.0 - a.iter().map(|z| z.norm_sqr()).sum::<f64>()
}
