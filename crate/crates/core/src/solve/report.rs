use std::fmt::Write;

/// Outcome of a linear or Picard solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_update_norm: f64,
    pub final_residual: f64,
    pub converged: bool,
    pub wall_time: f64,
}

impl SolveReport {
    /// Flat `key=value` block. `prefix` is prepended to every key.
    pub fn to_key_value(&self, prefix: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{prefix}iterations={}", self.iterations);
        let _ = writeln!(s, "{prefix}final_update_norm={:.6e}", self.final_update_norm);
        let _ = writeln!(s, "{prefix}final_residual={:.6e}", self.final_residual);
        let _ = writeln!(s, "{prefix}converged={}", self.converged);
        let _ = writeln!(s, "{prefix}wall_time={:.3}", self.wall_time);
        s
    }

    /// The same block without the timing line, for reproducible outputs.
    pub fn to_key_value_deterministic(&self, prefix: &str) -> String {
        self.to_key_value(prefix)
            .lines()
            .filter(|l| !l.contains("wall_time="))
            .map(|l| format!("{l}\n"))
            .collect()
    }
}
