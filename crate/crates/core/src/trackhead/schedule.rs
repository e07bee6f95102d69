/// Cosine-annealed learning rate, `lr0/2 · (1 + cos(π · step / total))`.
///
/// `step` is clamped to `total_steps`; `total_steps` must be positive.
pub fn lr_at(step: usize, total_steps: usize, lr0: f64) -> f64 {
    assert!(total_steps > 0, "total_steps must be positive");
    let t = step.min(total_steps) as f64 / total_steps as f64;
    0.5 * lr0 * (1.0 + libm::cos(core::f64::consts::PI * t))
}
