//! Fixed-weight echo state network.
//!
//! The update implemented by [`Network::step_in_place`]:
//!
//! ```text
//! h_t = tanh(W_in x_t + W s_{t-1} + W_fb y'_{t-1} + b)
//! s_t = (1 - alpha) s_{t-1} + alpha h_t
//! y_t = W_out s_t
//! ```
//!
//! Base matrices are drawn once from the seed and never change. Live knobs
//! ([`Scales`]) are applied multiplicatively to the base, so setting the same
//! scales twice always yields the same effective matrices.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Power iterations discarded before measuring growth.
pub const POWER_BURN_IN: usize = 200;
/// Power iterations over which the norm growth rate is averaged.
pub const POWER_WINDOW: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub neurons: usize,
    pub input_dim: usize,
    pub feedback_dim: usize,
    pub output_dim: usize,
    pub recurrent_density: f64,
    pub seed: u64,
}

impl NetworkConfig {
    /// One output, one feedback channel, one (pulse) input channel.
    pub fn lfo(neurons: usize, seed: u64) -> Self {
        Self {
            neurons,
            input_dim: 1,
            feedback_dim: 1,
            output_dim: 1,
            recurrent_density: 1.0,
            seed,
        }
    }

    /// `max_keys` output rows fed back as a one-hot vector; no input.
    pub fn arp(neurons: usize, max_keys: usize, seed: u64) -> Self {
        Self {
            neurons,
            input_dim: 0,
            feedback_dim: max_keys,
            output_dim: max_keys,
            recurrent_density: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.neurons == 0 {
            return Err(Error::InvalidConfig("neurons must be at least 1".into()));
        }
        if self.output_dim == 0 {
            return Err(Error::InvalidConfig("output_dim must be at least 1".into()));
        }
        if self.feedback_dim == 0 {
            return Err(Error::InvalidConfig("feedback_dim must be at least 1".into()));
        }
        if !(self.recurrent_density > 0.0 && self.recurrent_density <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "recurrent_density must be in (0, 1], got {}",
                self.recurrent_density
            )));
        }
        Ok(())
    }
}

/// Live multipliers on the base weights plus the leak rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    pub input_scale: f64,
    pub spectral_radius: f64,
    pub feedback_scale: f64,
    pub bias_scale: f64,
    pub leak_rate: f64,
}

impl Scales {
    /// Every multiplier zero: the network collapses to pure leak.
    pub const ZERO: Scales = Scales {
        input_scale: 0.0,
        spectral_radius: 0.0,
        feedback_scale: 0.0,
        bias_scale: 0.0,
        leak_rate: 0.5,
    };

    pub fn lfo_default() -> Self {
        Self {
            input_scale: 0.0,
            spectral_radius: 0.95,
            feedback_scale: 1.0,
            bias_scale: 0.2,
            leak_rate: 0.1,
        }
    }

    pub fn arp_default() -> Self {
        Self {
            input_scale: 0.0,
            spectral_radius: 0.95,
            feedback_scale: 1.0,
            bias_scale: 0.2,
            leak_rate: 0.3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("input_scale", self.input_scale),
            ("spectral_radius", self.spectral_radius),
            ("feedback_scale", self.feedback_scale),
            ("bias_scale", self.bias_scale),
        ];
        for (name, value) in nonneg {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and non-negative, got {value}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.leak_rate) {
            return Err(Error::InvalidArgument(format!(
                "leak_rate must be in [0, 1], got {}",
                self.leak_rate
            )));
        }
        Ok(())
    }
}

/// The scaled matrices actually used by [`Network::step_in_place`].
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveMatrices {
    pub w_in: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub w_fb: DMatrix<f64>,
    pub w_out: DMatrix<f64>,
    pub b: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirState {
    /// Leaky-integrated state.
    pub s: DVector<f64>,
    /// Last activation before leak integration.
    pub h: DVector<f64>,
    pub t: u64,
}

impl ReservoirState {
    pub fn zeros(neurons: usize) -> Self {
        Self {
            s: DVector::zeros(neurons),
            h: DVector::zeros(neurons),
            t: 0,
        }
    }

    /// Starts from an arbitrary leaky state (activation zeroed, counter 0).
    pub fn from_state(s: &[f64]) -> Self {
        Self {
            s: DVector::from_column_slice(s),
            h: DVector::zeros(s.len()),
            t: 0,
        }
    }

    pub fn neurons(&self) -> usize {
        self.s.len()
    }

    pub fn is_finite(&self) -> bool {
        self.s.iter().chain(self.h.iter()).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    config: NetworkConfig,
    scales: Scales,
    base_w_in: DMatrix<f64>,
    base_w: DMatrix<f64>,
    base_w_fb: DMatrix<f64>,
    base_w_out: DMatrix<f64>,
    base_b: DVector<f64>,
    base_spectral_radius: f64,
    effective: EffectiveMatrices,
}

fn draw_matrix(seed: u64, label: &str, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut stream = Stream::new(seed, label);
    // row-major draw order, independent of nalgebra's storage order
    let mut values = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        values.push(stream.symmetric());
    }
    DMatrix::from_row_slice(rows, cols, &values)
}

fn draw_recurrent(seed: u64, neurons: usize, density: f64) -> DMatrix<f64> {
    let mut stream = Stream::new(seed, "w");
    let mut values = Vec::with_capacity(neurons * neurons);
    for _ in 0..neurons * neurons {
        let value = stream.symmetric();
        let keep = stream.unit() < density;
        values.push(if keep { value } else { 0.0 });
    }
    DMatrix::from_row_slice(neurons, neurons, &values)
}

impl Network {
    /// Draws all base weights from `config.seed` and measures the base spectral radius.
    pub fn new(config: NetworkConfig, scales: Scales) -> Result<Self> {
        config.validate()?;
        let n = config.neurons;
        let seed = config.seed;
        let base_w_in = draw_matrix(seed, "w_in", n, config.input_dim);
        let base_w = draw_recurrent(seed, n, config.recurrent_density);
        let base_w_fb = draw_matrix(seed, "w_fb", n, config.feedback_dim);
        let base_w_out = draw_matrix(seed, "w_out", config.output_dim, n);
        let base_b = DVector::from_column_slice(draw_matrix(seed, "b", n, 1).as_slice());
        Self::from_base(config, scales, base_w_in, base_w, base_w_fb, base_w_out, base_b)
    }

    /// Builds a network from explicit base weights instead of drawing them.
    pub fn from_base(
        config: NetworkConfig,
        scales: Scales,
        base_w_in: DMatrix<f64>,
        base_w: DMatrix<f64>,
        base_w_fb: DMatrix<f64>,
        base_w_out: DMatrix<f64>,
        base_b: DVector<f64>,
    ) -> Result<Self> {
        config.validate()?;
        scales.validate()?;
        let n = config.neurons;
        let check = |name: &str, got: (usize, usize), want: (usize, usize)| {
            if got == want {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!(
                    "{name} has shape {got:?}, expected {want:?}"
                )))
            }
        };
        check("w_in", base_w_in.shape(), (n, config.input_dim))?;
        check("w", base_w.shape(), (n, n))?;
        check("w_fb", base_w_fb.shape(), (n, config.feedback_dim))?;
        check("w_out", base_w_out.shape(), (config.output_dim, n))?;
        check("b", (base_b.len(), 1), (n, 1))?;

        let base_spectral_radius = spectral_radius_estimate(&base_w);
        let effective = compute_effective(
            &scales,
            base_spectral_radius,
            &base_w_in,
            &base_w,
            &base_w_fb,
            &base_w_out,
            &base_b,
        );
        Ok(Self {
            config,
            scales,
            base_w_in,
            base_w,
            base_w_fb,
            base_w_out,
            base_b,
            base_spectral_radius,
            effective,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn scales(&self) -> &Scales {
        &self.scales
    }

    pub fn base_spectral_radius(&self) -> f64 {
        self.base_spectral_radius
    }

    pub fn base_w_in(&self) -> &DMatrix<f64> {
        &self.base_w_in
    }

    pub fn base_w(&self) -> &DMatrix<f64> {
        &self.base_w
    }

    pub fn base_w_fb(&self) -> &DMatrix<f64> {
        &self.base_w_fb
    }

    pub fn base_w_out(&self) -> &DMatrix<f64> {
        &self.base_w_out
    }

    pub fn base_b(&self) -> &DVector<f64> {
        &self.base_b
    }

    pub fn effective(&self) -> &EffectiveMatrices {
        &self.effective
    }

    /// Recomputes the effective matrices from the immutable base.
    pub fn effective_matrices(&self) -> EffectiveMatrices {
        compute_effective(
            &self.scales,
            self.base_spectral_radius,
            &self.base_w_in,
            &self.base_w,
            &self.base_w_fb,
            &self.base_w_out,
            &self.base_b,
        )
    }

    pub fn set_scales(&mut self, scales: Scales) -> Result<()> {
        scales.validate()?;
        self.scales = scales;
        self.effective = self.effective_matrices();
        Ok(())
    }

    /// Changes only the leak rate; the effective matrices do not depend on it.
    pub fn set_leak_rate(&mut self, leak_rate: f64) -> Result<()> {
        let scales = Scales {
            leak_rate,
            ..self.scales
        };
        scales.validate()?;
        self.scales = scales;
        Ok(())
    }

    /// Redraws the network with a new seed and size, keeping the scales.
    pub fn reseed(&self, new_seed: u64, new_neurons: usize) -> Result<Network> {
        if new_neurons == 0 {
            return Err(Error::InvalidConfig("neurons must be at least 1".into()));
        }
        let config = NetworkConfig {
            neurons: new_neurons,
            seed: new_seed,
            ..self.config.clone()
        };
        Network::new(config, self.scales)
    }

    pub fn reset_state(&self) -> ReservoirState {
        ReservoirState::zeros(self.config.neurons)
    }

    /// Pure form of [`Network::step_in_place`].
    pub fn step(
        &self,
        state: &ReservoirState,
        x: &[f64],
        y_fb: &[f64],
    ) -> Result<(ReservoirState, DVector<f64>)> {
        let mut next = state.clone();
        let mut y = DVector::zeros(self.config.output_dim);
        self.step_in_place(&mut next, x, y_fb, y.as_mut_slice())?;
        Ok((next, y))
    }

    /// Advances `state` by one update and writes the readout into `y`.
    pub fn step_in_place(
        &self,
        state: &mut ReservoirState,
        x: &[f64],
        y_fb: &[f64],
        y: &mut [f64],
    ) -> Result<()> {
        let cfg = &self.config;
        if x.len() != cfg.input_dim {
            return Err(Error::Contract(format!(
                "input has length {}, expected {}",
                x.len(),
                cfg.input_dim
            )));
        }
        if y_fb.len() != cfg.feedback_dim {
            return Err(Error::Contract(format!(
                "feedback has length {}, expected {}",
                y_fb.len(),
                cfg.feedback_dim
            )));
        }
        if y.len() != cfg.output_dim {
            return Err(Error::Contract(format!(
                "output buffer has length {}, expected {}",
                y.len(),
                cfg.output_dim
            )));
        }
        if state.s.len() != cfg.neurons || state.h.len() != cfg.neurons {
            return Err(Error::Contract(format!(
                "state has length {}, expected {}",
                state.s.len(),
                cfg.neurons
            )));
        }
        if !x.iter().chain(y_fb).all(|v| v.is_finite()) {
            return Err(Error::Contract("non-finite input or feedback".into()));
        }
        if !state.s.iter().all(|v| v.is_finite()) {
            return Err(Error::Contract("non-finite reservoir state".into()));
        }

        let eff = &self.effective;
        let alpha = self.scales.leak_rate;
        for i in 0..cfg.neurons {
            let mut pre = eff.b[i];
            for (j, xj) in x.iter().enumerate() {
                pre += eff.w_in[(i, j)] * xj;
            }
            for j in 0..cfg.neurons {
                pre += eff.w[(i, j)] * state.s[j];
            }
            for (j, fj) in y_fb.iter().enumerate() {
                pre += eff.w_fb[(i, j)] * fj;
            }
            state.h[i] = pre.tanh();
        }
        for i in 0..cfg.neurons {
            state.s[i] = (1.0 - alpha) * state.s[i] + alpha * state.h[i];
        }
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..cfg.neurons {
                acc += eff.w_out[(r, j)] * state.s[j];
            }
            *out = acc;
        }
        state.t += 1;

        if !state.is_finite() || !y.iter().all(|v| v.is_finite()) {
            return Err(Error::Fault(format!("non-finite values at step {}", state.t)));
        }
        Ok(())
    }
}

fn compute_effective(
    scales: &Scales,
    base_radius: f64,
    base_w_in: &DMatrix<f64>,
    base_w: &DMatrix<f64>,
    base_w_fb: &DMatrix<f64>,
    base_w_out: &DMatrix<f64>,
    base_b: &DVector<f64>,
) -> EffectiveMatrices {
    let w = if base_radius > 0.0 {
        base_w * (scales.spectral_radius / base_radius)
    } else {
        DMatrix::zeros(base_w.nrows(), base_w.ncols())
    };
    EffectiveMatrices {
        w_in: base_w_in * scales.input_scale,
        w,
        w_fb: base_w_fb * scales.feedback_scale,
        w_out: base_w_out.clone(),
        b: base_b * scales.bias_scale,
    }
}

/// Largest eigenvalue modulus of a square matrix by power iteration.
///
/// Starts from the normalized all-ones vector and measures the mean log
/// growth of the iterate norm over a fixed window after a burn-in. Random
/// reservoirs usually have several eigenvalues of nearly maximal modulus with
/// different phases, so the iterate direction never settles; the growth rate
/// still converges to the spectral radius.
pub fn spectral_radius_estimate(w: &DMatrix<f64>) -> f64 {
    let n = w.nrows();
    assert_eq!(n, w.ncols(), "spectral radius needs a square matrix");
    match n {
        0 => return 0.0,
        1 => return w[(0, 0)].abs(),
        _ => {}
    }
    let mut x = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut y = DVector::zeros(n);
    let mut log_growth = 0.0;
    for k in 0..POWER_BURN_IN + POWER_WINDOW {
        y.gemv(1.0, w, &x, 0.0);
        let norm = y.norm();
        if norm == 0.0 {
            // iterate annihilated: nilpotent on the reachable subspace
            return 0.0;
        }
        if k >= POWER_BURN_IN {
            log_growth += norm.ln();
        }
        x.copy_from(&y);
        x /= norm;
    }
    (log_growth / POWER_WINDOW as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(n: usize, seed: u64) -> NetworkConfig {
        NetworkConfig {
            neurons: n,
            input_dim: 2,
            feedback_dim: 1,
            output_dim: 3,
            recurrent_density: 1.0,
            seed,
        }
    }

    fn oracle_radius(w: &DMatrix<f64>) -> f64 {
        w.clone()
            .complex_eigenvalues()
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn rejects_empty_dimensions() {
        let mut cfg = dense(4, 1);
        cfg.neurons = 0;
        assert!(matches!(
            Network::new(cfg, Scales::ZERO),
            Err(Error::InvalidConfig(_))
        ));
        let mut cfg = dense(4, 1);
        cfg.output_dim = 0;
        assert!(matches!(
            Network::new(cfg, Scales::ZERO),
            Err(Error::InvalidConfig(_))
        ));
        let mut cfg = dense(4, 1);
        cfg.recurrent_density = 0.0;
        assert!(Network::new(cfg, Scales::ZERO).is_err());
    }

    #[test]
    fn same_config_gives_identical_bits() {
        let a = Network::new(dense(20, 5), Scales::lfo_default()).unwrap();
        let b = Network::new(dense(20, 5), Scales::lfo_default()).unwrap();
        let bits = |m: &DMatrix<f64>| m.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(a.base_w()), bits(b.base_w()));
        assert_eq!(bits(a.base_w_in()), bits(b.base_w_in()));
        assert_eq!(bits(a.base_w_fb()), bits(b.base_w_fb()));
        assert_eq!(bits(a.base_w_out()), bits(b.base_w_out()));
        assert_eq!(a.base_spectral_radius().to_bits(), b.base_spectral_radius().to_bits());
    }

    #[test]
    fn weights_are_in_unit_interval() {
        let net = Network::new(dense(30, 11), Scales::ZERO).unwrap();
        for m in [net.base_w(), net.base_w_in(), net.base_w_fb(), net.base_w_out()] {
            assert!(m.iter().all(|v| (-1.0..1.0).contains(v)));
        }
    }

    #[test]
    fn input_dim_does_not_perturb_recurrent_draw() {
        let a = Network::new(dense(12, 3), Scales::ZERO).unwrap();
        let mut cfg = dense(12, 3);
        cfg.input_dim = 7;
        cfg.output_dim = 1;
        let b = Network::new(cfg, Scales::ZERO).unwrap();
        assert_eq!(a.base_w(), b.base_w());
        assert_eq!(a.base_b(), b.base_b());
    }

    #[test]
    fn single_neuron_radius_is_abs_weight() {
        for seed in 0..20 {
            let net = Network::new(dense(1, seed), Scales::ZERO).unwrap();
            assert_eq!(net.base_spectral_radius(), net.base_w()[(0, 0)].abs());
        }
    }

    #[test]
    fn power_iteration_matches_eigensolver_n50() {
        for seed in 0..10 {
            let net = Network::new(dense(50, seed), Scales::ZERO).unwrap();
            let oracle = oracle_radius(net.base_w());
            let rel = (net.base_spectral_radius() - oracle).abs() / oracle;
            assert!(rel < 0.01, "seed {seed}: estimate {} oracle {oracle}", net.base_spectral_radius());
        }
    }

    #[test]
    fn sparse_density_zeroes_entries() {
        let mut cfg = dense(60, 2);
        cfg.recurrent_density = 0.1;
        let net = Network::new(cfg, Scales::ZERO).unwrap();
        let nonzero = net.base_w().iter().filter(|v| **v != 0.0).count();
        // binomial(3600, 0.1): mean 360, sd 18
        assert!((270..450).contains(&nonzero), "{nonzero}");
        let oracle = oracle_radius(net.base_w());
        assert!((net.base_spectral_radius() - oracle).abs() / oracle < 0.01);
    }

    #[test]
    fn zero_matrix_radius() {
        assert_eq!(spectral_radius_estimate(&DMatrix::zeros(5, 5)), 0.0);
        // nilpotent: all eigenvalues zero
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 1)] = 1.0;
        m[(1, 2)] = 1.0;
        assert_eq!(spectral_radius_estimate(&m), 0.0);
    }

    #[test]
    fn rotation_has_unit_radius() {
        let (s, c) = 0.3f64.sin_cos();
        let m = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        assert!((spectral_radius_estimate(&m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_scaling_leaves_base() {
        let net = Network::new(dense(6, 8), Scales::ZERO).unwrap();
        let mut net = Network::from_base(
            net.config().clone(),
            Scales::ZERO,
            net.base_w_in().clone(),
            net.base_w() / net.base_spectral_radius(),
            net.base_w_fb().clone(),
            net.base_w_out().clone(),
            net.base_b().clone(),
        )
        .unwrap();
        assert!((net.base_spectral_radius() - 1.0).abs() < 1e-9);
        net.set_scales(Scales {
            input_scale: 1.0,
            spectral_radius: net.base_spectral_radius(),
            feedback_scale: 1.0,
            bias_scale: 1.0,
            leak_rate: 0.5,
        })
        .unwrap();
        let eff = net.effective_matrices();
        assert_eq!(&eff.w_in, net.base_w_in());
        assert_eq!(&eff.w, net.base_w());
        assert_eq!(&eff.w_fb, net.base_w_fb());
        assert_eq!(&eff.w_out, net.base_w_out());
        assert_eq!(&eff.b, net.base_b());
    }

    #[test]
    fn zero_radius_gives_zero_matrix() {
        let net = Network::new(dense(8, 1), Scales::ZERO).unwrap();
        assert!(net.effective_matrices().w.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn effective_radius_hits_target() {
        let mut net = Network::new(dense(40, 4), Scales::ZERO).unwrap();
        net.set_scales(Scales {
            spectral_radius: 0.9,
            ..Scales::ZERO
        })
        .unwrap();
        let achieved = oracle_radius(&net.effective_matrices().w);
        assert!((achieved - 0.9).abs() / 0.9 < 0.01, "{achieved}");
    }

    #[test]
    fn scales_are_applied_to_base_without_drift() {
        let mut net = Network::new(dense(10, 9), Scales::lfo_default()).unwrap();
        let before = net.effective_matrices();
        for rho in [0.1, 3.0, 0.7, 1e-3, 2.5] {
            net.set_scales(Scales {
                spectral_radius: rho,
                ..Scales::lfo_default()
            })
            .unwrap();
        }
        net.set_scales(Scales::lfo_default()).unwrap();
        assert_eq!(before, net.effective_matrices());
        assert_eq!(&before, net.effective());
    }

    #[test]
    fn rejects_bad_scales() {
        let mut net = Network::new(dense(4, 1), Scales::ZERO).unwrap();
        assert!(net.set_leak_rate(1.5).is_err());
        assert!(net
            .set_scales(Scales {
                bias_scale: -0.1,
                ..Scales::ZERO
            })
            .is_err());
        assert_eq!(net.scales(), &Scales::ZERO);
    }

    #[test]
    fn zero_scales_step_is_pure_leak() {
        let net = Network::new(dense(5, 2), Scales::ZERO).unwrap();
        let prev = ReservoirState::from_state(&[0.2, -0.4, 0.6, 0.0, 1.0]);
        let (next, y) = net.step(&prev, &[0.3, -2.0], &[5.0]).unwrap();
        assert!(next.h.iter().all(|v| *v == 0.0));
        assert_eq!(next.s, &prev.s * 0.5);
        assert_eq!(y, net.base_w_out() * &next.s);
        assert_eq!(next.t, 1);
    }

    #[test]
    fn leak_extremes() {
        let mut net = Network::new(dense(5, 2), Scales::lfo_default()).unwrap();
        let prev = ReservoirState::from_state(&[0.2, -0.4, 0.6, 0.0, 1.0]);
        net.set_leak_rate(1.0).unwrap();
        let (next, _) = net.step(&prev, &[0.3, -2.0], &[0.5]).unwrap();
        assert_eq!(next.s, next.h);
        net.set_leak_rate(0.0).unwrap();
        let (next, _) = net.step(&prev, &[0.3, -2.0], &[0.5]).unwrap();
        assert_eq!(next.s, prev.s);
    }

    #[test]
    fn step_checks_dimensions_and_finiteness() {
        let net = Network::new(dense(3, 2), Scales::ZERO).unwrap();
        let st = net.reset_state();
        assert!(matches!(net.step(&st, &[0.0], &[0.0]), Err(Error::Contract(_))));
        assert!(matches!(net.step(&st, &[0.0, 0.0], &[0.0, 1.0]), Err(Error::Contract(_))));
        assert!(matches!(
            net.step(&st, &[f64::NAN, 0.0], &[0.0]),
            Err(Error::Contract(_))
        ));
        let bad = ReservoirState::from_state(&[0.0, f64::INFINITY, 0.0]);
        assert!(matches!(net.step(&bad, &[0.0, 0.0], &[0.0]), Err(Error::Contract(_))));
    }

    #[test]
    fn reset_then_zero_scales_output_is_zero() {
        let net = Network::new(dense(7, 2), Scales::ZERO).unwrap();
        let st = net.reset_state();
        assert!(st.s.iter().all(|v| *v == 0.0) && st.t == 0 && st.neurons() == 7);
        let (_, y) = net.step(&st, &[1.0, 1.0], &[1.0]).unwrap();
        assert!(y.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn reseed_contract() {
        let scales = Scales {
            leak_rate: 0.3,
            spectral_radius: 1.2,
            ..Scales::lfo_default()
        };
        let net = Network::new(dense(16, 21), scales).unwrap();
        let same = net.reseed(21, 16).unwrap();
        assert_eq!(same, net);
        let other = net.reseed(22, 16).unwrap();
        assert_ne!(other.base_w(), net.base_w());
        assert_eq!(other.scales(), &scales);
        let bigger = net.reseed(21, 32).unwrap();
        assert_eq!(bigger.config().neurons, 32);
        assert_eq!(bigger.scales(), &scales);
        assert!(matches!(net.reseed(1, 0), Err(Error::InvalidConfig(_))));
    }
}
