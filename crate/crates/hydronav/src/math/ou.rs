use super::{Rng, Vec3};
use crate::error::{Error, Result};

/// Scalar Ornstein-Uhlenbeck process, discretized with Euler-Maruyama
/// (`√dt` diffusion scaling). Mean-reverts to `mu` at rate `theta` with
/// diffusion `sigma`; stationary variance is `sigma² / (2·theta)`.
#[derive(Clone, Copy, Debug)]
pub struct OuProcess {
    state: f64,
    theta: f64,
    sigma: f64,
    mu: f64,
    dt: f64,
}

impl OuProcess {
    pub fn new(theta: f64, sigma: f64, mu: f64, dt: f64) -> Result<OuProcess> {
        if !(theta >= 0.0) {
            return Err(Error::InvalidParam(format!("OU theta must be >= 0, got {theta}")));
        }
        if !(sigma >= 0.0) {
            return Err(Error::InvalidParam(format!("OU sigma must be >= 0, got {sigma}")));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidParam(format!("OU dt must be > 0, got {dt}")));
        }
        Ok(OuProcess { state: mu, theta, sigma, mu, dt })
    }

    pub fn with_state(mut self, state: f64) -> OuProcess {
        self.state = state;
        self
    }

    pub fn value(&self) -> f64 {
        self.state
    }

    pub fn reset(&mut self, state: f64) {
        self.state = state;
    }

    /// Advance one step and return the new state.
    pub fn step(&mut self, rng: &mut Rng) -> f64 {
        let n = if self.sigma > 0.0 { rng.normal() } else { 0.0 };
        self.state += self.theta * (self.mu - self.state) * self.dt
            + self.sigma * self.dt.sqrt() * n;
        self.state
    }
}

/// Three independent OU channels sharing parameters, for per-axis wind,
/// current, and exploration noise.
#[derive(Clone, Copy, Debug)]
pub struct OuProcess3 {
    channels: [OuProcess; 3],
}

impl OuProcess3 {
    pub fn new(theta: f64, sigma: f64, mu: f64, dt: f64) -> Result<OuProcess3> {
        let p = OuProcess::new(theta, sigma, mu, dt)?;
        Ok(OuProcess3 { channels: [p; 3] })
    }

    pub fn reset(&mut self, state: f64) {
        for c in &mut self.channels {
            c.reset(state);
        }
    }

    pub fn step(&mut self, rng: &mut Rng) -> [f64; 3] {
        [
            self.channels[0].step(rng),
            self.channels[1].step(rng),
            self.channels[2].step(rng),
        ]
    }

    pub fn step_vec(&mut self, rng: &mut Rng) -> Vec3 {
        let [x, y, z] = self.step(rng);
        Vec3::new(x, y, z)
    }
}
