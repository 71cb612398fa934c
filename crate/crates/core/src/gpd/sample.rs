//! Inverse-transform sampling from the Gompertz-Pareto distribution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GpdError, GpdParams, GOMPERTZ_INTERCEPT};

impl GpdParams {
    /// Income at which the complementary distribution equals `q` percent.
    ///
    /// Inverts the Gompertz branch for `q > F(x_t)` and the Pareto branch
    /// otherwise; ties at the frontier resolve to the Pareto branch.
    pub fn inverse_ccdf(&self, q: f64) -> Result<f64, GpdError> {
        if !(q > 0.0 && q <= 100.0) {
            return Err(GpdError::QuantileOutOfRange { q });
        }
        Ok(self.inverse_ccdf_with_threshold(q, self.ccdf_at_threshold()))
    }

    fn inverse_ccdf_with_threshold(&self, q: f64, e_t: f64) -> f64 {
        if q > e_t {
            // Gompertz branch: q = exp(exp(A - Bx)). q > F(x_t) > 1 keeps
            // the double logarithm defined.
            (GOMPERTZ_INTERCEPT - q.ln().ln()) / self.b()
        } else {
            self.x_t() * (e_t / q).powf(1.0 / self.alpha())
        }
    }

    /// Draw `n` i.i.d. incomes by inversion of a seeded uniform stream.
    /// The same seed always reproduces the same sample.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e_t = self.ccdf_at_threshold();
        (0..n)
            .map(|_| {
                // (0, 100]: excludes q = 0, whose preimage is infinite.
                let q = 100.0 * (1.0 - rng.random::<f64>());
                self.inverse_ccdf_with_threshold(q, e_t)
            })
            .collect()
    }
}
