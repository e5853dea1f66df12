//! Random unitaries and random QCA expressions for the property tests.

use std::sync::Arc;

use qca_anomaly::opwin::SiteSpec;
use qca_anomaly::qca::{BlockLayer, GateTemplate, QcaExpr};
use qca_anomaly::{CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller
    let u: f64 = rng.random_range(f64::EPSILON..1.0);
    let v: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

pub fn unitary(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let m = CMatrix::from_fn(dim, dim, |_, _| C64::new(gaussian(rng), gaussian(rng)));
    let qr = m.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix the column phases so the distribution does not depend on the QR convention
    let mut q = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Brickwork of random 2-site layers with a register shift in a random slot.
pub fn expr(seed: u64, d: usize, layers: usize) -> QcaExpr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sites = Arc::new(SiteSpec::new(vec![d]).unwrap());
    let layer = |anchor: i64, rng: &mut ChaCha8Rng| {
        let t = GateTemplate::new(&sites, anchor, 2, unitary(d * d, rng)).unwrap();
        BlockLayer::new(&sites, 2, vec![t]).unwrap()
    };
    let shift: i64 = rng.random_range(-1..=1);
    let slot = rng.random_range(0..=layers);
    let mut e = QcaExpr::identity(sites.clone());
    for i in 0..=layers {
        if i == slot && shift != 0 {
            e = e.then_shift(0, shift).unwrap();
        }
        if i < layers {
            e = e.then_layer(layer(i as i64, &mut rng)).unwrap();
        }
    }
    e
}
