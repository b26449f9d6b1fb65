#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// Relative discrepancy with a floor for entries that are negligible next to
/// the largest entry of the reference vector.
pub fn rel_err(got: f64, want: f64, scale: f64) -> f64 {
    (got - want).abs() / got.abs().max(want.abs()).max(scale)
}

pub fn max_rel_err(got: &[f64], want: &[f64], floor_fraction: f64) -> (f64, usize) {
    max_rel_err_floor(got, want, floor_fraction, 0.0)
}

/// As [`max_rel_err`] with an additional absolute floor for references that
/// are identically zero up to finite-difference noise.
pub fn max_rel_err_floor(got: &[f64], want: &[f64], floor_fraction: f64, abs_floor: f64) -> (f64, usize) {
    assert_eq!(got.len(), want.len());
    let scale = (want.iter().fold(0.0f64, |m, v| m.max(v.abs())) * floor_fraction).max(abs_floor);
    got.iter()
        .zip(want)
        .map(|(&g, &w)| rel_err(g, w, scale.max(1e-300)))
        .enumerate()
        .fold((0.0, 0), |(m, mi), (i, e)| if e > m { (e, i) } else { (m, mi) })
}

/// Central difference of `f` in coordinate `i` of `x`.
pub fn central_diff(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut xp = x.to_vec();
    xp[i] += h;
    let up = f(&xp);
    xp[i] = x[i] - h;
    let dn = f(&xp);
    (up - dn) / (2.0 * h)
}

/// Fourth-order central difference.
pub fn central_diff4(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut xp = x.to_vec();
    let mut at = |d: f64| {
        xp[i] = x[i] + d;
        f(&xp)
    };
    let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
    (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h)
}

/// A random small AD problem: 2-4 locations, 2-6 time levels, small networks
/// and perturbed parameters.
pub fn ad_random_case(seed: u64) -> (fracpinn::pinn_ad::AdModel, fracpinn::pinn_ad::AdDataset) {
    use fracpinn::pinn_ad::{AdArchitecture, AdDataset, AdModel};
    let mut r = rng(seed);
    let n_loc = r.random_range(2..=4);
    let n_t = r.random_range(2..=6);
    let dt = uniform(&mut r, 0.01, 0.3);
    let locs: Vec<(f64, f64)> = (0..n_loc).map(|_| (uniform(&mut r, 0.0, 1.0), uniform(&mut r, 0.0, 1.0))).collect();
    let mut recs = Vec::new();
    for k in 0..n_t {
        for &(x, y) in &locs {
            recs.push([k as f64 * dt, x, y, uniform(&mut r, -0.5, 1.5)]);
        }
    }
    let ds = AdDataset::from_records(&recs).unwrap();
    let widths = |r: &mut ChaCha8Rng, max_layers: usize, max_w: usize| -> Vec<usize> {
        (0..r.random_range(1..=max_layers)).map(|_| r.random_range(1..=max_w)).collect()
    };
    let arch = AdArchitecture {
        theta_hidden: widths(&mut r, 3, 6),
        phi_hidden: widths(&mut r, 2, 4),
    };
    let mut model = AdModel::init(&arch, &ds, seed).unwrap();
    let mut p = model.trainable();
    for v in p.iter_mut() {
        *v += uniform(&mut r, -0.3, 0.3);
    }
    let last = p.len() - 1;
    p[last] = uniform(&mut r, -2.0, 2.0);
    model.set_trainable(&p).unwrap();
    (model, ds)
}

/// Largest per-coordinate relative error between an analytic gradient and
/// fourth-order central differences of `f`.
pub fn fd_gradient_error(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], grad: &[f64], h: f64) -> (f64, usize) {
    let fd: Vec<f64> = (0..x.len()).map(|i| central_diff4(f, x, i, h)).collect();
    max_rel_err(grad, &fd, 1e-4)
}

/// A random small fractional Maxwell problem: 2-8 samples, small networks and
/// perturbed parameters.
pub fn fm_random_case(seed: u64) -> (fracpinn::pinn_fm::FmModel, fracpinn::pinn_fm::RheoDataset) {
    use fracpinn::pinn_fm::{FmArchitecture, FmModel, RheoDataset};
    let mut r = rng(seed);
    let n = r.random_range(2..=8);
    let dt = uniform(&mut r, 0.01, 0.5);
    let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    let stress: Vec<f64> = (0..n).map(|_| uniform(&mut r, -0.5, 2.0)).collect();
    let strain: Vec<f64> = (0..n).map(|_| uniform(&mut r, 0.0, 0.3)).collect();
    let ds = RheoDataset::new(times, stress, strain).unwrap();
    let widths = |r: &mut ChaCha8Rng| -> Vec<usize> { (0..r.random_range(1..=2)).map(|_| r.random_range(1..=6)).collect() };
    let arch = FmArchitecture {
        beta_hidden: widths(&mut r),
        zeta_hidden: widths(&mut r),
    };
    let mut model = FmModel::init(&arch, &ds, seed).unwrap();
    let mut p = model.trainable();
    for v in p.iter_mut() {
        *v += uniform(&mut r, -0.3, 0.3);
    }
    let m = p.len();
    p[m - 3] = uniform(&mut r, -1.5, 1.5);
    p[m - 2] = uniform(&mut r, -1.5, 1.5);
    p[m - 1] = uniform(&mut r, -2.0, 2.0);
    model.set_trainable(&p).unwrap();
    (model, ds)
}
