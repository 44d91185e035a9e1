//! Random fluxes, entropies, junctions and states for property checks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::entropy::EntropyPair;
use crate::error::Result;
use crate::flux::FluxFunction;
use crate::junction::{germ_projection, solve_riemann, Junction, Road};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// `count` positive widths summing to `total`
fn widths<R: Rng>(rng: &mut R, count: usize, total: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..count).map(|_| rng.gen_range(0.3..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|w| w / sum * total).collect()
}

/// Bell-shaped piecewise linear flux on `[a, b]` with up to three pieces on
/// each side of the peak; consecutive slope magnitudes differ by a factor in
/// `[1.1, 2]`.
pub fn random_flux<R: Rng>(rng: &mut R, a: f64, b: f64) -> FluxFunction {
    let w = b - a;
    let sigma = a + w * rng.gen_range(0.2..0.8);
    let count = rng.gen_range(1..=3);
    let rising = widths(rng, count, sigma - a);
    let count = rng.gen_range(1..=3);
    let falling = widths(rng, count, b - sigma);
    let mut up = vec![1.0];
    for _ in 1..rising.len() {
        let last = *up.last().unwrap();
        up.push(last / rng.gen_range(1.1..2.0));
    }
    let mut down = vec![1.0];
    for _ in 1..falling.len() {
        let last = *down.last().unwrap();
        down.push(last * rng.gen_range(1.1..2.0));
    }
    let peak: f64 = up.iter().zip(&rising).map(|(s, w)| s * w).sum();
    let drop: f64 = down.iter().zip(&falling).map(|(s, w)| s * w).sum();
    let scale = rng.gen_range(0.5..2.0) / peak;
    let mut points = vec![(a, 0.0)];
    let mut x = a;
    let mut y = 0.0;
    for (s, dx) in up.iter().zip(&rising) {
        x += dx;
        y += scale * s * dx;
        points.push((x, y));
    }
    let top = y;
    points.last_mut().unwrap().0 = sigma;
    x = sigma;
    for (k, (s, dx)) in down.iter().zip(&falling).enumerate() {
        x += dx;
        y -= top / drop * s * dx;
        if k + 1 == falling.len() {
            points.push((b, 0.0));
        } else {
            points.push((x, y));
        }
    }
    FluxFunction::new(points).expect("construction yields a bell-shaped flux")
}

/// Strictly convex entropy with `η̂'(σ-) ≤ 0 ≤ η̂'(σ+)`; piece slopes of
/// `η̂'` lie in `[0.5, 2]` and a jump may sit at `σ`.
pub fn random_entropy<R: Rng>(rng: &mut R, f: &FluxFunction) -> EntropyPair {
    let (a, b) = f.domain();
    let sigma = f.peak();
    let count = rng.gen_range(1..=2);
    let below = widths(rng, count, sigma - a);
    let count = rng.gen_range(1..=2);
    let above = widths(rng, count, b - sigma);
    let (at_minus, at_plus) = if rng.gen_bool(0.3) {
        (-rng.gen_range(0.0..0.3), rng.gen_range(0.0..0.3))
    } else {
        (0.0, 0.0)
    };
    let mut segments = Vec::new();
    let mut x = sigma;
    let mut v = at_minus;
    for w in &below {
        let s = rng.gen_range(0.5..2.0);
        segments.push([x - w, x, v - s * w, v]);
        x -= w;
        v -= s * w;
    }
    segments.reverse();
    segments[0][0] = a;
    x = sigma;
    v = at_plus;
    for w in &above {
        let s = rng.gen_range(0.5..2.0);
        segments.push([x, x + w, v, v + s * w]);
        x += w;
        v += s * w;
    }
    segments.last_mut().unwrap()[1] = b;
    for k in 1..segments.len() {
        segments[k][0] = segments[k - 1][1];
    }
    EntropyPair::from_segments(&segments).expect("construction yields a monotone derivative")
}

/// Junction with `1..=max_in` incoming and `1..=max_out` outgoing roads on
/// domains `[0, b]`.
pub fn random_junction<R: Rng>(rng: &mut R, max_in: usize, max_out: usize) -> Junction {
    let n = rng.gen_range(1..=max_in.max(1));
    let m = rng.gen_range(1..=max_out.max(1));
    let mut road = |id: String| {
        let b = rng.gen_range(0.5..2.0);
        let f = random_flux(rng, 0.0, b);
        let e = random_entropy(rng, &f);
        Road::new(id, f, e)
    };
    let incoming = (0..n).map(|k| road(format!("in{k}"))).collect();
    let outgoing = (0..m).map(|k| road(format!("out{k}"))).collect();
    Junction::new(incoming, outgoing).expect("random roads share f(0) = 0")
}

/// Uniform state in `∏ K_h`; with probability 1/4 a road sits at `σ_h` or
/// at an end of `K_h`.
pub fn random_state<R: Rng>(rng: &mut R, junction: &Junction) -> Vec<f64> {
    junction
        .roads()
        .map(|(_, r)| {
            let (a, b) = r.flux.domain();
            match rng.gen_range(0..12) {
                0 => r.flux.peak(),
                1 => a,
                2 => b,
                _ => rng.gen_range(a..=b),
            }
        })
        .collect()
}

/// Germ member obtained from the Riemann solution of a random state.
pub fn random_germ_member<R: Rng>(rng: &mut R, junction: &Junction) -> Result<Vec<f64>> {
    let rho = random_state(rng, junction);
    let sol = solve_riemann(junction, &rho)?;
    Ok(germ_projection(junction, &sol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_objects_are_valid() {
        let mut r = rng(7);
        for _ in 0..200 {
            let j = random_junction(&mut r, 3, 3);
            assert!((1..=3).contains(&j.n()) && (1..=3).contains(&j.m()));
            for (_, road) in j.roads() {
                assert!(road.entropy.is_strictly_convex());
                assert!(road.entropy.dissipation_compatible(&road.flux));
                let slopes = road.flux.slopes();
                for w in slopes.windows(2) {
                    let ratio = if w[1] > 0.0 { w[0] / w[1] } else { w[1] / w[0] };
                    assert!(w[0] > w[1]);
                    if w[0] * w[1] > 0.0 {
                        assert!((1.1 - 1e-9..=2.0 + 1e-9).contains(&ratio), "{slopes:?}");
                    }
                }
            }
            let s = random_state(&mut r, &j);
            assert_eq!(s.len(), j.len());
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = random_junction(&mut rng(3), 3, 3);
        let b = random_junction(&mut rng(3), 3, 3);
        assert_eq!(a, b);
    }
}
