use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PartnerNetwork;

pub const DEFAULT_LAYOUT_ITERATIONS: usize = 500;
/// Two linked nodes settle at a distance below `TWO_NODE_SPREAD · k`.
pub const TWO_NODE_SPREAD: f64 = 1.5;

/// Fruchterman–Reingold placement with k = √(1/n), repulsion k²/d,
/// attraction d²/k and a linearly cooled step cap starting at 0.1.
///
/// Starts from uniform positions in the unit square. The final drawing is
/// centred on (0.5, 0.5) and shrunk uniformly if it overflows the square.
pub fn layout(network: &PartnerNetwork, iterations: usize, seed: u64) -> Vec<(f64, f64)> {
    let n = network.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![(0.5, 0.5)];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    let edges = network.edges();
    let k = (1.0 / n as f64).sqrt();
    let k2 = k * k;
    let t0 = 0.1;
    let mut disp = vec![[0.0f64; 2]; n];
    for it in 0..iterations {
        let t = t0 * (1.0 - it as f64 / iterations as f64);
        disp.iter_mut().for_each(|d| *d = [0.0, 0.0]);
        for u in 0..n {
            for v in u + 1..n {
                let dx = pos[u][0] - pos[v][0];
                let dy = pos[u][1] - pos[v][1];
                let d2 = (dx * dx + dy * dy).max(1e-18);
                // (k² / d) along the unit vector (dx, dy) / d
                let f = k2 / d2;
                disp[u][0] += dx * f;
                disp[u][1] += dy * f;
                disp[v][0] -= dx * f;
                disp[v][1] -= dy * f;
            }
        }
        for &(u, v, _) in &edges {
            let dx = pos[u][0] - pos[v][0];
            let dy = pos[u][1] - pos[v][1];
            let d = (dx * dx + dy * dy).sqrt();
            // (d² / k) along the unit vector
            let f = d / k;
            disp[u][0] -= dx * f;
            disp[u][1] -= dy * f;
            disp[v][0] += dx * f;
            disp[v][1] += dy * f;
        }
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if len > 0.0 {
                let step = len.min(t) / len;
                p[0] += d[0] * step;
                p[1] += d[1] * step;
            }
        }
    }
    fit_unit_square(&pos)
}

fn fit_unit_square(pos: &[[f64; 2]]) -> Vec<(f64, f64)> {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in pos {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let span = (x1 - x0).max(y1 - y0);
    let scale = if span > 1.0 { 1.0 / span } else { 1.0 };
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    pos.iter()
        .map(|p| (0.5 + (p[0] - cx) * scale, 0.5 + (p[1] - cy) * scale))
        .collect()
}
