//! Brute-force references used to check the library. Deliberately naive and
//! independent of the library's code paths.

#![allow(dead_code)]

use featbag::distance::Kernel;

pub fn kernel(k: &Kernel, x: &[f64], y: &[f64]) -> f64 {
    match *k {
        Kernel::Linear => {
            let mut s = 0.0;
            for i in 0..x.len() {
                s += x[i] * y[i];
            }
            s
        }
        Kernel::Gaussian { gamma } => {
            let mut s = 0.0;
            for i in 0..x.len() {
                s += (x[i] - y[i]) * (x[i] - y[i]);
            }
            (-gamma * s).exp()
        }
    }
}

/// Ordered-pair double loop over `h[i,j]`, clamped at zero, square-rooted.
pub fn mmd(k: &Kernel, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> f64 {
    let q = xs.len();
    let mut total = 0.0;
    for i in 0..q {
        for j in 0..q {
            if i != j {
                total += kernel(k, &xs[i], &xs[j]) + kernel(k, &ys[i], &ys[j])
                    - kernel(k, &xs[i], &ys[j])
                    - kernel(k, &xs[j], &ys[i]);
            }
        }
    }
    let s = total / (q * q - q) as f64;
    if s > 0.0 {
        s.sqrt()
    } else {
        0.0
    }
}

/// Classical LOF with inclusive k-neighborhoods and an epsilon-floored density.
pub fn lof(d: &[Vec<f64>], k: usize) -> Vec<f64> {
    let size = d.len();
    let mut kdist = vec![0.0; size];
    for o in 0..size {
        let mut best = f64::INFINITY;
        for c in 0..size {
            if c == o {
                continue;
            }
            let mut within = 0;
            for p in 0..size {
                if p != o && d[o][p] <= d[o][c] {
                    within += 1;
                }
            }
            if within >= k && d[o][c] < best {
                best = d[o][c];
            }
        }
        kdist[o] = best;
    }
    let hood = |o: usize| -> Vec<usize> {
        (0..size)
            .filter(|&p| p != o && d[o][p] <= kdist[o])
            .collect()
    };
    let mut lrd = vec![0.0; size];
    for o in 0..size {
        let nb = hood(o);
        let mut reach = 0.0;
        for &p in &nb {
            reach += if kdist[p] > d[o][p] {
                kdist[p]
            } else {
                d[o][p]
            };
        }
        lrd[o] = nb.len() as f64 / (reach + 1e-12);
    }
    (0..size)
        .map(|o| {
            let nb = hood(o);
            let mut s = 0.0;
            for &p in &nb {
                s += lrd[p];
            }
            s / nb.len() as f64 / lrd[o]
        })
        .collect()
}
