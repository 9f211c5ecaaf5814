//! Independent reference computations for integration tests.
//!
//! Nothing here calls into the library's solvers; the oracles work from
//! first principles (brute-force scans, explicit combinatorics).

#![allow(dead_code)]

use std::collections::HashMap;

/// `C(n, k)` as a float.
pub fn binom(n: i64, k: i64) -> f64 {
    if k < 0 || n < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Every spin string of length `l`, as `Vec<i8>`, in lexicographic order of
/// base-3 digits `- 0 +`.
pub fn all_strings(l: usize) -> Vec<Vec<i8>> {
    let total = 3usize.pow(l as u32);
    (0..total)
        .map(|mut c| {
            let mut s = vec![0i8; l];
            for site in (0..l).rev() {
                s[site] = (c % 3) as i8 - 1;
                c /= 3;
            }
            s
        })
        .collect()
}

pub fn charge(s: &[i8]) -> i64 {
    s.iter().map(|&v| v as i64).sum()
}

pub fn dipole(s: &[i8]) -> i64 {
    s.iter()
        .enumerate()
        .map(|(i, &v)| (i as i64 + 1) * v as i64)
        .sum()
}

/// Flat average over all strings with the given `(Q, P)`, by full scan.
pub fn brute_sector_profile(l: usize, q: i64, p: i64) -> (usize, Vec<f64>) {
    let members: Vec<Vec<i8>> = all_strings(l)
        .into_iter()
        .filter(|s| charge(s) == q && dipole(s) == p)
        .collect();
    let mut mean = vec![0.0; l];
    for s in &members {
        for (m, &v) in mean.iter_mut().zip(s) {
            *m += v as f64;
        }
    }
    let n = members.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    (members.len(), mean)
}

/// Gate classes of width `n` by grouping all windows on `(q, p)`.
pub fn brute_gate_classes(n: usize) -> Vec<Vec<Vec<i8>>> {
    let mut groups: HashMap<(i64, i64), Vec<Vec<i8>>> = HashMap::new();
    for s in all_strings(n) {
        groups.entry((charge(&s), dipole(&s))).or_default().push(s);
    }
    let mut out: Vec<_> = groups.into_values().collect();
    out.sort();
    out
}

/// Connected components of all length-`l` strings under width-`n` moves,
/// by union-find over explicit window rewrites. Returns a component id per
/// string in [`all_strings`] order.
pub fn brute_components(l: usize, n: usize) -> Vec<usize> {
    let strings = all_strings(l);
    let index: HashMap<Vec<i8>, usize> = strings
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    let classes = brute_gate_classes(n);
    let class_of: HashMap<Vec<i8>, usize> = classes
        .iter()
        .enumerate()
        .flat_map(|(c, members)| members.iter().map(move |m| (m.clone(), c)))
        .collect();
    let mut parent: Vec<usize> = (0..strings.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, s) in strings.iter().enumerate() {
        for start in 0..=l - n {
            let window = &s[start..start + n];
            for other in &classes[class_of[window]] {
                let mut t = s.clone();
                t[start..start + n].copy_from_slice(other);
                let j = index[&t];
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    (0..strings.len()).map(|i| find(&mut parent, i)).collect()
}

/// Weights of the last-hole column `a` and first-particle column `b` in the
/// uniform two-tier ensemble of the state with fractons at `(i1, i2)`.
///
/// Holes occupy `i1 − 1` of the columns `1..=a` with one at `a`; particles
/// occupy `L − i2` of the columns `b..L` with one at `b`; `b ≥ a + 2`.
/// Column 0 stands in for the last hole when there are none.
fn two_tier_pairs(l: usize, i1: usize, i2: usize) -> Vec<(usize, usize, f64)> {
    let nh = i1 as i64 - 1;
    let np = l as i64 - i2 as i64;
    let mut out = Vec::new();
    for a in 0..l {
        let wa = if nh == 0 {
            (a == 0) as u8 as f64
        } else if a >= 1 {
            binom(a as i64 - 1, nh - 1)
        } else {
            0.0
        };
        if wa == 0.0 {
            continue;
        }
        for b in a + 2..=l {
            let wb = if np == 0 {
                (b == l) as u8 as f64
            } else if b < l {
                binom(l as i64 - 1 - b as i64, np - 1)
            } else {
                0.0
            };
            if wb > 0.0 {
                out.push((a, b, wa * wb));
            }
        }
    }
    out
}

/// Exact stationary charge profile of the two-fracton state `(i1, i2)`.
pub fn exact_two_fracton_profile(l: usize, i1: usize, i2: usize) -> Vec<f64> {
    let nh = i1 as f64 - 1.0;
    let np = (l - i2) as f64;
    let mut acc = vec![0.0; l + 1];
    let mut total = 0.0;
    for (a, b, w) in two_tier_pairs(l, i1, i2) {
        total += w;
        for (k, slot) in acc.iter_mut().enumerate().take(l).skip(1) {
            let mut h = 0.0;
            if k == a {
                h -= 1.0;
            } else if k < a && nh > 1.0 {
                h -= (nh - 1.0) / (a as f64 - 1.0);
            }
            if k == b {
                h += 1.0;
            } else if k > b && np > 1.0 {
                h += (np - 1.0) / (l as f64 - 1.0 - b as f64);
            }
            *slot += w * h;
        }
    }
    let mut h: Vec<f64> = acc.iter().map(|v| v / total + 1.0).collect();
    h[0] = 0.0;
    h[l] = 2.0;
    h.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Exact stationary weight of each piston column (last hole + 1).
pub fn exact_piston_weights(l: usize, i1: usize, i2: usize) -> HashMap<usize, f64> {
    let mut w = HashMap::new();
    for (a, _, x) in two_tier_pairs(l, i1, i2) {
        *w.entry(a + 1).or_insert(0.0) += x;
    }
    w
}
