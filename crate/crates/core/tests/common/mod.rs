#![allow(dead_code)]

use gapclique::ffield::{FieldVector, PrimeField};
use gapclique::lintest::{FunctionTable, LinearScalarFn, LinearVecFn};
use gapclique::stats::{frac, Fraction};
use num_complex::Complex64;
use rand::Rng;

pub fn field(q: u64) -> PrimeField {
    PrimeField::new(q).unwrap()
}

/// Direct evaluation of `E_a[omega^(f(a) - <rho, a>)]` for every `rho`.
pub fn naive_fourier(f: &FunctionTable) -> Vec<Complex64> {
    let q = f.field().modulus();
    let n = f.domain_size();
    let space = f.space();
    (0..n)
        .map(|rho| {
            let r = space.point(rho);
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..n {
                let p = space.point(a);
                let ip: u64 = r.iter().zip(&p).map(|(x, y)| x * y).sum::<u64>() % q;
                let e = (f.value(a)[0] + q - ip) % q;
                acc += Complex64::from_polar(1.0, std::f64::consts::TAU * e as f64 / q as f64);
            }
            acc / n as f64
        })
        .collect()
}

/// Exact agreement of `f` with `<rho, .>` by counting.
pub fn naive_agreement(f: &FunctionTable, rho: usize) -> Fraction {
    let q = f.field().modulus();
    let r = f.space().point(rho);
    let hits = (0..f.domain_size())
        .filter(|&a| {
            let p = f.space().point(a);
            r.iter().zip(&p).map(|(x, y)| x * y).sum::<u64>() % q == f.value(a)[0]
        })
        .count();
    frac(hits as u64, f.domain_size() as u64)
}

/// `{rho : agreement(f, rho) >= 1/q + (q-1)/q * threshold}` in exact arithmetic.
pub fn brute_force_list(f: &FunctionTable, threshold: Fraction) -> Vec<usize> {
    let q = f.field().modulus();
    let bound = frac(1, q) + frac(q - 1, q) * threshold;
    (0..f.domain_size())
        .filter(|&rho| naive_agreement(f, rho) >= bound)
        .collect()
}

/// Counts `f1(a) + f2(b) = f3(a + b)` over all pairs.
pub fn naive_triple(f1: &FunctionTable, f2: &FunctionTable, f3: &FunctionTable) -> Fraction {
    let q = f1.field().modulus();
    let n = f1.domain_size();
    let mut hits = 0u64;
    for a in 0..n {
        let pa = f1.space().point(a);
        for b in 0..n {
            let pb = f1.space().point(b);
            let s: Vec<u64> = pa.iter().zip(&pb).map(|(x, y)| (x + y) % q).collect();
            let idx = f1.space().index_of(&s);
            if (f1.value(a)[0] + f2.value(b)[0]) % q == f3.value(idx)[0] {
                hits += 1;
            }
        }
    }
    frac(hits, (n * n) as u64)
}

pub fn linear_table(c: &LinearVecFn) -> FunctionTable {
    FunctionTable::from_fn(c.field(), c.dim(), c.range(), |p| c.eval_point(p))
        .unwrap()
        .into_scalar_respecting()
        .unwrap()
}

pub fn random_linear<R: Rng>(q: u64, d: usize, ell: usize, rng: &mut R) -> LinearVecFn {
    let f = field(q);
    let rows = (0..ell).map(|_| FieldVector::random(f, d, rng)).collect();
    LinearVecFn::new(f, d, rows).unwrap()
}

pub fn scalar_fn(q: u64, rho: &[u64]) -> LinearScalarFn {
    LinearScalarFn::new(FieldVector::new(field(q), rho.to_vec()))
}

/// Representatives (leading coordinate 1) of the lines through the origin.
pub fn line_reps(f: &FunctionTable) -> Vec<usize> {
    (1..f.domain_size()).filter(|&i| f.canonical_rep(i).0 == i).collect()
}

/// Replaces the values on `count` distinct lines (chosen at random) with fresh
/// random values and re-imposes scalar respect.
pub fn corrupt_lines<R: Rng>(f: &FunctionTable, count: usize, rng: &mut R) -> FunctionTable {
    let mut reps = line_reps(f);
    let mut out = f.clone();
    for i in 0..count.min(reps.len()) {
        let j = rng.random_range(i..reps.len());
        reps.swap(i, j);
        let fresh: Vec<u64> = (0..f.range())
            .map(|_| rng.random_range(0..f.field().modulus()))
            .collect();
        out.set_value(reps[i], &fresh).unwrap();
    }
    out.scalar_closure()
}

/// All tuples of `F_q^len` in lexicographic order.
pub fn all_points(q: u64, len: usize) -> Vec<Vec<u64>> {
    let total = (q as usize).pow(len as u32);
    (0..total)
        .map(|mut i| {
            let mut p = vec![0; len];
            for slot in p.iter_mut().rev() {
                *slot = (i % q as usize) as u64;
                i /= q as usize;
            }
            p
        })
        .collect()
}

/// `V` by filtering the full product `F_q^{k^2} x F_q^{k^2} x F_q^l x F_q^l`.
pub fn naive_vertices(q: u64, k: usize, ell: usize) -> Vec<gapclique::reduction::Vertex> {
    let sides = all_points(q, k * k);
    let fibers = all_points(q, ell);
    let mut out = Vec::new();
    for a in &sides {
        for b in &sides {
            for x in &fibers {
                for y in &fibers {
                    if a != b || x == y {
                        out.push(gapclique::reduction::Vertex {
                            alpha: a.clone(),
                            beta: b.clone(),
                            x: x.clone(),
                            y: y.clone(),
                        });
                    }
                }
            }
        }
    }
    out
}

fn vsub(q: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(s, t)| (s + q - t) % q).collect()
}

fn vscale(q: u64, c: u64, a: &[u64]) -> Vec<u64> {
    a.iter().map(|s| s * c % q).collect()
}

/// `M(a, w)` for `w` given as `l` consecutive blocks of width `k`.
pub fn naive_m(q: u64, a: &[u64], w: &[u64]) -> Vec<u64> {
    w.chunks(a.len())
        .map(|blk| blk.iter().zip(a).map(|(s, t)| s * t).sum::<u64>() % q)
        .collect()
}

/// The non-edge types of a pair, each rule evaluated by direct enumeration
/// of its existential quantifiers.
pub fn naive_non_edge(
    u: &gapclique::reduction::Vertex,
    v: &gapclique::reduction::Vertex,
    inst: &gapclique::reduction::CliqueInstance,
) -> Vec<u8> {
    use gapclique::reduction::vertex_eval;
    let f = inst.field();
    let q = f.modulus();
    let k = inst.params().k;
    let mut out = Vec::new();
    if u.alpha == v.alpha && u.beta == v.beta {
        out.push(1);
    }
    let (vu, vv) = (u.var(f), v.var(f));
    if vu
        .iter()
        .filter(|p| vv.contains(p))
        .any(|p| vertex_eval(u, p, f).unwrap() != vertex_eval(v, p, f).unwrap())
    {
        out.push(2);
    }
    let t3 = |a: &gapclique::reduction::Vertex, b: &gapclique::reduction::Vertex| {
        (0..q).any(|c| a.alpha == vscale(q, c, &b.alpha) && a.x != vscale(q, c, &b.x))
    };
    if t3(u, v) || t3(v, u) {
        out.push(3);
    }
    let diff = vsub(q, &u.alpha, &v.alpha);
    let dx = vsub(q, &u.x, &v.x);
    let dirs = all_points(q, k);
    let t4 = (0..k).any(|i| {
        dirs.iter().filter(|a| a.iter().any(|&c| c != 0)).any(|a| {
            let mut e = vec![0; k * k];
            e[i * k..(i + 1) * k].copy_from_slice(a);
            e == diff
                && inst.source().collection(i).iter().all(|w| {
                    let img = inst.map().apply(w).unwrap();
                    naive_m(q, a, img.as_vector().entries()) != dx
                })
        })
    });
    if t4 {
        out.push(4);
    }
    if dirs.iter().any(|a| a.repeat(k) == diff) && u.x != v.x {
        out.push(5);
    }
    out
}
