//! Deterministic, optionally parallel, compensated summation over lattice shells.
//!
//! Shells are grouped into work units by a rule that depends only on the lattice
//! rank and the shell count. Each unit is summed sequentially; unit partials are
//! then combined in unit order. The worker count only decides which thread runs
//! a unit, so results are bitwise identical for any number of workers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::clifford::{Multivector, Paravector, BLADE_COUNT};
use crate::error::Result;
use crate::lattice::{for_each_shell_representative, shell_count, Lattice, SumConfig};
use crate::scalar::Scalar;

/// Target number of point pairs per work unit.
const UNIT_PAIRS: usize = 4096;

/// Neumaier-compensated (or plain) running sum of multivectors.
#[derive(Clone, Copy, Debug)]
pub struct Accumulator<T> {
    sum: [T; BLADE_COUNT],
    comp: [T; BLADE_COUNT],
    compensated: bool,
}

impl<T: Scalar> Accumulator<T> {
    pub fn new(compensated: bool) -> Self {
        Self { sum: [T::zero(); BLADE_COUNT], comp: [T::zero(); BLADE_COUNT], compensated }
    }

    #[inline]
    pub fn add(&mut self, m: &Multivector<T>) {
        let c = m.coeffs();
        if self.compensated {
            for i in 0..BLADE_COUNT {
                let s = self.sum[i];
                let v = c[i];
                let t = s + v;
                if s.abs() >= v.abs() {
                    self.comp[i] += (s - t) + v;
                } else {
                    self.comp[i] += (v - t) + s;
                }
                self.sum[i] = t;
            }
        } else {
            for i in 0..BLADE_COUNT {
                self.sum[i] += c[i];
            }
        }
    }

    /// Folds another partial in (its sum, then its compensation).
    pub fn merge(&mut self, other: &Self) {
        self.add(&Multivector::from_coeffs(other.sum));
        if other.compensated {
            self.add(&Multivector::from_coeffs(other.comp));
        }
    }

    pub fn value(&self) -> Multivector<T> {
        let mut out = self.sum;
        if self.compensated {
            for (o, c) in out.iter_mut().zip(self.comp) {
                *o += c;
            }
        }
        Multivector::from_coeffs(out)
    }
}

/// Per-point output slots handed to the term closure of [`lattice_sum`].
pub struct Sink<'a, T> {
    accs: &'a mut [Accumulator<T>],
}

impl<T: Scalar> Sink<'_, T> {
    #[inline]
    pub fn add(&mut self, slot: usize, m: &Multivector<T>) {
        self.accs[slot].add(m);
    }
}

fn pool(workers: usize) -> Arc<ThreadPool> {
    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<ThreadPool>>>> = OnceLock::new();
    let mut pools = POOLS.get_or_init(Default::default).lock().expect("pool cache poisoned");
    pools
        .entry(workers)
        .or_insert_with(|| Arc::new(rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool")))
        .clone()
}

/// Runs `f` on `0..n` with the given worker count, collecting results in index order.
pub fn run_ordered<R, F>(n: usize, workers: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    if workers <= 1 {
        (0..n).map(f).collect()
    } else {
        pool(workers).install(|| (0..n).into_par_iter().map(f).collect())
    }
}

/// Splits shells `1..=shells` into contiguous unit ranges of roughly
/// [`UNIT_PAIRS`] pairs each.
pub fn work_units(rank: usize, shells: usize) -> Vec<(usize, usize)> {
    let mut units = Vec::new();
    let mut start = 1;
    let mut pairs = 0;
    for k in 1..=shells {
        pairs += shell_count(rank, k) / 2;
        if pairs >= UNIT_PAIRS || k == shells {
            units.push((start, k));
            start = k + 1;
            pairs = 0;
        }
    }
    units
}

/// Sums `f` over one representative `w` of every pair `{w, -w}` in shells
/// `1..=shells`. The closure adds its contributions for both `w` and `-w`
/// into `slots` output accumulators.
pub fn lattice_sum<T, F>(
    lattice: &Lattice<T>,
    shells: usize,
    cfg: &SumConfig,
    slots: usize,
    f: F,
) -> Result<Vec<Multivector<T>>>
where
    T: Scalar,
    F: Fn(&Paravector<T>, &mut Sink<'_, T>) -> Result<()> + Sync + Send,
{
    lattice_sum_with(lattice, shells, cfg, slots, || (), |w, _: &mut (), sink| f(w, sink))
}

/// [`lattice_sum`] with a per-work-unit scratch value built by `init`.
pub fn lattice_sum_with<T, S, I, F>(
    lattice: &Lattice<T>,
    shells: usize,
    cfg: &SumConfig,
    slots: usize,
    init: I,
    f: F,
) -> Result<Vec<Multivector<T>>>
where
    T: Scalar,
    I: Fn() -> S + Sync + Send,
    F: Fn(&Paravector<T>, &mut S, &mut Sink<'_, T>) -> Result<()> + Sync + Send,
{
    let rank = lattice.rank();
    let units = work_units(rank, shells);
    let partials = run_ordered(units.len(), cfg.workers, |u| -> Result<Vec<Accumulator<T>>> {
        let (k0, k1) = units[u];
        let mut accs = vec![Accumulator::new(cfg.compensated); slots];
        let mut scratch = init();
        let mut err = None;
        for k in k0..=k1 {
            for_each_shell_representative(rank, k, |m| {
                if err.is_some() {
                    return;
                }
                let w = lattice.point(m);
                if let Err(e) = f(&w, &mut scratch, &mut Sink { accs: &mut accs }) {
                    err = Some(e);
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
        Ok(accs)
    });
    let mut total = vec![Accumulator::new(cfg.compensated); slots];
    for p in partials {
        let p = p?;
        for (t, a) in total.iter_mut().zip(&p) {
            t.merge(a);
        }
    }
    Ok(total.iter().map(Accumulator::value).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_small_terms() {
        let mut plain = Accumulator::<f64>::new(false);
        let mut comp = Accumulator::<f64>::new(true);
        let big = Multivector::scalar(1.0);
        let tiny = Multivector::scalar(1e-16);
        plain.add(&big);
        comp.add(&big);
        for _ in 0..10_000 {
            plain.add(&tiny);
            comp.add(&tiny);
        }
        assert_eq!(plain.value()[0], 1.0);
        assert!((comp.value()[0] - (1.0 + 1e-12)).abs() < 1e-16);
    }

    #[test]
    fn units_partition_the_shells() {
        for rank in 1..=4 {
            let units = work_units(rank, 37);
            assert_eq!(units[0].0, 1);
            assert_eq!(units.last().unwrap().1, 37);
            for w in units.windows(2) {
                assert_eq!(w[0].1 + 1, w[1].0);
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let l = Lattice::<f64>::rectangular(3, 1.0).unwrap();
        let x = Paravector::new(0.3, 0.1, -0.2, 0.05);
        let run = |workers| {
            let cfg = SumConfig::fixed(3, 12).with_workers(workers);
            lattice_sum(&l, 12, &cfg, 1, |w, sink| {
                sink.add(0, &((x - *w).inverse()? + (x + *w).inverse()?).to_multivector());
                Ok(())
            })
            .unwrap()[0]
        };
        let a = run(1);
        for workers in [2, 3, 8] {
            assert_eq!(run(workers).coeffs(), a.coeffs());
        }
    }
}
