//! Fixed-shape parallel reductions.
//!
//! The reduction tree over `0..n` is determined by `n` and the leaf size
//! alone: ranges are split at their midpoint until they hold at most `leaf`
//! items, leaves fold their items left to right, and internal nodes combine
//! `left ⊕ right`. Results are therefore bit-identical for any thread count.

pub fn tree_reduce<T, L, C>(n: usize, leaf: usize, leaf_fn: &L, combine: &C) -> Option<T>
where
    T: Send,
    L: Fn(std::ops::Range<usize>) -> T + Sync,
    C: Fn(T, T) -> T + Sync,
{
    if n == 0 {
        return None;
    }
    Some(reduce_range(0, n, leaf.max(1), leaf_fn, combine))
}

fn reduce_range<T, L, C>(lo: usize, hi: usize, leaf: usize, leaf_fn: &L, combine: &C) -> T
where
    T: Send,
    L: Fn(std::ops::Range<usize>) -> T + Sync,
    C: Fn(T, T) -> T + Sync,
{
    if hi - lo <= leaf {
        return leaf_fn(lo..hi);
    }
    let mid = lo + (hi - lo) / 2;
    let (a, b) = rayon::join(
        || reduce_range(lo, mid, leaf, leaf_fn, combine),
        || reduce_range(mid, hi, leaf, leaf_fn, combine),
    );
    combine(a, b)
}

/// Elementwise `a += b`.
pub fn add_assign(a: &mut [f64], b: &[f64]) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sum_with_threads(threads: usize, xs: &[f64]) -> f64 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            tree_reduce(xs.len(), 3, &|r: std::ops::Range<usize>| xs[r].iter().sum::<f64>(), &|a, b| a + b)
                .unwrap()
        })
    }

    #[test]
    fn result_is_independent_of_thread_count() {
        let xs: Vec<f64> = (0..1001).map(|i| ((i * 7919) % 1013) as f64 * 1e-3 + 1e10 * (i % 3) as f64).collect();
        let one = sum_with_threads(1, &xs);
        for t in [2, 3, 8] {
            assert_eq!(one.to_bits(), sum_with_threads(t, &xs).to_bits());
        }
    }

    #[test]
    fn empty_range() {
        assert!(tree_reduce(0, 4, &|_r| 0.0, &|a: f64, b| a + b).is_none());
    }
}
