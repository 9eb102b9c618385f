//! Data-parallel helpers.
//!
//! Every hot loop in the crate (sampling points, incidence angles, training
//! samples, Jacobian rows) goes through [`Exec`]. With the `parallel` feature
//! enabled the work is spread over the rayon pool; without it, or with
//! [`Exec::Sequential`], the same closure runs on the calling thread. Results
//! are always collected in index order, so both paths produce identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution strategy for index-parallel maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Maps `f` over `0..n`, returning results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Like [`Exec::map`] for fallible closures; the first error in index
    /// order is returned.
    pub fn try_map<T, E, F>(self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }

    /// Fills `out` in chunks of `chunk` elements; `f(chunk_index, slice)`.
    pub fn for_chunks<T, F>(self, out: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        let chunk = chunk.max(1);
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => out.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c)),
            _ => out.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree() {
        let f = |i: usize| (i as f64).sqrt().sin();
        let a = Exec::Sequential.map(1000, f);
        let b = Exec::Parallel.map(1000, f);
        assert_eq!(a, b);
    }

    #[test]
    fn chunks_cover_everything() {
        let mut v = vec![0usize; 103];
        Exec::Parallel.for_chunks(&mut v, 10, |c, s| {
            for (j, x) in s.iter_mut().enumerate() {
                *x = c * 10 + j;
            }
        });
        assert!(v.iter().enumerate().all(|(i, &x)| i == x));
    }
}
