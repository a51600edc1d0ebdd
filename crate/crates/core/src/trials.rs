//! Monte-Carlo trial execution. Trial `i` of master seed `m` runs with
//! `seed::split(m, Stream::Trial, i)`; results come back in trial order
//! whichever backend runs them.

use crate::seed::{self, Stream};

/// Seed of trial `index`.
pub fn trial_seed(master: u64, index: usize) -> u64 {
    seed::split(master, Stream::Trial, index as u64)
}

/// Runs `trials` trials on the current thread.
pub fn run_trials_sequential<T, F>(master: u64, trials: usize, f: F) -> Vec<T>
where
    F: Fn(usize, u64) -> T,
{
    (0..trials).map(|i| f(i, trial_seed(master, i))).collect()
}

/// Runs `trials` trials on the rayon pool.
#[cfg(feature = "parallel")]
pub fn run_trials_parallel<T, F>(master: u64, trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..trials)
        .into_par_iter()
        .map(|i| f(i, trial_seed(master, i)))
        .collect()
}

/// Parallel when the `parallel` feature is on, sequential otherwise.
pub fn run_trials<T, F>(master: u64, trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        run_trials_parallel(master, trials, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_trials_sequential(master, trials, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backends_agree_and_keep_order() {
        let f = |i: usize, s: u64| (i, s % 1000);
        let a = run_trials(9, 200, f);
        let b = run_trials_sequential(9, 200, f);
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(i, x)| x.0 == i));
        assert_ne!(trial_seed(9, 0), trial_seed(9, 1));
    }
}
