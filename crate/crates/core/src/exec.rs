//! Data-parallel map with a sequential fallback.
//!
//! Every parallel loop in the crate goes through [`map`], which preserves
//! input order. Without the `parallel` feature, [`ExecMode::Parallel`] runs
//! sequentially.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    /// Whether this mode actually fans out across threads in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

pub fn map<T, R, F>(mode: ExecMode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == ExecMode::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = mode;
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_in_both_modes() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = map(ExecMode::Sequential, &items, |v| v * v);
        let par = map(ExecMode::Parallel, &items, |v| v * v);
        assert_eq!(seq, par);
        assert_eq!(seq[999], 999 * 999);
    }
}
