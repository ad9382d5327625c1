pub mod converge;
pub mod demos;
pub mod nmse;
pub mod sparse_pt;
pub mod tim_pt;

use crate::error::{HarnessError, Result};

/// `start, start + step, ...` up to `end`, with `end` itself always included.
pub fn stepped_range(start: usize, end: usize, step: usize) -> Result<Vec<usize>> {
    if step == 0 {
        return Err(HarnessError::config("step must be positive"));
    }
    if start > end {
        return Err(HarnessError::config(format!("empty range {start}..={end}")));
    }
    let mut v: Vec<usize> = (start..=end).step_by(step).collect();
    if v.last() != Some(&end) {
        v.push(end);
    }
    Ok(v)
}

pub(crate) fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(HarnessError::config("at least one trial is required"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_always_ends_at_end() {
        assert_eq!(stepped_range(4, 12, 4).unwrap(), vec![4, 8, 12]);
        assert_eq!(stepped_range(1, 6, 2).unwrap(), vec![1, 3, 5, 6]);
        assert_eq!(stepped_range(3, 3, 5).unwrap(), vec![3]);
        assert!(stepped_range(5, 4, 1).is_err());
        assert!(stepped_range(1, 4, 0).is_err());
    }
}
