//! Linear-time order statistics over extended reals.
//!
//! Values are ordered by `f64::total_cmp` (so +∞ sorts above every finite
//! value) with the original index as the tie-breaker. Both selections run in
//! worst-case linear time on top of `slice::select_nth_unstable_by`, which
//! falls back to median-of-medians when quickselect pivots go bad.

use std::cmp::Ordering;

use crate::error::{Error, Result};

fn check_values(values: &[f64]) -> Result<()> {
    if let Some(i) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::invalid(format!("value at index {i} is NaN")));
    }
    Ok(())
}

fn ascending(values: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    |&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b))
}

/// The `k`-th smallest value (1-indexed) and its original index.
pub fn kth_smallest(values: &[f64], k: usize) -> Result<(f64, usize)> {
    if k == 0 || k > values.len() {
        return Err(Error::invalid(format!(
            "rank {k} out of range for {} values",
            values.len()
        )));
    }
    check_values(values)?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    let (_, &mut idx, _) = order.select_nth_unstable_by(k - 1, ascending(values));
    Ok((values[idx], idx))
}

/// Indices of the `t` largest values, ascending by index. Among equal values
/// the smaller index wins.
pub fn top_t_largest(values: &[f64], t: usize) -> Result<Vec<usize>> {
    if t == 0 || t > values.len() {
        return Err(Error::invalid(format!(
            "cannot take the {t} largest of {} values",
            values.len()
        )));
    }
    check_values(values)?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    let descending = |&a: &usize, &b: &usize| values[b].total_cmp(&values[a]).then(a.cmp(&b));
    if t < values.len() {
        order.select_nth_unstable_by(t - 1, descending);
    }
    order.truncate(t);
    order.sort_unstable();
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_kth() {
        assert_eq!(kth_smallest(&[0.9, 0.1, 0.5, 0.3, 0.7], 3).unwrap(), (0.5, 2));
        assert_eq!(kth_smallest(&[1.0, 1.0, 1.0], 2).unwrap(), (1.0, 1));
        assert_eq!(kth_smallest(&[f64::INFINITY, 2.0], 2).unwrap(), (f64::INFINITY, 0));
    }

    #[test]
    fn small_top_t() {
        assert_eq!(top_t_largest(&[0.9, 0.1, 0.5], 1).unwrap(), vec![0]);
        assert_eq!(top_t_largest(&[0.5, 0.5, 0.1], 1).unwrap(), vec![0]);
        assert_eq!(top_t_largest(&[0.1, f64::INFINITY, 0.5], 2).unwrap(), vec![1, 2]);
        assert_eq!(top_t_largest(&[0.1, 0.2], 2).unwrap(), vec![0, 1]);
    }

    #[test]
    fn out_of_range_ranks() {
        assert!(kth_smallest(&[1.0], 0).is_err());
        assert!(kth_smallest(&[1.0], 2).is_err());
        assert!(top_t_largest(&[1.0], 0).is_err());
        assert!(top_t_largest(&[1.0], 2).is_err());
        assert!(kth_smallest(&[f64::NAN, 1.0], 1).is_err());
    }
}
