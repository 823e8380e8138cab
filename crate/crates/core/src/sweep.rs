//! Per-point evaluation over a grid. Results always come back in point
//! order, so reductions over them are deterministic.

/// Sequential map, always available.
pub fn map_sequential<T, F>(points: &[Vec<f64>], f: F) -> Vec<T>
where
    F: Fn(&[f64]) -> T,
{
    points.iter().map(|p| f(p)).collect()
}

/// Data-parallel map over points.
#[cfg(feature = "parallel")]
pub fn map_parallel<T, F>(points: &[Vec<f64>], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    use rayon::prelude::*;
    points.par_iter().map(|p| f(p)).collect()
}

/// Parallel when the `parallel` feature is on, sequential otherwise.
pub fn map_points<T, F>(points: &[Vec<f64>], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        map_parallel(points, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(points, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let pts: Vec<Vec<f64>> = (0..257).map(|i| vec![i as f64]).collect();
        let a = map_points(&pts, |p| p[0] * 2.0);
        assert_eq!(a, map_sequential(&pts, |p| p[0] * 2.0));
    }
}
