//! Dense grid tile coding: overlapping displaced grids producing sparse
//! binary features, with no hashing so indices never collide.

use nalgebra::DVector;

use crate::error::{Error, Result};

use super::mountain_car;

/// Grid tile coder over a box-bounded continuous state space. Tiling `i`
/// is displaced by `i / n_tilings` of a tile width in every dimension;
/// out-of-bounds states are silently clamped to the box.
#[derive(Debug, Clone)]
pub struct TileCoderConfig {
    pub n_tilings: usize,
    pub tiles_per_dim: Vec<usize>,
    pub bounds: Vec<(f64, f64)>,
}

impl TileCoderConfig {
    pub fn new(
        n_tilings: usize,
        tiles_per_dim: Vec<usize>,
        bounds: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if n_tilings == 0 {
            return Err(Error::InvalidModel("n_tilings must be at least 1".into()));
        }
        if tiles_per_dim.is_empty() || tiles_per_dim.len() != bounds.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} tile counts for {} bounded dimensions",
                tiles_per_dim.len(),
                bounds.len()
            )));
        }
        if tiles_per_dim.iter().any(|&t| t == 0) {
            return Err(Error::InvalidModel("tiles_per_dim must be at least 1".into()));
        }
        if bounds.iter().any(|&(lo, hi)| lo >= hi) {
            return Err(Error::InvalidModel("each bound needs low < high".into()));
        }
        Ok(TileCoderConfig {
            n_tilings,
            tiles_per_dim,
            bounds,
        })
    }

    /// Total feature dimension: `n_tilings × Π tiles_per_dim`.
    pub fn n_features(&self) -> usize {
        self.n_tilings * self.tiles_per_dim.iter().product::<usize>()
    }

    /// Number of active features for any state: one per tiling.
    pub fn n_active(&self) -> usize {
        self.n_tilings
    }

    /// Indices of the active tile in each tiling; exactly `n_tilings` long.
    pub fn active_indices(&self, state: &[f64]) -> Vec<usize> {
        debug_assert_eq!(state.len(), self.bounds.len());
        let cells_per_tiling: usize = self.tiles_per_dim.iter().product();
        let mut rolled = Vec::with_capacity(self.n_tilings);
        for tiling in 0..self.n_tilings {
            let shift = tiling as f64 / self.n_tilings as f64;
            let mut cell = 0usize;
            for (d, (&(lo, hi), &tiles)) in
                self.bounds.iter().zip(&self.tiles_per_dim).enumerate()
            {
                let unit = ((state[d] - lo) / (hi - lo)).clamp(0.0, 1.0);
                let width = 1.0 / tiles as f64;
                let idx = ((unit - shift * width) / width).floor() as i64;
                let idx = idx.clamp(0, tiles as i64 - 1) as usize;
                cell = cell * tiles + idx;
            }
            rolled.push(tiling * cells_per_tiling + cell);
        }
        rolled
    }

    /// Write the binary feature vector into `out` (zeroing it first).
    pub fn encode_into(&self, state: &[f64], out: &mut DVector<f64>) {
        debug_assert_eq!(out.len(), self.n_features());
        out.fill(0.0);
        for idx in self.active_indices(state) {
            out[idx] = 1.0;
        }
    }
}

/// Sparse binary feature vector for one state, as a dense 0/1 vector with
/// exactly `n_tilings` ones.
pub fn tile_code(config: &TileCoderConfig, state: &[f64]) -> DVector<f64> {
    let mut out = DVector::zeros(config.n_features());
    config.encode_into(state, &mut out);
    out
}

/// The Mountain Car coder: the requested number of 4×4 tilings over the
/// position/velocity box.
pub fn mountain_car_tiles(n_tilings: usize) -> TileCoderConfig {
    TileCoderConfig::new(
        n_tilings,
        vec![4, 4],
        vec![
            (mountain_car::POSITION_MIN, mountain_car::POSITION_MAX),
            (mountain_car::VELOCITY_MIN, mountain_car::VELOCITY_MAX),
        ],
    )
    .expect("static bounds are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exactly_one_active_tile_per_tiling() {
        let cfg = mountain_car_tiles(16);
        assert_eq!(cfg.n_features(), 16 * 16);
        let x = tile_code(&cfg, &[-0.3, 0.01]);
        assert_eq!(x.iter().filter(|&&v| v == 1.0).count(), 16);
        assert_eq!(x.iter().filter(|&&v| v != 0.0 && v != 1.0).count(), 0);
        // One index per tiling block.
        let idx = cfg.active_indices(&[-0.3, 0.01]);
        for (tiling, &i) in idx.iter().enumerate() {
            assert!(i >= tiling * 16 && i < (tiling + 1) * 16);
        }
    }

    #[test]
    fn same_cell_means_identical_features() {
        let cfg = mountain_car_tiles(16);
        // Two states well inside the same cell of every tiling: closer than
        // the finest offset spacing (tile width / n_tilings).
        let a = tile_code(&cfg, &[-0.500000, 0.010000]);
        let b = tile_code(&cfg, &[-0.500001, 0.010001]);
        assert_eq!(a, b);
    }

    #[test]
    fn states_a_full_tile_apart_never_share_all_tiles() {
        let cfg = mountain_car_tiles(16);
        let tile_width_pos = (0.5 - (-1.2)) / 4.0;
        let tile_width_vel = 0.14 / 4.0;
        for i in 0..50 {
            for j in 0..50 {
                let p = -1.2 + 1.7 * (i as f64 + 0.5) / 50.0;
                let v = -0.07 + 0.14 * (j as f64 + 0.5) / 50.0;
                let here = cfg.active_indices(&[p, v]);
                for (dp, dv) in [(tile_width_pos, 0.0), (0.0, tile_width_vel)] {
                    let p2 = p + dp;
                    let v2 = v + dv;
                    if p2 > 0.5 || v2 > 0.07 {
                        continue;
                    }
                    let there = cfg.active_indices(&[p2, v2]);
                    assert_ne!(here, there, "states a full tile apart alias at ({p},{v})");
                }
            }
        }
    }

    #[test]
    fn clamps_out_of_bounds_states() {
        let cfg = mountain_car_tiles(8);
        let inside = cfg.active_indices(&[-1.2, -0.07]);
        let outside = cfg.active_indices(&[-5.0, -1.0]);
        assert_eq!(inside, outside);
    }
}
