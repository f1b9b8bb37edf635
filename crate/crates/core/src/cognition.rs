//! Self-organizing maps: a 2-D perception map over product signatures and a
//! 1-D conception map that predicts utility and gates attractiveness.

use rand::Rng;

use crate::error::{Error, Result};
use crate::product::{Signature, VERTICES};

/// Learning-rate and neighbourhood-radius schedules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SomSchedule {
    pub alpha0: f64,
    pub alpha_decay: f64,
    pub alpha_floor: f64,
    /// Initial radius; `None` means half the larger map dimension.
    pub radius0: Option<f64>,
    pub radius_decay: f64,
    pub radius_floor: f64,
}

impl Default for SomSchedule {
    fn default() -> Self {
        SomSchedule {
            alpha0: 0.3,
            alpha_decay: 0.999,
            alpha_floor: 0.01,
            radius0: None,
            radius_decay: 0.999,
            radius_floor: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfOrganizingMap {
    rows: usize,
    cols: usize,
    dim: usize,
    weights: Vec<f64>,
    alpha0: f64,
    alpha_decay: f64,
    alpha_floor: f64,
    radius0: f64,
    radius_decay: f64,
    radius_floor: f64,
    steps: u64,
}

impl SelfOrganizingMap {
    /// Map with explicit initial weights, row-major by node then component.
    pub fn with_weights(rows: usize, cols: usize, dim: usize, weights: Vec<f64>, schedule: SomSchedule) -> Result<Self> {
        if rows == 0 || cols == 0 || dim == 0 {
            return Err(Error::Domain("SOM needs at least one node and one dimension".into()));
        }
        if weights.len() != rows * cols * dim {
            return Err(Error::DimensionMismatch {
                expected: rows * cols * dim,
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Domain("SOM weights must be finite".into()));
        }
        let radius0 = schedule
            .radius0
            .unwrap_or(rows.max(cols) as f64 / 2.0);
        if !(schedule.alpha0 >= 0.0 && schedule.alpha0 <= 1.0)
            || !(schedule.alpha_floor >= 0.0 && schedule.alpha_floor <= 1.0)
            || !(radius0 > 0.0 && schedule.radius_floor > 0.0)
        {
            return Err(Error::Domain("SOM schedule out of range".into()));
        }
        Ok(SelfOrganizingMap {
            rows,
            cols,
            dim,
            weights,
            alpha0: schedule.alpha0,
            alpha_decay: schedule.alpha_decay,
            alpha_floor: schedule.alpha_floor,
            radius0,
            radius_decay: schedule.radius_decay,
            radius_floor: schedule.radius_floor,
            steps: 0,
        })
    }

    /// Map whose weights are drawn uniformly per component from `ranges`.
    pub fn random<R: Rng + ?Sized>(
        rows: usize,
        cols: usize,
        ranges: &[(f64, f64)],
        schedule: SomSchedule,
        rng: &mut R,
    ) -> Result<Self> {
        if ranges.is_empty() {
            return Err(Error::Domain("SOM needs at least one dimension".into()));
        }
        let weights = (0..rows * cols * ranges.len())
            .map(|i| {
                let (lo, hi) = ranges[i % ranges.len()];
                rng.random_range(lo..=hi)
            })
            .collect();
        Self::with_weights(rows, cols, ranges.len(), weights, schedule)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> usize {
        self.rows * self.cols
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node_weight(&self, node: usize) -> &[f64] {
        &self.weights[node * self.dim..(node + 1) * self.dim]
    }

    pub fn node_position(&self, node: usize) -> (usize, usize) {
        (node / self.cols, node % self.cols)
    }

    pub fn learning_rate(&self) -> f64 {
        (self.alpha0 * self.alpha_decay.powf(self.steps as f64)).max(self.alpha_floor)
    }

    pub fn radius(&self) -> f64 {
        (self.radius0 * self.radius_decay.powf(self.steps as f64)).max(self.radius_floor)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn closest_on(&self, x: &[f64], components: usize) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for node in 0..self.nodes() {
            let w = self.node_weight(node);
            let d: f64 = (0..components).map(|k| (x[k] - w[k]).powi(2)).sum();
            if d < best_d {
                best_d = d;
                best = node;
            }
        }
        best
    }

    /// Best-matching unit; ties go to the lowest node index.
    pub fn bmu(&self, x: &[f64]) -> Result<usize> {
        self.check_dim(x)?;
        Ok(self.closest_on(x, self.dim))
    }

    /// Best-matching unit over the leading `components` entries only.
    pub fn bmu_prefix(&self, x: &[f64], components: usize) -> Result<usize> {
        if components == 0 || components > self.dim || x.len() < components {
            return Err(Error::DimensionMismatch {
                expected: components,
                got: x.len(),
            });
        }
        Ok(self.closest_on(x, components))
    }

    /// One Kohonen update towards `x`, then advances the schedules.
    pub fn train_step(&mut self, x: &[f64]) -> Result<usize> {
        self.check_dim(x)?;
        let winner = self.closest_on(x, self.dim);
        let alpha = self.learning_rate();
        let radius = self.radius();
        let (wr, wc) = self.node_position(winner);
        for node in 0..self.nodes() {
            let (r, c) = self.node_position(node);
            let grid_d2 = (r as f64 - wr as f64).powi(2) + (c as f64 - wc as f64).powi(2);
            let rate = alpha * (-grid_d2 / (2.0 * radius * radius)).exp();
            if rate == 0.0 {
                continue;
            }
            let w = &mut self.weights[node * self.dim..(node + 1) * self.dim];
            for (wk, xk) in w.iter_mut().zip(x) {
                *wk += rate * (xk - *wk);
            }
        }
        self.steps += 1;
        Ok(winner)
    }

    pub fn quantization_error(&self, x: &[f64]) -> Result<f64> {
        let node = self.bmu(x)?;
        Ok(distance(x, self.node_weight(node)))
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perception {
    pub row: usize,
    pub col: usize,
    pub quantization_error: f64,
}

/// Places a signature on a 2-D perception map.
pub fn perceive(som: &SelfOrganizingMap, signature: &Signature) -> Result<Perception> {
    let node = som.bmu(signature.components())?;
    let (row, col) = som.node_position(node);
    Ok(Perception {
        row,
        col,
        quantization_error: distance(signature.components(), som.node_weight(node)),
    })
}

/// Conception input dimension: a signature followed by a utility.
pub const CONCEPT_DIM: usize = VERTICES + 1;

/// Utility-predicting 1-D map with an adaptive attractiveness threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct AttractivenessState {
    map: SelfOrganizingMap,
    threshold: f64,
    rate: f64,
}

impl AttractivenessState {
    pub fn new(map: SelfOrganizingMap, threshold: f64, rate: f64) -> Result<Self> {
        if map.dim() != CONCEPT_DIM {
            return Err(Error::DimensionMismatch {
                expected: CONCEPT_DIM,
                got: map.dim(),
            });
        }
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::Domain(format!("threshold rate {rate} outside [0, 1]")));
        }
        Ok(AttractivenessState {
            map,
            threshold: threshold.clamp(-1.0, 1.0),
            rate,
        })
    }

    pub fn map(&self) -> &SelfOrganizingMap {
        &self.map
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn set_threshold(&mut self, threshold: f64) {
        self.threshold = threshold.clamp(-1.0, 1.0);
    }

    pub fn is_primed(&self) -> bool {
        self.map.steps() > 0
    }

    /// Utility stored at the node whose signature part best matches.
    /// Does not require priming.
    pub fn predicted_utility(&self, signature: &Signature) -> f64 {
        let node = self.map.closest_on(signature.components(), VERTICES);
        self.map.node_weight(node)[VERTICES]
    }

    pub fn predict(&self, signature: &Signature) -> Result<f64> {
        if !self.is_primed() {
            return Err(Error::Unprimed);
        }
        Ok(self.predicted_utility(signature))
    }

    pub fn assess(&self, signature: &Signature) -> Result<bool> {
        Ok(self.predict(signature)? >= self.threshold)
    }

    /// Trains the map on a signature together with the utility it delivered.
    pub fn learn(&mut self, signature: &Signature, utility: f64) -> Result<()> {
        let mut x = [0.0; CONCEPT_DIM];
        x[..VERTICES].copy_from_slice(signature.components());
        x[VERTICES] = utility;
        self.map.train_step(&x).map(|_| ())
    }

    /// Moves the threshold a fraction of the way toward the realised utility.
    pub fn update_threshold(&mut self, realized: f64) {
        self.threshold = (self.threshold + self.rate * (realized - self.threshold)).clamp(-1.0, 1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Stream};
    use proptest::prelude::*;

    fn fixed(alpha: f64) -> SomSchedule {
        SomSchedule {
            alpha0: alpha,
            alpha_decay: 1.0,
            alpha_floor: alpha,
            radius0: Some(1.0),
            radius_decay: 1.0,
            radius_floor: 1.0,
        }
    }

    fn grid_3x3() -> SelfOrganizingMap {
        let weights = (0..9).flat_map(|n| [n as f64, (n * n) as f64 * 0.1]).collect();
        SelfOrganizingMap::with_weights(3, 3, 2, weights, fixed(0.5)).unwrap()
    }

    #[test]
    fn bmu_exact_and_ties() {
        let som = grid_3x3();
        assert_eq!(som.bmu(&[4.0, 1.6]).unwrap(), 4);
        let tie = SelfOrganizingMap::with_weights(1, 2, 1, vec![0.0, 2.0], fixed(0.5)).unwrap();
        assert_eq!(tie.bmu(&[1.0]).unwrap(), 0);
        assert!(matches!(som.bmu(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn bmu_matches_exhaustive_scan() {
        let som = grid_3x3();
        let mut rng = substream(4, Stream::SomInit);
        for _ in 0..200 {
            let x = [rng.random_range(-1.0..10.0), rng.random_range(-1.0..8.0)];
            let mut expected = 0;
            let mut best = f64::INFINITY;
            for n in 0..9 {
                let w = som.node_weight(n);
                let d = ((x[0] - w[0]).powi(2) + (x[1] - w[1]).powi(2)).sqrt();
                if d < best {
                    best = d;
                    expected = n;
                }
            }
            assert_eq!(som.bmu(&x).unwrap(), expected);
        }
    }

    #[test]
    fn zero_rate_leaves_weights() {
        let mut som = grid_3x3();
        som.alpha0 = 0.0;
        som.alpha_floor = 0.0;
        let before = som.weights().to_vec();
        som.train_step(&[3.0, 3.0]).unwrap();
        assert_eq!(som.weights(), &before[..]);
        assert_eq!(som.steps(), 1);
    }

    #[test]
    fn single_node_full_rate_overwrites() {
        let mut som = SelfOrganizingMap::with_weights(1, 1, 3, vec![0.0; 3], fixed(1.0)).unwrap();
        som.train_step(&[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(som.weights(), &[1.0, -2.0, 0.5]);
    }

    #[test]
    fn repeated_input_is_a_fixed_point() {
        let mut rng = substream(8, Stream::SomInit);
        let mut som = SelfOrganizingMap::random(8, 8, &[(0.0, 2.0); 6], SomSchedule::default(), &mut rng).unwrap();
        let x = [0.3, 1.7, 0.9, 1.1, 0.2, 1.4];
        for _ in 0..1000 {
            som.train_step(&x).unwrap();
        }
        let node = som.bmu(&x).unwrap();
        assert!(distance(som.node_weight(node), &x) < 1e-6);
    }

    #[test]
    fn perceive_known_node() {
        let weights: Vec<f64> = (0..4).flat_map(|n| [n as f64; 6]).collect();
        let som = SelfOrganizingMap::with_weights(2, 2, 6, weights, SomSchedule::default()).unwrap();
        let p = perceive(&som, &Signature([2.0; 6])).unwrap();
        assert_eq!((p.row, p.col, p.quantization_error), (1, 0, 0.0));
    }

    fn concept_state(threshold: f64) -> AttractivenessState {
        let mut rng = substream(2, Stream::SomInit);
        let mut ranges = vec![(0.0, 2.0); VERTICES];
        ranges.push((-1.0, 1.0));
        let map = SelfOrganizingMap::random(16, 1, &ranges, SomSchedule::default(), &mut rng).unwrap();
        AttractivenessState::new(map, threshold, 0.1).unwrap()
    }

    #[test]
    fn attractiveness_floor_and_priming() {
        let mut s = concept_state(-1.0);
        let sig = Signature([1.0; 6]);
        assert!(matches!(s.assess(&sig), Err(Error::Unprimed)));
        s.learn(&sig, 0.2).unwrap();
        assert!(s.assess(&sig).unwrap());
        assert!(s.assess(&Signature([0.0; 6])).unwrap());
        s.set_threshold(1.5);
        assert_eq!(s.threshold(), 1.0);
    }

    #[test]
    fn single_pair_training_makes_signature_attractive() {
        let mut s = concept_state(0.5);
        let sig = Signature([0.4, 1.2, 0.8, 1.6, 0.3, 1.0]);
        for _ in 0..200 {
            s.learn(&sig, 0.7).unwrap();
        }
        assert!((s.predict(&sig).unwrap() - 0.7).abs() < 1e-6);
        assert!(s.assess(&sig).unwrap());
    }

    #[test]
    fn threshold_rates() {
        let mut s = concept_state(0.0);
        s.rate = 0.0;
        s.update_threshold(0.8);
        assert_eq!(s.threshold(), 0.0);
        s.rate = 1.0;
        s.update_threshold(0.8);
        assert_eq!(s.threshold(), 0.8);
        s.rate = 0.1;
        s.set_threshold(0.0);
        let u = -0.6;
        let mut gap = (s.threshold() - u).abs();
        for _ in 0..50 {
            s.update_threshold(u);
            let next = (s.threshold() - u).abs();
            assert!((next - 0.9 * gap).abs() < 1e-12);
            gap = next;
        }
    }

    proptest! {
        #[test]
        fn training_stays_in_bounding_box(
            seed in any::<u64>(),
            inputs in prop::collection::vec(prop::array::uniform6(-1.0f64..3.0), 1..40),
        ) {
            let mut rng = substream(seed, Stream::SomInit);
            let mut som = SelfOrganizingMap::random(4, 4, &[(0.0, 2.0); 6], SomSchedule::default(), &mut rng).unwrap();
            let mut lo = [0.0f64; 6];
            let mut hi = [2.0f64; 6];
            for x in &inputs {
                for k in 0..6 {
                    lo[k] = lo[k].min(x[k]);
                    hi[k] = hi[k].max(x[k]);
                }
            }
            let copy = som.clone();
            for x in &inputs {
                som.train_step(x).unwrap();
            }
            let mut replay = copy;
            for x in &inputs {
                replay.train_step(x).unwrap();
            }
            prop_assert_eq!(replay.weights(), som.weights());
            for node in 0..som.nodes() {
                for (k, w) in som.node_weight(node).iter().enumerate() {
                    prop_assert!(w.is_finite());
                    prop_assert!(*w >= lo[k] - 1e-12 && *w <= hi[k] + 1e-12);
                }
            }
        }
    }
}
