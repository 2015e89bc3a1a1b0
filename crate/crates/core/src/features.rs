//! Feature maps over a fitted [`SphereEnsemble`].
//!
//! * [`IkFeature`]: which sphere of each partitioning contains the point. This is
//!   the `t × ψ` one-hot map stored as `t` indices.
//! * [`SikFeature`]: one bit per partitioning, set when the point lies outside
//!   every sphere of that partitioning.

use std::io::Write;

use rayon::prelude::*;

use crate::ensemble::SphereEnsemble;
use crate::error::{Result, SikError};
use crate::matrix::EmbeddingMatrix;
use crate::partition::SphereAssignment;

/// Bit-packed boundary indicator, 64 partitionings per word, LSB first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SikFeature {
    t: usize,
    words: Vec<u64>,
}

impl SikFeature {
    pub fn zeros(t: usize) -> Self {
        Self {
            t,
            words: vec![0; t.div_ceil(64)],
        }
    }

    pub fn ones(t: usize) -> Self {
        let mut f = Self::zeros(t);
        for i in 0..t {
            f.set(i, true);
        }
        f
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut f = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            f.set(i, b);
        }
        f
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.t, "bit {i} out of range for t = {}", self.t);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.t, "bit {i} out of range for t = {}", self.t);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.t).map(|i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Popcount of the bitwise AND with `other`.
    pub fn and_count(&self, other: &SikFeature) -> Result<usize> {
        if self.t != other.t {
            return Err(SikError::shape("SIK feature length", self.t, other.t));
        }
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum())
    }

    /// Packed byte encoding: `⌈t/8⌉` bytes, partitioning `i` at bit `i % 8` of byte `i / 8`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let len = Self::encoded_len(self.t);
        self.words
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(len)
            .collect()
    }

    /// Bytes per point in the packed SIK feature store.
    pub fn encoded_len(t: usize) -> usize {
        t.div_ceil(8)
    }

    /// Bits per point of the SIK representation.
    pub fn encoded_bits(t: usize) -> usize {
        t
    }
}

/// Sphere index per partitioning, `None` where the point is outside all spheres.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IkFeature {
    psi: usize,
    assignments: Vec<Option<u32>>,
}

impl IkFeature {
    pub fn new(psi: usize, assignments: Vec<Option<u32>>) -> Result<Self> {
        if let Some(bad) = assignments.iter().flatten().find(|&&j| j as usize >= psi) {
            return Err(SikError::InvalidParameter(format!(
                "sphere index {bad} out of range for psi = {psi}"
            )));
        }
        Ok(Self { psi, assignments })
    }

    pub fn t(&self) -> usize {
        self.assignments.len()
    }

    pub fn psi(&self) -> usize {
        self.psi
    }

    pub fn assignments(&self) -> &[Option<u32>] {
        &self.assignments
    }

    pub fn assignment(&self, i: usize) -> SphereAssignment {
        match self.assignments[i] {
            Some(j) => SphereAssignment::Inside(j as usize),
            None => SphereAssignment::Outside,
        }
    }

    /// Number of partitionings in which the point is inside some sphere.
    pub fn covered_count(&self) -> usize {
        self.assignments.iter().filter(|a| a.is_some()).count()
    }

    /// The dense `t × ψ` binary vector, block `i` holding partitioning `i`.
    pub fn to_dense(&self) -> Vec<u8> {
        let mut dense = vec![0u8; self.t() * self.psi];
        for (i, a) in self.assignments.iter().enumerate() {
            if let Some(j) = a {
                dense[i * self.psi + *j as usize] = 1;
            }
        }
        dense
    }

    /// The SIK feature carrying the same boundary information.
    pub fn to_sik(&self) -> SikFeature {
        let mut f = SikFeature::zeros(self.t());
        for (i, a) in self.assignments.iter().enumerate() {
            f.set(i, a.is_none());
        }
        f
    }

    /// Bits per point of the dense `t × ψ` representation.
    pub fn dense_bits(psi: usize, t: usize) -> usize {
        psi * t
    }

    /// Bytes per point of the dense representation, bit-packed.
    pub fn dense_len(psi: usize, t: usize) -> usize {
        Self::dense_bits(psi, t).div_ceil(8)
    }

    pub(crate) fn check_same_shape(&self, other: &IkFeature) -> Result<()> {
        if self.t() != other.t() {
            return Err(SikError::shape("IK feature length", self.t(), other.t()));
        }
        if self.psi != other.psi {
            return Err(SikError::shape("IK feature psi", self.psi, other.psi));
        }
        Ok(())
    }
}

pub fn sik_map(ensemble: &SphereEnsemble, x: &[f64]) -> Result<SikFeature> {
    ensemble.check_point(x)?;
    Ok(sik_map_unchecked(ensemble, x))
}

fn sik_map_unchecked(ensemble: &SphereEnsemble, x: &[f64]) -> SikFeature {
    let mut f = SikFeature::zeros(ensemble.t());
    for (i, p) in ensemble.partitionings().iter().enumerate() {
        if !p.covers_unchecked(x) {
            f.set(i, true);
        }
    }
    f
}

pub fn ik_map(ensemble: &SphereEnsemble, x: &[f64]) -> Result<IkFeature> {
    ensemble.check_point(x)?;
    Ok(ik_map_unchecked(ensemble, x))
}

fn ik_map_unchecked(ensemble: &SphereEnsemble, x: &[f64]) -> IkFeature {
    let assignments = ensemble
        .partitionings()
        .iter()
        .map(|p| p.locate_unchecked(x).index().map(|j| j as u32))
        .collect();
    IkFeature {
        psi: ensemble.psi(),
        assignments,
    }
}

/// Rows per block in batch mapping. Each partitioning is applied to a whole
/// block before moving on, so its centers stay cache-resident.
const ROW_BLOCK: usize = 64;

fn row_blocks(data: &EmbeddingMatrix) -> impl IndexedParallelIterator<Item = (usize, usize)> + '_ {
    let blocks = data.n().div_ceil(ROW_BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(move |b| (b * ROW_BLOCK, ((b + 1) * ROW_BLOCK).min(data.n())))
}

pub fn sik_map_batch(ensemble: &SphereEnsemble, data: &EmbeddingMatrix) -> Result<Vec<SikFeature>> {
    ensemble.check_matrix(data)?;
    let blocks: Vec<Vec<SikFeature>> = row_blocks(data)
        .map(|(lo, hi)| {
            let mut out = vec![SikFeature::zeros(ensemble.t()); hi - lo];
            for (i, p) in ensemble.partitionings().iter().enumerate() {
                for (f, row) in out.iter_mut().zip(lo..hi) {
                    if !p.covers_unchecked(data.row(row)) {
                        f.set(i, true);
                    }
                }
            }
            out
        })
        .collect();
    Ok(blocks.into_iter().flatten().collect())
}

pub fn ik_map_batch(ensemble: &SphereEnsemble, data: &EmbeddingMatrix) -> Result<Vec<IkFeature>> {
    ensemble.check_matrix(data)?;
    let blocks: Vec<Vec<IkFeature>> = row_blocks(data)
        .map(|(lo, hi)| {
            let mut out: Vec<Vec<Option<u32>>> = vec![Vec::with_capacity(ensemble.t()); hi - lo];
            for p in ensemble.partitionings() {
                for (a, row) in out.iter_mut().zip(lo..hi) {
                    a.push(p.locate_unchecked(data.row(row)).index().map(|j| j as u32));
                }
            }
            out.into_iter()
                .map(|assignments| IkFeature {
                    psi: ensemble.psi(),
                    assignments,
                })
                .collect()
        })
        .collect();
    Ok(blocks.into_iter().flatten().collect())
}

/// CSV export, one row per point, `t` columns of 0/1.
pub fn write_sik_csv<W: Write>(features: &[SikFeature], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let t = features.first().map_or(0, SikFeature::t);
    w.write_record((0..t).map(|i| format!("p{i}")))?;
    for f in features {
        w.write_record(f.bits().map(|b| if b { "1" } else { "0" }))?;
    }
    w.flush()?;
    Ok(())
}

/// CSV export, one row per point, `t` columns of sphere indices with `-1` for outside.
pub fn write_ik_csv<W: Write>(features: &[IkFeature], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let t = features.first().map_or(0, IkFeature::t);
    w.write_record((0..t).map(|i| format!("p{i}")))?;
    for f in features {
        w.write_record(
            f.assignments()
                .iter()
                .map(|a| a.map_or_else(|| "-1".to_string(), |j| j.to_string())),
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::fit_ensemble;
    use crate::partition::Partitioning;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian(n: usize, d: usize, seed: u64) -> EmbeddingMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..n * d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        EmbeddingMatrix::new(n, d, values).unwrap()
    }

    /// t = 2, ψ = 3. The query 11.0 sits in the overlap of spheres 0 and 1 of
    /// the first partitioning (closer to center 1) and outside the second.
    fn two_by_three() -> SphereEnsemble {
        let h1 = Partitioning::from_centers(1, vec![0.0, 10.0, 30.0]).unwrap();
        let h2 = Partitioning::from_centers(1, vec![100.0, 101.0, 103.0]).unwrap();
        SphereEnsemble::from_partitionings(vec![h1, h2], 0).unwrap()
    }

    #[test]
    fn worked_example_two_partitionings() {
        let e = two_by_three();
        let ik = ik_map(&e, &[11.0]).unwrap();
        assert_eq!(ik.to_dense(), vec![0, 1, 0, 0, 0, 0]);
        let sik = sik_map(&e, &[11.0]).unwrap();
        assert_eq!(sik.bits().collect::<Vec<_>>(), vec![false, true]);
    }

    #[test]
    fn single_partitioning_inlier_and_outlier() {
        let h = Partitioning::from_centers(2, vec![0.0, 0.0, 2.0, 0.0, 1.0, 2.0]).unwrap();
        let e = SphereEnsemble::from_partitionings(vec![h], 0).unwrap();
        let inside = sik_map(&e, &[0.5, 0.5]).unwrap();
        assert_eq!(inside.bits().collect::<Vec<_>>(), vec![false]);
        let outlier = sik_map(&e, &[10.0, 10.0]).unwrap();
        assert_eq!(outlier.bits().collect::<Vec<_>>(), vec![true]);
        assert_eq!(ik_map(&e, &[0.5, 0.5]).unwrap().to_dense().len(), 3);
    }

    #[test]
    fn remote_point_is_all_ones_and_shared_center_all_zeros() {
        let data = gaussian(16, 4, 5);
        let e = fit_ensemble(&data, 16, 70, 3).unwrap();
        let far = vec![1e6; 4];
        assert_eq!(sik_map(&e, &far).unwrap(), SikFeature::ones(70));
        // With ψ = n every row is a center of every partitioning.
        for x in data.rows() {
            assert_eq!(sik_map(&e, x).unwrap(), SikFeature::zeros(70));
        }
    }

    #[test]
    fn own_center_index() {
        let data = gaussian(50, 3, 1);
        let e = fit_ensemble(&data, 8, 5, 2).unwrap();
        let p0 = &e.partitionings()[0];
        let f = ik_map(&e, p0.center(0)).unwrap();
        assert_eq!(f.assignments()[0], Some(0));
    }

    #[test]
    fn dimension_mismatch() {
        let e = two_by_three();
        assert!(matches!(sik_map(&e, &[1.0, 2.0]), Err(SikError::Shape { .. })));
        assert!(matches!(ik_map(&e, &[]), Err(SikError::Shape { .. })));
        let m = gaussian(3, 2, 0);
        assert!(sik_map_batch(&e, &m).is_err());
        assert!(ik_map_batch(&e, &m).is_err());
    }

    #[test]
    fn batches_match_point_loop() {
        let data = gaussian(300, 6, 8);
        let e = fit_ensemble(&data, 16, 40, 4).unwrap();
        let queries = gaussian(200, 6, 9);
        let sik = sik_map_batch(&e, &queries).unwrap();
        let ik = ik_map_batch(&e, &queries).unwrap();
        for (i, x) in queries.rows().enumerate() {
            assert_eq!(sik[i], sik_map(&e, x).unwrap());
            assert_eq!(ik[i], ik_map(&e, x).unwrap());
        }
        let single = queries.select(&[17]).unwrap();
        assert_eq!(sik_map_batch(&e, &single).unwrap()[0], sik[17]);
        assert_eq!(ik_map_batch(&e, &single).unwrap()[0], ik[17]);
        let order: Vec<usize> = (0..200).rev().collect();
        let permuted = queries.select(&order).unwrap();
        let sik_p = sik_map_batch(&e, &permuted).unwrap();
        let ik_p = ik_map_batch(&e, &permuted).unwrap();
        for (k, &i) in order.iter().enumerate() {
            assert_eq!(sik_p[k], sik[i]);
            assert_eq!(ik_p[k], ik[i]);
        }
    }

    #[test]
    fn encodings_reduce_by_psi() {
        for (psi, t) in [(32, 200), (256, 200), (16, 64)] {
            assert_eq!(IkFeature::dense_bits(psi, t) / SikFeature::encoded_bits(t), psi);
            assert_eq!(IkFeature::dense_len(psi, t) / SikFeature::encoded_len(t), psi);
        }
        let f = SikFeature::ones(200);
        assert_eq!(f.to_bytes().len(), 25);
        assert_eq!(f.words().len(), 4);
    }

    #[test]
    fn byte_encoding_bit_order() {
        let f = SikFeature::from_bits(&[true, false, false, true, false, false, false, false, true]);
        assert_eq!(f.to_bytes(), vec![0b0000_1001, 0b0000_0001]);
    }

    #[test]
    fn csv_exports() {
        let e = two_by_three();
        let pts = EmbeddingMatrix::from_rows(&[[11.0], [100.0]]).unwrap();
        let mut buf = Vec::new();
        write_sik_csv(&sik_map_batch(&e, &pts).unwrap(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "p0,p1\n0,1\n1,0\n");
        let mut buf = Vec::new();
        write_ik_csv(&ik_map_batch(&e, &pts).unwrap(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "p0,p1\n1,-1\n-1,0\n");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn sik_and_ik_agree_on_boundary(seed in any::<u64>(), d in 1usize..12, psi in 2usize..24) {
            let data = gaussian(80, d, seed);
            let e = fit_ensemble(&data, psi, 30, seed ^ 1).unwrap();
            let queries = gaussian(40, d, seed.wrapping_add(3));
            for x in queries.rows() {
                let sik = sik_map(&e, x).unwrap();
                let ik = ik_map(&e, x).unwrap();
                prop_assert_eq!(&ik.to_sik(), &sik);
                let dense = ik.to_dense();
                prop_assert!(dense.iter().map(|&b| b as usize).sum::<usize>() <= e.t());
                for i in 0..e.t() {
                    let block = &dense[i * psi..(i + 1) * psi];
                    prop_assert_eq!(block.iter().all(|&b| b == 0), sik.get(i));
                }
                prop_assert_eq!(sik_map(&e, x).unwrap(), sik);
            }
        }

        #[test]
        fn centers_have_zero_bits(seed in any::<u64>()) {
            let data = gaussian(60, 3, seed);
            let e = fit_ensemble(&data, 10, 12, seed).unwrap();
            for (i, p) in e.partitionings().iter().enumerate() {
                for j in 0..p.psi() {
                    prop_assert!(!sik_map(&e, p.center(j)).unwrap().get(i));
                }
            }
        }
    }
}
