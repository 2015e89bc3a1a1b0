//! Hypersphere partitionings.
//!
//! A partitioning is built from ψ sampled points. Each sampled point becomes the
//! center of a ball whose radius is the distance to its nearest other sampled
//! point, so balls are small in dense regions and large in sparse ones. A query
//! point is either inside one of the balls or in the exterior region.

use rand::seq::index;
use rand::Rng;

use crate::distance::{euclidean, squared_euclidean_bounded};
use crate::error::{Result, SikError};
use crate::matrix::EmbeddingMatrix;

/// Result of locating a point within one partitioning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SphereAssignment {
    /// Outside every sphere of the partitioning.
    Outside,
    /// Inside sphere `j`; the nearest center wins when spheres overlap.
    Inside(usize),
}

impl SphereAssignment {
    pub fn is_outside(self) -> bool {
        matches!(self, SphereAssignment::Outside)
    }

    pub fn index(self) -> Option<usize> {
        match self {
            SphereAssignment::Outside => None,
            SphereAssignment::Inside(j) => Some(j),
        }
    }
}

/// ψ hypersphere centers with their nearest-neighbour radii.
#[derive(Debug, Clone, PartialEq)]
pub struct Partitioning {
    d: usize,
    centers: Vec<f64>,
    radii: Vec<f64>,
    // Squared-distance bound per sphere above which a point cannot be inside.
    prune: Vec<f64>,
}

impl Partitioning {
    /// Builds a partitioning from explicit centers (row-major, `psi × d`).
    pub fn from_centers(d: usize, centers: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(SikError::Empty("centers have zero dimensions"));
        }
        if !centers.len().is_multiple_of(d) {
            return Err(SikError::shape("center buffer", d, centers.len() % d));
        }
        let psi = centers.len() / d;
        if psi < 2 {
            return Err(SikError::InvalidHyperparameter(format!(
                "psi = {psi} is below the minimum of 2 (each sphere needs a nearest neighbour)"
            )));
        }
        if let Some(pos) = centers.iter().position(|v| !v.is_finite()) {
            return Err(SikError::NonFinite {
                row: pos / d,
                col: pos % d,
            });
        }
        let radii = nearest_neighbour_radii(d, &centers);
        Ok(Self::assemble(d, centers, radii))
    }

    /// Reassembles a stored partitioning; radii are trusted as given.
    pub(crate) fn from_parts(d: usize, centers: Vec<f64>, radii: Vec<f64>) -> Result<Self> {
        if centers.len() != radii.len() * d {
            return Err(SikError::shape("stored centers", radii.len() * d, centers.len()));
        }
        if radii.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(SikError::format("model", "radius is negative or non-finite"));
        }
        Ok(Self::assemble(d, centers, radii))
    }

    fn assemble(d: usize, centers: Vec<f64>, radii: Vec<f64>) -> Self {
        let slack = 1.0 + 4.0 * f64::EPSILON;
        let prune = radii.iter().map(|r| r * r * slack).collect();
        Self {
            d,
            centers,
            radii,
            prune,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn psi(&self) -> usize {
        self.radii.len()
    }

    pub fn center(&self, j: usize) -> &[f64] {
        &self.centers[j * self.d..(j + 1) * self.d]
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Finds the sphere containing `x`; see [`SphereAssignment`].
    ///
    /// Distance equal to the radius counts as inside. Among containing spheres the
    /// one with the closest center is chosen, then the lowest index.
    pub fn locate(&self, x: &[f64]) -> Result<SphereAssignment> {
        self.check_dim(x)?;
        Ok(self.locate_unchecked(x))
    }

    pub(crate) fn locate_unchecked(&self, x: &[f64]) -> SphereAssignment {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.psi() {
            let Some(sq) = squared_euclidean_bounded(self.center(j), x, self.prune[j]) else {
                continue;
            };
            let dist = sq.sqrt();
            if dist <= self.radii[j] && best.is_none_or(|(_, b)| dist < b) {
                best = Some((j, dist));
            }
        }
        best.map_or(SphereAssignment::Outside, |(j, _)| SphereAssignment::Inside(j))
    }

    /// True when `x` lies inside at least one sphere. Stops at the first hit.
    pub fn covers(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.covers_unchecked(x))
    }

    pub(crate) fn covers_unchecked(&self, x: &[f64]) -> bool {
        (0..self.psi()).any(|j| {
            squared_euclidean_bounded(self.center(j), x, self.prune[j])
                .is_some_and(|sq| sq.sqrt() <= self.radii[j])
        })
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(SikError::shape("point dimension", self.d, x.len()));
        }
        Ok(())
    }
}

fn nearest_neighbour_radii(d: usize, centers: &[f64]) -> Vec<f64> {
    let psi = centers.len() / d;
    let row = |j: usize| &centers[j * d..(j + 1) * d];
    let mut radii = vec![f64::INFINITY; psi];
    for j in 0..psi {
        for k in (j + 1)..psi {
            let dist = euclidean(row(j), row(k));
            radii[j] = radii[j].min(dist);
            radii[k] = radii[k].min(dist);
        }
    }
    radii
}

/// Draws ψ distinct row indices uniformly without replacement.
pub fn sample_subset<R: Rng + ?Sized>(
    data: &EmbeddingMatrix,
    psi: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    check_psi(psi, data.n())?;
    Ok(index::sample(rng, data.n(), psi).into_vec())
}

pub(crate) fn check_psi(psi: usize, n: usize) -> Result<()> {
    if psi < 2 {
        return Err(SikError::InvalidHyperparameter(format!(
            "psi = {psi} is below the minimum of 2"
        )));
    }
    if psi > n {
        return Err(SikError::InvalidHyperparameter(format!(
            "psi = {psi} exceeds the number of points n = {n}"
        )));
    }
    Ok(())
}

/// Builds the partitioning whose centers are the given rows of `data`.
pub fn build_partitioning(data: &EmbeddingMatrix, indices: &[usize]) -> Result<Partitioning> {
    let mut seen = indices.to_vec();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(SikError::Internal(
            "duplicate sample index in partitioning".into(),
        ));
    }
    if let Some(&bad) = seen.last().filter(|&&i| i >= data.n()) {
        return Err(SikError::Internal(format!(
            "sample index {bad} out of range for {} rows",
            data.n()
        )));
    }
    let mut centers = Vec::with_capacity(indices.len() * data.d());
    for &i in indices {
        centers.extend_from_slice(data.row(i));
    }
    Partitioning::from_centers(data.d(), centers)
}
